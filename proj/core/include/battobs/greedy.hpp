#pragma once

#include <functional>
#include <optional>

#include "battobs/synthesis.hpp"

namespace battobs {

struct CandidateRecord {
  int removed_cell = 0;
  double cost = 0.0;  // +inf when infeasible or failed
  SolveStatus status = SolveStatus::NumericalFailure;
};

struct IterationRecord {
  int iteration = 0;  // 1-based elimination round
  std::vector<int> survivors_before;
  std::vector<CandidateRecord> candidates;  // ordered by removed cell
  int eliminated_cell = 0;
  std::vector<int> survivors_after;
  Vector survivor_p;          // optimal precisions of the surviving set
  double survivor_cost = 0.0;
};

struct PlacementRun {
  bool success = false;
  std::vector<int> selection;  // empty on the all-infeasible outcome
  std::optional<SynthesisResult> result;
  std::vector<IterationRecord> iterations;
  // Eq.(9) solves performed by the elimination loop; the final result reuses
  // the winning candidate's solve (one extra synthesis happens only if m = M).
  long total_solves = 0;
  int solver_failures = 0;  // candidates scored +inf by NumericalFailure, not
                            // by proven infeasibility
  std::string message;
};

struct GreedyOptions {
  int jobs = 0;           // <= 0 picks hardware concurrency
  double tie_rel = 1e-7;  // costs within this relative band are ties; the
                          // lowest cell index is eliminated
  std::function<void(const IterationRecord&)> progress;
};

// Iterative elimination from the full sensor set down to m sensors. weights
// has one entry per cell (empty = ones) and is restricted to each candidate
// subset. Candidates within one round are evaluated concurrently.
PlacementRun greedy_select(const ThermalModel& model, double gamma, int m,
                           const Vector& weights = {}, const SdpSettings& settings = {},
                           const GreedyOptions& options = {});

struct ExhaustiveEntry {
  std::vector<int> cells;
  double cost = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
};

struct ExhaustiveResult {
  bool success = false;
  std::vector<int> selection;
  double cost = 0.0;
  std::vector<ExhaustiveEntry> table;
  long total_solves = 0;
  std::string warning;
};

struct CapExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solves every m-subset. Throws CapExceededError when binomial(M,m) exceeds
// cap; emits a runtime warning (in .warning) when the count is large but
// under the cap.
ExhaustiveResult exhaustive_select(const ThermalModel& model, double gamma, int m,
                                   const Vector& weights = {},
                                   const SdpSettings& settings = {},
                                   long cap = 100000, int jobs = 0);

// binomial(M, m) as long (saturates at a large value).
long subset_count(int M, int m);

}  // namespace battobs
