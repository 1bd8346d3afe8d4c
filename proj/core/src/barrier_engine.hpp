#pragma once

// Log-det barrier path-following engine shared by the generic LMI solver and
// the structured Lyapunov-dual solver. Minimizes a linear objective subject
// to affine matrix blocks being positive definite and affine scalar rows
// being positive:
//
//   minimize   cost'theta
//   subject to S_b(theta) = C0_b + sum_a theta_a * B_{b,a}  > 0   (each block)
//              a_i'theta + b_i > 0                                (each row)
//
// Phase I augments every violated block/row with a shared slack variable s
// and minimizes s (the max-eigenvalue feasibility program); phase II follows
// the central path t -> t*mu with damped Newton centering. The returned gap
// is the standard barrier bound nu/t, and linear-row multipliers are
// recovered as 1/(t*slack).

#include <functional>
#include <string>
#include <vector>

#include "battobs/lmi.hpp"

namespace battobs::detail {

struct MatBlock {
  Matrix c0;
  std::vector<SymCoef> basis;  // one (possibly empty) coefficient per variable
};

struct LinRow {
  Vector a;
  double b = 0.0;
};

struct BarrierProblem {
  int nv = 0;
  Vector cost;
  std::vector<MatBlock> mats;
  std::vector<LinRow> lins;

  double barrier_nu() const;
};

struct EngineSettings {
  double gap_tol_rel = 1e-7;
  double mu = 20.0;
  int max_newton = 200;
  double center_tol = 1e-10;        // stage ends when lambda^2/2 below this
  double t0_scale = 0.1;            // initial gap ~ 1/t0_scale objective units
  double infeas_margin = 1e-7;      // phase I: |s| scale deciding feasibility
  double unbounded_threshold = 1e11;
  bool verbose = false;
};

enum class EngineStatus {
  Converged,
  Infeasible,    // phase I certified max-eig minimum above -margin
  Unbounded,     // objective diverged; theta holds the improving ray
  IterLimit,
  NumericalFailure,
};

struct EngineResult {
  EngineStatus status = EngineStatus::NumericalFailure;
  Vector theta;
  double objective = 0.0;
  double gap = 0.0;      // nu / t at termination
  double t = 0.0;
  int newton_steps = 0;
  Vector lin_slacks;     // a_i'theta + b_i at the final point
  std::string message;
};

// theta0 must be strictly feasible; returns Converged/Unbounded/IterLimit/
// NumericalFailure. t_start <= 0 picks the default heuristic.
EngineResult minimize(const BarrierProblem& problem, const Vector& theta0,
                      const EngineSettings& settings, double t_start = 0.0);

// Phase I from an arbitrary starting point. On success result.theta is
// strictly feasible for `problem`.
EngineResult phase1(const BarrierProblem& problem, const Vector& theta0,
                    const EngineSettings& settings);

// True when every block and row is strictly positive at theta.
bool strictly_feasible(const BarrierProblem& problem, const Vector& theta,
                       double margin = 0.0);

}  // namespace battobs::detail
