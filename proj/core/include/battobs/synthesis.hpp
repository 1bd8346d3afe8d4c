#pragma once

#include <memory>
#include <optional>

#include "battobs/hinf.hpp"
#include "battobs/sdp.hpp"
#include "battobs/thermal_model.hpp"

namespace battobs {

struct SynthesisSpec {
  ThermalModel model;
  SensorSelection sensors;
  double gamma = 1.0;
  Vector weights;  // empty = all ones

  void check() const;
};

// Builds the precision-minimization LMI for the spec (4x4 block layout with
// Eq.(9) metadata attached for the structured solver).
LmiProblem assemble_lmi(const SynthesisSpec& spec);

struct SynthesisResult {
  std::vector<int> sensor_cells;
  Vector p;       // optimal precisions
  Vector sigma;   // p^(-1/2)
  Matrix L;       // observer gain, 2M x Ny
  Matrix X, Y;    // certificate matrices (L = X^-1 Y)
  double cost = 0.0;
  double gamma = 0.0;
  double verified_norm = 0.0;  // independent H-inf check of the realized loop
  SdpCertificates cert;
  int iterations = 0;
};

struct SynthesisOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::optional<SynthesisResult> result;
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal && result.has_value(); }
};

// Solves the LMI and recovers the observer. Optimal results are re-verified
// with the independent norm oracle (A+LCy Hurwitz, norm < gamma + 1e-6);
// verification failure is reported as NumericalFailure, never hidden.
SynthesisOutcome synthesize(const SynthesisSpec& spec, const SdpSettings& settings = {});

// Solves X*L = Y. Throws std::runtime_error when X is numerically singular
// or the residual exceeds 1e-9 * ||Y||.
Matrix recover_gain(const Matrix& X, const Matrix& Y);

struct SynthesisWarmToken;  // opaque solver state reusable across subsets

// Per-model synthesis front end. Precomputes what the structured solver
// shares across sensor subsets; safe for concurrent run() calls.
class SynthesisEngine {
 public:
  SynthesisEngine(ThermalModel model, SdpSettings settings);
  ~SynthesisEngine();
  SynthesisEngine(const SynthesisEngine&) = delete;
  SynthesisEngine& operator=(const SynthesisEngine&) = delete;

  const ThermalModel& model() const { return model_; }
  const SdpSettings& settings() const { return settings_; }

  SynthesisOutcome run(const std::vector<int>& cells, double gamma,
                       const Vector& weights = {},
                       const SynthesisWarmToken* hint = nullptr,
                       std::shared_ptr<const SynthesisWarmToken>* hot = nullptr) const;

 private:
  ThermalModel model_;
  SdpSettings settings_;
  std::shared_ptr<const struct Eq9Basis> basis_;
};

}  // namespace battobs
