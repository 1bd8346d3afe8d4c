#include "battobs/synthesis.hpp"

#include <sstream>

#include "eq9_fast.hpp"

namespace battobs {

namespace {
constexpr double kNormSlack = 1e-6;  // absolute slack on the verified norm
}

void SynthesisSpec::check() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("SynthesisSpec: gamma must be > 0");
  if (sensors.Cy.cols() != model.state_dim())
    throw std::invalid_argument("SynthesisSpec: sensor selection does not match model");
  if (weights.size() != 0) {
    if (weights.size() != sensors.count())
      throw std::invalid_argument("SynthesisSpec: weights length must equal sensor count");
    if ((weights.array() < 0.0).any())
      throw std::invalid_argument("SynthesisSpec: weights must be nonnegative");
  }
}

LmiProblem assemble_lmi(const SynthesisSpec& spec) {
  spec.check();
  Eq9Blocks b;
  b.A = spec.model.A;
  b.bd = spec.model.Bd.col(0);
  b.Cz = spec.model.Cz;
  b.gamma = spec.gamma;
  b.sensor_states.reserve(spec.sensors.indices.size());
  for (int cell : spec.sensors.indices)
    b.sensor_states.push_back(ThermalModel::surface_state(cell));
  Vector w = spec.weights.size() ? spec.weights : Vector::Ones(spec.sensors.count());
  return LmiProblem::from_eq9(std::move(b), std::move(w));
}

Matrix recover_gain(const Matrix& x, const Matrix& y) {
  if (x.rows() != x.cols() || x.rows() != y.rows())
    throw std::invalid_argument("recover_gain: dimension mismatch");
  Eigen::LDLT<Matrix> ldlt(x);
  Matrix l = ldlt.solve(y);
  const double ynorm = y.norm();
  const double resid = (x * l - y).norm();
  if (ldlt.info() != Eigen::Success || !l.allFinite() ||
      resid > 1e-9 * std::max(ynorm, 1e-30)) {
    std::ostringstream os;
    os << "recover_gain: X numerically singular or solve inaccurate (residual "
       << resid << " vs bound " << 1e-9 * ynorm << ")";
    throw std::runtime_error(os.str());
  }
  return l;
}

struct SynthesisWarmToken {
  detail::Eq9WarmStart ws;
};

namespace {

SynthesisOutcome finalize(const SynthesisSpec& spec, const LmiProblem& prob,
                          SdpSolution&& sol) {
  SynthesisOutcome out;
  out.status = sol.status;
  out.message = sol.message;
  if (sol.status != SolveStatus::Optimal) return out;

  SynthesisResult r;
  r.sensor_cells = spec.sensors.indices;
  r.p = sol.p;
  r.sigma = sol.p.array().pow(-0.5);
  r.X = sol.x;
  r.Y = sol.y;
  r.cost = sol.cost;
  r.gamma = spec.gamma;
  r.cert = sol.cert;
  r.iterations = sol.iterations;
  try {
    r.L = recover_gain(sol.x, sol.y);
  } catch (const std::runtime_error& e) {
    out.status = SolveStatus::NumericalFailure;
    out.message = e.what();
    return out;
  }

  // Independent verification of the realized error system.
  const ErrorSystem sys = build_error_system(spec.model, spec.sensors, r.L, r.sigma);
  double abscissa = 0.0;
  if (!is_hurwitz(sys.Ae, &abscissa)) {
    out.status = SolveStatus::NumericalFailure;
    std::ostringstream os;
    os << "synthesize: A + L*Cy not Hurwitz after recovery (abscissa " << abscissa << ")";
    out.message = os.str();
    return out;
  }
  const HinfResult h = hinf_norm(sys, 1e-8);
  r.verified_norm = h.norm;
  if (!(h.norm < spec.gamma + kNormSlack)) {
    out.status = SolveStatus::NumericalFailure;
    std::ostringstream os;
    os << "synthesize: verified norm " << h.norm << " not below gamma " << spec.gamma
       << " + " << kNormSlack;
    out.message = os.str();
    return out;
  }
  out.result = std::move(r);
  (void)prob;
  return out;
}

}  // namespace

SynthesisOutcome synthesize(const SynthesisSpec& spec, const SdpSettings& settings) {
  spec.check();
  const LmiProblem prob = assemble_lmi(spec);
  SdpSolution sol = solve(prob, settings);
  return finalize(spec, prob, std::move(sol));
}

SynthesisEngine::SynthesisEngine(ThermalModel model, SdpSettings settings)
    : model_(std::move(model)), settings_(settings) {
  basis_ = build_eq9_basis(model_.A, model_.Bd.col(0));
}

SynthesisEngine::~SynthesisEngine() = default;

SynthesisOutcome SynthesisEngine::run(const std::vector<int>& cells, double gamma,
                                      const Vector& weights,
                                      const SynthesisWarmToken* hint,
                                      std::shared_ptr<const SynthesisWarmToken>* hot) const {
  SynthesisSpec spec;
  spec.model = model_;
  spec.sensors = build_measurement(model_, cells);
  spec.gamma = gamma;
  spec.weights = weights;
  spec.check();

  LmiProblem prob = assemble_lmi(spec);

  // Decide the path exactly as solve() would, but carry the shared basis and
  // warm-start state through the structured route.
  bool structured = false;
  switch (settings_.method) {
    case SdpSettings::Method::Structured:
      structured = true;
      break;
    case SdpSettings::Method::Generic:
      structured = false;
      break;
    case SdpSettings::Method::Auto:
      structured = prob.dims().var_count() > 1200 &&
                   (prob.weights().array() > 0.0).all();
      break;
  }
  if (!structured) return finalize(spec, prob, solve(prob, settings_));

  Eq9Blocks blocks = *prob.eq9();
  blocks.basis = basis_;
  LmiProblem cached = LmiProblem::from_eq9(std::move(blocks), prob.weights());

  detail::Eq9WarmStart hot_ws;
  SdpSolution sol = detail::solve_eq9_structured(
      cached, settings_, hint ? &hint->ws : nullptr, hot ? &hot_ws : nullptr);
  if (hot && hot_ws.valid()) {
    auto token = std::make_shared<SynthesisWarmToken>();
    token->ws = std::move(hot_ws);
    *hot = std::move(token);
  }
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Infeasible &&
      settings_.method == SdpSettings::Method::Auto &&
      prob.dims().var_count() <= 4800) {
    SdpSettings generic = settings_;
    generic.method = SdpSettings::Method::Generic;
    return finalize(spec, prob, solve(prob, generic));
  }
  return finalize(spec, prob, std::move(sol));
}

}  // namespace battobs
