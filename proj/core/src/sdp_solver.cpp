#include "battobs/sdp.hpp"

#include <sstream>

#include "barrier_engine.hpp"
#include "eq9_fast.hpp"

namespace battobs {

namespace {

using detail::BarrierProblem;
using detail::EngineResult;
using detail::EngineSettings;
using detail::EngineStatus;

// Above this variable count the generic dense-Schur Newton step becomes the
// bottleneck and the structured path is preferred when available.
constexpr int kAutoStructuredVars = 1200;

EngineSettings engine_settings(const SdpSettings& s) {
  EngineSettings es;
  es.gap_tol_rel = s.gap_tol_rel;
  es.mu = s.mu;
  es.max_newton = s.max_iter;
  es.verbose = s.verbose;
  return es;
}

// Generic path: barrier path-following over v = [p; svec(X); vec(Y)] with
// blocks -F(v) and X(v), rows p_k - p_floor, and a phase I on demand.
SdpSolution solve_generic(const LmiProblem& prob, const SdpSettings& set) {
  SdpSolution out;
  const auto& d = prob.dims();
  const int nv = d.var_count();
  const int nsx = svec_size(d.nx);

  BarrierProblem pb;
  pb.nv = nv;
  pb.cost = Vector::Zero(nv);
  pb.cost.head(d.np) = prob.weights();

  // Block 1: -F(v) > 0.
  detail::MatBlock fblk;
  fblk.c0 = -prob.f0();
  fblk.basis.resize(nv);
  for (int a = 0; a < nv; ++a) {
    fblk.basis[a].entries.reserve(prob.terms()[a].entries.size());
    for (const auto& e : prob.terms()[a].entries)
      fblk.basis[a].add(e.i, e.j, -e.v);
  }
  pb.mats.push_back(std::move(fblk));

  // Block 2: X(v) > 0 (svec coordinates map straight to entries).
  if (d.nx > 0) {
    detail::MatBlock xblk;
    xblk.c0 = Matrix::Zero(d.nx, d.nx);
    xblk.basis.resize(nv);
    const double inv_s2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d.nx; ++j)
      for (int i = 0; i <= j; ++i)
        xblk.basis[prob.x_index(i, j)].add(i, j, i == j ? 1.0 : inv_s2);
    pb.mats.push_back(std::move(xblk));
  }

  // Rows: p_k >= p_floor.
  for (int k = 0; k < d.np; ++k) {
    detail::LinRow row;
    row.a = Vector::Zero(nv);
    row.a[prob.p_index(k)] = 1.0;
    row.b = -set.p_floor;
    pb.lins.push_back(std::move(row));
  }

  // Start: p = 1, X = I, Y = 0.
  Vector theta0 = Vector::Zero(nv);
  theta0.head(d.np).setOnes();
  if (d.nx > 0) theta0.segment(d.np, nsx) = svec(Matrix::Identity(d.nx, d.nx));

  const EngineSettings es = engine_settings(set);
  int steps = 0;
  if (!detail::strictly_feasible(pb, theta0)) {
    EngineResult p1 = detail::phase1(pb, theta0, es);
    steps += p1.newton_steps;
    if (p1.status == EngineStatus::Infeasible) {
      out.status = SolveStatus::Infeasible;
      out.iterations = steps;
      out.message = p1.message;
      return out;
    }
    if (p1.status != EngineStatus::Converged) {
      out.status = p1.status == EngineStatus::IterLimit ? SolveStatus::MaxIterations
                                                        : SolveStatus::NumericalFailure;
      out.iterations = steps;
      out.message = p1.message;
      return out;
    }
    theta0 = p1.theta;
  }

  EngineResult r = detail::minimize(pb, theta0, es);
  out.iterations = steps + r.newton_steps;
  switch (r.status) {
    case EngineStatus::Converged:
      break;
    case EngineStatus::Unbounded:
      out.status = SolveStatus::NumericalFailure;
      out.message = "generic path: unbounded objective (malformed problem)";
      return out;
    case EngineStatus::IterLimit:
      out.status = SolveStatus::MaxIterations;
      out.message = r.message;
      break;
    default:
      out.status = SolveStatus::NumericalFailure;
      out.message = r.message;
      return out;
  }

  prob.unpack(r.theta, out.p, out.x, out.y);
  out.cost = prob.weights().dot(out.p);
  const LmiPoint pt{out.p, out.x, out.y};
  const FeasibilityReport rep = check_feasible(prob, pt);
  out.cert.min_eig_neg_f = rep.min_eig_neg_f;
  out.cert.min_eig_x = rep.min_eig_x;
  out.cert.duality_gap = r.gap;
  if (r.status == EngineStatus::Converged) {
    const bool margins_ok = rep.min_eig_neg_f > set.eps_feas &&
                            (d.nx == 0 || rep.min_eig_x > set.eps_pd) &&
                            (d.np == 0 || rep.min_p >= set.p_floor);
    if (margins_ok) {
      out.status = SolveStatus::Optimal;
    } else {
      out.status = SolveStatus::NumericalFailure;
      out.message = "generic path: converged point misses strict-feasibility margins";
    }
  }
  return out;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

SdpSolution solve(const LmiProblem& prob, const SdpSettings& set) {
  const bool has_eq9 = prob.eq9().has_value();
  bool structured = false;
  switch (set.method) {
    case SdpSettings::Method::Generic:
      structured = false;
      break;
    case SdpSettings::Method::Structured:
      if (!has_eq9)
        throw std::invalid_argument("solve: structured method requires Eq.(9) metadata");
      structured = true;
      break;
    case SdpSettings::Method::Auto:
      structured = has_eq9 && prob.dims().var_count() > kAutoStructuredVars &&
                   (prob.weights().array() > 0.0).all();
      break;
  }
  if (structured) {
    SdpSolution s = detail::solve_eq9_structured(prob, set, nullptr, nullptr);
    if (s.status == SolveStatus::Optimal || s.status == SolveStatus::Infeasible)
      return s;
    // Certification did not close; fall back to the reference path when the
    // problem is small enough to afford it.
    if (set.method != SdpSettings::Method::Structured &&
        prob.dims().var_count() <= 4 * kAutoStructuredVars) {
      SdpSolution g = solve_generic(prob, set);
      if (!s.message.empty())
        g.message += (g.message.empty() ? "" : "; ") +
                     ("structured path fell back: " + s.message);
      return g;
    }
    return s;
  }
  return solve_generic(prob, set);
}

}  // namespace battobs
