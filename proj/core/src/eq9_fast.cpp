#include "eq9_fast.hpp"

#include <cmath>
#include <sstream>

#include "barrier_engine.hpp"

namespace battobs {

std::shared_ptr<const Eq9Basis> build_eq9_basis(const Matrix& a, const Vector& bd) {
  auto basis = std::make_shared<Eq9Basis>();
  basis->A = a;
  basis->bd = bd;
  const int n = static_cast<int>(a.rows());
  LyapunovSolver lyap(a);
  basis->L.reserve(n);
  basis->scale.resize(n);
  for (int j = 0; j < n; ++j) {
    Matrix q = Matrix::Zero(n, n);
    q.col(j) += bd;
    q.row(j) += bd.transpose();
    Matrix lj = lyap.solve(q);
    lj = 0.5 * (lj + lj.transpose());
    basis->scale[j] = 1.0 / (1.0 + lj.norm());
    basis->L.push_back(std::move(lj));
  }
  basis->Wc = lyap.solve(bd * bd.transpose());
  basis->Wc = 0.5 * (basis->Wc + basis->Wc.transpose());
  basis->wc_min_eig = min_eig_sym(basis->Wc);
  return basis;
}

namespace detail {

namespace {

struct DualModel {
  BarrierProblem pb;
  double obj_offset = 0.0;  // dual objective = -min + offset
  int n = 0;
  int ny = 0;
};

// F_red at (X, p); see header.
Matrix f_reduced(const Eq9Blocks& b, const Matrix& x, const Vector& p) {
  const int n = static_cast<int>(b.A.rows());
  Matrix f(n + 1, n + 1);
  Matrix m11 = x * b.A;
  m11 += m11.transpose().eval();
  m11 += (1.0 / b.gamma) * (b.Cz.transpose() * b.Cz);
  for (int k = 0; k < p.size(); ++k) {
    const int d = b.sensor_states[k];
    m11(d, d) -= b.gamma * p[k];
  }
  f.topLeftCorner(n, n) = m11;
  f.block(0, n, n, 1) = x * b.bd;
  f.block(n, 0, 1, n) = f.block(0, n, n, 1).transpose();
  f(n, n) = -b.gamma;
  return f;
}

DualModel make_dual(const Eq9Blocks& b, const Vector& w, double p_floor) {
  const Eq9Basis& bs = *b.basis;
  const int n = static_cast<int>(b.A.rows());
  const int ny = static_cast<int>(b.sensor_states.size());
  const Matrix czcz = b.Cz.transpose() * b.Cz;

  DualModel dm;
  dm.n = n;
  dm.ny = ny;
  dm.pb.nv = n + 1;
  dm.pb.cost = Vector::Zero(n + 1);

  detail::MatBlock z;
  z.c0 = Matrix::Zero(n + 1, n + 1);
  z.basis.resize(n + 1);
  for (int j = 0; j < n; ++j) {
    const double s = bs.scale[j];
    auto& coef = z.basis[j];
    coef.entries.reserve(svec_size(n) + 1);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r <= c; ++r)
        coef.add(r, c, s * bs.L[j](r, c));
    coef.add(j, n, s);
  }
  z.basis[n].add(n, n, 1.0);
  dm.pb.mats.push_back(std::move(z));

  for (int k = 0; k < ny; ++k) {
    const int d = b.sensor_states[k];
    detail::LinRow row;
    row.a = Vector::Zero(n + 1);
    for (int j = 0; j < n; ++j) row.a[j] = -b.gamma * bs.scale[j] * bs.L[j](d, d);
    row.b = w[k];
    dm.pb.lins.push_back(std::move(row));
  }

  // minimize -(dual objective)
  for (int j = 0; j < n; ++j) {
    double g = (czcz.cwiseProduct(bs.L[j])).sum() / b.gamma;
    for (int k = 0; k < ny; ++k)
      g -= p_floor * b.gamma * bs.L[j](b.sensor_states[k], b.sensor_states[k]);
    dm.pb.cost[j] = -bs.scale[j] * g;
  }
  dm.pb.cost[n] = b.gamma;
  dm.obj_offset = p_floor * w.sum();
  return dm;
}

// Strictly feasible dual start along the controllability-Gramian direction.
bool analytic_start(const Eq9Blocks& b, const Vector& w, const DualModel& dm,
                    Vector& zeta) {
  const Eq9Basis& bs = *b.basis;
  const int n = dm.n;
  if (bs.wc_min_eig <= 0.0) return false;
  double rho = 1.0 / (1.0 + bs.Wc.norm());
  for (int k = 0; k < dm.ny; ++k) {
    const int d = b.sensor_states[k];
    const double wdd = bs.Wc(d, d);
    if (wdd > 0.0) rho = std::min(rho, w[k] / (4.0 * b.gamma * wdd));
  }
  if (!(rho > 0.0)) return false;
  zeta = Vector::Zero(n + 1);
  for (int j = 0; j < n; ++j) zeta[j] = rho * bs.bd[j] / bs.scale[j];
  const Vector z12 = rho * bs.bd;
  zeta[n] = 0.5 * z12.dot(bs.Wc.llt().solve(z12)) / rho + 1.0;
  return strictly_feasible(dm.pb, zeta);
}

struct PolishOutcome {
  bool ok = false;
  Vector p;
  Matrix x;
  std::string msg;
};

// Riccati-certified feasibility: returns the X certificate for precision
// vector p, or nothing.
std::optional<Matrix> certificate_for(const Eq9Blocks& b, const Vector& p,
                                      const SdpSettings& set, double eps_ric) {
  const int n = static_cast<int>(b.A.rows());
  Matrix q = (b.Cz.transpose() * b.Cz) / (b.gamma * b.gamma);
  q.diagonal().array() += eps_ric / b.gamma;
  for (int k = 0; k < p.size(); ++k) {
    const int d = b.sensor_states[k];
    q(d, d) -= p[k];
  }
  CareResult care = solve_care_stabilizing(b.A, b.bd, q);
  if (!care.ok) return std::nullopt;
  Matrix x = b.gamma * care.x;
  if (min_eig_sym(x) <= set.eps_pd) return std::nullopt;
  if (max_eig_sym(f_reduced(b, x, p)) > -set.eps_feas) return std::nullopt;
  return x;
}

PolishOutcome polish(const Eq9Blocks& b, const Vector& p_hat, const SdpSettings& set) {
  PolishOutcome out;
  const double eps_ric = 1e-7 * (1.0 + b.gamma);
  const double tau = std::max(2.0 * set.eps_feas, 1e-8);
  const int ny = static_cast<int>(p_hat.size());

  const Vector base = p_hat.cwiseMax(set.p_floor);
  auto p_at = [&](double alpha) { return (alpha * base).cwiseMax(set.p_floor).eval(); };
  auto feasible = [&](double alpha) { return certificate_for(b, p_at(alpha), set, eps_ric); };

  // The floor itself feasible means the constraint is inactive.
  if (auto xf = certificate_for(b, Vector::Constant(ny, set.p_floor), set, eps_ric)) {
    out.ok = true;
    out.p = Vector::Constant(ny, set.p_floor);
    out.x = *xf;
    return out;
  }

  // Bracket the feasibility boundary along the scaling ray. The multiplier
  // estimate is near-optimal, so probe tightly around alpha = 1 first.
  double lo = 0.0, hi = 0.0;
  Matrix x_hi;
  if (auto x1 = feasible(1.0)) {
    hi = 1.0;
    x_hi = *x1;
    double cand = 1.0;
    for (double f : {1e-7, 1e-5, 1e-3, 0.1, 1.0, 7.0, 63.0, 1e4, 1e8, 1e12}) {
      cand = 1.0 / (1.0 + f);
      if (auto xc = feasible(cand)) {
        hi = cand;
        x_hi = *xc;
      } else {
        lo = cand;
        break;
      }
    }
    if (lo == 0.0) {
      out.msg = "polish: boundary not bracketed from above";
      return out;
    }
  } else {
    lo = 1.0;
    for (double f : {1e-7, 1e-5, 1e-3, 0.1, 1.0, 7.0, 63.0, 1e4}) {
      const double c = 1.0 + f;
      if (auto xc = feasible(c)) {
        hi = c;
        x_hi = *xc;
        break;
      }
      lo = c;
    }
    if (hi == 0.0) {
      out.msg = "polish: no feasible scaling of the multiplier estimate";
      return out;
    }
  }

  // Bisect with the full Riccati test to a coarse bracket, then refine with
  // the certificate fixed (F_red is affine in p, so the small eigenvalue
  // test is exact).
  while (hi / lo - 1.0 > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (auto xm = feasible(mid)) {
      hi = mid;
      x_hi = *xm;
    } else {
      lo = mid;
    }
  }

  double a_lo = 0.0, a_hi = hi;
  for (int it = 0; it < 80 && a_hi - a_lo > 1e-12 * a_hi; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    if (max_eig_sym(f_reduced(b, x_hi, p_at(mid))) <= -tau)
      a_hi = mid;
    else
      a_lo = mid;
  }

  out.ok = true;
  out.p = p_at(a_hi);
  out.x = x_hi;
  return out;
}

// Validates an improving ray as a Farkas-type infeasibility certificate.
bool validate_infeasibility_ray(const DualModel& dm, const Vector& theta) {
  const double nrm = theta.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
  const Vector r = theta / nrm;
  // Homogeneous objective must improve.
  if (dm.pb.cost.dot(r) > -1e-9) return false;
  // Homogeneous PSD block (c0 = 0, so Z is linear in the variables).
  Matrix z = Matrix::Zero(dm.n + 1, dm.n + 1);
  for (int a = 0; a < dm.pb.nv; ++a)
    if (r[a] != 0.0) dm.pb.mats[0].basis[a].add_to(z, r[a]);
  if (min_eig_sym(z) < -1e-7) return false;
  // Capped rows must not grow along the ray.
  for (const auto& row : dm.pb.lins)
    if (row.a.dot(r) < -1e-7) return false;
  return true;
}

SdpSolution finish_optimal(const LmiProblem& prob, const Eq9Blocks& b,
                           const Vector& p, const Matrix& x, double dual_obj,
                           const SdpSettings& set, int iterations) {
  SdpSolution out;
  const int n = static_cast<int>(b.A.rows());
  const int ny = static_cast<int>(b.sensor_states.size());
  out.p = p;
  out.x = x;
  out.y = Matrix::Zero(n, ny);
  for (int k = 0; k < ny; ++k)
    out.y(b.sensor_states[k], k) = -b.gamma * p[k];
  out.cost = prob.weights().dot(p);
  out.iterations = iterations;

  const double gap = out.cost - dual_obj;
  const Matrix f = prob.eval(out.p, out.x, out.y);
  out.cert.min_eig_neg_f = min_eig_sym(-f);
  out.cert.min_eig_x = min_eig_sym(out.x);
  out.cert.duality_gap = gap;

  const double gap_ok = set.gap_tol_rel * std::max(1.0, std::abs(out.cost));
  if (gap <= gap_ok && out.cert.min_eig_neg_f > set.eps_feas &&
      out.cert.min_eig_x > set.eps_pd) {
    out.status = SolveStatus::Optimal;
  } else {
    out.status = SolveStatus::NumericalFailure;
    std::ostringstream os;
    os << "structured path: certification incomplete (gap=" << gap
       << ", tol=" << gap_ok << ", min_eig_negF=" << out.cert.min_eig_neg_f
       << ", min_eig_X=" << out.cert.min_eig_x << ")";
    out.message = os.str();
  }
  return out;
}

}  // namespace

SdpSolution solve_eq9_structured(const LmiProblem& prob, const SdpSettings& set,
                                 const Eq9WarmStart* hint, Eq9WarmStart* hot_out) {
  SdpSolution out;
  if (!prob.eq9()) {
    out.message = "structured path: no Eq.(9) metadata";
    return out;
  }
  Eq9Blocks b = *prob.eq9();
  const Vector& w = prob.weights();
  if ((w.array() <= 0.0).any()) {
    out.message = "structured path: requires strictly positive weights";
    return out;
  }
  if (!b.basis) b.basis = build_eq9_basis(b.A, b.bd);
  const int n = static_cast<int>(b.A.rows());
  const int ny = static_cast<int>(b.sensor_states.size());

  // Sensor-free problems reduce to the bounded-real test itself.
  if (ny == 0) {
    out.iterations = 0;
    if (auto x = certificate_for(b, Vector::Zero(0), set, 1e-7 * (1.0 + b.gamma))) {
      out.p = Vector::Zero(0);
      out.y = Matrix::Zero(n, 0);
      return finish_optimal(prob, b, out.p, *x, 0.0, set, 0);
    }
    out.status = SolveStatus::Infeasible;
    out.message = "structured path: disturbance channel exceeds gamma with no sensors";
    return out;
  }

  DualModel dm = make_dual(b, w, set.p_floor);
  EngineSettings es;
  es.gap_tol_rel = set.gap_tol_rel / 4.0;
  es.mu = set.mu;
  es.max_newton = set.max_iter;
  es.verbose = set.verbose;

  Vector zeta;
  double t_start = 0.0;
  if (hint && hint->valid() && hint->zeta.size() == dm.pb.nv &&
      strictly_feasible(dm.pb, hint->zeta)) {
    zeta = hint->zeta;
    const double nu = dm.pb.barrier_nu();
    t_start = nu / std::max(1e-10, 0.05 * std::max(1.0, hint->objective_scale));
  } else if (!analytic_start(b, w, dm, zeta)) {
    EngineResult p1 = phase1(dm.pb, Vector::Zero(dm.pb.nv), es);
    if (p1.status != EngineStatus::Converged) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "structured path: no interior dual start (" + p1.message + ")";
      return out;
    }
    zeta = p1.theta;
  }

  EngineResult r = minimize(dm.pb, zeta, es, t_start);
  int iterations = r.newton_steps;

  if (r.status == EngineStatus::Unbounded) {
    if (validate_infeasibility_ray(dm, r.theta)) {
      out.status = SolveStatus::Infeasible;
      out.iterations = iterations;
      out.message = "structured path: validated dual improving ray";
      return out;
    }
    out.status = SolveStatus::NumericalFailure;
    out.iterations = iterations;
    out.message = "structured path: dual diverged without a valid ray";
    return out;
  }
  if (r.status != EngineStatus::Converged) {
    out.status = r.status == EngineStatus::IterLimit ? SolveStatus::MaxIterations
                                                     : SolveStatus::NumericalFailure;
    out.iterations = iterations;
    out.message = r.message;
    return out;
  }

  const double dual_obj = -r.objective + dm.obj_offset;
  if (hot_out) {
    hot_out->zeta = r.theta;
    hot_out->objective_scale = std::abs(r.objective) + 1.0;
  }

  // Multipliers of the capped rows are the precision estimates.
  Vector p_hat(ny);
  for (int k = 0; k < ny; ++k)
    p_hat[k] = 1.0 / (r.t * std::max(r.lin_slacks[k], 1e-300));

  PolishOutcome po = polish(b, p_hat, set);
  if (!po.ok) {
    out.status = SolveStatus::NumericalFailure;
    out.iterations = iterations;
    out.message = "structured path: " + po.msg;
    return out;
  }
  return finish_optimal(prob, b, po.p, po.x, dual_obj, set, iterations);
}

}  // namespace detail
}  // namespace battobs
