#include "barrier_engine.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <limits>

namespace battobs::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BlockState {
  Matrix s;              // S_b(theta)
  Eigen::LLT<Matrix> llt;
  Matrix sinv;
  bool ok = false;
};

// Assembles S_b(theta); returns false if any block or row loses positivity.
bool refresh(const BarrierProblem& pb, const Vector& theta,
             std::vector<BlockState>& states, Vector& slacks,
             bool need_inverse) {
  bool ok = true;
  states.resize(pb.mats.size());
  for (size_t b = 0; b < pb.mats.size(); ++b) {
    const auto& mb = pb.mats[b];
    Matrix s = mb.c0;
    for (int a = 0; a < pb.nv; ++a)
      if (theta[a] != 0.0 && !mb.basis[a].empty()) mb.basis[a].add_to(s, theta[a]);
    states[b].s = std::move(s);
    states[b].llt.compute(states[b].s);
    states[b].ok = states[b].llt.info() == Eigen::Success;
    if (!states[b].ok) ok = false;
    if (ok && need_inverse)
      states[b].sinv = states[b].llt.solve(Matrix::Identity(states[b].s.rows(), states[b].s.cols()));
  }
  slacks.resize(static_cast<int>(pb.lins.size()));
  for (size_t i = 0; i < pb.lins.size(); ++i) {
    slacks[static_cast<int>(i)] = pb.lins[i].a.dot(theta) + pb.lins[i].b;
    if (slacks[static_cast<int>(i)] <= 0.0) ok = false;
  }
  return ok;
}

// Barrier value at a feasible point (uses the factorizations in `states`).
double barrier_value(const std::vector<BlockState>& states, const Vector& slacks) {
  double phi = 0.0;
  for (const auto& st : states)
    phi -= 2.0 * st.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  phi -= slacks.array().log().sum();
  return phi;
}

}  // namespace

double BarrierProblem::barrier_nu() const {
  double nu = static_cast<double>(lins.size());
  for (const auto& m : mats) nu += static_cast<double>(m.c0.rows());
  return nu;
}

bool strictly_feasible(const BarrierProblem& pb, const Vector& theta, double margin) {
  for (const auto& mb : pb.mats) {
    Matrix s = mb.c0;
    for (int a = 0; a < pb.nv; ++a)
      if (theta[a] != 0.0 && !mb.basis[a].empty()) mb.basis[a].add_to(s, theta[a]);
    if (margin > 0.0) s -= margin * Matrix::Identity(s.rows(), s.cols());
    if (Eigen::LLT<Matrix>(s).info() != Eigen::Success) return false;
  }
  for (const auto& r : pb.lins)
    if (r.a.dot(theta) + r.b <= margin) return false;
  return true;
}

namespace {

// One centering run at fixed t. Returns false on numerical failure; sets
// *diverged when the iterates indicate an unbounded objective.
bool center(const BarrierProblem& pb, Vector& theta, double t,
            const EngineSettings& set, int& steps_used, int budget,
            bool* diverged, bool tight) {
  const int nv = pb.nv;
  std::vector<BlockState> states;
  Vector slacks;
  *diverged = false;
  const double ctol = tight ? set.center_tol : std::max(set.center_tol, 1e-8);

  for (int it = 0; it < budget; ++it) {
    if (!refresh(pb, theta, states, slacks, /*need_inverse=*/true)) return false;

    // Gradient and Hessian of t*cost'theta + phi(theta).
    Vector grad = t * pb.cost;
    Matrix hess = Matrix::Zero(nv, nv);
    for (size_t b = 0; b < pb.mats.size(); ++b) {
      const auto& mb = pb.mats[b];
      const Matrix& sinv = states[b].sinv;
      const int nb = static_cast<int>(sinv.rows());
      Matrix v(nb, nb);
      Matrix w(nb, nb);
      for (int a = 0; a < nv; ++a) {
        if (mb.basis[a].empty()) continue;
        grad[a] -= mb.basis[a].dot_sym(sinv);
        // v = sinv * B_a * sinv
        w.setZero();
        for (const auto& e : mb.basis[a].entries) {
          w.col(e.i) += e.v * sinv.col(e.j);
          if (e.i != e.j) w.col(e.j) += e.v * sinv.col(e.i);
        }
        v.noalias() = w * sinv;
        for (int c = a; c < nv; ++c) {
          if (mb.basis[c].empty()) continue;
          hess(a, c) += mb.basis[c].dot_sym(v);
        }
      }
    }
    for (size_t i = 0; i < pb.lins.size(); ++i) {
      const double s = slacks[static_cast<int>(i)];
      grad -= pb.lins[i].a / s;
      hess.selfadjointView<Eigen::Upper>().rankUpdate(pb.lins[i].a, 1.0 / (s * s));
    }
    hess = hess.selfadjointView<Eigen::Upper>();

    // Newton direction with escalating ridge on factorization failure.
    Vector dir;
    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::LLT<Matrix> llt(hess + ridge * Matrix::Identity(nv, nv));
      if (llt.info() == Eigen::Success) {
        dir = llt.solve(-grad);
        break;
      }
      if (attempt >= 3) return false;
      ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, hess.diagonal().maxCoeff())
                             : ridge * 1e4;
    }
    const double lambda2 = -grad.dot(dir);
    ++steps_used;
    if (!std::isfinite(lambda2)) return false;
    if (lambda2 / 2.0 <= ctol) return true;

    // Backtracking line search: stay feasible, then Armijo on the merit.
    const double f0 = t * pb.cost.dot(theta) + barrier_value(states, slacks);
    double alpha = 1.0;
    bool accepted = false;
    std::vector<BlockState> trial_states;
    Vector trial_slacks;
    for (int ls = 0; ls < 60; ++ls) {
      Vector trial = theta + alpha * dir;
      if (refresh(pb, trial, trial_states, trial_slacks, /*need_inverse=*/false)) {
        const double f1 = t * pb.cost.dot(trial) + barrier_value(trial_states, trial_slacks);
        if (std::isfinite(f1) && f1 <= f0 - 0.25 * alpha * lambda2) {
          theta = std::move(trial);
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Flat to line-search precision: accept the current point if already
      // nearly centered, otherwise report failure.
      return lambda2 / 2.0 <= 1e-4;
    }
    if (std::abs(pb.cost.dot(theta)) > set.unbounded_threshold ||
        theta.norm() > set.unbounded_threshold) {
      *diverged = true;
      return true;
    }
  }
  return true;  // budget exhausted; caller checks steps_used
}

}  // namespace

EngineResult minimize(const BarrierProblem& pb, const Vector& theta0,
                      const EngineSettings& set, double t_start) {
  EngineResult res;
  res.theta = theta0;
  const double nu = pb.barrier_nu();

  if (!strictly_feasible(pb, theta0)) {
    res.status = EngineStatus::NumericalFailure;
    res.message = "minimize: starting point not strictly feasible";
    return res;
  }

  double obj0 = pb.cost.dot(theta0);
  double t = t_start > 0.0 ? t_start
                           : std::max(1e-8, set.t0_scale * nu / std::max(1.0, std::abs(obj0)));
  int steps = 0;
  bool any_stage = false;
  while (steps < set.max_newton) {
    bool diverged = false;
    if (!center(pb, res.theta, t, set, steps, set.max_newton - steps, &diverged,
                /*tight=*/true)) {
      res.status = EngineStatus::NumericalFailure;
      res.message = "minimize: Newton centering failed";
      return res;
    }
    if (diverged) {
      res.status = EngineStatus::Unbounded;
      res.objective = pb.cost.dot(res.theta);
      res.message = "minimize: objective diverged (problem appears unbounded)";
      return res;
    }
    any_stage = true;
    res.t = t;
    res.objective = pb.cost.dot(res.theta);
    res.gap = nu / t;
    if (set.verbose)
      std::fprintf(stderr, "[barrier] t=%.3e obj=%.10e gap=%.3e steps=%d\n", t,
                   res.objective, res.gap, steps);
    if (res.gap <= set.gap_tol_rel * std::max(1.0, std::abs(res.objective))) {
      res.status = EngineStatus::Converged;
      res.newton_steps = steps;
      std::vector<BlockState> states;
      refresh(pb, res.theta, states, res.lin_slacks, false);
      return res;
    }
    t *= set.mu;
  }
  res.status = any_stage ? EngineStatus::IterLimit : EngineStatus::NumericalFailure;
  res.newton_steps = steps;
  std::vector<BlockState> states;
  refresh(pb, res.theta, states, res.lin_slacks, false);
  res.message = "minimize: Newton budget exhausted";
  return res;
}

EngineResult phase1(const BarrierProblem& pb, const Vector& theta0,
                    const EngineSettings& set) {
  // Augmented problem over (theta, s): minimize s with every block shifted by
  // s*I and every row by s.
  BarrierProblem aug;
  aug.nv = pb.nv + 1;
  aug.cost = Vector::Zero(aug.nv);
  aug.cost[pb.nv] = 1.0;
  for (const auto& mb : pb.mats) {
    MatBlock amb;
    amb.c0 = mb.c0;
    amb.basis = mb.basis;
    SymCoef shift;
    for (int i = 0; i < mb.c0.rows(); ++i) shift.add(i, i, 1.0);
    amb.basis.push_back(std::move(shift));
    aug.mats.push_back(std::move(amb));
  }
  for (const auto& r : pb.lins) {
    LinRow ar;
    ar.a.resize(aug.nv);
    ar.a.head(pb.nv) = r.a;
    ar.a[pb.nv] = 1.0;
    ar.b = r.b;
    aug.lins.push_back(std::move(ar));
  }

  // Initial shift: make every block/row strictly positive by margin one.
  double smax = 0.0;
  for (const auto& mb : pb.mats) {
    Matrix s = mb.c0;
    for (int a = 0; a < pb.nv; ++a)
      if (theta0[a] != 0.0 && !mb.basis[a].empty()) mb.basis[a].add_to(s, theta0[a]);
    smax = std::max(smax, -min_eig_sym(s));
  }
  for (const auto& r : pb.lins)
    smax = std::max(smax, -(r.a.dot(theta0) + r.b));

  Vector th(aug.nv);
  th.head(pb.nv) = theta0;
  th[pb.nv] = smax + 1.0;

  EngineResult res;
  const double nu = aug.barrier_nu();
  const double margin = set.infeas_margin;
  double t = std::max(1e-6, set.t0_scale * nu / std::max(1.0, th[pb.nv]));
  int steps = 0;
  while (steps < set.max_newton) {
    bool diverged = false;
    if (!center(aug, th, t, set, steps, set.max_newton - steps, &diverged,
                /*tight=*/false)) {
      res.status = EngineStatus::NumericalFailure;
      res.message = "phase1: Newton centering failed";
      return res;
    }
    const double s = th[pb.nv];
    const double gap = nu / t;
    if (set.verbose)
      std::fprintf(stderr, "[phase1] t=%.3e s=%.3e gap=%.3e steps=%d\n", t, s, gap, steps);
    if (s < -margin) {
      res.status = EngineStatus::Converged;
      res.theta = th.head(pb.nv);
      res.newton_steps = steps;
      res.t = t;
      return res;
    }
    if (s - gap > -margin) {
      res.status = EngineStatus::Infeasible;
      res.theta = th.head(pb.nv);
      res.objective = s;
      res.gap = gap;
      res.newton_steps = steps;
      res.message = "phase1: no strictly feasible point (max-eig minimum above margin)";
      return res;
    }
    t *= set.mu;
  }
  res.status = EngineStatus::IterLimit;
  res.theta = th.head(pb.nv);
  res.newton_steps = steps;
  res.message = "phase1: Newton budget exhausted";
  return res;
}

}  // namespace battobs::detail
