#include "battobs/hinf.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

namespace battobs {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

Matrix level_hamiltonian(const ErrorSystem& sys, double g) {
  const int n = sys.states();
  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = sys.Ae;
  h.topRightCorner(n, n) = (sys.Be * sys.Be.transpose()) / g;
  h.bottomLeftCorner(n, n) = -(sys.Ce.transpose() * sys.Ce) / g;
  h.bottomRightCorner(n, n) = -sys.Ae.transpose();
  return h;
}

}  // namespace

ErrorSystem build_error_system(const ThermalModel& model, const SensorSelection& sensors,
                               const Matrix& L, const Vector& sigma) {
  const int n = model.state_dim();
  const int ny = sensors.count();
  if (L.rows() != n || L.cols() != ny)
    throw std::invalid_argument("build_error_system: L must be 2M x Ny");
  if (sigma.size() != ny)
    throw std::invalid_argument("build_error_system: sigma length must equal Ny");
  if ((sigma.array() <= 0.0).any())
    throw std::invalid_argument("build_error_system: sigma must be positive");

  ErrorSystem sys;
  sys.Ae = model.A + L * sensors.Cy;
  sys.Be.resize(n, 1 + ny);
  sys.Be.col(0) = model.Bd;
  if (ny > 0) sys.Be.rightCols(ny) = L * sigma.asDiagonal();
  sys.Ce = model.Cz;
  return sys;
}

double sigma_max_at(const ErrorSystem& sys, double omega) {
  const int n = sys.states();
  const std::complex<double> jw(0.0, omega);
  MatrixXcd a = -sys.Ae.cast<std::complex<double>>();
  a.diagonal().array() += jw;
  const MatrixXcd x = a.partialPivLu().solve(sys.Be.cast<std::complex<double>>());
  const MatrixXcd g = sys.Ce.cast<std::complex<double>>() * x;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g.adjoint() * g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

bool hinf_level_has_axis_crossing(const ErrorSystem& sys, double level,
                                  std::vector<double>* freqs) {
  const Matrix h = level_hamiltonian(sys, level);
  const double scale = std::max(1.0, h.norm());
  Eigen::EigenSolver<Matrix> es(h, /*computeEigenvectors=*/false);
  bool found = false;
  if (freqs) freqs->clear();
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    const auto lam = es.eigenvalues()[k];
    if (std::abs(lam.real()) <= 1e-8 * scale) {
      found = true;
      if (freqs && lam.imag() > 0.0) freqs->push_back(lam.imag());
    }
  }
  if (freqs) std::sort(freqs->begin(), freqs->end());
  return found;
}

HinfResult hinf_norm(const ErrorSystem& sys, double tol) {
  double abscissa = 0.0;
  if (!is_hurwitz(sys.Ae, &abscissa)) throw NonHurwitzError(abscissa);
  HinfResult res;
  if (sys.Be.size() == 0 || sys.Ce.size() == 0 ||
      sys.Be.norm() == 0.0 || sys.Ce.norm() == 0.0)
    return res;  // zero map

  // Lower bound from a coarse log sweep, widened if the peak hits an edge.
  double w_lo = 1e-6, w_hi = 1e3;
  double lo = 0.0;
  for (int widen = 0; widen < 4; ++widen) {
    const int pts = 60;
    int arg = -1;
    double best = sigma_max_at(sys, 0.0);
    double best_w = 0.0;
    for (int i = 0; i < pts; ++i) {
      const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(i) / (pts - 1));
      const double s = sigma_max_at(sys, w);
      if (s > best) {
        best = s;
        best_w = w;
        arg = i;
      }
    }
    lo = best;
    res.peak_freq = best_w;
    if (arg == pts - 1)
      w_hi *= 100.0;
    else if (arg == 0)
      w_lo /= 100.0;
    else
      break;
  }

  // Upper bound by doubling until the Hamiltonian is axis free.
  double hi = lo * (1.0 + 10.0 * tol);
  for (int k = 0; k < 60 && hinf_level_has_axis_crossing(sys, hi); ++k) hi *= 2.0;

  std::vector<double> freqs;
  while (hi / lo - 1.0 > tol && res.iterations < 100) {
    ++res.iterations;
    const double g = std::sqrt(lo * hi);
    if (hinf_level_has_axis_crossing(sys, g, &freqs)) {
      lo = g;  // the level is attained at some frequency
      for (size_t i = 0; i + 1 < freqs.size(); ++i) {
        const double wm = 0.5 * (freqs[i] + freqs[i + 1]);
        const double s = sigma_max_at(sys, wm);
        if (s > lo) {
          lo = s;
          res.peak_freq = wm;
        }
      }
    } else {
      hi = g;
    }
  }
  res.lo = lo;
  res.hi = hi;
  res.norm = 0.5 * (lo + hi);
  return res;
}

double hinf_norm_sweep(const ErrorSystem& sys, int points, double w_lo, double w_hi) {
  double best = sigma_max_at(sys, 0.0);
  for (int i = 0; i < points; ++i) {
    const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(i) / (points - 1));
    best = std::max(best, sigma_max_at(sys, w));
  }
  return best;
}

}  // namespace battobs
