#include "battobs/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace battobs {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

Vector svec(const Matrix& s) {
  const int n = static_cast<int>(s.rows());
  Vector v(svec_size(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      v[k++] = (i == j) ? s(i, j) : kSqrt2 * s(i, j);
  return v;
}

Matrix smat(const Vector& v) {
  const int m = static_cast<int>(v.size());
  const int n = static_cast<int>(std::round((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0));
  if (svec_size(n) != m) throw std::invalid_argument("smat: length is not triangular");
  Matrix s(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double x = (i == j) ? v[k] : v[k] / kSqrt2;
      s(i, j) = x;
      s(j, i) = x;
      ++k;
    }
  return s;
}

double spectral_abscissa(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& a, double* abscissa) {
  const double alpha = spectral_abscissa(a);
  if (abscissa) *abscissa = alpha;
  return alpha < 0.0;
}

double min_eig_sym(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig_sym(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

std::optional<double> logdet_spd(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// --- Lyapunov ----------------------------------------------------------------

LyapunovSolver::LyapunovSolver(const Matrix& a) {
  Eigen::RealSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("LyapunovSolver: Schur decomposition failed");
  u_ = schur.matrixU();
  t_ = schur.matrixT();
}

// Bartels-Stewart back-substitution for T*Y + Y*T' = C with T quasi upper
// triangular. Processes 1x1/2x2 Schur blocks from the bottom-right corner.
Matrix LyapunovSolver::solve(const Matrix& q) const {
  const int n = static_cast<int>(t_.rows());
  // Block partition of T.
  std::vector<int> starts;
  for (int k = 0; k < n;) {
    starts.push_back(k);
    k += (k + 1 < n && t_(k + 1, k) != 0.0) ? 2 : 1;
  }
  const int nb = static_cast<int>(starts.size());
  auto bsize = [&](int b) {
    return (b + 1 < nb ? starts[b + 1] : n) - starts[b];
  };

  Matrix c = -(u_.transpose() * q * u_);
  Matrix y = Matrix::Zero(n, n);
  for (int bj = nb - 1; bj >= 0; --bj) {
    const int j0 = starts[bj], wj = bsize(bj);
    for (int bi = nb - 1; bi >= 0; --bi) {
      const int i0 = starts[bi], wi = bsize(bi);
      Matrix rhs = c.block(i0, j0, wi, wj);
      // Corrections from already-solved blocks.
      if (i0 + wi < n)
        rhs -= t_.block(i0, i0 + wi, wi, n - i0 - wi) * y.block(i0 + wi, j0, n - i0 - wi, wj);
      if (j0 + wj < n)
        rhs -= y.block(i0, j0 + wj, wi, n - j0 - wj) * t_.block(j0, j0 + wj, wj, n - j0 - wj).transpose();
      // Solve Tii*Yij + Yij*Tjj' = rhs via the small Kronecker system.
      const Matrix tii = t_.block(i0, i0, wi, wi);
      const Matrix tjj = t_.block(j0, j0, wj, wj);
      Matrix sys = Matrix::Zero(wi * wj, wi * wj);
      // vec(Tii*Y) = (I (x) Tii) vec(Y); vec(Y*Tjj') = (Tjj (x) I) vec(Y)
      for (int p = 0; p < wj; ++p) {
        sys.block(p * wi, p * wi, wi, wi) += tii;
        for (int r = 0; r < wj; ++r)
          sys.block(p * wi, r * wi, wi, wi) += tjj(p, r) * Matrix::Identity(wi, wi);
      }
      Eigen::Map<Vector> vrhs(rhs.data(), wi * wj);
      Vector sol = sys.partialPivLu().solve(vrhs);
      y.block(i0, j0, wi, wj) = Eigen::Map<Matrix>(sol.data(), wi, wj);
    }
  }
  return u_ * y * u_.transpose();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  return LyapunovSolver(a).solve(q);
}

Matrix controllability_gramian(const Matrix& a, const Vector& b) {
  Matrix w = solve_lyapunov(a, b * b.transpose());
  return 0.5 * (w + w.transpose());
}

// --- Riccati -----------------------------------------------------------------

namespace {

Matrix hamiltonian(const Matrix& a, const Vector& b, const Matrix& q) {
  const int n = static_cast<int>(a.rows());
  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = b * b.transpose();
  h.bottomLeftCorner(n, n) = -q;
  h.bottomRightCorner(n, n) = -a.transpose();
  return h;
}

}  // namespace

bool hamiltonian_axis_free(const Matrix& a, const Vector& b, const Matrix& q,
                           double tol_scale) {
  const Matrix h = hamiltonian(a, b, q);
  const double scale = std::max(1.0, h.norm());
  Eigen::EigenSolver<Matrix> es(h, /*computeEigenvectors=*/false);
  return (es.eigenvalues().real().array().abs() > tol_scale * scale).all();
}

CareResult solve_care_stabilizing(const Matrix& a, const Vector& b, const Matrix& q) {
  CareResult out;
  const int n = static_cast<int>(a.rows());
  const Matrix h = hamiltonian(a, b, q);
  Eigen::EigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) return out;

  // Real basis of the stable invariant subspace. Complex pairs contribute the
  // real and imaginary parts of one member.
  Matrix basis(2 * n, n);
  int cols = 0;
  for (int k = 0; k < 2 * n; ++k) {
    const std::complex<double> lam = es.eigenvalues()[k];
    if (lam.real() >= 0.0 || lam.imag() < 0.0) continue;
    if (cols >= n) return out;  // more than n stable directions: not clean
    basis.col(cols++) = es.eigenvectors().col(k).real();
    if (lam.imag() > 0.0) {
      if (cols >= n) return out;
      basis.col(cols++) = es.eigenvectors().col(k).imag();
    }
  }
  if (cols != n) return out;

  const Matrix u1 = basis.topRows(n);
  const Matrix u2 = basis.bottomRows(n);
  Eigen::FullPivLU<Matrix> lu(u1);
  if (!lu.isInvertible()) return out;
  Matrix x = u2 * lu.inverse();
  x = 0.5 * (x + x.transpose());

  const Matrix res = a.transpose() * x + x * a + x * (b * b.transpose()) * x + q;
  out.x = std::move(x);
  out.residual = res.norm() / std::max(1.0, q.norm() + out.x.norm());
  out.ok = out.residual < 1e-6;
  return out;
}

// --- matrix exponential --------------------------------------------------------

Matrix expm(const Matrix& a) {
  // Pade(13) with scaling and squaring; sufficient for the simulator's
  // cross-check use (moderate norms, modest sizes).
  static const double c[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const int n = static_cast<int>(a.rows());
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  Matrix as = a;
  if (norm > 5.4) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 5.4))));
    as /= std::pow(2.0, squarings);
  }
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a2 * a4;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix u = as * (a6 * (c[13] * a6 + c[11] * a4 + c[9] * a2) +
                         c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * id);
  const Matrix v = a6 * (c[12] * a6 + c[10] * a4 + c[8] * a2) +
                   c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace battobs
