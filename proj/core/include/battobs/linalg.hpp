#pragma once

// Small dense linear-algebra helpers shared across the toolkit:
// symmetric vectorization, Lyapunov/Riccati solvers, spectral queries.

#include <Eigen/Dense>
#include <optional>

namespace battobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// --- symmetric vectorization -------------------------------------------------
// svec packs the upper triangle column by column with sqrt(2) on off-diagonal
// entries so that svec(A).dot(svec(B)) == trace(A*B) for symmetric A, B.

inline int svec_size(int n) { return n * (n + 1) / 2; }

// Index of (i,j), i<=j, in the svec ordering.
inline int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

Vector svec(const Matrix& s);
Matrix smat(const Vector& v);

// --- spectral queries --------------------------------------------------------

// Largest real part over the eigenvalues of a (general real) square matrix.
double spectral_abscissa(const Matrix& a);

bool is_hurwitz(const Matrix& a, double* abscissa = nullptr);

// Extreme eigenvalues of a symmetric matrix.
double min_eig_sym(const Matrix& s);
double max_eig_sym(const Matrix& s);

// log(det(S)) for symmetric positive definite S; nullopt if the Cholesky
// factorization fails.
std::optional<double> logdet_spd(const Matrix& s);

// --- Lyapunov / Riccati ------------------------------------------------------

// Solves A*P + P*A' + Q = 0 for Hurwitz A (Bartels-Stewart on the real Schur
// form). Q need not be symmetric; P is symmetric whenever Q is.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Matrix& a);
  Matrix solve(const Matrix& q) const;

 private:
  Matrix u_;  // orthogonal
  Matrix t_;  // quasi upper triangular
};

Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

// Controllability Gramian of (A, b): solution of A*W + W*A' + b*b' = 0.
Matrix controllability_gramian(const Matrix& a, const Vector& b);

struct CareResult {
  Matrix x;                // stabilizing solution
  double residual = 0.0;   // ||A'X + XA + XBX + Q||_F / scale
  bool ok = false;
};

// Stabilizing solution of A'X + XA + X*B*X + Q = 0 with B = bb' >= 0,
// computed from the stable invariant subspace of the Hamiltonian
// [A, bb'; -Q, -A']. Fails (ok=false) if the Hamiltonian has eigenvalues
// on the imaginary axis or the subspace is not complementary.
CareResult solve_care_stabilizing(const Matrix& a, const Vector& b, const Matrix& q);

// True when the Hamiltonian [A, bb'; -Q, -A'] has no eigenvalues within
// tol_scale*||H|| of the imaginary axis.
bool hamiltonian_axis_free(const Matrix& a, const Vector& b, const Matrix& q,
                           double tol_scale = 1e-8);

// Matrix exponential (scaling and squaring with Pade approximation).
Matrix expm(const Matrix& a);

}  // namespace battobs
