#pragma once

// Structured solve path for the precision-minimization LMI.
//
// The Y variable is eliminated exactly: completing the square of the Schur
// complement against the -gamma*diag(p) block shows the feasible (X,p)
// projection is
//   F_red(X,p) = [ XA+A'X + (1/g)Cz'Cz - g*Cy'diag(p)Cy ,  X*bd ]  < 0
//                [ bd'X                                 ,  -g   ]
// with the minimizing Y* = -g*Cy'diag(p). Dualizing F_red (X free symmetric;
// X>0 is re-verified at recovery) gives a semidefinite program whose matrix
// variable is pinned by a Lyapunov equation, leaving only 2M+1 scalars:
//
//   max  (1/g)<Cz'Cz, Z11> - g*z22 + floor terms
//   s.t. Z11 = sum_j z12_j * L_j,   A L_j + L_j A' + (bd e_j' + e_j bd') = 0
//        [Z11, z12; z12', z22] >= 0,    g*Z11[d_k,d_k] <= w_k
//
// The dual optimum lower-bounds the cost; linear-row multipliers recover p;
// a Riccati solve at the polished p produces the X certificate; the
// feasible/dual sandwich certifies optimality instance by instance.

#include <memory>

#include "battobs/lmi.hpp"
#include "battobs/sdp.hpp"

namespace battobs {

// Per-model cache: the Lyapunov operator basis is sensor-set independent and
// is shared across all solves on one model (read-only, thread safe).
struct Eq9Basis {
  Matrix A;
  Vector bd;
  std::vector<Matrix> L;  // L_j = lyap(A, bd e_j' + e_j bd')
  Vector scale;           // per-variable normalization 1/(1+||L_j||_F)
  Matrix Wc;              // controllability Gramian of (A, bd)
  double wc_min_eig = 0.0;
};

std::shared_ptr<const Eq9Basis> build_eq9_basis(const Matrix& a, const Vector& bd);

namespace detail {

struct Eq9WarmStart {
  Vector zeta;
  double objective_scale = 0.0;
  bool valid() const { return zeta.size() > 0; }
};

SdpSolution solve_eq9_structured(const LmiProblem& problem, const SdpSettings& settings,
                                 const Eq9WarmStart* hint, Eq9WarmStart* hot_out);

}  // namespace detail
}  // namespace battobs
