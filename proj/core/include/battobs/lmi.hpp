#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "battobs/linalg.hpp"

namespace battobs {

// One symmetric coefficient matrix stored as upper-triangle triplets.
struct SymCoef {
  struct Entry {
    int i, j;  // i <= j
    double v;
  };
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  void add(int i, int j, double v);
  // S += scale * coef (both halves)
  void add_to(Matrix& s, double scale) const;
  // <V, coef> with V symmetric dense
  double dot_sym(const Matrix& v) const;
};

struct Eq9Basis;  // Lyapunov-operator cache used by the structured solver

// Data of the precision-minimization LMI: the constraint
//   M(p,X,Y) = [ XA+YCy+(XA+YCy)'   X*bd   Cz'          Y            ]
//              [ *                  -g     0            0            ]
//              [ *                  *      -g*I         0            ]
//              [ *                  *      *            -g*diag(p)   ] < 0
// where Cy rows are unit vectors selecting sensor_states.
struct Eq9Blocks {
  Matrix A;                        // n x n, Hurwitz
  Vector bd;                       // n
  std::vector<int> sensor_states;  // 0-based state index per sensor, ascending
  Matrix Cz;                       // r x n
  double gamma = 0.0;
  std::shared_ptr<const Eq9Basis> basis;  // optional, filled lazily
};

// Affine LMI problem over variables v = [p; svec(X); vec(Y)]:
//   minimize weights'p  s.t.  F(v) < 0,  X > 0,  p > 0
// F(v) = F0 + sum_a v_a * term[a]. Generic instances fill the terms directly;
// Eq.(9) instances are created from their block data (terms generated on
// demand) and carry metadata that enables the structured solve path.
class LmiProblem {
 public:
  struct Dims {
    int np = 0;  // precision variables
    int nx = 0;  // X is nx x nx (0 = no X block)
    int ny = 0;  // Y is nx x ny (0 = no Y block)
    int N = 0;   // LMI size
    int var_count() const { return np + svec_size(nx) + nx * ny; }
  };

  static LmiProblem generic(Dims dims, Vector weights, Matrix f0,
                            std::vector<SymCoef> terms);
  static LmiProblem from_eq9(Eq9Blocks blocks, Vector weights);

  const Dims& dims() const { return dims_; }
  const Vector& weights() const { return weights_; }
  const std::optional<Eq9Blocks>& eq9() const { return eq9_; }
  // {n, 1, rows(Cz), Ny} for Eq.(9) problems; {N} otherwise.
  std::vector<int> block_dims() const;

  // Variable indexing within v.
  int p_index(int k) const { return k; }
  int x_index(int i, int j) const { return dims_.np + svec_index(i, j); }
  int y_index(int i, int k) const {
    return dims_.np + svec_size(dims_.nx) + k * dims_.nx + i;
  }

  Vector pack(const Vector& p, const Matrix& x, const Matrix& y) const;
  void unpack(const Vector& v, Vector& p, Matrix& x, Matrix& y) const;

  // F at a packed or unpacked point.
  Matrix eval(const Vector& v) const;
  Matrix eval(const Vector& p, const Matrix& x, const Matrix& y) const;

  // Generic term access (generated on first use for Eq.(9) problems).
  const Matrix& f0() const;
  const std::vector<SymCoef>& terms() const;

  // Plain-text dump (dimensions header + dense blocks as CSV rows).
  void dump(std::ostream& os) const;

 private:
  LmiProblem() = default;
  void ensure_terms() const;

  Dims dims_;
  Vector weights_;
  std::optional<Eq9Blocks> eq9_;
  mutable bool terms_built_ = false;
  mutable Matrix f0_;
  mutable std::vector<SymCoef> terms_;
};

// A candidate point for feasibility checking.
struct LmiPoint {
  Vector p;
  Matrix x;
  Matrix y;
};

struct FeasibilityReport {
  double min_eig_neg_f = 0.0;  // lambda_min(-F)
  double min_eig_x = 0.0;      // lambda_min(X); +inf when there is no X block
  double min_p = 0.0;          // min(p); +inf when there is no p block
  bool strictly_feasible() const {
    return min_eig_neg_f > 0.0 && min_eig_x > 0.0 && min_p > 0.0;
  }
};

// Evaluates the three strict-feasibility certificates at a point.
// Throws std::invalid_argument on dimension mismatch.
FeasibilityReport check_feasible(const LmiProblem& problem, const LmiPoint& point);

}  // namespace battobs
