#include "battobs/lmi.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace battobs {

void SymCoef::add(int i, int j, double v) {
  if (v == 0.0) return;
  if (i > j) std::swap(i, j);
  entries.push_back({i, j, v});
}

void SymCoef::add_to(Matrix& s, double scale) const {
  for (const auto& e : entries) {
    s(e.i, e.j) += scale * e.v;
    if (e.i != e.j) s(e.j, e.i) += scale * e.v;
  }
}

double SymCoef::dot_sym(const Matrix& v) const {
  double acc = 0.0;
  for (const auto& e : entries)
    acc += (e.i == e.j ? 1.0 : 2.0) * e.v * v(e.i, e.j);
  return acc;
}

LmiProblem LmiProblem::generic(Dims dims, Vector weights, Matrix f0,
                               std::vector<SymCoef> terms) {
  if (static_cast<int>(terms.size()) != dims.var_count())
    throw std::invalid_argument("LmiProblem: one term per variable required");
  if (weights.size() != dims.np)
    throw std::invalid_argument("LmiProblem: weights length must equal np");
  if (f0.rows() != dims.N || f0.cols() != dims.N)
    throw std::invalid_argument("LmiProblem: F0 must be N x N");
  LmiProblem p;
  p.dims_ = dims;
  p.weights_ = std::move(weights);
  p.f0_ = std::move(f0);
  p.terms_ = std::move(terms);
  p.terms_built_ = true;
  return p;
}

LmiProblem LmiProblem::from_eq9(Eq9Blocks blocks, Vector weights) {
  const int n = static_cast<int>(blocks.A.rows());
  const int ny = static_cast<int>(blocks.sensor_states.size());
  const int r = static_cast<int>(blocks.Cz.rows());
  if (blocks.A.cols() != n || blocks.bd.size() != n || blocks.Cz.cols() != n)
    throw std::invalid_argument("LmiProblem: inconsistent Eq.(9) block sizes");
  if (!(blocks.gamma > 0.0))
    throw std::invalid_argument("LmiProblem: gamma must be positive");
  for (int s : blocks.sensor_states)
    if (s < 0 || s >= n)
      throw std::invalid_argument("LmiProblem: sensor state out of range");
  if (weights.size() == 0) weights = Vector::Ones(ny);
  if (weights.size() != ny)
    throw std::invalid_argument("LmiProblem: weights length must equal sensor count");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("LmiProblem: weights must be nonnegative");

  LmiProblem p;
  p.dims_.np = ny;
  p.dims_.nx = n;
  p.dims_.ny = ny;
  p.dims_.N = n + 1 + r + ny;
  p.weights_ = std::move(weights);
  p.eq9_ = std::move(blocks);
  return p;
}

std::vector<int> LmiProblem::block_dims() const {
  if (eq9_) return {dims_.nx, 1, static_cast<int>(eq9_->Cz.rows()), dims_.np};
  return {dims_.N};
}

Vector LmiProblem::pack(const Vector& p, const Matrix& x, const Matrix& y) const {
  if (p.size() != dims_.np || x.rows() != dims_.nx || x.cols() != dims_.nx ||
      y.rows() != dims_.nx || y.cols() != dims_.ny)
    throw std::invalid_argument("LmiProblem::pack: dimension mismatch");
  Vector v(dims_.var_count());
  v.head(dims_.np) = p;
  if (dims_.nx > 0) v.segment(dims_.np, svec_size(dims_.nx)) = svec(x);
  for (int k = 0; k < dims_.ny; ++k)
    for (int i = 0; i < dims_.nx; ++i) v[y_index(i, k)] = y(i, k);
  return v;
}

void LmiProblem::unpack(const Vector& v, Vector& p, Matrix& x, Matrix& y) const {
  if (v.size() != dims_.var_count())
    throw std::invalid_argument("LmiProblem::unpack: bad length");
  p = v.head(dims_.np);
  x = dims_.nx > 0 ? smat(v.segment(dims_.np, svec_size(dims_.nx)))
                   : Matrix(0, 0);
  y.resize(dims_.nx, dims_.ny);
  for (int k = 0; k < dims_.ny; ++k)
    for (int i = 0; i < dims_.nx; ++i) y(i, k) = v[y_index(i, k)];
}

Matrix LmiProblem::eval(const Vector& v) const {
  Vector p;
  Matrix x, y;
  unpack(v, p, x, y);
  return eval(p, x, y);
}

Matrix LmiProblem::eval(const Vector& p, const Matrix& x, const Matrix& y) const {
  if (p.size() != dims_.np || x.rows() != dims_.nx || y.rows() != dims_.nx ||
      y.cols() != dims_.ny)
    throw std::invalid_argument("LmiProblem::eval: dimension mismatch");
  if (eq9_) {
    const auto& b = *eq9_;
    const int n = dims_.nx;
    const int r = static_cast<int>(b.Cz.rows());
    const int ny = dims_.np;
    Matrix f = Matrix::Zero(dims_.N, dims_.N);
    // Cy'= columns of unit vectors at the sensor states.
    Matrix ycy = Matrix::Zero(n, n);
    for (int k = 0; k < ny; ++k) ycy.col(b.sensor_states[k]) += y.col(k);
    const Matrix m11 = x * b.A + ycy;
    f.topLeftCorner(n, n) = m11 + m11.transpose();
    f.block(0, n, n, 1) = x * b.bd;
    f.block(n, 0, 1, n) = f.block(0, n, n, 1).transpose();
    f.block(0, n + 1, n, r) = b.Cz.transpose();
    f.block(n + 1, 0, r, n) = b.Cz;
    f.block(0, n + 1 + r, n, ny) = y;
    f.block(n + 1 + r, 0, ny, n) = y.transpose();
    f(n, n) = -b.gamma;
    f.block(n + 1, n + 1, r, r).diagonal().setConstant(-b.gamma);
    for (int k = 0; k < ny; ++k)
      f(n + 1 + r + k, n + 1 + r + k) = -b.gamma * p[k];
    return f;
  }
  ensure_terms();
  Matrix f = f0_;
  const Vector v = pack(p, x, y);
  for (int a = 0; a < v.size(); ++a)
    if (v[a] != 0.0) terms_[a].add_to(f, v[a]);
  return f;
}

const Matrix& LmiProblem::f0() const {
  ensure_terms();
  return f0_;
}

const std::vector<SymCoef>& LmiProblem::terms() const {
  ensure_terms();
  return terms_;
}

// Expands the Eq.(9) block map into one coefficient matrix per scalar
// variable (svec scaling included), so the generic solver sees a plain
// affine LMI.
void LmiProblem::ensure_terms() const {
  if (terms_built_) return;
  const auto& b = *eq9_;
  const int n = dims_.nx;
  const int r = static_cast<int>(b.Cz.rows());
  const int ny = dims_.np;
  const int N = dims_.N;
  const double s2 = std::sqrt(2.0);

  f0_ = Matrix::Zero(N, N);
  f0_.block(0, n + 1, n, r) = b.Cz.transpose();
  f0_.block(n + 1, 0, r, n) = b.Cz;
  f0_(n, n) = -b.gamma;
  f0_.block(n + 1, n + 1, r, r).diagonal().setConstant(-b.gamma);

  terms_.assign(dims_.var_count(), {});
  // p_k: -gamma at the (4,4) diagonal slot.
  for (int k = 0; k < ny; ++k)
    terms_[p_index(k)].add(n + 1 + r + k, n + 1 + r + k, -b.gamma);
  // X_(i,j): (1,1) gets B*A + A'*B and (1,2) gets B*bd for the scaled
  // symmetric basis matrix B of the svec coordinate.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      SymCoef& t = terms_[x_index(i, j)];
      const double w = (i == j) ? 1.0 : 1.0 / s2;
      // rows of (1,1): row i += w*A.row(j), row j += w*A.row(i); symmetrized.
      Matrix blk = Matrix::Zero(n, n);
      blk.row(i) += w * b.A.row(j);
      if (i != j) blk.row(j) += w * b.A.row(i);
      Matrix sym = blk + blk.transpose();
      for (int c = 0; c < n; ++c)
        for (int rr = 0; rr <= c; ++rr)
          if (sym(rr, c) != 0.0) t.add(rr, c, sym(rr, c));
      // (1,2) block: B*bd
      t.add(i, n, w * b.bd[j]);
      if (i != j) t.add(j, n, w * b.bd[i]);
    }
  }
  // Y_(i,k): (1,1) gets e_i c_k' + c_k e_i' (c_k unit at sensor state),
  // (1,4) gets e_i at column k.
  for (int k = 0; k < ny; ++k) {
    const int d = b.sensor_states[k];
    for (int i = 0; i < n; ++i) {
      SymCoef& t = terms_[y_index(i, k)];
      if (i == d)
        t.add(i, d, 2.0);
      else
        t.add(std::min(i, d), std::max(i, d), 1.0);
      t.add(i, n + 1 + r + k, 1.0);
    }
  }
  terms_built_ = true;
}

void LmiProblem::dump(std::ostream& os) const {
  auto csv = [&os](const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        if (j) os << ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        os << buf;
      }
      os << '\n';
    }
  };
  os << "battobs-lmi 1\n";
  os << "dims " << dims_.N << ' ' << dims_.np << ' ' << dims_.nx << ' '
     << dims_.ny << '\n';
  os << "weights\n";
  csv(weights_.transpose());
  if (eq9_) {
    os << "gamma " << eq9_->gamma << "\nsensor_states";
    for (int s : eq9_->sensor_states) os << ' ' << s;
    os << "\nblock A " << eq9_->A.rows() << ' ' << eq9_->A.cols() << '\n';
    csv(eq9_->A);
    os << "block bd " << eq9_->bd.size() << " 1\n";
    csv(eq9_->bd);
    os << "block Cz " << eq9_->Cz.rows() << ' ' << eq9_->Cz.cols() << '\n';
    csv(eq9_->Cz);
    return;
  }
  os << "block F0 " << dims_.N << ' ' << dims_.N << '\n';
  csv(f0());
  for (size_t a = 0; a < terms().size(); ++a) {
    os << "term " << a << ' ' << terms()[a].entries.size() << '\n';
    for (const auto& e : terms()[a].entries) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.v);
      os << e.i << ',' << e.j << ',' << buf << '\n';
    }
  }
}

FeasibilityReport check_feasible(const LmiProblem& problem, const LmiPoint& point) {
  const auto& d = problem.dims();
  if (point.p.size() != d.np || point.x.rows() != d.nx || point.x.cols() != d.nx ||
      point.y.rows() != d.nx || point.y.cols() != d.ny)
    throw std::invalid_argument("check_feasible: dimension mismatch");
  FeasibilityReport rep;
  const Matrix f = problem.eval(point.p, point.x, point.y);
  rep.min_eig_neg_f = min_eig_sym(-f);
  rep.min_eig_x = d.nx > 0 ? min_eig_sym(point.x)
                           : std::numeric_limits<double>::infinity();
  rep.min_p = d.np > 0 ? point.p.minCoeff()
                       : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace battobs
