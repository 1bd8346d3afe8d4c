#include "battobs/thermal_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace battobs {

CellParams CellParams::default_a123() {
  CellParams p;
  p.Cc = 67.0;
  p.Cs = 4.5;
  p.Cf = 2.6;
  p.Re = 0.01;
  p.Rc = 1.83;
  p.Ru = 5.0;
  p.Rcc = 0.2;
  p.Sd = 10.0;
  return p;
}

std::vector<std::string> validate(const CellParams& p) {
  auto bad = [](const char* name, double v) {
    std::ostringstream os;
    os << "cell parameter " << name << " must be strictly positive, got " << v;
    throw std::invalid_argument(os.str());
  };
  if (!(p.Cc > 0)) bad("Cc", p.Cc);
  if (!(p.Cs > 0)) bad("Cs", p.Cs);
  if (!(p.Cf > 0)) bad("Cf", p.Cf);
  if (!(p.Re > 0)) bad("Re", p.Re);
  if (!(p.Rc > 0)) bad("Rc", p.Rc);
  if (!(p.Ru > 0)) bad("Ru", p.Ru);
  if (!(p.Rcc > 0)) bad("Rcc", p.Rcc);
  if (!(p.Sd > 0)) bad("Sd", p.Sd);

  std::vector<std::string> warnings;
  if (p.Cf * p.Ru <= 1.0) {
    std::ostringstream os;
    os << "Cf*Ru = " << p.Cf * p.Ru
       << " <= 1: the coolant-chain factor (1 - 1/(Cf*Ru)) is non-positive; "
          "the model is outside its intended regime";
    warnings.push_back(os.str());
  }
  return warnings;
}

ThermalModel build_model(const CellParams& params, int M) {
  ThermalModel m = build_model(params, M, Matrix::Identity(2 * M, 2 * M));
  return m;
}

ThermalModel build_model(const CellParams& params, int M, const Matrix& Cz) {
  if (M < 2)
    throw std::invalid_argument(
        "build_model: M must be at least 2 (the cell-to-cell conduction term "
        "is undefined for a single cell)");
  validate(params);

  const int n = 2 * M;
  if (Cz.cols() != n)
    throw std::invalid_argument("build_model: Cz must have 2M columns");
  if (Cz.rows() > n || Eigen::ColPivHouseholderQR<Matrix>(Cz.transpose()).rank() != Cz.rows())
    throw std::invalid_argument("build_model: Cz must have full row rank");

  ThermalModel model;
  model.M = M;
  model.params = params;
  model.Cz = Cz;
  model.A = Matrix::Zero(n, n);
  model.Bu = Matrix::Zero(n, 2);

  // Row vectors over [x; u] give each coolant temperature as an affine
  // function of the surface temperatures upstream and the inlet input:
  //   Tf_1 = Tf_in,   Tf_i = Tf_{i-1} + (Ts_{i-1} - Tf_{i-1}) / (Cf*Ru).
  const int nc = n + 2;
  const double k = 1.0 / (params.Cf * params.Ru);
  std::vector<Vector> coolant(M + 1, Vector::Zero(nc));
  coolant[1][n + 1] = 1.0;  // inlet temperature input
  for (int i = 2; i <= M; ++i) {
    coolant[i] = (1.0 - k) * coolant[i - 1];
    coolant[i][ThermalModel::surface_state(i - 1)] += k;
  }

  auto add_row = [&](int row, const Vector& coeff) {
    model.A.row(row) += coeff.head(n).transpose();
    model.Bu.row(row) += coeff.tail(2).transpose();
  };

  for (int i = 1; i <= M; ++i) {
    const int tc = 2 * (i - 1);
    const int ts = tc + 1;

    // Core: Cc*Tc' = Ibar^2*Re + (Ts - Tc)/Rc
    Vector core = Vector::Zero(nc);
    core[n + 0] = params.Re;
    core[ts] += 1.0 / params.Rc;
    core[tc] -= 1.0 / params.Rc;
    add_row(tc, core / params.Cc);

    // Surface: Cs*Ts' = (Tf_i - Ts)/Ru - (Ts - Tc)/Rc + Qcc_i
    Vector surf = coolant[i] / params.Ru;
    surf[ts] -= 1.0 / params.Ru;
    surf[ts] -= 1.0 / params.Rc;
    surf[tc] += 1.0 / params.Rc;
    // Qcc: conduction with string neighbours, one-sided at the ends.
    if (i > 1) {
      surf[ThermalModel::surface_state(i - 1)] += 1.0 / params.Rcc;
      surf[ts] -= 1.0 / params.Rcc;
    }
    if (i < M) {
      surf[ThermalModel::surface_state(i + 1)] += 1.0 / params.Rcc;
      surf[ts] -= 1.0 / params.Rcc;
    }
    add_row(ts, surf / params.Cs);
  }

  model.Bd = model.Bu * Vector{{0.0, params.Sd}};
  return model;
}

SensorSelection build_measurement(const ThermalModel& model, std::vector<int> cells) {
  std::sort(cells.begin(), cells.end());
  for (size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] < 1 || cells[i] > model.M) {
      std::ostringstream os;
      os << "build_measurement: cell index " << cells[i] << " outside 1.." << model.M;
      throw std::invalid_argument(os.str());
    }
    if (i > 0 && cells[i] == cells[i - 1]) {
      std::ostringstream os;
      os << "build_measurement: duplicate cell index " << cells[i];
      throw std::invalid_argument(os.str());
    }
  }
  SensorSelection sel;
  sel.indices = std::move(cells);
  sel.Cy = Matrix::Zero(static_cast<int>(sel.indices.size()), model.state_dim());
  for (int r = 0; r < sel.count(); ++r)
    sel.Cy(r, ThermalModel::surface_state(sel.indices[r])) = 1.0;
  return sel;
}

double equilibrium_residual(const ThermalModel& model) {
  const Vector r = model.A * Vector::Ones(model.state_dim()) + model.Bu * Vector{{0.0, 1.0}};
  return r.cwiseAbs().maxCoeff();
}

}  // namespace battobs
