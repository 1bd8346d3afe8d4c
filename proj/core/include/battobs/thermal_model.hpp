#pragma once

#include <vector>

#include "battobs/cell_params.hpp"
#include "battobs/linalg.hpp"

namespace battobs {

// Continuous-time LTI model of an M-cell string:
//   x' = A x + Bu u + Bd d,   x = [Tc1 Ts1 Tc2 Ts2 ... TcM TsM]
// with inputs u = [Ibar^2, Tf_in] and a scalar disturbance d entering
// through the coolant-inlet channel scaled by Sd.
struct ThermalModel {
  int M = 0;
  Matrix A;    // 2M x 2M
  Matrix Bu;   // 2M x 2
  Matrix Bd;   // 2M x 1
  Matrix Cz;   // performance output map, identity by default
  CellParams params;

  int state_dim() const { return 2 * M; }
  // 0-based state index of the surface temperature of cell q (1-based).
  static int surface_state(int cell) { return 2 * (cell - 1) + 1; }
};

// Sensor subset with its stacked measurement matrix. Row k of Cy is the unit
// row selecting the surface temperature of cell indices[k].
struct SensorSelection {
  std::vector<int> indices;  // strictly increasing, 1-based cell indices
  Matrix Cy;                 // Ny x 2M

  int count() const { return static_cast<int>(indices.size()); }
};

// Assembles (A, Bu, Bd) from the per-cell heat balances, eliminating the
// coolant-temperature chain. Rejects M < 2 and invalid parameters.
ThermalModel build_model(const CellParams& params, int M);

// As above with a caller-supplied performance output map (must have full row
// rank and 2M columns).
ThermalModel build_model(const CellParams& params, int M, const Matrix& Cz);

// Measurement matrix for a set of distinct 1-based cell indices (any input
// order; rows are emitted in ascending cell order). An empty set is valid and
// yields a 0 x 2M matrix.
SensorSelection build_measurement(const ThermalModel& model, std::vector<int> cells);

// max-norm of A*1 + Bu*[0 1]' — zero (to rounding) for any valid model, since
// uniform temperatures with zero current carry no heat flow.
double equilibrium_residual(const ThermalModel& model);

}  // namespace battobs
