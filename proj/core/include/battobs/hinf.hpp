#pragma once

#include <stdexcept>
#include <vector>

#include "battobs/thermal_model.hpp"

namespace battobs {

// Estimation-error dynamics for a gain L and noise scalings sigma:
//   e' = (A + L Cy) e + [Bd, L diag(sigma)] w,    eps = Cz e
// with w = [d; n_1..n_Ny] (disturbance first, then sensor noises in
// ascending sensor-cell order).
struct ErrorSystem {
  Matrix Ae;
  Matrix Be;
  Matrix Ce;

  int states() const { return static_cast<int>(Ae.rows()); }
  int inputs() const { return static_cast<int>(Be.cols()); }
  int outputs() const { return static_cast<int>(Ce.rows()); }
};

struct NonHurwitzError : std::domain_error {
  explicit NonHurwitzError(double abscissa)
      : std::domain_error("error system is not Hurwitz (spectral abscissa " +
                          std::to_string(abscissa) + "); H-inf norm undefined"),
        abscissa(abscissa) {}
  double abscissa;
};

// L must be 2M x Ny and sigma positive elementwise; both may be empty
// together with the sensor set, which yields the open-loop disturbance map
// Cz (sI - A)^-1 Bd.
ErrorSystem build_error_system(const ThermalModel& model, const SensorSelection& sensors,
                               const Matrix& L, const Vector& sigma);

struct HinfResult {
  double norm = 0.0;
  double lo = 0.0;         // certified lower bound (singular-value evaluation)
  double hi = 0.0;         // certified upper bound (axis-free Hamiltonian test)
  double peak_freq = 0.0;  // rad/s
  int iterations = 0;
};

// H-inf norm by Hamiltonian bisection with frequency-midpoint acceleration;
// relative tolerance tol on hi/lo. Throws NonHurwitzError when Ae is not
// stable.
HinfResult hinf_norm(const ErrorSystem& sys, double tol = 1e-6);

// Largest singular value of the transfer matrix at frequency omega.
double sigma_max_at(const ErrorSystem& sys, double omega);

// True when the level-g Hamiltonian has eigenvalues on the imaginary axis
// (i.e. g is attained as a singular value at some frequency, so the norm is
// at least g). Optionally returns the crossing frequencies.
bool hinf_level_has_axis_crossing(const ErrorSystem& sys, double level,
                                  std::vector<double>* freqs = nullptr);

// Dense log-spaced frequency sweep (independent cross-check of hinf_norm).
double hinf_norm_sweep(const ErrorSystem& sys, int points = 10000,
                       double w_lo = 1e-6, double w_hi = 1e3);

}  // namespace battobs
