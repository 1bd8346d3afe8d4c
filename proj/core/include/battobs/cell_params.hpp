#pragma once

#include <string>
#include <vector>

namespace battobs {

// Lumped thermal parameters of one cell plus the shared coolant stream.
struct CellParams {
  double Cc = 0.0;   // core heat capacity [J/K]
  double Cs = 0.0;   // surface heat capacity [J/K]
  double Cf = 0.0;   // coolant heat-capacity rate [J/(K s)]
  double Re = 0.0;   // electrical resistance [ohm]
  double Rc = 0.0;   // core-surface conduction resistance [K/W]
  double Ru = 0.0;   // surface-coolant convection resistance [K/W]
  double Rcc = 0.0;  // cell-cell conduction resistance [K/W]
  double Sd = 1.0;   // disturbance normalization [K]

  // A123 26650 LiFePO4 cylindrical cell, forced-air cooling; the bundled
  // default parameter set.
  static CellParams default_a123();
};

// Throws std::invalid_argument on non-positive fields. Returns model-sanity
// warnings (non-fatal), e.g. when Cf*Ru <= 1 makes the coolant-chain
// geometric factor non-positive.
std::vector<std::string> validate(const CellParams& p);

}  // namespace battobs
