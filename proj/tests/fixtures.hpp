#pragma once

// Model builders shared by the test files.

#include <string>
#include <vector>

#include "vsgosc/model.hpp"

namespace vsgosc::fixtures {

inline UnitParams unit(const std::string& id, double J, double D, double Pm, double L_mH) {
  return {id, J, D, Pm, 1.0 / Pm, L_mH * 1e-3, 190.0, 0.0, 0.0};
}

inline NetworkModel base_model(std::vector<UnitParams> units) {
  NetworkModel m;
  m.units = std::move(units);
  m.omega0 = 314.0;
  m.V0 = 190.0;
  return m;
}

inline NetworkModel two_unit(double L2_mH) {
  return base_model({unit("DG1", 300, 300, 1000, 4.4), unit("DG2", 600, 600, 2000, L2_mH)});
}

inline NetworkModel three_unit() {
  return base_model(
      {unit("DG1", 300, 300, 1000, 11), unit("DG2", 600, 600, 2000, 7.7), unit("DG3", 900, 900, 3000, 6.6)});
}

inline NetworkModel single_unit() { return base_model({unit("DG1", 300, 300, 1000, 4.4)}); }

inline NetworkModel stiff_grid(NetworkModel m) {
  m.grid = {GridMode::GridConnected, 0.0, m.V0, m.omega0};
  return m;
}

inline NetworkModel weak_grid(NetworkModel m) {
  m.grid = {GridMode::GridConnected, 6.0 * m.units[0].Lf_feeder, m.V0, m.omega0};
  return m;
}

}  // namespace vsgosc::fixtures
