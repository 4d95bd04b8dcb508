#pragma once

// RLC view of a VSG branch: inertia as capacitance, inverse damping as
// resistance, inverse synchronizing coefficient as inductance. Plus the
// proportionality check and the parameter design calculator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsgosc/model.hpp"

namespace vsgosc {

struct BranchRLC {
  double C = 0.0;  // = J
  double R = 0.0;  // = 1/D
  double L = 0.0;  // = 1/K
};

/// Unit -> branch, with K taken over the total reactance X = omega0*Lf + Zv.
inline BranchRLC to_equivalent_circuit(const UnitParams& u, double omega0, double V0, double Zv = 0.0) {
  validate(u);
  const double X = omega0 * u.Lf_feeder + u.Zv0 + Zv;
  const double K = coupling_from_reactance(V0, V0, X);
  return {u.J0, 1.0 / u.D0, 1.0 / K};
}

struct BranchSwing {
  double J = 0.0;
  double D = 0.0;
  double K = 0.0;
};

inline BranchSwing from_equivalent_circuit(const BranchRLC& b) { return {b.C, 1.0 / b.R, 1.0 / b.L}; }

/// Z_e(jw) = 1/(C jw + 1/R) + jw L.
inline std::complex<double> branch_impedance(const BranchRLC& b, double omega) {
  if (omega < 0.0) throw std::invalid_argument("branch_impedance needs omega >= 0");
  const std::complex<double> jw(0.0, omega);
  return 1.0 / (b.C * jw + 1.0 / b.R) + jw * b.L;
}

/// Largest normalized disagreement between the J, D and K ratios of each
/// unit relative to unit 0; zero exactly when J_i/J_j = D_i/D_j = K_i/K_j.
inline double proportionality_residual(const NetworkModel& model) {
  if (model.size() < 2) return 0.0;
  std::vector<double> K(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    K[i] = coupling_from_reactance(model.units[i].V0, model.V0, model.base_reactance(i));
  }
  const auto& ref = model.units.front();
  double worst = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double u = model.units[i].J0 / ref.J0;
    const double v = model.units[i].D0 / ref.D0;
    const double w = K[i] / K[0];
    const double spread = std::max({std::abs(u - v), std::abs(u - w), std::abs(v - w)});
    worst = std::max(worst, spread / u);
  }
  return worst;
}

struct ReactanceSuggestion {
  bool inertia_damping_proportional = true;  // false: no reactance choice can zero the residual
  double scale = 0.0;                        // X_i = scale * V0_i / J_i
  std::vector<double> target_reactance;      // ohm
  std::vector<double> zv0;                   // total fixed virtual reactance to configure
  std::vector<double> zv_increment;          // change relative to the configured Zv0
};

/// Smallest uniform-scale branch reactances with K_i proportional to J_i
/// that keep every virtual reactance non-negative (X_i >= omega0*Lf_i).
inline ReactanceSuggestion suggest_virtual_reactance(const NetworkModel& model) {
  ReactanceSuggestion out;
  const auto& ref = model.units.front();
  double scale = 0.0;
  for (const auto& u : model.units) {
    if (std::abs(u.D0 / ref.D0 - u.J0 / ref.J0) > 1e-12 * (u.J0 / ref.J0)) out.inertia_damping_proportional = false;
    scale = std::max(scale, model.omega0 * u.Lf_feeder * u.J0 / u.V0);
  }
  out.scale = scale;
  for (const auto& u : model.units) {
    const double X = scale * u.V0 / u.J0;
    out.target_reactance.push_back(X);
    // The binding unit needs no extra reactance; drop the rounding residue.
    const double zv = X - model.omega0 * u.Lf_feeder;
    out.zv0.push_back(zv > 1e-12 * X ? zv : 0.0);
    out.zv_increment.push_back(out.zv0.back() - u.Zv0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter design
// ---------------------------------------------------------------------------

struct DesignInputs {
  double dP_max = 0.0;     // W
  double rocof_max = 0.0;  // rad/s^2
  double dw_max = 0.0;     // rad/s
  double k_HP = 10.0;
  double rho = 0.05;
  double nq = 0.0;
  double lambda2 = 0.0;
  double H0_mag = 0.0;  // var/ohm
};

struct DesignResult {
  double J0 = 0.0;
  double D0 = 0.0;
  double omega_c = 0.0;
  double tau = 0.0;
  double mu = 0.0;
  double k_v = 0.0;
};

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
}

/// J0 = dP/RoCoF, D0 = dP/dw.
inline std::pair<double, double> inertia_damping_design(double dP_max, double rocof_max, double dw_max) {
  require_positive(dP_max, "dp-max");
  require_positive(rocof_max, "rocof-max");
  require_positive(dw_max, "dw-max");
  return {dP_max / rocof_max, dP_max / dw_max};
}

/// tau = 1/(k_HP * omega_c), mu = tau (unity high-frequency gain).
inline double hpf_time_constant(double k_HP, double omega_c) {
  require_positive(k_HP, "k-hp");
  require_positive(omega_c, "omega-c");
  return 1.0 / (k_HP * omega_c);
}

/// k_v = rho * omega_c / (nq * lambda2 * |H(0)|); the denominator is passed as one product.
inline double consensus_gain(double rho, double omega_c, double nq_lambda2_h0) {
  require_positive(rho, "rho");
  require_positive(omega_c, "omega-c");
  require_positive(nq_lambda2_h0, "nq-l2-h0");
  return rho * omega_c / nq_lambda2_h0;
}

inline DesignResult design_params(const DesignInputs& d) {
  if (d.rho < 0.01 || d.rho > 0.5) throw std::invalid_argument("rho must lie in [0.01, 0.5]");
  if (d.k_HP < 10.0 || d.k_HP > 30.0) throw std::invalid_argument("k-hp must lie in [10, 30]");
  require_positive(d.nq, "nq");
  require_positive(d.lambda2, "lambda2");
  require_positive(d.H0_mag, "h0");
  DesignResult r;
  std::tie(r.J0, r.D0) = inertia_damping_design(d.dP_max, d.rocof_max, d.dw_max);
  r.omega_c = r.D0 / r.J0;
  r.tau = hpf_time_constant(d.k_HP, r.omega_c);
  r.mu = r.tau;
  r.k_v = consensus_gain(d.rho, r.omega_c, d.nq * d.lambda2 * d.H0_mag);
  return r;
}

/// Small-signal gain from branch impedance to reactive power,
/// |Vi (Vi - Vp) / (Zv0 + Zl)^2|.
inline double h0_magnitude(double Vi, double Vp, double Zv0, double Zl_ohm) {
  const double Z = Zv0 + Zl_ohm;
  if (!(Z > 0.0)) throw std::invalid_argument("total impedance Zv0 + Zl must be positive");
  return std::abs(Vi * (Vi - Vp) / (Z * Z));
}

}  // namespace vsgosc
