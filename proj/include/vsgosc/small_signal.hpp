#pragma once

// Small-signal transfer functions of paralleled VSG units, linearized at
// nominal voltage (cos(delta) ~ 1, K_i = V0_i * V0 / X_i).

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsgosc/model.hpp"
#include "vsgosc/transfer_function.hpp"

namespace vsgosc {

struct SwingCoefficients {
  double J = 0.0;
  double D = 0.0;
};

/// Droop (m_p, omega_c) -> VSG (J, D) with m_p = 1/D and omega_c = D/J.
inline SwingCoefficients droop_equivalent(double mp, double omega_c) {
  if (!(mp > 0.0)) throw std::invalid_argument("droop coefficient mp must be positive");
  if (!(omega_c > 0.0)) throw std::invalid_argument("filter cutoff omega_c must be positive");
  const double D = 1.0 / mp;
  return {D / omega_c, D};
}

/// Js^2 + Ds + K.
inline Polynomial swing_polynomial(double J, double D, double K) { return Polynomial({K, D, J}); }

/// G(s) = K / (Js^2 + Ds + K): unit frequency response to PCC frequency.
inline RationalTF unit_tf(double J, double D, double K) {
  if (!(J > 0.0) || !(D > 0.0) || !(K > 0.0)) throw std::invalid_argument("unit_tf needs J, D, K > 0");
  return {Polynomial::constant(K), swing_polynomial(J, D, K)};
}

/// dP/d(omega_p) = -K(Js + D) / (Js^2 + Ds + K).
inline RationalTF unit_power_tf(double J, double D, double K) {
  if (!(J > 0.0) || !(D > 0.0) || !(K > 0.0)) throw std::invalid_argument("unit_power_tf needs J, D, K > 0");
  return {Polynomial({-K * D, -K * J}), swing_polynomial(J, D, K)};
}

/// Linearized coupling of every unit at nominal voltage, using the fixed
/// branch reactance (feeder plus Zv0).
inline std::vector<double> nominal_couplings(const NetworkModel& model) {
  std::vector<double> K(model.size());
  const double Vp = model.V0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    K[i] = coupling_from_reactance(model.units[i].V0, Vp, model.base_reactance(i));
  }
  return K;
}

struct SaLoadStepTfs {
  std::vector<RationalTF> power;      // dP_i / dP_L
  std::vector<RationalTF> frequency;  // d(omega_i) / dP_L
  RationalTF pcc_frequency;           // d(omega_p) / dP_L; improper
};

/// Stand-alone load-step responses. With d_k = J_k s^2 + D_k s + K_k and
/// S = sum_k K_k (J_k s + D_k) prod_{m != k} d_m, every TF shares the
/// denominator S:
///   dP_i/dP_L       =  K_i (J_i s + D_i) prod_{k != i} d_k / S
///   d(omega_i)/dP_L = -K_i prod_{k != i} d_k / S
///   d(omega_p)/dP_L = -prod_k d_k / S
inline SaLoadStepTfs sa_load_step_tfs(const NetworkModel& model) {
  if (model.units.empty()) throw std::invalid_argument("sa_load_step_tfs needs at least one unit");
  const auto K = nominal_couplings(model);
  const std::size_t n = model.size();
  std::vector<Polynomial> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = swing_polynomial(model.units[k].J0, model.units[k].D0, K[k]);

  std::vector<Polynomial> branch_num(n);
  Polynomial S;
  for (std::size_t k = 0; k < n; ++k) {
    branch_num[k] = Polynomial({K[k] * model.units[k].D0, K[k] * model.units[k].J0}) * product_except(d, k);
    S += branch_num[k];
  }

  SaLoadStepTfs out;
  for (std::size_t i = 0; i < n; ++i) {
    out.power.emplace_back(branch_num[i], S);
    out.frequency.emplace_back(product_except(d, i) * -K[i], S);
  }
  out.pcc_frequency = RationalTF(product_except(d) * -1.0, S);
  return out;
}

struct GcRefStepTfs {
  RationalTF pcc_frequency;       // d(omega_p) / dP_r
  std::vector<RationalTF> power;  // dP_i / dP_r
};

/// Grid-connected response to a reference step on `source`. With
/// P = prod d_m and S as above, D_gc = K_g P + s S:
///   d(omega_p)/dP_r = s K_r prod_{m != r} d_m / D_gc
///   dP_r/dP_r       = K_r (K_g prod_{m != r} d_m + s S_{-r}) / D_gc
///   dP_i/dP_r       = -s K_i K_r (J_i s + D_i) prod_{m != r,i} d_m / D_gc
/// where S_{-r} is S over the units other than r. A stiff grid (Lg = 0) is
/// the K_g -> infinity limit: omega_p is fixed and dP_r/dP_r = G_r.
inline GcRefStepTfs gc_ref_step_tfs(const NetworkModel& model, const std::string& source_id) {
  const auto src = model.index_of(source_id);
  if (!src) throw std::invalid_argument("unknown unit id '" + source_id + "'");
  const std::size_t r = *src;
  const std::size_t n = model.size();
  const auto K = nominal_couplings(model);
  std::vector<Polynomial> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = swing_polynomial(model.units[k].J0, model.units[k].D0, K[k]);

  GcRefStepTfs out;
  if (model.grid.stiff()) {
    out.pcc_frequency = RationalTF::gain(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      out.power.push_back(i == r ? unit_tf(model.units[i].J0, model.units[i].D0, K[i]) : RationalTF::gain(0.0));
    }
    return out;
  }

  const double Kg = model.grid.Vg * model.V0 / (model.omega0 * model.grid.Lg);
  auto lead = [&](std::size_t k) { return Polynomial({K[k] * model.units[k].D0, K[k] * model.units[k].J0}); };
  Polynomial S;
  Polynomial S_minus_r;
  for (std::size_t k = 0; k < n; ++k) {
    S += lead(k) * product_except(d, k);
    if (k != r) S_minus_r += lead(k) * product_except(d, k, r);
  }
  const Polynomial s = Polynomial::s();
  const Polynomial den = product_except(d) * Kg + s * S;

  out.pcc_frequency = RationalTF(s * product_except(d, r) * K[r], den);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == r) {
      out.power.emplace_back((product_except(d, r) * Kg + s * S_minus_r) * K[r], den);
    } else {
      out.power.emplace_back(s * lead(i) * product_except(d, r, i) * (-K[r]), den);
    }
  }
  return out;
}

}  // namespace vsgosc
