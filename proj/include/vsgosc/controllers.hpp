#pragma once

// Controller laws layered on the VSG swing equation: consensus-driven virtual
// reactance, HPF-fed adaptive inertia and damping, a frequency-difference
// mutual-damping baseline, plus the sampled communication channel they share.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsgosc/model.hpp"

namespace vsgosc {

struct HpfParams {
  double mu = 0.1;   // s
  double tau = 0.1;  // s
};

inline void validate(const HpfParams& p) {
  if (!(p.mu > 0.0)) throw ValidationError("HPF mu must be positive");
  if (!(p.tau > 0.0)) throw ValidationError("HPF tau must be positive");
}

/// mu*s/(tau*s + 1) written as y = (mu/tau)(u - z), tau*dz/dt = u - z.
/// Standalone form with an exact zero-order-hold update.
class HighPassFilter {
 public:
  explicit HighPassFilter(HpfParams p, double u0 = 0.0) : p_(p), z_(u0) { validate(p_); }

  void reset(double u) { z_ = u; }
  double state() const { return z_; }
  double output(double u) const { return p_.mu / p_.tau * (u - z_); }

  /// Advance by dt holding u constant; returns the output at the end.
  double step(double u, double dt) {
    z_ = u + (z_ - u) * std::exp(-dt / p_.tau);
    return output(u);
  }

 private:
  HpfParams p_;
  double z_;
};

// ---------------------------------------------------------------------------
// Per-unit laws
// ---------------------------------------------------------------------------

struct Coefficients {
  double J = 0.0;
  double D = 0.0;
  double dZv = 0.0;
};

inline Coefficients traditional_vsg(const UnitParams& u) { return {u.J0, u.D0, 0.0}; }

/// J = max(J0 - |y|, j_min_frac * J0).
inline double adaptive_inertia(double y_hpf, double J0, double j_min_frac) {
  if (!(j_min_frac > 0.0 && j_min_frac < 1.0)) throw ValidationError("j_min_frac must lie in (0, 1)");
  return std::max(J0 - std::abs(y_hpf), j_min_frac * J0);
}

/// D = D0 + |y|.
inline double adaptive_damping(double y_hpf, double D0) { return D0 + std::abs(y_hpf); }

/// dZv_i/dt = k_v * sign * sum_j a_ij (x_i - x_j), x = nq * Q.
inline Eigen::VectorXd dvi_update(const Eigen::MatrixXd& adjacency, const Eigen::VectorXd& weighted_q,
                                  double k_v, double sign = 1.0) {
  if (adjacency.rows() != weighted_q.size()) throw std::invalid_argument("dvi_update: dimension mismatch");
  return k_v * sign * (laplacian(adjacency) * weighted_q);
}

/// Added swing term k_dsc * sum_j a_ij (omega_j - omega_i).
inline Eigen::VectorXd dsc_baseline(const Eigen::MatrixXd& adjacency, const Eigen::VectorXd& omegas, double k_dsc) {
  if (adjacency.rows() != omegas.size()) throw std::invalid_argument("dsc_baseline: dimension mismatch");
  return -k_dsc * (laplacian(adjacency) * omegas);
}

/// nu = x' L x / 2.
inline double lyapunov_v(const Eigen::VectorXd& x, const Eigen::MatrixXd& lap) {
  if (lap.rows() != x.size() || lap.cols() != x.size()) throw std::invalid_argument("lyapunov_v: dimension mismatch");
  return 0.5 * x.dot(lap * x);
}

// ---------------------------------------------------------------------------
// Controller configuration
// ---------------------------------------------------------------------------

enum class InertiaForm { Momentum, Coefficient };

struct DviConfig {
  bool configured = false;
  bool enabled = true;
  double k_v = 0.01;
  double sign = 1.0;
};

struct AdaptiveInertiaConfig {
  bool configured = false;
  bool enabled = true;
  HpfParams hpf;
  double j_min_frac = 0.05;
  // Momentum: d(J dw)/dt = Pr - P - D dw. Coefficient: J dw/dt = Pr - P - D dw.
  InertiaForm form = InertiaForm::Momentum;
};

struct AdaptiveDampingConfig {
  bool configured = false;
  bool enabled = true;
  HpfParams hpf;
};

struct DscConfig {
  bool configured = false;
  bool enabled = true;
  double k_dsc = 1000.0;
};

struct ControllerSet {
  DviConfig dvi;
  AdaptiveInertiaConfig inertia;
  AdaptiveDampingConfig damping;
  DscConfig dsc;

  bool uses_comm() const { return dvi.configured || dsc.configured; }
};

inline const std::vector<std::string>& controller_names() {
  static const std::vector<std::string> names = {"dvi", "adaptive_inertia", "adaptive_damping", "dsc"};
  return names;
}

inline void validate(const ControllerSet& c) {
  if (c.dvi.configured) {
    if (!(c.dvi.k_v > 0.0)) throw ValidationError("dvi k_v must be positive");
    if (c.dvi.sign != 1.0 && c.dvi.sign != -1.0) throw ValidationError("dvi sign must be +1 or -1");
  }
  if (c.inertia.configured) {
    validate(c.inertia.hpf);
    if (!(c.inertia.j_min_frac > 0.0 && c.inertia.j_min_frac < 1.0)) {
      throw ValidationError("j_min_frac must lie in (0, 1)");
    }
  }
  if (c.damping.configured) validate(c.damping.hpf);
  if (c.dsc.configured && !(c.dsc.k_dsc >= 0.0)) throw ValidationError("dsc k_dsc must be non-negative");
}

// ---------------------------------------------------------------------------
// Sampled communication
// ---------------------------------------------------------------------------

/// Synchronous broadcast every sample period. A sample sent at index k is
/// delivered at index k + delay/period; while the link is down nothing is
/// sent and in-flight samples are dropped. All units see the same delivered
/// vector, their own entry included.
class CommChannel {
 public:
  CommChannel() = default;
  explicit CommChannel(const CommGraph& g)
      : delay_samples_(static_cast<long>(std::llround(g.delay / g.sample_period))) {}

  /// Returns the freshest delivered vector, if any.
  const std::optional<Eigen::VectorXd>& exchange(long k, const Eigen::VectorXd& sample, bool alive) {
    if (alive) queue_.push_back({k, sample});
    while (!queue_.empty() && queue_.front().k + delay_samples_ <= k) {
      if (alive) latest_ = queue_.front().value;
      queue_.pop_front();
    }
    return latest_;
  }

  const std::optional<Eigen::VectorXd>& latest() const { return latest_; }

 private:
  struct Msg {
    long k;
    Eigen::VectorXd value;
  };
  long delay_samples_ = 0;
  std::deque<Msg> queue_;
  std::optional<Eigen::VectorXd> latest_;
};

}  // namespace vsgosc
