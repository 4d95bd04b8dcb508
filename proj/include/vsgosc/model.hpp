#pragma once

// Domain types for a multi-VSG microgrid and its communication graph.
//
// Angles are in radians, frequencies in rad/s, powers in W / var, inductances
// in H and reactances in ohm. All types are plain values: immutable once
// validated and safe to share read-only across threads.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vsgosc/errors.hpp"

namespace vsgosc {

enum class GridMode { StandAlone, GridConnected };

inline const char* to_string(GridMode mode) {
  return mode == GridMode::StandAlone ? "SA" : "GC";
}

/// One inverter: swing-equation coefficients, rating, feeder and set points.
struct UnitParams {
  std::string id;
  double J0 = 0.0;         // inertia, W*s^2/rad
  double D0 = 0.0;         // damping, W*s/rad
  double Pm = 0.0;         // rated active power, W
  double nq = 0.0;         // reactive-power consensus weight, 1/var
  double Lf_feeder = 0.0;  // feeder inductance, H
  double V0 = 0.0;         // internal voltage set point (amplitude), V
  double Pr = 0.0;         // active power reference, W
  double Zv0 = 0.0;        // fixed virtual reactance, ohm
};

struct GridLink {
  GridMode mode = GridMode::StandAlone;
  double Lg = 0.0;  // grid-side inductance, H; 0 means a stiff grid
  double Vg = 0.0;
  double omega_g = 0.0;

  bool stiff() const { return Lg == 0.0; }
};

struct NetworkModel {
  std::vector<UnitParams> units;
  GridLink grid;
  double omega0 = 0.0;
  double V0 = 0.0;  // nominal PCC voltage amplitude, V
  double load_P = 0.0;
  double load_Q = 0.0;
  // Q-V droop: unit i's internal voltage is V0_i - qv_droop_V * nq_i * Q_i.
  double qv_droop_V = 1.0;

  std::size_t size() const { return units.size(); }

  /// Feeder reactance plus the fixed virtual reactance of unit `i`.
  double base_reactance(std::size_t i) const {
    return omega0 * units[i].Lf_feeder + units[i].Zv0;
  }

  double droop_coefficient(std::size_t i) const { return qv_droop_V * units[i].nq; }

  std::optional<std::size_t> index_of(const std::string& id) const {
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (units[i].id == id) return i;
    }
    return std::nullopt;
  }
};

struct CommGraph {
  Eigen::MatrixXd adjacency;  // symmetric 0/1, zero diagonal
  double sample_period = 0.01;
  double delay = 0.0;  // whole multiple of sample_period
  std::vector<std::pair<double, double>> fault_windows;

  bool in_fault_window(double t) const {
    for (const auto& [t0, t1] : fault_windows) {
      if (t >= t0 && t < t1) return true;
    }
    return false;
  }
};

namespace event {
struct SetLoad {
  double P = 0.0;
  double Q = 0.0;
};
struct SetPref {
  std::size_t unit = 0;
  double P = 0.0;
};
struct EnableController {
  std::string name;
};
struct DisableController {
  std::string name;
};
struct CommLoss {
  bool on = true;
};
struct GridConnect {
  bool on = true;
};
}  // namespace event

using EventAction = std::variant<event::SetLoad, event::SetPref, event::EnableController,
                                 event::DisableController, event::CommLoss, event::GridConnect>;

struct Event {
  double t = 0.0;
  EventAction action;
};

struct Scenario {
  double t_end = 0.0;
  double dt = 1e-3;
  std::size_t output_stride = 10;
  std::vector<Event> events;
};

// ---------------------------------------------------------------------------
// Graph operations
// ---------------------------------------------------------------------------

inline bool is_symmetric(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() == 0.0;
}

/// L = diag(row degrees) - A.
inline Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency) {
  if (adjacency.size() == 0) return Eigen::MatrixXd(0, 0);
  if (!is_symmetric(adjacency)) throw ValidationError("adjacency must be symmetric");
  if (adjacency.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw ValidationError("adjacency must have a zero diagonal");
  }
  Eigen::MatrixXd lap = -adjacency;
  lap.diagonal() = adjacency.rowwise().sum();
  return lap;
}

/// Ascending eigenvalues of a symmetric Laplacian.
inline Eigen::VectorXd laplacian_spectrum(const Eigen::MatrixXd& lap) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Second-smallest Laplacian eigenvalue; 0 for a single node.
inline double algebraic_connectivity(const Eigen::MatrixXd& lap) {
  if (lap.rows() < 2) return 0.0;
  double lambda2 = laplacian_spectrum(lap)(1);
  // Round-off can leave a disconnected graph's zero slightly negative.
  return std::abs(lambda2) < 1e-12 * std::max(1.0, lap.cwiseAbs().maxCoeff()) ? 0.0 : lambda2;
}

inline std::size_t connected_components(const Eigen::MatrixXd& adjacency) {
  const auto n = static_cast<std::size_t>(adjacency.rows());
  std::vector<int> label(n, -1);
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t root = 0; root < n; ++root) {
    if (label[root] >= 0) continue;
    label[root] = static_cast<int>(count);
    stack.push_back(root);
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < n; ++w) {
        if (adjacency(v, w) != 0.0 && label[w] < 0) {
          label[w] = static_cast<int>(count);
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  return count;
}

/// Synchronizing coefficient K = Vi*Vp / (omega0 * L_line), W/rad.
inline double coupling_coefficient(double Vi, double Vp, double L_line, double omega0) {
  if (!(L_line > 0.0)) throw ValidationError("line inductance must be positive");
  if (!(omega0 > 0.0)) throw ValidationError("omega0 must be positive");
  return Vi * Vp / (omega0 * L_line);
}

/// Same coefficient from a total branch reactance.
inline double coupling_from_reactance(double Vi, double Vp, double X) {
  if (!(X > 0.0)) throw ValidationError("branch reactance must be positive");
  return Vi * Vp / X;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}
}  // namespace detail

inline void validate(const UnitParams& u) {
  using detail::require;
  const std::string at = "unit '" + u.id + "': ";
  require(u.J0 > 0.0, at + "J0 must be positive");
  require(u.D0 > 0.0, at + "D0 must be positive");
  require(u.Pm > 0.0, at + "Pm must be positive");
  require(u.Lf_feeder > 0.0, at + "feeder inductance must be positive");
  require(u.nq > 0.0, at + "nq must be positive");
  require(u.V0 > 0.0, at + "V0 must be positive");
  require(std::isfinite(u.Pr), at + "Pr must be finite");
  require(std::isfinite(u.Zv0), at + "Zv0 must be finite");
}

inline void validate(const NetworkModel& m) {
  using detail::require;
  require(!m.units.empty(), "model needs at least one unit");
  require(m.omega0 > 0.0, "omega0 must be positive");
  require(m.V0 > 0.0, "nominal voltage V0 must be positive");
  require(std::isfinite(m.load_P) && std::isfinite(m.load_Q), "load must be finite");
  require(m.qv_droop_V >= 0.0, "qv_droop_V must be non-negative");
  for (std::size_t i = 0; i < m.units.size(); ++i) {
    validate(m.units[i]);
    require(m.base_reactance(i) > 0.0,
            "unit '" + m.units[i].id + "': total branch reactance must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      require(m.units[i].id != m.units[j].id, "unit ids must be unique: '" + m.units[i].id + "'");
    }
  }
  require(m.grid.Lg >= 0.0, "grid Lg must be non-negative");
  if (m.grid.mode == GridMode::GridConnected) {
    require(m.grid.Vg > 0.0, "grid Vg must be positive in GC mode");
    require(m.grid.omega_g > 0.0, "grid omega_g must be positive in GC mode");
  }
}

inline void validate(const CommGraph& g, std::size_t n_units) {
  using detail::require;
  require(static_cast<std::size_t>(g.adjacency.rows()) == n_units &&
              static_cast<std::size_t>(g.adjacency.cols()) == n_units,
          "adjacency must be " + std::to_string(n_units) + "x" + std::to_string(n_units));
  for (Eigen::Index i = 0; i < g.adjacency.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.adjacency.cols(); ++j) {
      double a = g.adjacency(i, j);
      require(a == 0.0 || a == 1.0, "adjacency entries must be 0 or 1");
    }
  }
  require(is_symmetric(g.adjacency), "adjacency must be symmetric");
  require(n_units == 0 || g.adjacency.diagonal().cwiseAbs().maxCoeff() == 0.0,
          "adjacency must have a zero diagonal");
  require(g.sample_period > 0.0, "sample period must be positive");
  require(g.delay >= 0.0, "delay must be non-negative");
  double periods = g.delay / g.sample_period;
  require(std::abs(periods - std::round(periods)) < 1e-9,
          "delay must be a whole multiple of the sample period");
  for (const auto& [t0, t1] : g.fault_windows) {
    require(t0 <= t1, "fault window must have t_start <= t_end");
  }
}

inline void validate(const Scenario& s, std::size_t n_units) {
  using detail::require;
  require(s.t_end > 0.0, "t_end must be positive");
  require(s.dt > 0.0 && s.dt < s.t_end, "dt must satisfy 0 < dt < t_end");
  require(s.output_stride >= 1, "output stride must be at least 1");
  double prev = 0.0;
  for (const auto& e : s.events) {
    require(e.t >= 0.0 && e.t <= s.t_end, "event time must lie within [0, t_end]");
    require(e.t >= prev, "events must be sorted by time");
    prev = e.t;
    if (const auto* sp = std::get_if<event::SetPref>(&e.action)) {
      require(sp->unit < n_units, "set_pref refers to an unknown unit");
    }
  }
}

}  // namespace vsgosc
