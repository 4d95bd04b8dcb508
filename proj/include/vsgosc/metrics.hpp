#pragma once

// Transient metrics computed from a recorded trajectory. Everything here is a
// pure function of the CSV columns plus the static configuration, so metrics
// re-extracted from a saved CSV match the originals exactly.

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vsgosc/controllers.hpp"
#include "vsgosc/engine.hpp"
#include "vsgosc/model.hpp"

namespace vsgosc {

struct SignalMetrics {
  std::string name;
  double initial_value = 0.0;  // last sample before the window
  double overshoot_pct = 0.0;
  double settling_time_s = 0.0;  // from window start
  bool settled = true;
  double peak_to_peak = 0.0;
  double rocof_max = 0.0;  // max |dy/dt| over the rate window
  double steady_state_value = 0.0;
  std::optional<double> damping_estimate;  // log-decrement zeta
};

struct MetricsReport {
  double t_from = 0.0;
  std::vector<SignalMetrics> signals;
  double sharing_error_pct = 0.0;
  double lyapunov_final = 0.0;
  double max_power_imbalance = 0.0;

  const SignalMetrics& signal(const std::string& name) const {
    for (const auto& s : signals) {
      if (s.name == name) return s;
    }
    throw std::out_of_range("no metrics for '" + name + "'");
  }
};

struct MetricsOptions {
  double t_from = 0.0;                 // start of the observation window
  std::vector<std::string> signals;    // empty: every unit P and omega plus omega_p
  double settling_band = 0.02;         // fraction of the step size
  double rate_window_s = 0.02;
};

/// Log-decrement damping ratio from successive same-sign extrema of
/// y - y_final; empty when fewer than two such extrema exist.
inline std::optional<double> log_decrement_damping(const std::vector<double>& y, double y_final) {
  std::vector<double> peaks;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    const double a = y[k - 1] - y_final;
    const double b = y[k] - y_final;
    const double c = y[k + 1] - y_final;
    if (b > 0.0 && b >= a && b > c) peaks.push_back(b);
  }
  if (peaks.size() < 2) {
    peaks.clear();
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
      const double a = y_final - y[k - 1];
      const double b = y_final - y[k];
      const double c = y_final - y[k + 1];
      if (b > 0.0 && b >= a && b > c) peaks.push_back(b);
    }
  }
  if (peaks.size() < 2) return std::nullopt;
  // Ignore the noise floor once the oscillation has died out.
  const double floor = 1e-6 * peaks.front();
  std::size_t last = 1;
  while (last + 1 < peaks.size() && peaks[last + 1] > floor) ++last;
  if (!(peaks[last] > 0.0) || peaks[last] >= peaks.front()) return std::nullopt;
  const double delta = std::log(peaks.front() / peaks[last]) / static_cast<double>(last);
  return delta / std::sqrt(4.0 * std::numbers::pi * std::numbers::pi + delta * delta);
}

inline SignalMetrics signal_metrics(const std::vector<double>& t, const std::vector<double>& y,
                                    const std::string& name, const MetricsOptions& opt) {
  SignalMetrics m;
  m.name = name;
  if (t.empty()) return m;
  std::size_t first = 0;
  while (first < t.size() && t[first] < opt.t_from) ++first;
  if (first == t.size()) first = t.size() - 1;
  m.initial_value = first > 0 ? y[first - 1] : y[first];
  m.steady_state_value = y.back();

  double lo = y[first];
  double hi = y[first];
  for (std::size_t k = first; k < y.size(); ++k) {
    lo = std::min(lo, y[k]);
    hi = std::max(hi, y[k]);
  }
  m.peak_to_peak = hi - lo;

  const double step = m.steady_state_value - m.initial_value;
  const double scale = std::max(std::abs(step), 1e-12 * std::max(1.0, std::abs(m.steady_state_value)));
  if (std::abs(step) > 1e-12 * std::max(1.0, std::abs(m.steady_state_value))) {
    const double beyond = step > 0.0 ? hi - m.steady_state_value : m.steady_state_value - lo;
    m.overshoot_pct = std::max(0.0, beyond) / std::abs(step) * 100.0;
  }

  const double band = opt.settling_band * scale;
  std::optional<std::size_t> last_out;
  for (std::size_t k = first; k < y.size(); ++k) {
    if (std::abs(y[k] - m.steady_state_value) > band) last_out = k;
  }
  if (last_out) {
    if (*last_out + 1 >= y.size()) {
      m.settled = false;
      m.settling_time_s = t.back() - t[first];
    } else {
      m.settling_time_s = t[*last_out + 1] - t[first];
    }
  }

  if (t.size() >= 2) {
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    const auto lag = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.rate_window_s / h)));
    for (std::size_t k = first; k + lag < y.size(); ++k) {
      m.rocof_max = std::max(m.rocof_max, std::abs(y[k + lag] - y[k]) / (t[k + lag] - t[k]));
    }
  }

  m.damping_estimate = log_decrement_damping(std::vector<double>(y.begin() + static_cast<long>(first), y.end()),
                                             m.steady_state_value);
  return m;
}

/// Start of the default observation window: the first load or reference step.
inline double first_disturbance_time(const Scenario& sc) {
  for (const auto& e : sc.events) {
    if (std::holds_alternative<event::SetLoad>(e.action) || std::holds_alternative<event::SetPref>(e.action)) {
      return e.t;
    }
  }
  return 0.0;
}

inline MetricsReport extract_metrics(const TimeSeries& ts, const NetworkModel& model, const CommGraph& graph,
                                     const MetricsOptions& opt = {}) {
  if (ts.rows() == 0) throw std::invalid_argument("extract_metrics needs a non-empty series");
  if (ts.n_units() != model.size()) throw std::invalid_argument("series and model disagree on the unit count");
  MetricsReport r;
  r.t_from = opt.t_from;
  std::vector<std::string> names = opt.signals;
  if (names.empty()) {
    for (std::size_t i = 0; i < model.size(); ++i) names.push_back(TimeSeries::unit_column(i, "P_W"));
    for (std::size_t i = 0; i < model.size(); ++i) names.push_back(TimeSeries::unit_column(i, "omega_rad_s"));
    names.push_back("omega_p_rad_s");
    names.push_back("pg_W");
  }
  for (const auto& name : names) r.signals.push_back(signal_metrics(ts.t(), ts[name], name, opt));

  // Deviation of the active-power change from capacity proportions.
  double dP_total = 0.0;
  double Pm_total = 0.0;
  std::vector<double> dP(model.size());
  std::size_t first = 0;
  while (first < ts.rows() && ts.t()[first] < opt.t_from) ++first;
  const std::size_t before = first > 0 ? first - 1 : 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& P = ts.unit(i, "P_W");
    dP[i] = P.back() - P[before];
    dP_total += dP[i];
    Pm_total += model.units[i].Pm;
  }
  if (std::abs(dP_total) > 1e-9) {
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double want = model.units[i].Pm / Pm_total;
      r.sharing_error_pct = std::max(r.sharing_error_pct, std::abs(dP[i] / dP_total - want) / want * 100.0);
    }
  }

  if (model.size() > 1 && graph.adjacency.rows() == static_cast<Eigen::Index>(model.size())) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(model.size()));
    for (std::size_t i = 0; i < model.size(); ++i) {
      x(static_cast<Eigen::Index>(i)) = model.units[i].nq * ts.unit(i, "Q_var").back();
    }
    r.lyapunov_final = lyapunov_v(x, laplacian(graph.adjacency));
  }
  return r;
}

/// Largest |sum P_i + Pg - P_load| over all rows, with the load history
/// taken from the scenario events.
inline double max_power_imbalance(const TimeSeries& ts, const NetworkModel& model, const Scenario& sc, double dt) {
  double worst = 0.0;
  std::size_t next = 0;
  double load = model.load_P;
  const auto& t = ts.t();
  for (std::size_t r = 0; r < ts.rows(); ++r) {
    while (next < sc.events.size() && sc.events[next].t <= t[r] + 1e-9 * dt) {
      if (const auto* e = std::get_if<event::SetLoad>(&sc.events[next].action)) load = e->P;
      ++next;
    }
    double sum = ts["pg_W"][r] - load;
    for (std::size_t i = 0; i < ts.n_units(); ++i) sum += ts.unit(i, "P_W")[r];
    worst = std::max(worst, std::abs(sum) / std::max(1.0, std::abs(load)));
  }
  return worst;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["t_from_s"] = r.t_from;
  j["sharing_error_pct"] = r.sharing_error_pct;
  j["lyapunov_final"] = r.lyapunov_final;
  j["max_power_imbalance_rel"] = r.max_power_imbalance;
  nlohmann::json sig = nlohmann::json::object();
  for (const auto& s : r.signals) {
    nlohmann::json o;
    o["initial_value"] = s.initial_value;
    o["overshoot_pct"] = s.overshoot_pct;
    o["settling_time_s"] = s.settling_time_s;
    o["settled"] = s.settled;
    o["peak_to_peak"] = s.peak_to_peak;
    o["rocof_max"] = s.rocof_max;
    o["steady_state_value"] = s.steady_state_value;
    o["damping_estimate"] = s.damping_estimate ? nlohmann::json(*s.damping_estimate) : nlohmann::json(nullptr);
    sig[s.name] = o;
  }
  j["signals"] = sig;
  return j;
}

}  // namespace vsgosc
