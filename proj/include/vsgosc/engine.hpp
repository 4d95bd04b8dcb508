#pragma once

// Time-domain simulator. Each unit integrates the swing equation in a frame
// rotating at omega0; the network is algebraic and re-solved at every RK4
// stage. Controller states (virtual-reactance integrator, HPF states) ride in
// the same state vector.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsgosc/config.hpp"
#include "vsgosc/controllers.hpp"
#include "vsgosc/errors.hpp"
#include "vsgosc/model.hpp"
#include "vsgosc/network.hpp"

namespace vsgosc {

struct SimState {
  double t = 0.0;
  // ODE states, one entry per unit.
  std::vector<double> theta;  // rad, rotating frame
  std::vector<double> dw;     // omega - omega0, rad/s
  std::vector<double> Zv;     // consensus integrator, ohm (on top of Zv0)
  std::vector<double> zJ;     // inertia HPF state, W
  std::vector<double> zD;     // damping HPF state, W
  // Algebraic and derived quantities at t.
  std::vector<double> P, Q, J_eff, D_eff;
  double Vp = 0.0;
  double theta_p = 0.0;
  double omega_p = 0.0;  // absolute, rad/s
  double Pg = 0.0;
  double Qg = 0.0;
};

// ---------------------------------------------------------------------------
// Recorded trajectories
// ---------------------------------------------------------------------------

class TimeSeries {
 public:
  static constexpr const char* unit_fields[] = {"P_W", "Q_var", "omega_rad_s", "J_eff", "D_eff", "Zv_ohm"};
  static constexpr const char* pcc_fields[] = {"vp_V", "theta_p_rad", "omega_p_rad_s", "pg_W"};

  TimeSeries() = default;
  explicit TimeSeries(std::size_t n_units) : n_units_(n_units) {
    names_.push_back("t_s");
    for (std::size_t i = 0; i < n_units; ++i) {
      for (const char* f : unit_fields) names_.push_back(unit_column(i, f));
    }
    for (const char* f : pcc_fields) names_.push_back(f);
    columns_.resize(names_.size());
  }

  static std::string unit_column(std::size_t i, const std::string& field) {
    return "unit" + std::to_string(i + 1) + "_" + field;
  }

  std::size_t n_units() const { return n_units_; }
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::vector<double>>& columns() const { return columns_; }

  const std::vector<double>& t() const { return columns_.at(0); }
  const std::vector<double>& operator[](const std::string& name) const { return columns_.at(index(name)); }
  const std::vector<double>& unit(std::size_t i, const std::string& field) const {
    return (*this)[unit_column(i, field)];
  }

  void append(const SimState& s, const NetworkModel& model) {
    std::size_t c = 0;
    columns_[c++].push_back(s.t);
    for (std::size_t i = 0; i < n_units_; ++i) {
      columns_[c++].push_back(s.P[i]);
      columns_[c++].push_back(s.Q[i]);
      columns_[c++].push_back(model.omega0 + s.dw[i]);
      columns_[c++].push_back(s.J_eff[i]);
      columns_[c++].push_back(s.D_eff[i]);
      columns_[c++].push_back(model.units[i].Zv0 + s.Zv[i]);
    }
    columns_[c++].push_back(s.Vp);
    columns_[c++].push_back(s.theta_p);
    columns_[c++].push_back(s.omega_p);
    columns_[c++].push_back(s.Pg);
  }

  void append_row(const std::vector<double>& row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("row width does not match the column count");
    for (std::size_t c = 0; c < row.size(); ++c) columns_[c].push_back(row[c]);
  }

  // Lyapunov monitor samples, one per communication sample.
  std::vector<double> nu_t;
  std::vector<double> nu;

 private:
  std::size_t index(const std::string& name) const {
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (names_[k] == name) return k;
    }
    throw std::out_of_range("no column '" + name + "'");
  }

  std::size_t n_units_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

inline void write_csv(std::ostream& out, const TimeSeries& ts) {
  const auto& names = ts.names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (std::size_t r = 0; r < ts.rows(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << format_double(ts.columns()[c][r]);
    out << '\n';
  }
}

inline TimeSeries read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const std::size_t per_unit = std::size(TimeSeries::unit_fields);
  const std::size_t fixed = 1 + std::size(TimeSeries::pcc_fields);
  if (header.size() < fixed || (header.size() - fixed) % per_unit != 0) {
    throw std::runtime_error("CSV header does not match the column contract");
  }
  TimeSeries ts((header.size() - fixed) / per_unit);
  if (ts.names() != header) throw std::runtime_error("CSV header does not match the column contract");
  std::vector<double> row(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c < row.size(); ++c) {
      auto [next, ec] = std::from_chars(p, end, row[c]);
      if (ec != std::errc()) throw std::runtime_error("bad number on CSV line " + std::to_string(line_no));
      p = next;
      if (c + 1 < row.size()) {
        if (p == end || *p != ',') throw std::runtime_error("short CSV line " + std::to_string(line_no));
        ++p;
      }
    }
    ts.append_row(row);
  }
  return ts;
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

class Simulator {
 public:
  Simulator(NetworkModel model, CommGraph graph, ControllerSet controllers, double dt)
      : model_(std::move(model)), graph_(std::move(graph)), ctrl_(std::move(controllers)), dt_(dt) {
    validate(model_);
    if (graph_.adjacency.size() == 0) {
      graph_.adjacency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model_.size()),
                                               static_cast<Eigen::Index>(model_.size()));
    }
    validate(graph_, model_.size());
    validate(ctrl_);
    if (!(dt_ > 0.0)) throw ValidationError("dt must be positive");
    n_ = model_.size();
    lap_ = laplacian(graph_.adjacency);
    channel_ = CommChannel(graph_);
    load_P_ = model_.load_P;
    load_Q_ = model_.load_Q;
    for (const auto& u : model_.units) Pr_.push_back(u.Pr);
    grid_on_ = model_.grid.mode == GridMode::GridConnected;
    dzv_.assign(n_, 0.0);
    dsc_.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      zv_floor_.push_back(0.1 * model_.omega0 * model_.units[i].Lf_feeder - model_.base_reactance(i));
    }
    equilibrium_init();
  }

  const SimState& state() const { return s_; }
  const NetworkModel& model() const { return model_; }
  double dt() const { return dt_; }
  long step_index() const { return k_; }

  /// Steady state of the swing dynamics at the present load and references:
  /// SA solves for the common frequency offset, GC holds omega = omega_g.
  void equilibrium_init() {
    s_.theta.assign(n_, 0.0);
    s_.dw.assign(n_, 0.0);
    s_.Zv.assign(n_, 0.0);
    s_.zJ = Pr_;
    s_.zD = Pr_;
    theta_g0_ = 0.0;
    t_g0_ = s_.t;
    Vp_guess_ = grid_on_ ? model_.grid.Vg : model_.V0;
    thp_guess_ = 0.0;

    const bool sa = !grid_on_;
    const std::size_t m = sa ? n_ + 1 : n_;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    double sumD = 0.0;
    double sumPr = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      sumD += model_.units[i].D0;
      sumPr += Pr_[i];
    }
    const double dw_gc = model_.grid.omega_g - model_.omega0;
    if (sa) u(static_cast<Eigen::Index>(n_)) = (sumPr - load_P_) / sumD;

    auto residual = [&](const Eigen::VectorXd& x) {
      NetworkInput in = network_input(std::vector<double>(x.data(), x.data() + n_), s_.Zv, s_.t);
      const auto sol = network_solve(in, Vp_guess_, thp_guess_, 50, 1e-12);
      Eigen::VectorXd r(static_cast<Eigen::Index>(m));
      const double dw = sa ? x(static_cast<Eigen::Index>(n_)) : dw_gc;
      for (std::size_t i = 0; i < n_; ++i) {
        r(static_cast<Eigen::Index>(i)) = Pr_[i] - sol.P[i] - model_.units[i].D0 * dw;
      }
      if (sa) r(static_cast<Eigen::Index>(n_)) = sol.theta_p * model_.units.front().D0;
      return r;
    };

    const double tol = 1e-9 * std::max(1.0, std::abs(load_P_));
    Eigen::VectorXd r = residual(u);
    for (int it = 0;; ++it) {
      if (r.cwiseAbs().maxCoeff() < tol * 1e-2) break;
      if (it >= 50) {
        std::ostringstream msg;
        msg << "equilibrium initialization did not converge: residual " << r.cwiseAbs().maxCoeff();
        throw ConvergenceError(msg.str(), r.cwiseAbs().maxCoeff(), it);
      }
      Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      for (std::size_t k = 0; k < m; ++k) {
        const double h = 1e-6;
        Eigen::VectorXd up = u;
        Eigen::VectorXd um = u;
        up(static_cast<Eigen::Index>(k)) += h;
        um(static_cast<Eigen::Index>(k)) -= h;
        jac.col(static_cast<Eigen::Index>(k)) = (residual(up) - residual(um)) / (2.0 * h);
      }
      Eigen::VectorXd du = jac.fullPivLu().solve(-r);
      Eigen::VectorXd next = u + du;
      Eigen::VectorXd rn = residual(next);
      // Backtrack if the full step does not reduce the residual.
      for (int b = 0; b < 20 && rn.cwiseAbs().maxCoeff() >= r.cwiseAbs().maxCoeff(); ++b) {
        du *= 0.5;
        next = u + du;
        rn = residual(next);
      }
      if (rn.cwiseAbs().maxCoeff() >= r.cwiseAbs().maxCoeff()) break;
      u = next;
      r = rn;
    }
    if (r.cwiseAbs().maxCoeff() >= tol) {
      throw ConvergenceError("equilibrium initialization stalled", r.cwiseAbs().maxCoeff(), 50);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      s_.theta[i] = u(static_cast<Eigen::Index>(i));
      s_.dw[i] = sa ? u(static_cast<Eigen::Index>(n_)) : dw_gc;
    }
    refresh();
    s_.omega_p = grid_on_ ? model_.grid.omega_g : model_.omega0 + s_.dw.front();
  }

  /// Apply a scenario event at the current step boundary.
  void apply(const EventAction& action) {
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, event::SetLoad>) {
            load_P_ = a.P;
            load_Q_ = a.Q;
          } else if constexpr (std::is_same_v<A, event::SetPref>) {
            if (a.unit >= n_) throw ValidationError("set_pref refers to an unknown unit");
            Pr_[a.unit] = a.P;
          } else if constexpr (std::is_same_v<A, event::EnableController>) {
            set_enabled(a.name, true);
          } else if constexpr (std::is_same_v<A, event::DisableController>) {
            set_enabled(a.name, false);
          } else if constexpr (std::is_same_v<A, event::CommLoss>) {
            comm_loss_ = a.on;
          } else {
            if (a.on && !grid_on_) {
              if (!(model_.grid.Vg > 0.0)) throw ValidationError("grid_connect needs a positive grid voltage");
              // Ideal synchronizing breaker: the grid phasor meets the PCC angle.
              theta_g0_ = s_.theta_p;
              t_g0_ = s_.t;
            }
            grid_on_ = a.on;
          }
        },
        action);
    try {
      refresh();
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(at_time(s_.t) + e.what(), e.residual(), e.iterations());
    } catch (const LossOfSynchronism& e) {
      throw LossOfSynchronism(at_time(s_.t) + e.what());
    }
  }

  /// Communication exchange when a sample instant is due at the current time.
  void communicate(TimeSeries* record) {
    if (!ctrl_.uses_comm()) return;
    if (s_.t + 1e-9 * dt_ < next_sample_t_) return;
    Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
    Eigen::VectorXd packet(static_cast<Eigen::Index>(2 * n_));
    for (std::size_t i = 0; i < n_; ++i) {
      x(static_cast<Eigen::Index>(i)) = model_.units[i].nq * s_.Q[i];
      packet(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(i));
      packet(static_cast<Eigen::Index>(n_ + i)) = s_.dw[i];
    }
    if (record && ctrl_.dvi.configured) {
      record->nu_t.push_back(s_.t);
      record->nu.push_back(lyapunov_v(x, lap_));
    }
    const bool alive = !comm_loss_ && !graph_.in_fault_window(s_.t);
    const auto& rx = channel_.exchange(sample_k_, packet, alive);
    std::fill(dzv_.begin(), dzv_.end(), 0.0);
    std::fill(dsc_.begin(), dsc_.end(), 0.0);
    if (alive && rx) {
      const Eigen::VectorXd xr = rx->head(static_cast<Eigen::Index>(n_));
      const Eigen::VectorXd wr = rx->tail(static_cast<Eigen::Index>(n_));
      if (ctrl_.dvi.configured && ctrl_.dvi.enabled) {
        const Eigen::VectorXd r = ctrl_.dvi.k_v * ctrl_.dvi.sign * (lap_ * xr);
        for (std::size_t i = 0; i < n_; ++i) dzv_[i] = r(static_cast<Eigen::Index>(i));
      }
      if (ctrl_.dsc.configured && ctrl_.dsc.enabled) {
        const Eigen::VectorXd r = -ctrl_.dsc.k_dsc * (lap_ * wr);
        for (std::size_t i = 0; i < n_; ++i) dsc_[i] = r(static_cast<Eigen::Index>(i));
      }
    }
    ++sample_k_;
    next_sample_t_ = static_cast<double>(sample_k_) * graph_.sample_period;
  }

  /// One RK4 step of length dt; the network is re-solved at every stage.
  void step() {
    Eigen::VectorXd y = pack();
    const double t0 = s_.t;
    const double thp0 = s_.theta_p;
    try {
      const Eigen::VectorXd k1 = derivative(y, t0);
      const Eigen::VectorXd k2 = derivative(y + 0.5 * dt_ * k1, t0 + 0.5 * dt_);
      const Eigen::VectorXd k3 = derivative(y + 0.5 * dt_ * k2, t0 + 0.5 * dt_);
      const Eigen::VectorXd k4 = derivative(y + dt_ * k3, t0 + dt_);
      y += dt_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ++k_;
      s_.t = static_cast<double>(k_) * dt_;
      unpack(y);
      for (std::size_t i = 0; i < n_; ++i) s_.Zv[i] = std::max(s_.Zv[i], zv_floor_[i]);
      refresh();
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(at_time(t0) + e.what(), e.residual(), e.iterations());
    } catch (const LossOfSynchronism& e) {
      throw LossOfSynchronism(at_time(t0) + e.what());
    }
    if (grid_on_ && model_.grid.stiff()) {
      s_.omega_p = model_.grid.omega_g;
    } else {
      // Backward difference over the step, first-order filter with tau = 10 dt.
      const double raw = model_.omega0 + (s_.theta_p - thp0) / dt_;
      s_.omega_p += 0.1 * (raw - s_.omega_p);
    }
  }

  /// Run a scenario from the current state; events fire at the first step
  /// boundary at or after their time.
  TimeSeries run(const Scenario& sc) {
    validate(sc, n_);
    TimeSeries ts(n_);
    const auto steps = static_cast<long>(std::llround(sc.t_end / dt_));
    std::size_t next_event = 0;
    for (long k = 0;; ++k) {
      while (next_event < sc.events.size() && sc.events[next_event].t <= s_.t + 1e-9 * dt_) {
        apply(sc.events[next_event].action);
        ++next_event;
      }
      communicate(&ts);
      if (k % static_cast<long>(sc.output_stride) == 0 || k == steps) ts.append(s_, model_);
      if (k == steps) break;
      step();
    }
    return ts;
  }

 private:
  NetworkInput network_input(const std::vector<double>& theta, const std::vector<double>& Zv, double t) const {
    NetworkInput in;
    in.theta = theta;
    in.X.resize(n_);
    in.V0.resize(n_);
    in.kq.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      in.X[i] = model_.base_reactance(i) + Zv[i];
      in.V0[i] = model_.units[i].V0;
      in.kq[i] = model_.droop_coefficient(i);
    }
    in.load_P = load_P_;
    in.load_Q = load_Q_;
    if (grid_on_) {
      in.grid.connected = true;
      in.grid.stiff = model_.grid.stiff();
      in.grid.X = model_.omega0 * model_.grid.Lg;
      in.grid.V = model_.grid.Vg;
      in.grid.theta = theta_g0_ + (model_.grid.omega_g - model_.omega0) * (t - t_g0_);
    }
    return in;
  }

  struct Coeffs {
    double J, D, Jdot;
  };

  Coeffs coefficients(std::size_t i, double zJ, double zD) const {
    const auto& u = model_.units[i];
    Coeffs c{u.J0, u.D0, 0.0};
    if (ctrl_.inertia.configured && ctrl_.inertia.enabled) {
      const auto& p = ctrl_.inertia;
      const double g = p.hpf.mu / p.hpf.tau;
      const double y = g * (Pr_[i] - zJ);
      const double raw = u.J0 - std::abs(y);
      const double floor = p.j_min_frac * u.J0;
      c.J = std::max(raw, floor);
      if (p.form == InertiaForm::Momentum && raw > floor && y != 0.0) {
        const double ydot = -g * (Pr_[i] - zJ) / p.hpf.tau;
        c.Jdot = -(y > 0.0 ? 1.0 : -1.0) * ydot;
      }
    }
    if (ctrl_.damping.configured && ctrl_.damping.enabled) {
      const auto& p = ctrl_.damping;
      c.D = adaptive_damping(p.hpf.mu / p.hpf.tau * (Pr_[i] - zD), u.D0);
    }
    return c;
  }

  Eigen::VectorXd pack() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(5 * n_));
    for (std::size_t i = 0; i < n_; ++i) {
      y(static_cast<Eigen::Index>(i)) = s_.theta[i];
      y(static_cast<Eigen::Index>(n_ + i)) = s_.dw[i];
      y(static_cast<Eigen::Index>(2 * n_ + i)) = s_.Zv[i];
      y(static_cast<Eigen::Index>(3 * n_ + i)) = s_.zJ[i];
      y(static_cast<Eigen::Index>(4 * n_ + i)) = s_.zD[i];
    }
    return y;
  }

  void unpack(const Eigen::VectorXd& y) {
    for (std::size_t i = 0; i < n_; ++i) {
      s_.theta[i] = y(static_cast<Eigen::Index>(i));
      s_.dw[i] = y(static_cast<Eigen::Index>(n_ + i));
      s_.Zv[i] = y(static_cast<Eigen::Index>(2 * n_ + i));
      s_.zJ[i] = y(static_cast<Eigen::Index>(3 * n_ + i));
      s_.zD[i] = y(static_cast<Eigen::Index>(4 * n_ + i));
    }
  }

  Eigen::VectorXd derivative(const Eigen::VectorXd& y, double t) const {
    const auto seg = [&](std::size_t block) {
      const double* p = y.data() + block * n_;
      return std::vector<double>(p, p + n_);
    };
    const auto theta = seg(0);
    const auto Zv = seg(2);
    const auto sol = network_solve(network_input(theta, Zv, t), s_.Vp, s_.theta_p);
    Eigen::VectorXd dy(y.size());
    for (std::size_t i = 0; i < n_; ++i) {
      const auto I = static_cast<Eigen::Index>(i);
      const auto n = static_cast<Eigen::Index>(n_);
      const double dw = y(n + I);
      const double zJ = y(3 * n + I);
      const double zD = y(4 * n + I);
      const Coeffs c = coefficients(i, zJ, zD);
      dy(I) = dw;
      dy(n + I) = (Pr_[i] - sol.P[i] - c.D * dw + dsc_[i] - c.Jdot * dw) / c.J;
      double rate = dzv_[i];
      if (rate < 0.0 && y(2 * n + I) <= zv_floor_[i]) rate = 0.0;
      dy(2 * n + I) = rate;
      dy(3 * n + I) = ctrl_.inertia.configured ? (Pr_[i] - zJ) / ctrl_.inertia.hpf.tau : 0.0;
      dy(4 * n + I) = ctrl_.damping.configured ? (Pr_[i] - zD) / ctrl_.damping.hpf.tau : 0.0;
    }
    return dy;
  }

  // Network solution and effective coefficients at the current state.
  void refresh() {
    const double Vp0 = s_.Vp > 0.0 ? s_.Vp : Vp_guess_;
    const double thp0 = s_.Vp > 0.0 ? s_.theta_p : thp_guess_;
    const auto sol = network_solve(network_input(s_.theta, s_.Zv, s_.t), Vp0, thp0);
    s_.P = sol.P;
    s_.Q = sol.Q;
    s_.Vp = sol.Vp;
    s_.theta_p = sol.theta_p;
    s_.Pg = grid_on_ ? sol.Pg : 0.0;
    s_.Qg = grid_on_ ? sol.Qg : 0.0;
    s_.J_eff.resize(n_);
    s_.D_eff.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const Coeffs c = coefficients(i, s_.zJ[i], s_.zD[i]);
      s_.J_eff[i] = c.J;
      s_.D_eff[i] = c.D;
    }
  }

  void set_enabled(const std::string& name, bool on) {
    if (name == "dvi" && ctrl_.dvi.configured) {
      ctrl_.dvi.enabled = on;
      if (!on) std::fill(dzv_.begin(), dzv_.end(), 0.0);
    } else if (name == "adaptive_inertia" && ctrl_.inertia.configured) {
      ctrl_.inertia.enabled = on;
    } else if (name == "adaptive_damping" && ctrl_.damping.configured) {
      ctrl_.damping.enabled = on;
    } else if (name == "dsc" && ctrl_.dsc.configured) {
      ctrl_.dsc.enabled = on;
      if (!on) std::fill(dsc_.begin(), dsc_.end(), 0.0);
    } else {
      throw ValidationError("unknown controller name '" + name + "'");
    }
  }

  static std::string at_time(double t) {
    std::ostringstream msg;
    msg << "at t = " << t << " s: ";
    return msg.str();
  }

  NetworkModel model_;
  CommGraph graph_;
  ControllerSet ctrl_;
  double dt_;
  std::size_t n_ = 0;
  Eigen::MatrixXd lap_;
  CommChannel channel_;

  SimState s_;
  long k_ = 0;
  double load_P_ = 0.0;
  double load_Q_ = 0.0;
  std::vector<double> Pr_;
  bool grid_on_ = false;
  bool comm_loss_ = false;
  double theta_g0_ = 0.0;
  double t_g0_ = 0.0;
  double Vp_guess_ = 0.0;
  double thp_guess_ = 0.0;
  std::vector<double> zv_floor_;
  std::vector<double> dzv_;  // held between samples
  std::vector<double> dsc_;  // held between samples
  long sample_k_ = 0;
  double next_sample_t_ = 0.0;
};

inline TimeSeries simulate(const NetworkModel& model, const CommGraph& graph, const Scenario& scenario,
                           const ControllerSet& controllers) {
  validate(scenario, model.size());
  Simulator sim(model, graph, controllers, scenario.dt);
  return sim.run(scenario);
}

inline TimeSeries simulate(const Config& cfg) {
  return simulate(cfg.model, cfg.graph, cfg.scenario, cfg.controllers);
}

}  // namespace vsgosc
