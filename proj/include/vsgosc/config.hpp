#pragma once

// JSON configuration: one document carries the network, the communication
// graph, the scenario and the controller set. Field names carry their units.
// Keys starting with '_' are comments and ignored; any other unknown key is
// rejected so typos do not pass silently.

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include "vsgosc/controllers.hpp"
#include "vsgosc/errors.hpp"
#include "vsgosc/model.hpp"

namespace vsgosc {

struct Config {
  NetworkModel model;
  CommGraph graph;
  Scenario scenario;
  ControllerSet controllers;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key[0] == '_') continue;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

inline const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  return j;
}

inline double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const char* key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline std::string text(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline bool flag_or(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ValidationError(where + ": '" + key + "' must be true or false");
  return v.get<bool>();
}

// Scaled write whose scaled read-back is bit-identical: find b with b / k == a.
inline double exact_scaled(double a, double k) {
  double b = a * k;
  for (int step = 0; step < 8 && b / k != a; ++step) {
    b = std::nextafter(b, b / k < a ? INFINITY : -INFINITY);
  }
  return b;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the position after the offending character.
  return {line, col > 1 ? col - 1 : col};
}

inline Event parse_event(const json& e, const NetworkModel& model, std::size_t idx) {
  const std::string where = "scenario.events[" + std::to_string(idx) + "]";
  require_object(e, where);
  Event ev;
  ev.t = number(e, "t_s", where);
  const std::string kind = text(e, "kind", where);
  if (kind == "set_load") {
    check_keys(e, where, {"t_s", "kind", "p_W", "q_var"});
    ev.action = event::SetLoad{number(e, "p_W", where), number_or(e, "q_var", where, model.load_Q)};
  } else if (kind == "set_pref") {
    check_keys(e, where, {"t_s", "kind", "unit", "p_W"});
    const std::string id = text(e, "unit", where);
    const auto i = model.index_of(id);
    if (!i) throw ValidationError(where + ": unknown unit '" + id + "'");
    ev.action = event::SetPref{*i, number(e, "p_W", where)};
  } else if (kind == "enable_controller" || kind == "disable_controller") {
    check_keys(e, where, {"t_s", "kind", "name"});
    const std::string name = text(e, "name", where);
    if (kind == "enable_controller") {
      ev.action = event::EnableController{name};
    } else {
      ev.action = event::DisableController{name};
    }
  } else if (kind == "comm_loss") {
    check_keys(e, where, {"t_s", "kind", "on"});
    ev.action = event::CommLoss{flag_or(e, "on", where, true)};
  } else if (kind == "grid_connect") {
    check_keys(e, where, {"t_s", "kind", "on"});
    ev.action = event::GridConnect{flag_or(e, "on", where, true)};
  } else {
    throw ValidationError(where + ": unknown event kind '" + kind + "'");
  }
  return ev;
}

inline void parse_controllers(const json& list, ControllerSet& c) {
  if (!list.is_array()) throw ValidationError("controllers must be an array");
  std::set<std::string> seen;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string where = "controllers[" + std::to_string(k) + "]";
    const json& o = require_object(list[k], where);
    const std::string kind = text(o, "kind", where);
    if (!seen.insert(kind).second) throw ValidationError(where + ": controller '" + kind + "' listed twice");
    if (kind == "traditional") {
      check_keys(o, where, {"kind"});
    } else if (kind == "dvi") {
      check_keys(o, where, {"kind", "k_v", "sign", "enabled"});
      c.dvi.configured = true;
      c.dvi.k_v = number_or(o, "k_v", where, c.dvi.k_v);
      c.dvi.sign = number_or(o, "sign", where, c.dvi.sign);
      c.dvi.enabled = flag_or(o, "enabled", where, true);
    } else if (kind == "adaptive_inertia") {
      check_keys(o, where, {"kind", "mu", "tau", "j_min_frac", "form", "enabled"});
      c.inertia.configured = true;
      c.inertia.hpf.mu = number_or(o, "mu", where, c.inertia.hpf.mu);
      c.inertia.hpf.tau = number_or(o, "tau", where, c.inertia.hpf.tau);
      c.inertia.j_min_frac = number_or(o, "j_min_frac", where, c.inertia.j_min_frac);
      if (o.contains("form")) {
        const std::string form = text(o, "form", where);
        if (form == "momentum") {
          c.inertia.form = InertiaForm::Momentum;
        } else if (form == "coefficient") {
          c.inertia.form = InertiaForm::Coefficient;
        } else {
          throw ValidationError(where + ": form must be 'momentum' or 'coefficient'");
        }
      }
      c.inertia.enabled = flag_or(o, "enabled", where, true);
    } else if (kind == "adaptive_damping") {
      check_keys(o, where, {"kind", "mu", "tau", "enabled"});
      c.damping.configured = true;
      c.damping.hpf.mu = number_or(o, "mu", where, c.damping.hpf.mu);
      c.damping.hpf.tau = number_or(o, "tau", where, c.damping.hpf.tau);
      c.damping.enabled = flag_or(o, "enabled", where, true);
    } else if (kind == "dsc") {
      check_keys(o, where, {"kind", "k_dsc", "enabled"});
      c.dsc.configured = true;
      c.dsc.k_dsc = number_or(o, "k_dsc", where, c.dsc.k_dsc);
      c.dsc.enabled = flag_or(o, "enabled", where, true);
    } else {
      throw ValidationError(where + ": unknown controller kind '" + kind + "'");
    }
  }
}

inline bool controller_configured(const ControllerSet& c, const std::string& name) {
  if (name == "dvi") return c.dvi.configured;
  if (name == "adaptive_inertia") return c.inertia.configured;
  if (name == "adaptive_damping") return c.damping.configured;
  if (name == "dsc") return c.dsc.configured;
  return false;
}

}  // namespace detail

/// Parse and validate a configuration document.
inline Config load_model(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    std::ostringstream msg;
    msg << "parse error at line " << line << ", column " << col << ": " << e.what();
    throw ParseError(msg.str(), line, col);
  }
  detail::require_object(root, "config");
  detail::check_keys(root, "config",
                     {"omega0_rad_s", "v0_V", "mode", "grid", "load", "qv_droop_V", "units", "comm", "scenario",
                      "controllers"});

  Config cfg;
  NetworkModel& m = cfg.model;
  m.omega0 = detail::number(root, "omega0_rad_s", "config");
  m.V0 = detail::number(root, "v0_V", "config");
  m.qv_droop_V = detail::number_or(root, "qv_droop_V", "config", m.qv_droop_V);

  const std::string mode = root.contains("mode") ? detail::text(root, "mode", "config") : "SA";
  if (mode == "SA") {
    m.grid.mode = GridMode::StandAlone;
  } else if (mode == "GC") {
    m.grid.mode = GridMode::GridConnected;
  } else {
    throw ValidationError("config: mode must be 'SA' or 'GC'");
  }
  m.grid.Vg = m.V0;
  m.grid.omega_g = m.omega0;
  if (root.contains("grid")) {
    const json& g = detail::require_object(root.at("grid"), "grid");
    detail::check_keys(g, "grid", {"lg_mH", "vg_V", "omega_g_rad_s"});
    m.grid.Lg = detail::number_or(g, "lg_mH", "grid", 0.0) / 1e3;
    m.grid.Vg = detail::number_or(g, "vg_V", "grid", m.grid.Vg);
    m.grid.omega_g = detail::number_or(g, "omega_g_rad_s", "grid", m.grid.omega_g);
  }
  if (root.contains("load")) {
    const json& l = detail::require_object(root.at("load"), "load");
    detail::check_keys(l, "load", {"p_W", "q_var"});
    m.load_P = detail::number_or(l, "p_W", "load", 0.0);
    m.load_Q = detail::number_or(l, "q_var", "load", 0.0);
  }

  if (!root.contains("units") || !root.at("units").is_array()) throw ValidationError("config: 'units' must be an array");
  const json& units = root.at("units");
  for (std::size_t k = 0; k < units.size(); ++k) {
    const std::string where = "units[" + std::to_string(k) + "]";
    const json& u = detail::require_object(units[k], where);
    detail::check_keys(u, where, {"id", "j0", "d0", "pm_W", "nq", "feeder_mH", "v0_V", "zv0_ohm", "pr_W"});
    UnitParams p;
    p.id = u.contains("id") ? detail::text(u, "id", where) : "DG" + std::to_string(k + 1);
    p.J0 = detail::number(u, "j0", where);
    p.D0 = detail::number(u, "d0", where);
    p.Pm = detail::number(u, "pm_W", where);
    p.nq = u.contains("nq") ? detail::number(u, "nq", where) : (p.Pm > 0.0 ? 1.0 / p.Pm : 0.0);
    p.Lf_feeder = detail::number(u, "feeder_mH", where) / 1e3;
    p.V0 = detail::number_or(u, "v0_V", where, m.V0);
    p.Zv0 = detail::number_or(u, "zv0_ohm", where, 0.0);
    p.Pr = detail::number_or(u, "pr_W", where, 0.0);
    m.units.push_back(p);
  }
  validate(m);

  const std::size_t n = m.size();
  cfg.graph.adjacency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (root.contains("comm")) {
    const json& c = detail::require_object(root.at("comm"), "comm");
    detail::check_keys(c, "comm", {"adjacency", "sample_ms", "delay_ms", "fault_windows_s"});
    if (c.contains("adjacency")) {
      const json& a = c.at("adjacency");
      if (!a.is_array() || a.size() != n) {
        throw ValidationError("adjacency must be " + std::to_string(n) + "x" + std::to_string(n));
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!a[i].is_array() || a[i].size() != n) {
          throw ValidationError("adjacency must be " + std::to_string(n) + "x" + std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (!a[i][j].is_number()) throw ValidationError("adjacency entries must be 0 or 1");
          cfg.graph.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j].get<double>();
        }
      }
    }
    cfg.graph.sample_period = detail::number_or(c, "sample_ms", "comm", 10.0) / 1e3;
    cfg.graph.delay = detail::number_or(c, "delay_ms", "comm", 0.0) / 1e3;
    if (c.contains("fault_windows_s")) {
      const json& fw = c.at("fault_windows_s");
      if (!fw.is_array()) throw ValidationError("comm: fault_windows_s must be an array of [t0, t1]");
      for (const auto& w : fw) {
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
          throw ValidationError("comm: fault_windows_s must be an array of [t0, t1]");
        }
        cfg.graph.fault_windows.emplace_back(w[0].get<double>(), w[1].get<double>());
      }
    }
  }
  validate(cfg.graph, n);

  if (root.contains("controllers")) detail::parse_controllers(root.at("controllers"), cfg.controllers);
  validate(cfg.controllers);
  if (cfg.controllers.uses_comm() && n > 1 && connected_components(cfg.graph.adjacency) != 1) {
    throw ValidationError("communication graph must be connected for consensus controllers");
  }

  if (!root.contains("scenario")) throw ValidationError("config: missing 'scenario'");
  const json& s = detail::require_object(root.at("scenario"), "scenario");
  detail::check_keys(s, "scenario", {"t_end_s", "dt_s", "output_stride", "events"});
  cfg.scenario.t_end = detail::number(s, "t_end_s", "scenario");
  cfg.scenario.dt = detail::number_or(s, "dt_s", "scenario", cfg.scenario.dt);
  if (s.contains("output_stride")) {
    const json& st = s.at("output_stride");
    if (!st.is_number_integer() || st.get<long long>() < 1) {
      throw ValidationError("scenario: output_stride must be a positive integer");
    }
    cfg.scenario.output_stride = st.get<std::size_t>();
  }
  if (s.contains("events")) {
    const json& ev = s.at("events");
    if (!ev.is_array()) throw ValidationError("scenario: events must be an array");
    for (std::size_t k = 0; k < ev.size(); ++k) cfg.scenario.events.push_back(detail::parse_event(ev[k], m, k));
  }
  validate(cfg.scenario, n);
  for (const auto& e : cfg.scenario.events) {
    const std::string* name = nullptr;
    if (const auto* en = std::get_if<event::EnableController>(&e.action)) name = &en->name;
    if (const auto* dis = std::get_if<event::DisableController>(&e.action)) name = &dis->name;
    if (name && !detail::controller_configured(cfg.controllers, *name)) {
      throw ValidationError("unknown controller name '" + *name + "'");
    }
    if (std::holds_alternative<event::GridConnect>(e.action) && !(m.grid.Vg > 0.0)) {
      throw ValidationError("grid_connect needs a positive grid voltage");
    }
  }
  return cfg;
}

inline Config load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

/// Serialize back to the config schema; load_model(dump(cfg)) reproduces cfg.
inline std::string dump_model(const Config& cfg, int indent = 2) {
  using detail::exact_scaled;
  using detail::json;
  const NetworkModel& m = cfg.model;
  json root;
  root["omega0_rad_s"] = m.omega0;
  root["v0_V"] = m.V0;
  root["mode"] = to_string(m.grid.mode);
  root["qv_droop_V"] = m.qv_droop_V;
  root["grid"] = {{"lg_mH", exact_scaled(m.grid.Lg, 1e3)}, {"vg_V", m.grid.Vg}, {"omega_g_rad_s", m.grid.omega_g}};
  root["load"] = {{"p_W", m.load_P}, {"q_var", m.load_Q}};
  json units = json::array();
  for (const auto& u : m.units) {
    units.push_back({{"id", u.id},
                     {"j0", u.J0},
                     {"d0", u.D0},
                     {"pm_W", u.Pm},
                     {"nq", u.nq},
                     {"feeder_mH", exact_scaled(u.Lf_feeder, 1e3)},
                     {"v0_V", u.V0},
                     {"zv0_ohm", u.Zv0},
                     {"pr_W", u.Pr}});
  }
  root["units"] = units;

  json adj = json::array();
  for (Eigen::Index i = 0; i < cfg.graph.adjacency.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < cfg.graph.adjacency.cols(); ++j) row.push_back(cfg.graph.adjacency(i, j));
    adj.push_back(row);
  }
  json windows = json::array();
  for (const auto& [t0, t1] : cfg.graph.fault_windows) windows.push_back({t0, t1});
  root["comm"] = {{"adjacency", adj},
                  {"sample_ms", exact_scaled(cfg.graph.sample_period, 1e3)},
                  {"delay_ms", exact_scaled(cfg.graph.delay, 1e3)},
                  {"fault_windows_s", windows}};

  json ctrls = json::array();
  const ControllerSet& c = cfg.controllers;
  if (c.dvi.configured) ctrls.push_back({{"kind", "dvi"}, {"k_v", c.dvi.k_v}, {"sign", c.dvi.sign}, {"enabled", c.dvi.enabled}});
  if (c.inertia.configured) {
    ctrls.push_back({{"kind", "adaptive_inertia"},
                     {"mu", c.inertia.hpf.mu},
                     {"tau", c.inertia.hpf.tau},
                     {"j_min_frac", c.inertia.j_min_frac},
                     {"form", c.inertia.form == InertiaForm::Momentum ? "momentum" : "coefficient"},
                     {"enabled", c.inertia.enabled}});
  }
  if (c.damping.configured) {
    ctrls.push_back({{"kind", "adaptive_damping"},
                     {"mu", c.damping.hpf.mu},
                     {"tau", c.damping.hpf.tau},
                     {"enabled", c.damping.enabled}});
  }
  if (c.dsc.configured) ctrls.push_back({{"kind", "dsc"}, {"k_dsc", c.dsc.k_dsc}, {"enabled", c.dsc.enabled}});
  root["controllers"] = ctrls;

  json events = json::array();
  for (const auto& e : cfg.scenario.events) {
    json o;
    o["t_s"] = e.t;
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, event::SetLoad>) {
            o["kind"] = "set_load";
            o["p_W"] = a.P;
            o["q_var"] = a.Q;
          } else if constexpr (std::is_same_v<A, event::SetPref>) {
            o["kind"] = "set_pref";
            o["unit"] = m.units[a.unit].id;
            o["p_W"] = a.P;
          } else if constexpr (std::is_same_v<A, event::EnableController>) {
            o["kind"] = "enable_controller";
            o["name"] = a.name;
          } else if constexpr (std::is_same_v<A, event::DisableController>) {
            o["kind"] = "disable_controller";
            o["name"] = a.name;
          } else if constexpr (std::is_same_v<A, event::CommLoss>) {
            o["kind"] = "comm_loss";
            o["on"] = a.on;
          } else {
            o["kind"] = "grid_connect";
            o["on"] = a.on;
          }
        },
        e.action);
    events.push_back(o);
  }
  root["scenario"] = {{"t_end_s", cfg.scenario.t_end},
                      {"dt_s", cfg.scenario.dt},
                      {"output_stride", cfg.scenario.output_stride},
                      {"events", events}};
  return root.dump(indent);
}

}  // namespace vsgosc
