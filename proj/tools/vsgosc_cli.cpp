// vsgosc: scenario runner, frequency-response and design front end.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "vsgosc/vsgosc.hpp"

namespace fs = std::filesystem;
using namespace vsgosc;

namespace {

struct OutputFile {
  fs::path path;
  std::string body;
};

// Everything is rendered in memory first; nothing touches disk unless the
// whole command succeeded.
void write_all(const std::vector<OutputFile>& files) {
  for (const auto& f : files) {
    if (f.path.has_parent_path()) fs::create_directories(f.path.parent_path());
    std::ofstream out(f.path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + f.path.string() + "'");
    out << f.body;
  }
}

std::string stem_of(const std::string& config_path) { return fs::path(config_path).stem().string(); }

struct SimulationOutput {
  std::vector<OutputFile> files;
  std::string summary;
};

SimulationOutput run_simulation(const std::string& config_path, const fs::path& out_dir) {
  const Config cfg = load_model_file(config_path);
  const TimeSeries ts = simulate(cfg);

  MetricsOptions opt;
  opt.t_from = first_disturbance_time(cfg.scenario);
  MetricsReport report = extract_metrics(ts, cfg.model, cfg.graph, opt);
  report.max_power_imbalance = max_power_imbalance(ts, cfg.model, cfg.scenario, cfg.scenario.dt);

  SimulationOutput out;
  const std::string stem = stem_of(config_path);
  std::ostringstream csv;
  write_csv(csv, ts);
  out.files.push_back({out_dir / (stem + ".csv"), csv.str()});
  out.files.push_back({out_dir / (stem + "_metrics.json"), to_json(report).dump(2) + "\n"});
  if (!ts.nu.empty()) {
    std::ostringstream nu;
    nu << "t_s,lyapunov\n";
    for (std::size_t k = 0; k < ts.nu.size(); ++k) nu << format_double(ts.nu_t[k]) << ',' << format_double(ts.nu[k]) << '\n';
    out.files.push_back({out_dir / (stem + "_lyapunov.csv"), nu.str()});
  }

  std::ostringstream s;
  s << stem << ": " << ts.rows() << " samples, t_end " << ts.t().back() << " s\n";
  for (std::size_t i = 0; i < cfg.model.size(); ++i) {
    const auto& m = report.signal(TimeSeries::unit_column(i, "P_W"));
    s << "  " << cfg.model.units[i].id << ": P final " << std::fixed << std::setprecision(2) << m.steady_state_value
      << " W, overshoot " << m.overshoot_pct << " %, peak-to-peak " << m.peak_to_peak << " W\n";
    s.unsetf(std::ios::fixed);
  }
  out.summary = s.str();
  return out;
}

int cmd_simulate(const std::string& config, const fs::path& out_dir) {
  auto result = run_simulation(config, out_dir);
  write_all(result.files);
  std::cout << result.summary;
  return 0;
}

int cmd_sweep(const std::vector<std::string>& configs, const fs::path& out_dir, int jobs) {
  std::vector<std::optional<SimulationOutput>> results(configs.size());
  std::vector<std::string> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      try {
        results[k] = run_simulation(configs[k], out_dir);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  for (int j = 0; j < n; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int status = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    if (results[k]) {
      write_all(results[k]->files);
      std::cout << results[k]->summary;
    } else {
      std::cerr << "error: " << configs[k] << ": " << errors[k] << '\n';
      status = 1;
    }
  }
  return status;
}

int cmd_bode(const std::string& config_path, const std::string& which, const std::string& source, double wmin,
             double wmax, std::size_t points, const fs::path& out_dir) {
  const Config cfg = load_model_file(config_path);
  std::vector<RationalTF> tfs;
  std::string label;
  if (which == "sa") {
    tfs = sa_load_step_tfs(cfg.model).power;
    label = "dP_i/dP_L";
  } else {
    const std::string src = source.empty() ? cfg.model.units.front().id : source;
    tfs = gc_ref_step_tfs(cfg.model, src).power;
    label = "dP_i/dP_r(" + src + ")";
  }
  std::vector<OutputFile> files;
  std::ostringstream summary;
  for (std::size_t i = 0; i < tfs.size(); ++i) {
    const auto& id = cfg.model.units[i].id;
    if (tfs[i].num().is_zero()) {
      summary << id << " " << label << ": identically zero\n";
      continue;
    }
    const FrequencyResponse fr = bode(tfs[i], wmin, wmax, points);
    std::ostringstream csv;
    csv << "omega_rad_s,mag_db,phase_deg\n";
    for (std::size_t k = 0; k < fr.omegas.size(); ++k) {
      csv << format_double(fr.omegas[k]) << ',' << format_double(fr.magnitude_db[k]) << ','
          << format_double(fr.phase_deg[k]) << '\n';
    }
    files.push_back({out_dir / (stem_of(config_path) + "_bode_" + which + "_unit" + std::to_string(i + 1) + ".csv"),
                     csv.str()});
    const auto peak = resonance_peak(fr);
    summary << id << " " << label << ": DC " << std::setprecision(6) << 20.0 * std::log10(std::abs(tfs[i].dc_gain()))
            << " dB, ";
    if (peak) {
      summary << "resonance peak at " << peak->omega << " rad/s, " << peak->peak_db_above_dc << " dB above DC\n";
    } else {
      summary << "no interior peak\n";
    }
  }
  write_all(files);
  std::cout << summary.str();
  return 0;
}

struct DesignFlags {
  std::optional<double> dp_max, rocof_max, dw_max, rho, nq_l2_h0, omega_c;
  double k_hp = 10.0;
};

int cmd_design(const DesignFlags& f, const fs::path& out_dir) {
  const bool swing = f.dp_max || f.rocof_max || f.dw_max;
  const bool consensus = f.rho || f.nq_l2_h0;
  std::vector<std::string> missing;
  if (swing || !consensus) {
    if (!f.dp_max) missing.push_back("--dp-max");
    if (!f.rocof_max) missing.push_back("--rocof-max");
    if (!f.dw_max) missing.push_back("--dw-max");
  }
  if (consensus) {
    if (!f.rho) missing.push_back("--rho");
    if (!f.nq_l2_h0) missing.push_back("--nq-l2-h0");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw std::invalid_argument("missing flags: " + list);
  }

  nlohmann::json j;
  std::ostringstream text;
  text << std::setprecision(10);
  double omega_c = f.omega_c.value_or(1.0);
  if (swing) {
    const auto [J0, D0] = inertia_damping_design(*f.dp_max, *f.rocof_max, *f.dw_max);
    if (!f.omega_c) omega_c = D0 / J0;
    const double tau = hpf_time_constant(f.k_hp, omega_c);
    text << "J0      = dP_max / RoCoF_max       = " << J0 << '\n'
         << "D0      = dP_max / dw_max          = " << D0 << '\n'
         << "omega_c = D0 / J0                  = " << omega_c << '\n'
         << "tau     = 1 / (k_HP * omega_c)     = " << tau << '\n'
         << "mu      = tau                      = " << tau << '\n';
    j["J0"] = J0;
    j["D0"] = D0;
    j["omega_c"] = omega_c;
    j["tau"] = tau;
    j["mu"] = tau;
  }
  if (consensus) {
    const double k_v = consensus_gain(*f.rho, omega_c, *f.nq_l2_h0);
    text << "k_v     = rho * omega_c / (nq * lambda2 * |H(0)|) = " << k_v << '\n';
    j["k_v"] = k_v;
    j["omega_c"] = omega_c;
  }
  write_all({{out_dir / "design.json", j.dump(2) + "\n"}});
  std::cout << text.str();
  return 0;
}

int cmd_check(const std::string& config_path, const fs::path& out_dir) {
  Config cfg = load_model_file(config_path);
  const NetworkModel& m = cfg.model;
  std::ostringstream s;
  s << std::setprecision(6);
  const double residual = proportionality_residual(m);
  s << "proportionality residual: " << residual << '\n';
  if (m.size() < 2) {
    s << "single unit: no pairs to compare\n";
    std::cout << s.str();
    return 0;
  }
  const auto K = nominal_couplings(m);
  s << "unit   J/J1      D/D1      K/K1      X_ohm\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    s << std::left << std::setw(6) << m.units[i].id << ' ' << std::setw(9) << m.units[i].J0 / m.units.front().J0
      << ' ' << std::setw(9) << m.units[i].D0 / m.units.front().D0 << ' ' << std::setw(9) << K[i] / K.front() << ' '
      << m.base_reactance(i) << '\n';
  }
  std::vector<OutputFile> files;
  if (residual < 1e-12) {
    s << "suggestion: none needed\n";
  } else {
    const auto sug = suggest_virtual_reactance(m);
    if (!sug.inertia_damping_proportional) {
      s << "note: D is not proportional to J, so no reactance choice can zero the residual\n";
    }
    s << "suggested branch reactances (X_i = " << sug.scale << " * V0_i / J_i):\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      s << "  " << m.units[i].id << ": X = " << sug.target_reactance[i] << " ohm, zv0 = " << sug.zv0[i]
        << " ohm (change " << sug.zv_increment[i] << ")\n";
      cfg.model.units[i].Zv0 = sug.zv0[i];
    }
    s << "residual with suggestion: " << proportionality_residual(cfg.model) << '\n';
    files.push_back({out_dir / (stem_of(config_path) + "_proportional.json"), dump_model(cfg) + "\n"});
  }
  write_all(files);
  std::cout << s.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-VSG microgrid oscillation analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = ".";
  long seed = 0;
  int jobs = 1;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "reserved; the engine is deterministic");
  app.add_option("--jobs", jobs, "parallel scenario runs (sweep)")->check(CLI::PositiveNumber);

  std::string config;
  auto* sim = app.add_subcommand("simulate", "run a scenario, write CSV and metrics JSON");
  sim->add_option("config", config, "scenario config (JSON)")->required();

  std::string which = "sa";
  std::string source;
  double wmin = 0.01;
  double wmax = 1000.0;
  std::size_t points = 400;
  auto* bd = app.add_subcommand("bode", "frequency response of the per-unit power transfer functions");
  bd->add_option("config", config, "model config (JSON)")->required();
  bd->add_option("--which", which, "sa (load step) or gc (reference step)")->check(CLI::IsMember({"sa", "gc"}));
  bd->add_option("--source", source, "unit stepped in gc mode (default: first unit)");
  bd->add_option("--omega-min", wmin, "rad/s");
  bd->add_option("--omega-max", wmax, "rad/s");
  bd->add_option("--points", points, "log-spaced grid size");

  DesignFlags df;
  auto* ds = app.add_subcommand("design", "parameter design calculator");
  ds->add_option("--dp-max", df.dp_max, "largest expected power step, W");
  ds->add_option("--rocof-max", df.rocof_max, "RoCoF limit, rad/s^2");
  ds->add_option("--dw-max", df.dw_max, "steady frequency deviation limit, rad/s");
  ds->add_option("--k-hp", df.k_hp, "HPF bandwidth ratio, 10..30");
  ds->add_option("--rho", df.rho, "consensus bandwidth ratio, 0.01..0.5");
  ds->add_option("--nq-l2-h0", df.nq_l2_h0, "product nq * lambda2 * |H(0)|");
  ds->add_option("--omega-c", df.omega_c, "VSG bandwidth D/J, rad/s (default: from J0/D0, else 1)");

  auto* ck = app.add_subcommand("check", "proportionality report and virtual-reactance suggestion");
  ck->add_option("config", config, "model config (JSON)")->required();

  std::vector<std::string> configs;
  auto* sw = app.add_subcommand("sweep", "run several scenarios, optionally in parallel");
  sw->add_option("configs", configs, "scenario configs")->required();

  CLI11_PARSE(app, argc, argv);
  (void)seed;
  try {
    if (*sim) return cmd_simulate(config, out_dir);
    if (*bd) return cmd_bode(config, which, source, wmin, wmax, points, out_dir);
    if (*ds) return cmd_design(df, out_dir);
    if (*ck) return cmd_check(config, out_dir);
    if (*sw) return cmd_sweep(configs, out_dir, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
