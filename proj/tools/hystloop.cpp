// Command-line front end: simulate / tune / metrics over the core library.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hystloop/config.hpp"
#include "hystloop/csv.hpp"
#include "hystloop/errors.hpp"
#include "hystloop/loop.hpp"
#include "hystloop/tuning.hpp"
#include "hystloop/version.hpp"

namespace fs = std::filesystem;
using hystloop::ConfigError;
using hystloop::DivergenceError;
using hystloop::IoError;
using hystloop::ParameterError;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  bool json = false;
};

hystloop::FlatConfig load_config(const CommonOpts& opts) {
  auto fc = hystloop::FlatConfig::parse_file(opts.config_path);
  for (const auto& kv : opts.overrides) fc.apply_override(kv);
  return fc;
}

int cmd_simulate(const CommonOpts& opts) {
  auto fc = load_config(opts);
  hystloop::LoopConfig cfg = hystloop::load_loop_config(fc);
  fc.consume_prefix("tune.");  // a config may also carry a tuning section
  fc.ensure_fully_consumed();

  const hystloop::RunResult result = cfg.controller ? hystloop::run_closed_loop(cfg)
                                                    : hystloop::run_open_loop(cfg);
  hystloop::write_run_artifacts(result, opts.out_dir);

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  if (opts.json) {
    std::cout << hystloop::manifest_json(result);
  } else {
    std::printf("FF(vB)=%.6g%% FF(B)=%.6g%% RMSE=%.6g\n", result.metrics.ff_vb_percent,
                result.metrics.ff_b_percent, result.metrics.rmse_tracking);
  }
  return kExitOk;
}

ordered_json tune_json(const hystloop::TuneResult& result) {
  ordered_json j;
  j["tool"] = hystloop::kToolName;
  j["version"] = hystloop::kVersion;
  j["best_params"]["Kp"] = result.best_params.Kp;
  j["best_params"]["Ki"] = result.best_params.Ki;
  j["best_params"]["k_alpha"] = result.best_params.k_alpha;
  j["best_params"]["k_beta"] = result.best_params.k_beta;
  j["best_score"] = result.best_score;
  j["evaluations"] = result.evaluations;
  return j;
}

int cmd_tune(const CommonOpts& opts) {
  auto fc = load_config(opts);
  hystloop::LoopConfig base = hystloop::load_loop_config(fc);
  hystloop::TuneSpec spec = hystloop::load_tune_spec(fc, std::move(base));
  fc.ensure_fully_consumed();

  const hystloop::TuneResult result = hystloop::run_tuning(spec);

  fs::create_directories(opts.out_dir);
  const std::string& name = spec.base_config.name;

  ordered_json j = tune_json(result);
  // Timestamp sits on its own line so reruns stay comparable around it.
  j["timestamp"] = [] {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  }();
  {
    const fs::path path = fs::path(opts.out_dir) / (name + "_tune.json");
    const fs::path tmp = path.string() + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << j.dump(2) << "\n";
    out.close();
    fs::rename(tmp, path);
  }
  {
    std::vector<std::string> header{"eval"};
    for (const auto& n : result.dim_names) header.push_back(n);
    header.push_back("score");
    std::vector<std::vector<double>> cols(header.size());
    for (std::size_t i = 0; i < result.history.size(); ++i) {
      cols[0].push_back(static_cast<double>(i));
      for (std::size_t d = 0; d < result.dim_names.size(); ++d)
        cols[1 + d].push_back(result.history[i].point[d]);
      cols.back().push_back(result.history[i].score);
    }
    std::vector<const std::vector<double>*> col_ptrs;
    for (const auto& c : cols) col_ptrs.push_back(&c);
    hystloop::write_csv(fs::path(opts.out_dir) / (name + "_tune_history.csv"), header, col_ptrs);
  }

  if (opts.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("best: Kp=%.6g Ki=%.6g k_alpha=%.6g k_beta=%.6g score=%.6g evaluations=%ld\n",
                result.best_params.Kp, result.best_params.Ki, result.best_params.k_alpha,
                result.best_params.k_beta, result.best_score, result.evaluations);
  }
  return kExitOk;
}

double parse_ff_theoretical(const std::string& value) {
  if (value == "sine") return hystloop::kFfSine;
  if (value == "square") return hystloop::kFfSquare;
  if (value == "triangle") return hystloop::kFfTriangle;
  if (value == "parabolic") return hystloop::kFfParabolic;
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParameterError("--ff-theoretical must be sine, square, triangle, parabolic or a number");
}

int cmd_metrics(const std::string& csv_path, const std::string& ff_arg, long tail_samples,
                bool json) {
  const double ff_theoretical = parse_ff_theoretical(ff_arg);
  hystloop::CsvTable table = hystloop::read_csv(csv_path);
  const std::size_t t_col = table.column_index("t");
  if (table.rows() < 2) throw IoError("need at least 2 data rows in " + csv_path);

  const double dt = table.columns[t_col][1] - table.columns[t_col][0];
  if (!(dt > 0.0)) throw IoError("non-increasing time column in " + csv_path);

  std::size_t rows = table.rows();
  std::size_t first = 0;
  if (tail_samples > 0) {
    if (static_cast<std::size_t>(tail_samples) > rows)
      throw ParameterError("--tail-samples exceeds the number of rows");
    first = rows - static_cast<std::size_t>(tail_samples);
  }

  auto column_trace = [&](std::size_t c) {
    hystloop::SignalTrace t;
    t.dt = dt;
    t.label = table.header[c];
    t.samples.assign(table.columns[c].begin() + static_cast<std::ptrdiff_t>(first),
                     table.columns[c].end());
    return t;
  };

  ordered_json out;
  out["ff_theoretical"] = ff_theoretical;
  ordered_json cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == t_col) continue;
    const auto trace = column_trace(c);
    ordered_json jc;
    jc["rms"] = hystloop::rms(trace);
    jc["mean_rectified"] = hystloop::mean_rectified(trace);
    jc["dc"] = hystloop::dc_component(trace);
    try {
      jc["ff_percent"] = hystloop::form_factor_percent(trace, ff_theoretical);
    } catch (const ParameterError&) {
      jc["ff_percent"] = nullptr;  // degenerate (all-zero) column
    }
    cols[table.header[c]] = jc;
  }
  out["columns"] = cols;

  // Tracking error when the export carries both the reference and vB.
  bool have_ref = false, have_vb = false;
  for (const auto& h : table.header) {
    have_ref |= h == "ref";
    have_vb |= h == "vB";
  }
  if (have_ref && have_vb) {
    const auto ref = column_trace(table.column_index("ref"));
    const auto vb = column_trace(table.column_index("vB"));
    double sq = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
      const double e = ref.samples[i] - vb.samples[i];
      sq += e * e;
    }
    out["rmse_tracking"] = std::sqrt(sq / static_cast<double>(ref.samples.size()));
  }

  if (json) {
    std::cout << out.dump(2) << "\n";
  } else {
    for (auto& [name, jc] : cols.items()) {
      std::printf("%s: ", name.c_str());
      if (jc["ff_percent"].is_null())
        std::printf("FF=degenerate ");
      else
        std::printf("FF=%.6g%% ", jc["ff_percent"].get<double>());
      std::printf("RMS=%.6g mean_rect=%.6g DC=%.6g\n", jc["rms"].get<double>(),
                  jc["mean_rectified"].get<double>(), jc["dc"].get<double>());
    }
    if (out.contains("rmse_tracking"))
      std::printf("rmse_tracking=%.6g\n", out["rmse_tracking"].get<double>());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop waveform control simulator on hysteretic plants"};
  app.set_version_flag("--version", std::string(hystloop::kVersion));
  app.require_subcommand(1);

  CommonOpts sim_opts;
  auto* sim = app.add_subcommand("simulate", "run one open- or closed-loop experiment");
  sim->add_option("--config", sim_opts.config_path, "config file")->required();
  sim->add_option("--out", sim_opts.out_dir, "output directory (default .)");
  sim->add_option("--override", sim_opts.overrides, "key=value config override (repeatable)");
  sim->add_flag("--json", sim_opts.json, "print the manifest JSON to stdout");

  CommonOpts tune_opts;
  auto* tune = app.add_subcommand("tune", "derivative-free gain search over the closed loop");
  tune->add_option("--config", tune_opts.config_path, "config file")->required();
  tune->add_option("--out", tune_opts.out_dir, "output directory (default .)");
  tune->add_option("--override", tune_opts.overrides, "key=value config override (repeatable)");
  tune->add_flag("--json", tune_opts.json, "print the tune result JSON to stdout");

  std::string metrics_csv;
  std::string metrics_ff = "sine";
  long metrics_tail = 0;
  bool metrics_json = false;
  auto* metrics = app.add_subcommand("metrics", "offline metrics over an exported traces CSV");
  metrics->add_option("csv", metrics_csv, "traces CSV file")->required();
  metrics->add_option("--ff-theoretical", metrics_ff,
                      "sine|square|triangle|parabolic or a numeric shape factor (default sine)");
  metrics->add_option("--tail-samples", metrics_tail, "use only the last N rows");
  metrics->add_flag("--json", metrics_json, "machine-readable output");

  try {
    app.parse(argc, argv);
    if (*sim) return cmd_simulate(sim_opts);
    if (*tune) return cmd_tune(tune_opts);
    if (*metrics) return cmd_metrics(metrics_csv, metrics_ff, metrics_tail, metrics_json);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
