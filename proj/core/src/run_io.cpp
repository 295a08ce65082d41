#include <chrono>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "hystloop/config.hpp"
#include "hystloop/csv.hpp"
#include "hystloop/errors.hpp"
#include "hystloop/loop.hpp"
#include "hystloop/version.hpp"

namespace hystloop {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void atomic_write_text(const fs::path& path, const std::string& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << body;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

// Config values echo as strings, metric values as numbers.
ordered_json metrics_json(const RunMetrics& m) {
  ordered_json j;
  j["ff_vb_percent"] = m.ff_vb_percent;
  j["ff_b_percent"] = m.ff_b_percent;
  j["rmse_tracking"] = m.rmse_tracking;
  j["dc_u"] = m.dc_u;
  j["dc_vb"] = m.dc_vb;
  j["loop_area"] = m.loop_area;
  j["ff_theoretical_vb"] = m.ff_theoretical_vb;
  j["ff_theoretical_b"] = m.ff_theoretical_b;
  return j;
}

}  // namespace

std::string manifest_json(const RunResult& result) {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["timestamp"] = utc_timestamp();
  j["name"] = result.manifest.name;
  j["mode"] = result.open_loop ? "open_loop" : "closed_loop";
  ordered_json cfg;
  for (const auto& [key, value] : config_echo(result.manifest)) cfg[key] = value;
  j["config"] = cfg;
  j["warnings"] = result.warnings;
  j["metrics"] = metrics_json(result.metrics);
  return j.dump(2) + "\n";
}

void write_run_artifacts(const RunResult& result, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());

  const std::string& name = result.manifest.name;

  std::vector<double> time(result.ref.samples.size());
  for (std::size_t i = 0; i < time.size(); ++i)
    time[i] = static_cast<double>(i) * result.ref.dt;
  write_csv(out_dir / (name + "_traces.csv"), {"t", "ref", "u", "vB", "B"},
            {&time, &result.ref.samples, &result.u.samples, &result.v_b.samples,
             &result.b.samples});

  if (!result.h.samples.empty()) {
    // Settled loop only: the measurement window from the end of the run.
    const std::size_t window = static_cast<std::size_t>(result.manifest.measure_periods) *
                               static_cast<std::size_t>(result.manifest.reference.samples_per_period);
    std::vector<double> h_w(result.h.samples.end() - static_cast<std::ptrdiff_t>(window),
                            result.h.samples.end());
    std::vector<double> b_w(result.v_b.samples.end() - static_cast<std::ptrdiff_t>(window),
                            result.v_b.samples.end());
    write_csv(out_dir / (name + "_loop.csv"), {"H", "B"}, {&h_w, &b_w});
  }

  atomic_write_text(out_dir / (name + "_manifest.json"), manifest_json(result));
}

}  // namespace hystloop
