#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "hystloop/controller.hpp"
#include "hystloop/plant.hpp"
#include "hystloop/signals.hpp"

namespace hystloop {

enum class SymTarget { Drive, Output };

const char* to_string(SymTarget target);
SymTarget sym_target_from_string(const std::string& name);

/// Periodic DC-offset correction of the drive. With target=Drive the
/// correction is computed from the actual plant-input signal (the analog of
/// the measured excitation on a bench); with target=Output from v_B.
struct SymmetrizationSpec {
  double lambda = 0.5;  // relaxation factor in (0, 1]
  SymTarget target = SymTarget::Drive;
};

/// Constant and/or delayed-step offset added at the plant input. Models an
/// external bias the controller does not see directly.
struct DisturbanceSpec {
  double constant = 0.0;
  double step = 0.0;
  int step_after_period = 0;
};

struct LoopConfig {
  std::string name = "run";
  ReferenceSpec reference{};
  PlantKind plant{};
  std::optional<CtrlParams> controller;  // nullopt = open loop
  int init_cycles = 0;                   // open-loop periods before engaging feedback
  std::optional<SymmetrizationSpec> symmetrization;
  DisturbanceSpec disturbance{};
  int measure_periods = 1;  // metric window, taken from the end of the run
  std::uint64_t seed = 0;   // echoed for reproducibility
};

void validate(const LoopConfig& cfg);

struct RunMetrics {
  double ff_vb_percent = 0.0;
  double ff_b_percent = 0.0;
  double rmse_tracking = 0.0;
  double dc_u = 0.0;
  double dc_vb = 0.0;
  double loop_area = 0.0;  // mean per-period loop area of (H, B), JA plants only
  double ff_theoretical_vb = 0.0;
  double ff_theoretical_b = 0.0;
};

struct RunResult {
  SignalTrace ref, u, v_b, b;
  SignalTrace h;  // applied field trace, JA plants only (empty otherwise)
  RunMetrics metrics{};
  LoopConfig manifest{};  // resolved config echo
  bool open_loop = false;
  std::vector<std::string> warnings;  // controller validation notes
};

/// Numeric blow-up inside a run; carries the step index and the traces
/// accumulated up to it.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, std::shared_ptr<RunResult> partial)
      : std::runtime_error("loop diverged at step " + std::to_string(step)),
        step_(step),
        partial_(std::move(partial)) {}
  std::size_t step() const noexcept { return step_; }
  const RunResult* partial() const noexcept { return partial_.get(); }

 private:
  std::size_t step_;
  std::shared_ptr<RunResult> partial_;
};

/// Closed-loop run with one-sample measurement delay, initialization cycles
/// and optional symmetrization. A config without controller runs open loop.
RunResult run_closed_loop(const LoopConfig& cfg);

/// Plant driven directly by the reference; same metrics.
RunResult run_open_loop(const LoopConfig& cfg);

/// Additive offset -lambda * mean(last period of u_history). The engine adds
/// successive corrections to every drive sample of the following period.
double symmetrize(const SignalTrace& u_history, int period_samples, double lambda);

/// Mean per-period DC values, one entry per whole period of the trace.
std::vector<double> per_period_dc(const SignalTrace& trace, int period_samples);

/// Exports <name>_traces.csv, <name>_loop.csv (JA plants) and
/// <name>_manifest.json into out_dir; files are written atomically.
void write_run_artifacts(const RunResult& result, const std::filesystem::path& out_dir);

/// Manifest JSON (resolved config echo, tool version, metrics); fixed key order.
std::string manifest_json(const RunResult& result);

}  // namespace hystloop
