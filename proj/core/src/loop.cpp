#include "hystloop/loop.hpp"

#include <cmath>

#include "hystloop/errors.hpp"

namespace hystloop {

const char* to_string(SymTarget target) {
  return target == SymTarget::Drive ? "u" : "output";
}

SymTarget sym_target_from_string(const std::string& name) {
  if (name == "u") return SymTarget::Drive;
  if (name == "output") return SymTarget::Output;
  throw ParameterError("loop.symmetrization.target must be 'u' or 'output' (got '" + name + "')");
}

void validate(const LoopConfig& cfg) {
  validate(cfg.reference);
  validate(cfg.plant);
  if (cfg.controller) validate(*cfg.controller);
  if (cfg.init_cycles < 0)
    throw ParameterError("loop.init_cycles must be >= 0");
  if (cfg.measure_periods < 1)
    throw ParameterError("loop.measure_periods must be >= 1");
  if (cfg.measure_periods > cfg.reference.periods - cfg.init_cycles)
    throw ParameterError("loop.measure_periods must be <= reference.periods - loop.init_cycles");
  if (cfg.symmetrization) {
    const double l = cfg.symmetrization->lambda;
    if (!std::isfinite(l) || !(l > 0.0) || l > 1.0)
      throw ParameterError("loop.symmetrization.lambda must be in (0, 1]");
  }
  if (!std::isfinite(cfg.disturbance.constant) || !std::isfinite(cfg.disturbance.step))
    throw ParameterError("loop.disturbance values must be finite");
  if (cfg.disturbance.step_after_period < 0)
    throw ParameterError("loop.disturbance.step_after_period must be >= 0");
}

double symmetrize(const SignalTrace& u_history, int period_samples, double lambda) {
  if (period_samples < 1)
    throw ParameterError("symmetrize: period_samples must be >= 1");
  if (!std::isfinite(lambda) || !(lambda > 0.0) || lambda > 1.0)
    throw ParameterError("symmetrize: lambda must be in (0, 1]");
  if (u_history.samples.size() < static_cast<std::size_t>(period_samples))
    throw StateError("symmetrize: need at least one full period of drive history");
  double mean = 0.0;
  const std::size_t n = u_history.samples.size();
  for (std::size_t i = n - static_cast<std::size_t>(period_samples); i < n; ++i)
    mean += u_history.samples[i];
  mean /= static_cast<double>(period_samples);
  return -lambda * mean;
}

std::vector<double> per_period_dc(const SignalTrace& trace, int period_samples) {
  if (period_samples < 1)
    throw ParameterError("per_period_dc: period_samples must be >= 1");
  const std::size_t spp = static_cast<std::size_t>(period_samples);
  std::vector<double> out;
  for (std::size_t start = 0; start + spp <= trace.samples.size(); start += spp) {
    double mean = 0.0;
    for (std::size_t i = start; i < start + spp; ++i) mean += trace.samples[i];
    out.push_back(mean / static_cast<double>(spp));
  }
  return out;
}

namespace {

SignalTrace make_trace(std::vector<double> samples, double dt, std::string label) {
  SignalTrace t;
  t.samples = std::move(samples);
  t.dt = dt;
  t.label = std::move(label);
  return t;
}

SignalTrace tail_window(const SignalTrace& t, std::size_t n) {
  SignalTrace w;
  w.dt = t.dt;
  w.label = t.label;
  w.samples.assign(t.samples.end() - static_cast<std::ptrdiff_t>(n), t.samples.end());
  return w;
}

// Enclosed (H, B) area per traversal, trapezoidal shoelace. Positive for a
// dissipative loop traversed with B lagging H.
double loop_area(const std::vector<double>& h, const std::vector<double>& b) {
  double area = 0.0;
  for (std::size_t i = 1; i < h.size(); ++i)
    area += 0.5 * (h[i - 1] + h[i]) * (b[i] - b[i - 1]);
  return area;
}

std::shared_ptr<RunResult> partial_result(const LoopConfig& cfg, double dt, bool open,
                                          const SignalTrace& ref, std::vector<double> u,
                                          std::vector<double> vb) {
  auto partial = std::make_shared<RunResult>();
  partial->manifest = cfg;
  partial->open_loop = open;
  partial->ref = ref;
  partial->u = make_trace(std::move(u), dt, "u");
  partial->v_b = make_trace(std::move(vb), dt, "vB");
  return partial;
}

RunResult run_loop(const LoopConfig& cfg, bool force_open) {
  validate(cfg);
  const bool closed = !force_open && cfg.controller.has_value();

  const SignalTrace ref = generate_reference(cfg.reference);
  const std::size_t n = ref.samples.size();
  const std::size_t spp = static_cast<std::size_t>(cfg.reference.samples_per_period);
  const double dt = ref.dt;
  const double guard = 1e12 * cfg.reference.amplitude;
  const bool ja = is_ja(cfg.plant);

  CtrlState ctrl_state = closed ? initial_ctrl_state(*cfg.controller) : CtrlState{};
  PlantState plant_state = initial_plant_state(cfg.plant);

  std::vector<double> u_out(n, 0.0);
  std::vector<double> vb_out(n, 0.0);
  std::vector<double> h_out;
  if (ja) h_out.assign(n, 0.0);
  std::vector<double> input_hist(n, 0.0);

  double v_meas_prev = 0.0;  // plant starts at rest
  double sym_offset = 0.0;
  bool handed_off = false;

  for (std::size_t k = 0; k < n; ++k) {
    const int period = static_cast<int>(k / spp);
    const bool in_init = closed && period < cfg.init_cycles;
    const bool engaged = closed && !in_init;

    double u;
    if (engaged) {
      if (!handed_off && cfg.init_cycles > 0) {
        // Bumpless handoff: the recursion accumulator continues from the
        // last open-loop drive level net of the shadow-accumulated integral.
        ctrl_state.u_internal = u_out[k - 1] - ctrl_state.integral_acc;
        handed_off = true;
      }
      const CtrlOutput out = ctrl_step(ctrl_state, ref.samples[k], v_meas_prev, dt, *cfg.controller);
      ctrl_state = out.state;
      u = out.u + sym_offset;
    } else {
      if (in_init) {
        // Shadow update: the controller tracks inputs and step count during
        // initialization cycles but its output does not drive the plant.
        const CtrlOutput shadow =
            ctrl_step(ctrl_state, ref.samples[k], v_meas_prev, dt, *cfg.controller);
        ctrl_state = shadow.state;
      }
      u = ref.samples[k];
    }

    const double disturbance =
        cfg.disturbance.constant +
        (period >= cfg.disturbance.step_after_period ? cfg.disturbance.step : 0.0);
    const double plant_input = u + disturbance;

    const PlantOutput pe = plant_eval(cfg.plant, plant_input, plant_state, dt);
    plant_state = pe.state;
    const double v_b = pe.v_b;

    if (!std::isfinite(u) || !std::isfinite(v_b) || std::abs(u) > guard || std::abs(v_b) > guard) {
      u_out.resize(k);
      vb_out.resize(k);
      throw DivergenceError(
          k, partial_result(cfg, dt, !closed, ref, std::move(u_out), std::move(vb_out)));
    }

    u_out[k] = u;
    vb_out[k] = v_b;
    input_hist[k] = plant_input;
    if (ja) h_out[k] = cfg.plant.ja.field_gain * plant_input;
    v_meas_prev = v_b;

    // End of a closed-loop period: fold a new symmetrization correction
    // into the drive of the next period.
    if (cfg.symmetrization && closed && (k + 1) % spp == 0 && period >= cfg.init_cycles) {
      SignalTrace hist;
      hist.dt = dt;
      const std::vector<double>& src =
          cfg.symmetrization->target == SymTarget::Drive ? input_hist : vb_out;
      hist.samples.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(k + 1));
      sym_offset += symmetrize(hist, static_cast<int>(spp), cfg.symmetrization->lambda);
    }
  }

  RunResult result;
  result.manifest = cfg;
  result.open_loop = !closed;
  if (cfg.controller) result.warnings = validate(*cfg.controller);
  result.ref = ref;
  result.u = make_trace(std::move(u_out), dt, "u");
  result.v_b = make_trace(std::move(vb_out), dt, "vB");
  result.b = integrate_trace(result.v_b, 1.0, true);
  result.b.label = "B";
  if (ja) result.h = make_trace(std::move(h_out), dt, "H");

  const std::size_t window = static_cast<std::size_t>(cfg.measure_periods) * spp;
  const SignalTrace ref_w = tail_window(result.ref, window);
  const SignalTrace u_w = tail_window(result.u, window);
  const SignalTrace vb_w = tail_window(result.v_b, window);
  const SignalTrace b_w = tail_window(result.b, window);

  RunMetrics& m = result.metrics;
  m.ff_theoretical_vb = ff_theoretical_for(cfg.reference.shape);
  m.ff_theoretical_b = ff_theoretical_integral(cfg.reference.shape);
  m.ff_vb_percent = form_factor_percent(vb_w, m.ff_theoretical_vb);
  m.ff_b_percent = form_factor_percent(b_w, m.ff_theoretical_b);
  double sq = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    const double e = ref_w.samples[i] - vb_w.samples[i];
    sq += e * e;
  }
  m.rmse_tracking = std::sqrt(sq / static_cast<double>(window));
  m.dc_u = dc_component(u_w);
  m.dc_vb = dc_component(vb_w);
  if (ja) {
    const SignalTrace h_w = tail_window(result.h, window);
    m.loop_area = loop_area(h_w.samples, vb_w.samples) / cfg.measure_periods;
  }
  return result;
}

}  // namespace

RunResult run_closed_loop(const LoopConfig& cfg) { return run_loop(cfg, false); }

RunResult run_open_loop(const LoopConfig& cfg) { return run_loop(cfg, true); }

}  // namespace hystloop
