#include "hystloop/signals.hpp"

#include <algorithm>
#include <cmath>

#include "hystloop/errors.hpp"

namespace hystloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_evaluable(const SignalTrace& trace, const char* op) {
  if (trace.samples.empty())
    throw ParameterError(std::string(op) + ": trace must be non-empty");
  if (!(trace.dt > 0.0))
    throw ParameterError(std::string(op) + ": trace dt must be > 0");
}

// frac is the position in the period, in [0, 1); theta the matching angle.
double wave_sample(WaveShape shape, double frac, double theta) {
  switch (shape) {
    case WaveShape::Sine:
      return std::sin(theta);
    case WaveShape::Square:
      // Half-open halves keep +/- sample counts equal; the 0 boundary is
      // positive (sign(0) resolves to +1) and the half-period boundary
      // belongs to the negative half.
      return frac < 0.5 ? 1.0 : -1.0;
    case WaveShape::Triangle:
      if (frac < 0.25) return 4.0 * frac;
      if (frac < 0.75) return 2.0 - 4.0 * frac;
      return 4.0 * frac - 4.0;
  }
  return 0.0;
}

}  // namespace

const char* to_string(WaveShape shape) {
  switch (shape) {
    case WaveShape::Sine: return "sine";
    case WaveShape::Square: return "square";
    case WaveShape::Triangle: return "triangle";
  }
  return "?";
}

WaveShape wave_shape_from_string(const std::string& name) {
  if (name == "sine") return WaveShape::Sine;
  if (name == "square") return WaveShape::Square;
  if (name == "triangle") return WaveShape::Triangle;
  throw ParameterError("reference.shape must be one of sine, square, triangle (got '" + name + "')");
}

void validate(const ReferenceSpec& spec) {
  if (!std::isfinite(spec.frequency_hz) || !(spec.frequency_hz > 0.0))
    throw ParameterError("reference.frequency_hz must be > 0");
  if (!std::isfinite(spec.amplitude) || !(spec.amplitude > 0.0))
    throw ParameterError("reference.amplitude must be > 0");
  if (!std::isfinite(spec.phase_rad))
    throw ParameterError("reference.phase_rad must be finite");
  if (spec.periods < 1)
    throw ParameterError("reference.periods must be >= 1");
  if (spec.samples_per_period < 16)
    throw ParameterError("reference.samples_per_period must be >= 16");
}

SignalTrace generate_reference(const ReferenceSpec& spec) {
  validate(spec);
  const auto spp = static_cast<std::size_t>(spec.samples_per_period);
  SignalTrace out;
  out.dt = 1.0 / (spec.frequency_hz * static_cast<double>(spp));
  out.label = "ref";
  out.samples.resize(static_cast<std::size_t>(spec.periods) * spp);
  const double phase_frac = spec.phase_rad / kTwoPi;
  for (std::size_t k = 0; k < out.samples.size(); ++k) {
    // Position computed from the sample index within the period so values
    // repeat exactly and never drift over long runs.
    const double cycle_pos = static_cast<double>(k % spp) / static_cast<double>(spp);
    double frac = cycle_pos + phase_frac;
    frac -= std::floor(frac);
    const double theta = kTwoPi * cycle_pos + spec.phase_rad;
    out.samples[k] = spec.amplitude * wave_sample(spec.shape, frac, theta);
  }
  return out;
}

double rms(const SignalTrace& trace) {
  require_evaluable(trace, "rms");
  double acc = 0.0;
  for (double x : trace.samples) acc += x * x;
  return std::sqrt(acc / static_cast<double>(trace.samples.size()));
}

double mean_rectified(const SignalTrace& trace) {
  require_evaluable(trace, "mean_rectified");
  double acc = 0.0;
  for (double x : trace.samples) acc += std::abs(x);
  return acc / static_cast<double>(trace.samples.size());
}

double dc_component(const SignalTrace& trace) {
  require_evaluable(trace, "dc_component");
  double acc = 0.0;
  for (double x : trace.samples) acc += x;
  return acc / static_cast<double>(trace.samples.size());
}

double form_factor_percent(const SignalTrace& trace, double ff_theoretical) {
  require_evaluable(trace, "form_factor_percent");
  if (!std::isfinite(ff_theoretical) || !(ff_theoretical > 0.0))
    throw ParameterError("ff_theoretical must be > 0");
  const double mr = mean_rectified(trace);
  double max_abs = 0.0;
  for (double x : trace.samples) max_abs = std::max(max_abs, std::abs(x));
  if (mr <= 1e-15 * max_abs || mr == 0.0)
    throw ParameterError("form_factor_percent: degenerate (all-zero or near-zero) signal");
  return 100.0 * (rms(trace) / mr - ff_theoretical) / ff_theoretical;
}

SignalTrace integrate_trace(const SignalTrace& trace, double scale, bool remove_mean) {
  require_evaluable(trace, "integrate_trace");
  SignalTrace out;
  out.dt = trace.dt;
  out.label = trace.label;
  out.samples.resize(trace.samples.size());
  out.samples[0] = 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    acc += 0.5 * (trace.samples[i - 1] + trace.samples[i]) * trace.dt;
    out.samples[i] = scale * acc;
  }
  if (remove_mean) {
    const double mean = dc_component(out);
    for (double& x : out.samples) x -= mean;
  }
  return out;
}

double ff_theoretical_for(WaveShape shape) {
  switch (shape) {
    case WaveShape::Sine: return kFfSine;
    case WaveShape::Square: return kFfSquare;
    case WaveShape::Triangle: return kFfTriangle;
  }
  return kFfSine;
}

double ff_theoretical_integral(WaveShape shape) {
  switch (shape) {
    case WaveShape::Sine: return kFfSine;
    case WaveShape::Square: return kFfTriangle;
    case WaveShape::Triangle: return kFfParabolic;
  }
  return kFfSine;
}

}  // namespace hystloop
