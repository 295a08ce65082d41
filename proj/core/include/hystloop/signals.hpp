#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace hystloop {

/// Uniformly sampled real-valued time series. Units depend on context
/// (V, T, A/m, ...); dt is seconds per sample.
struct SignalTrace {
  std::vector<double> samples;
  double dt = 1.0;
  std::string label;

  std::size_t size() const noexcept { return samples.size(); }
};

enum class WaveShape { Sine, Square, Triangle };

const char* to_string(WaveShape shape);
WaveShape wave_shape_from_string(const std::string& name);

struct ReferenceSpec {
  WaveShape shape = WaveShape::Sine;
  double frequency_hz = 1.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;
  int periods = 1;
  int samples_per_period = 1000;
};

/// Throws ParameterError naming the bad field.
void validate(const ReferenceSpec& spec);

/// periods * samples_per_period samples, dt = 1/(frequency * samples_per_period).
SignalTrace generate_reference(const ReferenceSpec& spec);

double rms(const SignalTrace& trace);
double mean_rectified(const SignalTrace& trace);
double dc_component(const SignalTrace& trace);

/// 100 * ((rms/mean_rectified - ff_theoretical) / ff_theoretical).
/// The trace must cover an integer number of periods; that is the caller's
/// responsibility (the loop engine only passes whole-period windows).
double form_factor_percent(const SignalTrace& trace, double ff_theoretical);

/// Cumulative trapezoidal integral times `scale`; optionally recentered to
/// zero mean (standard drift removal when reconstructing B from v_B).
SignalTrace integrate_trace(const SignalTrace& trace, double scale = 1.0,
                            bool remove_mean = false);

/// Theoretical form factors (RMS over mean-rectified) of the ideal shapes.
inline constexpr double kFfSine = std::numbers::pi / (2.0 * std::numbers::sqrt2);
inline constexpr double kFfSquare = 1.0;
inline constexpr double kFfTriangle = 2.0 / std::numbers::sqrt3;
/// Shape of the time integral of a triangle wave (piecewise parabolic).
inline const double kFfParabolic = std::sqrt(6.0 / 5.0);

/// Theoretical factor of the shape itself.
double ff_theoretical_for(WaveShape shape);
/// Theoretical factor of the shape's time integral (sine stays sine,
/// square integrates to triangle, triangle to the parabolic wave).
double ff_theoretical_integral(WaveShape shape);

}  // namespace hystloop
