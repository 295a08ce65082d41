#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hystloop {

/// Gains of the model-free discrete controller. Kp/Ki are the proportional
/// and integrative tuning gains; k_alpha/k_beta shape the decaying
/// exponential start-up term k_alpha * exp(-k_beta * k).
struct CtrlParams {
  double Kp = 1.0;
  double Ki = 0.0;
  double k_alpha = 0.0;
  double k_beta = 0.0;
  std::optional<double> u_limit;  // symmetric output saturation, if set
  bool anti_windup = false;       // freeze the integral while saturated
  double u_internal0 = 0.0;       // initial value of the internal recursion
};

/// Returns human-readable warnings (soft issues); throws ParameterError on
/// hard violations (Kp <= 0, Ki < 0, k_beta < 0, non-positive u_limit).
std::vector<std::string> validate(const CtrlParams& params);

struct CtrlState {
  long k = 0;                 // step index, never reset within a run
  double integral_acc = 0.0;  // accumulated Ki * sum(eps * dt)
  double u_internal = 0.0;    // internal recursion accumulator
  double last_u = 0.0;
};

CtrlState initial_ctrl_state(const CtrlParams& params);

struct CtrlOutput {
  double u;
  CtrlState state;
};

/// One controller step:
///   eps        = v_ref - v_meas
///   integral  += Ki * eps * dt                       (left Riemann sum)
///   u_internal += Kp * (k_alpha * exp(-k_beta*k) - v_meas)
///   u          = integral + u_internal, clamped to +-u_limit if configured
/// The caller supplies v_meas with the one-sample measurement delay.
CtrlOutput ctrl_step(const CtrlState& state, double v_ref, double v_meas, double dt,
                     const CtrlParams& params);

/// Classical discrete PID with filtered derivative; comparison baseline only.
struct PidParams {
  double Kp = 1.0;
  double Ki = 0.0;
  double Kd = 0.0;
  double n_filter = 100.0;  // derivative filter coefficient
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  double d_state = 0.0;
  long k = 0;
};

struct PidOutput {
  double u;
  PidState state;
};

PidOutput pid_step(const PidState& state, double v_ref, double v_meas, double dt,
                   const PidParams& params);

}  // namespace hystloop
