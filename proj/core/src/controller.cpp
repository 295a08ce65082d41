#include "hystloop/controller.hpp"

#include <algorithm>
#include <cmath>

#include "hystloop/errors.hpp"

namespace hystloop {

std::vector<std::string> validate(const CtrlParams& p) {
  if (!std::isfinite(p.Kp) || !(p.Kp > 0.0))
    throw ParameterError("controller.Kp must be > 0");
  if (!std::isfinite(p.Ki) || p.Ki < 0.0)
    throw ParameterError("controller.Ki must be >= 0");
  if (!std::isfinite(p.k_alpha))
    throw ParameterError("controller.k_alpha must be finite");
  if (!std::isfinite(p.k_beta) || p.k_beta < 0.0)
    throw ParameterError("controller.k_beta must be >= 0");
  if (p.u_limit && (!std::isfinite(*p.u_limit) || !(*p.u_limit > 0.0)))
    throw ParameterError("controller.u_limit must be > 0");
  if (!std::isfinite(p.u_internal0))
    throw ParameterError("controller.u_internal0 must be finite");

  std::vector<std::string> warnings;
  if (p.Ki == 0.0)
    warnings.push_back("Ki = 0 disables the tracking integral; the reference cannot be followed");
  if (p.k_beta == 0.0 && p.k_alpha != 0.0)
    warnings.push_back("k_beta = 0 with nonzero k_alpha applies a constant bias instead of a "
                       "decaying start-up term");
  return warnings;
}

CtrlState initial_ctrl_state(const CtrlParams& p) {
  CtrlState st;
  st.u_internal = p.u_internal0;
  return st;
}

CtrlOutput ctrl_step(const CtrlState& state, double v_ref, double v_meas, double dt,
                     const CtrlParams& p) {
  if (!(dt > 0.0)) throw ParameterError("ctrl_step: dt must be > 0");
  if (!std::isfinite(v_ref) || !std::isfinite(v_meas))
    throw NumericError("ctrl_step: non-finite input", state.k);

  CtrlState next = state;
  const double error = v_ref - v_meas;
  next.integral_acc = state.integral_acc + p.Ki * error * dt;
  next.u_internal =
      state.u_internal + p.Kp * (p.k_alpha * std::exp(-p.k_beta * static_cast<double>(state.k)) - v_meas);

  double u = next.integral_acc + next.u_internal;
  if (p.u_limit) {
    const double lim = *p.u_limit;
    if (u > lim || u < -lim) {
      u = std::clamp(u, -lim, lim);
      // Anti-windup freezes the integral while the output saturates; the
      // emitted u is the clamped value either way.
      if (p.anti_windup) next.integral_acc = state.integral_acc;
    }
  }

  next.k = state.k + 1;
  next.last_u = u;
  return {u, next};
}

PidOutput pid_step(const PidState& state, double v_ref, double v_meas, double dt,
                   const PidParams& p) {
  if (!(dt > 0.0)) throw ParameterError("pid_step: dt must be > 0");
  if (!std::isfinite(v_ref) || !std::isfinite(v_meas))
    throw NumericError("pid_step: non-finite input", state.k);

  PidState next = state;
  const double error = v_ref - v_meas;
  next.integral = state.integral + p.Ki * error * dt;
  next.d_state =
      (state.d_state + p.Kd * p.n_filter * (error - state.prev_error)) / (1.0 + p.n_filter * dt);
  next.prev_error = error;
  next.k = state.k + 1;
  return {p.Kp * error + next.integral + next.d_state, next};
}

}  // namespace hystloop
