#include "hystloop/plant.hpp"

#include <cmath>

#include "hystloop/errors.hpp"

namespace hystloop {

namespace {

// JA is stiff near the knee; sub-stepping in H (not t) controls the actual
// error variable. The contract ceiling is a/20; a/200 keeps partition
// consistency within 1e-6*Ms (see the path-consistency test).
constexpr double kSubstepDivisor = 200.0;

}  // namespace

void validate(const JaParams& p) {
  if (!std::isfinite(p.Ms) || !(p.Ms > 0.0))
    throw ParameterError("plant.ja.Ms_A_per_m must be > 0");
  if (!std::isfinite(p.a) || !(p.a > 0.0))
    throw ParameterError("plant.ja.a_A_per_m must be > 0");
  if (!std::isfinite(p.k_pin) || p.k_pin < 0.0)
    throw ParameterError("plant.ja.k_pin_A_per_m must be >= 0");
  if (!std::isfinite(p.c_rev) || p.c_rev < 0.0 || p.c_rev >= 1.0)
    throw ParameterError("plant.ja.c_rev must be in [0, 1)");
  if (!std::isfinite(p.alpha) || p.alpha < 0.0)
    throw ParameterError("plant.ja.alpha must be >= 0");
  if (!(p.alpha < p.a / p.Ms))
    throw ParameterError("plant.ja.alpha must be < a/Ms (anhysteretic slope stability)");
  if (!std::isfinite(p.field_gain) || !(p.field_gain > 0.0))
    throw ParameterError("plant.ja.field_gain must be > 0");
  if (p.dynamic) {
    if (!std::isfinite(p.dynamic->k_eddy) || p.dynamic->k_eddy < 0.0)
      throw ParameterError("plant.ja.k_eddy must be >= 0");
    if (!std::isfinite(p.dynamic->k_excess) || p.dynamic->k_excess < 0.0)
      throw ParameterError("plant.ja.k_excess must be >= 0");
  }
}

double anhysteretic(double he, const JaParams& p) {
  const double x = he / p.a;
  if (std::abs(x) < 1e-4) {
    // Langevin series; the closed form cancels catastrophically near 0.
    return p.Ms * (x / 3.0 - x * x * x / 45.0);
  }
  return p.Ms * (1.0 / std::tanh(x) - 1.0 / x);
}

JaState ja_step(JaState st, double h_next, double dt, const JaParams& p) {
  if (!std::isfinite(h_next)) throw NumericError("ja_step: non-finite target field", 0);
  if (!(dt > 0.0)) throw ParameterError("ja_step: dt must be > 0");

  const double dh_total = h_next - st.h;
  if (dh_total == 0.0) return st;

  const double delta = dh_total > 0.0 ? 1.0 : -1.0;
  const double cap = p.a / kSubstepDivisor;
  const int n = static_cast<int>(std::ceil(std::abs(dh_total) / cap));
  const double h_sub = dh_total / n;
  const double inv_one_minus_c = 1.0 / (1.0 - p.c_rev);

  for (int i = 0; i < n; ++i) {
    const double he = st.h + p.alpha * st.m;
    const double man = anhysteretic(he, p);
    const double m_irr = (st.m - p.c_rev * man) * inv_one_minus_c;

    double dm_irr = 0.0;
    if ((man - st.m) * delta >= 0.0) {
      const double den = delta * p.k_pin - p.alpha * (man - m_irr);
      // The susceptibility denominator must stay positive along the sweep;
      // a crossing marks the non-physical regime and the increment is dropped.
      if (den * delta > 0.0) dm_irr = h_sub * (man - m_irr) / den;
    }

    const double m_irr_next = m_irr + dm_irr;
    st.h += h_sub;
    const double man_next = anhysteretic(st.h + p.alpha * st.m, p);
    st.m = m_irr_next + p.c_rev * (man_next - m_irr_next);
    if (st.m > p.Ms) {
      st.m = p.Ms;
      ++st.clamp_events;
    } else if (st.m < -p.Ms) {
      st.m = -p.Ms;
      ++st.clamp_events;
    }
  }

  st.h = h_next;  // land exactly, no accumulated rounding
  st.b = kMu0 * (st.h + st.m);
  st.prev_dh_sign = delta;
  return st;
}

double ja_dynamic_field(double db_dt, const JaParams& p) {
  if (!p.dynamic)
    throw ConfigError("ja_dynamic_field requires dynamic coefficients (plant.ja.k_eddy/k_excess)");
  const double sgn = db_dt > 0.0 ? 1.0 : (db_dt < 0.0 ? -1.0 : 0.0);
  return p.dynamic->k_eddy * db_dt + p.dynamic->k_excess * sgn * std::sqrt(std::abs(db_dt));
}

const char* to_string(PlantType type) {
  switch (type) {
    case PlantType::JaStatic: return "ja_static";
    case PlantType::JaDynamic: return "ja_dynamic";
    case PlantType::Linear: return "linear";
    case PlantType::Saturating: return "saturating";
  }
  return "?";
}

PlantType plant_type_from_string(const std::string& name) {
  if (name == "ja_static") return PlantType::JaStatic;
  if (name == "ja_dynamic") return PlantType::JaDynamic;
  if (name == "linear") return PlantType::Linear;
  if (name == "saturating") return PlantType::Saturating;
  throw ParameterError("plant.kind must be one of ja_static, ja_dynamic, linear, saturating (got '" +
                       name + "')");
}

bool is_ja(const PlantKind& kind) {
  return kind.type == PlantType::JaStatic || kind.type == PlantType::JaDynamic;
}

void validate(const PlantKind& kind) {
  switch (kind.type) {
    case PlantType::JaStatic:
      validate(kind.ja);
      break;
    case PlantType::JaDynamic:
      validate(kind.ja);
      if (!kind.ja.dynamic)
        throw ConfigError("plant.kind = ja_dynamic requires plant.ja.k_eddy / plant.ja.k_excess");
      break;
    case PlantType::Linear:
      if (!std::isfinite(kind.linear.gain) || !(kind.linear.gain > 0.0))
        throw ParameterError("plant.linear.gain must be > 0");
      if (!std::isfinite(kind.linear.time_constant) || !(kind.linear.time_constant > 0.0))
        throw ParameterError("plant.linear.time_constant_s must be > 0");
      break;
    case PlantType::Saturating:
      if (!std::isfinite(kind.saturating.gain) || !(kind.saturating.gain > 0.0))
        throw ParameterError("plant.saturating.gain must be > 0");
      if (!std::isfinite(kind.saturating.sat_level) || !(kind.saturating.sat_level > 0.0))
        throw ParameterError("plant.saturating.sat_level must be > 0");
      break;
  }
}

PlantState initial_plant_state(const PlantKind&) { return PlantState{}; }

namespace {

// Solves the loss-separation fixed point H_eff + H_dyn((B(H_eff)-B_prev)/dt)
// = H_app for the effective static field of one sample. B(H) along the sweep
// from the current state is monotone, so g(H) = delta*(H + H_dyn(rate) -
// H_app) increases strictly; the sweep stops at the first sub-step where g
// turns non-negative and the root is refined on that bracketing segment with
// B interpolated linearly. An explicit lagged-rate scheme is unstable at
// realistic k_eddy, and re-integrating the full step per bisection trial is
// prohibitively slow across square-edge jumps.
PlantOutput ja_dynamic_eval(const PlantKind& kind, double u, const PlantState& state, double dt) {
  const JaParams& p = kind.ja;
  const double h_app = p.field_gain * u;
  const double b_prev = state.ja.b;

  PlantState next = state;
  if (h_app == state.ja.h) return {state.ja.b, next};

  const double delta = h_app > state.ja.h ? 1.0 : -1.0;
  auto g_of = [&](double h, double b) {
    return delta * (h + ja_dynamic_field((b - b_prev) / dt, p) - h_app);
  };

  double h_eff = h_app;
  JaState sweep = state.ja;
  double h_lo = state.ja.h, b_lo = b_prev;
  const double cap = p.a / kSubstepDivisor;  // one internal sub-step per probe
  while (delta * (h_app - sweep.h) > 0.0) {
    const double h_next =
        delta * (h_app - sweep.h) > cap ? sweep.h + delta * cap : h_app;
    sweep = ja_step(sweep, h_next, dt, p);
    // strict: g == 0 at the walk's end means the undamped target is the root
    if (g_of(sweep.h, sweep.b) > 0.0) {
      // root bracketed in [h_lo, sweep.h]
      double lo = h_lo, hi = sweep.h;
      const double slope = (sweep.b - b_lo) / (sweep.h - h_lo);
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double b_mid = b_lo + slope * (mid - h_lo);
        if (g_of(mid, b_mid) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      h_eff = 0.5 * (lo + hi);
      break;
    }
    h_lo = sweep.h;
    b_lo = sweep.b;
  }

  next.ja = ja_step(state.ja, h_eff, dt, p);
  return {next.ja.b, next};
}

}  // namespace

PlantOutput plant_eval(const PlantKind& kind, double u, const PlantState& state, double dt) {
  if (!std::isfinite(u)) throw NumericError("plant_eval: non-finite input", 0);
  if (!(dt > 0.0)) throw ParameterError("plant_eval: dt must be > 0");

  switch (kind.type) {
    case PlantType::Linear: {
      PlantState next = state;
      const double target = kind.linear.gain * u;
      next.lag = target + (state.lag - target) * std::exp(-dt / kind.linear.time_constant);
      return {next.lag, next};
    }
    case PlantType::Saturating: {
      const double s = kind.saturating.sat_level;
      return {s * std::tanh(kind.saturating.gain * u / s), state};
    }
    case PlantType::JaStatic: {
      PlantState next = state;
      next.ja = ja_step(state.ja, kind.ja.field_gain * u, dt, kind.ja);
      return {next.ja.b, next};
    }
    case PlantType::JaDynamic: {
      if (!kind.ja.dynamic)
        throw ConfigError("plant.kind = ja_dynamic requires plant.ja.k_eddy / plant.ja.k_excess");
      return ja_dynamic_eval(kind, u, state, dt);
    }
  }
  throw ParameterError("plant_eval: unknown plant kind");
}

}  // namespace hystloop
