#pragma once

#include <numbers>
#include <optional>
#include <string>

namespace hystloop {

inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // vacuum permeability, exact

struct JaDynamicParams {
  double k_eddy = 0.0;    // classical (eddy-current) coefficient
  double k_excess = 0.0;  // excess-loss coefficient
};

/// Jiles-Atherton material constants. Defaults are a canonical NO SiFe-like
/// test fixture, not identified material data.
struct JaParams {
  double Ms = 1.6e6;          // saturation magnetization, A/m
  double a = 1100.0;          // anhysteretic shape parameter, A/m
  double k_pin = 400.0;       // pinning/loss parameter, A/m
  double c_rev = 0.2;         // reversibility coefficient, in [0,1)
  double alpha = 1.6e-4;      // inter-domain coupling
  double field_gain = 1000.0; // A/m of applied field per unit of drive u
  std::optional<JaDynamicParams> dynamic;
};

/// Throws ParameterError naming the bad field. Enforces alpha < a/Ms.
void validate(const JaParams& params);

struct JaState {
  double h = 0.0;             // applied field, A/m
  double m = 0.0;             // magnetization, A/m
  double b = 0.0;             // induction, T; b == mu0 * (h + m) after every step
  double prev_dh_sign = 1.0;  // sign of the last nonzero field increment
  long clamp_events = 0;      // diagnostics; stays 0 in healthy runs
};

/// Langevin anhysteretic magnetization; series expansion below |He/a| = 1e-4.
double anhysteretic(double he, const JaParams& params);

/// Advances the state to the target field. The increment is split internally
/// into sub-steps of at most a/20 and integrated with explicit Euler on
/// dM/dH; the irreversible term is zeroed whenever (M_an - M) opposes the
/// sweep direction.
JaState ja_step(JaState state, double h_next, double dt, const JaParams& params);

/// Rate-dependent field of the loss-separation dynamic model:
/// k_eddy * dB/dt + k_excess * sign(dB/dt) * sqrt(|dB/dt|).
/// Throws ConfigError when the parameter set has no dynamic coefficients.
double ja_dynamic_field(double db_dt, const JaParams& params);

struct LinearPlantParams {
  double gain = 1.0;
  double time_constant = 1.0;  // seconds, > 0
};

struct SaturatingPlantParams {
  double gain = 1.0;
  double sat_level = 1.0;
};

enum class PlantType { JaStatic, JaDynamic, Linear, Saturating };

const char* to_string(PlantType type);
PlantType plant_type_from_string(const std::string& name);

struct PlantKind {
  PlantType type = PlantType::JaStatic;
  JaParams ja{};
  LinearPlantParams linear{};
  SaturatingPlantParams saturating{};
};

void validate(const PlantKind& kind);
bool is_ja(const PlantKind& kind);

struct PlantState {
  JaState ja{};
  double lag = 0.0;  // first-order-lag output (linear plant)
};

PlantState initial_plant_state(const PlantKind& kind);

struct PlantOutput {
  double v_b;
  PlantState state;
};

/// One sample of the plant under drive u. For JA kinds the applied field is
/// field_gain * u and the output is the induction B itself; the dynamic kind
/// solves the loss-separation rate fixed point each sample.
PlantOutput plant_eval(const PlantKind& kind, double u, const PlantState& state, double dt);

}  // namespace hystloop
