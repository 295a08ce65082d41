#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hystloop/loop.hpp"

namespace hystloop {

enum class ScaleKind { Linear, Log };

const char* to_string(ScaleKind scale);
ScaleKind scale_kind_from_string(const std::string& name);

/// One search dimension over a controller gain.
struct TuneDim {
  std::string name;  // one of Kp, Ki, k_alpha, k_beta
  double min = 0.0;
  double max = 1.0;
  ScaleKind scale = ScaleKind::Linear;
};

enum class TuneObjective { SqError, FfPercentAbs, Weighted };

const char* to_string(TuneObjective objective);
TuneObjective tune_objective_from_string(const std::string& name);

enum class OptimizerKind { Anneal, Grid };

struct AnnealOpts {
  int iters = 500;
  double t0 = 1.0;
  double cooling = 0.995;  // in (0, 1)
  std::uint64_t seed = 1;
};

struct GridOpts {
  int points_per_dim = 5;
};

struct TuneSpec {
  LoopConfig base_config{};
  std::vector<TuneDim> dims;
  TuneObjective objective = TuneObjective::SqError;
  double w_err = 1.0;  // weighted objective only
  double w_ff = 1.0;
  OptimizerKind optimizer = OptimizerKind::Grid;
  AnnealOpts anneal{};
  GridOpts grid{};
  long budget = 1000;  // max objective evaluations
};

void validate(const TuneSpec& spec);

struct TuneEval {
  std::vector<double> point;  // raw (unscaled) coordinates, dims order
  double score = 0.0;
};

struct TuneResult {
  CtrlParams best_params{};
  double best_score = 0.0;
  long evaluations = 0;
  std::vector<TuneEval> history;
  std::vector<std::string> dim_names;
};

inline constexpr double kDivergencePenalty = 1e9;

/// Score of one closed-loop configuration: mean squared tracking error over
/// the measurement window (sq_error), |FF(v_B)| (ff_percent_abs) or the
/// weighted sum. Divergence and invalid candidates return the penalty score
/// instead of throwing; tuning is total.
double objective(const LoopConfig& cfg, TuneObjective kind, double w_err = 1.0,
                 double w_ff = 1.0);

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct SearchOutcome {
  std::vector<double> best_point;
  double best_score = 0.0;
  long evaluations = 0;
  std::vector<TuneEval> history;
};

/// Simulated annealing over the raw objective. Proposals are Gaussian steps
/// of width 0.1 * range per dimension, scaled by T = t0 * cooling^iter, in
/// log10 coordinates for log-scaled dimensions. Deterministic given the seed;
/// returns the best point ever visited.
SearchOutcome anneal_minimize(const std::vector<TuneDim>& dims, const ObjectiveFn& fn,
                              const AnnealOpts& opts, long budget);

/// Exhaustive Cartesian grid (log-spaced where scale = log). Ties break to
/// the lexicographically smallest parameter vector. Throws ParameterError
/// before any evaluation when the grid exceeds the budget. Evaluations may
/// run on a worker pool capped by HYSTLOOP_THREADS; results are reduced in
/// index order, so the outcome does not depend on the thread count.
SearchOutcome grid_minimize(const std::vector<TuneDim>& dims, const ObjectiveFn& fn,
                            int points_per_dim, long budget);

/// Full tuning entry points over the closed-loop objective.
TuneResult anneal(const TuneSpec& spec);
TuneResult grid_search(const TuneSpec& spec);
TuneResult run_tuning(const TuneSpec& spec);

/// Applies a named-dimension point onto controller params.
CtrlParams apply_point(const CtrlParams& base, const std::vector<TuneDim>& dims,
                       std::span<const double> point);

/// Worker count honoring the HYSTLOOP_THREADS cap.
unsigned tuning_thread_count(std::size_t jobs);

}  // namespace hystloop
