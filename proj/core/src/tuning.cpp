#include "hystloop/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "hystloop/errors.hpp"

namespace hystloop {

const char* to_string(ScaleKind scale) {
  return scale == ScaleKind::Linear ? "linear" : "log";
}

ScaleKind scale_kind_from_string(const std::string& name) {
  if (name == "linear") return ScaleKind::Linear;
  if (name == "log") return ScaleKind::Log;
  throw ParameterError("scale must be 'linear' or 'log' (got '" + name + "')");
}

const char* to_string(TuneObjective objective) {
  switch (objective) {
    case TuneObjective::SqError: return "sq_error";
    case TuneObjective::FfPercentAbs: return "ff_percent_abs";
    case TuneObjective::Weighted: return "weighted";
  }
  return "?";
}

TuneObjective tune_objective_from_string(const std::string& name) {
  if (name == "sq_error") return TuneObjective::SqError;
  if (name == "ff_percent_abs") return TuneObjective::FfPercentAbs;
  if (name == "weighted") return TuneObjective::Weighted;
  throw ParameterError("tune.objective must be sq_error, ff_percent_abs or weighted (got '" +
                       name + "')");
}

namespace {

void validate_dims(const std::vector<TuneDim>& dims) {
  if (dims.empty()) throw ParameterError("tune.space: at least one search dimension required");
  for (const auto& d : dims) {
    if (d.name != "Kp" && d.name != "Ki" && d.name != "k_alpha" && d.name != "k_beta")
      throw ParameterError("tune.space: unknown parameter '" + d.name + "'");
    if (!std::isfinite(d.min) || !std::isfinite(d.max) || !(d.min < d.max))
      throw ParameterError("tune.space." + d.name + ": min must be < max");
    if (d.scale == ScaleKind::Log && !(d.min > 0.0))
      throw ParameterError("tune.space." + d.name + ": log scale requires min > 0");
  }
}

double to_scaled(double x, const TuneDim& d) {
  return d.scale == ScaleKind::Log ? std::log10(x) : x;
}

double from_scaled(double s, const TuneDim& d) {
  return d.scale == ScaleKind::Log ? std::pow(10.0, s) : s;
}

}  // namespace

void validate(const TuneSpec& spec) {
  validate(spec.base_config);
  if (!spec.base_config.controller)
    throw ParameterError("tune: base config must have a controller (controller.enabled = true)");
  validate_dims(spec.dims);
  if (spec.budget < 1) throw ParameterError("tune.budget must be >= 1");
  if (spec.optimizer == OptimizerKind::Anneal) {
    if (spec.anneal.iters < 0) throw ParameterError("tune.anneal.iters must be >= 0");
    if (!(spec.anneal.t0 > 0.0)) throw ParameterError("tune.anneal.T0 must be > 0");
    if (!(spec.anneal.cooling > 0.0) || !(spec.anneal.cooling < 1.0))
      throw ParameterError("tune.anneal.cooling must be in (0, 1)");
  } else {
    if (spec.grid.points_per_dim < 1)
      throw ParameterError("tune.grid.points_per_dim must be >= 1");
  }
}

CtrlParams apply_point(const CtrlParams& base, const std::vector<TuneDim>& dims,
                       std::span<const double> point) {
  CtrlParams p = base;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const std::string& name = dims[i].name;
    if (name == "Kp") p.Kp = point[i];
    else if (name == "Ki") p.Ki = point[i];
    else if (name == "k_alpha") p.k_alpha = point[i];
    else if (name == "k_beta") p.k_beta = point[i];
  }
  return p;
}

double objective(const LoopConfig& cfg, TuneObjective kind, double w_err, double w_ff) {
  try {
    const RunResult res = run_closed_loop(cfg);
    const double mse = res.metrics.rmse_tracking * res.metrics.rmse_tracking;
    const double ff = std::abs(res.metrics.ff_vb_percent);
    double score = 0.0;
    switch (kind) {
      case TuneObjective::SqError: score = mse; break;
      case TuneObjective::FfPercentAbs: score = ff; break;
      case TuneObjective::Weighted: score = w_err * mse + w_ff * ff; break;
    }
    if (!std::isfinite(score)) return kDivergencePenalty;
    return score;
  } catch (const DivergenceError&) {
    return kDivergencePenalty;
  } catch (const ParameterError&) {
    // Invalid candidate (e.g. the search stepped outside a hard constraint):
    // scored failure, not an exception — tuning stays total.
    return kDivergencePenalty;
  }
}

unsigned tuning_thread_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("HYSTLOOP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

SearchOutcome anneal_minimize(const std::vector<TuneDim>& dims, const ObjectiveFn& fn,
                              const AnnealOpts& opts, long budget) {
  validate_dims(dims);
  if (budget < 1) throw ParameterError("tune.budget must be >= 1");
  if (!(opts.t0 > 0.0)) throw ParameterError("tune.anneal.T0 must be > 0");
  if (!(opts.cooling > 0.0) || !(opts.cooling < 1.0))
    throw ParameterError("tune.anneal.cooling must be in (0, 1)");

  const std::size_t d = dims.size();
  std::vector<double> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = to_scaled(dims[i].min, dims[i]);
    hi[i] = to_scaled(dims[i].max, dims[i]);
  }

  auto raw_point = [&](const std::vector<double>& scaled) {
    std::vector<double> raw(d);
    for (std::size_t i = 0; i < d; ++i) raw[i] = from_scaled(scaled[i], dims[i]);
    return raw;
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SearchOutcome out;

  // Deterministic start at the centre of the scaled box.
  std::vector<double> current(d);
  for (std::size_t i = 0; i < d; ++i) current[i] = 0.5 * (lo[i] + hi[i]);
  std::vector<double> current_raw = raw_point(current);
  double current_score = fn(current_raw);
  out.history.push_back({current_raw, current_score});
  out.best_point = current_raw;
  out.best_score = current_score;
  out.evaluations = 1;

  // Acceptance temperature lives in objective units: normalized by the
  // initial score so t0 has the same meaning across problems.
  const double score_scale = std::max(std::abs(current_score), 1e-12);

  double temperature = opts.t0;
  for (int iter = 0; iter < opts.iters && out.evaluations < budget; ++iter) {
    std::vector<double> proposal(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double width = 0.1 * (hi[i] - lo[i]) * temperature;
      proposal[i] = std::clamp(current[i] + width * gauss(rng), lo[i], hi[i]);
    }
    const std::vector<double> proposal_raw = raw_point(proposal);
    const double score = fn(proposal_raw);
    out.history.push_back({proposal_raw, score});
    ++out.evaluations;

    const double delta = score - current_score;
    if (delta <= 0.0 || unif(rng) < std::exp(-delta / (temperature * score_scale))) {
      current = proposal;
      current_score = score;
    }
    if (score < out.best_score) {
      out.best_score = score;
      out.best_point = proposal_raw;
    }
    temperature *= opts.cooling;
  }
  return out;
}

SearchOutcome grid_minimize(const std::vector<TuneDim>& dims, const ObjectiveFn& fn,
                            int points_per_dim, long budget) {
  validate_dims(dims);
  if (points_per_dim < 1) throw ParameterError("tune.grid.points_per_dim must be >= 1");
  if (budget < 1) throw ParameterError("tune.budget must be >= 1");

  const std::size_t d = dims.size();
  double total_d = 1.0;
  for (std::size_t i = 0; i < d; ++i) total_d *= static_cast<double>(points_per_dim);
  if (total_d > static_cast<double>(budget))
    throw ParameterError("tune.grid: grid size exceeds tune.budget; nothing evaluated");
  const long total = static_cast<long>(total_d);

  // Axis values; log-scaled dimensions are spaced evenly in log10.
  std::vector<std::vector<double>> axes(d);
  for (std::size_t i = 0; i < d; ++i) {
    axes[i].resize(static_cast<std::size_t>(points_per_dim));
    const double s_lo = to_scaled(dims[i].min, dims[i]);
    const double s_hi = to_scaled(dims[i].max, dims[i]);
    for (int j = 0; j < points_per_dim; ++j) {
      const double s = points_per_dim == 1
                           ? s_lo
                           : s_lo + (s_hi - s_lo) * static_cast<double>(j) /
                                        static_cast<double>(points_per_dim - 1);
      axes[i][static_cast<std::size_t>(j)] = from_scaled(s, dims[i]);
    }
  }

  // Index decomposition with dim 0 outermost: iteration order is the
  // ascending lexicographic order of the parameter vectors.
  auto point_at = [&](long idx) {
    std::vector<double> p(d);
    long rest = idx;
    for (std::size_t i = d; i-- > 0;) {
      p[i] = axes[i][static_cast<std::size_t>(rest % points_per_dim)];
      rest /= points_per_dim;
    }
    return p;
  };

  std::vector<TuneEval> evals(static_cast<std::size_t>(total));
  const unsigned workers = tuning_thread_count(static_cast<std::size_t>(total));
  if (workers <= 1) {
    for (long idx = 0; idx < total; ++idx) {
      auto p = point_at(idx);
      const double score = fn(p);
      evals[static_cast<std::size_t>(idx)] = {std::move(p), score};
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (long idx = w; idx < total; idx += workers) {
          auto p = point_at(idx);
          const double score = fn(p);
          evals[static_cast<std::size_t>(idx)] = {std::move(p), score};
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // Sequential reduction in index order; strict < keeps the first (and thus
  // lexicographically smallest) point on ties.
  SearchOutcome out;
  out.history = std::move(evals);
  out.evaluations = total;
  out.best_score = out.history.front().score;
  out.best_point = out.history.front().point;
  for (const auto& e : out.history) {
    if (e.score < out.best_score) {
      out.best_score = e.score;
      out.best_point = e.point;
    }
  }
  return out;
}

namespace {

TuneResult finish(const TuneSpec& spec, SearchOutcome&& raw) {
  TuneResult result;
  result.best_params = apply_point(*spec.base_config.controller, spec.dims, raw.best_point);
  result.best_score = raw.best_score;
  result.evaluations = raw.evaluations;
  result.history = std::move(raw.history);
  for (const auto& d : spec.dims) result.dim_names.push_back(d.name);
  return result;
}

ObjectiveFn loop_objective_fn(const TuneSpec& spec) {
  return [&spec](std::span<const double> point) {
    LoopConfig cfg = spec.base_config;
    cfg.controller = apply_point(*spec.base_config.controller, spec.dims, point);
    return objective(cfg, spec.objective, spec.w_err, spec.w_ff);
  };
}

}  // namespace

TuneResult anneal(const TuneSpec& spec) {
  validate(spec);
  return finish(spec, anneal_minimize(spec.dims, loop_objective_fn(spec), spec.anneal, spec.budget));
}

TuneResult grid_search(const TuneSpec& spec) {
  validate(spec);
  return finish(spec,
                grid_minimize(spec.dims, loop_objective_fn(spec), spec.grid.points_per_dim,
                              spec.budget));
}

TuneResult run_tuning(const TuneSpec& spec) {
  return spec.optimizer == OptimizerKind::Anneal ? anneal(spec) : grid_search(spec);
}

}  // namespace hystloop
