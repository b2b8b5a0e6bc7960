#include "tclsde/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "tclsde/composer.hpp"
#include "tclsde/error.hpp"
#include "tclsde/subordinator.hpp"

namespace tclsde {

namespace {

constexpr double kMaxFailureFraction = 1e-3;

bool is_integer_multiple(double coarse, double fine) {
  const double ratio = coarse / fine;
  const double rounded = std::round(ratio);
  return rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-9 * ratio;
}

std::size_t step_ratio(double coarse, double fine) {
  return static_cast<std::size_t>(std::llround(coarse / fine));
}

std::uint64_t independent_seed(std::uint64_t seed, double delta) {
  return mix64(seed ^ mix64(std::bit_cast<std::uint64_t>(delta)));
}

double alignment_step(const ExperimentPlan& plan, std::span<const double> deltas) {
  double align = plan.delta_reference;
  for (double d : plan.delta_ladder) align = std::max(align, d);
  for (double d : deltas) align = std::max(align, d);
  return align;
}

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

template <typename Getter>
SampleStats sample_stats(std::size_t n, Getter&& get) {
  detail::CompensatedSum sum;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    if (get(i, v)) {
      sum.add(v);
      ++count;
    }
  }
  SampleStats s;
  s.count = count;
  if (count == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum.value() / static_cast<double>(count);
  if (count > 1) {
    detail::CompensatedSum sq;
    for (std::size_t i = 0; i < n; ++i) {
      double v;
      if (get(i, v)) sq.add((v - s.mean) * (v - s.mean));
    }
    const double var = sq.value() / static_cast<double>(count - 1);
    s.std_error = std::sqrt(var / static_cast<double>(count));
  }
  return s;
}

void check_failures(std::size_t failed, std::size_t paths, double delta) {
  if (static_cast<double>(failed) > kMaxFailureFraction * static_cast<double>(paths)) {
    throw Error(ErrorCode::TooManyFailures,
                std::to_string(failed) + " of " + std::to_string(paths) +
                    " paths hit Newton divergence at delta " + std::to_string(delta));
  }
}

}  // namespace

Coupling coupling_from_string(const std::string& s) {
  if (s == "coupled") return Coupling::coupled;
  if (s == "independent") return Coupling::independent;
  throw Error(ErrorCode::InvalidArgument, "unknown coupling '" + s + "'");
}

std::string to_string(Coupling c) { return c == Coupling::coupled ? "coupled" : "independent"; }

ModelId model_id_from_string(const std::string& s) {
  if (s == "ou") return ModelId::ou;
  if (s == "kubo") return ModelId::kubo;
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + s + "'");
}

std::string to_string(ModelId id) { return id == ModelId::ou ? "ou" : "kubo"; }

ModelSpec build_model(const ModelConfig& config) {
  auto measure = TruncatedLevyMeasure::from_kind(config.jump_kind, config.jump_c);
  if (config.id == ModelId::ou) return ou_model(config.ou, std::move(measure));
  return kubo_model(config.kubo, std::move(measure));
}

void NewtonDiagnostics::merge(const NewtonDiagnostics& other) {
  for (const auto& [iters, count] : other.iteration_histogram) iteration_histogram[iters] += count;
  max_residual = std::max(max_residual, other.max_residual);
  steps += other.steps;
}

std::vector<std::string> plan_issues(const ExperimentPlan& plan) {
  std::vector<std::string> issues;
  if (!(plan.theta >= 0.0 && plan.theta <= 1.0)) issues.push_back("theta must lie in [0, 1]");
  if (!(plan.T > 0.0)) issues.push_back("T must be positive");
  if (plan.paths < 1) issues.push_back("paths must be >= 1");
  if (!plan.identity_clock && !(plan.alpha > 0.0 && plan.alpha < 1.0)) {
    issues.push_back("alpha must lie in (0, 1)");
  }
  if (plan.lepage_terms < 1) issues.push_back("lepage_terms must be >= 1");
  if (!(plan.newton_tol > 0.0)) issues.push_back("newton.tol must be positive");
  if (plan.newton_max_iter < 1) issues.push_back("newton.max_iter must be >= 1");
  if (!(plan.delta_reference > 0.0)) issues.push_back("delta_ref must be positive");
  if (plan.delta_ladder.empty()) issues.push_back("deltas must not be empty");

  for (std::size_t i = 0; i < plan.delta_ladder.size(); ++i) {
    const double d = plan.delta_ladder[i];
    if (!(d > 0.0)) {
      issues.push_back("deltas must be positive");
      continue;
    }
    if (i > 0 && !(d < plan.delta_ladder[i - 1])) issues.push_back("deltas must be strictly decreasing");
    if (plan.delta_reference > 0.0) {
      if (!(plan.delta_reference < d)) {
        issues.push_back("delta_ref must be smaller than every ladder delta");
      } else if (!is_integer_multiple(d, plan.delta_reference)) {
        issues.push_back("delta_ref must divide ladder delta " + std::to_string(d));
      }
    }
  }

  int dim_d = plan.model.id == ModelId::ou ? 1 : 2;
  try {
    const ModelSpec model = build_model(plan.model);
    dim_d = model.dim_d;
    double max_delta = plan.delta_reference;
    for (double d : plan.delta_ladder) max_delta = std::max(max_delta, d);
    if (max_delta > 0.0) {
      ThetaParams params{plan.theta, max_delta, plan.newton_tol, plan.newton_max_iter};
      try {
        check_well_posed(model, params);
      } catch (const ValidationError& e) {
        for (const auto& s : e.issues()) {
          if (std::find(issues.begin(), issues.end(), s) == issues.end()) issues.push_back(s);
        }
      }
    }
  } catch (const Error& e) {
    issues.push_back(std::string("model: ") + e.what());
  }

  try {
    test_function_by_name(plan.phi);
    if (plan.phi == "product" && dim_d < 2) issues.push_back("phi = product needs a 2-d model");
  } catch (const Error& e) {
    issues.push_back(e.what());
  }
  return issues;
}

void validate_plan(const ExperimentPlan& plan) {
  auto issues = plan_issues(plan);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

void CoupledPathNoise::fill(double delta, std::size_t step, StepNoise& out) const {
  const std::size_t k = step_ratio(delta, reference_delta);
  const std::size_t first = step * k;
  if (first + k > reference_steps) {
    throw Error(ErrorCode::LengthMismatch, "coupled noise does not cover the requested step");
  }
  out.dW.resize(dim_m);
  out.dW.setZero();
  for (std::size_t i = first; i < first + k; ++i) {
    for (int j = 0; j < dim_m; ++j) out.dW[j] += brownian[i * static_cast<std::size_t>(dim_m) + j];
  }
  out.marks.clear();
  const double lo = static_cast<double>(step) * delta;
  const double hi = static_cast<double>(step + 1) * delta;
  auto it = std::upper_bound(event_times.begin(), event_times.end(), lo);
  for (; it != event_times.end() && *it <= hi; ++it) {
    out.marks.push_back(event_marks[static_cast<std::size_t>(it - event_times.begin())]);
  }
}

CoupledPathNoise sample_coupled_noise(const ModelSpec& model, double reference_delta,
                                      std::size_t reference_steps, RandomStream& brownian,
                                      RandomStream& jumps) {
  CoupledPathNoise noise;
  noise.reference_delta = reference_delta;
  noise.dim_m = model.dim_m;
  noise.reference_steps = reference_steps;
  const double scale = std::sqrt(reference_delta);
  noise.brownian.resize(reference_steps * static_cast<std::size_t>(model.dim_m));
  for (double& w : noise.brownian) w = scale * brownian.normal();
  if (model.measure.has_jumps()) {
    const double horizon = static_cast<double>(reference_steps) * reference_delta;
    const double rate = model.measure.lambda();
    double t = 0.0;
    for (;;) {
      t += jumps.exponential() / rate;
      if (t > horizon) break;
      noise.event_times.push_back(t);
      noise.event_marks.push_back(sample_jump_size(model.measure, jumps));
    }
  }
  return noise;
}

PathOutcome simulate_path_outcome(const ModelSpec& model, const ExperimentPlan& plan,
                                  const TestFunction& phi, std::span<const double> deltas,
                                  std::uint64_t path_index) {
  const std::size_t count = deltas.size();
  PathOutcome out;
  out.phi.assign(count, std::numeric_limits<double>::quiet_NaN());
  out.failed.assign(count, 0);
  std::vector<std::uint64_t> histogram(static_cast<std::size_t>(plan.newton_max_iter) + 1, 0);

  auto run_one = [&](std::size_t i, NoiseSource& source, std::size_t steps) {
    ThetaParams params{plan.theta, deltas[i], plan.newton_tol, plan.newton_max_iter};
    ThetaStepper stepper(model, params);
    Vector y = model.x0;
    StepNoise noise;
    try {
      for (std::size_t n = 0; n < steps; ++n) {
        source.next(n, noise);
        double residual = 0.0;
        const int iterations = stepper.step(static_cast<double>(n) * deltas[i], y, noise, residual);
        ++histogram[static_cast<std::size_t>(iterations)];
        out.diagnostics.max_residual = std::max(out.diagnostics.max_residual, residual);
        ++out.diagnostics.steps;
      }
      out.phi[i] = phi.phi(y);
    } catch (const NewtonDivergence&) {
      out.failed[i] = 1;
    }
  };

  const double align = alignment_step(plan, deltas);
  if (plan.coupling == Coupling::coupled) {
    std::vector<InverseTimeChange> inverses;
    inverses.reserve(count);
    if (plan.identity_clock) {
      for (double d : deltas) inverses.push_back(build_inverse(identity_clock(d, plan.T), plan.T));
    } else {
      RandomStream sub({plan.seed, path_index, StreamTag::subordinator});
      const auto terms = sample_covering_terms(plan.alpha, plan.lepage_terms, plan.T, align,
                                               plan.lepage_drift, sub);
      for (double d : deltas) inverses.push_back(build_inverse(discretize(terms, d), plan.T));
    }
    std::size_t needed = 0;
    for (std::size_t i = 0; i < count; ++i) {
      needed = std::max(needed, inverses[i].stop_index() * step_ratio(deltas[i], plan.delta_reference));
    }
    RandomStream brownian({plan.seed, path_index, StreamTag::brownian});
    RandomStream jumps({plan.seed, path_index, StreamTag::jumps});
    const auto shared = sample_coupled_noise(model, plan.delta_reference, needed, brownian, jumps);
    for (std::size_t i = 0; i < count; ++i) {
      CoupledNoiseSource source(shared, deltas[i]);
      run_one(i, source, inverses[i].stop_index());
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t seed = independent_seed(plan.seed, deltas[i]);
      std::size_t steps;
      if (plan.identity_clock) {
        steps = build_inverse(identity_clock(deltas[i], plan.T), plan.T).stop_index();
      } else {
        RandomStream sub({seed, path_index, StreamTag::subordinator});
        const auto terms = sample_covering_terms(plan.alpha, plan.lepage_terms, plan.T, align,
                                                 plan.lepage_drift, sub);
        steps = build_inverse(discretize(terms, deltas[i]), plan.T).stop_index();
      }
      StreamNoiseSource source(model, deltas[i], RandomStream({seed, path_index, StreamTag::brownian}),
                               RandomStream({seed, path_index, StreamTag::jumps}));
      run_one(i, source, steps);
    }
  }

  for (std::size_t k = 0; k < histogram.size(); ++k) {
    if (histogram[k] > 0) out.diagnostics.iteration_histogram[static_cast<int>(k)] = histogram[k];
  }
  return out;
}

WeakEstimate estimate_weak_value(const ExperimentPlan& plan, double delta, int threads) {
  validate_plan(plan);
  if (!is_integer_multiple(delta, plan.delta_reference)) {
    throw Error(ErrorCode::InvalidArgument, "delta must be a multiple of delta_ref");
  }
  check_well_posed(build_model(plan.model),
                   ThetaParams{plan.theta, delta, plan.newton_tol, plan.newton_max_iter});
  const ModelSpec model = build_model(plan.model);
  const TestFunction phi = test_function_by_name(plan.phi);
  const double deltas[] = {delta};
  std::vector<PathOutcome> outcomes(plan.paths);
  detail::parallel_for(plan.paths, threads, [&](std::size_t i) {
    outcomes[i] = simulate_path_outcome(model, plan, phi, deltas, i);
  });
  const auto stats = sample_stats(plan.paths, [&](std::size_t i, double& v) {
    if (outcomes[i].failed[0]) return false;
    v = outcomes[i].phi[0];
    return true;
  });
  WeakEstimate est;
  est.estimate = stats.mean;
  est.std_error = stats.std_error;
  est.paths_failed = plan.paths - stats.count;
  check_failures(est.paths_failed, plan.paths, delta);
  return est;
}

WeakErrorReport run_order_study(const ExperimentPlan& plan, int threads) {
  validate_plan(plan);
  const ModelSpec model = build_model(plan.model);
  const TestFunction phi = test_function_by_name(plan.phi);

  std::vector<double> deltas;
  deltas.push_back(plan.delta_reference);
  deltas.insert(deltas.end(), plan.delta_ladder.begin(), plan.delta_ladder.end());

  std::vector<PathOutcome> outcomes(plan.paths);
  detail::parallel_for(plan.paths, threads, [&](std::size_t i) {
    outcomes[i] = simulate_path_outcome(model, plan, phi, deltas, i);
  });

  WeakErrorReport report;
  for (const auto& o : outcomes) report.diagnostics.merge(o.diagnostics);

  auto stats_for = [&](std::size_t k) {
    return sample_stats(plan.paths, [&](std::size_t i, double& v) {
      if (outcomes[i].failed[k]) return false;
      v = outcomes[i].phi[k];
      return true;
    });
  };

  const auto ref = stats_for(0);
  report.reference_delta = plan.delta_reference;
  report.reference_estimate = ref.mean;
  report.reference_std_error = ref.std_error;
  report.reference_paths_failed = plan.paths - ref.count;
  check_failures(report.reference_paths_failed, plan.paths, plan.delta_reference);

  std::vector<std::pair<double, double>> fit_rows;
  for (std::size_t k = 1; k < deltas.size(); ++k) {
    const auto s = stats_for(k);
    WeakErrorRow row;
    row.delta = deltas[k];
    row.estimate = s.mean;
    row.reference = ref.mean;
    row.abs_error = std::abs(s.mean - ref.mean);
    row.paths_failed = plan.paths - s.count;
    check_failures(row.paths_failed, plan.paths, row.delta);
    if (plan.coupling == Coupling::coupled) {
      row.std_error = sample_stats(plan.paths, [&](std::size_t i, double& v) {
                        if (outcomes[i].failed[k] || outcomes[i].failed[0]) return false;
                        v = outcomes[i].phi[k] - outcomes[i].phi[0];
                        return true;
                      }).std_error;
    } else {
      row.std_error = std::hypot(s.std_error, ref.std_error);
    }
    if (row.abs_error > 3.0 * row.std_error && row.abs_error > 0.0) {
      fit_rows.emplace_back(row.delta, row.abs_error);
    }
    report.rows.push_back(row);
  }

  report.noise_floor = fit_rows.size() < 3;
  report.fitted_order = fit_rows.size() >= 2 ? fit_order(fit_rows)
                                              : std::numeric_limits<double>::quiet_NaN();
  return report;
}

double fit_order(std::span<const std::pair<double, double>> rows) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [delta, error] : rows) {
    if (delta > 0.0 && error > 0.0) logs.emplace_back(std::log(delta), std::log(error));
  }
  if (logs.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "fit_order needs at least two rows with positive error");
  }
  const double n = static_cast<double>(logs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : logs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InsufficientData, "fit_order needs distinct deltas");
  return sxy / sxx;
}

std::vector<LaplaceRow> laplace_diagnostic(double alpha, int lepage_terms,
                                           std::span<const double> lambdas, std::size_t paths,
                                           std::uint64_t seed, int threads, double t,
                                           bool small_jump_drift) {
  if (paths < 1) throw Error(ErrorCode::InvalidArgument, "paths must be >= 1");
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  }
  std::vector<double> values(paths);
  detail::parallel_for(paths, threads, [&](std::size_t i) {
    RandomStream stream({seed, i, StreamTag::subordinator});
    values[i] = sample_lepage_total(alpha, lepage_terms, t, small_jump_drift, stream);
  });
  std::vector<LaplaceRow> rows;
  for (double lambda : lambdas) {
    const auto s = sample_stats(paths, [&](std::size_t i, double& v) {
      v = std::exp(-lambda * values[i]);
      return true;
    });
    rows.push_back({lambda, s.mean, std::exp(-t * stable_laplace_exponent(alpha, lambda)), s.std_error});
  }
  return rows;
}

}  // namespace tclsde
