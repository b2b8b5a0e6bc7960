#include "tclsde/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

std::size_t grid_steps(double horizon, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  const double ratio = horizon / delta;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be a positive integer multiple of delta");
  }
  return static_cast<std::size_t>(steps);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
}

}  // namespace

double LePageTerms::value_at(double t) const {
  const auto count = static_cast<std::size_t>(
      std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
  const double jumps = count == 0 ? 0.0 : cumulative[count - 1];
  return jumps + drift * t;
}

double LePageTerms::terminal_value() const { return value_at(horizon_S); }

double stable_laplace_exponent(double alpha, double lambda) { return std::pow(lambda, alpha); }

double small_jump_mean_rate(double alpha, double cutoff) {
  return alpha / (std::tgamma(1.0 - alpha) * (1.0 - alpha)) * std::pow(cutoff, 1.0 - alpha);
}

LePageTerms sample_lepage_terms(double alpha, int truncation_K, double horizon_S,
                                bool small_jump_drift, RandomStream& stream) {
  check_alpha(alpha);
  if (truncation_K < 1) throw Error(ErrorCode::InvalidArgument, "LePage truncation K must be >= 1");
  if (!(horizon_S > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon_S must be positive");

  const auto K = static_cast<std::size_t>(truncation_K);
  const double scale = std::tgamma(1.0 - alpha) / horizon_S;
  const double exponent = -1.0 / alpha;

  std::vector<double> times(K), sizes(K);
  double arrival = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    arrival += stream.exponential();
    sizes[j] = std::pow(scale * arrival, exponent);
    times[j] = horizon_S * (1.0 - stream.uniform());  // (0, S]
  }

  LePageTerms terms;
  terms.alpha = alpha;
  terms.horizon_S = horizon_S;
  terms.drift = small_jump_drift ? small_jump_mean_rate(alpha, sizes.back()) : 0.0;

  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  terms.jump_times.reserve(K);
  terms.jump_sizes.reserve(K);
  terms.cumulative.reserve(K);
  double sum = 0.0;
  for (std::size_t idx : order) {
    terms.jump_times.push_back(times[idx]);
    terms.jump_sizes.push_back(sizes[idx]);
    sum += sizes[idx];
    terms.cumulative.push_back(sum);
  }
  return terms;
}

double sample_lepage_total(double alpha, int truncation_K, double horizon_S,
                           bool small_jump_drift, RandomStream& stream) {
  check_alpha(alpha);
  if (truncation_K < 1) throw Error(ErrorCode::InvalidArgument, "LePage truncation K must be >= 1");
  if (!(horizon_S > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon_S must be positive");
  const double scale = std::tgamma(1.0 - alpha) / horizon_S;
  const double exponent = -1.0 / alpha;
  double arrival = 0.0, size = 0.0, sum = 0.0;
  for (int j = 0; j < truncation_K; ++j) {
    arrival += stream.exponential();
    size = std::pow(scale * arrival, exponent);
    sum += size;
    (void)stream.uniform();  // keep the draw sequence of sample_lepage_terms
  }
  const double drift = small_jump_drift ? small_jump_mean_rate(alpha, size) : 0.0;
  return sum + drift * horizon_S;
}

SubordinatorPath discretize(const LePageTerms& terms, double delta) {
  const std::size_t M = grid_steps(terms.horizon_S, delta);
  SubordinatorPath path;
  path.delta = delta;
  path.values.resize(M + 1);
  std::size_t consumed = 0;
  const std::size_t K = terms.jump_times.size();
  path.values[0] = 0.0;
  for (std::size_t n = 1; n <= M; ++n) {
    const double t = static_cast<double>(n) * delta;
    while (consumed < K && terms.jump_times[consumed] <= t) ++consumed;
    const double jumps = consumed == 0 ? 0.0 : terms.cumulative[consumed - 1];
    path.values[n] = jumps + terms.drift * t;
  }
  return path;
}

SubordinatorPath sample_subordinator(const SubordinatorParams& params, RandomStream& stream) {
  grid_steps(params.horizon_S, params.delta);
  const auto terms = sample_lepage_terms(params.alpha, params.truncation_K, params.horizon_S,
                                         params.small_jump_drift, stream);
  return discretize(terms, params.delta);
}

LePageTerms sample_covering_terms(double alpha, int truncation_K, double T, double align,
                                  bool small_jump_drift, RandomStream& stream) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(align > 0.0)) throw Error(ErrorCode::InvalidArgument, "alignment step must be positive");
  double S = std::max(1.0, std::ceil(T / align - 1e-9)) * align;
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto terms = sample_lepage_terms(alpha, truncation_K, S, small_jump_drift, stream);
    if (terms.terminal_value() > T) return terms;
    S *= 2.0;
  }
  throw Error(ErrorCode::HorizonTooShort, "subordinator failed to exceed T after 64 doublings");
}

SubordinatorPath identity_clock(double delta, double T) {
  if (!(delta > 0.0) || !(T > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "identity clock needs positive delta and T");
  }
  const auto M = static_cast<std::size_t>(std::floor(T / delta)) + 1;
  SubordinatorPath path;
  path.delta = delta;
  path.values.resize(M + 1);
  for (std::size_t n = 0; n <= M; ++n) path.values[n] = static_cast<double>(n) * delta;
  return path;
}

InverseTimeChange::InverseTimeChange(double delta, double T, std::size_t stop_index,
                                     std::vector<double> knots)
    : delta_(delta), T_(T), stop_index_(stop_index), knots_(std::move(knots)) {
  if (knots_.size() != stop_index_ + 2) {
    throw Error(ErrorCode::InvalidArgument, "inverse time change needs N + 2 knots");
  }
}

std::size_t InverseTimeChange::index_at(double t) const {
  if (!(t >= 0.0 && t <= T_)) {
    throw Error(ErrorCode::InvalidArgument, "inverse time change evaluated outside [0, T]");
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

InverseTimeChange build_inverse(const SubordinatorPath& path, double T) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (path.values.empty() || path.values.back() <= T) {
    throw Error(ErrorCode::HorizonTooShort,
                "subordinator path does not exceed T; resample with a larger horizon");
  }
  const auto it = std::upper_bound(path.values.begin(), path.values.end(), T);
  const auto N = static_cast<std::size_t>(it - path.values.begin()) - 1;
  std::vector<double> knots(path.values.begin(), path.values.begin() + static_cast<long>(N) + 2);
  return InverseTimeChange(path.delta, T, N, std::move(knots));
}

double evaluate_inverse(const InverseTimeChange& E, double t) { return E(t); }

}  // namespace tclsde
