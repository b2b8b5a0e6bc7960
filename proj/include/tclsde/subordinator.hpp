/**
 * @file subordinator.hpp
 * @brief alpha-stable subordinator via a truncated LePage series, and the
 *        discretized inverse time change built from its grid samples.
 *
 * The series keeps the K largest jumps on the operational window (0, S]:
 * with unit-rate Poisson arrivals G_1 < G_2 < ... and iid jump times
 * U_j ~ Uniform(0, S], the j-th jump has size (Gamma(1-alpha) G_j / S)^(-1/alpha),
 * which is the tail inverse of the Levy measure
 * alpha / Gamma(1-alpha) x^(-1-alpha) dx (Laplace exponent lambda^alpha).
 * Conditional on G_K the omitted jumps form a subordinator with Levy measure
 * restricted to (0, s_K); by default their mean is added back as a linear
 * drift, which removes the dominant truncation bias.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "tclsde/random.hpp"

namespace tclsde {

struct SubordinatorParams {
  double alpha = 0.8;
  int truncation_K = 1000;
  double horizon_S = 1.0;
  double delta = 1.0;
  bool small_jump_drift = true;
};

/// Realized series terms. Reusing one term set across step sizes couples
/// the discretizations of D on nested grids.
struct LePageTerms {
  double alpha = 0.8;
  double horizon_S = 1.0;
  std::vector<double> jump_times;   // sorted ascending, in (0, S]
  std::vector<double> jump_sizes;   // aligned with jump_times
  std::vector<double> cumulative;   // prefix sums of jump_sizes in time order
  double drift = 0.0;               // small-jump compensation rate

  /// D(t) for t in [0, S].
  double value_at(double t) const;
  double terminal_value() const;
};

struct SubordinatorPath {
  double delta = 1.0;
  std::vector<double> values;  // D(t_0), ..., D(t_M), t_n = n * delta

  double horizon() const { return delta * static_cast<double>(values.size() - 1); }
};

/// Laplace exponent phi(lambda) = lambda^alpha.
double stable_laplace_exponent(double alpha, double lambda);

/// Drift rate b = alpha / (Gamma(1-alpha)(1-alpha)) * cutoff^(1-alpha): mean of
/// the jumps of size below cutoff per unit operational time.
double small_jump_mean_rate(double alpha, double cutoff);

LePageTerms sample_lepage_terms(double alpha, int truncation_K, double horizon_S,
                                bool small_jump_drift, RandomStream& stream);

/// D(S) alone, from the same draws sample_lepage_terms would consume.
double sample_lepage_total(double alpha, int truncation_K, double horizon_S,
                           bool small_jump_drift, RandomStream& stream);

/// Grid samples of D on [0, S]; delta must divide horizon_S.
SubordinatorPath discretize(const LePageTerms& terms, double delta);

SubordinatorPath sample_subordinator(const SubordinatorParams& params, RandomStream& stream);

/// Draws term sets on S = ceil(T / align) * align, doubling S (fresh draws
/// from the same stream) until D(S) > T.
LePageTerms sample_covering_terms(double alpha, int truncation_K, double T, double align,
                                  bool small_jump_drift, RandomStream& stream);

/// D(t) = t sampled on [0, T + delta]; the diagnostic clock without time change.
SubordinatorPath identity_clock(double delta, double T);

class InverseTimeChange {
 public:
  InverseTimeChange(double delta, double T, std::size_t stop_index, std::vector<double> knots);

  double delta() const noexcept { return delta_; }
  double horizon() const noexcept { return T_; }
  /// N with T in [D(t_N), D(t_{N+1})).
  std::size_t stop_index() const noexcept { return stop_index_; }
  /// D(t_0), ..., D(t_{N+1}).
  const std::vector<double>& knots() const noexcept { return knots_; }

  /// n such that t lies in [D(t_n), D(t_{n+1})); requires 0 <= t <= T.
  std::size_t index_at(double t) const;
  double operator()(double t) const { return static_cast<double>(index_at(t)) * delta_; }

 private:
  double delta_;
  double T_;
  std::size_t stop_index_;
  std::vector<double> knots_;
};

/// Throws HorizonTooShort when max D <= T.
InverseTimeChange build_inverse(const SubordinatorPath& path, double T);

double evaluate_inverse(const InverseTimeChange& E, double t);

}  // namespace tclsde
