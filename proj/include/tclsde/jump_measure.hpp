#pragma once

#include <functional>
#include <string>

#include "tclsde/random.hpp"

namespace tclsde {

enum class MeasureKind { paper_gaussian, uniform, none, custom };

MeasureKind measure_kind_from_string(const std::string& name);
std::string to_string(MeasureKind kind);

/// Finite-activity Levy measure restricted to the scalar window (-c, c).
/// Immutable after construction; total mass is computed once by quadrature.
class TruncatedLevyMeasure {
 public:
  /// density 3/(2 sqrt(2 pi)) exp(-z^2/2) on (-c, c)
  static TruncatedLevyMeasure paper_gaussian(double c = 1.0);
  /// density 1 on (-c, c)
  static TruncatedLevyMeasure uniform(double c = 1.0);
  /// zero measure: no jumps at all
  static TruncatedLevyMeasure none();
  /// Arbitrary non-negative density bounded by density_max; jump sizes are
  /// drawn by rejection from a uniform envelope. Throws if the mass is zero.
  static TruncatedLevyMeasure custom(double c, std::function<double(double)> density,
                                     double density_max);
  static TruncatedLevyMeasure from_kind(MeasureKind kind, double c);

  MeasureKind kind() const noexcept { return kind_; }
  double c() const noexcept { return c_; }
  double lambda() const noexcept { return lambda_; }
  bool has_jumps() const noexcept { return lambda_ > 0.0; }
  double density(double z) const;
  double density_max() const noexcept { return density_max_; }

 private:
  TruncatedLevyMeasure(MeasureKind kind, double c, std::function<double(double)> density,
                       double density_max);

  MeasureKind kind_;
  double c_;
  std::function<double(double)> density_;
  double density_max_;
  double lambda_ = 0.0;
};

/// Adaptive Gauss-Kronrod integral of the density over (-c, c), relative
/// error 1e-10. Throws QuadratureFailure when the tolerance is not reached.
double compute_lambda(const TruncatedLevyMeasure& measure);

/// One draw from the normalized law density / lambda.
double sample_jump_size(const TruncatedLevyMeasure& measure, RandomStream& stream);

/// int_{|z|<c} integrand(z) density(z) dz.
double compensator_integral(const TruncatedLevyMeasure& measure,
                            const std::function<double(double)>& integrand, double tol = 1e-10);

}  // namespace tclsde
