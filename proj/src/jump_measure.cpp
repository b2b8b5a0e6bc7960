#include "tclsde/jump_measure.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

constexpr double kQuadratureTol = 1e-10;
constexpr unsigned kMaxDepth = 30;

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, kMaxDepth, tol, &error, &l1);
  // Boost reports an absolute error estimate; the contract is relative to the L1 norm.
  if (!std::isfinite(value) || error > tol * l1) {
    throw Error(ErrorCode::QuadratureFailure,
                "quadrature did not reach tolerance (error estimate " + std::to_string(error) + ")");
  }
  return value;
}

}  // namespace

MeasureKind measure_kind_from_string(const std::string& name) {
  if (name == "paper_gaussian") return MeasureKind::paper_gaussian;
  if (name == "uniform") return MeasureKind::uniform;
  if (name == "none") return MeasureKind::none;
  throw Error(ErrorCode::InvalidArgument, "unknown jump.kind '" + name + "'");
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::paper_gaussian: return "paper_gaussian";
    case MeasureKind::uniform: return "uniform";
    case MeasureKind::none: return "none";
    case MeasureKind::custom: return "custom";
  }
  return "custom";
}

TruncatedLevyMeasure::TruncatedLevyMeasure(MeasureKind kind, double c,
                                           std::function<double(double)> density,
                                           double density_max)
    : kind_(kind), c_(c), density_(std::move(density)), density_max_(density_max) {
  if (kind_ == MeasureKind::none) return;
  if (!(c_ > 0.0) || !std::isfinite(c_)) {
    throw Error(ErrorCode::InvalidArgument, "truncation radius c must be positive and finite");
  }
  lambda_ = compute_lambda(*this);
  if (!(lambda_ > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "jump measure has zero mass; use jump.kind = none for pure diffusion");
  }
}

TruncatedLevyMeasure TruncatedLevyMeasure::paper_gaussian(double c) {
  const double k = 3.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  return TruncatedLevyMeasure(
      MeasureKind::paper_gaussian, c, [k](double z) { return k * std::exp(-0.5 * z * z); }, k);
}

TruncatedLevyMeasure TruncatedLevyMeasure::uniform(double c) {
  return TruncatedLevyMeasure(MeasureKind::uniform, c, [](double) { return 1.0; }, 1.0);
}

TruncatedLevyMeasure TruncatedLevyMeasure::none() {
  return TruncatedLevyMeasure(MeasureKind::none, 0.0, [](double) { return 0.0; }, 0.0);
}

TruncatedLevyMeasure TruncatedLevyMeasure::custom(double c, std::function<double(double)> density,
                                                  double density_max) {
  if (!(density_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "custom measure needs a positive density bound");
  }
  return TruncatedLevyMeasure(MeasureKind::custom, c, std::move(density), density_max);
}

TruncatedLevyMeasure TruncatedLevyMeasure::from_kind(MeasureKind kind, double c) {
  switch (kind) {
    case MeasureKind::paper_gaussian: return paper_gaussian(c);
    case MeasureKind::uniform: return uniform(c);
    case MeasureKind::none: return none();
    case MeasureKind::custom: break;
  }
  throw Error(ErrorCode::InvalidArgument, "custom measures need an explicit density");
}

double TruncatedLevyMeasure::density(double z) const {
  if (kind_ == MeasureKind::none || !(std::abs(z) < c_)) return 0.0;
  return density_(z);
}

double compute_lambda(const TruncatedLevyMeasure& measure) {
  if (measure.kind() == MeasureKind::none) return 0.0;
  return integrate([&](double z) { return measure.density(z); }, -measure.c(), measure.c(),
                   kQuadratureTol);
}

double sample_jump_size(const TruncatedLevyMeasure& measure, RandomStream& stream) {
  if (!measure.has_jumps()) {
    throw Error(ErrorCode::InvalidArgument, "cannot sample jump sizes from a zero measure");
  }
  const double c = measure.c();
  switch (measure.kind()) {
    case MeasureKind::paper_gaussian: {
      // Density is proportional to the standard normal on (-c, c).
      double z;
      do {
        z = stream.normal();
      } while (!(std::abs(z) < c));
      return z;
    }
    case MeasureKind::uniform: {
      double z;
      do {
        z = c * (2.0 * stream.uniform() - 1.0);
      } while (!(std::abs(z) < c));
      return z;
    }
    default: {
      const double bound = measure.density_max();
      for (;;) {
        const double z = c * (2.0 * stream.uniform() - 1.0);
        if (std::abs(z) < c && stream.uniform() * bound < measure.density(z)) return z;
      }
    }
  }
}

double compensator_integral(const TruncatedLevyMeasure& measure,
                            const std::function<double(double)>& integrand, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadrature tolerance must be positive");
  if (measure.kind() == MeasureKind::none) return 0.0;
  return integrate([&](double z) { return integrand(z) * measure.density(z); }, -measure.c(),
                   measure.c(), tol);
}

}  // namespace tclsde
