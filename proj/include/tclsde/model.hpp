#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tclsde/jump_measure.hpp"
#include "tclsde/types.hpp"

namespace tclsde {

/// Coefficients of dY = f(t,Y) dt + g(t,Y) dW + int h(t,Y,z) Ntilde(dz,dt).
///
/// Contract for user models (documented, not verified symbolically): f, g, h
/// globally Lipschitz with linear growth in x, Lipschitz in t, C^4 with
/// polynomially bounded derivatives. validate_model spot-checks the drift.
struct ModelSpec {
  std::string name;
  int dim_d = 1;
  int dim_m = 1;
  std::function<void(double t, const Vector& x, Vector& out)> drift;
  std::function<void(double t, const Vector& x, Matrix& out)> diffusion;  // d x m
  std::function<void(double t, const Vector& x, double z, Vector& out)> jump;
  /// Optional; a central finite-difference fallback is used when empty.
  std::function<void(double t, const Vector& x, Matrix& out)> drift_jacobian;
  /// Optional closed form of int h(t,x,z) mu(dz); quadrature per component when empty.
  std::function<void(double t, const Vector& x, Vector& out)> compensator;
  double lipschitz_L = 0.0;
  TruncatedLevyMeasure measure = TruncatedLevyMeasure::none();
  Vector x0;
};

struct OuParams {
  double a1 = 2.0;
  double a2 = 1.0;
  double a3 = 0.6;
  double a4 = 0.5;
  double x0 = 0.5;
};

struct KuboParams {
  double a = 2.0;
  double sigma = 0.5;
  double gamma = 0.5;
  double x1_0 = 1.0;
  double x2_0 = 1.0;
};

/// dX = a1 (a2 - X) dt + a3 dW + int a4 z Ntilde(dz, dt)
ModelSpec ou_model(const OuParams& p,
                   TruncatedLevyMeasure measure = TruncatedLevyMeasure::paper_gaussian(1.0));
ModelSpec ou_model(double a1, double a2, double a3, double a4);

/// Kubo oscillator: rotation drift, multiplicative noise sigma X dW, jump gamma z (X2, X1).
ModelSpec kubo_model(const KuboParams& p,
                     TruncatedLevyMeasure measure = TruncatedLevyMeasure::paper_gaussian(1.0));
ModelSpec kubo_model(double a, double sigma, double gamma);

/// f = g = h = 0; every path stays at x0.
ModelSpec zero_model(const Vector& x0, int dim_m = 1);

/// Drift Jacobian, from the model when provided, else central differences.
void drift_jacobian_or_fd(const ModelSpec& model, double t, const Vector& x, Matrix& out);

/// int h(t,x,z) mu(dz), closed form when the model provides one.
void compensator_value(const ModelSpec& model, double t, const Vector& x, Vector& out);

struct TestFunction {
  std::string label;
  std::function<double(const Vector&)> phi;
};

/// exp(-|x|^2)
TestFunction exp_neg_square();
/// x1 * x2
TestFunction product();
/// x1
TestFunction identity_first();
TestFunction test_function_by_name(const std::string& label);

struct ValidationReport {
  int probes = 0;
  double declared_L = 0.0;
  double max_lipschitz_ratio = 0.0;
  double max_jacobian_norm = 0.0;  // spectral norm
  double max_jacobian_rel_error = 0.0;
  bool jacobian_fallback = false;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_model(const ModelSpec& model, int probes, std::uint64_t seed = 0);

}  // namespace tclsde
