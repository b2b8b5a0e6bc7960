#include "tclsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

double first_moment(const TruncatedLevyMeasure& measure) {
  return compensator_integral(measure, [](double z) { return z; });
}

std::string probe_text(double t, const Vector& x) {
  std::ostringstream os;
  os << "t=" << t << " x=(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

ModelSpec ou_model(const OuParams& p, TruncatedLevyMeasure measure) {
  if (!(p.a1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "ou model needs a1 > 0");
  ModelSpec m;
  m.name = "ou";
  m.dim_d = 1;
  m.dim_m = 1;
  const double a1 = p.a1, a2 = p.a2, a3 = p.a3, a4 = p.a4;
  m.drift = [a1, a2](double, const Vector& x, Vector& out) { out[0] = a1 * (a2 - x[0]); };
  m.diffusion = [a3](double, const Vector&, Matrix& out) { out(0, 0) = a3; };
  m.jump = [a4](double, const Vector&, double z, Vector& out) { out[0] = a4 * z; };
  m.drift_jacobian = [a1](double, const Vector&, Matrix& out) { out(0, 0) = -a1; };
  const double rho = a4 * first_moment(measure);
  m.compensator = [rho](double, const Vector&, Vector& out) { out[0] = rho; };
  m.lipschitz_L = a1;
  m.measure = std::move(measure);
  m.x0 = Vector::Constant(1, p.x0);
  return m;
}

ModelSpec ou_model(double a1, double a2, double a3, double a4) {
  return ou_model(OuParams{a1, a2, a3, a4, 0.5});
}

ModelSpec kubo_model(const KuboParams& p, TruncatedLevyMeasure measure) {
  ModelSpec m;
  m.name = "kubo";
  m.dim_d = 2;
  m.dim_m = 1;
  const double a = p.a, sigma = p.sigma, gamma = p.gamma;
  m.drift = [a](double, const Vector& x, Vector& out) {
    out[0] = -a * x[1];
    out[1] = a * x[0];
  };
  m.diffusion = [sigma](double, const Vector& x, Matrix& out) {
    out(0, 0) = sigma * x[0];
    out(1, 0) = sigma * x[1];
  };
  m.jump = [gamma](double, const Vector& x, double z, Vector& out) {
    out[0] = gamma * z * x[1];
    out[1] = gamma * z * x[0];
  };
  m.drift_jacobian = [a](double, const Vector&, Matrix& out) {
    out << 0.0, -a, a, 0.0;
  };
  const double k = gamma * first_moment(measure);
  m.compensator = [k](double, const Vector& x, Vector& out) {
    out[0] = k * x[1];
    out[1] = k * x[0];
  };
  m.lipschitz_L = std::abs(a);
  m.measure = std::move(measure);
  m.x0.resize(2);
  m.x0 << p.x1_0, p.x2_0;
  return m;
}

ModelSpec kubo_model(double a, double sigma, double gamma) {
  return kubo_model(KuboParams{a, sigma, gamma, 1.0, 1.0});
}

ModelSpec zero_model(const Vector& x0, int dim_m) {
  ModelSpec m;
  m.name = "zero";
  m.dim_d = static_cast<int>(x0.size());
  m.dim_m = dim_m;
  m.drift = [](double, const Vector&, Vector& out) { out.setZero(); };
  m.diffusion = [](double, const Vector&, Matrix& out) { out.setZero(); };
  m.jump = [](double, const Vector&, double, Vector& out) { out.setZero(); };
  m.drift_jacobian = [](double, const Vector&, Matrix& out) { out.setZero(); };
  m.compensator = [](double, const Vector&, Vector& out) { out.setZero(); };
  m.lipschitz_L = 0.0;
  m.x0 = x0;
  return m;
}

void drift_jacobian_or_fd(const ModelSpec& model, double t, const Vector& x, Matrix& out) {
  const auto d = static_cast<Eigen::Index>(model.dim_d);
  out.resize(d, d);
  if (model.drift_jacobian) {
    model.drift_jacobian(t, x, out);
    return;
  }
  Vector xp = x, xm = x, fp(d), fm(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    model.drift(t, xp, fp);
    model.drift(t, xm, fm);
    out.col(j) = (fp - fm) / (xp[j] - xm[j]);
    xp[j] = x[j];
    xm[j] = x[j];
  }
}

void compensator_value(const ModelSpec& model, double t, const Vector& x, Vector& out) {
  out.resize(model.dim_d);
  if (model.compensator) {
    model.compensator(t, x, out);
    return;
  }
  if (!model.measure.has_jumps()) {
    out.setZero();
    return;
  }
  Vector h(model.dim_d);
  for (int i = 0; i < model.dim_d; ++i) {
    out[i] = compensator_integral(model.measure, [&](double z) {
      model.jump(t, x, z, h);
      return h[i];
    });
  }
}

TestFunction exp_neg_square() {
  return {"exp_neg_square", [](const Vector& x) { return std::exp(-x.squaredNorm()); }};
}

TestFunction product() {
  return {"product", [](const Vector& x) { return x[0] * x[1]; }};
}

TestFunction identity_first() {
  return {"identity_first", [](const Vector& x) { return x[0]; }};
}

TestFunction test_function_by_name(const std::string& label) {
  if (label == "exp_neg_square") return exp_neg_square();
  if (label == "product") return product();
  if (label == "identity_first") return identity_first();
  throw Error(ErrorCode::InvalidArgument, "unknown test function '" + label + "'");
}

ValidationReport validate_model(const ModelSpec& model, int probes, std::uint64_t seed) {
  if (probes < 1) throw Error(ErrorCode::InvalidArgument, "probes must be >= 1");
  ValidationReport report;
  report.probes = probes;
  report.declared_L = model.lipschitz_L;
  report.jacobian_fallback = !model.drift_jacobian;

  const auto d = static_cast<Eigen::Index>(model.dim_d);
  RandomStream rng(SeedSpec{seed, 0, StreamTag::brownian});
  Vector x(d), y(d), fx(d), fy(d);
  Matrix jac(d, d), jac_fd(d, d);
  const double slack = 1.0 + 1e-9;

  for (int k = 0; k < probes; ++k) {
    const double t = rng.uniform();
    for (Eigen::Index i = 0; i < d; ++i) {
      x[i] = 2.0 * rng.normal();
      y[i] = 2.0 * rng.normal();
    }
    model.drift(t, x, fx);
    model.drift(t, y, fy);
    const double dist = (x - y).norm();
    if (dist > 0.0) {
      const double ratio = (fx - fy).norm() / dist;
      report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
      if (ratio > model.lipschitz_L * slack) {
        report.violations.push_back("Lipschitz ratio " + std::to_string(ratio) +
                                    " exceeds declared L at " + probe_text(t, x));
      }
    }

    drift_jacobian_or_fd(model, t, x, jac);
    const double norm = Eigen::JacobiSVD<Matrix>(jac).singularValues()(0);
    report.max_jacobian_norm = std::max(report.max_jacobian_norm, norm);
    if (norm > model.lipschitz_L * (1.0 + 1e-6)) {
      report.violations.push_back("Jacobian spectral norm " + std::to_string(norm) +
                                  " exceeds declared L at " + probe_text(t, x));
    }

    if (model.drift_jacobian) {
      ModelSpec fd_only = model;
      fd_only.drift_jacobian = nullptr;
      drift_jacobian_or_fd(fd_only, t, x, jac_fd);
      const double rel = (jac - jac_fd).norm() / std::max(1.0, jac.norm());
      report.max_jacobian_rel_error = std::max(report.max_jacobian_rel_error, rel);
      if (rel > 1e-6) {
        report.violations.push_back("Jacobian disagrees with finite differences (rel error " +
                                    std::to_string(rel) + ") at " + probe_text(t, x));
      }
    }
  }
  return report;
}

}  // namespace tclsde
