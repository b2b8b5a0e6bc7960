#include "tclsde/stepper.hpp"

#include <cmath>
#include <sstream>

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void check_well_posed(const ModelSpec& model, const ThetaParams& params) {
  std::vector<std::string> issues;
  if (!(params.theta >= 0.0 && params.theta <= 1.0)) issues.push_back("theta must lie in [0, 1]");
  if (!(params.delta > 0.0)) issues.push_back("delta must be positive");
  if (!(params.newton_tol > 0.0)) issues.push_back("newton.tol must be positive");
  if (params.newton_max_iter < 1) issues.push_back("newton.max_iter must be >= 1");
  const double guard = params.theta * model.lipschitz_L * params.delta;
  if (guard > 0.5 + 1e-12) {
    issues.push_back("theta*L*delta = " + format_number(guard) + " > 1/2");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

void draw_step_noise(const ModelSpec& model, double delta, RandomStream& brownian,
                     RandomStream& jumps, StepNoise& out) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  const double scale = std::sqrt(delta);
  out.dW.resize(model.dim_m);
  for (int i = 0; i < model.dim_m; ++i) out.dW[i] = scale * brownian.normal();
  out.marks.clear();
  if (!model.measure.has_jumps()) return;
  const auto count = jumps.poisson(model.measure.lambda() * delta);
  for (std::uint64_t k = 0; k < count; ++k) out.marks.push_back(sample_jump_size(model.measure, jumps));
}

StepNoise draw_step_noise(const ModelSpec& model, double delta, RandomStream& brownian,
                          RandomStream& jumps) {
  StepNoise noise;
  draw_step_noise(model, delta, brownian, jumps, noise);
  return noise;
}

Vector jump_increment(const ModelSpec& model, double t_n, const Vector& y_n,
                      const StepNoise& noise, double delta) {
  Vector out = Vector::Zero(model.dim_d);
  Vector h(model.dim_d);
  for (double z : noise.marks) {
    model.jump(t_n, y_n, z, h);
    out += h;
  }
  if (model.measure.has_jumps()) {
    Vector rho(model.dim_d);
    compensator_value(model, t_n, y_n, rho);
    out -= delta * rho;
  }
  return out;
}

ThetaStepper::ThetaStepper(const ModelSpec& model, const ThetaParams& params)
    : model_(&model), params_(params) {
  check_well_posed(model, params);
  const auto d = static_cast<Eigen::Index>(model.dim_d);
  f_.resize(d);
  h_.resize(d);
  rho_.resize(d);
  rhs_.resize(d);
  residual_vec_.resize(d);
  correction_.resize(d);
  g_.resize(d, model.dim_m);
  jac_.resize(d, d);
  newton_matrix_.resize(d, d);
}

void ThetaStepper::accumulate_noise(double t_n, const Vector& y, const StepNoise& noise,
                                    Vector& out) {
  const ModelSpec& m = *model_;
  m.diffusion(t_n, y, g_);
  out.noalias() += g_ * noise.dW;
  for (double z : noise.marks) {
    m.jump(t_n, y, z, h_);
    out += h_;
  }
  if (m.measure.has_jumps()) {
    compensator_value(m, t_n, y, rho_);
    out -= params_.delta * rho_;
  }
}

int ThetaStepper::solve_implicit(double t_next, const Vector& rhs, Vector& y, double& residual,
                                 bool force_one) {
  const ModelSpec& m = *model_;
  const double scale = params_.theta * params_.delta;
  const auto d = static_cast<Eigen::Index>(m.dim_d);

  auto eval_residual = [&]() {
    m.drift(t_next, y, f_);
    residual_vec_ = y - scale * f_ - rhs;
    return residual_vec_.norm();
  };

  residual = eval_residual();
  int iterations = 0;
  while ((force_one && iterations == 0) || residual > params_.newton_tol) {
    if (iterations >= params_.newton_max_iter) {
      throw NewtonDivergence(0, "no convergence after " + std::to_string(iterations) +
                                    " iterations (residual " + format_number(residual) + ")");
    }
    drift_jacobian_or_fd(m, t_next, y, jac_);
    newton_matrix_ = Matrix::Identity(d, d) - scale * jac_;
    if (d == 1) {
      correction_[0] = residual_vec_[0] / newton_matrix_(0, 0);
    } else if (d == 2) {
      const double det = newton_matrix_(0, 0) * newton_matrix_(1, 1) -
                         newton_matrix_(0, 1) * newton_matrix_(1, 0);
      correction_[0] = (newton_matrix_(1, 1) * residual_vec_[0] -
                        newton_matrix_(0, 1) * residual_vec_[1]) / det;
      correction_[1] = (newton_matrix_(0, 0) * residual_vec_[1] -
                        newton_matrix_(1, 0) * residual_vec_[0]) / det;
    } else {
      correction_ = newton_matrix_.partialPivLu().solve(residual_vec_);
    }
    y -= correction_;
    ++iterations;
    residual = eval_residual();
    if (!std::isfinite(residual)) {
      throw NewtonDivergence(0, "non-finite residual");
    }
  }
  return iterations;
}

int ThetaStepper::step(double t_n, Vector& y, const StepNoise& noise, double& residual) {
  const ModelSpec& m = *model_;
  const double delta = params_.delta;
  const double theta = params_.theta;

  m.drift(t_n, y, f_);
  rhs_ = y + (1.0 - theta) * delta * f_;
  accumulate_noise(t_n, y, noise, rhs_);

  if (theta == 0.0) {
    y = rhs_;
    residual = 0.0;
    if (!y.allFinite()) throw NewtonDivergence(0, "non-finite explicit update");
    return 0;
  }
  // Predictor: the explicit update; f_ still holds f(t_n, y_n).
  y = rhs_ + theta * delta * f_;
  return solve_implicit(t_n + delta, rhs_, y, residual, true);
}

void ThetaStepper::frozen_euler(double t_n, const Vector& y, const StepNoise& noise, Vector& out) {
  model_->drift(t_n, y, f_);
  out = y + params_.delta * f_;
  accumulate_noise(t_n, y, noise, out);
}

Vector ThetaStepper::implicit_inverse(double t, const Vector& rhs) {
  Vector y = rhs;
  if (params_.theta == 0.0) return y;
  double residual = 0.0;
  solve_implicit(t, rhs, y, residual, true);
  return y;
}

StepResult theta_step(const ModelSpec& model, const ThetaParams& params, double t_n,
                      const Vector& y_n, const StepNoise& noise) {
  ThetaStepper stepper(model, params);
  StepResult result;
  result.state = y_n;
  result.iterations = stepper.step(t_n, result.state, noise, result.residual);
  return result;
}

Vector frozen_euler_step(const ModelSpec& model, double t_n, const Vector& y_n,
                         const StepNoise& noise, double delta) {
  ThetaParams params;
  params.theta = 0.0;
  params.delta = delta;
  ThetaStepper stepper(model, params);
  Vector out(model.dim_d);
  stepper.frozen_euler(t_n, y_n, noise, out);
  return out;
}

StreamNoiseSource::StreamNoiseSource(const ModelSpec& model, double delta, RandomStream brownian,
                                     RandomStream jumps)
    : model_(&model), delta_(delta), brownian_(std::move(brownian)), jumps_(std::move(jumps)) {}

void StreamNoiseSource::next(std::size_t, StepNoise& out) {
  draw_step_noise(*model_, delta_, brownian_, jumps_, out);
}

ThetaRun simulate_theta_path(const ModelSpec& model, const ThetaParams& params,
                             std::size_t horizon_steps, NoiseSource& noise) {
  ThetaStepper stepper(model, params);
  ThetaRun run;
  run.times.reserve(horizon_steps + 1);
  run.states.reserve(horizon_steps + 1);
  run.newton_iterations.reserve(horizon_steps);
  run.times.push_back(0.0);
  run.states.push_back(model.x0);

  Vector y = model.x0;
  StepNoise step_noise;
  for (std::size_t n = 0; n < horizon_steps; ++n) {
    const double t_n = static_cast<double>(n) * params.delta;
    noise.next(n, step_noise);
    double residual = 0.0;
    int iterations = 0;
    try {
      iterations = stepper.step(t_n, y, step_noise, residual);
    } catch (const NewtonDivergence& e) {
      throw NewtonDivergence(n, e.detail());
    }
    run.times.push_back(static_cast<double>(n + 1) * params.delta);
    run.states.push_back(y);
    run.newton_iterations.push_back(iterations);
    run.max_residual = std::max(run.max_residual, residual);
  }
  return run;
}

}  // namespace tclsde
