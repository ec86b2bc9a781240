#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "patt/errors.hpp"
#include "patt/linalg.hpp"
#include "patt/rng.hpp"

namespace patt {

/*
 * Unnormalized log-density on R^d. Evaluation is pure; per-chain evaluation
 * counting lives in density_eval so no shared mutable state sits on the
 * sampling hot path.
 */
class log_density {
 public:
  using fn_type = std::function<double(const Eigen::VectorXd&)>;

  log_density() = default;
  log_density(Eigen::Index dim, fn_type fn, std::string name = "")
      : dim_(dim), fn_(std::move(fn)), name_(std::move(name)) {
    if (dim_ <= 0) throw usage_error("log_density: dimension must be positive");
  }

  Eigen::Index dim() const { return dim_; }
  const std::string& name() const { return name_; }

  double operator()(const Eigen::VectorXd& x) const {
    if (x.size() != dim_)
      throw usage_error("log_density '" + name_ + "': argument has dimension " +
                        std::to_string(x.size()) + ", expected " + std::to_string(dim_));
    return fn_(x);
  }

 private:
  Eigen::Index dim_ = 0;
  fn_type fn_;
  std::string name_;
};

/* Counting view over a target; one instance per chain. */
class density_eval {
 public:
  explicit density_eval(const log_density& target) : target_(&target) {}

  double operator()(const Eigen::VectorXd& x) {
    ++count_;
    return (*target_)(x);
  }

  std::uint64_t count() const { return count_; }
  const log_density& target() const { return *target_; }

 private:
  const log_density* target_;
  std::uint64_t count_ = 0;
};

namespace detail {
inline Eigen::MatrixXd target_chol(const Eigen::MatrixXd& sigma, const char* family) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw numerical_error(std::string(family) + ": scale matrix is not positive definite");
  return llt.matrixL();
}
}  // namespace detail

/* Gaussian: log rho(x) = -(x-tau)^T Sigma^{-1} (x-tau) / 2 (unnormalized). */
inline log_density gaussian_target(Eigen::VectorXd tau, const Eigen::MatrixXd& sigma) {
  Eigen::MatrixXd L = detail::target_chol(sigma, "gaussian_target");
  const Eigen::Index d = tau.size();
  return log_density(
      d,
      [tau = std::move(tau), L = std::move(L)](const Eigen::VectorXd& x) {
        return -0.5 * quadform_from_chol(L, x - tau);
      },
      "gaussian");
}

/* Elliptical with exponential radial decay: log rho(x) = -sqrt(quadform). */
inline log_density mv_exponential_target(Eigen::VectorXd tau, const Eigen::MatrixXd& sigma) {
  Eigen::MatrixXd L = detail::target_chol(sigma, "mv_exponential_target");
  const Eigen::Index d = tau.size();
  return log_density(
      d,
      [tau = std::move(tau), L = std::move(L)](const Eigen::VectorXd& x) {
        return -std::sqrt(quadform_from_chol(L, x - tau));
      },
      "mv_exponential");
}

/* Multivariate t: log rho(x) = -(d+gamma)/2 * log(1 + quadform/gamma). */
inline log_density mv_t_target(double gamma, Eigen::VectorXd tau, const Eigen::MatrixXd& sigma) {
  if (!(gamma > 0.0)) throw usage_error("mv_t_target: degrees of freedom must be positive");
  Eigen::MatrixXd L = detail::target_chol(sigma, "mv_t_target");
  const Eigen::Index d = tau.size();
  const double half_exp = 0.5 * (static_cast<double>(d) + gamma);
  return log_density(
      d,
      [tau = std::move(tau), L = std::move(L), gamma, half_exp](const Eigen::VectorXd& x) {
        return -half_exp * std::log1p(quadform_from_chol(L, x - tau) / gamma);
      },
      "mv_t");
}

/*
 * Logistic-regression posterior with isotropic Gaussian prior:
 *   log rho(w) = -||w||^2 / (2 * prior_variance) - sum_i softplus(-y_i <a_i, w>)
 * Labels must be -1 or +1; rows of A are the feature vectors.
 */
inline log_density logistic_regression_target(Eigen::MatrixXd A, Eigen::VectorXd y,
                                              double prior_variance = 100.0) {
  if (A.rows() != y.size()) throw usage_error("logistic_regression_target: row/label count mismatch");
  if (A.rows() == 0) throw usage_error("logistic_regression_target: empty data");
  if (!(prior_variance > 0.0)) throw usage_error("logistic_regression_target: prior variance must be positive");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 1.0 && y(i) != -1.0)
      throw usage_error("logistic_regression_target: labels must be -1 or +1");
  const Eigen::Index d = A.cols();
  return log_density(
      d,
      [A = std::move(A), y = std::move(y), prior_variance](const Eigen::VectorXd& w) {
        Eigen::VectorXd z = y.cwiseProduct(A * w);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) ll -= softplus(-z(i));
        return -0.5 * w.squaredNorm() / prior_variance + ll;
      },
      "logistic_regression");
}

/*
 * Measurement-noise inference model. A latent vector is observed through a
 * ladder of noisy channels z_m = x + eps_m where eps_m has the elliptical
 * exponential law with scale matrix
 *   Sigma_m[i][j] = (m+1)^2 / d  (i == j),   m(m+1) / d  (i != j),
 * i.e. high-noise strongly-correlated channels at large m. The posterior
 * under the isotropic exponential prior exp(-||x||) is
 *   log rho(x) = -||x|| - sum_m sqrt((z_m - x)^T Sigma_m^{-1} (z_m - x)).
 */
struct exp_measurement_model {
  Eigen::MatrixXd z;                  // one measurement per row
  std::vector<Eigen::MatrixXd> chol;  // lower Cholesky factor of each Sigma_m
  Eigen::VectorXd truth;              // latent vector the data was drawn from
  Eigen::VectorXd data_mean;          // column mean of z; a sensible init center
};

/*
 * Deterministic synthetic instance: truth ~ N(0, d * I), channel noise drawn
 * exactly from the elliptical exponential law (radius ~ Gamma(d, 1) as a sum
 * of d exponentials, direction uniform on the sphere).
 */
inline exp_measurement_model make_exp_measurement_model(Eigen::Index d, int n_measurements,
                                                        std::uint64_t seed) {
  if (d < 1) throw usage_error("exp_measurement_model: dimension must be positive");
  if (n_measurements < 1) throw usage_error("exp_measurement_model: need at least one measurement");
  exp_measurement_model model;
  rng_stream rng(seed, 0xDA7B);
  model.truth = std::sqrt(static_cast<double>(d)) * rng.normal_vector(d);
  model.z.resize(n_measurements, d);
  model.chol.reserve(static_cast<std::size_t>(n_measurements));
  for (int m = 1; m <= n_measurements; ++m) {
    const double dm = static_cast<double>(m);
    const double off = dm * (dm + 1.0) / static_cast<double>(d);
    const double diag = (dm + 1.0) * (dm + 1.0) / static_cast<double>(d);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(d, d, off);
    sigma.diagonal().setConstant(diag);
    model.chol.push_back(detail::target_chol(sigma, "exp_measurement_model"));

    double radius = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) radius -= std::log(rng.uniform01());
    Eigen::VectorXd dir = rng.normal_vector(d);
    while (dir.norm() == 0.0) dir = rng.normal_vector(d);
    dir /= dir.norm();
    model.z.row(m - 1) = (model.truth + model.chol.back() * (radius * dir)).transpose();
  }
  model.data_mean = model.z.colwise().mean().transpose();
  return model;
}

inline log_density exp_measurement_target(exp_measurement_model model) {
  const Eigen::Index d = model.truth.size();
  auto shared = std::make_shared<const exp_measurement_model>(std::move(model));
  return log_density(
      d,
      [shared](const Eigen::VectorXd& x) {
        double lp = -x.norm();
        for (Eigen::Index m = 0; m < shared->z.rows(); ++m) {
          Eigen::VectorXd r = shared->z.row(m).transpose() - x;
          lp -= std::sqrt(quadform_from_chol(shared->chol[static_cast<std::size_t>(m)], r));
        }
        return lp;
      },
      "exp_measurement_posterior");
}

}  // namespace patt
