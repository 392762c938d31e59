/*
 * Copyright (C) 2026 The robocoord Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

#ifndef ROBOCOORD__GP_HPP
#define ROBOCOORD__GP_HPP

#include "nelder_mead.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace robocoord {

/// Raised when the kernel matrix cannot be factored or no hyperparameter
/// candidate yields a usable model.
class GpError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Observed time-trajectory errors: at position[j] the vehicle measured a
/// deviation error[j] from its nominal time trajectory.
struct ObservationSet
{
  std::vector<double> position;
  std::vector<double> error;

  std::size_t size() const { return position.size(); }

  void validate() const
  {
    if (position.size() != error.size())
      throw std::invalid_argument("observation positions and errors differ in length");
    if (position.empty())
      throw std::invalid_argument("observation set is empty");
    for (std::size_t j = 0; j < position.size(); ++j)
    {
      if (!std::isfinite(position[j]) || !std::isfinite(error[j]))
        throw std::invalid_argument("observations must be finite");
      if (j > 0 && !(position[j] > position[j - 1]))
        throw std::invalid_argument(
          "observation positions must be strictly increasing");
    }
  }
};

struct Hyperparameters
{
  double sigma_s2 = 1.0; ///< process variance [s^2]
  double sigma_n2 = 1e-4; ///< observation noise variance [s^2]
  double ell_s = 1.0; ///< length scale [m]

  bool valid() const
  {
    return sigma_s2 > 0.0 && sigma_n2 > 0.0 && ell_s > 0.0
           && std::isfinite(sigma_s2) && std::isfinite(sigma_n2)
           && std::isfinite(ell_s);
  }
};

/// Diagonal jitter added before every factorization.
inline constexpr double kernel_jitter = 1e-12;

/// Matern covariance with smoothness 3/2.
inline double kernel(double p, double p_prime, const Hyperparameters& theta)
{
  const double x = std::numbers::sqrt3 * std::abs(p - p_prime) / theta.ell_s;
  return theta.sigma_s2 * (1.0 + x) * std::exp(-x);
}

inline Eigen::MatrixXd kernel_matrix(
  std::span<const double> positions, const Hyperparameters& theta)
{
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    K(i, i) = theta.sigma_s2;
    for (Eigen::Index j = 0; j < i; ++j)
      K(i, j) = K(j, i) = kernel(positions[i], positions[j], theta);
  }
  return K;
}

/// A Gaussian-process regression model conditioned on one observation set.
/// Immutable once built; safe to query from several threads.
class GpModel
{
public:
  GpModel(const ObservationSet& obs, const Hyperparameters& theta)
  : theta_(theta),
    positions_(obs.position)
  {
    obs.validate();
    if (!theta.valid())
      throw std::invalid_argument("GP hyperparameters must be positive");

    Eigen::MatrixXd A = kernel_matrix(positions_, theta_);
    A.diagonal().array() += theta_.sigma_n2 + kernel_jitter;
    factor_.compute(A);
    if (factor_.info() != Eigen::Success)
      throw GpError("kernel matrix is not positive definite");

    const Eigen::Map<const Eigen::VectorXd> y(
      obs.error.data(), static_cast<Eigen::Index>(obs.error.size()));
    alpha_ = factor_.solve(y);
    if (!alpha_.allFinite())
      throw GpError("kernel solve produced non-finite weights");
  }

  const Hyperparameters& theta() const { return theta_; }
  const std::vector<double>& positions() const { return positions_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::LLT<Eigen::MatrixXd>& factor() const { return factor_; }

  Eigen::VectorXd cross_covariance(double p) const
  {
    Eigen::VectorXd k(static_cast<Eigen::Index>(positions_.size()));
    for (std::size_t j = 0; j < positions_.size(); ++j)
      k[static_cast<Eigen::Index>(j)] = kernel(positions_[j], p, theta_);
    return k;
  }

private:
  Hyperparameters theta_;
  std::vector<double> positions_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::VectorXd alpha_;
};

struct Posterior
{
  double mean = 0.0;
  double variance = 0.0;
};

/// Posterior of the deviation at p_star under a zero prior mean.
inline Posterior posterior_at(const GpModel& model, double p_star)
{
  const Eigen::VectorXd k = model.cross_covariance(p_star);
  const double mean = k.dot(model.alpha());
  const Eigen::VectorXd w = model.factor().matrixL().solve(k);
  const double var = kernel(p_star, p_star, model.theta()) - w.squaredNorm();
  return {mean, std::max(var, 0.0)};
}

/// Posterior covariance between the deviations at p and q.
inline double posterior_covariance(const GpModel& model, double p, double q)
{
  const Eigen::VectorXd kp = model.cross_covariance(p);
  const Eigen::VectorXd kq = model.cross_covariance(q);
  const Eigen::VectorXd wp = model.factor().matrixL().solve(kp);
  const Eigen::VectorXd wq = model.factor().matrixL().solve(kq);
  return kernel(p, q, model.theta()) - wp.dot(wq);
}

/// log p(errors | positions, theta) evaluated through a Cholesky factor.
inline double log_marginal_likelihood(
  const Hyperparameters& theta, const ObservationSet& obs)
{
  obs.validate();
  if (!theta.valid())
    throw std::invalid_argument("GP hyperparameters must be positive");

  Eigen::MatrixXd A = kernel_matrix(obs.position, theta);
  A.diagonal().array() += theta.sigma_n2 + kernel_jitter;
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw GpError("kernel matrix is not positive definite");

  const Eigen::Map<const Eigen::VectorXd> y(
    obs.error.data(), static_cast<Eigen::Index>(obs.error.size()));
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  const Eigen::MatrixXd& L = llt.matrixLLT();
  double half_log_det = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i)
    half_log_det += std::log(L(i, i));

  const double n = static_cast<double>(obs.size());
  const double value = -0.5 * z.squaredNorm() - half_log_det
    - 0.5 * n * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(value))
    throw GpError("log marginal likelihood is not finite");
  return value;
}

struct FitOptions
{
  std::uint64_t seed = 0;
  int restarts = 8;
  int iterations = 500;
  // Box on (log sigma_s2, log sigma_n2, log ell_s).
  Point<3> log_lower{-20.0, -20.0, -3.0};
  Point<3> log_upper{2.0, 2.0, 8.0};
};

struct FitResult
{
  Hyperparameters theta;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Maximum-likelihood hyperparameters by multi-start simplex search in
/// log space. The returned point is the best of every evaluated candidate.
inline FitResult fit_hyperparameters(
  const ObservationSet& obs, const FitOptions& opt = {})
{
  obs.validate();
  if (obs.size() < 2)
    throw std::invalid_argument("fitting needs at least two observations");

  const auto to_theta = [](const Point<3>& x)
    {
      return Hyperparameters{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
    };

  FitResult best;
  const auto objective = [&](const Point<3>& x)
    {
      Point<3> clamped;
      double outside = 0.0;
      for (std::size_t k = 0; k < 3; ++k)
      {
        clamped[k] = std::clamp(x[k], opt.log_lower[k], opt.log_upper[k]);
        outside += std::abs(x[k] - clamped[k]);
      }
      ++best.evaluations;
      double lml = 0.0;
      try
      {
        lml = log_marginal_likelihood(to_theta(clamped), obs);
      }
      catch (const GpError&)
      {
        return std::numeric_limits<double>::infinity();
      }
      // Strict improvement keeps the earliest candidate on ties.
      if (lml > best.log_likelihood)
      {
        best.log_likelihood = lml;
        best.theta = to_theta(clamped);
      }
      return -lml + 1e3 * outside;
    };

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SimplexOptions simplex;
  simplex.max_iterations = opt.iterations;
  for (int r = 0; r < opt.restarts; ++r)
  {
    Point<3> x0;
    for (std::size_t k = 0; k < 3; ++k)
      x0[k] = opt.log_lower[k] + unit(rng) * (opt.log_upper[k] - opt.log_lower[k]);
    nelder_mead<3>(objective, x0, simplex);
  }

  if (!std::isfinite(best.log_likelihood))
    throw GpError("no hyperparameter candidate produced a valid model");
  return best;
}

} // namespace robocoord

#endif // ROBOCOORD__GP_HPP
