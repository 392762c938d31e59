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

#ifndef ROBOCOORD__UNCERTAINTY_HPP
#define ROBOCOORD__UNCERTAINTY_HPP

#include "gp.hpp"
#include "trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace robocoord {

//==============================================================================
// Moments of the deviation processes
//==============================================================================

/// Posterior of the time deviation e at one position.
struct TimeDeviationMoments
{
  double p = 0.0;
  double mu_e = 0.0;
  double sigma_e = 0.0;
};

struct SpeedDeviationMoments
{
  double mu_g = 0.0;
  double sigma_g2 = 0.0;
};

struct PositionDeviationMoments
{
  double mu_f = 0.0;
  double sigma_f2 = 0.0;
};

/// Coefficients of g = a1 e + a2 e^2 at nominal time t.
struct SpeedDeviationCoefficients
{
  double a1 = 0.0;
  double a2 = 0.0;
};

/// Coefficients of f = a1 e + a2 e^2 + a3 e^3 at nominal time t.
struct PositionDeviationCoefficients
{
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

inline SpeedDeviationCoefficients speed_deviation_coefficients(
  const PolyCoefficients& phi, double t)
{
  return {-2.0 * phi.phi2 - 6.0 * phi.phi3 * t, -3.0 * phi.phi3};
}

inline PositionDeviationCoefficients position_deviation_coefficients(
  const PolyCoefficients& phi, double t)
{
  return {
    -3.0 * phi.phi3 * t * t - 2.0 * phi.phi2 * t - phi.phi1,
    -3.0 * phi.phi3 * t - phi.phi2,
    -phi.phi3};
}

/// Mean and variance of a1 e + a2 e^2 for e ~ N(mu, sigma^2).
inline SpeedDeviationMoments speed_deviation_moments(
  const SpeedDeviationCoefficients& a, double mu, double sigma)
{
  const double s2 = sigma * sigma;
  SpeedDeviationMoments m;
  m.mu_g = a.a1 * mu + a.a2 * (mu * mu + s2);
  m.sigma_g2 = s2 * (a.a1 * a.a1 + 4.0 * mu * (a.a1 * a.a2 + a.a2 * a.a2 * mu)
    + 2.0 * a.a2 * a.a2 * s2);
  m.sigma_g2 = std::max(m.sigma_g2, 0.0);
  return m;
}

inline SpeedDeviationMoments speed_deviation_moments(
  const PolyCoefficients& phi, double t_nominal, const TimeDeviationMoments& e)
{
  if (!(e.sigma_e >= 0.0))
    throw std::invalid_argument("time deviation sigma must be non-negative");
  return speed_deviation_moments(
    speed_deviation_coefficients(phi, t_nominal), e.mu_e, e.sigma_e);
}

/// Mean and variance of a1 e + a2 e^2 + a3 e^3 for e ~ N(mu, sigma^2).
inline PositionDeviationMoments position_deviation_moments(
  const PositionDeviationCoefficients& a, double mu, double sigma)
{
  const double s2 = sigma * sigma;
  const double mu2 = mu * mu;
  PositionDeviationMoments m;
  m.mu_f = a.a1 * mu + a.a3 * (mu2 * mu + 3.0 * mu * s2) + a.a2 * (mu2 + s2);
  m.sigma_f2 = s2 * (
    a.a1 * a.a1
    + 4.0 * a.a1 * a.a2 * mu
    + 6.0 * a.a1 * a.a3 * mu2
    + 6.0 * a.a1 * a.a3 * s2
    + 4.0 * a.a2 * a.a2 * mu2
    + 2.0 * a.a2 * a.a2 * s2
    + 12.0 * a.a2 * a.a3 * mu2 * mu
    + 24.0 * a.a2 * a.a3 * mu * s2
    + 9.0 * a.a3 * a.a3 * mu2 * mu2
    + 36.0 * a.a3 * a.a3 * mu2 * s2
    + 15.0 * a.a3 * a.a3 * s2 * s2);
  m.sigma_f2 = std::max(m.sigma_f2, 0.0);
  return m;
}

inline PositionDeviationMoments position_deviation_moments(
  const PolyCoefficients& phi, double t_nominal, const TimeDeviationMoments& e)
{
  if (!(e.sigma_e >= 0.0))
    throw std::invalid_argument("time deviation sigma must be non-negative");
  return position_deviation_moments(
    position_deviation_coefficients(phi, t_nominal), e.mu_e, e.sigma_e);
}

//==============================================================================
// Confidence intervals
//==============================================================================

/// Inverse of the error function on (-1, 1).
inline double inverse_erf(double x)
{
  if (!(x > -1.0 && x < 1.0))
    throw std::domain_error("inverse_erf needs -1 < x < 1");
  if (x == 0.0)
    return 0.0;

  // Winitzki's closed-form approximation, good to ~2e-3.
  constexpr double a = 0.147;
  const double ln = std::log1p(-x * x);
  const double b = 2.0 / (std::numbers::pi * a) + 0.5 * ln;
  double y = std::copysign(std::sqrt(std::sqrt(b * b - ln / a) - b), x);

  // Halley steps on erf(y) - x.
  for (int it = 0; it < 8; ++it)
  {
    const double r = std::erf(y) - x;
    const double d = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-y * y);
    const double step = r / (d + y * r);
    y -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(y)))
      break;
  }
  return y;
}

enum class IntervalFamily
{
  ExactNormal,
  Chebyshev,
  VysochanskiiPetunin,
};

inline std::string_view to_string(IntervalFamily f)
{
  switch (f)
  {
    case IntervalFamily::ExactNormal: return "exact-normal";
    case IntervalFamily::Chebyshev: return "chebyshev";
    case IntervalFamily::VysochanskiiPetunin: return "vysochanskii-petunin";
  }
  return "unknown";
}

struct ConfidenceInterval
{
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
  IntervalFamily family = IntervalFamily::ExactNormal;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline void check_level(double level)
{
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("confidence level must lie in (0, 1)");
}

/// Two-sided normal quantile: P(|X - mu| <= z sigma) = level.
inline double z_normal(double level)
{
  check_level(level);
  return std::numbers::sqrt2 * inverse_erf(level);
}

/// Chebyshev: coverage >= 1 - 1/z^2.
inline double z_chebyshev(double level)
{
  check_level(level);
  return 1.0 / std::sqrt(1.0 - level);
}

/// Smallest z for which the Vysochanskii-Petunin bound applies.
inline const double vp_min_z = std::sqrt(8.0 / 3.0);

/// Vysochanskii-Petunin: coverage >= 1 - 4/(9 z^2) for unimodal laws,
/// valid when z > sqrt(8/3).
inline double z_vysochanskii_petunin(double level)
{
  check_level(level);
  const double z = std::sqrt(4.0 / (9.0 * (1.0 - level)));
  if (!(z > vp_min_z))
    throw std::domain_error(
      "Vysochanskii-Petunin bound needs level > 5/6");
  return z;
}

inline ConfidenceInterval symmetric_interval(
  double mu, double sigma, double z, double level, IntervalFamily family)
{
  return {mu - z * sigma, mu + z * sigma, level, family};
}

inline ConfidenceInterval interval_time(double mu_e, double sigma_e, double level)
{
  return symmetric_interval(
    mu_e, sigma_e, z_normal(level), level, IntervalFamily::ExactNormal);
}

inline ConfidenceInterval interval_position(double mu_f, double sigma_f, double level)
{
  return symmetric_interval(
    mu_f, sigma_f, z_chebyshev(level), level, IntervalFamily::Chebyshev);
}

inline ConfidenceInterval interval_speed(double mu_g, double sigma_g, double level)
{
  return symmetric_interval(
    mu_g, sigma_g, z_vysochanskii_petunin(level), level,
    IntervalFamily::VysochanskiiPetunin);
}

struct ConfidenceLevels
{
  double p_e = 0.95;
  double p_f = 0.95;
  double p_g = 0.95;
};

//==============================================================================
// Deviation posterior along a path
//==============================================================================

/// Posterior moments of the time deviation sampled on a regular position
/// grid, with the interval multipliers for one set of confidence levels.
///
/// When anchored at a position s0, the moments describe the increment
/// e(p) - e(s0): the deviation accumulated since a plan that starts at s0.
class DeviationPosterior
{
public:
  DeviationPosterior() = default;

  static DeviationPosterior from_model(
    const GpModel& model, double start, double end, double step,
    const ConfidenceLevels& levels, bool anchored)
  {
    if (!(step > 0.0))
      throw std::invalid_argument("grid step must be positive");
    if (!(end >= start))
      throw std::invalid_argument("grid end must not precede its start");

    DeviationPosterior d(start, step, levels);
    const auto n = static_cast<std::size_t>(std::ceil((end - start) / step - 1e-9)) + 1;
    d.mean_.reserve(n);
    d.sigma_.reserve(n);

    Posterior anchor;
    if (anchored)
      anchor = posterior_at(model, start);
    for (std::size_t k = 0; k < n; ++k)
    {
      const double p = start + static_cast<double>(k) * step;
      const Posterior post = posterior_at(model, p);
      if (!anchored)
      {
        d.mean_.push_back(post.mean);
        d.sigma_.push_back(std::sqrt(post.variance));
        continue;
      }
      const double cov = posterior_covariance(model, p, start);
      const double var = post.variance + anchor.variance - 2.0 * cov;
      d.mean_.push_back(post.mean - anchor.mean);
      d.sigma_.push_back(std::sqrt(std::max(var, 0.0)));
    }
    d.end_ = start + step * static_cast<double>(n - 1);
    return d;
  }

  /// A posterior from explicit grid values.
  static DeviationPosterior from_grid(
    double start, double step, std::vector<double> mean,
    std::vector<double> sigma, const ConfidenceLevels& levels)
  {
    if (mean.empty() || mean.size() != sigma.size())
      throw std::invalid_argument("grid mean and sigma must match and be non-empty");
    DeviationPosterior d(start, step, levels);
    d.end_ = start + step * static_cast<double>(mean.size() - 1);
    d.mean_ = std::move(mean);
    d.sigma_ = std::move(sigma);
    return d;
  }

  double start() const { return start_; }
  double end() const { return end_; }
  double step() const { return step_; }
  const ConfidenceLevels& levels() const { return levels_; }
  std::size_t size() const { return mean_.size(); }

  TimeDeviationMoments at(double p) const
  {
    if (mean_.size() == 1)
      return {p, mean_.front(), sigma_.front()};
    const double x = std::clamp((p - start_) / step_, 0.0,
        static_cast<double>(mean_.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(x), mean_.size() - 2);
    const double w = x - static_cast<double>(k);
    return {
      p,
      (1.0 - w) * mean_[k] + w * mean_[k + 1],
      (1.0 - w) * sigma_[k] + w * sigma_[k + 1]};
  }

  /// E interval at position p.
  ConfidenceInterval time_interval(double p) const
  {
    const auto m = at(p);
    return symmetric_interval(
      m.mu_e, m.sigma_e, z_e_, levels_.p_e, IntervalFamily::ExactNormal);
  }

  /// F interval at nominal time t of the plan phi.
  ConfidenceInterval position_interval(const PolyCoefficients& phi, double t) const
  {
    const auto m = at(position(phi, t));
    const auto f = position_deviation_moments(
      position_deviation_coefficients(phi, t), m.mu_e, m.sigma_e);
    return symmetric_interval(
      f.mu_f, std::sqrt(f.sigma_f2), z_f_, levels_.p_f, IntervalFamily::Chebyshev);
  }

  /// G interval at nominal time t of the plan phi.
  ConfidenceInterval speed_interval(const PolyCoefficients& phi, double t) const
  {
    const auto m = at(position(phi, t));
    const auto g = speed_deviation_moments(
      speed_deviation_coefficients(phi, t), m.mu_e, m.sigma_e);
    return symmetric_interval(
      g.mu_g, std::sqrt(g.sigma_g2), z_g_, levels_.p_g,
      IntervalFamily::VysochanskiiPetunin);
  }

private:
  DeviationPosterior(double start, double step, const ConfidenceLevels& levels)
  : start_(start),
    end_(start),
    step_(step),
    levels_(levels),
    z_e_(z_normal(levels.p_e)),
    z_f_(z_chebyshev(levels.p_f)),
    z_g_(z_vysochanskii_petunin(levels.p_g))
  {
  }

  double start_ = 0.0;
  double end_ = 0.0;
  double step_ = 1.0;
  ConfidenceLevels levels_;
  double z_e_ = 0.0;
  double z_f_ = 0.0;
  double z_g_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> sigma_;
};

//==============================================================================
// Confidence tube
//==============================================================================

struct TubeSample
{
  double p = 0.0;
  double t_nominal = 0.0;
  ConfidenceInterval e;
  ConfidenceInterval f;
  ConfidenceInterval g;
};

struct ConfidenceTube
{
  ConfidenceLevels levels;
  std::vector<TubeSample> samples;
};

/// Materialize the E/F/G tube of a plan on the posterior's position grid.
inline ConfidenceTube build_tube(
  const DeviationPosterior& posterior, const PolyCoefficients& phi,
  const BoundaryConditions& bc)
{
  ConfidenceTube tube;
  tube.levels = posterior.levels();
  const double step = posterior.step();
  const auto n = static_cast<std::size_t>(
    std::ceil((bc.pf - bc.p0) / step - 1e-9)) + 1;
  tube.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
  {
    const double p = std::min(bc.p0 + static_cast<double>(k) * step, bc.pf);
    const double t = time_at_position(phi, bc, p);
    tube.samples.push_back({
        p, t,
        posterior.time_interval(p),
        posterior.position_interval(phi, t),
        posterior.speed_interval(phi, t)});
  }
  return tube;
}

/// Tube of a plan straight from a fitted GP model. Plans that start part-way
/// along the path get a posterior anchored at their start position.
inline ConfidenceTube build_tube(
  const GpModel& model, const PolyCoefficients& phi,
  const BoundaryConditions& bc, double grid_step,
  const ConfidenceLevels& levels)
{
  const auto posterior = DeviationPosterior::from_model(
    model, bc.p0, bc.pf, grid_step, levels, bc.p0 > 0.0);
  return build_tube(posterior, phi, bc);
}

} // namespace robocoord

#endif // ROBOCOORD__UNCERTAINTY_HPP
