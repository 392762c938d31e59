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

#ifndef ROBOCOORD__TRAJECTORY_HPP
#define ROBOCOORD__TRAJECTORY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace robocoord {

/// Raised when an exit-time window or a robust plan has no feasible solution.
class InfeasibleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Below this magnitude the cubic term is treated as absent.
inline constexpr double degenerate_cubic_eps = 1e-12;

/// Coefficients of the nominal position polynomial
///   p(t) = phi3 t^3 + phi2 t^2 + phi1 t + phi0
/// expressed in absolute simulation time.
struct PolyCoefficients
{
  double phi3 = 0.0;
  double phi2 = 0.0;
  double phi1 = 0.0;
  double phi0 = 0.0;
  bool degenerate = false;
};

/// Boundary conditions of one plan segment.
///
/// A plan made on entry starts at p0 = 0. A plan made later (after a
/// replanning event) starts at the vehicle's position at that moment.
struct BoundaryConditions
{
  double t0 = 0.0;
  double v0 = 0.0;
  double tf = 0.0;
  double pf = 0.0;
  double p0 = 0.0;

  double duration() const { return tf - t0; }
  double distance() const { return pf - p0; }
};

struct MotionLimits
{
  double u_min = -2.0;
  double u_max = 2.0;
  double v_min = 0.25;
  double v_max = 30.0;
};

/// Depressed-cubic form of p(t) = p. Substituting t = s + omega3 gives
///   s^3 + omega0 s + (omega1 + omega2 p) = 0.
struct CardanoContext
{
  double omega0 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega3 = 0.0;
};

struct State
{
  double p = 0.0;
  double v = 0.0;
  double u = 0.0;
};

struct Range
{
  double lo = 0.0;
  double hi = 0.0;
};

inline void validate(const BoundaryConditions& bc)
{
  if (!(std::isfinite(bc.t0) && std::isfinite(bc.tf) && std::isfinite(bc.v0)
    && std::isfinite(bc.pf) && std::isfinite(bc.p0)))
    throw std::invalid_argument("boundary conditions must be finite");
  if (!(bc.tf > bc.t0) || bc.t0 < 0.0)
    throw std::invalid_argument("boundary conditions require tf > t0 >= 0");
  if (!(bc.pf > bc.p0) || bc.p0 < 0.0)
    throw std::invalid_argument("boundary conditions require pf > p0 >= 0");
  if (!(bc.v0 > 0.0))
    throw std::invalid_argument("boundary conditions require v0 > 0");
}

inline void validate(const MotionLimits& lim)
{
  if (!(lim.u_min < 0.0 && 0.0 < lim.u_max))
    throw std::invalid_argument("motion limits require u_min < 0 < u_max");
  if (!(0.0 < lim.v_min && lim.v_min < lim.v_max))
    throw std::invalid_argument("motion limits require 0 < v_min < v_max");
}

/// Unconstrained energy-optimal cubic through p(t0)=p0, v(t0)=v0,
/// p(tf)=pf, u(tf)=0.
inline PolyCoefficients solve_coefficients(const BoundaryConditions& bc)
{
  validate(bc);
  const double T = bc.duration();
  const double d = bc.distance();

  // Local time tau = t - t0: p = a tau^3 + b tau^2 + v0 tau + p0.
  const double a = (bc.v0 * T - d) / (2.0 * T * T * T);
  const double b = -3.0 * a * T;
  const double s = bc.t0;

  PolyCoefficients phi;
  phi.degenerate = std::abs(a) < degenerate_cubic_eps;
  if (phi.degenerate)
  {
    phi.phi3 = 0.0;
    phi.phi2 = 0.0;
    phi.phi1 = bc.v0;
    phi.phi0 = bc.p0 - bc.v0 * s;
    return phi;
  }

  phi.phi3 = a;
  phi.phi2 = b - 3.0 * a * s;
  phi.phi1 = 3.0 * a * s * s - 2.0 * b * s + bc.v0;
  phi.phi0 = -a * s * s * s + b * s * s - bc.v0 * s + bc.p0;
  return phi;
}

inline double position(const PolyCoefficients& phi, double t)
{
  return ((phi.phi3 * t + phi.phi2) * t + phi.phi1) * t + phi.phi0;
}

inline double speed(const PolyCoefficients& phi, double t)
{
  return (3.0 * phi.phi3 * t + 2.0 * phi.phi2) * t + phi.phi1;
}

inline double control(const PolyCoefficients& phi, double t)
{
  return 6.0 * phi.phi3 * t + 2.0 * phi.phi2;
}

inline State eval_state(const PolyCoefficients& phi, double t)
{
  return {position(phi, t), speed(phi, t), control(phi, t)};
}

inline CardanoContext cardano_context(const PolyCoefficients& phi)
{
  if (phi.degenerate || std::abs(phi.phi3) < degenerate_cubic_eps)
    throw std::domain_error("Cardano reduction needs a non-zero cubic term");

  const double r2 = phi.phi2 / phi.phi3;
  const double r1 = phi.phi1 / phi.phi3;
  CardanoContext c;
  c.omega0 = r1 - r2 * r2 / 3.0;
  c.omega1 = (2.0 * r2 * r2 * r2 - 9.0 * r2 * r1) / 27.0 + phi.phi0 / phi.phi3;
  c.omega2 = -1.0 / phi.phi3;
  c.omega3 = -r2 / 3.0;
  return c;
}

namespace detail {

/// Root of p(t) = target on [t_lo, t_hi] for a position that increases on
/// that interval.
inline double bisect_time(
  const PolyCoefficients& phi, double target, double t_lo, double t_hi)
{
  double lo = t_lo;
  double hi = t_hi;
  if (position(phi, lo) >= target)
    return lo;
  if (position(phi, hi) <= target)
    return hi;

  for (int it = 0; it < 200 && hi - lo > 0.0; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (position(phi, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double r_lo = target - position(phi, lo);
  const double r_hi = position(phi, hi) - target;
  return r_lo <= r_hi ? lo : hi;
}

inline double newton_polish(const PolyCoefficients& phi, double target, double t)
{
  for (int it = 0; it < 3; ++it)
  {
    const double v = speed(phi, t);
    if (!(v > 0.0))
      break;
    const double step = (position(phi, t) - target) / v;
    t -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(t)))
      break;
  }
  return t;
}

inline bool accept_root(
  const PolyCoefficients& phi, const BoundaryConditions& bc,
  double target, double t)
{
  const double slack = 1e-9;
  return std::isfinite(t)
         && t >= bc.t0 - slack && t <= bc.tf + slack
         && std::abs(position(phi, t) - target) <= 1e-9;
}

} // namespace detail

/// Closed-form root of p(t) = p for a non-degenerate cubic, valid when
/// the discriminant is positive. Returns NaN otherwise.
inline double cardano_time(const PolyCoefficients& phi, double p)
{
  const CardanoContext c = cardano_context(phi);
  const double q = c.omega1 + c.omega2 * p;
  const double disc = 0.25 * q * q + c.omega0 * c.omega0 * c.omega0 / 27.0;
  if (!(disc > 0.0))
    return std::nan("");

  // Pick the cube-root branch that avoids cancellation; the two cube roots
  // multiply to -omega0/3.
  const double sq = std::sqrt(disc);
  const double w = q >= 0.0 ? -0.5 * q - sq : -0.5 * q + sq;
  const double u = std::cbrt(w);
  const double v = u != 0.0 ? -c.omega0 / (3.0 * u) : std::cbrt(-q);
  return u + v + c.omega3;
}

/// Time at which the nominal plan reaches position p.
///
/// Requires the plan to be strictly increasing on [t0, tf].
inline double time_at_position(
  const PolyCoefficients& phi, const BoundaryConditions& bc, double p)
{
  const double tol = 1e-9;
  if (!(p >= bc.p0 - tol && p <= bc.pf + tol))
    throw std::domain_error(
      "position " + std::to_string(p) + " outside plan range ["
      + std::to_string(bc.p0) + ", " + std::to_string(bc.pf) + "]");
  p = std::clamp(p, bc.p0, bc.pf);

  if (!phi.degenerate && std::abs(phi.phi3) >= degenerate_cubic_eps)
  {
    const double t = cardano_time(phi, p);
    if (std::isfinite(t))
    {
      const double polished = detail::newton_polish(phi, p, t);
      if (detail::accept_root(phi, bc, p, polished))
        return std::clamp(polished, bc.t0, bc.tf);
    }
  }
  else if (std::abs(phi.phi2) < degenerate_cubic_eps)
  {
    const double t = (p - phi.phi0) / phi.phi1;
    if (detail::accept_root(phi, bc, p, t))
      return std::clamp(t, bc.t0, bc.tf);
  }
  else
  {
    // phi2 t^2 + phi1 t + (phi0 - p) = 0, root on the increasing branch
    const double c = phi.phi0 - p;
    const double disc = phi.phi1 * phi.phi1 - 4.0 * phi.phi2 * c;
    if (disc >= 0.0)
    {
      const double sq = std::sqrt(disc);
      const double qq = -0.5 * (phi.phi1 + std::copysign(sq, phi.phi1));
      for (const double t : {qq / phi.phi2, c / qq})
      {
        const double polished = detail::newton_polish(phi, p, t);
        if (detail::accept_root(phi, bc, p, polished))
          return std::clamp(polished, bc.t0, bc.tf);
      }
    }
  }

  return detail::bisect_time(phi, p, bc.t0, bc.tf);
}

/// Exact extrema of the speed over [t0, tf].
inline Range speed_range(const PolyCoefficients& phi, double t0, double tf)
{
  double lo = std::min(speed(phi, t0), speed(phi, tf));
  double hi = std::max(speed(phi, t0), speed(phi, tf));
  if (!phi.degenerate && phi.phi3 != 0.0)
  {
    const double t_star = -phi.phi2 / (3.0 * phi.phi3);
    if (t_star > t0 && t_star < tf)
    {
      const double v = speed(phi, t_star);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

/// The control input is linear in time, so its extrema sit at the endpoints.
inline Range control_range(const PolyCoefficients& phi, double t0, double tf)
{
  const double a = control(phi, t0);
  const double b = control(phi, tf);
  return {std::min(a, b), std::max(a, b)};
}

inline bool within_limits(
  const PolyCoefficients& phi, double t0, double tf, const MotionLimits& lim)
{
  const Range v = speed_range(phi, t0, tf);
  const Range u = control_range(phi, t0, tf);
  return v.lo >= lim.v_min && v.hi <= lim.v_max
         && u.lo >= lim.u_min && u.hi <= lim.u_max;
}

/// Bisection tolerance for the exit-time window boundaries [s].
inline constexpr double exit_window_tolerance = 1e-6;

/// Interval of exit times whose unconstrained cubic respects the speed and
/// control limits. The window is the connected set of feasible exit times
/// around the constant-speed solution, which is always feasible.
inline Range feasible_exit_window(
  double t0, double v0, double distance, const MotionLimits& lim)
{
  validate(lim);
  if (!(distance > 0.0))
    throw std::invalid_argument("exit window needs a positive distance");
  if (!(v0 >= lim.v_min && v0 <= lim.v_max))
    throw InfeasibleError(
      "initial speed " + std::to_string(v0) + " outside speed limits");

  const auto feasible = [&](double tf)
    {
      const BoundaryConditions bc{t0, v0, tf, distance, 0.0};
      return within_limits(solve_coefficients(bc), t0, tf, lim);
    };

  const double t_const = t0 + distance / v0;
  if (!feasible(t_const))
    throw InfeasibleError("constant-speed plan violates the motion limits");

  // Lower boundary: between the fastest conceivable time and t_const.
  double lo = t0 + distance / lim.v_max;
  double tf_lo = lo;
  if (!feasible(lo))
  {
    double hi = t_const;
    while (hi - lo > exit_window_tolerance)
    {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
    tf_lo = hi;
  }

  // Upper boundary: between t_const and the slowest conceivable time.
  double hi = t0 + distance / lim.v_min;
  double tf_hi = hi;
  if (!feasible(hi))
  {
    double l = t_const;
    while (hi - l > exit_window_tolerance)
    {
      const double mid = 0.5 * (l + hi);
      (feasible(mid) ? l : hi) = mid;
    }
    tf_hi = l;
  }

  return {tf_lo, tf_hi};
}

} // namespace robocoord

#endif // ROBOCOORD__TRAJECTORY_HPP
