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

#ifndef ROBOCOORD__NELDER_MEAD_HPP
#define ROBOCOORD__NELDER_MEAD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace robocoord {

template<std::size_t N>
using Point = std::array<double, N>;

template<std::size_t N>
struct SimplexResult
{
  Point<N> x{};
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct SimplexOptions
{
  int max_iterations = 500;
  double initial_step = 1.0;
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-9;
};

/// Minimize f with the Nelder-Mead simplex method starting at x0.
/// Non-finite objective values are treated as +infinity.
template<std::size_t N, typename F>
SimplexResult<N> nelder_mead(F&& f, const Point<N>& x0, SimplexOptions opt = {})
{
  constexpr double alpha = 1.0;
  constexpr double gamma = 2.0;
  constexpr double rho = 0.5;
  constexpr double sigma = 0.5;

  const auto eval = [&](const Point<N>& x)
    {
      const double v = f(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

  std::array<Point<N>, N + 1> s;
  std::array<double, N + 1> fs;
  s[0] = x0;
  for (std::size_t i = 0; i < N; ++i)
  {
    s[i + 1] = x0;
    s[i + 1][i] += opt.initial_step;
  }
  for (std::size_t i = 0; i <= N; ++i)
    fs[i] = eval(s[i]);

  std::array<std::size_t, N + 1> order;
  SimplexResult<N> result;
  int it = 0;
  for (; it < opt.max_iterations; ++it)
  {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
      [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });

    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[N - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= N; ++i)
      for (std::size_t k = 0; k < N; ++k)
        size = std::max(size, std::abs(s[i][k] - s[best][k]));
    if (std::abs(fs[worst] - fs[best]) <= opt.f_tolerance
      && size <= opt.x_tolerance)
      break;

    Point<N> centroid{};
    for (std::size_t i = 0; i <= N; ++i)
    {
      if (i == worst)
        continue;
      for (std::size_t k = 0; k < N; ++k)
        centroid[k] += s[i][k] / static_cast<double>(N);
    }

    const auto along = [&](double coef)
      {
        Point<N> x;
        for (std::size_t k = 0; k < N; ++k)
          x[k] = centroid[k] + coef * (s[worst][k] - centroid[k]);
        return x;
      };

    const Point<N> xr = along(-alpha);
    const double fr = eval(xr);
    if (fr < fs[best])
    {
      const Point<N> xe = along(-gamma);
      const double fe = eval(xe);
      if (fe < fr)
      {
        s[worst] = xe;
        fs[worst] = fe;
      }
      else
      {
        s[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second])
    {
      s[worst] = xr;
      fs[worst] = fr;
      continue;
    }

    const bool outside = fr < fs[worst];
    const Point<N> xc = along(outside ? -rho : rho);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst]))
    {
      s[worst] = xc;
      fs[worst] = fc;
      continue;
    }

    // shrink toward the best vertex
    for (std::size_t i = 0; i <= N; ++i)
    {
      if (i == best)
        continue;
      for (std::size_t k = 0; k < N; ++k)
        s[i][k] = s[best][k] + sigma * (s[i][k] - s[best][k]);
      fs[i] = eval(s[i]);
    }
  }

  const auto best_it = std::min_element(fs.begin(), fs.end());
  const auto bi = static_cast<std::size_t>(best_it - fs.begin());
  result.x = s[bi];
  result.value = fs[bi];
  result.iterations = it;
  return result;
}

} // namespace robocoord

#endif // ROBOCOORD__NELDER_MEAD_HPP
