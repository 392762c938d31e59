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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <robocoord/robocoord.hpp>

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace robocoord;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail)
{
  fmt::print("{} {} {}: {}\n", ok ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// A random plan that moves forward over its whole horizon.
BoundaryConditions random_plan(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> t0(0.0, 20.0);
  std::uniform_real_distribution<double> v0(5.0, 20.0);
  std::uniform_real_distribution<double> p0(0.0, 60.0);
  std::uniform_real_distribution<double> dist(100.0, 400.0);
  std::uniform_real_distribution<double> stretch(0.8, 1.3);
  for (;;)
  {
    BoundaryConditions bc;
    bc.t0 = t0(rng);
    bc.v0 = v0(rng);
    bc.p0 = p0(rng);
    const double d = dist(rng);
    bc.pf = bc.p0 + d;
    bc.tf = bc.t0 + stretch(rng) * d / bc.v0;
    const auto phi = solve_coefficients(bc);
    if (speed_range(phi, bc.t0, bc.tf).lo > 0.5)
      return bc;
  }
}

//------------------------------------------------------------------------------
void criterion_moments()
{
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int draws = 100;
  const int samples = 1000000;
  double worst_mean = 0.0, worst_var = 0.0, worst_var_f_large = 0.0;
  bool ok = true;

  for (int d = 0; d < draws; ++d)
  {
    const auto bc = random_plan(rng);
    const auto phi = solve_coefficients(bc);
    const double t = bc.t0 + unit(rng) * (bc.tf - bc.t0);
    const double mu = -0.5 + unit(rng);
    const double sigma = 0.01 + 0.99 * unit(rng);
    const bool large = sigma > 0.5;

    // Push samples of e through the plan itself: f = p(t) - p(t + e) and
    // g = v(t) - v(t + e).
    std::normal_distribution<double> e_dist(mu, sigma);
    double sf = 0.0, sf2 = 0.0, sg = 0.0, sg2 = 0.0;
    const double p_t = position(phi, t);
    const double v_t = speed(phi, t);
    for (int k = 0; k < samples; ++k)
    {
      const double e = e_dist(rng);
      const double f = p_t - position(phi, t + e);
      const double g = v_t - speed(phi, t + e);
      sf += f;
      sf2 += f * f;
      sg += g;
      sg2 += g * g;
    }
    const double n = samples;
    const double mf = sf / n, mg = sg / n;
    const double vf = (sf2 - n * mf * mf) / (n - 1.0);
    const double vg = (sg2 - n * mg * mg) / (n - 1.0);

    const TimeDeviationMoments e{0.0, mu, sigma};
    const auto fm = position_deviation_moments(phi, t, e);
    const auto gm = speed_deviation_moments(phi, t, e);

    // Mean errors are taken relative to the larger of |mean| and the spread.
    const double ef = std::abs(mf - fm.mu_f) / std::max(std::abs(fm.mu_f), std::sqrt(fm.sigma_f2));
    const double eg = std::abs(mg - gm.mu_g) / std::max(std::abs(gm.mu_g), std::sqrt(gm.sigma_g2));
    const double evf = std::abs(vf - fm.sigma_f2) / fm.sigma_f2;
    const double evg = std::abs(vg - gm.sigma_g2) / gm.sigma_g2;

    worst_mean = std::max({worst_mean, ef, eg});
    worst_var = std::max(worst_var, evg);
    if (large)
      worst_var_f_large = std::max(worst_var_f_large, evf);
    else
      worst_var = std::max(worst_var, evf);
    if (ef > 0.01 || eg > 0.01 || evg > 0.01 || evf > (large ? 0.03 : 0.01))
      ok = false;
  }
  const double secs = seconds_since(start);
  ok = ok && secs < 60.0;
  report(1, "moment formulas vs Monte-Carlo", ok, fmt::format(
      "{} draws x {} samples, max rel err mean {:.4f}, var {:.4f} (tol 0.01), "
      "position var at sigma_e > 0.5 {:.4f} (tol 0.03), {:.1f} s (limit 60 s)",
      draws, samples, worst_mean, worst_var, worst_var_f_large, secs));
}

//------------------------------------------------------------------------------
double bisect_oracle(const PolyCoefficients& phi, double a, double b, double p)
{
  for (int k = 0; k < 200; ++k)
  {
    const double m = 0.5 * (a + b);
    if (position(phi, m) < p)
      a = m;
    else
      b = m;
    if (b - a < 1e-14)
      break;
  }
  return 0.5 * (a + b);
}

void criterion_trajectory()
{
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = 10000;
  double worst_bc = 0.0, worst_trip = 0.0, worst_cardano = 0.0;
  int cardano_cases = 0;
  for (int k = 0; k < n; ++k)
  {
    const auto bc = random_plan(rng);
    const auto phi = solve_coefficients(bc);
    worst_bc = std::max({worst_bc,
          std::abs(position(phi, bc.t0) - bc.p0),
          std::abs(speed(phi, bc.t0) - bc.v0),
          std::abs(position(phi, bc.tf) - bc.pf),
          std::abs(control(phi, bc.tf))});

    const double t = bc.t0 + unit(rng) * (bc.tf - bc.t0);
    const double p = position(phi, t);
    worst_trip = std::max(worst_trip, std::abs(time_at_position(phi, bc, p) - t));

    const double tc = cardano_time(phi, p);
    if (std::isfinite(tc))
    {
      ++cardano_cases;
      worst_cardano = std::max(
        worst_cardano, std::abs(tc - bisect_oracle(phi, bc.t0, bc.tf, p)));
    }
  }
  const double secs = seconds_since(start);
  const bool ok = worst_bc <= 1e-9 && worst_trip <= 1e-9 && worst_cardano <= 1e-9
                  && cardano_cases > 0 && secs < 10.0;
  report(2, "trajectory algebra", ok, fmt::format(
      "{} plans, boundary residual {:.2e}, round-trip {:.2e}, closed form vs "
      "bisection {:.2e} on {} cases (tol 1e-9), {:.2f} s (limit 10 s)",
      n, worst_bc, worst_trip, worst_cardano, cardano_cases, secs));
}

//------------------------------------------------------------------------------
void criterion_gp()
{
  const auto start = Clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Dense oracle: explicit Matern-3/2 covariance and a full-pivot LU inverse.
  const auto matern = [](double a, double b, double s2, double ell)
    {
      const double r = std::sqrt(3.0) * std::abs(a - b) / ell;
      return s2 * (1.0 + r) * std::exp(-r);
    };
  double worst_dense = 0.0;
  for (int trial = 0; trial < 200; ++trial)
  {
    const int n = 1 + trial % 5;
    ObservationSet obs;
    for (int j = 0; j < n; ++j)
    {
      obs.position.push_back(10.0 * j + 5.0 * unit(rng));
      obs.error.push_back(0.2 * (unit(rng) - 0.5));
    }
    Hyperparameters th;
    th.sigma_s2 = 0.01 + unit(rng);
    th.sigma_n2 = 0.01 + 0.1 * unit(rng);
    th.ell_s = 2.0 + 30.0 * unit(rng);
    const GpModel model(obs, th);

    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i)
    {
      y[i] = obs.error[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j)
        K(i, j) = matern(obs.position[static_cast<std::size_t>(i)],
            obs.position[static_cast<std::size_t>(j)], th.sigma_s2, th.ell_s)
          + (i == j ? th.sigma_n2 : 0.0);
    }
    const Eigen::MatrixXd Kinv = K.fullPivLu().inverse();
    for (int q = 0; q < 5; ++q)
    {
      const double ps = 60.0 * unit(rng);
      Eigen::VectorXd k(n);
      for (int i = 0; i < n; ++i)
        k[i] = matern(obs.position[static_cast<std::size_t>(i)], ps, th.sigma_s2, th.ell_s);
      const double mean = k.dot(Kinv * y);
      const double var = th.sigma_s2 - k.dot(Kinv * k);
      const Posterior post = posterior_at(model, ps);
      worst_dense = std::max({worst_dense, std::abs(post.mean - mean),
            std::abs(post.variance - var)});
    }
  }

  // Almost noise-free data is reproduced at the training points.
  double worst_interp = 0.0;
  {
    ObservationSet obs;
    for (int j = 1; j <= 5; ++j)
    {
      obs.position.push_back(8.0 * j);
      obs.error.push_back(0.01 * j * j);
    }
    const GpModel model(obs, {1.0, 1e-10, 15.0});
    for (std::size_t j = 0; j < obs.size(); ++j)
      worst_interp = std::max(worst_interp,
          std::abs(posterior_at(model, obs.position[j]).mean - obs.error[j]));
  }

  // Coverage of the fitted 95% time tube against the true deviation.
  const GroundTruthDeviation truth;
  int covered = 0, total = 0, worst_seed = 100;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
  {
    std::mt19937_64 data_rng(seed);
    const ObservationSet obs = observe(truth, 50, 50.0, 0.005, data_rng);
    FitOptions opt;
    opt.seed = seed;
    const GpModel model(obs, fit_hyperparameters(obs, opt).theta);
    int hit = 0;
    for (int k = 0; k < 100; ++k)
    {
      const double p = 400.0 * k / 99.0;
      const Posterior post = posterior_at(model, p);
      if (interval_time(post.mean, std::sqrt(post.variance), 0.95).contains(truth(p)))
        ++hit;
    }
    covered += hit;
    total += 100;
    worst_seed = std::min(worst_seed, hit);
    per_seed += fmt::format("{}{}", per_seed.empty() ? "" : " ", hit);
  }
  const double pooled = static_cast<double>(covered) / total;
  const double secs = seconds_since(start);
  const bool ok = worst_dense <= 1e-10 && worst_interp <= 1e-6 && pooled >= 0.90
                  && secs < 120.0;
  report(3, "Gaussian process", ok, fmt::format(
      "dense-inverse diff {:.2e} (tol 1e-10), interpolation {:.2e}, pooled "
      "coverage {:.3f} over 20 seeds (need 0.90; per seed [{}], min {}), "
      "{:.1f} s (limit 120 s)",
      worst_dense, worst_interp, pooled, per_seed, worst_seed, secs));
}

//------------------------------------------------------------------------------
void criterion_intervals()
{
  const double zn = z_normal(0.95);
  const double zc = z_chebyshev(0.95);
  const double zv = z_vysochanskii_petunin(0.95);
  bool ok = std::abs(zn - 1.959964) <= 1e-5 && std::abs(zc - 4.472136) <= 1e-6
            && std::abs(zv - 2.981424) <= 1e-6;
  // The closed forms themselves, to machine precision.
  ok = ok && std::abs(zc - std::sqrt(20.0)) <= 1e-9
       && std::abs(zv - std::sqrt(4.0 / (9.0 * 0.05))) <= 1e-9;

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int samples = 100000;
  double min_f = 1.0, min_g = 1.0;
  for (int d = 0; d < 20; ++d)
  {
    const auto bc = random_plan(rng);
    const auto phi = solve_coefficients(bc);
    const double t = bc.t0 + unit(rng) * (bc.tf - bc.t0);
    const double mu = -0.3 + 0.6 * unit(rng);
    const double sigma = 0.02 + 0.8 * unit(rng);
    const TimeDeviationMoments e{0.0, mu, sigma};
    const auto fm = position_deviation_moments(phi, t, e);
    const auto gm = speed_deviation_moments(phi, t, e);
    const auto fi = interval_position(fm.mu_f, std::sqrt(fm.sigma_f2), 0.95);
    const auto gi = interval_speed(gm.mu_g, std::sqrt(gm.sigma_g2), 0.95);
    std::normal_distribution<double> e_dist(mu, sigma);
    int in_f = 0, in_g = 0;
    for (int k = 0; k < samples; ++k)
    {
      const double x = e_dist(rng);
      in_f += fi.contains(position(phi, t) - position(phi, t + x));
      in_g += gi.contains(speed(phi, t) - speed(phi, t + x));
    }
    min_f = std::min(min_f, static_cast<double>(in_f) / samples);
    min_g = std::min(min_g, static_cast<double>(in_g) / samples);
  }
  ok = ok && min_f >= 0.95 && min_g >= 0.95;
  report(4, "interval constants", ok, fmt::format(
      "z normal {:.7f}, Chebyshev {:.9f}, VP {:.9f}; min coverage over 20 draws "
      "x {} samples: position {:.4f}, speed {:.4f} (need 0.95)",
      zn, zc, zv, samples, min_f, min_g));
}

//------------------------------------------------------------------------------
ScenarioConfig scenario(Mode mode, std::uint64_t seed)
{
  ScenarioConfig cfg;
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

void criterion_robust(const RunResult& r, double secs)
{
  const auto& m = r.metrics;
  const bool ok = m.lateral_violations == 0 && m.rear_end_violations == 0
                  && m.n_cavs == 24 && secs < 120.0;
  report(5, "robust end-to-end", ok, fmt::format(
      "seed {}, {} vehicles, lateral violations {}, rear-end violations {}, "
      "min lateral slack {:.4f} s, min rear-end slack {:.4f} m, {:.1f} s (limit 120 s)",
      r.seed, m.n_cavs, m.lateral_violations, m.rear_end_violations,
      m.min_lateral_slack, m.min_rear_end_slack, secs));
}

void criterion_deterministic()
{
  std::uint64_t found = 0;
  int crossings = 0;
  double slack = 0.0;
  for (std::uint64_t seed = 1; seed <= 20 && !found; ++seed)
  {
    const auto r = run(scenario(Mode::Deterministic, seed));
    if (r.metrics.tube_lateral_crossings > 0)
    {
      found = seed;
      crossings = r.metrics.tube_lateral_crossings;
      slack = r.metrics.min_tube_lateral_slack;
    }
  }
  report(6, "deterministic baseline crosses the lateral band", found != 0,
    found ? fmt::format("seed {}: {} conflicting pair(s) with overlapping 95% "
      "tubes, worst tube slack {:.4f} s", found, crossings, slack)
          : std::string("no crossing in seeds 1..20"));
}

struct CsvEvent
{
  double t;
  std::string type;
  int id;
};

std::vector<CsvEvent> parse_events(const std::string& csv)
{
  std::vector<CsvEvent> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
  {
    std::istringstream row(line);
    std::string t, type, id;
    std::getline(row, t, ',');
    std::getline(row, type, ',');
    std::getline(row, id, ',');
    out.push_back({std::stod(t), type, std::stoi(id)});
  }
  return out;
}

void criterion_protocol(const RunResult& r)
{
  int audit_failures = 0;
  for (const auto& a : r.audits)
    audit_failures += !a.ok;

  const auto events = parse_events(events_csv(r));
  std::map<int, int> chars;
  std::set<int> live;
  int broadcasts = 0, bad_broadcasts = 0;
  for (std::size_t k = 0; k < events.size(); ++k)
  {
    const auto& e = events[k];
    if (e.type == "entry")
      live.insert(e.id);
    else if (e.type == "exit")
      live.erase(e.id);
    else if (e.type == "characterization")
    {
      ++chars[e.id];
      ++broadcasts;
      const std::vector<int> expected(live.upper_bound(e.id), live.end());
      std::vector<int> got;
      std::size_t j = k + 1;
      for (; j < events.size() && events[j].type == "replan"; ++j)
        if (events[j].t == e.t)
          got.push_back(events[j].id);
      if (got != expected)
        ++bad_broadcasts;
      k = j - 1;
    }
  }
  int wrong_chars = 0;
  for (const auto& [id, rec] : r.history)
    wrong_chars += chars[id] != 1;

  const bool ok = audit_failures == 0 && wrong_chars == 0 && bad_broadcasts == 0
                  && !r.audits.empty();
  report(7, "protocol audit", ok, fmt::format(
      "{} audits with {} failure(s), {} vehicle(s) without exactly one "
      "characterization, {} of {} broadcasts not replanning exactly the later "
      "vehicles in order",
      r.audits.size(), audit_failures, wrong_chars, bad_broadcasts, broadcasts));
}

void criterion_determinism(const RunResult& first)
{
  const auto cfg = scenario(Mode::Robust, 1);
  const auto second = run(cfg);
  const bool same_traj = trajectories_csv(first, cfg.layout) == trajectories_csv(second, cfg.layout);
  const bool same_metrics = metrics_json(first).dump(2) == metrics_json(second).dump(2);
  report(8, "determinism", same_traj && same_metrics, fmt::format(
      "trajectories.csv {}, metrics.json {}",
      same_traj ? "identical" : "differs", same_metrics ? "identical" : "differs"));
}

} // namespace

int main()
{
  spdlog::set_level(spdlog::level::err);

  criterion_moments();
  criterion_trajectory();
  criterion_gp();
  criterion_intervals();

  const auto start = Clock::now();
  const auto robust = run(scenario(Mode::Robust, 1));
  criterion_robust(robust, seconds_since(start));
  criterion_deterministic();
  criterion_protocol(robust);
  criterion_determinism(robust);

  fmt::print("{} of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
