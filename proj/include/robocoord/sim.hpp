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

#ifndef ROBOCOORD__SIM_HPP
#define ROBOCOORD__SIM_HPP

#include "coordination.hpp"
#include "gp.hpp"
#include "trajectory.hpp"
#include "uncertainty.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace robocoord {

enum class Mode { Deterministic, Robust };

inline std::string_view to_string(Mode m)
{
  return m == Mode::Robust ? "robust" : "deterministic";
}

inline std::optional<Mode> parse_mode(std::string_view s)
{
  if (s == "robust")
    return Mode::Robust;
  if (s == "deterministic")
    return Mode::Deterministic;
  return std::nullopt;
}

/// Time lag accumulated along the path, e(p) = c1 ln(1 + p)^c2.
struct GroundTruthDeviation
{
  double c1 = 0.012;
  double c2 = 1.5;

  double operator()(double p) const
  {
    if (p <= 0.0)
      return 0.0;
    return c1 * std::pow(std::log1p(p), c2);
  }
};

/// Six approach paths through a four-leg intersection whose centre sits
/// 200 m from every entry: four straight movements and two left turns.
inline IntersectionLayout default_layout()
{
  return IntersectionLayout({
      {"N_S", 400.0, {{"c13", 198.25}, {"c16", 199.0}, {"c14", 201.75}}},
      {"S_N", 400.0, {{"c24", 198.25}, {"c25", 199.0}, {"c23", 201.75}}},
      {"E_W", 400.0, {{"c23", 198.25}, {"c35", 199.6}, {"c13", 201.75}}},
      {"W_E", 400.0, {{"c14", 198.25}, {"c46", 199.6}, {"c24", 201.75}}},
      {"N_E", 400.0, {{"c35", 198.8}, {"c56", 200.5}, {"c25", 202.2}}},
      {"S_W", 400.0, {{"c46", 198.8}, {"c56", 200.5}, {"c16", 202.2}}},
    });
}

struct ScenarioConfig
{
  int n_cavs = 24;
  double rate = 3600.0; ///< total arrival rate [veh/h]
  std::vector<double> path_weights; ///< empty means uniform
  double v0_min = 12.0;
  double v0_max = 14.0;
  std::uint64_t seed = 1;
  Mode mode = Mode::Robust;
  int n_obs = 50;
  double obs_noise = 0.005; ///< observation noise std [s]
  GroundTruthDeviation truth;
  SafetyConfig safety;
  IntersectionLayout layout = default_layout();
  int fit_restarts = 8;
  int fit_iterations = 500;
  double entry_retry = 0.1; ///< delay step for a blocked entry [s]

  std::vector<std::string> problems() const
  {
    std::vector<std::string> out = layout.problems();
    if (n_cavs < 1)
      out.push_back("n_cavs must be at least 1");
    if (!(rate > 0.0))
      out.push_back("rate must be positive");
    if (!(v0_min > 0.0 && v0_max >= v0_min))
      out.push_back("v0 range must be positive and ordered");
    if (n_obs < 2)
      out.push_back("n_obs must be at least 2");
    if (!(obs_noise >= 0.0))
      out.push_back("obs_noise must be non-negative");
    if (!(truth.c1 >= 0.0 && truth.c2 > 0.0))
      out.push_back("ground-truth coefficients must be non-negative");
    if (!path_weights.empty())
    {
      if (path_weights.size() != layout.size())
        out.push_back("one weight per path is required");
      double total = 0.0;
      for (const double w : path_weights)
      {
        if (!(w >= 0.0))
          out.push_back("path weights must be non-negative");
        total += w;
      }
      if (!(total > 0.0))
        out.push_back("path weights must not all be zero");
    }

    const auto& s = safety;
    const auto positive = [&](double x, const char* name)
      {
        if (!(x > 0.0))
          out.push_back(std::string(name) + " must be positive");
      };
    positive(s.t_h, "t_h");
    positive(s.gamma, "gamma");
    positive(s.varphi, "varphi");
    positive(s.p_z, "p_z");
    positive(s.limits.v_min, "v_min");
    positive(s.limits.u_max, "u_max");
    positive(s.scan_step, "scan_step");
    positive(s.refine_tolerance, "refine_tolerance");
    positive(s.check_dt, "check_dt");
    positive(s.tube_grid_step, "tube_grid_step");
    positive(entry_retry, "entry_retry");
    if (!(s.limits.u_min < 0.0))
      out.push_back("u_min must be negative");
    if (!(s.limits.v_max > s.limits.v_min))
      out.push_back("v_max must exceed v_min");
    if (!(v0_min >= s.limits.v_min && v0_max <= s.limits.v_max))
      out.push_back("v0 range must lie inside [v_min, v_max]");
    for (const auto& [p, name] : {
        std::pair{s.levels.p_e, "P_e"}, {s.levels.p_f, "P_f"},
        {s.levels.p_g, "P_g"}})
    {
      if (!(p > 0.0 && p < 1.0))
        out.push_back(std::string(name) + " must lie in (0, 1)");
    }
    if (s.levels.p_g > 0.0 && s.levels.p_g < 1.0 && s.levels.p_g <= 5.0 / 6.0)
      out.push_back("P_g must exceed 5/6 for the unimodal speed bound");
    for (const auto& path : layout.paths())
      if (!(s.p_z < path.length))
        out.push_back("p_z must be shorter than path " + path.path_id);
    if (fit_restarts < 1 || fit_iterations < 1)
      out.push_back("fit_restarts and fit_iterations must be positive");
    return out;
  }
};

//==============================================================================
// Scenario generation
//==============================================================================

struct Arrival
{
  double t = 0.0;
  std::size_t path = 0;
  double v0 = 0.0;
};

/// Poisson arrivals at the total rate, paths drawn by weight.
inline std::vector<Arrival> generate_arrivals(
  const ScenarioConfig& cfg, std::mt19937_64& rng)
{
  std::vector<double> weights = cfg.path_weights;
  if (weights.empty())
    weights.assign(cfg.layout.size(), 1.0);
  std::exponential_distribution<double> gap(cfg.rate / 3600.0);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> speed(cfg.v0_min, cfg.v0_max);

  std::vector<Arrival> out;
  out.reserve(static_cast<std::size_t>(cfg.n_cavs));
  double t = 0.0;
  for (int k = 0; k < cfg.n_cavs; ++k)
  {
    t += gap(rng);
    const std::size_t path = pick(rng);
    out.push_back({t, path, speed(rng)});
  }
  return out;
}

/// Noisy measurements of the accumulated time deviation, taken at n_obs
/// evenly spaced positions on (0, p_z].
inline ObservationSet observe(
  const GroundTruthDeviation& truth, int n_obs, double p_z, double noise,
  std::mt19937_64& rng)
{
  ObservationSet obs;
  obs.position.reserve(static_cast<std::size_t>(n_obs));
  obs.error.reserve(static_cast<std::size_t>(n_obs));
  std::normal_distribution<double> xi(0.0, 1.0);
  for (int j = 1; j <= n_obs; ++j)
  {
    const double p = p_z * static_cast<double>(j) / static_cast<double>(n_obs);
    obs.position.push_back(p);
    obs.error.push_back(truth(p) + noise * xi(rng));
  }
  return obs;
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, int cav_id, int stream)
{
  std::seed_seq seq{
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(cav_id), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

//==============================================================================
// Actual trajectories
//==============================================================================

/// Position deviation at nominal time t for a time deviation e: the
/// amount that brings p(t + e) back to p(t).
inline double position_deviation_exact(const PolyCoefficients& phi, double t, double e)
{
  return -(phi.phi3 * e * e * e + 3.0 * phi.phi3 * e * e * t + phi.phi2 * e * e
         + 3.0 * phi.phi3 * e * t * t + 2.0 * phi.phi2 * e * t + phi.phi1 * e);
}

/// Speed deviation at nominal time t for a time deviation e.
inline double speed_deviation_exact(const PolyCoefficients& phi, double t, double e)
{
  return -((2.0 * phi.phi2 + 6.0 * phi.phi3 * t) * e + 3.0 * phi.phi3 * e * e);
}

/// The realized motion of one vehicle given its plan history.
///
/// Each plan segment starts from the measured state, so the deviation from
/// a segment is the lag accumulated since the segment's start position.
class ActualTrajectory
{
public:
  ActualTrajectory(const CavRecord& rec, GroundTruthDeviation truth)
  : rec_(&rec),
    truth_(truth)
  {
  }

  double deviation(const CavPlan& seg, double p) const
  {
    return truth_(p) - truth_(seg.bc.p0);
  }

  double time_at(double p) const
  {
    const CavPlan& seg = rec_->segment_at_position(p);
    return seg.time_at(p) + deviation(seg, p);
  }

  double entry_time() const { return rec_->segments.front().bc.t0; }
  double length() const { return rec_->current().bc.pf; }
  double exit_time() const { return time_at(length()); }

  double exit_speed() const
  {
    const CavPlan& seg = rec_->current();
    return speed(seg.phi, seg.bc.tf);
  }

  double position_at(double t) const
  {
    if (t <= entry_time())
      return 0.0;
    const double t_exit = exit_time();
    if (t >= t_exit)
      return length() + exit_speed() * (t - t_exit);
    double a = 0.0;
    double b = length();
    for (int k = 0; k < 80 && b - a > 1e-13; ++k)
    {
      const double mid = 0.5 * (a + b);
      if (time_at(mid) < t)
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  }

  /// Actual speed at position p: the nominal speed shifted by the speed
  /// deviation, evaluated at the actual time.
  double speed_at_position(double p) const
  {
    const CavPlan& seg = rec_->segment_at_position(std::min(p, length()));
    const double t = seg.time_at(std::min(p, length()));
    const double e = deviation(seg, std::min(p, length()));
    return speed(seg.phi, t + e) + speed_deviation_exact(seg.phi, t, e);
  }

  double speed_at(double t) const
  {
    if (t >= exit_time())
      return exit_speed();
    return speed_at_position(position_at(t));
  }

  MeasuredState measure(double t) const
  {
    const double p = position_at(t);
    return {t, p, speed_at_position(p)};
  }

private:
  const CavRecord* rec_;
  GroundTruthDeviation truth_;
};

//==============================================================================
// Run
//==============================================================================

struct EventRecord
{
  double t = 0.0;
  std::string type;
  int cav_id = 0;
  double tf_new = 0.0;
  int plan_version = 0;
};

struct EventAudit
{
  double t = 0.0;
  std::string type;
  int cav_id = 0;
  bool ok = true;
  std::size_t violations = 0;
  std::vector<int> replanned; ///< ids replanned by this event, in order
  std::vector<int> expected; ///< ids present in the database after cav_id
};

struct TrajectorySample
{
  double t = 0.0;
  int cav_id = 0;
  std::size_t path = 0;
  double p_nom = 0.0;
  double v_nom = 0.0;
  double u_nom = 0.0;
  double p_act = 0.0;
  double v_act = 0.0;
};

struct MetricsReport
{
  int n_cavs = 0;
  double min_lateral_slack = std::numeric_limits<double>::infinity();
  double min_rear_end_slack = std::numeric_limits<double>::infinity();
  int lateral_violations = 0;
  int rear_end_violations = 0;
  double min_tube_lateral_slack = std::numeric_limits<double>::infinity();
  int tube_lateral_crossings = 0;
  int tube_rear_end_crossings = 0;
  std::vector<std::pair<int, int>> crossing_pairs;
  std::map<int, double> travel_time;
  double mean_travel_time = 0.0;
  std::map<int, int> replans;
  int total_replans = 0;
  int characterizations = 0;
  int infeasible_plans = 0;
  int audit_failures = 0;
  double max_entry_delay = 0.0;

  bool safety_violation() const
  {
    return lateral_violations > 0 || rear_end_violations > 0
           || tube_lateral_crossings > 0 || tube_rear_end_crossings > 0;
  }
};

struct RunResult
{
  Mode mode = Mode::Robust;
  std::uint64_t seed = 0;
  std::vector<Arrival> arrivals;
  std::map<int, CavRecord> history; ///< final plan history of every vehicle
  std::map<int, double> exit_time; ///< actual exit (database removal) time
  /// Tubes learned by vehicles that never replan (deterministic mode).
  std::map<int, std::shared_ptr<const DeviationPosterior>> report_tubes;
  std::vector<EventRecord> events;
  std::vector<EventAudit> audits;
  std::vector<TrajectorySample> trajectory;
  MetricsReport metrics;
};

namespace detail {

enum class EventKind { Exit = 0, Characterization = 1, Arrival = 2, Retry = 3 };

struct QueuedEvent
{
  double t = 0.0;
  EventKind kind = EventKind::Arrival;
  int key = 0; ///< cav id, arrival index or path index
  int epoch = 0;

  bool operator<(const QueuedEvent& o) const
  {
    return std::tie(t, kind, key, epoch) < std::tie(o.t, o.kind, o.key, o.epoch);
  }
};

/// Plan history with every segment's tube swapped for the report tube.
inline std::map<int, CavRecord> with_report_tubes(const RunResult& r)
{
  std::map<int, CavRecord> out = r.history;
  for (auto& [id, rec] : out)
  {
    const auto it = r.report_tubes.find(id);
    if (it == r.report_tubes.end())
      continue;
    for (auto& seg : rec.segments)
      if (!seg.deviation && seg.bc.p0 == 0.0)
        seg.deviation = it->second;
  }
  return out;
}

} // namespace detail

/// Safety and throughput figures measured on the realized trajectories, and
/// crossings of the published confidence tubes.
inline MetricsReport audit_metrics(
  const RunResult& r, const ScenarioConfig& cfg, double tolerance = 1e-9)
{
  MetricsReport m;
  m.n_cavs = static_cast<int>(r.history.size());
  const auto& layout = cfg.layout;
  const auto& s = cfg.safety;

  std::map<int, ActualTrajectory> actual;
  for (const auto& [id, rec] : r.history)
    actual.emplace(id, ActualTrajectory(rec, cfg.truth));

  for (auto a = r.history.begin(); a != r.history.end(); ++a)
  {
    for (auto b = r.history.begin(); b != a; ++b)
    {
      if (a->second.path == b->second.path)
        continue;
      for (const auto& c : layout.shared_conflicts(a->second.path, b->second.path))
      {
        const double ta = actual.at(a->first).time_at(c.distance_a);
        const double tb = actual.at(b->first).time_at(c.distance_b);
        const double slack = std::abs(ta - tb) - s.t_h;
        m.min_lateral_slack = std::min(m.min_lateral_slack, slack);
        if (slack < -tolerance)
          ++m.lateral_violations;
      }
    }
  }

  // Same-path successors, over the follower's whole stay in the zone.
  for (const auto& [id, rec] : r.history)
  {
    const CavRecord* lead = predecessor_in(r.history, id, rec.path);
    if (!lead)
      continue;
    const auto& fi = actual.at(id);
    const auto& fk = actual.at(lead->cav_id);
    const double t0 = fi.entry_time();
    const double t1 = fi.exit_time();
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / s.check_dt));
    for (std::size_t k = 0; k <= n + 1; ++k)
    {
      const double t = k > n ? t1 : t0 + static_cast<double>(k) * s.check_dt;
      const double slack = fk.position_at(t) - fi.position_at(t) - s.gamma
                           - s.varphi * fi.speed_at(t);
      m.min_rear_end_slack = std::min(m.min_rear_end_slack, slack);
      if (slack < -tolerance)
      {
        ++m.rear_end_violations;
        break;
      }
    }
  }

  // Published tubes against the lateral band and the rear-end margin.
  const auto tubes = detail::with_report_tubes(r);
  for (auto a = tubes.begin(); a != tubes.end(); ++a)
  {
    for (auto b = tubes.begin(); b != a; ++b)
    {
      if (a->second.path == b->second.path)
        continue;
      for (const auto& c : layout.shared_conflicts(a->second.path, b->second.path))
      {
        const CavPlan& sa = a->second.segment_at_position(c.distance_a);
        const CavPlan& sb = b->second.segment_at_position(c.distance_b);
        const double slack = lateral_gap(
          sa.time_at(c.distance_a), sa.time_interval(c.distance_a),
          sb.time_at(c.distance_b), sb.time_interval(c.distance_b), s.t_h);
        m.min_tube_lateral_slack = std::min(m.min_tube_lateral_slack, slack);
        if (slack < -tolerance && !sa.infeasible && !sb.infeasible)
        {
          ++m.tube_lateral_crossings;
          m.crossing_pairs.emplace_back(b->first, a->first);
        }
      }
    }
  }
  for (const auto& [id, rec] : tubes)
  {
    const CavRecord* lead = predecessor_in(tubes, id, rec.path);
    if (!lead)
      continue;
    const CavPlan& plan = rec.current();
    if (plan.infeasible)
      continue;
    // The leader leaves the database at its actual exit.
    const double t_gone = r.exit_time.count(lead->cav_id)
      ? r.exit_time.at(lead->cav_id) : std::numeric_limits<double>::infinity();
    const double t1 = std::min(plan.bc.tf, t_gone);
    const auto n = static_cast<std::size_t>(
      std::floor(std::max(0.0, t1 - plan.bc.t0) / s.check_dt));
    for (std::size_t k = 0; k <= n; ++k)
    {
      const double t = plan.bc.t0 + static_cast<double>(k) * s.check_dt;
      if (rear_end_slack(plan, lead->segment_at_time(t), t, s) < -tolerance)
      {
        ++m.tube_rear_end_crossings;
        break;
      }
    }
  }

  double total = 0.0;
  for (const auto& [id, traj] : actual)
  {
    const double tt = traj.exit_time() - traj.entry_time();
    m.travel_time[id] = tt;
    total += tt;
  }
  if (!actual.empty())
    m.mean_travel_time = total / static_cast<double>(actual.size());

  for (const auto& [id, rec] : r.history)
  {
    m.replans[id] = 0;
    for (const auto& seg : rec.segments)
      if (seg.infeasible)
        ++m.infeasible_plans;
  }
  for (const auto& e : r.events)
  {
    if (e.type == "replan")
    {
      ++m.replans[e.cav_id];
      ++m.total_replans;
    }
    else if (e.type == "characterization")
    {
      ++m.characterizations;
    }
  }
  for (const auto& a : r.audits)
    if (!a.ok)
      ++m.audit_failures;
  for (const auto& [id, rec] : r.history)
  {
    const std::size_t k = static_cast<std::size_t>(id - 1);
    if (k < r.arrivals.size())
      m.max_entry_delay = std::max(
        m.max_entry_delay, rec.segments.front().bc.t0 - r.arrivals[k].t);
  }
  return m;
}

/// Nominal and actual states of every vehicle on a uniform time grid.
inline std::vector<TrajectorySample> sample_trajectories(
  const RunResult& r, const ScenarioConfig& cfg, double period)
{
  std::vector<TrajectorySample> out;
  if (r.history.empty())
    return out;
  std::map<int, ActualTrajectory> actual;
  double t_end = 0.0;
  for (const auto& [id, rec] : r.history)
  {
    const auto& a = actual.emplace(id, ActualTrajectory(rec, cfg.truth)).first->second;
    t_end = std::max(t_end, a.exit_time());
  }
  const auto n = static_cast<std::size_t>(std::floor(t_end / period)) + 1;
  for (std::size_t k = 0; k <= n; ++k)
  {
    const double t = static_cast<double>(k) * period;
    for (const auto& [id, rec] : r.history)
    {
      const auto& a = actual.at(id);
      if (t < a.entry_time() || t > a.exit_time())
        continue;
      const CavPlan& seg = rec.segment_at_time(t);
      const State nom = seg.state_at(t);
      out.push_back({t, id, rec.path, nom.p, nom.v, nom.u,
          a.position_at(t), a.speed_at(t)});
    }
  }
  return out;
}

/// Event-driven run of the coordination protocol.
inline RunResult run(const ScenarioConfig& cfg, double sample_period = 0.1)
{
  RunResult r;
  r.mode = cfg.mode;
  r.seed = cfg.seed;
  const auto& layout = cfg.layout;
  const auto& safety = cfg.safety;

  std::mt19937_64 arrival_rng = stream_rng(cfg.seed, 0, 0);
  r.arrivals = generate_arrivals(cfg, arrival_rng);

  CoordinatorDatabase db;
  std::set<detail::QueuedEvent> queue;
  std::map<int, int> epoch;
  std::vector<std::deque<int>> waiting(layout.size());
  std::vector<bool> retry_pending(layout.size(), false);

  for (std::size_t k = 0; k < r.arrivals.size(); ++k)
    queue.insert({r.arrivals[k].t, detail::EventKind::Arrival, static_cast<int>(k), 0});

  const auto actual_of = [&](int id)
    {
      return ActualTrajectory(db.at(id), cfg.truth);
    };

  const auto schedule = [&](int id)
    {
      const int ep = ++epoch[id];
      const auto traj = actual_of(id);
      const CavRecord& rec = db.at(id);
      queue.insert({traj.exit_time(), detail::EventKind::Exit, id, ep});
      const bool learns = !rec.characterized && !r.report_tubes.count(id);
      if (learns && rec.current().bc.p0 < safety.p_z)
        queue.insert({traj.time_at(safety.p_z),
            detail::EventKind::Characterization, id, ep});
    };

  const auto log_plan = [&](double t, const char* type, int id)
    {
      const CavPlan& plan = db.at(id).current();
      r.events.push_back({t, type, id, plan.bc.tf, plan.plan_version});
      r.history[id] = db.at(id);
    };

  const auto audit = [&](double t, const char* type, int id,
    std::vector<int> replanned, std::vector<int> expected)
    {
      const AuditReport report = audit_database(db, layout, safety);
      if (!report.ok())
        spdlog::warn("audit after {} of cav {} at t={:.3f}: {} violation(s)",
          type, id, t, report.violations.size());
      r.audits.push_back({t, type, id, report.ok(), report.violations.size(),
          std::move(replanned), std::move(expected)});
    };

  // The entry state must already respect the rear-end margin to the
  // vehicle ahead, both on its plan (with tube) and in reality.
  const auto entry_clear = [&](std::size_t path, double v0, double t)
    {
      const CavRecord* lead = db.predecessor(db.next_id(), path);
      if (!lead)
        return true;
      const CavPlan& seg = lead->segment_at_time(t);
      const double need = safety.gamma + safety.varphi * v0;
      const double planned = seg.state_at(t).p + seg.position_interval(t).lo;
      const double real = ActualTrajectory(*lead, cfg.truth).position_at(t);
      return planned >= need && real >= need;
    };

  const auto service_path = [&](std::size_t path, double t)
    {
      auto& q = waiting[path];
      while (!q.empty())
      {
        const Arrival& a = r.arrivals[static_cast<std::size_t>(q.front())];
        if (!entry_clear(path, a.v0, t))
        {
          if (!retry_pending[path])
          {
            retry_pending[path] = true;
            queue.insert({t + cfg.entry_retry, detail::EventKind::Retry,
                static_cast<int>(path), 0});
          }
          return;
        }
        q.pop_front();
        const int id = handle_entry(db, path, t, a.v0, layout, safety);
        spdlog::debug("cav {} enters path {} at t={:.3f}", id,
          layout.path(path).path_id, t);
        log_plan(t, "entry", id);
        schedule(id);
        audit(t, "entry", id, {}, {});
      }
    };

  while (!queue.empty())
  {
    const detail::QueuedEvent ev = *queue.begin();
    queue.erase(queue.begin());
    const double t = ev.t;

    switch (ev.kind)
    {
      case detail::EventKind::Arrival:
      {
        const Arrival& a = r.arrivals[static_cast<std::size_t>(ev.key)];
        waiting[a.path].push_back(ev.key);
        if (waiting[a.path].size() == 1)
          service_path(a.path, t);
        break;
      }
      case detail::EventKind::Retry:
      {
        const auto path = static_cast<std::size_t>(ev.key);
        retry_pending[path] = false;
        service_path(path, t);
        break;
      }
      case detail::EventKind::Exit:
      {
        if (epoch[ev.key] != ev.epoch || !db.contains(ev.key))
          break;
        const CavPlan& plan = db.at(ev.key).current();
        r.events.push_back({t, "exit", ev.key, plan.bc.tf, plan.plan_version});
        r.exit_time[ev.key] = t;
        db.erase(ev.key);
        audit(t, "exit", ev.key, {}, {});
        break;
      }
      case detail::EventKind::Characterization:
      {
        if (epoch[ev.key] != ev.epoch || !db.contains(ev.key))
          break;
        const int id = ev.key;
        auto obs_rng = stream_rng(cfg.seed, id, 1);
        const ObservationSet obs = observe(
          cfg.truth, cfg.n_obs, safety.p_z, cfg.obs_noise, obs_rng);
        FitOptions fit;
        fit.seed = stream_rng(cfg.seed, id, 2)();
        fit.restarts = cfg.fit_restarts;
        fit.iterations = cfg.fit_iterations;

        if (cfg.mode == Mode::Deterministic)
        {
          // Learned for reporting only; the plan stays as it is.
          try
          {
            const GpModel model(obs, fit_hyperparameters(obs, fit).theta);
            const double pf = layout.path(db.at(id).path).length;
            r.report_tubes[id] = std::make_shared<const DeviationPosterior>(
              DeviationPosterior::from_model(
                model, 0.0, pf, safety.tube_grid_step, safety.levels, false));
          }
          catch (const std::exception& e)
          {
            spdlog::warn("cav {}: report tube unavailable ({})", id, e.what());
          }
          break;
        }

        MeasuredState state = actual_of(id).measure(t);
        state.p = safety.p_z;
        std::map<int, MeasuredState> states;
        for (const int j : db.ids_after(id))
          states[j] = actual_of(j).measure(t);

        const std::vector<int> targets = handle_characterization(
          db, id, obs, state, layout, safety, fit);
        if (!db.at(id).characterized)
        {
          // Fit failed; keep the plan and do not retry.
          db.at(id).characterized = true;
          break;
        }
        log_plan(t, "characterization", id);
        schedule(id);
        handle_replanning(db, id, states, layout, safety);
        for (const int j : targets)
        {
          log_plan(t, "replan", j);
          schedule(j);
        }
        audit(t, "characterization", id, targets, db.ids_after(id));
        break;
      }
    }
  }

  r.metrics = audit_metrics(r, cfg);
  r.trajectory = sample_trajectories(r, cfg, sample_period);
  return r;
}

} // namespace robocoord

#endif // ROBOCOORD__SIM_HPP
