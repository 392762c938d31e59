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

#ifndef ROBOCOORD__COORDINATION_HPP
#define ROBOCOORD__COORDINATION_HPP

#include "gp.hpp"
#include "trajectory.hpp"
#include "uncertainty.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace robocoord {

//==============================================================================
// Geometry
//==============================================================================

struct ConflictRef
{
  std::string conflict_id;
  double distance = 0.0; ///< from the path entry [m]
};

struct PathGeometry
{
  std::string path_id;
  double length = 0.0;
  std::vector<ConflictRef> conflicts;

  std::optional<double> conflict_distance(const std::string& id) const
  {
    for (const auto& c : conflicts)
      if (c.conflict_id == id)
        return c.distance;
    return std::nullopt;
  }
};

/// A conflict point shared by two paths with its distance along each.
struct SharedConflict
{
  std::string conflict_id;
  double distance_a = 0.0;
  double distance_b = 0.0;
};

class IntersectionLayout
{
public:
  IntersectionLayout() = default;

  explicit IntersectionLayout(std::vector<PathGeometry> paths)
  : paths_(std::move(paths))
  {
  }

  const std::vector<PathGeometry>& paths() const { return paths_; }
  const PathGeometry& path(std::size_t index) const { return paths_.at(index); }
  std::size_t size() const { return paths_.size(); }

  std::optional<std::size_t> find(const std::string& path_id) const
  {
    for (std::size_t i = 0; i < paths_.size(); ++i)
      if (paths_[i].path_id == path_id)
        return i;
    return std::nullopt;
  }

  std::vector<SharedConflict> shared_conflicts(std::size_t a, std::size_t b) const
  {
    std::vector<SharedConflict> out;
    if (a == b)
      return out;
    for (const auto& c : paths_.at(a).conflicts)
      if (const auto d = paths_.at(b).conflict_distance(c.conflict_id))
        out.push_back({c.conflict_id, c.distance, *d});
    return out;
  }

  /// Returns one message per broken invariant; empty when valid.
  std::vector<std::string> problems() const
  {
    std::vector<std::string> out;
    if (paths_.empty())
      out.push_back("layout has no paths");
    std::map<std::string, int> refs;
    for (const auto& p : paths_)
    {
      if (!(p.length > 0.0))
        out.push_back("path " + p.path_id + ": length must be positive");
      double prev = 0.0;
      for (const auto& c : p.conflicts)
      {
        ++refs[c.conflict_id];
        if (!(c.distance > 0.0 && c.distance < p.length))
          out.push_back("path " + p.path_id + ": conflict " + c.conflict_id
            + " distance must lie strictly inside (0, length)");
        if (!(c.distance > prev))
          out.push_back("path " + p.path_id
            + ": conflict distances must be strictly increasing");
        prev = c.distance;
      }
    }
    for (std::size_t i = 0; i < paths_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (paths_[i].path_id == paths_[j].path_id)
          out.push_back("duplicate path id " + paths_[i].path_id);
    for (const auto& [id, count] : refs)
      if (count < 2)
        out.push_back("conflict " + id + " is referenced by only one path");
    return out;
  }

private:
  std::vector<PathGeometry> paths_;
};

//==============================================================================
// Configuration
//==============================================================================

struct SafetyConfig
{
  double t_h = 0.5; ///< lateral time headway [s]
  double gamma = 1.5; ///< standstill distance [m]
  double varphi = 0.5; ///< reaction time [s]
  MotionLimits limits;
  double p_z = 50.0; ///< uncertainty characterization point [m]
  ConfidenceLevels levels;

  double scan_step = 0.1; ///< coarse exit-time scan [s]
  double refine_tolerance = 1e-4; ///< bisection on the feasibility boundary [s]
  double check_dt = 0.05; ///< time grid for rear-end and speed checks [s]
  double tube_grid_step = 1.0; ///< position grid of the deviation posterior [m]
};

//==============================================================================
// Plans and the coordinator database
//==============================================================================

/// One nominal plan segment of a vehicle.
struct CavPlan
{
  int cav_id = 0;
  std::size_t path = 0;
  BoundaryConditions bc;
  PolyCoefficients phi;
  int plan_version = 0;
  bool infeasible = false;
  /// Set once the vehicle has characterized its uncertainty.
  std::shared_ptr<const DeviationPosterior> deviation;

  double time_at(double p) const { return time_at_position(phi, bc, p); }

  /// Nominal state; past tf the vehicle continues at its exit speed.
  State state_at(double t) const
  {
    if (t <= bc.tf)
      return eval_state(phi, t);
    const double v = speed(phi, bc.tf);
    return {bc.pf + v * (t - bc.tf), v, 0.0};
  }

  ConfidenceInterval time_interval(double p) const
  {
    if (!deviation)
      return {};
    return deviation->time_interval(p);
  }

  ConfidenceInterval position_interval(double t) const
  {
    if (!deviation)
      return {};
    return deviation->position_interval(phi, std::min(t, bc.tf));
  }

  ConfidenceInterval speed_interval(double t) const
  {
    if (!deviation)
      return {};
    return deviation->speed_interval(phi, std::min(t, bc.tf));
  }
};

/// All plan segments of one vehicle, oldest first.
struct CavRecord
{
  int cav_id = 0;
  std::size_t path = 0;
  std::vector<CavPlan> segments;
  std::shared_ptr<const GpModel> gp;
  bool characterized = false;

  const CavPlan& current() const { return segments.back(); }

  /// Segment that governs the crossing of position p.
  const CavPlan& segment_at_position(double p) const
  {
    for (auto it = segments.rbegin(); it != segments.rend(); ++it)
      if (it->bc.p0 <= p)
        return *it;
    return segments.front();
  }

  /// Segment in force at time t.
  const CavPlan& segment_at_time(double t) const
  {
    for (auto it = segments.rbegin(); it != segments.rend(); ++it)
      if (it->bc.t0 <= t)
        return *it;
    return segments.front();
  }
};

/// Queue-ordered store of the plans of every vehicle inside the control zone.
/// The coordinator only stores; each vehicle plans for itself.
class CoordinatorDatabase
{
public:
  int next_id() const { return next_id_; }

  CavRecord& insert(std::size_t path)
  {
    const int id = next_id_++;
    auto& rec = records_[id];
    rec.cav_id = id;
    rec.path = path;
    return rec;
  }

  void erase(int cav_id) { records_.erase(cav_id); }

  bool contains(int cav_id) const { return records_.count(cav_id) > 0; }

  const CavRecord& at(int cav_id) const { return records_.at(cav_id); }
  CavRecord& at(int cav_id) { return records_.at(cav_id); }

  const std::map<int, CavRecord>& records() const { return records_; }

  std::vector<int> ids_after(int cav_id) const
  {
    std::vector<int> out;
    for (auto it = records_.upper_bound(cav_id); it != records_.end(); ++it)
      out.push_back(it->first);
    return out;
  }

  /// Nearest lower-indexed vehicle on the same path.
  const CavRecord* predecessor(int cav_id, std::size_t path) const;

private:
  std::map<int, CavRecord> records_;
  int next_id_ = 1;
};

inline const CavRecord* predecessor_in(
  const std::map<int, CavRecord>& records, int cav_id, std::size_t path)
{
  auto it = records.lower_bound(cav_id);
  while (it != records.begin())
  {
    --it;
    if (it->second.path == path)
      return &it->second;
  }
  return nullptr;
}

inline const CavRecord* CoordinatorDatabase::predecessor(
  int cav_id, std::size_t path) const
{
  return predecessor_in(records_, cav_id, path);
}

//==============================================================================
// Safety constraints
//==============================================================================

/// Worst-case lateral headway slack at a shared conflict point [s].
///
/// The crossing-time difference ranges over an interval once both time
/// tubes are added; the constraint holds when the whole interval stays at
/// least t_h away from zero.
inline double lateral_gap(
  double t_i, const ConfidenceInterval& e_i,
  double t_j, const ConfidenceInterval& e_j, double t_h)
{
  const double lo = (t_i + e_i.lo) - (t_j + e_j.hi);
  const double hi = (t_i + e_i.hi) - (t_j + e_j.lo);
  return std::max(lo - t_h, -t_h - hi);
}

inline double lateral_gap(
  const CavPlan& plan_i, const CavPlan& plan_j,
  const std::string& conflict_id, const IntersectionLayout& layout,
  double t_h)
{
  const auto d_i = layout.path(plan_i.path).conflict_distance(conflict_id);
  const auto d_j = layout.path(plan_j.path).conflict_distance(conflict_id);
  if (!d_i || !d_j || plan_i.path == plan_j.path)
    throw std::domain_error("conflict " + conflict_id + " is not shared");
  return lateral_gap(
    plan_i.time_at(*d_i), plan_i.time_interval(*d_i),
    plan_j.time_at(*d_j), plan_j.time_interval(*d_j), t_h);
}

/// Worst-case rear-end slack of follower i behind leader k at time t [m].
inline double rear_end_slack(
  const CavPlan& follower, const CavPlan& leader, double t,
  const SafetyConfig& cfg)
{
  if (follower.path != leader.path)
    throw std::domain_error("rear-end slack needs two vehicles on one path");
  if (t < leader.bc.t0 - 1e-9)
    throw std::domain_error("rear-end slack queried before the leader's plan");

  const State k = leader.state_at(t);
  const State i = follower.state_at(t);
  const auto fk = leader.position_interval(t);
  const auto fi = follower.position_interval(t);
  const auto gi = follower.speed_interval(t);
  return (k.p + fk.lo) - (i.p + fi.hi) - cfg.gamma
         - cfg.varphi * (i.v + gi.hi);
}

namespace detail {

/// Check times on [t0, t1]: a regular grid, the end point and the
/// stationary points of the nominal rear-end slack.
inline std::vector<double> rear_end_check_times(
  const CavPlan& follower, const CavPlan& leader, double t0, double t1,
  const SafetyConfig& cfg)
{
  std::vector<double> ts;
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / cfg.check_dt));
  ts.reserve(n + 4);
  for (std::size_t k = 0; k <= n; ++k)
    ts.push_back(t0 + static_cast<double>(k) * cfg.check_dt);
  ts.push_back(t1);

  // slack' = v_k - v_i - varphi u_i, a quadratic while the leader is on
  // its cubic.
  const double t_end = std::min(t1, leader.bc.tf);
  if (t_end > t0)
  {
    const auto& a = leader.phi;
    const auto& b = follower.phi;
    const double c2 = 3.0 * (a.phi3 - b.phi3);
    const double c1 = 2.0 * (a.phi2 - b.phi2) - cfg.varphi * 6.0 * b.phi3;
    const double c0 = (a.phi1 - b.phi1) - cfg.varphi * 2.0 * b.phi2;
    const auto add = [&](double r)
      {
        if (std::isfinite(r) && r > t0 && r < t_end)
          ts.push_back(r);
      };
    if (std::abs(c2) > 1e-14)
    {
      const double disc = c1 * c1 - 4.0 * c2 * c0;
      if (disc >= 0.0)
      {
        const double sq = std::sqrt(disc);
        add((-c1 + sq) / (2.0 * c2));
        add((-c1 - sq) / (2.0 * c2));
      }
    }
    else if (std::abs(c1) > 1e-14)
    {
      add(-c0 / c1);
    }
  }
  return ts;
}

} // namespace detail

/// Minimum worst-case rear-end slack over the follower's plan horizon
/// against the leader's plan segments.
inline double min_rear_end_slack(
  const CavPlan& follower, const CavRecord& leader, const SafetyConfig& cfg)
{
  const double t0 = follower.bc.t0;
  const double t1 = follower.bc.tf;
  double worst = std::numeric_limits<double>::infinity();
  const CavPlan& lead = leader.segment_at_time(t0);
  const bool single = &lead == &leader.segment_at_time(t1);
  if (single)
  {
    for (const double t : detail::rear_end_check_times(follower, lead, t0, t1, cfg))
      worst = std::min(worst, rear_end_slack(follower, lead, t, cfg));
    return worst;
  }
  for (const double t : detail::rear_end_check_times(follower, lead, t0, t1, cfg))
    worst = std::min(worst,
        rear_end_slack(follower, leader.segment_at_time(t), t, cfg));
  return worst;
}

/// Speed limits hold for every realization inside the speed tube.
inline bool speed_bounds_ok(const CavPlan& plan, const SafetyConfig& cfg)
{
  const auto& lim = cfg.limits;
  if (!plan.deviation)
  {
    const Range v = speed_range(plan.phi, plan.bc.t0, plan.bc.tf);
    return v.lo >= lim.v_min && v.hi <= lim.v_max;
  }
  const double t0 = plan.bc.t0;
  const double t1 = plan.bc.tf;
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / cfg.check_dt));
  const auto check = [&](double t)
    {
      const double v = speed(plan.phi, t);
      const auto g = plan.speed_interval(t);
      return v + g.lo >= lim.v_min && v + g.hi <= lim.v_max;
    };
  for (std::size_t k = 0; k <= n; ++k)
    if (!check(t0 + static_cast<double>(k) * cfg.check_dt))
      return false;
  return check(t1);
}

//==============================================================================
// Exit-time optimization
//==============================================================================

/// Where and how a vehicle (re)plans.
struct PlanRequest
{
  int cav_id = 0;
  std::size_t path = 0;
  double t0 = 0.0;
  double p0 = 0.0;
  double v0 = 0.0;
  std::shared_ptr<const DeviationPosterior> deviation;
};

namespace detail {

struct LateralTarget
{
  double own_distance = 0.0;
  double other_time = 0.0;
  ConfidenceInterval other_interval;
};

/// Lateral constraints a plan must respect: every lower-indexed vehicle
/// sharing a conflict point, plus any vehicle whose crossing already lies
/// in the past.
inline std::vector<LateralTarget> lateral_targets(
  const PlanRequest& req, const CoordinatorDatabase& db,
  const IntersectionLayout& layout)
{
  std::vector<LateralTarget> out;
  for (const auto& [id, rec] : db.records())
  {
    if (id == req.cav_id || rec.path == req.path || rec.segments.empty())
      continue;
    for (const auto& c : layout.shared_conflicts(req.path, rec.path))
    {
      if (c.distance_a < req.p0)
        continue;
      const CavPlan& seg = rec.segment_at_position(c.distance_b);
      const double t_other = seg.time_at(c.distance_b);
      if (id > req.cav_id && t_other >= req.t0)
        continue;
      out.push_back({c.distance_a, t_other, seg.time_interval(c.distance_b)});
    }
  }
  return out;
}

} // namespace detail

struct SolveResult
{
  CavPlan plan;
  Range window;
  int candidates = 0;
};

/// Smallest exit time whose plan satisfies the lateral, rear-end and speed
/// constraints against the vehicles already in the database.
///
/// Exit times are scanned upward from the window's lower end; the first
/// feasible cell is refined by bisection. When nothing in the window is
/// feasible the plan at the upper end is returned flagged infeasible.
inline SolveResult solve_exit_time(
  const PlanRequest& req, const CoordinatorDatabase& db,
  const IntersectionLayout& layout, const SafetyConfig& cfg)
{
  const double pf = layout.path(req.path).length;
  const double distance = pf - req.p0;
  if (!(distance > 0.0))
    throw std::invalid_argument("plan request starts at or beyond the path end");

  SolveResult out;
  const auto make_plan = [&](double tf)
    {
      CavPlan plan;
      plan.cav_id = req.cav_id;
      plan.path = req.path;
      plan.bc = {req.t0, req.v0, tf, pf, req.p0};
      plan.phi = solve_coefficients(plan.bc);
      plan.deviation = req.deviation;
      return plan;
    };

  try
  {
    out.window = feasible_exit_window(req.t0, req.v0, distance, cfg.limits);
  }
  catch (const InfeasibleError& e)
  {
    spdlog::warn("cav {}: {}", req.cav_id, e.what());
    out.plan = make_plan(req.t0 + distance / req.v0);
    out.plan.infeasible = true;
    out.window = {out.plan.bc.tf, out.plan.bc.tf};
    return out;
  }

  const auto lateral = detail::lateral_targets(req, db, layout);
  const CavRecord* leader = db.predecessor(req.cav_id, req.path);

  const auto feasible = [&](const CavPlan& plan)
    {
      ++out.candidates;
      for (const auto& target : lateral)
      {
        const double t_i = plan.time_at(target.own_distance);
        const double slack = lateral_gap(
          t_i, plan.time_interval(target.own_distance),
          target.other_time, target.other_interval, cfg.t_h);
        if (slack < 0.0)
          return false;
      }
      if (!speed_bounds_ok(plan, cfg))
        return false;
      if (leader && min_rear_end_slack(plan, *leader, cfg) < 0.0)
        return false;
      return true;
    };

  const double lo = out.window.lo;
  const double hi = out.window.hi;
  double prev = lo;
  bool have_prev = false;
  for (double tf = lo;; )
  {
    CavPlan plan = make_plan(tf);
    if (feasible(plan))
    {
      if (!have_prev)
      {
        out.plan = std::move(plan);
        return out;
      }
      // Refine the boundary between prev (infeasible) and tf (feasible).
      double a = prev;
      double b = tf;
      while (b - a > cfg.refine_tolerance)
      {
        const double mid = 0.5 * (a + b);
        CavPlan m = make_plan(mid);
        if (feasible(m))
        {
          b = mid;
          plan = std::move(m);
        }
        else
        {
          a = mid;
        }
      }
      out.plan = std::move(plan);
      return out;
    }
    if (tf >= hi)
      break;
    prev = tf;
    have_prev = true;
    tf = std::min(tf + cfg.scan_step, hi);
  }

  spdlog::warn("cav {}: no feasible exit time in [{:.3f}, {:.3f}]",
    req.cav_id, lo, hi);
  out.plan = make_plan(hi);
  out.plan.infeasible = true;
  return out;
}

//==============================================================================
// Event handlers
//==============================================================================

/// Measured state of a vehicle at an event time.
struct MeasuredState
{
  double t = 0.0;
  double p = 0.0;
  double v = 0.0;
};

/// A vehicle enters the control zone without any uncertainty information
/// and plans against everything already in the database.
inline int handle_entry(
  CoordinatorDatabase& db, std::size_t path, double t0, double v0,
  const IntersectionLayout& layout, const SafetyConfig& cfg)
{
  CavRecord& rec = db.insert(path);
  PlanRequest req;
  req.cav_id = rec.cav_id;
  req.path = path;
  req.t0 = t0;
  req.p0 = 0.0;
  req.v0 = v0;
  auto result = solve_exit_time(req, db, layout, cfg);
  result.plan.plan_version = 0;
  rec.segments.push_back(std::move(result.plan));
  return rec.cav_id;
}

namespace detail {

inline std::shared_ptr<const DeviationPosterior> posterior_from(
  const CavRecord& rec, double p0, double pf, const SafetyConfig& cfg)
{
  if (!rec.gp)
    return nullptr;
  return std::make_shared<const DeviationPosterior>(
    DeviationPosterior::from_model(
      *rec.gp, p0, pf, cfg.tube_grid_step, cfg.levels, p0 > 0.0));
}

inline void replan(
  CoordinatorDatabase& db, int cav_id, const MeasuredState& state,
  const IntersectionLayout& layout, const SafetyConfig& cfg)
{
  CavRecord& rec = db.at(cav_id);
  const double pf = layout.path(rec.path).length;
  PlanRequest req;
  req.cav_id = cav_id;
  req.path = rec.path;
  req.t0 = state.t;
  req.p0 = state.p;
  req.v0 = state.v;
  req.deviation = posterior_from(rec, state.p, pf, cfg);
  auto result = solve_exit_time(req, db, layout, cfg);
  result.plan.plan_version = rec.current().plan_version + 1;

  // A replanning event at the same instant supersedes the earlier segment.
  if (rec.current().bc.t0 == state.t && rec.current().bc.p0 == state.p)
    rec.segments.back() = std::move(result.plan);
  else
    rec.segments.push_back(std::move(result.plan));
}

} // namespace detail

/// The vehicle reached the characterization point: learn its deviation
/// model, replan with it and return the ids that must replan next.
inline std::vector<int> handle_characterization(
  CoordinatorDatabase& db, int cav_id, const ObservationSet& obs,
  const MeasuredState& state, const IntersectionLayout& layout,
  const SafetyConfig& cfg, const FitOptions& fit = {})
{
  CavRecord& rec = db.at(cav_id);
  try
  {
    const FitResult theta = fit_hyperparameters(obs, fit);
    rec.gp = std::make_shared<const GpModel>(obs, theta.theta);
  }
  catch (const std::exception& e)
  {
    spdlog::warn("cav {}: uncertainty characterization failed ({}); keeping "
      "the current plan", cav_id, e.what());
    return {};
  }
  rec.characterized = true;
  detail::replan(db, cav_id, state, layout, cfg);
  return db.ids_after(cav_id);
}

/// Every vehicle after from_cav_id re-solves its plan in queue order from
/// its measured state, seeing the plans updated before it.
inline std::vector<int> handle_replanning(
  CoordinatorDatabase& db, int from_cav_id,
  const std::map<int, MeasuredState>& states,
  const IntersectionLayout& layout, const SafetyConfig& cfg)
{
  const std::vector<int> ids = db.ids_after(from_cav_id);
  for (const int id : ids)
    detail::replan(db, id, states.at(id), layout, cfg);
  return ids;
}

//==============================================================================
// Audit
//==============================================================================

struct AuditViolation
{
  enum class Kind { Lateral, RearEnd, Speed } kind = Kind::Lateral;
  int cav_a = 0;
  int cav_b = 0;
  double slack = 0.0;
  std::string conflict_id;
};

struct AuditReport
{
  std::vector<AuditViolation> violations;
  double min_lateral_slack = std::numeric_limits<double>::infinity();
  double min_rear_end_slack = std::numeric_limits<double>::infinity();

  bool ok() const { return violations.empty(); }
};

/// Check every stored plan pair against the robust constraints, using each
/// vehicle's stored tube. Pairs involving an infeasible-flagged plan are
/// reported in the minima but not as violations.
inline AuditReport audit_records(
  const std::map<int, CavRecord>& recs, const IntersectionLayout& layout,
  const SafetyConfig& cfg, double tolerance = 1e-9)
{
  AuditReport report;
  for (auto a = recs.begin(); a != recs.end(); ++a)
  {
    const CavRecord& ra = a->second;
    if (ra.segments.empty())
      continue;
    for (auto b = recs.begin(); b != a; ++b)
    {
      const CavRecord& rb = b->second;
      if (rb.segments.empty() || ra.path == rb.path)
        continue;
      for (const auto& c : layout.shared_conflicts(ra.path, rb.path))
      {
        const CavPlan& sa = ra.segment_at_position(c.distance_a);
        const CavPlan& sb = rb.segment_at_position(c.distance_b);
        const double slack = lateral_gap(
          sa.time_at(c.distance_a), sa.time_interval(c.distance_a),
          sb.time_at(c.distance_b), sb.time_interval(c.distance_b), cfg.t_h);
        report.min_lateral_slack = std::min(report.min_lateral_slack, slack);
        if (slack < -tolerance && !sa.infeasible && !sb.infeasible)
          report.violations.push_back(
            {AuditViolation::Kind::Lateral, ra.cav_id, rb.cav_id, slack,
              c.conflict_id});
      }
    }

    const CavRecord* lead = predecessor_in(recs, ra.cav_id, ra.path);
    if (lead && !lead->segments.empty())
    {
      const double slack = min_rear_end_slack(ra.current(), *lead, cfg);
      report.min_rear_end_slack = std::min(report.min_rear_end_slack, slack);
      if (slack < -tolerance && !ra.current().infeasible)
        report.violations.push_back(
          {AuditViolation::Kind::RearEnd, ra.cav_id, lead->cav_id, slack, {}});
    }

    if (!speed_bounds_ok(ra.current(), cfg) && !ra.current().infeasible)
      report.violations.push_back(
        {AuditViolation::Kind::Speed, ra.cav_id, ra.cav_id, 0.0, {}});
  }
  return report;
}

inline AuditReport audit_database(
  const CoordinatorDatabase& db, const IntersectionLayout& layout,
  const SafetyConfig& cfg, double tolerance = 1e-9)
{
  return audit_records(db.records(), layout, cfg, tolerance);
}

} // namespace robocoord

#endif // ROBOCOORD__COORDINATION_HPP
