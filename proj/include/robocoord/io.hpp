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

#ifndef ROBOCOORD__IO_HPP
#define ROBOCOORD__IO_HPP

#include "sim.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace robocoord {

using Json = nlohmann::ordered_json;

/// Replace `path` with `content` through a temporary file and a rename, so
/// readers never observe a half-written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out)
      throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string trajectories_csv(const RunResult& r, const IntersectionLayout& layout)
{
  std::string out = "t,cav_id,path,p_nom,v_nom,u_nom,p_act,v_act\n";
  for (const auto& s : r.trajectory)
    out += fmt::format("{:.3f},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
        s.t, s.cav_id, layout.path(s.path).path_id,
        s.p_nom, s.v_nom, s.u_nom, s.p_act, s.v_act);
  return out;
}

/// Every published tube sampled on its position grid. Deterministic runs
/// emit the learned but unused tube as plan version 0.
inline std::string tube_csv(const RunResult& r)
{
  std::string out = "cav_id,plan_version,p,t_nom,e_lo,e_hi,f_lo,f_hi,g_lo,g_hi\n";
  const auto emit = [&](int id, const CavPlan& seg, const DeviationPosterior& dev)
    {
      const ConfidenceTube tube = build_tube(dev, seg.phi, seg.bc);
      for (const auto& s : tube.samples)
        out += fmt::format(
          "{},{},{:.4f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
          id, seg.plan_version, s.p, s.t_nominal, s.e.lo, s.e.hi,
          s.f.lo, s.f.hi, s.g.lo, s.g.hi);
    };
  for (const auto& [id, rec] : r.history)
  {
    const auto report = r.report_tubes.find(id);
    for (const auto& seg : rec.segments)
    {
      if (seg.deviation)
        emit(id, seg, *seg.deviation);
      else if (report != r.report_tubes.end() && seg.bc.p0 == 0.0)
        emit(id, seg, *report->second);
    }
  }
  return out;
}

inline std::string events_csv(const RunResult& r)
{
  std::string out = "t,type,cav_id,tf_new,plan_version\n";
  for (const auto& e : r.events)
    out += fmt::format("{:.6f},{},{},{:.6f},{}\n",
        e.t, e.type, e.cav_id, e.tf_new, e.plan_version);
  return out;
}

namespace detail {

inline Json finite_or_null(double x)
{
  return std::isfinite(x) ? Json(x) : Json(nullptr);
}

} // namespace detail

inline Json metrics_json(const RunResult& r)
{
  const MetricsReport& m = r.metrics;
  Json j;
  j["mode"] = std::string(to_string(r.mode));
  j["seed"] = r.seed;
  j["n_cavs"] = m.n_cavs;
  j["min_lateral_slack_s"] = detail::finite_or_null(m.min_lateral_slack);
  j["min_rear_end_slack_m"] = detail::finite_or_null(m.min_rear_end_slack);
  j["lateral_violations"] = m.lateral_violations;
  j["rear_end_violations"] = m.rear_end_violations;
  j["min_tube_lateral_slack_s"] = detail::finite_or_null(m.min_tube_lateral_slack);
  j["tube_lateral_crossings"] = m.tube_lateral_crossings;
  j["tube_rear_end_crossings"] = m.tube_rear_end_crossings;
  Json pairs = Json::array();
  for (const auto& [a, b] : m.crossing_pairs)
    pairs.push_back({a, b});
  j["tube_crossing_pairs"] = pairs;
  j["mean_travel_time_s"] = m.mean_travel_time;
  Json tt = Json::object();
  for (const auto& [id, t] : m.travel_time)
    tt[std::to_string(id)] = t;
  j["travel_time_s"] = tt;
  j["characterizations"] = m.characterizations;
  j["total_replans"] = m.total_replans;
  Json rp = Json::object();
  for (const auto& [id, n] : m.replans)
    rp[std::to_string(id)] = n;
  j["replans"] = rp;
  j["infeasible_plans"] = m.infeasible_plans;
  j["audit_failures"] = m.audit_failures;
  j["max_entry_delay_s"] = m.max_entry_delay;
  j["safety_violation"] = m.safety_violation();
  return j;
}

/// Write the four output files of one run into `dir`.
inline void write_run(
  const std::filesystem::path& dir, const RunResult& r, const IntersectionLayout& layout)
{
  std::filesystem::create_directories(dir);
  write_atomic(dir / "trajectories.csv", trajectories_csv(r, layout));
  write_atomic(dir / "tube.csv", tube_csv(r));
  write_atomic(dir / "events.csv", events_csv(r));
  write_atomic(dir / "metrics.json", metrics_json(r).dump(2) + "\n");
}

inline Json comparison_json(const RunResult& deterministic, const RunResult& robust)
{
  const auto summary = [](const RunResult& r)
    {
      const MetricsReport& m = r.metrics;
      Json j;
      j["min_lateral_slack_s"] = detail::finite_or_null(m.min_lateral_slack);
      j["min_rear_end_slack_m"] = detail::finite_or_null(m.min_rear_end_slack);
      j["lateral_violations"] = m.lateral_violations;
      j["rear_end_violations"] = m.rear_end_violations;
      j["violations"] = m.lateral_violations + m.rear_end_violations;
      j["tube_lateral_crossings"] = m.tube_lateral_crossings;
      j["tube_rear_end_crossings"] = m.tube_rear_end_crossings;
      j["bound_crossings"] = m.tube_lateral_crossings + m.tube_rear_end_crossings;
      j["mean_travel_time_s"] = m.mean_travel_time;
      j["infeasible_plans"] = m.infeasible_plans;
      return j;
    };
  Json j;
  j["seed"] = robust.seed;
  j["deterministic"] = summary(deterministic);
  j["robust"] = summary(robust);
  j["travel_time_delta_s"] =
    robust.metrics.mean_travel_time - deterministic.metrics.mean_travel_time;
  return j;
}

} // namespace robocoord

#endif // ROBOCOORD__IO_HPP
