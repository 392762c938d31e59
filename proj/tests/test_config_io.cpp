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

#include <robocoord/config.hpp>
#include <robocoord/io.hpp>

#include <catch2/catch.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace robocoord;

namespace {

std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_text()
{
  return read_file(std::filesystem::path(ROBOCOORD_SOURCE_DIR) / "config" / "default.ini");
}

std::string replace_line(std::string text, const std::string& from, const std::string& to)
{
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  text.replace(at, from.size(), to);
  return text;
}

std::vector<std::string> errors_of(const std::string& text)
{
  try
  {
    return validate(parse_config(text, "test.ini"));
  }
  catch (const ConfigError& e)
  {
    return e.messages();
  }
}

bool any_contains(const std::vector<std::string>& msgs, const std::string& needle)
{
  for (const auto& m : msgs)
    if (m.find(needle) != std::string::npos)
      return true;
  return false;
}

} // namespace

SCENARIO("The shipped configuration")
{
  const RunConfig cfg = parse_config(default_text(), "default.ini");
  CHECK(validate(cfg).empty());
  const ScenarioConfig def;
  CHECK(cfg.scenario.n_cavs == def.n_cavs);
  CHECK(cfg.scenario.safety.t_h == def.safety.t_h);
  CHECK(cfg.scenario.safety.p_z == def.safety.p_z);
  CHECK(cfg.scenario.layout.size() == 6);
  CHECK(cfg.scenario.layout.path(0).path_id == "N_S");
  CHECK(cfg.scenario.layout.path(5).conflicts.size() == 3);
  CHECK(cfg.out_dir == "out");

  THEN("Normalizing is a fixed point")
  {
    const std::string once = normalize(cfg);
    const std::string twice = normalize(parse_config(once, "normalized"));
    CHECK(once == twice);
  }
}

SCENARIO("Configuration errors")
{
  const std::string text = default_text();

  THEN("A missing key is named")
  {
    const auto msgs = errors_of(replace_line(text, "t_h = 0.5\n", ""));
    REQUIRE_FALSE(msgs.empty());
    CHECK(any_contains(msgs, "t_h"));
  }
  THEN("Confidence levels must lie in (0, 1)")
  {
    CHECK_FALSE(errors_of(replace_line(text, "P_e = 0.95", "P_e = 1.2")).empty());
  }
  THEN("The characterization point must lie on the path")
  {
    CHECK_FALSE(errors_of(replace_line(text, "p_z = 50", "p_z = 500")).empty());
  }
  THEN("Unknown keys report their line")
  {
    const auto at = text.find("seed = 1\n");
    REQUIRE(at != std::string::npos);
    const auto line = std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n') + 2;
    const auto msgs = errors_of(replace_line(text, "seed = 1\n", "seed = 1\nspeed = 3\n"));
    REQUIRE_FALSE(msgs.empty());
    CHECK(any_contains(msgs, "test.ini:" + std::to_string(line) + ":"));
    CHECK(any_contains(msgs, "speed"));
  }
  THEN("Malformed numbers are rejected")
  {
    CHECK_FALSE(errors_of(replace_line(text, "rate = 3600", "rate = fast")).empty());
  }
  THEN("A bad mode is rejected")
  {
    CHECK_FALSE(errors_of(replace_line(text, "mode = robust", "mode = careful")).empty());
  }
}

SCENARIO("Output files")
{
  const auto dir = std::filesystem::temp_directory_path() / "robocoord_test_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  THEN("Atomic writes leave no temporary file behind")
  {
    write_atomic(dir / "a.txt", "first");
    write_atomic(dir / "a.txt", "second");
    CHECK(read_file(dir / "a.txt") == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  }

  GIVEN("A short run")
  {
    ScenarioConfig cfg;
    cfg.n_cavs = 3;
    cfg.fit_restarts = 2;
    const auto rob = run(cfg, 0.5);
    cfg.mode = Mode::Deterministic;
    const auto det = run(cfg, 0.5);
    write_run(dir / "robust", rob, cfg.layout);

    const auto first_line = [&](const char* name)
      {
        const std::string s = read_file(dir / "robust" / name);
        return s.substr(0, s.find('\n'));
      };
    CHECK(first_line("trajectories.csv") == "t,cav_id,path,p_nom,v_nom,u_nom,p_act,v_act");
    CHECK(first_line("tube.csv") == "cav_id,plan_version,p,t_nom,e_lo,e_hi,f_lo,f_hi,g_lo,g_hi");
    CHECK(first_line("events.csv") == "t,type,cav_id,tf_new,plan_version");

    const auto metrics = Json::parse(read_file(dir / "robust" / "metrics.json"));
    for (const char* key : {"mode", "seed", "n_cavs", "min_lateral_slack_s",
           "min_rear_end_slack_m", "lateral_violations", "rear_end_violations",
           "tube_lateral_crossings", "tube_rear_end_crossings", "mean_travel_time_s",
           "total_replans", "characterizations", "safety_violation"})
      CHECK(metrics.contains(key));
    CHECK(metrics["mode"] == "robust");

    const Json cmp = comparison_json(det, rob);
    for (const char* side : {"deterministic", "robust"})
    {
      REQUIRE(cmp.contains(side));
      CHECK(cmp[side].contains("violations"));
      CHECK(cmp[side].contains("bound_crossings"));
      CHECK(cmp[side].contains("mean_travel_time_s"));
    }
    CHECK(cmp["travel_time_delta_s"].get<double>()
          == Approx(rob.metrics.mean_travel_time - det.metrics.mean_travel_time));
  }
  std::filesystem::remove_all(dir);
}
