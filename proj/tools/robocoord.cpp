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
#include <robocoord/sim.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_violation = 2;

struct Overrides
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> out_dir;
  std::optional<double> sample_period;
};

void setup_logging()
{
  auto logger = spdlog::stderr_color_mt("robocoord");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ROBOCOORD_LOG"))
  {
    const std::string level = env;
    // from_str maps unknown names to off, so check the round trip.
    const auto parsed = spdlog::level::from_str(level);
    if (parsed != spdlog::level::off || level == "off")
      spdlog::set_level(parsed);
    else
      spdlog::warn("ignoring ROBOCOORD_LOG={} (expected trace, debug, info, warn, error or off)", level);
  }
}

/// Load, override and validate. Prints every problem and returns nullopt
/// when the configuration is unusable.
std::optional<robocoord::RunConfig> load(const Overrides& o)
{
  robocoord::RunConfig cfg;
  try
  {
    cfg = robocoord::load_config(o.config);
  }
  catch (const robocoord::ConfigError& e)
  {
    for (const auto& m : e.messages())
      std::cerr << "error: " << m << "\n";
    return std::nullopt;
  }

  if (o.seed)
    cfg.scenario.seed = *o.seed;
  if (o.mode)
  {
    const auto m = robocoord::parse_mode(*o.mode);
    if (!m)
    {
      std::cerr << "error: --mode must be deterministic or robust\n";
      return std::nullopt;
    }
    cfg.scenario.mode = *m;
  }
  if (o.out_dir)
    cfg.out_dir = *o.out_dir;
  if (o.sample_period)
    cfg.sample_period = *o.sample_period;

  const auto problems = robocoord::validate(cfg);
  if (!problems.empty())
  {
    for (const auto& p : problems)
      std::cerr << "error: " << o.config << ": " << p << "\n";
    return std::nullopt;
  }
  return cfg;
}

void report(const robocoord::RunResult& r)
{
  const auto& m = r.metrics;
  spdlog::info("{} run, seed {}: {} vehicles, mean travel time {:.3f} s",
    robocoord::to_string(r.mode), r.seed, m.n_cavs, m.mean_travel_time);
  spdlog::info("actual violations: lateral {}, rear-end {}; tube crossings: "
    "lateral {}, rear-end {}", m.lateral_violations, m.rear_end_violations,
    m.tube_lateral_crossings, m.tube_rear_end_crossings);
  if (m.infeasible_plans > 0)
    spdlog::warn("{} plan(s) flagged infeasible", m.infeasible_plans);
}

int cmd_run(const Overrides& o)
{
  const auto cfg = load(o);
  if (!cfg)
    return exit_config;
  const auto r = robocoord::run(cfg->scenario, cfg->sample_period);
  robocoord::write_run(cfg->out_dir, r, cfg->scenario.layout);
  report(r);
  return r.metrics.safety_violation() ? exit_violation : exit_ok;
}

int cmd_sweep(const Overrides& o)
{
  const auto cfg = load(o);
  if (!cfg)
    return exit_config;

  auto det_cfg = cfg->scenario;
  det_cfg.mode = robocoord::Mode::Deterministic;
  auto rob_cfg = cfg->scenario;
  rob_cfg.mode = robocoord::Mode::Robust;

  auto det = std::async(std::launch::async,
      [&] { return robocoord::run(det_cfg, cfg->sample_period); });
  const auto rob = robocoord::run(rob_cfg, cfg->sample_period);
  const auto d = det.get();

  const std::filesystem::path out = cfg->out_dir;
  robocoord::write_run(out / "deterministic", d, det_cfg.layout);
  robocoord::write_run(out / "robust", rob, rob_cfg.layout);
  robocoord::write_atomic(out / "comparison.json",
    robocoord::comparison_json(d, rob).dump(2) + "\n");
  report(d);
  report(rob);
  return rob.metrics.safety_violation() ? exit_violation : exit_ok;
}

int cmd_check_config(const Overrides& o)
{
  const auto cfg = load(o);
  if (!cfg)
    return exit_config;
  std::cout << robocoord::normalize(*cfg);
  return exit_ok;
}

void add_common(CLI::App* sub, Overrides& o, bool run_flags)
{
  sub->add_option("--config", o.config, "Configuration file")->required();
  sub->add_option("--seed", o.seed, "Override the scenario seed");
  if (!run_flags)
    return;
  sub->add_option("--mode", o.mode, "deterministic or robust");
  sub->add_option("--out-dir", o.out_dir, "Output directory");
  sub->add_option("--sample-period", o.sample_period, "Trajectory sample period [s]");
}

} // namespace

int main(int argc, char** argv)
{
  setup_logging();

  CLI::App app{"Signal-free intersection coordination under learned deviations"};
  app.require_subcommand(1);

  Overrides run_o;
  Overrides sweep_o;
  Overrides check_o;
  auto* run = app.add_subcommand("run", "Simulate one mode and write its outputs");
  add_common(run, run_o, true);
  auto* sweep = app.add_subcommand("sweep", "Run both modes on one seed and compare");
  add_common(sweep, sweep_o, true);
  sweep->get_option("--mode")->description("ignored; both modes run");
  auto* check = app.add_subcommand("check-config", "Validate and print the effective configuration");
  add_common(check, check_o, false);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try
  {
    if (*run)
      return cmd_run(run_o);
    if (*sweep)
      return cmd_sweep(sweep_o);
    return cmd_check_config(check_o);
  }
  catch (const std::exception& e)
  {
    spdlog::error("{}", e.what());
    return exit_config;
  }
}
