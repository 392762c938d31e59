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

#ifndef ROBOCOORD__CONFIG_HPP
#define ROBOCOORD__CONFIG_HPP

#include "sim.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

// Configuration files are INI-like:
//
//   [scenario]            n_cavs, rate, seed, mode, v0_min, v0_max, n_obs,
//                         obs_noise, c1, c2
//   [safety]              t_h, gamma, varphi, v_min, v_max, u_min, u_max,
//                         p_z, P_e, P_f, P_g
//   [planner]             scan_step, refine_tolerance, check_dt,
//                         tube_grid_step, fit_restarts, fit_iterations,
//                         entry_retry
//   [output]              dir, sample_period
//   [path <id>]           length, weight, conflicts = <id>@<distance> ...
//
// '#' and ';' start comments. Every key of [scenario] and [safety] is
// required; the other sections fall back to built-in defaults. Paths are
// listed in file order.

namespace robocoord {

struct RunConfig
{
  ScenarioConfig scenario;
  std::string out_dir = "out";
  double sample_period = 0.1;
};

/// Raised with one message per problem found; each names the line or key.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(std::vector<std::string> messages)
  : std::runtime_error(join(messages)),
    messages_(std::move(messages))
  {
  }

  const std::vector<std::string>& messages() const { return messages_; }

private:
  static std::string join(const std::vector<std::string>& m)
  {
    std::string out;
    for (const auto& s : m)
      out += (out.empty() ? "" : "\n") + s;
    return out;
  }

  std::vector<std::string> messages_;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template<typename T>
bool parse_number(std::string_view s, T& out)
{
  s = trim(s);
  if (s.empty())
    return false;
  if (s.front() == '+')
    s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Shortest text that reads back to the same double.
inline std::string format_number(double x)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

struct Entry
{
  std::string value;
  int line = 0;
};

struct Section
{
  std::string name;
  std::string arg; ///< path id for [path <id>]
  int line = 0;
  std::map<std::string, Entry> entries;
};

} // namespace detail

/// Parse configuration text. `source` prefixes every message.
inline RunConfig parse_config(std::string_view text, const std::string& source = "config")
{
  std::vector<std::string> errors;
  const auto at = [&](int line, const std::string& msg)
    {
      errors.push_back(source + ":" + std::to_string(line) + ": " + msg);
    };

  std::vector<detail::Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw))
  {
    ++line;
    std::string_view s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string_view::npos)
      s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty())
      continue;

    if (s.front() == '[')
    {
      if (s.back() != ']')
      {
        at(line, "unterminated section header");
        continue;
      }
      const auto body = detail::trim(s.substr(1, s.size() - 2));
      const auto space = body.find_first_of(" \t");
      detail::Section sec;
      sec.line = line;
      sec.name = std::string(body.substr(0, space));
      if (space != std::string_view::npos)
        sec.arg = std::string(detail::trim(body.substr(space)));
      static const std::set<std::string> known{
        "scenario", "safety", "planner", "output", "path"};
      if (!known.count(sec.name))
        at(line, "unknown section [" + sec.name + "]");
      else if (sec.name == "path" && sec.arg.empty())
        at(line, "[path] needs an id, e.g. [path N_S]");
      else if (sec.name != "path" && !sec.arg.empty())
        at(line, "section [" + sec.name + "] takes no argument");
      else
        for (const auto& other : sections)
          if (other.name == sec.name && other.arg == sec.arg)
            at(line, "duplicate section [" + std::string(body) + "]");
      sections.push_back(std::move(sec));
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
    {
      at(line, "expected 'key = value'");
      continue;
    }
    if (sections.empty())
    {
      at(line, "key outside of any section");
      continue;
    }
    const std::string key(detail::trim(s.substr(0, eq)));
    const std::string value(detail::trim(s.substr(eq + 1)));
    auto& entries = sections.back().entries;
    if (entries.count(key))
      at(line, "duplicate key '" + key + "'");
    entries[key] = {value, line};
  }

  RunConfig cfg;
  ScenarioConfig& sc = cfg.scenario;
  SafetyConfig& sf = sc.safety;

  const auto find_section = [&](const std::string& name) -> const detail::Section*
    {
      for (const auto& sec : sections)
        if (sec.name == name)
          return &sec;
      return nullptr;
    };

  using Setter = std::function<bool(const std::string&)>;
  struct Key
  {
    std::string name;
    Setter set;
    bool required;
  };

  const auto real = [](double& dst)
    {
      return Setter([&dst](const std::string& v) { return detail::parse_number(v, dst); });
    };
  const auto integer = [](int& dst)
    {
      return Setter([&dst](const std::string& v) { return detail::parse_number(v, dst); });
    };

  const auto apply = [&](const detail::Section* sec, const std::string& name,
    const std::vector<Key>& keys)
    {
      if (!sec)
      {
        for (const auto& k : keys)
          if (k.required)
            errors.push_back(source + ": missing required key '" + k.name
              + "' in [" + name + "]");
        return;
      }
      for (const auto& [key, entry] : sec->entries)
      {
        bool found = false;
        for (const auto& k : keys)
          if (k.name == key)
            found = true;
        if (!found)
          at(entry.line, "unknown key '" + key + "' in [" + name + "]");
      }
      for (const auto& k : keys)
      {
        const auto it = sec->entries.find(k.name);
        if (it == sec->entries.end())
        {
          if (k.required)
            errors.push_back(source + ":" + std::to_string(sec->line)
              + ": missing required key '" + k.name + "' in [" + name + "]");
          continue;
        }
        if (!k.set(it->second.value))
          at(it->second.line, "invalid value '" + it->second.value
            + "' for key '" + k.name + "'");
      }
    };

  apply(find_section("scenario"), "scenario", {
      {"n_cavs", integer(sc.n_cavs), true},
      {"rate", real(sc.rate), true},
      {"seed", Setter([&](const std::string& v)
        { return detail::parse_number(v, sc.seed); }), true},
      {"mode", Setter([&](const std::string& v)
        {
          const auto m = parse_mode(v);
          if (m)
            sc.mode = *m;
          return m.has_value();
        }), true},
      {"v0_min", real(sc.v0_min), true},
      {"v0_max", real(sc.v0_max), true},
      {"n_obs", integer(sc.n_obs), true},
      {"obs_noise", real(sc.obs_noise), true},
      {"c1", real(sc.truth.c1), true},
      {"c2", real(sc.truth.c2), true},
    });
  apply(find_section("safety"), "safety", {
      {"t_h", real(sf.t_h), true},
      {"gamma", real(sf.gamma), true},
      {"varphi", real(sf.varphi), true},
      {"v_min", real(sf.limits.v_min), true},
      {"v_max", real(sf.limits.v_max), true},
      {"u_min", real(sf.limits.u_min), true},
      {"u_max", real(sf.limits.u_max), true},
      {"p_z", real(sf.p_z), true},
      {"P_e", real(sf.levels.p_e), true},
      {"P_f", real(sf.levels.p_f), true},
      {"P_g", real(sf.levels.p_g), true},
    });
  apply(find_section("planner"), "planner", {
      {"scan_step", real(sf.scan_step), false},
      {"refine_tolerance", real(sf.refine_tolerance), false},
      {"check_dt", real(sf.check_dt), false},
      {"tube_grid_step", real(sf.tube_grid_step), false},
      {"fit_restarts", integer(sc.fit_restarts), false},
      {"fit_iterations", integer(sc.fit_iterations), false},
      {"entry_retry", real(sc.entry_retry), false},
    });
  apply(find_section("output"), "output", {
      {"dir", Setter([&](const std::string& v)
        {
          cfg.out_dir = v;
          return !v.empty();
        }), false},
      {"sample_period", real(cfg.sample_period), false},
    });

  std::vector<PathGeometry> paths;
  std::vector<double> weights;
  bool any_weight = false;
  for (const auto& sec : sections)
  {
    if (sec.name != "path")
      continue;
    PathGeometry path;
    path.path_id = sec.arg;
    double weight = 1.0;
    std::string conflicts;
    apply(&sec, "path " + sec.arg, {
        {"length", real(path.length), true},
        {"weight", Setter([&](const std::string& v)
          {
            any_weight = true;
            return detail::parse_number(v, weight);
          }), false},
        {"conflicts", Setter([&](const std::string& v)
          {
            conflicts = v;
            return true;
          }), false},
      });
    std::istringstream tokens(conflicts);
    std::string tok;
    const auto cline = sec.entries.count("conflicts")
      ? sec.entries.at("conflicts").line : sec.line;
    while (tokens >> tok)
    {
      const auto sep = tok.find('@');
      ConflictRef ref;
      if (sep == std::string::npos || sep == 0
        || !detail::parse_number(std::string_view(tok).substr(sep + 1), ref.distance))
      {
        at(cline, "conflict '" + tok + "' must look like <id>@<distance>");
        continue;
      }
      ref.conflict_id = tok.substr(0, sep);
      path.conflicts.push_back(std::move(ref));
    }
    paths.push_back(std::move(path));
    weights.push_back(weight);
  }
  if (paths.empty())
    errors.push_back(source + ": at least one [path <id>] section is required");

  if (!errors.empty())
    throw ConfigError(std::move(errors));

  sc.layout = IntersectionLayout(std::move(paths));
  if (any_weight)
    sc.path_weights = std::move(weights);
  return cfg;
}

/// Semantic problems of an otherwise well-formed configuration.
inline std::vector<std::string> validate(const RunConfig& cfg)
{
  std::vector<std::string> out = cfg.scenario.problems();
  if (!(cfg.sample_period > 0.0))
    out.push_back("sample_period must be positive");
  return out;
}

/// Canonical text of a configuration; parsing it yields the same values.
inline std::string normalize(const RunConfig& cfg)
{
  const auto& sc = cfg.scenario;
  const auto& sf = sc.safety;
  const auto n = [](double x) { return detail::format_number(x); };
  std::ostringstream o;
  o << "[scenario]\n"
    << "n_cavs = " << sc.n_cavs << "\n"
    << "rate = " << n(sc.rate) << "\n"
    << "seed = " << sc.seed << "\n"
    << "mode = " << to_string(sc.mode) << "\n"
    << "v0_min = " << n(sc.v0_min) << "\n"
    << "v0_max = " << n(sc.v0_max) << "\n"
    << "n_obs = " << sc.n_obs << "\n"
    << "obs_noise = " << n(sc.obs_noise) << "\n"
    << "c1 = " << n(sc.truth.c1) << "\n"
    << "c2 = " << n(sc.truth.c2) << "\n"
    << "\n[safety]\n"
    << "t_h = " << n(sf.t_h) << "\n"
    << "gamma = " << n(sf.gamma) << "\n"
    << "varphi = " << n(sf.varphi) << "\n"
    << "v_min = " << n(sf.limits.v_min) << "\n"
    << "v_max = " << n(sf.limits.v_max) << "\n"
    << "u_min = " << n(sf.limits.u_min) << "\n"
    << "u_max = " << n(sf.limits.u_max) << "\n"
    << "p_z = " << n(sf.p_z) << "\n"
    << "P_e = " << n(sf.levels.p_e) << "\n"
    << "P_f = " << n(sf.levels.p_f) << "\n"
    << "P_g = " << n(sf.levels.p_g) << "\n"
    << "\n[planner]\n"
    << "scan_step = " << n(sf.scan_step) << "\n"
    << "refine_tolerance = " << n(sf.refine_tolerance) << "\n"
    << "check_dt = " << n(sf.check_dt) << "\n"
    << "tube_grid_step = " << n(sf.tube_grid_step) << "\n"
    << "fit_restarts = " << sc.fit_restarts << "\n"
    << "fit_iterations = " << sc.fit_iterations << "\n"
    << "entry_retry = " << n(sc.entry_retry) << "\n"
    << "\n[output]\n"
    << "dir = " << cfg.out_dir << "\n"
    << "sample_period = " << n(cfg.sample_period) << "\n";
  for (std::size_t i = 0; i < sc.layout.size(); ++i)
  {
    const auto& p = sc.layout.path(i);
    o << "\n[path " << p.path_id << "]\n"
      << "length = " << n(p.length) << "\n";
    if (!sc.path_weights.empty())
      o << "weight = " << n(sc.path_weights[i]) << "\n";
    o << "conflicts =";
    for (const auto& c : p.conflicts)
      o << " " << c.conflict_id << "@" << n(c.distance);
    o << "\n";
  }
  return o.str();
}

inline RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError({path + ": cannot open configuration file"});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

} // namespace robocoord

#endif // ROBOCOORD__CONFIG_HPP
