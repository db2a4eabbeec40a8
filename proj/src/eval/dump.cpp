// Copyright 2026 The dgfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "eval/dump.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "json.hpp"

namespace dgf {

using nlohmann::json;

void PredictionDump::validate() const {
  const auto n = agents();
  if (modes < 1) throw SchemaError("modes: must be >= 1");
  if (steps < 1) throw SchemaError("steps: must be >= 1");
  if (static_cast<std::int64_t>(trajectories.size()) != n * modes * steps * 2) {
    throw SchemaError("trajectories: expected [" + std::to_string(n) + "][" + std::to_string(modes) + "][" +
                      std::to_string(steps) + "][2]");
  }
  if (static_cast<std::int64_t>(probabilities.size()) != n * modes) {
    throw SchemaError("probabilities: expected [" + std::to_string(n) + "][" + std::to_string(modes) + "]");
  }
  if (static_cast<std::int64_t>(kept.size()) != n) throw SchemaError("kept: expected one entry per agent");
  if (static_cast<std::int64_t>(spread.size()) != n) throw SchemaError("spread: expected one entry per agent");
  for (double v : trajectories) {
    if (!std::isfinite(v)) throw SchemaError("trajectories: non-finite value");
  }
  for (double v : probabilities) {
    if (!std::isfinite(v) || v < 0.0) throw SchemaError("probabilities: values must be finite and >= 0");
  }
}

std::string serialize_dump(const PredictionDump& d) {
  d.validate();
  json j;
  j["version"] = kDumpVersion;
  j["scenario_id"] = d.scenario_id;
  j["agent_ids"] = d.agent_ids;
  json traj = json::array(), probs = json::array();
  for (std::int64_t i = 0; i < d.agents(); ++i) {
    json agent = json::array();
    for (std::int64_t m = 0; m < d.modes; ++m) {
      json mode = json::array();
      for (std::int64_t s = 0; s < d.steps; ++s) {
        const auto at = static_cast<std::size_t>(((i * d.modes + m) * d.steps + s) * 2);
        mode.push_back({d.trajectories[at], d.trajectories[at + 1]});
      }
      agent.push_back(std::move(mode));
    }
    traj.push_back(std::move(agent));
    probs.push_back(std::vector<double>(d.probabilities.begin() + i * d.modes,
                                        d.probabilities.begin() + (i + 1) * d.modes));
  }
  j["trajectories"] = std::move(traj);
  j["probabilities"] = std::move(probs);
  j["kept"] = std::vector<bool>(d.kept.begin(), d.kept.end());
  j["spread"] = d.spread;
  return j.dump(1);
}

namespace {

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string(key) + ": missing");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError(where + ": expected a number");
  return v.get<double>();
}

}  // namespace

PredictionDump parse_dump(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("prediction dump: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("prediction dump: expected an object");
  const auto& version = field(j, "version");
  if (!version.is_number_integer() || version.get<int>() != kDumpVersion) {
    throw SchemaError("version: unsupported prediction dump version");
  }
  PredictionDump d;
  const auto& id = field(j, "scenario_id");
  if (!id.is_string()) throw SchemaError("scenario_id: expected a string");
  d.scenario_id = id.get<std::string>();
  const auto& ids = field(j, "agent_ids");
  if (!ids.is_array()) throw SchemaError("agent_ids: expected an array");
  for (const auto& v : ids) {
    if (!v.is_number_integer()) throw SchemaError("agent_ids: expected integers");
    d.agent_ids.push_back(v.get<int>());
  }
  const auto& traj = field(j, "trajectories");
  if (!traj.is_array() || traj.size() != d.agent_ids.size()) throw SchemaError("trajectories: expected one entry per agent");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const std::string where = "trajectories[" + std::to_string(i) + "]";
    if (!traj[i].is_array() || traj[i].empty()) throw SchemaError(where + ": expected a non-empty array of modes");
    if (i == 0) d.modes = static_cast<std::int64_t>(traj[i].size());
    if (static_cast<std::int64_t>(traj[i].size()) != d.modes) throw SchemaError(where + ": inconsistent mode count");
    for (std::size_t m = 0; m < traj[i].size(); ++m) {
      const auto& mode = traj[i][m];
      const std::string wm = where + "[" + std::to_string(m) + "]";
      if (!mode.is_array() || mode.empty()) throw SchemaError(wm + ": expected a non-empty array of points");
      if (d.steps == 0) d.steps = static_cast<std::int64_t>(mode.size());
      if (static_cast<std::int64_t>(mode.size()) != d.steps) throw SchemaError(wm + ": inconsistent step count");
      for (std::size_t s = 0; s < mode.size(); ++s) {
        const std::string ws = wm + "[" + std::to_string(s) + "]";
        if (!mode[s].is_array() || mode[s].size() != 2) throw SchemaError(ws + ": expected [x, y]");
        d.trajectories.push_back(number(mode[s][0], ws));
        d.trajectories.push_back(number(mode[s][1], ws));
      }
    }
  }
  if (d.agent_ids.empty()) d.modes = 1, d.steps = 1;
  const auto& probs = field(j, "probabilities");
  if (!probs.is_array() || probs.size() != d.agent_ids.size()) throw SchemaError("probabilities: expected one row per agent");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const std::string where = "probabilities[" + std::to_string(i) + "]";
    if (!probs[i].is_array() || static_cast<std::int64_t>(probs[i].size()) != d.modes) {
      throw SchemaError(where + ": expected one value per mode");
    }
    for (const auto& v : probs[i]) d.probabilities.push_back(number(v, where));
  }
  const auto& kept = field(j, "kept");
  if (!kept.is_array()) throw SchemaError("kept: expected an array");
  for (const auto& v : kept) {
    if (!v.is_boolean()) throw SchemaError("kept: expected booleans");
    d.kept.push_back(v.get<bool>());
  }
  const auto& spread = field(j, "spread");
  if (!spread.is_array()) throw SchemaError("spread: expected an array");
  for (const auto& v : spread) d.spread.push_back(number(v, "spread"));
  d.validate();
  return d;
}

void save_dump(const std::string& path, const PredictionDump& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << serialize_dump(d) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

PredictionDump load_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_dump(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace dgf
