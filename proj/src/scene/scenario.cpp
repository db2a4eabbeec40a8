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
#include "scene/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "json.hpp"

namespace dgf {

using nlohmann::json;

const char* to_string(LaneType t) {
  switch (t) {
    case LaneType::kStraight: return "straight";
    case LaneType::kLeft: return "left";
    case LaneType::kRight: return "right";
  }
  return "straight";
}

LaneType lane_type_from_string(const std::string& s) {
  if (s == "straight") return LaneType::kStraight;
  if (s == "left") return LaneType::kLeft;
  if (s == "right") return LaneType::kRight;
  throw SchemaError("lane_type: unknown value '" + s + "'");
}

int AgentTrack::last_valid() const {
  for (int t = static_cast<int>(valid.size()) - 1; t >= 0; --t)
    if (valid[static_cast<std::size_t>(t)]) return t;
  return -1;
}

std::vector<int> Scenario::target_agents() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].valid_now()) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + "." + key + ": missing");
  return *it;
}

Vec2 point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SchemaError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> points_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array of points");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point_from(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

json to_json(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

int int_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) throw SchemaError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

}  // namespace

void validate(const Scenario& s) {
  const auto& h = s.horizon;
  if (h.t_h < 0) throw SchemaError("t_h: must be >= 0");
  if (h.t_f < 1) throw SchemaError("t_f: must be >= 1");
  if (!(h.hz > 0.0)) throw SchemaError("hz: must be positive");
  if (s.agents.empty()) throw SchemaError("agents: empty");
  if (s.focal_index < 0 || s.focal_index >= static_cast<int>(s.agents.size())) {
    throw SchemaError("focal_index: out of range");
  }
  const auto steps = static_cast<std::size_t>(h.t_h + 1);
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i];
    const std::string where = "agents[" + std::to_string(i) + "]";
    if (a.positions.size() != steps) throw SchemaError(where + ".positions: expected t_h + 1 entries");
    if (a.headings.size() != steps) throw SchemaError(where + ".headings: expected t_h + 1 entries");
    if (a.valid.size() != steps) throw SchemaError(where + ".valid: expected t_h + 1 entries");
    if (a.last_valid() < 0) throw SchemaError(where + ".valid: agent never observed");
    for (std::size_t t = 0; t < steps; ++t) {
      if (!a.valid[t]) continue;
      if (!finite(a.positions[t])) throw SchemaError(where + ".positions[" + std::to_string(t) + "]: not finite");
      if (!std::isfinite(a.headings[t])) throw SchemaError(where + ".headings[" + std::to_string(t) + "]: not finite");
    }
    if (a.future_gt) {
      if (a.future_gt->size() != static_cast<std::size_t>(h.t_f)) {
        throw SchemaError(where + ".future_gt: expected t_f entries");
      }
      for (const auto& p : *a.future_gt)
        if (!finite(p)) throw SchemaError(where + ".future_gt: not finite");
    }
  }
  for (std::size_t l = 0; l < s.lanes.size(); ++l) {
    const auto& lane = s.lanes[l];
    const std::string where = "lanes[" + std::to_string(l) + "].points";
    for (std::size_t k = 0; k < lane.points.size(); ++k) {
      if (!finite(lane.points[k])) throw SchemaError(where + ": not finite");
      if (k > 0 && lane.points[k] == lane.points[k - 1]) {
        throw SchemaError(where + ": consecutive points " + std::to_string(k - 1) + " and " + std::to_string(k) +
                          " coincide");
      }
    }
  }
  if (s.drivable_area) {
    for (std::size_t p = 0; p < s.drivable_area->size(); ++p) {
      if ((*s.drivable_area)[p].size() < 3) {
        throw SchemaError("drivable_area[" + std::to_string(p) + "]: needs at least 3 vertices");
      }
    }
  }
}

Scenario parse_scenario(const std::string& json_text, const std::string& fallback_id) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("scenario: expected an object");
  const std::string root = "scenario";
  const int version = int_field(j, "version", root);
  if (version != kScenarioVersion) throw SchemaError("version: unsupported scenario version " + std::to_string(version));

  Scenario s;
  s.id = j.contains("id") ? j["id"].get<std::string>() : fallback_id;
  const json& hz = field(j, "hz", root);
  if (!hz.is_number()) throw SchemaError("hz: expected a number");
  s.horizon.hz = hz.get<double>();
  s.horizon.t_h = int_field(j, "t_h", root);
  s.horizon.t_f = int_field(j, "t_f", root);
  s.focal_index = int_field(j, "focal_index", root);

  const json& agents = field(j, "agents", root);
  if (!agents.is_array()) throw SchemaError("agents: expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    if (!a.is_object()) throw SchemaError(where + ": expected an object");
    AgentTrack track;
    track.positions = points_from(field(a, "positions", where), where + ".positions");
    const json& hs = field(a, "headings", where);
    if (!hs.is_array()) throw SchemaError(where + ".headings: expected an array");
    for (const auto& h : hs) {
      if (!h.is_number()) throw SchemaError(where + ".headings: expected numbers");
      track.headings.push_back(h.get<double>());
    }
    const json& vs = field(a, "valid", where);
    if (!vs.is_array()) throw SchemaError(where + ".valid: expected an array");
    for (const auto& v : vs) {
      if (!v.is_boolean()) throw SchemaError(where + ".valid: expected booleans");
      track.valid.push_back(v.get<bool>());
    }
    if (a.contains("future_gt") && !a["future_gt"].is_null()) {
      track.future_gt = points_from(a["future_gt"], where + ".future_gt");
    }
    s.agents.push_back(std::move(track));
  }

  const json& lanes = field(j, "lanes", root);
  if (!lanes.is_array()) throw SchemaError("lanes: expected an array");
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    const std::string where = "lanes[" + std::to_string(l) + "]";
    const json& lj = lanes[l];
    if (!lj.is_object()) throw SchemaError(where + ": expected an object");
    auto pts = points_from(field(lj, "points", where), where + ".points");
    if (pts.size() != kLanePoints) throw SchemaError(where + ".points: expected exactly 10 points");
    LaneSegment lane;
    std::copy(pts.begin(), pts.end(), lane.points.begin());
    const json& type = field(lj, "lane_type", where);
    if (!type.is_string()) throw SchemaError(where + ".lane_type: expected a string");
    try {
      lane.type = lane_type_from_string(type.get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError(where + "." + e.what());
    }
    const json& sig = field(lj, "has_signal", where);
    if (!sig.is_boolean()) throw SchemaError(where + ".has_signal: expected a boolean");
    lane.has_signal = sig.get<bool>();
    s.lanes.push_back(lane);
  }

  if (j.contains("drivable_area") && !j["drivable_area"].is_null()) {
    const json& da = j["drivable_area"];
    if (!da.is_array()) throw SchemaError("drivable_area: expected an array of polygons");
    std::vector<Polygon> polys;
    for (std::size_t p = 0; p < da.size(); ++p) polys.push_back(points_from(da[p], "drivable_area[" + std::to_string(p) + "]"));
    s.drivable_area = std::move(polys);
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_scenario(ss.str(), std::filesystem::path(path).stem().string());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["version"] = kScenarioVersion;
  j["id"] = s.id;
  j["hz"] = s.horizon.hz;
  j["t_h"] = s.horizon.t_h;
  j["t_f"] = s.horizon.t_f;
  j["focal_index"] = s.focal_index;
  json agents = json::array();
  for (const auto& a : s.agents) {
    json aj;
    aj["positions"] = to_json(a.positions);
    aj["headings"] = a.headings;
    json valid = json::array();
    for (bool v : a.valid) valid.push_back(v);
    aj["valid"] = valid;
    if (a.future_gt) aj["future_gt"] = to_json(*a.future_gt);
    agents.push_back(std::move(aj));
  }
  j["agents"] = std::move(agents);
  json lanes = json::array();
  for (const auto& l : s.lanes) {
    json lj;
    lj["points"] = to_json(std::vector<Vec2>(l.points.begin(), l.points.end()));
    lj["lane_type"] = to_string(l.type);
    lj["has_signal"] = l.has_signal;
    lanes.push_back(std::move(lj));
  }
  j["lanes"] = std::move(lanes);
  if (s.drivable_area) {
    json da = json::array();
    for (const auto& p : *s.drivable_area) da.push_back(to_json(p));
    j["drivable_area"] = std::move(da);
  }
  return j.dump();
}

void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write scenario file: " + path);
  os << serialize_scenario(s) << '\n';
  if (!os) throw IoError("failed writing scenario file: " + path);
}

Scenario transformed(const Scenario& s, const Se2& motion) {
  Scenario out = s;
  for (auto& a : out.agents) {
    for (auto& p : a.positions) p = motion.apply(p);
    for (auto& h : a.headings) h = motion.apply_heading(h);
    if (a.future_gt)
      for (auto& p : *a.future_gt) p = motion.apply(p);
  }
  for (auto& l : out.lanes)
    for (auto& p : l.points) p = motion.apply(p);
  if (out.drivable_area)
    for (auto& poly : *out.drivable_area)
      for (auto& p : poly) p = motion.apply(p);
  return out;
}

}  // namespace dgf
