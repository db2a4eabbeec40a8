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
#include "harness/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "scene/geometry.hpp"

namespace dgf {

const char* to_string(Behavior b) {
  switch (b) {
    case Behavior::kStraight: return "straight";
    case Behavior::kLeft: return "left";
    case Behavior::kRight: return "right";
    case Behavior::kStop: return "stop";
    case Behavior::kLaneChange: return "lane_change";
  }
  return "?";
}

void SynthConfig::validate() const {
  if (n_scenarios < 0) throw ContractError("synth: n_scenarios must be >= 0");
  if (agents_min < 1 || agents_max < agents_min) throw ContractError("synth: need 1 <= agents_min <= agents_max");
  double total = 0.0;
  for (double f : mix) {
    if (!(f >= 0.0)) throw ContractError("synth: behavior fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("synth: behavior fractions must sum to 1");
  if (!(noise_std >= 0.0)) throw ContractError("synth: noise_std must be >= 0");
  if (horizon.t_h < 3 || horizon.t_f < 2 || !(horizon.hz > 0.0)) throw ContractError("synth: horizon too short");
  if (!(speed_min > 0.0) || speed_max < speed_min) throw ContractError("synth: need 0 < speed_min <= speed_max");
  if (distractor_lanes < 0) throw ContractError("synth: distractor_lanes must be >= 0");
  if (partial_track_prob < 0.0 || partial_track_prob > 1.0 || unobserved_now_prob < 0.0 || unobserved_now_prob > 1.0) {
    throw ContractError("synth: probabilities must be in [0, 1]");
  }
}

namespace {

constexpr double kLaneSpacing = 4.0;
constexpr double kLaneWidth = 3.5;

/// Piecewise constant-curvature path from the origin heading +x.
struct Path {
  struct Piece {
    double length;     // metres; infinite for the last piece
    double curvature;  // 1/m, positive turns left
  };
  std::vector<Piece> pieces;

  Pose2 at(double s) const {
    Pose2 p;
    if (s < 0.0) return {{s, 0.0}, 0.0};
    double left = s;
    for (const auto& piece : pieces) {
      const double d = std::min(left, piece.length);
      if (piece.curvature == 0.0) {
        p.position = p.position + d * Vec2{std::cos(p.heading), std::sin(p.heading)};
      } else {
        const double k = piece.curvature, h = p.heading;
        p.position = p.position + Vec2{(std::sin(h + k * d) - std::sin(h)) / k, (std::cos(h) - std::cos(h + k * d)) / k};
        p.heading = h + k * d;
      }
      left -= d;
      if (left <= 0.0) break;
    }
    return p;
  }

  /// Sign of the first curved piece overlapping [a, b], or 0.
  double curvature_sign(double a, double b) const {
    double s = 0.0;
    for (const auto& piece : pieces) {
      const double e = s + piece.length;
      if (piece.curvature != 0.0 && a < e && b > s) return piece.curvature > 0 ? 1.0 : -1.0;
      s = e;
    }
    return 0.0;
  }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

Path turn_path(double onset, double radius, double sign) {
  return Path{{{onset, 0.0}, {radius * M_PI / 2.0, sign / radius}, {kInf, 0.0}}};
}

Path lane_change_path(double onset, double sign) {
  // Two opposite arcs giving a lateral shift of one lane width.
  const double radius = 60.0;
  const double angle = std::acos(1.0 - kLaneWidth / (2.0 * radius));
  return Path{{{onset, 0.0}, {radius * angle, sign / radius}, {radius * angle, -sign / radius}, {kInf, 0.0}}};
}

/// Lane segments sampled along path between arc lengths a and b.
void lay_lanes(const Path& path, double a, double b, Rng& rng, std::vector<LaneSegment>& out, bool signal_zone) {
  const double seg_len = kLaneSpacing * (kLanePoints - 1);
  for (double s0 = a; s0 < b; s0 += seg_len) {
    LaneSegment lane;
    for (int i = 0; i < kLanePoints; ++i) lane.points[static_cast<std::size_t>(i)] = path.at(s0 + kLaneSpacing * i).position;
    const double sign = path.curvature_sign(s0, s0 + seg_len);
    lane.type = sign > 0 ? LaneType::kLeft : (sign < 0 ? LaneType::kRight : LaneType::kStraight);
    lane.has_signal = signal_zone && rng.bernoulli(0.5);
    out.push_back(lane);
  }
}

struct Motion {
  std::vector<double> s;  // arc length per time step, t = -t_h .. t_f
};

Motion speed_profile(Behavior b, double v0, const Horizon& h, double brake_time, double decel) {
  Motion m;
  const double dt = 1.0 / h.hz;
  for (int i = -h.t_h; i <= h.t_f; ++i) {
    const double tau = (i + h.t_h) * dt;  // time since the first observation
    double s = v0 * tau;
    if (b == Behavior::kStop) {
      const double tb = brake_time + h.t_h * dt;
      if (tau > tb) {
        const double stop_after = v0 / decel;
        const double d = std::min(tau - tb, stop_after);
        s = v0 * tb + v0 * d - 0.5 * decel * d * d;
      }
    }
    m.s.push_back(s);
  }
  return m;
}

Behavior draw_behavior(const SynthConfig& cfg, Rng& rng) {
  double u = rng.uniform(0.0, 1.0), acc = 0.0;
  for (int i = 0; i < kBehaviorCount; ++i) {
    acc += cfg.mix[static_cast<std::size_t>(i)];
    if (u < acc) return static_cast<Behavior>(i);
  }
  for (int i = kBehaviorCount - 1; i >= 0; --i) {
    if (cfg.mix[static_cast<std::size_t>(i)] > 0.0) return static_cast<Behavior>(i);
  }
  return Behavior::kStraight;
}

struct AgentDraft {
  AgentTrack track;
  std::vector<LaneSegment> lanes;
  bool ambiguous = false;
};

AgentDraft make_agent(Behavior b, const SynthConfig& cfg, Rng& rng) {
  const auto& h = cfg.horizon;
  const double dt = 1.0 / h.hz;
  const double v0 = rng.uniform(cfg.speed_min, cfg.speed_max);
  const double brake_time = rng.uniform(-1.0, 1.5);
  const double decel = rng.uniform(2.5, 4.5);
  const Motion motion = speed_profile(b, v0, h, brake_time, decel);
  const double s_now = motion.s[static_cast<std::size_t>(h.t_h)];
  const double s_end = motion.s.back();
  // Maneuver onset relative to t = 0, in seconds; positive means not yet begun.
  const double onset_time = rng.uniform(-1.0, 2.0);
  const double onset = std::max(1.0, s_now + v0 * onset_time);
  const double radius = rng.uniform(10.0, 16.0);
  const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;

  Path path{{{kInf, 0.0}}};
  bool intersection = false;
  switch (b) {
    case Behavior::kLeft: path = turn_path(onset, radius, 1.0); intersection = true; break;
    case Behavior::kRight: path = turn_path(onset, radius, -1.0); intersection = true; break;
    case Behavior::kLaneChange: path = lane_change_path(onset, side); break;
    case Behavior::kStraight: intersection = rng.bernoulli(0.5); break;
    case Behavior::kStop: break;
  }

  AgentDraft d;
  const double lo = -8.0, hi = s_end + 12.0;
  if (b == Behavior::kLaneChange) {
    const Path straight{{{kInf, 0.0}}};
    lay_lanes(straight, lo, hi, rng, d.lanes, false);
    std::vector<LaneSegment> parallel;
    lay_lanes(straight, lo, hi, rng, parallel, false);
    for (auto& lane : parallel) {
      for (auto& p : lane.points) p.y += side * kLaneWidth;
      d.lanes.push_back(lane);
    }
  } else {
    lay_lanes(path, lo, hi, rng, d.lanes, intersection);
  }
  if (intersection) {
    // Branches for the maneuvers not taken, starting where this agent's turns.
    const double branch_len = kLaneSpacing * (kLanePoints - 1);
    std::vector<Path> alternatives;
    if (b != Behavior::kStraight) alternatives.push_back(Path{{{kInf, 0.0}}});
    if (b != Behavior::kLeft) alternatives.push_back(turn_path(onset, radius, 1.0));
    if (b != Behavior::kRight && (b == Behavior::kStraight || rng.bernoulli(0.5))) {
      alternatives.push_back(turn_path(onset, radius, -1.0));
    }
    for (const auto& alt : alternatives) lay_lanes(alt, onset, onset + branch_len, rng, d.lanes, true);
  }
  const bool pending = onset > s_now;
  d.ambiguous = (intersection && pending && onset < s_end) ||
                (b == Behavior::kLaneChange && pending && onset < s_end) ||
                (b == Behavior::kStop && brake_time > 0.0 && brake_time < h.t_f * dt);

  const int steps = h.t_h + 1;
  std::vector<Vec2> positions;
  for (std::size_t i = 0; i < motion.s.size(); ++i) positions.push_back(path.at(motion.s[i]).position);
  for (int i = 0; i < steps; ++i) {
    Vec2 p = positions[static_cast<std::size_t>(i)];
    if (cfg.noise_std > 0.0) p = p + Vec2{rng.normal(0.0, cfg.noise_std), rng.normal(0.0, cfg.noise_std)};
    d.track.positions.push_back(p);
  }
  // Heading from consecutive displacement; the first step uses the forward one.
  for (int i = 0; i < steps; ++i) {
    const Vec2 a = d.track.positions[static_cast<std::size_t>(i == 0 ? 0 : i - 1)];
    const Vec2 b2 = d.track.positions[static_cast<std::size_t>(i == 0 ? 1 : i)];
    const Vec2 delta = b2 - a;
    if (delta.norm() > 1e-9) {
      d.track.headings.push_back(std::atan2(delta.y, delta.x));
    } else {
      d.track.headings.push_back(d.track.headings.empty() ? path.at(motion.s[0]).heading : d.track.headings.back());
    }
  }
  d.track.valid.assign(static_cast<std::size_t>(steps), true);
  d.track.future_gt = std::vector<Vec2>(positions.begin() + steps, positions.end());
  return d;
}

/// Maps points and headings of a draft so its t = 0 pose lands on target.
void place(AgentDraft& d, const Pose2& target) {
  const std::size_t now = d.track.positions.size() - 1;
  const Pose2 from{d.track.positions[now], d.track.headings[now]};
  auto map = [&](Vec2 p) { return target.to_world(from.to_local(p)); };
  for (auto& p : d.track.positions) p = map(p);
  for (auto& hd : d.track.headings) hd = wrap_angle(hd - from.heading + target.heading);
  for (auto& p : *d.track.future_gt) p = map(p);
  for (auto& lane : d.lanes) {
    for (auto& p : lane.points) p = map(p);
  }
}

SynthScenario make_scenario(const SynthConfig& cfg, int index, Rng& rng) {
  SynthScenario out;
  Scenario& s = out.scenario;
  s.id = "synth_" + std::to_string(cfg.seed) + "_" + std::to_string(index);
  s.horizon = cfg.horizon;
  s.focal_index = 0;
  const int n = static_cast<int>(rng.integer(cfg.agents_min, cfg.agents_max));
  const int steps = cfg.horizon.t_h + 1;
  for (int a = 0; a < n; ++a) {
    const Behavior b = draw_behavior(cfg, rng);
    AgentDraft d = make_agent(b, cfg, rng);
    Pose2 target;
    if (a > 0) {
      target.position = {rng.uniform(-25.0, 25.0), rng.uniform(-25.0, 25.0)};
      target.heading = rng.uniform(-M_PI, M_PI);
    }
    place(d, target);
    auto& track = d.track;
    if (a > 0 && rng.bernoulli(cfg.partial_track_prob)) {
      const auto late = static_cast<std::size_t>(rng.integer(1, steps - 4));
      for (std::size_t i = 0; i < late; ++i) track.valid[i] = false;
    }
    if (a > 0 && rng.bernoulli(cfg.unobserved_now_prob)) {
      const auto gone = static_cast<std::size_t>(rng.integer(1, 3));
      for (std::size_t i = 0; i < gone; ++i) track.valid[track.valid.size() - 1 - i] = false;
      track.future_gt.reset();
    }
    for (std::size_t i = 0; i < track.valid.size(); ++i) {
      if (!track.valid[i]) {
        track.positions[i] = {0.0, 0.0};
        track.headings[i] = 0.0;
      }
    }
    s.agents.push_back(std::move(track));
    s.lanes.insert(s.lanes.end(), d.lanes.begin(), d.lanes.end());
    out.behaviors.push_back(b);
    out.ambiguous.push_back(d.ambiguous && s.agents.back().valid_now());
  }
  for (int i = 0; i < cfg.distractor_lanes; ++i) {
    const Pose2 pose{{rng.uniform(-35.0, 35.0), rng.uniform(-35.0, 35.0)}, rng.uniform(-M_PI, M_PI)};
    LaneSegment lane;
    for (int k = 0; k < kLanePoints; ++k) lane.points[static_cast<std::size_t>(k)] = pose.to_world({kLaneSpacing * k, 0.0});
    lane.type = static_cast<LaneType>(rng.integer(0, 2));
    lane.has_signal = rng.bernoulli(0.3);
    s.lanes.push_back(lane);
  }
  if (cfg.random_frame) {
    const Se2 motion{rng.uniform(-M_PI, M_PI), {rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0)}};
    s = transformed(s, motion);
  }
  validate(s);
  return out;
}

}  // namespace

std::vector<SynthScenario> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SynthScenario> out;
  for (int i = 0; i < cfg.n_scenarios; ++i) {
    Rng rng(cfg.seed, {0x73796e7468ULL, static_cast<std::uint64_t>(i)});
    out.push_back(make_scenario(cfg, i, rng));
  }
  return out;
}

std::vector<std::string> write_synthetic(const SynthConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& s : generate_synthetic(cfg)) {
    const auto path = (std::filesystem::path(dir) / (s.scenario.id + ".json")).string();
    save_scenario(path, s.scenario);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace dgf
