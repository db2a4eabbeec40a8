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
#pragma once

#include <cmath>
#include <vector>

namespace dgf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  return a <= -M_PI ? a + 2.0 * M_PI : a;
}

/// Planar pose; also used as a rigid transform (rotate by heading, then translate).
struct Pose2 {
  Vec2 position;
  double heading = 0.0;

  /// Expresses a world point in this pose's frame.
  Vec2 to_local(Vec2 world) const { return rotate(world - position, -heading); }
  Vec2 to_world(Vec2 local) const { return rotate(local, heading) + position; }
  double heading_to_local(double world_heading) const { return wrap_angle(world_heading - heading); }
};

/// Rigid motion applied to raw scenarios (rotation about the origin, then translation).
struct Se2 {
  double theta = 0.0;
  Vec2 translation;

  Vec2 apply(Vec2 p) const { return rotate(p, theta) + translation; }
  double apply_heading(double h) const { return h + theta; }
  Se2 inverse() const { return {-theta, rotate(Vec2{-translation.x, -translation.y}, -theta)}; }
};

}  // namespace dgf
