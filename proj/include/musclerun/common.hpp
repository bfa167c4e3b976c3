// Copyright 2026 The musclerun Authors
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
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace musclerun {

// Upper bounds for statically sized storage. The default runner uses 9 DOF and
// 18 muscles; non-default models loaded in non-strict mode may use up to these.
inline constexpr int kMaxDof = 16;
inline constexpr int kMaxMuscles = 32;

using Vec2 = Eigen::Vector2d;
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDof, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDof, kMaxDof>;
using VecM = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxMuscles, 1>;

// Planar spatial vectors are ordered (angular, linear x, linear y) and
// expressed in world coordinates about the world origin.
using Spatial = Eigen::Vector3d;
using SpatialInertia = Eigen::Matrix3d;

inline Vec2 rotate(double angle, const Vec2& v) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// omega x r for omega along +z.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model document does not match the schema; `path` names the offending node.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(std::string coordinate, double value)
      : Error("simulation diverged at " + coordinate + " = " + std::to_string(value)),
        coordinate_(std::move(coordinate)),
        value_(value) {}
  const std::string& coordinate() const noexcept { return coordinate_; }
  double value() const noexcept { return value_; }

 private:
  std::string coordinate_;
  double value_;
};

// reset/step used out of order, or an action of the wrong shape.
class ProtocolMisuse : public Error {
 public:
  using Error::Error;
};

class AnalysisInsufficient : public Error {
 public:
  using Error::Error;
};

}  // namespace musclerun
