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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "musclerun/common.hpp"
#include "musclerun/text.hpp"
#include "musclerun/trajectory.hpp"

namespace musclerun {

inline constexpr int kCycleSamples = 101;
inline constexpr double kStrikeThreshold = 0.05;  // fraction of body weight
inline constexpr double kStrikeRefractory = 0.05;  // s below threshold before a strike
inline constexpr double kAnalysisWindow = 5.0;     // s, taken from the end of the log

enum class Foot { right, left };
enum GaitJoint { kHip = 0, kKnee = 1, kAnkle = 2 };
inline constexpr std::array<const char*, 3> kGaitJointNames = {"hip", "knee", "ankle"};

using CycleCurve = std::array<double, kCycleSamples>;

// Joint angles of one leg over one cycle, in degrees with flexion positive.
struct GaitCycle {
  double start = 0.0;
  double end = 0.0;
  std::array<CycleCurve, 3> angles{};
};

struct RepresentativeCycle {
  std::array<CycleCurve, 3> mean{};
  std::array<CycleCurve, 3> sd{};  // sample standard deviation; 0 for a single cycle
  int cycles = 0;
};

struct ExperimentalBand {
  std::array<CycleCurve, 3> mean{};
  std::array<CycleCurve, 3> sd{};
};

inline double vertical_force(const TrajectoryRecord& r, Foot foot) {
  return foot == Foot::right ? r.grf_r : r.grf_l;
}

// Rising edges of the foot's vertical force through threshold * body weight,
// counted only after the force stayed below threshold for the refractory time.
inline std::vector<double> detect_foot_strikes(const Trajectory& log, Foot foot,
                                               double threshold = kStrikeThreshold,
                                               double refractory = kStrikeRefractory) {
  const double level = threshold * log.header.body_weight;
  std::vector<double> strikes;
  std::optional<double> below_since;
  for (const auto& r : log.records) {
    if (vertical_force(r, foot) >= level) {
      if (below_since && r.time - *below_since >= refractory - 1e-9) strikes.push_back(r.time);
      below_since.reset();
    } else if (!below_since) {
      below_since = r.time;
    }
  }
  return strikes;
}

// Hip, knee, ankle angle of `foot`'s leg at record r: degrees, flexion positive.
inline std::array<double, 3> leg_angles(const TrajectoryRecord& r, Foot foot) {
  const int base = foot == Foot::right ? 3 : 6;
  const double deg = 180.0 / std::numbers::pi;
  return {r.q[base] * deg, -r.q[base + 1] * deg, r.q[base + 2] * deg};
}

// Linear interpolation of the log's leg angles at time t.
inline std::array<double, 3> interpolate_angles(const Trajectory& log, Foot foot, double t) {
  const auto& recs = log.records;
  auto it = std::lower_bound(recs.begin(), recs.end(), t,
                             [](const TrajectoryRecord& r, double v) { return r.time < v; });
  if (it == recs.begin()) return leg_angles(recs.front(), foot);
  if (it == recs.end()) return leg_angles(recs.back(), foot);
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.time) / (hi.time - lo.time);
  const auto a = leg_angles(lo, foot);
  const auto b = leg_angles(hi, foot);
  return {a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1]), a[2] + w * (b[2] - a[2])};
}

inline GaitCycle resample_cycle(const Trajectory& log, Foot foot, double start, double end) {
  GaitCycle c;
  c.start = start;
  c.end = end;
  for (int i = 0; i < kCycleSamples; ++i) {
    const double t = start + (end - start) * i / (kCycleSamples - 1);
    const auto a = interpolate_angles(log, foot, t);
    for (int j = 0; j < 3; ++j) c.angles[j][i] = a[j];
  }
  return c;
}

inline RepresentativeCycle average_cycles(std::span<const GaitCycle> cycles) {
  if (cycles.empty()) throw AnalysisInsufficient("no gait cycles to average");
  RepresentativeCycle rep;
  rep.cycles = static_cast<int>(cycles.size());
  const double n = static_cast<double>(cycles.size());
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < kCycleSamples; ++i) {
      double sum = 0.0;
      for (const auto& c : cycles) sum += c.angles[j][i];
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& c : cycles) ss += (c.angles[j][i] - mean) * (c.angles[j][i] - mean);
      rep.mean[j][i] = mean;
      rep.sd[j][i] = cycles.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
  }
  return rep;
}

// Gait cycles between consecutive strikes inside the final `window` seconds.
inline std::vector<GaitCycle> segment_cycles(const Trajectory& log, Foot foot,
                                             double window = kAnalysisWindow) {
  if (log.records.empty()) throw AnalysisInsufficient("empty trajectory log");
  const double window_start = log.records.back().time - window;
  std::vector<double> strikes;
  for (double t : detect_foot_strikes(log, foot)) {
    if (t >= window_start - 1e-9) strikes.push_back(t);
  }
  if (strikes.size() < 2) {
    throw AnalysisInsufficient("need at least 2 foot strikes in the last " + format_double(window) +
                               " s, found " + std::to_string(strikes.size()));
  }
  std::vector<GaitCycle> cycles;
  for (std::size_t i = 0; i + 1 < strikes.size(); ++i) {
    cycles.push_back(resample_cycle(log, foot, strikes[i], strikes[i + 1]));
  }
  return cycles;
}

inline RepresentativeCycle segment_and_average(const Trajectory& log, Foot foot,
                                               double window = kAnalysisWindow) {
  const auto cycles = segment_cycles(log, foot, window);
  return average_cycles(cycles);
}

// Per joint, the fraction of samples whose mean lies within band mean +- 2 sd.
inline std::array<double, 3> band_agreement(const RepresentativeCycle& rep,
                                            const ExperimentalBand& band) {
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j) {
    int inside = 0;
    for (int i = 0; i < kCycleSamples; ++i) {
      if (std::abs(rep.mean[j][i] - band.mean[j][i]) <= 2.0 * band.sd[j][i]) ++inside;
    }
    out[j] = static_cast<double>(inside) / kCycleSamples;
  }
  return out;
}

inline void write_representative_cycle(std::ostream& out, const RepresentativeCycle& rep) {
  out << "percent,hip_mean,knee_mean,ankle_mean,hip_sd,knee_sd,ankle_sd\n";
  for (int i = 0; i < kCycleSamples; ++i) {
    out << i;
    for (int j = 0; j < 3; ++j) out << "," << format_double(rep.mean[j][i]);
    for (int j = 0; j < 3; ++j) out << "," << format_double(rep.sd[j][i]);
    out << "\n";
  }
}

inline RepresentativeCycle read_representative_cycle(std::istream& in) {
  RepresentativeCycle rep;
  std::string line;
  std::getline(in, line);
  int i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7 || i >= kCycleSamples) throw Error("representative cycle: malformed row");
    for (int j = 0; j < 3; ++j) {
      rep.mean[j][i] = parse_double(f[1 + j]);
      rep.sd[j][i] = parse_double(f[4 + j]);
    }
    ++i;
  }
  if (i != kCycleSamples) throw Error("representative cycle: expected 101 rows");
  return rep;
}

// Band file for one joint: header line, then 101 rows of percent,mean,sd.
inline void read_band_joint(std::istream& in, ExperimentalBand& band, GaitJoint joint) {
  std::string line;
  int i = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw Error("band file: expected percent,mean,sd");
    if (i == 0 && f[0] == "percent") continue;
    if (i >= kCycleSamples) throw Error("band file: more than 101 samples");
    band.mean[joint][i] = parse_double(f[1]);
    band.sd[joint][i] = parse_double(f[2]);
    ++i;
  }
  if (i != kCycleSamples) {
    throw Error("band file: expected 101 samples, found " + std::to_string(i));
  }
}

}  // namespace musclerun
