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

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "musclerun/common.hpp"
#include "musclerun/text.hpp"

namespace musclerun {

inline constexpr const char* kTrajectoryVersion = "musclerun-trajectory/1";

// Line-delimited comma-separated trajectory log: two '#' header lines, a column
// header, then one record per control step (record 0 is the reset state).
// Column order: step, time, q[dof], qdot[dof], activation[muscles], grf_r,
// grf_l, reward.
struct TrajectoryHeader {
  std::uint64_t seed = 0;
  int difficulty = 0;
  int max_obstacles = 0;
  double body_weight = 0.0;
  std::vector<std::string> coordinates;
  std::vector<std::string> muscles;

  bool operator==(const TrajectoryHeader&) const = default;
};

struct TrajectoryRecord {
  int step = 0;
  double time = 0.0;
  std::vector<double> q;
  std::vector<double> qdot;
  std::vector<double> activations;
  double grf_r = 0.0;  // vertical contact force on the right foot, N
  double grf_l = 0.0;
  double reward = 0.0;  // reward increment of this step

  bool operator==(const TrajectoryRecord&) const = default;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TrajectoryRecord> records;

  bool operator==(const Trajectory&) const = default;
};

inline void write_trajectory_header(std::ostream& out, const TrajectoryHeader& h) {
  out << "# " << kTrajectoryVersion << "\n";
  out << "# seed=" << h.seed << " difficulty=" << h.difficulty
      << " max_obstacles=" << h.max_obstacles << " body_weight=" << format_double(h.body_weight)
      << " dof=" << h.coordinates.size() << " muscles=" << h.muscles.size() << "\n";
  out << "step,time";
  for (const auto& c : h.coordinates) out << "," << c;
  for (const auto& c : h.coordinates) out << "," << c << "_speed";
  for (const auto& m : h.muscles) out << "," << m << "_activation";
  out << ",grf_r,grf_l,reward\n";
}

inline void write_trajectory_record(std::ostream& out, const TrajectoryRecord& r) {
  out << r.step << "," << format_double(r.time);
  for (double v : r.q) out << "," << format_double(v);
  for (double v : r.qdot) out << "," << format_double(v);
  for (double v : r.activations) out << "," << format_double(v);
  out << "," << format_double(r.grf_r) << "," << format_double(r.grf_l) << ","
      << format_double(r.reward) << "\n";
}

inline Trajectory read_trajectory(std::istream& in) {
  Trajectory t;
  std::string line;
  if (!std::getline(in, line) || line != std::string("# ") + kTrajectoryVersion) {
    throw Error("trajectory log: missing '# " + std::string(kTrajectoryVersion) + "' header");
  }
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw Error("trajectory log: missing parameter header line");
  }
  std::map<std::string, std::string> kv;
  {
    std::istringstream ss(line.substr(2));
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  for (const char* key : {"seed", "difficulty", "max_obstacles", "body_weight", "dof", "muscles"}) {
    if (!kv.count(key)) throw Error(std::string("trajectory log: header lacks '") + key + "'");
  }
  t.header.seed = std::stoull(kv["seed"]);
  t.header.difficulty = std::stoi(kv["difficulty"]);
  t.header.max_obstacles = std::stoi(kv["max_obstacles"]);
  t.header.body_weight = parse_double(kv["body_weight"]);
  const int dof = std::stoi(kv["dof"]);
  const int muscles = std::stoi(kv["muscles"]);
  if (!std::getline(in, line)) throw Error("trajectory log: missing column header");
  const auto cols = split_csv(line);
  const std::size_t width = 2 + 2 * dof + muscles + 3;
  if (cols.size() != width) throw Error("trajectory log: column header has wrong width");
  for (int k = 0; k < dof; ++k) t.header.coordinates.emplace_back(cols[2 + k]);
  for (int i = 0; i < muscles; ++i) {
    std::string name(cols[2 + 2 * dof + i]);
    const std::string suffix = "_activation";
    if (name.size() > suffix.size()) name.resize(name.size() - suffix.size());
    t.header.muscles.push_back(std::move(name));
  }
  int line_no = 3;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != width) {
      throw Error("trajectory log line " + std::to_string(line_no) + ": expected " +
                  std::to_string(width) + " fields");
    }
    TrajectoryRecord r;
    r.step = static_cast<int>(parse_double(f[0]));
    r.time = parse_double(f[1]);
    std::size_t c = 2;
    for (int k = 0; k < dof; ++k) r.q.push_back(parse_double(f[c++]));
    for (int k = 0; k < dof; ++k) r.qdot.push_back(parse_double(f[c++]));
    for (int i = 0; i < muscles; ++i) r.activations.push_back(parse_double(f[c++]));
    r.grf_r = parse_double(f[c++]);
    r.grf_l = parse_double(f[c++]);
    r.reward = parse_double(f[c++]);
    t.records.push_back(std::move(r));
  }
  return t;
}

}  // namespace musclerun
