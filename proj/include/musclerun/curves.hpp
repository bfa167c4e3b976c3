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

namespace musclerun {

// Normalized Hill-type muscle curves. Lengths are normalized by the optimal
// fiber length; velocities by max_contraction_velocity * optimal length, with
// lengthening positive.
struct MuscleCurves {
  double active_width = 0.45;        // gamma in exp(-(l-1)^2 / gamma)
  double passive_shape = 4.0;        // k_pe
  double passive_strain = 0.6;       // strain at which f_passive reaches 1
  double eccentric_plateau = 1.4;    // f_velocity as lengthening speed -> inf
  double concentric_curvature = 0.25;  // Hill curvature constant A

  double active(double l_norm) const {
    const double d = l_norm - 1.0;
    return std::exp(-d * d / active_width);
  }

  double passive(double l_norm) const {
    if (l_norm <= 1.0) return 0.0;
    return std::expm1(passive_shape * (l_norm - 1.0) / passive_strain) /
           std::expm1(passive_shape);
  }

  // Hill hyperbola while shortening; on lengthening a hyperbola rising to
  // eccentric_plateau with its slope at zero matched to the concentric side.
  double velocity(double v_norm) const {
    if (v_norm <= -1.0) return 0.0;
    if (v_norm <= 0.0) {
      return (1.0 + v_norm) / (1.0 - v_norm / concentric_curvature);
    }
    const double rise = eccentric_plateau - 1.0;
    const double slope0 = 1.0 + 1.0 / concentric_curvature;
    const double knee = rise / slope0;
    return 1.0 + rise * v_norm / (v_norm + knee);
  }

  bool operator==(const MuscleCurves&) const = default;
};

}  // namespace musclerun
