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

#include "musclerun/analysis.hpp"
#include "musclerun/common.hpp"
#include "musclerun/contact.hpp"
#include "musclerun/curves.hpp"
#include "musclerun/default_model.hpp"
#include "musclerun/dynamics.hpp"
#include "musclerun/environment.hpp"
#include "musclerun/episode.hpp"
#include "musclerun/grader.hpp"
#include "musclerun/kinematics.hpp"
#include "musclerun/model.hpp"
#include "musclerun/muscle.hpp"
#include "musclerun/rng.hpp"
#include "musclerun/socket.hpp"
#include "musclerun/text.hpp"
#include "musclerun/trajectory.hpp"
