// Copyright 2026 The recordlaw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Core library: Eigen and Boost headers only. JSON I/O (recordlaw/io.hpp) and the API
// client (recordlaw/fetch.hpp) pull in further dependencies and are included separately.

#include "recordlaw/baselines.hpp"
#include "recordlaw/bench.hpp"
#include "recordlaw/csv.hpp"
#include "recordlaw/error.hpp"
#include "recordlaw/horizon.hpp"
#include "recordlaw/mixed_model.hpp"
#include "recordlaw/optim.hpp"
#include "recordlaw/plot.hpp"
#include "recordlaw/rng.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/synthetic.hpp"
#include "recordlaw/theory.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw {
inline constexpr const char* kVersion = "0.1.0";
}
