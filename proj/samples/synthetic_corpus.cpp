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

// Writes a synthetic record-series CSV drawn from the random-effects improvement model.
//
//   synthetic_corpus <out.csv> [speedrun|ml_benchmark] [seed]

#include <cstdlib>
#include <iostream>
#include <string>

#include "recordlaw/recordlaw.hpp"

int main(int argc, char** argv) {
    using namespace recordlaw;
    if (argc < 2) {
        std::cerr << "usage: synthetic_corpus <out.csv> [speedrun|ml_benchmark] [seed]\n";
        return 2;
    }
    const SeriesKind kind = argc > 2 ? parse_series_kind(argv[2]) : SeriesKind::speedrun;
    const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
    SplitMix64 rng(seed);

    synthetic::CorpusShape shape;
    shape.kind = kind;
    MixedModelParams p;
    if (kind == SeriesKind::speedrun) {
        p = {-2.03, -1.30, 0.075, 0.112, 0.0, 0.80};
        shape.group_sizes.assign(25, 59);
        shape.mean_gap_days = 20.0;
    } else {
        p = {-1.55, -0.57, 0.20, 0.0, 0.0, 1.16};
        shape.group_sizes = synthetic::ml_shaped_group_sizes(254, rng);
    }
    try {
        const Corpus c = synthetic::simulate_corpus(p, shape, rng);
        write_csv(std::filesystem::path(argv[1]), c);
        std::cout << c.size() << " series, " << total_records(c) << " records\n";
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
