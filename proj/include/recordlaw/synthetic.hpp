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

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recordlaw/error.hpp"
#include "recordlaw/mixed_model.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw::synthetic {

inline std::string group_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "g%04zu", i);
    return buf;
}

/// One draw of (alpha_c, beta_c) ~ N(mean, G). Singular G (pinned entries) is fine.
template <class Rng>
GroupEffect draw_group_effect(const MixedModelParams& p, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(p.G());
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Vector2d b = p.mean() + es.eigenvectors() * ev.cwiseProduct(Eigen::Vector2d(z(rng), z(rng)));
    return {b[0], b[1]};
}

/// Regression rows drawn from the model directly: group c gets rows t = 1 .. sizes[c].
template <class Rng>
std::vector<ImprovementSample> simulate_samples(const MixedModelParams& p, ModelForm form,
                                                const std::vector<int>& sizes, Rng& rng) {
    if (!(p.scale > 0.0)) throw DomainError("simulate_samples: scale must be positive");
    std::normal_distribution<double> eps(0.0, std::sqrt(p.scale));
    std::vector<ImprovementSample> out;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const GroupEffect b = draw_group_effect(p, rng);
        for (int t = 1; t <= sizes[c]; ++t) {
            const double x = regressor(form, t);
            out.push_back({group_name(c), t, b.alpha + b.beta * x + eps(rng), x});
        }
    }
    return out;
}

struct CorpusShape {
    SeriesKind kind = SeriesKind::speedrun;
    ModelForm form = ModelForm::power_law;
    std::vector<int> group_sizes;       ///< improvements per series (records = size + 1)
    double first_value = 0.0;           ///< R_1; 0 picks 600 s (speedrun) or 0.5 (ml)
    double mean_gap_days = 60.0;
    UtcSeconds start = 1'262'304'000;   // 2010-01-01
};

/// Record series whose consecutive responses follow the mixed model with parameters `p`.
/// Throws DataError when a draw leaves the value domain in floating point.
template <class Rng>
Corpus simulate_corpus(const MixedModelParams& p, const CorpusShape& shape, Rng& rng) {
    const auto rows = simulate_samples(p, shape.form, shape.group_sizes, rng);
    const double r1 = shape.first_value > 0.0 ? shape.first_value : (shape.kind == SeriesKind::speedrun ? 600.0 : 0.5);
    std::exponential_distribution<double> gap(1.0 / (shape.mean_gap_days * 86400.0));
    Corpus corpus;
    for (const auto& row : rows) {
        if (row.t == 1) {
            corpus.push_back({row.series_id, shape.kind, shape.kind == SeriesKind::ml_benchmark ? "error" : "", {}});
            corpus.back().records.push_back({shape.start, r1});
        }
        auto& recs = corpus.back().records;
        const UtcSeconds next_t = recs.back().timestamp + 1 + static_cast<UtcSeconds>(gap(rng));
        recs.push_back({next_t, invert(shape.kind, row.response, recs.back().value)});
    }
    for (const auto& s : corpus) validate(s);
    return corpus;
}

/// Improvements per series for ML-shaped corpora: 2 + geometric, capped at 12, mean near 3.8.
template <class Rng>
std::vector<int> ml_shaped_group_sizes(std::size_t n_groups, Rng& rng) {
    std::geometric_distribution<int> extra(1.0 / 2.8);
    std::vector<int> sizes;
    for (std::size_t i = 0; i < n_groups; ++i) sizes.push_back(2 + std::min(extra(rng), 10));
    return sizes;
}

}  // namespace recordlaw::synthetic
