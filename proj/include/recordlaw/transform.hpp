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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recordlaw/error.hpp"
#include "recordlaw/series.hpp"

namespace recordlaw {

/// How the regressor depends on the record index t.
enum class ModelForm { power_law, exponential };

inline std::string_view to_string(ModelForm f) { return f == ModelForm::power_law ? "power_law" : "exponential"; }

inline ModelForm parse_model_form(std::string_view s) {
    if (s == "power_law" || s == "power-law") return ModelForm::power_law;
    if (s == "exponential") return ModelForm::exponential;
    throw ConfigError("unknown model form '" + std::string(s) + "'");
}

/// log t for the power law, t for exponential decay.
inline double regressor(ModelForm form, double t) { return form == ModelForm::power_law ? std::log(t) : t; }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(log(r_t / r_next)) for a speedrun improvement r_t -> r_next.
inline double speedrun_response(double r_t, double r_next) {
    if (!(r_t > 0.0) || !(r_next > 0.0) || !std::isfinite(r_t) || !std::isfinite(r_next))
        throw DomainError("speedrun_response: records must be positive and finite");
    if (!(r_next < r_t)) throw DomainError("speedrun_response: no improvement (r_next >= r_t)");
    // log1p keeps precision for tiny improvements; the plain ratio is exact for large ones,
    // where r_next - r_t would cancel away r_next.
    const double log_ratio = r_next > 0.5 * r_t ? -std::log1p((r_next - r_t) / r_t) : std::log(r_t / r_next);
    if (!(log_ratio > 0.0)) throw DomainError("speedrun_response: improvement below floating-point resolution");
    return std::log(log_ratio);
}

/// log(logit(r_t) - logit(r_next)) for an error-rate improvement.
inline double ml_response(double r_t, double r_next) {
    if (!(r_t > 0.0 && r_t < 1.0) || !(r_next > 0.0 && r_next < 1.0))
        throw DomainError("ml_response: error rates must lie in (0, 1)");
    if (!(r_next < r_t)) throw DomainError("ml_response: no improvement (r_next >= r_t)");
    const double gap = logit(r_t) - logit(r_next);
    if (!(gap > 0.0)) throw DomainError("ml_response: improvement below floating-point resolution");
    return std::log(gap);
}

/// r_t * exp(-exp(y)).
inline double invert_speedrun(double y, double r_t) { return r_t * std::exp(-std::exp(y)); }

/// sigmoid(logit(r_t) - exp(y)).
inline double invert_ml(double y, double r_t) { return sigmoid(logit(r_t) - std::exp(y)); }

inline double response(SeriesKind kind, double r_t, double r_next) {
    return kind == SeriesKind::speedrun ? speedrun_response(r_t, r_next) : ml_response(r_t, r_next);
}

inline double invert(SeriesKind kind, double y, double r_t) {
    return kind == SeriesKind::speedrun ? invert_speedrun(y, r_t) : invert_ml(y, r_t);
}

/// 1 - r_next / r_t implied by response y; exact for speedruns, needs r_t for ML.
inline double relative_improvement(SeriesKind kind, double y, double r_t) {
    if (kind == SeriesKind::speedrun) return -std::expm1(-std::exp(y));
    return 1.0 - invert_ml(y, r_t) / r_t;
}

/// One regression row: the pair (R_t, R_{t+1}) of a series.
struct ImprovementSample {
    std::string series_id;
    int t = 1;  ///< 1-based index of the earlier record
    double response = 0.0;
    double regressor = 0.0;
};

/// One sample per consecutive record pair with index t <= max_t (all pairs when unset).
/// Regressor is log t (power law) or t (exponential decay).
inline std::vector<ImprovementSample> build_design(const RecordSeries& series, ModelForm form,
                                                   std::optional<int> max_t = std::nullopt) {
    if (series.size() < 2)
        throw InsufficientDataError("build_design: series '" + series.series_id + "' has fewer than 2 records");
    std::vector<ImprovementSample> out;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        if (max_t && t > *max_t) break;
        const double y = response(series.kind, series.records[i].value, series.records[i + 1].value);
        out.push_back(ImprovementSample{series.series_id, t, y, regressor(form, t)});
    }
    return out;
}

/// Rows for every series with at least two records. With max_t = K - 1 this keeps the
/// pairs among the first K records of each series.
inline std::vector<ImprovementSample> build_design(const Corpus& corpus, ModelForm form,
                                                   std::optional<int> max_t = std::nullopt) {
    std::vector<ImprovementSample> out;
    for (const auto& s : corpus) {
        if (s.size() < 2) continue;
        auto rows = build_design(s, form, max_t);
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

}  // namespace recordlaw
