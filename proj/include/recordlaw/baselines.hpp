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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recordlaw/error.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw {

/// Least-squares line y = intercept + slope * x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double residual_variance = 0.0;  ///< RSS / (n - 2); zero for n = 2
    std::size_t n_obs = 0;
};

/// Ordinary least squares via column-pivoting Householder QR.
inline LineFit ols_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("ols_line: x and y differ in length");
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 2) throw InsufficientDataError("ols_line: need at least 2 rows, got " + std::to_string(n));
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = x[i];
        Y[i] = y[i];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < 2) throw InsufficientDataError("ols_line: regressor has no spread");
    const Eigen::Vector2d coef = qr.solve(Y);
    LineFit f;
    f.intercept = coef[0];
    f.slope = coef[1];
    f.n_obs = static_cast<std::size_t>(n);
    f.residual_variance = n > 2 ? (Y - X * coef).squaredNorm() / static_cast<double>(n - 2) : 0.0;
    return f;
}

/// Per-series regression of the transformed improvement on g(t).
struct FixedEffectsEntry {
    std::string series_id;
    double alpha = 0.0;
    double beta = 0.0;
    double residual_variance = 0.0;
    std::size_t n_obs = 0;
};

using FixedEffectsFit = std::map<std::string, FixedEffectsEntry>;

/// Fits one series on its rows with index t < up_to_t, i.e. everything known once record
/// number up_to_t has been set. Throws InsufficientDataError with fewer than 2 rows.
inline FixedEffectsEntry fit_fixed_effects(const RecordSeries& series, ModelForm form, int up_to_t) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        if (t >= up_to_t) break;
        x.push_back(regressor(form, t));
        y.push_back(response(series.kind, series.records[i].value, series.records[i + 1].value));
    }
    if (x.size() < 2)
        throw InsufficientDataError("fixed effects: series '" + series.series_id + "' has " +
                                    std::to_string(x.size()) + " usable rows before t=" + std::to_string(up_to_t));
    const LineFit f = ols_line(x, y);
    return {series.series_id, f.intercept, f.slope, f.residual_variance, f.n_obs};
}

/// Fits every series that has at least two usable rows; the others are skipped.
inline FixedEffectsFit fit_fixed_effects(const Corpus& corpus, ModelForm form, int up_to_t) {
    FixedEffectsFit out;
    for (const auto& s : corpus) {
        try {
            out.emplace(s.series_id, fit_fixed_effects(s, form, up_to_t));
        } catch (const InsufficientDataError&) {
        }
    }
    return out;
}

/// Always predicts no improvement: zero relative improvement / zero log-odds gap.
inline double zero_baseline(const std::string& /*series_id*/, int /*t*/) { return 0.0; }

struct EmaConfig {
    double decay = 1.0;
    bool shared_across_groups = true;
};

inline void check(const EmaConfig& c) {
    if (!(c.decay > 0.0 && c.decay <= 1.0)) throw ConfigError("EMA decay must lie in (0, 1]");
}

/// Exponentially weighted mean of `history` (oldest first): weight decay^age, age 0 = newest.
inline double ema_predict(std::span<const double> history, double decay) {
    check(EmaConfig{decay});
    if (history.empty()) throw InsufficientDataError("ema_predict: empty history");
    double num = 0.0, den = 0.0, w = 1.0;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        num += w * *it;
        den += w;
        w *= decay;
    }
    return num / den;
}

/// 0.05, 0.10, ..., 1.00.
inline std::vector<double> default_ema_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 20; ++k) g.push_back(k / 20.0);
    return g;
}

}  // namespace recordlaw
