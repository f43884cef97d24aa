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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "recordlaw/baselines.hpp"
#include "recordlaw/bench.hpp"
#include "recordlaw/error.hpp"
#include "recordlaw/rng.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw {

enum class GapMode { regression, bootstrap };

/// Model for the waiting time between consecutive records of one series:
/// log(T_{t+1} - T_t) = zeta + gamma * t + eps when the fitted trend is increasing,
/// otherwise resampling of the observed gaps.
struct GapModel {
    double zeta = 0.0;
    double gamma = 0.0;
    double residual_sd = 0.0;
    GapMode mode = GapMode::bootstrap;
    std::vector<double> historical_gaps;  ///< seconds
};

inline constexpr double kSecondsPerWeek = 7.0 * 86400.0;

struct HorizonConfig {
    double delta_t = 8.0 * kSecondsPerWeek;  ///< seconds
    int n_min = 15;
    int n_max = 45;
    int n_simulations = 1;  ///< >1 aggregates trajectories by their median
    std::uint64_t seed = 0;
    std::size_t n_resamples = 10000;
    /// End of the observation window (e.g. the retrieval date). Unset: the last record of
    /// each series, which is the conservative choice when the window is unknown.
    std::optional<UtcSeconds> data_end;
};

inline void check(const HorizonConfig& c) {
    if (!(c.delta_t > 0.0)) throw ConfigError("horizon: delta_t must be positive");
    if (c.n_min < 15) throw ConfigError("horizon: n_min must be >= 15 for the gap regression to be identified");
    if (c.n_max < c.n_min) throw ConfigError("horizon: n_max < n_min");
    if (c.n_simulations < 1) throw ConfigError("horizon: n_simulations must be >= 1");
}

/// Fits the gap model on the first N records (gaps for t = 1 .. N-1).
inline GapModel fit_gap_model(const RecordSeries& series, int N) {
    if (N < 15) throw ConfigError("fit_gap_model: N must be >= 15");
    if (static_cast<int>(series.size()) < N)
        throw InsufficientDataError("fit_gap_model: series '" + series.series_id + "' has fewer than N records");
    std::vector<double> t, log_gap;
    GapModel m;
    for (int i = 1; i < N; ++i) {
        const double gap = static_cast<double>(series.records[i].timestamp - series.records[i - 1].timestamp);
        if (!(gap > 0.0))
            throw DataError("fit_gap_model: non-positive gap before record " + std::to_string(i + 1) + " of '" +
                            series.series_id + "'");
        m.historical_gaps.push_back(gap);
        t.push_back(i);
        log_gap.push_back(std::log(gap));
    }
    const LineFit f = ols_line(t, log_gap);
    m.zeta = f.intercept;
    m.gamma = f.slope;
    m.residual_sd = std::sqrt(f.residual_variance);
    m.mode = m.gamma > 0.0 ? GapMode::regression : GapMode::bootstrap;
    return m;
}

/// Generative improvement model used by the simulator: y = alpha + beta g(t) + eps,
/// eps ~ N(0, residual_sd^2), applied to the current record by the inverse transform.
struct ImprovementModel {
    double alpha = 0.0;
    double beta = 0.0;
    double residual_sd = 0.0;
    ModelForm form = ModelForm::power_law;
    SeriesKind kind = SeriesKind::speedrun;

    static ImprovementModel from(const FixedEffectsEntry& fe, SeriesKind kind, ModelForm form = ModelForm::power_law) {
        return {fe.alpha, fe.beta, std::sqrt(fe.residual_variance), form, kind};
    }
};

struct TrajectoryPoint {
    double elapsed = 0.0;  ///< seconds after the start record
    double value = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> records;  ///< new records inside the horizon
    double final_value = 0.0;
};

/// Simulates records after record number `start_index` until `delta_t` seconds have passed.
/// Gaps and improvements alternate; the improvement from record t to t+1 uses regressor
/// g(t) and the gap uses index t. Returns the record standing at the horizon.
template <class Rng>
Trajectory simulate_trajectory(const ImprovementModel& improvement, const GapModel& gaps, double start_record,
                               int start_index, double delta_t, Rng& rng) {
    if (gaps.mode == GapMode::bootstrap && gaps.historical_gaps.empty())
        throw ConfigError("simulate_trajectory: bootstrap gap model without gaps");
    std::normal_distribution<double> normal(0.0, 1.0);
    Trajectory tr;
    double elapsed = 0.0;
    double value = start_record;
    for (int t = start_index;; ++t) {
        double gap;
        if (gaps.mode == GapMode::regression) {
            gap = std::exp(gaps.zeta + gaps.gamma * t + gaps.residual_sd * normal(rng));
        } else {
            gap = gaps.historical_gaps[uniform_index(rng, gaps.historical_gaps.size())];
        }
        elapsed += gap;
        if (!(elapsed <= delta_t)) break;
        const double y = improvement.alpha + improvement.beta * regressor(improvement.form, t) +
                         improvement.residual_sd * normal(rng);
        value = invert(improvement.kind, y, value);
        tr.records.push_back({elapsed, value});
    }
    tr.final_value = value;
    return tr;
}

/// Value of the last record with timestamp <= at.
inline double record_at(const RecordSeries& s, UtcSeconds at) {
    auto it = std::upper_bound(s.records.begin(), s.records.end(), at,
                               [](UtcSeconds v, const Record& r) { return v < r.timestamp; });
    if (it == s.records.begin()) throw LookupError("record_at: time precedes the first record");
    return std::prev(it)->value;
}

/// Forecast of the record at T_N + delta_t for one (series, N), using only records 1..N.
inline double forecast_at_horizon(const RecordSeries& s, int N, const HorizonConfig& config) {
    const auto fe = fit_fixed_effects(s, ModelForm::power_law, N);
    const auto gaps = fit_gap_model(s, N);
    const auto imp = ImprovementModel::from(fe, s.kind);
    std::vector<double> finals;
    for (int k = 0; k < config.n_simulations; ++k) {
        SplitMix64 rng(derive_seed(config.seed, {fnv1a64(s.series_id), static_cast<std::uint64_t>(N),
                                                 static_cast<std::uint64_t>(k)}));
        finals.push_back(simulate_trajectory(imp, gaps, s.records[N - 1].value, N, config.delta_t, rng).final_value);
    }
    if (finals.size() == 1) return finals.front();
    std::sort(finals.begin(), finals.end());
    const std::size_t m = finals.size();
    return m % 2 ? finals[m / 2] : 0.5 * (finals[m / 2 - 1] + finals[m / 2]);
}

/// Horizon evaluation: one forecast per series and N in [n_min, n_max] against the no-change
/// baseline. Rows whose horizon runs past the observation window are excluded and counted
/// in n_excluded. Models: "baseline", "simulation".
inline BenchmarkReport evaluate_horizon(const Corpus& corpus, const HorizonConfig& config) {
    check(config);
    BenchmarkReport rep;
    rep.kind = corpus.empty() ? SeriesKind::speedrun : corpus.front().kind;
    rep.protocol = "horizon";
    rep.models = {"baseline", "simulation"};
    rep.seed = config.seed;
    rep.errors.assign(2, {});
    rep.secondary_errors.assign(2, {});
    for (const auto& s : corpus) {
        for (int N = config.n_min; N <= config.n_max && N <= static_cast<int>(s.size()); ++N) {
            const double horizon = static_cast<double>(s.records[N - 1].timestamp) + config.delta_t;
            const UtcSeconds window_end = config.data_end.value_or(s.records.back().timestamp);
            if (horizon > static_cast<double>(window_end)) {
                ++rep.n_excluded;
                continue;
            }
            const double current = s.records[N - 1].value;
            const double actual = record_at(s, static_cast<UtcSeconds>(std::floor(horizon)));
            const double sim = forecast_at_horizon(s, N, config);
            ReportRow row{s.series_id, N, current, actual, {current, sim}, false};
            for (std::size_t m = 0; m < 2; ++m) {
                rep.errors[m].push_back((row.predicted[m] - actual) / current);
                rep.secondary_errors[m].push_back(row.predicted[m] - actual);
            }
            rep.rows.push_back(std::move(row));
        }
    }
    summarize(rep);
    add_bootstrap_tests(rep, config.n_resamples, config.seed);
    return rep;
}

}  // namespace recordlaw
