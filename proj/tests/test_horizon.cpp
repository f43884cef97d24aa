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

#include <gtest/gtest.h>

#include <cmath>

#include "recordlaw/horizon.hpp"
#include "recordlaw/synthetic.hpp"

using namespace recordlaw;

namespace {

RecordSeries series_with_gaps(const std::vector<double>& gaps, double first = 600.0) {
    RecordSeries s{"s", SeriesKind::speedrun, "", {{0, first}}};
    for (double g : gaps)
        s.records.push_back({s.records.back().timestamp + static_cast<UtcSeconds>(std::llround(g)),
                             s.records.back().value * 0.97});
    return s;
}

Corpus self_consistent_corpus(std::uint64_t seed) {
    SplitMix64 rng(seed);
    synthetic::CorpusShape shape;
    shape.group_sizes.assign(25, 59);
    shape.mean_gap_days = 20.0;
    return synthetic::simulate_corpus({-2.03, -1.30, 0.075, 0.112, 0.0, 0.80}, shape, rng);
}

}  // namespace

TEST(GapModel, NoiselessExponentialGrowth) {
    std::vector<double> gaps;
    for (int t = 1; t <= 19; ++t) gaps.push_back(1e6 * std::exp(1.0 + 0.1 * t));
    const auto m = fit_gap_model(series_with_gaps(gaps), 20);
    EXPECT_NEAR(m.zeta, 1.0 + std::log(1e6), 1e-5);
    EXPECT_NEAR(m.gamma, 0.1, 1e-6);
    EXPECT_EQ(m.mode, GapMode::regression);
    EXPECT_EQ(m.historical_gaps.size(), 19u);
}

TEST(GapModel, ShrinkingGapsBootstrap) {
    std::vector<double> gaps;
    for (int t = 1; t <= 29; ++t) gaps.push_back(1e7 / t);
    const auto m = fit_gap_model(series_with_gaps(gaps), 16);
    EXPECT_LT(m.gamma, 0.0);
    EXPECT_EQ(m.mode, GapMode::bootstrap);
    EXPECT_EQ(m.historical_gaps.size(), 15u);
    EXPECT_EQ(m.historical_gaps.front(), 1e7);
}

TEST(GapModel, IidLognormalGaps) {
    SplitMix64 rng(1);
    std::lognormal_distribution<double> ln(std::log(86400.0 * 30), 0.8);
    int positive = 0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> gaps(44);
        for (auto& g : gaps) g = ln(rng);
        const auto m = fit_gap_model(series_with_gaps(gaps), 45);
        EXPECT_EQ(m.mode, m.gamma > 0 ? GapMode::regression : GapMode::bootstrap);
        // SE of the slope for 44 equally spaced points and sd 0.8.
        EXPECT_LT(std::abs(m.gamma), 5 * 0.8 / std::sqrt(44 * (44 * 44 - 1) / 12.0));
        positive += m.gamma > 0;
    }
    EXPECT_GT(positive, 60);
    EXPECT_LT(positive, 140);
}

TEST(GapModel, Errors) {
    std::vector<double> gaps(20, 1000.0);
    auto s = series_with_gaps(gaps);
    EXPECT_THROW(fit_gap_model(s, 14), ConfigError);
    EXPECT_THROW(fit_gap_model(s, 22), InsufficientDataError);
    s.records[5].timestamp = s.records[4].timestamp;
    EXPECT_THROW(fit_gap_model(s, 15), DataError);
}

TEST(Simulate, HorizonShorterThanAnyGap) {
    GapModel g;
    g.historical_gaps = {5000.0, 7000.0, 9000.0};
    const ImprovementModel imp{-2.0, -1.0, 0.5};
    SplitMix64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto tr = simulate_trajectory(imp, g, 123.0, 15, 4999.0, rng);
        EXPECT_TRUE(tr.records.empty());
        EXPECT_EQ(tr.final_value, 123.0);
    }
}

TEST(Simulate, DeterministicClosedForm) {
    GapModel g;
    g.mode = GapMode::regression;
    g.gamma = std::log(2.0);
    g.zeta = std::log(100.0) - 15 * std::log(2.0);  // gaps 100, 200, 400, ...
    const ImprovementModel imp{-1.5, -0.7, 0.0};
    SplitMix64 rng(3);
    const auto tr = simulate_trajectory(imp, g, 1000.0, 15, 350.0, rng);
    ASSERT_EQ(tr.records.size(), 2u);
    EXPECT_NEAR(tr.records[0].elapsed, 100.0, 1e-9);
    EXPECT_NEAR(tr.records[1].elapsed, 300.0, 1e-9);
    const double expected = 1000.0 * std::exp(-std::exp(-1.5) * (std::pow(15.0, -0.7) + std::pow(16.0, -0.7)));
    EXPECT_NEAR(tr.final_value, expected, 1e-9);
}

TEST(Simulate, BootstrapGapMeanMatchesHistory) {
    GapModel g;
    g.historical_gaps = {100, 250, 400, 800, 1600, 3200};
    double mean = 0, sd = 0;
    for (double v : g.historical_gaps) mean += v / 6;
    for (double v : g.historical_gaps) sd += (v - mean) * (v - mean) / 6;
    sd = std::sqrt(sd);
    const ImprovementModel imp{-25.0, 0.0, 0.0};
    SplitMix64 rng(4);
    double sum = 0;
    std::size_t n = 0;
    for (int i = 0; i < 200; ++i) {
        const auto tr = simulate_trajectory(imp, g, 1000.0, 15, 1e6, rng);
        double prev = 0;
        for (const auto& r : tr.records) {
            sum += r.elapsed - prev;
            prev = r.elapsed;
            ++n;
        }
    }
    EXPECT_GT(n, 10000u);
    EXPECT_LT(std::abs(sum / n - mean), 3 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(Simulate, TrajectoriesStrictlyDecrease) {
    const auto corpus = self_consistent_corpus(5);
    SplitMix64 rng(5);
    for (const auto& s : corpus) {
        const auto fe = fit_fixed_effects(s, ModelForm::power_law, 30);
        const auto gm = fit_gap_model(s, 30);
        for (int k = 0; k < 40; ++k) {
            const auto tr = simulate_trajectory(ImprovementModel::from(fe, s.kind), gm, s.records[29].value, 30,
                                                365 * 86400.0, rng);
            double prev = s.records[29].value;
            for (const auto& r : tr.records) {
                EXPECT_LT(r.value, prev);
                prev = r.value;
            }
        }
    }
}

TEST(Forecast, NoLookahead) {
    const auto corpus = self_consistent_corpus(6);
    HorizonConfig cfg;
    cfg.n_simulations = 5;
    cfg.seed = 77;
    for (const auto& s : corpus) {
        for (int N : {15, 30}) {
            auto poisoned = s;
            for (std::size_t i = N; i < poisoned.size(); ++i) {
                poisoned.records[i].value = poisoned.records[i - 1].value * 1e-3;
                poisoned.records[i].timestamp = poisoned.records[i - 1].timestamp + 1;
            }
            EXPECT_EQ(forecast_at_horizon(s, N, cfg), forecast_at_horizon(poisoned, N, cfg));
        }
    }
}

TEST(Forecast, DeterministicUnderSeed) {
    const auto corpus = self_consistent_corpus(7);
    HorizonConfig cfg;
    cfg.n_simulations = 9;
    cfg.seed = 3;
    const double a = forecast_at_horizon(corpus[0], 20, cfg);
    EXPECT_EQ(a, forecast_at_horizon(corpus[0], 20, cfg));
    cfg.seed = 4;
    EXPECT_NE(a, forecast_at_horizon(corpus[0], 20, cfg));
}

TEST(Evaluate, SimulatorBeatsBaselineOnModelData) {
    HorizonConfig cfg;
    cfg.n_simulations = 25;
    cfg.seed = 11;
    const auto rep = evaluate_horizon(self_consistent_corpus(8), cfg);
    EXPECT_GT(rep.n_rows(), 500u);
    EXPECT_LT(rep.metrics.at("simulation").l2, rep.metrics.at("baseline").l2);
    EXPECT_LT(rep.p_values.at("simulation_vs_baseline"), 0.01);
}

TEST(Evaluate, RowsAndExclusions) {
    const auto corpus = self_consistent_corpus(9);
    HorizonConfig cfg;
    cfg.n_resamples = 1000;
    cfg.delta_t = 400.0 * 86400.0;  // longer than the ~300 days after record 45
    const auto rep = evaluate_horizon(corpus, cfg);
    std::size_t candidates = 0;
    for (const auto& s : corpus) candidates += std::min<int>(45, s.size()) - 15 + 1;
    EXPECT_EQ(rep.n_rows() + rep.n_excluded, candidates);
    EXPECT_GT(rep.n_excluded, 0u);
    for (std::size_t i = 0; i < rep.n_rows(); ++i) {
        const auto& r = rep.rows[i];
        EXPECT_EQ(rep.errors[0][i], (r.current - r.actual) / r.current);
        if (r.actual == r.current) {
            EXPECT_EQ(rep.errors[0][i], 0.0);
        }
        EXPECT_EQ(rep.secondary_errors[1][i], r.predicted[1] - r.actual);
    }

    auto early = cfg;
    early.data_end = corpus.front().records[20].timestamp;
    const auto clipped = evaluate_horizon(corpus, early);
    EXPECT_LT(clipped.n_rows(), rep.n_rows());
    EXPECT_EQ(clipped.n_rows() + clipped.n_excluded, candidates);
}

TEST(Evaluate, ConfigErrors) {
    HorizonConfig c;
    c.n_min = 10;
    EXPECT_THROW(check(c), ConfigError);
    c = {};
    c.n_max = 14;
    EXPECT_THROW(check(c), ConfigError);
    c = {};
    c.delta_t = 0;
    EXPECT_THROW(check(c), ConfigError);
    c = {};
    c.n_simulations = 0;
    EXPECT_THROW(check(c), ConfigError);
}

TEST(RecordAt, Lookup) {
    const auto s = series_with_gaps({100, 100, 100});
    EXPECT_EQ(record_at(s, 0), 600.0);
    EXPECT_EQ(record_at(s, 150), s.records[1].value);
    EXPECT_EQ(record_at(s, 10000), s.records[3].value);
    EXPECT_THROW(record_at(s, -1), LookupError);
}
