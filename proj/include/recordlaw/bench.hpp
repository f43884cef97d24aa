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
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recordlaw/baselines.hpp"
#include "recordlaw/error.hpp"
#include "recordlaw/mixed_model.hpp"
#include "recordlaw/rng.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw {

/// Model identifiers understood by the harness.
///   zero     no improvement
///   fixed    per-series OLS refit at every step
///   ema      exponential moving average of past responses
///   re       power-law random effects, conditional modes
///   re_mean  power-law random effects, population means only
///   re_exp   exponential-decay random effects, conditional modes
inline const std::vector<std::string>& known_models() {
    static const std::vector<std::string> ids{"zero", "fixed", "ema", "re", "re_mean", "re_exp"};
    return ids;
}

/// Out-of-sample evaluation protocol. Exactly one of cutoff_K / leave_last_out applies:
/// with a cutoff the random-effects model sees the first K records of every series and
/// predicts every later improvement; leave-last-out fits on all but the final improvement
/// of each series and predicts that one.
struct BenchProtocol {
    std::optional<int> cutoff_K;
    bool leave_last_out = false;
    std::vector<std::string> models{"zero", "fixed", "ema", "re"};
    std::uint64_t seed = 0;
    /// Fixed EMA decay; unset means ex-post tuning over `ema_grid`.
    std::optional<double> ema_decay;
    std::vector<double> ema_grid = default_ema_grid();
    /// Covariance mask etc. for the random-effects models; default depends on the corpus kind.
    std::optional<MixedModelSpec> re_spec;
    PointMode point_mode = PointMode::median;
    /// Paired bootstrap resamples per model pair; 0 skips the tests.
    std::size_t n_resamples = 10000;

    static BenchProtocol speedrun(int K) {
        BenchProtocol p;
        p.cutoff_K = K;
        return p;
    }
    static BenchProtocol ml_last_out() {
        BenchProtocol p;
        p.leave_last_out = true;
        p.models = {"zero", "re", "re_exp"};
        return p;
    }

    std::string name() const { return leave_last_out ? "ml-lastout" : "speedrun-K" + std::to_string(cutoff_K.value_or(0)); }
};

inline void check(const BenchProtocol& p) {
    const bool has_cutoff = p.cutoff_K.has_value();
    if (has_cutoff == p.leave_last_out) throw ConfigError("protocol needs exactly one of cutoff_K and leave_last_out");
    if (has_cutoff && *p.cutoff_K < 2) throw ConfigError("cutoff_K must be >= 2");
    if (p.models.empty()) throw ConfigError("protocol lists no models");
    for (const auto& m : p.models)
        if (std::find(known_models().begin(), known_models().end(), m) == known_models().end())
            throw ConfigError("unknown model '" + m + "'");
    if (p.ema_decay) check(EmaConfig{*p.ema_decay});
    if (!p.ema_decay && p.ema_grid.empty()) throw ConfigError("EMA grid is empty");
    for (double d : p.ema_grid) check(EmaConfig{d});
}

/// One held-out improvement: predict record t+1 of a series from record t.
struct ReportRow {
    std::string series_id;
    int t = 0;
    double current = 0.0;       ///< R_t (R(T_N) for horizon rows)
    double actual = 0.0;        ///< realised value being predicted
    std::vector<double> predicted;  ///< per model, same order as BenchmarkReport::models
    bool fallback = false;      ///< a comparison model lacked data and predicted no change
};

struct ModelMetrics {
    double l2 = 0.0;  ///< root mean square error, primary space
    double l1 = 0.0;  ///< mean absolute error, primary space
    double l2_secondary = 0.0;
    double l1_secondary = 0.0;
};

/// Paired per-row errors for a set of models plus summaries.
///
/// Primary error space: speedruns use the relative improvement, error = r_hat - r with
/// r = 1 - R_{t+1}/R_t; ML benchmarks use raw error-rate points, error = R_hat - R.
/// Secondary space: raw seconds for speedruns, error relative to R_t for ML.
/// Horizon reports use (R_hat - R_actual) / R(T_N) as primary and raw values as secondary.
struct BenchmarkReport {
    SeriesKind kind = SeriesKind::speedrun;
    std::string protocol;
    std::vector<std::string> models;
    std::vector<ReportRow> rows;
    std::vector<std::vector<double>> errors;            ///< [model][row]
    std::vector<std::vector<double>> secondary_errors;  ///< [model][row]
    std::map<std::string, ModelMetrics> metrics;
    std::map<std::string, double> p_values;  ///< "a_vs_b": P(a does not beat b)
    std::optional<double> ema_decay;
    std::map<std::string, MixedModelFit> fits;
    std::size_t n_excluded = 0;
    std::uint64_t seed = 0;
    std::size_t n_resamples = 0;

    std::size_t n_rows() const noexcept { return rows.size(); }

    std::size_t model_index(const std::string& id) const {
        auto it = std::find(models.begin(), models.end(), id);
        if (it == models.end()) throw LookupError("model '" + id + "' not in report");
        return static_cast<std::size_t>(it - models.begin());
    }
};

inline double root_mean_square(std::span<const double> e) {
    if (e.empty()) return 0.0;
    double s = 0.0;
    for (double v : e) s += v * v;
    return std::sqrt(s / static_cast<double>(e.size()));
}

inline double mean_absolute(std::span<const double> e) {
    if (e.empty()) return 0.0;
    double s = 0.0;
    for (double v : e) s += std::abs(v);
    return s / static_cast<double>(e.size());
}

/// Recomputes `metrics` from the error columns.
inline void summarize(BenchmarkReport& r) {
    r.metrics.clear();
    for (std::size_t m = 0; m < r.models.size(); ++m) {
        ModelMetrics mm;
        mm.l2 = root_mean_square(r.errors[m]);
        mm.l1 = mean_absolute(r.errors[m]);
        mm.l2_secondary = root_mean_square(r.secondary_errors[m]);
        mm.l1_secondary = mean_absolute(r.secondary_errors[m]);
        r.metrics[r.models[m]] = mm;
    }
}

/// One-sided paired bootstrap on the difference of RMS errors.
///
/// Every resample draws rows with replacement (the same rows for both models) and computes
/// d = L2_a - L2_b. The p-value is the fraction of resamples in which model a fails to beat
/// model b (d > 0), counting ties as one half. Resample j draws from its own stream
/// derive_seed(seed, {j}), so the result does not depend on evaluation order.
inline double paired_bootstrap(const BenchmarkReport& report, const std::string& model_a, const std::string& model_b,
                               std::size_t n_resamples, std::uint64_t seed) {
    if (n_resamples < 1000) throw ConfigError("paired_bootstrap: n_resamples must be >= 1000");
    const auto& ea = report.errors[report.model_index(model_a)];
    const auto& eb = report.errors[report.model_index(model_b)];
    const std::size_t n = ea.size();
    if (n == 0) throw InsufficientDataError("paired_bootstrap: report has no rows");
    std::vector<double> sa(n), sb(n);
    for (std::size_t i = 0; i < n; ++i) {
        sa[i] = ea[i] * ea[i];
        sb[i] = eb[i] * eb[i];
    }
    double fails = 0.0;
    for (std::size_t j = 0; j < n_resamples; ++j) {
        SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(j)}));
        double qa = 0.0, qb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = uniform_index(rng, n);
            qa += sa[k];
            qb += sb[k];
        }
        const double d = std::sqrt(qa / n) - std::sqrt(qb / n);
        if (d > 0.0)
            fails += 1.0;
        else if (d == 0.0)
            fails += 0.5;
    }
    return fails / static_cast<double>(n_resamples);
}

/// Bootstrap p-values for every ordered pair of models.
inline void add_bootstrap_tests(BenchmarkReport& r, std::size_t n_resamples, std::uint64_t seed) {
    r.n_resamples = n_resamples;
    if (n_resamples == 0 || r.rows.empty()) return;
    for (const auto& a : r.models)
        for (const auto& b : r.models)
            if (a != b) r.p_values[a + "_vs_" + b] = paired_bootstrap(r, a, b, n_resamples, seed);
}

/// |error| pairs for a log-log scatter of model a (x) against model b (y).
struct ScatterData {
    std::vector<std::pair<double, double>> points;
    /// Fraction of rows where b is strictly better than a (points below y = x).
    double fraction_below = 0.0;
};

inline ScatterData error_scatter(const BenchmarkReport& report, const std::string& model_a, const std::string& model_b) {
    const auto& ea = report.errors[report.model_index(model_a)];
    const auto& eb = report.errors[report.model_index(model_b)];
    ScatterData d;
    std::size_t below = 0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        d.points.emplace_back(std::abs(ea[i]), std::abs(eb[i]));
        if (std::abs(eb[i]) < std::abs(ea[i])) ++below;
    }
    d.fraction_below = ea.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(ea.size());
    return d;
}

namespace detail {

struct SeriesResponses {
    const RecordSeries* series = nullptr;
    std::vector<double> y;  ///< y[t-1] is the response of pair (t, t+1)
};

struct OosRow {
    std::size_t series = 0;
    int t = 0;
};

inline std::vector<SeriesResponses> responses_of(const Corpus& corpus) {
    std::vector<SeriesResponses> out;
    for (const auto& s : corpus) {
        SeriesResponses r{&s, {}};
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            r.y.push_back(response(s.kind, s.records[i].value, s.records[i + 1].value));
        out.push_back(std::move(r));
    }
    return out;
}

/// Number of leading pairs of a series that the random-effects fit may use.
inline int fit_rows(const BenchProtocol& p, const RecordSeries& s) {
    const int pairs = static_cast<int>(s.size()) - 1;
    if (p.leave_last_out) return std::max(0, pairs - 1);
    return std::min(pairs, *p.cutoff_K - 1);
}

inline std::vector<OosRow> oos_rows(const Corpus& corpus, const BenchProtocol& p) {
    std::vector<OosRow> rows;
    for (std::size_t c = 0; c < corpus.size(); ++c) {
        const int pairs = static_cast<int>(corpus[c].size()) - 1;
        if (p.leave_last_out) {
            if (pairs >= 2) rows.push_back({c, pairs});
        } else {
            for (int t = *p.cutoff_K; t <= pairs; ++t) rows.push_back({c, t});
        }
    }
    return rows;
}

inline std::vector<ImprovementSample> re_samples(const std::vector<SeriesResponses>& resp, const BenchProtocol& p,
                                                 ModelForm form) {
    std::vector<ImprovementSample> out;
    for (const auto& r : resp) {
        const int n = fit_rows(p, *r.series);
        for (int t = 1; t <= n; ++t) out.push_back({r.series->series_id, t, r.y[t - 1], regressor(form, t)});
    }
    return out;
}

inline double apply_prediction(SeriesKind kind, double eta, double scale, PointMode mode, double r_t) {
    const double y = mode == PointMode::mean ? eta + 0.5 * scale : eta;
    return invert(kind, y, r_t);
}

/// Predicted next values of the EMA model at a fixed decay; fallback rows predict no change.
inline std::vector<double> ema_column(const std::vector<SeriesResponses>& resp, const std::vector<OosRow>& rows,
                                      double decay, std::vector<bool>* fallback = nullptr) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = resp[rows[i].series];
        const int t = rows[i].t;
        const double r_t = r.series->records[t - 1].value;
        if (t < 2) {
            out[i] = r_t;
            if (fallback) (*fallback)[i] = true;
            continue;
        }
        const double eta = ema_predict(std::span<const double>(r.y.data(), static_cast<std::size_t>(t - 1)), decay);
        out[i] = invert(r.series->kind, eta, r_t);
    }
    return out;
}

/// Primary and secondary error of a predicted next value.
inline std::pair<double, double> row_errors(SeriesKind kind, double r_t, double actual, double predicted) {
    if (kind == SeriesKind::speedrun) return {(actual - predicted) / r_t, predicted - actual};
    return {predicted - actual, (predicted - actual) / r_t};
}

inline SeriesKind corpus_kind(const Corpus& corpus) {
    if (corpus.empty()) throw InputError("benchmark: empty corpus");
    const SeriesKind k = corpus.front().kind;
    for (const auto& s : corpus)
        if (s.kind != k) throw ConfigError("benchmark: corpus mixes speedrun and ML series");
    return k;
}

}  // namespace detail

/// Primary-space RMS error of the EMA model at one decay under the protocol.
inline double ema_protocol_error(const Corpus& corpus, const BenchProtocol& protocol, double decay) {
    const SeriesKind kind = detail::corpus_kind(corpus);
    const auto resp = detail::responses_of(corpus);
    const auto rows = detail::oos_rows(corpus, protocol);
    const auto pred = detail::ema_column(resp, rows, decay);
    std::vector<double> e(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = *resp[rows[i].series].series;
        e[i] = detail::row_errors(kind, s.records[rows[i].t - 1].value, s.records[rows[i].t].value, pred[i]).first;
    }
    return root_mean_square(e);
}

struct EmaTuning {
    double decay = 1.0;
    double error = std::numeric_limits<double>::infinity();
    std::vector<double> grid_errors;
};

/// Ex-post best decay: evaluates the protocol at every grid point on the evaluation rows
/// themselves and returns the first minimiser of the primary RMS error.
inline EmaTuning tune_ema_ex_post(const Corpus& corpus, const BenchProtocol& protocol, const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("tune_ema_ex_post: empty grid");
    EmaTuning best;
    for (double d : grid) {
        const double e = ema_protocol_error(corpus, protocol, d);
        best.grid_errors.push_back(e);
        if (e < best.error) {
            best.error = e;
            best.decay = d;
        }
    }
    return best;
}

/// Runs the out-of-sample protocol. The random-effects models are fit once on the
/// protocol's training prefix of every series; the comparison models are refit at every
/// step with all records up to and including R_t.
inline BenchmarkReport run_benchmark(const Corpus& corpus, const BenchProtocol& protocol) {
    check(protocol);
    const SeriesKind kind = detail::corpus_kind(corpus);
    const auto resp = detail::responses_of(corpus);
    const auto rows = detail::oos_rows(corpus, protocol);

    BenchmarkReport rep;
    rep.kind = kind;
    rep.protocol = protocol.name();
    rep.models = protocol.models;
    rep.seed = protocol.seed;
    rep.rows.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = *resp[rows[i].series].series;
        rep.rows[i].series_id = s.series_id;
        rep.rows[i].t = rows[i].t;
        rep.rows[i].current = s.records[rows[i].t - 1].value;
        rep.rows[i].actual = s.records[rows[i].t].value;
    }

    std::vector<std::vector<double>> columns;
    for (const auto& model : protocol.models) {
        std::vector<double> col(rows.size());
        std::vector<bool> fb(rows.size(), false);
        if (model == "zero") {
            for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rep.rows[i].current;
        } else if (model == "fixed") {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& s = *resp[rows[i].series].series;
                try {
                    const auto fe = fit_fixed_effects(s, ModelForm::power_law, rows[i].t);
                    col[i] = invert(kind, fe.alpha + fe.beta * regressor(ModelForm::power_law, rows[i].t),
                                    rep.rows[i].current);
                } catch (const InsufficientDataError&) {
                    col[i] = rep.rows[i].current;
                    fb[i] = true;
                }
            }
        } else if (model == "ema") {
            double decay;
            if (protocol.ema_decay) {
                decay = *protocol.ema_decay;
            } else {
                decay = tune_ema_ex_post(corpus, protocol, protocol.ema_grid).decay;
            }
            rep.ema_decay = decay;
            col = detail::ema_column(resp, rows, decay, &fb);
        } else {
            const ModelForm form = model == "re_exp" ? ModelForm::exponential : ModelForm::power_law;
            MixedModelSpec spec = protocol.re_spec.value_or(MixedModelSpec::for_kind(kind));
            spec.model_form = form;
            const auto samples = detail::re_samples(resp, protocol, form);
            const MixedModelFit f = fit(samples, spec);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& id = rep.rows[i].series_id;
                const auto it = f.group_effects.find(id);
                const GroupEffect e =
                    (model == "re_mean" || it == f.group_effects.end()) ? f.population_mean() : it->second;
                col[i] = detail::apply_prediction(kind, linear_predictor(e, form, rows[i].t), f.scale,
                                                  protocol.point_mode, rep.rows[i].current);
            }
            rep.fits.emplace(model, f);
        }
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (fb[i]) rep.rows[i].fallback = true;
        columns.push_back(std::move(col));
    }

    rep.errors.assign(columns.size(), std::vector<double>(rows.size()));
    rep.secondary_errors.assign(columns.size(), std::vector<double>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t m = 0; m < columns.size(); ++m) {
            rep.rows[i].predicted.push_back(columns[m][i]);
            const auto [e1, e2] = detail::row_errors(kind, rep.rows[i].current, rep.rows[i].actual, columns[m][i]);
            rep.errors[m][i] = e1;
            rep.secondary_errors[m][i] = e2;
        }
    }
    summarize(rep);
    add_bootstrap_tests(rep, protocol.n_resamples, protocol.seed);
    return rep;
}

struct SweepRow {
    int K = 0;
    std::size_t n_rows = 0;
    std::map<std::string, ModelMetrics> metrics;
    std::optional<double> ema_decay;
};

/// One benchmark per cutoff, same models and options as `base`.
inline std::vector<SweepRow> cutoff_sweep(const Corpus& corpus, const std::vector<int>& Ks, BenchProtocol base) {
    std::vector<SweepRow> out;
    base.leave_last_out = false;
    for (int K : Ks) {
        if (K < 2) throw ConfigError("cutoff_sweep: every K must be >= 2");
        base.cutoff_K = K;
        const auto rep = run_benchmark(corpus, base);
        out.push_back({K, rep.n_rows(), rep.metrics, rep.ema_decay});
    }
    return out;
}

}  // namespace recordlaw
