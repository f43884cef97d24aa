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
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recordlaw/error.hpp"
#include "recordlaw/mixed_model.hpp"
#include "recordlaw/rng.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw::theory {

/// Deterministic power-law decay d log R / dt = -A t^beta with A = exp(alpha), R(1) = r1.
struct PowerLawParams {
    double alpha = 0.0;
    double beta = -1.0;
    double r1 = 1.0;
};

struct AsymptoticLimit {
    /// True when records decrease without bound towards zero (beta >= -1).
    bool converges_to_zero = false;
    /// lim R_T; zero when converges_to_zero.
    double limit = 0.0;
    /// beta == -1: log R_T = log R_1 - A log T, with A in `log_rate`.
    bool logarithmic = false;
    double log_rate = 0.0;
};

inline AsymptoticLimit asymptotic_limit(const PowerLawParams& p) {
    if (!(p.r1 > 0.0)) throw DomainError("asymptotic_limit: r1 must be positive");
    const double A = std::exp(p.alpha);
    AsymptoticLimit out;
    if (p.beta < -1.0) {
        out.limit = p.r1 * std::exp(A / (p.beta + 1.0));
        return out;
    }
    out.converges_to_zero = true;
    if (p.beta == -1.0) {
        out.logarithmic = true;
        out.log_rate = A;
    }
    return out;
}

/// log R_T = log R_1 - A (T^{beta+1} - 1) / (beta + 1), continuous T >= 1; the beta = -1
/// case is the limit A log T (expm1 keeps the neighbourhood of -1 accurate).
inline double log_record_at(const PowerLawParams& p, double T) {
    if (!(T >= 1.0)) throw DomainError("log_record_at: T must be >= 1");
    const double A = std::exp(p.alpha);
    const double b1 = p.beta + 1.0;
    const double logT = std::log(T);
    const double drop = b1 == 0.0 ? A * logT : A * std::expm1(b1 * logT) / b1;
    return std::log(p.r1) - drop;
}

/// log R_t for t = 1 .. T.
inline std::vector<double> record_trajectory(const PowerLawParams& p, int T) {
    if (T < 1) throw DomainError("record_trajectory: T must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) out[t - 1] = log_record_at(p, t);
    out[0] = std::log(p.r1);
    return out;
}

/// Attempt index and value of one record in an iterative sampling run.
struct RecordEvent {
    std::uint64_t attempt = 0;
    double value = 0.0;
};

/// Iterative minimum sampling: X_k = Q(U_k) and a record is logged whenever X_k beats every
/// earlier attempt. `quantile_fn` must be increasing. `uniform` returns draws in (0, 1).
template <class Quantile, class Uniform>
std::vector<RecordEvent> run_sampling_process(Quantile&& quantile_fn, std::uint64_t n_attempts, Uniform&& uniform) {
    if (n_attempts < 1) throw InputError("run_sampling_process: n_attempts must be >= 1");
    std::vector<RecordEvent> log;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 1; k <= n_attempts; ++k) {
        const double x = quantile_fn(uniform());
        if (x < best) {
            best = x;
            log.push_back({k, x});
        }
    }
    return log;
}

/// A sampling process bound to a quantile function and a seed.
template <class Quantile>
struct SamplingProcess {
    Quantile quantile_fn;
    std::uint64_t seed = 0;
    std::vector<RecordEvent> record_log;

    const std::vector<RecordEvent>& run(std::uint64_t n_attempts) {
        SplitMix64 rng(seed);
        record_log = run_sampling_process(quantile_fn, n_attempts, [&] { return uniform_open01(rng); });
        return record_log;
    }
};

inline double harmonic_number(std::uint64_t n) {
    double h = 0.0;
    for (std::uint64_t k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
    return h;
}

/// Samples the waiting time N_{i+1} - N_i given N_i = n by inverting P(K >= k) = n / (n + k - 1),
/// the survival function of the pmf n / ((n + k)(n + k - 1)).
template <class Rng>
double sample_record_gap(double n, Rng& rng) {
    const double u = uniform_open01(rng);
    return std::floor(n * (1.0 / u - 1.0)) + 1.0;
}

/// E[log(N_{i+1}/N_i) | N_i = n] by direct summation of the exact pmf. Terms beyond the
/// summation cutoff M are replaced by the integral of n log(1 + x/n) / (n + x)^2 from M + 1/2,
/// which is (log(1 + a) + 1) / (1 + a) with a = (M + 1/2) / n.
inline double expected_log_increment(double n, std::uint64_t max_terms = 100'000'000) {
    if (!(n >= 1.0)) throw DomainError("expected_log_increment: n must be >= 1");
    const auto M = static_cast<std::uint64_t>(std::min<double>(static_cast<double>(max_terms), std::max(1e6, 20.0 * n)));
    double sum = 0.0, comp = 0.0;  // Kahan
    for (std::uint64_t k = 1; k <= M; ++k) {
        const double kk = static_cast<double>(k);
        const double term = std::log1p(kk / n) * n / ((n + kk) * (n + kk - 1.0));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const double a = (static_cast<double>(M) + 0.5) / n;
    return sum + (std::log1p(a) + 1.0) / (1.0 + a);
}

/// Monte-Carlo summary of record times N_1 = 1 < N_2 < ... over an ensemble of runs.
struct RecordTimeGrowth {
    std::vector<double> mean_log_n;         ///< E[log N_i], i = 1 .. i_max (index i-1)
    std::vector<double> se_mean_log_n;
    std::vector<double> var_log_n;
    std::vector<double> growth;             ///< E[log N_i] / i
    std::vector<double> se_growth;
    Eigen::MatrixXd increment_cov;          ///< cov(log(N_{h+1}/N_h), log(N_{j+1}/N_j)), h,j = 1 .. i_max-1
    std::size_t n_runs = 0;
    std::size_t n_censored = 0;             ///< runs that crossed `attempt_cap` before i_max
};

/// Fast-forward simulation: each gap is drawn from its exact conditional law, so runs cost
/// O(i_max) regardless of how far apart records are. Runs whose record time exceeds
/// `attempt_cap` are censored and left out of the estimates.
inline RecordTimeGrowth record_time_growth(std::size_t ensemble_size, int i_max, std::uint64_t seed,
                                           double attempt_cap = std::numeric_limits<double>::infinity()) {
    if (ensemble_size < 100) throw InputError("record_time_growth: ensemble size must be >= 100");
    if (i_max < 1) throw InputError("record_time_growth: i_max must be >= 1");
    const auto I = static_cast<Eigen::Index>(i_max);
    std::vector<Eigen::VectorXd> logs;
    logs.reserve(ensemble_size);
    RecordTimeGrowth out;
    for (std::size_t r = 0; r < ensemble_size; ++r) {
        SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
        Eigen::VectorXd ln(I);
        double n = 1.0;
        ln[0] = 0.0;
        bool censored = false;
        for (Eigen::Index i = 1; i < I; ++i) {
            n += sample_record_gap(n, rng);
            if (n > attempt_cap) {
                censored = true;
                break;
            }
            ln[i] = std::log(n);
        }
        if (censored) {
            ++out.n_censored;
            continue;
        }
        logs.push_back(std::move(ln));
    }
    const auto R = static_cast<Eigen::Index>(logs.size());
    out.n_runs = logs.size();
    if (R < 2) throw InsufficientDataError("record_time_growth: fewer than 2 uncensored runs");
    Eigen::MatrixXd X(R, I);
    for (Eigen::Index r = 0; r < R; ++r) X.row(r) = logs[r].transpose();
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;
    const Eigen::RowVectorXd var = centered.colwise().squaredNorm() / static_cast<double>(R - 1);
    for (Eigen::Index i = 0; i < I; ++i) {
        const double se = std::sqrt(var[i] / static_cast<double>(R));
        out.mean_log_n.push_back(mean[i]);
        out.se_mean_log_n.push_back(se);
        out.var_log_n.push_back(var[i]);
        out.growth.push_back(mean[i] / static_cast<double>(i + 1));
        out.se_growth.push_back(se / static_cast<double>(i + 1));
    }
    if (I >= 2) {
        Eigen::MatrixXd inc(R, I - 1);
        for (Eigen::Index i = 0; i + 1 < I; ++i) inc.col(i) = X.col(i + 1) - X.col(i);
        const Eigen::MatrixXd c = inc.rowwise() - inc.colwise().mean();
        out.increment_cov = (c.transpose() * c) / static_cast<double>(R - 1);
    }
    return out;
}

/// log Q(p) - log Q(e^-1) for the quantile function implied by the power-law decay model:
/// -A ((-log p)^{beta+1} - 1) / (beta + 1), and -A log(-log p) at beta = -1.
inline double derived_log_quantile(double p, double alpha, double beta) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("derived_log_quantile: p must lie in (0, 1)");
    const double A = std::exp(alpha);
    const double s = std::log(-std::log(p));
    const double b1 = beta + 1.0;
    return b1 == 0.0 ? -A * s : -A * std::expm1(b1 * s) / b1;
}

/// Relative error of Q(e^{-t}) / Q(e^{-t-1}) against exp(A t^beta).
inline double quantile_ratio_error(double alpha, double beta, double t) {
    const double log_ratio = derived_log_quantile(std::exp(-t), alpha, beta) -
                             derived_log_quantile(std::exp(-t - 1.0), alpha, beta);
    return std::abs(std::expm1(log_ratio - std::exp(alpha) * std::pow(t, beta)));
}

/// Record values of iterative sampling where log-records follow a scaled Gumbel law:
/// log X = log_scale + A * G with G standard Gumbel (maximum). Records are simulated
/// directly: the uniform level of record t+1 is U * (level of record t), so the exponential
/// waiting times never have to be sampled. Returns R_1 .. R_n.
template <class Rng>
std::vector<double> gumbel_record_values(double alpha, int n_records, Rng& rng, double log_scale = std::log(1000.0)) {
    std::exponential_distribution<double> exp1(1.0);
    const double A = std::exp(alpha);
    std::vector<double> out;
    double E = 0.0;  // -log of the uniform level
    for (int t = 0; t < n_records; ++t) {
        E += exp1(rng);
        out.push_back(std::exp(log_scale - A * std::log(E)));
    }
    return out;
}

struct GumbelCheck {
    double fitted_beta = std::numeric_limits<double>::quiet_NaN();
    double fitted_alpha = std::numeric_limits<double>::quiet_NaN();
    double se_beta = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    std::string reason;
};

/// Simulates `n_series` Gumbel record sequences, reduces them to frontiers, fits the
/// power-law random-effects model and reports E[beta]. When the records collapse (no
/// resolvable improvement, e.g. alpha -> -inf) the result is flagged instead of thrown.
inline GumbelCheck gumbel_consistency_check(double alpha, int n_series, int series_length, std::uint64_t seed) {
    if (series_length < 30) throw InputError("gumbel_consistency_check: series_length must be >= 30");
    if (n_series < 2) throw InputError("gumbel_consistency_check: need at least 2 series");
    GumbelCheck out;
    std::vector<ImprovementSample> samples;
    for (int c = 0; c < n_series; ++c) {
        SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
        const auto values = gumbel_record_values(alpha, series_length, rng);
        std::vector<Record> attempts;
        for (std::size_t i = 0; i < values.size(); ++i) attempts.push_back({static_cast<UtcSeconds>(i), values[i]});
        RecordSeries s{"gumbel-" + std::to_string(c), SeriesKind::speedrun, "", record_frontier(attempts, SeriesKind::speedrun)};
        if (s.size() < values.size()) {
            out.degenerate = true;
            out.reason = "records not strictly improving in floating point";
            return out;
        }
        try {
            auto rows = build_design(s, ModelForm::power_law);
            samples.insert(samples.end(), rows.begin(), rows.end());
        } catch (const DomainError& e) {
            out.degenerate = true;
            out.reason = e.what();
            return out;
        }
    }
    try {
        const auto f = fit(samples, MixedModelSpec::speedrun_default());
        out.fitted_beta = f.mean_beta;
        out.fitted_alpha = f.mean_alpha;
        out.se_beta = f.se_mean_beta;
    } catch (const Error& e) {
        out.degenerate = true;
        out.reason = e.what();
    }
    return out;
}

}  // namespace recordlaw::theory
