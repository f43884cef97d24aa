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
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "recordlaw/error.hpp"
#include "recordlaw/optim.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw {

/// Which entries of the random-effect covariance G are pinned instead of estimated.
/// Pinned variances sit at the variance floor; a pinned covariance is zero.
struct CovarianceMask {
    bool fix_var_alpha = false;
    bool fix_var_beta = false;
    bool fix_cov = false;

    friend bool operator==(const CovarianceMask&, const CovarianceMask&) = default;
};

struct MixedModelSpec {
    ModelForm model_form = ModelForm::power_law;
    CovarianceMask mask{};
    double variance_floor = 1e-6;

    /// var(beta) free, covariance pinned.
    static MixedModelSpec speedrun_default(ModelForm form = ModelForm::power_law) {
        return {form, {false, false, true}, 1e-6};
    }
    /// Only var(alpha) free.
    static MixedModelSpec ml_default(ModelForm form = ModelForm::power_law) {
        return {form, {false, true, true}, 1e-6};
    }
    static MixedModelSpec for_kind(SeriesKind kind, ModelForm form = ModelForm::power_law) {
        return kind == SeriesKind::speedrun ? speedrun_default(form) : ml_default(form);
    }

    friend bool operator==(const MixedModelSpec&, const MixedModelSpec&) = default;
};

/// Coefficients (alpha_c, beta_c) of one group.
struct GroupEffect {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Population parameters of the model, enough to evaluate the marginal likelihood.
struct MixedModelParams {
    double mean_alpha = 0.0;
    double mean_beta = 0.0;
    double var_alpha = 0.0;
    double var_beta = 0.0;
    double cov_ab = 0.0;
    double scale = 1.0;  ///< residual variance sigma^2

    Eigen::Vector2d mean() const { return {mean_alpha, mean_beta}; }
    Eigen::Matrix2d G() const {
        Eigen::Matrix2d g;
        g << var_alpha, cov_ab, cov_ab, var_beta;
        return g;
    }
};

struct MixedModelFit {
    MixedModelSpec spec;
    double mean_alpha = 0.0;
    double mean_beta = 0.0;
    double var_alpha = 0.0;
    double var_beta = 0.0;
    double cov_ab = 0.0;
    double scale = 0.0;
    double loglik = -std::numeric_limits<double>::infinity();
    double se_mean_alpha = std::numeric_limits<double>::quiet_NaN();
    double se_mean_beta = std::numeric_limits<double>::quiet_NaN();
    double se_var_alpha = std::numeric_limits<double>::quiet_NaN();
    double se_var_beta = std::numeric_limits<double>::quiet_NaN();
    double se_cov_ab = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, GroupEffect> group_effects;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> theta;  ///< optimizer coordinates at the optimum
    std::size_t n_obs = 0;
    std::size_t n_groups = 0;
    std::size_t min_group_size = 0;
    std::size_t max_group_size = 0;

    MixedModelParams params() const { return {mean_alpha, mean_beta, var_alpha, var_beta, cov_ab, scale}; }
    GroupEffect population_mean() const { return {mean_alpha, mean_beta}; }

    const GroupEffect& effect(const std::string& series_id) const {
        auto it = group_effects.find(series_id);
        if (it == group_effects.end()) throw LookupError("no group effect for series '" + series_id + "'");
        return it->second;
    }
};

namespace detail {

/// Sufficient statistics of one group for the design Z = [1, x].
struct GroupStats {
    std::string id;
    Eigen::Matrix2d ztz = Eigen::Matrix2d::Zero();
    Eigen::Vector2d zty = Eigen::Vector2d::Zero();
    double yty = 0.0;
    std::size_t n = 0;
};

/// Groups in order of first appearance, so relabelling groups never reorders sums.
inline std::vector<GroupStats> collect_groups(std::span<const ImprovementSample> samples) {
    std::vector<GroupStats> groups;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& s : samples) {
        if (!std::isfinite(s.response) || !std::isfinite(s.regressor))
            throw InputError("non-finite response or regressor in series '" + s.series_id + "' at t=" +
                             std::to_string(s.t));
        auto [it, inserted] = index.try_emplace(s.series_id, groups.size());
        if (inserted) groups.push_back(GroupStats{s.series_id});
        GroupStats& g = groups[it->second];
        const Eigen::Vector2d z(1.0, s.regressor);
        g.ztz += z * z.transpose();
        g.zty += z * s.response;
        g.yty += s.response * s.response;
        ++g.n;
    }
    return groups;
}

/// Marginal log-likelihood at natural parameters through 2x2 identities:
/// det(I + Z L Z') = det(I + L Z'Z) and (I + Z L Z')^-1 = I - Z (I + L Z'Z)^-1 L Z', L = G / sigma^2.
/// Returns NaN where the marginal covariance is not positive definite.
inline double marginal_loglik(const std::vector<GroupStats>& groups, const Eigen::Vector2d& mean,
                              const Eigen::Matrix2d& G, double scale) {
    if (!(scale > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::Matrix2d lambda = G / scale;
    double ll = 0.0;
    for (const auto& g : groups) {
        const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() + lambda * g.ztz;
        const double det = M.determinant();
        if (!(det > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const Eigen::Vector2d ztr = g.zty - g.ztz * mean;
        const double rtr = g.yty - 2.0 * mean.dot(g.zty) + mean.dot(g.ztz * mean);
        const double quad = rtr - ztr.dot(M.inverse() * lambda * ztr);
        const double n = static_cast<double>(g.n);
        ll -= 0.5 * (n * std::log(2.0 * std::numbers::pi) + n * std::log(scale) + std::log(det) + quad / scale);
    }
    return ll;
}

}  // namespace detail

/// Log-likelihood of the model with sigma^2 and the fixed effects profiled out, as a
/// function of the free covariance coordinates theta.
///
/// theta parametrises the Cholesky factor of L = G / sigma^2: free diagonal entries are
/// exp(theta), a free off-diagonal entry is theta itself. Pinned variances are held at
/// variance_floor / sigma^2 (solved jointly with the profiled sigma^2 by fixed-point
/// iteration); a pinned covariance is zero. When var(beta) is pinned but the covariance is
/// free, the second row of the factor is sqrt(f) * (tanh theta, sech theta) so that the
/// pinned variance stays exact.
class ProfiledLikelihood {
public:
    struct Point {
        double loglik = -std::numeric_limits<double>::infinity();
        double scale = 0.0;
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        Eigen::Matrix2d lambda = Eigen::Matrix2d::Zero();  ///< G / sigma^2
        Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();    ///< X' W^-1 X with W = V / sigma^2
        bool ok = false;
    };

    ProfiledLikelihood(std::span<const ImprovementSample> samples, const MixedModelSpec& spec)
        : spec_(spec), groups_(detail::collect_groups(samples)) {
        if (!(spec.variance_floor > 0.0)) throw ConfigError("variance_floor must be positive");
        for (const auto& g : groups_) n_obs_ += g.n;
        // Pooled least squares: starting point and scale guess for the floor fixed point.
        Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
        Eigen::Vector2d b = Eigen::Vector2d::Zero();
        double c = 0.0;
        for (const auto& g : groups_) {
            A += g.ztz;
            b += g.zty;
            c += g.yty;
        }
        pooled_ok_ = n_obs_ > 0 && std::abs(A.determinant()) > 1e-12 * std::max(1.0, A.squaredNorm());
        if (pooled_ok_) {
            pooled_mean_ = A.ldlt().solve(b);
            const double rss = c - pooled_mean_.dot(b);
            const double dof = n_obs_ > 2 ? static_cast<double>(n_obs_ - 2) : 1.0;
            pooled_scale_ = std::max(rss / dof, 1e-12);
        }
    }

    const MixedModelSpec& spec() const noexcept { return spec_; }
    const std::vector<detail::GroupStats>& groups() const noexcept { return groups_; }
    std::size_t n_obs() const noexcept { return n_obs_; }
    bool pooled_ok() const noexcept { return pooled_ok_; }
    const Eigen::Vector2d& pooled_mean() const noexcept { return pooled_mean_; }
    double pooled_scale() const noexcept { return pooled_scale_; }

    int dimension() const noexcept {
        const auto& m = spec_.mask;
        return int(!m.fix_var_alpha) + int(!m.fix_cov) + int(!m.fix_var_beta);
    }

    /// Coordinates of L = lambda0 * I (the documented starting point uses lambda0 = 0.1).
    Eigen::VectorXd start(double lambda0 = 0.1) const {
        Eigen::VectorXd th(dimension());
        int k = 0;
        const auto& m = spec_.mask;
        if (!m.fix_var_alpha) th[k++] = 0.5 * std::log(lambda0);
        if (!m.fix_cov) th[k++] = 0.0;
        if (!m.fix_var_beta) th[k++] = 0.5 * std::log(lambda0);
        return th;
    }

    /// Cholesky factor of L for coordinates theta and pinned relative variance f.
    Eigen::Matrix2d factor(const Eigen::VectorXd& th, double f) const {
        const auto& m = spec_.mask;
        int k = 0;
        const double l11 = m.fix_var_alpha ? std::sqrt(f) : std::exp(th[k++]);
        double l21 = 0.0, l22 = 0.0;
        if (m.fix_cov) {
            l22 = m.fix_var_beta ? std::sqrt(f) : std::exp(th[k++]);
        } else if (m.fix_var_beta) {
            const double c = th[k++];
            l21 = std::sqrt(f) * std::tanh(c);
            l22 = std::sqrt(f) / std::cosh(c);
        } else {
            l21 = th[k++];
            l22 = std::exp(th[k++]);
        }
        Eigen::Matrix2d L;
        L << l11, 0.0, l21, l22;
        return L;
    }

    Point evaluate(const Eigen::VectorXd& th) const {
        const bool pinned_variance = spec_.mask.fix_var_alpha || spec_.mask.fix_var_beta;
        double scale_guess = pooled_ok_ ? pooled_scale_ : 1.0;
        Point p;
        for (int iter = 0; iter < 60; ++iter) {
            p = evaluate_at(th, spec_.variance_floor / scale_guess);
            if (!p.ok || !pinned_variance) break;
            if (std::abs(p.scale - scale_guess) <= 1e-15 * p.scale) break;
            scale_guess = p.scale;
        }
        return p;
    }

    double operator()(const Eigen::VectorXd& th) const { return evaluate(th).loglik; }

private:
    Point evaluate_at(const Eigen::VectorXd& th, double f) const {
        Point p;
        const Eigen::Matrix2d L = factor(th, f);
        if (!L.allFinite()) return p;
        Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
        Eigen::Vector2d xtwy = Eigen::Vector2d::Zero();
        double ytwy = 0.0;
        double logdet = 0.0;
        for (const auto& g : groups_) {
            const Eigen::Matrix2d AL = g.ztz * L;
            const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() + L.transpose() * AL;
            const Eigen::Matrix2d Minv = M.inverse();
            const Eigen::Vector2d Ltb = L.transpose() * g.zty;
            xtwx += g.ztz - AL * Minv * AL.transpose();
            xtwy += g.zty - AL * (Minv * Ltb);
            ytwy += g.yty - Ltb.dot(Minv * Ltb);
            logdet += std::log(M.determinant());
        }
        const double det = xtwx.determinant();
        if (!(det > 1e-12 * std::max(1.0, xtwx.squaredNorm()))) return p;
        p.mean = xtwx.ldlt().solve(xtwy);
        const double q = ytwy - p.mean.dot(xtwy);
        const double N = static_cast<double>(n_obs_);
        if (!(q > 0.0) || !std::isfinite(logdet)) return p;
        p.scale = q / N;
        p.loglik = -0.5 * N * (std::log(2.0 * std::numbers::pi) + std::log(p.scale) + 1.0) - 0.5 * logdet;
        p.lambda = L * L.transpose();
        p.xtwx = xtwx;
        p.ok = std::isfinite(p.loglik);
        return p;
    }

    MixedModelSpec spec_;
    std::vector<detail::GroupStats> groups_;
    std::size_t n_obs_ = 0;
    bool pooled_ok_ = false;
    Eigen::Vector2d pooled_mean_ = Eigen::Vector2d::Zero();
    double pooled_scale_ = 1.0;
};

/// Posterior mean of (alpha_c, beta_c) for one group's rows under the fitted model:
/// mu + (I + L A)^-1 L (Z'y - A mu), with A = Z'Z and L = G / sigma^2.
/// With no rows this is the population mean.
inline GroupEffect conditional_mode(const MixedModelParams& p, std::span<const ImprovementSample> rows) {
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    for (const auto& s : rows) {
        const Eigen::Vector2d z(1.0, s.regressor);
        A += z * z.transpose();
        b += z * s.response;
    }
    const Eigen::Vector2d mu = p.mean();
    if (!(p.scale > 0.0)) throw DomainError("conditional_mode: scale must be positive");
    const Eigen::Matrix2d lambda = p.G() / p.scale;
    const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() + lambda * A;
    const Eigen::Vector2d mode = mu + M.partialPivLu().solve(lambda * (b - A * mu));
    return {mode[0], mode[1]};
}

/// Conditional modes of every group present in `samples`.
inline std::map<std::string, GroupEffect> conditional_modes(const MixedModelFit& fit,
                                                            std::span<const ImprovementSample> samples) {
    std::map<std::string, std::vector<ImprovementSample>> by_group;
    for (const auto& s : samples) by_group[s.series_id].push_back(s);
    std::map<std::string, GroupEffect> out;
    for (const auto& [id, rows] : by_group) out.emplace(id, conditional_mode(fit.params(), rows));
    return out;
}

/// Exact marginal log-likelihood by dense per-group Gaussian densities
/// y_c ~ N(X_c mu, Z_c G Z_c' + sigma^2 I). Independent of the 2x2 identities used by `fit`.
inline double loglik_oracle(std::span<const ImprovementSample> samples, const MixedModelParams& p) {
    const Eigen::Matrix2d G = p.G();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(G);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, G.norm()))
        throw DomainError("loglik_oracle: G is not positive semidefinite");
    if (!(p.scale > 0.0)) throw DomainError("loglik_oracle: scale must be positive");

    std::vector<std::string> order;
    std::map<std::string, std::vector<const ImprovementSample*>> rows;
    for (const auto& s : samples) {
        auto& v = rows[s.series_id];
        if (v.empty()) order.push_back(s.series_id);
        v.push_back(&s);
    }
    double ll = 0.0;
    for (const auto& id : order) {
        const auto& r = rows[id];
        const Eigen::Index n = static_cast<Eigen::Index>(r.size());
        Eigen::MatrixXd Z(n, 2);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Z(i, 0) = 1.0;
            Z(i, 1) = r[i]->regressor;
            y[i] = r[i]->response;
        }
        const Eigen::MatrixXd V = Z * G * Z.transpose() + p.scale * Eigen::MatrixXd::Identity(n, n);
        const Eigen::LLT<Eigen::MatrixXd> llt(V);
        if (llt.info() != Eigen::Success) throw DomainError("loglik_oracle: marginal covariance not positive definite");
        const Eigen::VectorXd resid = y - Z * p.mean();
        const Eigen::VectorXd w = llt.matrixL().solve(resid);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        ll -= 0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + logdet + w.squaredNorm());
    }
    return ll;
}

struct FitOptions {
    BfgsOptions optimizer{};
    /// Initial L = G / sigma^2 on the diagonal.
    double start_lambda = 0.1;
    bool standard_errors = true;
};

namespace detail {

/// Observed-information standard errors from a finite-difference Hessian of the full
/// log-likelihood in (mu, free G entries, sigma^2). Falls back to sigma^2 (X'W^-1X)^-1 for
/// the fixed effects when the information matrix is not positive definite.
inline void fill_standard_errors(MixedModelFit& fit, const ProfiledLikelihood& prof,
                                 const Eigen::Matrix2d& xtwx) {
    const auto& m = fit.spec.mask;
    std::vector<int> which;  // 0 var_a, 1 cov, 2 var_b
    if (!m.fix_var_alpha) which.push_back(0);
    if (!m.fix_cov) which.push_back(1);
    if (!m.fix_var_beta) which.push_back(2);
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(which.size());
    Eigen::VectorXd x(n);
    x[0] = fit.mean_alpha;
    x[1] = fit.mean_beta;
    const double nat[3] = {fit.var_alpha, fit.cov_ab, fit.var_beta};
    for (std::size_t k = 0; k < which.size(); ++k) x[2 + k] = nat[which[k]];
    x[n - 1] = fit.scale;

    auto ll = [&](const Eigen::VectorXd& v) {
        double e[3] = {fit.var_alpha, fit.cov_ab, fit.var_beta};
        for (std::size_t k = 0; k < which.size(); ++k) e[which[k]] = v[2 + k];
        Eigen::Matrix2d G;
        G << e[0], e[1], e[1], e[2];
        return marginal_loglik(prof.groups(), Eigen::Vector2d(v[0], v[1]), G, v[n - 1]);
    };
    const Eigen::MatrixXd info = -numerical_hessian(ll, x, 1e-4);
    const Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (info.allFinite() && llt.info() == Eigen::Success) {
        const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
        fit.se_mean_alpha = std::sqrt(cov(0, 0));
        fit.se_mean_beta = std::sqrt(cov(1, 1));
        double* se[3] = {&fit.se_var_alpha, &fit.se_cov_ab, &fit.se_var_beta};
        for (std::size_t k = 0; k < which.size(); ++k) *se[which[k]] = std::sqrt(cov(2 + k, 2 + k));
        if (std::isfinite(fit.se_mean_alpha) && std::isfinite(fit.se_mean_beta)) return;
    }
    const Eigen::Matrix2d cov = fit.scale * xtwx.inverse();
    fit.se_mean_alpha = std::sqrt(cov(0, 0));
    fit.se_mean_beta = std::sqrt(cov(1, 1));
}

}  // namespace detail

/// Maximum-likelihood fit of y = alpha_c + beta_c * x + eps with (alpha_c, beta_c) ~ N(mu, G)
/// and eps ~ N(0, sigma^2). Deterministic: fixed starting point, no randomness.
inline MixedModelFit fit(std::span<const ImprovementSample> samples, const MixedModelSpec& spec,
                         const FitOptions& options = {}) {
    if (samples.empty()) throw InputError("fit: no samples");
    ProfiledLikelihood prof(samples, spec);
    const auto& groups = prof.groups();
    if (groups.size() < 2) throw InputError("fit: need at least 2 groups, got " + std::to_string(groups.size()));
    const std::size_t n_free = 2 + static_cast<std::size_t>(prof.dimension()) + 1;
    if (prof.n_obs() <= n_free)
        throw InputError("fit: " + std::to_string(prof.n_obs()) + " samples for " + std::to_string(n_free) +
                         " free parameters");

    auto objective = [&](const Eigen::VectorXd& th) { return -prof(th); };
    Eigen::VectorXd start = prof.start(options.start_lambda);
    if (!prof.evaluate(start).ok) {
        // Rank-deficient pooled design can still be identified once the random effects
        // carry some of the variance; try a wider prior before giving up.
        start = prof.start(1.0);
        if (!prof.evaluate(start).ok)
            throw EstimationError("fit: singular design, the fixed effects are not identified");
    }
    const BfgsResult opt = bfgs_minimize(objective, start, options.optimizer);
    const auto best = prof.evaluate(opt.x);
    if (!best.ok) throw EstimationError("fit: likelihood evaluation failed at the optimum");

    MixedModelFit out;
    out.spec = spec;
    out.mean_alpha = best.mean[0];
    out.mean_beta = best.mean[1];
    const Eigen::Matrix2d G = best.scale * best.lambda;
    out.var_alpha = G(0, 0);
    out.var_beta = G(1, 1);
    out.cov_ab = spec.mask.fix_cov ? 0.0 : G(1, 0);
    out.scale = best.scale;
    out.loglik = best.loglik;
    out.converged = opt.converged;
    out.iterations = opt.iterations;
    out.gradient_norm = opt.gradient.size() ? opt.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    out.theta.assign(opt.x.data(), opt.x.data() + opt.x.size());
    out.n_obs = prof.n_obs();
    out.n_groups = groups.size();
    out.min_group_size = groups.front().n;
    out.max_group_size = groups.front().n;
    for (const auto& g : groups) {
        out.min_group_size = std::min(out.min_group_size, g.n);
        out.max_group_size = std::max(out.max_group_size, g.n);
    }
    out.group_effects = conditional_modes(out, samples);
    if (options.standard_errors) detail::fill_standard_errors(out, prof, best.xtwx);
    return out;
}

enum class ForecastSpace { transformed, relative_improvement, raw_value };
enum class PointMode { median, mean };

inline std::string_view to_string(ForecastSpace s) {
    switch (s) {
        case ForecastSpace::transformed: return "transformed";
        case ForecastSpace::relative_improvement: return "relative_improvement";
        default: return "raw_value";
    }
}

/// Predictive distribution of the next improvement in one space.
struct ForecastDistribution {
    double median = 0.0;
    double mean = 0.0;
    double point = 0.0;  ///< median or mean, per the requested mode
    std::map<double, double> quantiles;
    ForecastSpace space = ForecastSpace::transformed;
};

struct PredictOptions {
    PointMode mode = PointMode::median;
    ForecastSpace space = ForecastSpace::transformed;
    SeriesKind kind = SeriesKind::speedrun;
    /// Current record; needed for raw values and for ML relative improvements.
    std::optional<double> r_t;
    std::vector<double> probabilities{0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975};
    /// Use the population means instead of the group's conditional mode.
    bool population_mean = false;
};

/// Pushes N(eta, sigma^2) in response space through the (monotone) map into `opts.space`.
/// The mean corrects the log-improvement exp(y) for lognormality before inversion.
inline ForecastDistribution forecast_from_predictor(double eta, double sigma, const PredictOptions& opts) {
    const bool needs_rt = opts.space == ForecastSpace::raw_value ||
                          (opts.space == ForecastSpace::relative_improvement && opts.kind == SeriesKind::ml_benchmark);
    if (needs_rt && !opts.r_t) throw InputError("forecast: current record r_t required for this space");
    auto map = [&](double y) {
        switch (opts.space) {
            case ForecastSpace::transformed: return y;
            case ForecastSpace::relative_improvement: return relative_improvement(opts.kind, y, opts.r_t.value_or(0.5));
            default: return invert(opts.kind, y, *opts.r_t);
        }
    };
    const bool decreasing = opts.space == ForecastSpace::raw_value;
    ForecastDistribution d;
    d.space = opts.space;
    d.median = map(eta);
    d.mean = opts.space == ForecastSpace::transformed ? eta : map(eta + 0.5 * sigma * sigma);
    d.point = opts.mode == PointMode::median ? d.median : d.mean;
    const boost::math::normal_distribution<double> z01;
    for (double p : opts.probabilities) {
        if (!(p > 0.0 && p < 1.0)) throw InputError("forecast: quantile probabilities must lie in (0, 1)");
        const double z = boost::math::quantile(z01, decreasing ? 1.0 - p : p);
        d.quantiles[p] = map(eta + z * sigma);
    }
    return d;
}

/// Linear predictor a_c + b_c g(t) for a group.
inline double linear_predictor(const GroupEffect& e, ModelForm form, int t) {
    return e.alpha + e.beta * regressor(form, t);
}

/// Distribution of the improvement from record t to t+1 of `series_id`.
inline ForecastDistribution predict_improvement(const MixedModelFit& fit, const std::string& series_id, int t,
                                                const PredictOptions& opts = {}) {
    if (t < 1) throw InputError("predict_improvement: t must be >= 1");
    const GroupEffect e = opts.population_mean ? fit.population_mean() : fit.effect(series_id);
    return forecast_from_predictor(linear_predictor(e, fit.spec.model_form, t), std::sqrt(fit.scale), opts);
}

}  // namespace recordlaw
