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
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace recordlaw {

struct BfgsOptions {
    int max_iterations = 500;
    /// Stop when the relative change of the objective over one iteration drops below this
    /// and the gradient is already small (loose_gradient_tolerance).
    double relative_tolerance = 1e-8;
    double gradient_tolerance = 1e-7;
    double loose_gradient_tolerance = 1e-5;
    double fd_step = 1e-5;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Central-difference gradient with step h * max(1, |x_i|).
template <class F>
Eigen::VectorXd numerical_gradient(F&& f, const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + step;
        const double fp = f(xp);
        xp[i] = x[i] - step;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

/// Central-difference Hessian (symmetrised).
template <class F>
Eigen::MatrixXd numerical_hessian(F&& f, const Eigen::VectorXd& x, double h = 1e-4) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd steps(n);
    for (Eigen::Index i = 0; i < n; ++i) steps[i] = h * std::max(1.0, std::abs(x[i]));
    const double f0 = f(x);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        xp[i] = x[i] + steps[i];
        const double fp = f(xp);
        xp[i] = x[i] - steps[i];
        const double fm = f(xp);
        xp[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            auto at = [&](double si, double sj) {
                xp[i] = x[i] + si * steps[i];
                xp[j] = x[j] + sj * steps[j];
                const double v = f(xp);
                xp[i] = x[i];
                xp[j] = x[j];
                return v;
            };
            H(i, j) = H(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * steps[i] * steps[j]);
        }
    }
    return H;
}

/// Quasi-Newton minimisation with finite-difference gradients and an Armijo backtracking
/// line search. Non-finite objective values are treated as +inf. Dimension zero returns
/// the objective at the (empty) starting point.
template <class F>
BfgsResult bfgs_minimize(F&& f, Eigen::VectorXd x0, const BfgsOptions& opt = {}) {
    const Eigen::Index n = x0.size();
    int evals = 0;
    auto value = [&](const Eigen::VectorXd& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    BfgsResult res;
    res.x = std::move(x0);
    res.value = value(res.x);
    if (n == 0) {
        res.gradient = Eigen::VectorXd(0);
        res.converged = std::isfinite(res.value);
        res.evaluations = evals;
        return res;
    }
    if (!std::isfinite(res.value)) {
        res.gradient = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
        res.evaluations = evals;
        return res;
    }

    Eigen::VectorXd g = numerical_gradient(value, res.x, opt.fd_step);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    constexpr double c1 = 1e-4;

    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it;
        if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd p = -H * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            H.setIdentity();
            p = -g;
            slope = g.dot(p);
        }

        double step = 1.0;
        double f_new = res.value;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = res.x + step * p;
            f_new = value(x_new);
            if (f_new <= res.value + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!H.isIdentity()) {
                H.setIdentity();
                continue;
            }
            // Line search cannot make progress along the steepest-descent direction: we sit on
            // the optimum to within finite-difference resolution.
            res.converged = g.lpNorm<Eigen::Infinity>() < opt.loose_gradient_tolerance;
            break;
        }

        Eigen::VectorXd g_new = numerical_gradient(value, x_new, opt.fd_step);
        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - g;
        const double f_old = res.value;
        res.x = x_new;
        res.value = f_new;
        g = g_new;

        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            if (!scaled) {
                H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }

        const double rel = std::abs(f_old - f_new) / std::max(1.0, std::abs(f_new));
        if (rel < opt.relative_tolerance && g.lpNorm<Eigen::Infinity>() < opt.loose_gradient_tolerance) {
            res.converged = true;
            res.iterations = it + 1;
            break;
        }
        res.iterations = it + 1;
    }
    res.gradient = g;
    res.evaluations = evals;
    return res;
}

}  // namespace recordlaw
