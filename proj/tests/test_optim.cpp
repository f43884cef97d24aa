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

#include "recordlaw/optim.hpp"

using namespace recordlaw;

TEST(Bfgs, Quadratic) {
    Eigen::Matrix3d A;
    A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
    const Eigen::Vector3d b(1, -2, 0.5);
    auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x) - b.dot(x); };
    const auto r = bfgs_minimize(f, Eigen::VectorXd::Zero(3));
    EXPECT_TRUE(r.converged);
    const Eigen::Vector3d xs = A.ldlt().solve(b);
    EXPECT_LT((r.x - xs).norm(), 1e-5);
}

TEST(Bfgs, Rosenbrock) {
    auto f = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    BfgsOptions opt;
    opt.max_iterations = 2000;
    opt.relative_tolerance = 1e-14;
    const auto r = bfgs_minimize(f, Eigen::Vector2d(-1.2, 1.0), opt);
    EXPECT_NEAR(r.x[0], 1.0, 1e-3);
    EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(Bfgs, ZeroDimensional) {
    auto f = [](const Eigen::VectorXd&) { return 3.0; };
    const auto r = bfgs_minimize(f, Eigen::VectorXd(0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.value, 3.0);
}

TEST(Derivatives, NumericalGradientAndHessian) {
    auto f = [](const Eigen::VectorXd& x) { return std::exp(x[0]) + x[0] * x[1] * x[1]; };
    const Eigen::Vector2d x(0.3, -0.7);
    const auto g = numerical_gradient(f, x);
    EXPECT_NEAR(g[0], std::exp(0.3) + 0.49, 1e-8);
    EXPECT_NEAR(g[1], 2 * 0.3 * -0.7, 1e-8);
    const auto H = numerical_hessian(f, x);
    EXPECT_NEAR(H(0, 0), std::exp(0.3), 1e-5);
    EXPECT_NEAR(H(0, 1), -1.4, 1e-5);
    EXPECT_NEAR(H(1, 0), -1.4, 1e-5);
    EXPECT_NEAR(H(1, 1), 0.6, 1e-5);
}
