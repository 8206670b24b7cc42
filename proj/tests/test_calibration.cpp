/*
 * Copyright (c) 2026, The SGPC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "sgpc/calibration.hpp"

namespace {

using sgpc::Graph;
using sgpc::Labels;
using sgpc::Matrix;
using sgpc::Vector;

double kl_by_quadrature(double a1, double b1, double a2, double b2)
{
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double lb1 = std::log(boost::math::beta(a1, b1));
    const double lb2 = std::log(boost::math::beta(a2, b2));
    auto f = [&](double x) {
        if (x <= 0.0 || x >= 1.0) {
            return 0.0;
        }
        const double lp = (a1 - 1) * std::log(x) + (b1 - 1) * std::log1p(-x) - lb1;
        const double lq = (a2 - 1) * std::log(x) + (b2 - 1) * std::log1p(-x) - lb2;
        return std::exp(lp) * (lp - lq);
    };
    return integrator.integrate(f, 0.0, 1.0);
}

Matrix one_hot(int n, int C, const std::vector<int>& cls)
{
    Matrix P = Matrix::Zero(n, C);
    for (int i = 0; i < n; ++i) {
        P(i, cls[static_cast<std::size_t>(i)]) = 1.0;
    }
    return P;
}

} // namespace

TEST(Prior, MomentsAndSize)
{
    auto p = sgpc::init_prior(7, 1.0, 1.0);
    ASSERT_EQ(p.size(), 7u);
    EXPECT_DOUBLE_EQ(p[0].mean(), 0.5);
    EXPECT_NEAR(sgpc::beta_variance(1.0, 1.0), 1.0 / 12.0, 1e-15);
    EXPECT_NEAR(sgpc::init_prior(1, 2.0, 1.0)[0].mean(), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(sgpc::init_prior(1, 0.5, 1.0), sgpc::InvalidInput);
}

TEST(Posterior, PerfectAgreementIncreasesMean)
{
    Graph g = Graph::from_edges(2, {{0, 1}});
    Labels lab{{0, 0}, 2};
    auto start = sgpc::PosteriorState::from_prior(sgpc::init_prior(1, 1, 1));
    sgpc::CalibrationConfig cfg;
    auto post = sgpc::posterior_update(start, one_hot(2, 2, {0, 0}), g, lab, {}, 1.0, cfg);
    EXPECT_DOUBLE_EQ(post.edge[0].alpha, 2.0);
    EXPECT_DOUBLE_EQ(post.edge[0].beta, 1.0);
    EXPECT_GT(post.kappa(0), 0.5);
    EXPECT_DOUBLE_EQ(post.n_tot[0], 1.0);
    EXPECT_TRUE(post.converged);
}

TEST(Posterior, DisjointPredictionsDecreaseMean)
{
    Graph g = Graph::from_edges(2, {{0, 1}});
    Labels lab{{0, 1}, 2};
    auto start = sgpc::PosteriorState::from_prior(sgpc::init_prior(1, 1, 1));
    auto post = sgpc::posterior_update(start, one_hot(2, 2, {0, 1}), g, lab, {0, 1}, 2.0, {});
    EXPECT_DOUBLE_EQ(post.edge[0].alpha, 1.0);
    EXPECT_DOUBLE_EQ(post.edge[0].beta, 3.0);
    EXPECT_LT(post.kappa(0), 0.5);
}

TEST(Posterior, UniformPredictionsGiveFractionalPseudoCount)
{
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    Labels lab{{0, 1, 2, }, 4};
    const int C = 4;
    Matrix P = Matrix::Constant(3, C, 1.0 / C);
    auto start = sgpc::PosteriorState::from_prior(sgpc::init_prior(2, 1, 1));
    auto post = sgpc::posterior_update(start, P, g, lab, {}, 1.0, {});
    for (int e = 0; e < 2; ++e) {
        EXPECT_NEAR(post.edge[static_cast<std::size_t>(e)].alpha, 1.25, 1e-15);
        EXPECT_NEAR(post.kappa(static_cast<std::size_t>(e)), 1.25 / 3.0, 1e-15);
    }
}

TEST(Posterior, CapKeepsTotalMassBounded)
{
    Graph g = Graph::from_edges(2, {{0, 1}});
    Labels lab{{0, 0}, 2};
    sgpc::CalibrationConfig cfg;
    cfg.gamma_cap = 10.0;
    auto state = sgpc::PosteriorState::from_prior(sgpc::init_prior(1, 1, 1));
    for (int t = 0; t < 40; ++t) {
        state = sgpc::posterior_update(state, one_hot(2, 2, {0, 0}), g, lab, {}, 1.0, cfg);
        EXPECT_LE(state.edge[0].alpha + state.edge[0].beta, cfg.gamma_cap + 1e-12);
        EXPECT_GT(state.kappa(0), 0.0);
        EXPECT_LT(state.kappa(0), 1.0);
    }
    EXPECT_DOUBLE_EQ(state.n_tot[0], 40.0);
}

TEST(Posterior, CouplingRescalesPseudoCounts)
{
    // Labeled edges 0-1 (classes 0,0) and 2-3 (classes 0,1) with different agreement.
    Graph g = Graph::from_edges(4, {{0, 1}, {2, 3}});
    Labels lab{{0, 0, 0, 1}, 2};
    auto start = sgpc::PosteriorState::from_prior(sgpc::init_prior(2, 1, 1));
    start.edge[0] = {3.0, 1.0};
    start.edge[1] = {1.0, 3.0};
    Matrix P(4, 2);
    P << 0.8, 0.2, 0.8, 0.2, 0.6, 0.4, 0.4, 0.6;
    sgpc::CalibrationConfig cfg;
    cfg.max_sweeps = 1;
    auto post = sgpc::posterior_update(start, P, g, lab, {0, 1, 2, 3}, 1.0, cfg);
    // Pi(0,0) = 0.75, Pi(0,1) = Pi(1,0) = 0.25, mean over populated = 5/12.
    const double s0 = std::min(1.0, 0.68 * 0.75 / (5.0 / 12.0));
    const double s1 = 0.48 * 0.25 / (5.0 / 12.0);
    EXPECT_NEAR(post.edge[0].alpha, 3.0 + s0, 1e-12);
    EXPECT_NEAR(post.edge[1].alpha, 1.0 + s1, 1e-12);
    EXPECT_NEAR(post.edge[1].beta, 3.0 + 1.0 - s1, 1e-12);
}

TEST(Calibrate, BlendCases)
{
    Vector y(2);
    y << 1.0, 0.0;
    Vector prior = Vector::Constant(2, 0.5);
    EXPECT_TRUE(sgpc::calibrate_prediction(y, 1.0, prior).isApprox(y));
    EXPECT_TRUE(sgpc::calibrate_prediction(y, 0.0, prior).isApprox(prior));
    Vector half = sgpc::calibrate_prediction(y, 0.5, prior);
    EXPECT_NEAR(half[0], 0.75, 1e-15);
    EXPECT_NEAR(half[1], 0.25, 1e-15);
}

TEST(Calibrate, IsolatedNodeUsesPriorMean)
{
    Graph g = Graph::from_edges(3, {{0, 1}});
    auto post = sgpc::PosteriorState::from_prior(sgpc::init_prior(1, 1, 1));
    post.edge[0] = {3.0, 1.0};
    Vector k = sgpc::node_kappa(post, g, 0.5);
    EXPECT_DOUBLE_EQ(k[0], 0.75);
    EXPECT_DOUBLE_EQ(k[2], 0.5);
}

TEST(Risk, LimitsAndHandOracle)
{
    Labels lab{{0, 1, 2}, 3};
    Vector prior = Vector::Constant(3, 1.0 / 3.0);
    Matrix perfect = one_hot(3, 3, {0, 1, 2});
    EXPECT_NEAR(sgpc::empirical_risk(lab, perfect, Vector::Ones(3), {0, 1, 2}, prior), 0.0, 1e-15);
    Matrix uniform = Matrix::Constant(3, 3, 1.0 / 3.0);
    EXPECT_NEAR(sgpc::empirical_risk(lab, uniform, Vector::Constant(3, 0.4), {0, 1, 2}, prior), std::log(3.0),
                1e-14);
    Matrix P(3, 3);
    P << 0.7, 0.2, 0.1, 0.3, 0.3, 0.4, 0.1, 0.1, 0.8;
    Vector kappa(3);
    kappa << 0.9, 0.5, 0.2;
    double oracle = 0.0;
    for (int i = 0; i < 3; ++i) {
        oracle -= std::log(kappa[i] * P(i, i) + (1 - kappa[i]) / 3.0);
    }
    EXPECT_NEAR(sgpc::empirical_risk(lab, P, kappa, {0, 1, 2}, prior), oracle / 3.0, 1e-14);
    EXPECT_THROW(sgpc::empirical_risk(lab, P, kappa, {}, prior), sgpc::InvalidInput);
}

TEST(Kl, ClosedFormMatchesQuadrature)
{
    EXPECT_NEAR(sgpc::beta_kl(2, 1, 1, 1), kl_by_quadrature(2, 1, 1, 1), 1e-10);
    EXPECT_NEAR(sgpc::beta_kl(2, 1, 1, 1), std::log(2.0) - 0.5, 1e-12);
    EXPECT_NEAR(sgpc::beta_kl(5.5, 2.25, 1.5, 3), kl_by_quadrature(5.5, 2.25, 1.5, 3), 1e-9);
    EXPECT_NEAR(sgpc::beta_kl(30, 20, 1, 1), kl_by_quadrature(30, 20, 1, 1), 1e-9);
    EXPECT_DOUBLE_EQ(sgpc::beta_kl(3, 4, 3, 4), 0.0);
}

TEST(Kl, TermLimitsAndScaling)
{
    auto prior = sgpc::init_prior(3, 1, 1);
    auto post = sgpc::PosteriorState::from_prior(prior);
    EXPECT_NEAR(sgpc::kl_term(post, prior, 10, 0.05), std::sqrt(std::log(40.0) / 20.0), 1e-15);
    post.edge[1] = {4.0, 2.0};
    const double a = sgpc::kl_term(post, prior, 10, 0.05);
    const double b = sgpc::kl_term(post, prior, 20, 0.05);
    EXPECT_NEAR(a / b, std::sqrt(2.0), 1e-12);
    EXPECT_GT(a, std::sqrt(std::log(40.0) / 20.0));
}

TEST(Coupling, UniformAgreementGivesScaledOnes)
{
    Graph g = Graph::from_edges(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {0, 3}});
    Labels lab{{0, 0, 1, 1}, 2};
    std::vector<double> kappa(5, 0.3);
    auto cc = sgpc::class_coupling(kappa, lab, g, {0, 1, 2, 3});
    EXPECT_LT((cc.Pi - Matrix::Constant(2, 2, 0.3)).norm(), 1e-15);
    EXPECT_NEAR(cc.c_het, 0.3 * 2, 1e-15);
}

TEST(Coupling, NoLabeledEdgesIsZero)
{
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    Labels lab{{0, 1, 0}, 2};
    auto cc = sgpc::class_coupling({0.5, 0.5}, lab, g, {0, 2});
    EXPECT_EQ(cc.Pi.norm(), 0.0);
    EXPECT_EQ(cc.c_het, 0.0);
}

TEST(Coupling, HandCountedTwoClassToy)
{
    Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
    Labels lab{{0, 1, 1, 0, 1}, 2};
    std::vector<double> kappa{0.1, 0.9, 0.2, 0.4, 0.6};
    auto cc = sgpc::class_coupling(kappa, lab, g, {0, 1, 2, 3});
    // Edge ids follow sorted order: (0,1) .1, (0,4) .9, (1,2) .2, (2,3) .4, (3,4) .6.
    // Labeled-labeled edges: (0,1) classes 0-1, (1,2) 1-1, (2,3) 1-0.
    EXPECT_NEAR(cc.Pi(0, 1), 0.25, 1e-15);
    EXPECT_NEAR(cc.Pi(1, 0), 0.25, 1e-15);
    EXPECT_NEAR(cc.Pi(1, 1), 0.2, 1e-15);
    EXPECT_EQ(cc.Pi(0, 0), 0.0);
    // Relabeling classes permutes the matrix.
    Labels swapped{{1, 0, 0, 1, 0}, 2};
    auto cs = sgpc::class_coupling(kappa, swapped, g, {0, 1, 2, 3});
    EXPECT_NEAR(cs.Pi(0, 0), 0.2, 1e-15);
    EXPECT_NEAR(cs.c_het, cc.c_het, 1e-15);
}

TEST(Variance, BoundArithmetic)
{
    EXPECT_NEAR(sgpc::variance_bound(2, 0), 1.0 / 3.0, 1e-15);
    EXPECT_LT(sgpc::variance_bound(2, 1e9), 1e-15);
    EXPECT_NEAR(3.0 / 8.0, (2.0 + 1.0) / (2.0 + 5.0 + 1.0), 1e-15);
}

TEST(Ece, PerfectAndWorstCases)
{
    Labels lab{{0, 1, 0, 1}, 2};
    Matrix confident_right = one_hot(4, 2, {0, 1, 0, 1});
    EXPECT_NEAR(sgpc::ece(confident_right, lab, {0, 1, 2, 3}).value, 0.0, 1e-15);
    Matrix confident_wrong = one_hot(4, 2, {1, 0, 1, 0});
    EXPECT_NEAR(sgpc::ece(confident_wrong, lab, {0, 1, 2, 3}).value, 1.0, 1e-15);
}

TEST(Ece, TenHandBuiltSamples)
{
    Labels lab{{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 2};
    Matrix P(10, 2);
    // Confidences 0.55, 0.65 x2, 0.95 x7; correct when column 0 wins.
    P << 0.55, 0.45, 0.65, 0.35, 0.35, 0.65, 0.95, 0.05, 0.95, 0.05, 0.95, 0.05, 0.95, 0.05, 0.05, 0.95,
        0.95, 0.05, 0.95, 0.05;
    std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto r = sgpc::ece(P, lab, all, 10);
    // Bin 5: 1 sample conf .55 acc 1; bin 6: 2 samples conf .65 acc .5; bin 9: 7 samples conf .95 acc 6/7.
    const double expect = 0.1 * 0.45 + 0.2 * 0.15 + 0.7 * std::abs(6.0 / 7.0 - 0.95);
    EXPECT_NEAR(r.value, expect, 1e-12);
    EXPECT_EQ(r.bins[9].count, 7);
    std::ostringstream os;
    sgpc::write_reliability_csv(r, os);
    EXPECT_EQ(os.str().substr(0, 41), "bin_low,bin_high,confidence,accuracy,coun");
    EXPECT_THROW(sgpc::ece(P, lab, {}), sgpc::InvalidInput);
}
