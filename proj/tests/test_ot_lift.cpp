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
#include <functional>

#include <gtest/gtest.h>

#include "sgpc/ot_lift.hpp"
#include "sgpc/synthetic.hpp"

namespace {

using sgpc::LiftConfig;
using sgpc::Matrix;
using sgpc::Vector;

Matrix plan2(double a, double mu1, double nu1)
{
    Matrix P(2, 2);
    P << a, mu1 - a, nu1 - a, 1.0 - mu1 - nu1 + a;
    return P;
}

/// Minimizes a unimodal function on [lo, hi] by golden-section search.
double golden(const std::function<double(double)>& f, double lo, double hi)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    for (int it = 0; it < 200; ++it) {
        double c = b - r * (b - a);
        double d = a + r * (b - a);
        if (f(c) < f(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return 0.5 * (a + b);
}

Vector vec2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST(Cost, CanonicalBasisDistances)
{
    Matrix C = sgpc::feature_cost_matrix(3);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            Vector ea = Vector::Unit(3, a);
            Vector eb = Vector::Unit(3, b);
            EXPECT_DOUBLE_EQ(C(a, b), (ea - eb).squaredNorm());
        }
    }
}

TEST(Measure, NormalizationCases)
{
    Vector h(3);
    h << 1, 1, 2;
    Vector m = sgpc::normalize_to_measure(h);
    EXPECT_NEAR(m[0], 0.25, 1e-6);
    EXPECT_NEAR(m[2], 0.5, 1e-6);
    Vector z = sgpc::normalize_to_measure(Vector::Zero(3));
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(z[k], 1.0 / 3.0, 1e-15);
    }
    Vector neg(4);
    neg << -1, 2, 0, 3;
    Vector ref(4);
    ref << 1e-6, 2 + 1e-6, 1e-6, 3 + 1e-6;
    ref /= ref.sum();
    EXPECT_LT((sgpc::normalize_to_measure(neg) - ref).norm(), 1e-15);
    EXPECT_NEAR(sgpc::normalize_to_measure(neg).sum(), 1.0, 1e-15);
}

TEST(Sinkhorn, NearDeltaKeepsMass)
{
    LiftConfig cfg;
    cfg.eps = 0.1;
    Vector mu = sgpc::normalize_to_measure(Vector::Unit(4, 0));
    auto plan = sgpc::sinkhorn(mu, mu, sgpc::feature_cost_matrix(4), cfg);
    EXPECT_NEAR(plan.P(0, 0), 1.0, 1e-5);
    EXPECT_LE(plan.violation, cfg.sinkhorn_tol);
}

TEST(Sinkhorn, LargeEpsilonApproachesProductCoupling)
{
    LiftConfig cfg;
    cfg.eps = 1e6;
    Vector mu = Vector::Constant(5, 0.2);
    auto plan = sgpc::sinkhorn(mu, mu, sgpc::feature_cost_matrix(5), cfg);
    EXPECT_LT((plan.P - mu * mu.transpose()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Sinkhorn, MarginalsWithinTolerance)
{
    LiftConfig cfg;
    cfg.eps = 0.2;
    Vector mu = sgpc::normalize_to_measure(Vector::LinSpaced(8, 0.0, 3.0));
    Vector nu = sgpc::normalize_to_measure(Vector::LinSpaced(8, 2.0, -1.0));
    auto plan = sgpc::sinkhorn(mu, nu, sgpc::feature_cost_matrix(8), cfg);
    EXPECT_LE((plan.P.rowwise().sum() - mu).lpNorm<1>(), cfg.sinkhorn_tol);
    EXPECT_LE((plan.P.colwise().sum().transpose() - nu).lpNorm<1>(), cfg.sinkhorn_tol);
    EXPECT_GE(plan.P.minCoeff(), 0.0);
}

TEST(Sinkhorn, TwoByTwoMatchesBisectionOracle)
{
    LiftConfig cfg;
    const Matrix C = sgpc::feature_cost_matrix(2);
    for (double eps : {0.3, 1.0, 3.0}) {
        for (auto [mu1, nu1] : {std::pair{0.3, 0.6}, std::pair{0.5, 0.5}, std::pair{0.9, 0.2}}) {
            cfg.eps = eps;
            // Stationarity of the one-parameter family: eps * log(a p22 / (p12 p21)) = 4.
            auto slope = [&](double a) {
                Matrix P = plan2(a, mu1, nu1);
                return -4.0 + eps * std::log(P(0, 0) * P(1, 1) / (P(0, 1) * P(1, 0)));
            };
            double lo = std::max(0.0, mu1 + nu1 - 1.0) + 1e-15;
            double hi = std::min(mu1, nu1) - 1e-15;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (slope(mid) < 0 ? lo : hi) = mid;
            }
            auto plan = sgpc::sinkhorn(vec2(mu1, 1 - mu1), vec2(nu1, 1 - nu1), C, cfg);
            EXPECT_LT((plan.P - plan2(0.5 * (lo + hi), mu1, nu1)).norm(), 1e-8);
        }
    }
}

TEST(Sinkhorn, SwappingMarginalsTransposesPlan)
{
    LiftConfig cfg;
    Vector mu = vec2(0.2, 0.8);
    Vector nu = vec2(0.7, 0.3);
    auto a = sgpc::sinkhorn(mu, nu, sgpc::feature_cost_matrix(2), cfg);
    auto b = sgpc::sinkhorn(nu, mu, sgpc::feature_cost_matrix(2), cfg);
    EXPECT_LT((a.P - b.P.transpose()).norm(), 1e-8);
}

TEST(Sinkhorn, BudgetExhaustionThrows)
{
    LiftConfig cfg;
    cfg.eps = 0.01;
    cfg.sinkhorn_max_iter = 1;
    cfg.sinkhorn_tol = 1e-15;
    Vector mu = sgpc::normalize_to_measure(Vector::LinSpaced(6, 0.0, 1.0));
    Vector nu = sgpc::normalize_to_measure(Vector::LinSpaced(6, 1.0, 0.0));
    EXPECT_THROW(sgpc::sinkhorn(mu, nu, sgpc::feature_cost_matrix(6), cfg), sgpc::NumericalFailure);
}

TEST(Jko, SmallStepStaysAtReference)
{
    LiftConfig cfg;
    cfg.tau = 1e-9;
    sgpc::TransportPlan p0;
    p0.mu = vec2(0.4, 0.6);
    p0.nu = vec2(0.5, 0.5);
    p0.P = plan2(0.1, 0.4, 0.5);
    auto out = sgpc::jko_refine(p0, sgpc::feature_cost_matrix(2), cfg);
    EXPECT_LT((out.P - p0.P).norm(), 1e-7);
}

TEST(Jko, EntropicOptimumIsFixedPoint)
{
    LiftConfig cfg;
    Vector mu = sgpc::normalize_to_measure(Vector::LinSpaced(6, 0.0, 2.0));
    Vector nu = sgpc::normalize_to_measure(Vector::LinSpaced(6, 3.0, 1.0));
    const Matrix C = sgpc::feature_cost_matrix(6);
    auto p0 = sgpc::sinkhorn(mu, nu, C, cfg);
    auto p1 = sgpc::jko_refine(p0, C, cfg);
    EXPECT_LT((p1.P - p0.P).norm(), 1e-8);
}

TEST(Jko, TwoByTwoMatchesGoldenSectionOracle)
{
    LiftConfig cfg;
    cfg.eps = 0.5;
    cfg.tau = 0.7;
    const Matrix C = sgpc::feature_cost_matrix(2);
    const double mu1 = 0.35;
    const double nu1 = 0.55;
    sgpc::TransportPlan p0;
    p0.mu = vec2(mu1, 1 - mu1);
    p0.nu = vec2(nu1, 1 - nu1);
    p0.P = plan2(0.05, mu1, nu1);
    auto f = [&](double a) { return sgpc::proximal_objective(plan2(a, mu1, nu1), p0.P, C, cfg.eps, cfg.tau); };
    const double a_star = golden(f, 1e-12, std::min(mu1, nu1) - 1e-12);
    auto out = sgpc::jko_refine(p0, C, cfg);
    EXPECT_LT((out.P - plan2(a_star, mu1, nu1)).norm(), 1e-7);
    EXPECT_LE(f(out.P(0, 0)), f(0.05) + 1e-9);
    EXPECT_LE(sgpc::entropic_objective(out.P, C, cfg.eps), sgpc::entropic_objective(p0.P, C, cfg.eps) + 1e-9);
}

TEST(Lift, IdentityPlanAndWeightGiveIdentityMap)
{
    auto maps = sgpc::maps_from_plan(Matrix::Identity(4, 4), Matrix::Identity(4, 4));
    EXPECT_TRUE(maps.src.isApprox(Matrix::Identity(4, 4)));
    EXPECT_TRUE(maps.dst.isApprox(Matrix::Identity(4, 4)));
    auto scalar = sgpc::maps_from_plan(Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 2.0));
    EXPECT_GT(scalar.src(0, 0), 0.0);
}

TEST(Lift, EdgeMapsEqualDenseProducts)
{
    LiftConfig cfg;
    cfg.p_lift = 4;
    cfg.edge_dim = 3;
    Matrix W_proj = sgpc::make_projection(6, 4, 3);
    Matrix W_theta = Matrix::Random(4, 3);
    Vector hi = Vector::LinSpaced(6, 0.0, 1.0);
    Vector hj = Vector::LinSpaced(6, 1.0, -1.0);
    auto pair = sgpc::lift_edge(hi, hj, W_proj, W_theta, cfg);
    auto p0 = sgpc::sinkhorn(sgpc::normalize_to_measure(W_proj.transpose() * hi),
                             sgpc::normalize_to_measure(W_proj.transpose() * hj), sgpc::feature_cost_matrix(4), cfg);
    auto ps = sgpc::jko_refine(p0, sgpc::feature_cost_matrix(4), cfg);
    EXPECT_LT((pair.src - W_theta.transpose() * ps.P).norm(), 1e-12);
    EXPECT_LT((pair.dst - W_theta.transpose() * ps.P.transpose()).norm(), 1e-12);
}

TEST(Lift, AllEdgesMatchesPerEdgeCalls)
{
    LiftConfig cfg;
    cfg.p_lift = 4;
    sgpc::Graph empty = sgpc::Graph::from_edges(3, {});
    Matrix H = Matrix::Random(3, 5);
    Matrix W_proj = sgpc::make_projection(5, 4, 1);
    Matrix W_theta = Matrix::Identity(4, 4);
    EXPECT_EQ(sgpc::lift_all_edges(empty, H, W_proj, W_theta, cfg).maps.size(), 0u);
    sgpc::Graph one = sgpc::Graph::from_edges(3, {{0, 2}});
    EXPECT_EQ(sgpc::lift_all_edges(one, H, W_proj, W_theta, cfg).maps.size(), 1u);
    sgpc::Graph g = sgpc::Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    auto all = sgpc::lift_all_edges(g, H, W_proj, W_theta, cfg);
    ASSERT_EQ(all.maps.size(), 3u);
    for (int e = 0; e < 3; ++e) {
        auto [i, j] = g.edges[static_cast<std::size_t>(e)];
        auto pair = sgpc::lift_edge(H.row(i).transpose(), H.row(j).transpose(), W_proj, W_theta, cfg);
        EXPECT_LT((pair.src - all.maps.src[static_cast<std::size_t>(e)]).norm(), 1e-14);
        EXPECT_LT((pair.dst - all.maps.dst[static_cast<std::size_t>(e)]).norm(), 1e-14);
    }
    auto again = sgpc::lift_all_edges(g, H, W_proj, W_theta, cfg);
    EXPECT_EQ((again.plans[1] - all.plans[1]).norm(), 0.0);
}

TEST(Lift, ScalarEdgeVariantUsesIdentityMaps)
{
    LiftConfig cfg;
    cfg.p_lift = 3;
    sgpc::Graph g = sgpc::Graph::from_edges(2, {{0, 1}});
    auto res = sgpc::lift_all_edges(g, Matrix::Random(2, 4), sgpc::make_projection(4, 3, 2), Matrix::Identity(3, 3),
                                    cfg, sgpc::LiftVariant::scalar_edge);
    EXPECT_TRUE(res.plans.empty());
    EXPECT_TRUE(res.maps.src[0].isApprox(Matrix::Identity(3, 3)));
}

TEST(Lift, InvalidConfigRejected)
{
    LiftConfig cfg;
    cfg.eps = 0.0;
    EXPECT_THROW(cfg.validate(), sgpc::InvalidInput);
    cfg = LiftConfig{};
    cfg.p_lift = 1;
    EXPECT_THROW(cfg.validate(), sgpc::InvalidInput);
}
