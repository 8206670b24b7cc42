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

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "sgpc/spectral_opt.hpp"
#include "sgpc/synthetic.hpp"

namespace {

using sgpc::Graph;
using sgpc::Matrix;
using sgpc::SheafLaplacian;
using sgpc::Vector;

SheafLaplacian scalar_laplacian(const Graph& g) { return sgpc::assemble_laplacian(g, sgpc::identity_restrictions(g, 1)); }

double min_eig(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

} // namespace

TEST(Rayleigh, KnownSpectra)
{
    auto [l2, v2] = sgpc::rayleigh_lambda2(scalar_laplacian(Graph::from_edges(2, {{0, 1}})));
    EXPECT_NEAR(l2, 2.0, 1e-12);
    EXPECT_NEAR(v2.norm(), 1.0, 1e-12);
    auto [l2b, v2b] = sgpc::rayleigh_lambda2(scalar_laplacian(Graph::from_edges(4, {{0, 1}, {2, 3}})));
    EXPECT_NEAR(l2b, 0.0, 1e-10);
}

TEST(Rayleigh, SixNodeSheafMatchesDense)
{
    Graph g = Graph::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {1, 4}});
    SheafLaplacian L = sgpc::assemble_laplacian(g, sgpc::identity_restrictions(g, 2));
    auto [l2, v2] = sgpc::rayleigh_lambda2(L);
    Eigen::SelfAdjointEigenSolver<Matrix> es(L.to_dense());
    // Identity sheaf: spectrum is the graph spectrum doubled; kernel is the constants.
    EXPECT_NEAR(l2, es.eigenvalues()[2], 1e-10);
}

TEST(GapGradient, OuterProductOnPattern)
{
    Graph g = Graph::from_edges(3, {{0, 1}});
    SheafLaplacian L = scalar_laplacian(g);
    SheafLaplacian e1 = sgpc::gap_gradient(L, Vector::Unit(3, 0));
    Matrix expect = Matrix::Zero(3, 3);
    expect(0, 0) = 1.0;
    EXPECT_EQ((e1.to_dense() - expect).norm(), 0.0);

    Graph one = Graph::from_edges(2, {{0, 1}});
    Vector v = Vector::Constant(2, 1.0 / std::sqrt(2.0));
    EXPECT_LT((sgpc::gap_gradient(scalar_laplacian(one), v).to_dense() - Matrix::Constant(2, 2, 0.5)).norm(), 1e-15);

    Vector w = Vector::Constant(3, 1.0 / std::sqrt(3.0));
    SheafLaplacian gw = sgpc::gap_gradient(L, w);
    Matrix dense = gw.to_dense();
    EXPECT_EQ(dense(0, 2), 0.0);
    EXPECT_NEAR((w * w.transpose()).trace(), 1.0, 1e-15);
}

TEST(Project, ValidLaplacianUnchanged)
{
    Graph g = sgpc::erdos_renyi(15, 4.0, 2);
    SheafLaplacian L = sgpc::assemble_laplacian(g, sgpc::random_restrictions(g, 2, 2, 3));
    SheafLaplacian P = sgpc::project(L);
    EXPECT_LT((P.to_dense() - L.to_dense()).norm(), 1e-12);
}

TEST(Project, RepairsNegativeEigenvalue)
{
    Graph g = sgpc::erdos_renyi(12, 4.0, 5);
    SheafLaplacian L = sgpc::assemble_laplacian(g, sgpc::random_restrictions(g, 2, 2, 6));
    Eigen::SelfAdjointEigenSolver<Matrix> es(L.to_dense());
    Vector u = es.eigenvectors().col(0);
    // Push the bottom eigenvalue to -0.1 with a pattern-respecting perturbation.
    SheafLaplacian bad = L;
    bad.add_scaled(sgpc::gap_gradient(L, u), -(es.eigenvalues()[0] + 0.1) * 4.0);
    ASSERT_LT(min_eig(bad.to_dense()), -0.05);
    SheafLaplacian fixed = sgpc::project(bad);
    EXPECT_GE(min_eig(fixed.to_dense()), -1e-8);
    SheafLaplacian again = sgpc::project(fixed);
    EXPECT_LT((again.to_dense() - fixed.to_dense()).norm(), 1e-10);
}

TEST(Project, LargeProblemsUseDiagonalShift)
{
    Graph g = sgpc::erdos_renyi(300, 4.0, 7);
    SheafLaplacian L = sgpc::assemble_laplacian(g, sgpc::identity_restrictions(g, 2));
    for (auto& blk : L.diag) {
        blk.diagonal().array() -= 0.2;
    }
    SheafLaplacian fixed = sgpc::project(L, 100);
    auto apply = [&fixed](const Vector& x, Vector& y) { fixed.apply(x, y); };
    EXPECT_GE(sgpc::smallest_eigenvalue(apply, fixed.dim()), -1e-8);
}

TEST(Project, SymmetrizesDiagonalBlocks)
{
    Graph g = Graph::from_edges(2, {{0, 1}});
    SheafLaplacian L = sgpc::assemble_laplacian(g, sgpc::identity_restrictions(g, 2));
    L.diag[0](0, 1) += 0.3;
    Matrix d = sgpc::project(L).to_dense();
    EXPECT_EQ((d - d.transpose()).norm(), 0.0);
}

TEST(Wolfe, ZeroGradientLeavesLaplacianUnchanged)
{
    Graph g = Graph::from_edges(3, {{0, 1}});
    SheafLaplacian L = scalar_laplacian(g);
    sgpc::SpectralEstimates est = sgpc::estimate_spectrum(L);
    est.v2.setZero();
    auto step = sgpc::wolfe_ascent_step(L, {}, &est);
    EXPECT_FALSE(step.accepted);
    EXPECT_EQ((step.L.to_dense() - L.to_dense()).norm(), 0.0);
}

TEST(Wolfe, SingleEdgeStepIncreasesGap)
{
    SheafLaplacian L = scalar_laplacian(Graph::from_edges(2, {{0, 1}}));
    auto step = sgpc::wolfe_ascent_step(L, {});
    ASSERT_TRUE(step.accepted);
    // g = v v^T = L / 2 on the full pattern, so lambda2 = 2 (1 + eta / 2) exactly.
    EXPECT_NEAR(step.lambda2_after, 2.0 * (1.0 + step.eta / 2.0), 1e-10);
    EXPECT_GT(step.lambda2_after, 2.0);
    EXPECT_LE(step.eta * 1.0, 0.1 * L.frobenius_norm() + 1e-15);
}

TEST(Wolfe, RepeatedStepsNeverDecreaseGap)
{
    Graph g = sgpc::erdos_renyi(20, 4.0, 13);
    SheafLaplacian L = sgpc::assemble_laplacian(g, sgpc::random_restrictions(g, 2, 2, 14));
    sgpc::GapState ledger;
    ledger.record(sgpc::estimate_spectrum(L).lambda2);
    int accepted = 0;
    for (int t = 0; t < 50; ++t) {
        auto step = sgpc::wolfe_ascent_step(L, {});
        if (step.accepted) {
            ++accepted;
            EXPECT_GE(step.lambda2_after, step.lambda2_before - 1e-8);
            L = step.L;
            ledger.record(step.lambda2_after);
        }
    }
    EXPECT_EQ(accepted, 50);
    for (std::size_t t = 1; t < ledger.lambda2_history.size(); ++t) {
        EXPECT_GE(ledger.lambda2_history[t], ledger.lambda2_history[t - 1] - 1e-8);
    }
    EXPECT_DOUBLE_EQ(ledger.delta_G, ledger.lambda2_history.back() - ledger.lambda2_history.front());
}

TEST(SpecPenalty, ArithmeticAndFloor)
{
    EXPECT_EQ(sgpc::spec_penalty(0.0, 3.0).value, 0.0);
    EXPECT_DOUBLE_EQ(sgpc::spec_penalty(1.0, 2.0).value, 0.5);
    EXPECT_LT(sgpc::spec_penalty(1.0, 3.0).value, sgpc::spec_penalty(1.0, 2.0).value);
    auto f = sgpc::spec_penalty(1.0, 0.0);
    EXPECT_TRUE(f.floored);
    EXPECT_DOUBLE_EQ(f.value, 1e8);
}
