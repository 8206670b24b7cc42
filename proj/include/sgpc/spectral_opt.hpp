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

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sgpc/core.hpp"
#include "sgpc/sheaf_laplacian.hpp"

namespace sgpc {

struct WolfeConfig {
    double c_w = 0.1;
    double eta_init = 1.0;
    int max_backtracks = 20;
    /// Ascent steps per epoch.
    int K = 5;
    /// Step norm cap relative to ||L||_F.
    double trust = 0.1;
    /// Eigenvalues within this fraction of lambda_max of lambda2 count as repeated.
    double degeneracy = 1e-6;
    /// Dense PSD repair up to this dimension; larger problems get a diagonal
    /// shift. Off by default: the repair costs several eigen-solves per trial.
    Index dense_limit = 0;
    /// Bounded budget: every trial step needs two eigen-solves.
    LanczosOptions lanczos{60, 1e-8, 1};

    void validate() const
    {
        require(c_w > 0.0 && c_w < 1.0, "wolfe: c_w must lie in (0, 1)");
        require(eta_init > 0.0, "wolfe: eta_init must be positive");
        require(max_backtracks >= 0, "wolfe: max_backtracks must be non-negative");
        require(K >= 0, "wolfe: K must be non-negative");
        require(trust > 0.0, "wolfe: trust must be positive");
    }
};

/// Per-epoch lambda2 ledger.
struct GapState {
    std::vector<double> lambda2_history;
    double delta_G = 0.0;
    Vector v2;

    void record(double lambda2)
    {
        lambda2_history.push_back(lambda2);
        delta_G = lambda2_history.back() - lambda2_history.front();
    }
};

inline std::pair<double, Vector> rayleigh_lambda2(const SheafLaplacian& L, const LanczosOptions& opt = {})
{
    SpectralEstimates est = estimate_spectrum(L, opt);
    return {est.lambda2, est.v2};
}

/// v v^T restricted to the block pattern of L.
inline SheafLaplacian gap_gradient(const SheafLaplacian& pattern, const Vector& v)
{
    require(v.size() == pattern.dim(), "gap_gradient: vector size must equal n * d");
    SheafLaplacian g = SheafLaplacian::zeros_like(pattern);
    const int d = pattern.d;
    for (int i = 0; i < pattern.n; ++i) {
        const auto vi = v.segment(static_cast<Index>(i) * d, d);
        g.diag[static_cast<std::size_t>(i)] = vi * vi.transpose();
    }
    for (std::size_t e = 0; e < pattern.edges.size(); ++e) {
        const auto vi = v.segment(static_cast<Index>(pattern.edges[e].first) * d, d);
        const auto vj = v.segment(static_cast<Index>(pattern.edges[e].second) * d, d);
        g.upper[e] = vi * vj.transpose();
    }
    return g;
}

namespace detail {

inline double psd_tolerance(double scale) { return 1e-10 * std::max(1.0, scale); }

} // namespace detail

/// Symmetrizes a dense matrix, drops entries outside the pattern and repairs
/// negative eigenvalues so the result is a valid block-sparse PSD matrix.
inline SheafLaplacian project_dense(const Matrix& M, const SheafLaplacian& pattern, int max_rounds = 5)
{
    Matrix A = 0.5 * (M + M.transpose());
    SheafLaplacian out = restrict_to_pattern(A, pattern);
    A = out.to_dense();
    const double scale = A.norm();
    for (int round = 0; round < max_rounds; ++round) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(A);
        if (es.eigenvalues()[0] >= -detail::psd_tolerance(scale)) {
            return out;
        }
        // Alternate between the PSD cone and the pattern subspace.
        const Vector clipped = es.eigenvalues().cwiseMax(0.0);
        A = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        out = restrict_to_pattern(A, pattern);
        A = out.to_dense();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    const double low = es.eigenvalues()[0];
    if (low < 0.0) {
        for (auto& blk : out.diag) {
            blk.diagonal().array() -= low;
        }
    }
    return out;
}

/// Symmetric, pattern-respecting PSD version of L. Small problems use dense
/// alternating projections; larger ones shift the diagonal by the most
/// negative Lanczos estimate.
inline SheafLaplacian project(const SheafLaplacian& L, Index dense_limit = 500, const LanczosOptions& opt = {})
{
    SheafLaplacian out = L;
    for (auto& blk : out.diag) {
        blk = 0.5 * (blk + blk.transpose()).eval();
    }
    if (out.dim() == 0) {
        return out;
    }
    if (out.dim() <= dense_limit) {
        return project_dense(out.to_dense(), out);
    }
    auto apply = [&out](const Vector& x, Vector& y) { out.apply(x, y); };
    const double low = smallest_eigenvalue(apply, out.dim(), opt);
    if (low < -detail::psd_tolerance(out.frobenius_norm())) {
        for (auto& blk : out.diag) {
            blk.diagonal().array() -= low;
        }
    }
    return out;
}

struct AscentStep {
    SheafLaplacian L;
    double eta = 0.0;
    bool accepted = false;
    /// Trial steps evaluated.
    int backtracks = 0;
    double lambda2_before = 0.0;
    double lambda2_after = 0.0;
    /// Spectrum of the returned matrix.
    SpectralEstimates estimates;
};

/// Mean of the restricted outer products of the Ritz vectors whose values lie
/// within `width` of lambda2.
inline SheafLaplacian cluster_gradient(const SheafLaplacian& L, const SpectralEstimates& est, double width,
                                       int* cluster_size = nullptr)
{
    SheafLaplacian g = gap_gradient(L, est.v2);
    int count = 1;
    for (Index k = 1; k < est.low_values.size(); ++k) {
        if (est.low_values[k] - est.lambda2 >= width) {
            break;
        }
        g.add_scaled(gap_gradient(L, est.low_vectors.col(k)), 1.0);
        ++count;
    }
    if (est.low_values.size() == 0 && est.lambda3 - est.lambda2 < width) {
        g.add_scaled(gap_gradient(L, est.v3), 1.0);
        ++count;
    }
    if (count > 1) {
        g.add_scaled(g, 1.0 / count - 1.0);
    }
    if (cluster_size != nullptr) {
        *cluster_size = count;
    }
    return g;
}

/// One backtracking ascent step on lambda2: eta in {eta0, eta0/2, ...} until
/// lambda2(project(L + eta g)) >= lambda2(L) + c_w eta v^T g v. The direction
/// averages the outer products over the eigenvalue cluster at lambda2; when
/// the search fails the cluster is widened tenfold, up to 0.1 lambda_max. On
/// exhaustion L is returned unchanged and the step is marked rejected.
inline AscentStep wolfe_ascent_step(const SheafLaplacian& L, const WolfeConfig& cfg,
                                    const SpectralEstimates* current = nullptr)
{
    cfg.validate();
    AscentStep out;
    const SpectralEstimates est = current != nullptr ? *current : estimate_spectrum(L, cfg.lanczos);
    out.L = L;
    out.estimates = est;
    out.lambda2_before = out.lambda2_after = est.lambda2;
    if (L.dim() == 0 || est.v2.size() == 0) {
        return out;
    }
    const double top = std::max(std::abs(est.lambda_max), 1e-300);
    int previous_cluster = 0;
    for (double width = cfg.degeneracy * top; width <= 0.1 * top * (1.0 + 1e-12); width *= 10.0) {
        int cluster = 0;
        SheafLaplacian g = cluster_gradient(L, est, width, &cluster);
        if (cluster == previous_cluster) {
            continue;
        }
        previous_cluster = cluster;
        const double slope = est.v2.dot(g * est.v2);
        const double gnorm = g.frobenius_norm();
        if (!(gnorm > 0.0) || !(slope > 0.0)) {
            return out;
        }
        double eta = std::min(cfg.eta_init, cfg.trust * L.frobenius_norm() / gnorm);
        for (int b = 0; b <= cfg.max_backtracks && eta > 0.0; ++b, eta *= 0.5) {
            SheafLaplacian trial = L;
            trial.add_scaled(g, eta);
            trial = project(trial, cfg.dense_limit, cfg.lanczos);
            SpectralEstimates te = estimate_spectrum(trial, cfg.lanczos);
            out.backtracks += 1;
            if (te.lambda2 >= est.lambda2 + cfg.c_w * eta * slope && te.lambda2 >= est.lambda2 - 1e-8) {
                out.L = std::move(trial);
                out.estimates = std::move(te);
                out.eta = eta;
                out.accepted = true;
                out.lambda2_after = out.estimates.lambda2;
                return out;
            }
        }
    }
    return out;
}

struct SpecPenalty {
    double value = 0.0;
    double lambda2 = 0.0;
    /// lambda2 was below the floor and replaced by it.
    bool floored = false;
};

inline constexpr double kLambda2Floor = 1e-8;

/// c_het / lambda2 with lambda2 floored at 1e-8.
inline SpecPenalty spec_penalty(double c_het, double lambda2)
{
    require(c_het >= 0.0, "spec_penalty: c_het must be non-negative");
    SpecPenalty p;
    p.floored = !(lambda2 >= kLambda2Floor);
    p.lambda2 = p.floored ? kLambda2Floor : lambda2;
    p.value = c_het / p.lambda2;
    return p;
}

} // namespace sgpc
