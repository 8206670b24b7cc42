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
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "sgpc/cg.hpp"
#include "sgpc/core.hpp"
#include "sgpc/sheaf_laplacian.hpp"

namespace sgpc {

struct DiffusionConfig {
    double dt = 0.1;
    double cg_tol = 1e-6;
    int cg_max_iter = 1000;
    bool use_sparsifier = false;
    /// Highest Chebyshev order.
    int Q = 3;
    int layers = 1;
    /// Block-Jacobi preconditioning of the shifted system.
    bool precondition = true;

    void validate() const
    {
        require(dt > 0.0, "diffusion: dt must be positive");
        require(cg_tol > 0.0, "diffusion: cg_tol must be positive");
        require(cg_max_iter > 0, "diffusion: cg_max_iter must be positive");
        require(Q >= 0, "diffusion: Q must be non-negative");
        require(layers >= 1 && layers <= 64, "diffusion: layers must lie in [1, 64]");
    }
};

/// Row-major flattening of an n x d node-feature matrix: entry (i, a) lands at i * d + a.
inline Vector stack_rows(const Matrix& Z)
{
    Vector v(Z.size());
    for (Index i = 0; i < Z.rows(); ++i) {
        v.segment(i * Z.cols(), Z.cols()) = Z.row(i).transpose();
    }
    return v;
}

inline Matrix unstack_rows(const Vector& v, Index n, Index d)
{
    require(v.size() == n * d, "unstack_rows: size mismatch");
    Matrix Z(n, d);
    for (Index i = 0; i < n; ++i) {
        Z.row(i) = v.segment(i * d, d).transpose();
    }
    return Z;
}

/// Applies (I + dt L).
struct ShiftedOperator {
    const SheafLaplacian* L;
    double dt;

    void operator()(const Vector& x, Vector& y) const
    {
        L->apply(x, y);
        y = x + dt * y;
    }
};

/// Inverse of the block diagonal of I + dt L, one small Cholesky factor per node.
class BlockJacobi {
public:
    BlockJacobi() = default;

    BlockJacobi(const SheafLaplacian& L, double dt) : d_(L.d)
    {
        factors_.reserve(L.diag.size());
        for (const auto& blk : L.diag) {
            Matrix a = Matrix::Identity(L.d, L.d) + dt * 0.5 * (blk + blk.transpose());
            factors_.emplace_back(a);
        }
    }

    void operator()(const Vector& r, Vector& z) const
    {
        z.resize(r.size());
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const Index off = static_cast<Index>(i) * d_;
            z.segment(off, d_) = factors_[i].solve(r.segment(off, d_));
        }
    }

private:
    int d_ = 0;
    std::vector<Eigen::LDLT<Matrix>> factors_;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

/// Solves (I + dt L) x = b, optionally block-Jacobi preconditioned and warm
/// started. Throws NumericalFailure when the iteration budget is exhausted.
inline Vector shifted_solve(const SheafLaplacian& L, const Vector& b, const DiffusionConfig& cfg,
                            const Vector* warm = nullptr, SolveStats* stats = nullptr,
                            const BlockJacobi* precond = nullptr)
{
    ShiftedOperator op{&L, cfg.dt};
    CgOptions opt{cfg.cg_tol, cfg.cg_max_iter};
    CgResult res = (precond != nullptr) ? cg_solve(op, b, opt, warm, *precond) : cg_solve(op, b, opt, warm);
    if (!res.converged) {
        throw NumericalFailure("cg: residual " + std::to_string(res.residual) + " above tolerance after " +
                               std::to_string(res.iterations) + " iterations");
    }
    if (stats != nullptr) {
        stats->iterations += res.iterations;
        stats->residual = std::max(stats->residual, res.residual);
    }
    return res.x;
}

/// Diffuses every column of H (n*d x f) by (I + dt L)^{-1}.
inline Matrix svr_diffuse(const SheafLaplacian& L, const Matrix& H, const DiffusionConfig& cfg,
                          const Matrix* warm = nullptr, SolveStats* stats = nullptr)
{
    require(H.rows() == L.dim(), "svr_diffuse: feature rows must equal n * d");
    std::unique_ptr<BlockJacobi> pre;
    if (cfg.precondition) {
        pre = std::make_unique<BlockJacobi>(L, cfg.dt);
    }
    Matrix out(H.rows(), H.cols());
    for (Index c = 0; c < H.cols(); ++c) {
        Vector w;
        const Vector* w_ptr = nullptr;
        if (warm != nullptr && warm->rows() == H.rows() && warm->cols() == H.cols()) {
            w = warm->col(c);
            w_ptr = &w;
        }
        out.col(c) = shifted_solve(L, H.col(c), cfg, w_ptr, stats, pre.get());
    }
    return out;
}

/// Mixing weights softmax(gamma) over Chebyshev orders 0..Q.
struct ChebyshevWeights {
    Vector gamma;

    int Q() const { return static_cast<int>(gamma.size()) - 1; }

    Vector alpha() const
    {
        const double top = gamma.maxCoeff();
        Vector a = (gamma.array() - top).exp();
        return a / a.sum();
    }
};

/// T_0 x, ..., T_Q x for the operator scale * op via the three-term recurrence.
inline std::vector<Vector> chebyshev_terms(const SheafLaplacian& op, double scale, const Vector& x, int Q)
{
    std::vector<Vector> t;
    t.reserve(static_cast<std::size_t>(Q) + 1);
    t.push_back(x);
    if (Q >= 1) {
        t.push_back(scale * (op * x));
    }
    for (int q = 2; q <= Q; ++q) {
        Vector next = 2.0 * scale * (op * t[static_cast<std::size_t>(q) - 1]) - t[static_cast<std::size_t>(q) - 2];
        t.push_back(std::move(next));
    }
    return t;
}

/// sum_q alpha_q T_q(scale * op) applied to every column of H.
inline Matrix afm_filter(const SheafLaplacian& op, const Matrix& H, const ChebyshevWeights& weights,
                         double scale = 1.0)
{
    require(H.rows() == op.dim(), "afm_filter: feature rows must equal n * d");
    const Vector a = weights.alpha();
    Matrix out = Matrix::Zero(H.rows(), H.cols());
    for (Index c = 0; c < H.cols(); ++c) {
        auto t = chebyshev_terms(op, scale, H.col(c), weights.Q());
        for (std::size_t q = 0; q < t.size(); ++q) {
            out.col(c) += a[static_cast<Index>(q)] * t[q];
        }
    }
    return out;
}

/// 1 / max(1, lambda_max(op)); keeps the recurrence inside its stable range.
inline double chebyshev_scale(const SheafLaplacian& op, const LanczosOptions& opt = {})
{
    auto apply = [&op](const Vector& x, Vector& y) { op.apply(x, y); };
    const double top = largest_eigenvalue(apply, op.dim(), opt);
    return 1.0 / std::max(1.0, top);
}

/// ReLU(W_mix [S | A]) with S, A stored as n x h node matrices; W_mix is h_out x 2h.
inline Matrix fuse(const Matrix& S, const Matrix& A, const Matrix& W_mix)
{
    require(S.rows() == A.rows() && S.cols() == A.cols(), "fuse: branch shapes differ");
    require(W_mix.cols() == 2 * S.cols(), "fuse: mixer must have 2h columns");
    Matrix cat(S.rows(), 2 * S.cols());
    cat << S, A;
    return (cat * W_mix.transpose()).cwiseMax(0.0);
}

/// Row-wise softmax with max subtraction.
inline Matrix softmax_rows(const Matrix& logits)
{
    Matrix out(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        auto e = (logits.row(i).array() - top).exp();
        out.row(i) = e / e.sum();
    }
    return out;
}

/// Class probabilities softmax(H' W^T); W is C x h_out.
inline Matrix predict(const Matrix& H_prime, const Matrix& W)
{
    require(W.cols() == H_prime.cols(), "predict: classifier width mismatch");
    return softmax_rows(H_prime * W.transpose());
}

} // namespace sgpc
