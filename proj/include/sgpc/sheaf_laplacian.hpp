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
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sgpc/cg.hpp"
#include "sgpc/core.hpp"
#include "sgpc/graph.hpp"
#include "sgpc/lanczos.hpp"

namespace sgpc {

/// Per-edge restriction maps. Edge e = (i, j) with i < j owns `src[e]`, which
/// acts on the stalk of i, and `dst[e]`, which acts on the stalk of j. Both are
/// edge_dim x node_dim.
struct RestrictionSet {
    int node_dim = 0;
    int edge_dim = 0;
    std::vector<Matrix> src;
    std::vector<Matrix> dst;

    std::size_t size() const { return src.size(); }
};

inline RestrictionSet identity_restrictions(const Graph& g, int dim)
{
    RestrictionSet out;
    out.node_dim = out.edge_dim = dim;
    out.src.assign(static_cast<std::size_t>(g.m()), Matrix::Identity(dim, dim));
    out.dst = out.src;
    return out;
}

/// Scales both maps of edge e by sqrt(weights[e]), which scales that edge's
/// Laplacian contribution by weights[e].
inline RestrictionSet reweight(const RestrictionSet& maps, const std::vector<double>& weights)
{
    require(weights.size() == maps.size(), "reweight: one weight per edge required");
    RestrictionSet out = maps;
    for (std::size_t e = 0; e < maps.size(); ++e) {
        require(weights[e] >= 0.0, "reweight: negative edge weight");
        const double s = std::sqrt(weights[e]);
        out.src[e] *= s;
        out.dst[e] *= s;
    }
    return out;
}

/// Symmetric block-sparse matrix over a graph: one block per node and one
/// upper block per edge. The (j, i) block is the transpose of the (i, j) block.
struct SheafLaplacian {
    int n = 0;
    int d = 0;
    std::vector<Edge> edges;
    std::vector<Matrix> diag;
    std::vector<Matrix> upper;

    Index dim() const { return static_cast<Index>(n) * d; }

    static SheafLaplacian zeros_like(const SheafLaplacian& pattern)
    {
        SheafLaplacian z;
        z.n = pattern.n;
        z.d = pattern.d;
        z.edges = pattern.edges;
        z.diag.assign(pattern.diag.size(), Matrix::Zero(pattern.d, pattern.d));
        z.upper.assign(pattern.upper.size(), Matrix::Zero(pattern.d, pattern.d));
        return z;
    }

    void apply(const Vector& x, Vector& y) const
    {
        y.resize(dim());
        for (int i = 0; i < n; ++i) {
            y.segment(static_cast<Index>(i) * d, d).noalias() = diag[i] * x.segment(static_cast<Index>(i) * d, d);
        }
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const Index a = static_cast<Index>(edges[e].first) * d;
            const Index b = static_cast<Index>(edges[e].second) * d;
            y.segment(a, d).noalias() += upper[e] * x.segment(b, d);
            y.segment(b, d).noalias() += upper[e].transpose() * x.segment(a, d);
        }
    }

    Vector operator*(const Vector& x) const
    {
        Vector y;
        apply(x, y);
        return y;
    }

    Matrix to_dense() const
    {
        Matrix out = Matrix::Zero(dim(), dim());
        for (int i = 0; i < n; ++i) {
            out.block(static_cast<Index>(i) * d, static_cast<Index>(i) * d, d, d) = diag[i];
        }
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const Index a = static_cast<Index>(edges[e].first) * d;
            const Index b = static_cast<Index>(edges[e].second) * d;
            out.block(a, b, d, d) = upper[e];
            out.block(b, a, d, d) = upper[e].transpose();
        }
        return out;
    }

    double frobenius_norm() const
    {
        double s = 0.0;
        for (const auto& blk : diag) {
            s += blk.squaredNorm();
        }
        for (const auto& blk : upper) {
            s += 2.0 * blk.squaredNorm();
        }
        return std::sqrt(s);
    }

    /// Frobenius inner product over the full symmetric matrix.
    double dot(const SheafLaplacian& other) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < diag.size(); ++i) {
            s += diag[i].cwiseProduct(other.diag[i]).sum();
        }
        for (std::size_t e = 0; e < upper.size(); ++e) {
            s += 2.0 * upper[e].cwiseProduct(other.upper[e]).sum();
        }
        return s;
    }

    /// this += scale * other (same pattern).
    void add_scaled(const SheafLaplacian& other, double scale)
    {
        for (std::size_t i = 0; i < diag.size(); ++i) {
            diag[i] += scale * other.diag[i];
        }
        for (std::size_t e = 0; e < upper.size(); ++e) {
            upper[e] += scale * other.upper[e];
        }
    }

    bool all_finite() const
    {
        for (const auto& blk : diag) {
            if (!blk.allFinite()) {
                return false;
            }
        }
        for (const auto& blk : upper) {
            if (!blk.allFinite()) {
                return false;
            }
        }
        return true;
    }
};

/// Copies a dense symmetric matrix onto the block pattern of `pattern`,
/// discarding every entry outside it.
inline SheafLaplacian restrict_to_pattern(const Matrix& dense, const SheafLaplacian& pattern)
{
    require(dense.rows() == pattern.dim() && dense.cols() == pattern.dim(), "restrict_to_pattern: size mismatch");
    SheafLaplacian out = SheafLaplacian::zeros_like(pattern);
    const int d = pattern.d;
    for (int i = 0; i < pattern.n; ++i) {
        out.diag[i] = dense.block(static_cast<Index>(i) * d, static_cast<Index>(i) * d, d, d);
    }
    for (std::size_t e = 0; e < pattern.edges.size(); ++e) {
        const Index a = static_cast<Index>(pattern.edges[e].first) * d;
        const Index b = static_cast<Index>(pattern.edges[e].second) * d;
        out.upper[e] = dense.block(a, b, d, d);
    }
    return out;
}

/// Builds L = B^T B blockwise from the restriction maps.
inline SheafLaplacian assemble_laplacian(const Graph& g, const RestrictionSet& maps)
{
    require(maps.size() == static_cast<std::size_t>(g.m()), "assemble_laplacian: one map pair per edge required");
    require(maps.node_dim > 0 && maps.edge_dim > 0, "assemble_laplacian: stalk dimensions must be positive");
    SheafLaplacian L;
    L.n = g.n;
    L.d = maps.node_dim;
    L.edges = g.edges;
    L.diag.assign(static_cast<std::size_t>(g.n), Matrix::Zero(L.d, L.d));
    L.upper.resize(maps.size());
    for (std::size_t e = 0; e < maps.size(); ++e) {
        const Matrix& rs = maps.src[e];
        const Matrix& rd = maps.dst[e];
        if (rs.rows() != maps.edge_dim || rs.cols() != maps.node_dim || rd.rows() != maps.edge_dim ||
            rd.cols() != maps.node_dim) {
            throw InvalidInput("assemble_laplacian: restriction map of edge " + std::to_string(e) +
                               " has the wrong shape");
        }
        if (!rs.allFinite() || !rd.allFinite()) {
            throw InvalidInput("assemble_laplacian: non-finite restriction map on edge " + std::to_string(e));
        }
        L.diag[static_cast<std::size_t>(g.edges[e].first)].noalias() += rs.transpose() * rs;
        L.diag[static_cast<std::size_t>(g.edges[e].second)].noalias() += rd.transpose() * rd;
        L.upper[e].noalias() = -rs.transpose() * rd;
    }
    return L;
}

/// Dense coboundary B (edges*edge_dim x n*node_dim); used by tests and small diagnostics.
inline Matrix coboundary_dense(const Graph& g, const RestrictionSet& maps)
{
    const Index de = maps.edge_dim;
    const Index dv = maps.node_dim;
    Matrix B = Matrix::Zero(static_cast<Index>(g.m()) * de, static_cast<Index>(g.n) * dv);
    for (std::size_t e = 0; e < maps.size(); ++e) {
        const Index r = static_cast<Index>(e) * de;
        B.block(r, g.edges[e].first * dv, de, dv) = maps.src[e];
        B.block(r, g.edges[e].second * dv, de, dv) = -maps.dst[e];
    }
    return B;
}

/// Orthonormal basis of the per-coordinate constant vectors (n*d x d).
inline Matrix constant_basis(int n, int d)
{
    Matrix c = Matrix::Zero(static_cast<Index>(n) * d, d);
    const double v = 1.0 / std::sqrt(static_cast<double>(std::max(n, 1)));
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) {
            c(static_cast<Index>(i) * d + a, a) = v;
        }
    }
    return c;
}

inline constexpr double kPinvRelTol = 1e-8;

/// Pseudo-inverse square root of a symmetric PSD block. Eigenvalues below
/// rel_tol * max eigenvalue are treated as zero.
inline Matrix pinv_sqrt(const Matrix& block, double rel_tol = kPinvRelTol)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (block + block.transpose()));
    const Vector& lam = es.eigenvalues();
    const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    Vector f = Vector::Zero(lam.size());
    for (Index k = 0; k < lam.size(); ++k) {
        if (top > 0.0 && lam[k] > rel_tol * top) {
            f[k] = 1.0 / std::sqrt(lam[k]);
        }
    }
    return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
}

/// I - D^{-1/2} L D^{-1/2} together with the per-node D^{-1/2} factors.
struct NormalizedLaplacian {
    SheafLaplacian op;
    std::vector<Matrix> inv_sqrt;
};

inline NormalizedLaplacian normalized_laplacian(const SheafLaplacian& L)
{
    NormalizedLaplacian out;
    out.op = SheafLaplacian::zeros_like(L);
    out.inv_sqrt.resize(L.diag.size());
    for (std::size_t i = 0; i < L.diag.size(); ++i) {
        out.inv_sqrt[i] = pinv_sqrt(L.diag[i]);
        out.op.diag[i] = Matrix::Identity(L.d, L.d) - out.inv_sqrt[i] * L.diag[i] * out.inv_sqrt[i];
    }
    for (std::size_t e = 0; e < L.edges.size(); ++e) {
        const auto i = static_cast<std::size_t>(L.edges[e].first);
        const auto j = static_cast<std::size_t>(L.edges[e].second);
        out.op.upper[e] = -out.inv_sqrt[i] * L.upper[e] * out.inv_sqrt[j];
    }
    return out;
}

struct SpectralEstimates {
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    double lambda_max = 0.0;
    Vector v2;
    Vector v3;
    /// ||L v2 - lambda2 v2|| on the complement of the constant vectors.
    double residual = 0.0;
    bool converged = false;
    int steps = 0;
    /// Up to eight lowest Ritz pairs (ascending), for clustered eigenvalues.
    Vector low_values;
    Matrix low_vectors;
};

/// Smallest two eigenpairs and the largest eigenvalue of L restricted to the
/// orthogonal complement of the per-coordinate constant vectors.
inline SpectralEstimates estimate_spectrum(const SheafLaplacian& L, const LanczosOptions& opt = {})
{
    SpectralEstimates est;
    const Matrix defl = constant_basis(L.n, L.d);
    auto apply = [&L](const Vector& x, Vector& y) { L.apply(x, y); };
    RitzPairs rp = lanczos(apply, L.dim(), defl, 2, opt);
    if (rp.values.size() == 0) {
        est.v2 = Vector::Zero(L.dim());
        est.v3 = est.v2;
        est.converged = true;
        return est;
    }
    const Index k = rp.values.size();
    est.lambda2 = rp.values[0];
    est.v2 = rp.vectors.col(0);
    est.lambda3 = k > 1 ? rp.values[1] : rp.values[0];
    est.v3 = k > 1 ? Vector(rp.vectors.col(1)) : est.v2;
    est.lambda_max = rp.values[k - 1];
    est.residual = rp.residuals[0];
    est.steps = rp.steps;
    const Index keep = std::min<Index>(k, 8);
    est.low_values = rp.values.head(keep);
    est.low_vectors = rp.vectors.leftCols(keep);
    est.converged = est.residual <= 1e-6 * std::max(std::abs(est.lambda_max), 1e-300) || rp.converged;
    return est;
}

/// Largest eigenvalue of a symmetric operator, no deflation.
template <typename ApplyFn>
double largest_eigenvalue(ApplyFn&& apply, Index dim, const LanczosOptions& opt = {})
{
    RitzPairs rp = lanczos(apply, dim, Matrix(dim, 0), 0, opt);
    return rp.values.size() > 0 ? rp.values[rp.values.size() - 1] : 0.0;
}

/// Smallest eigenvalue of a symmetric operator, no deflation.
template <typename ApplyFn>
double smallest_eigenvalue(ApplyFn&& apply, Index dim, const LanczosOptions& opt = {})
{
    RitzPairs rp = lanczos(apply, dim, Matrix(dim, 0), 1, opt);
    return rp.values.size() > 0 ? rp.values[0] : 0.0;
}

/// Recovers restriction maps whose off-diagonal blocks best match L in
/// Frobenius norm: -L_ij = U S V^T truncated to rank edge_dim gives
/// src = S^{1/2} U^T and dst = S^{1/2} V^T. Edges whose block has rank below
/// edge_dim fall back to `previous` when it is supplied.
inline RestrictionSet reassemble_restrictions(const SheafLaplacian& L, int edge_dim,
                                              const RestrictionSet* previous = nullptr, int* fallbacks = nullptr)
{
    require(edge_dim > 0, "reassemble_restrictions: edge_dim must be positive");
    RestrictionSet out;
    out.node_dim = L.d;
    out.edge_dim = edge_dim;
    out.src.resize(L.upper.size());
    out.dst.resize(L.upper.size());
    const int r = std::min(edge_dim, L.d);
    int fb = 0;
    for (std::size_t e = 0; e < L.upper.size(); ++e) {
        Eigen::JacobiSVD<Matrix> svd(-L.upper[e], Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector& sv = svd.singularValues();
        const double top = sv.size() > 0 ? sv[0] : 0.0;
        const bool deficient = !(top > 0.0) || sv[r - 1] <= 1e-12 * top;
        if (deficient && previous != nullptr && previous->size() == L.upper.size() &&
            previous->edge_dim == edge_dim) {
            out.src[e] = previous->src[e];
            out.dst[e] = previous->dst[e];
            ++fb;
            continue;
        }
        Matrix rs = Matrix::Zero(edge_dim, L.d);
        Matrix rd = Matrix::Zero(edge_dim, L.d);
        for (int k = 0; k < r; ++k) {
            const double s = std::sqrt(sv[k]);
            rs.row(k) = s * svd.matrixU().col(k).transpose();
            rd.row(k) = s * svd.matrixV().col(k).transpose();
        }
        out.src[e] = std::move(rs);
        out.dst[e] = std::move(rd);
    }
    if (fallbacks != nullptr) {
        *fallbacks = fb;
    }
    return out;
}

struct SparsifierConfig {
    double epsilon = 0.3;
    /// Sample count is ceil(oversample * n * ln(n) / epsilon^2).
    double oversample = 0.5;
    std::uint64_t seed = 17;
    /// Exact pseudo-inverse leverage scores up to this many rows.
    Index exact_limit = 2000;
    /// Rows of the random sketch for large problems; 0 picks ceil(8 ln(dim)).
    int sketch_rows = 0;
    CgOptions cg{1e-10, 5000};
};

struct SparsifyResult {
    SheafLaplacian laplacian;
    RestrictionSet maps;
    std::vector<double> weights;
    std::vector<double> leverage;
    Index samples = 0;
    Index kept_edges = 0;
    /// False when the graph is already below the sampling budget and L is returned unchanged.
    bool sampled = false;
};

namespace detail {

inline std::vector<double> leverage_exact(const Graph& g, const RestrictionSet& maps, const SheafLaplacian& L)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(L.to_dense());
    const Vector& lam = es.eigenvalues();
    const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    Vector inv = Vector::Zero(lam.size());
    for (Index k = 0; k < lam.size(); ++k) {
        if (lam[k] > 1e-10 * top) {
            inv[k] = 1.0 / lam[k];
        }
    }
    const Matrix pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    const Index d = maps.node_dim;
    std::vector<double> tau(maps.size());
    for (std::size_t e = 0; e < maps.size(); ++e) {
        const Index a = g.edges[e].first * d;
        const Index b = g.edges[e].second * d;
        const Matrix& rs = maps.src[e];
        const Matrix& rd = maps.dst[e];
        Matrix m = rs * pinv.block(a, a, d, d) * rs.transpose() + rd * pinv.block(b, b, d, d) * rd.transpose() -
                   rs * pinv.block(a, b, d, d) * rd.transpose() - rd * pinv.block(b, a, d, d) * rs.transpose();
        tau[e] = m.trace();
    }
    return tau;
}

inline std::vector<double> leverage_sketch(const Graph& g, const RestrictionSet& maps, const SheafLaplacian& L,
                                           const SparsifierConfig& cfg)
{
    const Index dim = L.dim();
    const int k = cfg.sketch_rows > 0 ? cfg.sketch_rows
                                      : static_cast<int>(std::ceil(8.0 * std::log(static_cast<double>(dim))));
    const Index d = maps.node_dim;
    const Index de = maps.edge_dim;
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::bernoulli_distribution coin(0.5);
    const double amp = 1.0 / std::sqrt(static_cast<double>(k));
    std::vector<double> tau(maps.size(), 0.0);
    auto apply = [&L](const Vector& x, Vector& y) { L.apply(x, y); };
    for (int row = 0; row < k; ++row) {
        Vector rhs = Vector::Zero(dim);
        for (std::size_t e = 0; e < maps.size(); ++e) {
            Vector q(de);
            for (Index t = 0; t < de; ++t) {
                q[t] = coin(rng) ? amp : -amp;
            }
            rhs.segment(g.edges[e].first * d, d).noalias() += maps.src[e].transpose() * q;
            rhs.segment(g.edges[e].second * d, d).noalias() -= maps.dst[e].transpose() * q;
        }
        CgOptions opt = cfg.cg;
        opt.tol = cfg.cg.tol * std::max(rhs.norm(), 1e-300);
        const CgResult sol = cg_solve(apply, rhs, opt);
        for (std::size_t e = 0; e < maps.size(); ++e) {
            const Vector be = maps.src[e] * sol.x.segment(g.edges[e].first * d, d) -
                              maps.dst[e] * sol.x.segment(g.edges[e].second * d, d);
            tau[e] += be.squaredNorm();
        }
    }
    return tau;
}

} // namespace detail

/// Leverage scores tr(B_e L^+ B_e^T) per edge: exact for small problems, a
/// random sketch with CG solves above `exact_limit` rows.
inline std::vector<double> leverage_scores(const Graph& g, const RestrictionSet& maps, const SparsifierConfig& cfg)
{
    const SheafLaplacian L = assemble_laplacian(g, maps);
    if (L.dim() <= cfg.exact_limit) {
        return detail::leverage_exact(g, maps, L);
    }
    return detail::leverage_sketch(g, maps, L, cfg);
}

/// Spectral sparsifier by leverage-score sampling with replacement. Each
/// sampled edge is reweighted by count / (samples * probability), so the
/// result is an unbiased estimate of L and keeps its block pattern.
inline SparsifyResult sparsify(const Graph& g, const RestrictionSet& maps, const SparsifierConfig& cfg)
{
    require(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, "sparsify: epsilon must lie in (0, 1)");
    require(cfg.oversample > 0.0, "sparsify: oversample must be positive");
    SparsifyResult out;
    out.maps = maps;
    out.weights.assign(maps.size(), 1.0);
    out.kept_edges = static_cast<Index>(maps.size());
    const double n = static_cast<double>(std::max(g.n, 2));
    out.samples = static_cast<Index>(std::ceil(cfg.oversample * n * std::log(n) / (cfg.epsilon * cfg.epsilon)));
    if (out.samples >= static_cast<Index>(maps.size())) {
        out.laplacian = assemble_laplacian(g, maps);
        return out;
    }
    out.leverage = leverage_scores(g, maps, cfg);
    double total = 0.0;
    for (double t : out.leverage) {
        total += std::max(t, 0.0);
    }
    if (!(total > 0.0)) {
        out.laplacian = assemble_laplacian(g, maps);
        return out;
    }
    std::vector<double> prob(maps.size());
    for (std::size_t e = 0; e < maps.size(); ++e) {
        prob[e] = std::max(out.leverage[e], 0.0) / total;
    }
    std::mt19937_64 rng(cfg.seed);
    std::discrete_distribution<std::size_t> pick(prob.begin(), prob.end());
    std::vector<Index> count(maps.size(), 0);
    for (Index s = 0; s < out.samples; ++s) {
        ++count[pick(rng)];
    }
    out.kept_edges = 0;
    for (std::size_t e = 0; e < maps.size(); ++e) {
        out.weights[e] = count[e] > 0 ? static_cast<double>(count[e]) / (static_cast<double>(out.samples) * prob[e]) : 0.0;
        out.kept_edges += count[e] > 0 ? 1 : 0;
    }
    out.sampled = true;
    out.maps = reweight(maps, out.weights);
    out.laplacian = assemble_laplacian(g, out.maps);
    return out;
}

/// Writes the nonzero entries of L in MatrixMarket coordinate format (1-based).
inline void write_coordinate(const SheafLaplacian& L, std::ostream& os)
{
    std::vector<std::tuple<Index, Index, double>> entries;
    auto emit = [&](Index r0, Index c0, const Matrix& blk) {
        for (Index a = 0; a < blk.rows(); ++a) {
            for (Index b = 0; b < blk.cols(); ++b) {
                if (blk(a, b) != 0.0) {
                    entries.emplace_back(r0 + a, c0 + b, blk(a, b));
                }
            }
        }
    };
    for (int i = 0; i < L.n; ++i) {
        emit(static_cast<Index>(i) * L.d, static_cast<Index>(i) * L.d, L.diag[i]);
    }
    for (std::size_t e = 0; e < L.edges.size(); ++e) {
        const Index a = static_cast<Index>(L.edges[e].first) * L.d;
        const Index b = static_cast<Index>(L.edges[e].second) * L.d;
        emit(a, b, L.upper[e]);
        emit(b, a, L.upper[e].transpose());
    }
    std::sort(entries.begin(), entries.end());
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << L.dim() << ' ' << L.dim() << ' ' << entries.size() << '\n';
    os << std::setprecision(17);
    for (const auto& [r, c, v] : entries) {
        os << r + 1 << ' ' << c + 1 << ' ' << v << '\n';
    }
}

} // namespace sgpc
