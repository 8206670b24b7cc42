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
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sgpc/core.hpp"
#include "sgpc/graph.hpp"
#include "sgpc/sheaf_laplacian.hpp"

namespace sgpc {

struct LiftConfig {
    double eps = 1.0;
    double tau = 1.0;
    /// l1 tolerance on the row-marginal violation.
    double sinkhorn_tol = 1e-9;
    int sinkhorn_max_iter = 10000;
    int p_lift = 16;
    /// Edge stalk dimension; 0 means equal to p_lift.
    int edge_dim = 0;
    /// Mass added to every bin before normalizing a feature row.
    double floor = 1e-6;

    int resolved_edge_dim() const { return edge_dim > 0 ? edge_dim : p_lift; }

    void validate() const
    {
        require(eps > 0.0, "lift: eps must be positive");
        require(tau > 0.0, "lift: tau must be positive");
        require(sinkhorn_tol > 0.0, "lift: sinkhorn tolerance must be positive");
        require(sinkhorn_max_iter > 0, "lift: sinkhorn_max_iter must be positive");
        require(p_lift >= 2, "lift: p_lift must be at least 2");
        require(edge_dim >= 0, "lift: edge_dim must be non-negative");
    }
};

/// How restriction maps are produced. The two ablations drop the refinement
/// step or the transport plan altogether.
enum class LiftVariant { we_lift, sinkhorn_only, scalar_edge };

inline std::string to_string(LiftVariant v)
{
    switch (v) {
    case LiftVariant::we_lift:
        return "we_lift";
    case LiftVariant::sinkhorn_only:
        return "sinkhorn_only";
    case LiftVariant::scalar_edge:
        return "scalar_edge";
    }
    return "unknown";
}

inline LiftVariant lift_variant_from_string(const std::string& s)
{
    if (s == "we_lift") {
        return LiftVariant::we_lift;
    }
    if (s == "sinkhorn_only") {
        return LiftVariant::sinkhorn_only;
    }
    if (s == "scalar_edge") {
        return LiftVariant::scalar_edge;
    }
    throw InvalidInput("unknown lift variant '" + s + "' (expected we_lift, sinkhorn_only or scalar_edge)");
}

struct TransportPlan {
    Matrix P;
    Vector mu;
    Vector nu;
    int iterations = 0;
    /// ||P 1 - mu||_1 at exit; column marginals are exact after the last half-step.
    double violation = 0.0;
};

/// Squared distance between canonical basis vectors: 0 on the diagonal, 2 elsewhere.
inline Matrix feature_cost_matrix(int p)
{
    require(p >= 1, "feature_cost_matrix: p must be positive");
    return 2.0 * (Matrix::Ones(p, p) - Matrix::Identity(p, p));
}

/// Clamps negatives to zero, adds `floor` to every entry and rescales to unit mass.
inline Vector normalize_to_measure(const Vector& h, double floor = 1e-6)
{
    require(h.allFinite(), "normalize_to_measure: non-finite input");
    Vector m = h.cwiseMax(0.0).array() + floor;
    const double s = m.sum();
    if (!(s > 0.0)) {
        return Vector::Constant(h.size(), 1.0 / static_cast<double>(h.size()));
    }
    return m / s;
}

namespace detail {

inline double log_sum_exp(const Vector& v)
{
    const double top = v.maxCoeff();
    if (!std::isfinite(top)) {
        return top;
    }
    return top + std::log((v.array() - top).exp().sum());
}

} // namespace detail

/// Log-domain Sinkhorn scaling for the kernel exp(log_kernel).
inline TransportPlan sinkhorn_log_kernel(const Vector& mu, const Vector& nu, const Matrix& log_kernel,
                                         const LiftConfig& cfg)
{
    const Index p = mu.size();
    require(nu.size() == p && log_kernel.rows() == p && log_kernel.cols() == p, "sinkhorn: size mismatch");
    require((mu.array() > 0.0).all() && (nu.array() > 0.0).all(), "sinkhorn: marginals must be strictly positive");
    const Vector log_mu = mu.array().log();
    const Vector log_nu = nu.array().log();
    Vector f = Vector::Zero(p);
    Vector g = Vector::Zero(p);
    TransportPlan out;
    out.mu = mu;
    out.nu = nu;
    Vector tmp(p);
    for (int it = 1; it <= cfg.sinkhorn_max_iter; ++it) {
        for (Index i = 0; i < p; ++i) {
            tmp = log_kernel.row(i).transpose() + g;
            f[i] = log_mu[i] - detail::log_sum_exp(tmp);
        }
        for (Index j = 0; j < p; ++j) {
            tmp = log_kernel.col(j) + f;
            g[j] = log_nu[j] - detail::log_sum_exp(tmp);
        }
        out.P = (log_kernel.colwise() + f).rowwise() + g.transpose();
        out.P = out.P.array().exp();
        out.iterations = it;
        out.violation = (out.P.rowwise().sum() - mu).lpNorm<1>();
        if (out.violation <= cfg.sinkhorn_tol) {
            return out;
        }
    }
    throw NumericalFailure("sinkhorn: no convergence after " + std::to_string(cfg.sinkhorn_max_iter) +
                           " iterations, marginal violation " + std::to_string(out.violation));
}

/// Entropic OT plan P = diag(u) exp(-C / eps) diag(v) with marginals mu, nu.
inline TransportPlan sinkhorn(const Vector& mu, const Vector& nu, const Matrix& cost, const LiftConfig& cfg)
{
    return sinkhorn_log_kernel(mu, nu, -cost / cfg.eps, cfg);
}

/// <P, C> + eps * sum P log P.
inline double entropic_objective(const Matrix& P, const Matrix& cost, double eps)
{
    double ent = 0.0;
    for (Index k = 0; k < P.size(); ++k) {
        const double v = P.data()[k];
        ent += v > 0.0 ? v * std::log(v) : 0.0;
    }
    return P.cwiseProduct(cost).sum() + eps * ent;
}

/// Entropic objective plus the proximal term KL(P || P0) / tau.
inline double proximal_objective(const Matrix& P, const Matrix& P0, const Matrix& cost, double eps, double tau)
{
    double kl = 0.0;
    for (Index k = 0; k < P.size(); ++k) {
        const double v = P.data()[k];
        kl += v > 0.0 ? v * std::log(v / P0.data()[k]) - v + P0.data()[k] : P0.data()[k];
    }
    return entropic_objective(P, cost, eps) + kl / tau;
}

/// One KL-proximal step from P0 on the entropic objective, keeping the
/// marginals of P0. The minimizer is a Sinkhorn scaling of
/// P0^{1/(1+eps tau)} * exp(-tau C / (1 + eps tau)).
inline TransportPlan jko_refine(const TransportPlan& P0, const Matrix& cost, const LiftConfig& cfg)
{
    require((P0.P.array() > 0.0).all(), "jko_refine: reference plan must be strictly positive");
    const double denom = 1.0 + cfg.eps * cfg.tau;
    const Matrix log_kernel = (P0.P.array().log() - cfg.tau * cost.array()) / denom;
    return sinkhorn_log_kernel(P0.mu, P0.nu, log_kernel, cfg);
}

/// Fixed Gaussian projection d0 -> p with entries N(0, 1/d0).
inline Matrix make_projection(int d0, int p, std::uint64_t seed)
{
    require(d0 >= 1 && p >= 1, "make_projection: dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d0)));
    Matrix w(d0, p);
    for (Index r = 0; r < w.rows(); ++r) {
        for (Index c = 0; c < w.cols(); ++c) {
            w(r, c) = normal(rng);
        }
    }
    return w;
}

/// Plan between two already-reduced feature rows.
inline TransportPlan edge_plan(const Vector& x_i, const Vector& x_j, const Matrix& cost, const LiftConfig& cfg,
                               LiftVariant variant)
{
    const Vector mu = normalize_to_measure(x_i, cfg.floor);
    const Vector nu = normalize_to_measure(x_j, cfg.floor);
    TransportPlan p0 = sinkhorn(mu, nu, cost, cfg);
    if (variant == LiftVariant::sinkhorn_only) {
        return p0;
    }
    return jko_refine(p0, cost, cfg);
}

struct MapPair {
    Matrix src;
    Matrix dst;
};

inline MapPair maps_from_plan(const Matrix& plan, const Matrix& W_theta)
{
    return {W_theta.transpose() * plan, W_theta.transpose() * plan.transpose()};
}

/// Restriction maps of one edge from raw feature rows: (W^T P, W^T P^T).
inline MapPair lift_edge(const Vector& h_i, const Vector& h_j, const Matrix& W_proj, const Matrix& W_theta,
                         const LiftConfig& cfg, LiftVariant variant = LiftVariant::we_lift)
{
    cfg.validate();
    require(W_proj.cols() == cfg.p_lift && W_theta.rows() == cfg.p_lift, "lift_edge: projection shape mismatch");
    const Matrix cost = feature_cost_matrix(cfg.p_lift);
    if (variant == LiftVariant::scalar_edge) {
        const Matrix eye = Matrix::Identity(W_theta.cols(), cfg.p_lift);
        return {eye, eye};
    }
    const Vector xi = W_proj.transpose() * h_i;
    const Vector xj = W_proj.transpose() * h_j;
    return maps_from_plan(edge_plan(xi, xj, cost, cfg, variant).P, W_theta);
}

struct LiftResult {
    /// One p_lift x p_lift plan per edge; empty for the scalar-edge ablation.
    std::vector<Matrix> plans;
    RestrictionSet maps;
};

/// Per-edge plans for reduced features X (n x p_lift). Each edge is
/// independent and written to its own slot.
inline std::vector<Matrix> lift_plans(const Graph& g, const Matrix& X, const LiftConfig& cfg, LiftVariant variant)
{
    cfg.validate();
    require(X.cols() == cfg.p_lift && X.rows() == g.n, "lift_plans: reduced features must be n x p_lift");
    std::vector<Matrix> plans(static_cast<std::size_t>(g.m()));
    if (variant == LiftVariant::scalar_edge) {
        return {};
    }
    const Matrix cost = feature_cost_matrix(cfg.p_lift);
    std::string failures;
    int failed = 0;
    for (int e = 0; e < g.m(); ++e) {
        const auto [i, j] = g.edges[static_cast<std::size_t>(e)];
        try {
            plans[static_cast<std::size_t>(e)] =
                edge_plan(X.row(i).transpose(), X.row(j).transpose(), cost, cfg, variant).P;
        } catch (const NumericalFailure& err) {
            if (++failed <= 3) {
                failures += " edge " + std::to_string(e) + ": " + err.what() + ";";
            }
        }
    }
    if (failed > 0) {
        throw NumericalFailure("lift: " + std::to_string(failed) + " edge(s) failed:" + failures);
    }
    return plans;
}

/// Restriction maps W^T P and W^T P^T from precomputed plans, optionally
/// plus a per-edge additive correction.
inline RestrictionSet maps_from_plans(const std::vector<Matrix>& plans, const Matrix& W_theta, int m,
                                      LiftVariant variant, const RestrictionSet* correction = nullptr)
{
    RestrictionSet out;
    out.node_dim = static_cast<int>(W_theta.rows());
    out.edge_dim = static_cast<int>(W_theta.cols());
    out.src.resize(static_cast<std::size_t>(m));
    out.dst.resize(static_cast<std::size_t>(m));
    for (std::size_t e = 0; e < static_cast<std::size_t>(m); ++e) {
        if (variant == LiftVariant::scalar_edge) {
            out.src[e] = Matrix::Identity(out.edge_dim, out.node_dim);
            out.dst[e] = out.src[e];
        } else {
            out.src[e] = W_theta.transpose() * plans[e];
            out.dst[e] = W_theta.transpose() * plans[e].transpose();
        }
        if (correction != nullptr && correction->size() == static_cast<std::size_t>(m)) {
            out.src[e] += correction->src[e];
            out.dst[e] += correction->dst[e];
        }
    }
    return out;
}

inline LiftResult lift_all_edges(const Graph& g, const Matrix& H, const Matrix& W_proj, const Matrix& W_theta,
                                 const LiftConfig& cfg, LiftVariant variant = LiftVariant::we_lift)
{
    require(H.rows() == g.n && H.cols() == W_proj.rows(), "lift_all_edges: feature/projection shape mismatch");
    require(W_theta.rows() == cfg.p_lift, "lift_all_edges: W_theta must have p_lift rows");
    LiftResult out;
    out.plans = lift_plans(g, H * W_proj, cfg, variant);
    out.maps = maps_from_plans(out.plans, W_theta, g.m(), variant);
    return out;
}

} // namespace sgpc
