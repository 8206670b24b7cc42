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

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sgpc/calibration.hpp"
#include "sgpc/core.hpp"
#include "sgpc/diffusion.hpp"
#include "sgpc/graph.hpp"
#include "sgpc/ot_lift.hpp"
#include "sgpc/sheaf_laplacian.hpp"
#include "sgpc/spectral_opt.hpp"

namespace sgpc {

struct ModelConfig {
    LiftConfig lift;
    LiftVariant variant = LiftVariant::we_lift;
    DiffusionConfig diffusion;
    SparsifierConfig sparsifier;
    /// Variance of the noise added to the [I 0] mixer at initialization.
    double mix_init_var = 1e-3;

    int node_dim() const { return lift.p_lift; }
    int edge_dim() const { return lift.resolved_edge_dim(); }

    void validate() const
    {
        lift.validate();
        diffusion.validate();
        require(mix_init_var >= 0.0, "model: mix_init_var must be non-negative");
    }
};

/// Learnable state plus the fixed input projection.
struct ModelParams {
    /// d0 x p, fixed after initialization.
    Matrix W_proj;
    /// p x d_e; restriction maps are W_theta^T P and W_theta^T P^T.
    Matrix W_theta;
    /// Chebyshev mixing logits, one vector of Q + 1 entries per layer.
    std::vector<Vector> gamma;
    /// Per-layer channel mixer, p x 2p.
    std::vector<Matrix> W_mix;
    /// Classifier, C x p.
    Matrix W;
    std::uint64_t seed = 0;

    int layers() const { return static_cast<int>(W_mix.size()); }

    bool all_finite() const
    {
        bool ok = W_proj.allFinite() && W_theta.allFinite() && W.allFinite();
        for (const auto& g : gamma) {
            ok = ok && g.allFinite();
        }
        for (const auto& w : W_mix) {
            ok = ok && w.allFinite();
        }
        return ok;
    }
};

/// Gradients of the learnable blocks; W_proj has none.
struct ParamGrads {
    Matrix W_theta;
    std::vector<Vector> gamma;
    std::vector<Matrix> W_mix;
    Matrix W;

    static ParamGrads zeros_like(const ModelParams& p)
    {
        ParamGrads g;
        g.W_theta = Matrix::Zero(p.W_theta.rows(), p.W_theta.cols());
        for (const auto& v : p.gamma) {
            g.gamma.push_back(Vector::Zero(v.size()));
        }
        for (const auto& m : p.W_mix) {
            g.W_mix.push_back(Matrix::Zero(m.rows(), m.cols()));
        }
        g.W = Matrix::Zero(p.W.rows(), p.W.cols());
        return g;
    }

    bool all_finite() const
    {
        bool ok = W_theta.allFinite() && W.allFinite();
        for (const auto& v : gamma) {
            ok = ok && v.allFinite();
        }
        for (const auto& m : W_mix) {
            ok = ok && m.allFinite();
        }
        return ok;
    }
};

/// Visits each learnable block of params with the matching gradient block as
/// (name, param data, grad data, size). The order is fixed: W_theta, gamma per
/// layer, W_mix per layer, W.
template <typename Fn>
void for_each_block(ModelParams& p, const ParamGrads& g, Fn&& fn)
{
    fn(std::string("W_theta"), p.W_theta.data(), g.W_theta.data(), p.W_theta.size());
    for (std::size_t l = 0; l < p.gamma.size(); ++l) {
        fn("gamma[" + std::to_string(l) + "]", p.gamma[l].data(), g.gamma[l].data(), p.gamma[l].size());
    }
    for (std::size_t l = 0; l < p.W_mix.size(); ++l) {
        fn("W_mix[" + std::to_string(l) + "]", p.W_mix[l].data(), g.W_mix[l].data(), p.W_mix[l].size());
    }
    fn(std::string("W"), p.W.data(), g.W.data(), p.W.size());
}

/// Draw order from `seed`: W_proj (its own stream), then the mixer noise layer
/// by layer, then the classifier.
inline ModelParams init_params(int d0, int classes, const ModelConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    require(d0 >= 1 && classes >= 2, "init_params: need d0 >= 1 and at least two classes");
    const int p = cfg.node_dim();
    const int de = cfg.edge_dim();
    ModelParams out;
    out.seed = seed;
    out.W_proj = make_projection(d0, p, seed);
    // A plan's entries sum to one, so p * I gives maps of unit row scale.
    out.W_theta = static_cast<double>(p) * Matrix::Identity(p, de);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> mix_noise(0.0, std::sqrt(cfg.mix_init_var));
    for (int l = 0; l < cfg.diffusion.layers; ++l) {
        out.gamma.push_back(Vector::Zero(cfg.diffusion.Q + 1));
        Matrix m = Matrix::Zero(p, 2 * p);
        m.leftCols(p).setIdentity();
        for (Index k = 0; k < m.size(); ++k) {
            m.data()[k] += mix_noise(rng);
        }
        out.W_mix.push_back(std::move(m));
    }
    std::normal_distribution<double> cls(0.0, std::sqrt(2.0 / static_cast<double>(p + classes)));
    out.W = Matrix(classes, p);
    for (Index k = 0; k < out.W.size(); ++k) {
        out.W.data()[k] = cls(rng);
    }
    return out;
}

/// H W_proj rescaled to unit root-mean-square.
inline Matrix reduced_features(const Matrix& H, const Matrix& W_proj)
{
    require(H.cols() == W_proj.rows(), "reduced_features: feature width does not match projection");
    Matrix X = H * W_proj;
    const double rms = X.size() > 0 ? std::sqrt(X.squaredNorm() / static_cast<double>(X.size())) : 0.0;
    if (rms > 0.0) {
        X /= rms;
    }
    return X;
}

/// Quantities held fixed within an epoch: transport plans, the additive map
/// correction left by the spectral step, sparsifier weights, posterior
/// weights, the Chebyshev scale and the coupling norm.
struct EpochFrozen {
    const std::vector<Matrix>* plans = nullptr;
    /// Empty or one pair per edge.
    RestrictionSet correction;
    /// Empty for the exact SVR operator, otherwise one sampling weight per edge.
    std::vector<double> svr_weights;
    Vector kappa;
    Vector y_prior;
    double afm_scale = 1.0;
    double c_het = 0.0;
    /// KL term value; constant with respect to the parameters.
    double kl = 0.0;
    const std::vector<int>* train = nullptr;
};

struct LossWeights {
    double kl = 1.0;
    double spec = 1.0;
};

struct ForwardPass {
    RestrictionSet maps;
    SheafLaplacian L;
    NormalizedLaplacian normalized;
    /// Operator of the SVR branch; equal to L unless sparsified.
    SheafLaplacian L_svr;
    bool sparse = false;
    /// Stacked layer inputs; inputs[layers] is the final representation.
    std::vector<Vector> inputs;
    std::vector<Vector> svr;
    std::vector<Vector> afm;
    std::vector<std::vector<Vector>> cheb;
    std::vector<Matrix> pre;
    Matrix logits;
    Matrix probs;
    SpectralEstimates spectrum;
    SpecPenalty spec;
    double risk = 0.0;
    double loss = 0.0;
    int cg_iterations = 0;

    Matrix embedding(int p) const
    {
        return unstack_rows(inputs.back(), static_cast<Index>(L.n), p);
    }
};

/// Restriction maps for the current W_theta plus the frozen correction.
inline RestrictionSet current_maps(const ModelParams& params, const Graph& g, const ModelConfig& cfg,
                                   const EpochFrozen& frozen)
{
    static const std::vector<Matrix> none;
    const std::vector<Matrix>& plans = frozen.plans != nullptr ? *frozen.plans : none;
    require(cfg.variant == LiftVariant::scalar_edge || plans.size() == static_cast<std::size_t>(g.m()),
            "current_maps: one plan per edge required");
    if (cfg.variant == LiftVariant::scalar_edge) {
        require(cfg.node_dim() == cfg.edge_dim(), "current_maps: scalar_edge needs edge_dim == p_lift");
    }
    const RestrictionSet* corr = frozen.correction.size() == static_cast<std::size_t>(g.m()) ? &frozen.correction
                                                                                               : nullptr;
    return maps_from_plans(plans, params.W_theta, g.m(), cfg.variant, corr);
}

/// Risk, spectral penalty and total loss from the pass's predictions and
/// spectrum under the given frozen quantities.
inline void finish_loss(ForwardPass& fp, const Labels& labels, const EpochFrozen& frozen, const LossWeights& weights)
{
    require(frozen.train != nullptr, "forward: training mask missing");
    fp.risk = empirical_risk(labels, fp.probs, frozen.kappa, *frozen.train, frozen.y_prior);
    fp.spec = fp.spectrum.v2.size() > 0 ? spec_penalty(frozen.c_het, fp.spectrum.lambda2) : SpecPenalty{};
    fp.loss = fp.risk + weights.kl * frozen.kl + weights.spec * fp.spec.value;
}

/// Full forward pass, loss included. `with_spectrum` computes lambda2 of L
/// and the spectral penalty; without it the penalty is zero.
inline ForwardPass forward(const ModelParams& params, const Graph& g, const Matrix& X, const Labels& labels,
                           const EpochFrozen& frozen, const ModelConfig& cfg, const LossWeights& weights,
                           bool with_spectrum = true, const LanczosOptions& lanczos = {})
{
    const int p = cfg.node_dim();
    require(X.rows() == g.n && X.cols() == p, "forward: reduced features must be n x p_lift");
    require(frozen.kappa.size() == g.n, "forward: one kappa per node required");
    ForwardPass fp;
    fp.maps = current_maps(params, g, cfg, frozen);
    fp.L = assemble_laplacian(g, fp.maps);
    fp.normalized = normalized_laplacian(fp.L);
    fp.sparse = !frozen.svr_weights.empty();
    if (fp.sparse) {
        fp.L_svr = assemble_laplacian(g, reweight(fp.maps, frozen.svr_weights));
    }
    const SheafLaplacian& Ls = fp.sparse ? fp.L_svr : fp.L;
    std::unique_ptr<BlockJacobi> pre;
    if (cfg.diffusion.precondition) {
        pre = std::make_unique<BlockJacobi>(Ls, cfg.diffusion.dt);
    }

    const int layers = params.layers();
    fp.inputs.push_back(stack_rows(X));
    for (int l = 0; l < layers; ++l) {
        const Vector& z = fp.inputs.back();
        SolveStats stats;
        Vector s = shifted_solve(Ls, z, cfg.diffusion, nullptr, &stats, pre.get());
        fp.cg_iterations += stats.iterations;
        auto terms = chebyshev_terms(fp.normalized.op, frozen.afm_scale, z, static_cast<int>(params.gamma[l].size()) - 1);
        const Vector alpha = ChebyshevWeights{params.gamma[l]}.alpha();
        Vector a = Vector::Zero(z.size());
        for (std::size_t q = 0; q < terms.size(); ++q) {
            a += alpha[static_cast<Index>(q)] * terms[q];
        }
        const Matrix S = unstack_rows(s, g.n, p);
        const Matrix A = unstack_rows(a, g.n, p);
        Matrix cat(g.n, 2 * p);
        cat << S, A;
        Matrix pre_act = cat * params.W_mix[static_cast<std::size_t>(l)].transpose();
        fp.inputs.push_back(stack_rows(pre_act.cwiseMax(0.0)));
        fp.svr.push_back(std::move(s));
        fp.afm.push_back(std::move(a));
        fp.cheb.push_back(std::move(terms));
        fp.pre.push_back(std::move(pre_act));
    }
    const Matrix Z = unstack_rows(fp.inputs.back(), g.n, p);
    fp.logits = Z * params.W.transpose();
    fp.probs = softmax_rows(fp.logits);
    if (with_spectrum) {
        fp.spectrum = estimate_spectrum(fp.L, lanczos);
    }
    finish_loss(fp, labels, frozen, weights);
    return fp;
}

namespace detail {

/// Adds w * d(x^T A y)/dA to G for a symmetric block-sparse A, with A's
/// lower blocks tied to the upper ones.
inline void accumulate_outer(SheafLaplacian& G, const Vector& x, const Vector& y, double w)
{
    const int d = G.d;
    for (int i = 0; i < G.n; ++i) {
        const Index o = static_cast<Index>(i) * d;
        G.diag[static_cast<std::size_t>(i)].noalias() += w * x.segment(o, d) * y.segment(o, d).transpose();
    }
    for (std::size_t e = 0; e < G.edges.size(); ++e) {
        const Index oi = static_cast<Index>(G.edges[e].first) * d;
        const Index oj = static_cast<Index>(G.edges[e].second) * d;
        G.upper[e].noalias() += w * (x.segment(oi, d) * y.segment(oj, d).transpose() +
                                     y.segment(oi, d) * x.segment(oj, d).transpose());
    }
}

/// Adjoint of pinv_sqrt at a symmetric block: maps dLoss/dN to dLoss/dD
/// (Daleckii-Krein divided differences).
inline Matrix pinv_sqrt_adjoint(const Matrix& block, const Matrix& grad_out, double rel_tol = kPinvRelTol)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (block + block.transpose()));
    const Vector& lam = es.eigenvalues();
    const Matrix& U = es.eigenvectors();
    const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    const Index k = lam.size();
    Vector f = Vector::Zero(k);
    Vector df = Vector::Zero(k);
    for (Index a = 0; a < k; ++a) {
        if (top > 0.0 && lam[a] > rel_tol * top) {
            f[a] = 1.0 / std::sqrt(lam[a]);
            df[a] = -0.5 * f[a] / lam[a];
        }
    }
    Matrix F(k, k);
    for (Index a = 0; a < k; ++a) {
        for (Index b = 0; b < k; ++b) {
            const double gap = lam[a] - lam[b];
            if (std::abs(gap) > 1e-12 * std::max(top, 1e-300)) {
                F(a, b) = (f[a] - f[b]) / gap;
            } else {
                F(a, b) = 0.5 * (df[a] + df[b]);
            }
        }
    }
    const Matrix sym = 0.5 * (grad_out + grad_out.transpose());
    const Matrix inner = F.cwiseProduct(U.transpose() * sym * U);
    return U * inner * U.transpose();
}

/// dLoss/dL from dLoss/dLn for Ln = I - N L N with N the per-node D^{-1/2}.
inline void normalized_adjoint(const SheafLaplacian& L, const NormalizedLaplacian& norm, const SheafLaplacian& Gn,
                               SheafLaplacian& G)
{
    const auto& N = norm.inv_sqrt;
    std::vector<Matrix> gN(L.diag.size());
    for (std::size_t i = 0; i < L.diag.size(); ++i) {
        const Matrix& D = L.diag[i];
        const Matrix& Gd = Gn.diag[i];
        G.diag[i].noalias() -= N[i] * Gd * N[i];
        gN[i] = -(Gd * N[i] * D.transpose() + D.transpose() * N[i] * Gd);
    }
    for (std::size_t e = 0; e < L.edges.size(); ++e) {
        const auto i = static_cast<std::size_t>(L.edges[e].first);
        const auto j = static_cast<std::size_t>(L.edges[e].second);
        const Matrix& U = L.upper[e];
        const Matrix& Gu = Gn.upper[e];
        G.upper[e].noalias() -= N[i] * Gu * N[j];
        gN[i].noalias() -= Gu * N[j] * U.transpose();
        gN[j].noalias() -= U.transpose() * N[i] * Gu;
    }
    for (std::size_t i = 0; i < L.diag.size(); ++i) {
        G.diag[i] += pinv_sqrt_adjoint(L.diag[i], gN[i]);
    }
}

/// dLoss/dR for L assembled from maps, given dLoss/dL in block form.
inline RestrictionSet laplacian_adjoint(const Graph& g, const RestrictionSet& maps, const SheafLaplacian& G)
{
    RestrictionSet out = maps;
    for (std::size_t e = 0; e < maps.size(); ++e) {
        const auto i = static_cast<std::size_t>(g.edges[e].first);
        const auto j = static_cast<std::size_t>(g.edges[e].second);
        const Matrix& rs = maps.src[e];
        const Matrix& rd = maps.dst[e];
        out.src[e] = rs * (G.diag[i] + G.diag[i].transpose()) - rd * G.upper[e].transpose();
        out.dst[e] = rd * (G.diag[j] + G.diag[j].transpose()) - rs * G.upper[e];
    }
    return out;
}

} // namespace detail

struct BackwardStats {
    int cg_iterations = 0;
};

/// Reverse-mode gradient of fp.loss with frozen quantities held constant.
inline ParamGrads backward(const ModelParams& params, const Graph& g, const Labels& labels, const EpochFrozen& frozen,
                           const ModelConfig& cfg, const LossWeights& weights, const ForwardPass& fp,
                           BackwardStats* stats = nullptr)
{
    const int p = cfg.node_dim();
    const int layers = params.layers();
    ParamGrads grads = ParamGrads::zeros_like(params);
    const std::vector<int>& train = *frozen.train;
    const double inv_m = 1.0 / static_cast<double>(train.size());

    Matrix d_probs = Matrix::Zero(fp.probs.rows(), fp.probs.cols());
    for (int i : train) {
        const int y = labels.y[static_cast<std::size_t>(i)];
        const double k = frozen.kappa[i];
        const double f = k * fp.probs(i, y) + (1.0 - k) * frozen.y_prior[y];
        d_probs(i, y) = -k * inv_m / std::max(f, 1e-300);
    }
    Matrix d_logits(fp.probs.rows(), fp.probs.cols());
    for (Index i = 0; i < fp.probs.rows(); ++i) {
        const double inner = fp.probs.row(i).dot(d_probs.row(i));
        d_logits.row(i) = fp.probs.row(i).cwiseProduct(d_probs.row(i) - Matrix::Constant(1, fp.probs.cols(), inner));
    }
    const Matrix Z = unstack_rows(fp.inputs.back(), g.n, p);
    grads.W = d_logits.transpose() * Z;
    Matrix dZ = d_logits * params.W;

    SheafLaplacian gL = SheafLaplacian::zeros_like(fp.L);
    SheafLaplacian gLn = SheafLaplacian::zeros_like(fp.L);
    SheafLaplacian gLs = SheafLaplacian::zeros_like(fp.L);
    const SheafLaplacian& Ls = fp.sparse ? fp.L_svr : fp.L;
    std::unique_ptr<BlockJacobi> pre;
    if (cfg.diffusion.precondition) {
        pre = std::make_unique<BlockJacobi>(Ls, cfg.diffusion.dt);
    }
    const double c = frozen.afm_scale;

    for (int l = layers - 1; l >= 0; --l) {
        const auto ls = static_cast<std::size_t>(l);
        const Matrix d_pre = dZ.cwiseProduct((fp.pre[ls].array() > 0.0).cast<double>().matrix());
        Matrix cat(g.n, 2 * p);
        cat << unstack_rows(fp.svr[ls], g.n, p), unstack_rows(fp.afm[ls], g.n, p);
        grads.W_mix[ls] = d_pre.transpose() * cat;
        const Matrix d_cat = d_pre * params.W_mix[ls];

        // Diffusion branch: s = (I + dt L)^{-1} z.
        const Vector d_s = stack_rows(d_cat.leftCols(p));
        SolveStats st;
        const Vector u = shifted_solve(Ls, d_s, cfg.diffusion, nullptr, &st, pre.get());
        if (stats != nullptr) {
            stats->cg_iterations += st.iterations;
        }
        detail::accumulate_outer(gLs, u, fp.svr[ls], -cfg.diffusion.dt);
        Vector dz = u;

        // Chebyshev branch, recurrence reversed.
        const Vector d_a = stack_rows(d_cat.rightCols(p));
        const auto& t = fp.cheb[ls];
        const Vector alpha = ChebyshevWeights{params.gamma[ls]}.alpha();
        const int Q = static_cast<int>(t.size()) - 1;
        Vector d_alpha(Q + 1);
        std::vector<Vector> dt(t.size());
        for (int q = 0; q <= Q; ++q) {
            d_alpha[q] = d_a.dot(t[static_cast<std::size_t>(q)]);
            dt[static_cast<std::size_t>(q)] = alpha[q] * d_a;
        }
        for (int q = Q; q >= 2; --q) {
            const auto qs = static_cast<std::size_t>(q);
            dt[qs - 1] += 2.0 * c * (fp.normalized.op * dt[qs]);
            dt[qs - 2] -= dt[qs];
            detail::accumulate_outer(gLn, dt[qs], t[qs - 1], 2.0 * c);
        }
        if (Q >= 1) {
            dt[0] += c * (fp.normalized.op * dt[1]);
            detail::accumulate_outer(gLn, dt[1], t[0], c);
        }
        dz += dt[0];
        grads.gamma[ls] = alpha.cwiseProduct(d_alpha - Vector::Constant(Q + 1, alpha.dot(d_alpha)));
        dZ = unstack_rows(dz, g.n, p);
    }

    if (!fp.spec.floored && weights.spec != 0.0 && fp.spectrum.v2.size() == fp.L.dim()) {
        const double l2 = fp.spec.lambda2;
        detail::accumulate_outer(gL, fp.spectrum.v2, fp.spectrum.v2, -weights.spec * frozen.c_het / (l2 * l2));
    }
    detail::normalized_adjoint(fp.L, fp.normalized, gLn, gL);

    RestrictionSet gR = detail::laplacian_adjoint(g, fp.maps, gL);
    if (fp.sparse) {
        const RestrictionSet sparse_maps = reweight(fp.maps, frozen.svr_weights);
        RestrictionSet gRs = detail::laplacian_adjoint(g, sparse_maps, gLs);
        for (std::size_t e = 0; e < gR.size(); ++e) {
            const double s = std::sqrt(frozen.svr_weights[e]);
            gR.src[e] += s * gRs.src[e];
            gR.dst[e] += s * gRs.dst[e];
        }
    } else {
        RestrictionSet gRs = detail::laplacian_adjoint(g, fp.maps, gLs);
        for (std::size_t e = 0; e < gR.size(); ++e) {
            gR.src[e] += gRs.src[e];
            gR.dst[e] += gRs.dst[e];
        }
    }
    if (cfg.variant != LiftVariant::scalar_edge) {
        const auto& plans = *frozen.plans;
        for (std::size_t e = 0; e < gR.size(); ++e) {
            grads.W_theta.noalias() += plans[e] * gR.src[e].transpose() + plans[e].transpose() * gR.dst[e].transpose();
        }
    }
    return grads;
}

} // namespace sgpc
