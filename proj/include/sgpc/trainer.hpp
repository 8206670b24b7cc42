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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sgpc/calibration.hpp"
#include "sgpc/core.hpp"
#include "sgpc/graph.hpp"
#include "sgpc/model.hpp"
#include "sgpc/spectral_opt.hpp"

namespace sgpc {

struct TrainConfig {
    double lambda_kl = 0.3;
    double lambda_spec = 0.3;
    /// "adam" or "sgd".
    std::string optimizer = "adam";
    double lr = 1e-3;
    double weight_decay = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 200;
    int patience = 30;
    /// Training aborts when the empirical risk exceeds this value.
    double divergence = 1e6;
    /// Finite-difference check of a sample of gradient entries in the first epoch.
    bool fd_check = false;
    /// Record wall-clock time per epoch; off keeps curve files reproducible.
    bool timing = false;

    void validate() const
    {
        require(lambda_kl >= 0.0 && lambda_spec >= 0.0, "train: loss weights must be non-negative");
        require(optimizer == "adam" || optimizer == "sgd", "train: optimizer must be adam or sgd");
        require(lr >= 0.0 && weight_decay >= 0.0, "train: lr and weight_decay must be non-negative");
        require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "train: adam betas must lie in [0, 1)");
        require(adam_eps > 0.0, "train: adam_eps must be positive");
        require(epochs >= 0 && patience >= 1, "train: epochs must be >= 0 and patience >= 1");
        require(divergence > 0.0, "train: divergence threshold must be positive");
    }
};

/// Every knob of one run.
struct SgpcConfig {
    ModelConfig model;
    CalibrationConfig calib;
    WolfeConfig wolfe;
    TrainConfig train;
    std::uint64_t seed = 0;
    int per_class = 20;
    double val_share = 1.0 / 3.0;

    void validate() const
    {
        model.validate();
        calib.validate();
        wolfe.validate();
        train.validate();
        require(per_class >= 1, "split: per_class must be positive");
        require(val_share >= 0.0 && val_share <= 1.0, "split: val_share must lie in [0, 1]");
    }
};

struct EpochReport {
    int epoch = 0;
    /// Calibrated training cross-entropy divided by ln C, clipped at 1.
    double emp_risk = 0.0;
    double raw_risk = 0.0;
    double kl = 0.0;
    double spec = 0.0;
    /// emp_risk + kl + spec with unit weights.
    double bound = 0.0;
    double loss = 0.0;
    double lambda2 = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    double ece = 0.0;
    /// Normalized calibrated risk on the test nodes.
    double test_risk = 0.0;
    int cg_iterations = 0;
    double wall_ms = 0.0;
    double gap_before = 0.0;
    double gap_after = 0.0;
    int spectral_accepted = 0;
    int posterior_sweeps = 0;
    bool spec_floored = false;
};

inline double total_loss(double emp_risk, double kl, double spec, const TrainConfig& cfg)
{
    return emp_risk + cfg.lambda_kl * kl + cfg.lambda_spec * spec;
}

inline double pac_bayes_bound(double emp_risk, double kl, double spec)
{
    return emp_risk + kl + spec;
}

/// Adam or plain gradient descent with L2 weight decay folded into the gradient.
class Optimizer {
public:
    Optimizer() = default;
    explicit Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}

    void step(ModelParams& params, const ParamGrads& grads)
    {
        ++steps_;
        const bool adam = cfg_.optimizer == "adam";
        std::size_t slot = 0;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, steps_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, steps_);
        for_each_block(params, grads, [&](const std::string&, double* x, const double* g, Index n) {
            if (m_.size() <= slot) {
                m_.push_back(Vector::Zero(n));
                v_.push_back(Vector::Zero(n));
            }
            Vector& m = m_[slot];
            Vector& v = v_[slot];
            for (Index k = 0; k < n; ++k) {
                const double gk = g[k] + cfg_.weight_decay * x[k];
                if (adam) {
                    m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gk;
                    v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gk * gk;
                    x[k] -= cfg_.lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg_.adam_eps);
                } else {
                    x[k] -= cfg_.lr * gk;
                }
            }
            ++slot;
        });
    }

    int steps() const { return steps_; }

private:
    TrainConfig cfg_;
    int steps_ = 0;
    std::vector<Vector> m_;
    std::vector<Vector> v_;
};

/// Everything carried from one epoch to the next.
struct TrainState {
    ModelParams params;
    Matrix X;
    std::vector<Matrix> plans;
    /// Additive map correction left by the spectral step; empty at start.
    RestrictionSet correction;
    std::vector<EdgeBeta> prior;
    PosteriorState posterior;
    GapState gap;
    Optimizer optimizer;
    Vector y_prior;
    int epoch = 0;
};

inline TrainState init_state(const Dataset& ds, const SgpcConfig& cfg)
{
    cfg.validate();
    TrainState st;
    st.params = init_params(ds.features.d0(), ds.labels.C, cfg.model, cfg.seed);
    st.X = reduced_features(ds.features.H, st.params.W_proj);
    st.plans = lift_plans(ds.graph, st.X, cfg.model.lift, cfg.model.variant);
    st.prior = init_prior(ds.graph.m(), cfg.calib.a0, cfg.calib.b0);
    st.posterior = PosteriorState::from_prior(st.prior);
    st.optimizer = Optimizer(cfg.train);
    st.y_prior = Vector::Constant(ds.labels.C, 1.0 / ds.labels.C);
    return st;
}

inline double accuracy(const Matrix& probs, const Labels& labels, const std::vector<int>& mask)
{
    if (mask.empty()) {
        return 0.0;
    }
    int hits = 0;
    for (int i : mask) {
        hits += argmax_row(probs, i) == labels.y[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(mask.size());
}

/// Frozen quantities for the current state; kappa and c_het come from the
/// state's posterior.
inline EpochFrozen make_frozen(const TrainState& st, const Dataset& ds, const SplitMask& split, const SgpcConfig& cfg)
{
    EpochFrozen fz;
    fz.plans = &st.plans;
    fz.correction = st.correction;
    fz.kappa = node_kappa(st.posterior, ds.graph, cfg.calib.prior_mean());
    fz.y_prior = st.y_prior;
    fz.c_het = class_coupling(st.posterior.kappas(), ds.labels, ds.graph, split.train).c_het;
    fz.kl = kl_term(st.posterior, st.prior, static_cast<int>(split.train.size()), cfg.calib.delta);
    fz.train = &split.train;
    // L <= 2 D for any assembled sheaf Laplacian, so the normalized operator
    // has spectrum in [-1, 1] and the Chebyshev scale is exactly 1.
    fz.afm_scale = 1.0;
    if (cfg.model.diffusion.use_sparsifier) {
        const RestrictionSet maps = current_maps(st.params, ds.graph, cfg.model, fz);
        SparsifierConfig sc = cfg.model.sparsifier;
        sc.seed = cfg.model.sparsifier.seed + static_cast<std::uint64_t>(st.epoch);
        SparsifyResult sr = sparsify(ds.graph, maps, sc);
        if (sr.sampled) {
            fz.svr_weights = sr.weights;
        }
    }
    return fz;
}

namespace detail {

/// Orthogonal Q minimizing ||Q [src dst] - [src_ref dst_ref]||_F; the
/// Laplacian is invariant under this edge-stalk rotation.
inline MapPair align_to(const Matrix& src, const Matrix& dst, const Matrix& src_ref, const Matrix& dst_ref)
{
    Matrix a(src.rows(), src.cols() + dst.cols());
    Matrix b(src.rows(), src.cols() + dst.cols());
    a << src, dst;
    b << src_ref, dst_ref;
    Eigen::JacobiSVD<Matrix> svd(b * a.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix Q = svd.matrixU() * svd.matrixV().transpose();
    return {Q * src, Q * dst};
}

} // namespace detail

struct GradCheckBlock {
    std::string name;
    double rel_error = 0.0;
    double fd_norm = 0.0;
    Index checked = 0;
};

/// Central differences of the loss against backward() on every block. With
/// max_per_block > 0 only that many seeded coordinates per block are checked.
inline std::vector<GradCheckBlock> grad_check(const ModelParams& params, const Graph& g, const Matrix& X,
                                              const Labels& labels, const EpochFrozen& frozen, const ModelConfig& cfg,
                                              const LossWeights& weights, double h = 1e-4, Index max_per_block = 0,
                                              std::uint64_t seed = 1)
{
    const ForwardPass fp = forward(params, g, X, labels, frozen, cfg, weights);
    const ParamGrads grads = backward(params, g, labels, frozen, cfg, weights, fp);
    ModelParams probe = params;
    std::mt19937_64 rng(seed);
    std::vector<GradCheckBlock> out;
    for_each_block(probe, grads, [&](const std::string& name, double* x, const double* gr, Index n) {
        std::vector<Index> coords(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) {
            coords[static_cast<std::size_t>(k)] = k;
        }
        if (max_per_block > 0 && n > max_per_block) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(static_cast<std::size_t>(max_per_block));
        }
        Vector fd(static_cast<Index>(coords.size()));
        Vector an(static_cast<Index>(coords.size()));
        for (std::size_t c = 0; c < coords.size(); ++c) {
            const Index k = coords[c];
            const double orig = x[k];
            x[k] = orig + h;
            const double up = forward(probe, g, X, labels, frozen, cfg, weights).loss;
            x[k] = orig - h;
            const double down = forward(probe, g, X, labels, frozen, cfg, weights).loss;
            x[k] = orig;
            fd[static_cast<Index>(c)] = (up - down) / (2.0 * h);
            an[static_cast<Index>(c)] = gr[k];
        }
        GradCheckBlock b;
        b.name = name;
        b.fd_norm = fd.norm();
        b.rel_error = (fd - an).norm() / std::max({fd.norm(), an.norm(), 1e-8});
        b.checked = static_cast<Index>(coords.size());
        out.push_back(b);
    });
    return out;
}

/// One epoch in stage order: (1) lift and assemble, (2) forward pass,
/// (3) posterior update, (4) loss, parameter update, spectral ascent with
/// projection, and reassembly of the maps.
inline EpochReport train_epoch(TrainState& st, const Dataset& ds, const SplitMask& split, const SgpcConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    const Graph& g = ds.graph;
    const Labels& labels = ds.labels;
    const LossWeights weights{cfg.train.lambda_kl, cfg.train.lambda_spec};
    EpochReport rep;
    rep.epoch = st.epoch;

    // (1) Maps and operators for the current parameters.
    EpochFrozen fz = make_frozen(st, ds, split, cfg);

    // (2) Forward pass.
    ForwardPass fp = forward(st.params, g, st.X, labels, fz, cfg.model, weights, true, cfg.wolfe.lanczos);

    // (3) Posterior fixed point from this epoch's predictions.
    PosteriorState post = posterior_update(st.posterior, fp.probs, g, labels, split.train,
                                           static_cast<double>(st.params.layers()), cfg.calib);
    fz.kappa = node_kappa(post, g, cfg.calib.prior_mean());
    fz.c_het = class_coupling(post.kappas(), labels, g, split.train).c_het;
    fz.kl = kl_term(post, st.prior, static_cast<int>(split.train.size()), cfg.calib.delta);
    finish_loss(fp, labels, fz, weights);

    // (4) Loss, gradient step, spectral ascent, reassembly.
    if (!(fp.risk <= cfg.train.divergence)) {
        throw NumericalFailure("training diverged at epoch " + std::to_string(st.epoch) + ": empirical risk " +
                               std::to_string(fp.risk));
    }
    BackwardStats bstats;
    const ParamGrads grads = backward(st.params, g, labels, fz, cfg.model, weights, fp, &bstats);
    if (!grads.all_finite()) {
        throw NumericalFailure("non-finite gradient at epoch " + std::to_string(st.epoch) + " (loss " +
                               std::to_string(fp.loss) + ", lambda2 " + std::to_string(fp.spectrum.lambda2) + ")");
    }
    if (cfg.train.fd_check && st.epoch == 0) {
        for (const auto& b : grad_check(st.params, g, st.X, labels, fz, cfg.model, weights, 1e-4, 8, cfg.seed)) {
            if (!(b.rel_error <= 1e-4)) {
                throw NumericalFailure("gradient check failed on " + b.name + ": relative error " +
                                       std::to_string(b.rel_error));
            }
        }
    }
    st.optimizer.step(st.params, grads);

    rep.gap_before = fp.spectrum.lambda2;
    rep.gap_after = fp.spectrum.lambda2;
    if (cfg.wolfe.K > 0 && cfg.model.variant != LiftVariant::scalar_edge && g.m() > 0) {
        EpochFrozen lifted = fz;
        const RestrictionSet maps = current_maps(st.params, g, cfg.model, lifted);
        SheafLaplacian L = assemble_laplacian(g, maps);
        SpectralEstimates est = estimate_spectrum(L, cfg.wolfe.lanczos);
        rep.gap_before = est.lambda2;
        if (st.gap.lambda2_history.empty()) {
            st.gap.record(est.lambda2);
        }
        for (int k = 0; k < cfg.wolfe.K; ++k) {
            AscentStep step = wolfe_ascent_step(L, cfg.wolfe, &est);
            if (!step.accepted) {
                break;
            }
            L = std::move(step.L);
            est = std::move(step.estimates);
            ++rep.spectral_accepted;
        }
        rep.gap_after = est.lambda2;
        st.gap.record(est.lambda2);
        st.gap.v2 = est.v2;
        if (rep.spectral_accepted > 0) {
            const RestrictionSet rebuilt = reassemble_restrictions(L, maps.edge_dim, &maps);
            EpochFrozen bare = fz;
            bare.correction = RestrictionSet{};
            const RestrictionSet base = current_maps(st.params, g, cfg.model, bare);
            RestrictionSet corr = base;
            for (std::size_t e = 0; e < base.size(); ++e) {
                const MapPair a = detail::align_to(rebuilt.src[e], rebuilt.dst[e], maps.src[e], maps.dst[e]);
                corr.src[e] = a.src - base.src[e];
                corr.dst[e] = a.dst - base.dst[e];
            }
            st.correction = std::move(corr);
        }
    }

    // Report on the epoch-start parameters.
    rep.raw_risk = fp.risk;
    rep.emp_risk = normalized_risk(fp.risk, labels.C);
    rep.kl = fz.kl;
    rep.spec = fp.spec.value;
    rep.spec_floored = fp.spec.floored;
    rep.bound = pac_bayes_bound(rep.emp_risk, rep.kl, rep.spec);
    rep.loss = fp.loss;
    rep.lambda2 = fp.spectrum.lambda2;
    rep.train_acc = accuracy(fp.probs, labels, split.train);
    rep.val_acc = accuracy(fp.probs, labels, split.val);
    rep.test_acc = accuracy(fp.probs, labels, split.test);
    const Matrix calibrated = calibrate_predictions(fp.probs, fz.kappa, st.y_prior);
    if (!split.test.empty()) {
        rep.ece = ece(calibrated, labels, split.test, cfg.calib.ece_bins).value;
        rep.test_risk =
            normalized_risk(empirical_risk(labels, fp.probs, fz.kappa, split.test, st.y_prior), labels.C);
    }
    rep.cg_iterations = fp.cg_iterations + bstats.cg_iterations;
    rep.posterior_sweeps = post.sweeps;
    st.posterior = std::move(post);
    ++st.epoch;
    if (cfg.train.timing) {
        rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    return rep;
}

/// Snapshot sufficient to re-evaluate the model.
struct ModelSnapshot {
    ModelParams params;
    RestrictionSet correction;
    PosteriorState posterior;
    int epoch = 0;
};

struct FitResult {
    ModelSnapshot best;
    ModelSnapshot initial;
    std::vector<EpochReport> reports;
    int best_epoch = -1;
    double best_val_acc = -1.0;
    TrainState final_state;
};

/// Trains with early stopping on validation accuracy and returns the
/// best-validation snapshot. `on_epoch` is called after every epoch.
inline FitResult fit(const Dataset& ds, const SplitMask& split, const SgpcConfig& cfg,
                     const std::function<void(const EpochReport&)>& on_epoch = {})
{
    FitResult res;
    TrainState st = init_state(ds, cfg);
    res.initial = {st.params, st.correction, st.posterior, 0};
    res.best = res.initial;
    int since_best = 0;
    for (int e = 0; e < cfg.train.epochs; ++e) {
        ModelSnapshot before{st.params, st.correction, st.posterior, st.epoch};
        EpochReport rep = train_epoch(st, ds, split, cfg);
        res.reports.push_back(rep);
        if (on_epoch) {
            on_epoch(rep);
        }
        // The report describes the epoch-start parameters, so those are what we keep.
        if (rep.val_acc > res.best_val_acc) {
            res.best_val_acc = rep.val_acc;
            res.best_epoch = rep.epoch;
            res.best = std::move(before);
            since_best = 0;
        } else if (++since_best >= cfg.train.patience) {
            break;
        }
    }
    res.final_state = std::move(st);
    return res;
}

struct Evaluation {
    ForwardPass pass;
    Matrix calibrated;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    EceResult calibration;
    double nrs = 0.0;
};

/// Forward pass and metrics for a snapshot.
inline Evaluation evaluate(const ModelSnapshot& snap, const Dataset& ds, const SplitMask& split, const SgpcConfig& cfg)
{
    TrainState st = init_state(ds, cfg);
    st.params = snap.params;
    st.correction = snap.correction;
    st.posterior = snap.posterior;
    const EpochFrozen fz = make_frozen(st, ds, split, cfg);
    Evaluation ev;
    ev.pass = forward(st.params, ds.graph, st.X, ds.labels, fz, cfg.model,
                      LossWeights{cfg.train.lambda_kl, cfg.train.lambda_spec}, true, cfg.wolfe.lanczos);
    ev.calibrated = calibrate_predictions(ev.pass.probs, fz.kappa, st.y_prior);
    ev.train_acc = accuracy(ev.pass.probs, ds.labels, split.train);
    ev.val_acc = accuracy(ev.pass.probs, ds.labels, split.val);
    ev.test_acc = accuracy(ev.pass.probs, ds.labels, split.test);
    if (!split.test.empty()) {
        ev.calibration = ece(ev.calibrated, ds.labels, split.test, cfg.calib.ece_bins);
    }
    if (ds.graph.n >= 2) {
        ev.nrs = nrs(ev.pass.embedding(cfg.model.node_dim()), ds.graph);
    }
    return ev;
}

struct ContractionStats {
    std::vector<double> bound;
    /// Share of steps t >= warmup with B_{t+1} <= B_t + tol.
    double fraction = 1.0;
    /// Geometric rate of the decrements B_t - B_{t+1}; 0 when they never shrink geometrically.
    double rate = 0.0;
    int checked = 0;
};

inline ContractionStats risk_variance_series(const std::vector<double>& bound, int warmup = 20, double tol = 1e-6)
{
    ContractionStats s;
    s.bound = bound;
    int ok = 0;
    for (std::size_t t = static_cast<std::size_t>(std::max(warmup, 0)); t + 1 < bound.size(); ++t) {
        ++s.checked;
        ok += bound[t + 1] <= bound[t] + tol ? 1 : 0;
    }
    s.fraction = s.checked > 0 ? static_cast<double>(ok) / s.checked : 1.0;
    // Least squares of log(B_t - B_{t+1}) against t over positive decrements.
    double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t t = 0; t + 1 < bound.size(); ++t) {
        const double dec = bound[t] - bound[t + 1];
        if (dec > 0.0) {
            const double x = static_cast<double>(t);
            const double y = std::log(dec);
            n += 1.0;
            st += x;
            sy += y;
            stt += x * x;
            sty += x * y;
        }
    }
    const double den = n * stt - st * st;
    if (n >= 2.0 && den > 0.0) {
        s.rate = std::exp((n * sty - st * sy) / den);
    }
    return s;
}

inline ContractionStats risk_variance_series(const std::vector<EpochReport>& reports, int warmup = 20,
                                             double tol = 1e-6)
{
    std::vector<double> b;
    b.reserve(reports.size());
    for (const auto& r : reports) {
        b.push_back(r.bound);
    }
    return risk_variance_series(b, warmup, tol);
}

/// ||f_T - f_0|| over the probe rows of the encoder outputs before softmax.
inline double stability_metric(const Matrix& outputs_T, const Matrix& outputs_0, const std::vector<int>& probe)
{
    require(outputs_T.rows() == outputs_0.rows() && outputs_T.cols() == outputs_0.cols(),
            "stability_metric: output shapes differ");
    double s = 0.0;
    for (int i : probe) {
        s += (outputs_T.row(i) - outputs_0.row(i)).squaredNorm();
    }
    return std::sqrt(s);
}

/// sqrt(lambda_max / lambda2(L_0)) * exp(-dt * gap_gain / 2) + cg_tol * epochs.
inline double stability_bound(double lambda_max, double lambda2_initial, double dt, double gap_gain, double cg_tol,
                              int epochs)
{
    const double l2 = std::max(lambda2_initial, kLambda2Floor);
    return std::sqrt(std::max(lambda_max, 0.0) / l2) * std::exp(-dt * gap_gain / 2.0) + cg_tol * epochs;
}

struct OversmoothingRow {
    LiftVariant variant = LiftVariant::we_lift;
    int depth = 1;
    double test_acc = 0.0;
    double nrs = 0.0;
    int best_epoch = 0;
};

inline std::vector<OversmoothingRow> oversmoothing_sweep(const Dataset& ds, const SplitMask& split,
                                                         const SgpcConfig& base, const std::vector<int>& depths,
                                                         const std::vector<LiftVariant>& variants)
{
    std::vector<OversmoothingRow> rows;
    for (LiftVariant v : variants) {
        for (int depth : depths) {
            require(depth >= 1 && depth <= 8, "oversmoothing_sweep: depths must lie in [1, 8]");
            SgpcConfig cfg = base;
            cfg.model.variant = v;
            cfg.model.diffusion.layers = depth;
            FitResult fr = fit(ds, split, cfg);
            const Evaluation ev = evaluate(fr.best, ds, split, cfg);
            rows.push_back({v, depth, ev.test_acc, ev.nrs, fr.best_epoch});
        }
    }
    return rows;
}

inline void write_curves_header(std::ostream& os)
{
    os << "epoch,emp_risk,kl,spec,bound,lambda2,train_acc,val_acc,test_acc,ece,cg_iters,wall_ms\n";
}

inline void write_curve_row(std::ostream& os, const EpochReport& r)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.3f\n", r.epoch,
                  r.emp_risk, r.kl, r.spec, r.bound, r.lambda2, r.train_acc, r.val_acc, r.test_acc, r.ece,
                  r.cg_iterations, r.wall_ms);
    os << buf;
}

} // namespace sgpc
