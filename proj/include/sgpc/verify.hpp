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
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sgpc/calibration.hpp"
#include "sgpc/cg.hpp"
#include "sgpc/core.hpp"
#include "sgpc/diffusion.hpp"
#include "sgpc/graph.hpp"
#include "sgpc/model.hpp"
#include "sgpc/sheaf_laplacian.hpp"
#include "sgpc/spectral_opt.hpp"
#include "sgpc/synthetic.hpp"
#include "sgpc/trainer.hpp"

namespace sgpc {

/// Outcome of one verification: measured quantities, the bound they are held
/// to, and a verdict.
struct CheckResult {
    std::string name;
    bool passed = false;
    std::vector<std::string> lines;

    explicit CheckResult(std::string check_name = {}) : name(std::move(check_name)) {}

    void note(const char* fmt, ...) __attribute__((format(printf, 2, 3)))
    {
        char buf[1024];
        va_list args;
        va_start(args, fmt);
        std::vsnprintf(buf, sizeof(buf), fmt, args);
        va_end(args);
        lines.emplace_back(buf);
    }
};

inline void print_check(std::ostream& os, const CheckResult& r)
{
    for (const auto& l : r.lines) {
        os << "  " << r.name << ": " << l << "\n";
    }
    os << (r.passed ? "PASS " : "FAIL ") << r.name << "\n";
}

namespace detail {

inline Vector gaussian_vector(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x(n);
    for (auto& v : x) {
        v = normal(rng);
    }
    return x;
}

inline Matrix uniform_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> unif(lo, hi);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = unif(rng);
        }
    }
    return m;
}

/// Eigenvalues of L compressed to the complement of the constant vectors.
inline Vector complement_spectrum(const SheafLaplacian& L)
{
    const Matrix C = constant_basis(L.n, L.d);
    Eigen::HouseholderQR<Matrix> qr(C);
    const Matrix Q = qr.householderQ();
    const Matrix B = Q.rightCols(L.dim() - C.cols());
    const Matrix A = B.transpose() * L.to_dense() * B;
    return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
}

} // namespace detail

// ---------------------------------------------------------------- CG bound

struct CgBoundOptions {
    std::vector<int> sizes{100, 1000, 10000};
    /// Right-hand sides per size; each is one trial.
    int trials = 100;
    double epsilon = 0.3;
    double cg_tol = 1e-6;
    std::uint64_t seed = 1;
};

/// Average degree at which leverage sampling keeps about half of the edges.
inline double sampling_degree(int n, double epsilon, double oversample)
{
    const double deg = 4.0 * oversample * std::log(static_cast<double>(n)) / (epsilon * epsilon);
    return std::min(deg, static_cast<double>(n - 1));
}

/// Unpreconditioned CG on (I + dt L~) x = b for sparsified scalar sheaves on
/// Erdős–Rényi graphs, dt = 1 / lambda_max(L~). Every trial must stay within
/// ceil(sqrt(2 + eps) ln(||r0|| / tol)) iterations, and the largest count
/// across sizes may be at most twice the smallest.
inline CheckResult check_cg_bound(const CgBoundOptions& opt = {})
{
    CheckResult r{"cg-bound"};
    int within = 0;
    int total = 0;
    int lo = 1 << 30;
    int hi = 0;
    for (std::size_t s = 0; s < opt.sizes.size(); ++s) {
        const int n = opt.sizes[s];
        SparsifierConfig sc;
        sc.epsilon = opt.epsilon;
        sc.seed = opt.seed + 101 * s;
        const Graph g = erdos_renyi(n, sampling_degree(n, opt.epsilon, sc.oversample), opt.seed + 7 * s);
        const SparsifyResult sp = sparsify(g, identity_restrictions(g, 1), sc);
        const SheafLaplacian& L = sp.laplacian;
        auto apply_L = [&L](const Vector& x, Vector& y) { L.apply(x, y); };
        const RitzPairs top = lanczos(apply_L, L.dim(), Matrix(L.dim(), 0), 0, LanczosOptions{});
        const Index k = top.values.size() - 1;
        // A Ritz value lies within its residual of a true eigenvalue.
        const double lambda_max = top.values[k] + top.residuals[k];
        const double dt = 1.0 / lambda_max;
        std::mt19937_64 rng(opt.seed + 1000 * (s + 1));
        int size_lo = 1 << 30;
        int size_hi = 0;
        int size_ok = 0;
        int worst_ceiling = 0;
        for (int t = 0; t < opt.trials; ++t) {
            const Vector b = detail::gaussian_vector(L.dim(), rng);
            ShiftedOperator op{&L, dt};
            const CgResult res = cg_solve(op, b, CgOptions{opt.cg_tol, 10000});
            const int ceiling =
                static_cast<int>(std::ceil(std::sqrt(2.0 + opt.epsilon) * std::log(b.norm() / opt.cg_tol)));
            const bool ok = res.converged && res.iterations <= ceiling;
            size_ok += ok ? 1 : 0;
            size_lo = std::min(size_lo, res.iterations);
            size_hi = std::max(size_hi, res.iterations);
            worst_ceiling = std::max(worst_ceiling, ceiling);
        }
        within += size_ok;
        total += opt.trials;
        lo = std::min(lo, size_lo);
        hi = std::max(hi, size_hi);
        r.note("n=%d m=%d kept=%lld sampled=%s dt=%.4g iterations %d..%d, ceiling <= %d, within %d/%d", n, g.m(),
               static_cast<long long>(sp.kept_edges), sp.sampled ? "yes" : "no", dt, size_lo, size_hi, worst_ceiling,
               size_ok, opt.trials);
    }
    const double ratio = lo > 0 ? static_cast<double>(hi) / lo : 0.0;
    r.note("trials within ceiling %d/%d (need all); max/min iterations %.3f (bound 2)", within, total, ratio);
    r.passed = within == total && lo > 0 && ratio <= 2.0;
    return r;
}

// ---------------------------------------------------------------- gap ascent

struct GapAscentOptions {
    int n = 20;
    int steps = 50;
    double avg_degree = 4.0;
    int stalk_dim = 2;
    std::uint64_t seed = 13;
    double tol = 1e-8;
};

/// Consecutive single Wolfe steps on a random sheaf. lambda2 is recomputed
/// densely after every step; no step may lower it by more than tol, and all
/// steps must be accepted.
inline CheckResult check_gap_ascent(const GapAscentOptions& opt = {})
{
    CheckResult r{"gap-ascent"};
    const Graph g = erdos_renyi(opt.n, opt.avg_degree, opt.seed);
    SheafLaplacian L = assemble_laplacian(g, random_restrictions(g, opt.stalk_dim, opt.stalk_dim, opt.seed + 1));
    WolfeConfig wc;
    wc.K = 1;
    wc.dense_limit = 500;
    wc.lanczos = LanczosOptions{};
    GapState ledger;
    double exact = detail::complement_spectrum(L)[0];
    ledger.record(exact);
    const double start = exact;
    int accepted = 0;
    int decreases = 0;
    double worst = 0.0;
    for (int t = 0; t < opt.steps; ++t) {
        AscentStep step = wolfe_ascent_step(L, wc);
        if (!step.accepted) {
            r.note("step %d rejected", t);
            break;
        }
        ++accepted;
        L = std::move(step.L);
        const double next = detail::complement_spectrum(L)[0];
        const double drop = exact - next;
        worst = std::max(worst, drop);
        decreases += drop > opt.tol ? 1 : 0;
        exact = next;
        ledger.record(exact);
    }
    r.note("n=%d accepted %d/%d steps, lambda2 %.6g -> %.6g (gain %.6g)", opt.n, accepted, opt.steps, start, exact,
           ledger.delta_G);
    r.note("decreases beyond %.0e: %d (need 0); largest drop %.3g", opt.tol, decreases, worst);
    r.passed = accepted == opt.steps && decreases == 0;
    return r;
}

// ---------------------------------------------------------------- variance

struct VarianceOptions {
    int gamma_min = 2;
    int gamma_max = 10;
    int n_max = 50;
    /// Ratio claim applies from this many observations on.
    int ratio_from = 5;
    double ratio_limit = 0.6;
};

/// Exhaustive conjugate Beta updates: every integer prior split a + b = gamma
/// and every agreement count k of n observations. The exact posterior variance
/// is held to variance_bound(gamma, n) and, for n >= ratio_from, to
/// ratio_limit times the prior variance.
inline CheckResult check_variance(const VarianceOptions& opt = {})
{
    CheckResult r{"variance"};
    long long cells = 0;
    long long bound_ok = 0;
    long long ratio_cells = 0;
    long long ratio_ok = 0;
    double worst_excess = 0.0;
    double worst_ratio = 0.0;
    char worst_cell[128] = "none";
    char worst_ratio_cell[128] = "none";
    for (int gamma = opt.gamma_min; gamma <= opt.gamma_max; ++gamma) {
        for (int a = 1; a < gamma; ++a) {
            const int b = gamma - a;
            const double prior_var = beta_variance(a, b);
            for (int n = 0; n <= opt.n_max; ++n) {
                const double bound = variance_bound(gamma, n);
                for (int k = 0; k <= n; ++k) {
                    const double post = beta_variance(a + k, b + n - k);
                    ++cells;
                    if (post <= bound) {
                        ++bound_ok;
                    } else if (post - bound > worst_excess) {
                        worst_excess = post - bound;
                        std::snprintf(worst_cell, sizeof(worst_cell), "gamma=%d a=%d n=%d k=%d var=%.4g bound=%.4g",
                                      gamma, a, n, k, post, bound);
                    }
                    if (n >= opt.ratio_from) {
                        ++ratio_cells;
                        const double ratio = post / prior_var;
                        if (ratio <= opt.ratio_limit) {
                            ++ratio_ok;
                        }
                        if (ratio > worst_ratio) {
                            worst_ratio = ratio;
                            std::snprintf(worst_ratio_cell, sizeof(worst_ratio_cell), "gamma=%d a=%d n=%d k=%d",
                                          gamma, a, n, k);
                        }
                    }
                }
            }
        }
    }
    r.note("posterior variance <= bound in %lld/%lld cells (need all); worst: %s", bound_ok, cells, worst_cell);
    r.note("posterior/prior ratio <= %.2f in %lld/%lld cells with n >= %d (need all); max ratio %.4g at %s",
           opt.ratio_limit, ratio_ok, ratio_cells, opt.ratio_from, worst_ratio, worst_ratio_cell);
    r.passed = bound_ok == cells && ratio_ok == ratio_cells;
    return r;
}

// ---------------------------------------------------------------- sparsifier

struct SparsifierFixture {
    std::string label;
    Graph graph;
    RestrictionSet maps;
};

inline std::vector<SparsifierFixture> sparsifier_fixtures()
{
    std::vector<SparsifierFixture> out;
    {
        Graph g = complete_graph(100);
        RestrictionSet maps = identity_restrictions(g, 2);
        out.push_back({"complete-100 identity d=2", std::move(g), std::move(maps)});
    }
    {
        Graph g = complete_graph(80);
        RestrictionSet maps = random_restrictions(g, 2, 2, 5);
        out.push_back({"complete-80 random d=2", std::move(g), std::move(maps)});
    }
    {
        Graph g = erdos_renyi(300, 120.0, 3);
        RestrictionSet maps = identity_restrictions(g, 1);
        out.push_back({"erdos-renyi-300 scalar", std::move(g), std::move(maps)});
    }
    return out;
}

/// (1 - eps) x^T L x <= x^T L~ x <= (1 + eps) x^T L x on Gaussian probes; at
/// least min_share of the probes must satisfy it on every fixture.
inline CheckResult check_sparsifier(double epsilon = 0.3, int probes = 1000, double min_share = 0.99,
                                    std::uint64_t seed = 17)
{
    CheckResult r{"sparsifier"};
    r.passed = true;
    for (const auto& fx : sparsifier_fixtures()) {
        SparsifierConfig sc;
        sc.epsilon = epsilon;
        sc.seed = seed;
        const SparsifyResult sp = sparsify(fx.graph, fx.maps, sc);
        const SheafLaplacian L = assemble_laplacian(fx.graph, fx.maps);
        std::mt19937_64 rng(seed + 1);
        int inside = 0;
        for (int t = 0; t < probes; ++t) {
            const Vector x = detail::gaussian_vector(L.dim(), rng);
            const double a = x.dot(L * x);
            const double b = x.dot(sp.laplacian * x);
            inside += (b >= (1.0 - epsilon) * a && b <= (1.0 + epsilon) * a) ? 1 : 0;
        }
        const double share = static_cast<double>(inside) / probes;
        const bool ok = sp.sampled && share >= min_share;
        r.note("%s: m=%d kept=%lld samples=%lld inside %d/%d (need >= %.0f%%)%s", fx.label.c_str(), fx.graph.m(),
               static_cast<long long>(sp.kept_edges), static_cast<long long>(sp.samples), inside, probes,
               100.0 * min_share, sp.sampled ? "" : " [not sampled]");
        r.passed = r.passed && ok;
    }
    return r;
}

// ---------------------------------------------------------------- gradients

enum class GradFixtureKind { plain, corrected, sparse };

/// Ten-node model whose pointers into itself stay valid; build in place.
struct GradFixture {
    Graph graph;
    Matrix X;
    Labels labels;
    ModelConfig cfg;
    ModelParams params;
    std::vector<Matrix> plans;
    std::vector<int> train;
    EpochFrozen frozen;
    LossWeights weights;

    GradFixture() = default;
    GradFixture(const GradFixture&) = delete;
    GradFixture& operator=(const GradFixture&) = delete;
};

/// `plain` uses the lifted maps alone. Their lambda2 sits at the floor, where
/// the penalty is constant, so its weight is zero there. `corrected` adds a
/// map correction and keeps the penalty; `sparse` also reweights the edges.
inline void build_grad_fixture(GradFixture& fx, GradFixtureKind kind, std::uint64_t seed = 3)
{
    std::mt19937_64 rng(seed);
    fx.graph = erdos_renyi(10, 3.5, seed);
    const Matrix H = detail::uniform_matrix(10, 6, rng);
    fx.labels.C = 3;
    fx.labels.y.clear();
    for (int i = 0; i < 10; ++i) {
        fx.labels.y.push_back(i % 3);
    }
    fx.cfg = ModelConfig{};
    fx.cfg.lift.p_lift = 4;
    fx.cfg.lift.eps = 0.5;
    fx.cfg.diffusion.layers = 2;
    fx.cfg.diffusion.cg_tol = 1e-14;
    fx.cfg.diffusion.cg_max_iter = 5000;
    fx.params = init_params(6, 3, fx.cfg, seed + 2);
    for (auto& m : fx.params.W_mix) {
        m += 0.3 * detail::uniform_matrix(m.rows(), m.cols(), rng);
    }
    for (auto& v : fx.params.gamma) {
        v = detail::uniform_matrix(v.size(), 1, rng);
    }
    fx.params.W_theta += 0.5 * detail::uniform_matrix(4, 4, rng);
    fx.X = reduced_features(H, fx.params.W_proj);
    fx.plans = lift_plans(fx.graph, fx.X, fx.cfg.lift, fx.cfg.variant);
    fx.train = {0, 1, 2, 3, 5, 7};
    fx.frozen = EpochFrozen{};
    fx.frozen.plans = &fx.plans;
    fx.frozen.train = &fx.train;
    fx.frozen.kappa = (0.6 + 0.3 * detail::uniform_matrix(10, 1, rng).array()).matrix();
    fx.frozen.y_prior = Vector::Constant(3, 1.0 / 3.0);
    fx.frozen.c_het = 0.7;
    fx.frozen.kl = 0.1;
    fx.frozen.afm_scale = 1.0;
    fx.weights = LossWeights{0.5, 0.8};
    if (kind == GradFixtureKind::plain) {
        fx.weights.spec = 0.0;
        return;
    }
    fx.frozen.correction = random_restrictions(fx.graph, 4, 4, seed + 6);
    for (auto& m : fx.frozen.correction.src) {
        m *= 0.3;
    }
    for (auto& m : fx.frozen.correction.dst) {
        m *= 0.3;
    }
    if (kind == GradFixtureKind::sparse) {
        fx.frozen.svr_weights.resize(static_cast<std::size_t>(fx.graph.m()));
        for (int e = 0; e < fx.graph.m(); ++e) {
            fx.frozen.svr_weights[static_cast<std::size_t>(e)] = (e % 3 == 0) ? 0.0 : 1.5;
        }
    }
}

inline const char* to_string(GradFixtureKind k)
{
    switch (k) {
    case GradFixtureKind::plain:
        return "plain";
    case GradFixtureKind::corrected:
        return "corrected";
    case GradFixtureKind::sparse:
        return "sparse";
    }
    return "?";
}

/// Central differences with step h against backward() on every parameter
/// block of the three ten-node fixtures.
inline CheckResult check_gradients(double h = 1e-4, double tol = 1e-4)
{
    CheckResult r{"gradcheck"};
    r.passed = true;
    for (GradFixtureKind kind : {GradFixtureKind::plain, GradFixtureKind::corrected, GradFixtureKind::sparse}) {
        GradFixture fx;
        build_grad_fixture(fx, kind);
        const auto blocks = grad_check(fx.params, fx.graph, fx.X, fx.labels, fx.frozen, fx.cfg, fx.weights, h);
        double worst = 0.0;
        std::string line;
        for (const auto& b : blocks) {
            worst = std::max(worst, b.rel_error);
            char buf[96];
            std::snprintf(buf, sizeof(buf), " %s=%.2e", b.name.c_str(), b.rel_error);
            line += buf;
            r.passed = r.passed && b.rel_error <= tol;
        }
        r.note("%s fixture: worst relative error %.3e (bound %.0e);%s", to_string(kind), worst, tol, line.c_str());
    }
    return r;
}

// ---------------------------------------------------------------- training runs

/// Smaller synthetic stand-in used by `verify` when no dataset is given.
inline Dataset verification_dataset(std::uint64_t seed = 1)
{
    CsbmOptions o;
    o.n = 120;
    o.classes = 3;
    o.features = 24;
    o.avg_degree = 5.0;
    o.homophily = 0.2;
    o.signal = 1.5;
    o.seed = seed;
    return csbm_dataset(o);
}

inline SplitMask split_for(const Dataset& ds, const SgpcConfig& cfg)
{
    return make_split(ds.labels, cfg.per_class, cfg.seed, cfg.val_share);
}

/// B_{t+1} <= B_t + 1e-6 on at least min_share of the epochs after warmup.
inline CheckResult check_contraction(const Dataset& ds, const SgpcConfig& cfg, int warmup = 20,
                                     double min_share = 0.9)
{
    CheckResult r{"contraction"};
    SgpcConfig run = cfg;
    // The series needs every epoch; early stopping would cut it short.
    run.train.patience = std::max(run.train.patience, run.train.epochs + 1);
    const FitResult fr = fit(ds, split_for(ds, run), run);
    const ContractionStats cs = risk_variance_series(fr.reports, warmup);
    r.note("%s: %zu epochs, B_0=%.6g B_T=%.6g", ds.name.c_str(), fr.reports.size(),
           cs.bound.empty() ? 0.0 : cs.bound.front(), cs.bound.empty() ? 0.0 : cs.bound.back());
    r.note("non-increasing steps after epoch %d: %.3f of %d (need >= %.2f); fitted rate %.4g", warmup, cs.fraction,
           cs.checked, min_share, cs.rate);
    r.passed = cs.checked > 0 && cs.fraction >= min_share;
    return r;
}

/// Final-epoch normalized test risk <= reported bound in at least `need` seeds.
inline CheckResult check_bound_validity(const Dataset& ds, const SgpcConfig& cfg, int seeds = 10, int need = 9)
{
    CheckResult r{"bound-validity"};
    int ok = 0;
    for (int s = 0; s < seeds; ++s) {
        SgpcConfig run = cfg;
        run.seed = cfg.seed + static_cast<std::uint64_t>(s);
        const FitResult fr = fit(ds, split_for(ds, run), run);
        if (fr.reports.empty()) {
            r.note("seed %llu: no epochs", static_cast<unsigned long long>(run.seed));
            continue;
        }
        const EpochReport& last = fr.reports.back();
        const bool holds = last.test_risk <= last.bound;
        ok += holds ? 1 : 0;
        r.note("seed %llu epoch %d: test risk %.4f, bound %.4f (risk %.4f + kl %.4f + spec %.4g) %s",
               static_cast<unsigned long long>(run.seed), last.epoch, last.test_risk, last.bound, last.emp_risk,
               last.kl, last.spec, holds ? "holds" : "violated");
    }
    r.note("%s: bound holds in %d/%d seeds (need >= %d)", ds.name.c_str(), ok, seeds, need);
    r.passed = ok >= need;
    return r;
}

/// we_lift loses at most max_drop between depth 2 and depth 8, scalar_edge
/// loses at least min_drop, and we_lift ends with the lower NRS.
inline CheckResult check_oversmoothing(const Dataset& ds, const SgpcConfig& cfg, double max_drop = 5.0,
                                       double min_drop = 10.0)
{
    CheckResult r{"oversmoothing"};
    const auto rows = oversmoothing_sweep(ds, split_for(ds, cfg), cfg, {2, 8},
                                          {LiftVariant::we_lift, LiftVariant::scalar_edge});
    auto find = [&rows](LiftVariant v, int depth) {
        for (const auto& row : rows) {
            if (row.variant == v && row.depth == depth) {
                return row;
            }
        }
        return OversmoothingRow{};
    };
    for (const auto& row : rows) {
        r.note("%s depth %d: test accuracy %.2f%% NRS %.4f (best epoch %d)", to_string(row.variant).c_str(), row.depth,
               100.0 * row.test_acc, row.nrs, row.best_epoch);
    }
    const auto w2 = find(LiftVariant::we_lift, 2);
    const auto w8 = find(LiftVariant::we_lift, 8);
    const auto s2 = find(LiftVariant::scalar_edge, 2);
    const auto s8 = find(LiftVariant::scalar_edge, 8);
    const double we_drop = 100.0 * (w2.test_acc - w8.test_acc);
    const double sc_drop = 100.0 * (s2.test_acc - s8.test_acc);
    r.note("we_lift drop %.2f points (need <= %.1f); scalar_edge drop %.2f points (need >= %.1f); NRS at depth 8 "
           "%.4f vs %.4f (need we_lift lower)",
           we_drop, max_drop, sc_drop, min_drop, w8.nrs, s8.nrs);
    r.passed = we_drop <= max_drop && sc_drop >= min_drop && w8.nrs < s8.nrs;
    return r;
}

/// Curves of two identical runs, compared byte for byte.
inline CheckResult check_determinism(const Dataset& ds, const SgpcConfig& cfg)
{
    CheckResult r{"determinism"};
    SgpcConfig run = cfg;
    run.train.timing = false;
    std::string curves[2];
    for (auto& text : curves) {
        std::ostringstream os;
        write_curves_header(os);
        fit(ds, split_for(ds, run), run, [&os](const EpochReport& rep) { write_curve_row(os, rep); });
        text = os.str();
    }
    const auto rows = std::count(curves[0].begin(), curves[0].end(), '\n');
    r.note("%s: %ld curve lines, %zu bytes; runs %s", ds.name.c_str(), static_cast<long>(rows), curves[0].size(),
           curves[0] == curves[1] ? "identical" : "differ");
    r.passed = rows > 1 && curves[0] == curves[1];
    return r;
}

/// Mean test accuracy over seeded splits within tol points of target, each
/// run inside the time limit.
inline CheckResult check_accuracy(const Dataset& ds, const SgpcConfig& cfg, double target, double tol = 5.0,
                                  int seeds = 10, double seconds_limit = 300.0)
{
    CheckResult r{"accuracy"};
    double sum = 0.0;
    double slowest = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SgpcConfig run = cfg;
        run.seed = cfg.seed + static_cast<std::uint64_t>(s);
        const auto t0 = std::chrono::steady_clock::now();
        const FitResult fr = fit(ds, split_for(ds, run), run);
        const Evaluation ev = evaluate(fr.best, ds, split_for(ds, run), run);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        slowest = std::max(slowest, secs);
        sum += ev.test_acc;
        r.note("seed %llu: test accuracy %.2f%% (best epoch %d, %.1f s)", static_cast<unsigned long long>(run.seed),
               100.0 * ev.test_acc, fr.best_epoch, secs);
    }
    const double mean = seeds > 0 ? 100.0 * sum / seeds : 0.0;
    r.note("%s: mean test accuracy %.2f%% vs %.1f%% (tolerance %.1f); slowest run %.1f s (limit %.0f)",
           ds.name.c_str(), mean, target, tol, slowest, seconds_limit);
    r.passed = std::abs(mean - target) <= tol && slowest <= seconds_limit;
    return r;
}

inline CheckResult check_homophily(const Dataset& ds, double expected, double tol = 0.01)
{
    CheckResult r{"homophily"};
    const double h = homophily_ratio(ds.graph, ds.labels);
    r.note("%s: homophily %.4f vs %.2f (tolerance %.2f)", ds.name.c_str(), h, expected, tol);
    r.passed = std::abs(h - expected) <= tol;
    return r;
}

/// ECE of the best snapshot's calibrated test predictions; the reliability
/// table is written to `reliability` when given.
inline CheckResult check_calibration(const Dataset& ds, const SgpcConfig& cfg, double limit = 0.15,
                                     std::ostream* reliability = nullptr)
{
    CheckResult r{"calibration"};
    const SplitMask split = split_for(ds, cfg);
    const FitResult fr = fit(ds, split, cfg);
    const Evaluation ev = evaluate(fr.best, ds, split, cfg);
    if (reliability != nullptr) {
        write_reliability_csv(ev.calibration, *reliability);
    }
    r.note("%s: ECE %.4f with %d bins (need <= %.2f); test accuracy %.2f%%", ds.name.c_str(), ev.calibration.value,
           cfg.calib.ece_bins, limit, 100.0 * ev.test_acc);
    r.passed = ev.calibration.value <= limit;
    return r;
}

} // namespace sgpc
