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
#include <iomanip>
#include <ostream>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "sgpc/core.hpp"
#include "sgpc/graph.hpp"

namespace sgpc {

struct CalibrationConfig {
    double a0 = 1.0;
    double b0 = 1.0;
    /// Ceiling on alpha + beta after each update.
    double gamma_cap = 50.0;
    double delta = 0.05;
    int max_sweeps = 10;
    double fixed_point_tol = 1e-6;
    int ece_bins = 10;

    double prior_mean() const { return a0 / (a0 + b0); }

    void validate() const
    {
        require(a0 >= 1.0 && b0 >= 1.0, "calibration: a0 and b0 must be at least 1");
        require(gamma_cap >= a0 + b0, "calibration: gamma_cap must be at least a0 + b0");
        require(delta > 0.0 && delta < 1.0, "calibration: delta must lie in (0, 1)");
        require(max_sweeps >= 1, "calibration: max_sweeps must be positive");
        require(ece_bins >= 1, "calibration: ece_bins must be positive");
    }
};

struct EdgeBeta {
    double alpha = 1.0;
    double beta = 1.0;

    double mean() const { return alpha / (alpha + beta); }
};

inline double beta_variance(double a, double b)
{
    const double s = a + b;
    return a * b / (s * s * (s + 1.0));
}

inline std::vector<EdgeBeta> init_prior(int m, double a0, double b0)
{
    require(a0 >= 1.0 && b0 >= 1.0, "init_prior: a0 and b0 must be at least 1");
    require(m >= 0, "init_prior: negative edge count");
    return std::vector<EdgeBeta>(static_cast<std::size_t>(m), EdgeBeta{a0, b0});
}

/// Per-edge Beta posterior over message agreement.
struct PosteriorState {
    std::vector<EdgeBeta> edge;
    std::vector<double> n_tot;
    int sweeps = 0;
    bool converged = true;

    static PosteriorState from_prior(const std::vector<EdgeBeta>& prior)
    {
        PosteriorState s;
        s.edge = prior;
        s.n_tot.assign(prior.size(), 0.0);
        return s;
    }

    double kappa(std::size_t e) const { return edge[e].mean(); }

    std::vector<double> kappas() const
    {
        std::vector<double> k(edge.size());
        for (std::size_t e = 0; e < edge.size(); ++e) {
            k[e] = kappa(e);
        }
        return k;
    }
};

struct ClassCoupling {
    /// Mean agreement per label pair, symmetric, zero for unpopulated pairs.
    Matrix Pi;
    /// Number of labeled-labeled edges per pair (both orientations counted).
    Matrix counts;
    double c_het = 0.0;
};

inline bool in_mask(const std::vector<char>& flags, int v) { return flags[static_cast<std::size_t>(v)] != 0; }

inline std::vector<char> mask_flags(int n, const std::vector<int>& mask)
{
    std::vector<char> f(static_cast<std::size_t>(n), 0);
    for (int v : mask) {
        require(v >= 0 && v < n, "mask: node id out of range");
        f[static_cast<std::size_t>(v)] = 1;
    }
    return f;
}

/// Mean edge agreement per pair of training labels, from edges whose
/// endpoints are both in `mask`.
inline ClassCoupling class_coupling(const std::vector<double>& kappa, const Labels& labels, const Graph& g,
                                    const std::vector<int>& mask)
{
    require(kappa.size() == static_cast<std::size_t>(g.m()), "class_coupling: one agreement value per edge");
    ClassCoupling out;
    out.Pi = Matrix::Zero(labels.C, labels.C);
    out.counts = Matrix::Zero(labels.C, labels.C);
    const auto flags = mask_flags(g.n, mask);
    for (std::size_t e = 0; e < kappa.size(); ++e) {
        const auto [i, j] = g.edges[e];
        if (!in_mask(flags, i) || !in_mask(flags, j)) {
            continue;
        }
        const int a = labels.y[static_cast<std::size_t>(i)];
        const int b = labels.y[static_cast<std::size_t>(j)];
        out.Pi(a, b) += kappa[e];
        out.counts(a, b) += 1.0;
        if (a != b) {
            out.Pi(b, a) += kappa[e];
            out.counts(b, a) += 1.0;
        }
    }
    for (Index a = 0; a < out.Pi.rows(); ++a) {
        for (Index b = 0; b < out.Pi.cols(); ++b) {
            if (out.counts(a, b) > 0.0) {
                out.Pi(a, b) /= out.counts(a, b);
            }
        }
    }
    out.c_het = out.Pi.norm();
    return out;
}

inline int argmax_row(const Matrix& P, Index i)
{
    Index best = 0;
    P.row(i).maxCoeff(&best);
    return static_cast<int>(best);
}

/// Fixed-point update of the edge posteriors from this epoch's predictions.
/// Each sweep: agreement pseudo-count n_msg <y_i, y_j>, rescaled by the
/// coupling of the predicted classes relative to the mean populated coupling,
/// added to the starting counts, then capped at gamma_cap total mass. The
/// coupling is recomputed from the tentative posterior between sweeps.
inline PosteriorState posterior_update(const PosteriorState& start, const Matrix& predictions, const Graph& g,
                                       const Labels& labels, const std::vector<int>& mask, double n_msg,
                                       const CalibrationConfig& cfg)
{
    require(start.edge.size() == static_cast<std::size_t>(g.m()), "posterior_update: state does not match graph");
    require(predictions.rows() == g.n && predictions.cols() == labels.C, "posterior_update: prediction shape");
    require(predictions.allFinite(), "posterior_update: non-finite predictions");
    require(n_msg > 0.0, "posterior_update: message count must be positive");
    std::vector<int> cls(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
        cls[static_cast<std::size_t>(i)] = argmax_row(predictions, i);
    }
    std::vector<double> raw(start.edge.size());
    for (std::size_t e = 0; e < raw.size(); ++e) {
        const auto [i, j] = g.edges[e];
        raw[e] = n_msg * predictions.row(i).dot(predictions.row(j));
    }
    PosteriorState cur = start;
    std::vector<double> kappa = start.kappas();
    cur.converged = false;
    cur.sweeps = 0;
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        const ClassCoupling cc = class_coupling(kappa, labels, g, mask);
        double mean = 0.0;
        double populated = 0.0;
        for (Index k = 0; k < cc.Pi.size(); ++k) {
            if (cc.counts.data()[k] > 0.0) {
                mean += cc.Pi.data()[k];
                populated += 1.0;
            }
        }
        mean = populated > 0.0 ? mean / populated : 0.0;
        double change = 0.0;
        for (std::size_t e = 0; e < raw.size(); ++e) {
            const auto [i, j] = g.edges[e];
            const int a = cls[static_cast<std::size_t>(i)];
            const int b = cls[static_cast<std::size_t>(j)];
            const double factor = (mean > 0.0 && cc.counts(a, b) > 0.0) ? cc.Pi(a, b) / mean : 1.0;
            const double s = std::clamp(raw[e] * factor, 0.0, n_msg);
            double alpha = start.edge[e].alpha + s;
            double beta = start.edge[e].beta + (n_msg - s);
            if (alpha + beta > cfg.gamma_cap) {
                const double r = cfg.gamma_cap / (alpha + beta);
                alpha *= r;
                beta *= r;
            }
            cur.edge[e] = {alpha, beta};
            const double k = alpha / (alpha + beta);
            change = std::max(change, std::abs(k - kappa[e]));
            kappa[e] = k;
        }
        cur.sweeps = sweep;
        if (change < cfg.fixed_point_tol) {
            cur.converged = true;
            break;
        }
    }
    for (std::size_t e = 0; e < raw.size(); ++e) {
        cur.n_tot[e] = start.n_tot[e] + n_msg;
    }
    return cur;
}

/// Node weight: mean posterior agreement over incident edges, prior mean when isolated.
inline Vector node_kappa(const PosteriorState& post, const Graph& g, double prior_mean)
{
    Vector k = Vector::Constant(g.n, prior_mean);
    for (int v = 0; v < g.n; ++v) {
        const auto& inc = g.incident[static_cast<std::size_t>(v)];
        if (inc.empty()) {
            continue;
        }
        double s = 0.0;
        for (int e : inc) {
            s += post.kappa(static_cast<std::size_t>(e));
        }
        k[v] = s / static_cast<double>(inc.size());
    }
    return k;
}

inline Vector calibrate_prediction(const Vector& y_hat, double kappa, const Vector& y_prior)
{
    require(y_hat.size() == y_prior.size(), "calibrate_prediction: size mismatch");
    require(kappa >= 0.0 && kappa <= 1.0, "calibrate_prediction: kappa must lie in [0, 1]");
    return kappa * y_hat + (1.0 - kappa) * y_prior;
}

inline Matrix calibrate_predictions(const Matrix& Y, const Vector& kappa, const Vector& y_prior)
{
    Matrix out(Y.rows(), Y.cols());
    for (Index i = 0; i < Y.rows(); ++i) {
        out.row(i) = kappa[i] * Y.row(i) + (1.0 - kappa[i]) * y_prior.transpose();
    }
    return out;
}

/// Mean cross-entropy of calibrated predictions over `mask`.
inline double empirical_risk(const Labels& labels, const Matrix& predictions, const Vector& kappa,
                             const std::vector<int>& mask, const Vector& y_prior)
{
    if (mask.empty()) {
        throw InvalidInput("empirical_risk: empty mask");
    }
    double total = 0.0;
    for (int i : mask) {
        const int y = labels.y[static_cast<std::size_t>(i)];
        const double f = kappa[i] * predictions(i, y) + (1.0 - kappa[i]) * y_prior[y];
        total -= std::log(std::max(f, 1e-300));
    }
    return total / static_cast<double>(mask.size());
}

/// Risk in [0, 1]: cross-entropy divided by ln C, clipped at 1.
inline double normalized_risk(double risk, int classes)
{
    return std::min(1.0, risk / std::log(static_cast<double>(classes)));
}

/// KL(Beta(a1, b1) || Beta(a2, b2)) in closed form.
inline double beta_kl(double a1, double b1, double a2, double b2)
{
    using boost::math::digamma;
    const double log_b1 = std::lgamma(a1) + std::lgamma(b1) - std::lgamma(a1 + b1);
    const double log_b2 = std::lgamma(a2) + std::lgamma(b2) - std::lgamma(a2 + b2);
    const double kl = log_b2 - log_b1 + (a1 - a2) * digamma(a1) + (b1 - b2) * digamma(b1) +
                      (a2 - a1 + b2 - b1) * digamma(a1 + b1);
    return std::max(kl, 0.0);
}

inline double kl_sum(const PosteriorState& post, const std::vector<EdgeBeta>& prior)
{
    require(post.edge.size() == prior.size(), "kl_sum: posterior and prior sizes differ");
    double s = 0.0;
    for (std::size_t e = 0; e < prior.size(); ++e) {
        s += beta_kl(post.edge[e].alpha, post.edge[e].beta, prior[e].alpha, prior[e].beta);
    }
    return s;
}

/// sqrt((sum KL + ln(2 / delta)) / (2 n)).
inline double kl_term(double kl_total, int n, double delta)
{
    require(n >= 1, "kl_term: need at least one labeled node");
    require(delta > 0.0 && delta < 1.0, "kl_term: delta must lie in (0, 1)");
    return std::sqrt((kl_total + std::log(2.0 / delta)) / (2.0 * n));
}

inline double kl_term(const PosteriorState& post, const std::vector<EdgeBeta>& prior, int n, double delta)
{
    return kl_term(kl_sum(post, prior), n, delta);
}

/// gamma / (gamma + n)^2 * (1 - 1 / (gamma + n + 1)).
inline double variance_bound(double gamma, double n_tot)
{
    require(gamma >= 2.0 && n_tot >= 0.0, "variance_bound: need gamma >= 2 and n_tot >= 0");
    const double s = gamma + n_tot;
    return gamma / (s * s) * (1.0 - 1.0 / (s + 1.0));
}

struct ReliabilityBin {
    double low = 0.0;
    double high = 0.0;
    double confidence = 0.0;
    double accuracy = 0.0;
    Index count = 0;
};

struct EceResult {
    double value = 0.0;
    std::vector<ReliabilityBin> bins;
};

/// Expected calibration error with equal-width bins over the top-class probability.
inline EceResult ece(const Matrix& predictions, const Labels& labels, const std::vector<int>& mask, int bins = 10)
{
    require(bins >= 1, "ece: need at least one bin");
    if (mask.empty()) {
        throw InvalidInput("ece: empty mask");
    }
    EceResult out;
    out.bins.resize(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        out.bins[static_cast<std::size_t>(b)].low = static_cast<double>(b) / bins;
        out.bins[static_cast<std::size_t>(b)].high = static_cast<double>(b + 1) / bins;
    }
    for (int i : mask) {
        Index top = 0;
        const double conf = predictions.row(i).maxCoeff(&top);
        const int b = std::min(bins - 1, static_cast<int>(std::floor(conf * bins)));
        auto& bin = out.bins[static_cast<std::size_t>(std::max(b, 0))];
        bin.confidence += conf;
        bin.accuracy += (top == labels.y[static_cast<std::size_t>(i)]) ? 1.0 : 0.0;
        ++bin.count;
    }
    const double n = static_cast<double>(mask.size());
    for (auto& bin : out.bins) {
        if (bin.count > 0) {
            bin.confidence /= static_cast<double>(bin.count);
            bin.accuracy /= static_cast<double>(bin.count);
            out.value += static_cast<double>(bin.count) / n * std::abs(bin.accuracy - bin.confidence);
        }
    }
    return out;
}

inline void write_reliability_csv(const EceResult& r, std::ostream& os)
{
    os << "bin_low,bin_high,confidence,accuracy,count\n";
    os << std::setprecision(10);
    for (const auto& b : r.bins) {
        os << b.low << ',' << b.high << ',' << b.confidence << ',' << b.accuracy << ',' << b.count << '\n';
    }
}

} // namespace sgpc
