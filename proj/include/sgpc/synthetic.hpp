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
#include <random>
#include <string>
#include <vector>

#include "sgpc/graph.hpp"
#include "sgpc/sheaf_laplacian.hpp"

namespace sgpc {

/// G(n, p) with p = avg_degree / (n - 1), sampled by geometric edge skipping.
inline Graph erdos_renyi(int n, double avg_degree, std::uint64_t seed)
{
    require(n >= 1, "erdos_renyi: n must be positive");
    std::vector<Edge> edges;
    if (n < 2) {
        return Graph::from_edges(n, edges);
    }
    const double p = std::clamp(avg_degree / static_cast<double>(n - 1), 0.0, 1.0);
    std::mt19937_64 rng(seed);
    if (p >= 1.0) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                edges.emplace_back(i, j);
            }
        }
        return Graph::from_edges(n, edges);
    }
    if (p <= 0.0) {
        return Graph::from_edges(n, edges);
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double log_q = std::log(1.0 - p);
    // Walk the strict upper triangle row by row, skipping geometric gaps.
    long long v = 1;
    long long w = -1;
    while (v < n) {
        const double r = unif(rng);
        w += 1 + static_cast<long long>(std::floor(std::log(1.0 - r) / log_q));
        while (w >= v && v < n) {
            w -= v;
            ++v;
        }
        if (v < n) {
            edges.emplace_back(static_cast<int>(w), static_cast<int>(v));
        }
    }
    return Graph::from_edges(n, edges);
}

inline Graph complete_graph(int n)
{
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            edges.emplace_back(i, j);
        }
    }
    return Graph::from_edges(n, edges);
}

inline Graph star_graph(int n)
{
    std::vector<Edge> edges;
    for (int j = 1; j < n; ++j) {
        edges.emplace_back(0, j);
    }
    return Graph::from_edges(n, edges);
}

/// Independent Gaussian restriction maps with entries of variance 1 / node_dim.
inline RestrictionSet random_restrictions(const Graph& g, int node_dim, int edge_dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(node_dim)));
    RestrictionSet out;
    out.node_dim = node_dim;
    out.edge_dim = edge_dim;
    auto draw = [&]() {
        Matrix m(edge_dim, node_dim);
        for (Index a = 0; a < m.rows(); ++a) {
            for (Index b = 0; b < m.cols(); ++b) {
                m(a, b) = normal(rng);
            }
        }
        return m;
    };
    for (int e = 0; e < g.m(); ++e) {
        out.src.push_back(draw());
        out.dst.push_back(draw());
    }
    return out;
}

struct CsbmOptions {
    int n = 300;
    int classes = 3;
    int features = 32;
    double avg_degree = 6.0;
    /// Probability that an edge joins two nodes of the same class.
    double homophily = 0.2;
    /// Distance between class means relative to unit feature noise.
    double signal = 1.0;
    std::uint64_t seed = 1;
};

/// Contextual stochastic block model: balanced classes, Gaussian features
/// around class means, and edges whose endpoints agree with probability
/// `homophily`.
inline Dataset csbm_dataset(const CsbmOptions& opt)
{
    require(opt.n >= opt.classes && opt.classes >= 2, "csbm_dataset: need n >= classes >= 2");
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset ds;
    ds.name = "csbm";
    ds.labels.C = opt.classes;
    ds.labels.y.resize(static_cast<std::size_t>(opt.n));
    std::vector<std::vector<int>> members(static_cast<std::size_t>(opt.classes));
    for (int i = 0; i < opt.n; ++i) {
        const int c = i % opt.classes;
        ds.labels.y[static_cast<std::size_t>(i)] = c;
        members[static_cast<std::size_t>(c)].push_back(i);
    }
    Matrix means(opt.classes, opt.features);
    for (Index c = 0; c < means.rows(); ++c) {
        for (Index f = 0; f < means.cols(); ++f) {
            means(c, f) = normal(rng);
        }
    }
    means *= opt.signal / std::sqrt(2.0);
    ds.features.H.resize(opt.n, opt.features);
    for (int i = 0; i < opt.n; ++i) {
        for (int f = 0; f < opt.features; ++f) {
            ds.features.H(i, f) = means(ds.labels.y[static_cast<std::size_t>(i)], f) + normal(rng);
        }
    }
    const auto target = static_cast<long long>(std::llround(opt.avg_degree * opt.n / 2.0));
    std::uniform_int_distribution<int> node(0, opt.n - 1);
    std::uniform_int_distribution<int> other_class(1, opt.classes - 1);
    std::bernoulli_distribution same(opt.homophily);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(target));
    for (long long t = 0; t < target; ++t) {
        const int i = node(rng);
        const int ci = ds.labels.y[static_cast<std::size_t>(i)];
        const int cj = same(rng) ? ci : (ci + other_class(rng)) % opt.classes;
        const auto& pool = members[static_cast<std::size_t>(cj)];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const int j = pool[pick(rng)];
        if (i != j) {
            edges.emplace_back(i, j);
        }
    }
    ds.graph = Graph::from_edges(opt.n, edges);
    return ds;
}

} // namespace sgpc
