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
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sgpc/core.hpp"

namespace sgpc {

using Edge = std::pair<int, int>;

/// Undirected simple graph with edges stored once, canonically as (i, j), i < j.
/// The sheaf incidence orients every edge i -> j by this order.
struct Graph {
    int n = 0;
    std::vector<Edge> edges;
    std::vector<int> degrees;
    /// incident[v] lists the ids of edges touching v, in increasing edge id.
    std::vector<std::vector<int>> incident;

    [[nodiscard]] int m() const { return static_cast<int>(edges.size()); }

    /// Builds a graph from an arbitrary edge list: orientation is canonicalized,
    /// duplicates are merged and self-loops dropped. Edge ids follow the sorted order.
    static Graph from_edges(int n, const std::vector<Edge>& raw, int* dropped_self_loops = nullptr)
    {
        require(n >= 0, "graph: negative node count");
        Graph g;
        g.n = n;
        int loops = 0;
        g.edges.reserve(raw.size());
        for (auto [a, b] : raw) {
            if (a < 0 || b < 0 || a >= n || b >= n) {
                throw InvalidInput("graph: edge (" + std::to_string(a) + "," + std::to_string(b)
                                   + ") out of range for n=" + std::to_string(n));
            }
            if (a == b) {
                ++loops;
                continue;
            }
            g.edges.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(g.edges.begin(), g.edges.end());
        g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
        g.degrees.assign(n, 0);
        g.incident.assign(n, {});
        for (int e = 0; e < g.m(); ++e) {
            auto [i, j] = g.edges[e];
            ++g.degrees[i];
            ++g.degrees[j];
            g.incident[i].push_back(e);
            g.incident[j].push_back(e);
        }
        if (dropped_self_loops != nullptr) {
            *dropped_self_loops = loops;
        }
        return g;
    }

    /// Number of connected components (isolated nodes count as components).
    [[nodiscard]] int components() const
    {
        std::vector<int> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            return x;
        };
        int count = n;
        for (auto [i, j] : edges) {
            int a = find(i);
            int b = find(j);
            if (a != b) {
                parent[a] = b;
                --count;
            }
        }
        return count;
    }
};

struct NodeFeatures {
    Matrix H; // n x d0

    [[nodiscard]] int d0() const { return static_cast<int>(H.cols()); }
};

struct Labels {
    std::vector<int> y;
    int C = 0;
};

struct SplitMask {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
    std::uint64_t seed = 0;
};

/// A graph together with its node features and labels.
struct Dataset {
    std::string name;
    Graph graph;
    NodeFeatures features;
    Labels labels;
};

namespace detail {

inline void validate_dataset(const Dataset& ds)
{
    const auto& g = ds.graph;
    if (ds.features.H.rows() != g.n) {
        throw InvalidInput("dataset: feature rows (" + std::to_string(ds.features.H.rows())
                           + ") do not match n=" + std::to_string(g.n));
    }
    if (!ds.features.H.allFinite()) {
        throw InvalidInput("dataset: non-finite feature value");
    }
    if (static_cast<int>(ds.labels.y.size()) != g.n) {
        throw InvalidInput("dataset: label count does not match n");
    }
    if (ds.labels.C < 2) {
        throw InvalidInput("dataset: need at least two classes");
    }
    for (std::size_t i = 0; i < ds.labels.y.size(); ++i) {
        int c = ds.labels.y[i];
        if (c < 0 || c >= ds.labels.C) {
            throw InvalidInput("dataset: label " + std::to_string(c) + " of node " + std::to_string(i)
                               + " outside [0, " + std::to_string(ds.labels.C) + ")");
        }
    }
}

} // namespace detail

/// Parses the JSON graph format:
///   {"n", "num_classes", "edges": [[i,j],...], "d0", "features": [n*d0 row-major], "labels": [n]}
inline Dataset parse_graph_json(const nlohmann::json& doc)
{
    Dataset ds;
    try {
        int n = doc.at("n").get<int>();
        int C = doc.at("num_classes").get<int>();
        int d0 = doc.at("d0").get<int>();
        require(n >= 0 && d0 >= 1, "graph json: n must be >= 0 and d0 >= 1");
        std::vector<Edge> raw;
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 2) {
                throw InvalidInput("graph json: every edge must be a pair [i, j]");
            }
            raw.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        const auto& feats = doc.at("features");
        if (feats.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d0)) {
            throw InvalidInput("graph json: features has " + std::to_string(feats.size())
                               + " entries, expected n*d0=" + std::to_string(std::size_t(n) * d0));
        }
        ds.features.H.resize(n, d0);
        std::size_t k = 0;
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < d0; ++c) {
                ds.features.H(i, c) = feats[k++].get<double>();
            }
        }
        ds.labels.C = C;
        ds.labels.y = doc.at("labels").get<std::vector<int>>();
        ds.graph = Graph::from_edges(n, raw);
        if (doc.contains("name")) {
            ds.name = doc.at("name").get<std::string>();
        }
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInput(std::string("graph json: ") + ex.what());
    }
    detail::validate_dataset(ds);
    return ds;
}

inline Dataset load_graph(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open graph file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInput("graph json parse failure in " + path + ": " + ex.what());
    }
    return parse_graph_json(doc);
}

inline nlohmann::json to_json(const Dataset& ds)
{
    nlohmann::json doc;
    if (!ds.name.empty()) {
        doc["name"] = ds.name;
    }
    doc["n"] = ds.graph.n;
    doc["num_classes"] = ds.labels.C;
    doc["d0"] = ds.features.d0();
    auto edges = nlohmann::json::array();
    for (auto [i, j] : ds.graph.edges) {
        edges.push_back({i, j});
    }
    doc["edges"] = std::move(edges);
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(ds.features.H.size()));
    for (Index i = 0; i < ds.features.H.rows(); ++i) {
        for (Index c = 0; c < ds.features.H.cols(); ++c) {
            flat.push_back(ds.features.H(i, c));
        }
    }
    doc["features"] = std::move(flat);
    doc["labels"] = ds.labels.y;
    return doc;
}

inline void save_graph(const Dataset& ds, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write graph file: " + path);
    }
    out << to_json(ds).dump() << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return cells;
}

template <typename T>
T parse_cell(const std::string& cell, const std::string& file, int line_no)
{
    std::istringstream ss(cell);
    T value{};
    ss >> value;
    if (cell.empty() || ss.fail() || !ss.eof()) {
        throw InvalidInput(file + ":" + std::to_string(line_no) + ": malformed value '" + cell + "'");
    }
    return value;
}

inline bool skip_line(const std::string& line)
{
    auto b = line.find_first_not_of(" \t\r");
    return b == std::string::npos || line[b] == '#';
}

} // namespace detail

/// Reads the plain CSV triple (edge list, dense feature matrix, one label per line).
/// Blank lines and lines starting with '#' are ignored; any other malformed row is an
/// error carrying the file name and line number.
inline Dataset read_csv_dataset(const std::string& edges_csv, const std::string& features_csv,
                                const std::string& labels_csv)
{
    auto open = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) {
            throw InvalidInput("cannot open " + p);
        }
        return in;
    };

    std::vector<std::vector<double>> rows;
    {
        auto in = open(features_csv);
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (detail::skip_line(line)) {
                continue;
            }
            std::vector<double> row;
            for (const auto& cell : detail::split_csv_line(line)) {
                row.push_back(detail::parse_cell<double>(cell, features_csv, no));
            }
            if (!rows.empty() && row.size() != rows.front().size()) {
                throw InvalidInput(features_csv + ":" + std::to_string(no) + ": expected "
                                   + std::to_string(rows.front().size()) + " columns, got "
                                   + std::to_string(row.size()));
            }
            rows.push_back(std::move(row));
        }
    }
    std::vector<int> labels;
    {
        auto in = open(labels_csv);
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (detail::skip_line(line)) {
                continue;
            }
            auto cells = detail::split_csv_line(line);
            if (cells.size() != 1) {
                throw InvalidInput(labels_csv + ":" + std::to_string(no) + ": expected one label per line");
            }
            labels.push_back(detail::parse_cell<int>(cells[0], labels_csv, no));
        }
    }
    std::vector<Edge> raw;
    const int n = static_cast<int>(rows.size());
    {
        auto in = open(edges_csv);
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (detail::skip_line(line)) {
                continue;
            }
            auto cells = detail::split_csv_line(line);
            if (cells.size() != 2) {
                throw InvalidInput(edges_csv + ":" + std::to_string(no) + ": expected 'i,j'");
            }
            int a = detail::parse_cell<int>(cells[0], edges_csv, no);
            int b = detail::parse_cell<int>(cells[1], edges_csv, no);
            if (a < 0 || b < 0 || a >= n || b >= n) {
                throw InvalidInput(edges_csv + ":" + std::to_string(no) + ": node id out of range [0, "
                                   + std::to_string(n) + ")");
            }
            raw.emplace_back(a, b);
        }
    }

    Dataset ds;
    const int d0 = rows.empty() ? 0 : static_cast<int>(rows.front().size());
    require(d0 >= 1, features_csv + ": no feature columns");
    ds.features.H.resize(n, d0);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d0; ++c) {
            ds.features.H(i, c) = rows[i][c];
        }
    }
    ds.labels.y = std::move(labels);
    ds.labels.C = ds.labels.y.empty() ? 0 : *std::max_element(ds.labels.y.begin(), ds.labels.y.end()) + 1;
    ds.graph = Graph::from_edges(n, raw);
    detail::validate_dataset(ds);
    return ds;
}

/// Global edge homophily: fraction of edges whose endpoints share a label.
inline double homophily_ratio(const Graph& g, const Labels& labels)
{
    if (g.m() == 0) {
        throw InvalidInput("homophily_ratio: undefined for a graph without edges");
    }
    require(static_cast<int>(labels.y.size()) == g.n, "homophily_ratio: labels must cover all nodes");
    int same = 0;
    for (auto [i, j] : g.edges) {
        same += labels.y[i] == labels.y[j] ? 1 : 0;
    }
    return static_cast<double>(same) / g.m();
}

/// Draws `per_class` training nodes from every class (all members when a class is
/// smaller), then splits the rest into validation and test with val:test = val_share:(1-val_share).
inline SplitMask make_split(const Labels& labels, int per_class, std::uint64_t seed, double val_share = 1.0 / 3.0)
{
    require(per_class >= 1, "make_split: per_class must be >= 1");
    require(val_share >= 0.0 && val_share <= 1.0, "make_split: val_share must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> by_class(labels.C);
    for (int i = 0; i < static_cast<int>(labels.y.size()); ++i) {
        by_class.at(labels.y[i]).push_back(i);
    }
    SplitMask mask;
    mask.seed = seed;
    std::vector<int> rest;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        const auto take = std::min<std::size_t>(members.size(), static_cast<std::size_t>(per_class));
        mask.train.insert(mask.train.end(), members.begin(), members.begin() + static_cast<long>(take));
        rest.insert(rest.end(), members.begin() + static_cast<long>(take), members.end());
    }
    std::sort(rest.begin(), rest.end());
    std::shuffle(rest.begin(), rest.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(val_share * static_cast<double>(rest.size())));
    mask.val.assign(rest.begin(), rest.begin() + static_cast<long>(n_val));
    mask.test.assign(rest.begin() + static_cast<long>(n_val), rest.end());
    std::sort(mask.train.begin(), mask.train.end());
    std::sort(mask.val.begin(), mask.val.end());
    std::sort(mask.test.begin(), mask.test.end());
    return mask;
}

/// Mean cosine similarity over all unordered node pairs. Rows with zero norm
/// contribute similarity 0 to every pair they take part in.
inline double nrs(const Matrix& embeddings, [[maybe_unused]] const Graph& g)
{
    const Index n = embeddings.rows();
    if (n < 2) {
        throw InvalidInput("nrs: need at least two nodes");
    }
    // sum_{i<j} <u_i,u_j> = (|sum u|^2 - sum |u|^2) / 2 over unit rows u.
    Vector total = Vector::Zero(embeddings.cols());
    double self = 0.0;
    for (Index i = 0; i < n; ++i) {
        double norm = embeddings.row(i).norm();
        if (norm > 0.0) {
            Vector u = embeddings.row(i).transpose() / norm;
            total += u;
            self += u.squaredNorm();
        }
    }
    double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return 0.5 * (total.squaredNorm() - self) / pairs;
}

} // namespace sgpc
