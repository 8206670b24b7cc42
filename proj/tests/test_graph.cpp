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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "sgpc/graph.hpp"

namespace {

using sgpc::Graph;

std::string write_temp(const std::string& name, const std::string& body)
{
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path.string();
}

} // namespace

TEST(Graph, CanonicalizesDedupsAndDropsSelfLoops)
{
    int loops = 0;
    Graph g = Graph::from_edges(4, {{2, 1}, {1, 2}, {3, 3}, {0, 3}, {3, 0}, {0, 1}}, &loops);
    ASSERT_EQ(g.m(), 3);
    EXPECT_EQ(loops, 1);
    EXPECT_EQ(g.edges[0], (sgpc::Edge{0, 1}));
    EXPECT_EQ(g.edges[1], (sgpc::Edge{0, 3}));
    EXPECT_EQ(g.edges[2], (sgpc::Edge{1, 2}));
    for (const auto& [i, j] : g.edges) {
        EXPECT_LT(i, j);
    }
    EXPECT_EQ(g.degrees, (std::vector<int>{2, 2, 1, 1}));
}

TEST(Graph, RejectsOutOfRangeNodes)
{
    EXPECT_THROW(Graph::from_edges(3, {{0, 3}}), sgpc::InvalidInput);
    EXPECT_THROW(Graph::from_edges(3, {{-1, 2}}), sgpc::InvalidInput);
}

TEST(Graph, EmptyGraphHasNoEdges)
{
    Graph g = Graph::from_edges(5, {});
    EXPECT_EQ(g.m(), 0);
    EXPECT_EQ(g.components(), 5);
}

TEST(Graph, HomophilyMatchesEdgeCount)
{
    Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    sgpc::Labels lab{{0, 0, 1, 1}, 2};
    EXPECT_DOUBLE_EQ(sgpc::homophily_ratio(g, lab), 2.0 / 3.0);
    Graph empty = Graph::from_edges(2, {});
    EXPECT_THROW(sgpc::homophily_ratio(empty, lab), sgpc::InvalidInput);
}

TEST(Graph, SplitIsDeterministicDisjointAndCovering)
{
    sgpc::Labels lab;
    lab.C = 3;
    for (int i = 0; i < 90; ++i) {
        lab.y.push_back(i % 3);
    }
    auto a = sgpc::make_split(lab, 5, 42);
    auto b = sgpc::make_split(lab, 5, 42);
    auto c = sgpc::make_split(lab, 5, 43);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    EXPECT_NE(a.train, c.train);
    EXPECT_EQ(a.train.size(), 15u);
    std::vector<int> seen(90, 0);
    for (const auto* part : {&a.train, &a.val, &a.test}) {
        for (int v : *part) {
            ++seen[static_cast<std::size_t>(v)];
        }
    }
    for (int s : seen) {
        EXPECT_EQ(s, 1);
    }
    EXPECT_EQ(a.val.size(), 25u);
    std::vector<int> per_class(3, 0);
    for (int v : a.train) {
        ++per_class[static_cast<std::size_t>(lab.y[static_cast<std::size_t>(v)])];
    }
    EXPECT_EQ(per_class, (std::vector<int>{5, 5, 5}));
}

TEST(Graph, NrsMatchesPairwiseOracle)
{
    sgpc::Matrix emb(5, 3);
    emb << 1, 0, 0, 0, 1, 0, 1, 1, 0, -1, 2, 3, 0, 0, 0;
    Graph g = Graph::from_edges(5, {});
    double total = 0.0;
    int pairs = 0;
    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) {
            double ni = emb.row(i).norm();
            double nj = emb.row(j).norm();
            total += (ni > 0 && nj > 0) ? emb.row(i).dot(emb.row(j)) / (ni * nj) : 0.0;
            ++pairs;
        }
    }
    EXPECT_NEAR(sgpc::nrs(emb, g), total / pairs, 1e-12);
    sgpc::Matrix same = sgpc::Matrix::Ones(4, 2);
    EXPECT_NEAR(sgpc::nrs(same, g), 1.0, 1e-12);
}

TEST(Graph, JsonRoundTrip)
{
    sgpc::Dataset ds;
    ds.name = "toy";
    ds.graph = Graph::from_edges(3, {{0, 1}, {1, 2}});
    ds.features.H = sgpc::Matrix::Random(3, 4);
    ds.labels = {{0, 1, 0}, 2};
    auto path = (std::filesystem::temp_directory_path() / "sgpc_roundtrip.json").string();
    sgpc::save_graph(ds, path);
    sgpc::Dataset back = sgpc::load_graph(path);
    EXPECT_EQ(back.name, "toy");
    EXPECT_EQ(back.graph.edges, ds.graph.edges);
    EXPECT_EQ(back.labels.y, ds.labels.y);
    EXPECT_EQ(back.labels.C, 2);
    EXPECT_TRUE(back.features.H.isApprox(ds.features.H, 1e-15));
}

TEST(Graph, CsvReaderReportsLineOfMalformedRow)
{
    auto edges = write_temp("sgpc_e.csv", "# src,dst\n0,1\n1,x\n");
    auto feats = write_temp("sgpc_f.csv", "1,0\n0,1\n1,1\n");
    auto labels = write_temp("sgpc_l.csv", "0\n1\n0\n");
    try {
        sgpc::read_csv_dataset(edges, feats, labels);
        FAIL() << "expected InvalidInput";
    } catch (const sgpc::InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
    auto good = write_temp("sgpc_e2.csv", "0,1\n1,2\n2,2\n");
    sgpc::Dataset ds = sgpc::read_csv_dataset(good, feats, labels);
    EXPECT_EQ(ds.graph.m(), 2);
    EXPECT_EQ(ds.labels.C, 2);
    EXPECT_EQ(ds.features.d0(), 2);
}
