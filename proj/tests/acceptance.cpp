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

// Acceptance criteria, one per invocation: `sgpc_acceptance N` prints the
// measurements followed by a single PASS or FAIL line and exits nonzero on
// FAIL. Benchmark graphs are read from $SGPC_DATA_DIR/<name>.json.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sgpc/sgpc.hpp"

namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kAccuracyTolerance = 5.0;
constexpr double kHomophilyTolerance = 0.01;
constexpr double kSparsifierEpsilon = 0.3;
constexpr double kSparsifierShare = 0.99;
constexpr double kGradTolerance = 1e-4;
constexpr double kContractionShare = 0.9;
constexpr int kContractionWarmup = 20;
constexpr double kEceLimit = 0.15;
constexpr double kDeepDropMax = 5.0;
constexpr double kScalarDropMin = 10.0;

struct Outcome {
    bool passed = true;
    std::vector<std::string> lines;

    void absorb(const sgpc::CheckResult& r)
    {
        for (const auto& l : r.lines) {
            lines.push_back(r.name + ": " + l);
        }
        passed = passed && r.passed;
    }

    void missing(const std::string& what)
    {
        lines.push_back(what);
        passed = false;
    }
};

std::optional<sgpc::Dataset> benchmark(const std::string& name, Outcome& out)
{
    const char* dir = std::getenv("SGPC_DATA_DIR");
    if (dir == nullptr || *dir == '\0') {
        out.missing(name + ": dataset unavailable (SGPC_DATA_DIR not set)");
        return std::nullopt;
    }
    const fs::path path = fs::path(dir) / (name + ".json");
    if (!fs::exists(path)) {
        out.missing(name + ": dataset unavailable (" + path.string() + " not found)");
        return std::nullopt;
    }
    return sgpc::load_graph(path.string());
}

Outcome small_graph_accuracy()
{
    Outcome out;
    const std::vector<std::pair<std::string, double>> targets{{"cornell", 57.2}, {"texas", 63.5}, {"wisconsin", 64.7}};
    for (const auto& [name, target] : targets) {
        if (auto ds = benchmark(name, out)) {
            out.absorb(sgpc::check_accuracy(*ds, sgpc::SgpcConfig{}, target, kAccuracyTolerance, 10, 300.0));
        }
    }
    return out;
}

Outcome homophily()
{
    Outcome out;
    const std::vector<std::pair<std::string, double>> targets{{"cora", 0.81}, {"texas", 0.06}};
    for (const auto& [name, expected] : targets) {
        if (auto ds = benchmark(name, out)) {
            out.absorb(sgpc::check_homophily(*ds, expected, kHomophilyTolerance));
        }
    }
    return out;
}

Outcome cg_bound()
{
    Outcome out;
    sgpc::CgBoundOptions opt;
    opt.sizes = {100, 1000, 10000};
    opt.trials = 100;
    opt.epsilon = kSparsifierEpsilon;
    out.absorb(sgpc::check_cg_bound(opt));
    return out;
}

Outcome gap_ascent()
{
    Outcome out;
    sgpc::GapAscentOptions opt;
    opt.n = 20;
    opt.steps = 50;
    opt.tol = 1e-8;
    out.absorb(sgpc::check_gap_ascent(opt));
    return out;
}

Outcome variance()
{
    Outcome out;
    sgpc::VarianceOptions opt;
    opt.gamma_min = 2;
    opt.gamma_max = 10;
    opt.n_max = 50;
    opt.ratio_from = 5;
    opt.ratio_limit = 0.6;
    out.absorb(sgpc::check_variance(opt));
    return out;
}

Outcome contraction()
{
    Outcome out;
    if (auto ds = benchmark("cornell", out)) {
        out.absorb(sgpc::check_contraction(*ds, sgpc::SgpcConfig{}, kContractionWarmup, kContractionShare));
    }
    return out;
}

Outcome bound_validity()
{
    Outcome out;
    for (const std::string name : {"cornell", "texas", "wisconsin"}) {
        if (auto ds = benchmark(name, out)) {
            out.absorb(sgpc::check_bound_validity(*ds, sgpc::SgpcConfig{}, 10, 9));
        }
    }
    return out;
}

Outcome gradients()
{
    Outcome out;
    out.absorb(sgpc::check_gradients(1e-4, kGradTolerance));
    return out;
}

Outcome sparsifier()
{
    Outcome out;
    out.absorb(sgpc::check_sparsifier(kSparsifierEpsilon, 1000, kSparsifierShare));
    return out;
}

Outcome oversmoothing()
{
    Outcome out;
    if (auto ds = benchmark("cora", out)) {
        out.absorb(sgpc::check_oversmoothing(*ds, sgpc::SgpcConfig{}, kDeepDropMax, kScalarDropMin));
    }
    return out;
}

Outcome calibration()
{
    Outcome out;
    if (auto ds = benchmark("chameleon", out)) {
        const std::string csv = "acceptance_reliability.csv";
        std::ofstream rel(csv);
        out.absorb(sgpc::check_calibration(*ds, sgpc::SgpcConfig{}, kEceLimit, &rel));
        rel.close();
        const bool emitted = rel.good() && fs::file_size(csv) > 0;
        out.lines.push_back("reliability table " + std::string(emitted ? "written to " : "missing: ") + csv);
        out.passed = out.passed && emitted;
    }
    return out;
}

Outcome determinism()
{
    Outcome out;
    sgpc::SgpcConfig cfg;
    // Any fixed run length exercises the property; this keeps the test short.
    cfg.train.epochs = 20;
    out.absorb(sgpc::check_determinism(sgpc::verification_dataset(), cfg));
    return out;
}

struct Criterion {
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"small-graph accuracy", small_graph_accuracy},
    {"homophily ratios", homophily},
    {"cg iteration bound", cg_bound},
    {"gap ascent monotone", gap_ascent},
    {"posterior variance", variance},
    {"bound contraction", contraction},
    {"bound validity", bound_validity},
    {"gradient correctness", gradients},
    {"sparsifier sandwich", sparsifier},
    {"over-smoothing", oversmoothing},
    {"calibration", calibration},
    {"determinism", determinism},
};

constexpr int kCount = static_cast<int>(sizeof(kCriteria) / sizeof(kCriteria[0]));

bool run_one(int id)
{
    const Criterion& c = kCriteria[id - 1];
    Outcome out;
    try {
        out = c.run();
    } catch (const std::exception& e) {
        out.missing(std::string("error: ") + e.what());
    }
    for (const auto& l : out.lines) {
        std::printf("  %s\n", l.c_str());
    }
    std::printf("%s criterion %d: %s\n", out.passed ? "PASS" : "FAIL", id, c.name);
    std::fflush(stdout);
    return out.passed;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<int> ids;
    for (int a = 1; a < argc; ++a) {
        const int id = std::atoi(argv[a]);
        if (id < 1 || id > kCount) {
            std::fprintf(stderr, "usage: %s [criterion 1-%d ...]\n", argv[0], kCount);
            return 1;
        }
        ids.push_back(id);
    }
    if (ids.empty()) {
        for (int id = 1; id <= kCount; ++id) {
            ids.push_back(id);
        }
    }
    int failed = 0;
    for (int id : ids) {
        failed += run_one(id) ? 0 : 1;
    }
    return failed == 0 ? 0 : 2;
}
