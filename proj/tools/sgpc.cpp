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

// Command-line driver: dataset conversion, training, sweeps and the
// verification suite. Exit codes: 0 success, 1 runtime error, 2 failed check.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgpc/sgpc.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

/// Options shared by every command that trains.
struct RunOptions {
    std::string data;
    std::string config;
    std::vector<std::string> overrides;
};

void add_run_options(CLI::App* cmd, RunOptions& run, bool data_required)
{
    auto* data = cmd->add_option("--data", run.data, "Graph JSON file");
    if (data_required) {
        data->required();
    }
    data->check(CLI::ExistingFile);
    cmd->add_option("--config", run.config, "Key-value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", run.overrides, "Override one setting, key=value (repeatable)");
}

sgpc::SgpcConfig resolve_config(const RunOptions& run)
{
    return sgpc::load_config(run.config.empty() ? std::string() : fs::absolute(run.config).string(), run.overrides);
}

sgpc::Dataset resolve_dataset(const RunOptions& run)
{
    if (run.data.empty()) {
        return sgpc::verification_dataset();
    }
    return sgpc::load_graph(fs::absolute(run.data).string());
}

/// Writes a file under the output directory and remembers it for the manifest.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    template <typename Fn>
    void write(const std::string& name, Fn&& fill)
    {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw sgpc::InvalidInput("cannot write '" + path.string() + "'");
        }
        fill(out);
        out.close();
        if (!out) {
            throw sgpc::InvalidInput("write failed for '" + path.string() + "'");
        }
        files_.push_back(name);
    }

    void write_manifest(const std::string& hash)
    {
        nlohmann::json doc;
        doc["config_hash"] = hash;
        doc["artifacts"] = nlohmann::json::array();
        for (const auto& f : files_) {
            doc["artifacts"].push_back({{"file", f}, {"bytes", fs::file_size(dir_ / f)}});
        }
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << doc.dump(2) << "\n";
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

nlohmann::json config_json(const sgpc::SgpcConfig& cfg)
{
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& key : sgpc::config_keys()) {
        doc[key] = sgpc::detail::find_binding(key)->get(cfg);
    }
    return doc;
}

nlohmann::json report_json(const sgpc::EpochReport& r)
{
    return {{"epoch", r.epoch},     {"emp_risk", r.emp_risk}, {"kl", r.kl},
            {"spec", r.spec},       {"bound", r.bound},       {"lambda2", r.lambda2},
            {"test_risk", r.test_risk}};
}

// ---------------------------------------------------------------- convert

struct ConvertOptions {
    std::string edges;
    std::string features;
    std::string labels;
    std::string out;
    std::string name;
};

int run_convert(const ConvertOptions& opt)
{
    sgpc::Dataset ds = sgpc::read_csv_dataset(fs::absolute(opt.edges).string(), fs::absolute(opt.features).string(),
                                              fs::absolute(opt.labels).string());
    if (!opt.name.empty()) {
        ds.name = opt.name;
    }
    const fs::path out = fs::absolute(opt.out);
    if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    sgpc::save_graph(ds, out.string());
    // Reload so the written file is known to pass validation.
    const sgpc::Dataset back = sgpc::load_graph(out.string());
    std::printf("wrote %s: n=%d m=%d d0=%d C=%d homophily=%.4f\n", out.string().c_str(), back.graph.n, back.graph.m(),
                back.features.d0(), back.labels.C, sgpc::homophily_ratio(back.graph, back.labels));
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
    RunOptions run;
    std::string out;
    bool dump_laplacian = false;
    bool timing = false;
};

int run_train(const TrainOptions& opt)
{
    sgpc::SgpcConfig cfg = resolve_config(opt.run);
    if (opt.timing) {
        cfg.train.timing = true;
    }
    const sgpc::Dataset ds = sgpc::load_graph(fs::absolute(opt.run.data).string());
    const std::string hash = sgpc::hash_hex(sgpc::config_hash(cfg));
    ArtifactWriter artifacts(fs::absolute(opt.out));

    const sgpc::SplitMask split = sgpc::make_split(ds.labels, cfg.per_class, cfg.seed, cfg.val_share);
    std::ostringstream curves;
    sgpc::write_curves_header(curves);
    const auto t0 = std::chrono::steady_clock::now();
    const sgpc::FitResult fr = sgpc::fit(ds, split, cfg, [&curves](const sgpc::EpochReport& r) {
        sgpc::write_curve_row(curves, r);
        std::fprintf(stderr, "epoch %d: risk %.4f bound %.4g val %.3f\n", r.epoch, r.emp_risk, r.bound, r.val_acc);
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const sgpc::Evaluation ev = sgpc::evaluate(fr.best, ds, split, cfg);

    artifacts.write("config.txt", [&cfg](std::ostream& os) { os << sgpc::render_config(cfg); });
    artifacts.write("curves.csv", [&curves](std::ostream& os) { os << curves.str(); });
    artifacts.write("reliability.csv", [&ev](std::ostream& os) { sgpc::write_reliability_csv(ev.calibration, os); });
    artifacts.write("metrics.json", [&](std::ostream& os) {
        nlohmann::json doc;
        doc["dataset"] = {{"name", ds.name},
                          {"n", ds.graph.n},
                          {"m", ds.graph.m()},
                          {"d0", ds.features.d0()},
                          {"classes", ds.labels.C},
                          {"homophily", sgpc::homophily_ratio(ds.graph, ds.labels)}};
        doc["split"] = {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}};
        doc["config"] = config_json(cfg);
        doc["config_hash"] = hash;
        doc["epochs_run"] = fr.reports.size();
        doc["best_epoch"] = fr.best_epoch;
        doc["train_acc"] = ev.train_acc;
        doc["val_acc"] = ev.val_acc;
        doc["test_acc"] = ev.test_acc;
        doc["ece"] = ev.calibration.value;
        doc["nrs"] = ev.nrs;
        if (!fr.reports.empty()) {
            doc["final"] = report_json(fr.reports.back());
        }
        if (cfg.train.timing) {
            doc["wall_seconds"] = seconds;
        }
        os << doc.dump(2) << "\n";
    });
    if (opt.dump_laplacian) {
        artifacts.write("laplacian.mtx", [&ev](std::ostream& os) { sgpc::write_coordinate(ev.pass.L, os); });
    }
    artifacts.write_manifest(hash);
    std::printf("%s: best epoch %d, test accuracy %.2f%%, ECE %.4f, config %s\n", ds.name.c_str(), fr.best_epoch,
                100.0 * ev.test_acc, ev.calibration.value, hash.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
    RunOptions run;
    std::string param;
    std::vector<double> grid;
    int seeds = 1;
    std::string out;
};

int run_sweep(const SweepOptions& opt)
{
    const sgpc::SgpcConfig base = resolve_config(opt.run);
    const sgpc::Dataset ds = sgpc::load_graph(fs::absolute(opt.run.data).string());
    const bool kl = opt.param == "lambda_kl";
    std::ostringstream table;
    table << "param,value,seed,best_epoch,val_acc,test_acc,ece\n";
    for (double value : opt.grid) {
        for (int s = 0; s < opt.seeds; ++s) {
            sgpc::SgpcConfig cfg = base;
            (kl ? cfg.train.lambda_kl : cfg.train.lambda_spec) = value;
            cfg.seed = base.seed + static_cast<std::uint64_t>(s);
            cfg.validate();
            const sgpc::SplitMask split = sgpc::make_split(ds.labels, cfg.per_class, cfg.seed, cfg.val_share);
            const sgpc::FitResult fr = sgpc::fit(ds, split, cfg);
            const sgpc::Evaluation ev = sgpc::evaluate(fr.best, ds, split, cfg);
            char row[256];
            std::snprintf(row, sizeof(row), "%s,%.17g,%llu,%d,%.17g,%.17g,%.17g\n", opt.param.c_str(), value,
                          static_cast<unsigned long long>(cfg.seed), fr.best_epoch, ev.val_acc, ev.test_acc,
                          ev.calibration.value);
            table << row;
            std::fputs(row, stdout);
        }
    }
    ArtifactWriter artifacts(fs::absolute(opt.out));
    artifacts.write("config.txt", [&base](std::ostream& os) { os << sgpc::render_config(base); });
    artifacts.write("sweep.csv", [&table](std::ostream& os) { os << table.str(); });
    artifacts.write_manifest(sgpc::hash_hex(sgpc::config_hash(base)));
    return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
    RunOptions run;
    std::string which;
};

const std::vector<std::string>& verify_names()
{
    static const std::vector<std::string> names{"cg-bound",      "gap-ascent", "variance",   "contraction",
                                                "bound-validity", "gradcheck",  "oversmoothing", "sparsifier",
                                                "determinism"};
    return names;
}

sgpc::CheckResult run_check(const std::string& name, const sgpc::Dataset& ds, const sgpc::SgpcConfig& cfg)
{
    if (name == "cg-bound") {
        return sgpc::check_cg_bound();
    }
    if (name == "gap-ascent") {
        return sgpc::check_gap_ascent();
    }
    if (name == "variance") {
        return sgpc::check_variance();
    }
    if (name == "contraction") {
        return sgpc::check_contraction(ds, cfg);
    }
    if (name == "bound-validity") {
        return sgpc::check_bound_validity(ds, cfg);
    }
    if (name == "gradcheck") {
        return sgpc::check_gradients();
    }
    if (name == "oversmoothing") {
        return sgpc::check_oversmoothing(ds, cfg);
    }
    if (name == "sparsifier") {
        return sgpc::check_sparsifier();
    }
    return sgpc::check_determinism(ds, cfg);
}

int run_verify(const VerifyOptions& opt)
{
    const sgpc::SgpcConfig cfg = resolve_config(opt.run);
    const sgpc::Dataset ds = resolve_dataset(opt.run);
    const std::vector<std::string> which = opt.which == "all" ? verify_names() : std::vector<std::string>{opt.which};
    int failed = 0;
    for (const auto& name : which) {
        const sgpc::CheckResult r = run_check(name, ds, cfg);
        sgpc::print_check(std::cout, r);
        std::cout.flush();
        failed += r.passed ? 0 : 1;
    }
    if (which.size() > 1) {
        std::printf("%zu checks, %d failed\n", which.size(), failed);
    }
    return failed == 0 ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sheaf diffusion node classifier with calibrated bounds"};
    app.require_subcommand(1);

    ConvertOptions convert;
    auto* convert_cmd = app.add_subcommand("convert", "Convert edge/feature/label CSVs to the graph JSON format");
    convert_cmd->add_option("--edges", convert.edges, "Edge list CSV (src,dst)")->required()->check(CLI::ExistingFile);
    convert_cmd->add_option("--features", convert.features, "Feature matrix CSV, one row per node")
        ->required()
        ->check(CLI::ExistingFile);
    convert_cmd->add_option("--labels", convert.labels, "Label CSV, one integer per node")
        ->required()
        ->check(CLI::ExistingFile);
    convert_cmd->add_option("--out", convert.out, "Output JSON path")->required();
    convert_cmd->add_option("--name", convert.name, "Dataset name stored in the file");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train one model and write curves, metrics and a manifest");
    add_run_options(train_cmd, train.run, true);
    train_cmd->add_option("--out", train.out, "Output directory")->required();
    train_cmd->add_flag("--dump-laplacian", train.dump_laplacian, "Also write the assembled Laplacian (MatrixMarket)");
    train_cmd->add_flag("--timing", train.timing, "Record wall-clock time per epoch");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train over a grid of one loss weight");
    add_run_options(sweep_cmd, sweep.run, true);
    sweep_cmd->add_option("--param", sweep.param, "Loss weight to vary")
        ->required()
        ->check(CLI::IsMember({"lambda_kl", "lambda_spec"}));
    sweep_cmd->add_option("--grid", sweep.grid, "Comma-separated values")->required()->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep.seeds, "Seeds per grid point")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();

    VerifyOptions verify;
    auto* verify_cmd = app.add_subcommand("verify", "Run a property check; exit 2 if any check fails");
    std::vector<std::string> choices = verify_names();
    choices.push_back("all");
    verify_cmd->add_option("check", verify.which, "Check to run")->required()->check(CLI::IsMember(choices));
    add_run_options(verify_cmd, verify.run, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*convert_cmd) {
            return run_convert(convert);
        }
        if (*train_cmd) {
            return run_train(train);
        }
        if (*sweep_cmd) {
            return run_sweep(sweep);
        }
        return run_verify(verify);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "sgpc: %s\n", e.what());
        return kExitError;
    }
}
