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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "sgpc/core.hpp"
#include "sgpc/trainer.hpp"

namespace sgpc {

/// One `key = value` assignment with its source line (0 for overrides).
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T out{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidInput("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw InvalidInput("config: '" + key + "' expects true or false, got '" + text + "'");
}

inline std::string format_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Binding {
    std::string key;
    std::function<void(SgpcConfig&, const std::string&)> set;
    std::function<std::string(const SgpcConfig&)> get;
};

template <typename Field>
Binding real_key(std::string key, Field field)
{
    return {key, [key, field](SgpcConfig& c, const std::string& v) { field(c) = parse_number<double>(key, v); },
            [field](SgpcConfig c) { return format_double(field(c)); }};
}

template <typename Field>
Binding int_key(std::string key, Field field)
{
    return {key, [key, field](SgpcConfig& c, const std::string& v) { field(c) = parse_number<int>(key, v); },
            [field](SgpcConfig c) { return std::to_string(field(c)); }};
}

template <typename Field>
Binding index_key(std::string key, Field field)
{
    return {key, [key, field](SgpcConfig& c, const std::string& v) { field(c) = parse_number<Index>(key, v); },
            [field](SgpcConfig c) { return std::to_string(field(c)); }};
}

template <typename Field>
Binding seed_key(std::string key, Field field)
{
    return {key, [key, field](SgpcConfig& c, const std::string& v) { field(c) = parse_number<std::uint64_t>(key, v); },
            [field](SgpcConfig c) { return std::to_string(field(c)); }};
}

template <typename Field>
Binding bool_key(std::string key, Field field)
{
    return {key, [key, field](SgpcConfig& c, const std::string& v) { field(c) = parse_bool(key, v); },
            [field](SgpcConfig c) { return std::string(field(c) ? "true" : "false"); }};
}

// Sorted by key; render_config relies on this order.
inline const std::vector<Binding>& bindings()
{
    static const std::vector<Binding> table = [] {
        std::vector<Binding> t;
        t.push_back(real_key("calib.a0", [](SgpcConfig& c) -> double& { return c.calib.a0; }));
        t.push_back(real_key("calib.b0", [](SgpcConfig& c) -> double& { return c.calib.b0; }));
        t.push_back(real_key("calib.delta", [](SgpcConfig& c) -> double& { return c.calib.delta; }));
        t.push_back(int_key("calib.ece_bins", [](SgpcConfig& c) -> int& { return c.calib.ece_bins; }));
        t.push_back(real_key("calib.gamma_cap", [](SgpcConfig& c) -> double& { return c.calib.gamma_cap; }));
        t.push_back(int_key("calib.max_sweeps", [](SgpcConfig& c) -> int& { return c.calib.max_sweeps; }));
        t.push_back(real_key("calib.tol", [](SgpcConfig& c) -> double& { return c.calib.fixed_point_tol; }));
        t.push_back(int_key("diff.Q", [](SgpcConfig& c) -> int& { return c.model.diffusion.Q; }));
        t.push_back(int_key("diff.cg_max_iter", [](SgpcConfig& c) -> int& { return c.model.diffusion.cg_max_iter; }));
        t.push_back(real_key("diff.cg_tol", [](SgpcConfig& c) -> double& { return c.model.diffusion.cg_tol; }));
        t.push_back(real_key("diff.dt", [](SgpcConfig& c) -> double& { return c.model.diffusion.dt; }));
        t.push_back(int_key("diff.layers", [](SgpcConfig& c) -> int& { return c.model.diffusion.layers; }));
        t.push_back(bool_key("diff.precondition", [](SgpcConfig& c) -> bool& { return c.model.diffusion.precondition; }));
        t.push_back(
            bool_key("diff.use_sparsifier", [](SgpcConfig& c) -> bool& { return c.model.diffusion.use_sparsifier; }));
        t.push_back({"lift.variant",
                     [](SgpcConfig& c, const std::string& v) { c.model.variant = lift_variant_from_string(v); },
                     [](const SgpcConfig& c) { return to_string(c.model.variant); }});
        t.push_back(real_key("model.mix_init_var", [](SgpcConfig& c) -> double& { return c.model.mix_init_var; }));
        t.push_back(int_key("ot.edge_dim", [](SgpcConfig& c) -> int& { return c.model.lift.edge_dim; }));
        t.push_back(real_key("ot.eps", [](SgpcConfig& c) -> double& { return c.model.lift.eps; }));
        t.push_back(real_key("ot.floor", [](SgpcConfig& c) -> double& { return c.model.lift.floor; }));
        t.push_back(int_key("ot.max_iter", [](SgpcConfig& c) -> int& { return c.model.lift.sinkhorn_max_iter; }));
        t.push_back(int_key("ot.p_lift", [](SgpcConfig& c) -> int& { return c.model.lift.p_lift; }));
        t.push_back(real_key("ot.tau", [](SgpcConfig& c) -> double& { return c.model.lift.tau; }));
        t.push_back(real_key("ot.tol", [](SgpcConfig& c) -> double& { return c.model.lift.sinkhorn_tol; }));
        t.push_back(seed_key("seed", [](SgpcConfig& c) -> std::uint64_t& { return c.seed; }));
        t.push_back(real_key("sparsifier.epsilon", [](SgpcConfig& c) -> double& { return c.model.sparsifier.epsilon; }));
        t.push_back(
            real_key("sparsifier.oversample", [](SgpcConfig& c) -> double& { return c.model.sparsifier.oversample; }));
        t.push_back(seed_key("sparsifier.seed", [](SgpcConfig& c) -> std::uint64_t& { return c.model.sparsifier.seed; }));
        t.push_back(int_key("spectral.K", [](SgpcConfig& c) -> int& { return c.wolfe.K; }));
        t.push_back(real_key("spectral.c_w", [](SgpcConfig& c) -> double& { return c.wolfe.c_w; }));
        t.push_back(real_key("spectral.degeneracy", [](SgpcConfig& c) -> double& { return c.wolfe.degeneracy; }));
        t.push_back(index_key("spectral.dense_limit", [](SgpcConfig& c) -> Index& { return c.wolfe.dense_limit; }));
        t.push_back(real_key("spectral.eta_init", [](SgpcConfig& c) -> double& { return c.wolfe.eta_init; }));
        t.push_back(int_key("spectral.lanczos_restarts", [](SgpcConfig& c) -> int& { return c.wolfe.lanczos.restarts; }));
        t.push_back(int_key("spectral.lanczos_steps", [](SgpcConfig& c) -> int& { return c.wolfe.lanczos.max_steps; }));
        t.push_back(real_key("spectral.lanczos_tol", [](SgpcConfig& c) -> double& { return c.wolfe.lanczos.tol; }));
        t.push_back(int_key("spectral.max_backtracks", [](SgpcConfig& c) -> int& { return c.wolfe.max_backtracks; }));
        t.push_back(real_key("spectral.trust", [](SgpcConfig& c) -> double& { return c.wolfe.trust; }));
        t.push_back(int_key("split.per_class", [](SgpcConfig& c) -> int& { return c.per_class; }));
        t.push_back(real_key("split.val_share", [](SgpcConfig& c) -> double& { return c.val_share; }));
        t.push_back(real_key("train.adam_eps", [](SgpcConfig& c) -> double& { return c.train.adam_eps; }));
        t.push_back(real_key("train.beta1", [](SgpcConfig& c) -> double& { return c.train.beta1; }));
        t.push_back(real_key("train.beta2", [](SgpcConfig& c) -> double& { return c.train.beta2; }));
        t.push_back(real_key("train.divergence", [](SgpcConfig& c) -> double& { return c.train.divergence; }));
        t.push_back(int_key("train.epochs", [](SgpcConfig& c) -> int& { return c.train.epochs; }));
        t.push_back(bool_key("train.fd_check", [](SgpcConfig& c) -> bool& { return c.train.fd_check; }));
        t.push_back(real_key("train.lambda_kl", [](SgpcConfig& c) -> double& { return c.train.lambda_kl; }));
        t.push_back(real_key("train.lambda_spec", [](SgpcConfig& c) -> double& { return c.train.lambda_spec; }));
        t.push_back(real_key("train.lr", [](SgpcConfig& c) -> double& { return c.train.lr; }));
        t.push_back({"train.optimizer", [](SgpcConfig& c, const std::string& v) { c.train.optimizer = v; },
                     [](const SgpcConfig& c) { return c.train.optimizer; }});
        t.push_back(int_key("train.patience", [](SgpcConfig& c) -> int& { return c.train.patience; }));
        t.push_back(bool_key("train.timing", [](SgpcConfig& c) -> bool& { return c.train.timing; }));
        t.push_back(real_key("train.weight_decay", [](SgpcConfig& c) -> double& { return c.train.weight_decay; }));
        return t;
    }();
    return table;
}

inline const Binding* find_binding(const std::string& key)
{
    for (const auto& b : bindings()) {
        if (b.key == key) {
            return &b;
        }
    }
    return nullptr;
}

} // namespace detail

/// Every accepted key, in canonical order.
inline std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const auto& b : detail::bindings()) {
        out.push_back(b.key);
    }
    return out;
}

/// Parses `key = value` lines; `#` starts a comment. Malformed lines are
/// reported with their line number.
inline std::vector<ConfigEntry> parse_config_text(const std::string& text)
{
    std::vector<ConfigEntry> out;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(line) + ": expected 'key = value'");
        }
        ConfigEntry e{detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)), line};
        if (e.key.empty() || e.value.empty()) {
            throw InvalidInput("config line " + std::to_string(line) + ": empty key or value");
        }
        out.push_back(std::move(e));
    }
    return out;
}

/// Splits a `key=value` override.
inline ConfigEntry parse_override(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw InvalidInput("override '" + text + "': expected key=value");
    }
    ConfigEntry e{detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1)), 0};
    if (e.key.empty() || e.value.empty()) {
        throw InvalidInput("override '" + text + "': empty key or value");
    }
    return e;
}

/// Applies one assignment; unknown keys are rejected.
inline void apply_setting(SgpcConfig& cfg, const ConfigEntry& e)
{
    const std::string where = e.line > 0 ? " (line " + std::to_string(e.line) + ")" : std::string();
    const detail::Binding* b = detail::find_binding(e.key);
    if (b == nullptr) {
        throw InvalidInput("config: unknown key '" + e.key + "'" + where);
    }
    try {
        b->set(cfg, e.value);
    } catch (const InvalidInput& err) {
        throw InvalidInput(err.what() + where);
    }
}

/// Defaults, then file entries, then overrides; the result is validated.
inline SgpcConfig build_config(const std::vector<ConfigEntry>& file_entries,
                               const std::vector<std::string>& overrides = {})
{
    SgpcConfig cfg;
    for (const auto& e : file_entries) {
        apply_setting(cfg, e);
    }
    for (const auto& o : overrides) {
        apply_setting(cfg, parse_override(o));
    }
    cfg.validate();
    return cfg;
}

inline SgpcConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {})
{
    std::vector<ConfigEntry> entries;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw InvalidInput("config: cannot open '" + path + "'");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        entries = parse_config_text(ss.str());
    }
    return build_config(entries, overrides);
}

/// Canonical `key = value` listing of every setting; parses back to the same config.
inline std::string render_config(const SgpcConfig& cfg)
{
    std::string out;
    for (const auto& b : detail::bindings()) {
        out += b.key + " = " + b.get(cfg) + "\n";
    }
    return out;
}

/// 64-bit FNV-1a of the canonical listing.
inline std::uint64_t config_hash(const SgpcConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : render_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace sgpc
