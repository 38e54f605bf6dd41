#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smilab/errors.hpp"
#include "smilab/quantum.hpp"
#include "smilab/smi.hpp"

namespace smilab {

using Json = nlohmann::json;

// Experiment kinds understood by the runner.
inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {
        "decay-curve", "ensemble-average", "stability", "pw-consistency", "baseline-envariance"};
    return kinds;
}

inline const std::vector<std::string>& ensemble_kind_names() {
    static const std::vector<std::string> kinds = {"zero-noise", "dephasing", "gue"};
    return kinds;
}

struct OutputSpec {
    std::string path;             // empty: stdout
    std::string format = "json";  // "json" | "csv"
};

// Parsed and validated experiment description. Scalar-or-list fields keep
// their list form here; run-time rules decide where lists are legal.
struct ExperimentConfig {
    std::string kind;
    std::uint64_t master_seed = 1;

    std::string ensemble_kind = "dephasing";
    std::vector<double> lambdas = {1.0};  // >1 entry only for sweeps
    std::string base;                     // Hamiltonian preset; empty: "zero"

    std::vector<double> taus = {0.5, 1.0, 1.5, 2.0};
    int slices = 200;

    std::int64_t n_trajectories = 10000;
    std::string state = "plus";
    std::string observable = "sigma_z";
    std::string target = "state";  // ensemble-average: "state" | "operator"
    int n_instances = 100;         // pw-consistency

    std::vector<double> alpha_sq;       // baseline-envariance
    long long max_denominator = 1000;   // baseline-envariance

    OutputSpec output;

    double lambda() const {
        if (lambdas.size() != 1)
            throw ConfigError("ensemble.lambda: a single value is required here (lists are for sweeps)");
        return lambdas.front();
    }
    double tau() const {
        if (taus.size() != 1)
            throw ConfigError("grid.tau: a single value is required here");
        return taus.front();
    }

    Json canonical() const;
};

namespace detail {

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t prev = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cur = row[j];
            const std::size_t sub = prev + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
            prev = cur;
        }
    }
    return row[b.size()];
}

inline std::string nearest_key(const std::string& key, const std::vector<std::string>& known) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::string hit;
    for (const auto& k : known) {
        const std::size_t d = edit_distance(key, k);
        if (d < best) {
            best = d;
            hit = k;
        }
    }
    return best <= 3 ? hit : std::string();
}

inline void reject_unknown_keys(const Json& obj, const std::string& where,
                                const std::vector<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
        std::string msg = "unknown key '" + it.key() + "' in " + where;
        const std::string near = nearest_key(it.key(), known);
        if (!near.empty()) msg += "; did you mean '" + near + "'?";
        throw ConfigError(msg);
    }
}

inline double require_number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

inline std::vector<double> number_or_list(const Json& v, const std::string& where) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array() && !v.empty()) {
        for (const auto& e : v) out.push_back(require_number(e, where + " entry"));
    } else {
        throw ConfigError(where + ": expected a number or a non-empty list of numbers");
    }
    return out;
}

inline std::string require_string(const Json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

inline void require_one_of(const std::string& value, const std::vector<std::string>& allowed,
                           const std::string& where) {
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::string msg = where + ": '" + value + "' is not recognized";
    const std::string near = nearest_key(value, allowed);
    if (!near.empty()) msg += "; did you mean '" + near + "'?";
    throw ConfigError(msg);
}

} // namespace detail

inline ExperimentConfig parse_config(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config root: expected an object");

    ExperimentConfig cfg;
    detail::reject_unknown_keys(doc, "config root",
                                {"kind", "master_seed", "ensemble", "grid", "n_trajectories",
                                 "state", "observable", "target", "n_instances", "alpha_sq",
                                 "max_denominator", "output"});

    if (!doc.contains("kind")) throw ConfigError("kind: required");
    cfg.kind = detail::require_string(doc.at("kind"), "kind");
    detail::require_one_of(cfg.kind, experiment_kinds(), "kind");

    if (doc.contains("master_seed")) {
        const Json& v = doc.at("master_seed");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError("master_seed: expected a non-negative integer");
        cfg.master_seed = v.get<std::uint64_t>();
    }

    if (doc.contains("ensemble")) {
        const Json& ens = doc.at("ensemble");
        if (!ens.is_object()) throw ConfigError("ensemble: expected an object");
        detail::reject_unknown_keys(ens, "ensemble", {"kind", "lambda", "base"});
        if (ens.contains("kind")) {
            cfg.ensemble_kind = detail::require_string(ens.at("kind"), "ensemble.kind");
            detail::require_one_of(cfg.ensemble_kind, ensemble_kind_names(), "ensemble.kind");
        }
        if (ens.contains("lambda")) {
            cfg.lambdas = detail::number_or_list(ens.at("lambda"), "ensemble.lambda");
            for (double l : cfg.lambdas)
                if (!(l >= 0.0)) throw ConfigError("ensemble.lambda: entries must be >= 0");
        }
        if (ens.contains("base")) cfg.base = detail::require_string(ens.at("base"), "ensemble.base");
    }

    if (doc.contains("grid")) {
        const Json& grid = doc.at("grid");
        if (!grid.is_object()) throw ConfigError("grid: expected an object");
        detail::reject_unknown_keys(grid, "grid", {"tau", "slices"});
        if (grid.contains("tau")) {
            cfg.taus = detail::number_or_list(grid.at("tau"), "grid.tau");
            for (double t : cfg.taus)
                if (!(t > 0.0)) throw ConfigError("grid.tau: entries must be > 0");
        }
        if (grid.contains("slices")) {
            const Json& v = grid.at("slices");
            if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
                throw ConfigError("grid.slices: expected an integer >= 1");
            cfg.slices = v.get<int>();
        }
    }

    if (doc.contains("n_trajectories")) {
        const Json& v = doc.at("n_trajectories");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 2)
            throw ConfigError("n_trajectories: expected an integer >= 2");
        cfg.n_trajectories = v.get<std::int64_t>();
    }

    if (doc.contains("state")) cfg.state = detail::require_string(doc.at("state"), "state");
    if (doc.contains("observable"))
        cfg.observable = detail::require_string(doc.at("observable"), "observable");

    if (doc.contains("target")) {
        cfg.target = detail::require_string(doc.at("target"), "target");
        detail::require_one_of(cfg.target, {"state", "operator"}, "target");
    }

    if (doc.contains("n_instances")) {
        const Json& v = doc.at("n_instances");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw ConfigError("n_instances: expected an integer >= 1");
        cfg.n_instances = v.get<int>();
    }

    if (doc.contains("alpha_sq")) {
        const Json& v = doc.at("alpha_sq");
        if (!v.is_array() || v.empty())
            throw ConfigError("alpha_sq: expected a non-empty list of weights");
        double sum = 0.0;
        for (const auto& e : v) {
            const double a = detail::require_number(e, "alpha_sq entry");
            if (!(a >= 0.0)) throw ConfigError("alpha_sq: entries must be >= 0");
            cfg.alpha_sq.push_back(a);
            sum += a;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("alpha_sq: entries must sum to 1");
    }

    if (doc.contains("max_denominator")) {
        const Json& v = doc.at("max_denominator");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw ConfigError("max_denominator: expected an integer >= 1");
        cfg.max_denominator = v.get<long long>();
    }

    if (doc.contains("output")) {
        const Json& out = doc.at("output");
        if (!out.is_object()) throw ConfigError("output: expected an object");
        detail::reject_unknown_keys(out, "output", {"path", "format"});
        if (out.contains("path"))
            cfg.output.path = detail::require_string(out.at("path"), "output.path");
        if (out.contains("format")) {
            cfg.output.format = detail::require_string(out.at("format"), "output.format");
            detail::require_one_of(cfg.output.format, {"json", "csv"}, "output.format");
        }
    }

    if (cfg.kind == "baseline-envariance" && cfg.alpha_sq.empty())
        throw ConfigError("alpha_sq: required for kind 'baseline-envariance'");
    if (cfg.output.format == "csv" && cfg.kind != "decay-curve")
        throw ConfigError("output.format: 'csv' is only available for kind 'decay-curve'");

    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// Canonical form: every field materialized, fixed nesting; nlohmann objects
// serialize with sorted keys, so dump() is byte-stable.
inline Json ExperimentConfig::canonical() const {
    Json doc;
    doc["kind"] = kind;
    doc["master_seed"] = master_seed;
    doc["ensemble"]["kind"] = ensemble_kind;
    doc["ensemble"]["lambda"] = lambdas.size() == 1 ? Json(lambdas.front()) : Json(lambdas);
    doc["ensemble"]["base"] = base;
    doc["grid"]["tau"] = taus.size() == 1 ? Json(taus.front()) : Json(taus);
    doc["grid"]["slices"] = slices;
    doc["n_trajectories"] = n_trajectories;
    doc["state"] = state;
    doc["observable"] = observable;
    doc["target"] = target;
    doc["n_instances"] = n_instances;
    doc["alpha_sq"] = alpha_sq;
    doc["max_denominator"] = max_denominator;
    doc["output"]["path"] = output.path;
    doc["output"]["format"] = output.format;
    return doc;
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string config_digest(const ExperimentConfig& cfg) {
    return hex16(fnv1a64(cfg.canonical().dump()));
}

// ---- presets ------------------------------------------------------------
//
// Observables:   sigma_x | sigma_y | sigma_z | diag:[...] | ising:J
// States:        plus | plus:d | basis:i | eigenstate:i | mixed | diag:[...]
// Hamiltonians:  zero | zero:d | sigma_x|y|z | diag:[...] | ising:J

namespace detail {

inline std::vector<double> parse_bracket_list(const std::string& text, const std::string& where) {
    Json arr;
    try {
        arr = Json::parse(text);
    } catch (const Json::parse_error&) {
        throw ConfigError(where + ": cannot parse list '" + text + "'");
    }
    if (!arr.is_array() || arr.empty())
        throw ConfigError(where + ": expected a non-empty list, got '" + text + "'");
    std::vector<double> out;
    for (const auto& e : arr) out.push_back(require_number(e, where + " entry"));
    return out;
}

inline bool split_preset(const std::string& preset, const std::string& head, std::string& tail) {
    if (preset.rfind(head + ":", 0) != 0) return false;
    tail = preset.substr(head.size() + 1);
    return true;
}

inline int parse_index(const std::string& text, const std::string& where) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(text, &pos);
        if (pos != text.size() || v < 0) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(where + ": expected a non-negative integer, got '" + text + "'");
    }
}

} // namespace detail

inline HermitianOperator parse_observable_preset(const std::string& preset) {
    if (preset == "sigma_x") return HermitianOperator(pauli_x());
    if (preset == "sigma_y") return HermitianOperator(pauli_y());
    if (preset == "sigma_z") return HermitianOperator(pauli_z());
    std::string tail;
    if (detail::split_preset(preset, "diag", tail))
        return diagonal_operator(detail::parse_bracket_list(tail, "observable diag"));
    if (detail::split_preset(preset, "ising", tail)) {
        const Json j = Json::parse(tail, nullptr, false);
        if (!j.is_number()) throw ConfigError("observable: bad ising coupling '" + tail + "'");
        return HermitianOperator(j.get<double>() * tensor_product(pauli_z(), pauli_z()));
    }
    throw ConfigError("observable: unknown preset '" + preset + "'");
}

inline Matrix parse_hamiltonian_preset(const std::string& preset, int dim) {
    if (preset.empty() || preset == "zero") return Matrix::Zero(dim, dim);
    std::string tail;
    if (detail::split_preset(preset, "zero", tail)) {
        const int d = detail::parse_index(tail, "ensemble.base zero dimension");
        if (d != dim)
            throw ConfigError("ensemble.base: dimension " + std::to_string(d) +
                              " does not match observable dimension " + std::to_string(dim));
        return Matrix::Zero(dim, dim);
    }
    Matrix h;
    if (preset == "sigma_x") h = pauli_x();
    else if (preset == "sigma_y") h = pauli_y();
    else if (preset == "sigma_z") h = pauli_z();
    else if (detail::split_preset(preset, "diag", tail))
        h = diagonal_operator(detail::parse_bracket_list(tail, "ensemble.base diag")).matrix();
    else if (detail::split_preset(preset, "ising", tail)) {
        Json j = Json::parse(tail, nullptr, false);
        if (!j.is_number()) throw ConfigError("ensemble.base: bad ising coupling '" + tail + "'");
        h = j.get<double>() * tensor_product(pauli_z(), pauli_z());
    } else {
        throw ConfigError("ensemble.base: unknown preset '" + preset + "'");
    }
    if (h.rows() != dim)
        throw ConfigError("ensemble.base: preset '" + preset + "' has dimension " +
                          std::to_string(h.rows()) + ", observable has " + std::to_string(dim));
    return h;
}

inline DensityMatrix parse_state_preset(const std::string& preset, const SpectralDecomposition& obs,
                                        int dim) {
    std::string tail;
    if (preset == "plus" || detail::split_preset(preset, "plus", tail)) {
        if (!tail.empty()) {
            const int d = detail::parse_index(tail, "state plus dimension");
            if (d != dim)
                throw ConfigError("state: dimension " + std::to_string(d) +
                                  " does not match observable dimension " + std::to_string(dim));
        }
        Vector v = Vector::Constant(dim, Complex(1.0 / std::sqrt(double(dim)), 0.0));
        return pure_density(StateVector(std::move(v)));
    }
    if (detail::split_preset(preset, "basis", tail)) {
        const int i = detail::parse_index(tail, "state basis index");
        if (i >= dim) throw ConfigError("state: basis index " + std::to_string(i) + " out of range");
        return pure_density(basis_state(dim, i));
    }
    if (detail::split_preset(preset, "eigenstate", tail)) {
        const int i = detail::parse_index(tail, "state eigenstate index");
        if (i >= dim)
            throw ConfigError("state: eigenstate index " + std::to_string(i) + " out of range");
        return pure_density(StateVector(obs.basis.col(i)));
    }
    if (preset == "mixed") {
        return DensityMatrix(Matrix::Identity(dim, dim) / double(dim));
    }
    if (detail::split_preset(preset, "diag", tail)) {
        const std::vector<double> p = detail::parse_bracket_list(tail, "state diag");
        if (int(p.size()) != dim)
            throw ConfigError("state: diag length " + std::to_string(p.size()) +
                              " does not match observable dimension " + std::to_string(dim));
        double sum = 0.0;
        for (double x : p) {
            if (!(x >= 0.0)) throw ConfigError("state: diag entries must be >= 0");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("state: diag entries must sum to 1");
        Matrix rho = Matrix::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) rho(i, i) = p[i];
        return DensityMatrix(std::move(rho));
    }
    throw ConfigError("state: unknown preset '" + preset + "'");
}

} // namespace smilab
