#pragma once

// Run configuration: a strict JSON layout (unknown keys rejected, errors
// anchored to the offending key) plus the dispatcher that turns a validated
// configuration into an experiment report.

#include "rwde/experiments.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwde {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& a : allowed)
            if (key == a) known = true;
        if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
}

}  // namespace detail

// "2,1" or "1/2,1/3" -> rational tuple.
inline std::vector<Rat> parse_tuple(const std::string& text) {
    std::vector<Rat> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ConfigError("tuple \"" + text + "\": empty component");
        try {
            out.push_back(parse_rational(item));
        } catch (const std::exception& e) {
            throw ConfigError("tuple \"" + text + "\": " + e.what());
        }
    }
    if (out.empty()) throw ConfigError("tuple \"" + text + "\": no components");
    return out;
}

inline Rat parse_weight_field(const Json& v, const std::string& where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rat(v.get<std::int64_t>());
        if (v.is_number_float()) return Rat(v.get<double>());
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(where + ": expected a number or a rational string");
}

inline WeightSystem parse_model(const Json& j) {
    if (!j.is_object()) throw ConfigError("model: expected an object");
    detail::reject_unknown_keys(j, {"dimension", "steps", "weights", "nearest_neighbor"}, "model");
    if (!j.contains("dimension") || !j.at("dimension").is_number_integer())
        throw ConfigError("model.dimension: required integer");
    const int d = j.at("dimension").get<int>();

    StepSet steps;
    const bool nn = j.value("nearest_neighbor", !j.contains("steps"));
    if (j.contains("steps")) {
        if (!j.at("steps").is_array()) throw ConfigError("model.steps: expected an array");
        std::vector<IVec> list;
        for (const auto& s : j.at("steps")) {
            if (!s.is_array()) throw ConfigError("model.steps: each step must be an array");
            IVec e;
            for (const auto& c : s) {
                if (!c.is_number_integer()) throw ConfigError("model.steps: integer coordinates only");
                e.push_back(c.get<std::int64_t>());
            }
            list.push_back(std::move(e));
        }
        try {
            steps = StepSet(d, std::move(list), nn);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model.steps: ") + e.what());
        }
    } else {
        steps = StepSet::nearest_neighbor(d);
    }

    if (!j.contains("weights") || !j.at("weights").is_array())
        throw ConfigError("model.weights: required array");
    std::vector<Rat> weights;
    for (const auto& v : j.at("weights")) weights.push_back(parse_weight_field(v, "model.weights"));
    try {
        return WeightSystem(std::move(steps), std::move(weights));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

inline IVec parse_direction(const Json& j) {
    if (!j.is_object()) throw ConfigError("direction: expected an object");
    detail::reject_unknown_keys(j, {"u"}, "direction");
    if (!j.contains("u")) throw ConfigError("direction.u: required");
    const auto& u = j.at("u");
    try {
        if (u.is_string()) return normalize_direction(parse_tuple(u.get<std::string>()));
        if (u.is_array()) {
            std::vector<Rat> r;
            for (const auto& c : u) r.push_back(parse_weight_field(c, "direction.u"));
            return normalize_direction(r);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("direction.u: ") + e.what());
    }
    throw ConfigError("direction.u: expected a tuple string or an array");
}

struct RunConfig {
    WeightSystem model;
    std::optional<IVec> direction;
    std::string experiment;
    Json experiment_params = Json::object();
    RunOptions options;
    std::string out_dir;
    bool emit_json = false;

    explicit RunConfig(WeightSystem w) : model(std::move(w)) {}
};

inline RunConfig parse_run_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    detail::reject_unknown_keys(
        j, {"model", "direction", "experiment", "seed", "workers", "step_cap", "output"}, "config");
    if (!j.contains("model")) throw ConfigError("config.model: required");
    RunConfig cfg(parse_model(j.at("model")));
    if (j.contains("direction")) cfg.direction = parse_direction(j.at("direction"));

    if (!j.contains("experiment") || !j.at("experiment").is_object())
        throw ConfigError("config.experiment: required object");
    Json exp = j.at("experiment");
    detail::reject_unknown_keys(exp,
                                {"name", "L", "L_ladder", "L_trunc", "N", "walks", "environments",
                                 "steps", "max_cycle_len", "budget", "thresholds"},
                                "experiment");
    if (!exp.contains("name") || !exp.at("name").is_string())
        throw ConfigError("experiment.name: required string");
    cfg.experiment = exp.at("name").get<std::string>();
    exp.erase("name");
    if (exp.contains("thresholds")) {
        const auto& t = exp.at("thresholds");
        detail::reject_unknown_keys(t, {"z", "ks_p", "angle"}, "experiment.thresholds");
        if (t.contains("z")) cfg.options.z_threshold = t.at("z").get<double>();
        if (t.contains("ks_p")) cfg.options.ks_p_threshold = t.at("ks_p").get<double>();
        if (t.contains("angle")) cfg.options.angle_threshold = t.at("angle").get<double>();
        exp.erase("thresholds");
    }
    cfg.experiment_params = std::move(exp);

    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) throw ConfigError("config.seed: integer required");
        cfg.options.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("workers")) {
        if (!j.at("workers").is_number_integer() || j.at("workers").get<int>() < 1)
            throw ConfigError("config.workers: positive integer required");
        cfg.options.workers = j.at("workers").get<int>();
    }
    if (j.contains("step_cap")) cfg.options.step_cap = j.at("step_cap").get<std::uint64_t>();
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, {"dir", "json"}, "output");
        if (o.contains("dir")) cfg.out_dir = o.at("dir").get<std::string>();
        if (o.contains("json")) cfg.emit_json = o.at("json").get<bool>();
    }
    return cfg;
}

// Dispatch a named experiment with its parameter block (defaults applied).
inline ExperimentReport run_named_experiment(const std::string& name, const WeightSystem& w,
                                             const std::optional<IVec>& direction,
                                             const Json& params, const RunOptions& opt) {
    auto get_u = [&]() -> IVec {
        if (!direction) throw ConfigError("experiment \"" + name + "\" requires a direction");
        return *direction;
    };
    auto ladder_or = [&](std::vector<int> fallback) {
        if (params.contains("L_ladder")) return params.at("L_ladder").get<std::vector<int>>();
        if (params.contains("L")) return std::vector<int>{params.at("L").get<int>()};
        return fallback;
    };
    const std::uint64_t walks = params.value("walks", std::uint64_t(100000));
    const std::uint64_t envs = params.value("environments", std::uint64_t(2000));

    if (name == "halfspace-stay") {
        const auto f = make_frame(w, get_u());
        return estimate_halfspace_stay(w, f, ladder_or({10, 20, 40, 80}), walks, opt);
    }
    if (name == "slab-ratio") {
        const auto f = make_frame(w, get_u());
        return estimate_slab_ratio(w, f, params.value("L", 10), walks, opt);
    }
    if (name == "conditional-return") {
        const auto f = make_frame(w, get_u());
        return estimate_conditional_return(w, f, params.value("L_trunc", 200), walks, opt);
    }
    if (name == "cylinder-beta-law") {
        const auto f = make_frame(w, get_u());
        return cylinder_beta_experiment(w, f, params.value("L", 200), envs, opt);
    }
    if (name == "cycle-reversal") {
        const auto f = make_frame(w, get_u());
        return verify_lemma1_experiment(w, f, params.value("N", 1), params.value("L", 1),
                                        params.value("max_cycle_len", 8),
                                        params.value("budget", std::uint64_t(1'000'000)), opt);
    }
    if (name == "environment-reversal") {
        const auto f = make_frame(w, get_u());
        return verify_lemma2_experiment(w, f, params.value("L", 2),
                                        params.value("environments", std::uint64_t(5000)),
                                        params.value("max_cycle_len", 6), opt);
    }
    if (name == "transience-bound") {
        const auto f = make_frame(w, get_u());
        return transience_lower_bound_experiment(w, f, ladder_or({5, 10, 20, 40}), walks, opt);
    }
    if (name == "start-shift") {
        const auto f = make_frame(w, get_u());
        return start_shift_equivalence(w, f, params.value("N", 1), params.value("L", 2), walks,
                                       opt);
    }
    if (name == "asymptotic-direction") {
        return asymptotic_direction_experiment(w, params.value("steps", std::uint64_t(100000)),
                                               params.value("walks", std::uint64_t(100)), opt);
    }
    if (name == "oscillation-demo") {
        return oscillation_demo(w, get_u(), params.value("steps", std::uint64_t(100000)),
                                params.value("walks", std::uint64_t(20)), opt);
    }
    throw ConfigError("unknown experiment \"" + name + "\"; see the list subcommand");
}

}  // namespace rwde
