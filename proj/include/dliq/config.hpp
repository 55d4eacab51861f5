// SPDX-License-Identifier: Apache-2.0
//
// Strict JSON configuration: exactly the nine model keys, all numeric.
#pragma once

#include "dliq/model.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <string>

namespace dliq {

inline ModelParams params_from_json(const nlohmann::json& j) {
    static const std::set<std::string> keys = {"mu",           "sigma",        "delta",
                                               "gamma",        "cost_sell",    "default_rate",
                                               "default_penalty", "barrier",   "rho"};
    if (!j.is_object())
        throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!keys.count(it.key()))
            throw Error(ErrorCode::ConfigError, "unknown config key: " + it.key());
        if (!it.value().is_number())
            throw Error(ErrorCode::ConfigError, "config key " + it.key() + " must be a number");
    }
    for (const auto& k : keys)
        if (!j.contains(k))
            throw Error(ErrorCode::ConfigError, "missing config key: " + k);
    ModelParams p;
    p.mu = j.at("mu").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.delta = j.at("delta").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.cost_sell = j.at("cost_sell").get<double>();
    p.default_rate = j.at("default_rate").get<double>();
    p.default_penalty = j.at("default_penalty").get<double>();
    p.barrier = j.at("barrier").get<double>();
    p.rho = j.at("rho").get<double>();
    return validate(p);
}

inline ModelParams params_from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw Error(ErrorCode::ConfigError, "cannot open config file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config parse error: ") + e.what());
    }
    return params_from_json(j);
}

} // namespace dliq
