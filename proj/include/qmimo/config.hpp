// SPDX-License-Identifier: Apache-2.0
//
// qmimo: link-level simulation of fronthaul-constrained all-digital
// massive MIMO with low-resolution data converters
// Copyright (C) 2026 the qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QMIMO_CONFIG_HPP
#define QMIMO_CONFIG_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmimo/engine.hpp"

namespace qmimo {

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                         const std::string& prefix) {
    if (!j.is_object()) throw ConfigError(prefix.empty() ? "config: expected a JSON object"
                                                         : prefix + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool found = false;
        for (const auto& k : known)
            if (item.key() == k) {
                found = true;
                break;
            }
        if (!found)
            throw ConfigError("unknown key '" + (prefix.empty() ? "" : prefix + ".") + item.key() +
                              "'");
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, const std::string& prefix) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("invalid value for '" + (prefix.empty() ? "" : prefix + ".") + key +
                          "'");
    }
}

inline std::vector<CsiMode> parse_csi_mode(const std::string& s) {
    if (s == "perfect") return {CsiMode::kPerfect};
    if (s == "estimated") return {CsiMode::kEstimated};
    if (s == "both") return {CsiMode::kPerfect, CsiMode::kEstimated};
    throw ConfigError("csi_mode: expected one of perfect|estimated|both");
}

inline CombinerKind parse_combiner(const std::string& s) {
    if (s == "mr") return CombinerKind::kMr;
    if (s == "da-mmse") return CombinerKind::kDaMmse;
    throw ConfigError("combiner: expected one of mr|da-mmse");
}

inline PrecoderKind parse_precoder(const std::string& s) {
    if (s == "mr") return PrecoderKind::kMr;
    throw ConfigError("precoder: expected mr");
}

inline OutagePooling parse_pooling(const std::string& s) {
    if (s == "pooled") return OutagePooling::kPerUserPooled;
    if (s == "worst-user") return OutagePooling::kWorstUser;
    throw ConfigError("outage_pooling: expected one of pooled|worst-user");
}

}  // namespace detail

/// Build a SystemConfig from a JSON document. Unknown keys and out-of-range
/// values are rejected with the offending key path; missing keys keep their
/// defaults.
inline SystemConfig config_from_json(const nlohmann::json& j) {
    SystemConfig cfg;
    detail::require_keys(
        j,
        {"fronthaul_rate", "resolutions", "num_users", "rho_ul_db", "rho_dl_db", "wavelength_m",
         "array_length_m", "d_min_m", "d_max_m", "phi_min_deg", "phi_max_deg", "clip_prob",
         "pilot_len", "outage_level", "trials", "seed", "csi_mode", "combiner", "precoder",
         "outage_pooling", "threads", "mse_curve"},
        "");

    detail::read_field(j, "fronthaul_rate", cfg.fronthaul_rate, "");
    detail::read_field(j, "resolutions", cfg.resolutions, "");
    detail::read_field(j, "num_users", cfg.num_users, "");
    detail::read_field(j, "rho_ul_db", cfg.rho_ul_db, "");
    detail::read_field(j, "rho_dl_db", cfg.rho_dl_db, "");
    detail::read_field(j, "wavelength_m", cfg.wavelength_m, "");
    detail::read_field(j, "array_length_m", cfg.array_length_m, "");
    detail::read_field(j, "d_min_m", cfg.d_min_m, "");
    detail::read_field(j, "d_max_m", cfg.d_max_m, "");
    detail::read_field(j, "phi_min_deg", cfg.phi_min_deg, "");
    detail::read_field(j, "phi_max_deg", cfg.phi_max_deg, "");
    detail::read_field(j, "clip_prob", cfg.clip_prob, "");
    detail::read_field(j, "pilot_len", cfg.pilot_len, "");
    detail::read_field(j, "outage_level", cfg.outage_level, "");
    detail::read_field(j, "trials", cfg.trials, "");
    detail::read_field(j, "seed", cfg.seed, "");
    detail::read_field(j, "threads", cfg.threads, "");

    if (j.contains("csi_mode")) {
        std::string s;
        detail::read_field(j, "csi_mode", s, "");
        cfg.csi_modes = detail::parse_csi_mode(s);
    }
    if (j.contains("combiner")) {
        std::string s;
        detail::read_field(j, "combiner", s, "");
        cfg.combiner = detail::parse_combiner(s);
    }
    if (j.contains("precoder")) {
        std::string s;
        detail::read_field(j, "precoder", s, "");
        cfg.precoder = detail::parse_precoder(s);
    }
    if (j.contains("outage_pooling")) {
        std::string s;
        detail::read_field(j, "outage_pooling", s, "");
        cfg.pooling = detail::parse_pooling(s);
    }
    if (j.contains("mse_curve")) {
        const nlohmann::json& m = j.at("mse_curve");
        detail::require_keys(m,
                             {"num_antennas", "num_users", "pilot_lengths", "rho_db",
                              "resolutions", "include_infinite", "trials"},
                             "mse_curve");
        detail::read_field(m, "num_antennas", cfg.mse_curve.num_antennas, "mse_curve");
        detail::read_field(m, "num_users", cfg.mse_curve.num_users, "mse_curve");
        detail::read_field(m, "pilot_lengths", cfg.mse_curve.pilot_lengths, "mse_curve");
        detail::read_field(m, "rho_db", cfg.mse_curve.rho_db, "mse_curve");
        detail::read_field(m, "resolutions", cfg.mse_curve.resolutions, "mse_curve");
        detail::read_field(m, "include_infinite", cfg.mse_curve.include_infinite, "mse_curve");
        detail::read_field(m, "trials", cfg.mse_curve.trials, "mse_curve");
    }

    cfg.validate();
    return cfg;
}

/// Canonical JSON snapshot of a configuration (sorted keys, dB-scale powers).
inline nlohmann::json config_to_json(const SystemConfig& cfg) {
    nlohmann::json j;
    j["fronthaul_rate"] = cfg.fronthaul_rate;
    j["resolutions"] = cfg.resolutions;
    j["num_users"] = cfg.num_users;
    j["rho_ul_db"] = cfg.rho_ul_db;
    j["rho_dl_db"] = cfg.rho_dl_db;
    j["wavelength_m"] = cfg.wavelength_m;
    j["array_length_m"] = cfg.array_length_m;
    j["d_min_m"] = cfg.d_min_m;
    j["d_max_m"] = cfg.d_max_m;
    j["phi_min_deg"] = cfg.phi_min_deg;
    j["phi_max_deg"] = cfg.phi_max_deg;
    j["clip_prob"] = cfg.clip_prob;
    j["pilot_len"] = cfg.pilot_len;
    j["outage_level"] = cfg.outage_level;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["csi_mode"] = cfg.csi_modes.size() == 2 ? "both" : to_string(cfg.csi_modes.front());
    j["combiner"] = cfg.combiner == CombinerKind::kMr ? "mr" : "da-mmse";
    j["precoder"] = "mr";
    j["outage_pooling"] =
        cfg.pooling == OutagePooling::kPerUserPooled ? "pooled" : "worst-user";
    j["threads"] = cfg.threads;
    j["mse_curve"] = {{"num_antennas", cfg.mse_curve.num_antennas},
                      {"num_users", cfg.mse_curve.num_users},
                      {"pilot_lengths", cfg.mse_curve.pilot_lengths},
                      {"rho_db", cfg.mse_curve.rho_db},
                      {"resolutions", cfg.mse_curve.resolutions},
                      {"include_infinite", cfg.mse_curve.include_infinite},
                      {"trials", cfg.mse_curve.trials}};
    return j;
}

/// Load a configuration file. An empty (or whitespace-only) file yields the
/// built-in defaults; a missing file is an error.
inline SystemConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not readable: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        SystemConfig cfg;
        cfg.validate();
        return cfg;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace qmimo

#endif  // QMIMO_CONFIG_HPP
