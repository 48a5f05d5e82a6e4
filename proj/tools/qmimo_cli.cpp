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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qmimo/config.hpp"
#include "qmimo/report.hpp"
#include "qmimo/validation.hpp"
#include "qmimo/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> csi;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_trials_csi) {
    cmd->add_option("--config", args.config_path, "JSON configuration file");
    cmd->add_option("--seed", args.seed, "Override the master seed");
    cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)");
    if (with_trials_csi) {
        cmd->add_option("--trials", args.trials, "Override the Monte Carlo drop count");
        cmd->add_option("--csi", args.csi, "CSI mode: perfect, estimated or both");
    }
}

qmimo::SystemConfig load_config(const CommonArgs& args) {
    qmimo::SystemConfig cfg =
        args.config_path.empty() ? qmimo::SystemConfig{} : qmimo::parse_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.trials) cfg.trials = *args.trials;
    if (args.csi) cfg.csi_modes = qmimo::detail::parse_csi_mode(*args.csi);
    if (args.threads) cfg.threads = *args.threads;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link-level simulator for fronthaul-constrained massive MIMO with "
                 "low-resolution data converters"};
    app.set_version_flag("--version", std::string(qmimo::kToolVersion));
    app.require_subcommand(1);

    CommonArgs sweep_args, mse_args, validate_args;
    std::string sweep_out = "sweep.csv";
    std::string mse_out = "mse_curve.csv";

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Sweep converter resolution vs antenna count at a fixed fronthaul rate");
    add_common(sweep, sweep_args, true);
    sweep->add_option("--out", sweep_out, "Output CSV path");

    CLI::App* mse = app.add_subcommand(
        "mse-curve", "Channel-estimation error versus pilot count and SNR");
    add_common(mse, mse_args, false);
    mse->add_option("--out", mse_out, "Output CSV path");

    CLI::App* validate =
        app.add_subcommand("validate", "Run the built-in validation suite");
    validate->add_option("--seed", validate_args.seed, "Override the validation seed");
    validate->add_option("--threads", validate_args.threads, "Worker threads for the sweeps");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            const qmimo::SystemConfig cfg = load_config(sweep_args);
            const auto rows = qmimo::cmd_sweep(cfg, sweep_out);
            std::cout << "wrote " << rows.size() << " rows to " << sweep_out << " (manifest "
                      << qmimo::manifest_path(sweep_out) << ")\n";
        } else if (mse->parsed()) {
            const qmimo::SystemConfig cfg = load_config(mse_args);
            const auto rows = qmimo::cmd_mse_curve(cfg, mse_out);
            std::cout << "wrote " << rows.size() << " rows to " << mse_out << " (manifest "
                      << qmimo::manifest_path(mse_out) << ")\n";
        } else if (validate->parsed()) {
            qmimo::AcceptanceOptions opt;
            if (validate_args.seed) opt.seed = *validate_args.seed;
            if (validate_args.threads) opt.threads = *validate_args.threads;
            const auto results = qmimo::run_acceptance_checks(
                opt, [](const qmimo::CheckResult& r) { qmimo::print_check(std::cout, r); });
            bool all_pass = true;
            for (const auto& r : results) all_pass &= r.pass;
            std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
            return all_pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
