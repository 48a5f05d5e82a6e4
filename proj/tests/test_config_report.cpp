#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmimo/config.hpp"
#include "qmimo/report.hpp"

using namespace qmimo;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    return out;
}

SystemConfig tiny_sweep_config() {
    SystemConfig cfg;
    cfg.trials = 4;
    cfg.resolutions = {1, 2, 3, 4, 5, 6, 7, 8};
    cfg.seed = 31337;
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("defaults cover the reference scenario") {
    const SystemConfig cfg = config_from_json(nlohmann::json::object());
    CHECK(cfg.fronthaul_rate == 512.0);
    CHECK(cfg.num_users == 8);
    CHECK(cfg.wavelength_m == 0.01);
    CHECK(cfg.array_length_m == doctest::Approx(1.28));
    CHECK(cfg.d_min_m == 50.0);
    CHECK(cfg.d_max_m == 150.0);
    CHECK(cfg.phi_min_deg == 30.0);
    CHECK(cfg.phi_max_deg == 150.0);
    CHECK(cfg.clip_prob == 1e-4);
    CHECK(cfg.pilot_len == 100);
    CHECK(cfg.outage_level == 0.1);
    CHECK(cfg.resolutions == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(cfg.rho_ul == doctest::Approx(db_to_linear(cfg.rho_ul_db)));
}

TEST_CASE("empty config file falls back to defaults") {
    const std::string path = temp_path("qmimo_empty_config.json");
    std::ofstream(path) << "   \n";
    const SystemConfig cfg = parse_config(path);
    CHECK(cfg.fronthaul_rate == 512.0);
    CHECK(cfg.num_users == 8);
    CHECK_THROWS_AS(parse_config(temp_path("qmimo_missing_config.json")), ConfigError);
}

TEST_CASE("unknown keys are rejected with their path") {
    try {
        config_from_json({{"fronthaul_rat", 256.0}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("fronthaul_rat") != std::string::npos);
    }
    try {
        config_from_json({{"mse_curve", {{"pilot_count", 5}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("mse_curve.pilot_count") != std::string::npos);
    }
}

TEST_CASE("range violations carry the key name") {
    CHECK_THROWS_AS(config_from_json({{"trials", 0}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"resolutions", {9}}, {"fronthaul_rate", 16.0}}),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json({{"outage_level", 1.5}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"csi_mode", "sometimes"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"precoder", "zf"}}), ConfigError);
    CHECK(config_from_json({{"precoder", "mr"}}).precoder == PrecoderKind::kMr);

    const SystemConfig cfg = config_from_json({{"outage_level", 0.05}});
    CHECK(cfg.outage_level == 0.05);
}

TEST_CASE("config json round trip") {
    SystemConfig cfg;
    cfg.rho_ul_db = -10.0;
    cfg.csi_modes = {CsiMode::kPerfect, CsiMode::kEstimated};
    cfg.pooling = OutagePooling::kWorstUser;
    cfg.combiner = CombinerKind::kDaMmse;
    cfg.validate();
    const SystemConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.rho_ul_db == cfg.rho_ul_db);
    CHECK(back.csi_modes == cfg.csi_modes);
    CHECK(back.pooling == cfg.pooling);
    CHECK(back.combiner == cfg.combiner);
    CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("sweep csv format, antenna column and round trip") {
    const SystemConfig cfg = tiny_sweep_config();
    const std::string out = temp_path("qmimo_sweep_test.csv");
    const auto rows = cmd_sweep(cfg, out);
    CHECK(rows.size() == 8);

    const std::string text = slurp(out);
    CHECK(text.find('\r') == std::string::npos);

    std::istringstream lines(text);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "q,b,csi_mode,rho_ul_db,rho_dl_db,ul_rate,dl_rate,bidir_rate,trials,seed");

    const int expected_b[] = {256, 128, 85, 64, 51, 42, 36, 32};
    std::string line;
    int row_index = 0;
    while (std::getline(lines, line)) {
        const auto cells = split(line, ',');
        REQUIRE(cells.size() == 10);
        CHECK(std::stoi(cells[0]) == row_index + 1);
        CHECK(std::stoi(cells[1]) == expected_b[row_index]);
        CHECK(cells[2] == "perfect");
        CHECK(std::stoull(cells[9]) == cfg.seed);
        CHECK(std::stoi(cells[8]) == cfg.trials);
        ++row_index;
    }
    CHECK(row_index == 8);
}

TEST_CASE("sweep output is reproducible and carries a manifest") {
    SystemConfig cfg;
    cfg.trials = 3;
    cfg.resolutions = {4, 8};
    cfg.seed = 777;
    cfg.validate();

    const std::string out_a = temp_path("qmimo_sweep_a.csv");
    const std::string out_b = temp_path("qmimo_sweep_b.csv");
    cmd_sweep(cfg, out_a);
    cmd_sweep(cfg, out_b);
    CHECK(slurp(out_a) == slurp(out_b));

    REQUIRE(std::filesystem::exists(manifest_path(out_a)));
    const nlohmann::json manifest = nlohmann::json::parse(slurp(manifest_path(out_a)));
    CHECK(manifest.at("tool") == kToolName);
    CHECK(manifest.at("tool_version") == kToolVersion);
    CHECK(manifest.at("seed") == cfg.seed);
    CHECK(manifest.at("outputs").at(0) == out_a);
    const nlohmann::json snapshot = config_to_json(cfg);
    CHECK(manifest.at("config") == snapshot);
    CHECK(manifest.at("config_hash") == fnv1a64(snapshot.dump()));
    CHECK(manifest.contains("started_at"));
    CHECK(manifest.contains("finished_at"));
}

TEST_CASE("mse curve csv has analytic values only where the closed form exists") {
    SystemConfig cfg;
    cfg.mse_curve.num_antennas = 1;
    cfg.mse_curve.num_users = 1;
    cfg.mse_curve.pilot_lengths = {1, 4};
    cfg.mse_curve.rho_db = {0.0};
    cfg.mse_curve.resolutions = {1};
    cfg.mse_curve.include_infinite = true;
    cfg.mse_curve.trials = 2000;
    cfg.seed = 5;
    cfg.validate();

    const std::string out = temp_path("qmimo_mse_test.csv");
    const auto rows = cmd_mse_curve(cfg, out);
    CHECK(rows.size() == 4);  // {1-bit, infinite} x {n_p = 1, 4}
    REQUIRE(std::filesystem::exists(manifest_path(out)));

    const std::string text = slurp(out);
    std::istringstream lines(text);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "mode,q,n_p,rho_db,mse_analytic,mse_empirical");

    std::string line;
    int quantized_rows = 0, infinite_rows = 0;
    while (std::getline(lines, line)) {
        const auto cells = split(line, ',');
        REQUIRE(cells.size() == 6);
        if (cells[0] == "quantized") {
            ++quantized_rows;
            CHECK(cells[1] == "1");
            CHECK_FALSE(cells[4].empty());  // closed form applies: 1-bit, single user
            const double analytic = std::stod(cells[4]);
            const double empirical = std::stod(cells[5]);
            CHECK(empirical == doctest::Approx(analytic).epsilon(0.15));
        } else {
            ++infinite_rows;
            CHECK(cells[0] == "infinite");
            CHECK(cells[1].empty());
            CHECK(cells[4].empty());  // no closed form recorded
            CHECK_FALSE(cells[5].empty());
        }
    }
    CHECK(quantized_rows == 2);
    CHECK(infinite_rows == 2);
}

TEST_CASE("formatted doubles parse back exactly") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
}
