// SPDX-License-Identifier: Apache-2.0
//
// scsce: structured compressive-sensing channel estimation for FDD massive MIMO
// Copyright (C) 2026 The scsce authors
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

#include <scsce/harness.hpp>

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace scsce;
using Catch::Approx;

namespace {

nlohmann::json tiny(const std::string &scenario)
{
    return nlohmann::json{{"scenario", scenario},
                          {"channel", {{"L", 16}, {"M", 8}, {"P", 3}, {"profile", "uniform-random"}}},
                          {"ofdm", {{"N", 256}, {"Ng", 16}}},
                          {"group", {{"N_G", 2}, {"M_G", 4}}},
                          {"np_list", {32}},
                          {"snr_db_list", {10, 30}},
                          {"algorithms", {"assp", "oracle_ls"}},
                          {"trials", 4},
                          {"seed", 9}};
}

std::string csv_of(const std::vector<ResultRecord> &r)
{
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

} // namespace

TEST_CASE("stopping threshold table", "[harness]")
{
    CHECK(p_th_for_snr(10) == 0.1);
    CHECK(p_th_for_snr(15) == 0.08);
    CHECK(p_th_for_snr(20) == 0.06);
    CHECK(p_th_for_snr(25) == 0.05);
    CHECK(p_th_for_snr(30) == 0.04);
    CHECK(p_th_for_snr(12.5) == Approx(0.09));
    CHECK(p_th_for_snr(27.5) == Approx(0.045));
    CHECK(p_th_for_snr(0) == 0.1);
    CHECK(p_th_for_snr(45) == 0.04);
}

TEST_CASE("pilot overhead anchors", "[harness]")
{
    CHECK(pilot_overhead(390, 64, 4096, 1, 32) == Approx(390.0 * 64 / (4096.0 * 32)));
    CHECK(std::round(pilot_overhead(390, 64, 4096, 1, 32) * 1e4) / 100 == Approx(19.04));
    CHECK(std::round(pilot_overhead(350, 64, 4096, 1, 32) * 1e4) / 100 == Approx(17.09));
    CHECK(std::round(pilot_overhead(400, 64, 4096, 1, 32) * 1e4) / 100 == Approx(19.53));
    // printed figures are truncated, not rounded
    CHECK(std::floor(350.0 / 32 * 10) / 10 == Approx(10.9));
    CHECK(std::floor(390.0 / 32 * 100) / 100 == Approx(12.18));
    CHECK(pilot_overhead(390, 64, 4096, 5, 32) == Approx(pilot_overhead(390, 64, 4096, 1, 32) / 5));
}

TEST_CASE("paper preset", "[harness]")
{
    const auto c = paper_preset();
    CHECK(c.N == 4096);
    CHECK(c.Ng == 64);
    CHECK(c.channel.L == 64);
    CHECK(c.channel.M == 64);
    CHECK(c.channel.P == 6);
    CHECK(c.group.M_G == 32);
    CHECK(c.group.N_G == 2);
    CHECK(c.channel.carrier_hz == 2e9);
    CHECK(c.channel.bandwidth_hz == 10e6);
    CHECK(c.trials == 200);
    CHECK(c.np_list == std::vector<int>{250, 300, 350, 390, 400, 450});
    CHECK(c.channel.symbol_duration_s == Approx(416e-6));
    CHECK(c.channel.doppler_hz == Approx(111.19).margin(0.01));
    CHECK(c.violations().empty());
}

TEST_CASE("configuration diagnostics list every violation", "[harness]")
{
    auto j = tiny("mse_vs_snr");
    j["trials"] = 0;
    CHECK_THROWS_AS(config_from_json(j), InvalidSpec);

    auto bad = tiny("mse_vs_snr");
    bad["trials"] = 0;
    bad["np_list"] = {32, 300};
    bad["colour"] = "blue";
    bad["group"]["N_G"] = 3;
    try {
        (void)config_from_json(bad);
        FAIL("expected InvalidSpec");
    } catch (const InvalidSpec &e) {
        const std::string msg = e.what();
        CHECK(msg.find("trials") != std::string::npos);
        CHECK(msg.find("colour") != std::string::npos);
        CHECK(msg.find("Np=300") != std::string::npos);
        CHECK(msg.find("N_G * M_G = M") != std::string::npos);
    }

    auto wrong_type = tiny("mse_vs_snr");
    wrong_type["trials"] = "many";
    CHECK_THROWS_AS(config_from_json(wrong_type), InvalidSpec);

    auto unknown = tiny("fig11");
    CHECK_THROWS_AS(config_from_json(unknown), InvalidSpec);

    auto alg = tiny("mse_vs_snr");
    alg["algorithms"] = {"omp"};
    CHECK_THROWS_AS(config_from_json(alg), InvalidSpec);
}

TEST_CASE("overhead list must match the identity", "[harness]")
{
    nlohmann::json j{{"np_list", {390, 350}}, {"eta_p_list", {0.19043, 0.17090}}};
    CHECK_NOTHROW(config_from_json(j));
    j["eta_p_list"] = {0.1904, 0.1709}; // off by more than 0.01 %
    CHECK_THROWS_AS(config_from_json(j), InvalidSpec);
    j["eta_p_list"] = {0.19043};
    CHECK_THROWS_AS(config_from_json(j), InvalidSpec);
}

TEST_CASE("records carry the overhead identity and crlb", "[harness]")
{
    const auto c = config_from_json(tiny("mse_vs_snr"));
    const auto recs = run(c);
    REQUIRE_FALSE(recs.empty());
    for (const auto &r : recs) {
        CHECK(std::abs(r.eta_p - pilot_overhead(r.Np, 8, 256, r.f_p, 4)) < 1e-6);
        CHECK(std::isfinite(r.value));
        CHECK(r.ci95 >= 0.0);
        CHECK(r.trial_count == 4);
        if (r.metric == "nmse")
            CHECK(*r.crlb == Approx(1.0 / std::pow(10.0, r.snr_db / 10.0)));
    }
}

TEST_CASE("runs are deterministic and independent of the worker count", "[harness]")
{
    auto c = config_from_json(tiny("mse_vs_snr"));
    const auto a = csv_of(run(c));
    const auto b = csv_of(run(c));
    c.threads = 3;
    const auto d = csv_of(run(c));
    CHECK(a == b);
    CHECK(a == d);
    c.seed = 10;
    CHECK(csv_of(run(c)) != a);
}

TEST_CASE("aggregated means match the trial log", "[harness]")
{
    const auto c = config_from_json(tiny("mse_vs_snr"));
    TrialLog log;
    const auto recs = run(c, &log);
    REQUIRE(log.values.size() == 4);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        double sum = 0.0;
        for (const auto &row : log.values)
            sum += row.at(i);
        CHECK(recs[i].value == Approx(sum / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("every scenario runs at toy scale", "[harness]")
{
    for (const char *s : {"mse_vs_overhead", "sparsity_histogram", "temporal_joint", "pilot_sharing",
                          "pilot_placement_compare"}) {
        auto j = tiny(s);
        j["r_list"] = {1, 2};
        j["fp_list"] = {1, 3};
        const auto recs = run(config_from_json(j));
        CHECK_FALSE(recs.empty());
    }

    auto h = tiny("sparsity_histogram");
    const auto recs = run(config_from_json(h));
    for (double snr : {10.0, 30.0}) {
        double total = 0.0;
        for (const auto &r : recs)
            if (r.snr_db == snr && r.metric.rfind("p_s=", 0) == 0)
                total += r.value;
        CHECK(total == Approx(1.0).epsilon(1e-12));
    }

    auto ps = tiny("pilot_sharing");
    ps["fp_list"] = {1, 3};
    for (const auto &r : run(config_from_json(ps)))
        CHECK(r.eta_p == Approx(pilot_overhead(32, 8, 256, r.f_p, 4)));
}

TEST_CASE("ber scenario", "[harness]")
{
    auto j = tiny("ber_curve");
    j["trials"] = 1;
    j["link"] = {{"K", 4}};
    j["snr_db_list"] = {30};
    j["ber_subcarriers"] = 64;
    const auto recs = run(config_from_json(j));
    const auto perfect = find_record(recs, "perfect_csi", 30, 32, "ber");
    const auto assp = find_record(recs, "assp", 30, 32, "ber");
    REQUIRE(perfect);
    REQUIRE(assp);
    CHECK(perfect->value <= assp->value);
    CHECK(perfect->value < 1e-2);

    j["link"] = {{"K", 9}};
    CHECK_THROWS_AS(config_from_json(j), InvalidSpec);
}

TEST_CASE("csv emission", "[harness]")
{
    ResultRecord r;
    r.scenario = "mse_vs_snr";
    r.algorithm = "assp";
    r.snr_db = 20;
    r.Np = 390;
    r.eta_p = pilot_overhead(390, 64, 4096, 1, 32);
    r.trial_count = 200;
    r.metric = "nmse";
    r.value = 0.0125;
    r.ci95 = 0.001;
    r.crlb = 1.0 / db_to_linear(20.0);

    const auto dir = std::filesystem::temp_directory_path() / "scsce_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "one.csv").string();
    emit_csv({r}, path);
    std::ifstream in(path);
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    CHECK_FALSE(std::getline(in, extra));
    CHECK(header == "scenario,algorithm,snr_db,np,eta_p,r,f_p,trials,metric,value,ci95,crlb");
    CHECK(row.rfind("mse_vs_snr,assp,20,390,0.1904296875,1,1,200,nmse,0.0125,0.001,0.01", 0) == 0);

    std::ostringstream stamped;
    write_csv(stamped, {r}, std::string("2026-01-01T00:00:00Z"));
    CHECK(stamped.str().rfind("# generated 2026-01-01T00:00:00Z\n", 0) == 0);

    CHECK_THROWS_AS(emit_csv({}, path), InvalidArgument);
    try {
        emit_csv({r}, (dir / "missing" / "x.csv").string());
        FAIL("expected an I/O error");
    } catch (const std::runtime_error &e) {
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("shipped configurations load", "[harness]")
{
    int n = 0;
    for (const auto &e : std::filesystem::directory_iterator(SCSCE_CONFIG_DIR)) {
        if (e.path().extension() != ".json")
            continue;
        INFO(e.path().string());
        ExperimentConfig c;
        REQUIRE_NOTHROW(c = load_config(e.path().string()));
        CHECK(c.scenario == scenario_from_string(e.path().stem().string()));
        ++n;
    }
    CHECK(n == 7);
}
