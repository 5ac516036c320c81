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

// scsce command line: experiment runs, sensing-matrix diagnostics and the
// toy self-test.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.

#include <scsce/scsce.hpp>

#include "selftest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace scsce;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct MatrixArgs {
    int N = 4096;
    int Np = 390;
    int M = 32;
    int L = 64;
    int I0 = 1;
    std::uint64_t seed = 1;
};

void add_matrix_flags(CLI::App *cmd, MatrixArgs &a)
{
    cmd->add_option("--N", a.N, "Subcarriers")->capture_default_str();
    cmd->add_option("--Np", a.Np, "Pilot subcarriers")->capture_default_str();
    cmd->add_option("--M", a.M, "Antennas per group")->capture_default_str();
    cmd->add_option("--L", a.L, "Channel taps")->capture_default_str();
    cmd->add_option("--I0", a.I0, "First pilot subcarrier")->capture_default_str();
    cmd->add_option("--seed", a.seed, "Pilot phase seed")->capture_default_str();
}

SensingMatrix build(const MatrixArgs &a) { return assemble_sensing(make_pilot_config(a.N, a.Np, a.M, a.seed, a.I0), a.L); }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Structured compressive-sensing channel estimation for FDD massive MIMO"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials, threads;
    bool timestamp = false;
    auto *run_cmd = app.add_subcommand("run", "Run a Monte-Carlo experiment and write CSV results");
    run_cmd->add_option("--config", config_path, "JSON experiment configuration")->required();
    run_cmd->add_option("--out", out_path, "CSV output path")->required();
    run_cmd->add_option("--seed", seed, "Override the experiment seed");
    run_cmd->add_option("--trials", trials, "Override the trial count");
    run_cmd->add_option("--threads", threads, "Worker threads");
    run_cmd->add_flag("--timestamp", timestamp, "Prepend a generation-time comment line");

    MatrixArgs srip_args;
    int srip_s = 2, srip_trials = 1000;
    auto *srip_cmd = app.add_subcommand("probe-srip", "Monte-Carlo lower bound on the structured RIP constant");
    add_matrix_flags(srip_cmd, srip_args);
    srip_cmd->add_option("--s", srip_s, "Block sparsity")->capture_default_str();
    srip_cmd->add_option("--trials", srip_trials, "Sampled supports (exhaustive when >= C(L, s))")
        ->capture_default_str();

    MatrixArgs coh_args;
    int bins = 20;
    auto *coh_cmd = app.add_subcommand("coherence", "Column cross-correlation statistics of Psi");
    add_matrix_flags(coh_cmd, coh_args);
    coh_cmd->add_option("--bins", bins, "Histogram bins over [0, 1]")->capture_default_str();

    auto *self_cmd = app.add_subcommand("selftest", "Toy-scale checks against exhaustive oracles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return exit_config;
    }

    try {
        if (*run_cmd) {
            ExperimentConfig cfg;
            try {
                cfg = load_config(config_path);
                if (seed)
                    cfg.seed = *seed;
                if (trials)
                    cfg.trials = *trials;
                if (threads)
                    cfg.threads = *threads;
                cfg.validate();
            } catch (const std::invalid_argument &e) {
                std::cerr << e.what() << '\n';
                return exit_config;
            }
            const auto records = run(cfg);
            emit_csv(records, out_path, timestamp ? std::optional<std::string>(utc_now()) : std::nullopt);
            std::cout << "wrote " << records.size() << " records to " << out_path << '\n';
            return exit_ok;
        }
        if (*srip_cmd) {
            SensingMatrix S;
            try {
                S = build(srip_args);
                if (srip_s < 1 || srip_s > srip_args.L || srip_trials < 1)
                    throw InvalidArgument("need 1 <= s <= L and trials >= 1");
            } catch (const std::invalid_argument &e) {
                std::cerr << e.what() << '\n';
                return exit_config;
            }
            Rng rng(derive_seed(srip_args.seed, 0x73726970ULL));
            const double delta = srip_probe(S, srip_s, srip_trials, rng);
            const bool exhaustive = srip_trials >= binomial(srip_args.L, srip_s);
            std::cout << "delta_" << srip_s << (exhaustive ? " (exhaustive) " : " (lower bound) ") << delta << '\n';
            return exit_ok;
        }
        if (*coh_cmd) {
            SensingMatrix S;
            try {
                S = build(coh_args);
                if (bins < 1)
                    throw InvalidArgument("bins must be >= 1");
            } catch (const std::invalid_argument &e) {
                std::cerr << e.what() << '\n';
                return exit_config;
            }
            const auto c = coherence_stats(S, bins);
            std::cout << "mu_max " << c.mu_max << "\nmu_mean " << c.mu_mean << "\npairs " << c.pairs << "\nbin,lo,hi,count\n";
            for (int b = 0; b < bins; ++b)
                std::cout << b << ',' << static_cast<double>(b) / bins << ',' << static_cast<double>(b + 1) / bins << ','
                          << c.histogram[static_cast<std::size_t>(b)] << '\n';
            return exit_ok;
        }
        if (*self_cmd)
            return selftest::report(std::cout) ? exit_ok : exit_runtime;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_config;
}
