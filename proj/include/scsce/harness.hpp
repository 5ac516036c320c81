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

// Experiment orchestration: JSON configuration with a paper-scale preset,
// seeded Monte-Carlo sweeps and CSV emission.

#ifndef SCSCE_HARNESS_HPP
#define SCSCE_HARNESS_HPP

#include "channel_model.hpp"
#include "link_sim.hpp"
#include "pilots.hpp"
#include "recovery.hpp"
#include "types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace scsce {

enum class Scenario {
    mse_vs_overhead,
    mse_vs_snr,
    sparsity_histogram,
    temporal_joint,
    pilot_sharing,
    ber_curve,
    pilot_placement_compare
};

inline std::string to_string(Scenario s)
{
    switch (s) {
    case Scenario::mse_vs_overhead: return "mse_vs_overhead";
    case Scenario::mse_vs_snr: return "mse_vs_snr";
    case Scenario::sparsity_histogram: return "sparsity_histogram";
    case Scenario::temporal_joint: return "temporal_joint";
    case Scenario::pilot_sharing: return "pilot_sharing";
    case Scenario::ber_curve: return "ber_curve";
    case Scenario::pilot_placement_compare: return "pilot_placement_compare";
    }
    return "unknown";
}

inline Scenario scenario_from_string(const std::string &s)
{
    for (auto v : {Scenario::mse_vs_overhead, Scenario::mse_vs_snr, Scenario::sparsity_histogram,
                   Scenario::temporal_joint, Scenario::pilot_sharing, Scenario::ber_curve,
                   Scenario::pilot_placement_compare})
        if (to_string(v) == s)
            return v;
    throw InvalidSpec("unknown scenario '" + s + "'");
}

/// Stopping threshold p_th by SNR: tabulated at 10..30 dB in 5 dB steps,
/// linear in between, clamped outside.
inline double p_th_for_snr(double snr_db)
{
    static const std::array<std::pair<double, double>, 5> table{
        {{10.0, 0.10}, {15.0, 0.08}, {20.0, 0.06}, {25.0, 0.05}, {30.0, 0.04}}};
    if (std::isnan(snr_db))
        throw InvalidArgument("SNR is NaN");
    if (snr_db <= table.front().first)
        return table.front().second;
    if (snr_db >= table.back().first)
        return table.back().second;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (snr_db <= table[i].first) {
            const auto [x0, y0] = table[i - 1];
            const auto [x1, y1] = table[i];
            return y0 + (y1 - y0) * (snr_db - x0) / (x1 - x0);
        }
    return table.back().second;
}

/// eta_p = Np M / (N f_p M_G).
inline double pilot_overhead(int Np, int M, int N, int f_p, int M_G)
{
    return static_cast<double>(Np) * M / (static_cast<double>(N) * f_p * M_G);
}

struct ExperimentConfig {
    Scenario scenario = Scenario::mse_vs_snr;
    ChannelSpec channel;
    GroupConfig group;
    int N = 4096;
    int Ng = 64;
    double speed_kmh = 0.0;
    std::vector<double> snr_db_list{10, 15, 20, 25, 30};
    std::vector<int> np_list{250, 300, 350, 390, 400, 450};
    std::vector<double> eta_p_list; // optional cross-check of np_list
    int trials = 200;
    std::uint64_t seed = 1;
    std::vector<Algorithm> algorithms{Algorithm::assp, Algorithm::oracle_assp, Algorithm::oracle_ls};
    Placement placement = Placement::uniform;
    int R = 1;                       // joint symbols for the MSE scenarios
    std::vector<int> r_list{1, 2, 4}; // temporal_joint
    std::vector<int> fp_list{1, 5};   // pilot_sharing
    int k_max = 50;
    int s_max = 0;
    LinkConfig link;
    long ber_min_bits = 100000;
    int ber_subcarriers = 128;
    int threads = 1;

    double symbol_duration() const { return static_cast<double>(N + Ng) / channel.bandwidth_hz; }

    /// Every violated constraint, one message each.
    std::vector<std::string> violations() const
    {
        std::vector<std::string> v;
        auto guard = [&](auto &&fn) {
            try {
                fn();
            } catch (const std::exception &e) {
                v.emplace_back(e.what());
            }
        };
        if (trials < 1)
            v.push_back("trials must be >= 1 (got " + std::to_string(trials) + ")");
        if (threads < 1)
            v.push_back("threads must be >= 1");
        if (N < 1 || Ng < 0)
            v.push_back("OFDM size N must be >= 1 and guard Ng >= 0");
        if (!(channel.bandwidth_hz > 0.0) || !(channel.carrier_hz > 0.0))
            v.push_back("carrier and bandwidth must be positive");
        if (speed_kmh < 0.0)
            v.push_back("speed_kmh must be >= 0");
        guard([&] { channel.validate(); });
        guard([&] { group.validate(channel.M); });
        if (snr_db_list.empty())
            v.push_back("snr_db_list is empty");
        for (double s : snr_db_list)
            if (std::isnan(s))
                v.push_back("snr_db_list contains NaN");
        if (np_list.empty())
            v.push_back("np_list is empty");
        if (algorithms.empty())
            v.push_back("algorithms is empty");
        if (k_max < 1)
            v.push_back("k_max must be >= 1");
        if (s_max < 0 || s_max > channel.L)
            v.push_back("s_max must lie in [0, L]");
        if (R < 1)
            v.push_back("R must be >= 1");
        const int fp_for_overhead = scenario == Scenario::pilot_sharing ? 1 : group.f_p;
        for (int Np : np_list) {
            if (Np < 1 || Np > N) {
                v.push_back("Np=" + std::to_string(Np) + " outside [1, N]");
                continue;
            }
            if (group.N_G >= 1 && static_cast<long>(Np) * group.N_G > N)
                v.push_back("Np=" + std::to_string(Np) + " times N_G exceeds N: group pilots cannot be disjoint");
            else if (placement == Placement::uniform && group.N_G > N / Np)
                v.push_back("Np=" + std::to_string(Np) + " leaves a pilot interval of " + std::to_string(N / Np) +
                            ", too small for " + std::to_string(group.N_G) + " interleaved groups");
        }
        if (!eta_p_list.empty()) {
            if (eta_p_list.size() != np_list.size()) {
                v.push_back("eta_p_list must have one entry per np_list entry");
            } else if (group.M_G >= 1 && fp_for_overhead >= 1) {
                for (std::size_t i = 0; i < np_list.size(); ++i) {
                    const double eta = pilot_overhead(np_list[i], channel.M, N, fp_for_overhead, group.M_G);
                    if (std::abs(eta - eta_p_list[i]) > 1e-4 * eta) {
                        std::ostringstream os;
                        os << "eta_p_list[" << i << "]=" << eta_p_list[i] << " does not match (Np M)/(N f_p M_G)="
                           << eta << " for Np=" << np_list[i];
                        v.push_back(os.str());
                    }
                }
            }
        }
        if (scenario == Scenario::temporal_joint) {
            if (r_list.empty())
                v.push_back("r_list is empty");
            for (int r : r_list)
                if (r < 1)
                    v.push_back("r_list entries must be >= 1");
        }
        if (scenario == Scenario::pilot_sharing) {
            if (fp_list.empty())
                v.push_back("fp_list is empty");
            for (int f : fp_list)
                if (f < 1)
                    v.push_back("fp_list entries must be >= 1");
        }
        if (scenario == Scenario::ber_curve) {
            guard([&] { link.validate(channel.M); });
            if (ber_min_bits < 100000)
                v.push_back("ber_min_bits must be >= 100000");
            if (ber_subcarriers < 1 || ber_subcarriers > N)
                v.push_back("ber_subcarriers must lie in [1, N]");
        }
        return v;
    }

    void validate() const
    {
        const auto v = violations();
        if (v.empty())
            return;
        std::string msg = "invalid experiment configuration:";
        for (const auto &s : v)
            msg += "\n  - " + s;
        throw InvalidSpec(msg);
    }
};

/// N = 4096, Ng = 64, L = 64, 2 GHz carrier, 10 MHz bandwidth, M = 64
/// antennas in two groups of 32, ITU-VA with P = 6.
inline ExperimentConfig paper_preset()
{
    ExperimentConfig c;
    c.channel.L = 64;
    c.channel.M = 64;
    c.channel.P = 6;
    c.channel.carrier_hz = 2e9;
    c.channel.bandwidth_hz = 10e6;
    c.channel.kind = ProfileKind::itu_va;
    c.channel.profile = itu_vehicular_a(10e6);
    c.group = GroupConfig{2, 32, 1, Interpolation::linear};
    c.N = 4096;
    c.Ng = 64;
    c.speed_kmh = 60.0;
    c.channel.symbol_duration_s = c.symbol_duration();
    c.channel.doppler_hz = doppler_from_speed(c.speed_kmh, c.channel.carrier_hz);
    return c;
}

namespace detail {

template <typename T>
void read_if(const nlohmann::json &j, const char *key, T &out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

inline void check_keys(const nlohmann::json &j, const std::set<std::string> &allowed, const std::string &where,
                       std::vector<std::string> &errors)
{
    for (const auto &[k, _] : j.items())
        if (!allowed.count(k))
            errors.push_back("unknown key '" + k + "' in " + where);
}

} // namespace detail

/// Builds a configuration from a JSON document. Absent keys keep the preset
/// value; unknown keys, wrong types and constraint violations are all
/// reported together in one InvalidSpec.
inline ExperimentConfig config_from_json(const nlohmann::json &j)
{
    std::vector<std::string> errors;
    if (!j.is_object())
        throw InvalidSpec("invalid experiment configuration:\n  - top level must be a JSON object");
    detail::check_keys(j,
                       {"preset", "scenario", "channel", "ofdm", "group", "snr_db_list", "np_list", "eta_p_list",
                        "trials", "seed", "algorithms", "placement", "R", "r_list", "fp_list", "k_max", "s_max",
                        "link", "ber_min_bits", "ber_subcarriers", "threads"},
                       "config", errors);
    ExperimentConfig c = paper_preset();
    auto field = [&](const char *what, auto &&fn) {
        try {
            fn();
        } catch (const std::exception &e) {
            errors.push_back(std::string(what) + ": " + e.what());
        }
    };
    field("preset", [&] {
        const auto p = j.value("preset", std::string("paper"));
        if (p != "paper")
            throw InvalidSpec("unknown preset '" + p + "' (expected paper)");
    });
    field("scenario", [&] {
        if (j.contains("scenario"))
            c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    });
    bool doppler_given = false;
    field("channel", [&] {
        if (!j.contains("channel"))
            return;
        const auto &ch = j.at("channel");
        detail::check_keys(ch, {"L", "M", "P", "profile", "carrier_hz", "bandwidth_hz", "speed_kmh", "doppler_hz"},
                           "channel", errors);
        detail::read_if(ch, "L", c.channel.L);
        detail::read_if(ch, "M", c.channel.M);
        detail::read_if(ch, "P", c.channel.P);
        detail::read_if(ch, "carrier_hz", c.channel.carrier_hz);
        detail::read_if(ch, "bandwidth_hz", c.channel.bandwidth_hz);
        detail::read_if(ch, "speed_kmh", c.speed_kmh);
        if (ch.contains("doppler_hz")) {
            c.channel.doppler_hz = ch.at("doppler_hz").get<double>();
            doppler_given = true;
        }
        if (ch.contains("profile"))
            c.channel.kind = profile_kind_from_string(ch.at("profile").get<std::string>());
    });
    field("ofdm", [&] {
        if (!j.contains("ofdm"))
            return;
        const auto &o = j.at("ofdm");
        detail::check_keys(o, {"N", "Ng"}, "ofdm", errors);
        detail::read_if(o, "N", c.N);
        detail::read_if(o, "Ng", c.Ng);
    });
    field("group", [&] {
        if (!j.contains("group"))
            return;
        const auto &g = j.at("group");
        detail::check_keys(g, {"N_G", "M_G", "f_p", "interpolation"}, "group", errors);
        detail::read_if(g, "N_G", c.group.N_G);
        detail::read_if(g, "M_G", c.group.M_G);
        detail::read_if(g, "f_p", c.group.f_p);
        if (g.contains("interpolation")) {
            const auto s = g.at("interpolation").get<std::string>();
            if (s == "linear")
                c.group.interpolation = Interpolation::linear;
            else if (s == "hold")
                c.group.interpolation = Interpolation::hold;
            else
                throw InvalidSpec("unknown interpolation '" + s + "' (expected linear | hold)");
        }
    });
    field("snr_db_list", [&] { detail::read_if(j, "snr_db_list", c.snr_db_list); });
    field("np_list", [&] { detail::read_if(j, "np_list", c.np_list); });
    field("eta_p_list", [&] { detail::read_if(j, "eta_p_list", c.eta_p_list); });
    field("trials", [&] { detail::read_if(j, "trials", c.trials); });
    field("seed", [&] { detail::read_if(j, "seed", c.seed); });
    field("algorithms", [&] {
        if (!j.contains("algorithms"))
            return;
        c.algorithms.clear();
        for (const auto &a : j.at("algorithms"))
            c.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
    });
    field("placement", [&] {
        if (j.contains("placement"))
            c.placement = placement_from_string(j.at("placement").get<std::string>());
    });
    field("R", [&] { detail::read_if(j, "R", c.R); });
    field("r_list", [&] { detail::read_if(j, "r_list", c.r_list); });
    field("fp_list", [&] { detail::read_if(j, "fp_list", c.fp_list); });
    field("k_max", [&] { detail::read_if(j, "k_max", c.k_max); });
    field("s_max", [&] { detail::read_if(j, "s_max", c.s_max); });
    field("link", [&] {
        if (!j.contains("link"))
            return;
        const auto &l = j.at("link");
        detail::check_keys(l, {"K", "constellation", "precoder"}, "link", errors);
        detail::read_if(l, "K", c.link.K);
        detail::read_if(l, "constellation", c.link.constellation);
        detail::read_if(l, "precoder", c.link.precoder);
    });
    field("ber_min_bits", [&] { detail::read_if(j, "ber_min_bits", c.ber_min_bits); });
    field("ber_subcarriers", [&] { detail::read_if(j, "ber_subcarriers", c.ber_subcarriers); });
    field("threads", [&] { detail::read_if(j, "threads", c.threads); });

    if (c.N + c.Ng > 0 && c.channel.bandwidth_hz > 0.0)
        c.channel.symbol_duration_s = c.symbol_duration();
    if (!doppler_given)
        c.channel.doppler_hz = doppler_from_speed(c.speed_kmh, c.channel.carrier_hz);
    if (c.channel.kind == ProfileKind::itu_va && c.channel.bandwidth_hz > 0.0)
        c.channel.profile = itu_vehicular_a(c.channel.bandwidth_hz);

    for (auto &e : c.violations())
        errors.push_back(std::move(e));
    if (!errors.empty()) {
        std::string msg = "invalid experiment configuration:";
        for (const auto &s : errors)
            msg += "\n  - " + s;
        throw InvalidSpec(msg);
    }
    return c;
}

inline ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidSpec("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw InvalidSpec("malformed JSON in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

// ----- Results ------------------------------------------------------------------

struct ResultRecord {
    std::string scenario;
    std::string algorithm;
    double snr_db = 0.0;
    int Np = 0;
    double eta_p = 0.0;
    int R = 1;
    int f_p = 1;
    int trial_count = 0;
    std::string metric;
    double value = 0.0;
    double ci95 = 0.0;
    std::optional<double> crlb; // 1/SNR for MSE metrics
};

/// Mean and 95% half-width 1.96 sd / sqrt(n), summed in index order.
inline std::pair<double, double> mean_ci95(const std::vector<double> &x)
{
    if (x.empty())
        throw InvalidArgument("cannot aggregate an empty sample");
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    if (x.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

inline std::string csv_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline void write_csv(std::ostream &os, const std::vector<ResultRecord> &records,
                      const std::optional<std::string> &timestamp = std::nullopt)
{
    if (records.empty())
        throw InvalidArgument("no records to write");
    if (timestamp)
        os << "# generated " << *timestamp << '\n';
    os << "scenario,algorithm,snr_db,np,eta_p,r,f_p,trials,metric,value,ci95,crlb\n";
    for (const auto &r : records) {
        os << r.scenario << ',' << r.algorithm << ',' << csv_number(r.snr_db) << ',' << r.Np << ','
           << csv_number(r.eta_p) << ',' << r.R << ',' << r.f_p << ',' << r.trial_count << ',' << r.metric << ','
           << csv_number(r.value) << ',' << csv_number(r.ci95) << ',';
        if (r.crlb)
            os << csv_number(*r.crlb);
        os << '\n';
    }
}

inline void emit_csv(const std::vector<ResultRecord> &records, const std::string &path,
                     const std::optional<std::string> &timestamp = std::nullopt)
{
    std::ostringstream buf;
    write_csv(buf, records, timestamp);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << buf.str();
    out.flush();
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

// ----- Monte-Carlo runner -------------------------------------------------------

/// Calls fn(trial) for trial = 0..trials-1 on `threads` workers and returns
/// the per-trial outputs in trial order.
template <typename Fn>
auto parallel_trials(int trials, int threads, Fn fn) -> std::vector<decltype(fn(0))>
{
    std::vector<decltype(fn(0))> out(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int t = next++; t < trials; t = next++) {
            try {
                out[static_cast<std::size_t>(t)] = fn(t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = trials;
            }
        }
    };
    const int n = std::max(1, std::min(threads, trials));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n; ++i)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

namespace detail {

/// Per-group sensing matrices on disjoint pilot subcarriers (I0 = 1..N_G or
/// disjoint random slices), phases drawn once per experiment.
inline std::vector<SensingMatrix> group_sensing(const ExperimentConfig &c, int Np, Placement placement)
{
    std::vector<SensingMatrix> out;
    const std::uint64_t pilot_seed = derive_seed(c.seed, 0x70696c6f74ULL);
    for (int g = 0; g < c.group.N_G; ++g)
        out.push_back(assemble_sensing(make_pilot_config(c.N, Np, c.group.M_G, pilot_seed, 1 + g, placement, g),
                                       c.channel.L));
    return out;
}

inline std::uint64_t trial_seed(const ExperimentConfig &c, int t) { return derive_seed(c.seed, 0x747269616cULL, t); }

inline std::vector<std::uint64_t> noise_seeds(std::uint64_t ts, int groups, int user = 0)
{
    std::vector<std::uint64_t> s;
    for (int g = 0; g < groups; ++g)
        s.push_back(derive_seed(ts, 2, user, g));
    return s;
}

inline EstimatorConfig estimator(const ExperimentConfig &c, Algorithm a, double snr_db, int window)
{
    EstimatorConfig e;
    e.algorithm = a;
    e.stop.p_th = p_th_for_snr(snr_db);
    e.stop.k_max = c.k_max;
    e.stop.s_max = a == Algorithm::asp ? 0 : c.s_max;
    e.window_R = window;
    return e;
}

inline ChannelBlock trial_channel(const ExperimentConfig &c, std::uint64_t ts, int R, int user = 0)
{
    ChannelSpec spec = c.channel;
    spec.R = R;
    Rng rng(derive_seed(ts, 1, user));
    return generate_channel(spec, rng);
}

/// Cell table + per-trial metric vectors -> aggregated records.
struct Accumulator {
    std::vector<ResultRecord> cells;
    std::map<std::string, std::size_t> index;

    std::size_t add(ResultRecord r)
    {
        const std::string key = r.algorithm + '|' + csv_number(r.snr_db) + '|' + std::to_string(r.Np) + '|' +
                                std::to_string(r.R) + '|' + std::to_string(r.f_p) + '|' + r.metric;
        auto [it, fresh] = index.emplace(key, cells.size());
        if (fresh)
            cells.push_back(std::move(r));
        return it->second;
    }

    std::vector<ResultRecord> finish(const std::vector<std::vector<double>> &per_trial) const
    {
        std::vector<ResultRecord> out = cells;
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::vector<double> x;
            x.reserve(per_trial.size());
            for (const auto &t : per_trial)
                x.push_back(t.at(i));
            const auto [m, ci] = mean_ci95(x);
            out[i].value = m;
            out[i].ci95 = ci;
            out[i].trial_count = static_cast<int>(x.size());
        }
        return out;
    }
};

inline double mean_s_hat(const GroupedEstimate &e)
{
    double s = 0.0;
    for (const auto &r : e.runs)
        s += r.s_hat;
    return s / static_cast<double>(e.runs.size());
}

} // namespace detail

/// Raw per-trial metric values, one row per trial, columns aligned with the
/// returned records.
struct TrialLog {
    std::vector<std::vector<double>> values;
};

/// Runs every operating point of the configured scenario. Trial t of every
/// operating point and algorithm shares the channel and noise draws derived
/// from (seed, t), so differences between curves are paired.
inline std::vector<ResultRecord> run(const ExperimentConfig &c, TrialLog *log = nullptr)
{
    c.validate();
    const std::string scen = to_string(c.scenario);
    detail::Accumulator acc;
    std::function<std::vector<double>(int)> trial;

    auto base = [&](Algorithm a, double snr, int Np, int R, int f_p, const std::string &metric, bool mse) {
        ResultRecord r;
        r.scenario = scen;
        r.algorithm = to_string(a);
        r.snr_db = snr;
        r.Np = Np;
        r.eta_p = pilot_overhead(Np, c.channel.M, c.N, f_p, c.group.M_G);
        r.R = R;
        r.f_p = f_p;
        r.metric = metric;
        if (mse)
            r.crlb = 1.0 / db_to_linear(snr);
        return r;
    };

    std::map<int, std::vector<SensingMatrix>> sensing;
    for (int Np : c.np_list)
        sensing.emplace(Np, detail::group_sensing(c, Np, c.placement));

    switch (c.scenario) {
    case Scenario::mse_vs_overhead:
    case Scenario::mse_vs_snr: {
        for (int Np : c.np_list)
            for (double snr : c.snr_db_list)
                for (auto a : c.algorithms) {
                    acc.add(base(a, snr, Np, c.R, c.group.f_p, "nmse", true));
                    if (a == Algorithm::assp || a == Algorithm::asp)
                        acc.add(base(a, snr, Np, c.R, c.group.f_p, "s_hat", false));
                }
        trial = [&](int t) {
            const auto ts = detail::trial_seed(c, t);
            const auto ch = detail::trial_channel(c, ts, c.R);
            const auto seeds = detail::noise_seeds(ts, c.group.N_G);
            std::vector<double> v;
            for (int Np : c.np_list)
                for (double snr : c.snr_db_list)
                    for (auto a : c.algorithms) {
                        const auto e = estimate_grouped(ch, c.group, sensing.at(Np), snr,
                                                        detail::estimator(c, a, snr, c.R), seeds);
                        v.push_back(nmse(ch.d, e.d_hat));
                        if (a == Algorithm::assp || a == Algorithm::asp)
                            v.push_back(detail::mean_s_hat(e));
                    }
            return v;
        };
        break;
    }
    case Scenario::sparsity_histogram: {
        int s_top = c.channel.P;
        for (int Np : c.np_list)
            s_top = std::max(s_top, c.s_max > 0 ? c.s_max : detail::default_s_max(Np, c.group.M_G, c.channel.L));
        const std::vector<Termination> terms{Termination::residual_increase, Termination::noise_floor,
                                             Termination::s_max_reached, Termination::k_max_reached,
                                             Termination::singular_system};
        for (int Np : c.np_list)
            for (double snr : c.snr_db_list) {
                for (int s = 1; s <= s_top; ++s)
                    acc.add(base(Algorithm::assp, snr, Np, c.R, c.group.f_p, "p_s=" + std::to_string(s), false));
                acc.add(base(Algorithm::assp, snr, Np, c.R, c.group.f_p, "p_all_groups_exact", false));
                for (auto term : terms)
                    acc.add(base(Algorithm::assp, snr, Np, c.R, c.group.f_p, "p_term=" + to_string(term), false));
            }
        trial = [&, s_top, terms](int t) {
            const auto ts = detail::trial_seed(c, t);
            const auto ch = detail::trial_channel(c, ts, c.R);
            const auto seeds = detail::noise_seeds(ts, c.group.N_G);
            std::vector<double> v;
            for (int Np : c.np_list)
                for (double snr : c.snr_db_list) {
                    const auto e = estimate_grouped(ch, c.group, sensing.at(Np), snr,
                                                    detail::estimator(c, Algorithm::assp, snr, c.R), seeds);
                    const double n = static_cast<double>(e.runs.size());
                    for (int s = 1; s <= s_top; ++s)
                        v.push_back(static_cast<double>(std::count_if(e.runs.begin(), e.runs.end(),
                                                                      [s](const auto &r) { return r.s_hat == s; })) /
                                    n);
                    v.push_back(std::all_of(e.runs.begin(), e.runs.end(),
                                            [&](const auto &r) { return r.s_hat == c.channel.P; })
                                    ? 1.0
                                    : 0.0);
                    for (auto term : terms)
                        v.push_back(static_cast<double>(std::count_if(
                                        e.runs.begin(), e.runs.end(),
                                        [term](const auto &r) { return r.termination == term; })) /
                                    n);
                }
            return v;
        };
        break;
    }
    case Scenario::temporal_joint: {
        int frame = 1;
        for (int r : c.r_list)
            frame = std::lcm(frame, r);
        for (int Np : c.np_list)
            for (double snr : c.snr_db_list)
                for (int r : c.r_list)
                    for (auto a : c.algorithms)
                        acc.add(base(a, snr, Np, r, c.group.f_p, "nmse", true));
        trial = [&, frame](int t) {
            const auto ts = detail::trial_seed(c, t);
            const auto ch = detail::trial_channel(c, ts, frame);
            const auto seeds = detail::noise_seeds(ts, c.group.N_G);
            std::vector<double> v;
            for (int Np : c.np_list)
                for (double snr : c.snr_db_list)
                    for (int r : c.r_list)
                        for (auto a : c.algorithms) {
                            const auto e = estimate_grouped(ch, c.group, sensing.at(Np), snr,
                                                            detail::estimator(c, a, snr, r), seeds);
                            v.push_back(nmse(ch.d, e.d_hat));
                        }
            return v;
        };
        break;
    }
    case Scenario::pilot_sharing: {
        const int frame = *std::max_element(c.fp_list.begin(), c.fp_list.end()) + 1;
        for (int Np : c.np_list)
            for (double snr : c.snr_db_list)
                for (int f : c.fp_list)
                    for (auto a : c.algorithms)
                        acc.add(base(a, snr, Np, 1, f, "nmse", true));
        trial = [&, frame](int t) {
            const auto ts = detail::trial_seed(c, t);
            const auto full = detail::trial_channel(c, ts, frame);
            const auto seeds = detail::noise_seeds(ts, c.group.N_G);
            std::vector<double> v;
            for (int Np : c.np_list)
                for (double snr : c.snr_db_list)
                    for (int f : c.fp_list) {
                        ChannelBlock ch = full;
                        ch.d = full.d.leftCols(f + 1);
                        ch.spec.R = f + 1;
                        GroupConfig g = c.group;
                        g.f_p = f;
                        for (auto a : c.algorithms) {
                            const auto e =
                                estimate_grouped(ch, g, sensing.at(Np), snr, detail::estimator(c, a, snr, 1), seeds);
                            v.push_back(nmse(ch.d, e.d_hat));
                        }
                    }
            return v;
        };
        break;
    }
    case Scenario::pilot_placement_compare: {
        std::map<int, std::vector<SensingMatrix>> random_sensing;
        for (int Np : c.np_list)
            random_sensing.emplace(Np, detail::group_sensing(c, Np, Placement::random));
        std::map<int, std::vector<SensingMatrix>> uniform_sensing;
        for (int Np : c.np_list)
            uniform_sensing.emplace(Np, detail::group_sensing(c, Np, Placement::uniform));
        sensing.clear();
        for (int Np : c.np_list)
            for (double snr : c.snr_db_list)
                for (auto a : c.algorithms) {
                    acc.add(base(a, snr, Np, c.R, c.group.f_p, "nmse_uniform", true));
                    acc.add(base(a, snr, Np, c.R, c.group.f_p, "nmse_random", true));
                }
        trial = [&, random_sensing, uniform_sensing](int t) {
            const auto ts = detail::trial_seed(c, t);
            const auto ch = detail::trial_channel(c, ts, c.R);
            const auto seeds = detail::noise_seeds(ts, c.group.N_G);
            std::vector<double> v;
            for (int Np : c.np_list)
                for (double snr : c.snr_db_list)
                    for (auto a : c.algorithms)
                        for (const auto *S : {&uniform_sensing.at(Np), &random_sensing.at(Np)}) {
                            const auto e =
                                estimate_grouped(ch, c.group, *S, snr, detail::estimator(c, a, snr, c.R), seeds);
                            v.push_back(nmse(ch.d, e.d_hat));
                        }
            return v;
        };
        break;
    }
    case Scenario::ber_curve: {
        BerOptions opt;
        opt.N = c.N;
        opt.min_bits = c.ber_min_bits;
        for (int i = 0; i < c.ber_subcarriers; ++i)
            opt.subcarriers.push_back(1 + static_cast<int>(static_cast<long>(i) * c.N / c.ber_subcarriers));
        for (int Np : c.np_list)
            for (double snr : c.snr_db_list) {
                ResultRecord perfect = base(Algorithm::assp, snr, Np, 1, c.group.f_p, "ber", false);
                perfect.algorithm = "perfect_csi";
                acc.add(perfect);
                for (auto a : c.algorithms)
                    acc.add(base(a, snr, Np, 1, c.group.f_p, "ber", false));
            }
        trial = [&, opt](int t) {
            const auto ts = detail::trial_seed(c, t);
            std::vector<ChannelBlock> users;
            std::vector<CMatrix> truth;
            for (int k = 0; k < c.link.K; ++k) {
                users.push_back(detail::trial_channel(c, ts, 1, k));
                truth.push_back(cir_matrix(users.back().d, c.channel.L, c.channel.M, 0));
            }
            std::vector<double> v;
            int point = 0;
            for (int Np : c.np_list)
                for (double snr : c.snr_db_list) {
                    const std::vector<double> one{snr};
                    {
                        Rng rng(derive_seed(ts, 3, point));
                        v.push_back(ber_eval(truth, truth, c.link, one, rng, opt).front().ber);
                    }
                    for (auto a : c.algorithms) {
                        std::vector<CMatrix> est;
                        for (int k = 0; k < c.link.K; ++k) {
                            const auto e = estimate_grouped(users[static_cast<std::size_t>(k)], c.group, sensing.at(Np),
                                                            snr, detail::estimator(c, a, snr, 1),
                                                            detail::noise_seeds(ts, c.group.N_G, k));
                            est.push_back(cir_matrix(e.d_hat, c.channel.L, c.channel.M, 0));
                        }
                        Rng rng(derive_seed(ts, 3, point));
                        v.push_back(ber_eval(est, truth, c.link, one, rng, opt).front().ber);
                    }
                    ++point;
                }
            return v;
        };
        break;
    }
    }
    auto per_trial = parallel_trials(c.trials, c.threads, trial);
    auto records = acc.finish(per_trial);
    if (log)
        log->values = std::move(per_trial);
    return records;
}

/// Looks up one aggregated record; nullopt when absent.
inline std::optional<ResultRecord> find_record(const std::vector<ResultRecord> &recs, const std::string &algorithm,
                                               double snr_db, int Np, const std::string &metric, int R = -1,
                                               int f_p = -1)
{
    for (const auto &r : recs)
        if (r.algorithm == algorithm && r.snr_db == snr_db && r.Np == Np && r.metric == metric &&
            (R < 0 || r.R == R) && (f_p < 0 || r.f_p == f_p))
            return r;
    return std::nullopt;
}

} // namespace scsce

#endif // SCSCE_HARNESS_HPP
