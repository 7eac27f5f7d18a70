/*
 * SPDX-FileCopyrightText: Copyright 2026 The shuffleguard authors
 * SPDX-License-Identifier: Apache-2.0
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

// Command-line driver: model generation, trace capture, attacks,
// overhead benchmarks and the invariant suites.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shuffleguard.hpp"

namespace fs = std::filesystem;
using namespace shuffleguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

/// Bad or missing command-line input.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

nlohmann::json read_json(const fs::path &path) {
    if (!fs::exists(path))
        throw UsageError("no such file: " + path.string());
    std::ifstream is(path);
    if (!is)
        throw std::ios_base::failure("cannot open " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    if (!os || !(os << text) || !os.flush())
        throw std::ios_base::failure("cannot write " + path.string());
}

void write_json(const fs::path &path, const nlohmann::json &j) { write_text(path, j.dump(2) + "\n"); }

MlpModel load_model(const fs::path &path) {
    try {
        auto m = read_json(path).get<MlpModel>();
        m.validate();
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("bad model file " + path.string() + ": " + e.what());
    }
}

SecretArrays load_secrets(const fs::path &path) {
    try {
        return read_json(path).get<SecretArrays>();
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("bad secrets file " + path.string() + ": " + e.what());
    }
}

template <class T> std::vector<T> parse_list(const std::string &text, std::size_t want = 0) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof())
            throw UsageError("cannot parse '" + item + "' in list '" + text + "'");
        out.push_back(v);
    }
    if (want != 0 && out.size() != want)
        throw UsageError("expected " + std::to_string(want) + " comma-separated values, got '" +
                         text + "'");
    return out;
}

/// Seed precedence: explicit flag, then SHUFFLEGUARD_SEED, then 1.
std::uint64_t env_seed() {
    if (const char *s = std::getenv("SHUFFLEGUARD_SEED"); s != nullptr && *s != '\0') {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used);
            if (used == std::string(s).size())
                return v;
        } catch (const std::exception &) {
        }
        throw UsageError(std::string("SHUFFLEGUARD_SEED is not an integer: ") + s);
    }
    return 1;
}

/// Options shared by every subcommand.
struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;

    std::optional<ExperimentConfig> load() const {
        if (config.empty())
            return std::nullopt;
        if (!fs::exists(config))
            throw UsageError("no such config: " + config);
        return load_config(config);
    }
    std::uint64_t seed_or(std::optional<std::uint64_t> from_config) const {
        if (seed)
            return *seed;
        if (from_config)
            return *from_config;
        return env_seed();
    }
};

// ---------------------------------------------------------------- gen-model

struct GenModelArgs {
    std::string layers = "7,5,4,3";
    std::string range = "-2,2";
    double precision = 0.01;
    std::string out = "model.json";
    std::vector<std::string> set_weights;
};

int cmd_gen_model(const Globals &g, const GenModelArgs &a, const CLI::App &sub) {
    const auto cfg = g.load();
    const auto layers = parse_list<std::uint32_t>(a.layers);
    if (layers.size() < 2)
        throw UsageError("--layers: at least 2 layers are required");
    const auto range = parse_list<double>(a.range, 2);
    const std::uint64_t seed = g.seed_or(cfg ? std::optional(cfg->model_seed) : std::nullopt);
    std::string out = a.out;
    if (cfg && sub.count("--out") == 0)
        out = cfg->model_path;

    RandomSource src(seed);
    MlpModel m = gen_random_model(layers, range[0], range[1], a.precision, src);
    for (const auto &spec : a.set_weights) {
        const auto v = parse_list<double>(spec, 4);
        if (v[0] < 0 || v[1] < 0 || v[2] < 0)
            throw UsageError("--set-weight: negative index in '" + spec + "'");
        m.set_weight(static_cast<std::uint32_t>(v[0]), static_cast<std::uint32_t>(v[1]),
                     static_cast<std::uint32_t>(v[2]), static_cast<float>(v[3]));
    }
    write_json(out, m);
    std::cout << "wrote " << out << ": " << m.weight_count() << " weights, " << m.bias_count()
              << " biases\n";
    return kExitOk;
}

// -------------------------------------------------------------- gen-secrets

struct GenSecretsArgs {
    std::uint32_t n_max = 20;
    std::string model;
    std::string out = "secrets.json";
};

int cmd_gen_secrets(const Globals &g, const GenSecretsArgs &a) {
    const auto cfg = g.load();
    std::uint32_t n_max = a.n_max;
    if (!a.model.empty())
        n_max = std::max<std::uint32_t>(3, load_model(a.model).max_input_width());
    const std::uint64_t seed = g.seed_or(cfg ? cfg->secrets_seed : std::nullopt);
    RandomSource src(seed);
    const auto s = gen_secret_arrays(n_max, src);
    write_json(a.out, s);
    const auto ks = keyspace_size(n_max);
    std::printf("wrote %s: n_max = %u, %zu entries per array, memory overhead %zu bytes "
                "(2 arrays of n_max - 2 uint32)\n",
                a.out.c_str(), n_max, s.size(), s.memory_bytes());
    std::printf("keyspace_size(%u) = %s ~ 2^%.1f\n", n_max, ks.str().c_str(), log2_big(ks));
    return kExitOk;
}

// ------------------------------------------------------------------ capture

struct CaptureArgs {
    std::string model;
    std::string protection = "none";
    std::uint32_t ml = 2000;
    float fixed = 0.5f;
    std::uint64_t fixed_random = 0;
    std::uint32_t varying_index = 0;
    std::string range = "-2,2";
    double sigma = 1.0;
    double alpha = 1.0;
    std::uint32_t samples_per_mul = 8;
    std::string div_leak = "bit_serial";
    std::optional<std::uint64_t> noise_seed;
    std::string secrets;
    std::optional<std::uint64_t> secrets_seed;
    std::string out = "traces.sgtr";
    bool with_ground_truth = false;
};

int cmd_capture(const Globals &g, const CaptureArgs &a, const CLI::App &sub) {
    const auto cfg = g.load();
    ExperimentConfig e = cfg.value_or(ExperimentConfig{});
    auto given = [&](const char *name) { return !cfg || sub.count(name) > 0; };

    if (given("--model") && !a.model.empty())
        e.model_path = a.model;
    if (!cfg && a.model.empty())
        throw UsageError("--model is required");
    if (given("--protection"))
        e.campaign.protection = protection_from_string(a.protection);
    if (given("--ml"))
        e.campaign.m_l = a.ml;
    if (sub.count("--fixed-random") > 0)
        e.campaign.fixed = FixedPolicy::random_fixed(a.fixed_random);
    else if (given("--fixed"))
        e.campaign.fixed = FixedPolicy::constant(a.fixed);
    if (given("--varying-index"))
        e.campaign.varying_index = a.varying_index;
    if (given("--range")) {
        const auto r = parse_list<double>(a.range, 2);
        e.campaign.lo = r[0];
        e.campaign.hi = r[1];
    }
    if (given("--sigma"))
        e.leakage.sigma = a.sigma;
    if (given("--alpha"))
        e.leakage.alpha = a.alpha;
    if (given("--samples-per-mul"))
        e.leakage.samples_per_mul = a.samples_per_mul;
    if (given("--div-leak"))
        e.leakage.div_leak_mode = div_leak_mode_from_string(a.div_leak);
    if (!cfg || g.seed)
        e.campaign.seed = g.seed_or(std::nullopt);
    if (a.noise_seed)
        e.leakage.seed = *a.noise_seed;
    else if (!cfg || g.seed)
        e.leakage.seed = derive_seed(e.campaign.seed, 0x4E);
    if (a.secrets_seed)
        e.secrets_seed = a.secrets_seed;
    if (e.campaign.m_l == 0)
        throw UsageError("--ml must be at least 1");

    const MlpModel model = load_model(e.model_path);
    std::optional<SecretArrays> secrets;
    if (!a.secrets.empty()) {
        secrets = load_secrets(a.secrets);
    } else if (e.secrets_seed) {
        RandomSource src(*e.secrets_seed);
        secrets = gen_secret_arrays(std::max<std::uint32_t>(3, model.max_input_width()), src);
    }
    if (secrets && secrets->n_max < model.max_input_width())
        throw UsageError("secret arrays cover n_max = " + std::to_string(secrets->n_max) +
                         " but the model needs " + std::to_string(model.max_input_width()));

    const TraceSet set =
        collect_attack_traces(model, e.campaign, e.leakage, secrets ? &*secrets : nullptr);
    const fs::path out = a.out;
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    write_trace_set(set, out, a.with_ground_truth);
    std::printf("wrote %s: %zu traces x %u samples, protection %s\n", a.out.c_str(), set.size(),
                set.samples_per_trace(), to_string(e.campaign.protection).c_str());
    return kExitOk;
}

// ------------------------------------------------------------------- attack

struct AttackArgs {
    std::string traces;
    std::string grid = "-2,2,0.01";
    std::optional<std::uint32_t> q_s;
    std::optional<std::uint32_t> q_e;
    std::uint32_t neuron = 0;
    std::string components;
    std::string out_dir = "attack_out";
    std::string sweep;
    std::optional<float> true_weight;
};

AttackConfig resolve_attack(const std::optional<ExperimentConfig> &cfg, const AttackArgs &a,
                            const CLI::App &sub) {
    AttackConfig ac = cfg ? cfg->attack : AttackConfig{};
    auto given = [&](const char *name) { return !cfg || sub.count(name) > 0; };
    if (given("--grid")) {
        const auto v = parse_list<double>(a.grid, 3);
        ac.grid_lo = v[0];
        ac.grid_hi = v[1];
        ac.grid_step = v[2];
    }
    if (a.q_s)
        ac.q_s = a.q_s;
    if (a.q_e)
        ac.q_e = a.q_e;
    if (given("--neuron"))
        ac.neuron = a.neuron;
    if (!a.components.empty()) {
        ac.components.clear();
        std::stringstream ss(a.components);
        std::string c;
        while (std::getline(ss, c, ','))
            ac.components.push_back(component_from_string(c));
    }
    return ac;
}

TraceSet load_traces(const std::string &path) {
    if (path.empty())
        throw UsageError("--traces is required");
    if (!fs::exists(path))
        throw UsageError("no such trace file: " + path);
    return read_trace_set(path);
}

std::string fmt_peak(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

int cmd_attack_cpa(const Globals &g, const AttackArgs &a, const CLI::App &sub) {
    const auto cfg = g.load();
    const AttackConfig ac = resolve_attack(cfg, a, sub);
    const TraceSet traces = load_traces(a.traces);
    const auto w = build_hypotheses(ac.grid_lo, ac.grid_hi, ac.grid_step);
    auto [q_s, q_e] = target_range(*traces.layout, 0, ac.neuron, traces.varying_index);
    if (ac.q_s)
        q_s = *ac.q_s;
    if (ac.q_e)
        q_e = *ac.q_e;

    const auto rep = run_cpa(traces, w, q_s, q_e);
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    write_json(dir / "cpa_report.json", report_to_json(rep));
    for (auto comp : ac.components) {
        std::ostringstream os;
        write_component_csv(os, rep.component(comp).grouping);
        write_text(dir / ("cpa_" + std::string(component_name(comp)) + ".csv"), os.str());
    }

    std::printf("CPA over %zu traces, %zu hypotheses, samples [%u, %u]\n", rep.m_l, rep.m_w,
                q_s, q_e);
    if (rep.unstable)
        std::printf("warning: fewer than %zu traces, correlations are unstable\n",
                    kUnstableTraceCount);
    for (auto comp : ac.components) {
        const auto &r = rep.component(comp);
        std::printf("%-8s rank-1 = %u (|r| = %s)\n", std::string(component_name(comp)).c_str(),
                    r.ranking.front().value, fmt_peak(r.ranking.front().peak).c_str());
    }
    std::printf("recovered weight = %.9g\n", static_cast<double>(rep.recovered_weight()));

    if (!a.sweep.empty()) {
        if (!a.true_weight)
            throw UsageError("--sweep needs --true-weight");
        const auto counts = parse_list<std::size_t>(a.sweep);
        const auto points = trace_count_sweep(traces, w, q_s, q_e, counts, *a.true_weight);
        std::ostringstream os;
        write_sweep_csv(os, points);
        write_text(dir / "cpa_sweep.csv", os.str());
        std::printf("wrote %zu sweep rows\n", points.size());
    }
    return kExitOk;
}

int cmd_attack_reorder(const Globals &g, const AttackArgs &a, const CLI::App &sub) {
    const auto cfg = g.load();
    const AttackConfig ac = resolve_attack(cfg, a, sub);
    const TraceSet traces = load_traces(a.traces);
    const auto w = build_hypotheses(ac.grid_lo, ac.grid_hi, ac.grid_step);
    const auto rep = run_reorder_attack(traces, w, ac.neuron);
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    write_json(dir / "reorder_report.json", reorder_report_to_json(rep));
    if (rep.permutation_accuracy) {
        std::printf("permutation accuracy = %.4f (target layer), %.4f (all layers)\n",
                    *rep.permutation_accuracy, *rep.all_layers_accuracy);
        if (rep.step_accuracy)
            std::printf("step accuracy = %.4f, final step accuracy = %.4f\n", *rep.step_accuracy,
                        *rep.final_step_accuracy);
    } else {
        std::printf("no ground truth in trace file; accuracy not computed\n");
    }
    std::printf("recovered weight after unshuffling = %.9g\n",
                static_cast<double>(rep.recovered_weight));
    return kExitOk;
}

struct GcdArgs {
    std::size_t trials = 100;
    std::size_t observations = 100;
    std::uint32_t n_max = 20;
    bool plain = false;
    std::string out_dir;
};

int cmd_attack_gcd(const Globals &g, const GcdArgs &a) {
    const auto cfg = g.load();
    if (a.n_max < 3)
        throw UsageError("--n-max must be at least 3");
    if (a.trials == 0 || a.observations == 0)
        throw UsageError("--trials and --observations must be positive");
    const std::uint64_t seed = g.seed_or(cfg ? std::optional(cfg->campaign.seed) : std::nullopt);
    RandomSource src(seed);
    const bool blinded = !a.plain;
    std::size_t recovered = 0;
    nlohmann::json trials = nlohmann::json::array();
    for (std::size_t t = 0; t < a.trials; ++t) {
        const auto secrets = gen_secret_arrays(a.n_max, src);
        const std::size_t k = t % secrets.size();
        const std::uint32_t modulus = static_cast<std::uint32_t>(k + 3);
        const auto obs = simulate_gcd_observations(secrets.s1[k], modulus, a.observations,
                                                   blinded, src);
        const auto res = gcd_attack(obs, blinded, modulus);
        const bool hit = res.verdict == GcdVerdict::recovered && res.value == secrets.s1[k];
        recovered += hit;
        trials.push_back({{"modulus", modulus},
                          {"s1", secrets.s1[k]},
                          {"candidate", res.value},
                          {"verdict", to_string(res.verdict)},
                          {"correct", hit}});
    }
    std::printf("gcd attack (%s): S1 recovered in %zu/%zu trials, %zu observations each\n",
                blinded ? "blinded" : "unblinded", recovered, a.trials, a.observations);
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        write_json(fs::path(a.out_dir) / "gcd_report.json",
                   {{"blinded", blinded},
                    {"trials", a.trials},
                    {"observations", a.observations},
                    {"recovered", recovered},
                    {"results", trials}});
    }
    return kExitOk;
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
    std::string sizes = "100,1000";
    std::string neurons = "100,250,500,1000";
    std::string layer_counts = "2,3,4,5";
    std::size_t repeats = 11;
    double target_seconds = 0.02;
    std::string out;
};

void emit(const std::string &path, const std::string &csv) {
    if (path.empty())
        std::cout << csv;
    else
        write_text(path, csv);
}

int cmd_bench_shuffle(const Globals &g, const BenchArgs &a) {
    if (a.repeats == 0)
        throw UsageError("--repeats must be positive");
    const auto sizes = parse_list<std::size_t>(a.sizes);
    const auto rows = bench::shuffle_bench(sizes, a.repeats, g.seed_or(std::nullopt),
                                           a.target_seconds);
    std::ostringstream os;
    bench::write_shuffle_csv(os, rows);
    emit(a.out, os.str());
    return kExitOk;
}

int cmd_bench_network(const Globals &g, const BenchArgs &a) {
    if (a.repeats == 0)
        throw UsageError("--repeats must be positive");
    const auto neurons = parse_list<std::size_t>(a.neurons);
    const auto layers = parse_list<std::size_t>(a.layer_counts);
    for (auto l : layers)
        if (l < 2)
            throw UsageError("--layer-counts: each network needs at least 2 layers");
    const auto rows = bench::network_bench(neurons, layers, a.repeats, g.seed_or(std::nullopt),
                                           a.target_seconds);
    std::ostringstream os;
    bench::write_network_csv(os, rows);
    emit(a.out, os.str());
    return kExitOk;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const Globals &g, bool inject_fault) {
    verify::Options opt;
    opt.seed = g.seed_or(std::nullopt);
    opt.inject_fault = inject_fault;
    bool ok = true;
    for (const auto &r : verify::run_all(opt)) {
        std::printf("%s\n", r.line().c_str());
        ok = ok && r.pass;
    }
    std::printf("%s\n", ok ? "all suites passed" : "verification FAILED");
    return ok ? kExitOk : kExitVerify;
}

int run(int argc, char **argv) {
    CLI::App app{"shuffleguard: shuffled-inference side-channel toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON experiment config; flags override its fields");
    app.add_option("--seed", g.seed, "Global seed (falls back to SHUFFLEGUARD_SEED, then 1)");

    std::function<int()> action;

    GenModelArgs gm;
    auto *gen_model = app.add_subcommand("gen-model", "Generate a random MLP model");
    gen_model->add_option("--layers", gm.layers, "Neurons per layer, e.g. 7,5,4,3");
    gen_model->add_option("--range", gm.range, "Parameter range lo,hi");
    gen_model->add_option("--precision", gm.precision, "Parameter grid step")->check(CLI::PositiveNumber);
    gen_model->add_option("--out", gm.out, "Output model JSON");
    gen_model->add_option("--set-weight", gm.set_weights, "Pin a weight: layer,out,in,value");
    gen_model->callback([&] { action = [&] { return cmd_gen_model(g, gm, *gen_model); }; });

    GenSecretsArgs gs;
    auto *gen_secrets = app.add_subcommand("gen-secrets", "Generate secret arrays S1/S2");
    gen_secrets->add_option("--n-max", gs.n_max, "Largest array length to shuffle")->check(CLI::Range(3U, 1U << 20));
    gen_secrets->add_option("--model", gs.model, "Size the arrays for this model instead");
    gen_secrets->add_option("--out", gs.out, "Output secrets JSON");
    gen_secrets->callback([&] { action = [&] { return cmd_gen_secrets(g, gs); }; });

    CaptureArgs ca;
    auto *capture = app.add_subcommand("capture", "Simulate an attack-trace campaign");
    capture->add_option("--model", ca.model, "Model JSON");
    capture->add_option("--protection", ca.protection, "none | fy | protected");
    capture->add_option("--ml", ca.ml, "Number of traces");
    auto *fixed = capture->add_option("--fixed", ca.fixed, "Constant co-input value");
    capture->add_option("--fixed-random", ca.fixed_random, "Seed for random-but-fixed co-inputs")->excludes(fixed);
    capture->add_option("--varying-index", ca.varying_index, "Input that varies per trace");
    capture->add_option("--range", ca.range, "Range lo,hi of the varying input");
    capture->add_option("--sigma", ca.sigma, "Noise standard deviation");
    capture->add_option("--alpha", ca.alpha, "Leakage scale");
    capture->add_option("--samples-per-mul", ca.samples_per_mul, "Samples per multiplication");
    capture->add_option("--div-leak", ca.div_leak, "bit_serial | hw_only | none");
    capture->add_option("--noise-seed", ca.noise_seed, "Noise seed (default derived from --seed)");
    capture->add_option("--secrets", ca.secrets, "Secret arrays JSON for protected captures");
    capture->add_option("--secrets-seed", ca.secrets_seed, "Generate secrets from this seed");
    capture->add_option("--out", ca.out, "Output trace file");
    capture->add_flag("--with-ground-truth", ca.with_ground_truth, "Store true permutations");
    capture->callback([&] { action = [&] { return cmd_capture(g, ca, *capture); }; });

    auto *attack = app.add_subcommand("attack", "Run an attack");
    attack->require_subcommand(1);
    AttackArgs aa;
    auto add_attack_opts = [&](CLI::App *s) {
        s->add_option("--traces", aa.traces, "Trace file");
        s->add_option("--grid", aa.grid, "Hypothesis grid lo,hi,step");
        s->add_option("--neuron", aa.neuron, "Target neuron in layer 0");
        s->add_option("--out-dir", aa.out_dir, "Directory for reports");
    };
    auto *cpa = attack->add_subcommand("cpa", "Correlation power analysis");
    add_attack_opts(cpa);
    cpa->add_option("--qs", aa.q_s, "First sample of the target range");
    cpa->add_option("--qe", aa.q_e, "Last sample of the target range (inclusive)");
    cpa->add_option("--components", aa.components, "CSV curves to write, e.g. sign,exponent");
    cpa->add_option("--sweep", aa.sweep, "Trace counts for a sweep, e.g. 500,1000,2000");
    cpa->add_option("--true-weight", aa.true_weight, "Known weight for sweep bookkeeping");
    cpa->callback([&] { action = [&] { return cmd_attack_cpa(g, aa, *cpa); }; });
    auto *reorder = attack->add_subcommand("reorder", "Recover shuffle order, then CPA");
    add_attack_opts(reorder);
    reorder->callback([&] { action = [&] { return cmd_attack_reorder(g, aa, *reorder); }; });
    GcdArgs ga;
    auto *gcd = attack->add_subcommand("gcd", "Common-divisor attack on the masked reduction");
    gcd->add_option("--trials", ga.trials, "Independent trials");
    gcd->add_option("--observations", ga.observations, "Observations per trial");
    gcd->add_option("--n-max", ga.n_max, "Secret array size");
    gcd->add_flag("--unblinded", ga.plain, "Attack r*S1 without the r'(i+1) blinding term");
    gcd->add_option("--out-dir", ga.out_dir, "Directory for gcd_report.json");
    gcd->callback([&] { action = [&] { return cmd_attack_gcd(g, ga); }; });

    auto *bench_cmd = app.add_subcommand("bench", "Overhead benchmarks");
    bench_cmd->require_subcommand(1);
    BenchArgs ba;
    auto *bshuffle = bench_cmd->add_subcommand("shuffle", "Plain vs protected shuffle");
    bshuffle->add_option("--sizes", ba.sizes, "Array sizes");
    auto *bnet = bench_cmd->add_subcommand("network", "Inference overhead by network shape");
    bnet->add_option("--neurons", ba.neurons, "Neurons per layer");
    bnet->add_option("--layer-counts", ba.layer_counts, "Layer counts");
    for (auto *s : {bshuffle, bnet}) {
        s->add_option("--repeats", ba.repeats, "Repetitions (median is reported)");
        s->add_option("--target-seconds", ba.target_seconds, "Time per measurement");
        s->add_option("--out", ba.out, "CSV output (default stdout)");
    }
    bshuffle->callback([&] { action = [&] { return cmd_bench_shuffle(g, ba); }; });
    bnet->callback([&] { action = [&] { return cmd_bench_network(g, ba); }; });

    bool inject_fault = false;
    auto *verify_cmd = app.add_subcommand("verify", "Run the invariant suites");
    verify_cmd->add_flag("--inject-fault", inject_fault, "Corrupt one S2 entry (negative control)");
    verify_cmd->callback([&] { action = [&] { return cmd_verify(g, inject_fault); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    return action();
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const LayoutError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::logic_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::ios_base::failure &e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const FormatError &e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::system_error &e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
}
