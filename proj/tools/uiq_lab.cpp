#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "uiq/experiment.hpp"

namespace {

struct Flags {
    std::uint64_t seed = 0;
    std::string out, config, cache;
    unsigned threads = 0;
    uiq::ExperimentConfig knobs;  // values from flags; applied only where given
};

// Numeric flags shared by every subcommand; a flag overrides the config file
// only when it was passed.
void add_knobs(CLI::App* sub, Flags& f, std::vector<std::function<void(uiq::ExperimentConfig&)>>& apply) {
    auto knob = [&](const std::string& name, auto& slot, auto member, const std::string& help) {
        CLI::Option* opt = sub->add_option(name, slot, help);
        apply.push_back([opt, &slot, member](uiq::ExperimentConfig& c) {
            if (opt->count() > 0) c.*member = slot;
        });
    };
    using C = uiq::ExperimentConfig;
    knob("--n-max", f.knobs.n_max, &C::n_max, "largest edge count N");
    knob("--k-max", f.knobs.k_max, &C::k_max, "largest label / level k");
    knob("--j-max", f.knobs.j_max, &C::j_max, "largest label j for kernels and growth");
    knob("--k-cut", f.knobs.k_cut, &C::k_cut, "spine truncation level");
    knob("--j-target", f.knobs.j_target, &C::j_target, "labels guaranteed complete in a truncated sample");
    knob("--replicas", f.knobs.replicas, &C::replicas, "Monte-Carlo replicas");
    knob("--horizon", f.knobs.horizon, &C::horizon, "steps per Monte-Carlo spine path");
    knob("-N,--edges", f.knobs.N, &C::N, "tree size for sample-tree and map-quad");
    knob("--k0", f.knobs.k0, &C::k0, "fixed row k for the kernel decay fit");
    knob("--fit-lo", f.knobs.fit_lo, &C::fit_lo, "lower end of the fit window");
    knob("--fit-hi", f.knobs.fit_hi, &C::fit_hi, "upper end of the fit window");
    knob("--tolerance", f.knobs.tolerance, &C::tolerance, "series truncation tolerance");
    knob("--mode", f.knobs.mode, &C::mode, "sample-tree: finite or uit");
    knob("--tree", f.knobs.tree, &C::tree, "nested tree, e.g. 1(2,1(1))");
    knob("--n-grid", f.knobs.n_grid, &C::n_grid, "cylinder: tree sizes");
}

int run(int argc, char** argv) {
    CLI::App app{"uiq_lab: labeled trees, the infinite spine tree and their quadrangulations"};
    app.require_subcommand(1);
    Flags f;
    CLI::Option* seed_opt = app.add_option("--seed", f.seed, "master seed")->capture_default_str();
    CLI::Option* out_opt = app.add_option("--out", f.out, "output directory");
    app.add_option("--config", f.config, "JSON config; explicit flags take precedence");
    CLI::Option* cache_opt = app.add_option("--cache", f.cache, "count-table cache directory");
    CLI::Option* threads_opt = app.add_option("--threads", f.threads, "worker threads, 0 = hardware");
    app.fallthrough();

    std::vector<std::function<void(uiq::ExperimentConfig&)>> apply;
    for (const std::string& name : uiq::experiment_commands()) add_knobs(app.add_subcommand(name), f, apply);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    uiq::ExperimentConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw uiq::ConfigError("cannot read config " + f.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw uiq::ConfigError("config " + f.config + ": " + e.what());
        }
        cfg.apply_json(j);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (seed_opt->count()) cfg.seed = f.seed;
    if (out_opt->count()) cfg.out_dir = f.out;
    if (cache_opt->count()) cfg.cache_dir = f.cache;
    if (threads_opt->count()) cfg.threads = f.threads;
    for (auto& fn : apply) fn(cfg);

    const uiq::ExperimentReport rep = uiq::run_experiment(cfg);
    std::cout << "config_hash=" << cfg.hash() << " seed=" << cfg.seed << '\n';
    for (const auto& file : rep.files) std::cout << "wrote " << file << '\n';
    for (const auto& [key, value] : rep.summary) std::cout << key << " = " << value << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const uiq::Error& e) {
        std::cerr << "uiq_lab: " << e.what() << '\n';
        return e.numerical() ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "uiq_lab: " << e.what() << '\n';
        return 1;
    }
}
