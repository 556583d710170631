#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "uiq/assembler.hpp"
#include "uiq/branches.hpp"
#include "uiq/enumeration.hpp"
#include "uiq/errors.hpp"
#include "uiq/fit.hpp"
#include "uiq/quadmap.hpp"
#include "uiq/rng.hpp"
#include "uiq/spine.hpp"

namespace uiq {

inline const std::vector<std::string>& experiment_commands() {
    static const std::vector<std::string> names{"constants", "counts",      "sojourn",  "gkernel",
                                                "growth",    "sample-tree", "map-quad", "cylinder"};
    return names;
}

// Every numeric knob of every subcommand. Fields a subcommand does not use are
// still echoed, so the config hash identifies the run completely.
struct ExperimentConfig {
    std::string command;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string cache_dir;  // count-table cache; empty disables
    unsigned threads = 0;   // not part of the identity: results do not depend on it

    long n_max = 12;
    long k_max = 10;
    long j_max = 64;
    long k_cut = 2048;
    long j_target = 8;
    long replicas = 1000;
    long horizon = 20000;
    long N = 50;
    long k0 = 1;
    double fit_lo = 8;
    double fit_hi = 64;
    double tolerance = 1e-12;
    std::string mode = "finite";  // sample-tree: finite | uit
    std::string tree;             // nested form; map-quad input / cylinder pattern
    std::vector<long> n_grid{50, 200, 800};

    nlohmann::json to_json() const {
        return {{"command", command}, {"seed", seed},         {"n_max", n_max},       {"k_max", k_max},
                {"j_max", j_max},     {"k_cut", k_cut},       {"j_target", j_target}, {"replicas", replicas},
                {"horizon", horizon}, {"N", N},               {"k0", k0},             {"fit_lo", fit_lo},
                {"fit_hi", fit_hi},   {"tolerance", tolerance}, {"mode", mode},       {"tree", tree},
                {"n_grid", n_grid}};
    }

    // Overrides fields present in j; unknown keys and wrong types are errors.
    void apply_json(const nlohmann::json& j) {
        if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const nlohmann::json& v = it.value();
            try {
                if (k == "command") command = v.get<std::string>();
                else if (k == "seed") seed = v.get<std::uint64_t>();
                else if (k == "out") out_dir = v.get<std::string>();
                else if (k == "cache") cache_dir = v.get<std::string>();
                else if (k == "threads") threads = v.get<unsigned>();
                else if (k == "n_max") n_max = v.get<long>();
                else if (k == "k_max") k_max = v.get<long>();
                else if (k == "j_max") j_max = v.get<long>();
                else if (k == "k_cut") k_cut = v.get<long>();
                else if (k == "j_target") j_target = v.get<long>();
                else if (k == "replicas") replicas = v.get<long>();
                else if (k == "horizon") horizon = v.get<long>();
                else if (k == "N") N = v.get<long>();
                else if (k == "k0") k0 = v.get<long>();
                else if (k == "fit_lo") fit_lo = v.get<double>();
                else if (k == "fit_hi") fit_hi = v.get<double>();
                else if (k == "tolerance") tolerance = v.get<double>();
                else if (k == "mode") mode = v.get<std::string>();
                else if (k == "tree") tree = v.get<std::string>();
                else if (k == "n_grid") n_grid = v.get<std::vector<long>>();
                else throw ConfigError("config: unknown key '" + k + "'");
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config: bad value for '" + k + "': " + e.what());
            }
        }
    }

    // FNV-1a over the canonical JSON echo.
    std::string hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : to_json().dump()) {
            h ^= c;
            h *= 1099511628211ull;
        }
        char buf[17];
        const auto r = std::to_chars(buf, buf + 16, h, 16);
        return std::string(16 - static_cast<std::size_t>(r.ptr - buf), '0') + std::string(buf, r.ptr);
    }

    void validate() const {
        const auto& names = experiment_commands();
        if (std::find(names.begin(), names.end(), command) == names.end())
            throw ConfigError("config: unknown command '" + command + "'");
        auto need = [](bool ok, const char* what) {
            if (!ok) throw ConfigError(std::string("config: ") + what);
        };
        need(n_max >= 0, "n_max must be >= 0");
        need(k_max >= 1, "k_max must be >= 1");
        need(j_max >= 1, "j_max must be >= 1");
        need(k_cut >= 1, "k_cut must be >= 1");
        need(j_target >= 1, "j_target must be >= 1");
        need(replicas >= 0, "replicas must be >= 0");
        need(horizon >= 0, "horizon must be >= 0");
        need(N >= 0, "N must be >= 0");
        need(k0 >= 1, "k0 must be >= 1");
        need(fit_lo > 0 && fit_hi > fit_lo, "fit window must satisfy 0 < fit_lo < fit_hi");
        need(tolerance > 0, "tolerance must be positive");
        need(mode == "finite" || mode == "uit", "mode must be 'finite' or 'uit'");
        for (long n : n_grid) need(n >= 0, "n_grid entries must be >= 0");
    }
};

// CSV with a leading comment echoing the configuration.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::vector<std::string>& header)
        : path_(path), os_(path, std::ios::binary) {
        if (!os_) throw ConfigError("cannot write " + path.string());
        os_ << config_comment(cfg) << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
        columns_ = header.size();
    }

    static std::string config_comment(const ExperimentConfig& cfg) {
        return "# uiq_lab " + cfg.command + " config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed) +
               " rng=" + std::string(rng_algorithm_id) + " config=" + cfg.to_json().dump();
    }

    template <class... T>
    void row(const T&... values) {
        if (sizeof...(T) != columns_) throw StructureError("CsvWriter: column count mismatch in " + path_.string());
        std::size_t i = 0;
        ((os_ << (i++ ? "," : ""), put(values)), ...);
        os_ << '\n';
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    template <class V>
    void put(const V& v) {
        if constexpr (std::is_same_v<V, double> || std::is_same_v<V, float>) {
            char buf[64];
            const auto r = std::to_chars(buf, buf + sizeof buf, static_cast<double>(v));
            os_.write(buf, r.ptr - buf);
        } else if constexpr (std::is_same_v<V, bool>) {
            os_ << (v ? 1 : 0);
        } else if constexpr (std::is_same_v<V, Rational> || std::is_same_v<V, Count>) {
            os_ << v.get_str();
        } else {
            os_ << v;
        }
    }

    std::filesystem::path path_;
    std::ofstream os_;
    std::size_t columns_ = 0;
};

struct ExperimentReport {
    std::vector<std::string> files;
    std::map<std::string, double> summary;  // headline numbers for the console
};

namespace detail {

inline std::filesystem::path output_path(const ExperimentConfig& c, const std::string& name) {
    return std::filesystem::path(c.out_dir) / name;
}

inline void write_text(const std::filesystem::path& p, const ExperimentConfig& c, const std::string& body,
                       ExperimentReport& rep) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << CsvWriter::config_comment(c) << '\n' << body;
    rep.files.push_back(p.string());
}

inline void run_constants(const ExperimentConfig& c, ExperimentReport& rep) {
    CsvWriter w(output_path(c, "constants.csv"), c, {"k", "z", "w", "d", "p", "q", "r"});
    for (long k = 1; k <= c.k_max; ++k) {
        const BirthDeathParams b = bd_params(k);
        w.row(k, z_value(k), w_value(k), d_value(k), b.p, b.q, b.r);
    }
    rep.files.push_back(w.path().string());
}

inline void run_counts(const ExperimentConfig& c, ExperimentReport& rep) {
    const CountTable t = cached_count_table(c.cache_dir, c.n_max, c.k_max, CountMethod::forward);
    {
        CsvWriter w(output_path(c, "counts.csv"), c, {"N", "k", "D", "E"});
        for (long n = 0; n <= c.n_max; ++n)
            for (long k = 1; k <= c.k_max; ++k) w.row(n, k, t.D(n, k), t.E(n, k));
        rep.files.push_back(w.path().string());
    }
    CsvWriter a(output_path(c, "counts_audit.csv"), c, {"N", "k", "dp", "brute_force", "match"});
    long mismatches = 0;
    for (long n = 0; n <= std::min(c.n_max, brute_force_max_edges); ++n)
        for (long k = 1; k <= std::min(c.k_max, 4L); ++k) {
            const Count brute = count_k_labeled_brute(n, k);
            const bool ok = brute == t.D(n, k);
            mismatches += !ok;
            a.row(n, k, t.D(n, k), brute, ok);
        }
    rep.files.push_back(a.path().string());
    rep.summary["audit_mismatches"] = static_cast<double>(mismatches);
}

inline void run_sojourn(const ExperimentConfig& c, ExperimentReport& rep) {
    std::vector<long> levels;
    for (long k = 1; k <= std::min(c.k_max, 20L); ++k) levels.push_back(k);
    for (long k = 100; k <= c.k_max; k *= 10) levels.push_back(k);
    {
        CsvWriter w(output_path(c, "sojourn_exact.csv"), c, {"k", "expected_sojourn", "error_bound", "terms", "ratio_to_k", "gap_to_3_7"});
        for (long k : levels) {
            const SojournEstimate e = sojourn_exact(k, c.tolerance);
            const double ratio = e.value / static_cast<double>(k);
            w.row(k, e.value, e.error, e.terms_or_replicas, ratio, std::abs(ratio - 3.0 / 7.0));
            if (k >= 100) rep.summary["ratio_to_k_at_" + std::to_string(k)] = ratio;
        }
        rep.files.push_back(w.path().string());
    }
    if (c.replicas == 0) return;
    CsvWriter w(output_path(c, "sojourn_mc.csv"), c, {"k", "mc_mean", "std_error", "exact", "censored_fraction", "z_score"});
    for (long k : levels) {
        if (k > 50) break;
        const SojournEstimate mc = sojourn_mc(k, c.replicas, c.horizon, derive_seed(c.seed, static_cast<std::uint64_t>(k)),
                                              {.threads = c.threads});
        const double ex = sojourn_exact(k, c.tolerance).value;
        w.row(k, mc.value, mc.error, ex, mc.censored_fraction, mc.error > 0 ? (mc.value - ex) / mc.error : 0.0);
    }
    rep.files.push_back(w.path().string());
}

inline void run_gkernel(const ExperimentConfig& c, ExperimentReport& rep) {
    if (c.k0 > c.k_max) throw ConfigError("gkernel: k0 must be <= k_max");
    const GKernel g = g_kernel_exact(c.k_max, std::max(c.j_max, c.k_max) + g_kernel_buffer, c.threads);
    {
        CsvWriter w(output_path(c, "gkernel.csv"), c, {"k", "j", "G"});
        for (long k = 1; k <= c.k_max; ++k)
            for (long j = 1; j <= c.j_max; ++j) w.row(k, j, g(k, j));
        rep.files.push_back(w.path().string());
    }
    CsvWriter w(output_path(c, "gkernel_fits.csv"), c, {"series", "slope", "intercept", "std_error", "lo", "hi", "points"});
    std::vector<std::pair<double, double>> decay, growth;
    for (long j = 1; j <= c.j_max; ++j) decay.emplace_back(static_cast<double>(j), g(c.k0, j));
    for (long k = 1; k <= std::min(c.k_max, c.j_max - 1); ++k) growth.emplace_back(static_cast<double>(k), g(k, c.j_max));
    const FitResult d = fit_exponent(decay, c.fit_lo, c.fit_hi);
    w.row("G(k0,j) over j", d.slope, d.intercept, d.std_error, d.lo, d.hi, d.points);
    rep.summary["decay_slope"] = d.slope;
    try {
        const FitResult gr = fit_exponent(growth, c.fit_lo, c.fit_hi);
        w.row("G(k,j_max) over k", gr.slope, gr.intercept, gr.std_error, gr.lo, gr.hi, gr.points);
        rep.summary["growth_slope"] = gr.slope;
    } catch (const RangeError&) {
        // k_max below the window: the growth series has too few points.
    }
    rep.summary["residual"] = g.residual_norm();
    rep.files.push_back(w.path().string());
}

inline void run_growth(const ExperimentConfig& c, ExperimentReport& rep) {
    const GrowthTables tables(c.j_max, c.k_cut, c.threads);
    std::vector<std::pair<double, double>> enj, ball;
    {
        CsvWriter w(output_path(c, "growth.csv"), c, {"j", "E_N_j", "tail_estimate", "E_ball_volume"});
        double volume = 1;
        for (long j = 1; j <= c.j_max; ++j) {
            const GrowthEstimate e = synthesize_ENj(tables, j);
            volume += e.value;
            w.row(j, e.value, e.tail, volume);
            enj.emplace_back(static_cast<double>(j), e.value);
            ball.emplace_back(static_cast<double>(j), volume);
        }
        rep.files.push_back(w.path().string());
    }
    CsvWriter w(output_path(c, "growth_fits.csv"), c, {"series", "slope", "intercept", "std_error", "lo", "hi", "points"});
    const FitResult a = fit_exponent(enj, c.fit_lo, c.fit_hi);
    const FitResult b = fit_exponent(ball, c.fit_lo, c.fit_hi);
    w.row("E_N_j", a.slope, a.intercept, a.std_error, a.lo, a.hi, a.points);
    w.row("E_ball_volume", b.slope, b.intercept, b.std_error, b.lo, b.hi, b.points);
    rep.summary["ENj_slope"] = a.slope;
    rep.summary["ball_slope"] = b.slope;
    rep.files.push_back(w.path().string());
}

inline void run_sample_tree(const ExperimentConfig& c, ExperimentReport& rep) {
    if (c.mode == "finite") {
        const CountTable t = cached_count_table(c.cache_dir, c.N, 1, CountMethod::forward);
        const LabeledTree tree = sample_finite_uniform(c.N, c.seed, t);
        detail::write_text(output_path(c, "tree.txt"), c, tree.to_depth_label(), rep);
        CsvWriter w(output_path(c, "tree_labels.csv"), c, {"label", "count"});
        const auto counts = tree.label_counts();
        for (std::size_t l = 1; l < counts.size(); ++l) w.row(l, counts[l]);
        rep.files.push_back(w.path().string());
        rep.summary["height"] = tree.height();
        return;
    }
    if (c.k_cut <= c.j_target) throw ConfigError("sample-tree: k_cut must exceed j_target");
    const GrowthTables tables(c.j_target, c.k_cut, c.threads);
    const TruncatedUIT uit = sample_uit(c.j_target, c.k_cut, c.seed, &tables);
    detail::write_text(output_path(c, "tree.txt"), c, uit.assemble().to_depth_label(), rep);
    {
        CsvWriter w(output_path(c, "spine.csv"), c, {"t", "label", "left_edges", "right_edges"});
        for (std::size_t t = 0; t < uit.spine.states.size(); ++t)
            w.row(t, uit.spine.states[t], uit.left[t].edge_count(), uit.right[t].edge_count());
        rep.files.push_back(w.path().string());
    }
    const LabelHistogram h = label_histogram(uit, c.j_target);
    CsvWriter w(output_path(c, "label_histogram.csv"), c, {"j", "count", "missing_mass", "E_N_j"});
    for (long j = 1; j <= c.j_target; ++j)
        w.row(j, h.counts[static_cast<std::size_t>(j)], h.bias_bound[static_cast<std::size_t>(j)], synthesize_ENj(tables, j).value);
    rep.files.push_back(w.path().string());
    rep.summary["spine_length"] = static_cast<double>(uit.spine.states.size());
}

inline void run_map_quad(const ExperimentConfig& c, ExperimentReport& rep) {
    std::unique_ptr<CountTable> table;
    if (c.tree.empty()) table = std::make_unique<CountTable>(cached_count_table(c.cache_dir, c.N, 1, CountMethod::forward));
    const long count = c.tree.empty() ? std::max(1L, c.replicas) : 1;
    CsvWriter w(output_path(c, "map_quad.csv"), c,
                {"replica", "edges_in_tree", "vertices", "edges", "faces", "pre_triangles", "pre_quadrangles",
                 "deleted_edges", "face_violations", "distance_mismatches", "euler"});
    long bad = 0;
    for (long i = 0; i < count; ++i) {
        LabeledTree tree;
        if (c.tree.empty()) {
            Rng rng = stream_rng(c.seed, static_cast<std::uint64_t>(i));
            FiniteUniformSampler sampler(*table);
            tree = sampler.sample(c.N, 1, rng);
        } else {
            try {
                tree = LabeledTree::from_nested(c.tree);
            } catch (const FormatError& e) {
                throw ConfigError(std::string("map-quad: ") + e.what());
            }
        }
        const Quadrangulation q = build_q(tree);
        long mismatch = 0;
        for (std::size_t v = 0; v < q.distance.size(); ++v) mismatch += q.distance[v] != q.map.vertex_label[v];
        const long euler = static_cast<long>(q.map.vertex_count()) - static_cast<long>(q.map.edge_count()) +
                           static_cast<long>(q.faces.faces);
        bad += mismatch != 0 || euler != 2 || q.pre_deletion.violations != 0;
        w.row(i, tree.edge_count(), q.map.vertex_count(), q.map.edge_count(), q.faces.faces, q.pre_deletion.triangles,
              q.pre_deletion.quadrangles, q.deleted_edges, q.pre_deletion.violations + q.faces.violations, mismatch, euler);
        if (i == 0) detail::write_text(output_path(c, "map.txt"), c, q.map.to_text(), rep);
    }
    rep.files.push_back(w.path().string());
    rep.summary["bad_maps"] = static_cast<double>(bad);
}

inline void run_cylinder(const ExperimentConfig& c, ExperimentReport& rep) {
    LabeledTree pattern;
    try {
        pattern = LabeledTree::from_nested(c.tree.empty() ? "1(1)" : c.tree);
    } catch (const FormatError& e) {
        throw ConfigError(std::string("cylinder: ") + e.what());
    }
    if (c.replicas < 1) throw ConfigError("cylinder: replicas must be >= 1");
    const Rational exact = cylinder_measure(pattern, pattern.height());
    const auto rows = empirical_cylinder_check(c.n_grid, pattern, {c.replicas}, c.seed, nullptr, c.threads);
    CsvWriter w(output_path(c, "cylinder.csv"), c, {"N", "replicas", "hits", "frequency", "std_error", "limit", "limit_exact", "gap"});
    for (const CylinderRow& r : rows) w.row(r.N, r.replicas, r.hits, r.frequency, r.std_error, r.target, exact, r.gap);
    rep.files.push_back(w.path().string());
    rep.summary["limit"] = exact.get_d();
}

} // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& c) {
    c.validate();
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + c.out_dir + ": " + ec.message());
    ExperimentReport rep;
    if (c.command == "constants") detail::run_constants(c, rep);
    else if (c.command == "counts") detail::run_counts(c, rep);
    else if (c.command == "sojourn") detail::run_sojourn(c, rep);
    else if (c.command == "gkernel") detail::run_gkernel(c, rep);
    else if (c.command == "growth") detail::run_growth(c, rep);
    else if (c.command == "sample-tree") detail::run_sample_tree(c, rep);
    else if (c.command == "map-quad") detail::run_map_quad(c, rep);
    else detail::run_cylinder(c, rep);
    return rep;
}

} // namespace uiq
