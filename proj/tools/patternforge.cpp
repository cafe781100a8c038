// Command-line front end: pattern generation, bag evaluation, variance
// sweeps, parameter cases, ROM tooling and a generation benchmark.

#include "patternforge/config_json.hpp"
#include "patternforge/core.hpp"
#include "patternforge/evaluation.hpp"
#include "patternforge/experiments.hpp"
#include "patternforge/generators.hpp"
#include "patternforge/pattern_io.hpp"
#include "patternforge/rom.hpp"
#include "patternforge/sha256.hpp"
#include "patternforge/units.hpp"
#include "patternforge/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

namespace pf = patternforge;
namespace fs = std::filesystem;

namespace {

int exit_code_for(pf::errc code) {
    switch (code) {
    case pf::errc::invalid_config:
    case pf::errc::infeasible_count:
    case pf::errc::infeasible_spacing:
    case pf::errc::infeasible_room:
        return 3;
    case pf::errc::io_error:
        return 5;
    default:
        return 4;
    }
}

void emit_error(std::string_view code, std::string_view message) {
    nlohmann::json j;
    j["error"] = {{"code", std::string(code)},
                  {"message", std::string(message)}};
    std::cerr << j.dump() << '\n';
}

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Config can come from --case, from a JSON file, or be assembled from
// flags; individual flags override whatever the named case or file said.
struct ConfigOpts {
    std::string case_name;
    std::string config_path;
    std::string tau, t_grid, f_req, t_min, t_max;
    double sigma2 = 0.0;

    CLI::Option *tau_opt = nullptr;
    CLI::Option *t_grid_opt = nullptr;
    CLI::Option *f_req_opt = nullptr;
    CLI::Option *t_min_opt = nullptr;
    CLI::Option *t_max_opt = nullptr;
    CLI::Option *sigma2_opt = nullptr;
    CLI::Option *case_opt = nullptr;
    CLI::Option *config_opt = nullptr;
};

void add_config_flags(CLI::App *cmd, ConfigOpts &o) {
    o.case_opt = cmd->add_option("--case", o.case_name,
                                 "Built-in parameter case (A, B, C, D, exp1)");
    o.config_opt =
        cmd->add_option("--config", o.config_path, "Config JSON file");
    o.tau_opt = cmd->add_option(
        "--tau", o.tau, "Pattern duration (seconds or unit string, e.g. 1ms)");
    o.t_grid_opt =
        cmd->add_option("--t-grid", o.t_grid, "Grid period (e.g. 1us)");
    o.f_req_opt = cmd->add_option(
        "--f-req", o.f_req,
        "Requested average sampling frequency (e.g. 100kHz)");
    o.t_min_opt = cmd->add_option("--t-min", o.t_min,
                                  "Minimum distance between samples");
    o.t_max_opt = cmd->add_option("--t-max", o.t_max,
                                  "Maximum distance between samples");
    o.sigma2_opt =
        cmd->add_option("--sigma2", o.sigma2, "Variance of the draws");
}

double parse_time_flag(const std::string &text, const char *flag) {
    const auto v = pf::parse_duration(text);
    if (!v)
        pf::fail(pf::errc::invalid_config,
                 std::string("cannot parse ") + flag + " value \"" + text +
                     "\"");
    return *v;
}

pf::SamplingConfig resolve_config(const ConfigOpts &o) {
    if (o.case_opt->count() && o.config_opt->count())
        pf::fail(pf::errc::invalid_config,
                 "--case and --config are mutually exclusive");

    pf::SamplingConfig cfg{};
    bool have_base = false;
    if (o.case_opt->count()) {
        const auto named = pf::named_config(o.case_name);
        if (!named)
            pf::fail(pf::errc::invalid_config,
                     "unknown case \"" + o.case_name +
                         "\" (expected A, B, C, D or exp1)");
        cfg = *named;
        have_base = true;
    } else if (o.config_opt->count()) {
        std::ifstream in(o.config_path);
        if (!in)
            pf::fail(pf::errc::io_error, "cannot open " + o.config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception &e) {
            pf::fail(pf::errc::malformed_file,
                     o.config_path + ": " + e.what());
        }
        cfg = pf::config_from_json(j);
        have_base = true;
    }

    if (o.tau_opt->count())
        cfg.tau = parse_time_flag(o.tau, "--tau");
    if (o.t_grid_opt->count())
        cfg.t_grid = parse_time_flag(o.t_grid, "--t-grid");
    if (o.f_req_opt->count()) {
        const auto v = pf::parse_frequency(o.f_req);
        if (!v)
            pf::fail(pf::errc::invalid_config,
                     "cannot parse --f-req value \"" + o.f_req + "\"");
        cfg.f_req = *v;
    }
    if (o.t_min_opt->count())
        cfg.t_min = parse_time_flag(o.t_min, "--t-min");
    if (o.t_max_opt->count())
        cfg.t_max = parse_time_flag(o.t_max, "--t-max");
    if (o.sigma2_opt->count())
        cfg.sigma2 = o.sigma2;

    if (!have_base &&
        !(o.tau_opt->count() && o.t_grid_opt->count() && o.f_req_opt->count()))
        pf::fail(pf::errc::invalid_config,
                 "need --case, --config, or all of --tau --t-grid --f-req");
    cfg.validate();
    return cfg;
}

std::uint64_t resolve_seed(CLI::Option *seed_opt, std::uint64_t seed_flag) {
    if (seed_opt->count())
        return seed_flag;
    if (const char *env = std::getenv("PATTERNFORGE_SEED")) {
        char *end = nullptr;
        const auto v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            pf::fail(pf::errc::invalid_config,
                     std::string("PATTERNFORGE_SEED is not a number: ") + env);
        return v;
    }
    return 1;
}

pf::GeneratorKind resolve_single_generator(const std::vector<std::string> &gens) {
    if (gens.size() != 1)
        pf::fail(pf::errc::invalid_config,
                 "exactly one --gen is required here");
    const auto kind = pf::parse_generator(gens[0]);
    if (!kind)
        pf::fail(pf::errc::invalid_config,
                 "unknown generator \"" + gens[0] +
                     "\" (expected js, ars or angie)");
    return *kind;
}

std::vector<pf::GeneratorKind>
resolve_generators(const std::vector<std::string> &gens) {
    if (gens.empty())
        return {pf::GeneratorKind::js, pf::GeneratorKind::ars,
                pf::GeneratorKind::angie};
    std::vector<pf::GeneratorKind> kinds;
    for (const auto &name : gens) {
        const auto kind = pf::parse_generator(name);
        if (!kind)
            pf::fail(pf::errc::invalid_config,
                     "unknown generator \"" + name + "\"");
        kinds.push_back(*kind);
    }
    return kinds;
}

struct ManifestInput {
    std::vector<std::string> command;
    std::optional<pf::SamplingConfig> config;
    std::optional<std::uint64_t> seed;
    std::vector<fs::path> outputs;
};

void write_manifest(const fs::path &path, const ManifestInput &input) {
    nlohmann::json j;
    j["tool"] = "patternforge";
    j["version"] = std::string(pf::version);
    j["timestamp"] = iso_utc_now();
    j["command"] = input.command;
    j["config"] = input.config ? pf::config_to_json(*input.config)
                               : nlohmann::json(nullptr);
    j["seed"] = input.seed ? nlohmann::json(*input.seed)
                           : nlohmann::json(nullptr);
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto &out : input.outputs) {
        nlohmann::json entry;
        entry["path"] = out.string();
        entry["bytes"] = static_cast<std::uint64_t>(fs::file_size(out));
        entry["sha256"] = pf::sha256_file_hex(out);
        outputs.push_back(std::move(entry));
    }
    j["outputs"] = std::move(outputs);

    std::ofstream out(path, std::ios::binary);
    if (!out)
        pf::fail(pf::errc::io_error,
                 "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

void print_or_write(const std::string &text, const std::string &out_path,
                    const ManifestInput &manifest_base) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        pf::fail(pf::errc::io_error, "cannot open " + out_path);
    out << text;
    out.close();
    ManifestInput m = manifest_base;
    m.outputs = {fs::path(out_path)};
    write_manifest(out_path + ".manifest.json", m);
}

std::vector<std::string> capture_command(int argc, char **argv) {
    return {argv, argv + argc};
}

// ---- subcommand bodies ----

int run_generate(const ManifestInput &base, const ConfigOpts &cfg_opts,
                 const std::vector<std::string> &gens, std::uint64_t n,
                 std::uint64_t seed, const std::string &out_path) {
    const auto cfg = resolve_config(cfg_opts);
    const auto kind = resolve_single_generator(gens);
    if (n < 1)
        pf::fail(pf::errc::invalid_config, "--n must be at least 1");

    auto bag = pf::generate_bag(kind, cfg, n, seed);
    pf::PatternFile file;
    file.k_grid = bag.derived.k_grid;
    file.t_grid = bag.derived.t_grid;
    file.patterns = std::move(bag.patterns);
    pf::write_patterns_file(out_path, file);

    ManifestInput m = base;
    m.config = cfg;
    m.seed = seed;
    m.outputs = {fs::path(out_path)};
    write_manifest(out_path + ".manifest.json", m);
    return 0;
}

int run_evaluate(const ManifestInput &base, const ConfigOpts &cfg_opts,
                 const std::string &in_path, const std::string &out_path) {
    const auto cfg = resolve_config(cfg_opts);
    const auto d = pf::derive_params_unchecked_room(cfg);
    const auto file = pf::read_patterns_file(in_path);
    if (file.k_grid != d.k_grid)
        pf::fail(pf::errc::grid_mismatch,
                 "pattern file grid (" + std::to_string(file.k_grid) +
                     ") does not match the config grid (" +
                     std::to_string(d.k_grid) + ")");

    pf::MetricAccumulator acc(d.k_grid);
    for (std::size_t i = 0; i < file.patterns.size(); ++i)
        acc.add(file.patterns[i],
                pf::validate_pattern(file.patterns[i], d), d,
                static_cast<std::uint64_t>(i));
    const auto report = acc.finalize();

    ManifestInput m = base;
    m.config = cfg;
    print_or_write(pf::to_json(report).dump(2) + "\n", out_path, m);
    return 0;
}

int run_sweep(const ManifestInput &base, const ConfigOpts &cfg_opts,
              const std::vector<std::string> &gens, bool desk_scale,
              CLI::Option *n_opt, std::uint64_t n, std::uint64_t seed,
              unsigned threads, const std::string &out_dir) {
    pf::SweepSpec spec;
    spec.base = resolve_config(cfg_opts);
    spec.generators = resolve_generators(gens);
    if (desk_scale) {
        spec.sigma2_grid = pf::sigma2_grid_desk();
        spec.n_min = 10000;
        spec.n_cap = 10000;
        spec.eta_at = 10000;
    } else {
        spec.sigma2_grid = pf::sigma2_grid_full();
        spec.n_min = 100000;
        spec.n_cap = 1000000;
        spec.eta_at = 100000;
    }
    if (cfg_opts.sigma2_opt->count())
        spec.sigma2_grid = {cfg_opts.sigma2};
    if (n_opt->count()) {
        if (n < 1)
            pf::fail(pf::errc::invalid_config, "--n must be at least 1");
        spec.n_min = n;
        spec.n_cap = n;
    }

    const auto report = pf::run_sweep(spec, seed, threads);
    const auto written =
        pf::write_report_files(report, fs::path(out_dir), threads);

    ManifestInput m = base;
    m.config = spec.base;
    m.seed = seed;
    m.outputs = written;
    write_manifest(fs::path(out_dir) / "manifest.json", m);
    return 0;
}

int run_cases() {
    std::cout << "name,tau,t_grid,f_req,t_min,t_max,k_grid,k_req,k_min,"
                 "k_max,n_avg\n";
    for (const auto &nc : pf::builtin_cases()) {
        const auto d = pf::derive_params_unchecked_room(nc.config);
        std::cout << nc.name << ',' << pf::format_double(nc.config.tau) << ','
                  << pf::format_double(nc.config.t_grid) << ','
                  << pf::format_double(nc.config.f_req) << ',';
        if (nc.config.t_min)
            std::cout << pf::format_double(*nc.config.t_min);
        std::cout << ',';
        if (nc.config.t_max)
            std::cout << pf::format_double(*nc.config.t_max);
        std::cout << ',' << d.k_grid << ',' << d.k_req << ',' << d.k_min
                  << ',';
        if (d.bounded_max())
            std::cout << d.k_max;
        else
            std::cout << "inf";
        std::cout << ',' << d.n_avg << '\n';
    }
    return 0;
}

int run_rom_encode(const ManifestInput &base, const std::string &in_path,
                   const std::string &out_path) {
    const auto file = pf::read_patterns_file(in_path);
    if (file.patterns.empty())
        pf::fail(pf::errc::malformed_file,
                 in_path + " holds no patterns to encode");
    std::vector<pf::RomImage> images;
    images.reserve(file.patterns.size());
    for (const auto &p : file.patterns)
        images.push_back(pf::encode_rom(p));
    if (images.size() == 1)
        pf::write_rom_file(out_path, images[0]);
    else
        pf::write_rom_archive(out_path, images);

    ManifestInput m = base;
    m.outputs = {fs::path(out_path)};
    write_manifest(out_path + ".manifest.json", m);
    return 0;
}

int run_rom_decode(const ManifestInput &base, const std::string &in_path,
                   const std::string &out_path, CLI::Option *t_grid_opt,
                   const std::string &t_grid_text) {
    double t_grid = 1.0;
    if (t_grid_opt->count())
        t_grid = parse_time_flag(t_grid_text, "--t-grid");
    const auto images = pf::read_rom_any(in_path);
    pf::PatternFile file;
    file.t_grid = t_grid;
    for (const auto &img : images) {
        auto p = pf::decode_rom(img, t_grid);
        if (file.patterns.empty())
            file.k_grid = p.k_grid();
        else if (p.k_grid() != file.k_grid)
            pf::fail(pf::errc::grid_mismatch,
                     "archive mixes images with different grid sizes");
        file.patterns.push_back(std::move(p));
    }
    pf::write_patterns_file(out_path, file);

    ManifestInput m = base;
    m.outputs = {fs::path(out_path)};
    write_manifest(out_path + ".manifest.json", m);
    return 0;
}

int run_rom_simulate(const ManifestInput &base, const std::string &in_path,
                     std::uint64_t clock_div, const std::string &out_path) {
    const auto images = pf::read_rom_any(in_path);
    nlohmann::json traces = nlohmann::json::array();
    for (const auto &img : images) {
        const auto trace = pf::simulate_driver(img, clock_div);
        nlohmann::json t;
        t["total_clocks"] = trace.total_clocks;
        t["events"] = trace.events;
        traces.push_back(std::move(t));
    }
    nlohmann::json j;
    j["clock_div"] = clock_div;
    j["traces"] = std::move(traces);
    print_or_write(j.dump(2) + "\n", out_path, base);
    return 0;
}

int run_bench(const std::vector<std::string> &gens, std::uint64_t n,
              std::uint64_t seed) {
    const auto kinds = resolve_generators(gens);
    const double f_reqs[] = {1e4, 2e4, 5e4, 1e5};
    std::cout << "generator,f_req,k_req,n,seconds,patterns_per_second\n";
    for (const auto kind : kinds) {
        for (const double f_req : f_reqs) {
            pf::SamplingConfig cfg{1e-3, 1e-6, f_req, 5e-6, std::nullopt,
                                   1e-2};
            const auto d = kind == pf::GeneratorKind::angie
                               ? pf::derive_params(cfg)
                               : pf::derive_params_unchecked_room(cfg);
            const auto start = std::chrono::steady_clock::now();
            std::uint64_t sink = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                const auto p =
                    pf::generate_at(kind, d, cfg.sigma2, seed, i);
                sink += static_cast<std::uint64_t>(p.size());
            }
            const auto stop = std::chrono::steady_clock::now();
            const double seconds =
                std::chrono::duration<double>(stop - start).count();
            std::cout << pf::generator_name(kind) << ','
                      << pf::format_double(f_req) << ',' << d.k_req << ','
                      << n << ',' << pf::format_double(seconds) << ','
                      << pf::format_double(static_cast<double>(n) / seconds)
                      << '\n';
            if (sink == 0)
                std::cerr << "warning: generated no points\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Constrained random sampling pattern toolkit"};
    app.set_version_flag("--version", std::string(pf::version));
    app.require_subcommand(1);

    // generate
    auto *gen_cmd =
        app.add_subcommand("generate", "Generate a bag of patterns");
    ConfigOpts gen_cfg;
    add_config_flags(gen_cmd, gen_cfg);
    std::vector<std::string> gen_gens;
    std::uint64_t gen_n = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen_cmd->add_option("--gen", gen_gens, "Generator (js, ars, angie)")
        ->required();
    auto *gen_n_opt =
        gen_cmd->add_option("--n", gen_n, "Patterns to generate")->required();
    auto *gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "RNG seed");
    gen_cmd->add_option("--out", gen_out, "Output pattern file")->required();
    (void)gen_n_opt;

    // evaluate
    auto *eval_cmd =
        app.add_subcommand("evaluate", "Evaluate a pattern file");
    ConfigOpts eval_cfg;
    add_config_flags(eval_cmd, eval_cfg);
    std::string eval_in, eval_out;
    eval_cmd->add_option("--in", eval_in, "Pattern file")->required();
    eval_cmd->add_option("--out", eval_out,
                         "Report file (stdout when omitted)");

    // sweep
    auto *sweep_cmd =
        app.add_subcommand("sweep", "Run a variance sweep experiment");
    ConfigOpts sweep_cfg;
    add_config_flags(sweep_cmd, sweep_cfg);
    std::vector<std::string> sweep_gens;
    bool desk_scale = false;
    std::uint64_t sweep_n = 0;
    std::uint64_t sweep_seed = 0;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string sweep_out = "sweep_out";
    sweep_cmd->add_option("--gen", sweep_gens,
                          "Generators to sweep (default: all)");
    sweep_cmd->add_flag("--desk-scale", desk_scale,
                        "Small run: 9-point grid, 10^4 patterns per cell");
    auto *sweep_n_opt = sweep_cmd->add_option(
        "--n", sweep_n, "Exact patterns per cell (disables convergence)");
    auto *sweep_seed_opt =
        sweep_cmd->add_option("--seed", sweep_seed, "RNG seed");
    sweep_cmd->add_option("--threads", threads, "Worker thread cap");
    sweep_cmd->add_option("--out", sweep_out, "Output directory");

    // cases
    app.add_subcommand("cases",
                       "Print the built-in cases with derived parameters");

    // rom
    auto *rom_cmd = app.add_subcommand("rom", "ROM image tooling");
    rom_cmd->require_subcommand(1);
    auto *rom_enc = rom_cmd->add_subcommand(
        "encode", "Pattern file to binary image/archive");
    std::string enc_in, enc_out;
    rom_enc->add_option("--in", enc_in, "Pattern file")->required();
    rom_enc->add_option("--out", enc_out, "Image file")->required();

    auto *rom_dec = rom_cmd->add_subcommand(
        "decode", "Binary image/archive to pattern file");
    std::string dec_in, dec_out, dec_t_grid;
    rom_dec->add_option("--in", dec_in, "Image file")->required();
    rom_dec->add_option("--out", dec_out, "Pattern file")->required();
    auto *dec_t_grid_opt = rom_dec->add_option(
        "--t-grid", dec_t_grid,
        "Grid period for the decoded file (images do not store it)");

    auto *rom_sim =
        rom_cmd->add_subcommand("simulate", "Trigger timing of an image");
    std::string sim_in, sim_out;
    std::uint64_t clock_div = 8;
    rom_sim->add_option("--in", sim_in, "Image file")->required();
    rom_sim->add_option("--clock-div", clock_div,
                        "Input clocks per grid step");
    rom_sim->add_option("--out", sim_out,
                        "Trace file (stdout when omitted)");

    // bench
    auto *bench_cmd = app.add_subcommand(
        "bench", "Generation throughput versus requested frequency");
    std::vector<std::string> bench_gens;
    std::uint64_t bench_n = 10000;
    std::uint64_t bench_seed = 0;
    bench_cmd->add_option("--gen", bench_gens,
                          "Generators to time (default: all)");
    bench_cmd->add_option("--n", bench_n, "Patterns per measurement");
    auto *bench_seed_opt =
        bench_cmd->add_option("--seed", bench_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            // help and version requests land here
            return app.exit(e);
        }
        emit_error("usage", e.what());
        return 2;
    }

    ManifestInput base;
    base.command = capture_command(argc, argv);

    try {
        if (gen_cmd->parsed())
            return run_generate(base, gen_cfg, gen_gens, gen_n,
                                resolve_seed(gen_seed_opt, gen_seed),
                                gen_out);
        if (eval_cmd->parsed())
            return run_evaluate(base, eval_cfg, eval_in, eval_out);
        if (sweep_cmd->parsed())
            return run_sweep(base, sweep_cfg, sweep_gens, desk_scale,
                             sweep_n_opt, sweep_n,
                             resolve_seed(sweep_seed_opt, sweep_seed),
                             std::max(1u, threads), sweep_out);
        if (app.get_subcommand("cases")->parsed())
            return run_cases();
        if (rom_enc->parsed())
            return run_rom_encode(base, enc_in, enc_out);
        if (rom_dec->parsed())
            return run_rom_decode(base, dec_in, dec_out, dec_t_grid_opt,
                                  dec_t_grid);
        if (rom_sim->parsed())
            return run_rom_simulate(base, sim_in, clock_div, sim_out);
        if (bench_cmd->parsed())
            return run_bench(bench_gens, bench_n,
                             resolve_seed(bench_seed_opt, bench_seed));
        emit_error("usage", "no subcommand given");
        return 2;
    } catch (const pf::error &e) {
        emit_error(pf::errc_name(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception &e) {
        emit_error("internal", e.what());
        return 1;
    }
}
