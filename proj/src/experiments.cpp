#include "patternforge/experiments.hpp"

#include "patternforge/config_json.hpp"
#include "patternforge/units.hpp"
#include "patternforge/version.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace patternforge {

void SweepSpec::validate() const {
    if (sigma2_grid.empty())
        fail(errc::invalid_config, "variance grid is empty");
    for (std::size_t i = 0; i < sigma2_grid.size(); ++i) {
        const double s = sigma2_grid[i];
        if (!(s >= 0.0))
            fail(errc::invalid_config, "variance must be non-negative");
        if (s == 0.0 && i != 0)
            fail(errc::invalid_config,
                 "zero variance is allowed only as the leading grid point");
        if (i > 0 && !(s > sigma2_grid[i - 1]))
            fail(errc::invalid_config,
                 "variance grid must be strictly increasing");
    }
    if (generators.empty())
        fail(errc::invalid_config, "no generators selected");
    if (n_min < 1)
        fail(errc::invalid_config, "n_min must be at least 1");
    if (n_cap < n_min)
        fail(errc::invalid_config, "pattern cap below n_min");
}

std::optional<std::size_t>
first_converged(std::span<const ConvergenceCheckpoint> history,
                std::uint64_t n_min, double rel_tol) {
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i].n >= n_min &&
            checkpoints_converged(history[i - 1], history[i], rel_tol))
            return i;
    return std::nullopt;
}

std::vector<double> sigma2_grid_full() {
    const double h = std::sqrt(10.0);
    return {1e-4, 1e-4 * h, 1e-3, 1e-3 * h, 1e-2, 1e-2 * h, 1e-1,
            1e-1 * h, 1.0,      h,    10.0,     10.0 * h, 100.0};
}

std::vector<double> sigma2_grid_desk() {
    const double h = std::sqrt(10.0);
    return {1e-4, 1e-3, 1e-3 * h, 1e-2, 1e-2 * h, 1e-1, 1.0, 10.0, 100.0};
}

std::vector<NamedCase> builtin_cases() {
    std::vector<NamedCase> cases;
    cases.push_back({"A", {1.0, 1e-3, 50.0, 0.01, 0.03, 0.0}});
    cases.push_back({"B", {1e-4, 1e-6, 5e4, 1.5e-5, 2.8e-5, 0.0}});
    cases.push_back({"C", {1.0, 1e-6, 1e4, std::nullopt, std::nullopt, 0.0}});
    cases.push_back({"D", {5e-6, 2.5e-10, 1e8, std::nullopt, 1.4e-8, 0.0}});
    return cases;
}

SamplingConfig experiment1_config() {
    return {1e-3, 1e-6, 1e5, 5e-6, std::nullopt, 0.0};
}

std::optional<SamplingConfig> named_config(std::string_view name) {
    if (name == "exp1" || name == "EXP1")
        return experiment1_config();
    if (name.size() == 1) {
        const char c =
            static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        for (const auto &nc : builtin_cases())
            if (nc.name.size() == 1 && nc.name[0] == c)
                return nc.config;
    }
    return std::nullopt;
}

std::uint64_t cell_seed(std::uint64_t sweep_seed, std::size_t gen_index,
                        std::size_t sigma_index) {
    const std::uint64_t tag = (static_cast<std::uint64_t>(gen_index) << 32) |
                              static_cast<std::uint64_t>(sigma_index);
    return detail::mix64(sweep_seed ^ detail::mix64(tag + 0x517CC1B727220A95ULL));
}

namespace {

constexpr std::uint64_t chunk_size = 4096;

void process_range(MetricAccumulator &acc, GeneratorKind gen,
                   const DerivedParams &d, double sigma2, std::uint64_t seed,
                   std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
        const Pattern p = generate_at(gen, d, sigma2, seed, i);
        acc.add(p, validate_pattern(p, d), d, i);
    }
}

// Ordinals [begin, end) are split into fixed-size chunks, each accumulated
// independently, then merged in chunk order. The chunk boundaries and merge
// order never depend on the thread count, so results are identical whether
// the chunks ran on one thread or many.
void process_batch(MetricAccumulator &master, GeneratorKind gen,
                   const DerivedParams &d, double sigma2, std::uint64_t seed,
                   std::uint64_t begin, std::uint64_t end, unsigned threads) {
    const std::uint64_t total = end - begin;
    const std::size_t ranks =
        static_cast<std::size_t>((total + chunk_size - 1) / chunk_size);
    std::vector<std::optional<MetricAccumulator>> slots(ranks);

    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&](std::size_t rank) {
        try {
            const std::uint64_t b = begin + rank * chunk_size;
            const std::uint64_t e = std::min(end, b + chunk_size);
            MetricAccumulator acc(master.k_grid(), master.eta_limit());
            process_range(acc, gen, d, sigma2, seed, b, e);
            slots[rank].emplace(std::move(acc));
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    };

    if (threads <= 1 || ranks <= 1) {
        for (std::size_t r = 0; r < ranks; ++r)
            work(r);
    } else {
        std::atomic<std::size_t> next{0};
        const unsigned workers =
            static_cast<unsigned>(std::min<std::size_t>(threads, ranks));
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t r = next.fetch_add(1);
                    if (r >= ranks)
                        return;
                    work(r);
                }
            });
        for (auto &t : pool)
            t.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);
    for (std::size_t r = 0; r < ranks; ++r)
        master.merge(*slots[r]);
}

SweepCell run_cell(const SweepSpec &spec, const DerivedParams &d,
                   GeneratorKind gen, double sigma2, std::uint64_t seed,
                   unsigned threads) {
    SweepCell cell;
    cell.generator = gen;
    cell.sigma2 = sigma2;

    MetricAccumulator acc(d.k_grid, spec.eta_at);
    std::vector<ConvergenceCheckpoint> history;
    std::uint64_t n = 0;
    while (true) {
        const std::uint64_t batch =
            std::min<std::uint64_t>(convergence_window, spec.n_cap - n);
        if (batch == 0) {
            cell.capped = true;
            break;
        }
        process_batch(acc, gen, d, sigma2, seed, n, n + batch, threads);
        n += batch;
        history.push_back(checkpoint_of(acc.finalize()));
        if (first_converged(history, spec.n_min)) {
            cell.converged = true;
            break;
        }
    }
    cell.report = acc.finalize();
    cell.n_used = n;
    return cell;
}

} // namespace

SweepReport run_sweep(const SweepSpec &spec, std::uint64_t seed,
                      unsigned threads) {
    spec.validate();
    SweepReport report;
    report.spec = spec;
    report.seed = seed;
    report.derived = derive_params_unchecked_room(spec.base);
    const bool angie_ok =
        report.derived.k_grid -
            report.derived.k_min * (report.derived.k_req - 1) >=
        1;

    for (std::size_t gi = 0; gi < spec.generators.size(); ++gi) {
        const GeneratorKind gen = spec.generators[gi];
        for (std::size_t si = 0; si < spec.sigma2_grid.size(); ++si) {
            const double sigma2 = spec.sigma2_grid[si];
            if (gen == GeneratorKind::angie && !angie_ok) {
                SweepCell cell;
                cell.generator = gen;
                cell.sigma2 = sigma2;
                cell.feasible = false;
                cell.note =
                    "grid cannot hold the requested points at minimum spacing";
                report.cells.push_back(std::move(cell));
                continue;
            }
            report.cells.push_back(run_cell(spec, report.derived, gen, sigma2,
                                            cell_seed(seed, gi, si),
                                            threads));
        }
    }
    return report;
}

namespace {

void csv_optional(std::ostream &out, const std::optional<double> &v) {
    if (v)
        out << format_double(*v);
}

const char *csv_bool(bool v) { return v ? "true" : "false"; }

} // namespace

void write_sweep_csv(std::ostream &out, const SweepReport &report) {
    out << "generator,sigma2,n,e_f,gamma_f,e_min,e_max,gamma_min,gamma_max,"
           "gamma,e_p,e_p_star,eta,eta_star,converged,capped,feasible\n";
    for (const auto &cell : report.cells) {
        out << generator_name(cell.generator) << ','
            << format_double(cell.sigma2) << ',';
        if (!cell.feasible) {
            out << "0,,,,,,,,,,,,false,false,false\n";
            continue;
        }
        const auto &r = cell.report;
        out << r.n << ',' << format_double(r.e_f) << ','
            << format_double(r.gamma_f) << ',' << format_double(r.e_min)
            << ',' << format_double(r.e_max) << ','
            << format_double(r.gamma_min) << ','
            << format_double(r.gamma_max) << ',' << format_double(r.gamma)
            << ',';
        csv_optional(out, r.e_p);
        out << ',';
        csv_optional(out, r.e_p_star);
        out << ',' << r.eta << ',' << r.eta_star << ','
            << csv_bool(cell.converged) << ',' << csv_bool(cell.capped)
            << ',' << "true" << '\n';
    }
}

nlohmann::json sweep_to_json(const SweepReport &report) {
    nlohmann::json generators = nlohmann::json::array();
    for (const auto gen : report.spec.generators)
        generators.push_back(std::string(generator_name(gen)));

    nlohmann::json j;
    j["provenance"] = {
        {"tool", "patternforge"},
        {"version", std::string(version)},
        {"seed", report.seed},
        {"mode", report.spec.n_min >= 100000 ? "full" : "desk"},
        {"n_min", report.spec.n_min},
        {"n_cap", report.spec.n_cap},
        {"eta_at", report.spec.eta_at},
        {"base", config_to_json(report.spec.base)},
        {"sigma2_grid", report.spec.sigma2_grid},
        {"generators", generators},
        {"derived", derived_to_json(report.derived)},
    };
    nlohmann::json cells = nlohmann::json::array();
    for (const auto &cell : report.cells) {
        nlohmann::json c;
        c["generator"] = std::string(generator_name(cell.generator));
        c["sigma2"] = cell.sigma2;
        c["feasible"] = cell.feasible;
        c["note"] = cell.note;
        c["n_used"] = cell.n_used;
        c["converged"] = cell.converged;
        c["capped"] = cell.capped;
        c["report"] = cell.feasible ? to_json(cell.report)
                                    : nlohmann::json(nullptr);
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
}

std::optional<std::size_t> best_cell_index(const SweepReport &report,
                                           GeneratorKind gen) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        const auto &cell = report.cells[i];
        if (cell.generator != gen || !cell.feasible || !cell.report.e_p_star)
            continue;
        if (!best ||
            *cell.report.e_p_star < *report.cells[*best].report.e_p_star)
            best = i;
    }
    return best;
}

void write_plot_gamma(std::ostream &out, const SweepReport &report) {
    out << "generator,sigma2,gamma\n";
    for (const auto &cell : report.cells) {
        if (!cell.feasible)
            continue;
        out << generator_name(cell.generator) << ','
            << format_double(cell.sigma2) << ','
            << format_double(cell.report.gamma) << '\n';
    }
}

void write_plot_ep(std::ostream &out, const SweepReport &report) {
    out << "generator,sigma2,e_p,e_p_star\n";
    for (const auto &cell : report.cells) {
        if (!cell.feasible)
            continue;
        out << generator_name(cell.generator) << ','
            << format_double(cell.sigma2) << ',';
        csv_optional(out, cell.report.e_p);
        out << ',';
        csv_optional(out, cell.report.e_p_star);
        out << '\n';
    }
}

void write_plot_eta(std::ostream &out, const SweepReport &report) {
    out << "generator,sigma2,eta,eta_star\n";
    for (const auto &cell : report.cells) {
        if (!cell.feasible)
            continue;
        out << generator_name(cell.generator) << ','
            << format_double(cell.sigma2) << ',' << cell.report.eta << ','
            << cell.report.eta_star << '\n';
    }
}

void write_plot_pdf(std::ostream &out, const SweepReport &report,
                    unsigned threads) {
    out << "generator,sigma2,m,p_g,p_g_star\n";
    const std::size_t n_sigma = report.spec.sigma2_grid.size();
    for (std::size_t gi = 0; gi < report.spec.generators.size(); ++gi) {
        const GeneratorKind gen = report.spec.generators[gi];
        const auto best = best_cell_index(report, gen);
        if (!best)
            continue;
        const auto &cell = report.cells[*best];
        const std::size_t si = *best % n_sigma;

        MetricAccumulator acc(report.derived.k_grid, 0);
        process_batch(acc, gen, report.derived, cell.sigma2,
                      cell_seed(report.seed, gi, si), 0, cell.n_used,
                      threads);
        const auto density_all = acc.density(false);
        const auto density_star = acc.density(true);
        for (std::size_t m = 0; m < density_all.size(); ++m) {
            out << generator_name(gen) << ',' << format_double(cell.sigma2)
                << ',' << (m + 1) << ',' << format_double(density_all[m])
                << ',';
            if (!density_star.empty())
                out << format_double(density_star[m]);
            out << '\n';
        }
    }
}

std::vector<std::filesystem::path>
write_report_files(const SweepReport &report,
                   const std::filesystem::path &dir, unsigned threads) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const char *name) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            fail(errc::io_error, "cannot open " + path.string() +
                                     " for writing");
        written.push_back(path);
        return out;
    };
    {
        auto out = open("sweep.csv");
        write_sweep_csv(out, report);
    }
    {
        auto out = open("sweep.json");
        out << sweep_to_json(report).dump(2) << '\n';
    }
    {
        auto out = open("plot_gamma.csv");
        write_plot_gamma(out, report);
    }
    {
        auto out = open("plot_ep.csv");
        write_plot_ep(out, report);
    }
    {
        auto out = open("plot_eta.csv");
        write_plot_eta(out, report);
    }
    {
        auto out = open("plot_pdf.csv");
        write_plot_pdf(out, report, threads);
    }
    return written;
}

} // namespace patternforge
