#pragma once

#include "patternforge/core.hpp"
#include "patternforge/evaluation.hpp"
#include "patternforge/generators.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace patternforge {

/// A sweep runs every generator over every variance value, generating
/// patterns per cell until the convergence monitor passes (but at least
/// n_min and at most n_cap patterns). Distinct-pattern counts consider only
/// the first eta_at patterns of a cell.
struct SweepSpec {
    SamplingConfig base;
    std::vector<double> sigma2_grid;
    std::vector<GeneratorKind> generators;
    std::uint64_t n_min = 100000;
    std::uint64_t n_cap = 1000000;
    std::uint64_t eta_at = 100000;

    void validate() const;
};

struct SweepCell {
    GeneratorKind generator = GeneratorKind::angie;
    double sigma2 = 0.0;
    bool feasible = true;
    std::string note; // infeasibility reason when !feasible
    BagReport report; // default-initialized when !feasible
    std::uint64_t n_used = 0;
    bool converged = false;
    bool capped = false;
};

struct SweepReport {
    SweepSpec spec;
    std::uint64_t seed = 0;
    DerivedParams derived;
    std::vector<SweepCell> cells;
};

/// Checkpoint cadence of the convergence monitor, in patterns.
inline constexpr std::uint64_t convergence_window = 20000;

/// Index of the first history entry that satisfies the convergence rule:
/// at least n_min patterns seen and every monitored metric within 1% of its
/// previous checkpoint value.
std::optional<std::size_t>
first_converged(std::span<const ConvergenceCheckpoint> history,
                std::uint64_t n_min, double rel_tol = 0.01);

/// Default variance grids covering [1e-4, 1e2]: the full grid has 13
/// half-decade points, the desk grid keeps 9 by dropping half-decades away
/// from 1e-2.
std::vector<double> sigma2_grid_full();
std::vector<double> sigma2_grid_desk();

struct NamedCase {
    std::string name;
    SamplingConfig config;
};

/// The four built-in parameter cases A-D.
std::vector<NamedCase> builtin_cases();

/// The frequency-sweep study base config: 1 ms pattern on a 1 us grid at
/// 100 kHz with a 5 us minimum spacing.
SamplingConfig experiment1_config();

/// Resolves "A".."D" or "exp1" to a config.
std::optional<SamplingConfig> named_config(std::string_view name);

/// Seed of an individual sweep cell, derived from the sweep seed so cells
/// do not share deviate streams.
std::uint64_t cell_seed(std::uint64_t sweep_seed, std::size_t gen_index,
                        std::size_t sigma_index);

SweepReport run_sweep(const SweepSpec &spec, std::uint64_t seed,
                      unsigned threads = 1);

/// One CSV row per cell, in (generator, sigma2) order; undefined density
/// errors are empty fields. Deterministic byte-for-byte for a given
/// (spec, seed).
void write_sweep_csv(std::ostream &out, const SweepReport &report);

/// JSON mirror with a provenance block (seed, mode, config echo, derived
/// parameters, tool version).
nlohmann::json sweep_to_json(const SweepReport &report);

/// Cell index with the smallest defined e_p_star for a generator, ties to
/// the smaller variance.
std::optional<std::size_t> best_cell_index(const SweepReport &report,
                                           GeneratorKind gen);

/// Plot-ready data: violation ratio, density errors and distinct-pattern
/// counts versus variance, plus the grid-occupancy histogram of each
/// generator's best cell (recomputed deterministically from the recorded
/// seed).
void write_plot_gamma(std::ostream &out, const SweepReport &report);
void write_plot_ep(std::ostream &out, const SweepReport &report);
void write_plot_eta(std::ostream &out, const SweepReport &report);
void write_plot_pdf(std::ostream &out, const SweepReport &report,
                    unsigned threads = 1);

/// Writes sweep.csv, sweep.json and the four plot_*.csv files into dir;
/// returns the paths written.
std::vector<std::filesystem::path>
write_report_files(const SweepReport &report,
                   const std::filesystem::path &dir, unsigned threads = 1);

} // namespace patternforge
