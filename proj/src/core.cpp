#include "patternforge/core.hpp"

#include <cmath>
#include <string>

namespace patternforge {

namespace {

// Relative snap window for quotients of configured times. Binary doubles
// cannot represent most decimal durations exactly, so tau/t_grid for a
// nominally integer ratio lands a few ulp off an integer; taking floor/ceil
// of the raw quotient would then be off by one whole grid period.
constexpr double snap_rel = 1e-9;

double snap_to_integer(double x) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= snap_rel * std::max(1.0, std::abs(nearest)))
        return nearest;
    return x;
}

grid_index snapped_floor(double x) {
    return static_cast<grid_index>(std::floor(snap_to_integer(x)));
}

grid_index snapped_ceil(double x) {
    return static_cast<grid_index>(std::ceil(snap_to_integer(x)));
}

// Half-away-from-zero rounding, fixed across all modules.
grid_index round_half_away(double x) { return std::llround(x); }

DerivedParams derive_impl(const SamplingConfig &cfg, bool check_room) {
    cfg.validate();

    DerivedParams d;
    d.t_grid = cfg.t_grid;
    d.k_grid = snapped_floor(cfg.tau / cfg.t_grid);
    d.tau_hat = static_cast<double>(d.k_grid) * cfg.t_grid;
    d.k_req = round_half_away(d.tau_hat * cfg.f_req);
    if (d.k_req < 1)
        fail(errc::infeasible_count,
             "requested point count rounds to " + std::to_string(d.k_req) +
                 "; need at least 1 sampling point per pattern");
    d.f_hat = static_cast<double>(d.k_req) / d.tau_hat;
    d.t_hat = d.tau_hat / static_cast<double>(d.k_req);
    d.n_avg = round_half_away(d.t_hat / cfg.t_grid);

    d.k_min = cfg.t_min ? snapped_ceil(*cfg.t_min / cfg.t_grid) : 1;
    if (d.k_min < 1)
        d.k_min = 1;
    d.k_max = cfg.t_max ? snapped_floor(*cfg.t_max / cfg.t_grid)
                        : k_max_unbounded;

    if (d.k_min > d.k_max)
        fail(errc::infeasible_spacing,
             "minimum spacing " + std::to_string(d.k_min) +
                 " grid periods exceeds maximum spacing " +
                 std::to_string(d.k_max));
    if (check_room && d.k_grid - d.k_min * (d.k_req - 1) < 1)
        fail(errc::infeasible_room,
             "grid of " + std::to_string(d.k_grid) + " points cannot hold " +
                 std::to_string(d.k_req) + " points spaced at least " +
                 std::to_string(d.k_min) + " apart");
    return d;
}

} // namespace

void SamplingConfig::validate() const {
    if (!(tau > 0.0))
        fail(errc::invalid_config, "pattern time must be positive");
    if (!(t_grid > 0.0))
        fail(errc::invalid_config, "grid period must be positive");
    if (!(f_req > 0.0))
        fail(errc::invalid_config, "requested frequency must be positive");
    if (!(sigma2 >= 0.0))
        fail(errc::invalid_config, "variance must be non-negative");
    if (t_min && !(*t_min > 0.0))
        fail(errc::invalid_config, "minimum interval must be positive");
    if (t_max && !(*t_max > 0.0))
        fail(errc::invalid_config, "maximum interval must be positive");
    if (t_min && t_max && *t_min > *t_max)
        fail(errc::invalid_config,
             "minimum interval exceeds maximum interval");
    const double t_req = 1.0 / f_req;
    if (t_min && *t_min > t_req * (1.0 + 1e-12))
        fail(errc::invalid_config,
             "minimum interval exceeds the requested average period");
    if (t_max && *t_max < t_req * (1.0 - 1e-12))
        fail(errc::invalid_config,
             "maximum interval below the requested average period");
}

Pattern Pattern::from_indices(std::vector<grid_index> indices,
                              grid_index k_grid, double t_grid) {
    grid_index prev = 0;
    for (grid_index ix : indices) {
        if (ix < 1 || ix > k_grid)
            fail(errc::invalid_pattern,
                 "index " + std::to_string(ix) + " outside grid [1, " +
                     std::to_string(k_grid) + "]");
        if (ix <= prev)
            fail(errc::invalid_pattern,
                 "indices must increase strictly (" + std::to_string(prev) +
                     " then " + std::to_string(ix) + ")");
        prev = ix;
    }
    return Pattern(std::move(indices), k_grid, t_grid);
}

DerivedParams derive_params(const SamplingConfig &cfg) {
    return derive_impl(cfg, true);
}

DerivedParams derive_params_unchecked_room(const SamplingConfig &cfg) {
    return derive_impl(cfg, false);
}

PatternVerdict validate_pattern(const Pattern &p, const DerivedParams &d) {
    PatternVerdict v;
    v.gamma_f = static_cast<grid_index>(p.size()) != d.k_req;

    const auto ix = p.indices();
    if (ix.size() >= 2) {
        const auto intervals = static_cast<double>(ix.size() - 1);
        std::size_t under = 0;
        std::size_t over = 0;
        for (std::size_t i = 0; i + 1 < ix.size(); ++i) {
            const grid_index gap = ix[i + 1] - ix[i];
            if (gap < d.k_min)
                ++under;
            if (gap > d.k_max)
                ++over;
        }
        v.frac_under = static_cast<double>(under) / intervals;
        v.frac_over = static_cast<double>(over) / intervals;
    }
    v.gamma_min = v.frac_under > 0.0;
    v.gamma_max = v.frac_over > 0.0;
    v.gamma = v.gamma_f || v.gamma_min || v.gamma_max;
    return v;
}

std::string_view errc_name(errc c) {
    switch (c) {
    case errc::invalid_config: return "invalid_config";
    case errc::infeasible_count: return "infeasible_count";
    case errc::infeasible_spacing: return "infeasible_spacing";
    case errc::infeasible_room: return "infeasible_room";
    case errc::invalid_pattern: return "invalid_pattern";
    case errc::grid_mismatch: return "grid_mismatch";
    case errc::empty_accumulator: return "empty_accumulator";
    case errc::malformed_file: return "malformed_file";
    case errc::rom_bad_magic: return "rom_bad_magic";
    case errc::rom_bad_header: return "rom_bad_header";
    case errc::rom_truncated: return "rom_truncated";
    case errc::rom_non_monotonic: return "rom_non_monotonic";
    case errc::rom_out_of_range: return "rom_out_of_range";
    case errc::rom_unencodable: return "rom_unencodable";
    case errc::io_error: return "io_error";
    }
    return "unknown";
}

} // namespace patternforge
