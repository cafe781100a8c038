#pragma once

#include "patternforge/errors.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace patternforge {

using grid_index = std::int64_t;

/// Sentinel for "no maximum spacing": compares larger than any real index
/// difference.
inline constexpr grid_index k_max_unbounded =
    std::numeric_limits<grid_index>::max();

/// Problem statement for one family of sampling patterns: pattern duration,
/// grid period, requested average sampling frequency, optional spacing
/// bounds, and the generator variance knob. All times in seconds, the
/// frequency in hertz.
struct SamplingConfig {
    double tau = 0.0;
    double t_grid = 0.0;
    double f_req = 0.0;
    std::optional<double> t_min;
    std::optional<double> t_max;
    double sigma2 = 0.0;

    /// Throws errc::invalid_config naming the violated constraint.
    void validate() const;
};

/// Quantities realizable on the grid, derived once per configuration and
/// shared by every generator and validator.
struct DerivedParams {
    grid_index k_grid = 0;  // number of grid points
    double tau_hat = 0.0;   // realizable pattern time, k_grid * t_grid
    grid_index k_req = 0;   // realizable requested sampling-point count
    double f_hat = 0.0;     // realizable requested frequency, k_req / tau_hat
    double t_hat = 0.0;     // realizable requested period, 1 / f_hat
    grid_index n_avg = 0;   // requested period in grid periods
    grid_index k_min = 1;   // minimum spacing in grid periods
    grid_index k_max = k_max_unbounded; // maximum spacing in grid periods
    double t_grid = 0.0;    // grid period carried along for convenience

    [[nodiscard]] bool bounded_max() const noexcept {
        return k_max != k_max_unbounded;
    }
};

/// One sampling pattern as strictly increasing 1-based grid indices.
/// The class invariant (strict increase, indices within [1, k_grid]) is
/// checked at construction; there is no way to hold a violating value.
class Pattern {
  public:
    Pattern() = default;

    /// Throws errc::invalid_pattern if the sequence is not strictly
    /// increasing or any index falls outside [1, k_grid].
    static Pattern from_indices(std::vector<grid_index> indices,
                                grid_index k_grid, double t_grid);

    [[nodiscard]] std::span<const grid_index> indices() const noexcept {
        return indices_;
    }
    [[nodiscard]] grid_index k_grid() const noexcept { return k_grid_; }
    [[nodiscard]] double t_grid() const noexcept { return t_grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
    [[nodiscard]] bool empty() const noexcept { return indices_.empty(); }

    /// Sampling instant of the i-th point in seconds.
    [[nodiscard]] double instant(std::size_t i) const {
        return static_cast<double>(indices_[i]) * t_grid_;
    }

    bool operator==(const Pattern &other) const = default;

  private:
    Pattern(std::vector<grid_index> indices, grid_index k_grid, double t_grid)
        : indices_(std::move(indices)), k_grid_(k_grid), t_grid_(t_grid) {}

    std::vector<grid_index> indices_;
    grid_index k_grid_ = 0;
    double t_grid_ = 0.0;
};

/// Per-pattern requirement check result. frac_under/frac_over are the
/// ratios of adjacent intervals violating the minimum/maximum spacing to
/// all intervals; patterns with fewer than two points have no intervals and
/// report 0.
struct PatternVerdict {
    bool gamma_f = false;   // point count differs from the requested count
    bool gamma_min = false; // some interval below the minimum spacing
    bool gamma_max = false; // some interval above the maximum spacing
    bool gamma = false;     // disjunction of the three flags
    double frac_under = 0.0;
    double frac_over = 0.0;
};

/// Computes grid counts, realizable frequency/period, and spacing bounds for
/// a configuration. Rounding is half-away-from-zero everywhere; quotients of
/// configured times snap to the nearest integer when within 1e-9 relative
/// distance before floor/ceil, so unit-converted inputs land on the grid
/// they name. Throws errc::infeasible_* when no pattern with the requested
/// point count can satisfy the spacing bounds.
DerivedParams derive_params(const SamplingConfig &cfg);

/// As derive_params, but callers that only need count/frequency realizables
/// (generators without spacing guarantees) can skip the room check.
DerivedParams derive_params_unchecked_room(const SamplingConfig &cfg);

/// Checks one pattern against the derived requirements. Always yields a
/// verdict; never throws for well-formed patterns.
PatternVerdict validate_pattern(const Pattern &p, const DerivedParams &d);

/// Samples a time-function at every pattern instant, in pattern order.
template <typename F>
std::vector<double> apply_pattern(const Pattern &p, F &&signal) {
    std::vector<double> out;
    out.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        out.push_back(signal(p.instant(i)));
    return out;
}

} // namespace patternforge
