#pragma once

#include "patternforge/core.hpp"
#include "patternforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace patternforge {

enum class GeneratorKind { js, ars, angie };

std::string_view generator_name(GeneratorKind k);
std::optional<GeneratorKind> parse_generator(std::string_view name);

namespace detail {

// Round half away from zero of a/b for a >= 0, b > 0, in pure integer
// arithmetic.
constexpr grid_index div_round_half_away(grid_index a, grid_index b) {
    return (2 * a + b) / (2 * b);
}

inline grid_index accept_in_grid(double candidate, grid_index k_grid,
                                 bool &ok) {
    ok = candidate >= 1.0 && candidate <= static_cast<double>(k_grid);
    return ok ? static_cast<grid_index>(candidate) : 0;
}

inline Pattern sorted_unique_pattern(std::vector<grid_index> points,
                                     const DerivedParams &d) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return Pattern::from_indices(std::move(points), d.k_grid, d.t_grid);
}

} // namespace detail

/// Jittered sampling: every point is the uniform position k * n_avg
/// perturbed by a scaled standard normal deviate. Draws landing outside
/// [1, k_grid] are dropped; the survivors are sorted and deduplicated, so
/// the result may have fewer than k_req points.
template <variate_source Rng>
Pattern generate_js(const DerivedParams &d, double sigma2, Rng &rng) {
    const double sigma = std::sqrt(sigma2);
    const double n_avg = static_cast<double>(d.n_avg);
    std::vector<grid_index> points;
    points.reserve(static_cast<std::size_t>(d.k_req));
    for (grid_index k = 1; k <= d.k_req; ++k) {
        const double x = rng.normal();
        const double candidate =
            std::round(static_cast<double>(k) * n_avg + sigma * x * n_avg);
        bool ok = false;
        const grid_index n = detail::accept_in_grid(candidate, d.k_grid, ok);
        if (ok)
            points.push_back(n);
    }
    return detail::sorted_unique_pattern(std::move(points), d);
}

/// Additive random sampling: every point is the previous accepted point
/// plus the average period plus a scaled standard normal deviate. A
/// rejected draw does not advance the predecessor. Sorted and deduplicated
/// like generate_js.
template <variate_source Rng>
Pattern generate_ars(const DerivedParams &d, double sigma2, Rng &rng) {
    const double sigma = std::sqrt(sigma2);
    const double n_avg = static_cast<double>(d.n_avg);
    std::vector<grid_index> points;
    points.reserve(static_cast<std::size_t>(d.k_req));
    grid_index prev = 0;
    for (grid_index k = 1; k <= d.k_req; ++k) {
        const double x = rng.normal();
        const double candidate = std::round(static_cast<double>(prev) +
                                            n_avg + sigma * x * n_avg);
        bool ok = false;
        const grid_index n = detail::accept_in_grid(candidate, d.k_grid, ok);
        if (ok) {
            points.push_back(n);
            prev = n;
        }
    }
    return detail::sorted_unique_pattern(std::move(points), d);
}

/// Observable state of the constrained generator between points.
struct AngieState {
    grid_index lim_lo = 1; // first admissible position of the current point
    grid_index lim_hi = 0; // last admissible position of the current point
    grid_index prev = 0;   // previously emitted index, 0 before the first
    grid_index k = 1;      // 1-based number of the point about to be drawn
    grid_index n_left = 0; // points still to generate, including this one
};

/// Step-by-step constrained generator. Maintains admissible position limits
/// so that every emitted pattern has exactly k_req points with all adjacent
/// spacings inside [k_min, k_max] — correct by construction, for any
/// variance.
///
/// Per point the only floating-point work is the normal draw, its scaling
/// by the distance budget, and one rounding; limits, expected positions and
/// budgets are integer arithmetic throughout.
class AngieStepper {
  public:
    AngieStepper(const DerivedParams &d, double sigma2)
        : d_(d), sigma_(std::sqrt(sigma2)) {
        if (d.k_grid - d.k_min * (d.k_req - 1) < 1)
            fail(errc::infeasible_room,
                 "grid cannot hold the requested points at minimum spacing");
        st_.lim_lo = 1;
        st_.lim_hi = d.k_grid - d.k_min * (d.k_req - 1);
        st_.prev = 0;
        st_.k = 1;
        st_.n_left = d.k_req;
    }

    [[nodiscard]] bool done() const noexcept { return st_.k > d_.k_req; }
    [[nodiscard]] const AngieState &state() const noexcept { return st_; }

    template <variate_source Rng> grid_index next(Rng &rng) {
        st_.n_left = d_.k_req - st_.k + 1;

        // Expected position: previous point plus the average step over the
        // room that is left.
        const grid_index step =
            detail::div_round_half_away(d_.k_grid - st_.prev, st_.n_left + 1);
        const grid_index expected = st_.prev + step;

        // Distance budget: the smaller of the distances from the expected
        // position to the two limits.
        const grid_index to_lo = std::abs(expected - st_.lim_lo);
        const grid_index to_hi = std::abs(st_.lim_hi - expected);
        const grid_index budget = std::min(to_lo, to_hi);

        double candidate;
        if (st_.k == 1) {
            candidate = std::ceil(rng.uniform() * static_cast<double>(step));
        } else {
            const double x = sigma_ * rng.normal();
            candidate = static_cast<double>(expected) +
                        std::round(x * static_cast<double>(budget));
        }

        grid_index point;
        if (candidate > static_cast<double>(st_.lim_hi))
            point = st_.lim_hi;
        else if (candidate < static_cast<double>(st_.lim_lo))
            point = st_.lim_lo;
        else
            point = static_cast<grid_index>(candidate);

        st_.prev = point;
        st_.lim_lo = point + d_.k_min;
        grid_index hi = d_.k_grid - d_.k_min * (st_.n_left - 2);
        if (d_.bounded_max())
            hi = std::min(hi, point + d_.k_max);
        st_.lim_hi = hi;
        ++st_.k;
        return point;
    }

  private:
    DerivedParams d_;
    double sigma_;
    AngieState st_;
};

/// Constrained generation: exactly k_req strictly increasing indices with
/// every adjacent spacing in [k_min, k_max]. Throws errc::infeasible_room
/// before drawing anything if the grid cannot hold the pattern.
template <variate_source Rng>
Pattern generate_angie(const DerivedParams &d, double sigma2, Rng &rng) {
    AngieStepper stepper(d, sigma2);
    std::vector<grid_index> points;
    points.reserve(static_cast<std::size_t>(d.k_req));
    while (!stepper.done())
        points.push_back(stepper.next(rng));
    return Pattern::from_indices(std::move(points), d.k_grid, d.t_grid);
}

template <variate_source Rng>
Pattern generate_one(GeneratorKind kind, const DerivedParams &d,
                     double sigma2, Rng &rng) {
    switch (kind) {
    case GeneratorKind::js:
        return generate_js(d, sigma2, rng);
    case GeneratorKind::ars:
        return generate_ars(d, sigma2, rng);
    case GeneratorKind::angie:
        return generate_angie(d, sigma2, rng);
    }
    fail(errc::invalid_config, "unknown generator kind");
}

/// One pattern from the stream owned by a bag ordinal. The bag produced
/// from (seed, ordinals 0..n-1) is therefore identical no matter how the
/// ordinals are scheduled across threads.
Pattern generate_at(GeneratorKind kind, const DerivedParams &d, double sigma2,
                    std::uint64_t seed, std::uint64_t ordinal);

/// Multiset of generated patterns with their verdicts.
struct PatternBag {
    SamplingConfig config;
    DerivedParams derived;
    GeneratorKind kind = GeneratorKind::angie;
    std::uint64_t seed = 0;
    std::vector<Pattern> patterns;
    std::vector<PatternVerdict> verdicts;
};

/// Generates a bag of n patterns. Derivation runs once; pattern ordinal i
/// draws from RandomSource(seed, i).
PatternBag generate_bag(GeneratorKind kind, const SamplingConfig &cfg,
                        std::uint64_t n, std::uint64_t seed);

} // namespace patternforge
