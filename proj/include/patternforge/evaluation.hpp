#pragma once

#include "patternforge/core.hpp"
#include "patternforge/generators.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

namespace patternforge {

/// Compensated (Neumaier) running sum; merging adds the other sum's value
/// as one term.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    void merge(const KahanSum &other) { add(other.value()); }
    [[nodiscard]] double value() const { return sum + comp; }
};

/// 128-bit pattern fingerprint used to count distinct patterns without
/// storing them.
struct Fingerprint {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    bool operator==(const Fingerprint &) const = default;
};

struct FingerprintHash {
    std::size_t operator()(const Fingerprint &f) const noexcept {
        return static_cast<std::size_t>(f.hi ^ f.lo);
    }
};

Fingerprint fingerprint_of(std::span<const grid_index> indices);

/// Aggregate quality metrics of a pattern bag. Starred variants restrict to
/// patterns that violate nothing. Density errors are absent when no points
/// exist to build a density from.
struct BagReport {
    std::uint64_t n = 0;
    double e_f = 0.0;
    double gamma_f = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double gamma = 0.0;
    std::optional<double> e_p;
    std::optional<double> e_p_star;
    std::uint64_t eta = 0;
    std::uint64_t eta_star = 0;
};

nlohmann::json to_json(const BagReport &r);

/// Streaming accumulator for the bag metrics. Mergeable: two accumulators
/// over disjoint ordinal ranges combine into the accumulator of the union,
/// so chunks of a bag can be processed independently and merged in a fixed
/// order for reproducible totals.
///
/// Distinct-pattern counting is windowed: fingerprints are recorded only
/// for ordinals below eta_limit, which bounds memory on long runs while
/// keeping eta comparable across runs of different lengths.
class MetricAccumulator {
  public:
    explicit MetricAccumulator(grid_index k_grid,
                               std::uint64_t eta_limit = UINT64_MAX);

    void add(const Pattern &p, const PatternVerdict &v,
             const DerivedParams &d, std::uint64_t ordinal);
    void merge(const MetricAccumulator &other);
    [[nodiscard]] BagReport finalize() const;

    /// Normalised grid occupancy p(m) = k_grid * hits[m] / total points,
    /// the quantity whose squared distance from 1 the density error
    /// measures. Empty when no points were accumulated.
    [[nodiscard]] std::vector<double> density(bool starred) const;

    [[nodiscard]] std::uint64_t count() const noexcept { return n_; }
    [[nodiscard]] grid_index k_grid() const noexcept { return k_grid_; }
    [[nodiscard]] std::uint64_t eta_limit() const noexcept {
        return eta_limit_;
    }

  private:
    grid_index k_grid_;
    std::uint64_t eta_limit_;
    std::uint64_t n_ = 0;

    KahanSum sum_ef_;
    KahanSum sum_emin_;
    KahanSum sum_emax_;
    std::uint64_t viol_count_ = 0;
    std::uint64_t viol_min_ = 0;
    std::uint64_t viol_max_ = 0;
    std::uint64_t viol_any_ = 0;

    std::vector<std::uint64_t> hits_;
    std::vector<std::uint64_t> hits_star_;
    std::uint64_t points_ = 0;
    std::uint64_t points_star_ = 0;

    std::unordered_set<Fingerprint, FingerprintHash> uniq_;
    std::unordered_set<Fingerprint, FingerprintHash> uniq_star_;
};

/// Evaluates a whole bag in one go (ordinals 0..n-1).
BagReport evaluate_bag(const PatternBag &bag,
                       std::uint64_t eta_limit = UINT64_MAX);

/// Snapshot of the monitored metrics at some pattern count.
struct ConvergenceCheckpoint {
    std::uint64_t n = 0;
    double e_f = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;
    double gamma = 0.0;
    double e_p = 0.0;
};

ConvergenceCheckpoint checkpoint_of(const BagReport &r);

/// True when every monitored metric moved by at most rel_tol of its current
/// magnitude since the previous checkpoint. A metric currently at exactly
/// zero must not have moved at all.
bool checkpoints_converged(const ConvergenceCheckpoint &prev,
                           const ConvergenceCheckpoint &cur,
                           double rel_tol = 0.01);

} // namespace patternforge
