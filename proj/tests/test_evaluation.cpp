#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patternforge/evaluation.hpp"

#include "test_support.hpp"

#include <map>
#include <random>

using namespace patternforge;

namespace {

DerivedParams small_params(grid_index k_grid, grid_index k_req,
                           grid_index k_min = 1,
                           grid_index k_max = k_max_unbounded) {
    DerivedParams d;
    d.k_grid = k_grid;
    d.k_req = k_req;
    d.n_avg = std::max<grid_index>(1, k_grid / std::max<grid_index>(1, k_req));
    d.k_min = k_min;
    d.k_max = k_max;
    d.t_grid = 1.0;
    return d;
}

BagReport accumulate(const std::vector<Pattern> &patterns,
                     const DerivedParams &d,
                     std::uint64_t eta_limit = UINT64_MAX) {
    MetricAccumulator acc(d.k_grid, eta_limit);
    for (std::size_t i = 0; i < patterns.size(); ++i)
        acc.add(patterns[i], validate_pattern(patterns[i], d), d, i);
    return acc.finalize();
}

std::vector<Pattern> random_patterns(std::mt19937_64 &rng, grid_index k_grid,
                                     std::size_t n) {
    std::vector<Pattern> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<grid_index> ix;
        for (grid_index m = 1; m <= k_grid; ++m)
            if (std::bernoulli_distribution(0.3)(rng))
                ix.push_back(m);
        out.push_back(Pattern::from_indices(std::move(ix), k_grid, 1.0));
    }
    return out;
}

} // namespace

TEST_CASE("compensated sums survive pathological orderings") {
    KahanSum s;
    s.add(1.0);
    for (int i = 0; i < 10; ++i)
        s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-15).epsilon(1e-15));

    KahanSum big, parts1, parts2;
    for (int i = 0; i < 1000; ++i) {
        const double x = (i % 2) ? 1e10 : 1e-10;
        big.add(x);
        ((i < 500) ? parts1 : parts2).add(x);
    }
    parts1.merge(parts2);
    CHECK(parts1.value() == doctest::Approx(big.value()).epsilon(1e-14));
}

TEST_CASE("fingerprints separate distinct sequences") {
    std::mt19937_64 rng(31);
    std::map<std::pair<std::uint64_t, std::uint64_t>,
             std::vector<grid_index>>
        seen;
    for (int iter = 0; iter < 10000; ++iter) {
        std::vector<grid_index> seq;
        const int len = std::uniform_int_distribution(0, 12)(rng);
        grid_index v = 0;
        for (int j = 0; j < len; ++j) {
            v += std::uniform_int_distribution<grid_index>(1, 50)(rng);
            seq.push_back(v);
        }
        const auto f = fingerprint_of(seq);
        auto [it, fresh] = seen.try_emplace({f.hi, f.lo}, seq);
        if (!fresh)
            CHECK(it->second == seq); // equal prints must be equal sequences
    }
    // short sequences legitimately repeat; most of the stream is fresh
    CHECK(seen.size() > 8000);
}

TEST_CASE("fingerprints hear single-element and order changes") {
    const std::vector<grid_index> a{1, 2, 3}, b{1, 2, 4}, c{3, 2, 1}, e{};
    CHECK_FALSE(fingerprint_of(a) == fingerprint_of(b));
    CHECK_FALSE(fingerprint_of(a) == fingerprint_of(c));
    CHECK_FALSE(fingerprint_of(a) == fingerprint_of(e));
    CHECK(fingerprint_of(a) == fingerprint_of(std::vector<grid_index>{1, 2, 3}));
}

TEST_CASE("count error and count violation rate by hand") {
    const auto d = small_params(100, 50);
    std::vector<Pattern> patterns;
    std::vector<grid_index> ix45, ix55;
    for (grid_index m = 1; m <= 45; ++m)
        ix45.push_back(2 * m);
    for (grid_index m = 1; m <= 55; ++m)
        ix55.push_back(m);
    patterns.push_back(Pattern::from_indices(ix45, 100, 1.0));
    patterns.push_back(Pattern::from_indices(ix55, 100, 1.0));

    const auto r = accumulate(patterns, d);
    CHECK(r.n == 2);
    // relative errors +-0.1, squared and averaged
    CHECK(r.e_f == doctest::Approx(0.01));
    CHECK(r.gamma_f == doctest::Approx(1.0));
    CHECK(r.gamma == doctest::Approx(1.0));
    CHECK(r.eta == 2);
    CHECK(r.eta_star == 0);
    CHECK_FALSE(r.e_p_star.has_value());
    CHECK(r.e_p.has_value());
}

TEST_CASE("density error of a concentrated bag by hand") {
    // All mass on half the grid: p = {2,0,2,0} -> mean squared deviation 1.
    const auto d = small_params(4, 2);
    const auto p = Pattern::from_indices({1, 3}, 4, 1.0);
    const auto r = accumulate({p}, d);
    REQUIRE(r.e_p.has_value());
    CHECK(*r.e_p == doctest::Approx(1.0));
    REQUIRE(r.e_p_star.has_value());
    CHECK(*r.e_p_star == doctest::Approx(1.0));

    // A perfectly even bag instead has zero density error.
    const auto q1 = Pattern::from_indices({1, 3}, 4, 1.0);
    const auto q2 = Pattern::from_indices({2, 4}, 4, 1.0);
    const auto r2 = accumulate({q1, q2}, d);
    CHECK(*r2.e_p == doctest::Approx(0.0));
}

TEST_CASE("distinct patterns are counted, violating ones unstarred") {
    const auto d = small_params(10, 2, 2);
    const auto a = Pattern::from_indices({2, 6}, 10, 1.0);
    const auto b = Pattern::from_indices({3, 4}, 10, 1.0); // gap 1 < 2
    const auto r = accumulate({a, a, b}, d);
    CHECK(r.n == 3);
    CHECK(r.eta == 2);
    CHECK(r.eta_star == 1);
    CHECK(r.gamma == doctest::Approx(1.0 / 3));
}

TEST_CASE("an all-correct bag has matching plain and starred metrics") {
    const auto d = small_params(10, 2, 1);
    const auto a = Pattern::from_indices({2, 6}, 10, 1.0);
    const auto b = Pattern::from_indices({3, 9}, 10, 1.0);
    const auto r = accumulate({a, b, a}, d);
    CHECK(r.gamma == 0.0);
    CHECK(r.eta == r.eta_star);
    REQUIRE(r.e_p.has_value());
    REQUIRE(r.e_p_star.has_value());
    CHECK(*r.e_p == doctest::Approx(*r.e_p_star));
}

TEST_CASE("accumulator agrees with the direct reference on random bags") {
    std::mt19937_64 rng(20260819);
    for (int iter = 0; iter < 100; ++iter) {
        const grid_index k_grid =
            std::uniform_int_distribution<grid_index>(2, 16)(rng);
        const grid_index k_req =
            std::uniform_int_distribution<grid_index>(1, 8)(rng);
        const grid_index k_min =
            std::uniform_int_distribution<grid_index>(1, 3)(rng);
        const bool bounded = std::bernoulli_distribution(0.5)(rng);
        const auto d = small_params(
            k_grid, k_req, k_min,
            bounded ? k_min + std::uniform_int_distribution<grid_index>(
                                  0, 5)(rng)
                    : k_max_unbounded);
        const std::size_t n =
            std::uniform_int_distribution<std::size_t>(1, 100)(rng);
        const auto patterns = random_patterns(rng, k_grid, n);

        const auto got = accumulate(patterns, d);
        const auto want = testsupport::naive_report(patterns, d);

        CHECK(got.n == want.n);
        CHECK(testsupport::close_rel(got.e_f, want.e_f));
        CHECK(testsupport::close_rel(got.gamma_f, want.gamma_f));
        CHECK(testsupport::close_rel(got.e_min, want.e_min));
        CHECK(testsupport::close_rel(got.e_max, want.e_max));
        CHECK(testsupport::close_rel(got.gamma_min, want.gamma_min));
        CHECK(testsupport::close_rel(got.gamma_max, want.gamma_max));
        CHECK(testsupport::close_rel(got.gamma, want.gamma));
        REQUIRE(got.e_p.has_value() == want.e_p.has_value());
        if (want.e_p)
            CHECK(testsupport::close_rel(*got.e_p, *want.e_p));
        REQUIRE(got.e_p_star.has_value() == want.e_p_star.has_value());
        if (want.e_p_star)
            CHECK(testsupport::close_rel(*got.e_p_star, *want.e_p_star));
        CHECK(got.eta == want.eta);
        CHECK(got.eta_star == want.eta_star);
    }
}

TEST_CASE("merged chunk accumulators equal one single pass") {
    std::mt19937_64 rng(7);
    const auto d = small_params(12, 4, 2, 6);
    const auto patterns = random_patterns(rng, 12, 97);

    MetricAccumulator whole(d.k_grid);
    std::vector<MetricAccumulator> chunks;
    for (int c = 0; c < 4; ++c)
        chunks.emplace_back(d.k_grid);
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const auto v = validate_pattern(patterns[i], d);
        whole.add(patterns[i], v, d, i);
        chunks[i / 25].add(patterns[i], v, d, i);
    }
    for (std::size_t c = 1; c < chunks.size(); ++c)
        chunks[0].merge(chunks[c]);

    const auto a = whole.finalize();
    const auto b = chunks[0].finalize();
    CHECK(a.n == b.n);
    CHECK(a.eta == b.eta);
    CHECK(a.eta_star == b.eta_star);
    CHECK(a.gamma == b.gamma); // counts divide exactly
    CHECK(testsupport::close_rel(a.e_f, b.e_f));
    CHECK(testsupport::close_rel(a.e_min, b.e_min));
    CHECK(testsupport::close_rel(a.e_max, b.e_max));
    if (a.e_p)
        CHECK(testsupport::close_rel(*a.e_p, *b.e_p));
}

TEST_CASE("merging accumulators over different grids is refused") {
    MetricAccumulator a(10), b(11);
    CHECK_THROWS_AS(a.merge(b), error);
}

TEST_CASE("finalizing an empty accumulator is an error") {
    MetricAccumulator acc(10);
    CHECK_THROWS_AS(static_cast<void>(acc.finalize()), error);
}

TEST_CASE("normalised occupancy sums to the grid size") {
    std::mt19937_64 rng(41);
    const auto d = small_params(20, 5);
    const auto patterns = random_patterns(rng, 20, 50);
    MetricAccumulator acc(d.k_grid);
    for (std::size_t i = 0; i < patterns.size(); ++i)
        acc.add(patterns[i], validate_pattern(patterns[i], d), d, i);
    const auto dens = acc.density(false);
    REQUIRE(dens.size() == 20);
    double sum = 0;
    for (double v : dens)
        sum += v;
    CHECK(sum == doctest::Approx(20.0));
}

TEST_CASE("distinct counting can be limited to a leading window") {
    const auto d = small_params(10, 2);
    const auto a = Pattern::from_indices({1, 5}, 10, 1.0);
    const auto b = Pattern::from_indices({2, 6}, 10, 1.0);
    const auto c = Pattern::from_indices({3, 7}, 10, 1.0);

    MetricAccumulator acc(d.k_grid, 2);
    CHECK(acc.eta_limit() == 2);
    std::uint64_t ordinal = 0;
    for (const auto *p : {&a, &b, &c})
        acc.add(*p, validate_pattern(*p, d), d, ordinal++);
    const auto r = acc.finalize();
    CHECK(r.n == 3);
    CHECK(r.eta == 2); // the third pattern fell outside the window
    // everything else still counts all three
    REQUIRE(r.e_p.has_value());
    CHECK(r.gamma_f == doctest::Approx(0.0));
}

TEST_CASE("report JSON uses stable field names and null for no-density") {
    const auto d = small_params(10, 2);
    const auto r = accumulate({Pattern::from_indices({2, 6}, 10, 1.0)}, d);
    const auto j = to_json(r);
    for (const char *key :
         {"n", "e_f", "gamma_f", "e_min", "e_max", "gamma_min", "gamma_max",
          "gamma", "e_p", "e_p_star", "eta", "eta_star"})
        CHECK(j.contains(key));
    CHECK(j["n"] == 1);
    CHECK(j["eta"] == 1);
    CHECK_FALSE(j["e_p"].is_null());

    // a bag of empty patterns has no points at all
    const auto none = Pattern::from_indices({}, 10, 1.0);
    const auto empty = accumulate({none, none}, d);
    const auto j2 = to_json(empty);
    CHECK(j2["e_p"].is_null());
    CHECK(j2["e_p_star"].is_null());
    CHECK(j2["gamma_f"] == doctest::Approx(1.0));
}

TEST_CASE("evaluate_bag matches a manual accumulator pass") {
    const SamplingConfig cfg{1.0, 1e-3, 50.0, 0.01, 0.03, 1e-2};
    const auto bag = generate_bag(GeneratorKind::angie, cfg, 200, 11);
    const auto r = evaluate_bag(bag);
    const auto manual = accumulate(bag.patterns, bag.derived);
    CHECK(r.n == manual.n);
    CHECK(r.e_f == manual.e_f);
    CHECK(r.gamma == manual.gamma);
    CHECK(r.eta == manual.eta);
    REQUIRE(r.e_p.has_value());
    CHECK(*r.e_p == *manual.e_p);
    CHECK(r.gamma == 0.0); // constrained generation violates nothing
}

TEST_CASE("checkpoint comparison implements the relative-freeze rule") {
    ConvergenceCheckpoint prev{20000, 0.10, 0.01, 0.0, 0.0, 0.50};
    ConvergenceCheckpoint cur{40000, 0.1005, 0.01001, 0.0, 0.0, 0.502};
    CHECK(checkpoints_converged(prev, cur));

    SUBCASE("a 5 percent move breaks it") {
        cur.e_f = 0.105;
        CHECK_FALSE(checkpoints_converged(prev, cur));
    }
    SUBCASE("a metric sitting at zero must not have moved") {
        cur.gamma = 0.0;
        prev.gamma = 1e-9;
        CHECK_FALSE(checkpoints_converged(prev, cur));
    }
    SUBCASE("both at zero is frozen") {
        prev.gamma = 0.0;
        cur.gamma = 0.0;
        CHECK(checkpoints_converged(prev, cur));
    }
    SUBCASE("exact equality is frozen") {
        CHECK(checkpoints_converged(prev, prev));
    }
}

TEST_CASE("checkpoint_of maps a report onto the monitored metrics") {
    BagReport r;
    r.n = 123;
    r.e_f = 0.5;
    r.e_min = 0.25;
    r.e_max = 0.125;
    r.gamma = 0.75;
    r.e_p = 2.0;
    const auto c = checkpoint_of(r);
    CHECK(c.n == 123);
    CHECK(c.e_f == 0.5);
    CHECK(c.e_min == 0.25);
    CHECK(c.e_max == 0.125);
    CHECK(c.gamma == 0.75);
    CHECK(c.e_p == 2.0);

    r.e_p.reset(); // undefined density reads as zero for monitoring
    CHECK(checkpoint_of(r).e_p == 0.0);
}
