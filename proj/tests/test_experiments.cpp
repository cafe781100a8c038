#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patternforge/experiments.hpp"

#include "test_support.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace patternforge;

namespace {

SweepSpec tiny_spec(std::vector<double> sigmas,
                    std::vector<GeneratorKind> gens, std::uint64_t n) {
    SweepSpec spec;
    spec.base = experiment1_config();
    spec.sigma2_grid = std::move(sigmas);
    spec.generators = std::move(gens);
    spec.n_min = n;
    spec.n_cap = n;
    spec.eta_at = n;
    return spec;
}

} // namespace

TEST_CASE("built-in cases carry the documented parameters") {
    const auto cases = builtin_cases();
    REQUIRE(cases.size() == 4);

    CHECK(cases[0].name == "A");
    CHECK(cases[0].config.tau == 1.0);
    CHECK(cases[0].config.t_grid == 1e-3);
    CHECK(cases[0].config.f_req == 50.0);
    CHECK(cases[0].config.t_min == 0.01);
    CHECK(cases[0].config.t_max == 0.03);

    CHECK(cases[1].name == "B");
    CHECK(cases[1].config.tau == 1e-4);
    CHECK(cases[1].config.t_grid == 1e-6);
    CHECK(cases[1].config.f_req == 5e4);

    CHECK(cases[2].name == "C");
    CHECK_FALSE(cases[2].config.t_min.has_value());
    CHECK_FALSE(cases[2].config.t_max.has_value());

    CHECK(cases[3].name == "D");
    CHECK(cases[3].config.t_max == 1.4e-8);

    // each case must derive cleanly
    for (const auto &c : cases)
        CHECK_NOTHROW(derive_params(c.config));
}

TEST_CASE("case names resolve case-insensitively") {
    CHECK(named_config("A").has_value());
    CHECK(named_config("a").has_value());
    CHECK(named_config("d")->t_max == 1.4e-8);
    CHECK(named_config("exp1").has_value());
    CHECK(named_config("EXP1").has_value());
    CHECK_FALSE(named_config("Z").has_value());
    CHECK_FALSE(named_config("").has_value());

    const auto exp1 = named_config("exp1");
    CHECK(exp1->tau == 1e-3);
    CHECK(exp1->f_req == 1e5);
    CHECK(exp1->t_min == 5e-6);
}

TEST_CASE("variance grids are strictly increasing half-decade ladders") {
    const auto full = sigma2_grid_full();
    const auto desk = sigma2_grid_desk();
    CHECK(full.size() == 13);
    CHECK(desk.size() == 9);

    for (const auto *grid : {&full, &desk}) {
        for (std::size_t i = 1; i < grid->size(); ++i)
            CHECK((*grid)[i] > (*grid)[i - 1]);
        CHECK(grid->front() == 1e-4);
        CHECK(grid->back() == 100.0);
    }

    // both grids keep the half-decade neighbourhood of 1e-2
    auto contains = [](const std::vector<double> &g, double v) {
        for (double x : g)
            if (testsupport::close_rel(x, v, 1e-12))
                return true;
        return false;
    };
    for (const auto *grid : {&full, &desk}) {
        CHECK(contains(*grid, 1e-2));
        CHECK(contains(*grid, 1e-2 / std::sqrt(10.0)));
        CHECK(contains(*grid, 1e-2 * std::sqrt(10.0)));
    }
    // every desk point is a full-grid point
    for (double v : desk)
        CHECK(contains(full, v));
}

TEST_CASE("sweep specs are validated") {
    auto ok = tiny_spec({1e-3, 1e-2}, {GeneratorKind::js}, 10);
    CHECK_NOTHROW(ok.validate());

    SUBCASE("variance grid must be non-empty") {
        ok.sigma2_grid.clear();
        CHECK_THROWS_AS(ok.validate(), error);
    }
    SUBCASE("variances must increase strictly") {
        ok.sigma2_grid = {1e-2, 1e-2};
        CHECK_THROWS_AS(ok.validate(), error);
    }
    SUBCASE("zero variance is allowed only as the leading point") {
        ok.sigma2_grid = {0.0, 1e-3, 1.0};
        CHECK_NOTHROW(ok.validate());
        ok.sigma2_grid = {1e-4, 0.0};
        CHECK_THROWS_AS(ok.validate(), error);
    }
    SUBCASE("negative variance is rejected") {
        ok.sigma2_grid = {-1.0, 1e-3};
        CHECK_THROWS_AS(ok.validate(), error);
    }
    SUBCASE("generator list must be non-empty") {
        ok.generators.clear();
        CHECK_THROWS_AS(ok.validate(), error);
    }
    SUBCASE("pattern budget must be ordered") {
        ok.n_cap = ok.n_min - 1;
        CHECK_THROWS_AS(ok.validate(), error);
    }
    SUBCASE("n_min must be positive") {
        ok.n_min = 0;
        CHECK_THROWS_AS(ok.validate(), error);
    }
}

TEST_CASE("convergence scan finds the first frozen checkpoint") {
    std::vector<ConvergenceCheckpoint> history;
    for (std::uint64_t n = 20000; n <= 100000; n += 20000)
        history.push_back({n, 0.5, 0.1, 0.0, 0.0, 1.25});

    SUBCASE("a constant stream converges exactly at the floor") {
        const auto idx = first_converged(history, 100000);
        REQUIRE(idx.has_value());
        CHECK(*idx == 4);
        CHECK(history[*idx].n == 100000);
    }
    SUBCASE("a lower floor converges at the second checkpoint") {
        const auto idx = first_converged(history, 1);
        REQUIRE(idx.has_value());
        CHECK(*idx == 1); // needs a predecessor to compare against
    }
    SUBCASE("a five percent drift never converges") {
        for (std::size_t i = 0; i < history.size(); ++i) {
            const double f = std::pow(1.05, static_cast<double>(i));
            history[i].e_f *= f;
            history[i].e_p *= f;
        }
        CHECK_FALSE(first_converged(history, 1).has_value());
    }
    SUBCASE("empty history never converges") {
        CHECK_FALSE(
            first_converged({}, 1).has_value());
    }
}

TEST_CASE("cell seeds do not collide across a sweep") {
    std::set<std::uint64_t> seen;
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t s = 0; s < 13; ++s)
            seen.insert(cell_seed(1, g, s));
    CHECK(seen.size() == 39);
    CHECK(cell_seed(1, 0, 0) != cell_seed(2, 0, 0));
    CHECK(cell_seed(7, 1, 2) == cell_seed(7, 1, 2));
}

TEST_CASE("a small sweep fills every cell deterministically") {
    const auto spec = tiny_spec(
        {1e-3, 1e-2}, {GeneratorKind::js, GeneratorKind::angie}, 400);
    const auto report = run_sweep(spec, 5);
    REQUIRE(report.cells.size() == 4);

    // cells are generator-major in spec order
    CHECK(report.cells[0].generator == GeneratorKind::js);
    CHECK(report.cells[0].sigma2 == 1e-3);
    CHECK(report.cells[1].sigma2 == 1e-2);
    CHECK(report.cells[2].generator == GeneratorKind::angie);

    for (const auto &cell : report.cells) {
        CHECK(cell.feasible);
        CHECK(cell.n_used == 400);
        CHECK(cell.report.n == 400);
        CHECK(cell.capped); // floor == cap leaves no room to converge
        CHECK_FALSE(cell.converged);
        if (cell.generator == GeneratorKind::angie) {
            CHECK(cell.report.gamma == 0.0);
            CHECK(cell.report.e_f == 0.0);
        }
    }

    const auto again = run_sweep(spec, 5);
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        CHECK(report.cells[i].report.e_f == again.cells[i].report.e_f);
        CHECK(report.cells[i].report.eta == again.cells[i].report.eta);
    }
}

TEST_CASE("sweep CSV bytes do not depend on the thread count") {
    const auto spec =
        tiny_spec({1e-2, 1.0}, {GeneratorKind::js, GeneratorKind::ars,
                                GeneratorKind::angie},
                  300);
    const auto one = run_sweep(spec, 9, 1);
    const auto four = run_sweep(spec, 9, 4);

    std::ostringstream csv1, csv4;
    write_sweep_csv(csv1, one);
    write_sweep_csv(csv4, four);
    CHECK(csv1.str() == csv4.str());

    std::ostringstream p1, p4;
    write_plot_pdf(p1, one, 1);
    write_plot_pdf(p4, four, 4);
    CHECK(p1.str() == p4.str());
}

TEST_CASE("infeasible constrained cells are reported, not fatal") {
    SweepSpec spec;
    // a grid with no room for the constrained generator
    spec.base = SamplingConfig{0.01, 1e-3, 450.0, 2.2e-3, std::nullopt, 0.0};
    spec.sigma2_grid = {1e-2};
    spec.generators = {GeneratorKind::js, GeneratorKind::angie};
    spec.n_min = spec.n_cap = spec.eta_at = 50;

    const auto report = run_sweep(spec, 1);
    REQUIRE(report.cells.size() == 2);
    CHECK(report.cells[0].feasible);
    CHECK(report.cells[0].report.n == 50);
    CHECK_FALSE(report.cells[1].feasible);
    CHECK_FALSE(report.cells[1].note.empty());
    CHECK(report.cells[1].n_used == 0);

    std::ostringstream csv;
    write_sweep_csv(csv, report);
    CHECK(csv.str().find("angie,0.01,0,,") != std::string::npos);

    const auto j = sweep_to_json(report);
    CHECK(j["cells"][1]["feasible"] == false);
    CHECK(j["cells"][1]["report"].is_null());
}

TEST_CASE("the CSV header names every report column") {
    const auto spec = tiny_spec({1e-2}, {GeneratorKind::angie}, 30);
    const auto report = run_sweep(spec, 2);
    std::ostringstream csv;
    write_sweep_csv(csv, report);
    const std::string text = csv.str();
    const auto eol = text.find('\n');
    CHECK(text.substr(0, eol) ==
          "generator,sigma2,n,e_f,gamma_f,e_min,e_max,gamma_min,gamma_max,"
          "gamma,e_p,e_p_star,eta,eta_star,converged,capped,feasible");
    // one header plus one row per cell
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find("angie,0.01,30,") != std::string::npos);
}

TEST_CASE("sweep JSON carries provenance and echoes the inputs") {
    const auto spec = tiny_spec({1e-2}, {GeneratorKind::ars}, 25);
    const auto report = run_sweep(spec, 77);
    const auto j = sweep_to_json(report);

    const auto &prov = j["provenance"];
    CHECK(prov["seed"] == 77);
    CHECK(prov["mode"] == "desk");
    CHECK(prov["n_min"] == 25);
    CHECK(prov.contains("tool"));
    CHECK(prov.contains("version"));
    CHECK(prov["base"]["tau"] == 1e-3);
    CHECK(prov["derived"]["k_grid"] == 1000);
    CHECK(prov["derived"]["k_req"] == 100);
    CHECK(prov["sigma2_grid"].size() == 1);
    CHECK(prov["generators"][0] == "ars");
    REQUIRE(j["cells"].size() == 1);
    CHECK(j["cells"][0]["report"]["n"] == 25);

    SweepSpec full = spec;
    full.n_min = 100000;
    full.n_cap = 1000000;
    // don't run it; only the mode label depends on the floor
    SweepReport fake;
    fake.spec = full;
    fake.seed = 1;
    fake.derived = report.derived;
    CHECK(sweep_to_json(fake)["provenance"]["mode"] == "full");
}

TEST_CASE("best cell selection minimises starred density error") {
    const auto spec = tiny_spec({1e-3, 1e-2, 1e-1},
                                {GeneratorKind::angie}, 300);
    const auto report = run_sweep(spec, 4);
    const auto best = best_cell_index(report, GeneratorKind::angie);
    REQUIRE(best.has_value());
    const auto &cell = report.cells[*best];
    REQUIRE(cell.report.e_p_star.has_value());
    for (const auto &other : report.cells) {
        if (!other.report.e_p_star)
            continue;
        CHECK(*cell.report.e_p_star <= *other.report.e_p_star);
    }
    CHECK_FALSE(best_cell_index(report, GeneratorKind::js).has_value());
}

TEST_CASE("plot data tabulates the recorded metrics per cell") {
    const auto spec =
        tiny_spec({1e-2, 1e-1}, {GeneratorKind::js, GeneratorKind::angie},
                  200);
    const auto report = run_sweep(spec, 6);

    std::ostringstream g, e, t, p;
    write_plot_gamma(g, report);
    write_plot_ep(e, report);
    write_plot_eta(t, report);
    write_plot_pdf(p, report);

    const std::string gs = g.str(), es = e.str(), ts = t.str(),
                      ps = p.str();
    CHECK(gs.rfind("generator,sigma2,gamma\n", 0) == 0);
    CHECK(es.rfind("generator,sigma2,e_p,e_p_star\n", 0) == 0);
    CHECK(ts.rfind("generator,sigma2,eta,eta_star\n", 0) == 0);
    CHECK(ps.rfind("generator,sigma2,m,p_g,p_g_star\n", 0) == 0);
    CHECK(std::count(gs.begin(), gs.end(), '\n') == 5);

    // the occupancy histogram covers every grid position of the best cell
    CHECK(std::count(ps.begin(), ps.end(), '\n') ==
          1 + 2 * report.derived.k_grid);
}

TEST_CASE("report files land in the output directory") {
    const auto spec = tiny_spec({1e-2}, {GeneratorKind::angie}, 40);
    const auto report = run_sweep(spec, 3);

    const auto dir = std::filesystem::temp_directory_path() /
                     "pf_exp_test_out";
    std::filesystem::remove_all(dir);
    const auto files = write_report_files(report, dir);
    CHECK(files.size() == 6);
    std::set<std::string> names;
    for (const auto &f : files) {
        CHECK(std::filesystem::exists(f));
        CHECK(std::filesystem::file_size(f) > 0);
        names.insert(f.filename().string());
    }
    CHECK(names == std::set<std::string>{"sweep.csv", "sweep.json",
                                         "plot_gamma.csv", "plot_ep.csv",
                                         "plot_eta.csv", "plot_pdf.csv"});
    std::filesystem::remove_all(dir);
}
