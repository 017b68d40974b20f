#include "pef/error.hpp"
#include "pef/evaluate.hpp"

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace pef;

namespace {

MeasurementSet line_set()
{
    MeasurementSet set;
    set.tx = {0.0, 0.0};
    for (int k = 1; k <= 50; ++k) {
        set.records.push_back({{static_cast<double>(k), 0.0}, 60.0 + k});
    }
    return set;
}

} // namespace

TEST_CASE("perfect and offset predictors")
{
    const auto set = line_set();
    const auto exact = evaluate_model(set, [](Point rx) { return 60.0 + rx.x; });
    CHECK(exact.rmse == 0.0);
    CHECK(exact.mean_abs_error == 0.0);

    const auto off = evaluate_model(set, [](Point rx) { return 58.0 + rx.x; });
    CHECK(off.rmse == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(off.mean_abs_error == doctest::Approx(2.0).epsilon(1e-12));
    for (double r : off.residuals) {
        CHECK(r == doctest::Approx(2.0).epsilon(1e-12));
    }
    REQUIRE(off.error_cdf.size() == set.size());
    CHECK(off.error_cdf.back().fraction == 1.0);
}

TEST_CASE("report invariants")
{
    const auto sc = fixture::reference_scenario();
    const auto set = gen_synthetic(sc.grid, sc.tx, sc.params, sc.d0, 3'000, std::nullopt, 8);
    const auto rep = evaluate_model(set, [&](Point rx) { return predict_pef(sc.grid, sc.tx, rx, sc.d0, sc.params); });

    long double sq = 0.0L;
    long double ab = 0.0L;
    for (double r : rep.residuals) {
        sq += static_cast<long double>(r) * r;
        ab += std::abs(r);
    }
    const auto K = static_cast<long double>(rep.residuals.size());
    CHECK(rep.rmse * rep.rmse == doctest::Approx(static_cast<double>(sq / K)).epsilon(1e-12));
    CHECK(rep.mean_abs_error == doctest::Approx(static_cast<double>(ab / K)).epsilon(1e-12));
    CHECK(rep.mean_abs_error <= rep.rmse);

    for (std::size_t i = 1; i < rep.error_cdf.size(); ++i) {
        CHECK(rep.error_cdf[i].abs_error >= rep.error_cdf[i - 1].abs_error);
        CHECK(rep.error_cdf[i].fraction > rep.error_cdf[i - 1].fraction);
    }
    CHECK(rep.error_cdf.front().fraction > 0.0);
    CHECK(rep.error_cdf.back().fraction == 1.0);

    const auto csv = cdf_csv(rep);
    CHECK(csv.rfind("abs_error_db,fraction\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rep.error_cdf.size() + 1));
}

TEST_CASE("absolute errors of a correct model are half-normal")
{
    const auto sc = fixture::reference_scenario();
    const auto set = gen_synthetic(sc.grid, sc.tx, sc.params, sc.d0, 10'000, std::nullopt, 77);
    const auto rep = evaluate_model(set, [&](Point rx) { return predict_pef(sc.grid, sc.tx, rx, sc.d0, sc.params); });
    std::vector<double> abs_err;
    for (const auto& p : rep.error_cdf) {
        abs_err.push_back(p.abs_error);
    }
    const double sigma = sc.params.sigma;
    const double d = oracle::ks_statistic(abs_err, [&](double x) {
        return 2.0 * oracle::normal_cdf(x / sigma) - 1.0;
    });
    CHECK(d < oracle::ks_critical_001(abs_err.size()));
}

TEST_CASE("evaluation errors")
{
    MeasurementSet empty;
    CHECK_THROWS_AS(evaluate_model(empty, [](Point) { return 0.0; }), DataError);
    const auto set = line_set();
    CHECK_THROWS_AS(evaluate_model(set, [](Point) -> double { throw DataError("nope"); }), DataError);
    CHECK_THROWS_AS(evaluate_model(set, [](Point) { return std::nan(""); }), NumericalError);
}

TEST_CASE("model comparison")
{
    SUBCASE("identical models on a single-type map tie")
    {
        const auto grid = fixture::uniform_grid(100, 100, 1.0);
        const PefParams pef{70.0, {2.5}, 5.0};
        const LogDistParams ld{70.0, 2.5, 5.0, 1.0};
        const auto set = gen_synthetic(grid, {50.5, 50.5}, pef, 1.0, 2'000, std::nullopt, 3);
        const auto cmp = compare_models(set, grid, pef, ld, 1.0);
        CHECK(cmp.winner == Winner::Tie);
        CHECK(std::abs(cmp.rmse_delta) <= kTieTolerance);
        CHECK(winner_name(cmp.winner) == "tie");
    }
    SUBCASE("the generating model beats a misfit log-distance model")
    {
        const auto sc = fixture::reference_scenario();
        const auto set = gen_synthetic(sc.grid, sc.tx, sc.params, sc.d0, 3'000, std::nullopt, 4);
        const LogDistParams ld{80.0, 1.5, 6.8, 1.0};
        const auto cmp = compare_models(set, sc.grid, sc.params, ld, sc.d0);
        CHECK(cmp.winner == Winner::Pef);
        CHECK(cmp.rmse_delta == doctest::Approx(cmp.logdist.rmse - cmp.pef.rmse));
        CHECK(cmp.rmse_delta > 0.0);
    }
}
