#include <doctest.h>

#include <cmath>

#include "riskmin/grid.hpp"

using namespace riskmin;

TEST_CASE("time grid exposes nodes, steps, and times consistently") {
    const TimeGrid grid{2.0, 8};
    CHECK(grid.n_nodes() == 9);
    CHECK(grid.dt() == doctest::Approx(0.25));
    CHECK(grid.time(0) == 0.0);
    CHECK(grid.time(8) == doctest::Approx(2.0));
    CHECK(grid.time(3) == doctest::Approx(0.75));
}

TEST_CASE("piecewise rate is right-continuous with left-closed intervals") {
    // value = 0.01 on [0, 0.5), 0.03 on [0.5, 1.5), 0.02 from 1.5 on.
    const PiecewiseRate rate{{0.5, 1.5}, {0.01, 0.03, 0.02}};
    CHECK(rate.at(0.0) == 0.01);
    CHECK(rate.at(0.499) == 0.01);
    CHECK(rate.at(0.5) == 0.03);
    CHECK(rate.at(1.0) == 0.03);
    CHECK(rate.at(1.5) == 0.02);
    CHECK(rate.at(10.0) == 0.02);
    CHECK(rate.min_value() == 0.01);
    CHECK(rate.max_value() == 0.03);

    const PiecewiseRate flat = PiecewiseRate::constant(0.04);
    CHECK(flat.at(0.0) == 0.04);
    CHECK(flat.at(100.0) == 0.04);
}

TEST_CASE("node sampling takes the left endpoint value of every step") {
    const TimeGrid grid{1.0, 4};
    const PiecewiseRate rate{{0.5}, {0.02, 0.06}};
    const auto values = rate.node_values(grid);
    REQUIRE(values.size() == 5);
    CHECK(values[0] == 0.02);
    CHECK(values[1] == 0.02);
    CHECK(values[2] == 0.06);  // t = 0.5 sits in the second piece
    CHECK(values[3] == 0.06);
    CHECK(values[4] == 0.06);
}

TEST_CASE("account accumulates the left-point integral") {
    const TimeGrid grid{1.0, 4};
    const PiecewiseRate rate{{0.5}, {0.02, 0.06}};
    const auto account = rate.account(grid);
    REQUIRE(account.size() == 5);
    CHECK(account[0] == 1.0);
    CHECK(account[1] == doctest::Approx(std::exp(0.02 * 0.25)).epsilon(1e-15));
    CHECK(account[2] == doctest::Approx(std::exp(0.04 * 0.25)).epsilon(1e-15));
    CHECK(account[3] == doctest::Approx(std::exp((0.04 + 0.06) * 0.25)).epsilon(1e-15));
    CHECK(account[4] == doctest::Approx(std::exp((0.04 + 0.12) * 0.25)).epsilon(1e-15));

    // Constant rate: exact exponential growth at every node.
    const auto flat = PiecewiseRate::constant(0.03).account(TimeGrid{2.0, 10});
    CHECK(flat[10] == doctest::Approx(std::exp(0.06)).epsilon(1e-14));
}
