#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <hsmkit/estimation.hpp>

using namespace hsmkit;

TEST_CASE("g_squared at the saturated optimum is minus twice the log likelihood") {
    std::vector<double> counts{34.5, 10.1, 12.5, 42.9};
    double total = 34.5 + 10.1 + 12.5 + 42.9;
    std::vector<double> pred;
    for (double c : counts) pred.push_back(c / total);
    double expected = 0.0;
    for (double c : counts) expected += -2.0 * c * std::log(c / total);
    REQUIRE(g_squared_cells(pred, counts) == Catch::Approx(expected).epsilon(1e-14));
}

TEST_CASE("g_squared closed form for a point mass against the uniform model") {
    std::vector<double> counts{100.0, 0.0, 0.0, 0.0};
    std::vector<double> pred{0.25, 0.25, 0.25, 0.25};
    // -2 * 100 * ln(1/4)
    REQUIRE(g_squared_cells(pred, counts) == Catch::Approx(277.25887222397813).epsilon(1e-12));
}

TEST_CASE("g_squared floors predictions and skips empty cells") {
    std::vector<double> counts{1.0, 0.0};
    std::vector<double> pred{0.0, 1.0};
    double expected = -2.0 * std::log(1e-12);
    REQUIRE(g_squared_cells(pred, counts) == Catch::Approx(expected).epsilon(1e-12));
    REQUIRE_THROWS_AS(g_squared_cells({0.5}, {1.0, 1.0}), ValidationError);
}

TEST_CASE("g_squared sums over tables") {
    std::vector<std::vector<double>> pred{{0.5, 0.5}, {0.25, 0.75}};
    std::vector<std::vector<double>> obs{{3.0, 1.0}, {1.0, 3.0}};
    double want = g_squared_cells(pred[0], obs[0]) + g_squared_cells(pred[1], obs[1]);
    REQUIRE(g_squared(pred, obs) == Catch::Approx(want).epsilon(1e-14));
}

TEST_CASE("bic adds the parameter penalty") {
    REQUIRE(bic(100.0, 8, 192) == Catch::Approx(142.05996297622227).margin(1e-9));
    REQUIRE(bic(0.0, 0, 5) == 0.0);
    REQUIRE_THROWS_AS(bic(1.0, 1, 0), ValidationError);
}

TEST_CASE("chi2_cdf matches reference values") {
    REQUIRE(chi2_cdf(5.0, 6) == Catch::Approx(0.45618688411667035).margin(1e-10));
    REQUIRE(chi2_cdf(10.0, 6) == Catch::Approx(0.8753479805169189).margin(1e-10));
    REQUIRE(chi2_pvalue(18.04, 9) == Catch::Approx(0.03471229451695057).margin(1e-10));
    REQUIRE(chi2_pvalue(12.592, 6) == Catch::Approx(0.04999245818920994).margin(1e-10));
    REQUIRE(chi2_cdf(0.0, 3) == 0.0);
    REQUIRE(chi2_pvalue(0.0, 3) == 1.0);
    REQUIRE_THROWS_AS(chi2_cdf(1.0, 0), ValidationError);
    REQUIRE_THROWS_AS(chi2_cdf(-1.0, 2), ValidationError);
}

TEST_CASE("chi2_cdf agrees with the even-df closed form") {
    for (int df : {2, 4, 6, 8})
        for (double x : {0.1, 0.5, 1.0, 2.5, 5.0, 9.0, 14.0, 25.0, 40.0})
            REQUIRE(chi2_cdf(x, df) ==
                    Catch::Approx(chi2_cdf_even_closed_form(x, df)).margin(1e-10));
}

TEST_CASE("optimizer config validation") {
    OptimizerConfig c;
    REQUIRE_NOTHROW(c.validate());
    c.swarm_size = 0;
    REQUIRE_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.inertia = 1.5;
    REQUIRE_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.restarts = 0;
    REQUIRE_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.polish_tolerance = 0.0;
    REQUIRE_THROWS_AS(c.validate(), ValidationError);
}

namespace {

OptimizerConfig quick_config(std::uint64_t seed = 0) {
    OptimizerConfig c;
    c.swarm_size = 20;
    c.iterations = 150;
    c.restarts = 3;
    c.seed = seed;
    return c;
}

}

TEST_CASE("minimize finds the sphere minimum") {
    Objective f = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += (v - 0.3) * (v - 0.3);
        return s;
    };
    std::vector<double> lo(5, -2.0), hi(5, 2.0);
    MinimizeResult r = minimize(f, lo, hi, quick_config());
    REQUIRE(r.value < 1e-10);
    for (double v : r.params) REQUIRE(v == Catch::Approx(0.3).margin(1e-4));
}

TEST_CASE("minimize finds the Rosenbrock minimum") {
    Objective f = [](const std::vector<double>& x) {
        double a = 1.0 - x[0];
        double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    std::vector<double> lo{-2.0, -2.0}, hi{2.0, 2.0};
    OptimizerConfig c = quick_config(4);
    c.iterations = 400;
    MinimizeResult r = minimize(f, lo, hi, c);
    REQUIRE(r.value < 1e-8);
    REQUIRE(r.params[0] == Catch::Approx(1.0).margin(1e-3));
    REQUIRE(r.params[1] == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("minimize is bitwise deterministic") {
    Objective f = [](const std::vector<double>& x) {
        return std::cos(3.0 * x[0]) + x[0] * x[0] * 0.1 + std::sin(x[1]) * x[1];
    };
    std::vector<double> lo{-4.0, -4.0}, hi{4.0, 4.0};
    MinimizeResult a = minimize(f, lo, hi, quick_config(7));
    MinimizeResult b = minimize(f, lo, hi, quick_config(7));
    REQUIRE(a.value == b.value);
    REQUIRE(a.params == b.params);
    REQUIRE(a.per_restart_values == b.per_restart_values);
    MinimizeResult c = minimize(f, lo, hi, quick_config(8));
    REQUIRE(c.value == Catch::Approx(a.value).margin(1e-6));
}

TEST_CASE("minimize reports per-restart values with the best as the result") {
    Objective f = [](const std::vector<double>& x) { return x[0] * x[0]; };
    std::vector<double> lo{-1.0}, hi{1.0};
    OptimizerConfig c = quick_config(3);
    MinimizeResult r = minimize(f, lo, hi, c);
    REQUIRE(r.per_restart_values.size() == static_cast<std::size_t>(c.restarts));
    double best = r.per_restart_values[0];
    for (double v : r.per_restart_values) best = std::min(best, v);
    REQUIRE(r.value == best);
    REQUIRE(r.evaluations > 0);
}

TEST_CASE("minimize keeps iterates inside the box") {
    // minimum of a linear objective sits on the boundary
    Objective f = [](const std::vector<double>& x) { return x[0] + 2.0 * x[1]; };
    std::vector<double> lo{-1.0, 0.5}, hi{2.0, 3.0};
    MinimizeResult r = minimize(f, lo, hi, quick_config());
    REQUIRE(r.params[0] >= lo[0]);
    REQUIRE(r.params[1] >= lo[1]);
    REQUIRE(r.params[0] == Catch::Approx(-1.0).margin(1e-9));
    REQUIRE(r.params[1] == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("minimize validates bounds and rejects hopeless objectives") {
    Objective f = [](const std::vector<double>&) {
        return std::numeric_limits<double>::infinity();
    };
    std::vector<double> lo{0.0}, hi{1.0};
    REQUIRE_THROWS_AS(minimize(f, lo, hi, quick_config()), OptimizationError);
    Objective g = [](const std::vector<double>& x) { return x[0]; };
    REQUIRE_THROWS_AS(minimize(g, {1.0}, {0.0}, quick_config()), ValidationError);
    REQUIRE_THROWS_AS(minimize(g, {0.0, 0.0}, {1.0}, quick_config()), ValidationError);
}
