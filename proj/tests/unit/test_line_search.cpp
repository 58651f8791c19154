#include "lps/line_search.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lps;

TEST_CASE("Brent locates an interior maximum") {
    int calls = 0;
    auto phi = [&](double x) {
        ++calls;
        return std::sin(x);
    };
    const auto r = brent_maximize(phi, 0.0, 1.0, 3.0, 0.0, std::sin(1.0), std::sin(3.0));
    CHECK(r.tau == doctest::Approx(std::acos(0.0)).epsilon(1e-4));
    CHECK(r.value >= std::sin(1.0));
    CHECK(r.evaluations == calls);
    CHECK(r.evaluations <= 25);
}

TEST_CASE("arc line search brackets by doubling") {
    auto phi = [](double t) { return -(t - 0.3) * (t - 0.3); };
    const auto r = arc_line_search(phi, phi(0.0), 1e-3);
    CHECK(r.ascent);
    CHECK(r.tau == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(r.value > phi(0.0));
}

TEST_CASE("arc line search halves an overshooting first step") {
    auto phi = [](double t) { return -(t - 1e-4) * (t - 1e-4); };
    const auto r = arc_line_search(phi, phi(0.0), 1.0);
    CHECK(r.ascent);
    CHECK(r.tau == doctest::Approx(1e-4).epsilon(1e-3));
}

TEST_CASE("arc line search reports no ascent") {
    auto phi = [](double t) { return -t; };
    const auto r = arc_line_search(phi, 0.0, 1e-2);
    CHECK_FALSE(r.ascent);
    CHECK(r.tau == 0.0);
    CHECK(r.value == 0.0);
}

TEST_CASE("aborted evaluations act as walls") {
    const double inf = std::numeric_limits<double>::infinity();
    auto phi = [&](double t) { return t < 0.5 ? t : -inf; };
    const auto r = arc_line_search(phi, 0.0, 0.01);
    CHECK(r.ascent);
    CHECK(r.tau < 0.5);
    CHECK(r.tau > 0.2);
    CHECK(std::isfinite(r.value));
}

TEST_CASE("evaluation budget is respected") {
    int calls = 0;
    auto phi = [&](double t) {
        ++calls;
        return std::sin(50.0 * t) + t;
    };
    LineSearchOptions opt;
    opt.max_evaluations = 5;
    const auto r = arc_line_search(phi, 0.0, 1e-3, opt);
    CHECK(r.ascent);
    CHECK(r.evaluations == calls);
    CHECK(calls <= opt.max_evaluations + opt.max_bracket_steps + 2);
}
