#include "missinfo/numeric.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace missinfo::numeric;

TEST_CASE("log_sum_exp handles large and weighted inputs") {
    std::vector<double> xs{1000.0, 1000.0};
    CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
    std::vector<double> ws{0.25, 0.0};
    CHECK(log_sum_exp(xs, ws) == doctest::Approx(1000.0 + std::log(0.25)).epsilon(1e-15));
    std::vector<double> inf{-std::numeric_limits<double>::infinity()};
    CHECK(std::isinf(log_sum_exp(inf)));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    auto r = gauss_legendre(5, -1.0, 3.0);
    double w = 0, m9 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        w += r.weights[i];
        m9 += r.weights[i] * std::pow(r.nodes[i], 9);
    }
    CHECK(w == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(m9 == doctest::Approx((std::pow(3.0, 10) - 1.0) / 10.0).epsilon(1e-12));
}

TEST_CASE("derivatives and mixed partials") {
    auto d3 = derivative([](double x) { return std::sin(x); }, 0.4, 3, 0.05, 3);
    CHECK(d3.value == doctest::Approx(-std::cos(0.4)).epsilon(1e-8));
    auto m = mixed_partial([](double x, double y) { return std::exp(x * y); }, 0.3, 0.5, 1, 1, 0.05, 3);
    // d2/dxdy exp(xy) = (1 + xy) exp(xy)
    CHECK(m.value == doctest::Approx((1 + 0.15) * std::exp(0.15)).epsilon(1e-9));
}

TEST_CASE("scalar and vector maximizers") {
    auto s = maximize_scalar([](double x) { return -(x - 0.7) * (x - 0.7); }, 0.0, 0.1, -5, 5);
    CHECK(s.x == doctest::Approx(0.7).epsilon(1e-8));
    auto b = maximize_scalar([](double x) { return x; }, 0.0, 0.1, -1, 2);
    CHECK(b.at_upper);
    CHECK(b.x == doctest::Approx(2.0));

    FnN f = [](std::span<const double> x) { return -(x[0] - 1) * (x[0] - 1) - 2 * (x[1] + 0.5) * (x[1] + 0.5); };
    std::vector<double> steps{0.1, 0.1}, lo{-10, -10}, hi{10, 10};
    auto nm = nelder_mead_max(f, {0, 0}, steps, lo, hi);
    CHECK(nm.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(nm.x[1] == doctest::Approx(-0.5).epsilon(1e-5));
    std::vector<double> hs{1e-4, 1e-4};
    GradN g = [&](std::span<const double> x) { return fd_gradient(f, x, hs); };
    auto nt = newton_polish_max(f, g, nm.x, hs, lo, hi);
    CHECK(nt.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(nt.x[1] == doctest::Approx(-0.5).epsilon(1e-9));
}
