#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stablemult/stable_density.hpp"

using namespace stablemult;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

double cauchy(int d, double s, double r) {
    if (d == 1) return s / (pi * (s * s + r * r));
    if (d == 2) return s / (2.0 * pi) * std::pow(s * s + r * r, -1.5);
    return s / (pi * pi) * std::pow(s * s + r * r, -2.0);
}

// p(1, 0) = |S^(d-1)| Gamma(d/alpha) / (alpha (2 pi)^d)
double origin_value(double alpha, int d) {
    const double area = d == 1 ? 2.0 : d == 2 ? 2.0 * pi : 4.0 * pi;
    return area * std::tgamma(d / alpha) / (alpha * std::pow(2.0 * pi, d));
}

// (1/pi) int_0^inf cos(x xi) exp(-s xi^alpha) d xi by Ooura's double-exponential rule
double ooura_density(double alpha, double s, double x) {
    if (x == 0.0) return std::pow(s, -1.0 / alpha) * origin_value(alpha, 1);
    boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-13);
    auto [v, err] = integrator.integrate([&](double xi) { return std::exp(-s * std::pow(xi, alpha)); }, x);
    return v / pi;
}

double laplace(double beta, double lambda) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(
        [&](double s) { return std::exp(-lambda * s) * subordinator_density(beta, s); }, 1e-12);
}

} // namespace

TEST_CASE("Cauchy density in d = 1, 2, 3", "[density]") {
    CHECK_THAT(density({1.0, 1}, 1.0, 0.0), WithinRel(1.0 / pi, 1e-10));
    CHECK_THAT(density({1.0, 1}, 2.0, 1.0), WithinRel(2.0 / (5.0 * pi), 1e-10));
    for (int d = 1; d <= 3; ++d) {
        for (double r : {0.0, 0.1, 0.7, 1.0, 3.0, 20.0, 200.0}) {
            for (double s : {0.5, 1.0, 4.0}) {
                Point x(d, 0.0);
                x[0] = r;
                INFO("d=" << d << " r=" << r << " s=" << s);
                CHECK_THAT(density({1.0, d}, s, x), WithinRel(cauchy(d, s, r), 1e-8));
            }
        }
    }
}

TEST_CASE("Fourier route agrees with an independent Ooura cosine transform", "[density]") {
    for (double alpha : {0.5, 0.8, 1.3, 1.7}) {
        for (double x : {0.0, 0.3, 1.0, 2.5, 7.0, 30.0}) {
            for (double s : {0.5, 2.0}) {
                INFO("alpha=" << alpha << " x=" << x << " s=" << s);
                CHECK_THAT(density({alpha, 1}, s, x), WithinRel(ooura_density(alpha, s, x), 1e-8));
            }
        }
    }
}

TEST_CASE("Value at the origin matches the radial gamma formula", "[density]") {
    for (double alpha : {0.5, 1.0, 1.5})
        for (int d = 1; d <= 3; ++d) {
            INFO("alpha=" << alpha << " d=" << d);
            CHECK_THAT(density({alpha, d}, 1.0, Point(d, 0.0)), WithinRel(origin_value(alpha, d), 1e-9));
            CHECK_THAT(density_via_subordination({alpha, d}, Point(d, 0.0)), WithinRel(origin_value(alpha, d), 1e-9));
        }
}

TEST_CASE("Subordination and cosine routes agree in d = 1", "[density]") {
    DensityEvalSpec sub;
    sub.method = DensityMethod::subordination;
    for (double alpha : {0.4, 1.0, 1.6})
        for (double x : {0.0, 0.5, 2.0, 10.0, 80.0}) {
            const double a = density({alpha, 1}, 1.0, x);
            INFO("alpha=" << alpha << " x=" << x);
            CHECK_THAT(density_via_subordination({alpha, 1}, Point{x}), WithinRel(a, 1e-8));
            CHECK_THAT(density({alpha, 1}, 1.0, x, sub), WithinRel(a, 1e-8));
        }
}

TEST_CASE("Symmetry and scaling", "[density]") {
    for (double alpha : {0.6, 1.2, 1.9}) {
        const StableParams p{alpha, 1};
        for (double x : {0.2, 1.5, 9.0}) CHECK(density(p, 1.3, x) == density(p, 1.3, -x));
        for (double s : {0.5, 1.0, 2.0, 5.0}) {
            CHECK_THAT(density(p, s, 0.0), WithinRel(std::pow(s, -1.0 / alpha) * density(p, 1.0, 0.0), 1e-12));
            CHECK_THAT(density(p, s, 1.7),
                       WithinRel(std::pow(s, -1.0 / alpha) * density(p, 1.0, 1.7 * std::pow(s, -1.0 / alpha)), 1e-12));
        }
    }
    const StableParams p2{1.4, 2};
    CHECK_THAT(density(p2, 1.0, Point{0.6, 0.8}), WithinRel(density(p2, 1.0, Point{-1.0, 0.0}), 1e-12));
}

TEST_CASE("One-sided 1/2-stable closed form", "[density][subordinator]") {
    // g(s) = s^(-3/2) exp(-1/(4s)) / (2 sqrt(pi)), Laplace transform exp(-sqrt(lambda))
    for (double s : {0.01, 0.1, 1.0, 3.0, 100.0}) {
        const double g = std::pow(s, -1.5) * std::exp(-0.25 / s) / (2.0 * std::sqrt(pi));
        CHECK_THAT(subordinator_density(0.5, s), WithinRel(g, 1e-9));
        CHECK_THAT(subordinator_cdf(0.5, s), WithinRel(std::erfc(0.5 / std::sqrt(s)), 1e-9));
    }
    CHECK_THAT(subordinator_density(0.5, 1.0), WithinAbs(0.21969564, 1e-8));
}

TEST_CASE("Subordinator Laplace identity and normalization", "[density][subordinator]") {
    for (double beta : {0.25, 0.5, 0.75, 0.95}) {
        for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
            INFO("beta=" << beta << " lambda=" << lambda);
            CHECK_THAT(laplace(beta, lambda), WithinAbs(std::exp(-std::pow(lambda, beta)), 1e-6));
        }
        // P(A > s) ~ s^-beta / Gamma(1 - beta) with an O(s^-2beta) correction
        CHECK_THAT(subordinator_cdf(beta, 1e8), WithinAbs(1.0 - std::pow(1e8, -beta) / std::tgamma(1.0 - beta), 2e-4));
        CHECK(subordinator_density(beta, 1e-3) >= 0.0);
    }
}

TEST_CASE("Partial derivatives", "[density][partial]") {
    const StableParams c{1.0, 1};
    CHECK_THAT(density_partial(c, 1.0, Point{0.0}, 1, 1), WithinAbs(0.0, 1e-15));
    CHECK_THAT(density_partial(c, 1.0, Point{1.0}, 1, 1), WithinRel(-1.0 / (2.0 * pi), 1e-9));
    // d^2/dx^2 of 1/(pi(1+x^2)) = (6x^2 - 2)/(pi(1+x^2)^3)
    for (double x : {0.0, 0.5, 2.0})
        CHECK_THAT(density_partial(c, 1.0, Point{x}, 1, 2),
                   WithinRel((6 * x * x - 2) / (pi * std::pow(1 + x * x, 3)), 1e-9));
    // d = 2 Cauchy: dp/dx2 = -3 x2 / (2 pi) (1 + r^2)^(-5/2)
    const Point y{0.3, -0.8};
    CHECK_THAT(density_partial({1.0, 2}, 1.0, y, 2, 1),
               WithinRel(-3.0 * y[1] / (2.0 * pi) * std::pow(1.0 + 0.73, -2.5), 1e-9));
}

TEST_CASE("Partial derivatives match finite differences", "[density][partial]") {
    DensityEvalSpec tight;
    tight.rel_tol = 1e-12;
    for (double alpha : {0.5, 1.5}) {
        const StableParams p{alpha, 1};
        for (double x : {0.5, 1.0, 2.0, 5.0}) {
            const double h = 1e-3 * x;
            auto f = [&](double u) { return density(p, 1.0, u, tight); };
            const double d1 = (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
            const double d2 = (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
            INFO("alpha=" << alpha << " x=" << x);
            CHECK_THAT(density_partial(p, 1.0, Point{x}, 1, 1), WithinRel(d1, 1e-4));
            CHECK_THAT(density_partial(p, 1.0, Point{x}, 1, 2), WithinRel(d2, 1e-4));
        }
    }
}

TEST_CASE("Derivative bound constant is stable under grid refinement", "[density][partial]") {
    for (double alpha : {0.5, 1.0, 1.5}) {
        const StableParams p{alpha, 1};
        for (int k : {1, 2}) {
            auto ratio = [&](double x) {
                return std::abs(density_partial(p, 1.0, Point{x}, 1, k)) /
                       (std::min(1.0, std::pow(x, -k)) * density(p, 1.0, x));
            };
            double fitted = 0.0, refined = 0.0;
            for (int i = 0; i <= 160; ++i) fitted = std::max(fitted, ratio(std::pow(10.0, -2.0 + 0.025 * i)));
            for (int i = 0; i < 160; ++i) refined = std::max(refined, ratio(std::pow(10.0, -1.9875 + 0.025 * i)));
            INFO("alpha=" << alpha << " k=" << k << " c=" << fitted);
            CHECK(std::isfinite(fitted));
            CHECK(refined <= 1.01 * fitted);
        }
    }
}

TEST_CASE("Envelope examples and two-sided comparison", "[density][envelope]") {
    CHECK(envelope({1.0, 1}, 1.0, Point{0.0}) == 1.0);
    CHECK_THAT(envelope({1.0, 1}, 1.0, Point{10.0}), WithinRel(0.01, 1e-14));
    CHECK_THAT(envelope({0.5, 1}, 2.0, Point{1.0}), WithinRel(0.25, 1e-14));
    for (double alpha : {0.5, 1.0, 1.5}) {
        const StableParams p{alpha, 1};
        double lo = 1e300, hi = 0.0;
        for (double s : {0.1, 0.3, 1.0, 3.0, 10.0})
            for (double x = 0.0; x <= 100.0; x += x < 2.0 ? 0.25 : 7.0) {
                const double r = density(p, s, x) / envelope(p, s, Point{x});
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        INFO("alpha=" << alpha << " c1=" << lo << " c2=" << hi);
        CHECK(lo > 0.0);
        CHECK(hi / lo < 1e3);
    }
}

TEST_CASE("Unit mass up to the envelope tail", "[density]") {
    for (double alpha : {0.5, 1.0, 1.5}) {
        const StableParams p{alpha, 1};
        // trapezoid on a grid that is uniform near 0 and geometric beyond 4
        std::vector<double> xs;
        for (double x = 0.0; x < 4.0; x += 0.01) xs.push_back(x);
        for (double x = 4.0; x < 1000.0; x *= 1.01) xs.push_back(x);
        xs.push_back(1000.0);
        double mass = 0.0, prev = density(p, 1.0, 0.0);
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double v = density(p, 1.0, xs[i]);
            mass += (xs[i] - xs[i - 1]) * (v + prev);
            prev = v;
        }
        const double tail = 2.0 * std::pow(1000.0, -alpha) / alpha;
        INFO("alpha=" << alpha << " mass=" << mass);
        CHECK(mass + tail > 0.999);
        CHECK(mass < 1.0 + 1e-3);
    }
}

TEST_CASE("Batch table reproduces direct evaluation", "[density]") {
    const UnitDensityTable table(0.7, 1);
    for (double y : {0.0, 1e-5, 0.3, 2.0, 40.0, 1e3, 1e9})
        CHECK_THAT(table(y), WithinRel(unit_density(0.7, 1, y), 1e-7));
}

TEST_CASE("Invalid inputs are rejected", "[density]") {
    CHECK_THROWS_AS(density({2.0, 1}, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(density({0.0, 1}, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(density({1.0, 4}, 1.0, Point(4, 0.0)), DomainError);
    CHECK_THROWS_AS(density({1.0, 1}, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(density_partial({1.0, 1}, 1.0, Point{1.0}, 1, 3), DomainError);
    CHECK_THROWS_AS(subordinator_density(1.0, 1.0), DomainError);
}
