#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "stablemult/harmonic_extension.hpp"
#include "stablemult/spectral.hpp"

using namespace stablemult;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SampledField random_field(const GridSpec& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SampledField f(g);
    for (double& v : f.values) v = u(rng);
    return f;
}

double max_diff(const SampledField& a, const SampledField& b) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("Grid validation", "[spectral]") {
    CHECK_NOTHROW(GridSpec{16, 1.0, 0.0}.validate());
    CHECK_THROWS_AS((GridSpec{8, 1.0, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{100, 1.0, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{64, 0.0, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS(SampledField(GridSpec{16, 1.0, 0.0}, std::vector<double>(15)), ShapeError);
    const GridSpec g{16, 2.0, 0.0};
    CHECK_THAT(g.frequency(1), WithinRel(std::numbers::pi, 1e-15));
    CHECK_THAT(g.frequency(15), WithinRel(-std::numbers::pi, 1e-15));
    CHECK_THAT(g.frequency(8), WithinRel(-8.0 * std::numbers::pi, 1e-15));
}

TEST_CASE("DFT of a constant and of a grid cosine", "[spectral]") {
    const GridSpec g{64, 3.0, -1.5};
    const Spectrum s = dft(SampledField(g, 2.5));
    CHECK_THAT(s.coeffs[0].real(), WithinRel(2.5 * 64, 1e-14));
    for (int k = 1; k < 64; ++k) CHECK(std::abs(s.coeffs[k]) < 1e-12);

    SampledField c(g);
    for (int i = 0; i < 64; ++i) c[i] = std::cos(2.0 * std::numbers::pi * 5 * i / 64);
    const Spectrum sc = dft(c);
    for (int k = 0; k < 64; ++k) {
        if (k == 5 || k == 59)
            CHECK_THAT(sc.coeffs[k].real(), WithinRel(32.0, 1e-13));
        else
            CHECK(std::abs(sc.coeffs[k]) < 1e-12);
    }
    CHECK(max_diff(idft(sc), c) < 1e-14);
}

TEST_CASE("DFT against a direct O(n^2) sum", "[spectral]") {
    const GridSpec g{32, 1.0, 0.0};
    const SampledField f = random_field(g, 3);
    const Spectrum s = dft(f);
    for (int k = 0; k < 32; ++k) {
        std::complex<double> direct = 0.0;
        for (int j = 0; j < 32; ++j) direct += f[j] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / 32);
        CHECK(std::abs(s.coeffs[k] - direct) < 1e-12);
    }
}

TEST_CASE("Round trip and Parseval", "[spectral]") {
    const GridSpec g{1024, 10.0, -5.0};
    const SampledField f = random_field(g, 7);
    CHECK(max_diff(idft(dft(f)), f) < 1e-12 * sup_norm(f));
    const Spectrum s = dft(f);
    double spec = 0.0;
    for (const auto& c : s.coeffs) spec += std::norm(c);
    spec *= g.spacing() / g.n;
    CHECK_THAT(inner(f, f), WithinRel(spec, 1e-10));
}

TEST_CASE("Non-symmetric spectrum has no real inverse", "[spectral]") {
    const GridSpec g{16, 1.0, 0.0};
    Spectrum s{g, std::vector<cplx>(16, 0.0)};
    s.coeffs[1] = cplx(1.0, 0.0);
    CHECK_THROWS_AS(idft(s), SymmetryError);
    s.coeffs[15] = cplx(1.0, 0.0);
    CHECK_NOTHROW(idft(s));
}

TEST_CASE("apply_symbol: identity, zero, linearity, extension", "[spectral]") {
    const GridSpec g{256, 8.0, -4.0};
    const SampledField f = random_field(g, 11), h = random_field(g, 12);
    CHECK(max_diff(apply_symbol(f, [](double) { return 1.0; }), f) < 1e-13);
    CHECK(sup_norm(apply_symbol(f, [](double) { return 0.0; })) == 0.0);
    auto sym = [](double xi) { return 1.0 / (1.0 + xi * xi); };
    SampledField comb(g);
    for (int i = 0; i < g.n; ++i) comb[i] = 2.5 * f[i] + h[i];
    const SampledField lhs = apply_symbol(comb, sym);
    const SampledField a = apply_symbol(f, sym), b = apply_symbol(h, sym);
    SampledField rhs(g);
    for (int i = 0; i < g.n; ++i) rhs[i] = 2.5 * a[i] + b[i];
    CHECK(max_diff(lhs, rhs) < 1e-12);
    const StableParams p{0.8, 1};
    CHECK(max_diff(apply_symbol(f, [&](double xi) { return std::exp(-0.7 * std::pow(std::abs(xi), 0.4)); }),
                   extend(f, p, 0.7)) < 1e-14);
    CHECK_THROWS_AS(apply_symbol(f, [](double xi) { return xi == 0.0 ? INFINITY : 1.0; }), DomainError);
}

TEST_CASE("Spectral derivative of a periodic sine", "[spectral]") {
    const GridSpec g{128, 2.0 * std::numbers::pi, 0.0};
    SampledField f(g);
    for (int i = 0; i < g.n; ++i) f[i] = std::sin(3.0 * g.x(i));
    const SampledField d1 = spectral_derivative(dft(f), 1), d2 = spectral_derivative(dft(f), 2);
    for (int i = 0; i < g.n; ++i) {
        CHECK_THAT(d1[i], WithinAbs(3.0 * std::cos(3.0 * g.x(i)), 1e-11));
        CHECK_THAT(d2[i], WithinAbs(-9.0 * f[i], 1e-10));
    }
}

TEST_CASE("Translation is exact and commutes with symbols", "[spectral]") {
    const GridSpec g{64, 4.0, 0.0};
    const SampledField f = random_field(g, 5);
    CHECK(translate(f, 0).values == f.values);
    CHECK(translate(f, 64).values == f.values);
    CHECK(translate(translate(f, 13), -13).values == f.values);
    CHECK(translate(f, 3)[0] == f[3]);
    auto sym = [](double xi) { return std::exp(-std::abs(xi)); };
    CHECK(max_diff(apply_symbol(translate(f, 9), sym), translate(apply_symbol(f, sym), 9)) < 1e-10);
}

TEST_CASE("Norms and periodic interpolation", "[spectral]") {
    const GridSpec g{16, 4.0, -2.0};
    SampledField f(g, 0.0);
    f[8] = 2.0;
    CHECK_THAT(norm_p(f, 2.0), WithinRel(std::sqrt(4.0 * 0.25), 1e-15));
    CHECK(sup_norm(f) == 2.0);
    CHECK(grid_sum(f) == 2.0);
    CHECK_THAT(f.at(0.125), WithinRel(1.0, 1e-15));
    CHECK_THAT(f.at(4.0), WithinAbs(2.0, 1e-15));
    CHECK_THROWS_AS(inner(f, SampledField(GridSpec{16, 4.0, 0.0})), ShapeError);
}
