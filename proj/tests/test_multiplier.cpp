#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "stablemult/multiplier.hpp"

using namespace stablemult;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

// c = 4 Gamma(1 - alpha) cos(pi alpha / 2) / alpha from int_0^inf (1 - cos u) u^(-1-alpha) du
double c_closed(double alpha) { return 4.0 * std::tgamma(1.0 - alpha) * std::cos(pi * alpha / 2.0) / alpha; }

GridSpec grid() { return GridSpec{512, 32.0, -16.0}; }

// worst relative gap of DFT(Tf)/DFT(f) against ref over bins 1..n/8 carrying
// at least 1e-8 of the peak spectral magnitude
double band_gap(const SampledField& f, const SampledField& Tf, const std::function<double(double)>& ref) {
    const Spectrum F = dft(f), T = dft(Tf);
    double peak = 0.0;
    for (const auto& c : F.coeffs) peak = std::max(peak, std::abs(c));
    double worst = 0.0;
    for (int k = 1; k <= f.grid.n / 8; ++k) {
        if (std::abs(F.coeffs[k]) < 1e-8 * peak) continue;
        const cplx ratio = T.coeffs[k] / F.coeffs[k];
        const double m = ref(f.grid.frequency(k));
        worst = std::max(worst, std::abs(ratio - m) / std::abs(m));
    }
    return worst;
}

double max_diff(const SampledField& a, const SampledField& b) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("Second difference", "[multiplier]") {
    const GridSpec g{128, 2.0 * pi, 0.0};
    CHECK(sup_norm(second_difference(SampledField(g, 3.0), 5)) == 0.0);
    SampledField c(g);
    for (int i = 0; i < g.n; ++i) c[i] = std::cos(4.0 * g.x(i));
    const int h = 7;
    const double dh = h * g.spacing();
    const SampledField d = second_difference(c, h);
    for (int i = 0; i < g.n; ++i) CHECK_THAT(d[i], WithinAbs(4.0 * std::pow(std::sin(2.0 * dh), 2) * c[i], 1e-13));
    const SampledField b = smooth_bump(g, 1.0, 0.5);
    CHECK_THAT(grid_sum(second_difference(b, 3)), WithinAbs(0.0, 1e-13));
    CHECK_THROWS_AS(second_difference(b, 64), DomainError);
}

TEST_CASE("Constant c", "[multiplier]") {
    CHECK_THAT(constant_c({1.0, 1}), WithinRel(2.0 * pi, 1e-10));
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 1.3, 1.7})
        CHECK_THAT(constant_c({a, 1}), WithinRel(c_closed(a), 1e-9));
    CHECK(std::isfinite(constant_c({1.999, 1})));
    for (double a = 0.1; a < 0.9; a += 0.05)
        CHECK(std::abs(constant_c({a, 1}) - constant_c({a + 1e-3, 1})) < 0.1 * constant_c({a, 1}));
}

TEST_CASE("phi integral is nondecreasing and tends to half the full integral", "[multiplier]") {
    for (double a : {0.3, 0.8}) {
        double prev = 0.0;
        for (double u = 0.01; u < 1e4; u *= 1.5) {
            const double v = phi_integral(a, u);
            CHECK(v >= prev);
            prev = v;
        }
        // the tail beyond U averages sin^2 to 1/2: U^-a / (2a) up to O(U^(-1-a))
        const double U = 1e9;
        CHECK_THAT(phi_integral(a, U) + std::pow(U, -a) / (2.0 * a),
                   WithinRel(constant_c({a, 1}) / (2.0 * std::pow(2.0, 2.0 - a)), 1e-6));
    }
}

TEST_CASE("Closed-form symbols", "[multiplier]") {
    for (double a : {0.3, 0.5, 0.9}) {
        const StableParams p{a, 1};
        const double c = constant_c(p);
        CHECK(symbol_m(0.0, MultiplierProfile::one(), p) == 0.0);
        for (double xi : {0.01, 0.5, 1.0, 7.0, -3.0, 200.0}) {
            CHECK_THAT(symbol_m(xi, MultiplierProfile::one(), p), WithinRel(c / 4.0, 1e-10));
            const double lam = std::pow(std::abs(xi), a / 2.0);
            CHECK_THAT(symbol_m(xi, MultiplierProfile::exp_decay(), p),
                       WithinRel(c * std::pow(std::abs(xi), a) / std::pow(1.0 + 2.0 * lam, 2), 1e-10));
            CHECK(std::abs(symbol_m(xi, MultiplierProfile::exp_decay(), p)) <= c / 4.0 * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("Tabulated profile symbol against an independent integrator", "[multiplier]") {
    const auto r = MultiplierProfile::tabulated({0.0, 1.0, 2.0, 4.0}, {1.0, -0.5, 0.25, 0.0});
    const StableParams p{0.6, 1};
    boost::math::quadrature::exp_sinh<double> integrator;
    for (double xi : {0.2, 1.5, 10.0}) {
        const double lam = std::pow(xi, 0.3);
        // integrate each linear piece separately so the kinks sit on panel ends
        double ref = 0.0;
        const std::vector<double> t{0.0, 1.0, 2.0, 4.0};
        for (int i = 0; i < 3; ++i) {
            auto piece = [&](double s) { return s * r(s) * std::exp(-2.0 * s * lam); };
            ref += gk(piece, t[i], t[i + 1], 1e-13).value;
        }
        const double m = constant_c(p) * std::pow(xi, 0.6) * ref;
        CHECK_THAT(symbol_m(xi, r, p), WithinRel(m, 1e-8));
        CHECK(std::abs(symbol_m(xi, r, p)) <= constant_c(p) / 4.0 * r.sup_bound * (1.0 + 1e-6));
    }
    CHECK_THROWS_AS(MultiplierProfile::tabulated({0.0, 1.0}, {1.0}), ShapeError);
}

TEST_CASE("Truncated symbol", "[multiplier]") {
    const StableParams p{0.5, 1};
    const auto r = MultiplierProfile::one();
    TQuadSpec q;
    q.t_min = 1e-6;
    q.t_max = 2.0;
    q.h_policy = HPolicy::truncated;
    // small xi: the truncated ball misses positive mass
    CHECK(symbol_m_truncated(0.05, r, p, q) < symbol_m(0.05, r, p));
    // the truncated symbol grows with t_max
    TQuadSpec wide = q;
    wide.t_max = 400.0;
    const auto e = MultiplierProfile::exp_decay();
    CHECK(symbol_m_truncated(0.05, e, p, wide) >= symbol_m_truncated(0.05, e, p, q));
    // with r = 1 and an effectively infinite t-range the truncated symbol is
    // dilation invariant, hence constant in xi, and sits below c/4
    TQuadSpec all = q;
    all.t_min = 1e-9;
    all.t_max = 1e6;
    const double m0 = symbol_m_truncated(0.5, r, p, all);
    for (double xi : {5.0, 50.0, -2.0}) CHECK_THAT(symbol_m_truncated(xi, r, p, all), WithinRel(m0, 1e-6));
    CHECK(m0 < constant_c(p) / 4.0);
    CHECK(m0 > 0.0);
    CHECK(symbol_m_truncated(0.0, e, p, q) == 0.0);
}

TEST_CASE("apply_T: zero, linearity, full-policy symbol", "[multiplier][slow]") {
    const GridSpec g = grid();
    const SampledField f = smooth_bump(g, 0.0, 2.0), h = gaussian_bump(g, 1.0, 0.7);
    const auto e = MultiplierProfile::exp_decay();
    for (double a : {0.5, 0.8}) {
        const StableParams p{a, 1};
        const TQuadSpec q = default_quad(g, p, e, HPolicy::full);
        CHECK(sup_norm(apply_T(SampledField(g), e, p, q)) == 0.0);
        const SampledField Tf = apply_T(f, e, p, q), Th = apply_T(h, e, p, q);
        SampledField comb(g);
        for (int i = 0; i < g.n; ++i) comb[i] = -1.5 * f[i] + h[i];
        const SampledField Tc = apply_T(comb, e, p, q);
        double gap = 0.0;
        for (int i = 0; i < g.n; ++i) gap = std::max(gap, std::abs(Tc[i] - (-1.5 * Tf[i] + Th[i])));
        CHECK(gap <= 1e-10 * std::max(1.0, sup_norm(Tf)));
        const double worst = band_gap(f, Tf, [&](double xi) { return symbol_m(xi, e, p); });
        INFO("alpha=" << a << " worst=" << worst);
        CHECK(worst < 0.02);
    }
}

TEST_CASE("apply_T: truncated policy against truncated symbol", "[multiplier][slow]") {
    const GridSpec g = grid();
    const SampledField f = smooth_bump(g, 0.0, 2.0);
    const auto e = MultiplierProfile::exp_decay();
    const StableParams p{0.6, 1};
    const TQuadSpec q = default_quad(g, p, e, HPolicy::truncated);
    const SampledField Tf = apply_T(f, e, p, q);
    const double worst = band_gap(f, Tf, [&](double xi) { return symbol_m_truncated(xi, e, p, q); });
    INFO("worst=" << worst);
    CHECK(worst < 0.02);
}

TEST_CASE("Operator domain restricted to alpha < 1", "[multiplier]") {
    const GridSpec g = grid();
    const SampledField f = smooth_bump(g, 0.0, 2.0);
    const StableParams p{1.2, 1};
    TQuadSpec q;
    CHECK_THROWS_AS(apply_T(f, MultiplierProfile::one(), p, q), DomainError);
    CHECK_THROWS_AS(pairing_check(f, f, {1.0, 1}, q), DomainError);
    q.n_t = 4;
    CHECK_THROWS_AS(apply_T(f, MultiplierProfile::one(), {0.5, 1}, q), DomainError);
}

TEST_CASE("apply_T is reproducible across thread counts", "[multiplier]") {
    const GridSpec g = grid();
    const SampledField f = smooth_bump(g, 0.0, 2.0);
    const StableParams p{0.7, 1};
    const auto r = MultiplierProfile::exp_decay();
    const TQuadSpec q = default_quad(g, p, r, HPolicy::truncated);
    ::setenv("STABLEMULT_THREADS", "1", 1);
    const SampledField a = apply_T(f, r, p, q);
    ::setenv("STABLEMULT_THREADS", "3", 1);
    const SampledField b = apply_T(f, r, p, q);
    ::unsetenv("STABLEMULT_THREADS");
    CHECK(max_diff(a, b) <= 1e-12 * sup_norm(a));
}

TEST_CASE("Pieces of the t-integral scale with |f'| and ||f||_1", "[multiplier]") {
    const StableParams p{0.6, 1};
    const auto r = MultiplierProfile::one();
    double c_inner[2], c_outer[2];
    for (int level = 0; level < 2; ++level) {
        const GridSpec g{512 << level, 32.0, -16.0};
        const SampledField f = smooth_bump(g, 0.0, 2.0);
        TQuadSpec q = default_quad(GridSpec{512, 32.0, -16.0}, p, r, HPolicy::truncated);
        TQuadSpec lo = q, hi = q;
        lo.t_max = 1.0;
        hi.t_min = 1.0;
        const double grad = sup_norm(spectral_derivative(dft(f), 1));
        c_inner[level] = sup_norm(apply_T(f, r, p, lo)) / grad;
        c_outer[level] = sup_norm(apply_T(f, r, p, hi)) / (norm_p(f, 1.0));
    }
    INFO("inner " << c_inner[0] << " -> " << c_inner[1] << ", outer " << c_outer[0] << " -> " << c_outer[1]);
    CHECK_THAT(c_inner[1], WithinRel(c_inner[0], 0.2));
    CHECK_THAT(c_outer[1], WithinRel(c_outer[0], 0.2));
}

TEST_CASE("G-function", "[multiplier]") {
    const GridSpec g = grid();
    const StableParams p{0.7, 1};
    const TQuadSpec q = default_quad(g, p, MultiplierProfile::one(), HPolicy::truncated);
    CHECK(sup_norm(g_function(SampledField(g, 2.0), p, q)) < 1e-12);
    const SampledField f = smooth_bump(g, 0.0, 2.0);
    SampledField f2 = f;
    for (double& v : f2.values) v *= 2.0;
    const SampledField G = g_function(f, p, q), G2 = g_function(f2, p, q);
    for (int i = 0; i < g.n; ++i) CHECK_THAT(G2[i], WithinAbs(2.0 * G[i], 1e-12 * (1.0 + G[i])));
    double lo = 1e300, hi = 0.0;
    for (double w : {0.5, 1.0, 2.0, 4.0}) {
        const SampledField b = smooth_bump(g, 0.0, w);
        const double ratio = norm_p(g_function(b, p, q), 2.0) / norm_p(b, 2.0);
        CHECK(std::isfinite(ratio));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    INFO("ratio range " << lo << " .. " << hi);
    CHECK(hi / lo < 5.0);
}

TEST_CASE("Pairing identity", "[multiplier][slow]") {
    const GridSpec g = grid();
    const StableParams p{0.6, 1};
    const TQuadSpec q = default_quad(g, p, MultiplierProfile::one(), HPolicy::full);
    const SampledField zero(g), f = smooth_bump(g, 0.0, 2.0), h = gaussian_bump(g, 0.5, 0.8);
    const Pairing z = pairing_check(zero, f, p, q);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    const Pairing ff = pairing_check(f, f, p, q);
    CHECK(ff.lhs > 0.0);
    CHECK(ff.rhs > 0.0);
    CHECK(std::abs(ff.lhs - ff.rhs) <= 0.02 * std::max(ff.lhs, ff.rhs));
    const Pairing fh = pairing_check(f, h, p, q), hf = pairing_check(h, f, p, q);
    CHECK_THAT(fh.rhs, WithinRel(hf.rhs, 1e-5));
    CHECK(std::abs(fh.lhs - fh.rhs) <= 0.02 * std::max(std::abs(fh.lhs), std::abs(fh.rhs)));
}

TEST_CASE("L^p probe", "[multiplier]") {
    // a long period keeps the dropped DC bin's share of the L^2 norm near 1%
    const GridSpec g{2048, 256.0, -128.0};
    const StableParams p{0.5, 1};
    const auto one = MultiplierProfile::one();
    const TQuadSpec q = default_quad(g, p, one, HPolicy::full);
    std::vector<SampledField> dil;
    for (double w : {1.0, 2.0, 3.0}) dil.push_back(smooth_bump(g, 0.0, w));
    const LpReport rep = lp_probe(dil, one, p, q, 2.0);
    for (double v : rep.ratios) CHECK_THAT(v, WithinRel(constant_c(p) / 4.0, 0.05));
    const SampledField b = smooth_bump(g, 0.0, 1.5);
    const LpReport tr = lp_probe({b, translate(b, 37), translate(b, -100)}, MultiplierProfile::exp_decay(), p, q, 3.0);
    CHECK_THAT(tr.max_ratio, WithinRel(tr.min_ratio, 1e-6));
    CHECK_THROWS_AS(lp_probe({SampledField(g)}, one, p, q, 2.0), DomainError);
    CHECK_THROWS_AS(lp_probe(dil, one, p, q, 1.0), DomainError);
}
