#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "harmonic_extension.hpp"
#include "multiplier.hpp"
#include "spectral.hpp"
#include "stable_density.hpp"
#include "stable_mc.hpp"

namespace stablemult {

enum class Suite { fast, full };

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;  // wall time, kept out of the report text
};

struct AcceptanceReport {
    std::vector<CriterionResult> results;

    bool all_pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return !results.empty();
    }

    // one line per criterion; no timings, so equal inputs give equal bytes
    std::string text() const {
        std::string s;
        int passed = 0;
        for (const auto& r : results) {
            char head[64];
            std::snprintf(head, sizeof head, "criterion %2d %s ", r.id, r.pass ? "PASS" : "FAIL");
            s += head + r.name + ": " + r.detail + "\n";
            passed += r.pass;
        }
        s += "summary: " + std::to_string(passed) + "/" + std::to_string(results.size()) + " passed\n";
        return s;
    }
};

namespace acc {

inline std::string g9(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.9g", x);
    return b;
}

inline std::string g3(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.3g", x);
    return b;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

inline std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v = linspace(std::log(a), std::log(b), n);
    for (double& x : v) x = std::exp(x);
    return v;
}

struct Ctx {
    Suite suite = Suite::full;
    std::uint64_t seed = 42;
    bool full() const { return suite == Suite::full; }
    std::uint64_t sub(int k) const { return seed * 1000003ull + static_cast<std::uint64_t>(k); }
};

inline CriterionResult c1_cauchy(const Ctx&) {
    CriterionResult r{1, "Cauchy oracle"};
    const StableParams p{1.0, 1};
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0})
        for (double x : linspace(-20.0, 20.0, 81)) {
            const double ref = s / (std::numbers::pi * (s * s + x * x));
            worst = std::max(worst, std::abs(density(p, s, x) / ref - 1.0));
        }
    r.pass = worst < 1e-6;
    r.detail = "max rel err " + g3(worst) + " (tol 1e-06) over 3 x 81 points";
    return r;
}

inline CriterionResult c2_subordination(const Ctx& c) {
    CriterionResult r{2, "subordination vs Fourier inversion"};
    double worst = 0.0;
    const int m = c.full() ? 21 : 11;
    for (double a : {0.5, 1.0, 1.5})
        for (double x : linspace(-10.0, 10.0, m)) {
            const StableParams p{a, 1};
            const double f = density(p, 1.0, x), s = density_via_subordination(p, Point{x});
            worst = std::max(worst, std::abs(s / f - 1.0));
        }
    r.pass = worst < 1e-4;
    r.detail = "max rel err " + g3(worst) + " (tol 1e-04), alpha in {0.5, 1, 1.5}, " + std::to_string(m) + " points";
    return r;
}

// Richardson-extrapolated central differences of the Fourier-route density.
inline double fd_derivative(const StableParams& p, double x, int k) {
    DensityEvalSpec spec;
    spec.rel_tol = 1e-11;
    auto f = [&](double y) { return density(p, 1.0, y, spec); };
    auto D = [&](double h) {
        if (k == 1) return (f(x + h) - f(x - h)) / (2.0 * h);
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    };
    const double h = 0.02 * std::abs(x);
    return (4.0 * D(h) - D(2.0 * h)) / 3.0;
}

// Relative errors are taken against max(|fd|, 1e-3 min(1, |x|^-k) p): the
// second derivative crosses zero inside the range.
inline CriterionResult c3_derivatives(const Ctx&) {
    CriterionResult r{3, "dimension-lifted derivatives"};
    const int m = 12;
    const std::vector<double> xs = logspace(0.1, 5.0, 2 * m - 1);  // even indices: base grid
    double worst = 0.0;
    bool finite = true;
    std::string fits;
    bool stable = true;
    for (double a : {0.5, 1.0}) {
        const StableParams p{a, 1};
        for (int k = 1; k <= 2; ++k) {
            double c_base = 0.0, c_fine = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double x = xs[i];
                const double d = density_partial(p, 1.0, Point{x}, 1, k);
                const double dens = density(p, 1.0, x);
                const double env = std::min(1.0, std::pow(x, -k)) * dens;
                const double ratio = std::abs(d) / env;
                finite = finite && std::isfinite(ratio);
                c_fine = std::max(c_fine, ratio);
                if (i % 2 == 0) {
                    c_base = std::max(c_base, ratio);
                    const double fd = fd_derivative(p, x, k);
                    worst = std::max(worst, std::abs(d - fd) / std::max(std::abs(fd), 1e-3 * env));
                }
            }
            const double change = std::abs(c_fine / c_base - 1.0);
            stable = stable && change < 0.05;
            fits += " c(alpha=" + g3(a) + ",k=" + std::to_string(k) + ")=" + g9(c_fine) + " (refinement change " +
                    g3(change) + ")";
        }
    }
    r.pass = worst < 1e-4 && finite && stable;
    r.detail = "max rel err vs finite differences " + g3(worst) + " (tol 1e-04);" + fits;
    return r;
}

inline CriterionResult c4_envelope(const Ctx& c) {
    CriterionResult r{4, "two-sided envelope"};
    const int ns = c.full() ? 9 : 5, nx = c.full() ? 41 : 21;
    bool pass = true;
    std::string parts;
    for (double a : {0.5, 1.0, 1.5}) {
        const StableParams p{a, 1};
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double s : logspace(0.1, 10.0, ns))
            for (double x : linspace(0.0, 100.0, nx)) {
                const double q = density(p, s, x) / envelope(p, s, Point{x});
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
        pass = pass && lo > 0.0 && hi / lo < 1e3;
        parts += " alpha=" + g3(a) + ": c1=" + g9(lo) + " c2=" + g9(hi) + " c2/c1=" + g9(hi / lo) + ";";
    }
    r.pass = pass;
    r.detail = "ratio bounds (c2/c1 < 1e3):" + parts;
    return r;
}

// Window L = c_alpha t^(2/alpha): wide enough that periodization is small at
// the 4th bin, short enough that the slowly decaying symbol is not aliased.
inline double symbol_window(double alpha, double t) { return (alpha < 0.75 ? 0.54 : 64.0) * std::pow(t, 2.0 / alpha); }

inline CriterionResult c5_symbol(const Ctx&) {
    CriterionResult r{5, "kernel symbol identity"};
    const int n = 1024;
    double worst = 0.0;
    std::string parts;
    for (double a : {0.5, 1.0})
        for (double t : {0.5, 1.0}) {
            const double L = symbol_window(a, t);
            const GridSpec g{n, L, -L / 2};
            const StableParams p{a, 1};
            const Spectrum s = dft(sample_kernel(g, p, t));
            double e = 0.0;
            for (int k = 4; k <= n / 4; ++k)
                e = std::max(e, std::abs(s.coeffs[k].real() * g.spacing() - qt_symbol(p, t, g.frequency(k))));
            worst = std::max(worst, e);
            parts += " (" + g3(a) + "," + g3(t) + ",L=" + g9(L) + "):" + g3(e);
        }
    r.pass = worst < 1e-3;
    r.detail = "max abs err on bins 4..n/4 " + g3(worst) + " (tol 1e-03); per (alpha,t):" + parts;
    return r;
}

struct RatioCheck {
    double worst = 0.0;      // max relative error against the reference
    double mean_ratio = 0.0; // mean of DFT(Tf)/DFT(f) over the band
    double spread = 0.0;     // (max - min) / mean of the ratio
};

inline RatioCheck band_ratio(const SampledField& f, const SampledField& Tf, const std::function<double(double)>& ref) {
    const Spectrum F = dft(f), T = dft(Tf);
    const int n = f.grid.n;
    RatioCheck rc;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    int cnt = 0;
    for (int k = 4; k <= n / 4; ++k) {
        const double q = (T.coeffs[k] / F.coeffs[k]).real();
        rc.worst = std::max(rc.worst, std::abs(q / ref(f.grid.frequency(k)) - 1.0));
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        sum += q;
        ++cnt;
    }
    rc.mean_ratio = sum / cnt;
    rc.spread = (hi - lo) / rc.mean_ratio;
    return rc;
}

inline GridSpec operator_grid() { return GridSpec{1024, 64.0, -32.0}; }

// smooth bump of half-width L/16, so its support is 1/8 of the period
inline SampledField operator_bump(const GridSpec& g) { return smooth_bump(g, 0.0, g.length / 16.0); }

inline CriterionResult c6_multiplier(const Ctx&) {
    CriterionResult r{6, "multiplier reproduction (full policy, r = exp(-t))"};
    const GridSpec g = operator_grid();
    const SampledField f = operator_bump(g);
    const auto prof = MultiplierProfile::exp_decay();
    double worst = 0.0;
    std::string parts;
    for (double a : {0.5, 0.7}) {
        const StableParams p{a, 1};
        const double cst = constant_c(p);
        const auto Tf = apply_T(f, prof, p, default_quad(g, p, prof, HPolicy::full));
        const auto rc = band_ratio(f, Tf, [&](double xi) {
            const double ax = std::abs(xi);
            return cst * std::pow(ax, a) / std::pow(1.0 + 2.0 * std::pow(ax, a / 2.0), 2.0);
        });
        worst = std::max(worst, rc.worst);
        parts += " alpha=" + g3(a) + ": " + g3(rc.worst) + ";";
    }
    r.pass = worst < 0.02;
    r.detail = "max rel err vs c|xi|^a (1 + 2|xi|^(a/2))^-2 " + g3(worst) + " (tol 0.02);" + parts;
    return r;
}

inline CriterionResult c7_constant(const Ctx&) {
    CriterionResult r{7, "constant symbol (full policy, r = 1)"};
    const GridSpec g = operator_grid();
    const SampledField f = operator_bump(g);
    const auto prof = MultiplierProfile::one();
    bool pass = true;
    std::string parts;
    for (double a : {0.5, 0.7}) {
        const StableParams p{a, 1};
        const double target = constant_c(p) / 4.0;
        const auto Tf = apply_T(f, prof, p, default_quad(g, p, prof, HPolicy::full));
        const auto rc = band_ratio(f, Tf, [&](double) { return target; });
        const double off = std::abs(rc.mean_ratio / target - 1.0);
        pass = pass && rc.spread < 0.02 && off < 0.02;
        parts += " alpha=" + g3(a) + ": spread " + g3(rc.spread) + ", mean/(c/4) - 1 = " + g3(rc.mean_ratio / target - 1.0) +
                 ";";
    }
    const double c1 = constant_c(StableParams{1.0, 1});
    const double e1 = std::abs(c1 / (2.0 * std::numbers::pi) - 1.0);
    pass = pass && e1 < 0.005;
    r.pass = pass;
    r.detail = "tol 0.02;" + parts + " c(alpha=1)=" + g9(c1) + " vs 2pi rel err " + g3(e1) + " (tol 0.005)";
    return r;
}

inline CriterionResult c8_truncated(const Ctx&) {
    CriterionResult r{8, "truncated operator vs truncated symbol"};
    const GridSpec g = operator_grid();
    const SampledField f = operator_bump(g);
    double worst = 0.0;
    std::string parts;
    for (double a : {0.5, 0.7})
        for (const auto& prof : {MultiplierProfile::exp_decay(), MultiplierProfile::one()}) {
            const StableParams p{a, 1};
            const auto q = default_quad(g, p, prof, HPolicy::truncated);
            const auto Tf = apply_T(f, prof, p, q);
            const auto rc = band_ratio(f, Tf, [&](double xi) { return symbol_m_truncated(xi, prof, p, q); });
            worst = std::max(worst, rc.worst);
            parts += std::string(" alpha=") + g3(a) + (prof.kind == RKind::constant_one ? " r=1: " : " r=exp: ") + g3(rc.worst) + ";";
        }
    r.pass = worst < 0.02;
    r.detail = "max rel err " + g3(worst) + " (tol 0.02);" + parts;
    return r;
}

inline CriterionResult c9_pairing(const Ctx& c) {
    CriterionResult r{9, "pairing identity"};
    const GridSpec g = operator_grid();
    const SampledField f1 = smooth_bump(g, 0.0, 2.0), f2 = smooth_bump(g, 1.0, 3.0), f3 = gaussian_bump(g, -1.0, 0.75),
                       f4 = smooth_bump(g, 2.0, 1.5);
    struct Case {
        const SampledField *f, *g;
        double alpha;
    };
    const std::vector<Case> cases{{&f1, &f1, 0.5}, {&f1, &f2, 0.5}, {&f3, &f2, 0.5}, {&f2, &f4, 0.7}, {&f3, &f3, 0.7}};
    const HPolicy pol = c.full() ? HPolicy::truncated : HPolicy::full;
    double worst = 0.0;
    std::string parts;
    for (const auto& cs : cases) {
        const StableParams p{cs.alpha, 1};
        const auto pr = pairing_check(*cs.f, *cs.g, p, default_quad(g, p, MultiplierProfile::one(), pol));
        const double e = std::abs(pr.lhs / pr.rhs - 1.0);
        worst = std::max(worst, e);
        parts += " " + g9(pr.lhs) + "/" + g9(pr.rhs) + ";";
    }
    r.pass = worst < 0.02;
    r.detail = std::string(pol == HPolicy::full ? "full" : "truncated") + " policy, max |lhs/rhs - 1| " + g3(worst) +
               " (tol 0.02); lhs/rhs:" + parts;
    return r;
}

inline CriterionResult c10_exit_law(const Ctx& c) {
    CriterionResult r{10, "exit-time law"};
    bool pass = true;
    std::string parts;
    for (double a : {0.5, 1.0}) {
        const auto cfg = PathConfig::make(StableParams{1.0, 1}, Point{0.0}, a, 1e-3, c.sub(10));
        const KsReport k = exit_time_ks(cfg, 100000);
        pass = pass && k.ks < 0.01;
        parts += " a=" + g3(a) + ": KS " + g9(k.ks) + " (censored " + std::to_string(k.censored) + ");";
    }
    r.pass = pass;
    r.detail = "n = 1e5, dt = 1e-3, tol 0.01;" + parts;
    return r;
}

inline CriterionResult c11_green(const Ctx& c) {
    CriterionResult r{11, "vertical Green identity"};
    const auto c1 = PathConfig::make(StableParams{1.0, 1}, Point{0.0}, 1.0, 1e-3, c.sub(11));
    const auto e1 = green_functional(c1, [](double s) { return std::exp(-s); }, 100000);
    const double ref1 = 1.0 - std::exp(-1.0);
    const auto c2 = PathConfig::make(StableParams{1.0, 1}, Point{0.0}, 2.0, 1e-3, c.sub(11) + 1);
    const auto e2 = green_functional(c2, [](double s) { return s <= 1.0 ? 1.0 : 0.0; }, 100000);
    const double ref2 = 0.5;
    const double z1 = std::abs(e1.mean - ref1) / e1.std_error, z2 = std::abs(e2.mean - ref2) / e2.std_error;
    r.pass = z1 <= 3.0 && z2 <= 3.0;
    r.detail = "exp(-s), a=1: " + g9(e1.mean) + " +- " + g9(e1.std_error) + " vs " + g9(ref1) + " (" + g3(z1) +
               " se); 1[0,1], a=2: " + g9(e2.mean) + " +- " + g9(e2.std_error) + " vs 0.5 (" + g3(z2) + " se); tol 3 se";
    return r;
}

inline CriterionResult c12_harmonic(const Ctx& c) {
    CriterionResult r{12, "harmonic identity"};
    const GridSpec g = operator_grid();
    const SampledField f = smooth_bump(g, 0.0, 4.0);
    const auto cfg = PathConfig::make(StableParams{1.0, 1}, Point{0.0}, 1.0, 1e-3, c.sub(12));
    const auto h = harmonic_check(cfg, f, 100000);
    const double gap = std::abs(h.mc.mean - h.analytic), tol = 3.0 * h.mc.std_error + 1e-2;
    r.pass = gap <= tol;
    r.detail = "mc " + g9(h.mc.mean) + " +- " + g9(h.mc.std_error) + " vs extend " + g9(h.analytic) + ", gap " + g3(gap) +
               " (tol " + g3(tol) + ")";
    return r;
}

inline CriterionResult c13_quadratic_variation(const Ctx& c) {
    CriterionResult r{13, "pathwise [U] <= [M]"};
    const GridSpec g = operator_grid();
    const SampledField f = smooth_bump(g, 0.0, 4.0);
    const auto cfg = PathConfig::make(StableParams{0.7, 1}, Point{0.0}, 1.0, 1e-3, c.sub(13));
    long long violations = 0, kept = 0;
    double small = 0.0;
    try {
        const auto rep = jump_martingale_stats(cfg, f, 100000, 2.0);
        kept = rep.abs_u_p.n;
        small = rep.small_fraction;
    } catch (const AccuracyError& e) {
        violations = static_cast<long long>(e.residual);
    }
    const StableParams one{1.0, 1};
    const bool boundary = classify_jump(1.0, 1.0, one) == JumpClass::large &&
                          classify_jump(0.5, 1.0, one) == JumpClass::small &&
                          classify_jump(1e-300, 0.0, one) == JumpClass::large;
    r.pass = violations == 0 && kept > 0 && boundary;
    r.detail = "violations " + std::to_string(violations) + " on 1e5 paths (" + std::to_string(kept) +
               " exited), small-step share " + g9(small) + "; boundary |dy| = threshold -> " +
               (boundary ? "large" : "WRONG");
    return r;
}

inline CriterionResult c14_lp(const Ctx&) {
    CriterionResult r{14, "L^p probe"};
    const GridSpec g = operator_grid();
    std::vector<SampledField> fam;
    for (double w : {1.0, 2.0, 4.0})
        for (int shift : {0, 157}) fam.push_back(translate(smooth_bump(g, 0.0, w), shift));
    const auto prof = MultiplierProfile::exp_decay();
    bool pass = true;
    std::string parts;
    for (double a : {0.5, 0.7}) {
        const StableParams p{a, 1};
        const auto q = default_quad(g, p, prof, HPolicy::truncated);
        std::vector<SampledField> Tf;
        for (const auto& f : fam) Tf.push_back(apply_T(f, prof, p, q));
        for (double pp : {1.5, 2.0, 3.0}) {
            std::vector<double> ratios;
            for (std::size_t i = 0; i < fam.size(); ++i) ratios.push_back(norm_p(Tf[i], pp) / norm_p(fam[i], pp));
            double lo = ratios[0], hi = ratios[0], trans = 0.0;
            for (std::size_t i = 0; i < ratios.size(); ++i) {
                lo = std::min(lo, ratios[i]);
                hi = std::max(hi, ratios[i]);
                if (i % 2) trans = std::max(trans, std::abs(ratios[i] / ratios[i - 1] - 1.0));
            }
            pass = pass && hi / lo < 5.0 && trans < 1e-6;
            parts += " (a=" + g3(a) + ",p=" + g3(pp) + "): " + g9(lo) + ".." + g9(hi) + ", shift " + g3(trans) + ";";
        }
    }
    r.pass = pass;
    r.detail = "ratio max/min < 5, translation change < 1e-6;" + parts;
    return r;
}

// The Monte Carlo part of the suite, reduced, run twice on one worker and
// once on three; all three renderings must match byte for byte.
inline std::string mc_fingerprint(std::uint64_t seed) {
    const GridSpec g = operator_grid();
    const SampledField f = smooth_bump(g, 0.0, 4.0);
    const auto cfg = PathConfig::make(StableParams{0.7, 1}, Point{0.3}, 1.0, 1e-3, seed);
    char b[512];
    const auto k = exit_time_ks(cfg, 4000);
    const auto e = green_functional(cfg, [](double s) { return std::exp(-s); }, 4000);
    const auto h = harmonic_check(cfg, f, 4000);
    const auto j = jump_martingale_stats(cfg, f, 2000, 2.0);
    const auto rec = simulate_until_exit(cfg);
    std::snprintf(b, sizeof b, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %lld %.17g", k.ks, e.mean, e.std_error, h.mc.mean,
                  j.abs_u_p.mean, j.mean_u_qv, j.mean_m_qv, rec.exit_step, rec.exit_time);
    return b;
}

inline CriterionResult c15_determinism(const Ctx& c) {
    CriterionResult r{15, "determinism"};
    const char* prev = std::getenv("STABLEMULT_THREADS");
    const std::string saved = prev ? prev : "";
    setenv("STABLEMULT_THREADS", "1", 1);
    const std::string a = mc_fingerprint(c.sub(15)), b = mc_fingerprint(c.sub(15));
    setenv("STABLEMULT_THREADS", "3", 1);
    const std::string t3 = mc_fingerprint(c.sub(15));
    if (prev)
        setenv("STABLEMULT_THREADS", saved.c_str(), 1);
    else
        unsetenv("STABLEMULT_THREADS");
    r.pass = a == b && a == t3;
    r.detail = std::string("repeat ") + (a == b ? "identical" : "DIFFERS") + ", 1 vs 3 workers " +
               (a == t3 ? "identical" : "DIFFERS") + " (this report is itself seed-determined)";
    return r;
}

} // namespace acc

inline std::vector<int> all_criteria() {
    std::vector<int> v;
    for (int i = 1; i <= 15; ++i) v.push_back(i);
    return v;
}

// Runs the selected criteria; progress (with timings) goes to `log` if set.
// Runtime limits of criteria 1, 2, 6 and 10 are checked here.
inline AcceptanceReport run_acceptance(Suite suite, std::uint64_t seed, const std::vector<int>& ids = all_criteria(),
                                       const std::function<void(const CriterionResult&)>& log = {}) {
    using Fn = CriterionResult (*)(const acc::Ctx&);
    static const Fn table[] = {nullptr,
                               acc::c1_cauchy,
                               acc::c2_subordination,
                               acc::c3_derivatives,
                               acc::c4_envelope,
                               acc::c5_symbol,
                               acc::c6_multiplier,
                               acc::c7_constant,
                               acc::c8_truncated,
                               acc::c9_pairing,
                               acc::c10_exit_law,
                               acc::c11_green,
                               acc::c12_harmonic,
                               acc::c13_quadratic_variation,
                               acc::c14_lp,
                               acc::c15_determinism};
    const double limits[] = {0, 1.0, 10.0, 0, 0, 0, 60.0, 0, 0, 0, 60.0, 0, 0, 0, 0, 0};
    const acc::Ctx ctx{suite, seed};
    AcceptanceReport rep;
    for (int id : ids) {
        require(id >= 1 && id <= 15, "criterion id must lie in [1, 15]");
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = table[id](ctx);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "criterion " + std::to_string(id);
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (limits[id] > 0.0) {
            const bool fast_enough = r.seconds < limits[id];
            r.pass = r.pass && fast_enough;
            r.detail += "; runtime " + std::string(fast_enough ? "within " : "OVER ") + acc::g3(limits[id]) + " s";
        }
        if (log) log(r);
        rep.results.push_back(std::move(r));
    }
    return rep;
}

} // namespace stablemult
