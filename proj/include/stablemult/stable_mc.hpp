#pragma once

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "harmonic_extension.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "stable_density.hpp"

namespace stablemult {

// One engine per (seed, path index); the Boost distributions are portable, so
// a stream depends on nothing but its key.
using Rng = std::mt19937_64;

inline Rng path_rng(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0x5eedu};
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return boost::random::uniform_01<double>()(rng); }
inline double std_normal(Rng& rng) { return boost::random::normal_distribution<double>()(rng); }
inline double std_exponential(Rng& rng) { return boost::random::exponential_distribution<double>()(rng); }

// Standard symmetric stable variate, E exp(i xi S) = exp(-|xi|^alpha)
// (Chambers-Mallows-Stuck).
inline double symmetric_stable(double alpha, Rng& rng) {
    const double v = std::numbers::pi * (uniform01(rng) - 0.5);
    if (alpha == 1.0) return std::tan(v);
    const double w = std_exponential(rng);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

// Positive beta-stable variate with E exp(-lambda A) = exp(-lambda^beta) (Kanter).
inline double positive_stable(double beta, Rng& rng) {
    double u;
    do u = uniform01(rng);
    while (u == 0.0);
    const double w = std_exponential(rng), pi = std::numbers::pi;
    const double a = std::pow(std::sin(beta * pi * u), beta / (1.0 - beta)) * std::sin((1.0 - beta) * pi * u) /
                     std::pow(std::sin(pi * u), 1.0 / (1.0 - beta));
    return std::pow(a / w, (1.0 - beta) / beta);
}

// Draw with characteristic function exp(-dt |xi|^alpha). d = 1 uses CMS;
// d >= 2 scales a Gaussian by a positive (alpha/2)-stable time:
// E exp(-A dt^(2/alpha) |xi|^2) = exp(-dt |xi|^alpha).
inline Point sample_stable_increment(const StableParams& params, double dt, Rng& rng) {
    require(dt > 0.0, "time step must be positive");
    const double a = params.alpha;
    if (params.d == 1) return Point{std::pow(dt, 1.0 / a) * symmetric_stable(a, rng)};
    const double A = positive_stable(a / 2.0, rng) * std::pow(dt, 2.0 / a);
    Point y(params.d);
    for (double& v : y) v = std::sqrt(2.0 * A) * std_normal(rng);
    return y;
}

// Vertical increment: variance 2 dt, matching the generator d^2/dz^2.
inline double sample_bm_increment(double dt, Rng& rng) {
    require(dt > 0.0, "time step must be positive");
    return std::sqrt(2.0 * dt) * std_normal(rng);
}

struct PathConfig {
    StableParams params;
    Point start_x{0.0};
    double a = 1.0;
    double dt = 1e-3;
    long long max_steps = 0;
    std::uint64_t seed = 0;
    // Away from the boundary the step grows to (z/step_ratio)^2.
    double step_ratio = 4.0;

    // Horizon with exit probability >= 1 - 1e-6.
    static long long default_max_steps(double a, double dt) {
        const double u = 1e-6 * std::sqrt(std::numbers::pi) / 2.0;  // erf(u) = 1e-6
        const double horizon = a * a / (4.0 * u * u);
        return static_cast<long long>(std::min(std::ceil(horizon / dt), 9e18));
    }

    static PathConfig make(const StableParams& p, Point x, double a, double dt, std::uint64_t seed) {
        PathConfig c;
        c.params = p;
        c.start_x = std::move(x);
        c.a = a;
        c.dt = dt;
        c.seed = seed;
        c.max_steps = default_max_steps(a, dt);
        return c;
    }

    double horizon() const { return static_cast<double>(max_steps) * dt; }

    void validate() const {
        params.validate();
        require(static_cast<int>(start_x.size()) == params.d, "start_x dimension does not match d");
        for (double v : start_x) require(std::isfinite(v), "start_x must be finite");
        require(a > 0.0 && std::isfinite(a), "start height a must be positive");
        require(dt > 0.0 && std::isfinite(dt), "time step dt must be positive");
        require(step_ratio >= 1.0, "step_ratio must be at least 1");
        require(max_steps > 0, "max_steps must be positive");
        require(exit_cdf(a, horizon()) >= 1.0 - 1e-4,
                "max_steps * dt too short: exit probability " + std::to_string(exit_cdf(a, horizon())) +
                    " < 1 - 1e-4");
    }
};

enum class JumpClass { small, large };

// small iff |delta_y| < |z|^(2/alpha); ties go to large
inline JumpClass classify_jump(const Point& delta_y, double z, const StableParams& params) {
    return norm(delta_y) < std::pow(std::abs(z), 2.0 / params.alpha) ? JumpClass::small : JumpClass::large;
}

inline JumpClass classify_jump(double delta_y, double z, const StableParams& params) {
    return classify_jump(Point{delta_y}, z, params);
}

struct JumpRecord {
    long long step = 0;
    Point delta_y;
    double z_value = 0.0;
    JumpClass classification = JumpClass::large;
};

struct ExitRecord {
    long long exit_step = 0;
    double exit_time = 0.0;
    Point exit_position;
    std::vector<JumpRecord> jumps;
    double u_quadratic_variation = 0.0;
    double m_quadratic_variation = 0.0;
};

struct NonExitError : std::runtime_error {
    NonExitError(const std::string& what, ExitRecord partial) : std::runtime_error(what), partial(std::move(partial)) {}
    ExitRecord partial;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n = 0;
    long long excluded = 0;  // non-exit paths left out
};

namespace detail {

// A piece of the vertical path known not to touch 0.
struct ZSegment {
    double t0, z0, h, z1;
};

// probability that a bridge of variance 2 per unit time from z0 to z1 over h
// touches 0
inline double crossing_probability(double z0, double z1, double h) {
    if (z0 <= 0.0 || z1 <= 0.0) return 1.0;
    return std::exp(-z0 * z1 / h);
}

// Bridge value at the midpoint of (z0, z1) over h.
inline double bridge_midpoint(double z0, double z1, double h, Rng& rng) {
    return 0.5 * (z0 + z1) + std::sqrt(0.5 * h) * std_normal(rng);
}

// Locates the first zero inside a step known to contain one. The midpoint is
// drawn from the bridge conditioned on a crossing, then the half holding the
// first crossing is chosen with the right odds; at dt resolution the time is
// interpolated linearly (through -z1 when the end sits above 0).
template <class Visit>
double locate_exit(double t0, double z0, double h, double z1, double dt, Rng& rng, Visit& visit) {
    for (;;) {
        if (h <= dt * (1.0 + 1e-12)) {
            const double zb = z1 <= 0.0 ? z1 : -z1;
            return t0 + h * z0 / (z0 - zb);
        }
        const double half = 0.5 * h;
        double zm = 0.0, p1 = 1.0, p2 = 1.0;
        for (int tries = 0;; ++tries) {
            zm = bridge_midpoint(z0, z1, h, rng);
            p1 = crossing_probability(z0, zm, half);
            p2 = crossing_probability(zm, z1, half);
            const double any = 1.0 - (1.0 - p1) * (1.0 - p2);
            if (uniform01(rng) < any || tries > 100000) break;
        }
        const double den = p1 + (1.0 - p1) * p2;
        const double first = den > 0.0 ? p1 / den : 0.5;
        if (uniform01(rng) < first) {
            h = half;
            z1 = zm;
        } else {
            visit(ZSegment{t0, z0, half, zm});
            t0 += half;
            z0 = zm;
            h = half;
        }
    }
}

// Runs the vertical motion from a until it hits 0 and returns T0. Steps of
// max(dt, (z/ratio)^2) are exact in law; a crossing inside a step is detected
// with the Brownian-bridge probability exp(-z0 z1 / h) and then localized by
// conditioned midpoint refinement. Every zero-free segment is passed to visit
// in time order; the crossing step's zero-free head is not (it is shorter
// than dt).
template <class Visit>
double run_vertical(const PathConfig& c, Rng& rng, Visit&& visit, double& last_z, double& last_t) {
    const double horizon = c.horizon();
    double t = 0.0, z = c.a;
    for (;;) {
        const double h = std::max(c.dt, (z / c.step_ratio) * (z / c.step_ratio));
        if (t + h > horizon) {
            last_z = z;
            last_t = t;
            return std::numeric_limits<double>::infinity();
        }
        const double z1 = z + sample_bm_increment(h, rng);
        const double pc = crossing_probability(z, z1, h);
        if (pc >= 1.0 || uniform01(rng) < pc) {
            double t_exit = locate_exit(t, z, h, z1, c.dt, rng, visit);
            last_z = 0.0;
            last_t = t_exit;
            return t_exit;
        }
        visit(ZSegment{t, z, h, z1});
        t += h;
        z = z1;
    }
}

// A point of a zero-free segment at a uniform time, drawn from the bridge
// conditioned to stay positive (rejection on the two half-bridge crossing
// probabilities). h * g(point) is unbiased for the segment's integral of g.
inline double segment_point(const ZSegment& s, Rng& rng) {
    const double u = s.h * uniform01(rng);
    const double mean = s.z0 + (s.z1 - s.z0) * u / s.h;
    const double sd = std::sqrt(2.0 * u * (s.h - u) / s.h);
    double zm = mean;
    for (int tries = 0; tries < 10000; ++tries) {
        zm = mean + sd * std_normal(rng);
        if (zm <= 0.0) continue;
        const double keep = (1.0 - crossing_probability(s.z0, zm, u)) * (1.0 - crossing_probability(zm, s.z1, s.h - u));
        if (uniform01(rng) < keep) return zm;
    }
    return std::max(mean, 0.0);
}

// deterministic mean and standard error over the finite entries, index order
inline MCEstimate estimate(const std::vector<double>& v) {
    MCEstimate e;
    double s = 0.0;
    for (double x : v) {
        if (std::isnan(x)) {
            ++e.excluded;
            continue;
        }
        s += x;
        ++e.n;
    }
    if (e.n == 0) return e;
    e.mean = s / e.n;
    double ss = 0.0;
    for (double x : v)
        if (!std::isnan(x)) ss += (x - e.mean) * (x - e.mean);
    e.std_error = e.n > 1 ? std::sqrt(ss / (e.n - 1) / e.n) : 0.0;
    return e;
}

template <class Task>
void for_paths(long long n_paths, Task&& task) {
    parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t i) { task(static_cast<long long>(i)); });
}

inline void require_paths(long long n_paths) { require(n_paths >= 1, "n_paths must be at least 1"); }

} // namespace detail

// One path: vertical motion to its first zero, with an exact-law stable
// increment per step recorded as that step's jump. The proxy for the
// martingale increments is |delta_y| itself.
inline ExitRecord simulate_until_exit(const PathConfig& config, Rng& rng) {
    config.validate();
    ExitRecord rec;
    Point y = config.start_x;
    auto step = [&](double h, double z_post) {
        const Point dy = sample_stable_increment(config.params, h, rng);
        for (int j = 0; j < config.params.d; ++j) y[j] += dy[j];
        JumpRecord jr{rec.exit_step++, dy, z_post, classify_jump(dy, z_post, config.params)};
        const double q = norm(dy) * norm(dy);
        rec.m_quadratic_variation += q;
        if (jr.classification == JumpClass::small) rec.u_quadratic_variation += q;
        rec.jumps.push_back(std::move(jr));
    };
    double t_done = 0.0;
    auto visit = [&](const detail::ZSegment& s) {
        step(s.h, s.z1);
        t_done = s.t0 + s.h;
    };
    double last_z = 0.0, last_t = 0.0;
    const double t0 = detail::run_vertical(config, rng, visit, last_z, last_t);
    if (!std::isfinite(t0)) {
        rec.exit_time = last_t;
        rec.exit_position = y;
        throw NonExitError("path did not exit within max_steps * dt = " + std::to_string(config.horizon()), rec);
    }
    if (t0 > t_done) step(t0 - t_done, 0.0);
    rec.exit_time = t0;
    rec.exit_position = y;
    return rec;
}

inline ExitRecord simulate_until_exit(const PathConfig& config) {
    Rng rng = path_rng(config.seed, 0);
    return simulate_until_exit(config, rng);
}

// Exit time only; the horizontal position, if wanted, is drawn at the end
// from the exact law of Y over [0, T0].
struct ExitSample {
    double time = std::numeric_limits<double>::infinity();
    Point position;
};

inline ExitSample sample_exit(const PathConfig& config, Rng& rng, bool with_position) {
    ExitSample out;
    double last_z = 0.0, last_t = 0.0;
    out.time = detail::run_vertical(config, rng, [](const detail::ZSegment&) {}, last_z, last_t);
    if (with_position && std::isfinite(out.time)) {
        out.position = config.start_x;
        const Point dy = sample_stable_increment(config.params, out.time, rng);
        for (int j = 0; j < config.params.d; ++j) out.position[j] += dy[j];
    }
    return out;
}

struct KsReport {
    double ks = 0.0;
    long long n = 0;
    long long censored = 0;
};

// KS distance of sorted samples against a continuous cdf; values beyond the
// horizon (+inf) count toward the total but never toward the empirical cdf.
inline KsReport ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    KsReport r;
    r.n = static_cast<long long>(samples.size());
    require(r.n > 0, "KS distance needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(r.n);
    for (long long i = 0; i < r.n; ++i) {
        const double x = samples[i];
        if (!std::isfinite(x)) {
            ++r.censored;
            continue;
        }
        const double F = cdf(x);
        r.ks = std::max({r.ks, std::abs(F - i / n), std::abs((i + 1) / n - F)});
    }
    // the cdf keeps rising past the last finite sample
    if (r.censored) r.ks = std::max(r.ks, 1.0 - (r.n - r.censored) / n);
    return r;
}

// Empirical exit-time law against erfc(a / (2 sqrt(s))).
inline KsReport exit_time_ks(const PathConfig& config, long long n_paths) {
    config.validate();
    detail::require_paths(n_paths);
    std::vector<double> t(n_paths);
    detail::for_paths(n_paths, [&](long long i) {
        Rng rng = path_rng(config.seed, i);
        t[i] = sample_exit(config, rng, false).time;
    });
    return ks_distance(std::move(t), [&](double s) { return exit_cdf(config.a, s); });
}

// E^a int_0^T0 f(Z_s) ds. Each zero-free segment contributes h f at a
// uniformly placed bridge point; the sub-dt step that reaches 0 uses the
// trapezoid rule from the last recorded height.
inline MCEstimate green_functional(const PathConfig& config, const std::function<double(double)>& f, long long n_paths) {
    config.validate();
    detail::require_paths(n_paths);
    std::vector<double> v(n_paths);
    detail::for_paths(n_paths, [&](long long i) {
        Rng rng = path_rng(config.seed, i);
        double acc = 0.0, t_done = 0.0, z_done = config.a;
        auto visit = [&](const detail::ZSegment& s) {
            acc += s.h * f(detail::segment_point(s, rng));
            t_done = s.t0 + s.h;
            z_done = s.z1;
        };
        double last_z = 0.0, last_t = 0.0;
        const double t0 = detail::run_vertical(config, rng, visit, last_z, last_t);
        if (!std::isfinite(t0)) {
            v[i] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        acc += 0.5 * (t0 - t_done) * (f(z_done) + f(0.0));
        v[i] = acc;
    });
    return detail::estimate(v);
}

// int_0^inf min(s, a) f(s) ds over [0, upper] with breaks at a and any extra
// points (discontinuities of f); the tail beyond upper is dropped.
inline double green_reference(const std::function<double(double)>& f, double a, std::vector<double> extra = {},
                              double upper = 0.0) {
    require(a > 0.0, "start height a must be positive");
    if (upper <= 0.0) upper = 200.0 * std::max(1.0, a);
    std::vector<double> br{0.0, a, upper};
    for (double x : extra)
        if (x > 0.0 && x < upper) br.push_back(x);
    for (double x = 2.0 * a; x < upper; x *= 2.0) br.push_back(x);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return gk_panels([&](double s) { return std::min(s, a) * f(s); }, br, 1e-12).value;
}

struct HarmonicCheck {
    MCEstimate mc;
    double analytic = 0.0;
};

// E f(Y_T0) from (start_x, a) against extend(f, a) at start_x; f is read
// periodically on its grid.
inline HarmonicCheck harmonic_check(const PathConfig& config, const SampledField& f, long long n_paths) {
    config.validate();
    f.validate();
    detail::require_paths(n_paths);
    require(config.params.d == 1, "harmonic_check runs on one-dimensional grids");
    std::vector<double> v(n_paths);
    detail::for_paths(n_paths, [&](long long i) {
        Rng rng = path_rng(config.seed, i);
        const ExitSample e = sample_exit(config, rng, true);
        v[i] = std::isfinite(e.time) ? f.at(e.position[0]) : std::numeric_limits<double>::quiet_NaN();
    });
    HarmonicCheck out;
    out.mc = detail::estimate(v);
    out.analytic = extend(f, config.params, config.a).at(config.start_x[0]);
    return out;
}

// F(y, z) = extend(f, z)(y) on geometric z levels (four per octave) from
// z_min, linear in log z between levels and in z below z_min; above the top
// level only the mean survives.
class ExtensionTable {
public:
    ExtensionTable(const SampledField& f, const StableParams& params, double z_min = 1e-3) : f_(f), z_min_(z_min) {
        f.validate();
        mean_ = grid_sum(f) / f.grid.n;
        const double lam = std::pow(2.0 * std::numbers::pi / f.grid.length, params.alpha / 2.0);
        const double z_max = 30.0 / lam;
        for (double z = z_min; z < z_max * std::pow(2.0, 0.25); z *= std::pow(2.0, 0.25)) {
            z_.push_back(z);
            levels_.push_back(extend(f, params, z));
        }
    }

    double operator()(double y, double z) const {
        z = std::abs(z);
        if (z >= z_.back()) return mean_;
        if (z <= z_min_) {
            const double w = z / z_min_;
            return (1.0 - w) * f_.at(y) + w * levels_[0].at(y);
        }
        const double u = std::log(z / z_min_) / std::log(std::pow(2.0, 0.25));
        const std::size_t i = std::min(static_cast<std::size_t>(u), z_.size() - 2);
        const double w = u - static_cast<double>(i);
        return (1.0 - w) * levels_[i].at(y) + w * levels_[i + 1].at(y);
    }

private:
    SampledField f_;
    double z_min_, mean_ = 0.0;
    std::vector<double> z_;
    std::vector<SampledField> levels_;
};

struct JumpMartingaleReport {
    double p = 2.0;
    long long n_paths = 0;
    long long excluded = 0;
    long long qv_violations = 0;
    MCEstimate abs_u_p;           // E |U|^p per path
    double ratio = 0.0;           // |W| E|U|^p / ||f||_p^p, the start point uniform on W
    double mean_u_qv = 0.0, mean_m_qv = 0.0;
    double small_fraction = 0.0;  // share of steps classified small
};

// Small-jump functional U = sum over small steps of F(Y_k, Z_k) - F(Y_(k-1), Z_k)
// with F the extension of f at the post-step height; [U] and [M] are the sums
// of squared increments over small and over all steps. Start points are
// uniform on the grid window (the finite stand-in for m(dx)).
inline JumpMartingaleReport jump_martingale_stats(const PathConfig& config, const SampledField& f, long long n_paths,
                                                  double p) {
    config.validate();
    f.validate();
    detail::require_paths(n_paths);
    require(config.params.d == 1, "jump_martingale_stats runs on one-dimensional grids");
    require(p > 1.0, "p must exceed 1");
    const ExtensionTable F(f, config.params);
    std::vector<double> up(n_paths), uq(n_paths), mq(n_paths), small(n_paths), steps(n_paths);
    detail::for_paths(n_paths, [&](long long i) {
        Rng rng = path_rng(config.seed, i);
        double y = f.grid.origin + f.grid.length * uniform01(rng);
        double U = 0.0, u_qv = 0.0, m_qv = 0.0;
        long long n_small = 0, n_steps = 0;
        auto step = [&](double h, double z) {
            const double dy = std::pow(h, 1.0 / config.params.alpha) * symmetric_stable(config.params.alpha, rng);
            const double inc = F(y + dy, z) - F(y, z);
            m_qv += inc * inc;
            if (classify_jump(dy, z, config.params) == JumpClass::small) {
                U += inc;
                u_qv += inc * inc;
                ++n_small;
            }
            ++n_steps;
            y += dy;
        };
        double t_done = 0.0;
        auto visit = [&](const detail::ZSegment& s) {
            step(s.h, s.z1);
            t_done = s.t0 + s.h;
        };
        double last_z = 0.0, last_t = 0.0;
        const double t0 = detail::run_vertical(config, rng, visit, last_z, last_t);
        if (!std::isfinite(t0)) {
            up[i] = uq[i] = mq[i] = small[i] = steps[i] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        if (t0 > t_done) step(t0 - t_done, 0.0);
        up[i] = std::pow(std::abs(U), p);
        uq[i] = u_qv;
        mq[i] = m_qv;
        small[i] = static_cast<double>(n_small);
        steps[i] = static_cast<double>(n_steps);
    });
    JumpMartingaleReport rep;
    rep.p = p;
    rep.n_paths = n_paths;
    rep.abs_u_p = detail::estimate(up);
    rep.excluded = rep.abs_u_p.excluded;
    double s_small = 0.0, s_steps = 0.0;
    for (long long i = 0; i < n_paths; ++i) {
        if (std::isnan(up[i])) continue;
        if (uq[i] > mq[i]) ++rep.qv_violations;
        rep.mean_u_qv += uq[i];
        rep.mean_m_qv += mq[i];
        s_small += small[i];
        s_steps += steps[i];
    }
    const double kept = static_cast<double>(std::max<long long>(1, rep.abs_u_p.n));
    rep.mean_u_qv /= kept;
    rep.mean_m_qv /= kept;
    rep.small_fraction = s_steps > 0.0 ? s_small / s_steps : 0.0;
    const double fp = std::pow(norm_p(f, p), p);
    rep.ratio = fp > 0.0 ? f.grid.length * rep.abs_u_p.mean / fp : 0.0;
    if (rep.qv_violations)
        throw AccuracyError("pathwise [U] <= [M] violated", static_cast<double>(rep.qv_violations));
    return rep;
}

// Exit positions from start points uniform on [-w, w] at height a; KS of the
// positions landing in [-w/2, w/2] against the uniform law there.
inline KsReport exit_position_uniformity(const PathConfig& config, double w, long long n_paths) {
    config.validate();
    detail::require_paths(n_paths);
    require(config.params.d == 1, "exit_position_uniformity is one-dimensional");
    require(w > 0.0, "window half-width must be positive");
    std::vector<double> pos(n_paths);
    detail::for_paths(n_paths, [&](long long i) {
        Rng rng = path_rng(config.seed, i);
        PathConfig c = config;
        c.start_x = Point{w * (2.0 * uniform01(rng) - 1.0)};
        const ExitSample e = sample_exit(c, rng, true);
        pos[i] = std::isfinite(e.time) ? e.position[0] : std::numeric_limits<double>::quiet_NaN();
    });
    std::vector<double> inner;
    for (double x : pos)
        if (std::abs(x) <= 0.5 * w) inner.push_back(x);
    require(!inner.empty(), "no exit position landed in the inner half-window");
    return ks_distance(std::move(inner), [&](double x) { return (x + 0.5 * w) / w; });
}

} // namespace stablemult
