#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace stablemult {

using Point = std::vector<double>;

struct StableParams {
    double alpha = 1.0;
    int d = 1;

    void validate(int max_d = 3) const {
        require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2), got " + std::to_string(alpha));
        require(d >= 1 && d <= max_d, "dimension d must lie in [1, " + std::to_string(max_d) + "]");
    }
};

enum class DensityMethod { fourier_inversion, subordination };

// n_nodes caps the number of quadrature panels per one-dimensional integral.
// cutoff is the largest number of cosine half-periods integrated along the
// real axis; beyond it the d = 1 route rotates the contour into the upper
// half plane where the integrand decays exponentially.
struct DensityEvalSpec {
    DensityMethod method = DensityMethod::fourier_inversion;
    int n_nodes = 4096;
    double cutoff = 64.0;
    double rel_tol = 1e-10;

    void validate() const {
        require(rel_tol > 0.0, "rel_tol must be positive");
        require(n_nodes >= 16, "n_nodes must be at least 16");
        require(cutoff > 0.0, "cutoff must be positive");
    }
};

inline double norm(const Point& x) {
    double s = 0.0;
    for (double v : x) {
        require(std::isfinite(v), "point coordinates must be finite");
        s += v * v;
    }
    return std::sqrt(s);
}

namespace detail {

inline void check_budget(std::size_t panels, const DensityEvalSpec& spec) {
    if (panels > static_cast<std::size_t>(spec.n_nodes))
        throw AccuracyError("quadrature budget exceeded: " + std::to_string(panels) + " panels", 0.0);
}

inline double checked(const QuadResult& q, double scale, const DensityEvalSpec& spec, const char* what) {
    if (!std::isfinite(q.value) || q.error > spec.rel_tol * std::max(std::abs(q.value), scale))
        throw AccuracyError(std::string(what) + " did not converge", q.error);
    return q.value;
}

// (1/pi) int_0^inf cos(y xi) exp(-xi^alpha) dxi along the real axis.
inline double unit_density_real_axis(double alpha, double y, double xi_max, const DensityEvalSpec& spec) {
    const double first = y > 0.0 ? std::min(1.0, std::numbers::pi / (2.0 * y)) : 1.0;
    std::vector<double> br = graded_breaks(first, alpha < 1.0 ? 24 : 12);
    double x = first;
    while (x < xi_max) {
        double w = std::max(0.5, 0.25 * x);
        if (y > 0.0) w = std::min(w, std::numbers::pi / y);
        x = std::min(x + w, xi_max);
        br.push_back(x);
    }
    check_budget(br.size() - 1, spec);
    auto f = [&](double xi) { return std::cos(y * xi) * std::exp(-std::pow(xi, alpha)); };
    const QuadResult q = gk_panels(f, br, 0.5 * spec.rel_tol);
    return checked(q, 1e-300, spec, "cosine-transform quadrature") / std::numbers::pi;
}

// Same integral with the contour rotated to arg(xi) = theta. For alpha > 1 and
// large y the imaginary axis is used up to rho = L/y and closed horizontally;
// the closing leg is bounded by exp(-L + (L/y)^alpha |cos(alpha pi/2)|).
inline double unit_density_rotated(double alpha, double y, const DensityEvalSpec& spec) {
    using namespace std::complex_literals;
    const double L = -std::log(spec.rel_tol * 1e-2) + (1.0 + alpha) * std::log(std::max(1.0, y));
    double theta = std::min(std::numbers::pi / 2.0, std::numbers::pi / (2.0 * alpha));
    if (alpha > 1.0 && std::pow(L / y, alpha) * std::abs(std::cos(alpha * std::numbers::pi / 2.0)) <= 2.0)
        theta = std::numbers::pi / 2.0;
    const std::complex<double> e = std::exp(1i * theta), ea = std::exp(1i * (alpha * theta));
    const double decay = y * std::sin(theta);
    // rho_max solves decay*rho + rho^alpha*cos(alpha*theta) = L
    const double ca = std::max(0.0, std::cos(alpha * theta));
    double lo = 0.0, hi = L / decay;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (decay * mid + ca * std::pow(mid, alpha) < L ? lo : hi) = mid;
    }
    const double rho_max = hi;
    const double omega = y * std::abs(std::cos(theta)) + 1.0;
    const double first = std::min(rho_max, 1.0 / std::max(y, 1.0));
    std::vector<double> br = graded_breaks(first, 20);
    double x = first;
    while (x < rho_max) {
        x = std::min(x + std::min(std::numbers::pi / omega, std::max(0.25 * x, rho_max / 16.0)), rho_max);
        br.push_back(x);
    }
    check_budget(br.size() - 1, spec);
    QuadResult q;
    if (theta == std::numbers::pi / 2.0) {
        const double c = std::cos(alpha * theta), s = std::sin(alpha * theta);
        auto f = [&](double r) {
            const double ra = std::pow(r, alpha);
            return std::exp(-y * r - ra * c) * std::sin(ra * s);
        };
        q = gk_panels(f, br, 0.5 * spec.rel_tol);
    } else {
        auto f = [&](double r) {
            return std::real(e * std::exp(1i * y * r * e - std::pow(r, alpha) * ea));
        };
        q = gk_panels(f, br, 0.5 * spec.rel_tol);
    }
    return checked(q, 1e-300, spec, "rotated-contour quadrature") / std::numbers::pi;
}

inline double xi_truncation(double alpha, double rel_tol) {
    // tail int_X^inf exp(-xi^a) <= exp(-X^a) X^(1-a)/a, kept below rel_tol*1e-2
    const double L = -std::log(rel_tol * 1e-2);
    double X = std::pow(L, 1.0 / alpha);
    for (int i = 0; i < 4; ++i)
        X = std::pow(L + std::max(0.0, std::log(std::pow(X, 1.0 - alpha) / alpha)), 1.0 / alpha);
    return X;
}

// Kanter's function A(phi) in log form, with sin(phi) supplied separately so
// the neighbourhood of pi keeps full relative precision.
inline double kanter_log_a(double beta, double phi, double sin_phi) {
    return (beta * std::log(std::sin(beta * phi)) + (1.0 - beta) * std::log(std::sin((1.0 - beta) * phi)) -
            std::log(sin_phi)) /
           (1.0 - beta);
}

// int_0^pi g(log A(phi)) dphi. The integrands used peak where A z = 1, which
// for small z sits in a thin layer next to phi = pi; the range is split
// geometrically around that point before adaptive Gauss-Kronrod.
template <class G>
double kanter_integral(double beta, G&& g, double tol, double logz) {
    const double pi = std::numbers::pi;
    // phi in (0, pi/2] directly, phi in (pi/2, pi) as pi - eps
    auto left = [&](double phi) { return g(kanter_log_a(beta, phi, std::sin(phi))); };
    auto right = [&](double eps) { return g(kanter_log_a(beta, pi - eps, std::sin(eps))); };
    auto split = [&](auto& f, double peak) {
        std::vector<double> br{0.0};
        if (peak > 0.0 && peak < pi / 2)
            for (double m : {1.0 / 64, 1.0 / 8, 1.0, 8.0})
                if (peak * m < pi / 2) br.push_back(peak * m);
        br.push_back(pi / 2);
        return gk_panels(f, br, tol).value;
    };
    // log A + log z crosses zero at most once on each half (A increases in phi)
    double p_left = -1.0, p_right = -1.0;
    auto ll = [&](double phi) { return kanter_log_a(beta, phi, std::sin(phi)) + logz; };
    auto lr = [&](double eps) { return kanter_log_a(beta, pi - eps, std::sin(eps)) + logz; };
    if (ll(1e-12) < 0.0 && ll(pi / 2) > 0.0) {
        double lo = 1e-12, hi = pi / 2;
        for (int i = 0; i < 60; ++i) (ll(0.5 * (lo + hi)) > 0.0 ? hi : lo) = 0.5 * (lo + hi);
        p_left = lo;
    }
    if (lr(1e-300) > 0.0 && lr(pi / 2) < 0.0) {
        double lo = 1e-300, hi = pi / 2;
        for (int i = 0; i < 80; ++i) (lr(std::sqrt(lo * hi)) > 0.0 ? lo : hi) = std::sqrt(lo * hi);
        p_right = hi;
    }
    return split(left, p_left) + split(right, p_right);
}

} // namespace detail

// Positive beta-stable density with Laplace transform exp(-lambda^beta),
// via Kanter's integral g(s) = (gamma/(pi s)) int_0^pi A z exp(-A z) dphi,
// z = s^-gamma, gamma = beta/(1-beta).
inline double subordinator_density(double beta, double s, double tol = 1e-12) {
    require(beta > 0.0 && beta < 1.0, "subordinator index beta must lie in (0, 1)");
    require(s > 0.0 && std::isfinite(s), "subordinator argument must be positive");
    if (beta == 0.5) return 0.5 / std::sqrt(std::numbers::pi) * std::pow(s, -1.5) * std::exp(-0.25 / s);
    const double gamma = beta / (1.0 - beta);
    const double logz = -gamma * std::log(s);
    auto g = [&](double loga) {
        const double az = std::exp(loga + logz);
        return az > 745.0 ? 0.0 : az * std::exp(-az);
    };
    return gamma / (std::numbers::pi * s) * detail::kanter_integral(beta, g, tol, logz);
}

inline double subordinator_cdf(double beta, double s, double tol = 1e-12) {
    require(beta > 0.0 && beta < 1.0, "subordinator index beta must lie in (0, 1)");
    if (s <= 0.0) return 0.0;
    if (beta == 0.5) return std::erfc(0.5 / std::sqrt(s));
    const double logz = -beta / (1.0 - beta) * std::log(s);
    auto g = [&](double loga) { return std::exp(-std::exp(loga + logz)); };
    return detail::kanter_integral(beta, g, tol, logz) / std::numbers::pi;
}

// p^{(d)}(1, r) = int (4 pi s)^{-d/2} exp(-r^2/(4s)) g_{alpha/2}(s) ds for any
// dimension d >= 1 (lifted dimensions up to d + 4 are used by derivatives).
inline double unit_density_subordinated(double alpha, int d, double r, const DensityEvalSpec& spec = {}) {
    require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2)");
    require(d >= 1 && d <= 7, "lifted dimension must lie in [1, 7]");
    spec.validate();
    const double beta = alpha / 2.0, gamma = beta / (1.0 - beta);
    const double half_d = 0.5 * d;
    const double a0 = std::pow(std::pow(beta, beta) * std::pow(1.0 - beta, 1.0 - beta), 1.0 / (1.0 - beta));
    const double s_lo = std::pow(a0 / 60.0, 1.0 / gamma);
    const double s_hi = 1e12 * std::max(1.0, r * r);
    const double sub_tol = std::min(1e-12, 0.01 * spec.rel_tol);
    auto f = [&](double u) {
        const double s = std::exp(u);
        return s * std::pow(4.0 * std::numbers::pi * s, -half_d) * std::exp(-r * r / (4.0 * s)) *
               subordinator_density(beta, s, sub_tol);
    };
    // unit panels in log s across the bulk, wide ones over the power-law tail
    const double u_lo = std::log(s_lo), u_hi = std::log(s_hi);
    const double u_mid = std::min(u_hi, std::log(std::max(1.0, r * r)) + 8.0);
    std::vector<double> br{u_lo};
    while (br.back() < u_mid) br.push_back(std::min(u_mid, br.back() + 1.5));
    while (br.back() < u_hi) br.push_back(std::min(u_hi, br.back() + 4.0));
    detail::check_budget(br.size() - 1, spec);
    QuadResult q = gk_panels(f, br, 0.5 * spec.rel_tol);
    // tail beyond s_hi from g(s) ~ beta/Gamma(1-beta) s^(-1-beta) and
    // exp(-r^2/4s) ~ 1 - r^2/(4s)
    const double c = std::pow(4.0 * std::numbers::pi, -half_d) * beta / boost::math::tgamma(1.0 - beta);
    const double e = half_d + beta;
    q.value += c * (std::pow(s_hi, -e) / e - 0.25 * r * r * std::pow(s_hi, -e - 1.0) / (e + 1.0));
    return detail::checked(q, 1e-300, spec, "subordination quadrature");
}

// Unit-time d = 1 density at |y| by the Fourier route.
inline double unit_density_fourier(double alpha, double y, const DensityEvalSpec& spec = {}) {
    spec.validate();
    y = std::abs(y);
    const double xi_max = detail::xi_truncation(alpha, spec.rel_tol);
    if (y * xi_max / std::numbers::pi <= spec.cutoff) return detail::unit_density_real_axis(alpha, y, xi_max, spec);
    return detail::unit_density_rotated(alpha, y, spec);
}

inline double density_via_subordination(const StableParams& params, const Point& x, const DensityEvalSpec& spec = {}) {
    params.validate(7);
    require(static_cast<int>(x.size()) == params.d, "point dimension does not match d");
    return unit_density_subordinated(params.alpha, params.d, norm(x), spec);
}

// p(1, y) at radius y by the route the spec selects.
inline double unit_density(double alpha, int d, double y, const DensityEvalSpec& spec = {}) {
    if (d == 1 && spec.method == DensityMethod::fourier_inversion) return unit_density_fourier(alpha, y, spec);
    return unit_density_subordinated(alpha, d, y, spec);
}

// p(s, x) = s^{-d/alpha} p(1, x s^{-1/alpha}).
inline double density(const StableParams& params, double s, const Point& x, const DensityEvalSpec& spec = {}) {
    params.validate();
    spec.validate();
    require(s > 0.0 && std::isfinite(s), "time s must be positive");
    require(static_cast<int>(x.size()) == params.d, "point dimension does not match d");
    const double scale = std::pow(s, 1.0 / params.alpha);
    const double y = norm(x) / scale;
    return unit_density(params.alpha, params.d, y, spec) * std::pow(s, -params.d / params.alpha);
}

// Radial unit-time density tabulated in log p against log y, cubic Lagrange
// in between. Below y_lo the density is flat to O(y^2); above y_hi a two-term
// power tail A y^(-d-alpha) (1 + B y^(-alpha)) is matched to the last nodes.
// Used for batch work where thousands of nearby radii are needed.
class UnitDensityTable {
public:
    UnitDensityTable(double alpha, int d, const DensityEvalSpec& spec = {}, double y_lo = 1e-4, double y_hi = 1e8,
                     double step = 0.01)
        : alpha_(alpha), d_(d), u0_(std::log(y_lo)), h_(step) {
        StableParams{alpha, d}.validate(7);
        const int m = static_cast<int>(std::ceil((std::log(y_hi) - u0_) / h_)) + 1;
        logp_.resize(m);
        for (int i = 0; i < m; ++i) logp_[i] = std::log(unit_density(alpha, d, std::exp(u0_ + i * h_), spec));
        p0_ = unit_density(alpha, d, 0.0, spec);
        const double y1 = std::exp(u0_ + (m - 1) * h_), y2 = std::exp(u0_ + (m - 1 - 100) * h_);
        const double e = d + alpha;
        // p y^e = A + A B y^-alpha at both nodes
        const double q1 = std::exp(logp_[m - 1]) * std::pow(y1, e), q2 = std::exp(logp_[m - 101]) * std::pow(y2, e);
        const double s1 = std::pow(y1, -alpha), s2 = std::pow(y2, -alpha);
        const double ab = (q1 - q2) / (s1 - s2);
        tail_a_ = q1 - ab * s1;
        tail_b_ = ab / tail_a_;
        y_hi_ = y1;
    }

    double operator()(double y) const {
        y = std::abs(y);
        const double y_lo = std::exp(u0_);
        if (y <= y_lo) {
            const double w = (y / y_lo) * (y / y_lo);
            return p0_ + (std::exp(logp_[0]) - p0_) * w;
        }
        if (y >= y_hi_) return tail_a_ * std::pow(y, -d_ - alpha_) * (1.0 + tail_b_ * std::pow(y, -alpha_));
        const double u = (std::log(y) - u0_) / h_;
        const int m = static_cast<int>(logp_.size());
        int i = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, m - 4);
        const double s = u - i;
        // Lagrange weights on nodes i..i+3 at offset s
        const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0, l1 = s * (s - 2) * (s - 3) / 2.0,
                     l2 = -s * (s - 1) * (s - 3) / 2.0, l3 = s * (s - 1) * (s - 2) / 6.0;
        return std::exp(l0 * logp_[i] + l1 * logp_[i + 1] + l2 * logp_[i + 2] + l3 * logp_[i + 3]);
    }

    double alpha() const { return alpha_; }
    int d() const { return d_; }

private:
    double alpha_;
    int d_;
    double u0_, h_;
    std::vector<double> logp_;
    double p0_ = 0.0, tail_a_ = 0.0, tail_b_ = 0.0, y_hi_ = 0.0;
};

inline double density(const StableParams& params, double s, double x, const DensityEvalSpec& spec = {}) {
    return density(params, s, Point{x}, spec);
}

// k-th partial derivative in coordinate j (1-based) by dimension lifting.
inline double density_partial(const StableParams& params, double s, const Point& x, int j, int k,
                              const DensityEvalSpec& spec = {}) {
    params.validate();
    require(k == 1 || k == 2, "derivative order k must be 1 or 2");
    require(j >= 1 && j <= params.d, "coordinate index j must lie in [1, d]");
    require(s > 0.0 && std::isfinite(s), "time s must be positive");
    require(static_cast<int>(x.size()) == params.d, "point dimension does not match d");
    const double a = params.alpha, pi = std::numbers::pi;
    const double scale = std::pow(s, 1.0 / a);
    const double r = norm(x) / scale, xj = x[j - 1] / scale;
    const double lift2 = unit_density_subordinated(a, params.d + 2, r, spec);
    double unit;
    if (k == 1) {
        unit = -2.0 * pi * xj * lift2;
    } else {
        const double lift4 = xj == 0.0 ? 0.0 : unit_density_subordinated(a, params.d + 4, r, spec);
        unit = -2.0 * pi * lift2 + 4.0 * pi * pi * xj * xj * lift4;
    }
    return unit * std::pow(s, -(params.d + k) / a);
}

inline double envelope(const StableParams& params, double s, const Point& x) {
    params.validate();
    require(s > 0.0 && std::isfinite(s), "time s must be positive");
    const double r = norm(x);
    const double core = std::pow(s, -params.d / params.alpha);
    if (r == 0.0) return core;
    return std::min(core, s / std::pow(r, params.d + params.alpha));
}

} // namespace stablemult
