#pragma once

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "harmonic_extension.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "stable_density.hpp"

namespace stablemult {

enum class RKind { constant_one, exp_decay, tabulated };

// The bounded weight r(t). Tabulated profiles interpolate linearly and are
// held constant outside the table.
struct MultiplierProfile {
    RKind kind = RKind::constant_one;
    std::vector<double> t_grid, values;
    double sup_bound = 1.0;

    static MultiplierProfile one() { return {}; }
    static MultiplierProfile exp_decay() {
        MultiplierProfile p;
        p.kind = RKind::exp_decay;
        return p;
    }
    static MultiplierProfile tabulated(std::vector<double> t, std::vector<double> v) {
        MultiplierProfile p;
        p.kind = RKind::tabulated;
        p.t_grid = std::move(t);
        p.values = std::move(v);
        p.sup_bound = 0.0;
        for (double x : p.values) p.sup_bound = std::max(p.sup_bound, std::abs(x));
        if (p.sup_bound == 0.0) p.sup_bound = 1.0;
        p.validate();
        return p;
    }

    void validate() const {
        require(sup_bound > 0.0 && std::isfinite(sup_bound), "sup_bound must be positive");
        if (kind != RKind::tabulated) {
            require(sup_bound >= 1.0, "builtin profiles have sup |r| = 1");
            return;
        }
        if (t_grid.size() != values.size() || t_grid.size() < 2)
            throw ShapeError("tabulated profile needs matching t and value arrays of length >= 2");
        require(t_grid.front() >= 0.0, "tabulated t values must be nonnegative");
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            require(std::isfinite(t_grid[i]) && std::isfinite(values[i]), "tabulated profile must be finite");
            require(std::abs(values[i]) <= sup_bound, "tabulated value exceeds sup_bound");
            if (i) require(t_grid[i] > t_grid[i - 1], "tabulated t values must increase strictly");
        }
    }

    double operator()(double t) const {
        switch (kind) {
        case RKind::constant_one: return 1.0;
        case RKind::exp_decay: return std::exp(-t);
        case RKind::tabulated: break;
        }
        if (t <= t_grid.front()) return values.front();
        if (t >= t_grid.back()) return values.back();
        const auto it = std::upper_bound(t_grid.begin(), t_grid.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - t_grid.begin()) - 1;
        const double w = (t - t_grid[i]) / (t_grid[i + 1] - t_grid[i]);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }
};

enum class HPolicy { truncated, full };
enum class SingularCell { omit, taylor_correct };

// Log-spaced Gauss-Legendre rule in t: n_t nodes in panels of 8.
struct TQuadSpec {
    double t_min = 1e-3;
    double t_max = 50.0;
    int n_t = 64;
    HPolicy h_policy = HPolicy::full;
    SingularCell singular_cell = SingularCell::taylor_correct;

    void validate() const {
        require(t_min > 0.0 && t_max > t_min && std::isfinite(t_max), "t-range must satisfy 0 < t_min < t_max");
        require(n_t >= 8, "n_t must be at least 8");
        if (n_t > (1 << 16)) throw AccuracyError("t-quadrature budget exceeded", static_cast<double>(n_t));
    }
    int panels() const { return (n_t + 7) / 8; }
    std::vector<Node> nodes() const { return log_gauss_legendre(t_min, t_max, panels()); }
};

// t_min sits three decades below the time scale of the Nyquist frequency,
// t_max where t sup|r| exp(-2 t lambda_min) < 1e-6; 24 nodes per decade.
inline TQuadSpec default_quad(const GridSpec& grid, const StableParams& params, const MultiplierProfile& r,
                              HPolicy policy, SingularCell cell = SingularCell::taylor_correct) {
    grid.validate();
    params.validate();
    const double a = params.alpha;
    const double lam_min = std::pow(2.0 * std::numbers::pi / grid.length, a / 2.0);
    TQuadSpec q;
    q.t_min = 1e-3 * std::pow(grid.spacing() / std::numbers::pi, a / 2.0);
    double t = 1.0;
    for (int i = 0; i < 50; ++i) t = std::max(1.0, std::log(1e6 * t * r.sup_bound)) / (2.0 * lam_min);
    q.t_max = std::max(t, 10.0 * q.t_min);
    const double decades = std::log10(q.t_max / q.t_min);
    q.n_t = 8 * std::max(1, static_cast<int>(std::ceil(3.0 * decades)));
    q.h_policy = policy;
    q.singular_cell = cell;
    return q;
}

// x -> 2 f(x) - f(x + h) - f(x - h) with h = h_cells grid steps.
inline SampledField second_difference(const SampledField& f, int h_cells) {
    f.validate();
    const int n = f.grid.n;
    require(h_cells > 0 && h_cells < n / 2, "h_cells must lie in (0, n/2)");
    SampledField out(f.grid);
    for (int i = 0; i < n; ++i)
        out.values[i] = 2.0 * f.values[i] - f.values[(i + h_cells) % n] - f.values[(i - h_cells + n) % n];
    return out;
}

namespace detail {

// Phi(U) = int_0^U sin^2(u) u^(-1-alpha) du. Cumulative values at multiples of
// pi/2 up to ~200, a power series below pi/2 and an asymptotic tail above.
class PhiTable {
public:
    explicit PhiTable(double alpha) : a_(alpha) {
        knots_.push_back(0.0);
        knots_.push_back(series(step()));
        auto f = [&](double u) { return integrand(u); };
        for (int k = 1; k < kCount; ++k) knots_.push_back(knots_.back() + gk31_panel(f, k * step(), (k + 1) * step()).value);
        inf_ = knots_.back() + tail(kCount * step());
    }

    double operator()(double U) const {
        if (U <= 0.0) return 0.0;
        if (U <= step()) return series(U);
        const double top = kCount * step();
        if (U >= top) return inf_ - tail(U);
        const int k = static_cast<int>(U / step());
        auto f = [&](double u) { return integrand(u); };
        return knots_[k] + gk31_panel(f, k * step(), U).value;
    }
    double infinity() const { return inf_; }

    static std::shared_ptr<const PhiTable> get(double alpha) {
        static std::mutex m;
        static std::map<double, std::shared_ptr<const PhiTable>> cache;
        std::lock_guard<std::mutex> lock(m);
        auto& p = cache[alpha];
        if (!p) p = std::make_shared<const PhiTable>(alpha);
        return p;
    }

private:
    static constexpr int kCount = 128;
    static double step() { return std::numbers::pi / 2.0; }
    double integrand(double u) const {
        const double s = std::sin(u);
        return s * s * std::pow(u, -1.0 - a_);
    }
    // sin^2 u = sum_k (-1)^(k+1) 2^(2k-1) u^(2k) / (2k)!
    double series(double U) const {
        double sum = 0.0, coef = 1.0;  // coef = 2^(2k-1)/(2k)!
        for (int k = 1; k <= 40; ++k) {
            if (k > 1) coef *= 4.0 / ((2.0 * k - 1.0) * (2.0 * k));
            const double term = (k % 2 ? 1.0 : -1.0) * coef * std::pow(U, 2.0 * k - a_) / (2.0 * k - a_);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    // int_U^inf sin^2 u u^(-1-alpha) du = U^-alpha/(2 alpha) - Re I/2 with
    // I = int_U^inf e^(2iu) u^-s du = -e^(2iU) sum_k (s)_k U^(-s-k) / (2i)^(k+1).
    double tail(double U) const {
        const double s = 1.0 + a_;
        std::complex<double> acc = 0.0, twoi(0.0, 2.0), denom = twoi;
        double rising = 1.0;
        for (int k = 0; k < 12; ++k) {
            acc += rising * std::pow(U, -s - k) / denom;
            rising *= s + k;
            denom *= twoi;
        }
        const std::complex<double> I = -std::exp(std::complex<double>(0.0, 2.0 * U)) * acc;
        return std::pow(U, -a_) / (2.0 * a_) - 0.5 * I.real();
    }

    double a_;
    std::vector<double> knots_;
    double inf_ = 0.0;
};

constexpr int kTaylorOrder = 12;

// Aggregated h-weights by residue r = j mod n, including the 1/|h|^(1+alpha)
// factor and the cell width, for the half line h > 0. R = +inf selects the
// full policy. Trapezoid weights up to floor(R/dx) with a linearly
// interpolated fractional cell.
struct HWeights {
    std::vector<double> w;
    bool taylor_only = false;
    double radius = std::numeric_limits<double>::infinity();
};

inline HWeights h_weights(int n, double dx, double alpha, double R, SingularCell cell) {
    HWeights out;
    out.w.assign(n, 0.0);
    out.radius = R;
    const double s = 1.0 + alpha, scale = std::pow(dx, -alpha);
    if (!std::isfinite(R)) {
        for (int r = 1; r < n; ++r) out.w[r] = scale * std::pow(static_cast<double>(n), -s) * hurwitz_zeta(s, double(r) / n);
        return out;
    }
    if (cell == SingularCell::taylor_correct && R < 1.5 * dx) {
        out.taylor_only = true;
        return out;
    }
    const double u = R / dx;
    const long long J = static_cast<long long>(std::floor(u));
    const double th = u - static_cast<double>(J);
    for (int r = 1; r < n && r <= J - 1; ++r) {
        const long long count = (J - 1 - r) / n + 1;
        out.w[r] += scale * strided_power_sum(s, r, n, count);
    }
    auto add = [&](long long j, double weight) {
        if (j <= 0 || j % n == 0) return;
        out.w[j % n] += weight * scale * std::pow(static_cast<double>(j), -s);
    };
    add(J, 0.5 + th - 0.5 * th * th);
    add(J + 1, 0.5 * th * th);
    if (J >= 2) {
        // the trapezoid's -dx^2 g'/12 end term, with g'(R) interpolated between
        // central differences at J and J+1 so the weights stay continuous in R
        add(J - 1, (1.0 - th) / 24.0);
        add(J + 1, -(1.0 - th) / 24.0);
        add(J, th / 24.0);
        add(J + 2, -th / 24.0);
    }
    return out;
}

// zeta(alpha + 1 - k) dx^(k - alpha) for even k = 2..12 (index k).
inline std::array<double, kTaylorOrder + 1> navot_factors(double alpha, double dx) {
    std::array<double, kTaylorOrder + 1> z{};
    for (int k = 2; k <= kTaylorOrder; k += 2) z[k] = boost::math::zeta(alpha + 1.0 - k) * std::pow(dx, k - alpha);
    return z;
}

// Derivative fields F^(k)/k! for k = 0..kTaylorOrder from a spectrum.
inline std::vector<std::vector<double>> scaled_derivatives(const Spectrum& s, bool even_only) {
    std::vector<std::vector<double>> d(kTaylorOrder + 1);
    double fact = 1.0;
    for (int k = 0; k <= kTaylorOrder; ++k) {
        if (k) fact *= k;
        if (even_only && (k % 2)) continue;
        SampledField f = spectral_derivative(s, k);
        for (double& v : f.values) v /= fact;
        d[k] = std::move(f.values);
    }
    return d;
}

inline Spectrum scaled_spectrum(const Spectrum& s, const StableParams& params, double height) {
    Spectrum out = s;
    for (int k = 0; k < s.grid.n; ++k) out.coeffs[k] *= qt_symbol(params, height, s.grid.frequency(k));
    out.coeffs[s.grid.n / 2] = out.coeffs[s.grid.n / 2].real();
    return out;
}

// int_{|h|<R} (2F(x) - F(x+h) - F(x-h)) |h|^(-1-alpha) dh on the grid.
// psi_+(h) = 2(2F - F(x+h) - F(x-h)) has Taylor coefficients -4 F^(k)/k!.
inline std::vector<double> second_difference_integral(const Spectrum& F_spec, double alpha, const HWeights& hw,
                                                      SingularCell cell) {
    const int n = F_spec.grid.n;
    const double dx = F_spec.grid.spacing();
    std::vector<double> out(n, 0.0);
    const bool correct = cell == SingularCell::taylor_correct;
    std::vector<std::vector<double>> d;
    if (correct || hw.taylor_only) d = scaled_derivatives(F_spec, true);
    if (hw.taylor_only) {
        for (int k = 2; k <= kTaylorOrder; k += 2) {
            const double f = -4.0 * std::pow(hw.radius, k - alpha) / (k - alpha);
            for (int i = 0; i < n; ++i) out[i] += f * d[k][i];
        }
        return out;
    }
    const SampledField F = idft(F_spec);
    const std::vector<double>& v = F.values;
    double wsum = 0.0;
    std::vector<double> K(n, 0.0);
    for (int s = 1; s < n; ++s) {
        K[s] = hw.w[s] + hw.w[n - s];
        wsum += hw.w[s];
    }
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int s = 1; s < n; ++s) acc += K[s] * v[(i + s) & (n - 1)];
        // sum_r w_r psi_+(r dx), the half-line integral of psi_+ and hence the
        // two-sided integral of the second difference
        out[i] = 4.0 * wsum * v[i] - 2.0 * acc;
    }
    if (correct) {
        const auto z = navot_factors(alpha, dx);
        for (int k = 2; k <= kTaylorOrder; k += 2)
            for (int i = 0; i < n; ++i) out[i] -= z[k] * (-4.0 * d[k][i]);
    }
    return out;
}

// int_{|h|<R} (F(x+h) - F(x))(G(x+h) - G(x)) |h|^(-1-alpha) dh on the grid.
inline std::vector<double> product_difference_integral(const Spectrum& F_spec, const Spectrum& G_spec, double alpha,
                                                       const HWeights& hw, SingularCell cell) {
    const int n = F_spec.grid.n;
    const double dx = F_spec.grid.spacing();
    std::vector<double> out(n, 0.0);
    const bool correct = cell == SingularCell::taylor_correct;
    std::vector<std::vector<double>> a, b;
    if (correct || hw.taylor_only) {
        a = scaled_derivatives(F_spec, false);
        b = scaled_derivatives(G_spec, false);
    }
    // Taylor coefficients of psi_+ = D_F(h) D_G(h) + D_F(-h) D_G(-h)
    auto coeff = [&](int k, int i) {
        double c = 0.0;
        for (int p = 1; p < k; ++p) c += a[p][i] * b[k - p][i];
        return 2.0 * c;
    };
    if (hw.taylor_only) {
        for (int k = 2; k <= kTaylorOrder; k += 2) {
            const double f = std::pow(hw.radius, k - alpha) / (k - alpha);
            for (int i = 0; i < n; ++i) out[i] += f * coeff(k, i);
        }
        return out;
    }
    const SampledField F = idft(F_spec), G = idft(G_spec);
    std::vector<double> K(n, 0.0);
    for (int s = 1; s < n; ++s) K[s] = hw.w[s] + hw.w[n - s];
    for (int i = 0; i < n; ++i) {
        const double fi = F.values[i], gi = G.values[i];
        double acc = 0.0;
        for (int s = 1; s < n; ++s) {
            const int j = (i + s) & (n - 1);
            acc += K[s] * (F.values[j] - fi) * (G.values[j] - gi);
        }
        out[i] = acc;
    }
    if (correct) {
        const auto z = navot_factors(alpha, dx);
        for (int k = 2; k <= kTaylorOrder; k += 2)
            for (int i = 0; i < n; ++i) out[i] -= z[k] * coeff(k, i);
    }
    return out;
}

inline double truncation_radius(const StableParams& params, double t, HPolicy policy) {
    if (policy == HPolicy::full) return std::numeric_limits<double>::infinity();
    return std::pow(t, 2.0 / params.alpha);
}

inline void require_operator_domain(const StableParams& params) {
    params.validate();
    require(params.d == 1, "grid operators are one-dimensional (d = 1)");
    require(params.alpha < 1.0, "operator T is only defined for 0 < alpha < 1, got alpha = " +
                                    std::to_string(params.alpha));
}

// Heights where the truncated h-rule changes regime (R = 1.5 dx: Taylor only
// below; R = 2 dx: end correction starts), inside (t_min, t_max).
inline std::vector<double> regime_breaks(const TQuadSpec& quad, const StableParams& params, double dx) {
    std::vector<double> b;
    if (quad.h_policy == HPolicy::full) return b;
    for (double c : {1.5, 2.0}) {
        const double t = std::pow(c * dx, params.alpha / 2.0);
        if (t > quad.t_min && t < quad.t_max) b.push_back(t);
    }
    return b;
}

// The quad's log-Gauss-Legendre rule, split at the regime changes with the
// panel budget shared in proportion to log length.
inline std::vector<Node> t_nodes(const TQuadSpec& quad, const StableParams& params, double dx) {
    std::vector<double> br{quad.t_min};
    for (double t : regime_breaks(quad, params, dx)) br.push_back(t);
    br.push_back(quad.t_max);
    const double total = std::log(quad.t_max / quad.t_min);
    std::vector<Node> out;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double share = std::log(br[i + 1] / br[i]) / total;
        const int panels = std::max(1, static_cast<int>(std::lround(share * quad.panels())));
        const auto part = log_gauss_legendre(br[i], br[i + 1], panels);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// sum over t-nodes of weight(t) * field(t), combined in node order
template <class F>
std::vector<double> t_sum(const std::vector<Node>& nodes, int n, F&& field_at) {
    std::vector<std::vector<double>> parts(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) { parts[k] = field_at(nodes[k]); });
    std::vector<double> out(n, 0.0);
    for (const auto& p : parts)
        for (int i = 0; i < n; ++i) out[i] += p[i];
    return out;
}

} // namespace detail

// Tf(x) = int t r(t) int_{|h| < t^(2/alpha)} (2 f_2t(x) - f_2t(x+h) - f_2t(x-h)) |h|^(-1-alpha) dh dt,
// with h restricted to grid multiples and the |h| -> 0 end either omitted or
// corrected from Taylor coefficients of the spectral derivatives.
inline SampledField apply_T(const SampledField& f, const MultiplierProfile& r, const StableParams& params,
                            const TQuadSpec& quad) {
    detail::require_operator_domain(params);
    r.validate();
    quad.validate();
    const Spectrum S = dft(f);
    const int n = f.grid.n;
    const double dx = f.grid.spacing();
    detail::HWeights full;
    if (quad.h_policy == HPolicy::full)
        full = detail::h_weights(n, dx, params.alpha, std::numeric_limits<double>::infinity(), quad.singular_cell);
    const auto nodes = detail::t_nodes(quad, params, dx);
    std::vector<double> v = detail::t_sum(nodes, n, [&](const Node& nd) {
        const Spectrum F = detail::scaled_spectrum(S, params, 2.0 * nd.x);
        const detail::HWeights hw =
            quad.h_policy == HPolicy::full
                ? full
                : detail::h_weights(n, dx, params.alpha, detail::truncation_radius(params, nd.x, quad.h_policy),
                                    quad.singular_cell);
        std::vector<double> I = detail::second_difference_integral(F, params.alpha, hw, quad.singular_cell);
        const double w = nd.w * nd.x * r(nd.x);
        for (double& x : I) x *= w;
        return I;
    });
    return SampledField(f.grid, std::move(v));
}

// c = 2^(2-alpha) int_R sin^2(h) |h|^(-1-alpha) dh (d = 1).
inline double constant_c(const StableParams& params) {
    params.validate();
    require(params.d == 1, "constant_c is implemented for d = 1");
    return std::pow(2.0, 2.0 - params.alpha) * 2.0 * detail::PhiTable::get(params.alpha)->infinity();
}

// int_0^U sin^2(u) u^(-1-alpha) du
inline double phi_integral(double alpha, double U) {
    require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2)");
    return (*detail::PhiTable::get(alpha))(U);
}

namespace detail {

// int_0^inf t r(t) exp(-a t) dt
inline double t_moment(const MultiplierProfile& r, double a) {
    switch (r.kind) {
    case RKind::constant_one: return 1.0 / (a * a);
    case RKind::exp_decay: return 1.0 / ((1.0 + a) * (1.0 + a));
    case RKind::tabulated: break;
    }
    const auto& tg = r.t_grid;
    const auto& v = r.values;
    // [0, t_0] at constant v_0 and [t_N, inf) at constant v_N in closed form
    const double t0 = tg.front(), tn = tg.back();
    double s = v.front() * (1.0 - std::exp(-a * t0) * (1.0 + a * t0)) / (a * a);
    s += v.back() * std::exp(-a * tn) * (tn / a + 1.0 / (a * a));
    for (std::size_t i = 0; i + 1 < tg.size(); ++i)
        s += gk([&](double t) { return t * r(t) * std::exp(-a * t); }, tg[i], tg[i + 1], 1e-13).value;
    return s;
}

} // namespace detail

// m(xi) = c |xi|^alpha int_0^inf t r(t) exp(-2 t |xi|^(alpha/2)) dt; m(0) := 0.
inline double symbol_m(double xi, const MultiplierProfile& r, const StableParams& params) {
    params.validate();
    r.validate();
    if (xi == 0.0) return 0.0;
    const double ax = std::abs(xi), lam = std::pow(ax, params.alpha / 2.0);
    return constant_c(params) * std::pow(ax, params.alpha) * detail::t_moment(r, 2.0 * lam);
}

// int_{t_min}^{t_max} t r(t) exp(-2 t lambda) psi(t, xi) dt with
// psi = int_{|h| < t^(2/alpha)} 4 sin^2(xi h/2) |h|^(-1-alpha) dh = 8 (|xi|/2)^alpha Phi(|xi| t^(2/alpha) / 2),
// or c |xi|^alpha for the full policy.
inline double symbol_m_truncated(double xi, const MultiplierProfile& r, const StableParams& params,
                                 const TQuadSpec& quad) {
    params.validate();
    require(params.d == 1, "symbol_m_truncated is implemented for d = 1");
    r.validate();
    quad.validate();
    if (xi == 0.0) return 0.0;
    const double a = params.alpha, ax = std::abs(xi), lam = std::pow(ax, a / 2.0);
    const auto phi = detail::PhiTable::get(a);
    const double pre = 8.0 * std::pow(ax / 2.0, a);
    auto f = [&](double u) {
        const double t = std::exp(u);
        const double psi =
            quad.h_policy == HPolicy::full ? pre * phi->infinity() : pre * (*phi)(0.5 * ax * std::pow(t, 2.0 / a));
        return t * t * r(t) * std::exp(-2.0 * t * lam) * psi;
    };
    const double lo = std::log(quad.t_min), hi = std::log(quad.t_max);
    std::vector<double> br;
    for (double u = lo; u < hi; u += 0.5) br.push_back(u);
    if (r.kind == RKind::tabulated)
        for (double t : r.t_grid)
            if (t > quad.t_min && t < quad.t_max) br.push_back(std::log(t));
    br.push_back(hi);
    std::sort(br.begin(), br.end());
    return gk_panels(f, br, 1e-11).value;
}

// Littlewood-Paley G-function: sqrt(int t int_{|h|<t^(2/alpha)} (f_t(x+h) - f_t(x))^2 |h|^(-1-alpha) dh dt).
inline SampledField g_function(const SampledField& f, const StableParams& params, const TQuadSpec& quad) {
    params.validate();
    require(params.d == 1, "g_function is one-dimensional (d = 1)");
    quad.validate();
    const Spectrum S = dft(f);
    const int n = f.grid.n;
    const double dx = f.grid.spacing();
    const auto nodes = detail::t_nodes(quad, params, dx);
    std::vector<double> v = detail::t_sum(nodes, n, [&](const Node& nd) {
        const Spectrum F = detail::scaled_spectrum(S, params, nd.x);
        const auto hw = detail::h_weights(n, dx, params.alpha, detail::truncation_radius(params, nd.x, quad.h_policy),
                                          quad.singular_cell);
        std::vector<double> I = detail::product_difference_integral(F, F, params.alpha, hw, quad.singular_cell);
        for (double& x : I) x *= nd.w * nd.x;
        return I;
    });
    for (double& x : v) x = std::sqrt(std::max(0.0, x));
    return SampledField(f.grid, std::move(v));
}

struct Pairing {
    double lhs = 0.0;
    double rhs = 0.0;
};

// lhs = <T f, g> with r = 1 on the quad's t-nodes; rhs integrates
// t * sum_x int (f_t(x+h) - f_t(x))(g_t(x+h) - g_t(x)) |h|^(-1-alpha) dh dx
// by adaptive Gauss-Kronrod in log t over the same t-range.
inline Pairing pairing_check(const SampledField& f, const SampledField& g, const StableParams& params,
                             const TQuadSpec& quad) {
    require_same_grid(f.grid, g.grid);
    detail::require_operator_domain(params);
    Pairing out;
    out.lhs = inner(apply_T(f, MultiplierProfile::one(), params, quad), g);
    const Spectrum Sf = dft(f), Sg = dft(g);
    const int n = f.grid.n;
    const double dx = f.grid.spacing();
    const detail::HWeights full =
        detail::h_weights(n, dx, params.alpha, std::numeric_limits<double>::infinity(), quad.singular_cell);
    auto J = [&](double u) {
        const double t = std::exp(u);
        const Spectrum F = detail::scaled_spectrum(Sf, params, t), G = detail::scaled_spectrum(Sg, params, t);
        const auto hw = quad.h_policy == HPolicy::full
                            ? full
                            : detail::h_weights(n, dx, params.alpha, detail::truncation_radius(params, t, quad.h_policy),
                                                quad.singular_cell);
        const auto I = detail::product_difference_integral(F, G, params.alpha, hw, quad.singular_cell);
        double s = 0.0;
        for (double v : I) s += v;
        return t * t * s * dx;
    };
    std::vector<double> br;
    const double lo = std::log(quad.t_min), hi = std::log(quad.t_max);
    for (double u = lo; u < hi; u += 1.0) br.push_back(u);
    for (double t : detail::regime_breaks(quad, params, dx)) br.push_back(std::log(t));
    br.push_back(hi);
    std::sort(br.begin(), br.end());
    const double scale = std::sqrt(inner(f, f) * inner(g, g));
    out.rhs = gk_panels(J, br, 1e-6, 1e-7 * scale).value;
    return out;
}

struct LpReport {
    double p = 2.0;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double min_ratio = 0.0;
};

// ||T f||_p / ||f||_p over a family; an empirical probe, nothing is asserted.
inline LpReport lp_probe(const std::vector<SampledField>& family, const MultiplierProfile& r,
                         const StableParams& params, const TQuadSpec& quad, double p) {
    require(p > 1.0, "lp_probe needs p > 1");
    require(!family.empty(), "lp_probe needs a nonempty family");
    LpReport rep;
    rep.p = p;
    for (const auto& f : family) {
        const double nf = norm_p(f, p);
        require(nf > 0.0, "family members must have nonzero norm");
        rep.ratios.push_back(norm_p(apply_T(f, r, params, quad), p) / nf);
    }
    rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.min_ratio = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    return rep;
}

// exp(-(x-c)^2 / (2 sigma^2)), set to zero beyond |x - c| > cut * sigma
// (measured periodically).
inline SampledField gaussian_bump(const GridSpec& grid, double center, double sigma, double cut = 8.0) {
    grid.validate();
    require(sigma > 0.0, "bump width must be positive");
    SampledField f(grid);
    for (int i = 0; i < grid.n; ++i) {
        double u = std::remainder(grid.x(i) - center, grid.length);
        f.values[i] = std::abs(u) > cut * sigma ? 0.0 : std::exp(-0.5 * u * u / (sigma * sigma));
    }
    return f;
}

// exp(1 - 1/(1 - u^2)) for |u| < 1 with u = (x - c)/half_width; C-infinity,
// compactly supported, peak value 1.
inline SampledField smooth_bump(const GridSpec& grid, double center, double half_width) {
    grid.validate();
    require(half_width > 0.0 && 2.0 * half_width < grid.length, "bump must fit inside the period");
    SampledField f(grid);
    for (int i = 0; i < grid.n; ++i) {
        const double u = std::remainder(grid.x(i) - center, grid.length) / half_width;
        f.values[i] = std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
    }
    return f;
}

} // namespace stablemult
