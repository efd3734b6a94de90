#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "stable_density.hpp"

namespace stablemult {

// Law of the first hitting time of 0 for the vertical motion started at t;
// the motion has generator d^2/dz^2 (variance 2 per unit time).
inline double exit_density(double t, double s) {
    require(t > 0.0 && s > 0.0, "exit_density needs t > 0 and s > 0");
    return t / (2.0 * std::sqrt(std::numbers::pi)) * std::exp(-t * t / (4.0 * s)) * std::pow(s, -1.5);
}

inline double exit_cdf(double t, double s) {
    require(t > 0.0, "exit_cdf needs t > 0");
    if (s <= 0.0) return 0.0;
    return std::erfc(t / (2.0 * std::sqrt(s)));
}

struct ExitDistribution {
    double t = 1.0;
    void validate() const { require(t > 0.0 && std::isfinite(t), "exit distribution needs t > 0"); }
    double density(double s) const { return exit_density(t, s); }
    double cdf(double s) const { return exit_cdf(t, s); }
};

inline double qt_symbol(const StableParams& params, double t, double xi_norm) {
    require(t >= 0.0, "extension height must be nonnegative");
    return std::exp(-t * std::pow(std::abs(xi_norm), params.alpha / 2.0));
}

inline double qt_symbol(const StableParams& params, double t, const Point& xi) {
    return qt_symbol(params, t, norm(xi));
}

// Default accuracy for kernel sampling; the outer integral dominates the cost.
inline DensityEvalSpec kernel_spec() {
    DensityEvalSpec s;
    s.rel_tol = 1e-8;
    return s;
}

namespace detail {

// (2/sqrt(pi)) int_0^inf exp(-v^2) p(t^2/(4v^2), r) dv with the unit-time radial
// density supplied by `unit`; p(s, r) = k^d p(1, r k) for k = (2v/t)^(2/alpha).
template <class U>
double qt_integral(double alpha, int d, double t, double r, U&& unit, double rel_tol) {
    auto f = [&](double v) {
        if (v == 0.0) return 0.0;
        const double k = std::pow(2.0 * v / t, 2.0 / alpha);
        return std::exp(-v * v) * std::pow(k, d) * unit(r * k);
    };
    std::vector<double> br = graded_breaks(0.5, 4);
    for (double v : {1.0, 2.0, 3.0, 4.5, 7.0}) br.push_back(v);
    const QuadResult q = gk_panels(f, br, 0.1 * rel_tol);
    if (q.error > rel_tol * std::abs(q.value)) throw AccuracyError("q_t quadrature did not converge", q.error);
    return 2.0 / std::sqrt(std::numbers::pi) * q.value;
}

} // namespace detail

// q_t(x) = int p(s, x) mu_t(ds), integrated after the substitution s = t^2/(4v^2),
// which turns mu_t into a Gaussian weight in v.
inline double qt_kernel(const StableParams& params, double t, const Point& x, const DensityEvalSpec& spec = kernel_spec()) {
    params.validate();
    spec.validate();
    require(t > 0.0, "extension height t must be positive");
    require(static_cast<int>(x.size()) == params.d, "point dimension does not match d");
    return detail::qt_integral(
        params.alpha, params.d, t, norm(x),
        [&](double y) { return unit_density(params.alpha, params.d, y, spec); }, spec.rel_tol);
}

// Same integral with the unit density read from a table.
inline double qt_kernel(const UnitDensityTable& table, double t, double r) {
    require(t > 0.0, "extension height t must be positive");
    return detail::qt_integral(table.alpha(), table.d(), t, std::abs(r), table, 1e-7);
}

inline double qt_kernel(const StableParams& params, double t, double x, const DensityEvalSpec& spec = kernel_spec()) {
    return qt_kernel(params, t, Point{x}, spec);
}

struct ExtensionKernel {
    StableParams params;
    double t = 1.0;
    void validate() const {
        params.validate();
        require(t > 0.0 && std::isfinite(t), "extension height t must be positive");
    }
    double operator()(const Point& x, const DensityEvalSpec& spec = kernel_spec()) const { return qt_kernel(params, t, x, spec); }
    double symbol(double xi_norm) const { return qt_symbol(params, t, xi_norm); }
};

// Samples q_t (through a unit-density table) at the signed grid offsets j*dx, j = -n/2..n/2-1, stored at
// index j mod n (so index 0 is the kernel centre).
inline SampledField sample_kernel(const GridSpec& grid, const StableParams& params, double t,
                                  const DensityEvalSpec& spec = kernel_spec()) {
    grid.validate();
    params.validate();
    require(params.d == 1, "grid kernels are one-dimensional");
    const int n = grid.n;
    const UnitDensityTable table(params.alpha, 1, spec);
    std::vector<double> half(n / 2 + 1);
    parallel_for(half.size(), [&](std::size_t j) { half[j] = qt_kernel(table, t, j * grid.spacing()); });
    SampledField k(grid);
    for (int i = 0; i < n; ++i) k.values[i] = half[std::abs(grid.signed_index(i))];
    return k;
}

// Q_t f on the periodic grid: multiply the spectrum by exp(-t|xi|^(alpha/2)).
inline SampledField extend(const SampledField& f, const StableParams& params, double t) {
    f.validate();
    require(t >= 0.0, "extension height must be nonnegative");
    if (t == 0.0) return f;
    return apply_symbol(f, [&](double xi) { return qt_symbol(params, t, xi); });
}

// Validation route: circular convolution with the sampled (untruncated in the
// period, unperiodized) kernel.
inline SampledField extend_by_convolution(const SampledField& f, const StableParams& params, double t,
                                          const DensityEvalSpec& spec = kernel_spec()) {
    const SampledField k = sample_kernel(f.grid, params, t, spec);
    const int n = f.grid.n;
    SampledField out(f.grid);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += k.values[j] * f.values[((i - j) % n + n) % n];
        out.values[i] = s * f.grid.spacing();
    }
    return out;
}

} // namespace stablemult
