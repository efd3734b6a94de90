#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace stablemult {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    QuadResult& operator+=(const QuadResult& o) {
        value += o.value;
        error += o.error;
        return *this;
    }
};

namespace detail {

// 31-point Kronrod rule with its embedded 15-point Gauss rule on [-1, 1].
struct Gk31 {
    std::array<double, 16> x{}, wk{}, wg{};
    Gk31() {
        using K = boost::math::quadrature::gauss_kronrod<double, 31>;
        using G = boost::math::quadrature::gauss<double, 15>;
        for (std::size_t i = 0; i < 16; ++i) {
            x[i] = K::abscissa()[i];
            wk[i] = K::weights()[i];
            for (std::size_t j = 0; j < G::abscissa().size(); ++j)
                if (std::abs(G::abscissa()[j] - x[i]) < 1e-14) wg[i] = G::weights()[j];
        }
    }
    static const Gk31& get() {
        static const Gk31 rule;
        return rule;
    }
};

struct Panel {
    double value, error, l1;
};

template <class F>
Panel gk31_panel(F& f, double a, double b) {
    const Gk31& r = Gk31::get();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double f0 = f(c);
    double k = r.wk[0] * f0, g = r.wg[0] * f0, l1 = r.wk[0] * std::abs(f0);
    for (std::size_t i = 1; i < 16; ++i) {
        const double u = f(c - h * r.x[i]), v = f(c + h * r.x[i]);
        k += r.wk[i] * (u + v);
        g += r.wg[i] * (u + v);
        l1 += r.wk[i] * (std::abs(u) + std::abs(v));
    }
    // the Gauss-Kronrod gap, floored at the rounding level of the panel
    const double err = std::max(std::abs(k - g) * h, 50.0 * std::numeric_limits<double>::epsilon() * l1 * h);
    return {k * h, err, l1 * h};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod over consecutive panels [breaks[i], breaks[i+1]]:
// the panel with the largest Kronrod-Gauss gap is bisected until the summed
// gap drops below rel_tol*max(|I|, abs_floor) or max_splits is spent. The
// returned error is the summed gap, a conservative bound.
template <class F>
QuadResult gk_panels(F&& f, const std::vector<double>& breaks, double rel_tol = 1e-12, double abs_floor = 0.0,
                     int max_splits = 4000) {
    struct Item {
        double a, b;
        detail::Panel p;
        bool operator<(const Item& o) const { return p.error < o.p.error; }
    };
    std::vector<Item> heap;
    double value = 0.0, error = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i] == breaks[i + 1]) continue;
        const detail::Panel p = detail::gk31_panel(f, breaks[i], breaks[i + 1]);
        heap.push_back({breaks[i], breaks[i + 1], p});
        value += p.value;
        error += p.error;
    }
    std::make_heap(heap.begin(), heap.end());
    for (int k = 0; k < max_splits && !heap.empty(); ++k) {
        if (error <= rel_tol * std::max(std::abs(value), abs_floor)) break;
        std::pop_heap(heap.begin(), heap.end());
        const Item it = heap.back();
        heap.pop_back();
        const double m = 0.5 * (it.a + it.b);
        const detail::Panel l = detail::gk31_panel(f, it.a, m), r = detail::gk31_panel(f, m, it.b);
        value += l.value + r.value - it.p.value;
        error += l.error + r.error - it.p.error;
        heap.push_back({it.a, m, l});
        std::push_heap(heap.begin(), heap.end());
        heap.push_back({m, it.b, r});
        std::push_heap(heap.begin(), heap.end());
    }
    // resum to shed the drift of the running updates
    QuadResult out;
    for (const Item& it : heap) {
        out.value += it.p.value;
        out.error += it.p.error;
    }
    return out;
}

template <class F>
QuadResult gk(F&& f, double a, double b, double rel_tol = 1e-12, double abs_floor = 0.0, int max_splits = 4000) {
    return gk_panels(f, std::vector<double>{a, b}, rel_tol, abs_floor, max_splits);
}

// Geometric breakpoints a*ratio^-k ... a, prepended with 0; used where the
// integrand has a power-type singularity at the origin.
inline std::vector<double> graded_breaks(double a, int levels, double ratio = 4.0) {
    std::vector<double> b{0.0};
    for (int k = levels; k >= 1; --k) b.push_back(a * std::pow(ratio, -k));
    b.push_back(a);
    return b;
}

struct Node {
    double x;
    double w;
};

// Gauss-Legendre rule with 8 nodes per panel on a uniform partition of
// [log a, log b]; returns nodes in t with weights for dt.
inline std::vector<Node> log_gauss_legendre(double a, double b, int panels) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    std::vector<Node> out;
    const double la = std::log(a), lb = std::log(b), step = (lb - la) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = la + (p + 0.5) * step, hw = 0.5 * step;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (int sgn : {-1, 1}) {
                if (xs[i] == 0.0 && sgn > 0) continue;
                const double u = c + sgn * hw * xs[i];
                const double t = std::exp(u);
                out.push_back({t, ws[i] * hw * t});
            }
        }
    }
    return out;
}

// Hurwitz zeta sum_{k>=0} (q+k)^-s for s > 1, q > 0 by Euler-Maclaurin.
inline double hurwitz_zeta(double s, double q) {
    require(s > 1.0 && q > 0.0, "hurwitz_zeta needs s > 1 and q > 0");
    constexpr int N = 12;
    static constexpr std::array<double, 9> b2j = {1.0 / 6,         -1.0 / 30,    1.0 / 42,
                                                  -1.0 / 30,       5.0 / 66,     -691.0 / 2730,
                                                  7.0 / 6,         -3617.0 / 510, 43867.0 / 798};
    double sum = 0.0;
    for (int k = 0; k < N; ++k) sum += std::pow(q + k, -s);
    const double a = q + N;
    sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
    // term_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * a^(-s-2j+1)
    double rising = s;           // s(s+1)...(s+2j-2)
    double fact = 2.0;           // (2j)!
    double apow = std::pow(a, -s - 1.0);
    for (std::size_t j = 1; j <= b2j.size(); ++j) {
        const double term = b2j[j - 1] / fact * rising * apow;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
        apow /= a * a;
    }
    return sum;
}

// sum_{m=0}^{count-1} (r + m*n)^-s, exact for short sums, Hurwitz otherwise.
inline double strided_power_sum(double s, double r, double n, long long count) {
    if (count <= 0) return 0.0;
    if (count <= 64) {
        double acc = 0.0;
        for (long long m = count - 1; m >= 0; --m) acc += std::pow(r + m * n, -s);
        return acc;
    }
    const double q = r / n;
    return std::pow(n, -s) * (hurwitz_zeta(s, q) - hurwitz_zeta(s, q + static_cast<double>(count)));
}

} // namespace stablemult
