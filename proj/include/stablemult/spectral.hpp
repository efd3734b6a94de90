#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace stablemult {

using cplx = std::complex<double>;

// Uniform periodic grid x_i = origin + i*length/n, i = 0..n-1.
struct GridSpec {
    int n = 1024;
    double length = 1.0;
    double origin = 0.0;

    void validate() const {
        require(n >= 16 && (n & (n - 1)) == 0, "grid size n must be a power of two >= 16, got " + std::to_string(n));
        require(length > 0.0 && std::isfinite(length), "grid length must be positive");
        require(std::isfinite(origin), "grid origin must be finite");
    }
    double spacing() const { return length / n; }
    double x(int i) const { return origin + i * spacing(); }
    // signed index of bin k in {-n/2, ..., n/2-1}
    int signed_index(int k) const { return k < n / 2 ? k : k - n; }
    double frequency(int k) const { return 2.0 * std::numbers::pi * signed_index(k) / length; }
    bool operator==(const GridSpec& o) const { return n == o.n && length == o.length && origin == o.origin; }
};

struct SampledField {
    GridSpec grid;
    std::vector<double> values;

    SampledField() = default;
    SampledField(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) { validate(); }
    explicit SampledField(GridSpec g, double fill = 0.0) : grid(g), values(g.n, fill) { grid.validate(); }

    void validate() const {
        grid.validate();
        if (static_cast<int>(values.size()) != grid.n)
            throw ShapeError("field has " + std::to_string(values.size()) + " samples, grid expects " +
                             std::to_string(grid.n));
        for (double v : values)
            if (!std::isfinite(v)) throw DomainError("field values must be finite");
    }
    int size() const { return grid.n; }
    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }

    // periodic linear interpolation
    double at(double x) const {
        const double u = (x - grid.origin) / grid.spacing();
        const double fl = std::floor(u);
        const double w = u - fl;
        long long i = static_cast<long long>(fl) % grid.n;
        if (i < 0) i += grid.n;
        const int j = static_cast<int>((i + 1) % grid.n);
        return (1.0 - w) * values[i] + w * values[j];
    }
};

// Forward transform is the unnormalized sum c_k = sum_j f_j exp(-2 pi i j k / n);
// the inverse carries the 1/n. Bin k holds frequency 2 pi signed_index(k) / L.
struct Spectrum {
    GridSpec grid;
    std::vector<cplx> coeffs;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw ShapeError("fields live on different grids");
}

// Radix-2 plan; immutable after construction and shared between threads.
class FftPlan {
public:
    explicit FftPlan(int n) : n_(n), rev_(n), tw_(n / 2) {
        int bits = 0;
        while ((1 << bits) < n) ++bits;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (1 << b)) r |= 1 << (bits - 1 - b);
            rev_[i] = r;
        }
        for (int k = 0; k < n / 2; ++k) tw_[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / n);
    }

    void forward(std::vector<cplx>& a) const { run(a, false); }
    void inverse(std::vector<cplx>& a) const {
        run(a, true);
        for (auto& v : a) v /= static_cast<double>(n_);
    }

    static std::shared_ptr<const FftPlan> get(int n) {
        static std::mutex m;
        static std::map<int, std::shared_ptr<const FftPlan>> cache;
        std::lock_guard<std::mutex> lock(m);
        auto& p = cache[n];
        if (!p) p = std::make_shared<const FftPlan>(n);
        return p;
    }

private:
    void run(std::vector<cplx>& a, bool inv) const {
        for (int i = 0; i < n_; ++i)
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        for (int len = 2; len <= n_; len <<= 1) {
            const int half = len / 2, stride = n_ / len;
            for (int s = 0; s < n_; s += len) {
                for (int j = 0; j < half; ++j) {
                    const cplx w = inv ? std::conj(tw_[j * stride]) : tw_[j * stride];
                    const cplx u = a[s + j], v = a[s + j + half] * w;
                    a[s + j] = u + v;
                    a[s + j + half] = u - v;
                }
            }
        }
    }

    int n_;
    std::vector<int> rev_;
    std::vector<cplx> tw_;
};

inline Spectrum dft(const SampledField& f) {
    f.validate();
    Spectrum s{f.grid, std::vector<cplx>(f.values.begin(), f.values.end())};
    FftPlan::get(f.grid.n)->forward(s.coeffs);
    return s;
}

// Inverse transform to a real field; the spectrum must be conjugate symmetric.
inline SampledField idft(const Spectrum& s) {
    s.grid.validate();
    const int n = s.grid.n;
    if (static_cast<int>(s.coeffs.size()) != n) throw ShapeError("spectrum length does not match grid");
    double scale = 0.0, asym = 0.0;
    for (int k = 0; k < n; ++k) {
        scale = std::max(scale, std::abs(s.coeffs[k]));
        asym = std::max(asym, std::abs(s.coeffs[k] - std::conj(s.coeffs[(n - k) % n])));
    }
    if (asym > 1e-10 * scale) throw SymmetryError("spectrum is not conjugate symmetric; no real inverse");
    std::vector<cplx> a = s.coeffs;
    FftPlan::get(n)->inverse(a);
    double re = 0.0, im = 0.0;
    for (const auto& v : a) {
        re = std::max(re, std::abs(v.real()));
        im = std::max(im, std::abs(v.imag()));
    }
    if (im > 1e-10 * std::max(re, 1e-300)) throw SymmetryError("imaginary residue of inverse transform too large");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = a[i].real();
    return SampledField(s.grid, std::move(out));
}

// idft(symbol(xi) * dft(f)) for a real even-or-odd-compatible symbol.
inline SampledField apply_symbol(const SampledField& f, const std::function<double(double)>& symbol) {
    Spectrum s = dft(f);
    for (int k = 0; k < f.grid.n; ++k) {
        const double m = symbol(f.grid.frequency(k));
        if (!std::isfinite(m)) throw DomainError("symbol is not finite at xi = " + std::to_string(f.grid.frequency(k)));
        s.coeffs[k] *= m;
    }
    // the Nyquist bin pairs with itself; keep it real
    s.coeffs[f.grid.n / 2] = s.coeffs[f.grid.n / 2].real();
    return idft(s);
}

// m-th derivative by multiplication with (i xi)^m; the Nyquist bin is dropped
// for odd m. The upper half is rebuilt as the conjugate of the lower half so
// amplified round-off in high bins cannot break the real inverse.
inline SampledField spectral_derivative(const Spectrum& s, int m) {
    require(m >= 0, "derivative order must be nonnegative");
    const int n = s.grid.n;
    static const cplx ipow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    Spectrum d = s;
    d.coeffs[0] = m == 0 ? cplx(s.coeffs[0].real(), 0.0) : cplx(0.0, 0.0);
    for (int k = 1; k < n / 2; ++k) {
        const double xi = s.grid.frequency(k);
        d.coeffs[k] = s.coeffs[k] * ipow[m % 4] * std::pow(xi, m);
        d.coeffs[n - k] = std::conj(d.coeffs[k]);
    }
    const double nyq = s.grid.frequency(n / 2);
    d.coeffs[n / 2] = (m % 2) ? 0.0 : s.coeffs[n / 2].real() * std::real(ipow[m % 4]) * std::pow(nyq, m);
    return idft(d);
}

// Circular shift: out[i] = f[i + shift], so out(x) = f(x + shift*dx).
inline SampledField translate(const SampledField& f, long long shift) {
    const int n = f.grid.n;
    long long s = shift % n;
    if (s < 0) s += n;
    SampledField out(f.grid);
    for (int i = 0; i < n; ++i) out.values[i] = f.values[(i + s) % n];
    return out;
}

inline double grid_sum(const SampledField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s;
}

inline double inner(const SampledField& f, const SampledField& g) {
    require_same_grid(f.grid, g.grid);
    double s = 0.0;
    for (int i = 0; i < f.grid.n; ++i) s += f.values[i] * g.values[i];
    return s * f.grid.spacing();
}

// (dx * sum |f|^p)^(1/p)
inline double norm_p(const SampledField& f, double p) {
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid.spacing(), 1.0 / p);
}

inline double sup_norm(const SampledField& f) {
    double s = 0.0;
    for (double v : f.values) s = std::max(s, std::abs(v));
    return s;
}

} // namespace stablemult
