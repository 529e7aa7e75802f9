// Periodic grid fields and pseudo-spectral operators on the flat 2-torus.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace eulerci {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct TorusGrid {
    double L = 1.0;
    int N = 256;

    TorusGrid() = default;
    TorusGrid(double side, int n) : L(side), N(n) { validate(); }

    void validate() const {
        if (!(L > 0.0)) throw std::invalid_argument("torus side must be positive");
        if (N < 8 || N % 2 != 0) throw std::invalid_argument("grid resolution must be even and >= 8");
    }
    double h() const { return L / N; }
    double coord(int j) const { return j * h(); }
    int signed_mode(int m) const { return m < N / 2 ? m : m - N; }
    double wavenumber(int m) const { return 2.0 * std::numbers::pi * signed_mode(m) / L; }
    // First-derivative symbol; the Nyquist mode has no real derivative and is dropped.
    double derivative_symbol(int m) const { return m == N / 2 ? 0.0 : wavenumber(m); }
    double area() const { return L * L; }
    bool operator==(const TorusGrid&) const = default;
};

template <class Scalar>
using Grid2 = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Spectrum2 = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

// K real components per grid point. Symmetric tensors store (T11, T12, T22).
template <class Scalar, int K>
struct TorusField {
    TorusGrid grid;
    std::array<Grid2<Scalar>, K> comp;

    TorusField() = default;
    explicit TorusField(const TorusGrid& g) : grid(g) {
        for (auto& c : comp) c = Grid2<Scalar>::Zero(g.N, g.N);
    }

    static constexpr int components = K;

    Grid2<Scalar>& operator[](int k) { return comp[k]; }
    const Grid2<Scalar>& operator[](int k) const { return comp[k]; }

    TorusField& operator+=(const TorusField& o) {
        check_same(o);
        for (int k = 0; k < K; ++k) comp[k] += o.comp[k];
        return *this;
    }
    TorusField& operator-=(const TorusField& o) {
        check_same(o);
        for (int k = 0; k < K; ++k) comp[k] -= o.comp[k];
        return *this;
    }
    TorusField& operator*=(Scalar s) {
        for (auto& c : comp) c *= s;
        return *this;
    }
    void check_same(const TorusField& o) const {
        if (!(grid == o.grid)) throw std::invalid_argument("fields live on different grids");
    }
};

template <class S, int K>
TorusField<S, K> operator+(TorusField<S, K> a, const TorusField<S, K>& b) { return a += b; }
template <class S, int K>
TorusField<S, K> operator-(TorusField<S, K> a, const TorusField<S, K>& b) { return a -= b; }
template <class S, int K>
TorusField<S, K> operator*(S s, TorusField<S, K> a) { return a *= s; }
template <class S, int K>
TorusField<S, K> operator*(TorusField<S, K> a, S s) { return a *= s; }
template <class S, int K>
TorusField<S, K> operator-(TorusField<S, K> a) { return a *= S(-1); }

template <class S>
using TorusScalarField = TorusField<S, 1>;
template <class S>
using TorusVectorField = TorusField<S, 2>;
template <class S>
using TorusSymTensorField = TorusField<S, 3>;

using ScalarField = TorusScalarField<double>;
using VectorField = TorusVectorField<double>;
using SymTensorField = TorusSymTensorField<double>;

// Sample f(x1, x2) on the grid; f returns something indexable with K entries
// (a double is accepted for K = 1).
template <int K, class F>
TorusField<double, K> sample(const TorusGrid& g, F&& f) {
    TorusField<double, K> out(g);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            auto v = f(g.coord(i), g.coord(j));
            if constexpr (K == 1 && std::is_arithmetic_v<decltype(v)>) {
                out[0](i, j) = v;
            } else {
                for (int k = 0; k < K; ++k) out[k](i, j) = v[k];
            }
        }
    return out;
}

// Multiply a scalar field by a scalar field / a vector by a scalar pointwise.
template <class S>
TorusScalarField<S> pointwise(const TorusScalarField<S>& a, const TorusScalarField<S>& b) {
    a.check_same(b);
    TorusScalarField<S> out(a.grid);
    out[0] = a[0] * b[0];
    return out;
}
template <class S, int K>
TorusField<S, K> scale_by(const TorusField<S, K>& v, const TorusScalarField<S>& a) {
    TorusField<S, K> out(v.grid);
    for (int k = 0; k < K; ++k) out[k] = v[k] * a[0];
    return out;
}

// ---------------------------------------------------------------- transforms

namespace detail {
template <class S>
Eigen::FFT<S>& fft_engine() {
    thread_local Eigen::FFT<S> engine;
    return engine;
}
}  // namespace detail

template <class S>
Spectrum2<S> fft2(const Grid2<S>& a) {
    const int n = static_cast<int>(a.rows());
    Spectrum2<S> out(n, n);
    auto& fft = detail::fft_engine<S>();
    std::vector<std::complex<S>> in(n), tmp(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) in[i] = a(i, j);
        fft.fwd(tmp, in);
        for (int i = 0; i < n; ++i) out(i, j) = tmp[i];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) in[j] = out(i, j);
        fft.fwd(tmp, in);
        for (int j = 0; j < n; ++j) out(i, j) = tmp[j];
    }
    return out;
}

template <class S>
Grid2<S> ifft2(const Spectrum2<S>& a) {
    const int n = static_cast<int>(a.rows());
    Spectrum2<S> work = a;
    auto& fft = detail::fft_engine<S>();
    std::vector<std::complex<S>> in(n), tmp(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) in[j] = work(i, j);
        fft.inv(tmp, in);
        for (int j = 0; j < n; ++j) work(i, j) = tmp[j];
    }
    Grid2<S> out(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) in[i] = work(i, j);
        fft.inv(tmp, in);
        for (int i = 0; i < n; ++i) out(i, j) = tmp[i].real();
    }
    return out;
}

// Apply a Fourier multiplier m(k1, k2) given grid mode indices.
template <class S, class M>
Grid2<S> apply_multiplier(const TorusGrid& g, const Grid2<S>& a, M&& m) {
    Spectrum2<S> s = fft2<S>(a);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) s(i, j) *= m(i, j);
    return ifft2<S>(s);
}

// ------------------------------------------------------------- differentials

template <class S>
Grid2<S> partial(const TorusGrid& g, const Grid2<S>& a, int axis) {
    using C = std::complex<S>;
    return apply_multiplier<S>(g, a, [&](int i, int j) {
        return C(0, g.derivative_symbol(axis == 0 ? i : j));
    });
}

template <class S>
TorusVectorField<S> gradient(const TorusScalarField<S>& f) {
    TorusVectorField<S> out(f.grid);
    out[0] = partial<S>(f.grid, f[0], 0);
    out[1] = partial<S>(f.grid, f[0], 1);
    return out;
}

template <class S>
TorusVectorField<S> perp_gradient(const TorusScalarField<S>& f) {
    TorusVectorField<S> out(f.grid);
    out[0] = -partial<S>(f.grid, f[0], 1);
    out[1] = partial<S>(f.grid, f[0], 0);
    return out;
}

template <class S>
TorusScalarField<S> divergence(const TorusVectorField<S>& v) {
    using C = std::complex<S>;
    const auto& g = v.grid;
    Spectrum2<S> a = fft2<S>(v[0]), b = fft2<S>(v[1]);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i)
            a(i, j) = C(0, g.derivative_symbol(i)) * a(i, j) + C(0, g.derivative_symbol(j)) * b(i, j);
    TorusScalarField<S> out(g);
    out[0] = ifft2<S>(a);
    return out;
}

// (div T)_j = sum_k d_k T_jk
template <class S>
TorusVectorField<S> tensor_divergence(const TorusSymTensorField<S>& t) {
    using C = std::complex<S>;
    const auto& g = t.grid;
    Spectrum2<S> t11 = fft2<S>(t[0]), t12 = fft2<S>(t[1]), t22 = fft2<S>(t[2]);
    Spectrum2<S> a(g.N, g.N), b(g.N, g.N);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            C d1(0, g.derivative_symbol(i)), d2(0, g.derivative_symbol(j));
            a(i, j) = d1 * t11(i, j) + d2 * t12(i, j);
            b(i, j) = d1 * t12(i, j) + d2 * t22(i, j);
        }
    TorusVectorField<S> out(g);
    out[0] = ifft2<S>(a);
    out[1] = ifft2<S>(b);
    return out;
}

template <class S>
TorusScalarField<S> curl2d(const TorusVectorField<S>& v) {
    TorusScalarField<S> out(v.grid);
    out[0] = partial<S>(v.grid, v[1], 0) - partial<S>(v.grid, v[0], 1);
    return out;
}

template <class S>
S laplacian_symbol(const TorusGrid& g, int i, int j) {
    const S a = g.derivative_symbol(i), b = g.derivative_symbol(j);
    return -(a * a + b * b);
}

template <class S>
TorusScalarField<S> laplacian(const TorusScalarField<S>& f) {
    TorusScalarField<S> out(f.grid);
    out[0] = apply_multiplier<S>(f.grid, f[0], [&](int i, int j) {
        return std::complex<S>(laplacian_symbol<S>(f.grid, i, j), 0);
    });
    return out;
}

template <class S, int K>
std::array<S, K> mean(const TorusField<S, K>& f) {
    std::array<S, K> m{};
    for (int k = 0; k < K; ++k) m[k] = f[k].mean();
    return m;
}

// Mean-zero check relative to the field's own size.
template <class S, int K>
void require_mean_zero(const TorusField<S, K>& f, S tol, const char* what) {
    for (int k = 0; k < K; ++k) {
        const S scale = std::max<S>(S(1), f[k].abs().maxCoeff());
        if (std::abs(f[k].mean()) > tol * scale)
            throw std::invalid_argument(std::string(what) + ": input must have zero mean");
    }
}

// Solves Lap g = f - mean(f); modes where the discrete Laplacian vanishes are dropped.
template <class S>
TorusScalarField<S> inverse_laplacian(const TorusScalarField<S>& f, S tol = S(1e-10)) {
    require_mean_zero<S, 1>(f, tol, "inverse_laplacian");
    TorusScalarField<S> out(f.grid);
    out[0] = apply_multiplier<S>(f.grid, f[0], [&](int i, int j) {
        const S s = laplacian_symbol<S>(f.grid, i, j);
        return std::complex<S>(s == S(0) ? S(0) : S(1) / s, 0);
    });
    return out;
}

template <class S>
TorusVectorField<S> leray_project(const TorusVectorField<S>& v) {
    using C = std::complex<S>;
    const auto& g = v.grid;
    Spectrum2<S> a = fft2<S>(v[0]), b = fft2<S>(v[1]);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            const S k1 = g.derivative_symbol(i), k2 = g.derivative_symbol(j);
            const S kk = k1 * k1 + k2 * k2;
            if (kk == S(0)) continue;
            const C dot = (k1 * a(i, j) + k2 * b(i, j)) / kk;
            a(i, j) -= k1 * dot;
            b(i, j) -= k2 * dot;
        }
    TorusVectorField<S> out(g);
    out[0] = ifft2<S>(a);
    out[1] = ifft2<S>(b);
    return out;
}

// 2/3-rule truncation: keep |m| <= N/3 in each direction.
template <class S, int K>
TorusField<S, K> dealias(const TorusField<S, K>& f) {
    const auto& g = f.grid;
    const int cut = g.N / 3;
    TorusField<S, K> out(g);
    for (int k = 0; k < K; ++k)
        out[k] = apply_multiplier<S>(g, f[k], [&](int i, int j) {
            const bool keep = std::abs(g.signed_mode(i)) <= cut && std::abs(g.signed_mode(j)) <= cut &&
                              i != g.N / 2 && j != g.N / 2;
            return std::complex<S>(keep ? S(1) : S(0), 0);
        });
    return out;
}

enum class ProductRule { collocation, two_thirds };

// u (x) v + v (x) u, optionally dealiased.
template <class S>
TorusSymTensorField<S> sym_outer(const TorusVectorField<S>& u, const TorusVectorField<S>& v,
                                 ProductRule rule = ProductRule::two_thirds) {
    u.check_same(v);
    TorusSymTensorField<S> t(u.grid);
    t[0] = S(2) * u[0] * v[0];
    t[1] = u[0] * v[1] + u[1] * v[0];
    t[2] = S(2) * u[1] * v[1];
    return rule == ProductRule::two_thirds ? dealias<S, 3>(t) : t;
}

template <class S>
TorusSymTensorField<S> outer_self(const TorusVectorField<S>& u, ProductRule rule = ProductRule::two_thirds) {
    TorusSymTensorField<S> t = sym_outer<S>(u, u, rule);
    t *= S(0.5);
    return t;
}

// Local 1-2-1 smoothing in each direction (symbol cos^2(k h / 2) per axis). It removes the
// Nyquist modes, which no spectral derivative can produce, and preserves sums over the grid.
template <class S, int K>
TorusField<S, K> binomial_filter(const TorusField<S, K>& f) {
    const int n = f.grid.N;
    TorusField<S, K> out(f.grid);
    for (int k = 0; k < K; ++k) {
        Grid2<S> a(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                a(i, j) = S(0.25) * f[k]((i + n - 1) % n, j) + S(0.5) * f[k](i, j) + S(0.25) * f[k]((i + 1) % n, j);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                out[k](i, j) = S(0.25) * a(i, (j + n - 1) % n) + S(0.5) * a(i, j) + S(0.25) * a(i, (j + 1) % n);
    }
    return out;
}

// Spectral translation: the trigonometric interpolant of f shifted by s, i.e. f(x - s).
// Nyquist modes are real cosines; shifting one keeps only its cosine part.
template <class S, int K>
TorusField<S, K> translate(const TorusField<S, K>& f, const Vec2& s) {
    const auto& g = f.grid;
    auto factor = [&](int m, double shift) {
        const S k = g.wavenumber(m);
        if (m == g.N / 2) return std::complex<S>(std::cos(k * shift), 0);
        return std::exp(std::complex<S>(0, -k * shift));
    };
    TorusField<S, K> out(g);
    for (int k = 0; k < K; ++k)
        out[k] = apply_multiplier<S>(g, f[k], [&](int i, int j) { return factor(i, s[0]) * factor(j, s[1]); });
    return out;
}

// Evaluate the trigonometric interpolant at an arbitrary point (O(N^2); for checks).
template <class S>
S evaluate_interpolant(const TorusScalarField<S>& f, const Vec2& x) {
    const auto& g = f.grid;
    Spectrum2<S> s = fft2<S>(f[0]);
    auto factor = [&](int m, double y) {
        const S k = g.wavenumber(m);
        if (m == g.N / 2) return std::complex<S>(std::cos(k * y), 0);
        return std::exp(std::complex<S>(0, k * y));
    };
    std::vector<std::complex<S>> a(g.N), b(g.N);
    for (int m = 0; m < g.N; ++m) {
        a[m] = factor(m, x[0]);
        b[m] = factor(m, x[1]);
    }
    std::complex<S> acc = 0;
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) acc += s(i, j) * a[i] * b[j];
    return acc.real() / (S(g.N) * S(g.N));
}

// ------------------------------------------------------------------- norms

template <class S, int K>
Grid2<S> pointwise_magnitude(const TorusField<S, K>& f) {
    if constexpr (K == 1) {
        return f[0].abs();
    } else if constexpr (K == 2) {
        return (f[0].square() + f[1].square()).sqrt();
    } else {
        // Frobenius norm of the symmetric tensor.
        return (f[0].square() + S(2) * f[1].square() + f[2].square()).sqrt();
    }
}

// Trapezoid rule; p = infinity is the grid maximum (a lower bound on the true sup).
template <class S, int K>
S lp_norm(const TorusField<S, K>& f, S p) {
    if (p < S(1)) throw std::invalid_argument("lp_norm needs p >= 1");
    Grid2<S> m = pointwise_magnitude<S, K>(f);
    if (std::isinf(p)) return m.maxCoeff();
    const S cell = f.grid.h() * f.grid.h();
    if (p == S(1)) return m.sum() * cell;
    if (p == S(2)) return std::sqrt(m.square().sum() * cell);
    return std::pow(m.pow(p).sum() * cell, S(1) / p);
}

template <class S, int K>
S max_abs(const TorusField<S, K>& f) {
    S m = 0;
    for (int k = 0; k < K; ++k) m = std::max(m, f[k].abs().maxCoeff());
    return m;
}

}  // namespace eulerci
