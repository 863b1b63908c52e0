#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "windflex/common.hpp"
#include "windflex/errors.hpp"

namespace windflex {

inline double mean(std::span<const double> x) {
    KahanSum s;
    for (double v : x) s.add(v);
    return x.empty() ? 0.0 : s.value() / static_cast<double>(x.size());
}

// Population variance (divide by n), matching the moment conventions used
// throughout: simulated-series statistics are treated as full-population
// summaries, not unbiased estimates.
inline double variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const double m = mean(x);
    KahanSum s;
    for (double v : x) s.add((v - m) * (v - m));
    return s.value() / static_cast<double>(x.size());
}

inline double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

inline double skewness(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    KahanSum s2, s3;
    for (double v : x) {
        const double d = v - m;
        s2.add(d * d);
        s3.add(d * d * d);
    }
    const double n = static_cast<double>(x.size());
    const double sd = std::sqrt(s2.value() / n);
    if (sd == 0.0) return 0.0;
    return (s3.value() / n) / (sd * sd * sd);
}

inline double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ShapeMismatch("correlation: series lengths differ");
    if (x.empty()) return 0.0;
    const double mx = mean(x), my = mean(y);
    KahanSum sxy, sxx, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    const double denom = std::sqrt(sxx.value() * syy.value());
    return denom == 0.0 ? 0.0 : sxy.value() / denom;
}

// Autocorrelation at the given lag, normalized by the full-sample variance.
inline double autocorrelation(std::span<const double> x, std::size_t lag) {
    if (lag >= x.size()) return 0.0;
    const double m = mean(x);
    KahanSum num, den;
    for (std::size_t i = 0; i + lag < x.size(); ++i)
        num.add((x[i] - m) * (x[i + lag] - m));
    for (double v : x) den.add((v - m) * (v - m));
    return den.value() == 0.0 ? 0.0 : num.value() / den.value();
}

// Linear-interpolation quantile on a copy of the data (p in [0,1]).
inline double quantile(std::span<const double> x, double p) {
    if (x.empty()) throw InsufficientData("quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw RangeViolation("quantile: p must lie in [0,1]");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

// Solves A x = b by Gaussian elimination with partial pivoting. A is small
// (3x3 to 9x9 here); throws RankDeficient when a pivot collapses.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw ShapeMismatch("solve_linear: system is not square");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-12)
            throw RankDeficient("solve_linear: singular system at column " + std::to_string(col));
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
        x[i] = acc / a(i, i);
    }
    return x;
}

// Ordinary least squares via normal equations: returns beta minimizing
// ||X beta - y||^2. Adequate for the small, well-conditioned designs here.
inline std::vector<double> ols(const Matrix& x, std::span<const double> y) {
    if (x.rows() != y.size())
        throw ShapeMismatch("ols: design rows != observations");
    const std::size_t k = x.cols();
    Matrix xtx(k, k);
    std::vector<double> xty(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            KahanSum s;
            for (std::size_t i = 0; i < x.rows(); ++i) s.add(x(i, a) * x(i, b));
            xtx(a, b) = xtx(b, a) = s.value();
        }
        KahanSum s;
        for (std::size_t i = 0; i < x.rows(); ++i) s.add(x(i, a) * y[i]);
        xty[a] = s.value();
    }
    return solve_linear(std::move(xtx), std::move(xty));
}

// Roots of 1 - a1 z - a2 z^2 - ... - ap z^p by Durand-Kerner; the AR process
// is stationary iff all roots lie outside the unit circle.
inline bool ar_is_stationary(std::span<const double> ar_coeffs, double margin = 1e-9) {
    // Trim trailing zero coefficients so the polynomial degree is honest.
    std::size_t p = ar_coeffs.size();
    while (p > 0 && ar_coeffs[p - 1] == 0.0) --p;
    if (p == 0) return true;

    // Polynomial c0 + c1 z + ... + cp z^p with c0 = 1, ck = -ar_coeffs[k-1].
    std::vector<std::complex<double>> c(p + 1);
    c[0] = 1.0;
    for (std::size_t k = 1; k <= p; ++k) c[k] = -ar_coeffs[k - 1];

    auto eval = [&](std::complex<double> z) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
        return acc;
    };

    std::vector<std::complex<double>> roots(p);
    for (std::size_t i = 0; i < p; ++i)
        roots[i] = std::pow(std::complex<double>(0.4, 0.9), static_cast<double>(i + 1));
    for (int iter = 0; iter < 200; ++iter) {
        double shift = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            std::complex<double> denom = c[p];
            for (std::size_t j = 0; j < p; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            if (std::abs(denom) < 1e-300) continue;
            const std::complex<double> delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-13) break;
    }
    for (const auto& r : roots)
        if (std::abs(r) <= 1.0 + margin) return false;
    return true;
}

// Stationary variance of an AR(p) process with the given innovation variance,
// from the Yule-Walker equations: solve for the autocorrelations rho_1..rho_p,
// then gamma_0 = sigma^2 / (1 - sum a_k rho_k).
inline double ar_stationary_variance(std::span<const double> ar_coeffs, double innovation_var) {
    const std::size_t p = ar_coeffs.size();
    if (p == 0) return innovation_var;
    // Linear system for rho_1..rho_p: rho_k = sum_j a_j rho_{|k-j|}, rho_0 = 1.
    Matrix a(p, p);
    std::vector<double> b(p, 0.0);
    for (std::size_t k = 1; k <= p; ++k) {
        b[k - 1] = ar_coeffs[k - 1]; // contribution of the rho_0 = 1 term (j = k)
        for (std::size_t j = 1; j <= p; ++j) {
            if (j == k) continue;
            const std::size_t idx = (j > k ? j - k : k - j) - 1;
            a(k - 1, idx) += ar_coeffs[j - 1];
        }
    }
    for (std::size_t i = 0; i < p; ++i) a(i, i) -= 1.0;
    for (auto& v : b) v = -v;
    // (A - I) rho = -b  rearranged from rho = A rho + b.
    const std::vector<double> rho = solve_linear(std::move(a), std::move(b));
    double denom = 1.0;
    for (std::size_t k = 0; k < p; ++k) denom -= ar_coeffs[k] * rho[k];
    if (denom <= 0.0)
        throw NonStationary("ar_stationary_variance: nonpositive variance denominator");
    return innovation_var / denom;
}

} // namespace windflex
