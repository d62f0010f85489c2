#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "nlikit/errors.hpp"

namespace nlikit {

inline constexpr int kMaxPolyDegree = 9;

/// Monomial representation of a normalized power profile,
/// p(z) = sum_n coeffs[n] z^n with z in meters.
struct PolySpp {
    std::vector<double> coeffs;  // coeffs[n] has units 1/m^n
    int degree = 0;
    double fit_rms = 0.0;
    double fit_max_abs = 0.0;
    bool negative_on_grid = false;  // fitted curve dips below zero somewhere on the samples
};

inline double eval_poly_spp(const PolySpp& poly, double z) {
    double v = 0.0;
    for (int n = poly.degree; n >= 0; --n) v = v * z + poly.coeffs[static_cast<size_t>(n)];
    return v;
}

namespace detail {

// Monomial coefficients (in s on [0,1]) of the shifted Legendre polynomials,
// rows k = 0..degree. Integer-valued for degree <= 9, exact in doubles.
inline std::vector<std::vector<double>> shifted_legendre_monomials(int degree) {
    std::vector<std::vector<double>> c(static_cast<size_t>(degree) + 1,
                                       std::vector<double>(static_cast<size_t>(degree) + 1, 0.0));
    c[0][0] = 1.0;
    if (degree >= 1) {
        c[1][0] = -1.0;
        c[1][1] = 2.0;
    }
    for (int k = 1; k < degree; ++k) {
        // (k+1) P_{k+1} = (2k+1)(2s-1) P_k - k P_{k-1}
        auto& next = c[static_cast<size_t>(k) + 1];
        for (int n = 0; n <= k; ++n) {
            const double pk = c[static_cast<size_t>(k)][static_cast<size_t>(n)];
            next[static_cast<size_t>(n) + 1] += 2.0 * (2.0 * k + 1.0) * pk;
            next[static_cast<size_t>(n)] -= (2.0 * k + 1.0) * pk;
        }
        for (int n = 0; n <= k - 1; ++n)
            next[static_cast<size_t>(n)] -= k * c[static_cast<size_t>(k) - 1][static_cast<size_t>(n)];
        for (auto& v : next) v /= (k + 1.0);
    }
    return c;
}

// Solve a small dense SPD-ish system by Gaussian elimination with partial
// pivoting. n <= 10 here.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw NumericError("poly_fit: singular normal equations");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            const double m = a[r][col] / a[col][col];
            for (size_t cc = col; cc < n; ++cc) a[r][cc] -= m * a[col][cc];
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace detail

/// Least-squares polynomial fit of a sampled normalized profile, in the
/// linear power domain. Internally uses shifted Legendre on z/L, then an
/// exact basis change back to monomials on physical z.
inline PolySpp fit_poly_spp(std::span<const double> z, std::span<const double> p, int degree) {
    if (degree < 0 || degree > kMaxPolyDegree)
        throw ValidationError("fit_poly_spp: degree must be in [0, 9], got " + std::to_string(degree));
    const size_t m = z.size();
    if (p.size() != m) throw ValidationError("fit_poly_spp: z/p size mismatch");
    if (m < 10 * (static_cast<size_t>(degree) + 1))
        throw ValidationError("fit_poly_spp: need at least 10*(degree+1) samples, got " +
                              std::to_string(m));
    const double length = z[m - 1];
    if (!(length > 0.0)) throw ValidationError("fit_poly_spp: span length must be positive");

    const size_t nb = static_cast<size_t>(degree) + 1;
    const auto mono = detail::shifted_legendre_monomials(degree);

    // Basis values per sample via Legendre recurrence.
    std::vector<std::vector<double>> gram(nb, std::vector<double>(nb, 0.0));
    std::vector<double> rhs(nb, 0.0);
    std::vector<double> basis(nb);
    for (size_t i = 0; i < m; ++i) {
        const double s = z[i] / length;
        basis[0] = 1.0;
        if (degree >= 1) basis[1] = 2.0 * s - 1.0;
        for (int k = 1; k < degree; ++k)
            basis[static_cast<size_t>(k) + 1] =
                ((2.0 * k + 1.0) * (2.0 * s - 1.0) * basis[static_cast<size_t>(k)] -
                 k * basis[static_cast<size_t>(k) - 1]) /
                (k + 1.0);
        for (size_t r = 0; r < nb; ++r) {
            rhs[r] += basis[r] * p[i];
            for (size_t c = r; c < nb; ++c) gram[r][c] += basis[r] * basis[c];
        }
    }
    for (size_t r = 0; r < nb; ++r)
        for (size_t c = 0; c < r; ++c) gram[r][c] = gram[c][r];

    const std::vector<double> legendre_coef = detail::solve_dense(std::move(gram), std::move(rhs));

    PolySpp out;
    out.degree = degree;
    out.coeffs.assign(nb, 0.0);
    for (size_t k = 0; k < nb; ++k)
        for (size_t n = 0; n <= k; ++n) out.coeffs[n] += legendre_coef[k] * mono[k][n];
    // s^n -> z^n / L^n
    double scale = 1.0;
    for (size_t n = 1; n < nb; ++n) {
        scale /= length;
        out.coeffs[n] *= scale;
    }

    double ss = 0.0, worst = 0.0, minval = 1e300;
    for (size_t i = 0; i < m; ++i) {
        const double fitted = eval_poly_spp(out, z[i]);
        const double r = fitted - p[i];
        ss += r * r;
        worst = std::max(worst, std::abs(r));
        minval = std::min(minval, fitted);
    }
    out.fit_rms = std::sqrt(ss / static_cast<double>(m));
    out.fit_max_abs = worst;
    out.negative_on_grid = minval < 0.0;
    return out;
}

}  // namespace nlikit
