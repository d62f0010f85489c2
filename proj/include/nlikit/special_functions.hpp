#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "nlikit/errors.hpp"
#include "nlikit/quadrature.hpp"

namespace nlikit {

struct SpecialFnResult {
    double value;
    double est_abs_err;
};

namespace detail {

// E1(z) for complex z off the negative real axis, modified Lentz continued
// fraction. Converges rapidly for |z| >~ 2.
inline std::complex<double> e1_continued_fraction(std::complex<double> z) {
    constexpr double tiny = 1e-300;
    std::complex<double> b = z + 1.0;
    std::complex<double> c = 1.0 / tiny;
    std::complex<double> d = 1.0 / b;
    std::complex<double> h = d;
    for (int i = 1; i < 400; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const std::complex<double> delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-z) * h;
}

inline double si_series(double x) {
    // Si(x) = sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
    double term = x, sum = x;
    const double x2 = x * x;
    for (int k = 1; k < 60; ++k) {
        term *= -x2 / (2.0 * k * (2.0 * k + 1.0));
        const double add = term / (2.0 * k + 1.0);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace detail

/// Si(x) = int_0^x sin(t)/t dt. Odd in x; abs err <= ~1e-14 for |x| <= 1e6.
inline SpecialFnResult sin_integral(double x) {
    const double ax = std::abs(x);
    double v;
    if (ax <= 2.0) {
        v = detail::si_series(ax);
    } else {
        const std::complex<double> e1 = detail::e1_continued_fraction({0.0, ax});
        v = std::numbers::pi / 2.0 + e1.imag();
    }
    return {std::copysign(v, x), 1e-14 * std::max(1.0, std::abs(v))};
}

namespace detail {

// Direct series for 2F3({1/2,1/2},{3/2,3/2,3/2}; -x^2/4), accumulated in long
// double with Kahan compensation. Alternating; term magnitude peaks near
// exp(|x|/2), so accuracy degrades past |x| ~ 35 even in extended precision.
inline SpecialFnResult hyp2f3_series(double x) {
    const long double q = -static_cast<long double>(x) * x / 4.0L;
    long double t = 1.0L, s = 1.0L, comp = 0.0L, tmax = 1.0L;
    for (int k = 0; k < 500; ++k) {
        const long double kk = k;
        t *= q * (kk + 0.5L) * (kk + 0.5L) /
             ((kk + 1.5L) * (kk + 1.5L) * (kk + 1.5L) * (kk + 1.0L));
        const long double y = t - comp;
        const long double u = s + y;
        comp = (u - s) - y;
        s = u;
        tmax = std::max(tmax, std::abs(t));
        if (std::abs(t) < 1e-22L * std::abs(s) && k > 3) break;
    }
    const double err = static_cast<double>(tmax) * 1e-18 + 1e-15;
    return {static_cast<double>(s), err};
}

// Large-argument path. With y = |x|:
//   H(y) = Si(y)/y - (1-cos y)/y^2 + I(y)/y,
//   I(y) = ln(y) * (Si(y) - (1-cos y)/y) + J(y),
//   J(y) = int_0^y (1-cos t)(-ln t)/t^2 dt
//        = sum_{k>=1} (-1)^(k+1)/((2k)! (2k-1)^2)   over [0,1]
//          + panel quadrature over [1,y].
// Derived from the 1-D log-kernel reduction of the K^SCI square-domain
// integral specialized to a constant profile.
inline SpecialFnResult hyp2f3_integral(double x) {
    const double y = std::abs(x);
    const double si = sin_integral(y).value;
    const double one_minus_cos = 2.0 * std::pow(std::sin(0.5 * y), 2);

    // J over [0,1], exact series
    double j01 = 0.0;
    {
        long double fact = 2.0L;  // (2k)! starting at k=1
        long double sgn = 1.0L, s = 0.0L;
        for (int k = 1; k < 25; ++k) {
            s += sgn / (fact * (2.0L * k - 1.0L) * (2.0L * k - 1.0L));
            sgn = -sgn;
            fact *= (2.0L * k + 1.0L) * (2.0L * k + 2.0L);
        }
        j01 = static_cast<double>(s);
    }

    // J over [1,y]: smooth per half-period panels
    auto f = [](double t) { return 2.0 * std::pow(std::sin(0.5 * t), 2) * (-std::log(t)) / (t * t); };
    double tail = 0.0;
    const double panel = std::numbers::pi;
    double a = 1.0;
    while (a < y) {
        const double b = std::min(a + panel, y);
        tail += quad::gl15(f, a, b);
        a = b;
    }

    const double big_i = std::log(y) * (si - one_minus_cos / y) + j01 + tail;
    const double v = si / y - one_minus_cos / (y * y) + big_i / y;
    return {v, 1e-13 * (1.0 + std::abs(std::log(y)))};
}

}  // namespace detail

inline constexpr double kHyp2f3Switch = 30.0;

/// H(x) = 2F3({1/2,1/2},{3/2,3/2,3/2}; -x^2/4). Even in x.
inline SpecialFnResult hyp2f3_half(double x, double x_switch = kHyp2f3Switch) {
    if (std::abs(x) <= x_switch) return detail::hyp2f3_series(x);
    return detail::hyp2f3_integral(x);
}

}  // namespace nlikit
