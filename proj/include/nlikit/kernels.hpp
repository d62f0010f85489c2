#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "nlikit/errors.hpp"
#include "nlikit/poly_fit.hpp"
#include "nlikit/quadrature.hpp"
#include "nlikit/special_functions.hpp"
#include "nlikit/units.hpp"

namespace nlikit {

struct KernelInput {
    PolySpp poly;
    double length = 0.0;        // L_span, m
    double beta2_eff = 0.0;     // s^2/m
    double f_center_rel = 0.0;  // interferer center relative to the CUT, Hz; 0 for SCI
    double symbol_rate = 0.0;   // of the interferer for XCI, of the CUT for SCI, baud
    double symbol_rate_cut = 0.0;
};

struct KernelResult {
    double value = 0.0;      // m^2 Hz^2
    double est_rel_err = 0.0;  // 0 for pure closed forms
};

struct GuardResult {
    bool pass = false;
    double value = 0.0;   // |beta2 (ps^2/km)| * [R (GBaud)]^2
    double margin = 0.0;  // value - threshold
};

inline constexpr double kXciGuardThreshold = 3e3;

/// Validity guard for the f1 limit extension in the XCI closed form:
/// |beta2 (ps^2/km)| * [R (GBaud)]^2 > 3e3, strict.
inline GuardResult guard_xci(double beta2_eff, double symbol_rate) {
    GuardResult g;
    const double b2 = std::abs(units::si_to_ps2_per_km(beta2_eff));
    const double r = units::hz_to_ghz(symbol_rate);
    g.value = b2 * r * r;
    g.margin = g.value - kXciGuardThreshold;
    g.pass = g.value > kXciGuardThreshold;
    return g;
}

/// The Eq-structure bracket of the XCI closed form,
///   B = 2 sum_{n=1..Np} p_n L^n sum_{k=0..n-1} p_k L^k/(n+k+1)
///       + sum_{n=0..Np} L^{2n} p_n^2/(2n+1),
/// algebraically equal to (1/L) int_0^L p(z)^2 dz.
inline double xci_bracket(const PolySpp& poly, double length) {
    double diag = 0.0, cross = 0.0;
    double ln_pow_n = 1.0;
    for (int n = 0; n <= poly.degree; ++n) {
        const double pn = poly.coeffs[static_cast<size_t>(n)];
        diag += ln_pow_n * ln_pow_n * pn * pn / (2.0 * n + 1.0);
        double lk = 1.0, inner = 0.0;
        for (int k = 0; k < n; ++k) {
            inner += poly.coeffs[static_cast<size_t>(k)] * lk / (n + k + 1.0);
            lk *= length;
        }
        cross += pn * ln_pow_n * inner;
        ln_pow_n *= length;
    }
    return 2.0 * cross + diag;
}

/// int_0^L p(z) dz for a polynomial profile.
inline double poly_profile_integral(const PolySpp& poly, double length) {
    double s = 0.0, lp = length;
    for (int n = 0; n <= poly.degree; ++n) {
        s += poly.coeffs[static_cast<size_t>(n)] * lp / (n + 1.0);
        lp *= length;
    }
    return s;
}

/// K^XCI closed form (f1 limits extended to +-inf):
///   K = L/(2 pi |b2|) * |log((f+R/2)/(f-R/2))| * B
inline KernelResult k_xci_closed(const KernelInput& in) {
    const double f = std::abs(in.f_center_rel);
    const double r = in.symbol_rate;
    if (in.beta2_eff == 0.0)
        throw NumericError(
            "k_xci_closed: beta2_eff = 0 is singular in the closed form; use the numeric oracle");
    if (f - r / 2.0 <= 0.0)
        throw ValidationError("k_xci_closed: interferer band reaches the CUT center (f <= R/2)");
    const double b = xci_bracket(in.poly, in.length);
    const double lg = std::abs(std::log((f + r / 2.0) / (f - r / 2.0)));
    return {in.length / (2.0 * std::numbers::pi * std::abs(in.beta2_eff)) * lg * b, 0.0};
}

// ---------------------------------------------------------------------------
// SCI
// ---------------------------------------------------------------------------

namespace detail {

/// E(theta) = int_0^L p(z) e^{j theta z} dz for polynomial p, via the
/// recurrence E_n = (L^n e^{j theta L} - n E_{n-1})/(j theta), with a Taylor
/// branch when |theta| L is small enough for the recurrence to cancel badly.
inline std::complex<double> poly_field_integral(const PolySpp& poly, double length, double theta) {
    using cd = std::complex<double>;
    const double tl = theta * length;
    cd sum = 0.0;
    if (std::abs(tl) < 0.5) {
        // E_n = sum_m (j theta)^m L^{n+m+1} / (m! (n+m+1))
        for (int n = 0; n <= poly.degree; ++n) {
            cd term = std::pow(length, n + 1);
            cd en = term / static_cast<double>(n + 1);
            for (int m = 1; m < 40; ++m) {
                term *= cd(0.0, tl) / static_cast<double>(m);
                const cd add = term / static_cast<double>(n + m + 1);
                en += add;
                if (std::abs(add) < 1e-18 * std::abs(en)) break;
            }
            sum += poly.coeffs[static_cast<size_t>(n)] * en;
        }
        return sum;
    }
    const cd jt(0.0, theta);
    const cd e = std::polar(1.0, tl);
    cd en = (e - 1.0) / jt;
    sum = poly.coeffs[0] * en;
    double ln = 1.0;
    for (int n = 1; n <= poly.degree; ++n) {
        ln *= length;
        en = (ln * e - static_cast<double>(n) * en) / jt;
        sum += poly.coeffs[static_cast<size_t>(n)] * en;
    }
    return sum;
}

}  // namespace detail

/// Exact-to-tolerance K^SCI for any polynomial degree, via the 1-D reduction
///   K = 4 int_0^{R^2/4} |E(4 pi^2 b2 u)|^2 ln(R^2/(4u)) du
/// with the substitution u = (R^2/4) e^{-t} removing the log endpoint
/// singularity.
inline KernelResult k_sci_semianalytic(const KernelInput& in, double rel_tol = 1e-9,
                                       quad::Budget* budget = nullptr) {
    const double r = in.symbol_rate;
    const double length = in.length;
    if (in.beta2_eff == 0.0) {
        const double ip = poly_profile_integral(in.poly, length);
        return {r * r * ip * ip, 0.0};
    }
    const double u_max = r * r / 4.0;
    const double c = 4.0 * std::numbers::pi * std::numbers::pi * in.beta2_eff;
    auto f = [&](double t) {
        const double u = u_max * std::exp(-t);
        const std::complex<double> e = detail::poly_field_integral(in.poly, length, c * u);
        return std::norm(e) * t * std::exp(-t);
    };
    quad::Budget local;
    quad::Budget& bud = budget ? *budget : local;
    double achieved = 0.0;
    const double v = quad::adaptive_gk(f, 0.0, 42.0, rel_tol, 0.0, bud, &achieved,
                                       "k_sci_semianalytic");
    const double k = r * r * v;
    return {k, v != 0.0 ? achieved / std::abs(v) : 0.0};
}

namespace detail {

// Below this |x| the printed closed forms are evaluated through the
// semi-analytic path: their explicit 1/beta2^n terms cancel to O(x^4) and
// lose precision in doubles.
inline constexpr double kPrintedFormSmallX = 0.05;

}  // namespace detail

/// Printed closed form for K^SCI at N_p = 0, with
/// x = pi^2 b2 R^2 L, S = sin x, C = cos x, SI = SinIntegral(x),
/// H = 2F3({1/2,1/2},{3/2,3/2,3/2}; -x^2/4):
///   K = 2 R^2 L^2 p0^2 H + (1-C) 2 p0^2/(pi^4 b2^2 R^2) - 2 L p0^2 SI/(pi^2 b2)
inline KernelResult k_sci_closed_np0(const KernelInput& in) {
    if (in.poly.degree != 0) throw ValidationError("k_sci_closed_np0: degree must be 0");
    const double r = in.symbol_rate, length = in.length, b2 = in.beta2_eff;
    const double p0 = in.poly.coeffs[0];
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double x = pi2 * b2 * r * r * length;
    if (std::abs(x) < detail::kPrintedFormSmallX) return k_sci_semianalytic(in, 1e-10);
    const double one_minus_c = 2.0 * std::pow(std::sin(0.5 * x), 2);
    const auto si = sin_integral(x);
    const auto h = hyp2f3_half(x);
    const double k = 2.0 * r * r * length * length * p0 * p0 * h.value +
                     one_minus_c * (2.0 * p0 * p0) / (pi2 * pi2 * b2 * b2 * r * r) -
                     (2.0 * length * p0 * p0 * si.value) / (pi2 * b2);
    const double err = 2.0 * r * r * length * length * p0 * p0 * h.est_abs_err;
    return {k, k != 0.0 ? std::abs(err / k) : 0.0};
}

/// Printed closed form for K^SCI at N_p = 1. The sin-term carries one power
/// of b2 (required by dimensional consistency and the b2 -> 0 limit).
inline KernelResult k_sci_closed_np1(const KernelInput& in) {
    if (in.poly.degree != 1) throw ValidationError("k_sci_closed_np1: degree must be 1");
    const double r = in.symbol_rate, length = in.length, b2 = in.beta2_eff;
    const double p0 = in.poly.coeffs[0], p1 = in.poly.coeffs[1];
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double x = pi2 * b2 * r * r * length;
    if (std::abs(x) < detail::kPrintedFormSmallX) return k_sci_semianalytic(in, 1e-10);
    const double s = std::sin(x);
    const double cc = std::cos(x);
    const auto si = sin_integral(x);
    const auto h = hyp2f3_half(x);
    const double pi4 = pi2 * pi2, pi6 = pi4 * pi2, pi8 = pi4 * pi4;
    const double r2 = r * r, r4 = r2 * r2, r6 = r4 * r2, r8 = r4 * r4;
    const double b22 = b2 * b2, b23 = b22 * b2, b24 = b22 * b22;
    const double l2 = length * length;
    const double a1 = 2.0 * p0 * p0 + 2.0 * length * p0 * p1 + l2 * p1 * p1;
    const double a2 = 9.0 * p0 * p0 + 9.0 * length * p0 * p1 + 4.0 * l2 * p1 * p1;
    const double a3 = 3.0 * p0 * p0 + 3.0 * length * p0 * p1 + l2 * p1 * p1;
    const double num = 2.0 * p1 * p1 + 9.0 * r4 * b22 * a1 * pi4 -
                       2.0 * (p1 * p1 + pi4 * b22 * r4 * a2) * cc +
                       6.0 * r8 * b24 * l2 * a3 * pi8 * h.value -
                       2.0 * r2 * b2 * length * p1 * p1 * pi2 * s -
                       2.0 * r6 * b23 * length * a2 * pi6 * si.value;
    const double den = 9.0 * r6 * b24 * pi8;
    const double k = num / den;
    const double err = 6.0 * r8 * b24 * l2 * std::abs(a3) * pi8 * h.est_abs_err / den;
    return {k, k != 0.0 ? std::abs(err / k) : 0.0};
}

/// Degree-dispatched SCI kernel: printed forms for N_p <= 1, semi-analytic
/// otherwise.
inline KernelResult k_sci(const KernelInput& in, double rel_tol = 1e-9) {
    switch (in.poly.degree) {
        case 0: return k_sci_closed_np0(in);
        case 1: return k_sci_closed_np1(in);
        default: return k_sci_semianalytic(in, rel_tol);
    }
}

}  // namespace nlikit
