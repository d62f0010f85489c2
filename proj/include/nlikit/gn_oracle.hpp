#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <variant>
#include <vector>

#include "nlikit/errors.hpp"
#include "nlikit/kernels.hpp"
#include "nlikit/quadrature.hpp"
#include "nlikit/spp.hpp"

namespace nlikit::oracle {

struct OracleSettings {
    double rel_tol = 1e-7;
    std::int64_t max_evals = 200'000'000;
    const std::atomic<bool>* cancel = nullptr;
};

/// Piecewise-linear sampled profile with an exact (Filon-type) oscillatory
/// field integral: each segment integrates the linear interpolant times
/// e^{j theta z} in closed form, so there is no oscillation error.
class SampledProfile {
  public:
    SampledProfile(std::vector<double> z, std::vector<double> p)
        : z_(std::move(z)), p_(std::move(p)) {
        if (z_.size() != p_.size() || z_.size() < 2)
            throw ValidationError("SampledProfile: need matching z/p with >= 2 points");
        slope_.resize(z_.size() - 1);
        for (size_t i = 0; i + 1 < z_.size(); ++i)
            slope_[i] = (p_[i + 1] - p_[i]) / (z_[i + 1] - z_[i]);
    }

    static SampledProfile from(const SppSamples& spp, size_t row) {
        return SampledProfile(spp.z, spp.p.at(row));
    }

    double length() const { return z_.back(); }

    double integral() const {  // trapezoid, exact for the interpolant
        double s = 0.0;
        for (size_t i = 0; i + 1 < z_.size(); ++i)
            s += 0.5 * (p_[i] + p_[i + 1]) * (z_[i + 1] - z_[i]);
        return s;
    }

    std::complex<double> field_integral(double theta) const {
        using cd = std::complex<double>;
        if (theta == 0.0) return integral();
        cd sum = 0.0;
        cd phase_lo = 1.0;  // e^{j theta z_0}, z_0 = 0
        for (size_t i = 0; i + 1 < z_.size(); ++i) {
            const double h = z_[i + 1] - z_[i];
            const double th = theta * h;
            const cd phase_hi = std::polar(1.0, theta * z_[i + 1]);
            cd i0, i1;
            if (std::abs(th) < 1e-4) {
                const double h2 = h * h;
                i0 = cd(h - th * th * h / 6.0, th * h / 2.0 - th * th * th * h / 24.0);
                i1 = cd(h2 / 2.0 - th * th * h2 / 8.0, th * h2 / 3.0 - th * th * th * h2 / 30.0);
            } else {
                const cd jt(0.0, theta);
                const cd ehx = std::polar(1.0, th);
                i0 = (ehx - 1.0) / jt;
                i1 = (h * ehx - i0) / jt;
            }
            sum += phase_lo * (p_[i] * i0 + slope_[i] * i1);
            phase_lo = phase_hi;
        }
        return sum;
    }

  private:
    std::vector<double> z_, p_;
    std::vector<double> slope_;
};

/// Polynomial profile adapter sharing the closed-form field-integral
/// recurrence.
struct PolyProfile {
    PolySpp poly;
    double span_length = 0.0;

    double length() const { return span_length; }
    double integral() const { return poly_profile_integral(poly, span_length); }
    std::complex<double> field_integral(double theta) const {
        return detail::poly_field_integral(poly, span_length, theta);
    }
};

/// int_0^L p(z) e^{j theta z} dz; dispatches on the profile representation.
template <class Profile>
std::complex<double> inner_field_integral(const Profile& profile, double theta) {
    return profile.field_integral(theta);
}

namespace detail {

template <class Profile>
double k_core_numeric(const Profile& profile, double beta2_eff, double f1_half_width,
                      double f2_lo, double f2_hi, double symmetry_factor,
                      const OracleSettings& settings, double* est_rel_err, const char* who) {
    const double c = 4.0 * std::numbers::pi * std::numbers::pi * beta2_eff;
    quad::Budget budget;
    budget.max_evals = settings.max_evals;
    budget.cancel = settings.cancel;

    const double inner_tol = settings.rel_tol / 8.0;
    double outer_err = 0.0;
    auto outer = [&](double f1) {
        auto inner = [&](double f2) {
            return std::norm(profile.field_integral(c * f1 * f2));
        };
        return quad::adaptive_gk(inner, f2_lo, f2_hi, inner_tol, 0.0, budget, nullptr, who);
    };
    const double v = quad::adaptive_gk(outer, 0.0, f1_half_width, settings.rel_tol, 0.0, budget,
                                       &outer_err, who);
    if (est_rel_err) *est_rel_err = v != 0.0 ? std::abs(outer_err / v) + inner_tol : inner_tol;
    return symmetry_factor * v;
}

}  // namespace detail

/// Adaptive 2-D quadrature of the SCI core integral over the square
/// [-R/2, R/2]^2. The integrand depends on f1*f2 only, so one quadrant is
/// integrated and multiplied by 4.
template <class Profile>
KernelResult k_sci_numeric(const Profile& profile, double beta2_eff, double r_cut,
                           const OracleSettings& settings = {}) {
    if (beta2_eff == 0.0) {
        const double ip = profile.integral();
        return {r_cut * r_cut * ip * ip, 0.0};
    }
    double err = 0.0;
    const double v = detail::k_core_numeric(profile, beta2_eff, r_cut / 2.0, 0.0, r_cut / 2.0,
                                            4.0, settings, &err, "k_sci_numeric");
    return {v, err};
}

/// Adaptive 2-D quadrature of the XCI core integral over the true finite
/// rectangle (f1 in [-R_cut/2, R_cut/2], f2 in the interferer band) -- the
/// reference that quantifies the closed form's f1 limit-extension error.
template <class Profile>
KernelResult k_xci_numeric(const Profile& profile, double beta2_eff, double f_center_rel,
                           double r_nch, double r_cut, const OracleSettings& settings = {}) {
    const double f = std::abs(f_center_rel);
    if (f - r_nch / 2.0 <= 0.0)
        throw ValidationError("k_xci_numeric: interferer band reaches the CUT center");
    // even in f1 (integrand depends on f1*f2 and |E(-th)| = |E(th)|)
    double err = 0.0;
    const double v =
        detail::k_core_numeric(profile, beta2_eff, r_cut / 2.0, f - r_nch / 2.0, f + r_nch / 2.0,
                               2.0, settings, &err, "k_xci_numeric");
    return {v, err};
}

}  // namespace nlikit::oracle
