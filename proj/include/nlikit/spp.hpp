#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nlikit/errors.hpp"
#include "nlikit/units.hpp"

namespace nlikit {

inline constexpr size_t kMinSppGridPoints = 64;
inline constexpr size_t kDefaultSppGridPoints = 513;

/// Sampled normalized spatial power profiles on [0, L_span], one row per
/// channel. p[ch][0] == 1 for every channel.
struct SppSamples {
    std::vector<double> z;                // strictly increasing, z[0] = 0, z.back() = L_span
    std::vector<std::vector<double>> p;   // [channel][grid point], dimensionless

    double span_length() const { return z.back(); }
    double p_end(size_t ch) const { return p[ch].back(); }

    void validate() const {
        if (z.size() < kMinSppGridPoints)
            throw ValidationError("SppSamples: grid needs >= 64 points, got " + std::to_string(z.size()));
        if (z.front() != 0.0) throw ValidationError("SppSamples: z[0] must be 0");
        for (size_t i = 1; i < z.size(); ++i)
            if (!(z[i] > z[i - 1])) throw ValidationError("SppSamples: z must be strictly increasing");
        for (size_t c = 0; c < p.size(); ++c) {
            if (p[c].size() != z.size())
                throw ValidationError("SppSamples: row " + std::to_string(c) + " length mismatch");
            if (p[c][0] != 1.0)
                throw ValidationError("SppSamples: channel " + std::to_string(c) + " not normalized at z=0");
            for (double v : p[c])
                if (!(v > 0.0))
                    throw ValidationError("SppSamples: non-positive power in channel " + std::to_string(c));
        }
    }
};

/// alpha(z) = alpha0 + alpha1 exp(-sigma z), all 1/m.
struct AnalyticAlphaParams {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double sigma = 0.0;

    void validate() const {
        if (alpha1 != 0.0 && !(sigma > 0.0))
            throw ValidationError("AnalyticAlphaParams: sigma must be > 0 when alpha1 != 0");
    }
};

inline std::vector<double> make_grid(double length, size_t points = kDefaultSppGridPoints) {
    if (!(length > 0.0)) throw ValidationError("make_grid: span length must be positive");
    points = std::max(points, kMinSppGridPoints);
    std::vector<double> z(points);
    for (size_t i = 0; i < points; ++i)
        z[i] = length * static_cast<double>(i) / static_cast<double>(points - 1);
    z.back() = length;
    return z;
}

/// p(z) = exp(-2 alpha z)
inline std::vector<double> spp_flat_loss(double alpha, std::span<const double> grid) {
    if (alpha < 0.0) throw ValidationError("spp_flat_loss: alpha must be >= 0");
    std::vector<double> row(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) row[i] = std::exp(-2.0 * alpha * grid[i]);
    return row;
}

/// p(z) = exp(-2 alpha0 z - 2 alpha1 (1 - e^(-sigma z))/sigma), the exact
/// antiderivative of alpha(z) = alpha0 + alpha1 exp(-sigma z).
inline std::vector<double> spp_analytic_isrs(const AnalyticAlphaParams& ap,
                                             std::span<const double> grid) {
    ap.validate();
    if (ap.alpha1 == 0.0) return spp_flat_loss(ap.alpha0, grid);
    std::vector<double> row(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const double zz = grid[i];
        row[i] = std::exp(-2.0 * ap.alpha0 * zz - 2.0 * ap.alpha1 * (-std::expm1(-ap.sigma * zz)) / ap.sigma);
    }
    return row;
}

/// Multiply p(z) by 10^(-loss_dB/10) for z >= z_lump. Two grid nodes are
/// inserted (z_lump and the next representable position) so the step is
/// represented exactly in samples.
inline SppSamples apply_lumped_loss(SppSamples spp, double z_lump, double loss_dB) {
    const double length = spp.span_length();
    if (!(z_lump > 0.0) || !(z_lump < length))
        throw ValidationError("apply_lumped_loss: z_lump must lie strictly inside the span");
    const double factor = std::pow(10.0, -loss_dB / 10.0);

    auto interp = [&](const std::vector<double>& row, double zq) {
        const auto it = std::upper_bound(spp.z.begin(), spp.z.end(), zq);
        const size_t hi = static_cast<size_t>(it - spp.z.begin());
        const size_t lo = hi - 1;
        const double t = (zq - spp.z[lo]) / (spp.z[hi] - spp.z[lo]);
        return row[lo] + t * (row[hi] - row[lo]);
    };

    const double z_post = std::nextafter(z_lump, length);
    SppSamples out;
    out.p.resize(spp.p.size());
    std::vector<double> pre_values(spp.p.size());

    const bool node_exists =
        std::binary_search(spp.z.begin(), spp.z.end(), z_lump);
    for (size_t c = 0; c < spp.p.size(); ++c)
        pre_values[c] = node_exists ? spp.p[c][static_cast<size_t>(
                                          std::lower_bound(spp.z.begin(), spp.z.end(), z_lump) -
                                          spp.z.begin())]
                                    : interp(spp.p[c], z_lump);

    for (size_t i = 0; i < spp.z.size(); ++i) {
        const double zz = spp.z[i];
        if (zz < z_lump) {
            out.z.push_back(zz);
            for (size_t c = 0; c < spp.p.size(); ++c) out.p[c].push_back(spp.p[c][i]);
        }
    }
    out.z.push_back(z_lump);
    out.z.push_back(z_post);
    for (size_t c = 0; c < spp.p.size(); ++c) {
        out.p[c].push_back(pre_values[c]);
        out.p[c].push_back(pre_values[c] * factor);
    }
    for (size_t i = 0; i < spp.z.size(); ++i) {
        const double zz = spp.z[i];
        if (zz > z_post) {
            out.z.push_back(zz);
            for (size_t c = 0; c < spp.p.size(); ++c) out.p[c].push_back(spp.p[c][i] * factor);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coupled-power Raman propagation
// ---------------------------------------------------------------------------

struct RamanWave {
    double f_abs = 0.0;     // absolute optical frequency, Hz
    double power = 0.0;     // boundary power, W (z=0 for forward, z=L for backward)
    double alpha = 0.0;     // intrinsic field attenuation, 1/m
    bool backward = false;
    bool is_channel = true; // channels appear as SppSamples rows; pumps do not
};

struct RamanParams {
    double gain_slope = 0.0;        // C_R, 1/(W m Hz)
    double df_max = 15e12;          // triangular gain cutoff, Hz
    double rel_tol = 1e-4;          // fixed-point tolerance on all profiles
    int max_iterations = 50;
};

struct RamanOdeResult {
    SppSamples channels;                         // normalized, channel waves only
    std::vector<std::vector<double>> raw_powers; // W, all waves in input order
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

// dP_i/ds for a wave along its own propagation direction:
// intrinsic loss plus triangular pairwise Raman transfer, power flowing from
// the higher to the lower optical frequency with photon-count bookkeeping.
inline double raman_growth(const std::vector<RamanWave>& waves, const RamanParams& par,
                           size_t i, std::span<const double> powers) {
    double g = -2.0 * waves[i].alpha;
    const double fi = waves[i].f_abs;
    for (size_t j = 0; j < waves.size(); ++j) {
        if (j == i) continue;
        const double fj = waves[j].f_abs;
        const double df = fj - fi;
        if (df > 0.0 && df <= par.df_max) {
            g += par.gain_slope * df * powers[j];
        } else if (df < 0.0 && -df <= par.df_max) {
            g -= (fi / fj) * par.gain_slope * (-df) * powers[j];
        }
    }
    return g;
}

inline double interp_on_grid(std::span<const double> z, std::span<const double> v, double zq) {
    if (zq <= z.front()) return v.front();
    if (zq >= z.back()) return v.back();
    const auto it = std::upper_bound(z.begin(), z.end(), zq);
    const size_t hi = static_cast<size_t>(it - z.begin());
    const size_t lo = hi - 1;
    const double t = (zq - z[lo]) / (z[hi] - z[lo]);
    return v[lo] + t * (v[hi] - v[lo]);
}

}  // namespace detail

/// Solve the coupled Raman power equations on the grid. Forward waves are
/// integrated together by fixed-step RK4; backward waves are handled as a
/// boundary-value problem by alternating-direction fixed-point iteration.
inline RamanOdeResult spp_raman_ode(const std::vector<RamanWave>& waves, const RamanParams& par,
                                    std::span<const double> grid) {
    for (const auto& w : waves)
        if (!(w.power > 0.0) && w.is_channel)
            throw ValidationError("spp_raman_ode: channel launch powers must be > 0");
    for (const auto& w : waves)
        if (w.power < 0.0) throw ValidationError("spp_raman_ode: pump powers must be >= 0");

    const size_t nw = waves.size();
    const size_t ng = grid.size();
    const double length = grid.back();

    // profiles[w][i], W. Initial guess: intrinsic-loss-only decay from each
    // wave's own boundary.
    std::vector<std::vector<double>> prof(nw, std::vector<double>(ng));
    for (size_t w = 0; w < nw; ++w)
        for (size_t i = 0; i < ng; ++i) {
            const double d = waves[w].backward ? (length - grid[i]) : grid[i];
            prof[w][i] = waves[w].power * std::exp(-2.0 * waves[w].alpha * d);
        }

    const bool any_backward =
        std::any_of(waves.begin(), waves.end(), [](const RamanWave& w) { return w.backward; });

    std::vector<size_t> fwd, bwd;
    for (size_t w = 0; w < nw; ++w) (waves[w].backward ? bwd : fwd).push_back(w);

    // Integrate the subset `active` (all same direction) across the grid with
    // RK4, holding the other waves' profiles frozen (linear interpolation at
    // substeps).
    auto sweep = [&](const std::vector<size_t>& active, bool backward) {
        if (active.empty()) return;
        std::vector<double> state(active.size());
        std::vector<double> all(nw);
        // raman_growth is d/ds along the wave's own direction; for backward
        // waves s = L - z, so d/dz carries the opposite sign
        const double dir = backward ? -1.0 : 1.0;
        auto deriv = [&](double zq, std::span<const double> st, std::span<double> out) {
            for (size_t w = 0; w < nw; ++w) all[w] = detail::interp_on_grid(grid, prof[w], zq);
            for (size_t k = 0; k < active.size(); ++k) all[active[k]] = st[k];
            for (size_t k = 0; k < active.size(); ++k)
                out[k] = dir * detail::raman_growth(waves, par, active[k], all) * st[k];
        };
        for (size_t k = 0; k < active.size(); ++k) state[k] = waves[active[k]].power;
        const auto n = static_cast<std::ptrdiff_t>(ng);
        std::vector<double> k1(active.size()), k2(active.size()), k3(active.size()),
            k4(active.size()), tmp(active.size());
        for (std::ptrdiff_t step = 0; step < n - 1; ++step) {
            const std::ptrdiff_t i0 = backward ? (n - 1 - step) : step;
            const std::ptrdiff_t i1 = backward ? (i0 - 1) : (i0 + 1);
            const double z0 = grid[static_cast<size_t>(i0)];
            const double h = grid[static_cast<size_t>(i1)] - z0;  // signed
            for (size_t k = 0; k < active.size(); ++k)
                prof[active[k]][static_cast<size_t>(i0)] = state[k];
            deriv(z0, state, k1);
            for (size_t k = 0; k < active.size(); ++k) tmp[k] = state[k] + 0.5 * h * k1[k];
            deriv(z0 + 0.5 * h, tmp, k2);
            for (size_t k = 0; k < active.size(); ++k) tmp[k] = state[k] + 0.5 * h * k2[k];
            deriv(z0 + 0.5 * h, tmp, k3);
            for (size_t k = 0; k < active.size(); ++k) tmp[k] = state[k] + h * k3[k];
            deriv(z0 + h, tmp, k4);
            for (size_t k = 0; k < active.size(); ++k) {
                state[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
                if (waves[active[k]].power > 0.0 && !(state[k] > 0.0))
                    throw NumericError(
                        "spp_raman_ode: power went non-positive during integration; "
                        "refine the grid");
            }
        }
        for (size_t k = 0; k < active.size(); ++k)
            prof[active[k]][static_cast<size_t>(backward ? 0 : n - 1)] = state[k];
    };

    double residual = 0.0;
    int iter = 0;
    const int max_it = any_backward ? par.max_iterations : 1;
    std::vector<std::vector<double>> prev;
    for (iter = 1; iter <= max_it; ++iter) {
        prev = prof;
        sweep(fwd, false);
        sweep(bwd, true);
        residual = 0.0;
        for (size_t w = 0; w < nw; ++w)
            for (size_t i = 0; i < ng; ++i) {
                const double denom = std::max(std::abs(prev[w][i]), 1e-30);
                residual = std::max(residual, std::abs(prof[w][i] - prev[w][i]) / denom);
            }
        if (!any_backward || residual <= par.rel_tol) break;
    }
    if (any_backward && residual > par.rel_tol)
        throw ConvergenceError("spp_raman_ode: fixed-point iteration did not converge", residual);

    RamanOdeResult res;
    res.iterations = iter;
    res.residual = residual;
    res.raw_powers = prof;
    res.channels.z.assign(grid.begin(), grid.end());
    for (size_t w = 0; w < nw; ++w) {
        if (!waves[w].is_channel) continue;
        std::vector<double> row(ng);
        const double p0 = prof[w][0];
        for (size_t i = 0; i < ng; ++i) row[i] = prof[w][i] / p0;
        row[0] = 1.0;
        res.channels.p.push_back(std::move(row));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Tabular SPP format: header "z_km, ch_0, ch_1, ...", z in km, 17 significant
// digits on emit.
// ---------------------------------------------------------------------------

inline std::string emit_spp(const SppSamples& spp) {
    std::string out = "z_km";
    for (size_t c = 0; c < spp.p.size(); ++c) out += ", ch_" + std::to_string(c);
    out += "\n";
    char buf[40];
    for (size_t i = 0; i < spp.z.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", units::m_to_km(spp.z[i]));
        out += buf;
        for (size_t c = 0; c < spp.p.size(); ++c) {
            std::snprintf(buf, sizeof buf, ", %.17g", spp.p[c][i]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

/// Parse the tabular SPP format. Profiles are renormalized to p(0) = 1; a
/// warning string is returned through `warning` (if non-null) when the input
/// deviates from 1 at z=0 by more than 1e-6.
inline SppSamples load_external_spp(const std::string& text, std::string* warning = nullptr) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("external SPP: empty input");
    size_t ncol = static_cast<size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (ncol < 2) throw ParseError("external SPP: need a z column plus at least one channel column");

    SppSamples spp;
    spp.p.resize(ncol - 1);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("external SPP: bad number at line " + std::to_string(lineno));
            }
        }
        if (vals.size() != ncol)
            throw ParseError("external SPP: wrong column count at line " + std::to_string(lineno));
        const double zm = units::km_to_m(vals[0]);
        if (!spp.z.empty() && !(zm > spp.z.back()))
            throw ParseError("external SPP: z not strictly increasing at line " + std::to_string(lineno));
        spp.z.push_back(zm);
        for (size_t c = 0; c + 1 < ncol; ++c) {
            if (!(vals[c + 1] > 0.0))
                throw ParseError("external SPP: non-positive power at line " + std::to_string(lineno));
            spp.p[c].push_back(vals[c + 1]);
        }
    }
    if (spp.z.empty()) throw ParseError("external SPP: no data rows");
    for (size_t c = 0; c < spp.p.size(); ++c) {
        const double p0 = spp.p[c][0];
        if (std::abs(p0 - 1.0) > 1e-6 && warning)
            *warning += "channel " + std::to_string(c) + ": p(0) = " + std::to_string(p0) +
                        ", renormalized\n";
        for (double& v : spp.p[c]) v /= p0;
        spp.p[c][0] = 1.0;
    }
    return spp;
}

}  // namespace nlikit
