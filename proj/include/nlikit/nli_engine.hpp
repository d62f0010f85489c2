#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nlikit/domain.hpp"
#include "nlikit/errors.hpp"
#include "nlikit/gn_oracle.hpp"
#include "nlikit/kernels.hpp"
#include "nlikit/poly_fit.hpp"
#include "nlikit/spp.hpp"

namespace nlikit {

enum class KernelMode {
    automatic,     // printed closed forms for degree <= 1, semi-analytic otherwise
    semianalytic,  // force the semi-analytic SCI path at every degree
    oracle,        // numeric 2-D quadrature on the sampled profiles (reference pipeline)
};

struct EngineOptions {
    KernelMode mode = KernelMode::automatic;
    int fit_degree = 5;
    double semianalytic_rel_tol = 1e-9;
    oracle::OracleSettings oracle_settings;
    unsigned threads = 0;       // 0 = hardware concurrency
    std::string base_dir = "";  // directory for external SPP paths
};

struct SpanResult {
    int cut_index = 0;
    double p_end = 0.0;
    KernelResult k_sci;
    std::vector<std::pair<int, KernelResult>> k_xci;  // interferer channel index -> kernel
    double g_nli = 0.0;                               // W/Hz at the CUT center
    std::vector<std::string> warnings;
};

struct CutReport {
    int cut_index = 0;
    std::vector<SpanResult> spans;
    double p_nli = 0.0;     // W, accumulated at the receiver
    double p_sig_rx = 0.0;  // W
    double gsnr_nli_db = 0.0;
};

struct LinkReport {
    std::vector<CutReport> cuts;
    std::vector<std::string> warnings;
};

struct PreparedSpan {
    SppSamples spp;                // one row per channel, scenario channel order
    std::vector<PolySpp> fits;
};

// ---------------------------------------------------------------------------

inline SppSamples build_span_spp(const LinkScenario& sc, const Span& span,
                                 const std::string& base_dir = "") {
    const auto grid = make_grid(span.length, sc.options.grid_points);
    SppSamples spp;
    switch (span.spp.type) {
        case SppSpec::Type::flat: {
            spp.z = grid;
            for (const auto& ch : sc.channels) spp.p.push_back(spp_flat_loss(ch.alpha, grid));
            break;
        }
        case SppSpec::Type::analytic: {
            spp.z = grid;
            for (size_t i = 0; i < sc.channels.size(); ++i)
                spp.p.push_back(spp_analytic_isrs(span.spp.analytic.at(i), grid));
            break;
        }
        case SppSpec::Type::raman_ode: {
            std::vector<RamanWave> waves;
            for (const auto& ch : sc.channels)
                waves.push_back({sc.options.f_ref + ch.f_center, ch.p_launch, ch.alpha, false, true});
            for (const auto& p : span.spp.pumps)
                waves.push_back({p.f_abs, p.power, p.alpha, p.backward, false});
            spp = spp_raman_ode(waves, sc.options.raman, grid).channels;
            break;
        }
        case SppSpec::Type::external: {
            const std::string path = base_dir.empty() ? span.spp.external_path
                                                      : base_dir + "/" + span.spp.external_path;
            std::ifstream in(path);
            if (!in) throw IoError("cannot open external SPP file: " + path);
            std::stringstream buf;
            buf << in.rdbuf();
            spp = load_external_spp(buf.str());
            if (spp.p.size() != sc.channels.size())
                throw ValidationError("external SPP has " + std::to_string(spp.p.size()) +
                                      " channels, scenario has " +
                                      std::to_string(sc.channels.size()));
            if (std::abs(spp.span_length() - span.length) > 1e-6 * span.length)
                throw ValidationError("external SPP length does not match the span length");
            break;
        }
    }
    for (const auto& ll : span.lumped) spp = apply_lumped_loss(std::move(spp), ll.z, ll.loss_dB);
    spp.validate();
    return spp;
}

inline std::vector<PolySpp> fit_span_spp(const SppSamples& spp, int degree) {
    std::vector<PolySpp> fits;
    fits.reserve(spp.p.size());
    for (const auto& row : spp.p) fits.push_back(fit_poly_spp(spp.z, row, degree));
    return fits;
}

inline PreparedSpan prepare_span(const LinkScenario& sc, const Span& span,
                                 const EngineOptions& opts) {
    PreparedSpan ps;
    ps.spp = build_span_spp(sc, span, opts.base_dir);
    ps.fits = fit_span_spp(ps.spp, opts.fit_degree);
    return ps;
}

namespace detail {

inline size_t channel_pos(const LinkScenario& sc, int index) {
    for (size_t i = 0; i < sc.channels.size(); ++i)
        if (sc.channels[i].index == index) return i;
    throw ValidationError("no channel with index " + std::to_string(index));
}

}  // namespace detail

/// Per-span NLI PSD at the CUT center:
///   G = 16/27 p_end [gamma_cut^2 P^3 R^-3 K_SCI
///                    + 2 P R^-1 sum_{n != cut} gamma_n^2 P_n^2 R_n^-2 K_XCI_n]
/// Frequencies are shifted so the CUT sits at 0 before any kernel call.
inline SpanResult span_nli(const LinkScenario& sc, const Span& span, const PreparedSpan& prep,
                           int cut_index, const EngineOptions& opts = {}) {
    const size_t cut_pos = detail::channel_pos(sc, cut_index);
    const Channel& cut = sc.channels[cut_pos];
    if (prep.fits.size() != sc.channels.size())
        throw ValidationError("span_nli: missing fitted polynomials for some channels");

    SpanResult res;
    res.cut_index = cut_index;
    res.p_end = prep.spp.p_end(cut_pos);

    const bool use_oracle = opts.mode == KernelMode::oracle;

    // SCI
    {
        KernelInput in;
        in.poly = prep.fits[cut_pos];
        in.length = span.length;
        in.beta2_eff = sc.beta2_eff(cut, cut);
        in.symbol_rate = cut.symbol_rate;
        in.symbol_rate_cut = cut.symbol_rate;
        if (use_oracle) {
            res.k_sci = oracle::k_sci_numeric(oracle::SampledProfile::from(prep.spp, cut_pos),
                                              in.beta2_eff, cut.symbol_rate,
                                              opts.oracle_settings);
        } else if (opts.mode == KernelMode::semianalytic) {
            res.k_sci = k_sci_semianalytic(in, opts.semianalytic_rel_tol);
        } else {
            res.k_sci = k_sci(in, opts.semianalytic_rel_tol);
        }
        if (prep.fits[cut_pos].negative_on_grid)
            res.warnings.push_back("channel " + std::to_string(cut_index) +
                                   ": fitted profile dips below zero on the grid");
    }

    const double r_cut = cut.symbol_rate;
    double xci_sum = 0.0;
    for (size_t n = 0; n < sc.channels.size(); ++n) {
        if (n == cut_pos) continue;
        const Channel& ch = sc.channels[n];
        KernelInput in;
        in.poly = prep.fits[n];
        in.length = span.length;
        in.beta2_eff = sc.beta2_eff(ch, cut);
        in.f_center_rel = ch.f_center - cut.f_center;
        in.symbol_rate = ch.symbol_rate;
        in.symbol_rate_cut = r_cut;
        KernelResult k;
        if (use_oracle) {
            k = oracle::k_xci_numeric(oracle::SampledProfile::from(prep.spp, n), in.beta2_eff,
                                      in.f_center_rel, ch.symbol_rate, r_cut,
                                      opts.oracle_settings);
        } else {
            const auto guard = guard_xci(in.beta2_eff, ch.symbol_rate);
            if (!guard.pass)
                res.warnings.push_back(
                    "XCI guard fails for channel " + std::to_string(ch.index) + " onto CUT " +
                    std::to_string(cut_index) + ": |beta2|*R^2 = " + std::to_string(guard.value) +
                    " <= 3e3; closed form may be inaccurate, consider the oracle");
            k = k_xci_closed(in);
        }
        const double gamma_n = sc.gamma_xci(ch, cut);
        xci_sum += gamma_n * gamma_n * ch.p_launch * ch.p_launch /
                   (ch.symbol_rate * ch.symbol_rate) * k.value;
        res.k_xci.emplace_back(ch.index, k);
    }

    const double sci_term = cut.gamma_sci * cut.gamma_sci * std::pow(cut.p_launch, 3) /
                            std::pow(r_cut, 3) * res.k_sci.value;
    const double xci_term = 2.0 * cut.p_launch / r_cut * xci_sum;
    res.g_nli = 16.0 / 27.0 * res.p_end * (sci_term + xci_term);
    return res;
}

/// Incoherent (power-additive) accumulation across spans. The NLI injected by
/// span s is weighted by the net power gain from that span's output (after
/// its amplifier) to the receiver; transparent spans contribute unit weight.
inline CutReport accumulate_link(const LinkScenario& sc,
                                 const std::vector<SpanResult>& span_results, int cut_index) {
    if (span_results.size() != sc.spans.size())
        throw ValidationError("accumulate_link: need one SpanResult per span");
    const size_t cut_pos = detail::channel_pos(sc, cut_index);
    const Channel& cut = sc.channels[cut_pos];

    // net power transfer of span t for this channel (loss * amplifier gain)
    std::vector<double> span_transfer(sc.spans.size(), 1.0);
    for (size_t t = 0; t < sc.spans.size(); ++t) {
        if (sc.spans[t].transparent) continue;
        span_transfer[t] = span_results[t].p_end *
                           units::db_to_lin(sc.spans[t].post_span_gain_dB.at(cut_pos));
    }

    CutReport rep;
    rep.cut_index = cut_index;
    rep.spans = span_results;
    double p_nli = 0.0;
    for (size_t s = 0; s < sc.spans.size(); ++s) {
        double g_to_rx = 1.0;
        for (size_t t = s + 1; t < sc.spans.size(); ++t) g_to_rx *= span_transfer[t];
        p_nli += span_results[s].g_nli * cut.symbol_rate * g_to_rx;
    }
    p_nli *= sc.rho(cut_index);
    rep.p_nli = p_nli;
    double sig = cut.p_launch;
    for (size_t t = 0; t < sc.spans.size(); ++t) sig *= span_transfer[t];
    rep.p_sig_rx = sig;
    rep.gsnr_nli_db = p_nli > 0.0 ? 10.0 * std::log10(sig / p_nli)
                                  : std::numeric_limits<double>::infinity();
    return rep;
}

inline double gsnr_nli(const CutReport& rep) { return rep.gsnr_nli_db; }

inline std::vector<PreparedSpan> prepare_spans(const LinkScenario& sc, const EngineOptions& opts) {
    std::vector<PreparedSpan> out;
    out.reserve(sc.spans.size());
    for (const auto& span : sc.spans) out.push_back(prepare_span(sc, span, opts));
    return out;
}

/// Full pipeline: per-CUT span evaluation (parallel) plus accumulation.
inline LinkReport evaluate_link(const LinkScenario& sc, const std::vector<PreparedSpan>& prepared,
                                const EngineOptions& opts = {}) {
    LinkReport report;
    const auto& cuts = sc.cut_indices;
    report.cuts.resize(cuts.size());

    unsigned nthreads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
    nthreads = std::max(1u, std::min<unsigned>(nthreads, static_cast<unsigned>(cuts.size())));

    std::atomic<size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex err_mutex;
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cuts.size()) break;
            try {
                std::vector<SpanResult> srs;
                for (size_t s = 0; s < sc.spans.size(); ++s)
                    srs.push_back(span_nli(sc, sc.spans[s], prepared[s], cuts[i], opts));
                report.cuts[i] = accumulate_link(sc, srs, cuts[i]);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (const auto& cut : report.cuts)
        for (const auto& sr : cut.spans)
            for (const auto& w : sr.warnings) report.warnings.push_back(w);
    return report;
}

// ---------------------------------------------------------------------------
// CSV emission (fixed 17-significant-digit formatting, deterministic)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string emit_link_csv(const LinkScenario& sc, const LinkReport& report) {
    std::string out = "cut, f_center_GHz, P_launch_dBm, G_nli_W_per_Hz, P_nli_dBm, GSNR_nli_dB\n";
    for (const auto& cut : report.cuts) {
        const Channel& ch = sc.channel_by_index(cut.cut_index);
        double g_total = 0.0;
        for (const auto& sr : cut.spans) g_total += sr.g_nli;
        out += std::to_string(cut.cut_index) + ", " + detail::fmt(units::hz_to_ghz(ch.f_center)) +
               ", " + detail::fmt(units::w_to_dbm(ch.p_launch)) + ", " + detail::fmt(g_total) +
               ", " + detail::fmt(units::w_to_dbm(cut.p_nli)) + ", " +
               detail::fmt(cut.gsnr_nli_db) + "\n";
    }
    return out;
}

inline std::string emit_span_breakdown_csv(const LinkReport& report) {
    std::string out = "cut, span, p_end, K_sci, G_nli_W_per_Hz\n";
    for (const auto& cut : report.cuts)
        for (size_t s = 0; s < cut.spans.size(); ++s) {
            const auto& sr = cut.spans[s];
            out += std::to_string(cut.cut_index) + ", " + std::to_string(s) + ", " +
                   detail::fmt(sr.p_end) + ", " + detail::fmt(sr.k_sci.value) + ", " +
                   detail::fmt(sr.g_nli) + "\n";
        }
    return out;
}

inline std::string emit_fit_csv(const std::vector<PolySpp>& fits) {
    std::string out = "ch, degree, p0, p1, p2, p3, p4, p5, p6, p7, p8, p9, fit_rms\n";
    for (size_t c = 0; c < fits.size(); ++c) {
        out += std::to_string(c) + ", " + std::to_string(fits[c].degree);
        for (int n = 0; n <= kMaxPolyDegree; ++n)
            out += ", " + detail::fmt(n <= fits[c].degree
                                          ? fits[c].coeffs[static_cast<size_t>(n)]
                                          : 0.0);
        out += ", " + detail::fmt(fits[c].fit_rms) + "\n";
    }
    return out;
}

}  // namespace nlikit
