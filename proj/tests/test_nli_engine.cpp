#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include <nlikit/nli_engine.hpp>

using namespace nlikit;
using Catch::Matchers::WithinRel;

namespace {

LinkScenario two_channel_scenario(int n_spans = 1) {
    LinkScenario sc;
    sc.options.beta2_ref = -21.3e-27;
    sc.options.fit_degree = 4;
    Channel a;
    a.index = 0;
    a.f_center = 0.0;
    a.symbol_rate = 64e9;
    a.p_launch = 1e-3;
    a.gamma_sci = 1.3e-3;
    a.alpha = units::loss_db_per_km_to_alpha(0.2);
    Channel b = a;
    b.index = 1;
    b.f_center = 4e11;
    b.p_launch = 1.5e-3;
    b.gamma_sci = 1.25e-3;
    sc.channels = {a, b};
    for (int s = 0; s < n_spans; ++s) {
        Span span;
        span.length = 8e4;
        sc.spans.push_back(span);
    }
    sc.cut_indices = {0, 1};
    sc.rho_correction = {1.0, 1.0};
    return sc;
}

}  // namespace

TEST_CASE("span assembly matches hand-evaluated kernels") {
    const auto sc = two_channel_scenario();
    EngineOptions opts;
    opts.fit_degree = 4;
    const auto prep = prepare_span(sc, sc.spans[0], opts);
    const auto res = span_nli(sc, sc.spans[0], prep, 0, opts);

    const Channel& cut = sc.channels[0];
    const Channel& nch = sc.channels[1];

    KernelInput sci;
    sci.poly = prep.fits[0];
    sci.length = sc.spans[0].length;
    sci.beta2_eff = sc.options.beta2_ref;
    sci.symbol_rate = cut.symbol_rate;
    sci.symbol_rate_cut = cut.symbol_rate;
    const double k_s = k_sci(sci).value;

    KernelInput xci = sci;
    xci.poly = prep.fits[1];
    xci.f_center_rel = nch.f_center;
    xci.symbol_rate = nch.symbol_rate;
    const double k_x = k_xci_closed(xci).value;

    const double p_end = prep.spp.p_end(0);
    const double sci_term = cut.gamma_sci * cut.gamma_sci * std::pow(cut.p_launch, 3) /
                            std::pow(cut.symbol_rate, 3) * k_s;
    const double xci_term = 2.0 * cut.p_launch / cut.symbol_rate * nch.gamma_sci * nch.gamma_sci *
                            nch.p_launch * nch.p_launch / (nch.symbol_rate * nch.symbol_rate) *
                            k_x;
    const double expect = 16.0 / 27.0 * p_end * (sci_term + xci_term);

    CHECK_THAT(res.k_sci.value, WithinRel(k_s, 1e-12));
    REQUIRE(res.k_xci.size() == 1);
    CHECK(res.k_xci[0].first == 1);
    CHECK_THAT(res.k_xci[0].second.value, WithinRel(k_x, 1e-12));
    CHECK_THAT(res.g_nli, WithinRel(expect, 1e-12));
    CHECK_THAT(res.p_end, WithinRel(1e-2 * std::pow(10.0, 0.4), 1e-10));  // 16 dB over 80 km
}

TEST_CASE("single channel has no XCI terms") {
    auto sc = two_channel_scenario();
    sc.channels.pop_back();
    sc.cut_indices = {0};
    EngineOptions opts;
    const auto prep = prepare_span(sc, sc.spans[0], opts);
    const auto res = span_nli(sc, sc.spans[0], prep, 0, opts);
    CHECK(res.k_xci.empty());
    CHECK(res.g_nli > 0.0);
}

TEST_CASE("cubic homogeneity with pinned profiles") {
    auto sc = two_channel_scenario();
    EngineOptions opts;
    opts.fit_degree = 4;
    const auto prep = prepare_span(sc, sc.spans[0], opts);  // flat-loss SPP, power-independent
    const auto base = span_nli(sc, sc.spans[0], prep, 0, opts);

    const double c = 1.7;
    for (auto& ch : sc.channels) ch.p_launch *= c;
    const auto scaled = span_nli(sc, sc.spans[0], prep, 0, opts);
    CHECK_THAT(scaled.g_nli, WithinRel(base.g_nli * c * c * c, 1e-13));
}

TEST_CASE("accumulation: transparent single span") {
    const auto sc = two_channel_scenario();
    EngineOptions opts;
    const auto prepared = prepare_spans(sc, opts);
    const auto res = span_nli(sc, sc.spans[0], prepared[0], 0, opts);
    const auto rep = accumulate_link(sc, {res}, 0);
    CHECK_THAT(rep.p_nli, WithinRel(res.g_nli * sc.channels[0].symbol_rate, 1e-14));
    CHECK_THAT(rep.p_sig_rx, WithinRel(sc.channels[0].p_launch, 1e-14));
}

TEST_CASE("accumulation: N identical transparent spans add incoherently") {
    const int n = 4;
    const auto sc1 = two_channel_scenario(1);
    const auto scn = two_channel_scenario(n);
    EngineOptions opts;
    const auto rep1 = evaluate_link(sc1, prepare_spans(sc1, opts), opts);
    const auto repn = evaluate_link(scn, prepare_spans(scn, opts), opts);
    CHECK_THAT(repn.cuts[0].p_nli, WithinRel(n * rep1.cuts[0].p_nli, 1e-12));
    CHECK_THAT(repn.cuts[0].gsnr_nli_db,
               WithinRel(rep1.cuts[0].gsnr_nli_db - 10.0 * std::log10(double(n)), 1e-10));
}

TEST_CASE("accumulation: amplifier gain above transparency weights upstream NLI") {
    auto sc = two_channel_scenario(2);
    EngineOptions opts;
    auto prepared = prepare_spans(sc, opts);
    const double p_end = prepared[1].spp.p_end(0);
    // second amplifier 3.0103 dB (factor 2) above transparency
    sc.spans[1].transparent = false;
    const double gain_db = -10.0 * std::log10(p_end) + 10.0 * std::log10(2.0);
    sc.spans[1].post_span_gain_dB.assign(sc.channels.size(), gain_db);

    std::vector<SpanResult> srs;
    for (size_t s = 0; s < 2; ++s) srs.push_back(span_nli(sc, sc.spans[s], prepared[s], 0, opts));
    const auto rep = accumulate_link(sc, srs, 0);
    const double expect =
        (2.0 * srs[0].g_nli + srs[1].g_nli) * sc.channels[0].symbol_rate;
    CHECK_THAT(rep.p_nli, WithinRel(expect, 1e-10));
    CHECK_THAT(rep.p_sig_rx, WithinRel(2.0 * sc.channels[0].p_launch, 1e-10));
}

TEST_CASE("rho correction scales the accumulated NLI") {
    auto sc = two_channel_scenario();
    sc.rho_correction = {0.8, 1.0};
    EngineOptions opts;
    const auto prepared = prepare_spans(sc, opts);
    const auto res = span_nli(sc, sc.spans[0], prepared[0], 0, opts);
    const auto rep = accumulate_link(sc, {res}, 0);
    CHECK_THAT(rep.p_nli, WithinRel(0.8 * res.g_nli * sc.channels[0].symbol_rate, 1e-14));
}

TEST_CASE("gsnr sentinel at zero NLI") {
    auto sc = two_channel_scenario();
    sc.rho_correction = {0.0, 1.0};
    EngineOptions opts;
    const auto rep = evaluate_link(sc, prepare_spans(sc, opts), opts);
    CHECK(std::isinf(rep.cuts[0].gsnr_nli_db));
    CHECK(rep.cuts[0].gsnr_nli_db > 0.0);
}

TEST_CASE("gsnr arithmetic: 1 mW signal over 1 uW NLI is 30 dB") {
    CutReport rep;
    rep.p_sig_rx = 1e-3;
    rep.p_nli = 1e-6;
    rep.gsnr_nli_db = 10.0 * std::log10(rep.p_sig_rx / rep.p_nli);
    CHECK_THAT(gsnr_nli(rep), WithinRel(30.0, 1e-14));
}

TEST_CASE("span permutation invariance for identical spans") {
    const auto sc = two_channel_scenario(3);
    EngineOptions opts;
    const auto prepared = prepare_spans(sc, opts);
    std::vector<SpanResult> srs;
    for (size_t s = 0; s < 3; ++s) srs.push_back(span_nli(sc, sc.spans[s], prepared[s], 0, opts));
    auto permuted = srs;
    std::swap(permuted[0], permuted[2]);
    const auto a = accumulate_link(sc, srs, 0);
    const auto b = accumulate_link(sc, permuted, 0);
    CHECK(a.p_nli == b.p_nli);
}

TEST_CASE("parallel evaluation matches serial") {
    const auto sc = two_channel_scenario(2);
    EngineOptions serial, parallel;
    serial.threads = 1;
    parallel.threads = 4;
    const auto prepared = prepare_spans(sc, serial);
    const auto a = evaluate_link(sc, prepared, serial);
    const auto b = evaluate_link(sc, prepared, parallel);
    REQUIRE(a.cuts.size() == b.cuts.size());
    for (size_t i = 0; i < a.cuts.size(); ++i) {
        CHECK(a.cuts[i].p_nli == b.cuts[i].p_nli);
        CHECK(a.cuts[i].gsnr_nli_db == b.cuts[i].gsnr_nli_db);
    }
}

TEST_CASE("oracle kernel mode runs through the engine") {
    auto sc = two_channel_scenario();
    sc.cut_indices = {0};
    EngineOptions closed, numeric;
    numeric.mode = KernelMode::oracle;
    numeric.oracle_settings.rel_tol = 1e-5;
    const auto prepared = prepare_spans(sc, closed);
    const auto a = evaluate_link(sc, prepared, closed);
    const auto b = evaluate_link(sc, prepared, numeric);
    // closed form carries fit + limit-extension error; agreement is loose
    CHECK_THAT(a.cuts[0].p_nli, WithinRel(b.cuts[0].p_nli, 0.05));
}

TEST_CASE("csv emission format") {
    const auto sc = two_channel_scenario();
    EngineOptions opts;
    const auto rep = evaluate_link(sc, prepare_spans(sc, opts), opts);
    const auto csv = emit_link_csv(sc, rep);
    CHECK(csv.rfind("cut, f_center_GHz, P_launch_dBm, G_nli_W_per_Hz, P_nli_dBm, GSNR_nli_dB\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + one row per CUT

    const auto breakdown = emit_span_breakdown_csv(rep);
    CHECK(breakdown.rfind("cut, span,", 0) == 0);
}

TEST_CASE("missing fits are rejected") {
    const auto sc = two_channel_scenario();
    EngineOptions opts;
    auto prep = prepare_span(sc, sc.spans[0], opts);
    prep.fits.pop_back();
    CHECK_THROWS_AS(span_nli(sc, sc.spans[0], prep, 0, opts), ValidationError);
}
