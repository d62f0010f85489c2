#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include <nlikit/spp.hpp>
#include <nlikit/units.hpp>

using namespace nlikit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("flat loss profile") {
    const double alpha = units::loss_db_per_km_to_alpha(0.2);
    const auto z = make_grid(1e5, 101);
    const auto p = spp_flat_loss(alpha, z);
    CHECK(p.front() == 1.0);
    CHECK_THAT(p.back(), WithinRel(1e-2, 1e-12));
    CHECK_THAT(p[50], WithinRel(std::exp(-2.0 * alpha * z[50]), 1e-14));
}

TEST_CASE("analytic ISRS profile matches direct quadrature of alpha(z)") {
    AnalyticAlphaParams ap{units::per_km_to_si(0.02), units::per_km_to_si(0.01),
                           units::per_km_to_si(0.05)};
    const auto z = make_grid(8e4, 65);
    const auto p = spp_analytic_isrs(ap, z);
    // composite Simpson on a fine grid as an independent oracle
    for (size_t idx : {size_t{10}, size_t{32}, size_t{64}}) {
        const double zz = z[idx];
        const size_t n = 20000;
        double integral = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double a = zz * i / n, b = zz * (i + 1) / n, m = 0.5 * (a + b);
            auto alpha = [&](double x) { return ap.alpha0 + ap.alpha1 * std::exp(-ap.sigma * x); };
            integral += (b - a) / 6.0 * (alpha(a) + 4.0 * alpha(m) + alpha(b));
        }
        CHECK_THAT(p[idx], WithinRel(std::exp(-2.0 * integral), 1e-10));
    }
}

TEST_CASE("analytic ISRS with alpha1 = 0 degenerates to flat loss") {
    AnalyticAlphaParams ap{1e-5, 0.0, 0.0};
    const auto z = make_grid(5e4, 64);
    CHECK(spp_analytic_isrs(ap, z) == spp_flat_loss(1e-5, z));
}

TEST_CASE("lumped loss inserts an exact step") {
    const double alpha = units::loss_db_per_km_to_alpha(0.2);
    SppSamples spp;
    spp.z = make_grid(1e5, 401);  // 250 m spacing puts a sample exactly at 5 km
    spp.p.push_back(spp_flat_loss(alpha, spp.z));
    const auto out = apply_lumped_loss(spp, 5e3, 2.0);
    out.validate();

    const double factor = std::pow(10.0, -0.2);
    // step is exact across the doubled node
    auto it = std::lower_bound(out.z.begin(), out.z.end(), 5e3);
    const size_t i = static_cast<size_t>(it - out.z.begin());
    REQUIRE(out.z[i] == 5e3);
    CHECK_THAT(out.p[0][i], WithinRel(std::exp(-2.0 * alpha * 5e3), 1e-12));
    CHECK_THAT(out.p[0][i + 1], WithinRel(std::exp(-2.0 * alpha * 5e3) * factor, 1e-12));
    // end of span carries the extra 2 dB
    CHECK_THAT(out.p[0].back(), WithinRel(1e-2 * factor, 1e-12));

    CHECK_THROWS_AS(apply_lumped_loss(spp, 0.0, 2.0), ValidationError);
    CHECK_THROWS_AS(apply_lumped_loss(spp, 1e5, 2.0), ValidationError);
}

TEST_CASE("raman ode: single wave with zero gain decays exponentially") {
    const double alpha = units::loss_db_per_km_to_alpha(0.2);
    std::vector<RamanWave> waves{{193.4e12, 1e-3, alpha, false, true}};
    RamanParams par;  // gain_slope = 0
    const auto grid = make_grid(8e4, 513);
    const auto res = spp_raman_ode(waves, par, grid);
    REQUIRE(res.channels.p.size() == 1);
    for (size_t i = 0; i < grid.size(); i += 32)
        CHECK_THAT(res.channels.p[0][i], WithinRel(std::exp(-2.0 * alpha * grid[i]), 1e-9));
}

TEST_CASE("raman ode: photon count conserved for lossless forward waves") {
    RamanParams par;
    par.gain_slope = units::raman_slope_to_si(0.4);
    std::vector<RamanWave> waves{
        {190.0e12, 2e-3, 0.0, false, true},
        {193.0e12, 1e-3, 0.0, false, true},
        {196.0e12, 1.5e-3, 0.0, false, true},
    };
    const auto grid = make_grid(8e4, 513);
    const auto res = spp_raman_ode(waves, par, grid);
    const auto& raw = res.raw_powers;
    double n0 = 0.0;
    for (size_t w = 0; w < waves.size(); ++w) n0 += raw[w][0] / waves[w].f_abs;
    for (size_t i = 0; i < grid.size(); i += 64) {
        double n = 0.0;
        for (size_t w = 0; w < waves.size(); ++w) n += raw[w][i] / waves[w].f_abs;
        CHECK_THAT(n, WithinRel(n0, 1e-9));
    }
    // power must flow downward in frequency
    CHECK(raw[0].back() > raw[0].front());
    CHECK(raw[2].back() < raw[2].front());
}

TEST_CASE("raman ode: weak pump matches first-order perturbation") {
    const double alpha = units::loss_db_per_km_to_alpha(0.2);
    const double alpha_p = units::loss_db_per_km_to_alpha(0.25);
    RamanParams par;
    par.gain_slope = units::raman_slope_to_si(0.01);  // weak coupling
    const double fp = 206.0e12, fc = 193.0e12, pp = 1e-4;
    std::vector<RamanWave> waves{
        {fc, 1e-3, alpha, false, true},
        {fp, pp, alpha_p, false, false},
    };
    const auto grid = make_grid(8e4, 1025);
    const auto res = spp_raman_ode(waves, par, grid);
    // P_c(z) ~ exp(-2 a z + C_R df int_0^z P_p), P_p ~ pp exp(-2 a_p z)
    for (size_t i = 0; i < grid.size(); i += 128) {
        const double zz = grid[i];
        const double ip = pp * (-std::expm1(-2.0 * alpha_p * zz)) / (2.0 * alpha_p);
        const double expect = std::exp(-2.0 * alpha * zz + par.gain_slope * (fp - fc) * ip);
        CHECK_THAT(res.channels.p[0][i], WithinRel(expect, 1e-5));
    }
}

TEST_CASE("raman ode: backward pump converges and amplifies the span end") {
    const double alpha = units::loss_db_per_km_to_alpha(0.2);
    RamanParams par;
    par.gain_slope = units::raman_slope_to_si(0.028);
    std::vector<RamanWave> waves{
        {193.0e12, 1e-3, alpha, false, true},
        {206.0e12, 0.2, units::loss_db_per_km_to_alpha(0.25), true, false},
    };
    const auto grid = make_grid(8e4, 513);
    const auto res = spp_raman_ode(waves, par, grid);
    CHECK(res.iterations > 1);
    CHECK(res.residual <= par.rel_tol);
    const double flat_end = std::exp(-2.0 * alpha * 8e4);
    CHECK(res.channels.p[0].back() > flat_end);  // pump lifts the tail
    // backward pump boundary power applies at z = L and decays toward z = 0
    CHECK_THAT(res.raw_powers[1].back(), WithinRel(0.2, 1e-9));
    CHECK(res.raw_powers[1].front() < res.raw_powers[1].back());
    CHECK(res.raw_powers[1].front() <
          0.2 * std::exp(-2.0 * units::loss_db_per_km_to_alpha(0.25) * 8e4) * 1.01);

    // self-convergence under grid refinement
    const auto res2 = spp_raman_ode(waves, par, make_grid(8e4, 1025));
    CHECK_THAT(res.channels.p[0].back(), WithinRel(res2.channels.p[0].back(), 1e-3));
}

TEST_CASE("spp table round trip") {
    SppSamples spp;
    spp.z = make_grid(5e4, 64);
    spp.p.push_back(spp_flat_loss(1e-5, spp.z));
    spp.p.push_back(spp_flat_loss(2e-5, spp.z));
    const auto text = emit_spp(spp);
    CHECK(text.substr(0, 16) == "z_km, ch_0, ch_1");
    const auto back = load_external_spp(text);
    REQUIRE(back.p.size() == 2);
    REQUIRE(back.z.size() == spp.z.size());
    for (size_t i = 0; i < spp.z.size(); ++i) {
        CHECK_THAT(back.z[i], WithinAbs(spp.z[i], 1e-9));
        CHECK_THAT(back.p[0][i], WithinRel(spp.p[0][i], 1e-15));
        CHECK_THAT(back.p[1][i], WithinRel(spp.p[1][i], 1e-15));
    }
}

TEST_CASE("external spp renormalization warning") {
    std::string text = "z_km, ch_0\n0, 0.98\n1, 0.5\n2, 0.25\n";
    std::string warning;
    const auto spp = load_external_spp(text, &warning);
    CHECK(spp.p[0][0] == 1.0);
    CHECK_THAT(spp.p[0][1], WithinRel(0.5 / 0.98, 1e-15));
    CHECK(!warning.empty());

    CHECK_THROWS_AS(load_external_spp(""), ParseError);
    CHECK_THROWS_AS(load_external_spp("z_km, ch_0\n0, 1\n0, 0.9\n"), ParseError);
    CHECK_THROWS_AS(load_external_spp("z_km, ch_0\n0, 1\n1, -0.5\n"), ParseError);
    CHECK_THROWS_AS(load_external_spp("z_km, ch_0\n0, 1\n1, abc\n"), ParseError);
}
