#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include <nlikit/gn_oracle.hpp>
#include <nlikit/kernels.hpp>
#include <nlikit/units.hpp>

using namespace nlikit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// exact int_0^L p(z)^2 dz for a polynomial profile
double poly_square_integral(const PolySpp& poly, double length) {
    double s = 0.0;
    for (int n = 0; n <= poly.degree; ++n)
        for (int k = 0; k <= poly.degree; ++k)
            s += poly.coeffs[static_cast<size_t>(n)] * poly.coeffs[static_cast<size_t>(k)] *
                 std::pow(length, n + k + 1) / (n + k + 1.0);
    return s;
}

PolySpp random_poly(int degree, std::mt19937& rng, double length) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    PolySpp poly;
    poly.degree = degree;
    poly.coeffs.assign(static_cast<size_t>(degree) + 1, 0.0);
    poly.coeffs[0] = 1.0;
    for (int n = 1; n <= degree; ++n)
        poly.coeffs[static_cast<size_t>(n)] = dist(rng) / std::pow(length, n);
    return poly;
}

}  // namespace

TEST_CASE("xci bracket equals the mean-square profile") {
    std::mt19937 rng(42);
    const double length = 8e4;
    for (int degree = 0; degree <= 9; ++degree) {
        const auto poly = random_poly(degree, rng, length);
        const double bracket = xci_bracket(poly, length);
        const double direct = poly_square_integral(poly, length) / length;
        INFO("degree " << degree);
        CHECK_THAT(bracket, WithinRel(direct, 1e-12));
    }
}

TEST_CASE("xci guard") {
    // |beta2| = 21.3 ps^2/km, R = 64 GBaud -> 21.3 * 4096 = 87244.8 > 3000
    const auto pass = guard_xci(-21.3e-27, 64e9);
    CHECK(pass.pass);
    CHECK_THAT(pass.value, WithinRel(87244.8, 1e-12));
    // |beta2| = 1 ps^2/km, R = 32 GBaud -> 1024 < 3000
    const auto fail = guard_xci(-1e-27, 32e9);
    CHECK_FALSE(fail.pass);
    CHECK(fail.margin < 0.0);
    // threshold is strict
    CHECK_FALSE(guard_xci(-3e-27, std::sqrt(1e3) * 1e9 * std::sqrt(1.0)).pass);
}

TEST_CASE("xci closed form error paths") {
    KernelInput in;
    in.poly.degree = 0;
    in.poly.coeffs = {1.0};
    in.length = 8e4;
    in.beta2_eff = 0.0;
    in.f_center_rel = 1e11;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;
    CHECK_THROWS_AS(k_xci_closed(in), NumericError);  // beta2 = 0
    in.beta2_eff = -21.3e-27;
    in.f_center_rel = 3e10;  // band reaches the CUT center
    CHECK_THROWS_AS(k_xci_closed(in), ValidationError);
}

TEST_CASE("xci closed form symmetries") {
    std::mt19937 rng(7);
    KernelInput in;
    in.poly = random_poly(5, rng, 8e4);
    in.length = 8e4;
    in.beta2_eff = -21.3e-27;
    in.f_center_rel = 4e11;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;
    const double base = k_xci_closed(in).value;
    CHECK(base > 0.0);

    // even in the interferer offset
    in.f_center_rel = -4e11;
    CHECK_THAT(k_xci_closed(in).value, WithinRel(base, 1e-14));
    in.f_center_rel = 4e11;

    // even in beta2
    in.beta2_eff = 21.3e-27;
    CHECK_THAT(k_xci_closed(in).value, WithinRel(base, 1e-14));
    in.beta2_eff = -21.3e-27;

    // quadratic in the profile scale
    auto scaled = in;
    for (auto& c : scaled.poly.coeffs) c *= 3.0;
    CHECK_THAT(k_xci_closed(scaled).value, WithinRel(9.0 * base, 1e-13));
}

TEST_CASE("xci closed form vs numeric oracle for a far interferer") {
    // far spacing keeps the f1 limit-extension error well below the quadrature
    // tolerance budget of this test
    std::mt19937 rng(11);
    KernelInput in;
    in.poly = random_poly(5, rng, 8e4);
    in.length = 8e4;
    in.beta2_eff = -21.3e-27;
    in.f_center_rel = 3e12;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;
    REQUIRE(guard_xci(in.beta2_eff, in.symbol_rate).pass);

    const double closed = k_xci_closed(in).value;
    oracle::OracleSettings settings;
    settings.rel_tol = 1e-7;
    const oracle::PolyProfile profile{in.poly, in.length};
    const auto numeric = oracle::k_xci_numeric(profile, in.beta2_eff, in.f_center_rel,
                                               in.symbol_rate, in.symbol_rate_cut, settings);
    CHECK_THAT(closed, WithinRel(numeric.value, 5e-4));
}

TEST_CASE("sci printed form np0 matches the semi-analytic path") {
    KernelInput in;
    in.poly.degree = 0;
    in.poly.coeffs = {0.85};
    in.length = 8e4;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;
    for (double b2 : {-21.3e-27, -2e-27, 2e-27, 30e-27}) {
        in.beta2_eff = b2;
        const auto printed = k_sci_closed_np0(in);
        const auto semi = k_sci_semianalytic(in, 1e-11);
        INFO("beta2 = " << b2);
        CHECK_THAT(printed.value, WithinRel(semi.value, 1e-8));
    }
}

TEST_CASE("sci printed form np1 matches the semi-analytic path") {
    KernelInput in;
    in.poly.degree = 1;
    in.poly.coeffs = {1.0, -0.9 / 8e4};
    in.length = 8e4;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;
    for (double b2 : {-21.3e-27, -5e-27, 5e-27, 25e-27}) {
        in.beta2_eff = b2;
        const auto printed = k_sci_closed_np1(in);
        const auto semi = k_sci_semianalytic(in, 1e-11);
        INFO("beta2 = " << b2);
        CHECK_THAT(printed.value, WithinRel(semi.value, 1e-8));
    }
}

TEST_CASE("sci kernels at zero dispersion equal R^2 (int p)^2") {
    KernelInput in;
    in.poly.degree = 1;
    in.poly.coeffs = {1.0, -0.5 / 5e4};
    in.length = 5e4;
    in.beta2_eff = 0.0;
    in.symbol_rate = 32e9;
    in.symbol_rate_cut = 32e9;
    const double ip = poly_profile_integral(in.poly, in.length);
    const double expect = in.symbol_rate * in.symbol_rate * ip * ip;
    CHECK_THAT(k_sci_semianalytic(in).value, WithinRel(expect, 1e-14));
    CHECK_THAT(k_sci(in).value, WithinRel(expect, 1e-9));  // printed form delegates near x = 0
}

TEST_CASE("sci kernel continuity across the small-x delegation point") {
    // scan x = pi^2 b2 R^2 L through the handover; values must vary smoothly
    KernelInput in;
    in.poly.degree = 0;
    in.poly.coeffs = {1.0};
    in.length = 1e3;
    in.symbol_rate = 32e9;
    in.symbol_rate_cut = 32e9;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double prev = -1.0;
    for (double x = 0.02; x < 0.12; x += 0.005) {
        in.beta2_eff = x / (pi2 * in.symbol_rate * in.symbol_rate * in.length);
        const double v = k_sci(in).value;
        if (prev > 0.0) CHECK_THAT(v, WithinRel(prev, 1e-3));
        prev = v;
    }
}

TEST_CASE("sci semi-analytic is even in beta2 and quadratic in the profile") {
    std::mt19937 rng(3);
    KernelInput in;
    in.poly = random_poly(5, rng, 8e4);
    in.length = 8e4;
    in.beta2_eff = -21.3e-27;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;
    const double base = k_sci_semianalytic(in, 1e-10).value;
    CHECK(base > 0.0);
    in.beta2_eff = 21.3e-27;
    CHECK_THAT(k_sci_semianalytic(in, 1e-10).value, WithinRel(base, 1e-9));
    in.beta2_eff = -21.3e-27;
    auto scaled = in;
    for (auto& c : scaled.poly.coeffs) c *= 2.0;
    CHECK_THAT(k_sci_semianalytic(scaled, 1e-10).value, WithinRel(4.0 * base, 1e-9));
}

TEST_CASE("sci dispatch selects by degree") {
    KernelInput in;
    in.length = 8e4;
    in.beta2_eff = -21.3e-27;
    in.symbol_rate = 64e9;
    in.symbol_rate_cut = 64e9;

    in.poly.degree = 0;
    in.poly.coeffs = {1.0};
    CHECK_THAT(k_sci(in).value, WithinRel(k_sci_closed_np0(in).value, 1e-15));

    in.poly.degree = 1;
    in.poly.coeffs = {1.0, -1e-5};
    CHECK_THAT(k_sci(in).value, WithinRel(k_sci_closed_np1(in).value, 1e-15));

    in.poly.degree = 2;
    in.poly.coeffs = {1.0, -1e-5, 3e-11};
    CHECK_THAT(k_sci(in).value, WithinRel(k_sci_semianalytic(in).value, 1e-12));
}

TEST_CASE("printed forms reject the wrong degree") {
    KernelInput in;
    in.poly.degree = 1;
    in.poly.coeffs = {1.0, -1e-5};
    in.length = 8e4;
    in.beta2_eff = -21.3e-27;
    in.symbol_rate = 64e9;
    CHECK_THROWS_AS(k_sci_closed_np0(in), ValidationError);
    in.poly.degree = 0;
    in.poly.coeffs = {1.0};
    CHECK_THROWS_AS(k_sci_closed_np1(in), ValidationError);
}
