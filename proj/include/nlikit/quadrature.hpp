#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nlikit/errors.hpp"

namespace nlikit::quad {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (positive half; symmetric).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// 7-point Gauss weights matching nodes 1, 3, 5, 7 above.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Budget {
    std::int64_t max_evals = 50'000'000;
    std::int64_t used = 0;
    const std::atomic<bool>* cancel = nullptr;  // cooperative cancellation

    void charge(std::int64_t n, const char* who) {
        used += n;
        if (used > max_evals)
            throw NumericError(std::string(who) + ": quadrature evaluation budget exhausted");
        if (cancel && cancel->load(std::memory_order_relaxed))
            throw NumericError(std::string(who) + ": cancelled");
    }
};

namespace detail {

template <class F>
inline void gk15(const F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    const double fc = f(c);
    resk = kKronrodWeights[7] * fc;
    resg = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = h * kKronrodNodes[i];
        const double fs = f(c - x) + f(c + x);
        resk += kKronrodWeights[i] * fs;
        if (i % 2 == 1) resg += kGaussWeights[i / 2] * fs;
    }
    result = resk * h;
    err = std::abs((resk - resg) * h);
}

struct Interval {
    double a, b, value, err;
};

}  // namespace detail

// Globally adaptive GK15. Terminates when the summed error estimate is below
// max(abs_tol, rel_tol * |integral|). `achieved` (optional) receives the
// final error estimate.
template <class F>
double adaptive_gk(const F& f, double a, double b, double rel_tol, double abs_tol,
                   Budget& budget, double* achieved = nullptr,
                   const char* who = "adaptive_gk") {
    if (a == b) {
        if (achieved) *achieved = 0.0;
        return 0.0;
    }
    budget.charge(15, who);
    std::vector<detail::Interval> heap;
    detail::Interval root{a, b, 0, 0};
    detail::gk15(f, a, b, root.value, root.err);
    heap.push_back(root);
    auto cmp = [](const detail::Interval& x, const detail::Interval& y) {
        return x.err < y.err;
    };
    std::make_heap(heap.begin(), heap.end(), cmp);
    double total = root.value, total_err = root.err;

    while (true) {
        const double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (total_err <= tol || heap.empty()) break;
        std::pop_heap(heap.begin(), heap.end(), cmp);
        detail::Interval worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval below representable resolution; keep its estimate
            total_err -= worst.err;
            total_err += worst.err * 1e-3;
            continue;
        }
        budget.charge(30, who);
        detail::Interval left{worst.a, mid, 0, 0}, right{mid, worst.b, 0, 0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), cmp);
    }
    if (achieved) *achieved = total_err;
    return total;
}

// 15-point Gauss-Legendre nodes/weights on [-1,1] (positive half).
inline constexpr std::array<double, 8> kGl15Nodes = {
    0.000000000000000000000000000000000,
    0.201194093997434522300628303394596,
    0.394151347077563369897207370981045,
    0.570972172608538847537226737253911,
    0.724417731360170047416186054613938,
    0.848206583410427216200648320774217,
    0.937273392400705904307758947710209,
    0.987992518020485428489565718586613};

inline constexpr std::array<double, 8> kGl15Weights = {
    0.202578241925561272880620199967519,
    0.198431485327111576456118326443839,
    0.186161000015562211026800561866423,
    0.166269205816993933553200860481209,
    0.139570677926154314447804794511028,
    0.107159220467171935011869546685869,
    0.070366047488108124709267416450667,
    0.030753241996117268354628393577204};

// Fixed 15-point Gauss-Legendre on [a, b]; no error estimate, for smooth panels.
template <class F>
double gl15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = kGl15Weights[0] * f(c);
    for (int i = 1; i < 8; ++i) {
        const double x = h * kGl15Nodes[i];
        s += kGl15Weights[i] * (f(c - x) + f(c + x));
    }
    return s * h;
}

}  // namespace nlikit::quad
