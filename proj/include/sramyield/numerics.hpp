#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include "sramyield/errors.hpp"

namespace sramyield::numerics {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

/// Inverse of normal_cdf on (0, 1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

/// Adaptive Simpson quadrature with Richardson correction. `rel_tol` is
/// relative to the magnitude of the whole-interval estimate.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-10, int max_depth = 50) {
    if (a == b) return 0.0;
    struct Segment {
        double a, b, fa, fm, fb, whole;
    };
    auto simpson = [](double a_, double b_, double fa, double fm, double fb) {
        return (b_ - a_) / 6.0 * (fa + 4.0 * fm + fb);
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = simpson(a, b, fa, fm, fb);
    const double abs_tol = std::max(rel_tol * std::abs(whole), std::numeric_limits<double>::min());

    std::function<double(const Segment&, double, int)> recurse = [&](const Segment& s, double tol, int depth) {
        const double m = 0.5 * (s.a + s.b);
        const double lm = 0.5 * (s.a + m), rm = 0.5 * (m + s.b);
        const double flm = f(lm), frm = f(rm);
        const double left = simpson(s.a, m, s.fa, flm, s.fm);
        const double right = simpson(m, s.b, s.fm, frm, s.fb);
        const double delta = left + right - s.whole;
        if (depth <= 0) {
            throw NumericalError("adaptive Simpson reached maximum depth", std::abs(delta) / 15.0);
        }
        if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
        return recurse({s.a, m, s.fa, flm, s.fm, left}, 0.5 * tol, depth - 1) +
               recurse({m, s.b, s.fm, frm, s.fb, right}, 0.5 * tol, depth - 1);
    };
    return recurse({a, b, fa, fm, fb, whole}, abs_tol, max_depth);
}

/// Adaptive 31-point Gauss-Kronrod. Throws NumericalError carrying the
/// achieved relative error when `rel_tol` is not met.
template <typename F>
double integrate_gk(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 15) {
    if (a == b) return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &error, &l1);
    const double scale = std::max(std::abs(value), l1);
    if (!std::isfinite(value) || (scale > 0.0 && error > 10.0 * rel_tol * scale && error > 1e-300)) {
        throw NumericalError("Gauss-Kronrod quadrature did not converge", scale > 0.0 ? error / scale : error);
    }
    return value;
}

/// Bracketed root of a monotone function via TOMS 748.
template <typename F>
double find_root(F&& f, double lo, double hi, double rel_tol = 1e-14, std::uintmax_t max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw RangeError("root is not bracketed");
    const int bits = std::max(1, static_cast<int>(-std::log2(rel_tol)));
    boost::math::tools::eps_tolerance<double> tol(std::min(bits, std::numeric_limits<double>::digits - 2));
    std::uintmax_t iters = max_iter;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (a + b);
}

}  // namespace sramyield::numerics
