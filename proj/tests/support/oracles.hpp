#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the traversal or likelihood code it is used to check.

#include "pef/inference.hpp"
#include "pef/raster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace pef::oracle {

/// Per-type length beyond d0 of the line tx -> rx, by chopping it into `samples`
/// equal pieces and attributing each to the cell under its midpoint.
inline std::vector<double> dense_type_lengths(const RegionGrid& grid, Point tx, Point rx, double d0,
                                              long samples = 1'000'000)
{
    std::vector<double> out(static_cast<std::size_t>(grid.type_count), 0.0);
    const double len = std::hypot(rx.x - tx.x, rx.y - tx.y);
    const double piece = len / static_cast<double>(samples);
    for (long s = 0; s < samples; ++s) {
        const double t = (static_cast<double>(s) + 0.5) / static_cast<double>(samples);
        if (t * len <= d0) {
            continue;
        }
        const double x = tx.x + t * (rx.x - tx.x);
        const double y = tx.y + t * (rx.y - tx.y);
        const int col = std::min(static_cast<int>(x / grid.meters_per_pixel), grid.width - 1);
        const int row = std::min(static_cast<int>(y / grid.meters_per_pixel), grid.height - 1);
        out[static_cast<std::size_t>(grid.label(col, row))] += piece;
    }
    return out;
}

/// log(1 - Phi(z)) straight from erfcl in extended precision.
inline long double log_upper_tail_ld(long double z)
{
    return std::log(0.5L * std::erfc(z / std::sqrt(2.0L)));
}

/// Truncated-Gaussian log-likelihood written directly from the density,
/// in long double.
inline long double loglik_ld(const DesignMatrix& design, long double c, const std::vector<long double>& n,
                             long double sigma)
{
    const long double pi = 3.141592653589793238462643383279502884L;
    long double total = 0.0L;
    for (std::size_t k = 0; k < design.size(); ++k) {
        long double mu = c;
        const auto d = design.coeffs(k);
        for (std::size_t i = 0; i < d.size(); ++i) {
            mu += static_cast<long double>(d[i]) * n[i];
        }
        const long double r = design.observed(k) - mu;
        long double term = -std::log(std::sqrt(2.0L * pi) * sigma) - r * r / (2.0L * sigma * sigma);
        if (design.truncated()) {
            term -= log_upper_tail_ld((mu - design.truncation()) / sigma);
        }
        total += term;
    }
    return total;
}

/// Fourth-order central difference of the long-double log-likelihood with
/// respect to parameter `j` of (n_1..n_I, C, sigma).
inline double finite_difference(const DesignMatrix& design, const PefParams& p, std::size_t j, long double h)
{
    auto eval = [&](long double delta) {
        std::vector<long double> n(p.exponents.begin(), p.exponents.end());
        long double c = p.intercept_c;
        long double s = p.sigma;
        const std::size_t I = n.size();
        if (j < I) {
            n[j] += delta;
        } else if (j == I) {
            c += delta;
        } else {
            s += delta;
        }
        return loglik_ld(design, c, n, s);
    };
    const long double v = (-eval(2 * h) + 8 * eval(h) - 8 * eval(-h) + eval(-2 * h)) / (12 * h);
    return static_cast<double>(v);
}

/// Adaptive Simpson quadrature in long double.
inline long double adaptive_simpson(const std::function<long double(long double)>& f, long double a, long double b,
                                    long double tol, int depth = 60)
{
    std::function<long double(long double, long double, long double, long double, long double, long double,
                              int)>
        rec = [&](long double lo, long double hi, long double flo, long double fmid, long double fhi,
                  long double whole, int d) -> long double {
        const long double mid = 0.5L * (lo + hi);
        const long double lm = 0.5L * (lo + mid);
        const long double rm = 0.5L * (mid + hi);
        const long double flm = f(lm);
        const long double frm = f(rm);
        const long double left = (mid - lo) / 6.0L * (flo + 4.0L * flm + fmid);
        const long double right = (hi - mid) / 6.0L * (fmid + 4.0L * frm + fhi);
        if (d <= 0 || std::fabs(left + right - whole) <= 15.0L * tol) {
            return left + right + (left + right - whole) / 15.0L;
        }
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
    };
    const long double fa = f(a);
    const long double fb = f(b);
    const long double fm = f(0.5L * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0L * (fa + 4.0L * fm + fb), depth);
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic against `cdf`.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Asymptotic KS critical value at alpha = 0.01.
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace pef::oracle
