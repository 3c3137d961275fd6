#pragma once

// Scalar distribution functions used throughout the library: standard normal,
// Student t with real dof, the F tail, and the first Debye function.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace egc::math {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;

inline double norm_pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Wichura's PPND16 rational approximation, |error| < 1e-15 over (0,1).
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("norm_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

inline double student_t_log_pdf(double x, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * pi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

inline double student_t_pdf(double x, double nu) { return std::exp(student_t_log_pdf(x, nu)); }

inline double student_t_cdf(double x, double nu) {
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    const double z = nu / (nu + x * x);
    const double half_tail = 0.5 * inc_beta(0.5 * nu, 0.5, z);
    return x > 0.0 ? 1.0 - half_tail : half_tail;
}

// Quantile by safeguarded Newton on the cdf; exact symmetry about p = 1/2.
inline double student_t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("student_t_quantile: p outside [0,1]");
    }
    if (p == 0.5) return 0.0;
    const bool upper = p > 0.5;
    const double pl = upper ? 1.0 - p : p;  // pl in (0, 1/2]
    // Initial guess: normal score with a Cornish-Fisher dof correction, then a
    // power-law tail guess when that underestimates badly.
    const double z = norm_quantile(pl);
    double x = z + (z * z * z + z) / (4.0 * nu) +
               (5.0 * z * z * z * z * z + 16.0 * z * z * z + 3.0 * z) / (96.0 * nu * nu);
    if (!(x < 0.0)) x = z;
    // Bracket [lo, hi] with cdf(lo) <= pl <= cdf(hi), both negative tail side.
    double lo = x, hi = 0.0;
    while (student_t_cdf(lo, nu) > pl) lo = (lo < -1.0) ? lo * 2.0 : lo - 1.0;
    x = std::min(std::max(x, lo), hi);
    for (int it = 0; it < 200; ++it) {
        const double f = student_t_cdf(x, nu) - pl;
        if (std::fabs(f) <= 1e-15 * pl) break;
        if (f > 0.0) hi = x; else lo = x;
        const double dens = student_t_pdf(x, nu);
        double xn = (dens > 0.0) ? x - f / dens : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= 1e-15 * (1.0 + std::fabs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return upper ? -x : x;
}

// P(F(d1, d2) > f).
inline double f_sf(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    return inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

// First Debye function D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt.
inline double debye1(double x) {
    if (x == 0.0) return 1.0;
    const double ax = std::fabs(x);
    double d;
    if (ax < 0.5) {
        // Bernoulli-number series 1 - x/4 + sum B_2k x^2k / ((2k+1)(2k)!).
        const double x2 = ax * ax;
        d = 1.0 - ax / 4.0 +
            x2 * (1.0 / 36.0 +
            x2 * (-1.0 / 3600.0 +
            x2 * (1.0 / 211680.0 +
            x2 * (-1.0 / 10886400.0 +
            x2 * (1.0 / 526901760.0 +
            x2 * (-691.0 / 16999766784000.0 +
            x2 * (1.0 / 1120863744000.0)))))));
    } else {
        // integral_0^x = pi^2/6 - sum_{n>=1} e^{-n x} (x/n + 1/n^2).
        double tail = 0.0;
        for (int n = 1; n <= 200; ++n) {
            const double e = std::exp(-n * ax);
            tail += e * (ax / n + 1.0 / (double(n) * n));
            if (e * (ax + 1.0) < 1e-18) break;
        }
        d = (pi * pi / 6.0 - tail) / ax;
    }
    // D1(-x) = D1(x) + x/2.
    return x > 0.0 ? d : d + ax / 2.0;
}

} // namespace egc::math
