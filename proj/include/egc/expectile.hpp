#pragma once

// Expectiles: minimizers of the asymmetric squared loss
//   R_tau(x - m) = tau (x-m)_+^2 + (1-tau) (x-m)_-^2.
// The first-order condition sets the mean of psi_tau(x, m) to zero, where
// psi is continuous, strictly increasing and piecewise linear in m, so a
// Newton iteration safeguarded by bisection converges reliably.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "egc/math.hpp"

namespace egc {

inline void check_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("tau must lie in (0,1)");
}

/// R_tau applied to a residual r = x - m.
inline double asymmetric_loss(double tau, double r) {
    const double w = (r >= 0.0) ? tau : 1.0 - tau;
    return w * r * r;
}

/// d/dm R_tau(x - m); equals 2 tau (m-x) for m <= x, else 2 (1-tau) (m-x).
inline double loss_derivative(double tau, double x, double m) {
    const double w = (m <= x) ? tau : 1.0 - tau;
    return 2.0 * w * (m - x);
}

/// Expectile of an empirical sample at level tau.  Newton on the score with
/// bisection safeguard inside the bracket [min(sample), max(sample)].
inline double empirical_expectile(std::span<const double> sample, double tau,
                                  double tol = 1e-10, int max_iter = 100) {
    check_tau(tau);
    if (sample.empty()) throw std::invalid_argument("empirical_expectile: empty sample");
    const std::size_t n = sample.size();
    double lo = sample[0], hi = sample[0], sum = 0.0;
    for (double x : sample) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    if (lo == hi) return lo;
    double m = std::clamp(sum / double(n), lo, hi);
    for (int it = 0; it < max_iter; ++it) {
        double z = 0.0, slope = 0.0;
        for (double x : sample) {
            const double w = (m <= x) ? tau : 1.0 - tau;
            z += 2.0 * w * (m - x);
            slope += 2.0 * w;
        }
        z /= double(n);
        slope /= double(n);
        if (std::fabs(z) <= tol) return m;
        if (z > 0.0) hi = m; else lo = m;
        double next = m - z / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * (1.0 + std::fabs(m))) return next;
        m = next;
    }
    return m;
}

/// Expectile of N(mean, sd^2).  For the standard normal the defining balance
///   tau E(U-m)_+ = (1-tau) E(m-U)_+
/// uses the partial moments E(U-m)_+ = phi(m) - m (1-Phi(m)) and
/// E(m-U)_+ = m Phi(m) + phi(m).
inline double normal_expectile(double tau, double mean = 0.0, double sd = 1.0) {
    check_tau(tau);
    if (!(sd > 0.0)) throw std::domain_error("normal_expectile: sd must be positive");
    if (tau == 0.5) return mean;
    auto score = [tau](double m) {
        const double phi = math::norm_pdf(m);
        const double Phi = math::norm_cdf(m);
        const double upper = phi - m * (1.0 - Phi);
        const double lower = m * Phi + phi;
        return (1.0 - tau) * lower - tau * upper;
    };
    double lo = -1.0, hi = 1.0;
    while (score(lo) > 0.0) lo *= 2.0;
    while (score(hi) < 0.0) hi *= 2.0;
    double m = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double z = score(m);
        if (std::fabs(z) <= 1e-14) break;
        if (z > 0.0) hi = m; else lo = m;
        const double Phi = math::norm_cdf(m);
        const double slope = (1.0 - tau) * Phi + tau * (1.0 - Phi);
        double next = m - z / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - m) <= 1e-15 * (1.0 + std::fabs(m))) { m = next; break; }
        m = next;
    }
    return mean + sd * m;
}

/// Mean of R_tau(observation - prediction) over paired arrays.
inline double mean_expectile_loss(std::span<const double> observations,
                                  std::span<const double> predictions, double tau) {
    check_tau(tau);
    if (observations.size() != predictions.size() || observations.empty())
        throw std::invalid_argument("mean_expectile_loss: need matching non-empty arrays");
    double s = 0.0;
    for (std::size_t i = 0; i < observations.size(); ++i)
        s += asymmetric_loss(tau, observations[i] - predictions[i]);
    return s / double(observations.size());
}

} // namespace egc
