#pragma once

// Simulation designs for the size and power studies, all three-column panels
// (x, y, z).  Two null designs with no cross-series channel:
//
//   s1: independent Gaussian AR(1) columns, coefficient 0.5
//   s2: 0.05 + independent GARCH(1,1) noise with standardized skew-t shocks
//
// and four alternatives in which lagged (y, z) drive x:
//
//   p1: x_t = 0.5 x_{t-1} + 0.2 y_{t-1} + 0.2 z_{t-1} + eta,  y/z AR(1) 0.5
//   p2: x_t = 0.5 x_{t-1} + 5 y_{t-1} z_{t-1} + eta,          y/z AR(1) 0.25
//   p3: x_t = 0.5 x_{t-1} + 5 y_{t-1} z_{t-1} + eta,          y/z iid N(0,1)
//   p4: x_t = 0.5 x_{t-1} + 2.5 y_{t-1} z_{t-1} + garch,      y/z GARCH
//
// The pure-interaction designs p2..p4 leave the conditional mean of x given
// either single lagged cause unchanged, which is what makes them hard for
// linear and pairwise procedures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "egc/expectile.hpp"
#include "egc/math.hpp"
#include "egc/panel.hpp"
#include "egc/rng.hpp"

namespace egc {

enum class DgpTag { s1, s2, p1, p2, p3, p4 };

inline const char* dgp_name(DgpTag tag) {
    switch (tag) {
        case DgpTag::s1: return "s1";
        case DgpTag::s2: return "s2";
        case DgpTag::p1: return "p1";
        case DgpTag::p2: return "p2";
        case DgpTag::p3: return "p3";
        case DgpTag::p4: return "p4";
    }
    throw std::invalid_argument("dgp_name: bad tag");
}

inline DgpTag dgp_from_name(const std::string& s) {
    if (s == "s1") return DgpTag::s1;
    if (s == "s2") return DgpTag::s2;
    if (s == "p1") return DgpTag::p1;
    if (s == "p2") return DgpTag::p2;
    if (s == "p3") return DgpTag::p3;
    if (s == "p4") return DgpTag::p4;
    throw std::invalid_argument("dgp_from_name: unknown design '" + s + "'");
}

/// Published coefficients, kept in one place so tests can pin them.
namespace dgp_constants {
inline constexpr double ar_null = 0.5;          // s1/p1 autoregression
inline constexpr double ar_cause = 0.25;        // p2 cause-series autoregression
inline constexpr double linear_effect = 0.2;    // p1 lagged y/z coefficients
inline constexpr double interaction_strong = 5.0;   // p2/p3
inline constexpr double interaction_garch = 2.5;    // p4
inline constexpr double garch_omega = 0.01;
inline constexpr double garch_alpha = 0.08;
inline constexpr double garch_beta = 0.87;
inline constexpr double s2_mean = 0.05;
inline constexpr double sstd_nu = 5.0;
inline constexpr double sstd_xi = -1.5;
} // namespace dgp_constants

struct DgpSpec {
    DgpTag tag = DgpTag::s1;
    std::size_t burn_in = 500;
};

namespace detail {

/// Fernandez-Steel skew-t with closed-form standardization.  A negative shape
/// mirrors the positive-shape draw, so xi = -1.5 yields negative skewness.
struct SkewT {
    double nu = 5.0;
    double gamma = 1.0;
    double p_right = 0.5;
    double mean = 0.0;
    double sd = 1.0;
    bool mirror = false;

    static SkewT make(double nu, double xi) {
        if (!(nu > 2.0)) throw std::domain_error("skew-t: need nu > 2 for a finite variance");
        if (xi == 0.0 || !std::isfinite(xi))
            throw std::domain_error("skew-t: shape must be finite and nonzero");
        SkewT s;
        s.nu = nu;
        s.gamma = std::fabs(xi);
        s.mirror = xi < 0.0;
        s.p_right = s.gamma * s.gamma / (1.0 + s.gamma * s.gamma);
        const double m1 = 2.0 * std::sqrt(nu / math::pi) *
                          std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                          (nu - 1.0);
        const double m2 = nu / (nu - 2.0);
        const double g = s.gamma;
        s.mean = m1 * (g - 1.0 / g);
        const double second = m2 * (g * g * g + 1.0 / (g * g * g)) / (g + 1.0 / g);
        s.sd = std::sqrt(second - s.mean * s.mean);
        return s;
    }

    double draw(RandomStream& rng) const {
        const double a = std::fabs(math::student_t_quantile(rng.uniform(), nu));
        const double raw = (rng.uniform() < p_right) ? gamma * a : -a / gamma;
        const double z = (raw - mean) / sd;
        return mirror ? -z : z;
    }
};

struct GarchColumn {
    SkewT shock;
    double sigma2;

    explicit GarchColumn(const SkewT& s)
        : shock(s),
          sigma2(dgp_constants::garch_omega /
                 (1.0 - dgp_constants::garch_alpha - dgp_constants::garch_beta)) {}

    double step(RandomStream& rng) {
        const double eps = std::sqrt(sigma2) * shock.draw(rng);
        sigma2 = dgp_constants::garch_omega + dgp_constants::garch_alpha * eps * eps +
                 dgp_constants::garch_beta * sigma2;
        return eps;
    }
};

} // namespace detail

/// n standardized skew-t draws; mean 0, variance 1 by construction.
inline std::vector<double> skewed_t_sample(double nu, double xi, std::size_t n,
                                           RandomStream& rng) {
    const detail::SkewT s = detail::SkewT::make(nu, xi);
    std::vector<double> out(n);
    for (double& v : out) v = s.draw(rng);
    return out;
}

inline SeriesPanel simulate_dgp(const DgpSpec& spec, std::size_t T, RandomStream& rng) {
    if (T < 20) throw std::invalid_argument("simulate_dgp: need T >= 20");
    namespace k = dgp_constants;

    SeriesPanel panel;
    panel.names = {"x", "y", "z"};
    panel.columns.assign(3, std::vector<double>(T));

    RandomStream sx = rng.branch("x"), sy = rng.branch("y"), sz = rng.branch("z");
    const std::size_t total = spec.burn_in + T;

    const auto record = [&](std::size_t step, double x, double y, double z) {
        if (step >= spec.burn_in) {
            panel.columns[0][step - spec.burn_in] = x;
            panel.columns[1][step - spec.burn_in] = y;
            panel.columns[2][step - spec.burn_in] = z;
        }
    };

    switch (spec.tag) {
        case DgpTag::s1: {
            double x = 0.0, y = 0.0, z = 0.0;
            for (std::size_t t = 0; t < total; ++t) {
                x = k::ar_null * x + sx.normal();
                y = k::ar_null * y + sy.normal();
                z = k::ar_null * z + sz.normal();
                record(t, x, y, z);
            }
            break;
        }
        case DgpTag::s2: {
            const auto shock = detail::SkewT::make(k::sstd_nu, k::sstd_xi);
            detail::GarchColumn gx(shock), gy(shock), gz(shock);
            for (std::size_t t = 0; t < total; ++t)
                record(t, k::s2_mean + gx.step(sx), k::s2_mean + gy.step(sy),
                       k::s2_mean + gz.step(sz));
            break;
        }
        case DgpTag::p1: {
            double x = 0.0, y = 0.0, z = 0.0;
            for (std::size_t t = 0; t < total; ++t) {
                const double yl = y, zl = z;
                x = k::ar_null * x + k::linear_effect * yl + k::linear_effect * zl +
                    sx.normal();
                y = k::ar_null * y + sy.normal();
                z = k::ar_null * z + sz.normal();
                record(t, x, y, z);
            }
            break;
        }
        case DgpTag::p2: {
            double x = 0.0, y = 0.0, z = 0.0;
            for (std::size_t t = 0; t < total; ++t) {
                const double yl = y, zl = z;
                x = k::ar_null * x + k::interaction_strong * yl * zl + sx.normal();
                y = k::ar_cause * y + sy.normal();
                z = k::ar_cause * z + sz.normal();
                record(t, x, y, z);
            }
            break;
        }
        case DgpTag::p3: {
            double x = 0.0, y = 0.0, z = 0.0;
            for (std::size_t t = 0; t < total; ++t) {
                const double yl = y, zl = z;
                x = k::ar_null * x + k::interaction_strong * yl * zl + sx.normal();
                y = sy.normal();
                z = sz.normal();
                record(t, x, y, z);
            }
            break;
        }
        case DgpTag::p4: {
            const auto shock = detail::SkewT::make(k::sstd_nu, k::sstd_xi);
            detail::GarchColumn gx(shock), gy(shock), gz(shock);
            double x = 0.0, y = 0.0, z = 0.0;
            for (std::size_t t = 0; t < total; ++t) {
                const double yl = y, zl = z;
                x = k::ar_null * x + k::interaction_garch * yl * zl + gx.step(sx);
                y = gy.step(sy);
                z = gz.step(sz);
                record(t, x, y, z);
            }
            break;
        }
    }
    return panel;
}

struct P3Oracles {
    double mse_restricted = 0.0;    // E[(x_t - 0.5 x_{t-1})^2], population 26
    double mse_unrestricted = 0.0;  // E[(x_t - 0.5 x_{t-1} - 5 y_{t-1} z_{t-1})^2], population 1
    double residual_ks = 0.0;       // KS distance of standardized residuals vs N(0,1)
    double half_expectile = 0.0;    // tau = 1/2 expectile of the restricted residual
};

/// Monte-Carlo checks of the closed-form p3 prediction errors and of the
/// conditional law x_t | (x_{t-1}, y_{t-1}) = 0.5 x_{t-1} + sqrt(25 y^2 + 1) N(0,1).
inline P3Oracles p3_analytic_oracles(std::size_t T_mc, RandomStream& rng) {
    if (T_mc < 100000)
        throw std::invalid_argument("p3_analytic_oracles: need at least 1e5 steps");
    const SeriesPanel panel = simulate_dgp({DgpTag::p3}, T_mc, rng);
    const auto& x = panel.columns[0];
    const auto& y = panel.columns[1];
    const auto& z = panel.columns[2];

    P3Oracles o;
    std::vector<double> restricted(T_mc - 1), standardized(T_mc - 1);
    double s_r = 0.0, s_u = 0.0;
    for (std::size_t t = 1; t < T_mc; ++t) {
        const double r = x[t] - 0.5 * x[t - 1];
        const double u = r - 5.0 * y[t - 1] * z[t - 1];
        s_r += r * r;
        s_u += u * u;
        restricted[t - 1] = r;
        standardized[t - 1] = r / std::sqrt(25.0 * y[t - 1] * y[t - 1] + 1.0);
    }
    o.mse_restricted = s_r / double(T_mc - 1);
    o.mse_unrestricted = s_u / double(T_mc - 1);

    std::sort(standardized.begin(), standardized.end());
    double d = 0.0;
    const double n = double(standardized.size());
    for (std::size_t i = 0; i < standardized.size(); ++i) {
        const double f = math::norm_cdf(standardized[i]);
        d = std::max(d, std::fabs(f - double(i) / n));
        d = std::max(d, std::fabs(double(i + 1) / n - f));
    }
    o.residual_ks = d;
    o.half_expectile = empirical_expectile(restricted, 0.5);
    return o;
}

} // namespace egc
