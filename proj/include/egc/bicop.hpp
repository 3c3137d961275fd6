#pragma once

// Parametric bivariate copulas on pseudo-observations: independence, Gaussian,
// Student t, Clayton, Gumbel and Frank, with quarter-turn rotations for the
// asymmetric families.  Provides densities, conditional distributions
// (h-functions) and their inverses, sampling, maximum likelihood fitting and
// information-criterion family selection.
//
// Conventions.  h1(u, v) = P(U <= u | V = v) and h2(v, u) = P(V <= v | U = u).
// A rotation r means the density is the base density evaluated at rotated
// arguments: 90 -> (v, 1-u), 180 -> (1-u, 1-v), 270 -> (1-v, u).  Negative
// Frank dependence is handled internally as a reflection of the positive case
// to avoid catastrophic cancellation at large |theta|.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egc/kendall.hpp"
#include "egc/math.hpp"
#include "egc/optim.hpp"
#include "egc/rng.hpp"

namespace egc {

inline constexpr double u_clamp_min = 1e-10;
inline constexpr double u_clamp_max = 1.0 - 1e-10;

inline double clamp_unit(double u) {
    return u < u_clamp_min ? u_clamp_min : (u > u_clamp_max ? u_clamp_max : u);
}

enum class BicopFamily { independence, gaussian, student_t, clayton, gumbel, frank };

struct CopulaSpec {
    BicopFamily family = BicopFamily::independence;
    int rotation = 0;
};

inline std::string family_name(BicopFamily f) {
    switch (f) {
        case BicopFamily::independence: return "independence";
        case BicopFamily::gaussian: return "gaussian";
        case BicopFamily::student_t: return "student_t";
        case BicopFamily::clayton: return "clayton";
        case BicopFamily::gumbel: return "gumbel";
        case BicopFamily::frank: return "frank";
    }
    return "?";
}

inline BicopFamily family_from_name(const std::string& s) {
    for (BicopFamily f : {BicopFamily::independence, BicopFamily::gaussian,
                          BicopFamily::student_t, BicopFamily::clayton,
                          BicopFamily::gumbel, BicopFamily::frank})
        if (family_name(f) == s) return f;
    throw std::invalid_argument("unknown copula family: " + s);
}

/// Rotations apply to the tail-asymmetric families only.
inline void validate_spec(CopulaSpec spec) {
    if (spec.rotation != 0 && spec.family != BicopFamily::clayton &&
        spec.family != BicopFamily::gumbel)
        throw std::domain_error("rotation is only supported for clayton and gumbel");
}

namespace detail {

// ---- Gaussian ----
inline double gauss_log_density(double rho, double u, double v) {
    const double x = math::norm_quantile(u), y = math::norm_quantile(v);
    const double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) -
           (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}
inline double gauss_h(double rho, double a, double b) {
    const double x = math::norm_quantile(a), y = math::norm_quantile(b);
    return math::norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}
inline double gauss_hinv(double rho, double w, double b) {
    const double z = math::norm_quantile(w), y = math::norm_quantile(b);
    return math::norm_cdf(z * std::sqrt(1.0 - rho * rho) + rho * y);
}

// ---- Student t ----
inline double t_log_density(double rho, double nu, double x, double y) {
    // x, y are t_nu scores of the arguments.
    const double r2 = 1.0 - rho * rho;
    const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2);
    return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
           2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2) -
           0.5 * (nu + 2.0) * std::log1p(q) +
           0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}
inline double t_h(double rho, double nu, double a, double b) {
    const double x = math::student_t_quantile(a, nu), y = math::student_t_quantile(b, nu);
    const double s = std::sqrt((1.0 - rho * rho) * (nu + y * y) / (nu + 1.0));
    return math::student_t_cdf((x - rho * y) / s, nu + 1.0);
}
inline double t_hinv(double rho, double nu, double w, double b) {
    const double y = math::student_t_quantile(b, nu);
    const double s = std::sqrt((1.0 - rho * rho) * (nu + y * y) / (nu + 1.0));
    const double x = math::student_t_quantile(w, nu + 1.0) * s + rho * y;
    return math::student_t_cdf(x, nu);
}

// ---- Clayton ----
inline double clayton_log_density(double th, double u, double v) {
    const double lu = std::log(u), lv = std::log(v);
    const double s = std::exp(-th * lu) + std::exp(-th * lv) - 1.0;
    return std::log1p(th) - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * std::log(s);
}
inline double clayton_h(double th, double a, double b) {
    const double la = std::log(a), lb = std::log(b);
    const double s = std::exp(-th * la) + std::exp(-th * lb) - 1.0;
    return std::exp(-(th + 1.0) * lb - (1.0 + 1.0 / th) * std::log(s));
}
inline double clayton_hinv(double th, double w, double b) {
    const double lb = std::log(b);
    const double g = std::expm1(-th / (th + 1.0) * std::log(w));  // w^(-th/(th+1)) - 1
    if (g <= 0.0) return clamp_unit(w);
    const double lx = -th * lb + std::log(g);  // log(b^-th * g)
    double la;
    if (lx > 700.0)
        la = -lx / th;
    else
        la = -std::log1p(std::exp(lx)) / th;
    return clamp_unit(std::exp(la));
}

// ---- Gumbel ----
inline double gumbel_log_density(double th, double u, double v) {
    const double x = -std::log(u), y = -std::log(v);
    const double s = std::pow(x, th) + std::pow(y, th);
    const double s1t = std::pow(s, 1.0 / th);
    return -s1t + x + y + (th - 1.0) * (std::log(x) + std::log(y)) +
           (1.0 / th - 2.0) * std::log(s) + std::log(s1t + th - 1.0);
}
inline double gumbel_h(double th, double a, double b) {
    const double x = -std::log(a), y = -std::log(b);
    const double s = std::pow(x, th) + std::pow(y, th);
    const double s1t = std::pow(s, 1.0 / th);
    return std::exp(-s1t + y + (1.0 / th - 1.0) * std::log(s) + (th - 1.0) * std::log(y));
}
inline double gumbel_hinv(double th, double w, double b) {
    // No closed form; safeguarded Newton on a, with density as derivative.
    double lo = u_clamp_min, hi = u_clamp_max;
    double a = clamp_unit(w);
    for (int it = 0; it < 100; ++it) {
        const double f = gumbel_h(th, a, b) - w;
        if (std::fabs(f) < 1e-12) break;
        if (f > 0.0) hi = a; else lo = a;
        const double dens = std::exp(gumbel_log_density(th, a, b));
        double next = (dens > 1e-100) ? a - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-15) { a = next; break; }
        a = next;
    }
    return clamp_unit(a);
}

// ---- Frank (theta > 0 internally) ----
inline double frank_denom(double th, double u, double v) {
    // e^{-th u} + e^{-th v} - e^{-th} - e^{-th(u+v)}, stable for th > 0.
    const double eu = std::exp(-th * u), ev = std::exp(-th * v);
    return eu + ev - std::exp(-th) - eu * ev;
}
inline double frank_log_density_pos(double th, double u, double v) {
    const double e1 = -std::expm1(-th);  // 1 - e^-th
    return std::log(th) + std::log(e1) - th * (u + v) - 2.0 * std::log(frank_denom(th, u, v));
}
inline double frank_h_pos(double th, double a, double b) {
    const double num = std::exp(-th * b) * (-std::expm1(-th * a));
    return num / frank_denom(th, a, b);
}
inline double frank_hinv_pos(double th, double w, double b) {
    const double eb = std::exp(-th * b);
    const double B = -std::expm1(-th * b);
    const double E = -std::expm1(-th);
    const double A = w * E / (eb + w * B);
    return clamp_unit(-std::log1p(-A) / th);
}

} // namespace detail

class Bicop {
  public:
    Bicop() = default;

    static Bicop independence() { return Bicop(); }
    static Bicop gaussian(double rho) {
        require(std::fabs(rho) < 1.0, "gaussian: |rho| must be < 1");
        return Bicop(BicopFamily::gaussian, 0, {rho});
    }
    static Bicop student_t(double rho, double nu) {
        require(std::fabs(rho) < 1.0, "student_t: |rho| must be < 1");
        require(nu > 2.0, "student_t: nu must exceed 2");
        return Bicop(BicopFamily::student_t, 0, {rho, nu});
    }
    static Bicop clayton(double theta, int rotation = 0) {
        require(theta > 0.0, "clayton: theta must be positive");
        return Bicop(BicopFamily::clayton, check_rotation(rotation), {theta});
    }
    static Bicop gumbel(double theta, int rotation = 0) {
        require(theta >= 1.0, "gumbel: theta must be >= 1");
        return Bicop(BicopFamily::gumbel, check_rotation(rotation), {theta});
    }
    static Bicop frank(double theta) {
        require(theta != 0.0, "frank: theta must be nonzero");
        return Bicop(BicopFamily::frank, 0, {theta});
    }
    static Bicop make(CopulaSpec spec, const std::vector<double>& params) {
        validate_spec(spec);
        switch (spec.family) {
            case BicopFamily::independence: return independence();
            case BicopFamily::gaussian: return gaussian(at(params, 0));
            case BicopFamily::student_t: return student_t(at(params, 0), at(params, 1));
            case BicopFamily::clayton: return clayton(at(params, 0), spec.rotation);
            case BicopFamily::gumbel: return gumbel(at(params, 0), spec.rotation);
            case BicopFamily::frank: return frank(at(params, 0));
        }
        throw std::invalid_argument("Bicop::make: bad family");
    }

    BicopFamily family() const { return family_; }
    int rotation() const { return rotation_; }
    const std::vector<double>& parameters() const { return params_; }
    std::size_t n_parameters() const { return params_.size(); }
    double loglik() const { return loglik_; }
    void set_loglik(double ll) { loglik_ = ll; }

    double log_density(double u, double v) const {
        u = clamp_unit(u);
        v = clamp_unit(v);
        auto [a, b] = rotate_args(u, v);
        switch (family_) {
            case BicopFamily::independence: return 0.0;
            case BicopFamily::gaussian: return detail::gauss_log_density(params_[0], a, b);
            case BicopFamily::student_t:
                return detail::t_log_density(params_[0], params_[1],
                                             math::student_t_quantile(a, params_[1]),
                                             math::student_t_quantile(b, params_[1]));
            case BicopFamily::clayton: return detail::clayton_log_density(params_[0], a, b);
            case BicopFamily::gumbel: return detail::gumbel_log_density(params_[0], a, b);
            case BicopFamily::frank:
                return params_[0] > 0.0
                           ? detail::frank_log_density_pos(params_[0], a, b)
                           : detail::frank_log_density_pos(-params_[0], 1.0 - a, b);
        }
        return 0.0;
    }
    double density(double u, double v) const { return std::exp(log_density(u, v)); }

    /// P(U <= u | V = v).
    double h1(double u, double v) const {
        u = clamp_unit(u);
        v = clamp_unit(v);
        switch (rotation_) {
            case 0: return base_h(u, v);
            case 90: return 1.0 - base_h(1.0 - u, v);
            case 180: return 1.0 - base_h(1.0 - u, 1.0 - v);
            default: return base_h(u, 1.0 - v);  // 270
        }
    }
    /// P(V <= v | U = u).
    double h2(double v, double u) const {
        u = clamp_unit(u);
        v = clamp_unit(v);
        switch (rotation_) {
            case 0: return base_h(v, u);
            case 90: return base_h(v, 1.0 - u);
            case 180: return 1.0 - base_h(1.0 - v, 1.0 - u);
            default: return 1.0 - base_h(1.0 - v, u);  // 270
        }
    }
    /// u with h1(u, v) = w.
    double h1_inverse(double w, double v) const {
        w = clamp_unit(w);
        v = clamp_unit(v);
        switch (rotation_) {
            case 0: return clamp_unit(base_hinv(w, v));
            case 90: return clamp_unit(1.0 - base_hinv(1.0 - w, v));
            case 180: return clamp_unit(1.0 - base_hinv(1.0 - w, 1.0 - v));
            default: return clamp_unit(base_hinv(w, 1.0 - v));  // 270
        }
    }
    /// v with h2(v, u) = w.
    double h2_inverse(double w, double u) const {
        w = clamp_unit(w);
        u = clamp_unit(u);
        switch (rotation_) {
            case 0: return clamp_unit(base_hinv(w, u));
            case 90: return clamp_unit(base_hinv(w, 1.0 - u));
            case 180: return clamp_unit(1.0 - base_hinv(1.0 - w, 1.0 - u));
            default: return clamp_unit(1.0 - base_hinv(1.0 - w, u));  // 270
        }
    }

    /// n pseudo-observation pairs via the conditional distribution method.
    std::vector<std::pair<double, double>> sample(std::size_t n, RandomStream& rng) const {
        std::vector<std::pair<double, double>> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            const double w = rng.uniform();
            out.emplace_back(u, h2_inverse(w, u));
        }
        return out;
    }

  private:
    Bicop(BicopFamily f, int rot, std::vector<double> p)
        : family_(f), rotation_(rot), params_(std::move(p)) {}

    static void require(bool ok, const char* msg) {
        if (!ok) throw std::domain_error(msg);
    }
    static int check_rotation(int r) {
        if (r != 0 && r != 90 && r != 180 && r != 270)
            throw std::domain_error("rotation must be one of 0, 90, 180, 270");
        return r;
    }
    static double at(const std::vector<double>& p, std::size_t i) {
        if (i >= p.size()) throw std::invalid_argument("Bicop: missing parameter");
        return p[i];
    }

    std::pair<double, double> rotate_args(double u, double v) const {
        switch (rotation_) {
            case 0: return {u, v};
            case 90: return {v, 1.0 - u};
            case 180: return {1.0 - u, 1.0 - v};
            default: return {1.0 - v, u};  // 270
        }
    }

    // Exchangeable base-family conditional cdf P(first <= a | second = b).
    double base_h(double a, double b) const {
        switch (family_) {
            case BicopFamily::independence: return a;
            case BicopFamily::gaussian: return detail::gauss_h(params_[0], a, b);
            case BicopFamily::student_t: return detail::t_h(params_[0], params_[1], a, b);
            case BicopFamily::clayton: return detail::clayton_h(params_[0], a, b);
            case BicopFamily::gumbel: return detail::gumbel_h(params_[0], a, b);
            case BicopFamily::frank:
                return params_[0] > 0.0 ? detail::frank_h_pos(params_[0], a, b)
                                        : 1.0 - detail::frank_h_pos(-params_[0], 1.0 - a, b);
        }
        return a;
    }
    double base_hinv(double w, double b) const {
        switch (family_) {
            case BicopFamily::independence: return w;
            case BicopFamily::gaussian: return detail::gauss_hinv(params_[0], w, b);
            case BicopFamily::student_t: return detail::t_hinv(params_[0], params_[1], w, b);
            case BicopFamily::clayton: return detail::clayton_hinv(params_[0], w, b);
            case BicopFamily::gumbel: return detail::gumbel_hinv(params_[0], w, b);
            case BicopFamily::frank:
                return params_[0] > 0.0
                           ? detail::frank_hinv_pos(params_[0], w, b)
                           : 1.0 - detail::frank_hinv_pos(-params_[0], 1.0 - w, b);
        }
        return w;
    }

    BicopFamily family_ = BicopFamily::independence;
    int rotation_ = 0;
    std::vector<double> params_;
    double loglik_ = 0.0;
};

// ---------------------------------------------------------------------------
// Initialization by Kendall tau inversion
// ---------------------------------------------------------------------------

/// Kendall tau of the Frank copula as a function of theta.
inline double frank_tau_from_theta(double theta) {
    if (theta == 0.0) return 0.0;
    return 1.0 - 4.0 / theta * (1.0 - math::debye1(theta));
}

/// Starting parameters from a (sample) Kendall tau.  Rotations 90/270 expect
/// negative dependence; the magnitude |tau| sets the strength either way.
inline Bicop kendall_tau_inversion(CopulaSpec spec, double tau) {
    validate_spec(spec);
    if (!(tau > -1.0 && tau < 1.0))
        throw std::domain_error("kendall_tau_inversion: tau must lie in (-1,1)");
    const double at = std::min(std::fabs(tau), 0.93);
    switch (spec.family) {
        case BicopFamily::independence: return Bicop::independence();
        case BicopFamily::gaussian:
            return Bicop::gaussian(std::sin(math::pi * tau / 2.0));
        case BicopFamily::student_t:
            return Bicop::student_t(std::sin(math::pi * tau / 2.0), 5.0);
        case BicopFamily::clayton:
            return Bicop::clayton(std::max(2.0 * at / (1.0 - at), 1e-4), spec.rotation);
        case BicopFamily::gumbel:
            return Bicop::gumbel(1.0 / (1.0 - at), spec.rotation);
        case BicopFamily::frank: {
            if (std::fabs(tau) < 1e-8) return Bicop::frank(1e-6);
            // Bisection on theta with matching sign; |tau(theta)| grows in |theta|.
            double lo = 1e-8, hi = 35.0;
            const double target = std::fabs(tau);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (frank_tau_from_theta(mid) < target) lo = mid; else hi = mid;
            }
            const double theta = 0.5 * (lo + hi);
            return Bicop::frank(tau > 0 ? theta : -theta);
        }
    }
    throw std::invalid_argument("kendall_tau_inversion: bad family");
}

// ---------------------------------------------------------------------------
// Maximum likelihood fitting and family selection
// ---------------------------------------------------------------------------

using Catalog = std::vector<CopulaSpec>;

/// Independence, Gaussian, Student t, Clayton and Gumbel in their 0 and 180
/// degree orientations, and Frank.
inline Catalog default_catalog() {
    return {{BicopFamily::independence, 0}, {BicopFamily::gaussian, 0},
            {BicopFamily::student_t, 0},   {BicopFamily::clayton, 0},
            {BicopFamily::clayton, 180},   {BicopFamily::gumbel, 0},
            {BicopFamily::gumbel, 180},    {BicopFamily::frank, 0}};
}

enum class SelectionCriterion { aic, bic };

inline constexpr std::array<double, 8> student_t_dof_grid{2.5, 3.0, 4.0, 5.0,
                                                          7.0, 10.0, 15.0, 30.0};

namespace detail {

// Rotate observations into base-family coordinates (inverse of rotate_args).
inline void rotate_data(int rotation, std::vector<double>& u, std::vector<double>& v) {
    if (rotation == 0) return;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double uu = u[i], vv = v[i];
        if (rotation == 90) { u[i] = vv; v[i] = 1.0 - uu; }
        else if (rotation == 180) { u[i] = 1.0 - uu; v[i] = 1.0 - vv; }
        else { u[i] = 1.0 - vv; v[i] = uu; }
    }
}

struct FitData {
    std::vector<double> u, v;  // clamped, rotated into base coordinates
    double tau = 0.0;          // sample tau of the original data
};

inline FitData prepare_fit_data(int rotation, std::span<const double> u,
                                std::span<const double> v, double sample_tau) {
    FitData d;
    d.u.assign(u.begin(), u.end());
    d.v.assign(v.begin(), v.end());
    for (auto& x : d.u) x = clamp_unit(x);
    for (auto& x : d.v) x = clamp_unit(x);
    rotate_data(rotation, d.u, d.v);
    d.tau = sample_tau;
    return d;
}

// t_nu quantiles of an arbitrary array, computed in sorted order so each
// solve warm-starts from its predecessor.
inline std::vector<double> t_scores(const std::vector<double>& u, double nu) {
    const std::size_t n = u.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
    std::vector<double> x(n);
    double prev = -1e308;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = u[idx[k]];
        double xi;
        if (k > 0 && u[idx[k - 1]] == p) {
            xi = prev;
        } else {
            xi = math::student_t_quantile(p, nu);
        }
        x[idx[k]] = xi;
        prev = xi;
    }
    return x;
}

inline double gaussian_loglik_stats(double rho, double n, double sxx, double syy,
                                    double sxy) {
    const double r2 = 1.0 - rho * rho;
    return -0.5 * n * std::log(r2) -
           (rho * rho * (sxx + syy) - 2.0 * rho * sxy) / (2.0 * r2);
}

} // namespace detail

/// Fit one family/rotation by maximum likelihood.  One-parameter families use
/// Brent line search started from the Kendall tau inversion; Student t
/// profiles the dof over a fixed grid with a Brent search on the correlation
/// at each grid point.  The returned copula carries its attained loglik,
/// never below the loglik of the tau-inversion start.
inline Bicop fit_mle(CopulaSpec spec, std::span<const double> u, std::span<const double> v) {
    validate_spec(spec);
    if (u.size() != v.size() || u.size() < 10)
        throw std::invalid_argument("fit_mle: need at least 10 paired observations");
    const double sample_tau = kendall_tau(u, v);
    auto data = detail::prepare_fit_data(spec.rotation, u, v, sample_tau);
    const std::size_t n = data.u.size();

    auto finish = [&](Bicop b, double ll) {
        b.set_loglik(ll);
        return b;
    };

    switch (spec.family) {
        case BicopFamily::independence:
            return finish(Bicop::independence(), 0.0);

        case BicopFamily::gaussian: {
            double sxx = 0, syy = 0, sxy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = math::norm_quantile(data.u[i]);
                const double y = math::norm_quantile(data.v[i]);
                sxx += x * x; syy += y * y; sxy += x * y;
            }
            auto nll = [&](double rho) {
                return -detail::gaussian_loglik_stats(rho, double(n), sxx, syy, sxy);
            };
            auto [rho, fneg] = brent_minimize(nll, -0.9999, 0.9999, 1e-8);
            const double rho0 = std::sin(math::pi * sample_tau / 2.0);
            if (-nll(rho0) > -fneg) { rho = rho0; fneg = nll(rho0); }
            return finish(Bicop::gaussian(rho), -fneg);
        }

        case BicopFamily::student_t: {
            double best_ll = -1e308, best_rho = 0.0, best_nu = student_t_dof_grid[0];
            for (double nu : student_t_dof_grid) {
                const auto x = detail::t_scores(data.u, nu);
                const auto y = detail::t_scores(data.v, nu);
                double marg = 0.0;  // rho-independent part
                for (std::size_t i = 0; i < n; ++i)
                    marg += std::log1p(x[i] * x[i] / nu) + std::log1p(y[i] * y[i] / nu);
                const double konst =
                    double(n) * (std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                                 2.0 * std::lgamma(0.5 * (nu + 1.0))) +
                    0.5 * (nu + 1.0) * marg;
                auto nll = [&](double rho) {
                    const double r2 = 1.0 - rho * rho;
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double q =
                            (x[i] * x[i] - 2.0 * rho * x[i] * y[i] + y[i] * y[i]) / (nu * r2);
                        s += std::log1p(q);
                    }
                    return 0.5 * double(n) * std::log(r2) + 0.5 * (nu + 2.0) * s - konst;
                };
                auto [rho, fneg] = brent_minimize(nll, -0.9999, 0.9999, 1e-6);
                if (-fneg > best_ll) { best_ll = -fneg; best_rho = rho; best_nu = nu; }
            }
            // Never fall below the tau-inversion start (rho0, nu = 5).
            const Bicop init = kendall_tau_inversion(spec, sample_tau);
            double init_ll = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                init_ll += init.log_density(u[i], v[i]);
            if (init_ll > best_ll)
                return finish(init, init_ll);
            return finish(Bicop::student_t(best_rho, best_nu), best_ll);
        }

        case BicopFamily::clayton: {
            auto nll = [&](double th) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += detail::clayton_log_density(th, data.u[i], data.v[i]);
                return -s;
            };
            auto [th, fneg] = brent_minimize(nll, 1e-4, 28.0, 1e-6);
            const double at = std::min(std::fabs(sample_tau), 0.93);
            const double th0 = std::max(2.0 * at / (1.0 - at), 1e-4);
            if (-nll(th0) > -fneg) { th = th0; fneg = nll(th0); }
            return finish(Bicop::clayton(th, spec.rotation), -fneg);
        }

        case BicopFamily::gumbel: {
            auto nll = [&](double th) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += detail::gumbel_log_density(th, data.u[i], data.v[i]);
                return -s;
            };
            auto [th, fneg] = brent_minimize(nll, 1.0, 20.0, 1e-6);
            const double at = std::min(std::fabs(sample_tau), 0.93);
            const double th0 = std::min(std::max(1.0 / (1.0 - at), 1.0), 20.0);
            if (-nll(th0) > -fneg) { th = th0; fneg = nll(th0); }
            return finish(Bicop::gumbel(th, spec.rotation), -fneg);
        }

        case BicopFamily::frank: {
            // Positive-theta branch on possibly reflected data, sign from tau.
            const bool neg = sample_tau < 0.0;
            std::vector<double> uu = data.u;
            if (neg)
                for (auto& x : uu) x = 1.0 - x;
            auto nll = [&](double th) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += detail::frank_log_density_pos(th, uu[i], data.v[i]);
                return -s;
            };
            auto [th, fneg] = brent_minimize(nll, 1e-6, 35.0, 1e-6);
            const Bicop init = kendall_tau_inversion(spec, sample_tau);
            const double th0 = std::fabs(init.parameters()[0]);
            if (-nll(th0) > -fneg) { th = th0; fneg = nll(th0); }
            return finish(Bicop::frank(neg ? -th : th), -fneg);
        }
    }
    throw std::invalid_argument("fit_mle: bad family");
}

/// Fit every catalog entry and keep the best by information criterion.
/// Earlier catalog entries win ties.
inline Bicop select_family(std::span<const double> u, std::span<const double> v,
                           const Catalog& catalog = default_catalog(),
                           SelectionCriterion criterion = SelectionCriterion::aic) {
    if (catalog.empty()) throw std::invalid_argument("select_family: empty catalog");
    Bicop best;
    double best_score = 1e308;
    bool first = true;
    for (const CopulaSpec& spec : catalog) {
        Bicop b = fit_mle(spec, u, v);
        const double k = double(b.n_parameters());
        const double score = (criterion == SelectionCriterion::aic)
                                 ? -2.0 * b.loglik() + 2.0 * k
                                 : -2.0 * b.loglik() + k * std::log(double(u.size()));
        if (first || score < best_score) {
            best = b;
            best_score = score;
            first = false;
        }
    }
    return best;
}

} // namespace egc
