#pragma once

// Empirical marginal models.  Probability integral transforms use ranks over
// T+1 with mid-ranks for ties; quantiles invert the transform by linear
// interpolation between the observed knots with constant extrapolation.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace egc {

class EmpiricalMarginal {
  public:
    EmpiricalMarginal() = default;

    static EmpiricalMarginal fit(std::span<const double> sample) {
        if (sample.size() < 2)
            throw std::invalid_argument("EmpiricalMarginal: need at least two observations");
        EmpiricalMarginal m;
        m.sorted_.assign(sample.begin(), sample.end());
        for (double x : m.sorted_)
            if (!std::isfinite(x))
                throw std::invalid_argument("EmpiricalMarginal: non-finite observation");
        std::sort(m.sorted_.begin(), m.sorted_.end());
        m.build_knots();
        return m;
    }

    /// Construct from an already sorted sample (model deserialization).
    static EmpiricalMarginal from_sorted(std::vector<double> sorted) {
        if (sorted.size() < 2)
            throw std::invalid_argument("EmpiricalMarginal: need at least two observations");
        if (!std::is_sorted(sorted.begin(), sorted.end()))
            throw std::invalid_argument("EmpiricalMarginal: values not sorted");
        EmpiricalMarginal m;
        m.sorted_ = std::move(sorted);
        m.build_knots();
        return m;
    }

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted_values() const { return sorted_; }

    /// Mid-rank empirical cdf over T+1, clamped to
    /// [1/(2(T+1)), 1 - 1/(2(T+1))] outside the observed range.
    double cdf(double x) const {
        const double half = 0.5 / denom();
        if (x < knots_x_.front()) return half;
        if (x > knots_x_.back()) return 1.0 - half;
        return interp(knots_x_, knots_p_, x);
    }

    /// Piecewise-linear inverse of the cdf through the observed knots,
    /// constant beyond the extreme knot levels.
    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0))
            throw std::domain_error("EmpiricalMarginal::quantile: p outside (0,1)");
        if (p <= knots_p_.front()) return knots_x_.front();
        if (p >= knots_p_.back()) return knots_x_.back();
        return interp(knots_p_, knots_x_, p);
    }

    std::vector<double> pseudo_observations(std::span<const double> sample) const {
        std::vector<double> u;
        u.reserve(sample.size());
        for (double x : sample) u.push_back(cdf(x));
        return u;
    }

  private:
    double denom() const { return double(sorted_.size()) + 1.0; }

    void build_knots() {
        knots_x_.clear();
        knots_p_.clear();
        const std::size_t n = sorted_.size();
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted_[j + 1] == sorted_[i]) ++j;
            // Mid-rank of the tie run i..j, ranks counted from 1.
            const double mid_rank = 0.5 * (double(i + 1) + double(j + 1));
            knots_x_.push_back(sorted_[i]);
            knots_p_.push_back(mid_rank / denom());
            i = j + 1;
        }
    }

    static double interp(const std::vector<double>& xs, const std::vector<double>& ys,
                         double x) {
        const auto it = std::lower_bound(xs.begin(), xs.end(), x);
        const std::size_t hi = std::size_t(it - xs.begin());
        if (hi < xs.size() && xs[hi] == x) return ys[hi];
        const std::size_t lo = hi - 1;
        const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
        return ys[lo] + t * (ys[hi] - ys[lo]);
    }

    std::vector<double> sorted_;
    std::vector<double> knots_x_;
    std::vector<double> knots_p_;
};

/// Percentage log returns r_t = 100 (ln s_t - ln s_{t-1}).
inline std::vector<double> log_returns(std::span<const double> prices) {
    if (prices.size() < 2)
        throw std::invalid_argument("log_returns: need at least two prices");
    for (double s : prices)
        if (!(s > 0.0)) throw std::domain_error("log_returns: prices must be positive");
    std::vector<double> r;
    r.reserve(prices.size() - 1);
    for (std::size_t t = 1; t < prices.size(); ++t)
        r.push_back(100.0 * (std::log(prices[t]) - std::log(prices[t - 1])));
    return r;
}

} // namespace egc
