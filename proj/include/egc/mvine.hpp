#pragma once

// Stationary order-1 Markov vine model for a panel whose first column is the
// effect series X and whose remaining d columns are covariates Z_1..Z_d.
//
// Dependence is organised as a D-vine on the one-step transition window
// (X_{t+1}, X_t, Z_{1,t}, ..., Z_{d,t}).  The in-slice part, a D-vine over
// (X, Z_1, ..., Z_d), is fit once on all T rows and shared across time
// (stationarity).  Cross-time edges link X_{t+1} to the slice:
//
//   level 1:      c(X_{t+1}, X_t)
//   level l >= 2: c(X_{t+1}, Z_{l-1,t} | X_t, Z_{1,t}, ..., Z_{l-2,t})
//
// Deeper trees are independence, so covariates at t+1 see the past only
// through X_{t+1}.  All conditioning is propagated with exact h-function
// recursions; sampling inverts them against fresh uniforms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egc/bicop.hpp"
#include "egc/marginals.hpp"
#include "egc/panel.hpp"
#include "egc/rng.hpp"

namespace egc {

namespace detail_mvine {

inline void check_fit_input(const SeriesPanel& panel) {
    panel.validate();
    if (panel.length() < 20)
        throw std::invalid_argument("MVineModel::fit: need at least 20 rows");
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        const auto& col = panel.columns[i];
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (!(*lo < *hi))
            throw std::domain_error("MVineModel::fit: column '" + panel.names[i] +
                                    "' is constant");
    }
}

}  // namespace detail_mvine

class MVineModel {
  public:
    MVineModel() = default;

    static MVineModel fit(const SeriesPanel& panel, const Catalog& catalog = default_catalog(),
                          SelectionCriterion criterion = SelectionCriterion::aic,
                          int markov_order = 1);

    /// Fit the pair copulas against externally supplied marginals instead of
    /// refitting them from the panel (marginal-reuse refits).
    static MVineModel fit_with_marginals(const SeriesPanel& panel,
                                         std::vector<EmpiricalMarginal> marginals,
                                         const Catalog& catalog = default_catalog(),
                                         SelectionCriterion criterion = SelectionCriterion::aic);

    /// Assemble a model from explicit parts (deserialization, hand-built models).
    static MVineModel from_parts(std::vector<std::string> names,
                                 std::vector<EmpiricalMarginal> marginals,
                                 std::vector<std::vector<Bicop>> cross_trees,
                                 std::vector<Bicop> time_edges);

    bool fitted() const { return fitted_; }
    int markov_order() const { return 1; }
    std::size_t dimension() const { return marginals_.size(); }
    std::size_t n_covariates() const { return marginals_.empty() ? 0 : marginals_.size() - 1; }
    const std::vector<std::string>& names() const { return names_; }

    const EmpiricalMarginal& marginal(std::size_t i) const {
        if (i >= marginals_.size()) throw std::out_of_range("MVineModel: marginal index");
        return marginals_[i];
    }

    std::size_t n_cross_trees() const { return cross_.size(); }
    std::size_t n_cross_edges(std::size_t level) const {
        if (level < 1 || level > cross_.size())
            throw std::out_of_range("MVineModel: cross tree level");
        return cross_[level - 1].size();
    }
    /// In-slice edge c(W_j, W_{j+level} | W_{j+1..j+level-1}), W_0 = X, W_i = Z_i.
    const Bicop& cross_edge(std::size_t level, std::size_t j) const {
        if (level < 1 || level > cross_.size())
            throw std::out_of_range("MVineModel: cross tree level");
        if (j >= cross_[level - 1].size()) throw std::out_of_range("MVineModel: cross edge index");
        return cross_[level - 1][j];
    }

    std::size_t n_time_edges() const { return time_.size(); }
    /// Cross-time edge at the given level (see header comment).
    const Bicop& time_edge(std::size_t level) const {
        if (level < 1 || level > time_.size()) throw std::out_of_range("MVineModel: time edge level");
        return time_[level - 1];
    }

    /// Draw n values of X_{t+1} given the previous row (x, z_1, ..., z_d) in
    /// natural scale.  The conditioning vector must have one entry per column.
    std::vector<double> conditional_predictive_sample(std::span<const double> conditioning,
                                                      std::size_t n, RandomStream& rng) const {
        require_fitted();
        if (conditioning.size() != dimension())
            throw std::invalid_argument(
                "conditional_predictive_sample: conditioning size must match dimension");
        if (n < 1) throw std::invalid_argument("conditional_predictive_sample: n must be >= 1");
        std::vector<double> u(dimension());
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!std::isfinite(conditioning[i]))
                throw std::domain_error(
                    "conditional_predictive_sample: non-finite conditioning value");
            u[i] = marginals_[i].cdf(conditioning[i]);
        }
        const Triangle tri = slice_conditionals(u);
        const std::vector<double> b = time_conditioners(tri);
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k)
            out[k] = marginals_[0].quantile(draw_next_u(b, rng));
        return out;
    }

    /// Sample of length T in which X evolves by the temporal copula alone and
    /// each covariate is drawn conditionally on the current x and preceding
    /// covariates.  Any lagged covariate-to-X channel is absent by construction.
    SeriesPanel simulate_null_sample(std::size_t length, RandomStream& rng) const {
        require_fitted();
        if (length < 1) throw std::invalid_argument("simulate_null_sample: length must be >= 1");
        SeriesPanel out = empty_panel(length);
        std::vector<double> u(dimension());
        double ux_prev = 0.5;
        for (std::size_t t = 0; t < length; ++t) {
            u[0] = (t == 0) ? rng.uniform() : time_edge(1).h1_inverse(rng.uniform(), ux_prev);
            ux_prev = u[0];
            sample_covariates(u, rng);
            store_row(out, t, u);
        }
        return out;
    }

    /// Full joint simulation respecting every fitted edge.
    SeriesPanel simulate_path(std::size_t length, RandomStream& rng) const {
        require_fitted();
        if (length < 1) throw std::invalid_argument("simulate_path: length must be >= 1");
        SeriesPanel out = empty_panel(length);
        std::vector<double> u(dimension());
        for (std::size_t t = 0; t < length; ++t) {
            if (t == 0) {
                u[0] = rng.uniform();
            } else {
                const Triangle tri = slice_conditionals(u);
                u[0] = draw_next_u(time_conditioners(tri), rng);
            }
            sample_covariates(u, rng);
            store_row(out, t, u);
        }
        return out;
    }

  private:
    struct Triangle {
        // fw[l][j] = F(W_j | W_{j+1..j+l}); bw[l][j] = F(W_{j+l} | W_j..W_{j+l-1}).
        std::vector<std::vector<double>> fw, bw;
    };

    static MVineModel fit_body(const SeriesPanel& panel,
                               std::vector<EmpiricalMarginal> marginals,
                               const Catalog& catalog, SelectionCriterion criterion);

    void require_fitted() const {
        if (!fitted_) throw std::logic_error("MVineModel: model is not fitted");
    }

    SeriesPanel empty_panel(std::size_t length) const {
        SeriesPanel p;
        p.names = names_;
        p.columns.assign(dimension(), std::vector<double>(length));
        return p;
    }

    void store_row(SeriesPanel& p, std::size_t t, const std::vector<double>& u) const {
        for (std::size_t i = 0; i < u.size(); ++i)
            p.columns[i][t] = marginals_[i].quantile(u[i]);
    }

    Triangle slice_conditionals(std::span<const double> u) const {
        const std::size_t m = dimension();
        Triangle tri;
        tri.fw.resize(m);
        tri.bw.resize(m);
        tri.fw[0].assign(u.begin(), u.end());
        tri.bw[0].assign(u.begin(), u.end());
        for (std::size_t level = 1; level < m; ++level) {
            tri.fw[level].resize(m - level);
            tri.bw[level].resize(m - level);
            for (std::size_t j = 0; j + level < m; ++j) {
                const Bicop& c = cross_edge(level, j);
                const double a = tri.fw[level - 1][j];
                const double b = tri.bw[level - 1][j + 1];
                tri.fw[level][j] = c.h1(a, b);
                tri.bw[level][j] = c.h2(b, a);
            }
        }
        return tri;
    }

    // b[r] = F(W_{r-1} | W_0..W_{r-2}) feeds the level-r cross-time edge.
    std::vector<double> time_conditioners(const Triangle& tri) const {
        std::vector<double> b(dimension() + 1);
        b[1] = tri.bw[0][0];
        for (std::size_t r = 2; r < b.size(); ++r) b[r] = tri.bw[r - 1][0];
        return b;
    }

    double draw_next_u(const std::vector<double>& b, RandomStream& rng) const {
        double w = rng.uniform();
        for (std::size_t r = time_.size(); r >= 1; --r) w = time_edge(r).h1_inverse(w, b[r]);
        return w;
    }

    // u[0] must hold the current effect-series value; fills u[1..d] with a
    // draw of the covariates from the in-slice vine conditional on u[0].
    void sample_covariates(std::vector<double>& u, RandomStream& rng) const {
        const std::size_t m = dimension();
        if (m == 1) return;
        Triangle tri;
        tri.fw.resize(m);
        tri.bw.resize(m);
        tri.fw[0].assign(m, 0.0);
        tri.bw[0].assign(m, 0.0);
        for (std::size_t level = 1; level < m; ++level) {
            tri.fw[level].assign(m - level, 0.0);
            tri.bw[level].assign(m - level, 0.0);
        }
        tri.fw[0][0] = tri.bw[0][0] = u[0];
        for (std::size_t i = 1; i < m; ++i) {
            double v = rng.uniform();
            for (std::size_t level = i; level >= 1; --level)
                v = cross_edge(level, i - level).h2_inverse(v, tri.fw[level - 1][i - level]);
            u[i] = v;
            tri.fw[0][i] = tri.bw[0][i] = v;
            for (std::size_t level = 1; level <= i; ++level) {
                const std::size_t j = i - level;
                const Bicop& c = cross_edge(level, j);
                const double a = tri.fw[level - 1][j];
                const double b = tri.bw[level - 1][j + 1];
                tri.fw[level][j] = c.h1(a, b);
                tri.bw[level][j] = c.h2(b, a);
            }
        }
    }

    std::vector<std::string> names_;
    std::vector<EmpiricalMarginal> marginals_;
    std::vector<std::vector<Bicop>> cross_;  // cross_[l-1][j], in-slice tree l
    std::vector<Bicop> time_;                // time_[l-1], cross-time level l
    bool fitted_ = false;
};

inline MVineModel MVineModel::fit(const SeriesPanel& panel, const Catalog& catalog,
                                  SelectionCriterion criterion, int markov_order) {
    if (markov_order != 1)
        throw std::invalid_argument("MVineModel::fit: only Markov order 1 is supported");
    detail_mvine::check_fit_input(panel);
    std::vector<EmpiricalMarginal> marginals;
    marginals.reserve(panel.n_series());
    for (const auto& col : panel.columns) marginals.push_back(EmpiricalMarginal::fit(col));
    return fit_body(panel, std::move(marginals), catalog, criterion);
}

inline MVineModel MVineModel::fit_with_marginals(const SeriesPanel& panel,
                                                 std::vector<EmpiricalMarginal> marginals,
                                                 const Catalog& catalog,
                                                 SelectionCriterion criterion) {
    detail_mvine::check_fit_input(panel);
    if (marginals.size() != panel.n_series())
        throw std::invalid_argument("MVineModel::fit_with_marginals: marginal/column count "
                                    "mismatch");
    return fit_body(panel, std::move(marginals), catalog, criterion);
}

inline MVineModel MVineModel::fit_body(const SeriesPanel& panel,
                                       std::vector<EmpiricalMarginal> marginals,
                                       const Catalog& catalog, SelectionCriterion criterion) {
    const std::size_t T = panel.length();
    const std::size_t m = panel.n_series();
    const std::size_t d = m - 1;

    MVineModel model;
    model.names_ = panel.names;
    model.marginals_ = std::move(marginals);
    std::vector<std::vector<double>> pseudo(m);
    for (std::size_t i = 0; i < m; ++i)
        pseudo[i] = model.marginals_[i].pseudo_observations(panel.columns[i]);

    // In-slice D-vine over (X, Z_1..Z_d), tree by tree on all T rows.
    // cond_chain[r][t] = F(W_r | W_0..W_{r-1}) at row t.
    std::vector<std::vector<double>> fw = pseudo, bw = pseudo;
    std::vector<std::vector<double>> cond_chain(m);
    cond_chain[0] = pseudo[0];
    model.cross_.resize(d);
    for (std::size_t level = 1; level <= d; ++level) {
        std::vector<std::vector<double>> nfw(m - level), nbw(m - level);
        for (std::size_t j = 0; j + level < m; ++j) {
            const std::vector<double>& a = fw[j];
            const std::vector<double>& b = bw[j + 1];
            Bicop c = select_family(a, b, catalog, criterion);
            nfw[j].resize(T);
            nbw[j].resize(T);
            for (std::size_t t = 0; t < T; ++t) {
                nfw[j][t] = c.h1(a[t], b[t]);
                nbw[j][t] = c.h2(b[t], a[t]);
            }
            model.cross_[level - 1].push_back(std::move(c));
        }
        fw = std::move(nfw);
        bw = std::move(nbw);
        cond_chain[level] = bw[0];
    }

    // Cross-time edges on the T-1 transition windows.
    const std::size_t n_win = T - 1;
    std::vector<double> a(n_win);
    for (std::size_t t = 0; t < n_win; ++t) a[t] = pseudo[0][t + 1];
    model.time_.reserve(d + 1);
    for (std::size_t level = 1; level <= d + 1; ++level) {
        std::vector<double> b(cond_chain[level - 1].begin(),
                              cond_chain[level - 1].begin() + n_win);
        Bicop c = select_family(a, b, catalog, criterion);
        if (level <= d)
            for (std::size_t t = 0; t < n_win; ++t) a[t] = c.h1(a[t], b[t]);
        model.time_.push_back(std::move(c));
    }
    model.fitted_ = true;
    return model;
}

inline MVineModel MVineModel::from_parts(std::vector<std::string> names,
                                         std::vector<EmpiricalMarginal> marginals,
                                         std::vector<std::vector<Bicop>> cross_trees,
                                         std::vector<Bicop> time_edges) {
    const std::size_t m = marginals.size();
    if (m == 0) throw std::invalid_argument("MVineModel::from_parts: no marginals");
    if (names.size() != m)
        throw std::invalid_argument("MVineModel::from_parts: name/marginal count mismatch");
    const std::size_t d = m - 1;
    if (cross_trees.size() != d)
        throw std::invalid_argument("MVineModel::from_parts: expected one in-slice tree per "
                                    "covariate");
    for (std::size_t level = 1; level <= d; ++level)
        if (cross_trees[level - 1].size() != m - level)
            throw std::invalid_argument("MVineModel::from_parts: wrong edge count at in-slice "
                                        "level " + std::to_string(level));
    if (time_edges.size() != d + 1)
        throw std::invalid_argument("MVineModel::from_parts: expected d+1 cross-time edges");
    MVineModel model;
    model.names_ = std::move(names);
    model.marginals_ = std::move(marginals);
    model.cross_ = std::move(cross_trees);
    model.time_ = std::move(time_edges);
    model.fitted_ = true;
    return model;
}

} // namespace egc
