#pragma once

// Expectile-based Granger-causality test.  The statistic is the log ratio of
// mean asymmetric squared losses from one-step tau-expectile predictions
// under a restricted model (effect series alone) and an unrestricted model
// (effect plus candidate causes).  Its null distribution is simulated by
// refitting both models on panels drawn from the unrestricted model with the
// lagged covariate channel severed.  A classical linear F-test is included
// as a baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egc/bicop.hpp"
#include "egc/expectile.hpp"
#include "egc/math.hpp"
#include "egc/mvine.hpp"
#include "egc/panel.hpp"
#include "egc/parallel.hpp"
#include "egc/rng.hpp"

namespace egc {

/// A computation failed numerically (degenerate loss ratio, collinear
/// regression system) even though the inputs were structurally valid.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TestConfig {
    double tau = 0.5;
    std::size_t n_predictions = 200;  // draws per one-step predictive expectile
    std::size_t eval_start = 0;       // first evaluated time, 1-based; 0 = ceil(T/2)
    std::size_t n_bootstrap = 200;    // null replicates
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    Catalog catalog = default_catalog();
    SelectionCriterion criterion = SelectionCriterion::aic;
    bool continuity_correction = false;  // p = (1+hits)/(1+B) instead of hits/B
    bool reuse_marginals = false;        // null refits keep the observed marginals

    std::size_t resolve_eval_start(std::size_t length) const {
        return eval_start != 0 ? eval_start : (length + 1) / 2;
    }

    void check(std::size_t length) const {
        check_tau(tau);
        if (n_predictions < 2)
            throw std::invalid_argument("TestConfig: n_predictions must be at least 2");
        if (n_bootstrap < 1)
            throw std::invalid_argument("TestConfig: n_bootstrap must be at least 1");
        if (threads < 1) throw std::invalid_argument("TestConfig: threads must be at least 1");
        const std::size_t start = resolve_eval_start(length);
        if (start < 2 || start >= length)
            throw std::invalid_argument("TestConfig: eval_start must lie in [2, T-1]");
    }
};

/// Observed statistic together with the models that produced it.
struct GcStatistic {
    double statistic = 0.0;
    double restricted_loss = 0.0;
    double unrestricted_loss = 0.0;
    MVineModel restricted_model;
    MVineModel unrestricted_model;
};

struct GcTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double restricted_loss = 0.0;
    double unrestricted_loss = 0.0;
    std::vector<double> null_statistics;  // successful replicates, index order
};

/// Default reduction of a prediction sample: the empirical tau-expectile.
inline double expectile_aggregate(std::span<const double> sample, double tau) {
    return empirical_expectile(sample, tau);
}

/// Plain sample mean, which the expectile reduction must match at tau = 1/2.
inline double mean_aggregate(std::span<const double> sample, double) {
    double s = 0.0;
    for (double v : sample) s += v;
    return s / static_cast<double>(sample.size());
}

namespace detail_gc {

struct FitPlan {
    const Catalog* catalog = nullptr;
    SelectionCriterion criterion = SelectionCriterion::aic;
    const std::vector<EmpiricalMarginal>* reuse = nullptr;  // nullptr: refit marginals
};

inline MVineModel fit_model(const SeriesPanel& panel, const FitPlan& plan) {
    if (plan.reuse == nullptr) return MVineModel::fit(panel, *plan.catalog, plan.criterion);
    std::vector<EmpiricalMarginal> marginals(plan.reuse->begin(),
                                             plan.reuse->begin() + panel.n_series());
    return MVineModel::fit_with_marginals(panel, std::move(marginals), *plan.catalog,
                                          plan.criterion);
}

// Mean loss over t = eval_start..T (1-based): at each t, draw n_predictions
// one-step values conditioned on row t-1, reduce them to a point prediction,
// and score it against the realised x_t.
template <class Aggregate>
inline double model_prediction_loss(const MVineModel& model, const SeriesPanel& panel,
                                    std::size_t eval_start, double tau,
                                    std::size_t n_predictions, const RandomStream& stream,
                                    Aggregate&& aggregate) {
    const std::vector<double>& x = panel.columns[0];
    const std::size_t m = model.dimension();
    std::vector<double> row(m);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = eval_start - 1; i < x.size(); ++i) {
        for (std::size_t c = 0; c < m; ++c) row[c] = panel.columns[c][i - 1];
        RandomStream draws = stream.branch(static_cast<std::uint64_t>(i));
        const std::vector<double> preds =
            model.conditional_predictive_sample(row, n_predictions, draws);
        total += asymmetric_loss(tau, x[i] - aggregate(std::span<const double>(preds), tau));
        ++count;
    }
    return total / static_cast<double>(count);
}

template <class Aggregate>
inline GcStatistic gc_statistic_impl(const SeriesPanel& panel, const TestConfig& config,
                                     const RandomStream& stream, const FitPlan& plan,
                                     Aggregate&& aggregate) {
    panel.validate();
    if (panel.n_series() < 2)
        throw std::invalid_argument("gc_statistic: need the effect column plus at least one "
                                    "candidate cause");
    const std::size_t length = panel.length();
    config.check(length);
    const std::size_t start = config.resolve_eval_start(length);

    GcStatistic out;
    out.restricted_model = fit_model(panel.select({0}), plan);
    out.unrestricted_model = fit_model(panel, plan);
    out.restricted_loss =
        model_prediction_loss(out.restricted_model, panel, start, config.tau,
                              config.n_predictions, stream.branch("restricted"), aggregate);
    out.unrestricted_loss =
        model_prediction_loss(out.unrestricted_model, panel, start, config.tau,
                              config.n_predictions, stream.branch("unrestricted"), aggregate);
    if (!(out.restricted_loss > 0.0) || !(out.unrestricted_loss > 0.0))
        throw numeric_error("gc_statistic: undefined log-ratio, a mean prediction loss "
                            "is zero");
    out.statistic = std::log(out.restricted_loss / out.unrestricted_loss);
    return out;
}

// Residual sum of squares of an OLS fit, via Cholesky on the normal equations.
inline double ols_rss(const std::vector<double>& y,
                      const std::vector<const std::vector<double>*>& cols) {
    const std::size_t k = cols.size();
    const std::size_t n = y.size();
    std::vector<double> g(k * k, 0.0), c(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += (*cols[a])[t] * (*cols[b])[t];
            g[a * k + b] = g[b * k + a] = s;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += (*cols[a])[t] * y[t];
        c[a] = s;
    }
    double scale = 0.0;
    for (std::size_t a = 0; a < k; ++a) scale = std::max(scale, g[a * k + a]);
    std::vector<double> l(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            double s = g[a * k + b];
            for (std::size_t q = 0; q < b; ++q) s -= l[a * k + q] * l[b * k + q];
            if (a == b) {
                if (!(s > 1e-12 * scale))
                    throw numeric_error("linear_f_test: collinear regressors");
                l[a * k + a] = std::sqrt(s);
            } else {
                l[a * k + b] = s / l[b * k + b];
            }
        }
    }
    std::vector<double> w(k), beta(k);
    for (std::size_t a = 0; a < k; ++a) {
        double s = c[a];
        for (std::size_t q = 0; q < a; ++q) s -= l[a * k + q] * w[q];
        w[a] = s / l[a * k + a];
    }
    for (std::size_t a = k; a-- > 0;) {
        double s = w[a];
        for (std::size_t q = a + 1; q < k; ++q) s -= l[q * k + a] * beta[q];
        beta[a] = s / l[a * k + a];
    }
    double rss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double fitted = 0.0;
        for (std::size_t a = 0; a < k; ++a) fitted += (*cols[a])[t] * beta[a];
        const double r = y[t] - fitted;
        rss += r * r;
    }
    return rss;
}

}  // namespace detail_gc

/// Observed log-ratio statistic with a caller-chosen prediction reduction.
/// Model fits and prediction draws depend only on the panel and config, so
/// two calls differing in `aggregate` score identical prediction samples.
template <class Aggregate>
inline GcStatistic gc_statistic_with(const SeriesPanel& panel, const TestConfig& config,
                                     Aggregate&& aggregate) {
    detail_gc::FitPlan plan{&config.catalog, config.criterion, nullptr};
    return detail_gc::gc_statistic_impl(panel, config,
                                        RandomStream(config.seed).branch("statistic"), plan,
                                        std::forward<Aggregate>(aggregate));
}

inline GcStatistic gc_statistic(const SeriesPanel& panel, const TestConfig& config) {
    return gc_statistic_with(panel, config, expectile_aggregate);
}

/// Simulate the null distribution of the statistic and convert the observed
/// value into a bootstrap p-value.  Replicate j is driven by a stream derived
/// from (seed, j), so enlarging n_bootstrap extends, rather than reshuffles,
/// the replicate set, and results do not depend on the thread count.
inline GcTestResult bootstrap_p_value(const SeriesPanel& panel, const GcStatistic& observed,
                                      const TestConfig& config) {
    panel.validate();
    if (!observed.unrestricted_model.fitted())
        throw std::logic_error("bootstrap_p_value: unrestricted model is not fitted");
    if (observed.unrestricted_model.dimension() != panel.n_series())
        throw std::invalid_argument("bootstrap_p_value: model and panel disagree on the "
                                    "number of series");
    const std::size_t length = panel.length();
    config.check(length);
    if (!std::isfinite(observed.statistic))
        throw std::invalid_argument("bootstrap_p_value: observed statistic is not finite");

    detail_gc::FitPlan plan{&config.catalog, config.criterion, nullptr};
    std::vector<EmpiricalMarginal> kept;
    if (config.reuse_marginals) {
        kept.reserve(observed.unrestricted_model.dimension());
        for (std::size_t i = 0; i < observed.unrestricted_model.dimension(); ++i)
            kept.push_back(observed.unrestricted_model.marginal(i));
        plan.reuse = &kept;
    }

    const std::size_t B = config.n_bootstrap;
    std::vector<double> slot(B, 0.0);
    std::vector<char> ok(B, 0);
    std::vector<std::string> note(B);
    parallel_for(B, config.threads, [&](std::size_t j) {
        const RandomStream rep = RandomStream(config.seed).branch("bootstrap").branch(j);
        try {
            RandomStream paths = rep.branch("panel");
            const SeriesPanel null_panel =
                observed.unrestricted_model.simulate_null_sample(length, paths);
            const GcStatistic replicate = detail_gc::gc_statistic_impl(
                null_panel, config, rep.branch("statistic"), plan, expectile_aggregate);
            slot[j] = replicate.statistic;
            ok[j] = 1;
        } catch (const std::exception& e) {
            note[j] = e.what();
        }
    });

    std::vector<double> null_stats;
    null_stats.reserve(B);
    std::size_t failures = 0;
    std::string first_note;
    for (std::size_t j = 0; j < B; ++j) {
        if (ok[j]) {
            null_stats.push_back(slot[j]);
        } else {
            ++failures;
            if (first_note.empty()) first_note = note[j];
        }
    }
    if (failures * 20 > B)
        throw numeric_error("bootstrap_p_value: " + std::to_string(failures) + " of " +
                            std::to_string(B) + " null replicates failed (first failure: " +
                            first_note + ")");

    std::size_t hits = 0;
    for (double s : null_stats)
        if (s >= observed.statistic) ++hits;
    GcTestResult result;
    result.statistic = observed.statistic;
    result.restricted_loss = observed.restricted_loss;
    result.unrestricted_loss = observed.unrestricted_loss;
    const double divisor = static_cast<double>(null_stats.size());
    result.p_value = config.continuity_correction
                         ? (1.0 + static_cast<double>(hits)) / (1.0 + divisor)
                         : static_cast<double>(hits) / divisor;
    result.null_statistics = std::move(null_stats);
    return result;
}

/// Test all candidate causes jointly against the effect column.
inline GcTestResult run_joint_test(const SeriesPanel& panel, const TestConfig& config) {
    const GcStatistic observed = gc_statistic(panel, config);
    return bootstrap_p_value(panel, observed, config);
}

/// Test a single named cause column against the effect on the two-column
/// sub-panel (effect, cause).
inline GcTestResult run_pairwise_test(const SeriesPanel& panel, const std::string& cause_column,
                                      const TestConfig& config) {
    panel.validate();
    const auto it = std::find(panel.names.begin(), panel.names.end(), cause_column);
    if (it == panel.names.end())
        throw std::domain_error("run_pairwise_test: unknown column '" + cause_column + "'");
    const std::size_t idx = static_cast<std::size_t>(it - panel.names.begin());
    if (idx == 0)
        throw std::domain_error("run_pairwise_test: '" + cause_column +
                                "' is the effect column");
    return run_joint_test(panel.select({0, idx}), config);
}

/// Classical linear Granger F-test: OLS of X_t on {1, X_{t-1}} against
/// {1, X_{t-1}, Z_{1,t-1}, ..., Z_{d,t-1}}.
inline double linear_f_test(const SeriesPanel& panel, std::size_t lags = 1) {
    panel.validate();
    if (lags != 1) throw std::invalid_argument("linear_f_test: only one lag is supported");
    if (panel.n_series() < 2)
        throw std::invalid_argument("linear_f_test: need the effect column plus at least one "
                                    "candidate cause");
    const std::size_t m = panel.n_series();
    const std::size_t d = m - 1;
    const std::size_t length = panel.length();
    if (length <= d + 4)
        throw std::invalid_argument("linear_f_test: series too short for the regression");

    const std::size_t n = length - 1;
    std::vector<double> y(n);
    std::vector<std::vector<double>> lagged(m, std::vector<double>(n));
    std::vector<double> ones(n, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
        y[t] = panel.columns[0][t + 1];
        for (std::size_t c = 0; c < m; ++c) lagged[c][t] = panel.columns[c][t];
    }
    std::vector<const std::vector<double>*> cols{&ones, &lagged[0]};
    const double rss_r = detail_gc::ols_rss(y, cols);
    for (std::size_t c = 1; c < m; ++c) cols.push_back(&lagged[c]);
    const double rss_u = detail_gc::ols_rss(y, cols);

    const double dd = static_cast<double>(d);
    double f = ((rss_r - rss_u) / dd) /
               (rss_u / (static_cast<double>(length) - 1.0 - (dd + 1.0)));
    if (f < 0.0) f = 0.0;
    return math::f_sf(f, dd, static_cast<double>(length) - 2.0 - dd);
}

}  // namespace egc
