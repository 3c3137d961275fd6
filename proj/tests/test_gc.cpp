#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "egc/dgp.hpp"
#include "egc/gc.hpp"

namespace {

egc::SeriesPanel dgp_panel(egc::DgpTag tag, std::size_t T, std::uint64_t seed) {
    egc::RandomStream gen(seed);
    return egc::simulate_dgp(egc::DgpSpec{tag}, T, gen);
}

// AR(1) effect next to an independent noise candidate.
egc::SeriesPanel noise_pair(std::size_t T, std::uint64_t seed) {
    egc::RandomStream root(seed);
    egc::RandomStream sx = root.branch("x"), sz = root.branch("z");
    egc::SeriesPanel p;
    p.names = {"x", "z"};
    p.columns.assign(2, {});
    double x = 0.0;
    for (std::size_t t = 0; t < 300 + T; ++t) {
        x = 0.5 * x + sx.normal();
        if (t >= 300) {
            p.columns[0].push_back(x);
            p.columns[1].push_back(sz.normal());
        }
    }
    return p;
}

// x_t = 0.5 x_{t-1} + c y_{t-1} + c z_{t-1} + noise, with AR(1) causes.
egc::SeriesPanel linear_effect_panel(double c, std::size_t T, std::uint64_t seed) {
    egc::RandomStream root(seed);
    egc::RandomStream sx = root.branch("x"), sy = root.branch("y"), sz = root.branch("z");
    egc::SeriesPanel p;
    p.names = {"x", "y", "z"};
    p.columns.assign(3, {});
    double x = 0.0, y = 0.0, z = 0.0;
    for (std::size_t t = 0; t < 500 + T; ++t) {
        const double yl = y, zl = z;
        x = 0.5 * x + c * yl + c * zl + sx.normal();
        y = 0.5 * yl + sy.normal();
        z = 0.5 * zl + sz.normal();
        if (t >= 500) {
            p.columns[0].push_back(x);
            p.columns[1].push_back(y);
            p.columns[2].push_back(z);
        }
    }
    return p;
}

egc::TestConfig small_config(std::uint64_t seed) {
    egc::TestConfig cfg;
    cfg.n_predictions = 16;
    cfg.n_bootstrap = 12;
    cfg.seed = seed;
    return cfg;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("test configuration is validated", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(60, 46001);
    const egc::TestConfig cfg = small_config(1);

    egc::TestConfig bad = cfg;
    bad.tau = 0.0;
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::domain_error);
    bad = cfg;
    bad.tau = 1.0;
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::domain_error);
    bad = cfg;
    bad.n_predictions = 1;
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::invalid_argument);
    bad = cfg;
    bad.n_bootstrap = 0;
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::invalid_argument);
    bad = cfg;
    bad.threads = 0;
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::invalid_argument);
    bad = cfg;
    bad.eval_start = 1;
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::invalid_argument);
    bad = cfg;
    bad.eval_start = panel.length();
    CHECK_THROWS_AS(egc::gc_statistic(panel, bad), std::invalid_argument);

    egc::SeriesPanel effect_only;
    effect_only.names = {"x"};
    effect_only.columns = {panel.columns[0]};
    CHECK_THROWS_AS(egc::gc_statistic(effect_only, cfg), std::invalid_argument);
}

TEST_CASE("identical point predictions give a zero statistic", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(80, 46002);
    const egc::TestConfig cfg = small_config(2);
    const auto constant = [](std::span<const double>, double) { return 0.25; };
    const egc::GcStatistic s = egc::gc_statistic_with(panel, cfg, constant);
    CHECK(s.statistic == 0.0);
    CHECK(s.restricted_loss == s.unrestricted_loss);
    CHECK(s.restricted_loss > 0.0);
}

TEST_CASE("expectile reduction matches the mean at tau one-half", "[gc]") {
    const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p1, 150, 46003);
    egc::TestConfig cfg = small_config(3);
    cfg.n_predictions = 40;

    cfg.tau = 0.5;
    const egc::GcStatistic via_expectile = egc::gc_statistic(panel, cfg);
    const egc::GcStatistic via_mean = egc::gc_statistic_with(panel, cfg, egc::mean_aggregate);
    CHECK(std::fabs(via_expectile.statistic - via_mean.statistic) < 1e-6);
    CHECK(std::fabs(via_expectile.restricted_loss - via_mean.restricted_loss) < 1e-6);

    cfg.tau = 0.25;
    const egc::GcStatistic tail_expectile = egc::gc_statistic(panel, cfg);
    const egc::GcStatistic tail_mean = egc::gc_statistic_with(panel, cfg, egc::mean_aggregate);
    CHECK(tail_expectile.statistic != tail_mean.statistic);
}

TEST_CASE("statistic is the log loss ratio with fitted models attached", "[gc]") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::s1, 100, 46100 + seed);
        egc::TestConfig cfg = small_config(seed);
        cfg.n_predictions = 24;
        const egc::GcStatistic s = egc::gc_statistic(panel, cfg);
        CHECK((s.statistic > 0.0) == (s.restricted_loss > s.unrestricted_loss));
        CHECK(std::fabs(s.statistic - std::log(s.restricted_loss / s.unrestricted_loss)) <
              1e-12);
        CHECK(s.restricted_model.fitted());
        CHECK(s.unrestricted_model.fitted());
        CHECK(s.restricted_model.dimension() == 1);
        CHECK(s.unrestricted_model.dimension() == 3);
    }
}

TEST_CASE("degenerate prediction loss raises a numeric error", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(70, 46004);
    const egc::TestConfig cfg = small_config(4);
    const auto undefined = [](std::span<const double>, double) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(egc::gc_statistic_with(panel, cfg, undefined), egc::numeric_error);
}

TEST_CASE("bootstrap p-value counts exceedances exactly", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(80, 46005);
    const egc::TestConfig cfg = small_config(5);
    const egc::GcStatistic observed = egc::gc_statistic(panel, cfg);
    const egc::GcTestResult result = egc::bootstrap_p_value(panel, observed, cfg);

    REQUIRE(result.null_statistics.size() == cfg.n_bootstrap);
    CHECK(result.statistic == observed.statistic);
    CHECK(result.restricted_loss == observed.restricted_loss);
    CHECK(result.unrestricted_loss == observed.unrestricted_loss);
    std::size_t hits = 0;
    for (double v : result.null_statistics)
        if (v >= result.statistic) ++hits;
    CHECK(result.p_value == static_cast<double>(hits) / 12.0);
    const double scaled = result.p_value * 12.0;
    CHECK(std::fabs(scaled - std::round(scaled)) < 1e-12);

    egc::GcStatistic shifted = observed;
    shifted.statistic = 1e9;
    CHECK(egc::bootstrap_p_value(panel, shifted, cfg).p_value == 0.0);
    shifted.statistic = *std::min_element(result.null_statistics.begin(),
                                          result.null_statistics.end());
    CHECK(egc::bootstrap_p_value(panel, shifted, cfg).p_value == 1.0);

    egc::TestConfig corrected = cfg;
    corrected.continuity_correction = true;
    shifted.statistic = 1e9;
    CHECK(egc::bootstrap_p_value(panel, shifted, corrected).p_value == 1.0 / 13.0);
}

TEST_CASE("growing the replicate count extends the null sample", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(80, 46006);
    egc::TestConfig cfg = small_config(6);
    const egc::GcStatistic observed = egc::gc_statistic(panel, cfg);
    cfg.n_bootstrap = 6;
    const egc::GcTestResult first = egc::bootstrap_p_value(panel, observed, cfg);
    cfg.n_bootstrap = 10;
    const egc::GcTestResult second = egc::bootstrap_p_value(panel, observed, cfg);
    REQUIRE(first.null_statistics.size() == 6);
    REQUIRE(second.null_statistics.size() == 10);
    for (std::size_t j = 0; j < 6; ++j)
        CHECK(first.null_statistics[j] == second.null_statistics[j]);
}

TEST_CASE("results are identical across thread counts and repeats", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(80, 46007);
    egc::TestConfig cfg = small_config(7);
    const egc::GcTestResult serial = egc::run_joint_test(panel, cfg);
    const egc::GcTestResult again = egc::run_joint_test(panel, cfg);
    cfg.threads = 4;
    const egc::GcTestResult threaded = egc::run_joint_test(panel, cfg);
    CHECK(serial.statistic == again.statistic);
    CHECK(serial.p_value == again.p_value);
    CHECK(serial.null_statistics == again.null_statistics);
    CHECK(serial.statistic == threaded.statistic);
    CHECK(serial.p_value == threaded.p_value);
    CHECK(serial.null_statistics == threaded.null_statistics);
}

TEST_CASE("marginal reuse produces a deterministic well-formed result", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(80, 46008);
    egc::TestConfig cfg = small_config(8);
    cfg.reuse_marginals = true;
    const egc::GcTestResult a = egc::run_joint_test(panel, cfg);
    const egc::GcTestResult b = egc::run_joint_test(panel, cfg);
    CHECK(a.null_statistics == b.null_statistics);
    CHECK(a.p_value == b.p_value);
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
    CHECK(a.null_statistics.size() == cfg.n_bootstrap);
}

TEST_CASE("widespread replicate failures abort with a diagnostic", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(60, 46009);
    egc::TestConfig cfg = small_config(9);
    cfg.n_bootstrap = 8;
    const egc::GcStatistic observed = egc::gc_statistic(panel, cfg);
    egc::SeriesPanel torso = panel;
    for (auto& col : torso.columns) col.resize(19);
    CHECK_THROWS_AS(egc::bootstrap_p_value(torso, observed, cfg), egc::numeric_error);
    CHECK_THROWS_WITH(egc::bootstrap_p_value(torso, observed, cfg),
                      Catch::Matchers::ContainsSubstring("null replicates failed"));
}

TEST_CASE("joint test on a single candidate equals the pairwise test", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(90, 46010);
    const egc::TestConfig cfg = small_config(10);
    const egc::GcTestResult joint = egc::run_joint_test(panel, cfg);
    const egc::GcTestResult pairwise = egc::run_pairwise_test(panel, "z", cfg);
    CHECK(joint.statistic == pairwise.statistic);
    CHECK(joint.p_value == pairwise.p_value);
    CHECK(joint.null_statistics == pairwise.null_statistics);
}

TEST_CASE("pairwise test validates the cause column", "[gc]") {
    const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p1, 100, 46011);
    const egc::TestConfig cfg = small_config(11);
    CHECK_THROWS_AS(egc::run_pairwise_test(panel, "w", cfg), std::domain_error);
    CHECK_THROWS_AS(egc::run_pairwise_test(panel, "x", cfg), std::domain_error);
    const egc::GcTestResult r = egc::run_pairwise_test(panel, "z", cfg);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
}

TEST_CASE("linear f test rejects a linear channel and misses an interaction", "[gc]") {
    int linear_rejections = 0;
    for (int s = 0; s < 100; ++s) {
        const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p1, 200, 47000 + s);
        if (egc::linear_f_test(panel) < 0.05) ++linear_rejections;
    }
    CHECK(linear_rejections >= 90);

    int interaction_rejections = 0;
    for (int s = 0; s < 100; ++s) {
        const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p3, 500, 47200 + s);
        if (egc::linear_f_test(panel) < 0.05) ++interaction_rejections;
    }
    CHECK(interaction_rejections >= 20);
    CHECK(interaction_rejections <= 50);
}

TEST_CASE("linear f test p-values are uniform under the null", "[gc]") {
    std::vector<double> ps;
    for (int s = 0; s < 200; ++s) ps.push_back(egc::linear_f_test(noise_pair(200, 48000 + s)));
    std::sort(ps.begin(), ps.end());
    double ks = 0.0;
    const double n = static_cast<double>(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        ks = std::max(ks, std::fabs(ps[i] - static_cast<double>(i) / n));
        ks = std::max(ks, std::fabs(ps[i] - static_cast<double>(i + 1) / n));
    }
    CHECK(ks < 0.1);
}

TEST_CASE("linear f test validates input and flags collinearity", "[gc]") {
    const egc::SeriesPanel panel = noise_pair(80, 48500);
    CHECK_THROWS_AS(egc::linear_f_test(panel, 2), std::invalid_argument);
    CHECK_THROWS_AS(egc::linear_f_test(noise_pair(5, 48501)), std::invalid_argument);

    egc::SeriesPanel duplicated;
    duplicated.names = {"x", "z"};
    duplicated.columns = {panel.columns[0], panel.columns[0]};
    CHECK_THROWS_AS(egc::linear_f_test(duplicated), egc::numeric_error);
}

TEST_CASE("statistic stays small when no causal channel exists", "[gc]") {
    std::vector<double> stats;
    egc::TestConfig cfg;
    cfg.tau = 0.5;
    cfg.n_predictions = 100;
    for (int s = 0; s < 40; ++s) {
        const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::s1, 500, 81000 + s);
        cfg.seed = 82000 + s;
        stats.push_back(egc::gc_statistic(panel, cfg).statistic);
    }
    CHECK(std::fabs(median_of(stats)) < 0.05);
}

TEST_CASE("evidence grows with the strength of a linear channel", "[gc]") {
    std::vector<double> medians;
    for (double c : {0.0, 0.2, 0.4}) {
        std::vector<double> stats;
        egc::TestConfig cfg;
        cfg.tau = 0.5;
        cfg.n_predictions = 50;
        for (int s = 0; s < 30; ++s) {
            const egc::SeriesPanel panel = linear_effect_panel(c, 300, 83000 + s);
            cfg.seed = 84000 + s;
            stats.push_back(egc::gc_statistic(panel, cfg).statistic);
        }
        medians.push_back(median_of(stats));
    }
    CHECK(medians[0] <= medians[1]);
    CHECK(medians[1] <= medians[2]);
    CHECK(medians[2] > 0.1);
}

TEST_CASE("null replicate statistics center near zero", "[gc]") {
    egc::RandomStream gen(85000);
    const egc::SeriesPanel full = egc::simulate_dgp(egc::DgpSpec{egc::DgpTag::s1}, 200, gen);
    const egc::SeriesPanel panel = full.select({0, 1});
    egc::TestConfig cfg;
    cfg.tau = 0.5;
    cfg.n_predictions = 40;
    cfg.n_bootstrap = 200;
    cfg.seed = 86000;
    const egc::GcTestResult r = egc::run_joint_test(panel, cfg);
    REQUIRE(r.null_statistics.size() == 200);
    double mean = 0.0;
    for (double v : r.null_statistics) mean += v;
    mean /= 200.0;
    double var = 0.0;
    for (double v : r.null_statistics) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / 199.0);
    CHECK(std::fabs(mean) <= 2.0 * sd / std::sqrt(200.0));
    CHECK(sd < 0.25);
}

TEST_CASE("upper tail expectiles expose a hidden interaction", "[gc]") {
    int positive = 0;
    egc::TestConfig cfg;
    cfg.tau = 0.9;
    cfg.n_predictions = 100;
    for (int s = 0; s < 30; ++s) {
        const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p3, 500, 40000 + s);
        cfg.seed = 50000 + s;
        if (egc::gc_statistic(panel, cfg).statistic > 0.0) ++positive;
    }
    CHECK(positive >= 27);
}

TEST_CASE("central expectile has little leverage on a pure interaction", "[gc]") {
    // The fitted pair copulas adapt the conditional spread to |y z|, which
    // moves tail expectiles but leaves the central prediction at the
    // autoregressive level: the tau = 1/2 statistic concentrates near zero
    // instead of tracking the population loss gap.
    std::vector<double> stats;
    int positive = 0;
    egc::TestConfig cfg;
    cfg.tau = 0.5;
    cfg.n_predictions = 100;
    for (int s = 0; s < 30; ++s) {
        const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p3, 500, 40000 + s);
        cfg.seed = 50000 + s;
        stats.push_back(egc::gc_statistic(panel, cfg).statistic);
        if (stats.back() > 0.0) ++positive;
    }
    CHECK(std::fabs(median_of(stats)) < 0.08);
    CHECK(positive >= 9);
    CHECK(positive <= 27);
}

TEST_CASE("a linear causal channel is detected end to end", "[gc]") {
    const egc::SeriesPanel panel = dgp_panel(egc::DgpTag::p1, 300, 87000);
    egc::TestConfig cfg;
    cfg.tau = 0.5;
    cfg.n_predictions = 50;
    cfg.n_bootstrap = 50;
    cfg.seed = 88000;
    const egc::GcTestResult r = egc::run_joint_test(panel, cfg);
    CHECK(r.statistic > 0.05);
    CHECK(r.p_value <= 0.02);
}
