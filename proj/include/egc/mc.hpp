#pragma once

// Monte-Carlo size/power harness: runs the causality tests over a grid of
// (design, expectile level, length) cells, S simulated panels per cell, and
// reports per-cell rejection rates as CSV or as an aligned text table.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "egc/dgp.hpp"
#include "egc/gc.hpp"
#include "egc/parallel.hpp"
#include "egc/rng.hpp"

namespace egc {

enum class McTestKind { joint, pairwise, ftest };

inline const char* mc_kind_name(McTestKind kind) {
    switch (kind) {
        case McTestKind::joint: return "joint";
        case McTestKind::pairwise: return "pairwise";
        case McTestKind::ftest: return "ftest";
    }
    throw std::invalid_argument("mc_kind_name: unknown kind");
}

struct McCell {
    DgpTag dgp = DgpTag::s1;
    McTestKind kind = McTestKind::joint;
    std::string cause;      // pairwise only; empty otherwise
    double tau = 0.5;       // 0 for the F-test, which has no expectile level
    std::size_t length = 0; // T
    double rate = 0.0;      // rejections / n_valid
    std::size_t n_valid = 0;
    std::size_t n_failed = 0;
    bool valid = false;     // false when more than 5% of replicates failed
};

struct McReport {
    std::vector<McCell> cells;
    std::size_t replications = 0;  // S per cell
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::vector<double> taus;      // grid, in input order
};

namespace detail_mc {

struct CellOutcome {
    std::vector<char> rejected;
    std::vector<char> failed;
};

inline McCell finish_cell(McCell cell, const CellOutcome& outcome) {
    const std::size_t S = outcome.rejected.size();
    std::size_t rejections = 0;
    for (std::size_t r = 0; r < S; ++r) {
        if (outcome.failed[r]) {
            ++cell.n_failed;
        } else {
            ++cell.n_valid;
            if (outcome.rejected[r]) ++rejections;
        }
    }
    cell.valid = cell.n_failed * 20 <= S && cell.n_valid > 0;
    cell.rate = cell.n_valid > 0
                    ? static_cast<double>(rejections) / static_cast<double>(cell.n_valid)
                    : 0.0;
    return cell;
}

}  // namespace detail_mc

/// Rejection-rate study over dgps x taus x Ts.  Panels for replicate r of a
/// (dgp, T) pair are shared across taus and test kinds, so columns of the
/// report are paired comparisons.  Fully deterministic in config.seed and
/// independent of config.threads.
inline McReport mc_study(const std::vector<DgpSpec>& dgps, const std::vector<double>& taus,
                         const std::vector<std::size_t>& Ts, std::size_t S,
                         const TestConfig& config, double alpha,
                         const std::vector<McTestKind>& kinds = {McTestKind::joint}) {
    if (S < 1) throw std::invalid_argument("mc_study: need at least one replication");
    if (dgps.empty() || taus.empty() || Ts.empty() || kinds.empty())
        throw std::invalid_argument("mc_study: empty grid axis");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("mc_study: alpha must lie in (0,1)");
    for (double tau : taus) check_tau(tau);

    McReport report;
    report.replications = S;
    report.alpha = alpha;
    report.seed = config.seed;
    report.taus = taus;

    const RandomStream root(config.seed);
    TestConfig replicate_config = config;
    replicate_config.threads = 1;  // parallelism lives at the replicate level

    for (std::size_t di = 0; di < dgps.size(); ++di) {
        const DgpSpec& spec = dgps[di];
        for (std::size_t Ti = 0; Ti < Ts.size(); ++Ti) {
            const std::size_t length = Ts[Ti];
            const RandomStream panel_root =
                root.branch("mc-panel").branch(di).branch(Ti);

            // One simulated panel set per (dgp, T), shared by every cell.
            auto make_panel = [&](std::size_t r) {
                RandomStream gen = panel_root.branch(r);
                return simulate_dgp(spec, length, gen);
            };

            for (McTestKind kind : kinds) {
                if (kind == McTestKind::ftest) {
                    detail_mc::CellOutcome outcome;
                    outcome.rejected.assign(S, 0);
                    outcome.failed.assign(S, 0);
                    parallel_for(S, config.threads, [&](std::size_t r) {
                        try {
                            outcome.rejected[r] = linear_f_test(make_panel(r)) < alpha;
                        } catch (const std::exception&) {
                            outcome.failed[r] = 1;
                        }
                    });
                    McCell cell;
                    cell.dgp = spec.tag;
                    cell.kind = kind;
                    cell.tau = 0.0;
                    cell.length = length;
                    report.cells.push_back(detail_mc::finish_cell(cell, outcome));
                    continue;
                }

                std::vector<std::string> causes{""};
                if (kind == McTestKind::pairwise) {
                    // Cause columns are everything after the effect.
                    RandomStream gen = panel_root.branch(0);
                    causes = simulate_dgp(spec, length, gen).names;
                    causes.erase(causes.begin());
                }
                for (std::size_t ti = 0; ti < taus.size(); ++ti) {
                    const RandomStream test_root = root.branch("mc-test")
                                                       .branch(di)
                                                       .branch(ti)
                                                       .branch(Ti);
                    for (std::size_t ci = 0; ci < causes.size(); ++ci) {
                        detail_mc::CellOutcome outcome;
                        outcome.rejected.assign(S, 0);
                        outcome.failed.assign(S, 0);
                        parallel_for(S, config.threads, [&](std::size_t r) {
                            try {
                                TestConfig cfg = replicate_config;
                                cfg.tau = taus[ti];
                                cfg.seed = test_root.branch(ci).branch(r).key();
                                const SeriesPanel panel = make_panel(r);
                                const GcTestResult result =
                                    kind == McTestKind::joint
                                        ? run_joint_test(panel, cfg)
                                        : run_pairwise_test(panel, causes[ci], cfg);
                                outcome.rejected[r] = result.p_value < alpha;
                            } catch (const std::exception&) {
                                outcome.failed[r] = 1;
                            }
                        });
                        McCell cell;
                        cell.dgp = spec.tag;
                        cell.kind = kind;
                        cell.cause = causes[ci];
                        cell.tau = taus[ti];
                        cell.length = length;
                        report.cells.push_back(detail_mc::finish_cell(cell, outcome));
                    }
                }
            }
        }
    }
    return report;
}

/// One CSV row per cell, with the study-level settings denormalized in.
inline std::string to_csv(const McReport& report) {
    std::string out = "dgp,kind,cause,tau,T,rate,valid,n_valid,n_failed,S,alpha,seed\n";
    char line[256];
    for (const McCell& c : report.cells) {
        std::snprintf(line, sizeof(line), "%s,%s,%s,%g,%zu,%.6f,%d,%zu,%zu,%zu,%g,%llu\n",
                      dgp_name(c.dgp), mc_kind_name(c.kind), c.cause.c_str(), c.tau,
                      c.length, c.rate, c.valid ? 1 : 0, c.n_valid, c.n_failed,
                      report.replications, report.alpha,
                      static_cast<unsigned long long>(report.seed));
        out += line;
    }
    return out;
}

/// Aligned text table: one block per test kind (and cause), designs down the
/// rows with one line per length, expectile levels across the columns.
inline std::string to_table(const McReport& report) {
    std::string out;
    char buf[128];

    auto block_header = [&](const std::string& title, bool with_taus) {
        std::snprintf(buf, sizeof(buf), "%s rejection rates (alpha = %g, S = %zu, seed = %llu)\n",
                      title.c_str(), report.alpha, report.replications,
                      static_cast<unsigned long long>(report.seed));
        out += buf;
        out += "dgp       T  ";
        if (with_taus) {
            for (double tau : report.taus) {
                std::snprintf(buf, sizeof(buf), "  tau=%-5.2f", tau);
                out += buf;
            }
        } else {
            out += "      rate";
        }
        out += "\n";
    };

    auto cell_text = [&](const McCell& c) {
        if (!c.valid)
            std::snprintf(buf, sizeof(buf), "  %9s", "n/a");
        else
            std::snprintf(buf, sizeof(buf), "  %9.4f", c.rate);
        out += buf;
    };

    // Collect the distinct (kind, cause) blocks in first-appearance order.
    std::vector<std::pair<McTestKind, std::string>> blocks;
    for (const McCell& c : report.cells) {
        const std::pair<McTestKind, std::string> key{c.kind, c.cause};
        bool seen = false;
        for (const auto& b : blocks) seen = seen || b == key;
        if (!seen) blocks.push_back(key);
    }

    bool first = true;
    for (const auto& [kind, cause] : blocks) {
        if (!first) out += "\n";
        first = false;
        std::string title = mc_kind_name(kind);
        if (kind == McTestKind::pairwise) title += " cause=" + cause;
        block_header(title, kind != McTestKind::ftest);

        // Rows appear in cell order, one line per (dgp, T).
        bool row_open = false;
        DgpTag row_dgp = DgpTag::s1;
        std::size_t row_length = 0;
        for (const McCell& c : report.cells) {
            if (c.kind != kind || c.cause != cause) continue;
            if (!row_open || row_dgp != c.dgp || row_length != c.length) {
                if (row_open) out += "\n";
                row_open = true;
                row_dgp = c.dgp;
                row_length = c.length;
                std::snprintf(buf, sizeof(buf), "%-7s%4zu  ", dgp_name(c.dgp), c.length);
                out += buf;
            }
            cell_text(c);
        }
        out += "\n";
    }
    return out;
}

}  // namespace egc
