// Command-line front end: simulate panels, fit models, run single tests over
// a tau grid, and drive Monte-Carlo studies.  Human-readable tables go to
// stdout; JSON/CSV files carry an embedded manifest so reruns with the same
// manifest are byte-identical.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "egc/dgp.hpp"
#include "egc/gc.hpp"
#include "egc/io.hpp"
#include "egc/mc.hpp"
#include "egc/mvine.hpp"

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::size_t default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("EG_SEED")) {
        std::uint64_t value = 0;
        const char* end = env + std::string(env).size();
        const auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec != std::errc() || ptr != end)
            throw std::invalid_argument("EG_SEED must be an unsigned integer, got '" +
                                        std::string(env) + "'");
        return value;
    }
    return flag_value;
}

egc::SelectionCriterion criterion_from_name(const std::string& s) {
    if (s == "aic") return egc::SelectionCriterion::aic;
    if (s == "bic") return egc::SelectionCriterion::bic;
    throw std::invalid_argument("unknown selection criterion '" + s +
                                "' (expected aic or bic)");
}

egc::McTestKind kind_from_name(const std::string& s) {
    for (egc::McTestKind k :
         {egc::McTestKind::joint, egc::McTestKind::pairwise, egc::McTestKind::ftest})
        if (egc::mc_kind_name(k) == s) return k;
    throw std::invalid_argument("unknown test kind '" + s +
                                "' (expected joint, pairwise, or ftest)");
}

void emit(const std::string& output, const std::string& text) {
    if (output.empty())
        std::cout << text;
    else
        egc::write_text_file(output, text);
}

std::string manifest_comment(const nlohmann::json& manifest) {
    return "# eg-manifest: " + manifest.dump() + "\n";
}

const char* stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

struct TestArgs {
    std::string input;
    std::string effect;
    std::vector<std::string> causes;
    std::vector<double> taus{0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95};
    std::size_t n_predictions = 200;
    std::size_t t0 = 0;
    std::size_t n_bootstrap = 200;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::size_t threads = default_threads();
    std::string date_column;
    bool log_returns = false;
    bool pairwise = false;
    bool null_statistics = false;
    std::string criterion = "aic";
    bool continuity_correction = false;
    bool reuse_marginals = false;
    std::string output;
};

egc::SeriesPanel load_panel(const std::string& path, const std::string& date_column,
                            bool log_returns) {
    egc::CsvOptions options;
    options.date_column = date_column;
    egc::SeriesPanel panel = egc::read_csv_file(path, options);
    if (log_returns) panel = egc::apply_log_returns(panel);
    if (panel.length() < 20)
        throw std::invalid_argument("series too short: need at least 20 observations, got " +
                                    std::to_string(panel.length()));
    return panel;
}

std::size_t column_index(const egc::SeriesPanel& panel, const std::string& name) {
    for (std::size_t i = 0; i < panel.names.size(); ++i)
        if (panel.names[i] == name) return i;
    throw std::invalid_argument("column '" + name + "' not found in input");
}

void run_test(const TestArgs& args) {
    const egc::SeriesPanel full =
        load_panel(args.input, args.date_column, args.log_returns);

    const std::string effect = args.effect.empty() ? full.names.front() : args.effect;
    std::vector<std::string> causes = args.causes;
    if (causes.empty())
        for (const std::string& name : full.names)
            if (name != effect) causes.push_back(name);
    if (causes.empty())
        throw std::invalid_argument("need at least one cause column besides '" + effect + "'");

    std::vector<std::size_t> idx{column_index(full, effect)};
    for (const std::string& cause : causes) {
        if (cause == effect)
            throw std::invalid_argument("cause column '" + cause + "' equals the effect column");
        const std::size_t i = column_index(full, cause);
        for (std::size_t seen : idx)
            if (seen == i)
                throw std::invalid_argument("duplicate cause column '" + cause + "'");
        idx.push_back(i);
    }
    const egc::SeriesPanel panel = full.select(idx);

    egc::TestConfig config;
    config.n_predictions = args.n_predictions;
    config.eval_start = args.t0;
    config.n_bootstrap = args.n_bootstrap;
    config.seed = resolve_seed(args.seed_given, args.seed);
    config.threads = args.threads;
    config.criterion = criterion_from_name(args.criterion);
    config.continuity_correction = args.continuity_correction;
    config.reuse_marginals = args.reuse_marginals;

    struct Row {
        std::string label;
        nlohmann::json causes;
        const char* kind;
        std::vector<egc::GcTestResult> results;
    };
    std::vector<Row> rows;
    if (args.pairwise)
        for (const std::string& cause : causes)
            rows.push_back({cause + " -> " + effect, cause, "pairwise", {}});
    std::string joint_label;
    if (causes.size() > 1) {
        joint_label = "(";
        for (std::size_t i = 0; i < causes.size(); ++i)
            joint_label += (i ? ", " : "") + causes[i];
        joint_label += ") -> " + effect;
    } else {
        joint_label = causes.front() + " -> " + effect;
    }
    rows.push_back({joint_label, causes, "joint", {}});

    for (double tau : args.taus) {
        egc::TestConfig c = config;
        c.tau = tau;
        for (Row& row : rows)
            row.results.push_back(row.kind == std::string("pairwise")
                                      ? egc::run_pairwise_test(panel, row.causes.get<std::string>(), c)
                                      : egc::run_joint_test(panel, c));
    }

    // Table shaped like the pairwise/joint p-value reports: one row per
    // direction, one column per tau, stars beside each p-value.
    std::size_t label_width = std::string("direction").size();
    for (const Row& row : rows) label_width = std::max(label_width, row.label.size());
    label_width += 2;

    char buf[40];
    std::string table;
    std::snprintf(buf, sizeof(buf), "%zu", panel.length());
    table += "Granger causality in expectiles, p-values (T=" + std::string(buf);
    table += ", N=" + std::to_string(config.n_predictions);
    table += ", T0=" + std::to_string(config.resolve_eval_start(panel.length()));
    table += ", B=" + std::to_string(config.n_bootstrap);
    table += ", seed=" + std::to_string(config.seed) + ")\n\n";

    table += pad("direction", label_width);
    for (double tau : args.taus) {
        std::snprintf(buf, sizeof(buf), "%g", tau);
        table += pad(buf, 10);
    }
    table += '\n';
    table += std::string(label_width + 10 * args.taus.size(), '-') + '\n';
    for (const Row& row : rows) {
        table += pad(row.label, label_width);
        for (const egc::GcTestResult& r : row.results) {
            std::snprintf(buf, sizeof(buf), "%.3f%s", r.p_value, stars(r.p_value));
            table += pad(buf, 10);
        }
        table += '\n';
    }
    table += "\nsignificance: * p<0.10, ** p<0.05, *** p<0.01\n";
    std::cout << table;

    if (!args.output.empty()) {
        egc::RunManifest manifest;
        manifest.command = "test";
        manifest.inputs = {args.input};
        manifest.output_path = args.output;
        manifest.tau_grid = args.taus;
        manifest.config = config;

        nlohmann::json doc;
        doc["schema"] = egc::result_schema;
        doc["manifest"] = egc::manifest_to_json(manifest);
        doc["effect"] = effect;
        doc["causes"] = causes;
        doc["length"] = panel.length();
        nlohmann::json tests = nlohmann::json::array();
        for (const Row& row : rows)
            for (std::size_t i = 0; i < args.taus.size(); ++i) {
                egc::TestConfig c = config;
                c.tau = args.taus[i];
                nlohmann::json entry = egc::result_to_json(row.results[i], c, panel.length(),
                                                           args.null_statistics);
                entry["kind"] = row.kind;
                entry["causes"] = row.causes;
                tests.push_back(std::move(entry));
            }
        doc["tests"] = std::move(tests);
        egc::write_text_file(args.output, doc.dump(2) + "\n");
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string dgp = "s1";
    std::size_t length = 500;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string output;
};

void run_simulate(const SimulateArgs& args) {
    const egc::DgpTag tag = egc::dgp_from_name(lowercase(args.dgp));
    const std::uint64_t seed = resolve_seed(args.seed_given, args.seed);
    egc::RandomStream rng(seed);
    const egc::SeriesPanel panel = egc::simulate_dgp(egc::DgpSpec{tag}, args.length, rng);

    egc::RunManifest manifest;
    manifest.command = "simulate";
    manifest.output_path = args.output;
    manifest.config.seed = seed;
    nlohmann::json j = egc::manifest_to_json(manifest);
    j["dgp"] = egc::dgp_name(tag);
    j["T"] = args.length;

    emit(args.output, manifest_comment(j) + egc::panel_to_csv(panel));
}

// ---------------------------------------------------------------------------
// mc
// ---------------------------------------------------------------------------

struct McArgs {
    std::vector<std::string> dgps{"s1", "p1"};
    std::vector<double> taus{0.1, 0.5, 0.9};
    std::vector<std::size_t> lengths{100};
    std::size_t replications = 25;
    std::size_t n_bootstrap = 50;
    std::size_t n_predictions = 50;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::size_t t0 = 0;
    std::size_t threads = default_threads();
    std::vector<std::string> tests{"joint"};
    std::string criterion = "aic";
    std::string output;
};

void run_mc(const McArgs& args) {
    std::vector<egc::DgpSpec> dgps;
    for (const std::string& name : args.dgps)
        dgps.push_back(egc::DgpSpec{egc::dgp_from_name(lowercase(name))});
    std::vector<egc::McTestKind> kinds;
    for (const std::string& name : args.tests) kinds.push_back(kind_from_name(name));

    egc::TestConfig config;
    config.n_predictions = args.n_predictions;
    config.eval_start = args.t0;
    config.n_bootstrap = args.n_bootstrap;
    config.seed = resolve_seed(args.seed_given, args.seed);
    config.threads = args.threads;
    config.criterion = criterion_from_name(args.criterion);

    const egc::McReport report =
        egc::mc_study(dgps, args.taus, args.lengths, args.replications, config, args.alpha, kinds);
    std::cout << egc::to_table(report);

    if (!args.output.empty()) {
        egc::RunManifest manifest;
        manifest.command = "mc";
        manifest.output_path = args.output;
        manifest.tau_grid = args.taus;
        manifest.config = config;
        nlohmann::json j = egc::manifest_to_json(manifest);
        nlohmann::json dgp_names = nlohmann::json::array();
        for (const egc::DgpSpec& spec : dgps) dgp_names.push_back(egc::dgp_name(spec.tag));
        j["dgps"] = std::move(dgp_names);
        j["T"] = args.lengths;
        j["S"] = args.replications;
        j["alpha"] = args.alpha;
        j["tests"] = args.tests;
        egc::write_text_file(args.output, manifest_comment(j) + egc::to_csv(report));
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string effect;
    std::vector<std::string> causes;
    std::string date_column;
    bool log_returns = false;
    std::string criterion = "aic";
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string output;
};

void run_fit(const FitArgs& args) {
    egc::SeriesPanel panel = load_panel(args.input, args.date_column, args.log_returns);
    if (!args.effect.empty() || !args.causes.empty()) {
        const std::string effect = args.effect.empty() ? panel.names.front() : args.effect;
        std::vector<std::string> causes = args.causes;
        if (causes.empty())
            for (const std::string& name : panel.names)
                if (name != effect) causes.push_back(name);
        std::vector<std::size_t> idx{column_index(panel, effect)};
        for (const std::string& cause : causes) idx.push_back(column_index(panel, cause));
        panel = panel.select(idx);
    }

    const egc::MVineModel model =
        egc::MVineModel::fit(panel, egc::default_catalog(), criterion_from_name(args.criterion));

    egc::RunManifest manifest;
    manifest.command = "fit";
    manifest.inputs = {args.input};
    manifest.output_path = args.output;
    manifest.config.seed = resolve_seed(args.seed_given, args.seed);
    manifest.config.criterion = criterion_from_name(args.criterion);

    nlohmann::json j = egc::model_to_json(model);
    j["manifest"] = egc::manifest_to_json(manifest);
    emit(args.output, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granger causality in expectiles via M-vine copulas"};
    app.set_version_flag("--version", egc::tool_version);
    app.require_subcommand(1);

    TestArgs test_args;
    CLI::App* test = app.add_subcommand("test", "Run the causality test over a tau grid");
    test->add_option("input", test_args.input, "input CSV panel")->required();
    test->add_option("--effect", test_args.effect, "effect column (default: first column)");
    test->add_option("--cause", test_args.causes, "cause columns (default: all others)")
        ->delimiter(',');
    test->add_option("--tau", test_args.taus, "tau grid")->delimiter(',');
    test->add_option("-N,--n-predictions", test_args.n_predictions,
                     "predictive draws per evaluation step");
    test->add_option("--t0", test_args.t0, "first evaluated time index (default: T/2)");
    test->add_option("-B,--bootstrap", test_args.n_bootstrap, "bootstrap replicates");
    CLI::Option* test_seed = test->add_option("--seed", test_args.seed, "RNG seed");
    test->add_option("--threads", test_args.threads, "worker threads (default: all cores)");
    test->add_option("--date-column", test_args.date_column, "date column to drop");
    test->add_flag("--log-returns", test_args.log_returns, "transform prices to log-returns");
    test->add_flag("--pairwise", test_args.pairwise, "also run each pairwise test");
    test->add_flag("--null-statistics", test_args.null_statistics,
                   "embed bootstrap null statistics in the JSON result");
    test->add_option("--criterion", test_args.criterion, "copula selection criterion (aic|bic)");
    test->add_flag("--continuity-correction", test_args.continuity_correction,
                   "use (1+hits)/(1+B) for the p-value");
    test->add_flag("--reuse-marginals", test_args.reuse_marginals,
                   "share fitted marginals between null refits");
    test->add_option("-o,--output", test_args.output, "write JSON result to this path");
    test->callback([&] {
        test_args.seed_given = test_seed->count() > 0;
        run_test(test_args);
    });

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "Simulate a benchmark design to CSV");
    sim->add_option("--dgp", sim_args.dgp, "design tag (s1,s2,p1,p2,p3,p4)");
    sim->add_option("--T", sim_args.length, "series length");
    CLI::Option* sim_seed = sim->add_option("--seed", sim_args.seed, "RNG seed");
    sim->add_option("-o,--output", sim_args.output, "output CSV path (default: stdout)");
    sim->callback([&] {
        sim_args.seed_given = sim_seed->count() > 0;
        run_simulate(sim_args);
    });

    McArgs mc_args;
    CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo size/power study");
    mc->add_option("--dgp", mc_args.dgps, "design tags")->delimiter(',');
    mc->add_option("--tau", mc_args.taus, "tau grid")->delimiter(',');
    mc->add_option("--T", mc_args.lengths, "series lengths")->delimiter(',');
    mc->add_option("-S,--replications", mc_args.replications, "Monte-Carlo replications");
    mc->add_option("-B,--bootstrap", mc_args.n_bootstrap, "bootstrap replicates");
    mc->add_option("-N,--n-predictions", mc_args.n_predictions,
                   "predictive draws per evaluation step");
    mc->add_option("--alpha", mc_args.alpha, "nominal test level");
    CLI::Option* mc_seed = mc->add_option("--seed", mc_args.seed, "RNG seed");
    mc->add_option("--t0", mc_args.t0, "first evaluated time index (default: T/2)");
    mc->add_option("--threads", mc_args.threads, "worker threads (default: all cores)");
    mc->add_option("--tests", mc_args.tests, "test kinds: joint,pairwise,ftest")
        ->delimiter(',');
    mc->add_option("--criterion", mc_args.criterion, "copula selection criterion (aic|bic)");
    mc->add_option("-o,--output", mc_args.output, "write CSV report to this path");
    mc->callback([&] {
        mc_args.seed_given = mc_seed->count() > 0;
        run_mc(mc_args);
    });

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit the copula model and emit JSON");
    fit->add_option("input", fit_args.input, "input CSV panel")->required();
    fit->add_option("--effect", fit_args.effect, "effect column (default: first column)");
    fit->add_option("--cause", fit_args.causes, "cause columns (default: all others)")
        ->delimiter(',');
    fit->add_option("--date-column", fit_args.date_column, "date column to drop");
    fit->add_flag("--log-returns", fit_args.log_returns, "transform prices to log-returns");
    fit->add_option("--criterion", fit_args.criterion, "copula selection criterion (aic|bic)");
    CLI::Option* fit_seed = fit->add_option("--seed", fit_args.seed, "RNG seed");
    fit->add_option("-o,--output", fit_args.output, "output model JSON path (default: stdout)");
    fit->callback([&] {
        fit_args.seed_given = fit_seed->count() > 0;
        run_fit(fit_args);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const egc::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const egc::schema_error& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
