#pragma once

// File formats: CSV panels in and out, versioned JSON documents for fitted
// models ("eg-model/1") and test results ("eg-result/1"), and the run
// manifest embedded in every emitted file.  No timestamps anywhere, so equal
// inputs give byte-identical outputs.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "egc/bicop.hpp"
#include "egc/gc.hpp"
#include "egc/marginals.hpp"
#include "egc/mvine.hpp"
#include "egc/panel.hpp"

namespace egc {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr const char* model_schema = "eg-model/1";
inline constexpr const char* result_schema = "eg-result/1";

/// A JSON document does not match the expected schema; the message carries
/// the path of the offending node.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvOptions {
    std::string date_column;  // dropped on read when non-empty
};

namespace detail_io {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

inline std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return s.substr(b, e - b);
}

inline double parse_cell(const std::string& raw, std::size_t line_no,
                         const std::string& column) {
    const std::string s = trimmed(raw);
    double value = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || s.empty())
        throw std::domain_error("non-numeric value '" + s + "' at line " +
                                std::to_string(line_no) + ", column '" + column + "'");
    return value;
}

}  // namespace detail_io

/// Lines starting with '#' are comments (manifests ride along in them).
inline SeriesPanel read_csv(std::istream& in, const CsvOptions& options = {}) {
    std::string line;
    std::size_t line_no = 0;
    do {
        if (!std::getline(in, line)) throw std::invalid_argument("read_csv: empty input");
        ++line_no;
    } while (!line.empty() && line[0] == '#');
    std::vector<std::string> header = detail_io::split_line(line);
    for (std::string& name : header) name = detail_io::trimmed(name);

    std::size_t drop = header.size();
    if (!options.date_column.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == options.date_column) drop = i;
        if (drop == header.size())
            throw std::invalid_argument("read_csv: date column '" + options.date_column +
                                        "' not found");
    }

    SeriesPanel panel;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i == drop) continue;
        if (header[i].empty())
            throw std::invalid_argument("read_csv: empty column name in header");
        panel.names.push_back(header[i]);
    }
    if (panel.names.empty()) throw std::invalid_argument("read_csv: no data columns");
    panel.columns.assign(panel.names.size(), {});

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        const std::vector<std::string> fields = detail_io::split_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("read_csv: line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        std::size_t out = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == drop) continue;
            panel.columns[out].push_back(
                detail_io::parse_cell(fields[i], line_no, panel.names[out]));
            ++out;
        }
    }
    if (panel.columns[0].empty()) throw std::invalid_argument("read_csv: no data rows");
    return panel;
}

inline SeriesPanel read_csv_file(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    return read_csv(in, options);
}

inline std::string panel_to_csv(const SeriesPanel& panel) {
    panel.validate();
    std::string out;
    for (std::size_t i = 0; i < panel.names.size(); ++i) {
        if (i) out += ',';
        out += panel.names[i];
    }
    out += '\n';
    char buf[40];
    for (std::size_t t = 0; t < panel.length(); ++t) {
        for (std::size_t i = 0; i < panel.columns.size(); ++i) {
            if (i) out += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", panel.columns[i][t]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << content;
    if (!out) throw std::invalid_argument("failed writing output file: " + path);
}

/// Price columns to percent log-returns; each output column must keep some
/// variation for the downstream rank transforms to make sense.
inline SeriesPanel apply_log_returns(const SeriesPanel& panel) {
    panel.validate();
    SeriesPanel out;
    out.names = panel.names;
    for (std::size_t i = 0; i < panel.columns.size(); ++i) {
        std::vector<double> r = log_returns(panel.columns[i]);
        bool varies = false;
        for (double v : r) varies = varies || v != r.front();
        if (!varies)
            throw std::domain_error("degenerate column after transform: '" + panel.names[i] +
                                    "'");
        out.columns.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

namespace detail_io {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw schema_error("missing key at " + path + "/" + key);
    return j.at(key);
}

inline nlohmann::json edge_to_json(const Bicop& edge) {
    return {{"family", family_name(edge.family())},
            {"rotation", edge.rotation()},
            {"parameters", edge.parameters()}};
}

inline Bicop edge_from_json(const nlohmann::json& j, const std::string& path) {
    const nlohmann::json& family = require(j, "family", path);
    const nlohmann::json& rotation = require(j, "rotation", path);
    const nlohmann::json& parameters = require(j, "parameters", path);
    if (!family.is_string()) throw schema_error("expected string at " + path + "/family");
    if (!rotation.is_number_integer())
        throw schema_error("expected integer at " + path + "/rotation");
    if (!parameters.is_array())
        throw schema_error("expected array at " + path + "/parameters");
    CopulaSpec spec;
    try {
        spec.family = family_from_name(family.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw schema_error(std::string(e.what()) + " at " + path + "/family");
    }
    spec.rotation = rotation.get<int>();
    std::vector<double> params;
    for (const auto& p : parameters) {
        if (!p.is_number()) throw schema_error("expected number at " + path + "/parameters");
        params.push_back(p.get<double>());
    }
    try {
        return Bicop::make(spec, params);
    } catch (const std::exception& e) {
        throw schema_error(std::string(e.what()) + " at " + path);
    }
}

}  // namespace detail_io

inline nlohmann::json model_to_json(const MVineModel& model) {
    if (!model.fitted()) throw std::logic_error("model_to_json: model is not fitted");
    nlohmann::json j;
    j["schema"] = model_schema;
    j["markov_order"] = model.markov_order();
    j["names"] = model.names();
    nlohmann::json marginals = nlohmann::json::array();
    for (std::size_t i = 0; i < model.dimension(); ++i)
        marginals.push_back({{"knots", model.marginal(i).sorted_values()}});
    j["marginals"] = std::move(marginals);
    nlohmann::json cross = nlohmann::json::array();
    for (std::size_t level = 1; level <= model.n_cross_trees(); ++level) {
        nlohmann::json tree = nlohmann::json::array();
        for (std::size_t e = 0; e < model.n_cross_edges(level); ++e)
            tree.push_back(detail_io::edge_to_json(model.cross_edge(level, e)));
        cross.push_back(std::move(tree));
    }
    j["cross_trees"] = std::move(cross);
    nlohmann::json time = nlohmann::json::array();
    for (std::size_t level = 1; level <= model.n_time_edges(); ++level)
        time.push_back(detail_io::edge_to_json(model.time_edge(level)));
    j["time_edges"] = std::move(time);
    return j;
}

inline MVineModel model_from_json(const nlohmann::json& j) {
    using detail_io::require;
    const nlohmann::json& schema = require(j, "schema", "");
    if (!schema.is_string() || schema.get<std::string>() != model_schema)
        throw schema_error("unsupported schema at /schema");
    const nlohmann::json& order = require(j, "markov_order", "");
    if (!order.is_number_integer() || order.get<int>() != 1)
        throw schema_error("unsupported markov_order at /markov_order");

    const nlohmann::json& names_j = require(j, "names", "");
    if (!names_j.is_array() || names_j.empty())
        throw schema_error("expected non-empty array at /names");
    std::vector<std::string> names;
    for (const auto& n : names_j) {
        if (!n.is_string()) throw schema_error("expected string at /names");
        names.push_back(n.get<std::string>());
    }

    const nlohmann::json& marginals_j = require(j, "marginals", "");
    if (!marginals_j.is_array() || marginals_j.size() != names.size())
        throw schema_error("expected one entry per name at /marginals");
    std::vector<EmpiricalMarginal> marginals;
    for (std::size_t i = 0; i < marginals_j.size(); ++i) {
        const std::string path = "/marginals/" + std::to_string(i);
        const nlohmann::json& knots = require(marginals_j[i], "knots", path);
        if (!knots.is_array()) throw schema_error("expected array at " + path + "/knots");
        std::vector<double> values;
        for (const auto& v : knots) {
            if (!v.is_number())
                throw schema_error("expected number at " + path + "/knots");
            values.push_back(v.get<double>());
        }
        try {
            marginals.push_back(EmpiricalMarginal::from_sorted(std::move(values)));
        } catch (const std::exception& e) {
            throw schema_error(std::string(e.what()) + " at " + path + "/knots");
        }
    }

    const nlohmann::json& cross_j = require(j, "cross_trees", "");
    if (!cross_j.is_array()) throw schema_error("expected array at /cross_trees");
    std::vector<std::vector<Bicop>> cross;
    for (std::size_t level = 0; level < cross_j.size(); ++level) {
        const std::string path = "/cross_trees/" + std::to_string(level);
        if (!cross_j[level].is_array()) throw schema_error("expected array at " + path);
        std::vector<Bicop> tree;
        for (std::size_t e = 0; e < cross_j[level].size(); ++e)
            tree.push_back(detail_io::edge_from_json(cross_j[level][e],
                                                     path + "/" + std::to_string(e)));
        cross.push_back(std::move(tree));
    }

    const nlohmann::json& time_j = require(j, "time_edges", "");
    if (!time_j.is_array()) throw schema_error("expected array at /time_edges");
    std::vector<Bicop> time;
    for (std::size_t e = 0; e < time_j.size(); ++e)
        time.push_back(detail_io::edge_from_json(time_j[e],
                                                 "/time_edges/" + std::to_string(e)));

    try {
        return MVineModel::from_parts(std::move(names), std::move(marginals),
                                      std::move(cross), std::move(time));
    } catch (const std::exception& e) {
        throw schema_error(std::string("inconsistent model document: ") + e.what());
    }
}

inline void save_model(const std::string& path, const MVineModel& model) {
    write_text_file(path, model_to_json(model).dump(2) + "\n");
}

inline MVineModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw schema_error(std::string("invalid JSON: ") + e.what());
    }
    return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Results and manifests
// ---------------------------------------------------------------------------

inline const char* criterion_name(SelectionCriterion c) {
    return c == SelectionCriterion::aic ? "aic" : "bic";
}

inline nlohmann::json config_to_json(const TestConfig& config) {
    nlohmann::json catalog = nlohmann::json::array();
    for (const CopulaSpec& spec : config.catalog)
        catalog.push_back({{"family", family_name(spec.family)},
                           {"rotation", spec.rotation}});
    return {{"n_predictions", config.n_predictions},
            {"eval_start", config.eval_start},
            {"n_bootstrap", config.n_bootstrap},
            {"seed", config.seed},
            {"threads", config.threads},
            {"criterion", criterion_name(config.criterion)},
            {"continuity_correction", config.continuity_correction},
            {"reuse_marginals", config.reuse_marginals},
            {"catalog", std::move(catalog)}};
}

struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string output_path;
    std::vector<double> tau_grid;
    TestConfig config;
};

inline nlohmann::json manifest_to_json(const RunManifest& manifest) {
    return {{"command", manifest.command},
            {"inputs", manifest.inputs},
            {"output", manifest.output_path},
            {"tau_grid", manifest.tau_grid},
            {"tool_version", tool_version},
            {"seed", manifest.config.seed},
            {"config", config_to_json(manifest.config)}};
}

/// One test outcome as JSON; lengths resolve T0 against the tested panel.
inline nlohmann::json result_to_json(const GcTestResult& result, const TestConfig& config,
                                     std::size_t length, bool include_null = false) {
    nlohmann::json j{{"statistic", result.statistic},
                     {"p_value", result.p_value},
                     {"restricted_loss", result.restricted_loss},
                     {"unrestricted_loss", result.unrestricted_loss},
                     {"tau", config.tau},
                     {"N", config.n_predictions},
                     {"T0", config.resolve_eval_start(length)},
                     {"B", config.n_bootstrap},
                     {"seed", config.seed}};
    if (include_null) j["null_statistics"] = result.null_statistics;
    return j;
}

}  // namespace egc
