#pragma once

// A panel of aligned time series: one effect column followed by zero or more
// candidate cause columns.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace egc {

struct SeriesPanel {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t n_series() const { return columns.size(); }
    std::size_t length() const { return columns.empty() ? 0 : columns.front().size(); }

    void validate() const {
        if (columns.empty()) throw std::invalid_argument("panel: no columns");
        if (names.size() != columns.size())
            throw std::invalid_argument("panel: name/column count mismatch");
        for (const auto& c : columns)
            if (c.size() != columns.front().size())
                throw std::invalid_argument("panel: ragged columns");
    }

    /// Panel restricted to the given column indices, in order.
    SeriesPanel select(const std::vector<std::size_t>& idx) const {
        SeriesPanel p;
        for (std::size_t i : idx) {
            if (i >= columns.size()) throw std::out_of_range("panel: column index");
            p.names.push_back(names[i]);
            p.columns.push_back(columns[i]);
        }
        return p;
    }
};

} // namespace egc
