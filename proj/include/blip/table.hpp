#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blip/scalar.hpp"

#include "json.hpp"

namespace blip {

/// One result table: ordered metadata, a fixed column list, rows of typed
/// cells. Deterministic given the producing experiment's seed and
/// parameters, in both JSON and TSV form.
class ExperimentTable {
public:
    using Cell = std::variant<bool, std::int64_t, double, Rational, std::string>;

    void add_metadata(std::string key, std::string value) {
        metadata_.emplace_back(std::move(key), std::move(value));
    }

    void set_columns(std::vector<std::string> names) { columns_ = std::move(names); }

    void add_row(std::vector<Cell> cells) {
        if (cells.size() != columns_.size())
            throw PreconditionError("row width does not match the column count");
        rows_.push_back(std::move(cells));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    std::size_t row_count() const { return rows_.size(); }

    const Cell& at(std::size_t row, std::string_view column) const {
        for (std::size_t c = 0; c < columns_.size(); ++c)
            if (columns_[c] == column) return rows_.at(row)[c];
        throw PreconditionError("no column named '" + std::string(column) + "'");
    }

    static std::string cell_text(const Cell& cell) {
        return std::visit(
            [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
                else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
                else if constexpr (std::is_same_v<T, double>) return format_double(v);
                else if constexpr (std::is_same_v<T, Rational>) return format_rational(v);
                else return v;
            },
            cell);
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json meta = nlohmann::ordered_json::object();
        for (const auto& [k, v] : metadata_) meta[k] = v;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : rows_) {
            nlohmann::ordered_json r = nlohmann::ordered_json::array();
            for (const auto& cell : row)
                std::visit(
                    [&r](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, Rational>) r.push_back(format_rational(v));
                        else r.push_back(v);
                    },
                    cell);
            rows.push_back(std::move(r));
        }
        return {{"metadata", std::move(meta)}, {"columns", columns_}, {"rows", std::move(rows)}};
    }

    /// '#'-prefixed metadata lines, a header line, then tab-separated rows.
    std::string to_tsv() const {
        std::string out;
        for (const auto& [k, v] : metadata_) out += "# " + k + "\t" + v + "\n";
        for (std::size_t c = 0; c < columns_.size(); ++c)
            out += (c ? "\t" : "") + columns_[c];
        out += "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out += (c ? "\t" : "") + cell_text(row[c]);
            out += "\n";
        }
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> metadata_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

} // namespace blip
