#include "factcause/observation_table.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "factcause/error.hpp"
#include "factcause/text.hpp"

namespace factcause {

ObservationTable::ObservationTable(std::vector<std::string> columns)
    : columns_(std::move(columns)),
      domains_(columns_.size()),
      lookup_(columns_.size()),
      codes_(columns_.size()) {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (columns_[i] == columns_[j]) throw Error(Errc::FormatError, "duplicate column '" + columns_[i] + "'");
}

void ObservationTable::add_row(std::span<const std::string> values, double weight) {
    if (values.size() != columns_.size())
        throw Error(Errc::FormatError, "row has " + std::to_string(values.size()) + " values, table has " +
                                           std::to_string(columns_.size()) + " columns");
    if (!std::isfinite(weight) || weight < 0.0) throw Error(Errc::FormatError, "row weight must be finite and >= 0");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        auto [it, inserted] = lookup_[c].emplace(values[c], static_cast<std::uint32_t>(domains_[c].size()));
        if (inserted) domains_[c].push_back(values[c]);
        codes_[c].push_back(it->second);
    }
    weights_.push_back(weight);
}

void ObservationTable::add_row(std::initializer_list<std::string> values, double weight) {
    add_row(std::span<const std::string>(values.begin(), values.size()), weight);
}

std::size_t ObservationTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name) return i;
    throw Error(Errc::UnknownColumn, "no column named '" + std::string(name) + "'");
}

ObservationTable ObservationTable::subset(std::span<const std::size_t> rows) const {
    ObservationTable out(columns_);
    std::vector<std::string> values(columns_.size());
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < columns_.size(); ++c) values[c] = value(r, c);
        out.add_row(values, weights_[r]);
    }
    return out;
}

ObservationTable read_table(std::istream& in, char delimiter, const std::optional<std::string>& weight_column) {
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::EmptyTable, "table has no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = text::split(line, delimiter);
    std::optional<std::size_t> weight_at;
    std::vector<std::string> columns;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (weight_column && header[i] == *weight_column)
            weight_at = i;
        else
            columns.push_back(header[i]);
    }
    if (weight_column && !weight_at) throw Error(Errc::UnknownColumn, "no weight column '" + *weight_column + "'");

    ObservationTable table(columns);
    std::vector<std::string> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = text::split(line, delimiter);
        if (fields.size() != header.size())
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                              std::to_string(header.size()) + " fields, got " +
                                              std::to_string(fields.size()));
        values.clear();
        double weight = 1.0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (weight_at && i == *weight_at) {
                std::istringstream ws(fields[i]);
                if (!(ws >> weight)) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad weight");
            } else {
                values.push_back(std::move(fields[i]));
            }
        }
        table.add_row(values, weight);
    }
    return table;
}

void write_table(std::ostream& out, const ObservationTable& table, char delimiter) {
    for (std::size_t c = 0; c < table.num_columns(); ++c) out << (c ? std::string(1, delimiter) : "") << table.columns()[c];
    out << '\n';
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
        for (std::size_t c = 0; c < table.num_columns(); ++c)
            out << (c ? std::string(1, delimiter) : "") << table.value(r, c);
        out << '\n';
    }
}

} // namespace factcause
