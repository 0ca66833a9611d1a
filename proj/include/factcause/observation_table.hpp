#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace factcause {

/// Rows of categorical observations. Each column keeps a dictionary of the
/// values it has seen (its domain, in first-seen order) and stores rows as
/// codes into that dictionary.
class ObservationTable {
public:
    explicit ObservationTable(std::vector<std::string> columns);

    /// Throws FormatError on arity mismatch or a negative/non-finite weight.
    void add_row(std::span<const std::string> values, double weight = 1.0);
    void add_row(std::initializer_list<std::string> values, double weight = 1.0);

    std::size_t num_rows() const { return weights_.size(); }
    std::size_t num_columns() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    /// Throws UnknownColumn.
    std::size_t column_index(std::string_view name) const;

    std::uint32_t code(std::size_t row, std::size_t column) const { return codes_[column][row]; }
    const std::string& value(std::size_t row, std::size_t column) const {
        return domains_[column][codes_[column][row]];
    }
    const std::vector<std::string>& domain(std::size_t column) const { return domains_[column]; }
    double weight(std::size_t row) const { return weights_[row]; }

    ObservationTable subset(std::span<const std::size_t> rows) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> domains_;
    std::vector<std::unordered_map<std::string, std::uint32_t>> lookup_;
    std::vector<std::vector<std::uint32_t>> codes_;
    std::vector<double> weights_;
};

/// Reads a delimited file with a header row. When `weight_column` names a
/// header field, that field becomes the row weight instead of a column.
ObservationTable read_table(std::istream& in, char delimiter = '\t',
                            const std::optional<std::string>& weight_column = std::nullopt);

void write_table(std::ostream& out, const ObservationTable& table, char delimiter = '\t');

} // namespace factcause
