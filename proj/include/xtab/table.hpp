#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xtab {

enum class ColumnKind { numeric, binary, categorical };

const char* column_kind_name(ColumnKind kind);
ColumnKind column_kind_from_name(const std::string& name);

using Schema = std::vector<std::pair<std::string, ColumnKind>>;

// Named-column numeric matrix with a missing-value mask and an optional binary
// outcome. Values are row-major; missing cells hold NaN and the mask is the
// single source of truth for missingness. Categorical columns store an index
// into their per-column label list.
struct FeatureTable {
    std::vector<std::string> column_names;
    std::vector<ColumnKind> column_kinds;
    std::vector<std::vector<std::string>> categories; // per column, empty unless categorical
    std::vector<double> values;                       // rows x cols, row-major
    std::vector<std::uint8_t> missing_mask;           // same shape as values
    std::optional<std::vector<std::uint8_t>> outcome; // aligned to rows
    std::size_t rows = 0;

    std::size_t cols() const { return column_names.size(); }

    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    bool is_missing(std::size_t r, std::size_t c) const { return missing_mask[r * cols() + c] != 0; }
    void set_missing(std::size_t r, std::size_t c) {
        missing_mask[r * cols() + c] = 1;
        values[r * cols() + c] = std::numeric_limits<double>::quiet_NaN();
    }

    // -1 if not present.
    int column_index(const std::string& name) const;
    // Throws DataError if not present.
    std::size_t require_column(const std::string& name) const;

    std::vector<double> column(std::size_t c) const;
    std::size_t missing_count(std::size_t c) const;

    // New empty table with the given shape; all cells missing until written.
    static FeatureTable with_shape(std::vector<std::string> names,
                                   std::vector<ColumnKind> kinds, std::size_t rows);

    // Structural copy restricted to the listed column indices (order kept as given).
    FeatureTable select_columns(const std::vector<std::size_t>& keep) const;
    // Structural copy restricted to the listed row indices.
    FeatureTable select_rows(const std::vector<std::size_t>& keep) const;

    // Checks the documented invariants (unique names, binary domains, shapes).
    void validate() const;
};

// Schema file: one `name,kind` line per column.
Schema load_schema(const std::string& path);
void save_schema(const Schema& schema, const std::string& path);

// CSV with a header row; empty cell = missing. Cells of numeric/binary columns
// must parse as numbers; categorical cells are free text collected into the
// column's label list (sorted ascending).
FeatureTable load_table(const std::string& path, const Schema& schema);
void save_table(const FeatureTable& table, const std::string& path,
                const std::string& outcome_name = "");

} // namespace xtab
