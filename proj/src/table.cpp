#include "xtab/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xtab/errors.hpp"

namespace xtab {

const char* column_kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::binary: return "binary";
        case ColumnKind::categorical: return "categorical";
    }
    return "?";
}

ColumnKind column_kind_from_name(const std::string& name) {
    if (name == "numeric") return ColumnKind::numeric;
    if (name == "binary") return ColumnKind::binary;
    if (name == "categorical") return ColumnKind::categorical;
    throw DataError("unknown column kind '" + name + "'");
}

int FeatureTable::column_index(const std::string& name) const {
    for (std::size_t c = 0; c < column_names.size(); ++c)
        if (column_names[c] == name) return static_cast<int>(c);
    return -1;
}

std::size_t FeatureTable::require_column(const std::string& name) const {
    int c = column_index(name);
    if (c < 0) throw DataError("column not found: '" + name + "'");
    return static_cast<std::size_t>(c);
}

std::vector<double> FeatureTable::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
}

std::size_t FeatureTable::missing_count(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows; ++r)
        if (is_missing(r, c)) ++n;
    return n;
}

FeatureTable FeatureTable::with_shape(std::vector<std::string> names,
                                      std::vector<ColumnKind> kinds, std::size_t rows) {
    FeatureTable t;
    t.column_names = std::move(names);
    t.column_kinds = std::move(kinds);
    t.categories.resize(t.column_names.size());
    t.rows = rows;
    t.values.assign(rows * t.column_names.size(), std::numeric_limits<double>::quiet_NaN());
    t.missing_mask.assign(rows * t.column_names.size(), 1);
    return t;
}

FeatureTable FeatureTable::select_columns(const std::vector<std::size_t>& keep) const {
    FeatureTable out;
    out.rows = rows;
    for (std::size_t c : keep) {
        out.column_names.push_back(column_names[c]);
        out.column_kinds.push_back(column_kinds[c]);
        out.categories.push_back(categories[c]);
    }
    out.values.resize(rows * keep.size());
    out.missing_mask.resize(rows * keep.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < keep.size(); ++k) {
            out.values[r * keep.size() + k] = at(r, keep[k]);
            out.missing_mask[r * keep.size() + k] = missing_mask[r * cols() + keep[k]];
        }
    out.outcome = outcome;
    return out;
}

FeatureTable FeatureTable::select_rows(const std::vector<std::size_t>& keep) const {
    FeatureTable out;
    out.column_names = column_names;
    out.column_kinds = column_kinds;
    out.categories = categories;
    out.rows = keep.size();
    out.values.resize(keep.size() * cols());
    out.missing_mask.resize(keep.size() * cols());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t c = 0; c < cols(); ++c) {
            out.values[i * cols() + c] = at(keep[i], c);
            out.missing_mask[i * cols() + c] = missing_mask[keep[i] * cols() + c];
        }
    if (outcome) {
        std::vector<std::uint8_t> o(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) o[i] = (*outcome)[keep[i]];
        out.outcome = std::move(o);
    }
    return out;
}

void FeatureTable::validate() const {
    if (values.size() != rows * cols() || missing_mask.size() != values.size())
        throw DataError("table shape mismatch between values and missing mask");
    std::set<std::string> seen;
    for (const auto& n : column_names)
        if (!seen.insert(n).second) throw DataError("duplicate column '" + n + "'");
    for (std::size_t c = 0; c < cols(); ++c) {
        if (column_kinds[c] != ColumnKind::binary) continue;
        for (std::size_t r = 0; r < rows; ++r) {
            if (is_missing(r, c)) continue;
            double v = at(r, c);
            if (v != 0.0 && v != 1.0)
                throw DataError("binary column '" + column_names[c] + "' holds non-{0,1} value at row " +
                                std::to_string(r));
        }
    }
    if (outcome && outcome->size() != rows)
        throw DataError("outcome length does not match row count");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file '" + path + "'");
    Schema schema;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto parts = split_csv_line(line);
        if (parts.size() != 2)
            throw DataError("schema line must be 'name,kind': '" + line + "'");
        schema.emplace_back(parts[0], column_kind_from_name(parts[1]));
    }
    return schema;
}

void save_schema(const Schema& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema file '" + path + "'");
    for (const auto& [name, kind] : schema) out << name << "," << column_kind_name(kind) << "\n";
}

FeatureTable load_table(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
    auto header = split_csv_line(line);

    std::map<std::string, ColumnKind> kind_of;
    for (const auto& [name, kind] : schema) {
        if (!kind_of.emplace(name, kind).second)
            throw DataError("duplicate column '" + name + "' in schema");
    }
    std::set<std::string> header_seen;
    for (const auto& h : header) {
        if (!header_seen.insert(h).second) throw DataError("duplicate column '" + h + "' in header");
        if (!kind_of.count(h)) throw DataError("header column '" + h + "' not declared in schema");
    }

    std::vector<ColumnKind> kinds;
    kinds.reserve(header.size());
    for (const auto& h : header) kinds.push_back(kind_of.at(h));

    // Raw text cells first; categorical label ids are assigned after the full
    // label set is known so ids are independent of row order.
    std::vector<std::vector<std::string>> raw_cols(header.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == EOF) break;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) raw_cols[c].push_back(cells[c]);
        ++row;
    }

    FeatureTable t = FeatureTable::with_shape(header, kinds, row);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (kinds[c] == ColumnKind::categorical) {
            std::set<std::string> labels;
            for (const auto& cell : raw_cols[c])
                if (!cell.empty()) labels.insert(cell);
            t.categories[c].assign(labels.begin(), labels.end());
        }
        for (std::size_t r = 0; r < row; ++r) {
            const std::string& cell = raw_cols[c][r];
            if (cell.empty()) continue; // stays missing
            double v;
            if (kinds[c] == ColumnKind::categorical) {
                auto& labels = t.categories[c];
                v = static_cast<double>(
                    std::lower_bound(labels.begin(), labels.end(), cell) - labels.begin());
            } else if (!parse_double(cell, v)) {
                throw DataError("non-numeric cell '" + cell + "' at row " + std::to_string(r) +
                                ", column '" + header[c] + "'");
            }
            t.at(r, c) = v;
            t.missing_mask[r * t.cols() + c] = 0;
        }
    }
    t.validate();
    return t;
}

void save_table(const FeatureTable& table, const std::string& path, const std::string& outcome_name) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write data file '" + path + "'");
    const bool with_outcome = table.outcome.has_value() && !outcome_name.empty();
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (c) out << ",";
        out << table.column_names[c];
    }
    if (with_outcome) out << "," << outcome_name;
    out << "\n";
    for (std::size_t r = 0; r < table.rows; ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            if (c) out << ",";
            if (table.is_missing(r, c)) continue;
            double v = table.at(r, c);
            if (table.column_kinds[c] == ColumnKind::categorical) {
                out << table.categories[c][static_cast<std::size_t>(v)];
            } else {
                out << format_double(v);
            }
        }
        if (with_outcome) out << "," << static_cast<int>((*table.outcome)[r]);
        out << "\n";
    }
}

} // namespace xtab
