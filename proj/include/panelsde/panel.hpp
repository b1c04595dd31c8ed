#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "panelsde/linalg.hpp"

namespace panelsde {

// Missing values are carried as quiet NaN.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

struct Observation {
    double t_obs = 0.0;
    Vec values;  // length p, NaN where the cell was empty
};

struct PanelUnit {
    std::string id;
    std::vector<Observation> obs;  // strictly increasing t_obs
};

// Raw multi-unit panel: every unit shares the same p value columns, rows may
// be irregularly spaced and partially missing. Rows with every value missing
// are dropped at ingest; partially missing rows are retained.
struct Panel {
    std::vector<std::string> columns;
    std::vector<PanelUnit> units;

    int p() const { return static_cast<int>(columns.size()); }
    size_t n_obs() const;
    int column_index(const std::string& name) const;  // -1 if absent
};

struct CsvSchema {
    std::string unit_col = "unit";
    std::string time_col = "time";
};

// Reads a UTF-8 CSV with header `unit,time,<name1>,...`. Empty cells become
// missing markers; lines starting with '#' are skipped. Rows are grouped by
// unit and sorted by time.
// Throws DuplicateKeyError on repeated (unit, time), ParseError (with row
// number) on malformed numbers, SchemaError when a required column is absent.
Panel ingest_csv(const std::string& path, const CsvSchema& schema = {});

Panel parse_panel_csv(const std::string& text, const CsvSchema& schema = {});
std::string panel_to_csv(const Panel& panel, const CsvSchema& schema = {});

}  // namespace panelsde
