#include "panelsde/panel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "panelsde/errors.hpp"

namespace panelsde {

size_t Panel::n_obs() const {
    size_t n = 0;
    for (const auto& u : units) n += u.obs.size();
    return n;
}

int Panel::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& s, size_t row, const std::string& col) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("row " + std::to_string(row) + ": cannot parse '" + s +
                         "' as a number in column '" + col + "'");
    return v;
}

}  // namespace

Panel parse_panel_csv(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    std::string line;
    size_t row = 0;

    // Header (first non-comment line).
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw SchemaError("empty file: no header row");

    int unit_idx = -1, time_idx = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.unit_col) unit_idx = static_cast<int>(i);
        if (header[i] == schema.time_col) time_idx = static_cast<int>(i);
    }
    if (unit_idx < 0) throw SchemaError("header is missing column '" + schema.unit_col + "'");
    if (time_idx < 0) throw SchemaError("header is missing column '" + schema.time_col + "'");

    Panel panel;
    std::vector<int> value_idx;
    for (size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == unit_idx || static_cast<int>(i) == time_idx) continue;
        panel.columns.push_back(header[i]);
        value_idx.push_back(static_cast<int>(i));
    }
    if (panel.columns.empty()) throw SchemaError("header has no value columns");

    std::map<std::string, std::map<double, Vec>> by_unit;
    std::vector<std::string> unit_order;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        const std::string& uid = fields[unit_idx];
        const double t = parse_number(fields[time_idx], row, schema.time_col);
        Vec values(panel.columns.size(), missing_value());
        bool any = false;
        for (size_t j = 0; j < value_idx.size(); ++j) {
            const std::string& cell = fields[value_idx[j]];
            if (cell.empty()) continue;
            values[j] = parse_number(cell, row, panel.columns[j]);
            any = true;
        }
        if (!any) continue;  // all-missing rows carry no information

        auto [it, inserted] = by_unit.try_emplace(uid);
        if (inserted) unit_order.push_back(uid);
        if (!it->second.emplace(t, std::move(values)).second)
            throw DuplicateKeyError("duplicate (unit, time) = ('" + uid + "', " +
                                    std::to_string(t) + ") at row " + std::to_string(row));
    }

    for (const auto& uid : unit_order) {
        PanelUnit u;
        u.id = uid;
        for (auto& [t, v] : by_unit[uid]) u.obs.push_back({t, v});
        panel.units.push_back(std::move(u));
    }
    return panel;
}

Panel ingest_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_panel_csv(ss.str(), schema);
}

std::string panel_to_csv(const Panel& panel, const CsvSchema& schema) {
    std::ostringstream out;
    out << schema.unit_col << ',' << schema.time_col;
    for (const auto& c : panel.columns) out << ',' << c;
    out << '\n';
    out.precision(17);
    for (const auto& u : panel.units) {
        for (const auto& o : u.obs) {
            out << u.id << ',' << o.t_obs;
            for (double v : o.values) {
                out << ',';
                if (!is_missing(v)) out << v;
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace panelsde
