// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "brdfmeas/core.hpp"

namespace brdfmeas {

/// Fixed text form for report floats: 9 significant digits.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

/// Ordered key=value lines, one field per line.
using ReportFields = std::vector<std::pair<std::string, std::string>>;

inline std::string render_report(const ReportFields& fields) {
    std::string out;
    for (const auto& [k, v] : fields) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

inline void write_report(const ReportFields& fields, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << render_report(fields);
    if (!f) throw IoError("write failure: " + path);
}

inline std::map<std::string, std::string> parse_report(const std::string& text) {
    std::map<std::string, std::string> fields;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("malformed report line: " + line);
        fields[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return fields;
}

inline std::map<std::string, std::string> read_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open report: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_report(ss.str());
}

/// Comma-separated table with a header row; all cells preformatted.
inline void write_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows,
                      const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    for (size_t i = 0; i < header.size(); ++i)
        f << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i)
            f << row[i] << (i + 1 < row.size() ? "," : "\n");
    if (!f) throw IoError("write failure: " + path);
}

}  // namespace brdfmeas
