#pragma once

// Small CSV and number-formatting helpers shared by the risk module, the
// simulation writers, and the CLI. Fields are comma-separated without
// quoting (no identifier in this domain carries a comma); numeric output
// uses %.17g so every double round-trips exactly.

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sspsec/model.hpp"

namespace sspsec::csv {

// Shortest decimal form that parses back to the identical double.
inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == sep) {
        fields.emplace_back();
    }
    return fields;
}

inline double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t.empty()) {
        throw std::invalid_argument(what + ": empty numeric field");
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        throw std::invalid_argument(what + ": cannot parse number '" + t + "'");
    }
    return v;
}

// Accepts plain decimals and simple fractions like "1/3".
inline double parse_number_or_fraction(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    const std::size_t slash = t.find('/');
    if (slash == std::string::npos) {
        return parse_double(t, what);
    }
    const double num = parse_double(t.substr(0, slash), what);
    const double den = parse_double(t.substr(slash + 1), what);
    if (den == 0.0) {
        throw std::invalid_argument(what + ": zero denominator in '" + t + "'");
    }
    return num / den;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

// Allocation matrix file layout: header `validator,<ssp ids...>`, one row
// per validator with its id in the first column.
struct AllocationFile {
    std::vector<std::string> validator_ids;
    std::vector<std::string> ssp_ids;
    AllocationMatrix omega{1, 1};
};

inline AllocationFile read_allocation(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) {
        throw std::invalid_argument(path + ": need a header and at least one validator row");
    }
    const auto header = split(lines[0]);
    if (header.size() < 2) {
        throw std::invalid_argument(path + ":1: header needs at least one SSP column");
    }
    AllocationFile file;
    file.ssp_ids.assign(header.begin() + 1, header.end());

    std::vector<std::vector<double>> rows;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (trim(lines[ln]).empty()) {
            continue;
        }
        const auto fields = split(lines[ln]);
        if (fields.size() != header.size()) {
            throw std::invalid_argument(path + ":" + std::to_string(ln + 1) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        }
        file.validator_ids.push_back(fields[0]);
        std::vector<double> row;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const double v = parse_double(fields[c], path + ":" + std::to_string(ln + 1));
            if (v < 0.0) {
                throw std::invalid_argument(path + ":" + std::to_string(ln + 1) +
                                            ": negative stake entry");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::invalid_argument(path + ": no validator rows");
    }
    file.omega = AllocationMatrix(rows);
    return file;
}

inline std::string format_allocation(const AllocationMatrix& omega,
                                     const std::vector<std::string>& validator_ids = {},
                                     const std::vector<std::string>& ssp_ids = {}) {
    std::string out = "validator";
    for (std::size_t j = 0; j < omega.ssps(); ++j) {
        out += ",";
        out += j < ssp_ids.size() ? ssp_ids[j] : "s" + std::to_string(j);
    }
    out += "\n";
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        out += i < validator_ids.size() ? validator_ids[i] : "v" + std::to_string(i);
        for (std::size_t j = 0; j < omega.ssps(); ++j) {
            out += ",";
            out += fmt(omega(i, j));
        }
        out += "\n";
    }
    return out;
}

// Stake table file layout: header `validator,stake`.
inline StakeTable read_stakes(const std::string& path, std::vector<std::string>* ids = nullptr) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) {
        throw std::invalid_argument(path + ": need a header and at least one stake row");
    }
    std::vector<double> stakes;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (trim(lines[ln]).empty()) {
            continue;
        }
        const auto fields = split(lines[ln]);
        if (fields.size() != 2) {
            throw std::invalid_argument(path + ":" + std::to_string(ln + 1) +
                                        ": expected `validator,stake`");
        }
        if (ids) {
            ids->push_back(fields[0]);
        }
        stakes.push_back(parse_double(fields[1], path + ":" + std::to_string(ln + 1)));
    }
    return StakeTable(stakes);
}

}  // namespace sspsec::csv
