#pragma once

// File I/O for dense matrices and vectors.
//
// Primary format is MatrixMarket "array" (dense, column-major values, one
// per line). A minimal CSV reader/writer is provided as a fallback for
// spreadsheet-friendly exchange. All floats are written with %.17g so a
// write/read round trip reproduces the exact double.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "antilop/linalg.hpp"

namespace antilop {

/// Shortest decimal string that round-trips the double.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline double parse_double(const std::string& tok, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw std::runtime_error(what + ": bad numeric token '" + tok + "'");
    }
    return v;
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MatrixMarket array format.

inline void write_matrix_market(std::ostream& os, const DenseMatrix& m) {
    os << "%%MatrixMarket matrix array real general\n";
    os << m.rows() << " " << m.cols() << "\n";
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            os << fmt_g17(m(i, j)) << "\n";
        }
    }
}

inline void write_matrix_market(std::ostream& os, const Vector& v) {
    os << "%%MatrixMarket matrix array real general\n";
    os << v.size() << " " << 1 << "\n";
    for (std::size_t i = 0; i < v.size(); ++i) os << fmt_g17(v[i]) << "\n";
}

inline DenseMatrix read_matrix_market(std::istream& is) {
    std::string banner;
    if (!std::getline(is, banner)) throw std::runtime_error("matrix market: empty stream");
    std::istringstream hs(detail::lower(banner));
    std::string tag, object, format, field, symmetry;
    hs >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%matrixmarket" || object != "matrix") {
        throw std::runtime_error("matrix market: missing %%MatrixMarket banner");
    }
    if (format != "array" || field != "real" || symmetry != "general") {
        throw std::runtime_error("matrix market: only 'array real general' is supported");
    }
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        break;
    }
    std::istringstream ss(line);
    long long rows = 0, cols = 0;
    if (!(ss >> rows >> cols) || rows < 1 || cols < 1) {
        throw std::runtime_error("matrix market: bad size line");
    }
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    std::string tok;
    while (data.size() < static_cast<std::size_t>(rows * cols) && (is >> tok)) {
        data.push_back(detail::parse_double(tok, "matrix market"));
    }
    if (data.size() != static_cast<std::size_t>(rows * cols)) {
        throw std::runtime_error("matrix market: fewer values than rows*cols");
    }
    return DenseMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                       std::move(data));
}

inline Vector read_matrix_market_vector(std::istream& is) {
    DenseMatrix m = read_matrix_market(is);
    if (m.cols() != 1) throw std::runtime_error("matrix market: expected a single-column vector");
    return Vector(m.data());
}

// ---------------------------------------------------------------------------
// CSV fallback: one row per line, comma separated, no quoting.

inline void write_csv(std::ostream& os, const DenseMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ",";
            os << fmt_g17(m(i, j));
        }
        os << "\n";
    }
}

inline DenseMatrix read_csv_matrix(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            row.push_back(detail::parse_double(tok, "csv"));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error("csv: ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("csv: no data");
    const std::size_t r = rows.size();
    const std::size_t c = rows.front().size();
    DenseMatrix m(r, c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

// ---------------------------------------------------------------------------
// Path-level helpers. Format is picked by extension: ".csv" uses the CSV
// fallback, anything else is treated as MatrixMarket.

namespace detail {

inline bool is_csv(const std::filesystem::path& p) {
    return lower(p.extension().string()) == ".csv";
}

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("cannot open for reading: " + p.string());
    return f;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot open for writing: " + p.string());
    return f;
}

}  // namespace detail

inline void save_matrix(const std::filesystem::path& p, const DenseMatrix& m) {
    auto f = detail::open_out(p);
    if (detail::is_csv(p)) {
        write_csv(f, m);
    } else {
        write_matrix_market(f, m);
    }
}

inline void save_vector(const std::filesystem::path& p, const Vector& v) {
    auto f = detail::open_out(p);
    if (detail::is_csv(p)) {
        DenseMatrix m(v.size(), 1, std::vector<double>(v.data()));
        write_csv(f, m);
    } else {
        write_matrix_market(f, v);
    }
}

inline DenseMatrix load_matrix(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return detail::is_csv(p) ? read_csv_matrix(f) : read_matrix_market(f);
}

inline Vector load_vector(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    DenseMatrix m = detail::is_csv(p) ? read_csv_matrix(f) : read_matrix_market(f);
    if (m.cols() != 1) throw std::runtime_error("expected a single-column vector: " + p.string());
    return Vector(m.data());
}

}  // namespace antilop
