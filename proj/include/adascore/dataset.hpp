#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adascore/errors.hpp"

namespace adascore {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dataset {
    Matrix values;  // n x d
    std::vector<std::string> column_names;
    bool standardized = false;

    int n() const { return static_cast<int>(values.rows()); }
    int d() const { return static_cast<int>(values.cols()); }

    Matrix columns(const std::vector<int>& idx) const {
        Matrix out(values.rows(), idx.size());
        for (size_t k = 0; k < idx.size(); ++k) out.col(k) = values.col(idx[k]);
        return out;
    }
};

inline double column_sd(const Vector& col) {
    double mean = col.mean();
    return std::sqrt((col.array() - mean).square().mean());
}

/// Scale normalization: divide each column by its empirical standard
/// deviation. Centering is off by default; discovery turns it on because the
/// kernels downstream are translation-sensitive.
inline Dataset standardize(const Dataset& data, bool center = false) {
    Dataset out = data;
    for (int c = 0; c < out.d(); ++c) {
        Vector col = out.values.col(c);
        double sd = column_sd(col);
        if (sd <= 0.0 || !std::isfinite(sd))
            throw DegenerateColumn("column " + std::to_string(c) + " is constant");
        double mean = center ? col.mean() : 0.0;
        out.values.col(c) = (col.array() - mean) / sd;
    }
    out.standardized = true;
    return out;
}

// ---- CSV: comma separator, mandatory header, '.' decimal ----

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_csv(const Dataset& data, std::ostream& os) {
    for (int c = 0; c < data.d(); ++c) {
        if (c) os << ',';
        os << data.column_names[c];
    }
    os << '\n';
    for (int r = 0; r < data.n(); ++r) {
        for (int c = 0; c < data.d(); ++c) {
            if (c) os << ',';
            os << format_double(data.values(r, c));
        }
        os << '\n';
    }
}

inline void write_csv_file(const Dataset& data, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(data, os);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
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

inline Dataset read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty input", 1, 1);
    Dataset data;
    data.column_names = split_csv_line(line);
    size_t d = data.column_names.size();
    std::vector<double> buf;
    long row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != d)
            throw ParseError("expected " + std::to_string(d) + " cells, got " +
                                 std::to_string(cells.size()),
                             row, static_cast<long>(cells.size()));
        for (size_t c = 0; c < d; ++c) {
            const std::string& cell = cells[c];
            double v = 0.0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw ParseError("non-numeric cell '" + cell + "'", row, static_cast<long>(c + 1));
            buf.push_back(v);
        }
    }
    long nrows = static_cast<long>(buf.size() / d);
    data.values.resize(nrows, d);
    for (long r = 0; r < nrows; ++r)
        for (size_t c = 0; c < d; ++c) data.values(r, c) = buf[r * d + c];
    return data;
}

inline Dataset read_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_csv(is);
}

}  // namespace adascore
