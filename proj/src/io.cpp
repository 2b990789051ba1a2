#include "wimf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "wimf/errors.hpp"

namespace wimf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path.string());
    return in;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "inf" || s == "+inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("not a number: '" + raw + "'");
    return v;
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& M) {
    auto out = open_out(path);
    for (Index r = 0; r < M.rows(); ++r) {
        for (Index c = 0; c < M.cols(); ++c) {
            if (c) out << ',';
            out << format_double(M(r, c));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("ragged CSV matrix: " + path.string());
        rows.push_back(std::move(row));
    }
    const Index nr = static_cast<Index>(rows.size());
    const Index nc = nr ? static_cast<Index>(rows.front().size()) : 0;
    MatrixXd M(nr, nc);
    for (Index r = 0; r < nr; ++r)
        for (Index c = 0; c < nc; ++c) M(r, c) = rows[r][c];
    return M;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
    auto out = open_out(path);
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

KeyValues read_key_values(const std::filesystem::path& path) {
    auto in = open_in(path);
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

std::string join_doubles(const VectorXd& v, char sep) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += format_double(v(i));
    }
    return s;
}

VectorXd split_doubles(const std::string& s, char sep) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, sep))
        if (!trim(cell).empty()) vals.push_back(parse_double(cell));
    return Eigen::Map<VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace wimf
