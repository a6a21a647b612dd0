#pragma once

// Dense matrix files: CSV with "re", "re+imi", "re-imi" cells, and
// MatrixMarket array format (real or complex field, column-major).

#include "hustab/numcore.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hustab
{

enum class MatrixFormat
{
    Csv,
    MatrixMarketDense,
};

namespace io_detail
{

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

inline double parse_real(std::string_view s, std::string_view context)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
        throw Error(ErrorKind::ParseError, "bad number '" + std::string(s) + "' in " + std::string(context));
    return value;
}

inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace io_detail

/// Parses "a", "a+bi", "a-bi", "bi" (no spaces inside the number).
inline Complex parse_complex(std::string_view cell)
{
    using io_detail::parse_real;
    std::string_view s = io_detail::trim(cell);
    if (s.empty())
        throw Error(ErrorKind::ParseError, "empty matrix entry");
    if (s.back() != 'i')
        return {parse_real(s, cell), 0.0};
    s.remove_suffix(1);
    // Split at the last sign that is not an exponent sign.
    std::size_t split = std::string_view::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string_view real_part = split == std::string_view::npos ? std::string_view{} : s.substr(0, split);
    std::string_view imag_part = split == std::string_view::npos ? s : s.substr(split);
    double imag = 0.0;
    if (imag_part == "+" || imag_part.empty())
        imag = 1.0;
    else if (imag_part == "-")
        imag = -1.0;
    else
        imag = parse_real(imag_part, cell);
    return {real_part.empty() ? 0.0 : parse_real(real_part, cell), imag};
}

inline std::string format_complex(Complex z)
{
    std::string out = io_detail::format_real(z.real());
    if (z.imag() != 0.0 || std::signbit(z.imag())) {
        const std::string imag = io_detail::format_real(z.imag());
        if (imag.front() != '-')
            out += '+';
        out += imag;
        out += 'i';
    }
    return out;
}

inline Mat read_csv(std::istream& in)
{
    std::vector<std::vector<Complex>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = io_detail::trim(line);
        if (view.empty() || view.front() == '#')
            continue;
        std::vector<Complex> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = view.find(',', start);
            row.push_back(parse_complex(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start)));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(ErrorKind::ParseError, "row at line " + std::to_string(line_no) + " has " +
                                                   std::to_string(row.size()) + " entries, expected " +
                                                   std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw Error(ErrorKind::ParseError, "matrix file holds no rows");
    Mat a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            a(i, j) = rows[i][j];
    return a;
}

inline void write_csv(std::ostream& out, const Mat& a)
{
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (j)
                out << ',';
            out << format_complex(a(i, j));
        }
        out << '\n';
    }
}

inline Mat read_matrix_market(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::ParseError, "empty MatrixMarket file");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    for (std::string* s : {&object, &format, &field, &symmetry})
        for (char& c : *s)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "array" || symmetry != "general" ||
        (field != "real" && field != "complex" && field != "integer" && field != "double"))
        throw Error(ErrorKind::ParseError, "unsupported MatrixMarket header: " + line);
    const bool is_complex = field == "complex";

    std::vector<std::string> tokens;
    while (std::getline(in, line)) {
        const std::string_view view = io_detail::trim(line);
        if (view.empty() || view.front() == '%')
            continue;
        std::istringstream words{std::string(view)};
        std::string w;
        while (words >> w)
            tokens.push_back(w);
    }
    if (tokens.size() < 2)
        throw Error(ErrorKind::ParseError, "MatrixMarket size line missing");
    const double rows_d = io_detail::parse_real(tokens[0], "size line");
    const double cols_d = io_detail::parse_real(tokens[1], "size line");
    if (rows_d < 1 || cols_d < 1 || rows_d != static_cast<Index>(rows_d) || cols_d != static_cast<Index>(cols_d))
        throw Error(ErrorKind::ParseError, "MatrixMarket dimensions must be positive integers");
    const auto rows = static_cast<Index>(rows_d);
    const auto cols = static_cast<Index>(cols_d);
    const std::size_t per_entry = is_complex ? 2 : 1;
    if (tokens.size() != 2 + static_cast<std::size_t>(rows * cols) * per_entry)
        throw Error(ErrorKind::ParseError, "MatrixMarket entry count does not match dimensions");
    Mat a(rows, cols);
    std::size_t k = 2;
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = io_detail::parse_real(tokens[k++], "entry");
            const double im = is_complex ? io_detail::parse_real(tokens[k++], "entry") : 0.0;
            a(i, j) = {re, im};
        }
    return a;
}

inline void write_matrix_market(std::ostream& out, const Mat& a)
{
    const bool is_complex = (a.imag().array() != 0.0).any();
    out << "%%MatrixMarket matrix array " << (is_complex ? "complex" : "real") << " general\n";
    out << a.rows() << ' ' << a.cols() << '\n';
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i) {
            out << io_detail::format_real(a(i, j).real());
            if (is_complex)
                out << ' ' << io_detail::format_real(a(i, j).imag());
            out << '\n';
        }
}

inline Mat read_matrix(std::istream& in, MatrixFormat format)
{
    return format == MatrixFormat::Csv ? read_csv(in) : read_matrix_market(in);
}

inline void write_matrix(std::ostream& out, const Mat& a, MatrixFormat format)
{
    if (format == MatrixFormat::Csv)
        write_csv(out, a);
    else
        write_matrix_market(out, a);
}

inline std::string read_file_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::ParseError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Mat parse_matrix(const std::string& text, MatrixFormat format)
{
    std::istringstream in(text);
    return read_matrix(in, format);
}

inline std::string format_matrix(const Mat& a, MatrixFormat format)
{
    std::ostringstream out;
    write_matrix(out, a, format);
    return out.str();
}

}  // namespace hustab
