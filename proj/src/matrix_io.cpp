#include "biad/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "biad/errors.hpp"

namespace biad {

namespace {

std::string location(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || cell.empty()) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "' at " + location(line, column));
    }
    if (!std::isfinite(value) || value < kMinRating || value > kMaxRating) {
        throw ParseError("rating " + std::string(cell) + " outside [0, 10] at " + location(line, column));
    }
    return value;
}

}  // namespace

void save_matrix(const RatingMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << matrix.num_users() << ',' << matrix.num_items() << '\n';
    char buf[64];
    for (std::size_t u = 0; u < matrix.num_users(); ++u) {
        const auto row = matrix.row(u);
        for (std::size_t i = 0; i < row.size(); ++i) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[i]);
            if (i > 0) out << ',';
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
    if (!out) {
        throw ParseError("write to '" + path.string() + "' failed");
    }
}

RatingMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "' for reading");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty matrix file '" + path.string() + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto comma = line.find(',');
    if (comma == std::string::npos) {
        throw ParseError("header must be '<users>,<items>' at line 1");
    }
    std::size_t users = 0;
    std::size_t items = 0;
    auto parse_dim = [&](std::string_view text, std::size_t column, std::size_t& out_dim) {
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out_dim);
        if (ec != std::errc{} || ptr != text.data() + text.size() || out_dim == 0) {
            throw ParseError("bad dimension '" + std::string(text) + "' at " + location(1, column));
        }
    };
    parse_dim(std::string_view(line).substr(0, comma), 1, users);
    parse_dim(std::string_view(line).substr(comma + 1), 2, items);

    std::vector<double> ratings;
    ratings.reserve(users * items);
    for (std::size_t u = 0; u < users; ++u) {
        const std::size_t line_no = u + 2;
        if (!std::getline(in, line)) {
            throw ParseError("expected " + std::to_string(users) + " rows, file ends at line " +
                             std::to_string(line_no));
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();

        std::size_t cells = 0;
        std::size_t start = 0;
        const std::string_view view(line);
        while (true) {
            const auto end = view.find(',', start);
            const auto cell = view.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                               : end - start);
            ++cells;
            if (cells <= items) ratings.push_back(parse_cell(cell, line_no, cells));
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
        if (cells != items) {
            throw ParseError("row at line " + std::to_string(line_no) + " has " +
                             std::to_string(cells) + " cells, expected " + std::to_string(items));
        }
    }
    if (std::getline(in, line) && !line.empty()) {
        throw ParseError("trailing content after " + std::to_string(users) + " rows at line " +
                         std::to_string(users + 2));
    }

    return RatingMatrix(users, items, std::move(ratings));
}

}  // namespace biad
