#include "biad/feedback.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <string>

#include "biad/errors.hpp"

namespace biad {

void save_feedback_log(const FeedbackLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "round,player,item,effective\n";
    for (const auto& rec : log.records) {
        out << rec.round << ',' << rec.player << ',' << rec.item << ','
            << (rec.effective ? 1 : 0) << '\n';
    }
    if (!out) {
        throw ParseError("write to '" + path.string() + "' failed");
    }
}

FeedbackLog load_feedback_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "' for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty feedback log '" + path.string() + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "round,player,item,effective") {
        throw ParseError("bad header at row 1, expected 'round,player,item,effective'");
    }

    FeedbackLog log;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        int fields[4];
        std::size_t start = 0;
        const std::string_view view(line);
        for (int f = 0; f < 4; ++f) {
            const auto end = f < 3 ? view.find(',', start) : std::string_view::npos;
            if (f < 3 && end == std::string_view::npos) {
                throw ParseError("row " + std::to_string(row) + " has too few fields");
            }
            const auto cell = view.substr(start, end == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : end - start);
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), fields[f]);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ParseError("bad integer '" + std::string(cell) + "' at row " + std::to_string(row));
            }
            start = end == std::string_view::npos ? view.size() : end + 1;
        }
        if (fields[3] != 0 && fields[3] != 1) {
            throw ParseError("effective flag must be 0 or 1 at row " + std::to_string(row));
        }
        log.records.push_back({fields[0], fields[1], fields[2], fields[3] == 1,
                               std::numeric_limits<double>::quiet_NaN()});
    }
    return log;
}

}  // namespace biad
