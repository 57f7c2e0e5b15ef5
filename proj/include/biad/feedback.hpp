#pragma once

#include <filesystem>
#include <vector>

namespace biad {

/// One recommendation outcome. `rating` is the ground-truth rating the
/// simulator knows; the detector protocol only ever sees the binary flag
/// (the CSV export carries round,player,item,effective and nothing else).
struct FeedbackRecord {
    int round = 0;
    int player = 0;
    int item = 0;
    bool effective = false;
    double rating = 0.0;
};

/// Per-round feedback stream from simulator to detector. (player, item)
/// pairs are unique across the log: no item is recommended twice.
struct FeedbackLog {
    std::vector<FeedbackRecord> records;
};

/// CSV export/import, header "round,player,item,effective", effective in {0,1}.
void save_feedback_log(const FeedbackLog& log, const std::filesystem::path& path);

/// Throws ParseError naming the offending row. Ratings are not part of the
/// format; loaded records carry NaN ratings.
FeedbackLog load_feedback_log(const std::filesystem::path& path);

}  // namespace biad
