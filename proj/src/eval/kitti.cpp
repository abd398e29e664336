#include "sheetlight/eval/kitti.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sheetlight/core/error.hpp"

namespace sheetlight::eval {

namespace {

bool iequals(const std::string& a, const std::string& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

template <class T>
T parse_number(const std::string& token, const char* field, const std::string& source, int line) {
    T value{};
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(source, line, std::string("bad ") + field + " '" + token + "'");
    }
    return value;
}

}  // namespace

TrackingSequence parse_kitti_tracking_text(const std::string& text, const std::string& source,
                                           const KittiParseOptions& options) {
    TrackingSequence seq;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok.size() < 10) {
            throw ParseError(source, line_no, "expected at least 10 fields, found " + std::to_string(tok.size()));
        }
        if (tok.size() > 18) throw ParseError(source, line_no, "too many fields (" + std::to_string(tok.size()) + ")");

        Detection d;
        d.frame = parse_number<int>(tok[0], "frame", source, line_no);
        d.track_id = parse_number<int>(tok[1], "track id", source, line_no);
        d.class_label = tok[2];
        parse_number<double>(tok[3], "truncation", source, line_no);
        parse_number<double>(tok[4], "occlusion", source, line_no);
        parse_number<double>(tok[5], "alpha", source, line_no);
        d.bbox = {parse_number<double>(tok[6], "left", source, line_no),
                  parse_number<double>(tok[7], "top", source, line_no),
                  parse_number<double>(tok[8], "right", source, line_no),
                  parse_number<double>(tok[9], "bottom", source, line_no)};
        for (std::size_t i = 10; i < tok.size() && i < 17; ++i) parse_number<double>(tok[i], "3D field", source, line_no);
        if (tok.size() == 18) d.score = parse_number<double>(tok[17], "score", source, line_no);
        if (d.frame < 0) throw ParseError(source, line_no, "negative frame index");

        const bool dont_care = iequals(d.class_label, "DontCare");
        if (!dont_care && !d.bbox.valid()) throw ParseError(source, line_no, "box has right <= left or bottom <= top");
        if (dont_care) {
            if (d.bbox.valid()) seq.dont_care.push_back(d);
            continue;
        }
        const bool wanted = std::any_of(options.classes.begin(), options.classes.end(),
                                        [&](const std::string& c) { return iequals(c, d.class_label); });
        if (wanted) seq.detections.push_back(d);
    }
    return seq;
}

TrackingSequence parse_kitti_tracking(const std::string& path, const KittiParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open label file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kitti_tracking_text(buf.str(), path, options);
}

std::string format_kitti_tracking(const TrackingSequence& seq) {
    std::vector<const Detection*> all;
    for (const Detection& d : seq.detections) all.push_back(&d);
    for (const Detection& d : seq.dont_care) all.push_back(&d);
    std::stable_sort(all.begin(), all.end(), [](const Detection* a, const Detection* b) { return a->frame < b->frame; });
    std::ostringstream out;
    out.precision(17);
    for (const Detection* d : all) {
        out << d->frame << ' ' << d->track_id << ' ' << d->class_label << " 0 0 0 " << d->bbox.left << ' '
            << d->bbox.top << ' ' << d->bbox.right << ' ' << d->bbox.bottom << " 0 0 0 0 0 0 0";
        if (d->score) out << ' ' << *d->score;
        out << '\n';
    }
    return out.str();
}

}  // namespace sheetlight::eval
