#include "sheetlight/pipeline/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "sheetlight/core/error.hpp"
#include "sheetlight/io/pfm.hpp"
#include "sheetlight/io/png.hpp"

namespace sheetlight::pipeline {

namespace {

bool numeric_stem(const std::string& stem, long long& value) {
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), value);
    return ec == std::errc() && ptr == stem.data() + stem.size();
}

std::vector<fs::path> list_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) out.push_back(entry.path());
    }
    return out;
}

}  // namespace

std::string expand_template(const std::string& pattern, const std::string& sequence) {
    std::string out;
    const std::string key = "{seq}";
    std::size_t pos = 0;
    for (;;) {
        const std::size_t hit = pattern.find(key, pos);
        if (hit == std::string::npos) break;
        out.append(pattern, pos, hit - pos);
        out += sequence;
        pos = hit + key.size();
    }
    out.append(pattern, pos, std::string::npos);
    return out;
}

std::vector<FramePaths> pair_frames(const std::vector<fs::path>& images, const std::vector<fs::path>& depths) {
    std::map<std::string, fs::path> pfm, png;
    for (const fs::path& d : depths) {
        const std::string ext = d.extension().string();
        if (ext == ".pfm") pfm[d.stem().string()] = d;
        else if (ext == ".png") png[d.stem().string()] = d;
    }

    std::vector<FramePaths> frames;
    std::vector<std::string> orphans, bad_names;
    for (const fs::path& img : images) {
        if (img.extension() != ".png") continue;
        FramePaths f;
        f.stem = img.stem().string();
        f.image = img;
        if (!numeric_stem(f.stem, f.index)) {
            bad_names.push_back(img.filename().string());
            continue;
        }
        if (auto it = pfm.find(f.stem); it != pfm.end()) f.depth = it->second;
        else if (auto jt = png.find(f.stem); jt != png.end()) f.depth = jt->second;
        else {
            orphans.push_back(f.stem);
            continue;
        }
        frames.push_back(std::move(f));
    }

    auto join = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
        return s;
    };
    if (!bad_names.empty()) throw Error("image file names are not numeric frame stems: " + join(bad_names));
    if (!orphans.empty()) throw Error("frames without depth: " + join(orphans));

    std::sort(frames.begin(), frames.end(), [](const FramePaths& a, const FramePaths& b) {
        return a.index != b.index ? a.index < b.index : a.stem < b.stem;
    });
    return frames;
}

std::vector<FramePaths> ingest_sequence(const fs::path& root, const std::string& sequence,
                                        const DatasetLayout& layout) {
    const fs::path image_dir = root / expand_template(layout.image_dir, sequence);
    const fs::path depth_dir = root / expand_template(layout.depth_dir, sequence);
    if (!fs::is_directory(image_dir)) throw IoError(image_dir.string(), "image directory not found");
    const std::vector<fs::path> images = list_files(image_dir);
    const std::vector<fs::path> depths = fs::is_directory(depth_dir) ? list_files(depth_dir) : std::vector<fs::path>{};
    return pair_frames(images, depths);
}

geom::InverseDepthMap load_inverse_depth(const fs::path& path, double png_scale) {
    if (!fs::exists(path)) throw IoError(path.string(), "depth file not found");
    const std::string ext = path.extension().string();
    if (ext == ".pfm") return geom::InverseDepthMap(io::read_pfm(path.string()));
    if (ext == ".png") {
        if (!(png_scale > 0.0)) throw InvalidParameter("depth PNG scale must be positive");
        const Grid<std::uint16_t> raw = io::read_png_gray_raw(path.string());
        Grid<float> values(raw.width(), raw.height());
        for (std::size_t i = 0; i < raw.size(); ++i) values.values()[i] = float(double(raw.values()[i]) / png_scale);
        return geom::InverseDepthMap(std::move(values));
    }
    throw IoError(path.string(), "unsupported depth format (expected .pfm or .png)");
}

}  // namespace sheetlight::pipeline
