#include "sheetlight/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace sheetlight::eval {

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const MotReport& r) {
    ordered_json j;
    j["MOTA"] = 100.0 * r.mota;
    j["MOTP"] = 100.0 * r.motp;
    j["MODA"] = 100.0 * r.moda;
    j["MODP"] = 100.0 * r.modp;
    j["precision"] = 100.0 * r.precision;
    j["recall"] = 100.0 * r.recall;
    j["F1"] = 100.0 * r.f1;
    j["TP"] = r.tp;
    j["FP"] = r.fp;
    j["FN"] = r.fn;
    j["IDSW"] = r.idsw;
    j["GT"] = r.gt;
    j["frames"] = r.frames;
    j["precision_defined"] = r.precision_defined;
    j["overlap_defined"] = r.overlap_defined;
    return j;
}

ordered_json to_json(const IqReport& r) {
    ordered_json j;
    j["RMSE"] = r.rmse;
    if (std::isinf(r.psnr)) j["PSNR"] = "inf";
    else j["PSNR"] = r.psnr;
    j["SSIM"] = r.ssim;
    return j;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string mot_row(const std::string& name, const MotReport& r, std::size_t name_width) {
    std::ostringstream out;
    out << pad(name, name_width, true);
    for (double v : {r.mota, r.motp, r.moda, r.modp}) out << pad(fmt("%.2f", 100.0 * v), 9);
    out << pad(r.precision_defined ? fmt("%.2f", 100.0 * r.precision) : "0.00*", 9);
    out << pad(fmt("%.2f", 100.0 * r.recall), 9) << pad(fmt("%.2f", 100.0 * r.f1), 9);
    for (long long v : {r.tp, r.fp, r.fn, r.idsw, r.gt}) out << pad(std::to_string(v), 8);
    return out.str();
}

}  // namespace

std::string mot_report_json(const std::vector<NamedMotReport>& sequences, const MotReport& aggregate) {
    ordered_json doc;
    doc["sequences"] = ordered_json::object();
    for (const auto& [name, r] : sequences) doc["sequences"][name] = to_json(r);
    doc["aggregate"] = to_json(aggregate);
    return doc.dump(2) + "\n";
}

std::string mot_report_table(const std::vector<NamedMotReport>& sequences, const MotReport& aggregate) {
    std::size_t name_width = std::string("aggregate").size();
    for (const auto& [name, r] : sequences) name_width = std::max(name_width, name.size());
    name_width += 2;
    std::ostringstream out;
    out << pad("sequence", name_width, true);
    for (const char* h : {"MOTA", "MOTP", "MODA", "MODP", "Prec", "Rec", "F1"}) out << pad(h, 9);
    for (const char* h : {"TP", "FP", "FN", "IDSW", "GT"}) out << pad(h, 8);
    out << '\n';
    for (const auto& [name, r] : sequences) out << mot_row(name, r, name_width) << '\n';
    out << mot_row("aggregate", aggregate, name_width) << '\n';
    if (!aggregate.precision_defined) out << "* no predictions: precision undefined, reported as 0\n";
    return out.str();
}

std::string iq_report_json(const std::vector<NamedIqReport>& pairs) {
    ordered_json doc = ordered_json::object();
    for (const auto& [name, r] : pairs) doc[name] = to_json(r);
    return doc.dump(2) + "\n";
}

std::string iq_report_table(const std::vector<NamedIqReport>& pairs) {
    std::size_t name_width = 6;
    for (const auto& [name, r] : pairs) name_width = std::max(name_width, name.size());
    name_width += 2;
    std::ostringstream out;
    out << pad("image", name_width, true) << pad("RMSE", 10) << pad("PSNR", 10) << pad("SSIM", 10) << '\n';
    for (const auto& [name, r] : pairs) {
        out << pad(name, name_width, true) << pad(fmt("%.3f", r.rmse), 10)
            << pad(std::isinf(r.psnr) ? "inf" : fmt("%.3f", r.psnr), 10) << pad(fmt("%.4f", r.ssim), 10) << '\n';
    }
    return out.str();
}

}  // namespace sheetlight::eval
