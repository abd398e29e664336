#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sheetlight/eval/image_quality.hpp"
#include "sheetlight/eval/mot.hpp"

namespace sheetlight::eval {

using NamedMotReport = std::pair<std::string, MotReport>;
using NamedIqReport = std::pair<std::string, IqReport>;

/// JSON document {"sequences": {...}, "aggregate": {...}}. Rates are
/// percentages.
std::string mot_report_json(const std::vector<NamedMotReport>& sequences, const MotReport& aggregate);
/// Aligned text table, one row per sequence plus the aggregate.
std::string mot_report_table(const std::vector<NamedMotReport>& sequences, const MotReport& aggregate);

/// PSNR of identical images is written as the string "inf".
std::string iq_report_json(const std::vector<NamedIqReport>& pairs);
std::string iq_report_table(const std::vector<NamedIqReport>& pairs);

}  // namespace sheetlight::eval
