#pragma once

// CLEAR-MOT evaluation of multi-object tracking output.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sheetlight::eval {

/// Axis-aligned box in pixels.
struct BBox {
    double left = 0.0;
    double top = 0.0;
    double right = 0.0;
    double bottom = 0.0;

    bool valid() const noexcept { return right > left && bottom > top; }
    double area() const noexcept { return (right - left) * (bottom - top); }

    bool operator==(const BBox&) const = default;
};

struct Detection {
    int frame = 0;
    int track_id = 0;
    BBox bbox;
    std::string class_label = "Car";
    std::optional<double> score;

    bool operator==(const Detection&) const = default;
};

/// Labels of one sequence: scored detections plus ignore regions.
struct TrackingSequence {
    std::vector<Detection> detections;
    std::vector<Detection> dont_care;

    /// Highest frame index present in either list, or -1 when empty.
    int last_frame() const;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

struct FrameMatching {
    struct Pair {
        std::size_t gt;
        std::size_t pred;
        double iou;
    };
    std::vector<Pair> pairs;
    std::vector<std::size_t> unmatched_gt;
    std::vector<std::size_t> unmatched_pred;

    double total_iou() const;
};

/// Maps a ground-truth track id to the prediction track id it was last
/// matched with.
using TrackCorrespondence = std::map<int, int>;

/// One-to-one matching with IoU >= iou_min. Pairs from `previous` whose boxes
/// still overlap by at least iou_min are kept first; the remaining boxes are
/// assigned to maximise total IoU (Hungarian algorithm). Indices refer to the
/// input vectors.
FrameMatching match_frame(const std::vector<Detection>& gt, const std::vector<Detection>& pred,
                          double iou_min = 0.5, const TrackCorrespondence* previous = nullptr);

/// Maximum-weight assignment on a rows x cols weight matrix (row-major).
/// Returns, for each row, the assigned column or -1. Zero-weight entries are
/// never reported as assigned.
std::vector<int> max_weight_assignment(const std::vector<double>& weights, std::size_t rows, std::size_t cols);

/// Counts and rates. Rates are fractions (1.0 == 100%); reports print them
/// as percentages.
struct MotReport {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long idsw = 0;
    long long gt = 0;
    long long frames = 0;

    double mota = 0.0;
    double motp = 0.0;
    double moda = 0.0;
    double modp = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    /// False when there were no predictions at all; precision and F1 are
    /// then reported as 0.
    bool precision_defined = true;
    /// False when no pair was matched; MOTP and MODP are then 0.
    bool overlap_defined = true;
};

/// Accumulates CLEAR-MOT statistics over one or more sequences.
class MotAccumulator {
public:
    explicit MotAccumulator(double iou_min = 0.5, double dont_care_iou = 0.5);

    /// Evaluates one sequence; frames are 0 .. max frame of either input.
    void add_sequence(const TrackingSequence& gt, const TrackingSequence& pred);

    /// Adds the counts of another accumulator (same thresholds).
    void merge(const MotAccumulator& other);

    long long gt_count() const noexcept { return gt_; }

    /// Throws InvalidParameter when no ground-truth object was seen, since
    /// MOTA is undefined.
    MotReport report() const;

private:
    double iou_min_;
    double dont_care_iou_;
    long long tp_ = 0, fp_ = 0, fn_ = 0, idsw_ = 0, gt_ = 0, frames_ = 0;
    double iou_sum_ = 0.0;
    double frame_iou_sum_ = 0.0;
    long long frames_with_match_ = 0;
};

MotReport clear_mot(const TrackingSequence& gt, const TrackingSequence& pred, double iou_min = 0.5);

}  // namespace sheetlight::eval
