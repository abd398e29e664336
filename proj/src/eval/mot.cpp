#include "sheetlight/eval/mot.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "sheetlight/core/error.hpp"

namespace sheetlight::eval {

namespace {

using FrameIndex = std::map<int, std::vector<Detection>>;

// Canonical order inside a frame, so results do not depend on input order.
bool detection_less(const Detection& a, const Detection& b) {
    return std::tie(a.track_id, a.bbox.left, a.bbox.top, a.bbox.right, a.bbox.bottom) <
           std::tie(b.track_id, b.bbox.left, b.bbox.top, b.bbox.right, b.bbox.bottom);
}

FrameIndex by_frame(const std::vector<Detection>& dets) {
    FrameIndex out;
    for (const Detection& d : dets) out[d.frame].push_back(d);
    for (auto& [frame, list] : out) std::sort(list.begin(), list.end(), detection_less);
    return out;
}

const std::vector<Detection>& frame_or_empty(const FrameIndex& index, int frame) {
    static const std::vector<Detection> empty;
    const auto it = index.find(frame);
    return it == index.end() ? empty : it->second;
}

}  // namespace

int TrackingSequence::last_frame() const {
    int last = -1;
    for (const Detection& d : detections) last = std::max(last, d.frame);
    for (const Detection& d : dont_care) last = std::max(last, d.frame);
    return last;
}

double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
    const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

double FrameMatching::total_iou() const {
    double sum = 0.0;
    for (const Pair& p : pairs) sum += p.iou;
    return sum;
}

std::vector<int> max_weight_assignment(const std::vector<double>& weights, std::size_t rows, std::size_t cols) {
    if (weights.size() != rows * cols) throw InvalidParameter("weight matrix has the wrong size");
    std::vector<int> result(rows, -1);
    if (rows == 0 || cols == 0) return result;

    // Square min-cost problem with cost = max_w - w; padding costs max_w.
    const std::size_t n = std::max(rows, cols);
    double max_w = 0.0;
    for (double w : weights) max_w = std::max(max_w, w);
    auto cost = [&](std::size_t i, std::size_t j) {
        return (i < rows && j < cols) ? max_w - weights[i * cols + j] : max_w;
    };

    // Shortest augmenting path with potentials; 1-based, column 0 is virtual.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = p[j] - 1;
        const std::size_t col = j - 1;
        if (i < rows && col < cols && weights[i * cols + col] > 0.0) result[i] = int(col);
    }
    return result;
}

FrameMatching match_frame(const std::vector<Detection>& gt, const std::vector<Detection>& pred, double iou_min,
                          const TrackCorrespondence* previous) {
    if (!(iou_min > 0.0 && iou_min < 1.0)) throw InvalidParameter("iou_min must lie in (0, 1)");
    FrameMatching out;
    std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);

    if (previous) {
        for (std::size_t i = 0; i < gt.size(); ++i) {
            const auto it = previous->find(gt[i].track_id);
            if (it == previous->end()) continue;
            std::size_t best = pred.size();
            double best_iou = iou_min;
            for (std::size_t j = 0; j < pred.size(); ++j) {
                if (pred_used[j] || pred[j].track_id != it->second) continue;
                const double o = iou(gt[i].bbox, pred[j].bbox);
                if (o >= best_iou && (best == pred.size() || o > best_iou)) {
                    best = j;
                    best_iou = o;
                }
            }
            if (best == pred.size()) continue;
            gt_used[i] = pred_used[best] = 1;
            out.pairs.push_back({i, best, best_iou});
        }
    }

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!gt_used[i]) rows.push_back(i);
    }
    for (std::size_t j = 0; j < pred.size(); ++j) {
        if (!pred_used[j]) cols.push_back(j);
    }
    std::vector<double> weights(rows.size() * cols.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double o = iou(gt[rows[r]].bbox, pred[cols[c]].bbox);
            if (o >= iou_min) weights[r * cols.size() + c] = o;
        }
    }
    const std::vector<int> assigned = max_weight_assignment(weights, rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (assigned[r] < 0) continue;
        const std::size_t i = rows[r], j = cols[std::size_t(assigned[r])];
        gt_used[i] = pred_used[j] = 1;
        out.pairs.push_back({i, j, weights[r * cols.size() + std::size_t(assigned[r])]});
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) { return a.gt < b.gt; });
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!gt_used[i]) out.unmatched_gt.push_back(i);
    }
    for (std::size_t j = 0; j < pred.size(); ++j) {
        if (!pred_used[j]) out.unmatched_pred.push_back(j);
    }
    return out;
}

MotAccumulator::MotAccumulator(double iou_min, double dont_care_iou)
    : iou_min_(iou_min), dont_care_iou_(dont_care_iou) {
    if (!(iou_min > 0.0 && iou_min < 1.0)) throw InvalidParameter("iou_min must lie in (0, 1)");
}

void MotAccumulator::add_sequence(const TrackingSequence& gt, const TrackingSequence& pred) {
    const FrameIndex gt_frames = by_frame(gt.detections);
    const FrameIndex pred_frames = by_frame(pred.detections);
    const FrameIndex ignore_frames = by_frame(gt.dont_care);
    const int last = std::max(gt.last_frame(), pred.last_frame());

    TrackCorrespondence last_match;
    for (int f = 0; f <= last; ++f) {
        const auto& g = frame_or_empty(gt_frames, f);
        const auto& p = frame_or_empty(pred_frames, f);
        const auto& ignore = frame_or_empty(ignore_frames, f);
        ++frames_;
        gt_ += (long long)g.size();

        const FrameMatching m = match_frame(g, p, iou_min_, &last_match);
        for (const auto& pair : m.pairs) {
            const int gt_id = g[pair.gt].track_id, pred_id = p[pair.pred].track_id;
            const auto it = last_match.find(gt_id);
            if (it != last_match.end() && it->second != pred_id) ++idsw_;
            last_match[gt_id] = pred_id;
        }
        tp_ += (long long)m.pairs.size();
        fn_ += (long long)m.unmatched_gt.size();
        for (std::size_t j : m.unmatched_pred) {
            const bool ignored = std::any_of(ignore.begin(), ignore.end(), [&](const Detection& dc) {
                return iou(dc.bbox, p[j].bbox) > dont_care_iou_;
            });
            if (!ignored) ++fp_;
        }
        if (!m.pairs.empty()) {
            const double sum = m.total_iou();
            iou_sum_ += sum;
            frame_iou_sum_ += sum / double(m.pairs.size());
            ++frames_with_match_;
        }
    }
}

void MotAccumulator::merge(const MotAccumulator& o) {
    tp_ += o.tp_;
    fp_ += o.fp_;
    fn_ += o.fn_;
    idsw_ += o.idsw_;
    gt_ += o.gt_;
    frames_ += o.frames_;
    iou_sum_ += o.iou_sum_;
    frame_iou_sum_ += o.frame_iou_sum_;
    frames_with_match_ += o.frames_with_match_;
}

MotReport MotAccumulator::report() const {
    if (gt_ == 0) throw InvalidParameter("ground truth contains no objects; MOTA is undefined");
    MotReport r;
    r.tp = tp_;
    r.fp = fp_;
    r.fn = fn_;
    r.idsw = idsw_;
    r.gt = gt_;
    r.frames = frames_;
    const double g = double(gt_);
    r.mota = 1.0 - double(fn_ + fp_ + idsw_) / g;
    r.moda = 1.0 - double(fn_ + fp_) / g;
    r.overlap_defined = tp_ > 0;
    r.motp = tp_ > 0 ? iou_sum_ / double(tp_) : 0.0;
    r.modp = frames_with_match_ > 0 ? frame_iou_sum_ / double(frames_with_match_) : 0.0;
    r.recall = double(tp_) / double(tp_ + fn_);
    r.precision_defined = tp_ + fp_ > 0;
    r.precision = r.precision_defined ? double(tp_) / double(tp_ + fp_) : 0.0;
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

MotReport clear_mot(const TrackingSequence& gt, const TrackingSequence& pred, double iou_min) {
    MotAccumulator acc(iou_min);
    acc.add_sequence(gt, pred);
    return acc.report();
}

}  // namespace sheetlight::eval
