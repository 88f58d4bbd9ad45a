#include "presda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace presda::metrics {

ConfusionCounts confusion(std::span<const double> probs, std::span<const int> labels,
                          double threshold) {
    if (probs.size() != labels.size())
        throw std::invalid_argument("confusion: trace/label misalignment");
    ConfusionCounts c;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool pred = probs[i] >= threshold;
        const bool truth = labels[i] != 0;
        if (pred && truth) ++c.tp;
        else if (pred && !truth) ++c.fp;
        else if (!pred && truth) ++c.fn;
        else ++c.tn;
    }
    return c;
}

std::optional<double> sensitivity(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> specificity(const ConfusionCounts& c) {
    if (c.tn + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

double auc_concat(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc_concat: score/label misalignment");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l != 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc_concat: needs both classes");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks within tie groups; rank sums stay exact in double
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + (j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] != 0) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    const double u = pos_rank_sum -
                     0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_concat(const std::vector<RecordScores>& records) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& r : records) {
        if (r.scores.size() != r.labels.size())
            throw std::invalid_argument("auc_concat: score/label misalignment in " +
                                        r.record_id);
        scores.insert(scores.end(), r.scores.begin(), r.scores.end());
        labels.insert(labels.end(), r.labels.begin(), r.labels.end());
    }
    return auc_concat(scores, labels);
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels,
                   int n_thresholds) {
    if (n_thresholds < 2) throw std::invalid_argument("roc_curve: need >= 2 thresholds");
    RocCurve curve;
    curve.auc = auc_concat(scores, labels);
    curve.points.reserve(n_thresholds);
    for (int i = 0; i < n_thresholds; ++i) {
        const double thr = static_cast<double>(i) / (n_thresholds - 1);
        const ConfusionCounts c = confusion(scores, labels, thr);
        curve.points.push_back({thr, sensitivity(c).value_or(0.0),
                                1.0 - specificity(c).value_or(1.0)});
    }
    return curve;
}

std::vector<eeg::SeizureEvent> binarize_events(const infer::ProbabilityTrace& trace,
                                               double threshold, double min_event_s) {
    std::vector<eeg::SeizureEvent> events;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.probs[i] < threshold) continue;
        const double a = trace.start_times_s[i];
        const double b = a + 8.0;  // each positive window contributes its full span
        if (!events.empty() && a <= events.back().offset_s)
            events.back().offset_s = std::max(events.back().offset_s, b);
        else
            events.push_back({a, b});
    }
    if (min_event_s > 0.0)
        std::erase_if(events, [&](const eeg::SeizureEvent& e) {
            return e.duration_s() < min_event_s;
        });
    return events;
}

EventMatchResult match_events(const std::vector<eeg::SeizureEvent>& predicted,
                              const std::vector<eeg::SeizureEvent>& truth,
                              double record_hours) {
    if (record_hours <= 0.0)
        throw std::invalid_argument("match_events: record_hours must be > 0");
    EventMatchResult r;
    r.total_true_events = static_cast<long long>(truth.size());
    r.total_hours = record_hours;

    auto overlaps = [](const eeg::SeizureEvent& a, const eeg::SeizureEvent& b) {
        return std::min(a.offset_s, b.offset_s) > std::max(a.onset_s, b.onset_s);
    };
    for (const auto& t : truth)
        for (const auto& p : predicted)
            if (overlaps(t, p)) {
                ++r.detected_true_events;
                break;
            }
    for (const auto& p : predicted) {
        bool any = false;
        for (const auto& t : truth)
            if (overlaps(t, p)) {
                any = true;
                break;
            }
        if (!any) ++r.false_detection_events;
    }
    return r;
}

std::vector<DetectionPoint> detection_curve(
    const std::vector<infer::ProbabilityTrace>& traces,
    const std::vector<eeg::AnnotationSet>& truths,
    const std::vector<double>& record_hours, std::span<const double> thresholds,
    double min_event_s, bool pooled) {
    if (traces.size() != truths.size() || traces.size() != record_hours.size())
        throw std::invalid_argument("detection_curve: per-record input misalignment");
    long long total_true = 0;
    for (const auto& t : truths) total_true += static_cast<long long>(t.size());
    if (total_true == 0)
        throw std::invalid_argument("detection_curve: no true events, rate undefined");

    std::vector<DetectionPoint> points;
    points.reserve(thresholds.size());
    for (double thr : thresholds) {
        long long detected = 0, total = 0, false_det = 0;
        double hours = 0.0;
        double macro_rate_sum = 0.0, macro_fd_sum = 0.0;
        std::size_t macro_rate_n = 0;
        for (std::size_t i = 0; i < traces.size(); ++i) {
            const auto pred = binarize_events(traces[i], thr, min_event_s);
            const auto m = match_events(pred, truths[i].events(), record_hours[i]);
            detected += m.detected_true_events;
            total += m.total_true_events;
            false_det += m.false_detection_events;
            hours += m.total_hours;
            if (auto rate = m.detection_rate()) {
                macro_rate_sum += *rate;
                ++macro_rate_n;
            }
            macro_fd_sum += m.fd_per_hour();
        }
        DetectionPoint p;
        p.threshold = thr;
        if (pooled) {
            p.fd_per_hour = static_cast<double>(false_det) / hours;
            p.detection_rate = static_cast<double>(detected) / static_cast<double>(total);
        } else {
            p.fd_per_hour = macro_fd_sum / static_cast<double>(traces.size());
            p.detection_rate =
                macro_rate_n ? macro_rate_sum / static_cast<double>(macro_rate_n) : 0.0;
        }
        points.push_back(p);
    }
    return points;
}

std::vector<LooEntry> leave_one_out(const std::vector<RecordScores>& records) {
    if (records.size() < 3)
        throw std::invalid_argument("leave_one_out: need at least 3 records");
    std::vector<LooEntry> out;
    out.reserve(records.size());
    for (std::size_t skip = 0; skip < records.size(); ++skip) {
        std::vector<RecordScores> rest;
        rest.reserve(records.size() - 1);
        for (std::size_t i = 0; i < records.size(); ++i)
            if (i != skip) rest.push_back(records[i]);
        LooEntry e;
        e.record_id = records[skip].record_id;
        try {
            e.auc = auc_concat(rest);
        } catch (const std::invalid_argument& ex) {
            e.reason = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace presda::metrics
