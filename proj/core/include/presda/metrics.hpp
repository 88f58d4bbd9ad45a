#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presda/eeg_record.hpp"
#include "presda/trace.hpp"

namespace presda::metrics {

// Per-window (epoch) confusion counts at one threshold.
struct ConfusionCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    long long total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const double> probs, std::span<const int> labels,
                          double threshold);

// TP/(TP+FN) and TN/(TN+FP); empty when the denominator is zero.
std::optional<double> sensitivity(const ConfusionCounts& c);
std::optional<double> specificity(const ConfusionCounts& c);

// AUC as the Mann-Whitney rank statistic with average ranks for ties,
// equal to P(score_pos > score_neg) + 0.5 P(tie). Throws if either class
// is missing.
double auc_concat(std::span<const double> scores, std::span<const int> labels);

// Scores and weak labels of one record, used for concatenated reporting.
struct RecordScores {
    std::string record_id;
    std::vector<double> scores;
    std::vector<int> labels;
};

double auc_concat(const std::vector<RecordScores>& records);

struct RocPoint {
    double threshold = 0.0;
    double sensitivity = 0.0;
    double one_minus_specificity = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by threshold
    double auc = 0.0;              // rank-statistic AUC, not trapezoid
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels,
                   int n_thresholds = 101);

// Maximal runs of prob >= threshold, each window spanning [start, start+8 s),
// unioned; events shorter than min_event_s are dropped.
std::vector<eeg::SeizureEvent> binarize_events(const infer::ProbabilityTrace& trace,
                                               double threshold,
                                               double min_event_s);

struct EventMatchResult {
    long long detected_true_events = 0;
    long long total_true_events = 0;
    long long false_detection_events = 0;
    double total_hours = 0.0;

    double fd_per_hour() const {
        return static_cast<double>(false_detection_events) / total_hours;
    }
    std::optional<double> detection_rate() const {
        if (total_true_events == 0) return std::nullopt;
        return static_cast<double>(detected_true_events) / total_true_events;
    }
};

// A true event counts as detected iff some predicted event overlaps it with
// nonzero length; a predicted event with zero overlap with every true event
// is one false detection.
EventMatchResult match_events(const std::vector<eeg::SeizureEvent>& predicted,
                              const std::vector<eeg::SeizureEvent>& truth,
                              double record_hours);

struct DetectionPoint {
    double threshold = 0.0;
    double fd_per_hour = 0.0;
    double detection_rate = 0.0;
};

// Detection rate vs FD/h over a threshold grid. Pooled (micro-averaged)
// across records by default; macro averages per-record rates instead.
std::vector<DetectionPoint> detection_curve(
    const std::vector<infer::ProbabilityTrace>& traces,
    const std::vector<eeg::AnnotationSet>& truths,
    const std::vector<double>& record_hours, std::span<const double> thresholds,
    double min_event_s, bool pooled = true);

struct LooEntry {
    std::string record_id;           // excluded record
    std::optional<double> auc;       // empty if exclusion leaves one class
    std::string reason;              // set when auc is empty
};

// AUC over the concatenation of all records except one, for each record.
std::vector<LooEntry> leave_one_out(const std::vector<RecordScores>& records);

}  // namespace presda::metrics
