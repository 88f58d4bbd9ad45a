#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace presda::eeg {

// Shortest annotatable seizure: events below this are rejected on load.
inline constexpr double kMinSeizureSeconds = 10.0;

struct SeizureEvent {
    double onset_s = 0.0;
    double offset_s = 0.0;
    double duration_s() const { return offset_s - onset_s; }
};

// Sorted, disjoint union of seizure events with only temporal extent
// (weak labels; no per-channel location).
class AnnotationSet {
public:
    enum class OverlapPolicy { Merge, Error };

    AnnotationSet() = default;

    // Validates each event (onset >= 0, offset > onset, duration >= 10 s),
    // sorts by onset and merges overlapping or abutting events.
    static AnnotationSet from_events(std::vector<SeizureEvent> events,
                                     OverlapPolicy policy = OverlapPolicy::Merge);

    const std::vector<SeizureEvent>& events() const { return events_; }
    bool empty() const { return events_.empty(); }
    std::size_t size() const { return events_.size(); }

    double total_seizure_s() const;

    // Seconds of [a, b) covered by the seizure union.
    double overlap_with(double a, double b) const;

private:
    std::vector<SeizureEvent> events_;
};

struct EegRecord {
    std::string record_id;
    double ga_weeks = 0.0;  // corrected gestational age at recording
    double fs_hz = 0.0;
    std::vector<std::string> channel_names;
    std::size_t n_samples = 0;
    std::vector<float> samples;  // channel-major, n_channels * n_samples, microvolts
    AnnotationSet annotations;

    std::size_t n_channels() const { return channel_names.size(); }
    double duration_s() const { return fs_hz > 0 ? n_samples / fs_hz : 0.0; }

    float* channel(std::size_t c) { return samples.data() + c * n_samples; }
    const float* channel(std::size_t c) const {
        return samples.data() + c * n_samples;
    }

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;
};

}  // namespace presda::eeg
