#pragma once

#include <string>
#include <vector>

namespace presda::infer {

enum class TraceStage { Raw, Smoothed, Fused };

const char* to_string(TraceStage stage);

// Time-stamped per-window seizure probabilities for one record.
struct ProbabilityTrace {
    std::string record_id;
    double stride_s = 1.0;
    std::vector<double> start_times_s;
    std::vector<double> probs;
    TraceStage stage = TraceStage::Raw;

    std::size_t size() const { return probs.size(); }

    // probs in [0,1], timestamps strictly increasing with constant stride
    void validate() const;
};

}  // namespace presda::infer
