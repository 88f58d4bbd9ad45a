#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "presda/synth.hpp"
#include "presda/train.hpp"

namespace presda::cli {

struct InferConfig {
    int stride_s = 1;
    int smooth_width = 15;  // windows; 15 s at 1 s stride
    bool fuse_before_smooth = false;
};

struct EvalConfig {
    double threshold = 0.5;
    int n_roc_thresholds = 101;
    int n_curve_thresholds = 101;
    double min_event_s = 0.0;  // 0 means "one stride"
    bool macro_average = false;
};

struct FusionConfig {
    double grid_step = 0.05;
};

// File-based experiment configuration; JSON with a strict schema (unknown
// keys are rejected), command-line flags override file values. The top-level
// seed feeds the train and synth seeds.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    train::TrainConfig train;
    int ga_group = 1;
    double ga_decay_span_weeks = 4.0;
    InferConfig infer;
    EvalConfig eval;
    FusionConfig fusion;
    synth::SynthConfig synth;

    std::set<std::string> explicit_keys;  // dotted paths the file/flags set

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::filesystem::path& path);

    bool was_set(const std::string& dotted_key) const {
        return explicit_keys.count(dotted_key) > 0;
    }

    void set_seed(std::uint64_t s);  // also marks "seed" explicit
    void validate() const;

    // full merged configuration, canonical key order
    std::string canonical_json() const;
    std::string config_hash() const;  // fnv1a-64 hex of canonical_json
};

}  // namespace presda::cli
