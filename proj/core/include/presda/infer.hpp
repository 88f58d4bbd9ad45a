#pragma once

#include <vector>

#include "presda/checkpoint.hpp"
#include "presda/eeg_record.hpp"
#include "presda/trace.hpp"

namespace presda::infer {

enum class FusionMethod { Arithmetic, Geometric };

const char* to_string(FusionMethod method);
FusionMethod fusion_method_from_string(const std::string& s);

// Probabilities below this are clamped before the geometric mean;
// P^alpha is undefined at P = 0.
inline constexpr double kGeometricFloor = 1e-9;

struct FusionSpec {
    FusionMethod method = FusionMethod::Arithmetic;
    std::vector<double> alphas;  // simplex: alpha_i >= 0, sum = 1 (to 1e-9)

    void validate() const;
};

// Per-window seizure probabilities of one preprocessed (32 Hz) record.
// Ensembles average the member probabilities per window.
ProbabilityTrace predict_trace(const train::EnsembleModel& model,
                               const eeg::EegRecord& record_32hz, int stride_s = 1,
                               int batch_windows = 64);

// Centered moving mean of odd width; edges use the mean of available values.
ProbabilityTrace moving_average(const ProbabilityTrace& trace, int width_windows);

// Weighted arithmetic or geometric mean of aligned traces, per timestamp.
ProbabilityTrace fuse(const std::vector<ProbabilityTrace>& traces,
                      const FusionSpec& spec);

struct FusionSweepRow {
    FusionMethod method = FusionMethod::Arithmetic;
    double alpha = 0.0;  // weight of the first classifier
    double val_auc = 0.0;
};

struct FusionSelection {
    FusionSpec spec;
    double val_auc = 0.0;
    std::vector<FusionSweepRow> sweep;
};

// Sweeps alpha over {0, step, ..., 1} for both methods on raw validation
// traces and returns the concatenated-AUC argmax (ties: smaller alpha,
// arithmetic before geometric).
FusionSelection select_fusion(
    const std::vector<std::vector<ProbabilityTrace>>& traces_by_classifier,
    const std::vector<std::vector<int>>& labels_by_record, double grid_step = 0.05);

}  // namespace presda::infer
