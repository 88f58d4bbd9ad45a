#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "presda/eeg_io.hpp"
#include "presda/experiment.hpp"

namespace presda::cli {

// Command implementations behind the `sda` binary. All outputs are
// deterministic in (config, seed): no timestamps, and every report carries
// the config hash.

// Generates a synthetic cohort under out_dir (records/, annotations/,
// meta/, manifest.json).
void cmd_synth(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// Report-only manifest check; printed as JSON by the binary.
eeg::ManifestReport cmd_validate(const std::filesystem::path& manifest_path,
                                 const std::vector<std::string>& required_splits);

struct TrainOptions {
    std::string mode = "base";  // base | ensemble | ga_transfer
    int group = 0;              // 0: take ga.group from the config
    std::filesystem::path pretrained;  // ensemble manifest for ga_transfer
};

// base: single model from the manifest's train/val splits -> model.ckpt.
// ensemble: 3 members with rotating hold-outs -> ensemble.json + members.
// ga_transfer: GA-specific transfer from --pretrained -> ensemble.json.
// Each run writes a per-member training-log CSV.
void cmd_train(const ExperimentConfig& config,
               const std::filesystem::path& manifest_path, const TrainOptions& options,
               const std::filesystem::path& out_dir);

struct EvalOptions {
    std::string split = "test";
    bool loo = false;
    std::optional<double> operating_fdh;  // e.g. 0.25 for 1 FD per 4 h
};

// Traces + report.json + roc.csv + detection_curve.csv (+ loo.csv).
void cmd_eval(const ExperimentConfig& config, const std::filesystem::path& model_path,
              const std::filesystem::path& manifest_path, const EvalOptions& options,
              const std::filesystem::path& out_dir);

// Alpha sweep on the validation manifest, selection, application to the test
// manifest: fusion_spec.json + sweep.csv + fused_report.json + traces.
void cmd_fuse(const ExperimentConfig& config, const std::filesystem::path& model_a,
              const std::filesystem::path& model_b,
              const std::filesystem::path& val_manifest_path,
              const std::filesystem::path& test_manifest_path,
              const std::filesystem::path& out_dir);

}  // namespace presda::cli
