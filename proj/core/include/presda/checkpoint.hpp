#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "presda/net.hpp"

namespace presda::train {

struct CheckpointMeta {
    double val_auc = 0.0;
    int epoch = 0;
    std::vector<std::string> val_record_ids;
    std::uint64_t seed = 0;
    std::string config_hash;
};

struct ModelCheckpoint {
    net::NetworkParams params;
    CheckpointMeta meta;
};

// Checkpoint file: one JSON manifest line (architecture hash, tensor names
// and shapes in serialization order, training metadata) followed by the
// concatenated little-endian float32 tensor blob in that order.
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

struct EnsembleModel {
    std::vector<ModelCheckpoint> members;

    // exactly three members with pairwise different validation sets
    void validate() const;
};

// Ensemble manifest: JSON {members: [relative checkpoint paths], ...}.
// Member files are written next to the manifest as <stem>_member<k>.ckpt.
void save_ensemble(const EnsembleModel& ensemble, const std::filesystem::path& manifest_path);
EnsembleModel load_ensemble(const std::filesystem::path& manifest_path);

// Loads either a single checkpoint (.ckpt) or an ensemble manifest (.json)
// into the uniform ensemble shape (single model = one member).
EnsembleModel load_model_any(const std::filesystem::path& path);

}  // namespace presda::train
