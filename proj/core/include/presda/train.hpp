#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "presda/checkpoint.hpp"
#include "presda/dsp.hpp"
#include "presda/eeg_io.hpp"
#include "presda/net.hpp"

namespace presda::train {

struct TrainConfig {
    double lr = 0.01;
    double momentum = 0.9;
    int batch_size = 64;
    int patience_epochs = 8;
    int max_epochs = 50;
    bool use_lars = false;
    double lars_trust = 1.0;         // Eq.-1 form has no trust coefficient
    double lars_trust_floor = 1e-8;  // guards the gradient-norm division
    std::uint64_t seed = 0;
    double seizure_oversample_ratio = 0.25;  // target pos:neg, 0 disables
    int stride_s = 1;
    double edge_guard_s = 2.0;
    double label_overlap_threshold = 0.5;
    int val_holdout = 3;  // held-out records per member (GA runs use 2)
    int feature_maps = net::kDefaultFeatureMaps;

    void validate() const;
};

// GA groups 1..3 split the gestational-age line at 26 and 29 weeks.
struct GaGroup {
    int group_id = 1;
    double lower_weeks = -std::numeric_limits<double>::infinity();
    double upper_weeks = 26.0;
    double decay_span_weeks = 4.0;

    static GaGroup by_id(int id, double decay_span_weeks = 4.0);
};

// 1.0 inside the group's GA interval, linear decay to 0 over
// decay_span_weeks outside it.
double ga_membership_weight(double ga_weeks, const GaGroup& group);

// -sum_i w_i log(p_i[label_i] + 1e-12) / sum_i w_i
double weighted_cross_entropy(std::span<const std::array<double, 2>> probs,
                              std::span<const int> labels,
                              std::span<const double> weights);

// Eq.-1 scaling, in place: g <- trust * (||w|| / max(||g||, floor)) * g.
// A zero-norm weight tensor yields a zero update, as the ratio dictates.
void lars_scale(const std::vector<double>& weights, std::vector<double>& grads,
                double trust, double floor);

// SGD with momentum: v <- momentum*v + g; w <- w - lr*v. LARS scaling, when
// enabled, is applied per tensor before the momentum update.
class SgdMomentum {
public:
    SgdMomentum(const net::NetworkParams& shape, const TrainConfig& config);
    void step(net::NetworkParams& params, net::ParamGrads& grads);

private:
    TrainConfig cfg_;
    net::ParamGrads velocity_;
};

// Stops when the validation AUC has not strictly improved for `patience`
// consecutive epochs.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    // call once per epoch; true if this epoch is a new best
    bool observe(double val_auc) {
        ++epoch_;
        if (val_auc > best_) {
            best_ = val_auc;
            best_epoch_ = epoch_;
            since_best_ = 0;
            return true;
        }
        ++since_best_;
        return false;
    }
    bool should_stop() const { return since_best_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best() const { return best_; }

private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    int since_best_ = 0;
    double best_ = -1.0;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_auc = 0.0;
    double lr = 0.0;
    bool stopped = false;
};

struct TrainResult {
    ModelCheckpoint checkpoint;
    std::vector<EpochLog> log;
};

// Epoch loop with deterministic shuffling, optional seizure-window
// oversampling, per-epoch concatenated validation AUC (raw probabilities)
// and early stopping; returns the best-AUC parameters. Train and validation
// batches must come from disjoint records.
TrainResult train_model(const std::vector<dsp::WindowBatch>& train_windows,
                        const std::vector<dsp::WindowBatch>& val_windows,
                        const TrainConfig& config, const net::NetworkParams& init);

// Records of one manifest split, resampled to 32 Hz with annotations bound.
struct Dataset {
    std::vector<eeg::EegRecord> records;

    static Dataset load(const eeg::DatasetManifest& manifest,
                        const std::string& split_tag);
    std::size_t seizure_record_count() const;
};

// Three training runs, each with a different held-out validation record set
// and a derived seed; every member sees the remaining records.
EnsembleModel train_ensemble(const Dataset& data, const TrainConfig& config,
                             std::vector<TrainResult>* results = nullptr);

// Copy of the pretrained parameters (all layers trainable, optimizer state
// fresh). Throws if the architecture hash differs from the expected one.
net::NetworkParams transfer_init(const ModelCheckpoint& pretrained,
                                 std::uint64_t expected_arch_hash);

// GA-specific transfer: member k starts from pretrained member k, every
// record participates with the group's membership weight multiplied into the
// window weights, LARS is enabled by the caller's config, and validation
// holds out in-group seizure records (val_holdout per member).
EnsembleModel train_ga_specific(const Dataset& data, const GaGroup& group,
                                const EnsembleModel& pretrained,
                                const TrainConfig& config,
                                std::vector<TrainResult>* results = nullptr);

// Deterministic sub-seed for member/record streams.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace presda::train
