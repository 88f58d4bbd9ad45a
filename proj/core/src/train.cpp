#include "presda/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

#include "presda/metrics.hpp"
#include "presda/rng.hpp"

namespace presda::train {

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
    return Rng(seed, tag).next_u64();
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("train: momentum must be in [0, 1)");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (patience_epochs < 1)
        throw std::invalid_argument("train: patience_epochs must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
    if (seizure_oversample_ratio < 0.0)
        throw std::invalid_argument("train: oversample ratio must be >= 0");
    if (stride_s < 1 || stride_s > dsp::kWindowSeconds)
        throw std::invalid_argument("train: stride_s must be 1..8");
    if (edge_guard_s < 0.0)
        throw std::invalid_argument("train: edge_guard_s must be >= 0");
    if (label_overlap_threshold < 0.0 || label_overlap_threshold > 1.0)
        throw std::invalid_argument("train: label_overlap_threshold must be in [0, 1]");
    if (val_holdout < 1) throw std::invalid_argument("train: val_holdout must be >= 1");
    if (feature_maps < 1 || feature_maps > 64)
        throw std::invalid_argument("train: feature_maps out of range");
    if (lars_trust_floor <= 0.0)
        throw std::invalid_argument("train: lars_trust_floor must be > 0");
}

GaGroup GaGroup::by_id(int id, double decay_span_weeks) {
    if (decay_span_weeks <= 0.0)
        throw std::invalid_argument("ga group: decay span must be > 0");
    GaGroup g;
    g.group_id = id;
    g.decay_span_weeks = decay_span_weeks;
    switch (id) {
        case 1:
            g.lower_weeks = -std::numeric_limits<double>::infinity();
            g.upper_weeks = 26.0;
            break;
        case 2:
            g.lower_weeks = 26.0;
            g.upper_weeks = 29.0;
            break;
        case 3:
            g.lower_weeks = 29.0;
            g.upper_weeks = std::numeric_limits<double>::infinity();
            break;
        default:
            throw std::invalid_argument("ga group: id must be 1, 2 or 3");
    }
    return g;
}

double ga_membership_weight(double ga_weeks, const GaGroup& group) {
    double d = 0.0;
    if (ga_weeks < group.lower_weeks)
        d = group.lower_weeks - ga_weeks;
    else if (ga_weeks > group.upper_weeks)
        d = ga_weeks - group.upper_weeks;
    else
        return 1.0;
    return std::max(0.0, 1.0 - d / group.decay_span_weeks);
}

double weighted_cross_entropy(std::span<const std::array<double, 2>> probs,
                              std::span<const int> labels,
                              std::span<const double> weights) {
    if (probs.size() != labels.size() || probs.size() != weights.size())
        throw std::invalid_argument("weighted_cross_entropy: size mismatch");
    double loss = 0.0, total_w = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (weights[i] < 0.0)
            throw std::invalid_argument("weighted_cross_entropy: negative weight");
        loss += weights[i] * -std::log(probs[i][labels[i]] + 1e-12);
        total_w += weights[i];
    }
    return total_w > 0.0 ? loss / total_w : 0.0;
}

void lars_scale(const std::vector<double>& weights, std::vector<double>& grads,
                double trust, double floor) {
    double wn = 0.0, gn = 0.0;
    for (double w : weights) wn += w * w;
    for (double g : grads) gn += g * g;
    wn = std::sqrt(wn);
    gn = std::sqrt(gn);
    const double factor = trust * wn / std::max(gn, floor);
    for (double& g : grads) g *= factor;
}

SgdMomentum::SgdMomentum(const net::NetworkParams& shape, const TrainConfig& config)
    : cfg_(config), velocity_(net::ParamGrads::zeros_like(shape)) {}

void SgdMomentum::step(net::NetworkParams& params, net::ParamGrads& grads) {
    auto update = [&](std::vector<double>& w, std::vector<double>& g,
                      std::vector<double>& v) {
        if (cfg_.use_lars)
            lars_scale(w, g, cfg_.lars_trust, cfg_.lars_trust_floor);
        for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = cfg_.momentum * v[i] + g[i];
            w[i] -= cfg_.lr * v[i];
        }
    };
    for (std::size_t i = 0; i < params.convs.size(); ++i) {
        update(params.convs[i].w, grads.convs[i].w, velocity_.convs[i].w);
        update(params.convs[i].b, grads.convs[i].b, velocity_.convs[i].b);
    }
    for (std::size_t i = 0; i < params.bns.size(); ++i) {
        update(params.bns[i].gamma, grads.bns[i].gamma, velocity_.bns[i].gamma);
        update(params.bns[i].beta, grads.bns[i].beta, velocity_.bns[i].beta);
    }
}

namespace {

// Windows of several batches addressed by (batch, window).
struct WindowRef {
    std::uint32_t batch = 0;
    std::uint32_t window = 0;
};

std::vector<double> predict_probs(const net::NetworkParams& params,
                                  const dsp::WindowBatch& windows, int batch_size) {
    const int n_channels = static_cast<int>(windows.n_channels);
    const std::size_t n = windows.size();
    std::vector<double> probs(n);
    for (std::size_t w0 = 0; w0 < n; w0 += batch_size) {
        const std::size_t w1 = std::min(n, w0 + batch_size);
        const int batch = static_cast<int>(w1 - w0);
        net::Tensor3 stacked(batch * n_channels, dsp::kWindowSamples, 1);
        std::memcpy(stacked.d.data(), windows.window(w0),
                    stacked.size() * sizeof(double));
        const auto out = net::model_forward_batch(params, stacked, n_channels,
                                                  net::Mode::Infer);
        std::copy(out.seizure_probs.begin(), out.seizure_probs.end(),
                  probs.begin() + static_cast<std::ptrdiff_t>(w0));
    }
    return probs;
}

double validation_auc(const net::NetworkParams& params,
                      const std::vector<dsp::WindowBatch>& val_windows,
                      int batch_size) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& batch : val_windows) {
        const auto probs = predict_probs(params, batch, batch_size);
        scores.insert(scores.end(), probs.begin(), probs.end());
        labels.insert(labels.end(), batch.labels.begin(), batch.labels.end());
    }
    try {
        return metrics::auc_concat(scores, labels);
    } catch (const std::invalid_argument&) {
        throw std::runtime_error(
            "validation AUC undefined: hold-out windows contain a single class");
    }
}

}  // namespace

TrainResult train_model(const std::vector<dsp::WindowBatch>& train_windows,
                        const std::vector<dsp::WindowBatch>& val_windows,
                        const TrainConfig& config, const net::NetworkParams& init) {
    config.validate();
    if (train_windows.empty())
        throw std::invalid_argument("train_model: no training records");
    if (val_windows.empty())
        throw std::invalid_argument("train_model: empty validation set");

    std::set<std::string> train_ids, val_ids;
    for (const auto& b : train_windows) train_ids.insert(b.record_id);
    for (const auto& b : val_windows) {
        if (train_ids.count(b.record_id))
            throw std::invalid_argument("train_model: record '" + b.record_id +
                                        "' appears in both train and val");
        val_ids.insert(b.record_id);
    }
    const std::size_t n_channels = train_windows.front().n_channels;
    for (const auto* set : {&train_windows, &val_windows})
        for (const auto& b : *set)
            if (b.n_channels != n_channels)
                throw std::invalid_argument(
                    "train_model: all records must share one channel count");

    // flatten; zero-weight windows are dropped so they cannot influence
    // batch statistics (exclusion is exactly equivalent for the loss)
    std::vector<WindowRef> base;
    std::vector<WindowRef> positives;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::uint32_t b = 0; b < train_windows.size(); ++b)
        for (std::uint32_t w = 0; w < train_windows[b].size(); ++w) {
            if (train_windows[b].sample_weights[w] <= 0.0) continue;
            base.push_back({b, w});
            if (train_windows[b].labels[w]) {
                positives.push_back({b, w});
                ++n_pos;
            } else {
                ++n_neg;
            }
        }
    if (base.empty())
        throw std::invalid_argument("train_model: no training windows with weight > 0");

    if (config.seizure_oversample_ratio > 0.0 && n_pos > 0 && n_neg > 0) {
        const auto target =
            static_cast<std::size_t>(std::llround(config.seizure_oversample_ratio *
                                                  static_cast<double>(n_neg)));
        for (std::size_t i = 0; n_pos + i < target; ++i)
            base.push_back(positives[i % positives.size()]);
    }

    net::NetworkParams params = init;
    SgdMomentum optimizer(params, config);
    EarlyStopper stopper(config.patience_epochs);

    TrainResult result;
    net::NetworkParams best_params = params;

    std::vector<std::size_t> order(base.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng rng(config.seed, 0xe90c + static_cast<std::uint64_t>(epoch));
        rng.shuffle(order);

        double loss_sum = 0.0, weight_sum = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const int batch = static_cast<int>(stop - start);

            net::Tensor3 stacked(batch * static_cast<int>(n_channels),
                                 dsp::kWindowSamples, 1);
            std::vector<int> labels(batch);
            std::vector<double> weights(batch);
            const std::size_t window_values =
                n_channels * static_cast<std::size_t>(dsp::kWindowSamples);
            for (int i = 0; i < batch; ++i) {
                const WindowRef ref = base[order[start + i]];
                const auto& wb = train_windows[ref.batch];
                std::memcpy(stacked.d.data() + i * window_values,
                            wb.window(ref.window), window_values * sizeof(double));
                labels[i] = wb.labels[ref.window];
                weights[i] = wb.sample_weights[ref.window];
            }
            double total_w = 0.0;
            for (double w : weights) total_w += w;

            net::ForwardCache cache;
            const auto out =
                net::model_forward_batch(params, stacked, static_cast<int>(n_channels),
                                         net::Mode::Train, &cache);
            loss_sum += weighted_cross_entropy(out.probs, labels, weights) * total_w;
            weight_sum += total_w;

            net::ParamGrads grads =
                net::model_backward_batch(params, cache, labels, weights);
            grads.scale(1.0 / total_w);
            if (!grads.all_finite())
                throw std::runtime_error(
                    "train_model: non-finite gradients at epoch " +
                    std::to_string(epoch) + ", batch starting at window " +
                    std::to_string(start) + "; aborting");
            optimizer.step(params, grads);
            net::update_running_stats(params, out.bn_stats);
        }

        const double val_auc = validation_auc(params, val_windows, config.batch_size);
        result.log.push_back({epoch, weight_sum > 0 ? loss_sum / weight_sum : 0.0,
                              val_auc, config.lr, false});
        if (stopper.observe(val_auc)) best_params = params;
        if (stopper.should_stop() || epoch == config.max_epochs) {
            result.log.back().stopped = true;
            break;
        }
    }

    result.checkpoint.params = std::move(best_params);
    result.checkpoint.meta.val_auc = stopper.best();
    result.checkpoint.meta.epoch = stopper.best_epoch();
    result.checkpoint.meta.seed = config.seed;
    result.checkpoint.meta.val_record_ids.assign(val_ids.begin(), val_ids.end());
    return result;
}

// ---- dataset / orchestration ----

Dataset Dataset::load(const eeg::DatasetManifest& manifest,
                      const std::string& split_tag) {
    Dataset data;
    for (const auto* entry : manifest.split(split_tag)) {
        eeg::EegRecord rec =
            entry->annotation_path.empty()
                ? eeg::load_record(manifest.resolve(entry->record_path))
                : eeg::load_record_with_annotations(
                      manifest.resolve(entry->record_path),
                      manifest.resolve(entry->annotation_path));
        if (std::abs(rec.ga_weeks - entry->ga_weeks) > 1e-6)
            throw std::runtime_error("dataset: manifest/record GA mismatch for " +
                                     rec.record_id);
        data.records.push_back(dsp::resample_to_32hz(rec));
    }
    if (data.records.empty())
        throw std::runtime_error("dataset: split '" + split_tag + "' is empty");
    return data;
}

std::size_t Dataset::seizure_record_count() const {
    std::size_t n = 0;
    for (const auto& r : records) n += !r.annotations.empty();
    return n;
}

namespace {

std::vector<std::string> shuffled_ids(const std::vector<const eeg::EegRecord*>& recs,
                                      Rng& rng) {
    std::vector<std::string> ids;
    ids.reserve(recs.size());
    for (const auto* r : recs) ids.push_back(r->record_id);
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    return ids;
}

// Three validation sets of k records each: every set holds at least one
// seizure record, every member's training remainder keeps one too.
std::vector<std::vector<std::string>> make_val_sets(const Dataset& data, int k,
                                                    Rng rng) {
    std::vector<const eeg::EegRecord*> seiz, ctrl;
    for (const auto& r : data.records)
        (r.annotations.empty() ? ctrl : seiz).push_back(&r);
    const int n = static_cast<int>(data.records.size());
    if (static_cast<int>(seiz.size()) < 3)
        throw std::invalid_argument(
            "train_ensemble: need at least 3 records with seizures to form 3 "
            "validation sets");
    if (n < k + 2)
        throw std::invalid_argument(
            "train_ensemble: too few records for the requested validation holdout");

    std::vector<std::string> s_ids = shuffled_ids(seiz, rng);
    std::vector<std::string> c_ids = shuffled_ids(ctrl, rng);

    std::vector<std::vector<std::string>> sets(3);
    if (n >= 3 * k + 1) {
        // disjoint sets, one seizure record seeded into each
        std::vector<std::string> pool(s_ids.begin() + 3, s_ids.end());
        pool.insert(pool.end(), c_ids.begin(), c_ids.end());
        rng.shuffle(pool);
        std::size_t pi = 0;
        for (int i = 0; i < 3; ++i) {
            sets[i].push_back(s_ids[i]);
            while (static_cast<int>(sets[i].size()) < k) sets[i].push_back(pool[pi++]);
        }
    } else {
        // rotation: sets share records but stay pairwise different
        std::vector<std::string> others(s_ids.begin() + 3, s_ids.end());
        others.insert(others.end(), c_ids.begin(), c_ids.end());
        rng.shuffle(others);
        if (static_cast<int>(others.size()) < k - 1)
            throw std::invalid_argument(
                "train_ensemble: too few records to form 3 distinct validation sets");
        for (int i = 0; i < 3; ++i) {
            sets[i].push_back(s_ids[i]);
            for (int j = 0; j < k - 1; ++j)
                sets[i].push_back(
                    others[(static_cast<std::size_t>(i) * (k - 1) + j) % others.size()]);
        }
    }
    return sets;
}

// GA runs validate on seizure records, in-group ones first.
std::vector<std::vector<std::string>> make_val_sets_ga(const Dataset& data,
                                                       const GaGroup& group, int k,
                                                       Rng rng) {
    std::vector<const eeg::EegRecord*> in_group, out_group;
    for (const auto& r : data.records) {
        if (r.annotations.empty()) continue;
        (ga_membership_weight(r.ga_weeks, group) == 1.0 ? in_group : out_group)
            .push_back(&r);
    }
    std::vector<std::string> cands = shuffled_ids(in_group, rng);
    if (cands.size() < 3) {
        const auto extra = shuffled_ids(out_group, rng);
        cands.insert(cands.end(), extra.begin(), extra.end());
    }
    if (cands.size() < 3)
        throw std::invalid_argument(
            "train_ga_specific: need at least 3 seizure records for validation sets");
    if (static_cast<std::size_t>(k) >= cands.size())
        throw std::invalid_argument(
            "train_ga_specific: too few seizure records for distinct validation sets");

    std::vector<std::vector<std::string>> sets(3);
    if (cands.size() >= static_cast<std::size_t>(3 * k)) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < k; ++j)
                sets[i].push_back(cands[static_cast<std::size_t>(i) * k + j]);
    } else {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < k; ++j)
                sets[i].push_back(cands[(static_cast<std::size_t>(i) + j) % cands.size()]);
    }
    return sets;
}

// Per-record window batches: guarded + optionally record-weighted for
// training, full windows for validation.
void build_member_batches(const Dataset& data,
                          const std::vector<std::string>& val_ids,
                          const TrainConfig& config,
                          const GaGroup* weight_group,
                          std::vector<dsp::WindowBatch>* train_out,
                          std::vector<dsp::WindowBatch>* val_out) {
    const std::set<std::string> val_set(val_ids.begin(), val_ids.end());
    for (const auto& rec : data.records) {
        dsp::WindowBatch batch = dsp::segment(rec, config.stride_s);
        dsp::assign_weak_labels(batch, rec.annotations, config.label_overlap_threshold);
        if (val_set.count(rec.record_id)) {
            val_out->push_back(std::move(batch));
            continue;
        }
        dsp::apply_edge_guard(batch, rec.duration_s(), config.edge_guard_s);
        if (weight_group) {
            const double w = ga_membership_weight(rec.ga_weeks, *weight_group);
            for (double& sw : batch.sample_weights) sw *= w;
        }
        train_out->push_back(std::move(batch));
    }
}

}  // namespace

EnsembleModel train_ensemble(const Dataset& data, const TrainConfig& config,
                             std::vector<TrainResult>* results) {
    config.validate();
    if (data.records.size() < 4)
        throw std::invalid_argument("train_ensemble: need at least 4 records");

    const auto sets =
        make_val_sets(data, config.val_holdout, Rng(config.seed, 0x5e75));

    EnsembleModel ensemble;
    for (int member = 0; member < 3; ++member) {
        TrainConfig member_cfg = config;
        member_cfg.seed = sub_seed(config.seed, 101 + static_cast<std::uint64_t>(member));

        std::vector<dsp::WindowBatch> train_batches, val_batches;
        build_member_batches(data, sets[member], member_cfg, nullptr, &train_batches,
                             &val_batches);
        const net::NetworkParams init =
            net::init_params(member_cfg.seed, config.feature_maps);
        TrainResult res = train_model(train_batches, val_batches, member_cfg, init);
        ensemble.members.push_back(res.checkpoint);
        if (results) results->push_back(std::move(res));
    }
    ensemble.validate();
    return ensemble;
}

net::NetworkParams transfer_init(const ModelCheckpoint& pretrained,
                                 std::uint64_t expected_arch_hash) {
    if (pretrained.params.arch_hash() != expected_arch_hash)
        throw std::invalid_argument(
            "transfer_init: architecture hash mismatch between pretrained model "
            "and target configuration");
    return pretrained.params;  // all layers stay trainable; optimizer state is fresh
}

EnsembleModel train_ga_specific(const Dataset& data, const GaGroup& group,
                                const EnsembleModel& pretrained,
                                const TrainConfig& config,
                                std::vector<TrainResult>* results) {
    config.validate();
    pretrained.validate();

    const auto sets =
        make_val_sets_ga(data, group, config.val_holdout, Rng(config.seed, 0x6a5e));
    const std::uint64_t want_hash = net::arch_hash_for(config.feature_maps);

    EnsembleModel ensemble;
    for (int member = 0; member < 3; ++member) {
        TrainConfig member_cfg = config;
        member_cfg.seed = sub_seed(config.seed, 201 + static_cast<std::uint64_t>(member));

        std::vector<dsp::WindowBatch> train_batches, val_batches;
        build_member_batches(data, sets[member], member_cfg, &group, &train_batches,
                             &val_batches);
        const net::NetworkParams init =
            transfer_init(pretrained.members[member], want_hash);
        TrainResult res = train_model(train_batches, val_batches, member_cfg, init);
        ensemble.members.push_back(res.checkpoint);
        if (results) results->push_back(std::move(res));
    }
    ensemble.validate();
    return ensemble;
}

}  // namespace presda::train
