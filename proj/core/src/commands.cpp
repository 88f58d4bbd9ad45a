#include "presda/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "presda/checkpoint.hpp"
#include "presda/infer.hpp"
#include "presda/metrics.hpp"
#include "presda/synth.hpp"

namespace presda::cli {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
    if (!os) throw std::runtime_error("I/O failure writing " + path.string());
}

void write_run_stamp(const fs::path& out_dir, const std::string& command,
                     const ExperimentConfig& config) {
    json j;
    j["command"] = command;
    j["config_hash"] = config.config_hash();
    j["config"] = json::parse(config.canonical_json());
    write_text(out_dir / "run.json", j.dump(2) + "\n");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_train_log(const fs::path& path, const std::vector<train::EpochLog>& log) {
    std::string csv = "epoch,train_loss,val_auc,lr,stopped\n";
    for (const auto& row : log)
        csv += std::to_string(row.epoch) + "," + fmt(row.train_loss) + "," +
               fmt(row.val_auc) + "," + fmt(row.lr) + "," +
               (row.stopped ? "1" : "0") + "\n";
    write_text(path, csv);
}

void write_trace_csv(const fs::path& path,
                     const std::vector<const infer::ProbabilityTrace*>& stages) {
    std::string csv = "time_s,prob,stage\n";
    for (const auto* t : stages)
        for (std::size_t i = 0; i < t->size(); ++i)
            csv += fmt(t->start_times_s[i]) + "," + fmt(t->probs[i]) + "," +
                   infer::to_string(t->stage) + "\n";
    write_text(path, csv);
}

// weak labels on the same window grid the traces use
std::vector<int> trace_labels(const eeg::EegRecord& rec32, int stride_s,
                              double overlap_threshold) {
    dsp::WindowBatch batch = dsp::segment(rec32, stride_s);
    dsp::assign_weak_labels(batch, rec32.annotations, overlap_threshold);
    return batch.labels;
}

struct TracedRecord {
    const eeg::EegRecord* record = nullptr;
    infer::ProbabilityTrace raw;
    infer::ProbabilityTrace smoothed;
    std::vector<int> labels;
};

std::vector<TracedRecord> trace_dataset(const train::Dataset& data,
                                        const train::EnsembleModel& model,
                                        const ExperimentConfig& config) {
    std::vector<TracedRecord> out;
    out.reserve(data.records.size());
    for (const auto& rec : data.records) {
        TracedRecord tr;
        tr.record = &rec;
        tr.raw = infer::predict_trace(model, rec, config.infer.stride_s,
                                      config.train.batch_size);
        tr.smoothed = infer::moving_average(tr.raw, config.infer.smooth_width);
        tr.labels = trace_labels(rec, config.infer.stride_s,
                                 config.train.label_overlap_threshold);
        out.push_back(std::move(tr));
    }
    return out;
}

std::vector<double> linspace01(int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = static_cast<double>(i) / (n - 1);
    return v;
}

json auc_or_reason(const std::vector<metrics::RecordScores>& scores) {
    json j;
    try {
        j["auc"] = metrics::auc_concat(scores);
    } catch (const std::invalid_argument& e) {
        j["auc"] = nullptr;
        j["auc_reason"] = e.what();
    }
    return j;
}

}  // namespace

void cmd_synth(const ExperimentConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    synth::generate_cohort(config.synth, out_dir);
    write_run_stamp(out_dir, "synth", config);
}

eeg::ManifestReport cmd_validate(const fs::path& manifest_path,
                                 const std::vector<std::string>& required_splits) {
    const eeg::DatasetManifest manifest = eeg::load_manifest(manifest_path);
    return eeg::validate_manifest(manifest, required_splits);
}

void cmd_train(const ExperimentConfig& config, const fs::path& manifest_path,
               const TrainOptions& options, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const eeg::DatasetManifest manifest = eeg::load_manifest(manifest_path);
    const std::string hash = config.config_hash();

    if (options.mode == "base") {
        train::Dataset train_data = train::Dataset::load(manifest, "train");
        train::Dataset val_data = train::Dataset::load(manifest, "val");

        std::vector<dsp::WindowBatch> train_batches, val_batches;
        for (const auto& rec : train_data.records) {
            dsp::WindowBatch b = dsp::segment(rec, config.train.stride_s);
            dsp::assign_weak_labels(b, rec.annotations,
                                    config.train.label_overlap_threshold);
            dsp::apply_edge_guard(b, rec.duration_s(), config.train.edge_guard_s);
            train_batches.push_back(std::move(b));
        }
        for (const auto& rec : val_data.records) {
            dsp::WindowBatch b = dsp::segment(rec, config.train.stride_s);
            dsp::assign_weak_labels(b, rec.annotations,
                                    config.train.label_overlap_threshold);
            val_batches.push_back(std::move(b));
        }
        const net::NetworkParams init =
            net::init_params(config.train.seed, config.train.feature_maps);
        train::TrainResult res =
            train::train_model(train_batches, val_batches, config.train, init);
        res.checkpoint.meta.config_hash = hash;
        train::save_checkpoint(res.checkpoint, out_dir / "model.ckpt");
        write_train_log(out_dir / "train_log.csv", res.log);
    } else if (options.mode == "ensemble" || options.mode == "ga_transfer") {
        train::Dataset data = train::Dataset::load(manifest, "train");
        train::TrainConfig tc = config.train;
        std::vector<train::TrainResult> results;
        train::EnsembleModel ensemble;

        if (options.mode == "ensemble") {
            ensemble = train::train_ensemble(data, tc, &results);
        } else {
            if (options.pretrained.empty())
                throw std::invalid_argument(
                    "train: mode ga_transfer requires --pretrained");
            const int group_id = options.group > 0 ? options.group : config.ga_group;
            const train::GaGroup group =
                train::GaGroup::by_id(group_id, config.ga_decay_span_weeks);
            // the GA protocol defaults: LARS on, two held-out records
            if (!config.was_set("train.use_lars")) tc.use_lars = true;
            if (!config.was_set("train.val_holdout")) tc.val_holdout = 2;
            const train::EnsembleModel pretrained =
                train::load_ensemble(options.pretrained);
            ensemble = train::train_ga_specific(data, group, pretrained, tc, &results);
        }
        for (auto& m : ensemble.members) m.meta.config_hash = hash;
        train::save_ensemble(ensemble, out_dir / "ensemble.json");
        for (std::size_t i = 0; i < results.size(); ++i)
            write_train_log(out_dir / ("train_log_member" + std::to_string(i) + ".csv"),
                            results[i].log);
    } else {
        throw std::invalid_argument("train: unknown mode '" + options.mode +
                                    "' (base | ensemble | ga_transfer)");
    }
    write_run_stamp(out_dir, "train:" + options.mode, config);
}

void cmd_eval(const ExperimentConfig& config, const fs::path& model_path,
              const fs::path& manifest_path, const EvalOptions& options,
              const fs::path& out_dir) {
    fs::create_directories(out_dir / "traces");
    const eeg::DatasetManifest manifest = eeg::load_manifest(manifest_path);
    const train::EnsembleModel model = train::load_model_any(model_path);
    const train::Dataset data = train::Dataset::load(manifest, options.split);

    const auto traced = trace_dataset(data, model, config);
    const double min_event_s = config.eval.min_event_s > 0.0
                                   ? config.eval.min_event_s
                                   : static_cast<double>(config.infer.stride_s);

    std::vector<metrics::RecordScores> smoothed_scores, raw_scores;
    std::vector<infer::ProbabilityTrace> smoothed_traces;
    std::vector<eeg::AnnotationSet> truths;
    std::vector<double> hours;
    std::vector<double> all_probs;
    std::vector<int> all_labels;
    for (const auto& tr : traced) {
        smoothed_scores.push_back(
            {tr.record->record_id, tr.smoothed.probs, tr.labels});
        raw_scores.push_back({tr.record->record_id, tr.raw.probs, tr.labels});
        smoothed_traces.push_back(tr.smoothed);
        truths.push_back(tr.record->annotations);
        hours.push_back(tr.record->duration_s() / 3600.0);
        all_probs.insert(all_probs.end(), tr.smoothed.probs.begin(),
                         tr.smoothed.probs.end());
        all_labels.insert(all_labels.end(), tr.labels.begin(), tr.labels.end());
        write_trace_csv(out_dir / "traces" / (tr.record->record_id + ".csv"),
                        {&tr.raw, &tr.smoothed});
    }

    json report;
    report["config_hash"] = config.config_hash();
    report["model"] = model_path.string();
    report["split"] = options.split;
    report["n_records"] = traced.size();
    report["n_windows"] = all_labels.size();
    report.update(auc_or_reason(smoothed_scores));
    {
        json raw = auc_or_reason(raw_scores);
        report["auc_raw"] = raw["auc"];
    }

    const auto counts =
        metrics::confusion(all_probs, all_labels, config.eval.threshold);
    report["threshold"] = config.eval.threshold;
    report["confusion"] = {{"tp", counts.tp},
                           {"fp", counts.fp},
                           {"tn", counts.tn},
                           {"fn", counts.fn}};
    if (auto s = metrics::sensitivity(counts)) report["sensitivity"] = *s;
    else report["sensitivity"] = nullptr;
    if (auto s = metrics::specificity(counts)) report["specificity"] = *s;
    else report["specificity"] = nullptr;

    // ROC over the concatenated smoothed windows
    if (report["auc"].is_number()) {
        const auto roc =
            metrics::roc_curve(all_probs, all_labels, config.eval.n_roc_thresholds);
        std::string csv = "threshold,sensitivity,one_minus_specificity\n";
        for (const auto& p : roc.points)
            csv += fmt(p.threshold) + "," + fmt(p.sensitivity) + "," +
                   fmt(p.one_minus_specificity) + "\n";
        write_text(out_dir / "roc.csv", csv);
    }

    // event-based detection curve (needs at least one true event)
    long long true_events = 0;
    for (const auto& t : truths) true_events += static_cast<long long>(t.size());
    if (true_events > 0) {
        const auto thresholds = linspace01(config.eval.n_curve_thresholds);
        const auto curve =
            metrics::detection_curve(smoothed_traces, truths, hours, thresholds,
                                     min_event_s, !config.eval.macro_average);
        std::string csv = "threshold,fd_per_hour,detection_rate\n";
        for (const auto& p : curve)
            csv += fmt(p.threshold) + "," + fmt(p.fd_per_hour) + "," +
                   fmt(p.detection_rate) + "\n";
        write_text(out_dir / "detection_curve.csv", csv);

        if (options.operating_fdh) {
            const double budget = *options.operating_fdh;
            const metrics::DetectionPoint* best = nullptr;
            for (const auto& p : curve)
                if (p.fd_per_hour <= budget &&
                    (!best || p.detection_rate > best->detection_rate))
                    best = &p;
            json op;
            op["requested_fd_per_hour"] = budget;
            if (best) {
                op["threshold"] = best->threshold;
                op["detection_rate"] = best->detection_rate;
                op["fd_per_hour"] = best->fd_per_hour;
                std::printf("detection rate at <= %s FD/h: %.1f%% (threshold %s)\n",
                            fmt(budget).c_str(), 100.0 * best->detection_rate,
                            fmt(best->threshold).c_str());
            } else {
                op["detection_rate"] = nullptr;
            }
            report["operating_point"] = op;
        }
    } else {
        report["event_metrics"] = nullptr;
        report["event_metrics_reason"] = "no true seizure events in this split";
    }

    if (options.loo) {
        const auto loo = metrics::leave_one_out(smoothed_scores);
        std::string csv = "excluded_record,auc\n";
        json jloo = json::array();
        for (const auto& e : loo) {
            csv += e.record_id + "," + (e.auc ? fmt(*e.auc) : "NA") + "\n";
            jloo.push_back({{"excluded_record", e.record_id},
                            {"auc", e.auc ? json(*e.auc) : json(nullptr)}});
        }
        write_text(out_dir / "loo.csv", csv);
        report["leave_one_out"] = jloo;
    }

    write_text(out_dir / "report.json", report.dump(2) + "\n");
    write_run_stamp(out_dir, "eval", config);
}

void cmd_fuse(const ExperimentConfig& config, const fs::path& model_a,
              const fs::path& model_b, const fs::path& val_manifest_path,
              const fs::path& test_manifest_path, const fs::path& out_dir) {
    fs::create_directories(out_dir / "traces");
    const train::EnsembleModel a = train::load_model_any(model_a);
    const train::EnsembleModel b = train::load_model_any(model_b);

    // validation manifests may carry a dedicated "val" split; otherwise all
    // entries are treated as validation records
    const eeg::DatasetManifest val_manifest = eeg::load_manifest(val_manifest_path);
    const bool has_val_split = !val_manifest.split("val").empty();
    const train::Dataset val_data =
        train::Dataset::load(val_manifest, has_val_split ? "val" : "*");

    // alpha selection runs on raw (unsmoothed) validation traces
    std::vector<std::vector<infer::ProbabilityTrace>> val_traces(2);
    std::vector<std::vector<int>> val_labels;
    for (const auto& rec : val_data.records) {
        val_traces[0].push_back(infer::predict_trace(a, rec, config.infer.stride_s,
                                                     config.train.batch_size));
        val_traces[1].push_back(infer::predict_trace(b, rec, config.infer.stride_s,
                                                     config.train.batch_size));
        val_labels.push_back(trace_labels(rec, config.infer.stride_s,
                                          config.train.label_overlap_threshold));
    }
    const infer::FusionSelection sel =
        infer::select_fusion(val_traces, val_labels, config.fusion.grid_step);

    std::string sweep_csv = "alpha,method,val_auc\n";
    for (const auto& row : sel.sweep)
        sweep_csv += fmt(row.alpha) + std::string(",") + infer::to_string(row.method) +
                     "," + fmt(row.val_auc) + "\n";
    write_text(out_dir / "sweep.csv", sweep_csv);

    json spec_json;
    spec_json["method"] = infer::to_string(sel.spec.method);
    spec_json["alphas"] = sel.spec.alphas;
    spec_json["val_auc"] = sel.val_auc;
    spec_json["config_hash"] = config.config_hash();
    write_text(out_dir / "fusion_spec.json", spec_json.dump(2) + "\n");

    // apply to the test manifest: smooth each classifier then fuse, unless
    // configured the other way round
    const eeg::DatasetManifest test_manifest = eeg::load_manifest(test_manifest_path);
    const bool has_test_split = !test_manifest.split("test").empty();
    const train::Dataset test_data =
        train::Dataset::load(test_manifest, has_test_split ? "test" : "*");

    std::vector<metrics::RecordScores> fused_scores;
    for (const auto& rec : test_data.records) {
        infer::ProbabilityTrace ta = infer::predict_trace(a, rec, config.infer.stride_s,
                                                          config.train.batch_size);
        infer::ProbabilityTrace tb = infer::predict_trace(b, rec, config.infer.stride_s,
                                                          config.train.batch_size);
        infer::ProbabilityTrace fused;
        if (config.infer.fuse_before_smooth) {
            fused = infer::moving_average(infer::fuse({ta, tb}, sel.spec),
                                          config.infer.smooth_width);
        } else {
            fused = infer::fuse({infer::moving_average(ta, config.infer.smooth_width),
                                 infer::moving_average(tb, config.infer.smooth_width)},
                                sel.spec);
        }
        fused_scores.push_back({rec.record_id, fused.probs,
                                trace_labels(rec, config.infer.stride_s,
                                             config.train.label_overlap_threshold)});
        write_trace_csv(out_dir / "traces" / (rec.record_id + ".csv"), {&fused});
    }

    json report;
    report["config_hash"] = config.config_hash();
    report["method"] = infer::to_string(sel.spec.method);
    report["alphas"] = sel.spec.alphas;
    report["val_auc"] = sel.val_auc;
    // endpoint AUCs of the sweep = single-classifier validation AUCs
    for (const auto& row : sel.sweep) {
        if (row.method != infer::FusionMethod::Arithmetic) continue;
        if (row.alpha == 1.0) report["val_auc_classifier_a"] = row.val_auc;
        if (row.alpha == 0.0) report["val_auc_classifier_b"] = row.val_auc;
    }
    report.update(auc_or_reason(fused_scores));
    report["test_auc"] = report["auc"];
    report.erase("auc");
    write_text(out_dir / "fused_report.json", report.dump(2) + "\n");
    write_run_stamp(out_dir, "fuse", config);
}

}  // namespace presda::cli
