// sda: preterm EEG seizure detection experiments.
//
// Subcommands: synth | train | eval | fuse | validate. Each command is
// reproducible from its JSON config plus --seed; SDA_THREADS caps the worker
// count. Errors are reported as one JSON object on stdout with exit code 1.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "presda/commands.hpp"

namespace {

using presda::cli::ExperimentConfig;

ExperimentConfig load_config(const std::string& config_path,
                             const std::optional<std::uint64_t>& seed,
                             const std::optional<int>& stride_s,
                             const std::optional<int>& smooth_width) {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig{}
                               : ExperimentConfig::from_json_file(config_path);
    if (seed) cfg.set_seed(*seed);
    if (stride_s) {
        cfg.infer.stride_s = *stride_s;
        cfg.explicit_keys.insert("infer.stride_s");
    }
    if (smooth_width) {
        cfg.infer.smooth_width = *smooth_width;
        cfg.explicit_keys.insert("infer.smooth_width");
    }
    cfg.validate();
    return cfg;
}

double parse_operating_point(const std::string& s) {
    if (s.rfind("fdh=", 0) != 0)
        throw CLI::ValidationError("--operating-point expects fdh=<value>");
    return std::stod(s.substr(4));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"preterm EEG seizure detection pipeline"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> stride_s, smooth_width;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--seed", seed, "seed override");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    add_common(synth);
    synth->add_option("--out", out_dir, "output directory")->required();

    // validate
    auto* validate = app.add_subcommand("validate", "check a dataset manifest");
    validate->add_option("--manifest", manifest_path, "manifest JSON")->required();
    std::vector<std::string> required_splits;
    validate->add_option("--require-splits", required_splits,
                         "splits that must be non-empty");

    // train
    auto* train = app.add_subcommand("train", "train models");
    add_common(train);
    presda::cli::TrainOptions train_opts;
    std::string pretrained_path;
    train->add_option("--manifest", manifest_path, "manifest JSON")->required();
    train->add_option("--mode", train_opts.mode, "base | ensemble | ga_transfer");
    train->add_option("--group", train_opts.group, "GA group (1..3) for ga_transfer")
        ->check(CLI::Range(1, 3));
    train->add_option("--pretrained", pretrained_path,
                      "pretrained ensemble manifest for ga_transfer");
    train->add_option("--out", out_dir, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a model on a manifest split");
    add_common(eval);
    presda::cli::EvalOptions eval_opts;
    std::string model_path, operating_point;
    eval->add_option("--checkpoint", model_path,
                     "model checkpoint (.ckpt) or ensemble manifest (.json)")
        ->required();
    eval->add_option("--manifest", manifest_path, "manifest JSON")->required();
    eval->add_option("--split", eval_opts.split, "manifest split to evaluate");
    eval->add_option("--stride-s", stride_s, "inference stride in seconds");
    eval->add_option("--smooth-width", smooth_width, "moving-average width (windows)");
    eval->add_flag("--loo", eval_opts.loo, "leave-one-record-out AUC table");
    eval->add_option("--operating-point", operating_point,
                     "report detection rate at a FD/h budget, e.g. fdh=0.25");
    eval->add_option("--out", out_dir, "output directory")->required();

    // fuse
    auto* fuse = app.add_subcommand("fuse", "select and apply classifier fusion");
    add_common(fuse);
    std::string model_a, model_b, val_manifest, test_manifest;
    fuse->add_option("--checkpoint-a", model_a, "first classifier")->required();
    fuse->add_option("--checkpoint-b", model_b, "second classifier")->required();
    fuse->add_option("--val-manifest", val_manifest, "validation manifest")->required();
    fuse->add_option("--test-manifest", test_manifest, "test manifest")->required();
    fuse->add_option("--stride-s", stride_s, "inference stride in seconds");
    fuse->add_option("--smooth-width", smooth_width, "moving-average width (windows)");
    fuse->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            presda::cli::cmd_synth(load_config(config_path, seed, stride_s, smooth_width),
                                   out_dir);
        } else if (validate->parsed()) {
            const auto report = presda::cli::cmd_validate(manifest_path, required_splits);
            nlohmann::json j;
            j["entries_checked"] = report.entries_checked;
            j["failures"] = nlohmann::json::array();
            for (const auto& f : report.failures)
                j["failures"].push_back({{"entry", f.entry_index},
                                         {"path", f.path},
                                         {"reason", f.reason}});
            std::cout << j.dump(2) << "\n";
            return report.ok() ? 0 : 1;
        } else if (train->parsed()) {
            train_opts.pretrained = pretrained_path;
            presda::cli::cmd_train(load_config(config_path, seed, stride_s, smooth_width),
                                   manifest_path, train_opts, out_dir);
        } else if (eval->parsed()) {
            if (!operating_point.empty())
                eval_opts.operating_fdh = parse_operating_point(operating_point);
            presda::cli::cmd_eval(load_config(config_path, seed, stride_s, smooth_width),
                                  model_path, manifest_path, eval_opts, out_dir);
        } else if (fuse->parsed()) {
            presda::cli::cmd_fuse(load_config(config_path, seed, stride_s, smooth_width),
                                  model_a, model_b, val_manifest, test_manifest, out_dir);
        }
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cout << err.dump() << "\n";
        return 1;
    }
    return 0;
}
