#include "presda/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "presda/rng.hpp"

namespace presda::cli {

using nlohmann::json;

namespace {

double as_double(const json& j, const std::string& key) {
    if (!j.is_number()) throw std::invalid_argument("config: '" + key + "' must be a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& key) {
    if (!j.is_number_integer())
        throw std::invalid_argument("config: '" + key + "' must be an integer");
    return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& key) {
    if (!j.is_number_unsigned() && !j.is_number_integer())
        throw std::invalid_argument("config: '" + key + "' must be an integer");
    return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& key) {
    if (!j.is_boolean()) throw std::invalid_argument("config: '" + key + "' must be a boolean");
    return j.get<bool>();
}

using FieldMap = std::map<std::string, std::function<void(const json&)>>;

void parse_section(const json& j, const std::string& prefix, const FieldMap& fields,
                   std::set<std::string>& explicit_keys) {
    if (!j.is_object())
        throw std::invalid_argument("config: section '" + prefix + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto f = fields.find(it.key());
        if (f == fields.end())
            throw std::invalid_argument("config: unknown key '" + prefix + it.key() + "'");
        f->second(it.value());
        explicit_keys.insert(prefix + it.key());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config: root must be an object");

    ExperimentConfig c;
    auto& t = c.train;
    auto& s = c.synth;

    const FieldMap train_fields = {
        {"lr", [&](const json& v) { t.lr = as_double(v, "train.lr"); }},
        {"momentum", [&](const json& v) { t.momentum = as_double(v, "train.momentum"); }},
        {"batch_size", [&](const json& v) { t.batch_size = as_int(v, "train.batch_size"); }},
        {"patience_epochs",
         [&](const json& v) { t.patience_epochs = as_int(v, "train.patience_epochs"); }},
        {"max_epochs", [&](const json& v) { t.max_epochs = as_int(v, "train.max_epochs"); }},
        {"use_lars", [&](const json& v) { t.use_lars = as_bool(v, "train.use_lars"); }},
        {"lars_trust", [&](const json& v) { t.lars_trust = as_double(v, "train.lars_trust"); }},
        {"lars_trust_floor",
         [&](const json& v) { t.lars_trust_floor = as_double(v, "train.lars_trust_floor"); }},
        {"seizure_oversample_ratio",
         [&](const json& v) {
             t.seizure_oversample_ratio = as_double(v, "train.seizure_oversample_ratio");
         }},
        {"stride_s", [&](const json& v) { t.stride_s = as_int(v, "train.stride_s"); }},
        {"edge_guard_s",
         [&](const json& v) { t.edge_guard_s = as_double(v, "train.edge_guard_s"); }},
        {"label_overlap_threshold",
         [&](const json& v) {
             t.label_overlap_threshold = as_double(v, "train.label_overlap_threshold");
         }},
        {"val_holdout", [&](const json& v) { t.val_holdout = as_int(v, "train.val_holdout"); }},
        {"feature_maps",
         [&](const json& v) { t.feature_maps = as_int(v, "train.feature_maps"); }},
    };
    const FieldMap ga_fields = {
        {"group", [&](const json& v) { c.ga_group = as_int(v, "ga.group"); }},
        {"decay_span_weeks",
         [&](const json& v) { c.ga_decay_span_weeks = as_double(v, "ga.decay_span_weeks"); }},
    };
    const FieldMap infer_fields = {
        {"stride_s", [&](const json& v) { c.infer.stride_s = as_int(v, "infer.stride_s"); }},
        {"smooth_width",
         [&](const json& v) { c.infer.smooth_width = as_int(v, "infer.smooth_width"); }},
        {"fuse_before_smooth",
         [&](const json& v) {
             c.infer.fuse_before_smooth = as_bool(v, "infer.fuse_before_smooth");
         }},
    };
    const FieldMap eval_fields = {
        {"threshold", [&](const json& v) { c.eval.threshold = as_double(v, "eval.threshold"); }},
        {"n_roc_thresholds",
         [&](const json& v) { c.eval.n_roc_thresholds = as_int(v, "eval.n_roc_thresholds"); }},
        {"n_curve_thresholds",
         [&](const json& v) {
             c.eval.n_curve_thresholds = as_int(v, "eval.n_curve_thresholds");
         }},
        {"min_event_s",
         [&](const json& v) { c.eval.min_event_s = as_double(v, "eval.min_event_s"); }},
        {"macro_average",
         [&](const json& v) { c.eval.macro_average = as_bool(v, "eval.macro_average"); }},
    };
    const FieldMap fusion_fields = {
        {"grid_step",
         [&](const json& v) { c.fusion.grid_step = as_double(v, "fusion.grid_step"); }},
    };
    const FieldMap synth_fields = {
        {"n_infants", [&](const json& v) { s.n_infants = as_int(v, "synth.n_infants"); }},
        {"n_test", [&](const json& v) { s.n_test = as_int(v, "synth.n_test"); }},
        {"n_controls", [&](const json& v) { s.n_controls = as_int(v, "synth.n_controls"); }},
        {"ga_lo_weeks", [&](const json& v) { s.ga_lo_weeks = as_double(v, "synth.ga_lo_weeks"); }},
        {"ga_hi_weeks", [&](const json& v) { s.ga_hi_weeks = as_double(v, "synth.ga_hi_weeks"); }},
        {"fs_hz", [&](const json& v) { s.fs_hz = as_double(v, "synth.fs_hz"); }},
        {"n_channels", [&](const json& v) { s.n_channels = as_int(v, "synth.n_channels"); }},
        {"record_minutes",
         [&](const json& v) { s.record_minutes = as_double(v, "synth.record_minutes"); }},
        {"seizure_rate_per_hour",
         [&](const json& v) {
             s.seizure_rate_per_hour = as_double(v, "synth.seizure_rate_per_hour");
         }},
        {"short_seizure_fraction",
         [&](const json& v) {
             s.short_seizure_fraction = as_double(v, "synth.short_seizure_fraction");
         }},
        {"seizure_band_lo_hz",
         [&](const json& v) { s.seizure_band_lo_hz = as_double(v, "synth.seizure_band_lo_hz"); }},
        {"seizure_band_hi_hz",
         [&](const json& v) { s.seizure_band_hi_hz = as_double(v, "synth.seizure_band_hi_hz"); }},
        {"focal_channel_count",
         [&](const json& v) { s.focal_channel_count = as_int(v, "synth.focal_channel_count"); }},
    };

    for (auto it = root.begin(); it != root.end(); ++it) {
        const std::string& key = it.key();
        if (key == "seed") {
            c.seed = as_u64(it.value(), "seed");
            c.explicit_keys.insert("seed");
        } else if (key == "train") {
            parse_section(it.value(), "train.", train_fields, c.explicit_keys);
        } else if (key == "ga") {
            parse_section(it.value(), "ga.", ga_fields, c.explicit_keys);
        } else if (key == "infer") {
            parse_section(it.value(), "infer.", infer_fields, c.explicit_keys);
        } else if (key == "eval") {
            parse_section(it.value(), "eval.", eval_fields, c.explicit_keys);
        } else if (key == "fusion") {
            parse_section(it.value(), "fusion.", fusion_fields, c.explicit_keys);
        } else if (key == "synth") {
            parse_section(it.value(), "synth.", synth_fields, c.explicit_keys);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }

    c.train.seed = c.seed;
    c.synth.seed = c.seed;
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    train.seed = s;
    synth.seed = s;
    explicit_keys.insert("seed");
}

void ExperimentConfig::validate() const {
    train.validate();
    synth.validate();
    if (ga_group < 1 || ga_group > 3)
        throw std::invalid_argument("config: ga.group must be 1, 2 or 3");
    if (ga_decay_span_weeks <= 0.0)
        throw std::invalid_argument("config: ga.decay_span_weeks must be > 0");
    if (infer.stride_s < 1 || infer.stride_s > dsp::kWindowSeconds)
        throw std::invalid_argument("config: infer.stride_s must be 1..8");
    if (infer.smooth_width < 1 || infer.smooth_width % 2 == 0)
        throw std::invalid_argument("config: infer.smooth_width must be odd");
    if (eval.threshold < 0.0 || eval.threshold > 1.0)
        throw std::invalid_argument("config: eval.threshold must be in [0, 1]");
    if (eval.n_roc_thresholds < 2 || eval.n_curve_thresholds < 2)
        throw std::invalid_argument("config: threshold grids need >= 2 points");
    if (eval.min_event_s < 0.0)
        throw std::invalid_argument("config: eval.min_event_s must be >= 0");
    if (fusion.grid_step <= 0.0 || fusion.grid_step > 1.0)
        throw std::invalid_argument("config: fusion.grid_step must be in (0, 1]");
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["seed"] = seed;
    j["train"] = {{"lr", train.lr},
                  {"momentum", train.momentum},
                  {"batch_size", train.batch_size},
                  {"patience_epochs", train.patience_epochs},
                  {"max_epochs", train.max_epochs},
                  {"use_lars", train.use_lars},
                  {"lars_trust", train.lars_trust},
                  {"lars_trust_floor", train.lars_trust_floor},
                  {"seizure_oversample_ratio", train.seizure_oversample_ratio},
                  {"stride_s", train.stride_s},
                  {"edge_guard_s", train.edge_guard_s},
                  {"label_overlap_threshold", train.label_overlap_threshold},
                  {"val_holdout", train.val_holdout},
                  {"feature_maps", train.feature_maps}};
    j["ga"] = {{"group", ga_group}, {"decay_span_weeks", ga_decay_span_weeks}};
    j["infer"] = {{"stride_s", infer.stride_s},
                  {"smooth_width", infer.smooth_width},
                  {"fuse_before_smooth", infer.fuse_before_smooth}};
    j["eval"] = {{"threshold", eval.threshold},
                 {"n_roc_thresholds", eval.n_roc_thresholds},
                 {"n_curve_thresholds", eval.n_curve_thresholds},
                 {"min_event_s", eval.min_event_s},
                 {"macro_average", eval.macro_average}};
    j["fusion"] = {{"grid_step", fusion.grid_step}};
    j["synth"] = {{"n_infants", synth.n_infants},
                  {"n_test", synth.n_test},
                  {"n_controls", synth.n_controls},
                  {"ga_lo_weeks", synth.ga_lo_weeks},
                  {"ga_hi_weeks", synth.ga_hi_weeks},
                  {"fs_hz", synth.fs_hz},
                  {"n_channels", synth.n_channels},
                  {"record_minutes", synth.record_minutes},
                  {"seizure_rate_per_hour", synth.seizure_rate_per_hour},
                  {"short_seizure_fraction", synth.short_seizure_fraction},
                  {"seizure_band_lo_hz", synth.seizure_band_lo_hz},
                  {"seizure_band_hi_hz", synth.seizure_band_hi_hz},
                  {"focal_channel_count", synth.focal_channel_count}};
    return j.dump();
}

std::string ExperimentConfig::config_hash() const {
    const std::string s = canonical_json();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
    return buf;
}

}  // namespace presda::cli
