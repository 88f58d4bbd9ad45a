#include "presda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace presda::synth {

using nlohmann::json;

void SynthConfig::validate() const {
    if (n_infants < 1) throw std::invalid_argument("synth: n_infants must be >= 1");
    if (n_test < 0 || n_test > n_infants)
        throw std::invalid_argument("synth: n_test out of range");
    if (n_controls < 0 || n_controls > n_test)
        throw std::invalid_argument("synth: controls must fit inside the test split");
    if (ga_lo_weeks < 22.0 || ga_hi_weeks > 44.0 || ga_lo_weeks >= ga_hi_weeks)
        throw std::invalid_argument("synth: GA range must be within [22, 44]");
    if (fs_hz != 256.0 && fs_hz != 1024.0)
        throw std::invalid_argument("synth: fs must be 256 or 1024 Hz");
    if (n_channels < 1) throw std::invalid_argument("synth: need >= 1 channel");
    if (record_minutes * 60.0 < 60.0)
        throw std::invalid_argument("synth: records must be at least 60 s");
    if (seizure_rate_per_hour < 0.0)
        throw std::invalid_argument("synth: seizure rate must be >= 0");
    if (short_seizure_fraction < 0.0 || short_seizure_fraction > 1.0)
        throw std::invalid_argument("synth: short fraction must be in [0, 1]");
    if (!(seizure_band_lo_hz > 0.0) || seizure_band_hi_hz <= seizure_band_lo_hz ||
        seizure_band_hi_hz >= fs_hz / 2.0)
        throw std::invalid_argument("synth: bad seizure band");
    if (focal_channel_count < 1 || focal_channel_count > n_channels)
        throw std::invalid_argument("synth: focal channel count out of range");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// mean inter-burst interval in seconds; shortens linearly as GA grows
double mean_ibi_s(double ga_weeks) {
    return std::max(1.5, 8.0 - 0.75 * (ga_weeks - 24.0));
}

// normalized position of a GA inside the configured cohort range
double ga_position(const SynthConfig& config, double ga_weeks) {
    const double t = (ga_weeks - config.ga_lo_weeks) /
                     (config.ga_hi_weeks - config.ga_lo_weeks);
    return std::clamp(t, 0.0, 1.0);
}

struct Oscillator {
    double freq_hz = 1.0;
    double phase = 0.0;
    double amp_uv = 0.0;
};

}  // namespace

eeg::EegRecord generate_background(const SynthConfig& config,
                                   const std::string& record_id, double ga_weeks,
                                   double duration_s, Rng& rng,
                                   SynthRecordMeta* meta) {
    const double fs = config.fs_hz;
    const auto n_samples = static_cast<std::size_t>(std::llround(duration_s * fs));
    const int n_ch = config.n_channels;

    eeg::EegRecord rec;
    rec.record_id = record_id;
    rec.ga_weeks = ga_weeks;
    rec.fs_hz = fs;
    for (int c = 0; c < n_ch; ++c) rec.channel_names.push_back("ch" + std::to_string(c));
    rec.n_samples = n_samples;
    rec.samples.assign(static_cast<std::size_t>(n_ch) * n_samples, 0.0f);

    std::vector<double> channel_gain(n_ch);
    for (int c = 0; c < n_ch; ++c) channel_gain[c] = rng.uniform(0.8, 1.2);

    // one burst/IBI schedule shared by all channels
    const double ibi_mean = mean_ibi_s(ga_weeks);
    double t = 0.0;
    bool in_burst = rng.uniform() < 0.5;
    std::vector<Oscillator> osc(static_cast<std::size_t>(n_ch) * 4);

    while (t < duration_s) {
        // burst spectra drift upward with maturation
        const double pos = ga_position(config, ga_weeks);
        const double burst_f_lo = 0.5 + 1.0 * pos;
        const double burst_f_hi = 4.5 + 4.0 * pos;

        double seg_dur;
        if (in_burst) {
            seg_dur = std::clamp(rng.normal(3.0, 1.0), 1.2, 8.0);
            if (meta) meta->burst_durations_s.push_back(seg_dur);
            for (auto& o : osc) {
                o.freq_hz = rng.uniform(burst_f_lo, burst_f_hi);
                o.phase = rng.uniform(0.0, kTwoPi);
                o.amp_uv = rng.uniform(15.0, 35.0);
            }
        } else {
            seg_dur = std::max(0.8, rng.normal(ibi_mean, 0.3 * ibi_mean));
            if (meta) meta->ibi_durations_s.push_back(seg_dur);
        }

        const auto s0 = static_cast<std::size_t>(std::llround(t * fs));
        const auto s1 = std::min(
            n_samples, static_cast<std::size_t>(std::llround((t + seg_dur) * fs)));
        const double ramp_s = 0.4;
        for (std::size_t s = s0; s < s1; ++s) {
            const double ts = static_cast<double>(s) / fs;
            double env = 1.0;
            if (in_burst) {
                const double into = ts - t;
                const double left = (t + seg_dur) - ts;
                env = std::min({1.0, into / ramp_s, left / ramp_s});
                env = std::max(env, 0.0);
            }
            for (int c = 0; c < n_ch; ++c) {
                double v = 4.0 * rng.normal();  // floor noise everywhere
                if (in_burst) {
                    double burst = 0.0;
                    for (int j = 0; j < 4; ++j) {
                        const auto& o = osc[static_cast<std::size_t>(c) * 4 + j];
                        burst += o.amp_uv * std::sin(kTwoPi * o.freq_hz * ts + o.phase);
                    }
                    v += env * burst;
                }
                rec.samples[c * n_samples + s] +=
                    static_cast<float>(channel_gain[c] * v);
            }
        }
        t += seg_dur;
        in_burst = !in_burst;
    }

    if (meta) {
        meta->record_id = record_id;
        meta->ga_weeks = ga_weeks;
    }
    return rec;
}

double sample_seizure_duration(const SynthConfig& config, Rng& rng) {
    if (rng.uniform() < config.short_seizure_fraction)
        return rng.uniform(eeg::kMinSeizureSeconds, 60.0);
    return rng.uniform(60.0, 240.0);
}

void inject_seizures(eeg::EegRecord& record, const SynthConfig& config, Rng& rng,
                     SynthRecordMeta* meta) {
    const double fs = record.fs_hz;
    const double duration_s = record.duration_s();
    const double hours = duration_s / 3600.0;
    const auto n_target = static_cast<int>(
        std::llround(config.seizure_rate_per_hour * hours));

    std::vector<eeg::SeizureEvent> placed;
    const double margin_s = 10.0;  // clearance from record edges and neighbours

    for (int e = 0; e < n_target; ++e) {
        const double dur = sample_seizure_duration(config, rng);
        bool ok = false;
        double onset = 0.0;
        if (dur + 2.0 * margin_s > duration_s) {
            std::cerr << "[presda] warning: record " << record.record_id
                      << ": seizure of " << dur << " s does not fit, skipping\n";
            continue;
        }
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            onset = rng.uniform(margin_s, duration_s - dur - margin_s);
            ok = true;
            for (const auto& p : placed)
                if (onset < p.offset_s + margin_s && p.onset_s < onset + dur + margin_s) {
                    ok = false;
                    break;
                }
        }
        if (!ok) {
            std::cerr << "[presda] warning: record " << record.record_id
                      << ": could not place seizure " << e + 1 << " of " << n_target
                      << " without overlap, skipping\n";
            continue;
        }

        // seizure rhythm drifts with maturation within the configured band,
        // so GA groups carry distinct morphologies; amplitude stays below
        // burst level so rhythm rather than raw energy carries the label
        const double pos = ga_position(config, record.ga_weeks);
        const double f0_center = config.seizure_band_lo_hz +
                                 pos * (config.seizure_band_hi_hz -
                                        config.seizure_band_lo_hz);
        const double f0 = std::clamp(f0_center + rng.uniform(-0.4, 0.4),
                                     config.seizure_band_lo_hz,
                                     config.seizure_band_hi_hz);
        const double amp = rng.uniform(15.0, 40.0);
        const int first_ch = static_cast<int>(rng.uniform_int(
            static_cast<std::uint64_t>(config.n_channels - config.focal_channel_count + 1)));
        const double phase0 = rng.uniform(0.0, kTwoPi);
        const double phase1 = rng.uniform(0.0, kTwoPi);
        const double phase2 = rng.uniform(0.0, kTwoPi);
        const double am_phase = rng.uniform(0.0, kTwoPi);
        const double ramp_s = std::min(5.0, 0.2 * dur);

        const auto s0 = static_cast<std::size_t>(std::llround(onset * fs));
        const auto s1 = std::min(record.n_samples, static_cast<std::size_t>(
                                                       std::llround((onset + dur) * fs)));
        for (int c = first_ch; c < first_ch + config.focal_channel_count; ++c) {
            const double ch_gain = rng.uniform(0.7, 1.0);
            float* dst = record.channel(static_cast<std::size_t>(c));
            for (std::size_t s = s0; s < s1; ++s) {
                const double ts = static_cast<double>(s) / fs;
                const double into = ts - onset;
                const double left = (onset + dur) - ts;
                double env = std::min({1.0, into / ramp_s, left / ramp_s});
                env = std::max(env, 0.0);
                env *= 1.0 + 0.25 * std::sin(kTwoPi * 0.07 * into + am_phase);
                const double wave =
                    std::sin(kTwoPi * f0 * into + phase0) +
                    0.5 * std::sin(kTwoPi * 2.0 * f0 * into + phase1) +
                    0.25 * std::sin(kTwoPi * 3.0 * f0 * into + phase2);
                dst[s] += static_cast<float>(ch_gain * amp * env * wave);
            }
        }

        placed.push_back({onset, onset + dur});
        if (meta)
            meta->events.push_back({onset, dur, f0, amp, first_ch,
                                    config.focal_channel_count});
    }

    record.annotations = eeg::AnnotationSet::from_events(placed);
    if (meta)
        std::sort(meta->events.begin(), meta->events.end(),
                  [](const SynthEventMeta& a, const SynthEventMeta& b) {
                      return a.onset_s < b.onset_s;
                  });
}

namespace {

json meta_to_json(const SynthRecordMeta& m) {
    json j;
    j["record_id"] = m.record_id;
    j["ga_weeks"] = m.ga_weeks;
    j["infant_index"] = m.infant_index;
    j["ibi_durations_s"] = m.ibi_durations_s;
    j["burst_durations_s"] = m.burst_durations_s;
    json events = json::array();
    for (const auto& e : m.events)
        events.push_back({{"onset_s", e.onset_s},
                          {"duration_s", e.duration_s},
                          {"f0_hz", e.f0_hz},
                          {"amplitude_uv", e.amplitude_uv},
                          {"first_channel", e.first_channel},
                          {"channel_count", e.channel_count}});
    j["events"] = events;
    return j;
}

}  // namespace

CohortResult generate_cohort(const SynthConfig& config,
                             const std::filesystem::path& out_dir) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "records");
    fs::create_directories(out_dir / "annotations");
    fs::create_directories(out_dir / "meta");

    CohortResult result;
    result.manifest.base_dir = fs::absolute(out_dir);

    const int n_train = config.n_infants - config.n_test;
    for (int i = 0; i < config.n_infants; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "p%02d", i);
        Rng rng(config.seed, 0xbeb0 + static_cast<std::uint64_t>(i));

        const double ga = rng.uniform(config.ga_lo_weeks, config.ga_hi_weeks);
        const bool is_test = i >= n_train;
        const bool is_control = i >= config.n_infants - config.n_controls;

        SynthRecordMeta meta;
        meta.infant_index = static_cast<std::uint64_t>(i);
        eeg::EegRecord rec = generate_background(config, name, ga,
                                                 config.record_minutes * 60.0, rng,
                                                 &meta);
        if (!is_control) inject_seizures(rec, config, rng, &meta);

        const std::string rec_rel = std::string("records/") + name + ".eegr";
        const std::string ann_rel = std::string("annotations/") + name + ".csv";
        eeg::save_record(rec, out_dir / rec_rel);
        eeg::save_annotations(rec.annotations, out_dir / ann_rel);
        {
            std::ofstream os(out_dir / "meta" / (std::string(name) + ".meta.json"),
                             std::ios::trunc);
            os << meta_to_json(meta).dump(2) << '\n';
        }
        result.manifest.entries.push_back(
            {rec_rel, ann_rel, ga, is_test ? "test" : "train"});
        result.metas.push_back(std::move(meta));
    }

    result.manifest_path = out_dir / "manifest.json";
    eeg::save_manifest(result.manifest, result.manifest_path);
    return result;
}

}  // namespace presda::synth
