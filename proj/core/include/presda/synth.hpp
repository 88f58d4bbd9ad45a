#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "presda/eeg_io.hpp"
#include "presda/eeg_record.hpp"
#include "presda/rng.hpp"

namespace presda::synth {

// Synthetic preterm cohort generator: tracé discontinu background (bursts
// alternating with inter-burst intervals whose mean length shrinks with GA)
// plus focal rhythmic delta-band seizures. Desk-scale test data only; the
// waveforms are invented and carry no clinical meaning.
struct SynthConfig {
    int n_infants = 16;  // 12 train / 4 test by default
    int n_test = 4;      // last n_test infants form the test split
    int n_controls = 2;  // seizure-free infants, placed in the test split
    double ga_lo_weeks = 23.0;
    double ga_hi_weeks = 32.0;
    double fs_hz = 256.0;
    int n_channels = 8;
    double record_minutes = 30.0;
    double seizure_rate_per_hour = 4.0;
    std::uint64_t seed = 0;
    double short_seizure_fraction = 0.46;  // events shorter than 60 s
    double seizure_band_lo_hz = 0.5;
    double seizure_band_hi_hz = 3.0;
    int focal_channel_count = 2;

    void validate() const;
};

struct SynthEventMeta {
    double onset_s = 0.0;
    double duration_s = 0.0;
    double f0_hz = 0.0;
    double amplitude_uv = 0.0;
    int first_channel = 0;
    int channel_count = 0;
};

struct SynthRecordMeta {
    std::string record_id;
    double ga_weeks = 0.0;
    std::uint64_t infant_index = 0;
    std::vector<double> ibi_durations_s;
    std::vector<double> burst_durations_s;
    std::vector<SynthEventMeta> events;
};

// Alternating burst / inter-burst background. Mean IBI duration decreases
// linearly with GA. Deterministic in (config, record seed stream).
eeg::EegRecord generate_background(const SynthConfig& config,
                                   const std::string& record_id, double ga_weeks,
                                   double duration_s, Rng& rng,
                                   SynthRecordMeta* meta = nullptr);

// Duration sampler behind the short/long seizure mixture (exposed so the
// distribution is testable in isolation).
double sample_seizure_duration(const SynthConfig& config, Rng& rng);

// Adds amplitude-modulated rhythmic waveforms (fundamental in the seizure
// band plus harmonics) on a focal channel subset and fills
// record.annotations. Events that cannot be placed without overlap are
// skipped with a warning.
void inject_seizures(eeg::EegRecord& record, const SynthConfig& config, Rng& rng,
                     SynthRecordMeta* meta = nullptr);

struct CohortResult {
    eeg::DatasetManifest manifest;
    std::vector<SynthRecordMeta> metas;
    std::filesystem::path manifest_path;
};

// Writes records/, annotations/, meta/ and manifest.json under out_dir.
// Byte-identical for a fixed config.
CohortResult generate_cohort(const SynthConfig& config,
                             const std::filesystem::path& out_dir);

}  // namespace presda::synth
