#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "presda/dsp.hpp"
#include "presda/metrics.hpp"
#include "presda/synth.hpp"
#include "support/oracles.hpp"

using namespace presda;
namespace fs = std::filesystem;

namespace {

synth::SynthConfig small_config() {
    synth::SynthConfig cfg;
    cfg.n_infants = 4;
    cfg.n_test = 2;
    cfg.n_controls = 1;
    cfg.record_minutes = 4.0;
    cfg.seizure_rate_per_hour = 20.0;
    cfg.seed = 42;
    return cfg;
}

double rms(const float* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(x[i]) * x[i];
    return std::sqrt(s / static_cast<double>(n));
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("background generator") {
    const auto cfg = small_config();

    SUBCASE("same seed, same signal") {
        Rng r1(7), r2(7);
        const auto a = synth::generate_background(cfg, "x", 26.0, 120.0, r1);
        const auto b = synth::generate_background(cfg, "x", 26.0, 120.0, r2);
        CHECK(a.samples == b.samples);
    }
    SUBCASE("IBIs shorten with maturation") {
        synth::SynthRecordMeta young, old;
        Rng r1(7), r2(7);
        synth::generate_background(cfg, "y", 24.0, 1800.0, r1, &young);
        synth::generate_background(cfg, "o", 31.0, 1800.0, r2, &old);
        REQUIRE(young.ibi_durations_s.size() >= 100);
        REQUIRE(old.ibi_durations_s.size() >= 100);
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        CHECK(mean(young.ibi_durations_s) > mean(old.ibi_durations_s));
    }
    SUBCASE("burst RMS exceeds IBI RMS") {
        synth::SynthRecordMeta meta;
        Rng rng(9);
        const auto rec = synth::generate_background(cfg, "b", 27.0, 300.0, rng, &meta);
        // compare the upper and lower deciles of 1 s RMS values; bursts fill
        // the top decile, inter-burst noise the bottom one
        const auto n = rec.n_samples;
        const auto fs = static_cast<std::size_t>(rec.fs_hz);
        std::vector<double> sec_rms;
        for (std::size_t s = 0; s + fs <= n; s += fs)
            sec_rms.push_back(rms(rec.channel(0) + s, fs));
        std::sort(sec_rms.begin(), sec_rms.end());
        const double low = sec_rms[sec_rms.size() / 10];
        const double high = sec_rms[9 * sec_rms.size() / 10];
        CHECK(high > 3.0 * low);
    }
    SUBCASE("record passes eeg invariants") {
        Rng rng(3);
        const auto rec = synth::generate_background(cfg, "v", 25.0, 120.0, rng);
        CHECK_NOTHROW(rec.validate());
    }
}

TEST_CASE("seizure durations") {
    const auto cfg = small_config();
    Rng rng(5);

    SUBCASE("every sample is at least 10 s") {
        for (int i = 0; i < 1000; ++i)
            CHECK(synth::sample_seizure_duration(cfg, rng) >= 10.0);
    }
    SUBCASE("short fraction near 0.46") {
        int short_count = 0;
        const int n = 1000;
        for (int i = 0; i < n; ++i)
            short_count += synth::sample_seizure_duration(cfg, rng) < 60.0;
        const double fraction = static_cast<double>(short_count) / n;
        CHECK(fraction == doctest::Approx(0.46).epsilon(0.12));
        CHECK(std::abs(fraction - 0.46) < 0.05);
    }
}

TEST_CASE("seizure injection") {
    const auto cfg = small_config();
    Rng bg_rng(21);
    auto rec = synth::generate_background(cfg, "s", 26.0, 600.0, bg_rng);
    const auto clean = rec;

    synth::SynthRecordMeta meta;
    Rng sz_rng(22);
    synth::inject_seizures(rec, cfg, sz_rng, &meta);
    REQUIRE(!rec.annotations.empty());

    SUBCASE("annotations are valid and of minimum length") {
        for (const auto& e : rec.annotations.events()) {
            CHECK(e.duration_s() >= 10.0);
            CHECK(e.onset_s >= 0.0);
            CHECK(e.offset_s <= rec.duration_s());
        }
        CHECK_NOTHROW(rec.validate());
    }
    SUBCASE("in-band power rises on the focal channels during events") {
        // same time span, injected vs clean background, whole event
        for (std::size_t ei = 0; ei < rec.annotations.size(); ++ei) {
            const auto& e = rec.annotations.events()[ei];
            const auto& em = meta.events[ei];
            const auto fs = rec.fs_hz;
            const auto s0 = static_cast<std::size_t>(e.onset_s * fs);
            const auto len = static_cast<std::size_t>(e.duration_s() * fs);
            for (int c = em.first_channel; c < em.first_channel + em.channel_count;
                 ++c) {
                std::vector<double> with(rec.channel(c) + s0,
                                         rec.channel(c) + s0 + len);
                std::vector<double> without(clean.channel(c) + s0,
                                            clean.channel(c) + s0 + len);
                const double p_with =
                    oracle::band_power(with.data(), len, fs, 0.5, 3.0);
                const double p_without =
                    oracle::band_power(without.data(), len, fs, 0.5, 3.0);
                CHECK(p_with > p_without);
            }
        }
    }
}

TEST_CASE("cohort generation") {
    const auto cfg = small_config();
    const fs::path dir = fs::temp_directory_path() / "presda_synth_test";
    fs::remove_all(dir);

    const auto cohort = synth::generate_cohort(cfg, dir);

    SUBCASE("files exist and reload cleanly") {
        REQUIRE(cohort.manifest.entries.size() == 4);
        const auto loaded = eeg::load_manifest(dir / "manifest.json");
        const auto report = eeg::validate_manifest(loaded, {"train", "test"});
        for (const auto& f : report.failures) MESSAGE(f.reason);
        CHECK(report.ok());
    }
    SUBCASE("controls live in the test split without seizures") {
        const auto loaded = eeg::load_manifest(dir / "manifest.json");
        int controls = 0;
        for (const auto& e : loaded.entries) {
            const auto ann = eeg::load_annotations(loaded.resolve(e.annotation_path));
            if (ann.empty()) {
                ++controls;
                CHECK(e.split == "test");
            }
        }
        CHECK(controls == cfg.n_controls);
    }
    SUBCASE("regeneration is byte-identical") {
        const fs::path dir2 = fs::temp_directory_path() / "presda_synth_test2";
        fs::remove_all(dir2);
        synth::generate_cohort(cfg, dir2);
        for (const auto& e : cohort.manifest.entries) {
            CHECK(slurp(dir / e.record_path) == slurp(dir2 / e.record_path));
            CHECK(slurp(dir / e.annotation_path) == slurp(dir2 / e.annotation_path));
        }
        CHECK(slurp(dir / "manifest.json") == slurp(dir2 / "manifest.json"));
    }
    SUBCASE("GA values stay in the configured range") {
        for (const auto& e : cohort.manifest.entries) {
            CHECK(e.ga_weeks >= cfg.ga_lo_weeks);
            CHECK(e.ga_weeks <= cfg.ga_hi_weeks);
        }
    }
}

TEST_CASE("a trivial band-power detector beats chance on synthetic data") {
    // enough events that background span-to-span variability averages out
    auto cfg = small_config();
    cfg.n_infants = 3;
    cfg.n_test = 0;
    cfg.n_controls = 0;
    cfg.record_minutes = 10.0;
    cfg.seizure_rate_per_hour = 12.0;
    const fs::path dir = fs::temp_directory_path() / "presda_synth_energy";
    fs::remove_all(dir);
    const auto cohort = synth::generate_cohort(cfg, dir);

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& e : cohort.manifest.entries) {
        const auto rec = eeg::load_record_with_annotations(
            cohort.manifest.resolve(e.record_path),
            cohort.manifest.resolve(e.annotation_path));
        const auto rec32 = dsp::resample_to_32hz(rec);
        auto batch = dsp::segment(rec32, 4);
        dsp::assign_weak_labels(batch, rec32.annotations);
        for (std::size_t w = 0; w < batch.size(); ++w) {
            // focal seizures: score each window by its hottest channel
            double best = 0.0;
            for (std::size_t c = 0; c < batch.n_channels; ++c)
                best = std::max(best, oracle::band_power(
                                          batch.window(w) + c * dsp::kWindowSamples,
                                          dsp::kWindowSamples, 32.0, 0.5, 3.0));
            scores.push_back(best);
            labels.push_back(batch.labels[w]);
        }
    }
    const double auc = metrics::auc_concat(scores, labels);
    MESSAGE("band-power detector AUC: ", auc);
    CHECK(auc > 0.5);
    CHECK(auc < 1.0);  // the task stays non-trivial for the network
}
