#include <cmath>
#include <numbers>

#include "doctest.h"
#include "presda/dsp.hpp"
#include "presda/rng.hpp"
#include "support/oracles.hpp"

using namespace presda;

namespace {

eeg::EegRecord tone_record(double fs, double tone_hz, double seconds,
                           std::size_t n_channels = 1) {
    eeg::EegRecord rec;
    rec.record_id = "tone";
    rec.ga_weeks = 28.0;
    rec.fs_hz = fs;
    for (std::size_t c = 0; c < n_channels; ++c)
        rec.channel_names.push_back("ch" + std::to_string(c));
    rec.n_samples = static_cast<std::size_t>(fs * seconds);
    rec.samples.resize(n_channels * rec.n_samples);
    for (std::size_t c = 0; c < n_channels; ++c)
        for (std::size_t i = 0; i < rec.n_samples; ++i)
            rec.samples[c * rec.n_samples + i] = static_cast<float>(
                std::sin(2.0 * std::numbers::pi * tone_hz * i / fs));
    return rec;
}

eeg::EegRecord record_32hz(double seconds, std::size_t n_channels = 1) {
    eeg::EegRecord rec;
    rec.record_id = "r32";
    rec.ga_weeks = 28.0;
    rec.fs_hz = 32.0;
    for (std::size_t c = 0; c < n_channels; ++c)
        rec.channel_names.push_back("ch" + std::to_string(c));
    rec.n_samples = static_cast<std::size_t>(32.0 * seconds);
    rec.samples.assign(n_channels * rec.n_samples, 0.0f);
    return rec;
}

}  // namespace

TEST_CASE("fir design basics") {
    const auto lp = dsp::design_fir(dsp::FilterKind::Lowpass, 12.8, 256.0, 129);
    CHECK(lp.taps.size() == 129);

    SUBCASE("lowpass DC gain is 1") {
        double sum = 0.0;
        for (double t : lp.taps) sum += t;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(dsp::frequency_response(lp, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("stopband at 30 Hz is below -40 dB") {
        CHECK(dsp::frequency_response(lp, 30.0) < 0.01);
    }
    SUBCASE("stopband one transition width past the cutoff") {
        // Hamming transition width ~ 3.3 * fs / n_taps
        const double tw = 3.3 * 256.0 / 129.0;
        for (double f = 12.8 + tw; f < 128.0; f += 1.0)
            CHECK(dsp::frequency_response(lp, f) < 0.01);
    }
    SUBCASE("linear phase: symmetric taps") {
        for (std::size_t i = 0; i < lp.taps.size() / 2; ++i)
            CHECK(lp.taps[i] ==
                  doctest::Approx(lp.taps[lp.taps.size() - 1 - i]).epsilon(1e-12));
    }
    SUBCASE("highpass DC gain is 0") {
        const auto hp = dsp::design_fir(dsp::FilterKind::Highpass, 0.5, 32.0, 129);
        double sum = 0.0;
        for (double t : hp.taps) sum += t;
        CHECK(std::abs(sum) < 1e-6);
        CHECK(dsp::frequency_response(hp, 0.0) < 1e-6);
        CHECK(dsp::frequency_response(hp, 2.0) == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("bad arguments") {
        CHECK_THROWS(dsp::design_fir(dsp::FilterKind::Lowpass, 0.0, 256.0, 129));
        CHECK_THROWS(dsp::design_fir(dsp::FilterKind::Lowpass, 200.0, 256.0, 129));
        CHECK_THROWS(dsp::design_fir(dsp::FilterKind::Lowpass, 12.8, 256.0, 128));
    }
}

TEST_CASE("filter_signal") {
    const auto lp = dsp::design_fir(dsp::FilterKind::Lowpass, 12.8, 256.0, 129);

    SUBCASE("constant through lowpass stays constant in the interior") {
        std::vector<double> x(1000, 3.5);
        const auto y = dsp::filter_signal(lp, x);
        for (std::size_t i = 200; i < 800; ++i)
            CHECK(y[i] == doctest::Approx(3.5).epsilon(1e-6));
    }
    SUBCASE("constant through highpass goes to zero") {
        const auto hp = dsp::design_fir(dsp::FilterKind::Highpass, 0.5, 32.0, 129);
        std::vector<double> x(1000, 3.5);
        const auto y = dsp::filter_signal(hp, x);
        for (std::size_t i = 200; i < 800; ++i) CHECK(std::abs(y[i]) < 1e-4);
    }
    SUBCASE("impulse reproduces the taps, centered") {
        std::vector<double> x(400, 0.0);
        x[200] = 1.0;
        const auto y = dsp::filter_signal(lp, x);
        const int delay = lp.group_delay();
        for (int k = 0; k < 129; ++k)
            CHECK(y[200 - delay + k] == doctest::Approx(lp.taps[k]).epsilon(1e-12));
    }
    SUBCASE("zero-phase: tone keeps its phase") {
        std::vector<double> x(2048);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::sin(2.0 * std::numbers::pi * 2.0 * i / 256.0);
        const auto y = dsp::filter_signal(lp, x);
        for (std::size_t i = 300; i < 1700; ++i)
            CHECK(oracle::close(y[i], x[i] * dsp::frequency_response(lp, 2.0), 0.0, 5e-3));
    }
    SUBCASE("linearity") {
        Rng rng(11);
        std::vector<double> x(500), y(500), mix(500);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform(-1.0, 1.0);
            y[i] = rng.uniform(-1.0, 1.0);
            mix[i] = 2.0 * x[i] - 0.7 * y[i];
        }
        const auto fx = dsp::filter_signal(lp, x);
        const auto fy = dsp::filter_signal(lp, y);
        const auto fmix = dsp::filter_signal(lp, mix);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(oracle::close(fmix[i], 2.0 * fx[i] - 0.7 * fy[i], 1e-9, 1e-12));
    }
    SUBCASE("signal shorter than the filter") {
        std::vector<double> x(100, 1.0);
        CHECK_THROWS(dsp::filter_signal(lp, x));
    }
}

TEST_CASE("resample_to_32hz") {
    SUBCASE("sample counts at 256 Hz") {
        const auto rec = tone_record(256.0, 2.0, 60.0);
        CHECK(rec.n_samples == 15360);
        const auto out = dsp::resample_to_32hz(rec);
        CHECK(out.fs_hz == 32.0);
        CHECK(out.n_samples == 1920);
    }
    SUBCASE("2 Hz tone passes within 5 percent") {
        const auto rec = tone_record(256.0, 2.0, 120.0);
        const auto out = dsp::resample_to_32hz(rec);
        std::vector<double> y(out.channel(0), out.channel(0) + out.n_samples);
        const double amp =
            oracle::tone_amplitude(y, 32.0, 2.0, out.n_samples / 4, 3 * out.n_samples / 4);
        CHECK(amp > 0.95);
        CHECK(amp < 1.05);
        // the chain response predicted from the two designed filters
        const auto lp = dsp::design_fir(dsp::FilterKind::Lowpass, 12.8, 256.0, 129);
        const auto hp = dsp::design_fir(dsp::FilterKind::Highpass, 0.5, 32.0, 129);
        const double predicted =
            dsp::frequency_response(lp, 2.0) * dsp::frequency_response(hp, 2.0);
        CHECK(amp == doctest::Approx(predicted).epsilon(5e-3));
    }
    SUBCASE("30 Hz tone is attenuated by 40 dB") {
        const auto rec = tone_record(256.0, 30.0, 120.0);
        const auto out = dsp::resample_to_32hz(rec);
        // 30 Hz aliases to 2 Hz after decimation to 32 Hz
        std::vector<double> y(out.channel(0), out.channel(0) + out.n_samples);
        const double amp =
            oracle::tone_amplitude(y, 32.0, 2.0, out.n_samples / 4, 3 * out.n_samples / 4);
        CHECK(amp <= 0.01);
    }
    SUBCASE("1024 Hz input decimates by 32") {
        const auto rec = tone_record(1024.0, 2.0, 30.0);
        const auto out = dsp::resample_to_32hz(rec);
        CHECK(out.n_samples == rec.n_samples / 32);
    }
    SUBCASE("non-integer factor rejected") {
        auto rec = tone_record(100.0, 2.0, 30.0);
        CHECK_THROWS(dsp::resample_to_32hz(rec));
    }
    SUBCASE("per-channel processing matches the batch path") {
        auto rec = tone_record(256.0, 3.0, 60.0, 4);
        Rng rng(5);
        for (auto& v : rec.samples) v += static_cast<float>(rng.uniform(-0.1, 0.1));
        const auto whole = dsp::resample_to_32hz(rec);
        for (std::size_t c = 0; c < 4; ++c) {
            eeg::EegRecord one;
            one.record_id = "c";
            one.ga_weeks = rec.ga_weeks;
            one.fs_hz = rec.fs_hz;
            one.channel_names = {"only"};
            one.n_samples = rec.n_samples;
            one.samples.assign(rec.channel(c), rec.channel(c) + rec.n_samples);
            const auto alone = dsp::resample_to_32hz(one);
            for (std::size_t i = 0; i < alone.n_samples; ++i)
                CHECK(alone.channel(0)[i] == whole.channel(c)[i]);
        }
    }
}

TEST_CASE("segment") {
    SUBCASE("60 s at stride 1 gives 53 windows") {
        const auto rec = record_32hz(60.0);
        const auto batch = dsp::segment(rec, 1);
        CHECK(batch.size() == 53);
        CHECK(batch.start_times_s.front() == 0.0);
        CHECK(batch.start_times_s.back() == doctest::Approx(52.0));
    }
    SUBCASE("60 s at stride 4 gives 14 windows") {
        const auto rec = record_32hz(60.0);
        CHECK(dsp::segment(rec, 4).size() == 14);
    }
    SUBCASE("record shorter than a window") {
        const auto rec = record_32hz(7.0);
        CHECK_THROWS(dsp::segment(rec, 1));
    }
    SUBCASE("bad stride") {
        const auto rec = record_32hz(60.0);
        CHECK_THROWS(dsp::segment(rec, 0));
        CHECK_THROWS(dsp::segment(rec, 9));
    }
}

TEST_CASE("weak labels") {
    const auto rec = record_32hz(60.0);
    auto batch = dsp::segment(rec, 1);

    SUBCASE("full containment labels 1") {
        dsp::assign_weak_labels(batch, eeg::AnnotationSet::from_events({{5.0, 40.0}}));
        // window [10, 18) lies inside (5, 40)
        CHECK(batch.labels[10] == 1);
    }
    SUBCASE("no events labels 0") {
        dsp::assign_weak_labels(batch, eeg::AnnotationSet{});
        for (int l : batch.labels) CHECK(l == 0);
    }
    SUBCASE("exactly 50 percent overlap labels 1") {
        dsp::assign_weak_labels(batch, eeg::AnnotationSet::from_events({{14.0, 40.0}}));
        CHECK(batch.labels[10] == 1);  // window [10, 18): 4 s overlap = 50%
        CHECK(batch.labels[7] == 0);   // window [7, 15): 1 s overlap
    }
    SUBCASE("labeled seizure count grows with seizure time") {
        auto b1 = dsp::segment(rec, 1);
        auto b2 = dsp::segment(rec, 1);
        dsp::assign_weak_labels(b1, eeg::AnnotationSet::from_events({{10.0, 22.0}}));
        dsp::assign_weak_labels(b2, eeg::AnnotationSet::from_events({{10.0, 40.0}}));
        int c1 = 0, c2 = 0;
        for (int l : b1.labels) c1 += l;
        for (int l : b2.labels) c2 += l;
        CHECK(c2 >= c1);
    }
}

TEST_CASE("edge guard drops boundary windows only") {
    const auto rec = record_32hz(60.0);
    auto batch = dsp::segment(rec, 1);
    const auto n_before = batch.size();
    dsp::apply_edge_guard(batch, rec.duration_s(), 2.0);
    CHECK(batch.size() < n_before);
    CHECK(batch.start_times_s.front() >= 2.0);
    CHECK(batch.start_times_s.back() + dsp::kWindowSeconds <= 58.0);
    for (std::size_t i = 1; i < batch.size(); ++i)
        CHECK(batch.start_times_s[i] - batch.start_times_s[i - 1] ==
              doctest::Approx(1.0));
    // window payloads stay aligned with their timestamps
    const auto fresh = dsp::segment(rec, 1);
    const std::size_t off =
        static_cast<std::size_t>(batch.start_times_s.front());
    for (std::size_t k = 0; k < batch.window_values(); ++k)
        CHECK(batch.window(0)[k] == fresh.window(off)[k]);
}
