#include "presda/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "presda/parallel.hpp"

namespace presda::dsp {

namespace {

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

FirFilter design_fir(FilterKind kind, double cutoff_hz, double fs_hz, int n_taps) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs_hz / 2.0))
        throw std::invalid_argument("design_fir: cutoff must be in (0, fs/2)");
    if (n_taps < 3 || n_taps % 2 == 0)
        throw std::invalid_argument("design_fir: tap count must be odd and >= 3");

    const int mid = (n_taps - 1) / 2;
    const double fc = cutoff_hz / fs_hz;  // normalized to the sampling rate

    std::vector<double> taps(n_taps);
    double sum = 0.0;
    for (int i = 0; i < n_taps; ++i) {
        const double window =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n_taps - 1));
        taps[i] = 2.0 * fc * sinc(2.0 * fc * (i - mid)) * window;
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;  // unit DC gain

    if (kind == FilterKind::Highpass) {
        // spectral inversion of the unit-gain lowpass; DC gain becomes exactly 0
        for (double& t : taps) t = -t;
        taps[mid] += 1.0;
    }

    return FirFilter{std::move(taps), kind, cutoff_hz, fs_hz};
}

double frequency_response(const FirFilter& filter, double f_hz) {
    const double w = 2.0 * std::numbers::pi * f_hz / filter.design_fs_hz;
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < filter.taps.size(); ++k) {
        re += filter.taps[k] * std::cos(w * static_cast<double>(k));
        im -= filter.taps[k] * std::sin(w * static_cast<double>(k));
    }
    return std::hypot(re, im);
}

std::vector<double> filter_signal(const FirFilter& filter,
                                  const std::vector<double>& signal) {
    const int n_taps = static_cast<int>(filter.taps.size());
    const int n = static_cast<int>(signal.size());
    if (n <= n_taps)
        throw std::invalid_argument("filter_signal: signal shorter than filter");

    // y[t] = sum_k h[k] x[t + k - delay], x zero-padded; this is the forward
    // convolution already shifted by the group delay.
    const int delay = filter.group_delay();
    std::vector<double> out(n, 0.0);
    const double* h = filter.taps.data();
    const double* x = signal.data();
    for (int t = 0; t < n; ++t) {
        const int k_lo = std::max(0, delay - t);
        const int k_hi = std::min(n_taps, n - t + delay);
        double acc = 0.0;
        for (int k = k_lo; k < k_hi; ++k) acc += h[k] * x[t + k - delay];
        out[t] = acc;
    }
    return out;
}

eeg::EegRecord resample_to_32hz(const eeg::EegRecord& record) {
    const double fs = record.fs_hz;
    if (fs != 256.0 && fs != 1024.0)
        throw std::invalid_argument("resample_to_32hz: input rate must be 256 or 1024 Hz");
    const int factor = static_cast<int>(fs / kTargetFsHz);

    // 129 taps at 256 Hz, scaled proportionally with the rate
    const int lp_taps = static_cast<int>((kBaseTaps - 1) * (fs / kBaseTapsFsHz)) + 1;
    const FirFilter lowpass =
        design_fir(FilterKind::Lowpass, kAntiAliasCutoffHz, fs, lp_taps);
    const FirFilter highpass =
        design_fir(FilterKind::Highpass, kHighpassCutoffHz, kTargetFsHz, kBaseTaps);

    const std::size_t out_len = record.n_samples / static_cast<std::size_t>(factor);

    eeg::EegRecord out;
    out.record_id = record.record_id;
    out.ga_weeks = record.ga_weeks;
    out.fs_hz = kTargetFsHz;
    out.channel_names = record.channel_names;
    out.n_samples = out_len;
    out.samples.resize(record.n_channels() * out_len);
    out.annotations = record.annotations;

    parallel_for(record.n_channels(), 1, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            std::vector<double> x(record.channel(c),
                                  record.channel(c) + record.n_samples);
            x = filter_signal(lowpass, x);
            std::vector<double> dec(out_len);
            for (std::size_t i = 0; i < out_len; ++i)
                dec[i] = x[i * static_cast<std::size_t>(factor)];
            dec = filter_signal(highpass, dec);
            float* dst = out.channel(c);
            for (std::size_t i = 0; i < out_len; ++i)
                dst[i] = static_cast<float>(dec[i]);
        }
    });
    return out;
}

WindowBatch segment(const eeg::EegRecord& record_32hz, int stride_s) {
    if (record_32hz.fs_hz != kTargetFsHz)
        throw std::invalid_argument("segment: record must be at 32 Hz");
    if (stride_s < 1 || stride_s > kWindowSeconds)
        throw std::invalid_argument("segment: stride must be 1..8 s");
    const std::size_t T = record_32hz.n_samples;
    if (T < static_cast<std::size_t>(kWindowSamples))
        throw std::invalid_argument("segment: record shorter than one 8 s window");

    const std::size_t stride_samples =
        static_cast<std::size_t>(stride_s) * static_cast<std::size_t>(kTargetFsHz);
    const std::size_t n_windows = (T - kWindowSamples) / stride_samples + 1;
    const std::size_t N = record_32hz.n_channels();

    WindowBatch batch;
    batch.record_id = record_32hz.record_id;
    batch.ga_weeks = record_32hz.ga_weeks;
    batch.n_channels = N;
    batch.stride_s = static_cast<double>(stride_s);
    batch.data.resize(n_windows * N * kWindowSamples);
    batch.labels.assign(n_windows, 0);
    batch.start_times_s.resize(n_windows);
    batch.sample_weights.assign(n_windows, 1.0);

    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::size_t t0 = w * stride_samples;
        batch.start_times_s[w] = static_cast<double>(t0) / kTargetFsHz;
        double* dst = batch.window(w);
        for (std::size_t c = 0; c < N; ++c) {
            const float* src = record_32hz.channel(c) + t0;
            for (int t = 0; t < kWindowSamples; ++t)
                dst[c * kWindowSamples + t] = static_cast<double>(src[t]);
        }
    }
    return batch;
}

void assign_weak_labels(WindowBatch& batch, const eeg::AnnotationSet& annotations,
                        double overlap_threshold) {
    if (overlap_threshold < 0.0 || overlap_threshold > 1.0)
        throw std::invalid_argument("assign_weak_labels: threshold must be in [0, 1]");
    for (std::size_t w = 0; w < batch.size(); ++w) {
        const double a = batch.start_times_s[w];
        const double overlap = annotations.overlap_with(a, a + kWindowSeconds);
        batch.labels[w] = overlap >= overlap_threshold * kWindowSeconds ? 1 : 0;
    }
}

void apply_edge_guard(WindowBatch& batch, double record_duration_s, double guard_s) {
    std::size_t lo = 0, hi = batch.size();
    while (lo < hi && batch.start_times_s[lo] < guard_s) ++lo;
    while (hi > lo &&
           batch.start_times_s[hi - 1] + kWindowSeconds > record_duration_s - guard_s)
        --hi;

    const std::size_t n = hi - lo;
    if (n == batch.size()) return;
    batch.data.erase(batch.data.begin(),
                     batch.data.begin() + static_cast<std::ptrdiff_t>(lo * batch.window_values()));
    batch.data.resize(n * batch.window_values());
    auto trim = [lo, n](auto& v) {
        v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo));
        v.resize(n);
    };
    trim(batch.labels);
    trim(batch.start_times_s);
    trim(batch.sample_weights);
}

}  // namespace presda::dsp
