#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "presda/eeg_record.hpp"

namespace presda::dsp {

// Preprocessing constants: EEG is brought to 32 Hz and cut into 8 s windows
// of exactly 256 samples.
inline constexpr double kTargetFsHz = 32.0;
inline constexpr double kAntiAliasCutoffHz = 12.8;
inline constexpr double kHighpassCutoffHz = 0.5;
inline constexpr int kWindowSeconds = 8;
inline constexpr int kWindowSamples = 256;

// Hamming windowed-sinc design, 129 taps at 256 Hz, scaled with the rate.
inline constexpr int kBaseTaps = 129;
inline constexpr double kBaseTapsFsHz = 256.0;

enum class FilterKind { Lowpass, Highpass };

struct FirFilter {
    std::vector<double> taps;  // odd length, symmetric (linear phase)
    FilterKind kind = FilterKind::Lowpass;
    double cutoff_hz = 0.0;
    double design_fs_hz = 0.0;

    int group_delay() const { return (static_cast<int>(taps.size()) - 1) / 2; }
};

// Windowed-sinc (Hamming) linear-phase FIR. Lowpass is normalized to unit DC
// gain; highpass is its spectral inversion (exact zero DC gain).
FirFilter design_fir(FilterKind kind, double cutoff_hz, double fs_hz, int n_taps);

// |H(f)| of the tap vector at frequency f, evaluated as a direct DTFT sum.
double frequency_response(const FirFilter& filter, double f_hz);

// Zero-phase filtering: forward convolution followed by a shift of
// (n_taps-1)/2 samples; the signal is treated as zero outside its support.
std::vector<double> filter_signal(const FirFilter& filter,
                                  const std::vector<double>& signal);

// Anti-alias lowpass at 12.8 Hz, integer decimation to 32 Hz, then 0.5 Hz
// highpass. Input rate must be 256 or 1024 Hz. Annotations carry over
// unchanged (they are in seconds).
eeg::EegRecord resample_to_32hz(const eeg::EegRecord& record);

// Segmented 8 s windows. Per-window storage is channel-major (N x 256),
// which is also the (N, 256, 1) network input layout.
struct WindowBatch {
    std::string record_id;
    double ga_weeks = 0.0;
    std::size_t n_channels = 0;
    double stride_s = 1.0;
    std::vector<double> data;  // n_windows * n_channels * 256
    std::vector<int> labels;
    std::vector<double> start_times_s;
    std::vector<double> sample_weights;

    std::size_t size() const { return start_times_s.size(); }
    std::size_t window_values() const { return n_channels * kWindowSamples; }
    double* window(std::size_t w) { return data.data() + w * window_values(); }
    const double* window(std::size_t w) const {
        return data.data() + w * window_values();
    }
};

// Windows of a 32 Hz record at an integer stride of 1..8 seconds. Labels 0,
// weights 1. Throws if the record is shorter than one window.
WindowBatch segment(const eeg::EegRecord& record_32hz, int stride_s = 1);

// label = 1 iff at least `overlap_threshold` of the window's time span lies
// inside annotated seizure time.
void assign_weak_labels(WindowBatch& batch, const eeg::AnnotationSet& annotations,
                        double overlap_threshold = 0.5);

// Drops windows that touch the first/last guard_s seconds of the record
// (filter edge transients); only leading/trailing windows go, so the stride
// stays constant. Training uses this, inference does not.
void apply_edge_guard(WindowBatch& batch, double record_duration_s,
                      double guard_s = 2.0);

}  // namespace presda::dsp
