#include "presda/infer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "presda/dsp.hpp"
#include "presda/metrics.hpp"
#include "presda/net.hpp"

namespace presda::infer {

const char* to_string(TraceStage stage) {
    switch (stage) {
        case TraceStage::Raw: return "raw";
        case TraceStage::Smoothed: return "smoothed";
        case TraceStage::Fused: return "fused";
    }
    return "?";
}

const char* to_string(FusionMethod method) {
    return method == FusionMethod::Arithmetic ? "arithmetic" : "geometric";
}

FusionMethod fusion_method_from_string(const std::string& s) {
    if (s == "arithmetic") return FusionMethod::Arithmetic;
    if (s == "geometric") return FusionMethod::Geometric;
    throw std::invalid_argument("unknown fusion method '" + s + "'");
}

void ProbabilityTrace::validate() const {
    if (start_times_s.size() != probs.size())
        throw std::invalid_argument("trace: time/prob size mismatch");
    for (double p : probs)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("trace: probability outside [0, 1]");
    for (std::size_t i = 1; i < start_times_s.size(); ++i) {
        const double dt = start_times_s[i] - start_times_s[i - 1];
        if (!(dt > 0.0) || std::abs(dt - stride_s) > 1e-9)
            throw std::invalid_argument("trace: timestamps must increase by the stride");
    }
}

void FusionSpec::validate() const {
    if (alphas.empty()) throw std::invalid_argument("fusion: empty alpha vector");
    double sum = 0.0;
    for (double a : alphas) {
        if (a < 0.0) throw std::invalid_argument("fusion: alpha < 0");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("fusion: alphas must sum to 1");
}

ProbabilityTrace predict_trace(const train::EnsembleModel& model,
                               const eeg::EegRecord& record_32hz, int stride_s,
                               int batch_windows) {
    if (model.members.empty())
        throw std::invalid_argument("predict_trace: model has no members");
    const dsp::WindowBatch windows = dsp::segment(record_32hz, stride_s);
    const int n_channels = static_cast<int>(windows.n_channels);
    const std::size_t n = windows.size();

    ProbabilityTrace trace;
    trace.record_id = record_32hz.record_id;
    trace.stride_s = static_cast<double>(stride_s);
    trace.start_times_s = windows.start_times_s;
    trace.probs.assign(n, 0.0);
    trace.stage = TraceStage::Raw;

    const double inv_members = 1.0 / static_cast<double>(model.members.size());
    for (std::size_t w0 = 0; w0 < n; w0 += batch_windows) {
        const std::size_t w1 = std::min(n, w0 + batch_windows);
        const int batch = static_cast<int>(w1 - w0);
        net::Tensor3 stacked(batch * n_channels, dsp::kWindowSamples, 1);
        std::memcpy(stacked.d.data(), windows.window(w0),
                    stacked.size() * sizeof(double));
        for (const auto& member : model.members) {
            const auto out = net::model_forward_batch(member.params, stacked,
                                                      n_channels, net::Mode::Infer);
            for (int i = 0; i < batch; ++i)
                trace.probs[w0 + i] += out.seizure_probs[i] * inv_members;
        }
    }
    return trace;
}

ProbabilityTrace moving_average(const ProbabilityTrace& trace, int width_windows) {
    if (width_windows < 1 || width_windows % 2 == 0)
        throw std::invalid_argument("moving_average: width must be odd and >= 1");
    const int half = width_windows / 2;
    const int n = static_cast<int>(trace.size());
    ProbabilityTrace out = trace;
    out.stage = TraceStage::Smoothed;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += trace.probs[j];
        out.probs[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

ProbabilityTrace fuse(const std::vector<ProbabilityTrace>& traces,
                      const FusionSpec& spec) {
    spec.validate();
    if (traces.size() != spec.alphas.size())
        throw std::invalid_argument("fuse: one alpha per trace required");
    if (traces.empty()) throw std::invalid_argument("fuse: no traces");
    const auto& first = traces.front();
    for (const auto& t : traces) {
        if (t.size() != first.size() || t.record_id != first.record_id ||
            std::abs(t.stride_s - first.stride_s) > 1e-9)
            throw std::invalid_argument("fuse: traces are not aligned");
        for (std::size_t i = 0; i < t.size(); ++i)
            if (std::abs(t.start_times_s[i] - first.start_times_s[i]) > 1e-9)
                throw std::invalid_argument("fuse: traces are not aligned");
    }

    ProbabilityTrace out = first;
    out.stage = TraceStage::Fused;
    const std::size_t n = first.size();

    // degenerate simplex corner: reproduce that classifier bit-exactly,
    // bypassing the geometric clamp
    for (std::size_t c = 0; c < traces.size(); ++c)
        if (spec.alphas[c] == 1.0) {
            out.probs = traces[c].probs;
            return out;
        }

    for (std::size_t i = 0; i < n; ++i) {
        double v;
        if (spec.method == FusionMethod::Arithmetic) {
            v = 0.0;
            for (std::size_t c = 0; c < traces.size(); ++c) {
                if (spec.alphas[c] == 0.0) continue;  // exact endpoints
                v += spec.alphas[c] * traces[c].probs[i];
            }
        } else {
            v = 1.0;
            for (std::size_t c = 0; c < traces.size(); ++c) {
                if (spec.alphas[c] == 0.0) continue;
                const double p = std::max(traces[c].probs[i], kGeometricFloor);
                v *= std::pow(p, spec.alphas[c]);
            }
        }
        out.probs[i] = v;
    }
    return out;
}

FusionSelection select_fusion(
    const std::vector<std::vector<ProbabilityTrace>>& traces_by_classifier,
    const std::vector<std::vector<int>>& labels_by_record, double grid_step) {
    if (traces_by_classifier.size() != 2)
        throw std::invalid_argument("select_fusion: exactly two classifiers expected");
    const std::size_t n_records = labels_by_record.size();
    if (traces_by_classifier[0].size() != n_records ||
        traces_by_classifier[1].size() != n_records || n_records == 0)
        throw std::invalid_argument("select_fusion: per-record input misalignment");
    if (grid_step <= 0.0 || grid_step > 1.0)
        throw std::invalid_argument("select_fusion: bad grid step");

    const int n_steps = static_cast<int>(std::lround(1.0 / grid_step));

    auto sweep_auc = [&](FusionMethod method, double alpha) {
        std::vector<double> scores;
        std::vector<int> labels;
        FusionSpec spec{method, {alpha, 1.0 - alpha}};
        for (std::size_t r = 0; r < n_records; ++r) {
            const ProbabilityTrace fused = fuse(
                {traces_by_classifier[0][r], traces_by_classifier[1][r]}, spec);
            scores.insert(scores.end(), fused.probs.begin(), fused.probs.end());
            labels.insert(labels.end(), labels_by_record[r].begin(),
                          labels_by_record[r].end());
        }
        return metrics::auc_concat(scores, labels);
    };

    FusionSelection sel;
    sel.val_auc = -1.0;
    for (int i = 0; i <= n_steps; ++i) {
        const double alpha = static_cast<double>(i) / n_steps;
        for (FusionMethod method :
             {FusionMethod::Arithmetic, FusionMethod::Geometric}) {
            const double auc = sweep_auc(method, alpha);
            sel.sweep.push_back({method, alpha, auc});
            // strict > keeps the first candidate on ties: smaller alpha wins,
            // then arithmetic before geometric
            if (auc > sel.val_auc) {
                sel.val_auc = auc;
                sel.spec = FusionSpec{method, {alpha, 1.0 - alpha}};
            }
        }
    }
    return sel;
}

}  // namespace presda::infer
