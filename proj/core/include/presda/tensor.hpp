#pragma once

#include <cstddef>
#include <vector>

namespace presda::net {

// Dense (rows, len, maps) tensor: rows = EEG channels (possibly many windows
// stacked), len = temporal samples, maps = feature maps. Maps are contiguous,
// matching the conv kernels' innermost loop.
struct Tensor3 {
    int rows = 0;
    int len = 0;
    int maps = 0;
    std::vector<double> d;

    Tensor3() = default;
    Tensor3(int rows_, int len_, int maps_)
        : rows(rows_), len(len_), maps(maps_),
          d(static_cast<std::size_t>(rows_) * len_ * maps_, 0.0) {}

    std::size_t idx(int r, int t, int f) const {
        return (static_cast<std::size_t>(r) * len + t) * maps + f;
    }
    double& at(int r, int t, int f) { return d[idx(r, t, f)]; }
    double at(int r, int t, int f) const { return d[idx(r, t, f)]; }

    std::size_t size() const { return d.size(); }
    bool same_shape(const Tensor3& o) const {
        return rows == o.rows && len == o.len && maps == o.maps;
    }
};

}  // namespace presda::net
