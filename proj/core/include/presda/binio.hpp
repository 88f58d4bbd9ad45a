#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace presda {

// Little-endian float32 blob helpers (record samples, checkpoint tensors).
// The build targets little-endian hosts; a static_assert guards the cast.

inline void write_f32(std::ostream& os, const float* data, std::size_t n) {
    static_assert(sizeof(float) == 4);
    os.write(reinterpret_cast<const char*>(data),
             static_cast<std::streamsize>(n * 4));
    if (!os) throw std::runtime_error("write_f32: stream failure");
}

inline void read_f32(std::istream& is, float* data, std::size_t n) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
    if (static_cast<std::size_t>(is.gcount()) != n * 4)
        throw std::runtime_error("read_f32: truncated stream");
}

inline void write_f32(std::ostream& os, const std::vector<double>& v) {
    std::vector<float> tmp(v.begin(), v.end());
    write_f32(os, tmp.data(), tmp.size());
}

inline std::vector<double> read_f32_as_double(std::istream& is, std::size_t n) {
    std::vector<float> tmp(n);
    read_f32(is, tmp.data(), n);
    return std::vector<double>(tmp.begin(), tmp.end());
}

}  // namespace presda
