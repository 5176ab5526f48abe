#pragma once

#include <cstddef>
#include <vector>

namespace abdgen::math::kernels {

// Precomputed valid kernel taps per spatial coordinate, separable by axis.
// Building them once per kernel call removes the per-pixel bounds checks and
// the stride divisions from the inner loops. Taps are listed in ascending
// kernel order, so accumulation order is identical across backends.
struct Tap {
    std::size_t k;    // kernel coordinate
    std::size_t src;  // source coordinate on the other tensor
};

// Forward direction: src = out*stride + k - pad, valid when inside [0, src_n).
inline std::vector<std::vector<Tap>> gather_taps(std::size_t out_n, std::size_t src_n,
                                                 std::size_t ksz, std::size_t stride,
                                                 std::size_t pad) {
    std::vector<std::vector<Tap>> taps(out_n);
    for (std::size_t o = 0; o < out_n; ++o)
        for (std::size_t k = 0; k < ksz; ++k) {
            std::ptrdiff_t s = static_cast<std::ptrdiff_t>(o * stride + k) -
                               static_cast<std::ptrdiff_t>(pad);
            if (s >= 0 && s < static_cast<std::ptrdiff_t>(src_n))
                taps[o].push_back({k, static_cast<std::size_t>(s)});
        }
    return taps;
}

// Scatter direction: src = (big + pad - k) / stride, valid on exact division.
inline std::vector<std::vector<Tap>> scatter_taps(std::size_t big_n, std::size_t small_n,
                                                  std::size_t ksz, std::size_t stride,
                                                  std::size_t pad) {
    std::vector<std::vector<Tap>> taps(big_n);
    for (std::size_t b = 0; b < big_n; ++b)
        for (std::size_t k = 0; k < ksz; ++k) {
            std::ptrdiff_t num =
                static_cast<std::ptrdiff_t>(b + pad) - static_cast<std::ptrdiff_t>(k);
            if (num < 0 || num % static_cast<std::ptrdiff_t>(stride)) continue;
            std::size_t s = static_cast<std::size_t>(num) / stride;
            if (s < small_n) taps[b].push_back({k, s});
        }
    return taps;
}

// Per kernel coordinate: the (out, src) pairs it touches; used by the weight
// gradients.
inline std::vector<std::vector<Tap>> weight_taps(std::size_t out_n, std::size_t src_n,
                                                 std::size_t ksz, std::size_t stride,
                                                 std::size_t pad) {
    std::vector<std::vector<Tap>> taps(ksz);
    for (std::size_t o = 0; o < out_n; ++o)
        for (std::size_t k = 0; k < ksz; ++k) {
            std::ptrdiff_t s = static_cast<std::ptrdiff_t>(o * stride + k) -
                               static_cast<std::ptrdiff_t>(pad);
            if (s >= 0 && s < static_cast<std::ptrdiff_t>(src_n))
                taps[k].push_back({o, static_cast<std::size_t>(s)});
        }
    return taps;
}

}  // namespace abdgen::math::kernels
