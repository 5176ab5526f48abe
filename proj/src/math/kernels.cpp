#include "math/kernels.hpp"

#include <atomic>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace abdgen::math::kernels {

namespace {
Backend default_backend() {
#ifdef _OPENMP
    // the parallel backend only pays off with real threads
    return omp_get_max_threads() > 1 ? Backend::openmp : Backend::serial;
#else
    return Backend::serial;
#endif
}
std::atomic<Backend> g_backend{default_backend()};
}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

ConvGeom conv_geom(std::size_t in_c, std::size_t in_h, std::size_t in_w, std::size_t out_c,
                   std::size_t k, std::size_t stride, std::size_t pad) {
    if (in_h + 2 * pad < k || in_w + 2 * pad < k)
        throw std::invalid_argument("conv_geom: kernel larger than padded input");
    ConvGeom g{in_c, in_h, in_w, out_c, k, stride, pad, 0, 0};
    g.out_h = (in_h + 2 * pad - k) / stride + 1;
    g.out_w = (in_w + 2 * pad - k) / stride + 1;
    return g;
}

DeconvGeom deconv_geom(std::size_t in_c, std::size_t in_h, std::size_t in_w, std::size_t out_c,
                       std::size_t k, std::size_t stride, std::size_t pad, std::size_t out_h,
                       std::size_t out_w) {
    // The target size must be the preimage of (in_h, in_w) under the matching
    // forward convolution.
    if ((out_h + 2 * pad - k) / stride + 1 != in_h || (out_w + 2 * pad - k) / stride + 1 != in_w)
        throw std::invalid_argument("deconv_geom: output size incompatible with stride/pad/k");
    return DeconvGeom{in_c, in_h, in_w, out_c, k, stride, pad, out_h, out_w};
}

#define ABDGEN_DISPATCH(fn, ...)                \
    do {                                        \
        if (backend() == Backend::openmp)       \
            openmp::fn(__VA_ARGS__);            \
        else                                    \
            serial::fn(__VA_ARGS__);            \
    } while (0)

void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a, bool trans_b, bool accumulate) {
    ABDGEN_DISPATCH(matmul, a, b, c, m, k, n, trans_a, trans_b, accumulate);
}

void conv2d_forward(const double* x, const double* w, double* out, const ConvGeom& g) {
    ABDGEN_DISPATCH(conv2d_forward, x, w, out, g);
}

void conv2d_grad_input(const double* gout, const double* w, double* gx, const ConvGeom& g) {
    ABDGEN_DISPATCH(conv2d_grad_input, gout, w, gx, g);
}

void conv2d_grad_weight(const double* gout, const double* x, double* gw, const ConvGeom& g) {
    ABDGEN_DISPATCH(conv2d_grad_weight, gout, x, gw, g);
}

void deconv2d_forward(const double* x, const double* w, double* out, const DeconvGeom& g) {
    ABDGEN_DISPATCH(deconv2d_forward, x, w, out, g);
}

void deconv2d_grad_input(const double* gout, const double* w, double* gx, const DeconvGeom& g) {
    ABDGEN_DISPATCH(deconv2d_grad_input, gout, w, gx, g);
}

void deconv2d_grad_weight(const double* gout, const double* x, double* gw, const DeconvGeom& g) {
    ABDGEN_DISPATCH(deconv2d_grad_weight, gout, x, gw, g);
}

#undef ABDGEN_DISPATCH

}  // namespace abdgen::math::kernels
