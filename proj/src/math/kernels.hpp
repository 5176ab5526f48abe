#pragma once

#include <cstddef>

namespace abdgen::math::kernels {

// Two interchangeable backends. "serial" is the reference implementation;
// "openmp" parallelizes the outer output loop of each kernel. Every kernel is
// written in gather form (one writer per output element, fixed inner
// accumulation order), so the two backends produce bitwise-identical results.
enum class Backend { serial, openmp };

void set_backend(Backend b);
Backend backend();
int max_threads();

struct ConvGeom {
    std::size_t in_c, in_h, in_w;
    std::size_t out_c;
    std::size_t k, stride, pad;
    std::size_t out_h, out_w;
};

// Forward convolution geometry: out = (in + 2*pad - k) / stride + 1.
ConvGeom conv_geom(std::size_t in_c, std::size_t in_h, std::size_t in_w, std::size_t out_c,
                   std::size_t k, std::size_t stride, std::size_t pad);

// Transposed convolution is specified by its target output size; it must be
// the exact inverse geometry of a forward convolution with the same k/stride/pad.
struct DeconvGeom {
    std::size_t in_c, in_h, in_w;
    std::size_t out_c;
    std::size_t k, stride, pad;
    std::size_t out_h, out_w;
};

DeconvGeom deconv_geom(std::size_t in_c, std::size_t in_h, std::size_t in_w, std::size_t out_c,
                       std::size_t k, std::size_t stride, std::size_t pad, std::size_t out_h,
                       std::size_t out_w);

// C[M,N] (+)= op(A) * op(B); op controlled by trans flags. A is [M,K] (or
// [K,M] when transposed), B is [K,N] (or [N,K]).
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a, bool trans_b, bool accumulate);

// x: [in_c, in_h, in_w], w: [out_c, in_c, k, k], out: [out_c, out_h, out_w].
void conv2d_forward(const double* x, const double* w, double* out, const ConvGeom& g);
// grad wrt x from grad wrt out (accumulates).
void conv2d_grad_input(const double* gout, const double* w, double* gx, const ConvGeom& g);
// grad wrt w (accumulates).
void conv2d_grad_weight(const double* gout, const double* x, double* gw, const ConvGeom& g);

// x: [in_c, in_h, in_w], w: [in_c, out_c, k, k], out: [out_c, out_h, out_w].
void deconv2d_forward(const double* x, const double* w, double* out, const DeconvGeom& g);
void deconv2d_grad_input(const double* gout, const double* w, double* gx, const DeconvGeom& g);
void deconv2d_grad_weight(const double* gout, const double* x, double* gw, const DeconvGeom& g);

namespace serial {
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a, bool trans_b, bool accumulate);
void conv2d_forward(const double* x, const double* w, double* out, const ConvGeom& g);
void conv2d_grad_input(const double* gout, const double* w, double* gx, const ConvGeom& g);
void conv2d_grad_weight(const double* gout, const double* x, double* gw, const ConvGeom& g);
void deconv2d_forward(const double* x, const double* w, double* out, const DeconvGeom& g);
void deconv2d_grad_input(const double* gout, const double* w, double* gx, const DeconvGeom& g);
void deconv2d_grad_weight(const double* gout, const double* x, double* gw, const DeconvGeom& g);
}  // namespace serial

namespace openmp {
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a, bool trans_b, bool accumulate);
void conv2d_forward(const double* x, const double* w, double* out, const ConvGeom& g);
void conv2d_grad_input(const double* gout, const double* w, double* gx, const ConvGeom& g);
void conv2d_grad_weight(const double* gout, const double* x, double* gw, const ConvGeom& g);
void deconv2d_forward(const double* x, const double* w, double* out, const DeconvGeom& g);
void deconv2d_grad_input(const double* gout, const double* w, double* gx, const DeconvGeom& g);
void deconv2d_grad_weight(const double* gout, const double* x, double* gw, const DeconvGeom& g);
}  // namespace openmp

}  // namespace abdgen::math::kernels
