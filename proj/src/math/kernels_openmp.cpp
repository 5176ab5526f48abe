#include "math/kernel_taps.hpp"
#include "math/kernels.hpp"

// Parallel backend. Each kernel distributes independent output elements over
// threads; tap tables and per-element accumulation order match the serial
// reference, so results are bitwise identical for any thread count.

namespace abdgen::math::kernels::openmp {

void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a, bool trans_b, bool accumulate) {
    const std::ptrdiff_t mm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < mm; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                double av = trans_a ? a[kk * m + i] : a[i * k + kk];
                double bv = trans_b ? b[j * k + kk] : b[kk * n + j];
                acc += av * bv;
            }
            if (accumulate)
                c[i * n + j] += acc;
            else
                c[i * n + j] = acc;
        }
    }
}

void conv2d_forward(const double* x, const double* w, double* out, const ConvGeom& g) {
    auto ty = gather_taps(g.out_h, g.in_h, g.k, g.stride, g.pad);
    auto tx = gather_taps(g.out_w, g.in_w, g.k, g.stride, g.pad);
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(g.out_c * g.out_h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < total; ++row) {
        std::size_t o = static_cast<std::size_t>(row) / g.out_h;
        std::size_t oy = static_cast<std::size_t>(row) % g.out_h;
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            double acc = 0.0;
            for (std::size_t c = 0; c < g.in_c; ++c) {
                const double* xc = x + c * g.in_h * g.in_w;
                const double* wc = w + (o * g.in_c + c) * g.k * g.k;
                for (const Tap& a : ty[oy])
                    for (const Tap& b : tx[ox])
                        acc += xc[a.src * g.in_w + b.src] * wc[a.k * g.k + b.k];
            }
            out[(o * g.out_h + oy) * g.out_w + ox] = acc;
        }
    }
}

void conv2d_grad_input(const double* gout, const double* w, double* gx, const ConvGeom& g) {
    auto ty = scatter_taps(g.in_h, g.out_h, g.k, g.stride, g.pad);
    auto tx = scatter_taps(g.in_w, g.out_w, g.k, g.stride, g.pad);
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(g.in_c * g.in_h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < total; ++row) {
        std::size_t c = static_cast<std::size_t>(row) / g.in_h;
        std::size_t iy = static_cast<std::size_t>(row) % g.in_h;
        for (std::size_t ix = 0; ix < g.in_w; ++ix) {
            double acc = 0.0;
            for (std::size_t o = 0; o < g.out_c; ++o) {
                const double* go = gout + o * g.out_h * g.out_w;
                const double* wc = w + (o * g.in_c + c) * g.k * g.k;
                for (const Tap& a : ty[iy])
                    for (const Tap& b : tx[ix])
                        acc += go[a.src * g.out_w + b.src] * wc[a.k * g.k + b.k];
            }
            gx[(c * g.in_h + iy) * g.in_w + ix] += acc;
        }
    }
}

void conv2d_grad_weight(const double* gout, const double* x, double* gw, const ConvGeom& g) {
    auto ty = weight_taps(g.out_h, g.in_h, g.k, g.stride, g.pad);
    auto tx = weight_taps(g.out_w, g.in_w, g.k, g.stride, g.pad);
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(g.out_c * g.in_c);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t oc = 0; oc < total; ++oc) {
        std::size_t o = static_cast<std::size_t>(oc) / g.in_c;
        std::size_t c = static_cast<std::size_t>(oc) % g.in_c;
        const double* go = gout + o * g.out_h * g.out_w;
        const double* xc = x + c * g.in_h * g.in_w;
        for (std::size_t ky = 0; ky < g.k; ++ky)
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                double acc = 0.0;
                for (const Tap& a : ty[ky])
                    for (const Tap& b : tx[kx])
                        acc += go[a.k * g.out_w + b.k] * xc[a.src * g.in_w + b.src];
                gw[((o * g.in_c + c) * g.k + ky) * g.k + kx] += acc;
            }
    }
}

void deconv2d_forward(const double* x, const double* w, double* out, const DeconvGeom& g) {
    auto ty = scatter_taps(g.out_h, g.in_h, g.k, g.stride, g.pad);
    auto tx = scatter_taps(g.out_w, g.in_w, g.k, g.stride, g.pad);
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(g.out_c * g.out_h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < total; ++row) {
        std::size_t o = static_cast<std::size_t>(row) / g.out_h;
        std::size_t y = static_cast<std::size_t>(row) % g.out_h;
        for (std::size_t xx = 0; xx < g.out_w; ++xx) {
            double acc = 0.0;
            for (std::size_t c = 0; c < g.in_c; ++c) {
                const double* xc = x + c * g.in_h * g.in_w;
                const double* wc = w + (c * g.out_c + o) * g.k * g.k;
                for (const Tap& a : ty[y])
                    for (const Tap& b : tx[xx])
                        acc += xc[a.src * g.in_w + b.src] * wc[a.k * g.k + b.k];
            }
            out[(o * g.out_h + y) * g.out_w + xx] = acc;
        }
    }
}

void deconv2d_grad_input(const double* gout, const double* w, double* gx, const DeconvGeom& g) {
    auto ty = gather_taps(g.in_h, g.out_h, g.k, g.stride, g.pad);
    auto tx = gather_taps(g.in_w, g.out_w, g.k, g.stride, g.pad);
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(g.in_c * g.in_h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < total; ++row) {
        std::size_t c = static_cast<std::size_t>(row) / g.in_h;
        std::size_t iy = static_cast<std::size_t>(row) % g.in_h;
        for (std::size_t ix = 0; ix < g.in_w; ++ix) {
            double acc = 0.0;
            for (std::size_t o = 0; o < g.out_c; ++o) {
                const double* go = gout + o * g.out_h * g.out_w;
                const double* wc = w + (c * g.out_c + o) * g.k * g.k;
                for (const Tap& a : ty[iy])
                    for (const Tap& b : tx[ix])
                        acc += go[a.src * g.out_w + b.src] * wc[a.k * g.k + b.k];
            }
            gx[(c * g.in_h + iy) * g.in_w + ix] += acc;
        }
    }
}

void deconv2d_grad_weight(const double* gout, const double* x, double* gw, const DeconvGeom& g) {
    auto ty = weight_taps(g.in_h, g.out_h, g.k, g.stride, g.pad);
    auto tx = weight_taps(g.in_w, g.out_w, g.k, g.stride, g.pad);
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(g.in_c * g.out_c);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t co = 0; co < total; ++co) {
        std::size_t c = static_cast<std::size_t>(co) / g.out_c;
        std::size_t o = static_cast<std::size_t>(co) % g.out_c;
        const double* go = gout + o * g.out_h * g.out_w;
        const double* xc = x + c * g.in_h * g.in_w;
        for (std::size_t ky = 0; ky < g.k; ++ky)
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                double acc = 0.0;
                for (const Tap& a : ty[ky])
                    for (const Tap& b : tx[kx])
                        acc += xc[a.k * g.in_w + b.k] * go[a.src * g.out_w + b.src];
                gw[((c * g.out_c + o) * g.k + ky) * g.k + kx] += acc;
            }
    }
}

}  // namespace abdgen::math::kernels::openmp
