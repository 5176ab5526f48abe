#include "data/render.hpp"

#include <cmath>

#include "errors.hpp"

namespace abdgen::data {

namespace {

void fill_rgb(math::Tensor& img, const Tint& tint) {
    std::size_t hw = img.dims[1] * img.dims[2];
    for (std::size_t i = 0; i < hw; ++i) {
        img.data[i] = tint.r;
        img.data[hw + i] = tint.g;
        img.data[2 * hw + i] = tint.b;
    }
}

void put_rgb(math::Tensor& img, std::size_t y, std::size_t x, double r, double g, double b) {
    std::size_t hw = img.dims[1] * img.dims[2];
    img.data[y * img.dims[2] + x] = r;
    img.data[hw + y * img.dims[2] + x] = g;
    img.data[2 * hw + y * img.dims[2] + x] = b;
}

}  // namespace

math::Tensor render_mario(std::size_t cell, const Tint& tint) {
    if (cell >= 9) throw ValueOutOfRange("render_mario: cell " + std::to_string(cell));
    math::Tensor img{{3, 27, 27}};
    fill_rgb(img, tint);
    std::size_t row = cell / 3, col = cell % 3;
    for (std::size_t y = 0; y < 9; ++y) {
        for (std::size_t x = 0; x < 9; ++x) {
            std::size_t py = row * 9 + y, px = col * 9 + x;
            if (y < 3)
                put_rgb(img, py, px, 0.15, 0.25, 0.9);  // cap
            else if (y < 5 && x >= 3 && x < 6)
                put_rgb(img, py, px, 0.95, 0.85, 0.6);  // face
            else
                put_rgb(img, py, px, 0.9, 0.12, 0.1);  // body
        }
    }
    return img;
}

math::Tensor render_shape(std::size_t shape, std::size_t scale, std::size_t orient) {
    if (shape >= 3 || scale >= 3 || orient >= 4)
        throw ValueOutOfRange("render_shape: value out of range");
    math::Tensor img{{1, 32, 32}};
    const double c = 15.5;
    const double radius = 4.0 + 4.0 * static_cast<double>(scale);  // 4, 8, 12
    for (std::size_t y = 0; y < 32; ++y) {
        for (std::size_t x = 0; x < 32; ++x) {
            double dy = static_cast<double>(y) - c, dx = static_cast<double>(x) - c;
            bool inside = false;
            switch (shape) {
                case 0: inside = std::abs(dy) <= radius && std::abs(dx) <= radius; break;
                case 1: inside = dy * dy + dx * dx <= radius * radius; break;
                case 2:
                    // upward triangle: widens toward the bottom edge
                    inside = dy >= -radius && dy <= radius &&
                             std::abs(dx) <= (dy + radius) * 0.5;
                    break;
            }
            if (inside) img.data[y * 32 + x] = 1.0;
        }
    }
    // orientation marker in one corner: 0 tl, 1 tr, 2 br, 3 bl
    std::size_t my = (orient == 0 || orient == 1) ? 1 : 27;
    std::size_t mx = (orient == 0 || orient == 3) ? 1 : 27;
    for (std::size_t y = my; y < my + 4; ++y)
        for (std::size_t x = mx; x < mx + 4; ++x) img.data[y * 32 + x] = 1.0;
    return img;
}

math::Tensor render_attrib(std::size_t age, std::size_t gender, const Tint& tint) {
    if (age >= 3 || gender >= 2) throw ValueOutOfRange("render_attrib: value out of range");
    math::Tensor img{{3, 27, 27}};
    fill_rgb(img, tint);
    const int cy = 13, cx = 13;
    // rings at radii 4, 8, 12 (Chebyshev), innermost first
    for (std::size_t ring = 0; ring <= age; ++ring) {
        int r = 4 + 4 * static_cast<int>(ring);
        for (int y = 0; y < 27; ++y)
            for (int x = 0; x < 27; ++x) {
                int d = std::max(std::abs(y - cy), std::abs(x - cx));
                if (d == r) put_rgb(img, y, x, 0.95, 0.95, 0.9);
            }
    }
    if (gender == 1) {
        for (int y = cy - 2; y <= cy + 2; ++y)
            for (int x = cx - 2; x <= cx + 2; ++x) put_rgb(img, y, x, 0.95, 0.4, 0.75);
    } else {
        for (int d = -2; d <= 2; ++d) {
            put_rgb(img, cy + d, cx, 0.3, 0.75, 0.95);
            put_rgb(img, cy, cx + d, 0.3, 0.75, 0.95);
        }
    }
    return img;
}

}  // namespace abdgen::data
