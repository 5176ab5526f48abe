#include "data/metrics.hpp"

#include "errors.hpp"

namespace abdgen::data {

double clipped_mse(const math::Tensor& a, const math::Tensor& b, std::size_t piece) {
    if (a.rank() != 3 || b.rank() != 3 || !a.same_shape(b))
        throw ShapeMismatch("clipped_mse: " + a.shape_str() + " vs " + b.shape_str());
    std::size_t c = a.dims[0], h = a.dims[1], w = a.dims[2];
    if (piece == 0 || h % piece != 0 || w % piece != 0)
        throw IndivisiblePiece("clipped_mse: piece " + std::to_string(piece) +
                               " does not divide " + std::to_string(h) + "x" + std::to_string(w));
    double worst = 0.0;
    for (std::size_t ty = 0; ty < h / piece; ++ty) {
        for (std::size_t tx = 0; tx < w / piece; ++tx) {
            double acc = 0.0;
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t y = ty * piece; y < (ty + 1) * piece; ++y)
                    for (std::size_t x = tx * piece; x < (tx + 1) * piece; ++x) {
                        double d = a.at3(ch, y, x) - b.at3(ch, y, x);
                        acc += d * d;
                    }
            worst = std::max(worst, acc / static_cast<double>(c * piece * piece));
        }
    }
    return worst;
}

double grounding_accuracy(const vq::GroundingAssignment& pred,
                          const vq::GroundingAssignment& truth) {
    if (pred.size() != truth.size())
        throw SchemaMismatch("grounding_accuracy: image counts differ");
    std::size_t total = 0, hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != truth[i].size())
            throw SchemaMismatch("grounding_accuracy: symbol counts differ at image " +
                                 std::to_string(i));
        for (std::size_t s = 0; s < pred[i].size(); ++s) {
            ++total;
            if (pred[i][s] == truth[i][s]) ++hits;
        }
    }
    if (total == 0) throw SchemaMismatch("grounding_accuracy: no slots");
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace abdgen::data
