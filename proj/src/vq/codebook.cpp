#include "vq/codebook.hpp"

#include <cmath>

namespace abdgen::vq {

namespace {
double row_distance(const math::Tensor& z, const math::Tensor& codebook, std::size_t row) {
    double s = 0.0;
    for (std::size_t c = 0; c < codebook.dims[1]; ++c) {
        double d = z[c] - codebook.at2(row, c);
        s += d * d;
    }
    return std::sqrt(s);
}
}  // namespace

SymbolGrounding ground_one(const math::Tensor& z, const math::Tensor& codebook) {
    if (codebook.rank() != 2 || z.rank() != 1 || z.dims[0] != codebook.dims[1])
        throw DimensionMismatch("ground: embedding " + z.shape_str() + " vs codebook " +
                                codebook.shape_str());
    std::size_t k = codebook.dims[0];
    std::vector<double> dist(k);
    double dmin = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        dist[r] = row_distance(z, codebook, r);
        if (r == 0 || dist[r] < dmin) dmin = dist[r];
    }
    SymbolGrounding out;
    out.probs.resize(k);
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        out.probs[r] = std::exp(dmin - dist[r]);
        total += out.probs[r];
    }
    for (double& p : out.probs) p /= total;
    out.value = 0;
    for (std::size_t r = 1; r < k; ++r)
        if (out.probs[r] > out.probs[out.value]) out.value = r;
    return out;
}

GroundingResult ground(const std::vector<math::Tensor>& z_per_symbol,
                       const std::vector<const math::Tensor*>& codebooks) {
    if (z_per_symbol.size() != codebooks.size())
        throw DimensionMismatch("ground: symbol count mismatch");
    GroundingResult out;
    for (std::size_t s = 0; s < codebooks.size(); ++s) {
        SymbolGrounding g = ground_one(z_per_symbol[s], *codebooks[s]);
        out.values.push_back(g.value);
        out.embeddings.push_back(retrieve_one(g.value, *codebooks[s]));
        out.probs.push_back(std::move(g.probs));
    }
    return out;
}

math::Tensor retrieve_one(std::size_t value, const math::Tensor& codebook) {
    if (codebook.rank() != 2) throw DimensionMismatch("retrieve: codebook must be a matrix");
    if (value >= codebook.dims[0])
        throw ValueOutOfRange("retrieve: value " + std::to_string(value) + " not below " +
                              std::to_string(codebook.dims[0]));
    math::Tensor row{{codebook.dims[1]}};
    for (std::size_t c = 0; c < codebook.dims[1]; ++c) row[c] = codebook.at2(value, c);
    return row;
}

std::vector<math::Tensor> retrieve(const std::vector<std::size_t>& values,
                                   const std::vector<const math::Tensor*>& codebooks) {
    if (values.size() != codebooks.size())
        throw DimensionMismatch("retrieve: symbol count mismatch");
    std::vector<math::Tensor> out;
    for (std::size_t s = 0; s < values.size(); ++s)
        out.push_back(retrieve_one(values[s], *codebooks[s]));
    return out;
}

BindingConstraint bind_negative(const SlotRef& negative_slot, const math::Tensor& z,
                                const std::vector<std::pair<SlotRef, math::Tensor>>& positives) {
    if (positives.empty()) throw EmptyPositives("bind_negative: no positive slots");
    std::size_t best = 0;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        const math::Tensor& p = positives[i].second;
        if (p.dims != z.dims)
            throw DimensionMismatch("bind_negative: embedding shapes differ");
        double s = 0.0;
        for (std::size_t c = 0; c < z.numel(); ++c) {
            double d = z[c] - p[c];
            s += d * d;
        }
        double dist = std::sqrt(s);
        if (i == 0 || dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return BindingConstraint{negative_slot, positives[best].first};
}

math::Tensor init_codebook(std::size_t cardinality, std::size_t embed_dim, Rng& rng) {
    math::Tensor cb{{cardinality, embed_dim}};
    for (std::size_t r = 0; r < cardinality; ++r) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (std::size_t c = 0; c < embed_dim; ++c) cb.at2(r, c) = rng.uniform(-0.5, 0.5);
            double min_dist = 1e100;
            for (std::size_t q = 0; q < r; ++q) {
                double s = 0.0;
                for (std::size_t c = 0; c < embed_dim; ++c) {
                    double d = cb.at2(r, c) - cb.at2(q, c);
                    s += d * d;
                }
                min_dist = std::min(min_dist, std::sqrt(s));
            }
            if (r == 0 || min_dist > 0.1) break;
        }
    }
    return cb;
}

std::string codebook_block(const std::string& symbol_name) { return "codebook." + symbol_name; }

}  // namespace abdgen::vq
