#include "attv/sampler.hpp"

#include <cmath>

#include "errors.hpp"

namespace abdgen::attv {

using math::Graph;
using math::ParamStore;
using math::Tensor;

namespace {

Tensor scaled_normal(std::vector<std::size_t> dims, std::size_t fan_in, Rng& rng) {
    Tensor t{std::move(dims)};
    double scale = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.normal() * scale;
    return t;
}

}  // namespace

Sampler::Sampler(SamplerConfig cfg, ParamStore& ps, Rng& rng) : cfg_(std::move(cfg)), ps_(&ps) {
    cfg_.schema.validate();
    if (cfg_.rule_count < 1) throw ConfigError("sampler: rule_count must be >= 1");
    std::size_t din = cfg_.schema.count() * cfg_.schema.embed_dim + cfg_.max_case_len;
    std::size_t d = cfg_.att_dim;
    ps.create("attv.self.wq", scaled_normal({d, din}, din, rng));
    ps.create("attv.self.wk", scaled_normal({d, din}, din, rng));
    ps.create("attv.self.wv", scaled_normal({d, din}, din, rng));
    ps.create("attv.rule.zbk", scaled_normal({cfg_.rule_count, d}, d, rng));
    ps.create("attv.rule.zbar", scaled_normal({cfg_.rule_count, d}, d, rng));
    ps.create("attv.cross.wq", scaled_normal({d, 2 * d}, 2 * d, rng));
    ps.create("attv.cross.wk", scaled_normal({d, d}, d, rng));
    ps.create("attv.cross.wv", scaled_normal({d, d}, d, rng));
    for (const auto& s : cfg_.schema.symbols) {
        ps.create("attv.proj." + s.name + ".w",
                  scaled_normal({cfg_.schema.embed_dim, 3 * d}, 3 * d, rng));
        ps.create("attv.proj." + s.name + ".b", Tensor{{cfg_.schema.embed_dim}});
    }
}

std::vector<Graph::Id> Sampler::build(Graph& g, bool trainable,
                                      const vq::GroundingAssignment& current,
                                      const logic::VerificationReport& report,
                                      const std::vector<const Tensor*>& codebooks) const {
    if (report.per_rule.size() != cfg_.rule_count)
        throw ShapeMismatch("propose: report has " + std::to_string(report.per_rule.size()) +
                            " rules, sampler expects " + std::to_string(cfg_.rule_count));
    std::size_t n = current.size();
    if (n == 0 || n > cfg_.max_case_len)
        throw ShapeMismatch("propose: case length " + std::to_string(n) +
                            " exceeds max_case_len " + std::to_string(cfg_.max_case_len));
    if (codebooks.size() != cfg_.schema.count())
        throw ShapeMismatch("propose: codebook count mismatch");

    auto bind = [&](const std::string& name) {
        return trainable ? g.param(name, ps_->get(name)) : g.constant(ps_->get(name));
    };

    // Image embeddings: candidate grounding rows per symbol plus the one-hot
    // positional code.
    std::vector<Graph::Id> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (current[i].size() != cfg_.schema.count())
            throw ShapeMismatch("propose: grounding omits a symbol");
        Tensor row{{cfg_.schema.count() * cfg_.schema.embed_dim + cfg_.max_case_len}};
        std::size_t off = 0;
        for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
            Tensor emb = vq::retrieve_one(current[i][s], *codebooks[s]);
            for (std::size_t c = 0; c < emb.numel(); ++c) row[off + c] = emb[c];
            off += cfg_.schema.embed_dim;
        }
        row[off + i] = 1.0;
        rows.push_back(g.constant(row));
    }
    Graph::Id x = g.stack_rows(rows);

    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg_.att_dim));
    Graph::Id q = g.matmul(x, bind("attv.self.wq"), false, true);
    Graph::Id k = g.matmul(x, bind("attv.self.wk"), false, true);
    Graph::Id v = g.matmul(x, bind("attv.self.wv"), false, true);
    Graph::Id att = g.softmax_rows(g.scale(g.matmul(q, k, false, true), inv_sqrt_d));
    Graph::Id e = g.matmul(att, v);
    Graph::Id pooled = g.mean_rows(e);
    Graph::Id enriched = g.hconcat(g.repeat_row(pooled, n), e);

    // Rule embeddings chosen by the consistency list, merged per image by
    // cross-attention.
    Graph::Id rules = g.select_rows(bind("attv.rule.zbk"), bind("attv.rule.zbar"),
                                    report.per_rule);
    Graph::Id q2 = g.matmul(enriched, bind("attv.cross.wq"), false, true);
    Graph::Id k2 = g.matmul(rules, bind("attv.cross.wk"), false, true);
    Graph::Id v2 = g.matmul(rules, bind("attv.cross.wv"), false, true);
    Graph::Id att2 = g.softmax_rows(g.scale(g.matmul(q2, k2, false, true), inv_sqrt_d));
    Graph::Id merged = g.matmul(att2, v2);
    Graph::Id z_query = g.hconcat(enriched, merged);

    std::vector<Graph::Id> probs;
    for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
        const std::string& name = cfg_.schema.symbols[s].name;
        Graph::Id proj = g.add_rowvec(g.matmul(z_query, bind("attv.proj." + name + ".w"), false,
                                               true),
                                      bind("attv.proj." + name + ".b"));
        probs.push_back(g.dist_softmax_rows(proj, g.constant(*codebooks[s])));
    }
    return probs;
}

SamplingDistribution Sampler::propose(const vq::GroundingAssignment& current,
                                      const logic::VerificationReport& report,
                                      const std::vector<const Tensor*>& codebooks) const {
    Graph g;
    std::vector<Graph::Id> probs = build(g, false, current, report, codebooks);
    SamplingDistribution out(current.size(),
                             std::vector<std::vector<double>>(cfg_.schema.count()));
    for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
        const Tensor& p = g.value(probs[s]);
        for (std::size_t i = 0; i < current.size(); ++i) {
            out[i][s].assign(p.data.begin() + i * p.dims[1],
                             p.data.begin() + (i + 1) * p.dims[1]);
        }
    }
    return out;
}

std::vector<vq::GroundingAssignment> sample_pool(const SamplingDistribution& dist,
                                                 std::size_t pool_size, Rng& rng) {
    if (pool_size < 1) throw ConfigError("sample_pool: pool_size must be >= 1");
    std::size_t n = dist.size();
    std::vector<vq::GroundingAssignment> pool;

    vq::GroundingAssignment argmax(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& p : dist[i]) {
            std::size_t best = 0;
            for (std::size_t vv = 1; vv < p.size(); ++vv)
                if (p[vv] > p[best]) best = vv;
            argmax[i].push_back(best);
        }
    pool.push_back(argmax);

    for (std::size_t draw = 1; draw < pool_size; ++draw) {
        vq::GroundingAssignment cand(n);
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& p : dist[i]) cand[i].push_back(rng.categorical(p));
        bool dup = false;
        for (const auto& prev : pool)
            if (prev == cand) {
                dup = true;
                break;
            }
        if (!dup) pool.push_back(std::move(cand));
    }
    return pool;
}

void Sampler::update(const vq::GroundingAssignment& current,
                     const logic::VerificationReport& report,
                     const std::vector<const Tensor*>& codebooks,
                     const vq::GroundingAssignment& targets,
                     const std::vector<std::vector<bool>>& mask, double lr, double momentum) {
    std::size_t masked = 0;
    for (const auto& per_image : mask)
        for (bool b : per_image)
            if (b) ++masked;
    if (masked == 0) return;  // forgetting guard: no slots, no update

    Graph g;
    std::vector<Graph::Id> probs = build(g, true, current, report, codebooks);
    std::vector<Graph::Id> terms;
    for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
        std::vector<std::size_t> t(current.size());
        std::vector<bool> m(current.size());
        for (std::size_t i = 0; i < current.size(); ++i) {
            t[i] = targets[i][s];
            m[i] = mask[i][s];
        }
        terms.push_back(g.nll_rows(probs[s], t, m));
    }
    Graph::Id total = terms.front();
    for (std::size_t s = 1; s < terms.size(); ++s) total = g.add(total, terms[s]);
    total = g.scale(total, 1.0 / static_cast<double>(masked));
    g.backward(total);
    ps_->apply_sgd(g, lr, momentum,
                   [](const std::string& name) { return name.rfind("attv.", 0) == 0; });
}

}  // namespace abdgen::attv
