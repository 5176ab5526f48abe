#include "orch/abduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "errors.hpp"

namespace abdgen::orch {

namespace {

vq::GroundingAssignment model_grounding(const nn::Model& model, const Case& c,
                                        std::vector<std::vector<std::vector<double>>>* probs) {
    vq::GroundingAssignment out;
    if (probs) probs->clear();
    for (const math::Tensor& img : c.images) {
        auto enc = model.encode(img);
        std::vector<std::size_t> values;
        std::vector<std::vector<double>> img_probs;
        for (std::size_t s = 0; s < enc.z_sym.size(); ++s) {
            auto g = vq::ground_one(enc.z_sym[s], model.codebook(s));
            values.push_back(g.value);
            if (probs) img_probs.push_back(std::move(g.probs));
        }
        out.push_back(std::move(values));
        if (probs) probs->push_back(std::move(img_probs));
    }
    return out;
}

attv::SamplingDistribution uniform_distribution(const vq::SymbolSchema& schema, std::size_t n) {
    attv::SamplingDistribution dist(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& sym : schema.symbols)
            dist[i].push_back(
                std::vector<double>(sym.cardinality, 1.0 / static_cast<double>(sym.cardinality)));
    return dist;
}

}  // namespace

AbducedCase abduce_labels(const Case& c, const AbduceContext& ctx, Rng& rng) {
    if (!ctx.model || !ctx.bk) throw ConfigError("abduce_labels: missing model or background");
    const vq::SymbolSchema& schema = ctx.model->config().schema;

    AbducedCase out;
    out.initial = model_grounding(*ctx.model, c, nullptr);
    logic::VerificationReport report =
        logic::verify_case(*ctx.bk, schema, out.initial, c.id);
    out.verify_calls = 1;
    if (report.all_true()) {
        out.status = AbductionStatus::abduced;
        out.values = out.initial;
        return out;
    }

    attv::SamplingDistribution dist;
    if (ctx.sampler) {
        dist = ctx.sampler->propose(out.initial, report, ctx.model->codebooks());
    } else {
        dist = uniform_distribution(schema, c.images.size());
    }

    // One pool of candidates, verified in draw order; the first consistent
    // assignment wins, otherwise the case is discarded.
    std::vector<vq::GroundingAssignment> pool = attv::sample_pool(dist, ctx.pool_size, rng);
    for (const auto& candidate : pool) {
        ++out.verify_calls;
        if (logic::verify_case(*ctx.bk, schema, candidate, c.id).all_true()) {
            out.status = AbductionStatus::abduced;
            out.values = candidate;
            return out;
        }
    }
    out.status = AbductionStatus::discarded;
    return out;
}

PreparedInstance prepare_instance(const std::vector<const Case*>& positives,
                                  const std::vector<const Case*>& negatives,
                                  const nn::Model& model, bool bindings_enabled) {
    if (positives.empty()) throw EmptyPositives("prepare_instance: positives required");
    PreparedInstance inst;
    inst.positives = positives;
    inst.negatives = negatives;

    for (const Case* c : positives) {
        std::vector<std::vector<std::vector<double>>> probs;
        inst.pos_argmax.push_back(model_grounding(model, *c, &probs));
        inst.pos_probs.push_back(std::move(probs));
    }
    for (const Case* c : negatives)
        inst.neg_argmax.push_back(model_grounding(model, *c, nullptr));

    std::size_t n_symbols = model.config().schema.count();
    inst.bindings.resize(negatives.size());
    for (std::size_t ni = 0; ni < negatives.size(); ++ni) {
        inst.bindings[ni].resize(negatives[ni]->images.size(),
                                 std::vector<PreparedInstance::Bound>(n_symbols));
        if (!bindings_enabled) continue;
        for (std::size_t img = 0; img < negatives[ni]->images.size(); ++img) {
            for (std::size_t s = 0; s < n_symbols; ++s) {
                // the negative slot's embedding: codebook row of its most
                // likely value
                math::Tensor z =
                    vq::retrieve_one(inst.neg_argmax[ni][img][s], model.codebook(s));
                std::vector<std::pair<vq::SlotRef, math::Tensor>> pool;
                for (std::size_t pi = 0; pi < positives.size(); ++pi)
                    for (std::size_t pimg = 0; pimg < positives[pi]->images.size(); ++pimg)
                        pool.push_back(
                            {vq::SlotRef{positives[pi]->id, pimg, s},
                             vq::retrieve_one(inst.pos_argmax[pi][pimg][s],
                                              model.codebook(s))});
                vq::BindingConstraint bc = vq::bind_negative(
                    vq::SlotRef{negatives[ni]->id, img, s}, z, pool);
                // recover the positive case index from the slot id
                for (std::size_t pi = 0; pi < positives.size(); ++pi) {
                    if (positives[pi]->id == bc.bound_to.case_id) {
                        inst.bindings[ni][img][s] = {static_cast<int>(pi),
                                                     bc.bound_to.image_index, s};
                        break;
                    }
                }
                inst.binding_list.push_back(std::move(bc));
            }
        }
    }
    return inst;
}

namespace {

struct SlotIndex {
    std::size_t case_idx, image, symbol;
    std::vector<std::size_t> order;  // values sorted by probability descending
    std::vector<double> logp;        // log prob per rank
};

// Builds the induction task for one joint assignment and returns the best
// admissible hypothesis, if any.
std::optional<mil::Hypothesis> best_for_candidate(
    const PreparedInstance& inst, const JointConfig& cfg,
    const std::vector<vq::GroundingAssignment>& pos_values,
    const std::vector<vq::GroundingAssignment>& neg_values) {
    logic::FactSet facts;
    mil::InductionTask task;
    task.background = cfg.bk;
    task.metarules = cfg.metarules;
    task.max_clauses = cfg.max_clauses;
    task.target = "f";

    // identical groundings collapse to one goal
    std::set<std::string> seen_pos, seen_neg;
    auto key_of = [](const vq::GroundingAssignment& g) {
        std::string k;
        for (const auto& row : g)
            for (std::size_t v : row) k += std::to_string(v) + ",";
        return k;
    };
    std::size_t idx = 0;
    for (const auto& values : pos_values) {
        if (!seen_pos.insert(key_of(values)).second) continue;
        std::string prefix = "p" + std::to_string(idx++) + "_";
        data::append_case_facts(cfg.kind, values, prefix, facts);
        task.positives.push_back(data::case_goal(cfg.kind, prefix, values.size()));
    }
    idx = 0;
    for (const auto& values : neg_values) {
        if (!seen_neg.insert(key_of(values)).second) continue;
        std::string prefix = "n" + std::to_string(idx++) + "_";
        data::append_case_facts(cfg.kind, values, prefix, facts);
        task.negatives.push_back(data::case_goal(cfg.kind, prefix, values.size()));
    }
    task.facts = &facts;
    return mil::induce_best(task);
}

bool constant_grounding(const vq::GroundingAssignment& g) {
    for (std::size_t i = 1; i < g.size(); ++i)
        if (g[i] != g[0]) return false;
    return g.size() > 1;
}

}  // namespace

JointResult joint_abduce(const PreparedInstance& inst, const JointConfig& cfg) {
    // flatten positive slots, each with its value order sorted by probability
    std::vector<SlotIndex> slots;
    for (std::size_t ci = 0; ci < inst.positives.size(); ++ci) {
        for (std::size_t img = 0; img < inst.pos_probs[ci].size(); ++img) {
            for (std::size_t s = 0; s < inst.pos_probs[ci][img].size(); ++s) {
                const auto& p = inst.pos_probs[ci][img][s];
                SlotIndex slot{ci, img, s, {}, {}};
                slot.order.resize(p.size());
                for (std::size_t v = 0; v < p.size(); ++v) slot.order[v] = v;
                std::stable_sort(slot.order.begin(), slot.order.end(),
                                 [&p](std::size_t a, std::size_t b) { return p[a] > p[b]; });
                for (std::size_t r = 0; r < p.size(); ++r)
                    slot.logp.push_back(std::log(std::max(p[slot.order[r]], 1e-300)));
                slots.push_back(std::move(slot));
            }
        }
    }

    // best-first over rank vectors
    struct Node {
        double logp;
        std::vector<std::size_t> ranks;
        bool operator<(const Node& o) const { return logp < o.logp; }
    };
    std::priority_queue<Node> heap;
    std::set<std::vector<std::size_t>> visited;
    Node root{0.0, std::vector<std::size_t>(slots.size(), 0)};
    for (const SlotIndex& s : slots) root.logp += s.logp[0];
    heap.push(root);
    visited.insert(root.ranks);

    JointResult best;
    bool found = false;
    std::size_t tried = 0;

    while (!heap.empty() && tried < cfg.candidate_budget) {
        Node node = heap.top();
        heap.pop();
        // nothing on the heap can beat the current best
        if (found && best.joint_score >= std::exp(node.logp)) break;
        ++tried;

        // materialize the candidate
        std::vector<vq::GroundingAssignment> pos_values = inst.pos_argmax;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const SlotIndex& s = slots[i];
            pos_values[s.case_idx][s.image][s.symbol] = s.order[node.ranks[i]];
        }
        std::vector<vq::GroundingAssignment> neg_values = inst.neg_argmax;
        for (std::size_t ni = 0; ni < neg_values.size(); ++ni)
            for (std::size_t img = 0; img < neg_values[ni].size(); ++img)
                for (std::size_t s = 0; s < neg_values[ni][img].size(); ++s) {
                    const auto& b = inst.bindings[ni][img][s];
                    if (b.pcase >= 0)
                        neg_values[ni][img][s] = pos_values[b.pcase][b.image][b.symbol];
                }

        auto hyp = best_for_candidate(inst, cfg, pos_values, neg_values);
        if (hyp) {
            double score = hyp->score * std::exp(node.logp);
            if (!found || score > best.joint_score) {
                found = true;
                best.positive_values = std::move(pos_values);
                best.negative_values = std::move(neg_values);
                best.hypothesis = std::move(*hyp);
                best.joint_score = score;
            }
        }

        // expand: bump one slot's rank
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (node.ranks[i] + 1 >= slots[i].order.size()) continue;
            Node child = node;
            child.logp += slots[i].logp[node.ranks[i] + 1] - slots[i].logp[node.ranks[i]];
            ++child.ranks[i];
            if (visited.insert(child.ranks).second) heap.push(child);
        }
    }

    if (!found)
        throw AbductionFailure("no joint grounding within budget " +
                               std::to_string(cfg.candidate_budget) + " admits a hypothesis");
    best.candidates_tried = tried;
    for (const auto& g : best.negative_values)
        if (constant_grounding(g)) ++best.standstill_negatives;
    return best;
}

}  // namespace abdgen::orch
