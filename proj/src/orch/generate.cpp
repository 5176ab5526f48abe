#include "orch/generate.hpp"

#include <functional>

#include "errors.hpp"

namespace abdgen::orch {

namespace {

using Seq = std::vector<std::vector<std::size_t>>;

bool verified(const Seq& seq, const logic::Program& bk, const vq::SymbolSchema& schema) {
    vq::GroundingAssignment g(seq.begin(), seq.end());
    return logic::verify_case(bk, schema, g, "gen").all_true();
}

bool entailed(const Seq& seq, const logic::Program& hypothesis, data::WorldKind kind) {
    logic::FactSet facts;
    vq::GroundingAssignment g(seq.begin(), seq.end());
    data::append_case_facts(kind, g, "g", facts);
    mil::Goal goal = data::case_goal(kind, "g", seq.size());
    logic::QueryEnv env;
    env.program = &data::world_support(kind);
    env.facts = &facts;
    env.extra_clauses = &hypothesis.clauses;
    return logic::entailed_within(env, goal.atoms, 4000);
}

}  // namespace

GenerateResult generate(const math::Tensor& context, const logic::Program& rules,
                        const nn::Model& model, std::size_t steps, data::WorldKind kind) {
    GenerateResult out;
    auto enc = model.encode(context);
    out.context_values = model.ground(enc).values;

    const bool verify_mode = !rules.rule_groups.empty();
    const vq::SymbolSchema& schema = model.config().schema;

    Seq seq{out.context_values};
    if (data::at_terminal(kind, out.context_values)) return out;

    if (kind == data::WorldKind::mario) {
        // Trajectory worlds run to the terminal cell: depth-first over the
        // preference-ordered moves, accept the first complete consistent walk.
        std::function<bool(std::size_t)> extend = [&](std::size_t remaining) -> bool {
            if (data::at_terminal(kind, seq.back()))
                return verify_mode ? verified(seq, rules, schema) : entailed(seq, rules, kind);
            if (remaining == 0) return false;
            if (verify_mode && !verified(seq, rules, schema)) return false;  // dead prefix
            for (const auto& cand : data::successor_values(kind, seq.back())) {
                seq.push_back(cand);
                if (extend(remaining - 1)) return true;
                seq.pop_back();
            }
            return false;
        };
        if (!extend(steps))
            throw LogicStuck("no rule-consistent trajectory of length <= " +
                             std::to_string(steps) + " from the context grounding");
    } else {
        // Sequence worlds extend greedily: each new image must keep the
        // sequence consistent; stop when nothing fits or steps are exhausted.
        for (std::size_t k = 0; k < steps; ++k) {
            bool extended = false;
            for (const auto& cand : data::successor_values(kind, seq.back())) {
                seq.push_back(cand);
                bool ok;
                if (verify_mode) {
                    ok = verified(seq, rules, schema);
                } else {
                    Seq pair{seq[seq.size() - 2], seq.back()};
                    ok = entailed(pair, rules, kind);
                }
                if (ok) {
                    extended = true;
                    break;
                }
                seq.pop_back();
            }
            if (!extended) break;
        }
        if (seq.size() == 1)
            throw LogicStuck("no rule-consistent continuation from the context grounding");
    }

    for (std::size_t k = 1; k < seq.size(); ++k) {
        std::vector<math::Tensor> z_l;
        for (std::size_t s = 0; s < schema.count(); ++s)
            z_l.push_back(vq::retrieve_one(seq[k][s], model.codebook(s)));
        out.images.push_back(model.decode(z_l, enc.z_sub));
        out.values.push_back(seq[k]);
    }
    return out;
}

}  // namespace abdgen::orch
