#include "logic/verify.hpp"

namespace abdgen::logic {

void append_grounding_facts(FactSet& facts, const vq::SymbolSchema& schema,
                            const vq::GroundingAssignment& grounding,
                            const std::string& image_prefix) {
    std::size_t n = grounding.size();
    if (n == 0) throw SchemaMismatch("grounding has no images");
    std::vector<Term> images;
    images.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        images.push_back(Term::constant(image_prefix + std::to_string(k)));

    facts.add(Term::app("first", {images[0]}));
    facts.add(Term::app("last", {images[n - 1]}));
    for (std::size_t k = 0; k + 1 < n; ++k)
        facts.add(Term::app("next", {images[k], images[k + 1]}));

    for (std::size_t k = 0; k < n; ++k) {
        if (grounding[k].size() != schema.count())
            throw SchemaMismatch("image " + std::to_string(k) + " assigns " +
                                 std::to_string(grounding[k].size()) + " symbols, schema has " +
                                 std::to_string(schema.count()));
        for (std::size_t s = 0; s < schema.count(); ++s) {
            std::size_t v = grounding[k][s];
            if (v >= schema.symbols[s].cardinality)
                throw SchemaMismatch("value " + std::to_string(v) + " out of range for symbol " +
                                     schema.symbols[s].name);
            facts.add(Term::app(schema.symbols[s].name,
                                {images[k], Term::integer(static_cast<long long>(v))}));
        }
    }
}

VerificationReport verify_case(const Program& program, const vq::SymbolSchema& schema,
                               const vq::GroundingAssignment& grounding,
                               const std::string& case_id, long long depth_limit) {
    FactSet facts;
    append_grounding_facts(facts, schema, grounding, "i");

    QueryEnv env;
    env.program = &program;
    env.facts = &facts;

    VerificationReport report;
    report.case_id = case_id;
    report.per_rule.reserve(program.rule_groups.size());
    for (const RuleGroup& group : program.rule_groups) {
        if (group.clause_indices.empty()) {
            report.per_rule.push_back(false);
            continue;
        }
        const Term& goal = program.clauses[group.clause_indices.front()].head;
        report.per_rule.push_back(entailed_within(env, {goal}, depth_limit));
    }
    return report;
}

}  // namespace abdgen::logic
