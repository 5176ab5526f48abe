#pragma once

#include <string>

#include "logic/solver.hpp"
#include "vq/schema.hpp"

namespace abdgen::logic {

struct VerificationReport {
    std::vector<bool> per_rule;
    std::string case_id;

    bool all_true() const {
        for (bool b : per_rule)
            if (!b) return false;
        return true;
    }
};

// Materializes a case grounding as ground facts over image constants
// "<prefix>0".."<prefix>{n-1}": a first/next/last chain plus one
// <symbol>(<image>, <value>) fact per slot. Values are integer terms.
void append_grounding_facts(FactSet& facts, const vq::SymbolSchema& schema,
                            const vq::GroundingAssignment& grounding,
                            const std::string& image_prefix);

// Evaluates every rule group of the program against the grounding. A group is
// satisfied when the existential closure of its first clause's head is
// entailed from the program plus the grounding facts. A search cut at the
// depth bound counts as unsatisfied.
VerificationReport verify_case(const Program& program, const vq::SymbolSchema& schema,
                               const vq::GroundingAssignment& grounding,
                               const std::string& case_id = "", long long depth_limit = 10000);

}  // namespace abdgen::logic
