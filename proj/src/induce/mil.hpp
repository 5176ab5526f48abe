#pragma once

#include <optional>
#include <string>
#include <vector>

#include "induce/metarule.hpp"
#include "logic/solver.hpp"

namespace abdgen::mil {

// A ground conjunction; one per case.
struct Goal {
    std::vector<logic::Term> atoms;
};

struct Hypothesis {
    std::vector<logic::Clause> clauses;
    double score = 0.0;
    std::string canonical;

    std::size_t length() const { return clauses.size(); }
    std::string text() const;
};

struct InductionTask {
    const logic::Program* background = nullptr;
    const logic::FactSet* facts = nullptr;  // per-case ground facts, optional
    std::vector<Metarule> metarules;
    std::vector<Goal> positives;
    std::vector<Goal> negatives;
    std::size_t max_clauses = 4;

    // Body-predicate candidates for second-order variables. When empty, the
    // background program's %% body_pred declarations are used.
    std::vector<logic::PredicateRef> body_candidates;
    std::string target;  // inferred from the first positive when empty

    long long proof_depth = 400;          // per-derivation bound inside the meta-proof
    long long check_depth = 4000;         // bound for re-verification of goals
    long long search_budget = 20000000;   // total meta-search ticks
};

struct InduceStats {
    long long ticks = 0;
    long long covers_found = 0;      // positive-cover hypotheses before the negative check
    long long depth_cut_negatives = 0;  // negatives treated as not entailed after a cut search
    bool budget_exhausted = false;
};

// All admissible hypotheses up to max_clauses, canonically deduplicated,
// sorted by score descending then discovery order (iterative deepening on
// clause count). Throws NoHypothesis when nothing qualifies.
std::vector<Hypothesis> induce(const InductionTask& task, InduceStats* stats = nullptr);

// First admissible hypothesis at the smallest clause count; nullopt when none.
std::optional<Hypothesis> induce_best(const InductionTask& task, InduceStats* stats = nullptr);

// 1/length^2 when background+facts+H entail every positive and no negative,
// else 0. Depth exhaustion on a negative counts as not entailed.
double score_hypothesis(const std::vector<logic::Clause>& clauses, const InductionTask& task);

// Canonical text: invented predicates renamed to <target>_1.. in a canonical
// order, clause-local variables normalized, clauses sorted.
std::string canonical_form(const std::vector<logic::Clause>& clauses, const std::string& target);

// Names used for predicate invention: <target>_1, <target>_2, ...
std::string invented_name(const std::string& target, std::size_t k);

}  // namespace abdgen::mil
