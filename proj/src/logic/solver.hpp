#pragma once

#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "logic/ast.hpp"

namespace abdgen::logic {

enum class Proof { proved, failed, depth_exceeded };

struct SolveStats {
    long long resolutions = 0;
    bool cut = false;  // some branch was abandoned at the depth bound or budget
};

// Ground facts indexed by functor/arity, consulted before program clauses.
class FactSet {
public:
    void add(Term fact);
    const std::vector<Term>& matching(int functor, std::size_t arity) const;
    std::size_t size() const { return count_; }

private:
    std::unordered_map<std::uint64_t, std::vector<Term>> by_pred_;
    std::size_t count_ = 0;
    static const std::vector<Term> kEmpty;
};

// What a query runs against: base program, optional ground facts, optional
// hypothesis clauses (tried after the program's own clauses).
struct QueryEnv {
    const Program* program = nullptr;
    const FactSet* facts = nullptr;
    const std::vector<Clause>* extra_clauses = nullptr;
};

// SLD resolution, leftmost selection, clause order = source order, iterative
// deepening on per-derivation resolution steps up to depth_limit. Arithmetic
// builtins: succ/2, plus/3, lt/2, leq/2, gt/2, geq/2, neq/2.
Proof prove(const QueryEnv& env, const std::vector<Term>& goals, long long depth_limit = 10000,
            SolveStats* stats = nullptr);

// True iff a refutation exists within the bound. Throws DepthExceeded when the
// search was cut before any proof with branches still open.
bool entails(const Program& program, const Term& goal, long long depth_limit = 10000);

// Lenient variant for callers that treat an inconclusive search as "not
// entailed" (the abduction loops).
bool entailed_within(const QueryEnv& env, const std::vector<Term>& goals,
                     long long depth_limit = 10000, SolveStats* stats = nullptr);

bool is_builtin(int functor, std::size_t arity);

// Shared unification machinery (also used by the meta-interpretive learner).
class Machine {
public:
    Term deref(Term t) const;
    bool unify(const Term& a, const Term& b);
    std::size_t mark() const { return trail_.size(); }
    void undo(std::size_t mark);
    int fresh_vars(std::size_t n);
    Term instantiate(const Term& t, int offset) const;
    Term resolve(const Term& t) const;  // deep substitution
    bool eval_builtin(const Term& goal);
    void reset();

private:
    void bind(int var, const Term& value);
    std::vector<Term> bindings_;
    std::vector<bool> bound_;
    std::vector<int> trail_;
    int next_var_ = 0;
};

}  // namespace abdgen::logic
