#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace abdgen::logic {

// Interned predicate/constant names. Interning is global so Terms stay small;
// lookups after parsing are read-only.
int intern(const std::string& name);
const std::string& symbol_name(int sym);

// Function-free first-order term: a variable, a constant, an integer, or a
// flat compound (arguments are variables/constants/integers only).
struct Term {
    enum class Kind : std::uint8_t { Var, Const, Int, Compound };

    Kind kind = Kind::Const;
    int sym = -1;          // interned name (Const/Compound functor), or variable index (Var)
    long long ival = 0;    // Int payload
    std::vector<Term> args;

    static Term var(int index) {
        Term t;
        t.kind = Kind::Var;
        t.sym = index;
        return t;
    }
    static Term constant(const std::string& name) {
        Term t;
        t.kind = Kind::Const;
        t.sym = intern(name);
        return t;
    }
    static Term constant(int sym) {
        Term t;
        t.kind = Kind::Const;
        t.sym = sym;
        return t;
    }
    static Term integer(long long v) {
        Term t;
        t.kind = Kind::Int;
        t.ival = v;
        return t;
    }
    static Term app(const std::string& functor, std::vector<Term> args) {
        Term t;
        t.kind = Kind::Compound;
        t.sym = intern(functor);
        t.args = std::move(args);
        return t;
    }
    static Term app(int functor_sym, std::vector<Term> args) {
        Term t;
        t.kind = Kind::Compound;
        t.sym = functor_sym;
        t.args = std::move(args);
        return t;
    }

    std::size_t arity() const { return kind == Kind::Compound ? args.size() : 0; }
    bool is_ground() const;
    bool operator==(const Term& o) const;
    bool operator!=(const Term& o) const { return !(*this == o); }
};

std::uint64_t term_hash(const Term& t);

struct TermHasher {
    std::size_t operator()(const Term& t) const { return static_cast<std::size_t>(term_hash(t)); }
};

// Variables are clause-local indices; names are kept beside the clause for
// diagnostics and round-trip printing.
struct Clause {
    Term head;
    std::vector<Term> body;
    std::vector<std::string> var_names;

    std::size_t num_vars() const { return var_names.size(); }
    bool is_fact() const { return body.empty(); }
};

struct RuleGroup {
    std::string name;
    std::vector<std::size_t> clause_indices;  // into Program::clauses
};

struct PredicateRef {
    std::string name;
    int arity = 0;
};

struct Program {
    std::vector<Clause> clauses;
    std::vector<RuleGroup> rule_groups;
    std::vector<PredicateRef> body_preds;  // declared via %% body_pred name/arity

    void add_clause(Clause c) { clauses.push_back(std::move(c)); }
};

// Rendering in source syntax. Variables print by their clause-local names when
// available, else A, B, C, ...
std::string to_string(const Term& t, const std::vector<std::string>* var_names = nullptr);
std::string to_string(const Clause& c);
std::string to_string(const Program& p);

std::string default_var_name(int index);

}  // namespace abdgen::logic
