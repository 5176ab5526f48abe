#include "logic/solver.hpp"

#include <algorithm>

#include "errors.hpp"

namespace abdgen::logic {

namespace {
std::uint64_t pred_key(int functor, std::size_t arity) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(functor)) << 8) |
           (arity & 0xff);
}

int builtin_id(const char* name) { return intern(name); }

struct Builtins {
    int succ = builtin_id("succ");
    int plus = builtin_id("plus");
    int lt = builtin_id("lt");
    int leq = builtin_id("leq");
    int gt = builtin_id("gt");
    int geq = builtin_id("geq");
    int neq = builtin_id("neq");
};

const Builtins& builtins() {
    static Builtins b;
    return b;
}
}  // namespace

const std::vector<Term> FactSet::kEmpty;

void FactSet::add(Term fact) {
    if (!fact.is_ground()) throw ConfigError("FactSet: fact must be ground");
    by_pred_[pred_key(fact.sym, fact.arity())].push_back(std::move(fact));
    ++count_;
}

const std::vector<Term>& FactSet::matching(int functor, std::size_t arity) const {
    auto it = by_pred_.find(pred_key(functor, arity));
    return it == by_pred_.end() ? kEmpty : it->second;
}

bool is_builtin(int functor, std::size_t arity) {
    const Builtins& b = builtins();
    if (arity == 2)
        return functor == b.succ || functor == b.lt || functor == b.leq || functor == b.gt ||
               functor == b.geq || functor == b.neq;
    if (arity == 3) return functor == b.plus;
    return false;
}

// --- Machine ---

Term Machine::deref(Term t) const {
    while (t.kind == Term::Kind::Var) {
        int v = t.sym;
        if (v < 0 || v >= static_cast<int>(bound_.size()) || !bound_[v]) return t;
        t = bindings_[v];
    }
    return t;
}

void Machine::bind(int var, const Term& value) {
    bindings_[var] = value;
    bound_[var] = true;
    trail_.push_back(var);
}

bool Machine::unify(const Term& a_in, const Term& b_in) {
    Term a = deref(a_in);
    Term b = deref(b_in);
    if (a.kind == Term::Kind::Var && b.kind == Term::Kind::Var && a.sym == b.sym) return true;
    if (a.kind == Term::Kind::Var) {
        bind(a.sym, b);
        return true;
    }
    if (b.kind == Term::Kind::Var) {
        bind(b.sym, a);
        return true;
    }
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Term::Kind::Const: return a.sym == b.sym;
        case Term::Kind::Int: return a.ival == b.ival;
        case Term::Kind::Compound: {
            if (a.sym != b.sym || a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!unify(a.args[i], b.args[i])) return false;
            return true;
        }
        default: return false;
    }
}

void Machine::undo(std::size_t mark) {
    while (trail_.size() > mark) {
        bound_[trail_.back()] = false;
        trail_.pop_back();
    }
}

int Machine::fresh_vars(std::size_t n) {
    int base = next_var_;
    next_var_ += static_cast<int>(n);
    if (static_cast<std::size_t>(next_var_) > bindings_.size()) {
        bindings_.resize(next_var_);
        bound_.resize(next_var_, false);
    }
    return base;
}

Term Machine::instantiate(const Term& t, int offset) const {
    switch (t.kind) {
        case Term::Kind::Var: return Term::var(t.sym + offset);
        case Term::Kind::Const:
        case Term::Kind::Int: return t;
        case Term::Kind::Compound: {
            Term out = t;
            for (Term& a : out.args)
                if (a.kind == Term::Kind::Var) a.sym += offset;
            return out;
        }
    }
    return t;
}

Term Machine::resolve(const Term& t_in) const {
    Term t = deref(t_in);
    if (t.kind == Term::Kind::Compound)
        for (Term& a : t.args) a = resolve(a);
    return t;
}

bool Machine::eval_builtin(const Term& goal) {
    const Builtins& b = builtins();
    auto as_int = [this](const Term& t, long long& out) {
        Term d = deref(t);
        if (d.kind != Term::Kind::Int) return false;
        out = d.ival;
        return true;
    };
    if (goal.arity() == 2) {
        long long x = 0, y = 0;
        bool hx = as_int(goal.args[0], x), hy = as_int(goal.args[1], y);
        if (goal.sym == b.succ) {
            if (hx) return unify(goal.args[1], Term::integer(x + 1));
            if (hy) return unify(goal.args[0], Term::integer(y - 1));
            return false;
        }
        if (!hx || !hy) return false;  // comparisons need ground integers
        if (goal.sym == b.lt) return x < y;
        if (goal.sym == b.leq) return x <= y;
        if (goal.sym == b.gt) return x > y;
        if (goal.sym == b.geq) return x >= y;
        if (goal.sym == b.neq) return x != y;
        return false;
    }
    if (goal.arity() == 3 && goal.sym == b.plus) {
        long long x = 0, y = 0, z = 0;
        bool hx = as_int(goal.args[0], x), hy = as_int(goal.args[1], y),
             hz = as_int(goal.args[2], z);
        if (hx && hy) return unify(goal.args[2], Term::integer(x + y));
        if (hx && hz) return unify(goal.args[1], Term::integer(z - x));
        if (hy && hz) return unify(goal.args[0], Term::integer(z - y));
        return false;
    }
    return false;
}

void Machine::reset() {
    trail_.clear();
    std::fill(bound_.begin(), bound_.end(), false);
    next_var_ = 0;
}

// --- SLD search ---

namespace {

struct BudgetExhausted {};

class Sld {
public:
    Sld(const QueryEnv& env, long long depth_limit)
        : env_(env), depth_limit_(depth_limit) {
        budget_ = 50 * depth_limit + 10000;
        index_program();
    }

    Proof run(const std::vector<Term>& goals, SolveStats* stats) {
        // Iterative deepening on per-derivation resolution count, shared work
        // budget across rounds.
        static const long long kRounds[] = {16, 64, 256, 1024, 4096};
        std::vector<long long> bounds;
        for (long long r : kRounds)
            if (r < depth_limit_) bounds.push_back(r);
        bounds.push_back(depth_limit_);
        bool proved = false;
        try {
            for (long long bound : bounds) {
                machine_.reset();
                cache_.clear();
                ancestors_.clear();
                cut_ = false;
                machine_.fresh_vars(count_query_vars(goals));
                std::vector<Entry> stack;
                for (auto it = goals.rbegin(); it != goals.rend(); ++it)
                    stack.push_back({*it, -1});
                if (prove(stack, bound)) {
                    proved = true;
                    break;
                }
                if (!cut_) break;  // exhaustive search below the bound: definitive no
            }
        } catch (BudgetExhausted&) {
            cut_ = true;
        }
        if (stats) {
            stats->resolutions = resolutions_;
            stats->cut = cut_;
        }
        if (proved) return Proof::proved;
        return cut_ ? Proof::depth_exceeded : Proof::failed;
    }

private:
    struct Entry {
        Term term;
        int anc;  // chain of ground ancestor goals (index into ancestors_), -1 = none
    };
    struct AncNode {
        Term atom;
        int parent;
    };

    static std::size_t count_query_vars(const std::vector<Term>& goals) {
        int mx = -1;
        for (const Term& g : goals) {
            if (g.kind == Term::Kind::Var) mx = std::max(mx, g.sym);
            for (const Term& a : g.args)
                if (a.kind == Term::Kind::Var) mx = std::max(mx, a.sym);
        }
        return static_cast<std::size_t>(mx + 1);
    }

    void index_program() {
        if (!env_.program) return;
        const auto& cs = env_.program->clauses;
        for (std::size_t i = 0; i < cs.size(); ++i)
            clause_index_[pred_key(cs[i].head.sym, cs[i].head.arity())].push_back(i);
    }

    void tick() {
        ++resolutions_;
        if (--budget_ <= 0) throw BudgetExhausted{};
    }

    bool prove(std::vector<Entry>& stack, long long depth) {
        if (stack.empty()) return true;
        Entry top = stack.back();
        Term goal = machine_.resolve(top.term);
        if (goal.kind == Term::Kind::Var) return false;  // bare variable goal unsupported

        int functor = goal.sym;
        std::size_t arity = goal.arity();

        if (is_builtin(functor, arity)) {
            tick();
            std::size_t m = machine_.mark();
            if (machine_.eval_builtin(goal)) {
                stack.pop_back();
                if (prove(stack, depth)) return true;
                stack.push_back(top);
            }
            machine_.undo(m);
            return false;
        }

        bool ground = goal.is_ground();
        if (ground) {
            // Goals already proven this round short-circuit.
            if (cache_.count(goal)) {
                stack.pop_back();
                if (prove(stack, depth)) return true;
                stack.push_back(top);
                return false;
            }
            // A ground goal equal to a ground ancestor cannot start a smaller
            // proof; prune the branch and record it as a cut.
            for (int a = top.anc; a >= 0; a = ancestors_[a].parent) {
                if (ancestors_[a].atom == goal) {
                    cut_ = true;
                    return false;
                }
            }
        }

        if (depth <= 0) {
            cut_ = true;
            return false;
        }

        stack.pop_back();
        bool ok = false;

        // Facts first, then program clauses, then hypothesis clauses.
        if (env_.facts) {
            for (const Term& f : env_.facts->matching(functor, arity)) {
                tick();
                std::size_t m = machine_.mark();
                if (machine_.unify(goal, f) && prove(stack, depth - 1)) {
                    ok = true;
                    break;
                }
                machine_.undo(m);
            }
        }
        if (!ok && env_.program) {
            auto it = clause_index_.find(pred_key(functor, arity));
            if (it != clause_index_.end()) {
                for (std::size_t ci : it->second) {
                    if (try_clause(env_.program->clauses[ci], goal, stack, depth, top.anc)) {
                        ok = true;
                        break;
                    }
                }
            }
        }
        if (!ok && env_.extra_clauses) {
            for (const Clause& c : *env_.extra_clauses) {
                if (c.head.sym != functor || c.head.arity() != arity) continue;
                if (try_clause(c, goal, stack, depth, top.anc)) {
                    ok = true;
                    break;
                }
            }
        }

        if (ok && ground) cache_.insert(goal);
        stack.push_back(top);
        return ok;
    }

    bool try_clause(const Clause& c, const Term& goal, std::vector<Entry>& stack, long long depth,
                    int parent_anc) {
        tick();
        std::size_t m = machine_.mark();
        int offset = machine_.fresh_vars(c.num_vars());
        if (!machine_.unify(goal, machine_.instantiate(c.head, offset))) {
            machine_.undo(m);
            return false;
        }
        // Head unification may have made the goal ground; re-check the
        // ancestor chain with the instantiated form so self-recursion through
        // bindings is pruned too.
        Term now = machine_.resolve(goal);
        int child_anc = parent_anc;
        bool ground_now = now.is_ground();
        if (ground_now) {
            for (int a = parent_anc; a >= 0; a = ancestors_[a].parent) {
                if (ancestors_[a].atom == now) {
                    cut_ = true;
                    machine_.undo(m);
                    return false;
                }
            }
            ancestors_.push_back({now, parent_anc});
            child_anc = static_cast<int>(ancestors_.size()) - 1;
        }
        std::size_t base = stack.size();
        for (auto it = c.body.rbegin(); it != c.body.rend(); ++it)
            stack.push_back({machine_.instantiate(*it, offset), child_anc});
        bool ok = prove(stack, depth - 1);
        if (ground_now) {
            if (ok) cache_.insert(now);
            ancestors_.pop_back();
        }
        if (!ok) {
            stack.resize(base);
            machine_.undo(m);
        }
        return ok;
    }

    const QueryEnv& env_;
    long long depth_limit_;
    long long budget_;
    long long resolutions_ = 0;
    bool cut_ = false;
    Machine machine_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> clause_index_;
    std::unordered_set<Term, TermHasher> cache_;
    std::vector<AncNode> ancestors_;
};

}  // namespace

Proof prove(const QueryEnv& env, const std::vector<Term>& goals, long long depth_limit,
            SolveStats* stats) {
    if (depth_limit < 1) throw ConfigError("prove: depth_limit must be >= 1");
    Sld sld(env, depth_limit);
    return sld.run(goals, stats);
}

bool entails(const Program& program, const Term& goal, long long depth_limit) {
    QueryEnv env;
    env.program = &program;
    Proof r = prove(env, {goal}, depth_limit);
    if (r == Proof::depth_exceeded)
        throw DepthExceeded("entailment search cut at " + std::to_string(depth_limit) +
                            " resolution steps: " + to_string(goal));
    return r == Proof::proved;
}

bool entailed_within(const QueryEnv& env, const std::vector<Term>& goals, long long depth_limit,
                     SolveStats* stats) {
    return prove(env, goals, depth_limit, stats) == Proof::proved;
}

}  // namespace abdgen::logic
