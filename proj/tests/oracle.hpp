#pragma once

#include <map>
#include <set>
#include <vector>

#include "logic/ast.hpp"
#include "logic/solver.hpp"
#include "rng.hpp"

namespace testutil {

// Bottom-up least-fixpoint model of a function-free program (no integers, no
// builtins). Independent of the SLD path: derives the full minimal model by
// naive iteration over all ground instantiations.
class HerbrandOracle {
public:
    explicit HerbrandOracle(const abdgen::logic::Program& p) : prog_(p) {
        collect_signature();
        saturate();
    }

    bool holds(const abdgen::logic::Term& ground_atom) const {
        return derived_.count(ground_atom) > 0;
    }

    // Every ground atom over the program's predicates and constants.
    std::vector<abdgen::logic::Term> base() const {
        std::vector<abdgen::logic::Term> out;
        for (const auto& [sym, arity] : preds_) enumerate_atoms(sym, arity, out);
        return out;
    }

    std::size_t base_size() const {
        std::size_t n = 0;
        for (const auto& [sym, arity] : preds_) {
            std::size_t a = 1;
            for (int i = 0; i < arity; ++i) a *= consts_.size();
            n += a;
        }
        return n;
    }

private:
    using Term = abdgen::logic::Term;

    void collect_signature() {
        auto visit_atom = [this](const Term& t) {
            preds_.insert({t.sym, static_cast<int>(t.arity())});
            for (const Term& a : t.args)
                if (a.kind == Term::Kind::Const) const_set_.insert(a.sym);
        };
        for (const auto& c : prog_.clauses) {
            visit_atom(c.head);
            for (const Term& b : c.body) visit_atom(b);
        }
        if (const_set_.empty()) const_set_.insert(abdgen::logic::intern("c0"));
        consts_.assign(const_set_.begin(), const_set_.end());
    }

    void enumerate_atoms(int sym, int arity, std::vector<Term>& out) const {
        std::vector<std::size_t> idx(arity, 0);
        while (true) {
            std::vector<Term> args;
            for (int i = 0; i < arity; ++i) args.push_back(Term::constant(consts_[idx[i]]));
            out.push_back(arity == 0 ? Term::constant(sym) : Term::app(sym, std::move(args)));
            int i = arity - 1;
            while (i >= 0 && ++idx[i] == consts_.size()) idx[i--] = 0;
            if (i < 0) break;
        }
    }

    void saturate() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& c : prog_.clauses) {
                std::vector<int> assign(c.num_vars(), 0);
                while (true) {
                    Term head = substitute(c.head, assign);
                    if (!derived_.count(head)) {
                        bool ok = true;
                        for (const Term& b : c.body)
                            if (!derived_.count(substitute(b, assign))) {
                                ok = false;
                                break;
                            }
                        if (ok) {
                            derived_.insert(head);
                            changed = true;
                        }
                    }
                    int i = static_cast<int>(assign.size()) - 1;
                    while (i >= 0 && ++assign[i] == static_cast<int>(consts_.size()))
                        assign[i--] = 0;
                    if (i < 0) break;
                }
            }
        }
    }

    Term substitute(const Term& t, const std::vector<int>& assign) const {
        if (t.kind == Term::Kind::Var) return Term::constant(consts_[assign[t.sym]]);
        if (t.kind != Term::Kind::Compound) return t;
        Term out = t;
        for (Term& a : out.args)
            if (a.kind == Term::Kind::Var) a = Term::constant(consts_[assign[a.sym]]);
        return out;
    }

    const abdgen::logic::Program& prog_;
    std::set<std::pair<int, int>> preds_;
    std::set<int> const_set_;
    std::vector<int> consts_;
    struct TermLess {
        bool operator()(const Term& a, const Term& b) const {
            auto ha = abdgen::logic::term_hash(a), hb = abdgen::logic::term_hash(b);
            if (ha != hb) return ha < hb;
            return abdgen::logic::to_string(a) < abdgen::logic::to_string(b);
        }
    };
    std::set<Term, TermLess> derived_;
};

// Random function-free program for oracle-vs-solver comparison. Herbrand base
// is kept at or below max_atoms.
inline abdgen::logic::Program random_program(abdgen::Rng& rng, std::size_t max_atoms = 30) {
    using namespace abdgen::logic;
    while (true) {
        std::size_t n_consts = 1 + rng.index(3);
        std::size_t n_preds = 1 + rng.index(3);
        std::vector<int> arities;
        std::size_t base = 0;
        for (std::size_t i = 0; i < n_preds; ++i) {
            int ar = static_cast<int>(rng.index(3));
            arities.push_back(ar);
            std::size_t cnt = 1;
            for (int j = 0; j < ar; ++j) cnt *= n_consts;
            base += cnt;
        }
        if (base == 0 || base > max_atoms) continue;

        Program prog;
        std::size_t n_clauses = 1 + rng.index(8);
        for (std::size_t ci = 0; ci < n_clauses; ++ci) {
            Clause c;
            int n_vars = static_cast<int>(rng.index(3));
            auto rand_arg = [&]() {
                if (n_vars > 0 && rng.uniform() < 0.5)
                    return Term::var(static_cast<int>(rng.index(n_vars)));
                return Term::constant("k" + std::to_string(rng.index(n_consts)));
            };
            auto rand_atom = [&]() {
                std::size_t p = rng.index(n_preds);
                std::vector<Term> args;
                for (int j = 0; j < arities[p]; ++j) args.push_back(rand_arg());
                if (args.empty()) return Term::constant("p" + std::to_string(p));
                return Term::app("p" + std::to_string(p), std::move(args));
            };
            Term head = rand_atom();
            // Heads must be predicates, not bare constants for 0-ary; both are
            // represented as Const terms, which the solver treats uniformly.
            c.head = head;
            std::size_t body_len = rng.index(3);
            for (std::size_t b = 0; b < body_len; ++b) c.body.push_back(rand_atom());
            for (int v = 0; v < n_vars; ++v)
                c.var_names.push_back(abdgen::logic::default_var_name(v));
            prog.add_clause(std::move(c));
        }
        return prog;
    }
}

}  // namespace testutil
