#include "induce/mil.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace abdgen::mil {

using logic::Clause;
using logic::FactSet;
using logic::Machine;
using logic::Program;
using logic::Term;

std::string Hypothesis::text() const {
    std::ostringstream os;
    for (const Clause& c : clauses) os << logic::to_string(c) << '\n';
    return os.str();
}

std::string invented_name(const std::string& target, std::size_t k) {
    return target + "_" + std::to_string(k);
}

namespace {

Clause normalize_clause_vars(const Clause& c) {
    std::map<int, int> remap;
    auto renumber = [&remap](Term t) {
        if (t.kind == Term::Kind::Compound) {
            for (Term& a : t.args)
                if (a.kind == Term::Kind::Var) {
                    auto [it, fresh] = remap.emplace(a.sym, static_cast<int>(remap.size()));
                    a.sym = it->second;
                }
        }
        return t;
    };
    Clause out;
    out.head = renumber(c.head);
    for (const Term& b : c.body) out.body.push_back(renumber(b));
    for (std::size_t i = 0; i < remap.size(); ++i)
        out.var_names.push_back(logic::default_var_name(static_cast<int>(i)));
    return out;
}

Term rename_pred(const Term& t, const std::map<int, int>& pred_map) {
    Term out = t;
    auto it = pred_map.find(out.sym);
    if (it != pred_map.end()) out.sym = it->second;
    return out;
}

}  // namespace

std::string canonical_form(const std::vector<Clause>& clauses, const std::string& target) {
    std::vector<int> invented;
    for (std::size_t k = 1; k < 8; ++k) {
        int sym = logic::intern(invented_name(target, k));
        bool present = false;
        for (const Clause& c : clauses) {
            if (c.head.sym == sym) present = true;
            for (const Term& b : c.body)
                if (b.sym == sym) present = true;
        }
        if (present) invented.push_back(sym);
    }

    std::vector<int> perm(invented.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);

    std::string best;
    do {
        std::map<int, int> pred_map;
        for (std::size_t i = 0; i < invented.size(); ++i)
            pred_map[invented[i]] = logic::intern(invented_name(target, perm[i] + 1));
        std::vector<std::string> lines;
        for (const Clause& c : clauses) {
            Clause r;
            r.head = rename_pred(c.head, pred_map);
            for (const Term& b : c.body) r.body.push_back(rename_pred(b, pred_map));
            lines.push_back(logic::to_string(normalize_clause_vars(r)));
        }
        std::sort(lines.begin(), lines.end());
        std::string text;
        for (const std::string& l : lines) text += l + "\n";
        if (best.empty() || text < best) best = text;
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (best.empty())
        for (const Clause& c : clauses) best += logic::to_string(normalize_clause_vars(c)) + "\n";
    return best;
}

namespace {

struct BudgetUp {};

// Meta-interpretive search. Hypothesis clauses are metarule instances whose
// second-order variables are assigned lazily: a body predicate slot is filled
// the first time its literal is selected, so impossible prefixes fail before
// the remaining slots multiply the search.
class MetaSearch {
public:
    MetaSearch(const InductionTask& task, InduceStats* stats) : task_(task), stats_(stats) {
        if (task_.positives.empty()) throw EmptyPositives("induce: positives required");
        target_ = task_.target;
        if (target_.empty()) {
            const Term& first = task_.positives.front().atoms.front();
            target_ = logic::symbol_name(first.sym);
        }
        target_sym_ = logic::intern(target_);
        for (std::size_t k = 1; k < task_.max_clauses; ++k)
            invented_syms_.push_back(logic::intern(invented_name(target_, k)));
        invented_arity_.assign(invented_syms_.size(), -1);

        body_candidates_ = task_.body_candidates;
        if (body_candidates_.empty() && task_.background)
            body_candidates_ = task_.background->body_preds;
        for (const auto& pr : body_candidates_)
            candidate_syms_.push_back({logic::intern(pr.name), pr.arity});

        if (task_.background) {
            const auto& cs = task_.background->clauses;
            for (std::size_t i = 0; i < cs.size(); ++i)
                bg_index_[key(cs[i].head.sym, cs[i].head.arity())].push_back(i);
        }
        budget_ = task_.search_budget;
    }

    void enumerate(std::size_t max_cl, const std::function<void()>& on_cover) {
        max_clauses_ = max_cl;
        machine_.reset();
        ancestors_.clear();
        hyp_.clear();
        hyp_.reserve(max_cl + 1);  // stable references across nested search calls
        std::vector<Entry> stack;
        for (auto it = task_.positives.rbegin(); it != task_.positives.rend(); ++it)
            for (auto at = it->atoms.rbegin(); at != it->atoms.rend(); ++at)
                stack.push_back({*at, -1, -1, -1});
        try {
            search(stack, task_.proof_depth * static_cast<long long>(task_.positives.size()),
                   on_cover);
        } catch (BudgetUp&) {
            if (stats_) stats_->budget_exhausted = true;
        }
    }

    // Materialized hypothesis; valid only inside on_cover (all slots assigned).
    std::vector<Clause> hyp_clauses() const {
        std::vector<Clause> out;
        for (const HypClause& hc : hyp_) out.push_back(materialize(hc));
        return out;
    }

    const std::string& target() const { return target_; }

private:
    struct Entry {
        Term term;
        int anc;
        int owner;    // hypothesis clause owning an unassigned predicate slot
        int so_slot;  // second-order variable index within that clause
    };
    struct AncNode {
        Term atom;
        int parent;
    };
    struct HypClause {
        const Metarule* mr;
        std::vector<int> so_assign;  // per second-order var: predicate symbol or -1
        std::vector<int> so_arity;
    };

    static std::uint64_t key(int sym, std::size_t arity) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(sym)) << 8) | (arity & 0xff);
    }

    Clause materialize(const HypClause& hc) const {
        Clause c;
        auto build = [&hc](const Metarule::AtomTemplate& at) {
            std::vector<Term> args;
            for (int v : at.arg_vars) args.push_back(Term::var(v));
            return Term::app(hc.so_assign[at.pred], std::move(args));
        };
        c.head = build(hc.mr->head);
        for (const auto& at : hc.mr->body) c.body.push_back(build(at));
        for (int v = 0; v < hc.mr->fo_var_count; ++v)
            c.var_names.push_back(logic::default_var_name(v));
        return c;
    }

    static std::vector<int> so_arity_map(const Metarule& m) {
        std::vector<int> ar(m.so_vars.size(), -1);
        auto note = [&ar](const Metarule::AtomTemplate& at) {
            if (ar[at.pred] == -1) ar[at.pred] = static_cast<int>(at.arg_vars.size());
        };
        note(m.head);
        for (const auto& at : m.body) note(at);
        return ar;
    }

    void tick() {
        ++ticks_;
        if (stats_) stats_->ticks = ticks_;
        if (--budget_ <= 0) throw BudgetUp{};
    }

    // Unbound variables renumbered by first occurrence, so variant goals
    // compare equal; pruning variant ancestors keeps invented-predicate
    // recursion from descending through endless fresh-variable goals.
    static Term variant_key(Term t) {
        int next = 0;
        int seen[8];
        int seen_to[8];
        int n_seen = 0;
        for (Term& a : t.args) {
            if (a.kind != Term::Kind::Var) continue;
            int mapped = -1;
            for (int i = 0; i < n_seen; ++i)
                if (seen[i] == a.sym) mapped = seen_to[i];
            if (mapped < 0 && n_seen < 8) {
                seen[n_seen] = a.sym;
                seen_to[n_seen] = next++;
                mapped = seen_to[n_seen];
                ++n_seen;
            }
            a.sym = mapped < 0 ? 0 : mapped;
        }
        return t;
    }

    void search(std::vector<Entry>& stack, long long depth, const std::function<void()>& on_cover) {
        if (stack.empty()) {
            on_cover();
            return;
        }
        Entry top = stack.back();

        // Unassigned predicate slot: choose a predicate, then re-enter.
        if (top.owner >= 0 && hyp_[top.owner].so_assign[top.so_slot] < 0) {
            choose_predicate(top.owner, top.so_slot, stack, depth, on_cover);
            return;
        }

        Term goal = machine_.resolve(top.term);
        if (goal.kind == Term::Kind::Compound && goal.sym < 0)
            goal.sym = hyp_[top.owner].so_assign[top.so_slot];
        if (goal.kind == Term::Kind::Var) return;

        int functor = goal.sym;
        std::size_t arity = goal.arity();

        if (logic::is_builtin(functor, arity)) {
            tick();
            std::size_t m = machine_.mark();
            if (machine_.eval_builtin(goal)) {
                stack.pop_back();
                search(stack, depth, on_cover);
                stack.push_back(top);
            }
            machine_.undo(m);
            return;
        }
        if (depth <= 0) return;

        stack.pop_back();

        if (task_.facts) {
            for (const Term& f : task_.facts->matching(functor, arity)) {
                tick();
                std::size_t m = machine_.mark();
                if (machine_.unify(goal, f)) search(stack, depth - 1, on_cover);
                machine_.undo(m);
            }
        }
        if (task_.background) {
            auto it = bg_index_.find(key(functor, arity));
            if (it != bg_index_.end())
                for (std::size_t ci : it->second)
                    expand_bg(task_.background->clauses[ci], goal, top.anc, stack, depth,
                              on_cover);
        }
        for (std::size_t hi = 0; hi < hyp_.size(); ++hi) {
            const HypClause& hc = hyp_[hi];
            if (hc.so_assign[hc.mr->head.pred] == functor && hc.mr->head_arity() == arity)
                expand_hyp(hi, goal, top.anc, stack, depth, on_cover);
        }

        if (hyp_.size() < max_clauses_ && (functor == target_sym_ || is_invented(functor)))
            invent(goal, functor, top.anc, stack, depth, on_cover);

        stack.push_back(top);
    }

    void choose_predicate(int owner, int slot, std::vector<Entry>& stack, long long depth,
                          const std::function<void()>& on_cover) {
        HypClause& hc = hyp_[owner];
        int want_arity = hc.so_arity[slot];
        for (const auto& [sym, ar] : candidate_syms_) {
            if (ar != want_arity) continue;
            tick();
            commit_and_continue(owner, slot, sym, stack, depth, on_cover);
        }
        for (std::size_t k = 0; k < invented_syms_.size(); ++k) {
            if (k > invented_in_play_) break;  // f_{k+1} only after f_k is in play
            if (invented_arity_[k] != -1 && invented_arity_[k] != want_arity) continue;
            tick();
            int prev_arity = invented_arity_[k];
            std::size_t prev_play = invented_in_play_;
            invented_arity_[k] = want_arity;
            invented_in_play_ = std::max(invented_in_play_, k + 1);
            commit_and_continue(owner, slot, invented_syms_[k], stack, depth, on_cover);
            invented_arity_[k] = prev_arity;
            invented_in_play_ = prev_play;
        }
    }

    void commit_and_continue(int owner, int slot, int sym, std::vector<Entry>& stack,
                             long long depth, const std::function<void()>& on_cover) {
        hyp_[owner].so_assign[slot] = sym;
        // Reject the assignment when it completes a clause identical to
        // another fully assigned one; the existing clause already resolves.
        const HypClause& hc = hyp_[owner];
        bool fully = std::none_of(hc.so_assign.begin(), hc.so_assign.end(),
                                  [](int s) { return s < 0; });
        bool dup = false;
        if (fully) {
            Clause mine = materialize(hc);
            for (std::size_t i = 0; i < hyp_.size(); ++i) {
                if (static_cast<int>(i) == owner) continue;
                const HypClause& other = hyp_[i];
                if (std::any_of(other.so_assign.begin(), other.so_assign.end(),
                                [](int s) { return s < 0; }))
                    continue;
                Clause theirs = materialize(other);
                if (theirs.head == mine.head && theirs.body == mine.body) {
                    dup = true;
                    break;
                }
            }
        }
        if (!dup) search(stack, depth, on_cover);
        hyp_[owner].so_assign[slot] = -1;
    }

    bool is_invented(int sym) const {
        for (int s : invented_syms_)
            if (s == sym) return true;
        return false;
    }

    bool prune_by_ancestor(const Term& goal_now, int parent_anc, int* child_anc) {
        Term key_term = variant_key(goal_now);
        for (int a = parent_anc; a >= 0; a = ancestors_[a].parent) {
            if (ancestors_[a].atom == key_term) return true;
        }
        ancestors_.push_back({key_term, parent_anc});
        *child_anc = static_cast<int>(ancestors_.size()) - 1;
        return false;
    }

    void expand_bg(const Clause& c, const Term& goal, int parent_anc, std::vector<Entry>& stack,
                   long long depth, const std::function<void()>& on_cover) {
        tick();
        std::size_t m = machine_.mark();
        int offset = machine_.fresh_vars(c.num_vars());
        if (!machine_.unify(goal, machine_.instantiate(c.head, offset))) {
            machine_.undo(m);
            return;
        }
        int child_anc = parent_anc;
        if (prune_by_ancestor(machine_.resolve(goal), parent_anc, &child_anc)) {
            machine_.undo(m);
            return;
        }
        std::size_t base = stack.size();
        for (auto it = c.body.rbegin(); it != c.body.rend(); ++it)
            stack.push_back({machine_.instantiate(*it, offset), child_anc, -1, -1});
        search(stack, depth - 1, on_cover);
        stack.resize(base);
        ancestors_.pop_back();
        machine_.undo(m);
    }

    void expand_hyp(std::size_t hi, const Term& goal, int parent_anc, std::vector<Entry>& stack,
                    long long depth, const std::function<void()>& on_cover) {
        tick();
        const HypClause& hc = hyp_[hi];
        const Metarule& mr = *hc.mr;
        std::size_t m = machine_.mark();
        int offset = machine_.fresh_vars(static_cast<std::size_t>(mr.fo_var_count));
        Term head = Term::app(hc.so_assign[mr.head.pred], {});
        for (int v : mr.head.arg_vars) head.args.push_back(Term::var(v + offset));
        if (!machine_.unify(goal, head)) {
            machine_.undo(m);
            return;
        }
        int child_anc = parent_anc;
        if (prune_by_ancestor(machine_.resolve(goal), parent_anc, &child_anc)) {
            machine_.undo(m);
            return;
        }
        std::size_t base = stack.size();
        for (auto it = mr.body.rbegin(); it != mr.body.rend(); ++it) {
            Term lit = Term::app(0, {});
            lit.sym = hc.so_assign[it->pred] >= 0 ? hc.so_assign[it->pred] : -1;
            for (int v : it->arg_vars) lit.args.push_back(Term::var(v + offset));
            stack.push_back({lit, child_anc, static_cast<int>(hi), it->pred});
        }
        search(stack, depth - 1, on_cover);
        stack.resize(base);
        ancestors_.pop_back();
        machine_.undo(m);
    }

    void invent(const Term& goal, int functor, int parent_anc, std::vector<Entry>& stack,
                long long depth, const std::function<void()>& on_cover) {
        for (const Metarule& mr : task_.metarules) {
            if (mr.head_arity() != goal.arity()) continue;
            tick();
            HypClause hc;
            hc.mr = &mr;
            hc.so_assign.assign(mr.so_vars.size(), -1);
            hc.so_arity = so_arity_map(mr);
            hc.so_assign[mr.head.pred] = functor;
            hyp_.push_back(std::move(hc));
            expand_hyp(hyp_.size() - 1, goal, parent_anc, stack, depth, on_cover);
            hyp_.pop_back();
        }
    }

    const InductionTask& task_;
    InduceStats* stats_;
    std::string target_;
    int target_sym_ = -1;
    std::vector<int> invented_syms_;
    std::vector<int> invented_arity_;
    std::size_t invented_in_play_ = 0;
    std::vector<logic::PredicateRef> body_candidates_;
    std::vector<std::pair<int, int>> candidate_syms_;
    std::map<std::uint64_t, std::vector<std::size_t>> bg_index_;
    std::size_t max_clauses_ = 0;
    long long budget_ = 0;
    long long ticks_ = 0;
    Machine machine_;
    std::vector<HypClause> hyp_;
    std::vector<AncNode> ancestors_;
};

bool entails_conjunction(const InductionTask& task, const std::vector<Clause>& hyp,
                         const Goal& goal, long long depth, bool* cut_flag) {
    logic::QueryEnv env;
    env.program = task.background;
    env.facts = task.facts;
    env.extra_clauses = &hyp;
    logic::SolveStats st;
    logic::Proof r = logic::prove(env, goal.atoms, depth, &st);
    if (cut_flag) *cut_flag = (r == logic::Proof::depth_exceeded);
    return r == logic::Proof::proved;
}

}  // namespace

double score_hypothesis(const std::vector<Clause>& clauses, const InductionTask& task) {
    if (clauses.empty()) return 0.0;
    for (const Goal& p : task.positives)
        if (!entails_conjunction(task, clauses, p, task.check_depth, nullptr)) return 0.0;
    for (const Goal& n : task.negatives)
        if (entails_conjunction(task, clauses, n, task.check_depth, nullptr)) return 0.0;
    double len = static_cast<double>(clauses.size());
    return 1.0 / (len * len);
}

namespace {

struct StopSearch {};

std::vector<Hypothesis> run_induction(const InductionTask& task, InduceStats* stats,
                                      bool stop_at_first) {
    MetaSearch search(task, stats);
    std::set<std::string> seen;
    std::vector<Hypothesis> admissible;

    for (std::size_t budget = 1; budget <= task.max_clauses; ++budget) {
        try {
            search.enumerate(budget, [&]() {
                if (stats) ++stats->covers_found;
                std::vector<Clause> clauses = search.hyp_clauses();
                std::string canon = canonical_form(clauses, search.target());
                if (!seen.insert(canon).second) return;
                // Contrastive check: reject hypotheses entailing any negative.
                for (const Goal& n : task.negatives) {
                    bool cut = false;
                    if (entails_conjunction(task, clauses, n, task.check_depth, &cut)) return;
                    if (cut && stats) ++stats->depth_cut_negatives;
                }
                Hypothesis h;
                h.clauses = std::move(clauses);
                double len = static_cast<double>(h.clauses.size());
                h.score = 1.0 / (len * len);
                h.canonical = canon;
                admissible.push_back(std::move(h));
                if (stop_at_first) throw StopSearch{};
            });
        } catch (StopSearch&) {
            break;
        }
        if (stop_at_first && !admissible.empty()) break;
    }

    // Discovery order is insertion order; scores only decrease with length, so
    // a stable sort by score keeps ties in discovery order.
    std::stable_sort(admissible.begin(), admissible.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
    return admissible;
}

}  // namespace

std::vector<Hypothesis> induce(const InductionTask& task, InduceStats* stats) {
    std::vector<Hypothesis> out = run_induction(task, stats, false);
    if (out.empty())
        throw NoHypothesis("no hypothesis within " + std::to_string(task.max_clauses) +
                           " clauses satisfies the constraints");
    return out;
}

std::optional<Hypothesis> induce_best(const InductionTask& task, InduceStats* stats) {
    std::vector<Hypothesis> out = run_induction(task, stats, true);
    if (out.empty()) return std::nullopt;
    return out.front();
}

}  // namespace abdgen::mil
