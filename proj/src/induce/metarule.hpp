#pragma once

#include <string>
#include <vector>

#include "logic/ast.hpp"

namespace abdgen::mil {

// Second-order clause template. Atom templates name their predicate by an
// index into the existential (second-order) variables; arguments are indices
// into a shared first-order variable space.
struct Metarule {
    struct AtomTemplate {
        int pred = 0;                // index into so_vars
        std::vector<int> arg_vars;   // first-order variable indices
    };

    std::string name;                // empty for the unnamed syntactic form
    std::vector<std::string> so_vars;
    AtomTemplate head;
    std::vector<AtomTemplate> body;
    int fo_var_count = 0;

    std::size_t head_arity() const { return head.arg_vars.size(); }
};

// Accepts both syntactic forms:
//   metarule(chain, [P,Q,R], [P,A,B], [[Q,A,C],[R,C,B]]).
//   metarule([P,Q], [P,A], [[Q,A]]).
// '%' comments allowed. Every predicate slot used in a template must appear in
// the second-order variable list.
std::vector<Metarule> parse_metarules(const std::string& text);

std::string to_string(const Metarule& m);

}  // namespace abdgen::mil
