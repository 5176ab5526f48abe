#pragma once

#include <string>

#include "logic/ast.hpp"

namespace abdgen::logic {

// Clause-file grammar:
//   clause    := atom ("." | ":-" body ".")
//   body      := atom ("," atom)*
//   atom      := lowercase_ident "(" term ("," term)* ")" | lowercase_ident
//   term      := Variable | lowercase_ident | integer
// Variables start with an uppercase letter or underscore. "%" starts a
// comment. Directive lines:
//   %% rule <name>         clauses until the next directive form a rule group
//   %% end                 closes the current rule group
//   %% body_pred <name>/<arity>   declares a hypothesis body predicate
Program parse_program(const std::string& text);

// Parses a single atom or ground term, e.g. a query "f(p1,p2)".
Term parse_term(const std::string& text);

}  // namespace abdgen::logic
