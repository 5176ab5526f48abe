#include "logic/ast.hpp"

#include <mutex>
#include <sstream>
#include <unordered_map>

namespace abdgen::logic {

namespace {
struct InternTable {
    std::mutex mu;
    std::unordered_map<std::string, int> ids;
    std::vector<std::string> names;
};
InternTable& table() {
    static InternTable t;
    return t;
}
}  // namespace

int intern(const std::string& name) {
    InternTable& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    auto it = t.ids.find(name);
    if (it != t.ids.end()) return it->second;
    int id = static_cast<int>(t.names.size());
    t.names.push_back(name);
    t.ids.emplace(name, id);
    return id;
}

const std::string& symbol_name(int sym) {
    InternTable& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    return t.names.at(static_cast<std::size_t>(sym));
}

bool Term::is_ground() const {
    if (kind == Kind::Var) return false;
    for (const Term& a : args)
        if (!a.is_ground()) return false;
    return true;
}

bool Term::operator==(const Term& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::Var: return sym == o.sym;
        case Kind::Const: return sym == o.sym;
        case Kind::Int: return ival == o.ival;
        case Kind::Compound:
            if (sym != o.sym || args.size() != o.args.size()) return false;
            for (std::size_t i = 0; i < args.size(); ++i)
                if (!(args[i] == o.args[i])) return false;
            return true;
    }
    return false;
}

std::uint64_t term_hash(const Term& t) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(t.kind));
    mix(static_cast<std::uint64_t>(t.kind == Term::Kind::Int ? t.ival : t.sym));
    for (const Term& a : t.args) mix(term_hash(a));
    return h;
}

std::string default_var_name(int index) {
    std::string s;
    int i = index;
    do {
        s.insert(s.begin(), static_cast<char>('A' + i % 26));
        i = i / 26 - 1;
    } while (i >= 0);
    return s;
}

std::string to_string(const Term& t, const std::vector<std::string>* var_names) {
    switch (t.kind) {
        case Term::Kind::Var:
            if (var_names && t.sym >= 0 && t.sym < static_cast<int>(var_names->size()))
                return (*var_names)[t.sym];
            return default_var_name(t.sym);
        case Term::Kind::Const: return symbol_name(t.sym);
        case Term::Kind::Int: return std::to_string(t.ival);
        case Term::Kind::Compound: {
            std::ostringstream os;
            os << symbol_name(t.sym) << '(';
            for (std::size_t i = 0; i < t.args.size(); ++i) {
                if (i) os << ',';
                os << to_string(t.args[i], var_names);
            }
            os << ')';
            return os.str();
        }
    }
    return "?";
}

std::string to_string(const Clause& c) {
    std::ostringstream os;
    os << to_string(c.head, &c.var_names);
    if (!c.body.empty()) {
        os << ":-";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            if (i) os << ',';
            os << to_string(c.body[i], &c.var_names);
        }
    }
    os << '.';
    return os.str();
}

std::string to_string(const Program& p) {
    std::ostringstream os;
    for (const Clause& c : p.clauses) os << to_string(c) << '\n';
    return os.str();
}

}  // namespace abdgen::logic
