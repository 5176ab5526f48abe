#include "induce/metarule.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace abdgen::mil {

namespace {

// Minimal recursive-descent reader for the metarule list syntax; the clause
// parser cannot be reused because templates nest lists.
class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    std::vector<Metarule> read_all() {
        std::vector<Metarule> out;
        skip();
        while (pos_ < text_.size()) {
            out.push_back(read_metarule());
            skip();
        }
        return out;
    }

private:
    Metarule read_metarule() {
        expect_word("metarule");
        expect('(');
        skip();
        Metarule m;
        if (peek() != '[') {
            m.name = read_ident();
            skip();
            expect(',');
        }
        std::vector<std::string> so = read_name_list();
        m.so_vars = so;
        skip();
        expect(',');
        std::map<std::string, int> fo_map;
        m.head = read_atom_template(so, fo_map);
        skip();
        expect(',');
        skip();
        expect('[');
        skip();
        if (peek() != ']') {
            m.body.push_back(read_atom_template(so, fo_map));
            skip();
            while (peek() == ',') {
                expect(',');
                m.body.push_back(read_atom_template(so, fo_map));
                skip();
            }
        }
        expect(']');
        skip();
        expect(')');
        skip();
        expect('.');
        m.fo_var_count = static_cast<int>(fo_map.size());
        return m;
    }

    std::vector<std::string> read_name_list() {
        skip();
        expect('[');
        std::vector<std::string> names;
        skip();
        names.push_back(read_ident());
        skip();
        while (peek() == ',') {
            expect(',');
            skip();
            names.push_back(read_ident());
            skip();
        }
        expect(']');
        return names;
    }

    Metarule::AtomTemplate read_atom_template(const std::vector<std::string>& so,
                                              std::map<std::string, int>& fo_map) {
        std::vector<std::string> names = read_name_list();
        if (names.empty()) throw ParseError("empty atom template", line_, 1);
        Metarule::AtomTemplate at;
        at.pred = -1;
        for (std::size_t i = 0; i < so.size(); ++i)
            if (so[i] == names[0]) at.pred = static_cast<int>(i);
        if (at.pred < 0)
            throw ParseError("predicate variable '" + names[0] +
                                 "' not declared in the second-order list",
                             line_, 1);
        for (std::size_t i = 1; i < names.size(); ++i) {
            auto it = fo_map.find(names[i]);
            int idx;
            if (it == fo_map.end()) {
                idx = static_cast<int>(fo_map.size());
                fo_map.emplace(names[i], idx);
            } else {
                idx = it->second;
            }
            at.arg_vars.push_back(idx);
        }
        return at;
    }

    std::string read_ident() {
        skip();
        std::string w;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_')) {
            w += text_[pos_];
            advance();
        }
        if (w.empty())
            throw ParseError("expected identifier", line_, 1);
        return w;
    }

    void expect_word(const char* w) {
        skip();
        std::string got = read_ident();
        if (got != w) throw ParseError(std::string("expected '") + w + "', got '" + got + "'",
                                       line_, 1);
    }

    char peek() {
        skip();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c) {
        skip();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", line_, 1);
        advance();
    }

    void advance() {
        if (pos_ < text_.size() && text_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

std::vector<Metarule> parse_metarules(const std::string& text) {
    Reader r(text);
    return r.read_all();
}

std::string to_string(const Metarule& m) {
    std::ostringstream os;
    os << "metarule(";
    if (!m.name.empty()) os << m.name << ", ";
    os << '[';
    for (std::size_t i = 0; i < m.so_vars.size(); ++i) {
        if (i) os << ',';
        os << m.so_vars[i];
    }
    os << "], ";
    auto emit = [&](const Metarule::AtomTemplate& at) {
        os << '[' << m.so_vars[at.pred];
        for (int v : at.arg_vars) os << ',' << logic::default_var_name(v);
        os << ']';
    };
    emit(m.head);
    os << ", [";
    for (std::size_t i = 0; i < m.body.size(); ++i) {
        if (i) os << ',';
        emit(m.body[i]);
    }
    os << "]).";
    return os.str();
}

}  // namespace abdgen::mil
