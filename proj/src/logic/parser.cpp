#include "logic/parser.hpp"

#include <cctype>
#include <map>
#include <optional>

#include "errors.hpp"

namespace abdgen::logic {

namespace {

struct Token {
    enum class Kind { Ident, Variable, Integer, LParen, RParen, Comma, Dot, Neck, End };
    Kind kind;
    std::string text;
    long long ival = 0;
    int line = 1;
    int col = 1;
};

struct Directive {
    enum class Kind { Rule, End, BodyPred };
    Kind kind;
    std::string name;
    int arity = 0;
    int line = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    // Directives are whole lines; the lexer surfaces them out of band so the
    // token stream stays purely clausal.
    std::vector<Directive>& directives_at(std::size_t token_index) {
        return pending_[token_index];
    }

    std::vector<Token> tokens;
    std::map<std::size_t, std::vector<Directive>> pending_;

    void run() {
        while (true) {
            skip_ws_and_comments();
            if (pos_ >= text_.size()) break;
            char c = text_[pos_];
            int line = line_, col = col_;
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '-' && pos_ + 1 < text_.size() &&
                 std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
                std::string num;
                if (c == '-') {
                    num += '-';
                    advance();
                }
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    num += text_[pos_];
                    advance();
                }
                Token t{Token::Kind::Integer, num, std::stoll(num), line, col};
                tokens.push_back(t);
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string word;
                while (pos_ < text_.size() &&
                       (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                        text_[pos_] == '_')) {
                    word += text_[pos_];
                    advance();
                }
                bool is_var = std::isupper(static_cast<unsigned char>(word[0])) || word[0] == '_';
                tokens.push_back(
                    {is_var ? Token::Kind::Variable : Token::Kind::Ident, word, 0, line, col});
                continue;
            }
            switch (c) {
                case '(': push_simple(Token::Kind::LParen, "("); break;
                case ')': push_simple(Token::Kind::RParen, ")"); break;
                case ',': push_simple(Token::Kind::Comma, ","); break;
                case '.': push_simple(Token::Kind::Dot, "."); break;
                case ':':
                    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
                        tokens.push_back({Token::Kind::Neck, ":-", 0, line_, col_});
                        advance();
                        advance();
                    } else {
                        throw ParseError("stray ':'", line_, col_);
                    }
                    break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
            }
        }
        tokens.push_back({Token::Kind::End, "", 0, line_, col_});
    }

private:
    void push_simple(Token::Kind k, const char* s) {
        tokens.push_back({k, s, 0, line_, col_});
        advance();
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '%') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '%') {
                    parse_directive();
                } else {
                    while (pos_ < text_.size() && text_[pos_] != '\n') advance();
                }
            } else {
                break;
            }
        }
    }

    void parse_directive() {
        int line = line_;
        std::string rest;
        while (pos_ < text_.size() && text_[pos_] != '\n') {
            rest += text_[pos_];
            advance();
        }
        // rest = "%% rule name" etc.
        std::vector<std::string> words;
        std::string cur;
        for (char c : rest) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) {
                    words.push_back(cur);
                    cur.clear();
                }
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) words.push_back(cur);
        if (words.size() < 2 || words[0] != "%%")
            throw ParseError("malformed directive '" + rest + "'", line, 1);
        Directive d;
        d.line = line;
        if (words[1] == "rule") {
            if (words.size() != 3) throw ParseError("'%% rule' expects a name", line, 1);
            d.kind = Directive::Kind::Rule;
            d.name = words[2];
        } else if (words[1] == "end") {
            d.kind = Directive::Kind::End;
        } else if (words[1] == "body_pred") {
            if (words.size() != 3 || words[2].find('/') == std::string::npos)
                throw ParseError("'%% body_pred' expects name/arity", line, 1);
            d.kind = Directive::Kind::BodyPred;
            auto slash = words[2].find('/');
            d.name = words[2].substr(0, slash);
            d.arity = std::stoi(words[2].substr(slash + 1));
        } else {
            throw ParseError("unknown directive '" + words[1] + "'", line, 1);
        }
        pending_[tokens.size()].push_back(d);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(Lexer& lx) : lx_(lx) {}

    Program parse() {
        Program prog;
        std::optional<std::size_t> open_group;
        while (true) {
            apply_directives(prog, open_group);
            if (peek().kind == Token::Kind::End) break;
            Clause c = parse_clause();
            if (open_group) prog.rule_groups[*open_group].clause_indices.push_back(
                prog.clauses.size());
            prog.clauses.push_back(std::move(c));
        }
        return prog;
    }

    Term parse_query() {
        var_map_.clear();
        var_names_.clear();
        Term t = parse_atom();
        if (peek().kind == Token::Kind::Dot) ++idx_;
        expect(Token::Kind::End, "end of input");
        return t;
    }

private:
    void apply_directives(Program& prog, std::optional<std::size_t>& open_group) {
        auto it = lx_.pending_.find(idx_);
        if (it == lx_.pending_.end()) return;
        for (const Directive& d : it->second) {
            switch (d.kind) {
                case Directive::Kind::Rule:
                    for (const RuleGroup& g : prog.rule_groups)
                        if (g.name == d.name)
                            throw ParseError("duplicate rule group '" + d.name + "'", d.line, 1);
                    prog.rule_groups.push_back({d.name, {}});
                    open_group = prog.rule_groups.size() - 1;
                    break;
                case Directive::Kind::End: open_group.reset(); break;
                case Directive::Kind::BodyPred:
                    prog.body_preds.push_back({d.name, d.arity});
                    break;
            }
        }
    }

    const Token& peek() const { return lx_.tokens[idx_]; }

    const Token& expect(Token::Kind k, const char* what) {
        const Token& t = lx_.tokens[idx_];
        if (t.kind != k)
            throw ParseError(std::string("expected ") + what + ", got '" + t.text + "'", t.line,
                             t.col);
        ++idx_;
        return t;
    }

    Clause parse_clause() {
        var_map_.clear();
        var_names_.clear();
        Clause c;
        c.head = parse_atom();
        if (c.head.kind == Term::Kind::Var)
            throw ParseError("clause head cannot be a variable", peek().line, peek().col);
        if (peek().kind == Token::Kind::Neck) {
            ++idx_;
            c.body.push_back(parse_atom());
            while (peek().kind == Token::Kind::Comma) {
                ++idx_;
                c.body.push_back(parse_atom());
            }
        }
        expect(Token::Kind::Dot, "'.'");
        c.var_names = var_names_;
        return c;
    }

    Term parse_atom() {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            throw ParseError("expected predicate name, got '" + t.text + "'", t.line, t.col);
        std::string functor = t.text;
        ++idx_;
        if (peek().kind != Token::Kind::LParen) return Term::constant(functor);
        ++idx_;
        std::vector<Term> args;
        args.push_back(parse_arg());
        while (peek().kind == Token::Kind::Comma) {
            ++idx_;
            args.push_back(parse_arg());
        }
        expect(Token::Kind::RParen, "')'");
        return Term::app(functor, std::move(args));
    }

    Term parse_arg() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::Variable: {
                ++idx_;
                auto it = var_map_.find(t.text);
                if (it != var_map_.end()) return Term::var(it->second);
                int id = static_cast<int>(var_names_.size());
                var_map_.emplace(t.text, id);
                var_names_.push_back(t.text);
                return Term::var(id);
            }
            case Token::Kind::Integer: ++idx_; return Term::integer(t.ival);
            case Token::Kind::Ident: {
                ++idx_;
                if (peek().kind == Token::Kind::LParen)
                    throw ParseError("nested compound terms are not supported", peek().line,
                                     peek().col);
                return Term::constant(t.text);
            }
            default:
                throw ParseError("expected term, got '" + t.text + "'", t.line, t.col);
        }
    }

    Lexer& lx_;
    std::size_t idx_ = 0;
    std::map<std::string, int> var_map_;
    std::vector<std::string> var_names_;
};

}  // namespace

Program parse_program(const std::string& text) {
    Lexer lx(text);
    lx.run();
    Parser p(lx);
    return p.parse();
}

Term parse_term(const std::string& text) {
    Lexer lx(text);
    lx.run();
    Parser p(lx);
    return p.parse_query();
}

}  // namespace abdgen::logic
