#include "bes/syntax.hpp"

#include <cctype>

namespace bes {

namespace {

struct Token {
    enum class Kind { Ident, LParen, RParen, Comma, Arrow, Amp, Bar, Tilde, End };
    Kind kind;
    std::string text;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const Token& at, const std::string& msg) const {
        throw SyntaxError("parse error at " + std::to_string(at.line) + ":" +
                          std::to_string(at.col) + ": " + msg);
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::Kind::End;
            tok_.text = "<end of input>";
            return;
        }
        char c = src_[pos_];
        auto one = [&](Token::Kind k) {
            tok_.kind = k;
            tok_.text = std::string(1, c);
            ++pos_;
            ++col_;
        };
        switch (c) {
            case '(': one(Token::Kind::LParen); return;
            case ')': one(Token::Kind::RParen); return;
            case ',': one(Token::Kind::Comma); return;
            case '&': one(Token::Kind::Amp); return;
            case '|': one(Token::Kind::Bar); return;
            case '~': one(Token::Kind::Tilde); return;
            case '-':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
                    tok_.kind = Token::Kind::Arrow;
                    tok_.text = "->";
                    pos_ += 2;
                    col_ += 2;
                    return;
                }
                throw SyntaxError("parse error at " + std::to_string(line_) + ":" +
                                  std::to_string(col_) + ": stray '-'");
            default:
                break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
                ++col_;
            }
            tok_.kind = Token::Kind::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        throw SyntaxError("parse error at " + std::to_string(line_) + ":" +
                          std::to_string(col_) + ": unexpected character '" + std::string(1, c) +
                          "'");
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    Parser(const std::string& src, const Signature& sig) : lex_(src), sig_(sig) {}

    FormulaPtr formula_all() {
        FormulaPtr f = formula();
        if (lex_.peek().kind != Token::Kind::End)
            lex_.fail(lex_.peek(), "trailing input '" + lex_.peek().text + "'");
        return f;
    }

    Term term_all() {
        Term t = term();
        if (lex_.peek().kind != Token::Kind::End)
            lex_.fail(lex_.peek(), "trailing input '" + lex_.peek().text + "'");
        return t;
    }

    // '->' is right-associative and binds loosest.
    FormulaPtr formula() {
        FormulaPtr lhs = or_expr();
        if (lex_.peek().kind == Token::Kind::Arrow) {
            lex_.take();
            return Formula::impl(lhs, formula());
        }
        return lhs;
    }

private:
    FormulaPtr or_expr() {
        FormulaPtr f = and_expr();
        while (lex_.peek().kind == Token::Kind::Bar) {
            lex_.take();
            f = Formula::disj(f, and_expr());
        }
        return f;
    }

    FormulaPtr and_expr() {
        FormulaPtr f = unary();
        while (lex_.peek().kind == Token::Kind::Amp) {
            lex_.take();
            f = Formula::conj(f, unary());
        }
        return f;
    }

    FormulaPtr unary() {
        Token t = lex_.peek();
        switch (t.kind) {
            case Token::Kind::Tilde:
                lex_.take();
                return Formula::neg(unary());
            case Token::Kind::LParen: {
                lex_.take();
                FormulaPtr f = formula();
                expect(Token::Kind::RParen, "')'");
                return f;
            }
            case Token::Kind::Ident: {
                if (t.text == "bot") {
                    lex_.take();
                    return Formula::falsum();
                }
                if (t.text == "forall" || t.text == "exists") {
                    lex_.take();
                    Token v = expect(Token::Kind::Ident, "bound variable");
                    if (is_reserved(v.text) || sig_.is_constant(v.text) ||
                        sig_.is_function(v.text) || sig_.is_predicate(v.text))
                        lex_.fail(v, "'" + v.text + "' cannot be used as a bound variable");
                    FormulaPtr body = unary();
                    return t.text == "forall" ? Formula::forall(v.text, body)
                                              : Formula::exists(v.text, body);
                }
                return atom();
            }
            default:
                lex_.fail(t, "expected a formula, got '" + t.text + "'");
        }
    }

    FormulaPtr atom() {
        Token name = expect(Token::Kind::Ident, "predicate symbol");
        if (!sig_.is_predicate(name.text))
            lex_.fail(name, "unknown predicate symbol '" + name.text + "'");
        int arity = sig_.predicates.at(name.text);
        std::vector<Term> args;
        if (lex_.peek().kind == Token::Kind::LParen) {
            lex_.take();
            args.push_back(term());
            while (lex_.peek().kind == Token::Kind::Comma) {
                lex_.take();
                args.push_back(term());
            }
            expect(Token::Kind::RParen, "')'");
        }
        if (static_cast<int>(args.size()) != arity)
            lex_.fail(name, "predicate '" + name.text + "' expects " + std::to_string(arity) +
                                " argument(s), got " + std::to_string(args.size()));
        return Formula::atom(name.text, std::move(args));
    }

    Term term() {
        Token name = expect(Token::Kind::Ident, "term");
        if (is_reserved(name.text)) lex_.fail(name, "'" + name.text + "' is reserved");
        if (sig_.is_function(name.text)) {
            int arity = sig_.functions.at(name.text);
            expect(Token::Kind::LParen, "'(' after function symbol");
            std::vector<Term> args;
            args.push_back(term());
            while (lex_.peek().kind == Token::Kind::Comma) {
                lex_.take();
                args.push_back(term());
            }
            expect(Token::Kind::RParen, "')'");
            if (static_cast<int>(args.size()) != arity)
                lex_.fail(name, "function '" + name.text + "' expects " + std::to_string(arity) +
                                    " argument(s), got " + std::to_string(args.size()));
            return Term::app(name.text, std::move(args));
        }
        if (sig_.is_predicate(name.text))
            lex_.fail(name, "predicate symbol '" + name.text + "' used in term position");
        if (lex_.peek().kind == Token::Kind::LParen)
            lex_.fail(name, "'" + name.text + "' is not a declared function symbol");
        if (sig_.is_constant(name.text)) return Term::cnst(name.text);
        return Term::var(name.text);  // undeclared identifiers act as variables
    }

    static bool is_reserved(const std::string& s) {
        return s == "forall" || s == "exists" || s == "bot";
    }

    Token expect(Token::Kind k, const std::string& what) {
        Token t = lex_.peek();
        if (t.kind != k) lex_.fail(t, "expected " + what + ", got '" + t.text + "'");
        return lex_.take();
    }

    Lexer lex_;
    const Signature& sig_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
    return Parser(text, sig).formula_all();
}

Term parse_term(const std::string& text, const Signature& sig) {
    return Parser(text, sig).term_all();
}

}  // namespace bes
