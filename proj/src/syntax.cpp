#include "bes/syntax.hpp"

#include <algorithm>
#include <sstream>

namespace bes {

// ---------------------------------------------------------------------------
// Terms

int cmp(const Term& a, const Term& b) {
    if (a.is_var != b.is_var) return a.is_var ? -1 : 1;
    if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (int c = cmp(a.args[i], b.args[i])) return c;
    return 0;
}

bool term_closed(const Term& t) {
    if (t.is_var) return false;
    for (const auto& a : t.args)
        if (!term_closed(a)) return false;
    return true;
}

void term_free_vars(const Term& t, std::set<std::string>& out) {
    if (t.is_var) {
        out.insert(t.name);
        return;
    }
    for (const auto& a : t.args) term_free_vars(a, out);
}

int term_depth(const Term& t) {
    int d = 0;
    for (const auto& a : t.args) d = std::max(d, 1 + term_depth(a));
    return d;
}

std::string to_string(const Term& t) {
    std::string s = t.name;
    if (!t.args.empty()) {
        s += "(";
        for (size_t i = 0; i < t.args.size(); ++i) {
            if (i) s += ", ";
            s += to_string(t.args[i]);
        }
        s += ")";
    }
    return s;
}

Term term_subst(const Term& t, const std::string& x, const Term& r) {
    if (t.is_var) return t.name == x ? r : t;
    Term out = t;
    for (auto& a : out.args) a = term_subst(a, x, r);
    return out;
}

bool term_occurs(const Term& t, const Term& s) {
    if (t == s) return true;
    for (const auto& a : t.args)
        if (term_occurs(a, s)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Signatures

bool Signature::is_constant(const std::string& n) const {
    return std::find(constants.begin(), constants.end(), n) != constants.end();
}
bool Signature::is_function(const std::string& n) const { return functions.count(n) > 0; }
bool Signature::is_predicate(const std::string& n) const { return predicates.count(n) > 0; }

void Signature::validate() const {
    if (term_depth_bound < 0) throw SyntaxError("term depth bound must be >= 0");
    std::set<std::string> seen;
    auto add = [&](const std::string& n, const char* what) {
        if (!seen.insert(n).second)
            throw SyntaxError("signature name '" + n + "' declared twice (" + what + ")");
    };
    for (const auto& c : constants) add(c, "constant");
    for (const auto& [f, ar] : functions) {
        if (ar <= 0) throw SyntaxError("function '" + f + "' must have positive arity");
        add(f, "function");
    }
    for (const auto& [p, ar] : predicates) {
        if (ar < 0) throw SyntaxError("predicate '" + p + "' has negative arity");
        add(p, "predicate");
    }
}

Signature parse_signature(const std::string& text) {
    Signature sig;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto fail = [&](const std::string& m) {
            throw SyntaxError("signature line " + std::to_string(lineno) + ": " + m);
        };
        if (kw == "const") {
            std::string n;
            if (!(ls >> n)) fail("expected constant name");
            sig.constants.push_back(n);
        } else if (kw == "fun" || kw == "pred") {
            std::string decl;
            if (!(ls >> decl)) fail("expected name/arity");
            auto slash = decl.find('/');
            if (slash == std::string::npos) fail("expected name/arity, got '" + decl + "'");
            std::string n = decl.substr(0, slash);
            int ar = 0;
            try {
                ar = std::stoi(decl.substr(slash + 1));
            } catch (...) {
                fail("bad arity in '" + decl + "'");
            }
            if (kw == "fun")
                sig.functions[n] = ar;
            else
                sig.predicates[n] = ar;
        } else if (kw == "depth") {
            int d;
            if (!(ls >> d)) fail("expected depth bound");
            sig.term_depth_bound = d;
        } else {
            fail("unknown declaration '" + kw + "'");
        }
        std::string rest;
        if (ls >> rest) fail("trailing input '" + rest + "'");
    }
    sig.validate();
    return sig;
}

std::vector<Term> closed_terms(const Signature& sig) {
    sig.validate();
    if (sig.constants.empty())
        throw SyntaxError("closed-term enumeration needs at least one constant");
    std::vector<Term> all;
    std::set<std::string> seen;
    auto push = [&](const Term& t) {
        if (seen.insert(to_string(t)).second) all.push_back(t);
    };
    for (const auto& c : sig.constants) push(Term::cnst(c));
    std::vector<Term> prev = all;  // terms of depth <= d
    for (int d = 1; d <= sig.term_depth_bound; ++d) {
        std::vector<Term> layer;
        for (const auto& [f, ar] : sig.functions) {
            // all argument tuples over prev
            std::vector<size_t> idx(static_cast<size_t>(ar), 0);
            if (prev.empty()) continue;
            while (true) {
                std::vector<Term> args;
                args.reserve(idx.size());
                for (size_t i : idx) args.push_back(prev[i]);
                Term t = Term::app(f, args);
                if (term_depth(t) == d) layer.push_back(t);
                size_t k = idx.size();
                while (k > 0 && ++idx[k - 1] == prev.size()) idx[--k] = 0;
                if (k == 0) break;
            }
        }
        for (const auto& t : layer) push(t);
        prev = all;
    }
    return all;
}

// ---------------------------------------------------------------------------
// Formulas

FormulaPtr Formula::atom(std::string pred, std::vector<Term> as) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Atom;
    f->name = std::move(pred);
    f->args = std::move(as);
    return f;
}
FormulaPtr Formula::falsum() {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Falsum;
    return f;
}
static FormulaPtr mk_binary(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
}
FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) { return mk_binary(Kind::And, a, b); }
FormulaPtr Formula::disj(FormulaPtr a, FormulaPtr b) { return mk_binary(Kind::Or, a, b); }
FormulaPtr Formula::impl(FormulaPtr a, FormulaPtr b) { return mk_binary(Kind::Implies, a, b); }
FormulaPtr Formula::neg(FormulaPtr a) { return impl(std::move(a), falsum()); }
static FormulaPtr mk_quant(Formula::Kind k, std::string v, FormulaPtr body) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->name = std::move(v);
    f->lhs = std::move(body);
    return f;
}
FormulaPtr Formula::forall(std::string v, FormulaPtr body) {
    return mk_quant(Kind::Forall, std::move(v), std::move(body));
}
FormulaPtr Formula::exists(std::string v, FormulaPtr body) {
    return mk_quant(Kind::Exists, std::move(v), std::move(body));
}

int cmp(const FormulaPtr& a, const FormulaPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
        case Formula::Kind::Atom: {
            if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
            if (a->args.size() != b->args.size())
                return a->args.size() < b->args.size() ? -1 : 1;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (int c = cmp(a->args[i], b->args[i])) return c;
            return 0;
        }
        case Formula::Kind::Falsum:
            return 0;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies: {
            if (int c = cmp(a->lhs, b->lhs)) return c;
            return cmp(a->rhs, b->rhs);
        }
        case Formula::Kind::Forall:
        case Formula::Kind::Exists: {
            if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
            return cmp(a->lhs, b->lhs);
        }
    }
    return 0;
}

// Precedence levels for printing: -> 1, | 2, & 3, unary 4.
static void print_rec(const FormulaPtr& f, int min_prec, std::string& out) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            out += f->name;
            if (!f->args.empty()) {
                out += "(";
                for (size_t i = 0; i < f->args.size(); ++i) {
                    if (i) out += ", ";
                    out += to_string(f->args[i]);
                }
                out += ")";
            }
            return;
        }
        case Formula::Kind::Falsum:
            out += "bot";
            return;
        case Formula::Kind::Implies: {
            // negation sugar
            if (f->rhs->kind == Formula::Kind::Falsum) {
                out += "~";
                print_rec(f->lhs, 4, out);
                return;
            }
            bool paren = min_prec > 1;
            if (paren) out += "(";
            print_rec(f->lhs, 2, out);
            out += " -> ";
            print_rec(f->rhs, 1, out);
            if (paren) out += ")";
            return;
        }
        case Formula::Kind::Or: {
            bool paren = min_prec > 2;
            if (paren) out += "(";
            print_rec(f->lhs, 2, out);
            out += " | ";
            print_rec(f->rhs, 3, out);
            if (paren) out += ")";
            return;
        }
        case Formula::Kind::And: {
            bool paren = min_prec > 3;
            if (paren) out += "(";
            print_rec(f->lhs, 3, out);
            out += " & ";
            print_rec(f->rhs, 4, out);
            if (paren) out += ")";
            return;
        }
        case Formula::Kind::Forall:
        case Formula::Kind::Exists: {
            out += f->kind == Formula::Kind::Forall ? "forall " : "exists ";
            out += f->name;
            out += " ";
            print_rec(f->lhs, 4, out);
            return;
        }
    }
}

std::string to_string(const FormulaPtr& f) {
    std::string out;
    print_rec(f, 0, out);
    return out;
}

static void free_vars_rec(const FormulaPtr& f, std::set<std::string>& bound,
                          std::set<std::string>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            std::set<std::string> vs;
            for (const auto& t : f->args) term_free_vars(t, vs);
            for (const auto& v : vs)
                if (!bound.count(v)) out.insert(v);
            return;
        }
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            free_vars_rec(f->lhs, bound, out);
            free_vars_rec(f->rhs, bound, out);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists: {
            bool fresh = bound.insert(f->name).second;
            free_vars_rec(f->lhs, bound, out);
            if (fresh) bound.erase(f->name);
            return;
        }
    }
}

std::set<std::string> free_vars(const FormulaPtr& f) {
    std::set<std::string> bound, out;
    free_vars_rec(f, bound, out);
    return out;
}

bool closed(const FormulaPtr& f) { return free_vars(f).empty(); }

static FormulaPtr subst_rec(const FormulaPtr& f, const std::string& x, const Term& t,
                            const std::set<std::string>& tvars) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            std::vector<Term> args = f->args;
            for (auto& a : args) a = term_subst(a, x, t);
            return Formula::atom(f->name, std::move(args));
        }
        case Formula::Kind::Falsum:
            return f;
        case Formula::Kind::And:
            return Formula::conj(subst_rec(f->lhs, x, t, tvars), subst_rec(f->rhs, x, t, tvars));
        case Formula::Kind::Or:
            return Formula::disj(subst_rec(f->lhs, x, t, tvars), subst_rec(f->rhs, x, t, tvars));
        case Formula::Kind::Implies:
            return Formula::impl(subst_rec(f->lhs, x, t, tvars), subst_rec(f->rhs, x, t, tvars));
        case Formula::Kind::Forall:
        case Formula::Kind::Exists: {
            if (f->name == x) return f;  // bound occurrences untouched
            if (tvars.count(f->name) && free_vars(f->lhs).count(x))
                throw SyntaxError("substitution would capture variable '" + f->name + "'");
            FormulaPtr body = subst_rec(f->lhs, x, t, tvars);
            return f->kind == Formula::Kind::Forall ? Formula::forall(f->name, body)
                                                    : Formula::exists(f->name, body);
        }
    }
    return f;
}

FormulaPtr substitute(const FormulaPtr& f, const std::string& x, const Term& t) {
    if (!term_closed(t))
        throw SyntaxError("substitute: term '" + to_string(t) + "' is not closed");
    std::set<std::string> none;
    return subst_rec(f, x, t, none);
}

FormulaPtr substitute_capture_checked(const FormulaPtr& f, const std::string& x, const Term& t) {
    std::set<std::string> tvars;
    term_free_vars(t, tvars);
    return subst_rec(f, x, t, tvars);
}

bool occurs(const FormulaPtr& f, const Term& s) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            for (const auto& a : f->args)
                if (term_occurs(a, s)) return true;
            return false;
        case Formula::Kind::Falsum:
            return false;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            return occurs(f->lhs, s) || occurs(f->rhs, s);
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            return occurs(f->lhs, s);
    }
    return false;
}

static void term_vars_in_order(const Term& t, std::vector<std::string>& out) {
    if (t.is_var) out.push_back(t.name);
    for (const auto& a : t.args) term_vars_in_order(a, out);
}

// First occurrences of free variables in print order (same as DFS order).
static void first_occurrences(const FormulaPtr& f, std::set<std::string>& bound,
                              std::vector<std::string>& order) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            std::vector<std::string> linear;
            for (const auto& t : f->args) term_vars_in_order(t, linear);
            for (const auto& v : linear)
                if (!bound.count(v) && std::find(order.begin(), order.end(), v) == order.end())
                    order.push_back(v);
            return;
        }
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            first_occurrences(f->lhs, bound, order);
            first_occurrences(f->rhs, bound, order);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists: {
            bool fresh = bound.insert(f->name).second;
            first_occurrences(f->lhs, bound, order);
            if (fresh) bound.erase(f->name);
            return;
        }
    }
}

FormulaPtr universal_closure(const FormulaPtr& f) {
    std::set<std::string> bound;
    std::vector<std::string> order;
    first_occurrences(f, bound, order);
    FormulaPtr out = f;
    for (const auto& v : order) out = Formula::forall(v, out);
    return out;
}

int weight(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            return 0;
        case Formula::Kind::Falsum:
            return 1;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            return weight(f->lhs) + weight(f->rhs) + 1;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            return weight(f->lhs) + 1;
    }
    return 0;
}

static void subformulae_rec(const FormulaPtr& f, const std::vector<Term>& ct, FormulaSet& out) {
    if (!out.insert(f).second) return;
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            subformulae_rec(f->lhs, ct, out);
            subformulae_rec(f->rhs, ct, out);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            for (const auto& t : ct) subformulae_rec(substitute(f->lhs, f->name, t), ct, out);
            return;
    }
}

std::vector<FormulaPtr> subformulae(const FormulaPtr& f, const std::vector<Term>& ct) {
    if (!closed(f))
        throw SyntaxError("subformulae: formula '" + to_string(f) + "' is not closed");
    FormulaSet set;
    subformulae_rec(f, ct, set);
    std::vector<FormulaPtr> out(set.begin(), set.end());
    std::sort(out.begin(), out.end(),
              [](const FormulaPtr& a, const FormulaPtr& b) { return to_string(a) < to_string(b); });
    return out;
}

// ---------------------------------------------------------------------------
// Schemes

SchemePtr Scheme::metavar(std::string n) {
    auto s = std::make_shared<Scheme>();
    s->kind = Kind::MetaVar;
    s->name = std::move(n);
    return s;
}
SchemePtr Scheme::falsum() {
    auto s = std::make_shared<Scheme>();
    s->kind = Kind::Falsum;
    return s;
}
static SchemePtr mk_sbin(Scheme::Kind k, SchemePtr a, SchemePtr b) {
    auto s = std::make_shared<Scheme>();
    s->kind = k;
    s->lhs = std::move(a);
    s->rhs = std::move(b);
    return s;
}
SchemePtr Scheme::conj(SchemePtr a, SchemePtr b) { return mk_sbin(Kind::And, a, b); }
SchemePtr Scheme::disj(SchemePtr a, SchemePtr b) { return mk_sbin(Kind::Or, a, b); }
SchemePtr Scheme::impl(SchemePtr a, SchemePtr b) { return mk_sbin(Kind::Implies, a, b); }
SchemePtr Scheme::neg(SchemePtr a) { return impl(std::move(a), falsum()); }
SchemePtr Scheme::forall(std::string slot, SchemePtr body) {
    auto s = std::make_shared<Scheme>();
    s->kind = Kind::Forall;
    s->name = std::move(slot);
    s->lhs = std::move(body);
    return s;
}
SchemePtr Scheme::exists(std::string slot, SchemePtr body) {
    auto s = std::make_shared<Scheme>();
    s->kind = Kind::Exists;
    s->name = std::move(slot);
    s->lhs = std::move(body);
    return s;
}
SchemePtr Scheme::subst(SchemePtr body, std::string var_slot, std::string term_slot) {
    auto s = std::make_shared<Scheme>();
    s->kind = Kind::Subst;
    s->lhs = std::move(body);
    s->var_slot = std::move(var_slot);
    s->term_slot = std::move(term_slot);
    return s;
}

static void scheme_metavars_rec(const SchemePtr& s, std::set<std::string>& out) {
    switch (s->kind) {
        case Scheme::Kind::MetaVar:
            out.insert(s->name);
            return;
        case Scheme::Kind::Falsum:
            return;
        case Scheme::Kind::And:
        case Scheme::Kind::Or:
        case Scheme::Kind::Implies:
            scheme_metavars_rec(s->lhs, out);
            scheme_metavars_rec(s->rhs, out);
            return;
        case Scheme::Kind::Forall:
        case Scheme::Kind::Exists:
        case Scheme::Kind::Subst:
            scheme_metavars_rec(s->lhs, out);
            return;
    }
}

std::set<std::string> scheme_metavars(const SchemePtr& s) {
    std::set<std::string> out;
    scheme_metavars_rec(s, out);
    return out;
}

FormulaPtr instantiate_scheme(const SchemePtr& s, const Instantiation& iota) {
    switch (s->kind) {
        case Scheme::Kind::MetaVar: {
            auto it = iota.formulas.find(s->name);
            if (it == iota.formulas.end())
                throw SyntaxError("instantiation missing formula-variable '" + s->name + "'");
            return it->second;
        }
        case Scheme::Kind::Falsum:
            return Formula::falsum();
        case Scheme::Kind::And:
            return Formula::conj(instantiate_scheme(s->lhs, iota), instantiate_scheme(s->rhs, iota));
        case Scheme::Kind::Or:
            return Formula::disj(instantiate_scheme(s->lhs, iota), instantiate_scheme(s->rhs, iota));
        case Scheme::Kind::Implies:
            return Formula::impl(instantiate_scheme(s->lhs, iota), instantiate_scheme(s->rhs, iota));
        case Scheme::Kind::Forall:
        case Scheme::Kind::Exists: {
            auto it = iota.vars.find(s->name);
            if (it == iota.vars.end())
                throw SyntaxError("instantiation missing variable slot '" + s->name + "'");
            FormulaPtr body = instantiate_scheme(s->lhs, iota);
            return s->kind == Scheme::Kind::Forall ? Formula::forall(it->second, body)
                                                   : Formula::exists(it->second, body);
        }
        case Scheme::Kind::Subst: {
            auto vit = iota.vars.find(s->var_slot);
            if (vit == iota.vars.end())
                throw SyntaxError("instantiation missing variable slot '" + s->var_slot + "'");
            auto tit = iota.terms.find(s->term_slot);
            if (tit == iota.terms.end())
                throw SyntaxError("instantiation missing term slot '" + s->term_slot + "'");
            FormulaPtr body = instantiate_scheme(s->lhs, iota);
            return substitute_capture_checked(body, vit->second, tit->second);
        }
    }
    throw SyntaxError("instantiate_scheme: bad scheme node");
}

}  // namespace bes
