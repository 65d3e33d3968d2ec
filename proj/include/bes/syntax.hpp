#ifndef BES_SYNTAX_HPP
#define BES_SYNTAX_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bes {

// Errors raised by parsing and syntactic operations. `pos` is a 1-based
// line:column pair when the error came from a text input.
struct SyntaxError : std::runtime_error {
    explicit SyntaxError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Terms

// A term is a variable or an application of a constant/function symbol.
// Constants are applications with zero arguments. Which identifiers are
// variables is decided against a Signature at parse time; programmatic
// constructors state it explicitly.
struct Term {
    bool is_var = false;
    std::string name;
    std::vector<Term> args;

    static Term var(std::string n) { return Term{true, std::move(n), {}}; }
    static Term cnst(std::string n) { return Term{false, std::move(n), {}}; }
    static Term app(std::string n, std::vector<Term> as) {
        return Term{false, std::move(n), std::move(as)};
    }
};

int cmp(const Term& a, const Term& b);
inline bool operator==(const Term& a, const Term& b) { return cmp(a, b) == 0; }
inline bool operator!=(const Term& a, const Term& b) { return cmp(a, b) != 0; }
inline bool operator<(const Term& a, const Term& b) { return cmp(a, b) < 0; }

bool term_closed(const Term& t);
void term_free_vars(const Term& t, std::set<std::string>& out);
int term_depth(const Term& t);
std::string to_string(const Term& t);

// Replaces every occurrence of variable x in t by r (terms have no binders).
Term term_subst(const Term& t, const std::string& x, const Term& r);
// True iff the closed term s occurs inside t.
bool term_occurs(const Term& t, const Term& s);

// ---------------------------------------------------------------------------
// Signatures

// A declared first-order vocabulary. Variables come from an open name pool:
// any identifier that is not declared as a constant or function acts as a
// variable in term position.
struct Signature {
    std::vector<std::string> constants;              // declaration order kept
    std::map<std::string, int> functions;            // name -> arity
    std::map<std::string, int> predicates;           // name -> arity
    int term_depth_bound = 1;

    bool is_constant(const std::string& n) const;
    bool is_function(const std::string& n) const;
    bool is_predicate(const std::string& n) const;
    // Throws SyntaxError if names overlap across categories or the bound is
    // negative. A signature used for closed-term enumeration also needs at
    // least one constant, checked in closed_terms().
    void validate() const;
};

Signature parse_signature(const std::string& text);

// All closed terms of depth <= sig.term_depth_bound, in a deterministic
// order: constants in declaration order, then by depth layer.
std::vector<Term> closed_terms(const Signature& sig);

// ---------------------------------------------------------------------------
// Formulas

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
public:
    enum class Kind { Atom, Falsum, And, Or, Implies, Forall, Exists };

    Kind kind;
    std::string name;        // Atom: predicate; Forall/Exists: bound variable
    std::vector<Term> args;  // Atom only
    FormulaPtr lhs, rhs;     // And/Or/Implies; quantifier body lives in lhs

    static FormulaPtr atom(std::string pred, std::vector<Term> as = {});
    static FormulaPtr falsum();
    static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
    static FormulaPtr disj(FormulaPtr a, FormulaPtr b);
    static FormulaPtr impl(FormulaPtr a, FormulaPtr b);
    static FormulaPtr neg(FormulaPtr a);  // sugar for a -> bot
    static FormulaPtr forall(std::string v, FormulaPtr body);
    static FormulaPtr exists(std::string v, FormulaPtr body);
};

int cmp(const FormulaPtr& a, const FormulaPtr& b);
inline bool equal(const FormulaPtr& a, const FormulaPtr& b) { return cmp(a, b) == 0; }
struct FormulaCmp {
    bool operator()(const FormulaPtr& a, const FormulaPtr& b) const { return cmp(a, b) < 0; }
};
using FormulaSet = std::set<FormulaPtr, FormulaCmp>;

std::string to_string(const FormulaPtr& f);

// Parses a formula against the grammar documented in the README. Reports
// lexical errors, arity mismatches and unknown predicate symbols with a
// 1-based line:column position.
FormulaPtr parse_formula(const std::string& text, const Signature& sig);
Term parse_term(const std::string& text, const Signature& sig);

std::set<std::string> free_vars(const FormulaPtr& f);
bool closed(const FormulaPtr& f);

// Substitutes the closed term t for every free occurrence of x. Open t is
// rejected; substitute_capture_checked below is the internal variant that
// accepts open terms when no free variable of t would be captured.
FormulaPtr substitute(const FormulaPtr& f, const std::string& x, const Term& t);
FormulaPtr substitute_capture_checked(const FormulaPtr& f, const std::string& x, const Term& t);

// True iff the closed term s occurs anywhere in f (inside any atom argument).
bool occurs(const FormulaPtr& f, const Term& s);

// Binds the free variables of f, innermost binder first in order of first
// occurrence in the printed form (so P(x,y) becomes forall y forall x P(x,y)).
FormulaPtr universal_closure(const FormulaPtr& f);

// Logical weight: atoms 0, bot 1, binaries sum+1, quantifiers body+1.
int weight(const FormulaPtr& f);

// The subformula set of a closed formula, with quantifier bodies instantiated
// over ct. Deterministic order (sorted by printed form).
std::vector<FormulaPtr> subformulae(const FormulaPtr& f, const std::vector<Term>& ct);

// ---------------------------------------------------------------------------
// Formula schemes and instantiation

class Scheme;
using SchemePtr = std::shared_ptr<const Scheme>;

// Schemes follow the grammar with formula-variables, connectives, quantifier
// nodes whose bound variable is a named slot, and explicit substitution nodes
// carrying (scheme, variable slot, term slot). Slots are resolved per
// instance; substitution nodes are kept unevaluated so that axiom-instance
// recognition can search for the witnessing term.
class Scheme {
public:
    enum class Kind { MetaVar, Falsum, And, Or, Implies, Forall, Exists, Subst };

    Kind kind;
    std::string name;     // MetaVar: X; Forall/Exists: variable slot
    SchemePtr lhs, rhs;   // binaries; quantifier/subst body in lhs
    std::string var_slot; // Subst
    std::string term_slot;// Subst

    static SchemePtr metavar(std::string n);
    static SchemePtr falsum();
    static SchemePtr conj(SchemePtr a, SchemePtr b);
    static SchemePtr disj(SchemePtr a, SchemePtr b);
    static SchemePtr impl(SchemePtr a, SchemePtr b);
    static SchemePtr neg(SchemePtr a);
    static SchemePtr forall(std::string slot, SchemePtr body);
    static SchemePtr exists(std::string slot, SchemePtr body);
    static SchemePtr subst(SchemePtr body, std::string var_slot, std::string term_slot);
};

std::set<std::string> scheme_metavars(const SchemePtr& s);

// A full instantiation: formulas for the scheme's formula-variables plus
// bindings for its variable and term slots.
struct Instantiation {
    std::map<std::string, FormulaPtr> formulas;
    std::map<std::string, std::string> vars;  // slot -> variable name
    std::map<std::string, Term> terms;        // slot -> term
};

// Applies iota to the scheme. Throws SyntaxError on a missing binding or a
// capturing substitution.
FormulaPtr instantiate_scheme(const SchemePtr& s, const Instantiation& iota);

}  // namespace bes

#endif
