#ifndef BES_ATOMIC_HPP
#define BES_ATOMIC_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bes/syntax.hpp"

namespace bes {

// An atom is a predicate applied to terms. Rules over closed atoms are the
// normal case; open atoms (with variables) appear only in OpenAtomicRule.
struct Atom {
    std::string pred;
    std::vector<Term> args;

    static Atom prop(std::string name) { return Atom{std::move(name), {}}; }
};

int cmp(const Atom& a, const Atom& b);
inline bool operator==(const Atom& a, const Atom& b) { return cmp(a, b) == 0; }
inline bool operator!=(const Atom& a, const Atom& b) { return cmp(a, b) != 0; }
inline bool operator<(const Atom& a, const Atom& b) { return cmp(a, b) < 0; }

bool atom_closed(const Atom& a);
std::set<std::string> atom_vars(const Atom& a);
std::string to_string(const Atom& a);
Atom parse_atom(const std::string& text, const Signature& sig);

using AtomSet = std::set<Atom>;

// One premise of a rule: a finite set of dischargeable hypotheses and the
// atom they must yield.
struct RulePremise {
    AtomSet hypotheses;
    Atom conclusion;
};

int cmp(const RulePremise& a, const RulePremise& b);
inline bool operator<(const RulePremise& a, const RulePremise& b) { return cmp(a, b) < 0; }
inline bool operator==(const RulePremise& a, const RulePremise& b) { return cmp(a, b) == 0; }

struct AtomicRule {
    std::vector<RulePremise> premises;  // kept sorted, duplicates removed
    Atom conclusion;

    static AtomicRule fact(Atom c) { return make({}, std::move(c)); }
    static AtomicRule make(std::vector<RulePremise> prems, Atom c);
};

int cmp(const AtomicRule& a, const AtomicRule& b);
inline bool operator<(const AtomicRule& a, const AtomicRule& b) { return cmp(a, b) < 0; }
inline bool operator==(const AtomicRule& a, const AtomicRule& b) { return cmp(a, b) == 0; }

enum class RuleLevel { Zero, First, Second };
RuleLevel level(const AtomicRule& r);
std::string to_string(RuleLevel l);
std::string to_string(const AtomicRule& r);

// All atoms of a rule must be closed for it to live in an AtomicSystem; an
// open rule is the same object with variables allowed.
using OpenAtomicRule = AtomicRule;

struct AtomicSystem {
    std::vector<AtomicRule> rules;  // sorted, deduplicated

    static AtomicSystem of(std::vector<AtomicRule> rs);
    bool contains(const AtomicRule& r) const;
    bool subset_of(const AtomicSystem& other) const;
    AtomicSystem union_with(const AtomicSystem& other) const;
    std::set<Atom> atoms() const;  // every atom mentioned anywhere
};

int cmp(const AtomicSystem& a, const AtomicSystem& b);
inline bool operator<(const AtomicSystem& a, const AtomicSystem& b) { return cmp(a, b) < 0; }
inline bool operator==(const AtomicSystem& a, const AtomicSystem& b) { return cmp(a, b) == 0; }

// Requires every atom closed.
void validate_closed(const AtomicSystem& s);

// ---------------------------------------------------------------------------
// Derivability

// A derivation tree for (context |- atom): either a context hit or a rule
// application whose subtrees prove each premise under the premise's
// hypotheses.
struct BaseDerivation {
    enum class Kind { Ref, App };
    Kind kind;
    AtomSet context;
    Atom atom;
    std::optional<AtomicRule> rule;           // App
    std::vector<BaseDerivation> subtrees;     // App, one per premise

    size_t node_count() const;
};

std::string to_string(const BaseDerivation& d, int indent = 0);

// Structural re-validation, independent of the search in derives().
bool validate_derivation(const BaseDerivation& d, const AtomicSystem& s);

// Reusable decision engine for one atomic system. Judgments established once
// persist across queries, as do failures confirmed by a stable search pass.
// The budget caps the number of judgment visits; exceeding it raises a
// SyntaxError so exhaustion is never reported as a definitive no.
class DerivabilityEngine {
public:
    explicit DerivabilityEngine(AtomicSystem s, size_t budget = 8000000);
    ~DerivabilityEngine();
    DerivabilityEngine(DerivabilityEngine&&) noexcept;
    DerivabilityEngine& operator=(DerivabilityEngine&&) noexcept;

    std::optional<BaseDerivation> query(const AtomSet& context, const Atom& goal);
    const AtomicSystem& system() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around DerivabilityEngine.
std::optional<BaseDerivation> derives(const AtomicSystem& s, const AtomSet& context,
                                      const Atom& goal, size_t budget = 8000000);

// All instances of the open rules under substitutions of their free variables
// by members of ct.
AtomicSystem close_open_system(const std::vector<OpenAtomicRule>& open_rules,
                               const std::vector<Term>& ct);

// Checks, for one instance, that open derivability of goal coincides with
// closed derivability of some ct-instance of goal in the closure.
struct OpenCorrespondenceReport {
    bool open_derivable = false;
    bool closed_derivable = false;
    std::map<std::string, Term> witness;  // instantiation of goal's variables
    bool agree() const { return open_derivable == closed_derivable; }
    std::string to_text() const;
};
OpenCorrespondenceReport open_correspondence_check(const std::vector<OpenAtomicRule>& open_rules,
                                                   const Atom& goal,
                                                   const std::vector<Term>& ct);

// ---------------------------------------------------------------------------
// Base file format

// One rule per line:
//   zero level:    => P(c)
//   first level:   P(c), Q(d) => R(c)
//   second level:  { [p, q] => r ; [] => s } => t
AtomicSystem parse_base(const std::string& text, const Signature& sig);
std::string base_to_string(const AtomicSystem& s);
AtomicRule parse_rule(const std::string& line, const Signature& sig);

}  // namespace bes

#endif
