#ifndef BES_SUPPORT_HPP
#define BES_SUPPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "bes/atomic.hpp"
#include "bes/syntax.hpp"

namespace bes {

// A finite set of atomic systems together with the closed-atom universe the
// bot/or/exists clauses quantify over and the closed-term universe for the
// quantifier clauses.
class Basis {
public:
    Basis(std::vector<AtomicSystem> bases, std::vector<Atom> universe, std::vector<Term> ct);

    const std::vector<AtomicSystem>& bases() const { return bases_; }
    const std::vector<Atom>& universe() const { return universe_; }
    const std::vector<Term>& closed_term_universe() const { return ct_; }

    // Index of a member; throws SyntaxError if absent.
    size_t index_of(const AtomicSystem& b) const;
    // Indices of every member extending the given one (reflexive).
    const std::vector<size_t>& extensions_of(size_t base_index) const;

    // Set-level closure properties, verified on construction.
    bool zero_level_complete() const { return zero_level_complete_; }
    bool union_closed() const { return union_closed_; }

private:
    std::vector<AtomicSystem> bases_;
    std::vector<Atom> universe_;
    std::vector<Term> ct_;
    std::vector<std::vector<size_t>> ext_;
    bool zero_level_complete_ = false;
    bool union_closed_ = false;
};

// Convenience constructions used by the harnesses and the basis file format.
Basis powerset_basis(const AtomicSystem& pool, std::vector<Atom> universe, std::vector<Term> ct);
// Closes the given seed systems under adding zero-level facts for the listed
// atoms (this makes the basis zero-level complete over them).
Basis zero_complete_basis(std::vector<AtomicSystem> seeds, std::vector<Atom> universe,
                          std::vector<Term> ct);

// All members C >= B, as systems.
std::vector<AtomicSystem> extensions(const Basis& basis, const AtomicSystem& base);

// Evaluates the support clauses exactly over the finite basis. Results for
// contextless judgments are memoized per evaluator instance.
class SupportEvaluator {
public:
    explicit SupportEvaluator(const Basis& basis) : basis_(basis) {}

    // |-_B phi (contextless). Open formulas are closed universally first.
    bool supports(size_t base_index, const FormulaPtr& goal);
    // Gamma |-_B phi.
    bool supports(size_t base_index, const std::vector<FormulaPtr>& context,
                  const FormulaPtr& goal);
    // Gamma |- phi: the judgment at every member of the basis.
    bool supports_valid(const std::vector<FormulaPtr>& context, const FormulaPtr& goal);

    const Basis& basis() const { return basis_; }

private:
    bool atom_supported(size_t base_index, const Atom& a);

    const Basis& basis_;
    std::map<std::pair<size_t, std::string>, bool> memo_;
    std::map<size_t, DerivabilityEngine> engines_;
};

struct SupportQuery {
    const Basis* basis;
    size_t base_index;
    std::vector<FormulaPtr> context;
    FormulaPtr goal;
};

bool supports(const SupportQuery& q);

// ---------------------------------------------------------------------------
// Harnesses

struct MonotonicityViolation {
    size_t base_index, ext_index;
    FormulaPtr formula;
};

struct MonotonicityReport {
    size_t checked = 0;
    std::vector<MonotonicityViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_text() const;
};

MonotonicityReport check_monotonicity(const Basis& basis, const std::vector<FormulaPtr>& sample);

struct AtomicCutInstance {
    size_t base_index;
    bool lhs, rhs;
};

struct AtomicCutReport {
    size_t checked = 0;
    std::vector<AtomicCutInstance> mismatches;
    bool ok() const { return mismatches.empty(); }
    std::string to_text() const;
};

// Prop-style biconditional: Q, P |-_B P0  iff  every extension X >= B where
// all of Q is derivable has P |-_X P0. Requires a zero-level-complete basis.
AtomicCutReport check_atomic_cut(const Basis& basis, const AtomSet& q_atoms, const AtomSet& p_atoms,
                                 const Atom& goal);

// AtComp harness: P |-_B p (support, via Inf) iff P |-_B p (derivability).
struct AtCompReport {
    size_t checked = 0;
    size_t mismatches = 0;
    bool ok() const { return mismatches == 0; }
};
AtCompReport check_atomic_completeness(const Basis& basis, const AtomSet& context,
                                       const Atom& goal);

// ---------------------------------------------------------------------------
// Basis file format

// Directives: `universe p, q`, `base <path>`, `pool <path>`,
// `powerset-of-pool`, `zero-complete over p, q`, `union-closed`. Paths are
// resolved relative to the basis file.
Basis parse_basis_file(const std::string& path, const Signature& sig);

}  // namespace bes

#endif
