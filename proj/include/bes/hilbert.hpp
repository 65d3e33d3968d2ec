#ifndef BES_HILBERT_HPP
#define BES_HILBERT_HPP

#include <optional>
#include <string>
#include <vector>

#include "bes/syntax.hpp"

namespace bes {

// The two Hilbert-Frege systems: C admits every axiom scheme, I everything
// except double-negation elimination.
enum class SystemId { C, I };

std::string to_string(SystemId sys);

enum class SchemeId {
    K,
    S,
    ForallE,
    AndI,
    AndE1,
    AndE2,
    OrI1,
    OrI2,
    OrE,
    ExistsI,
    NegI,
    EFQ,
    DNE,
};

std::string to_string(SchemeId id);
std::optional<SchemeId> scheme_id_from_string(const std::string& name);
const SchemePtr& scheme_of(SchemeId id);
// Scheme ids admitted by the system, in matching order.
const std::vector<SchemeId>& schemes_of(SystemId sys);
bool scheme_in_system(SchemeId id, SystemId sys);

// ---------------------------------------------------------------------------
// Proof objects

struct Justification {
    enum class Kind { Axiom, Hypothesis, ModusPonens, Generalization, ExistentialInstantiation };

    Kind kind;
    // Axiom
    SchemeId scheme = SchemeId::K;
    Instantiation inst;
    // ModusPonens: from = line proving phi, from_impl = line proving phi -> psi.
    // Generalization / ExistentialInstantiation: from = premise line, var = x.
    size_t from = 0, from_impl = 0;
    std::string var;

    static Justification axiom(SchemeId id, Instantiation iota) {
        Justification j;
        j.kind = Kind::Axiom;
        j.scheme = id;
        j.inst = std::move(iota);
        return j;
    }
    static Justification hyp() {
        Justification j;
        j.kind = Kind::Hypothesis;
        return j;
    }
    static Justification mp(size_t i, size_t j_) {
        Justification j;
        j.kind = Kind::ModusPonens;
        j.from = i;
        j.from_impl = j_;
        return j;
    }
    static Justification gen(size_t i, std::string x) {
        Justification j;
        j.kind = Kind::Generalization;
        j.from = i;
        j.var = std::move(x);
        return j;
    }
    static Justification exi(size_t i, std::string x) {
        Justification j;
        j.kind = Kind::ExistentialInstantiation;
        j.from = i;
        j.var = std::move(x);
        return j;
    }
};

struct ProofLine {
    size_t index = 0;  // 1-based, strictly increasing
    FormulaPtr formula;
    Justification just;
};

struct HilbertProof {
    std::vector<FormulaPtr> context;  // Gamma, set semantics
    std::vector<ProofLine> lines;

    FormulaPtr conclusion() const { return lines.empty() ? nullptr : lines.back().formula; }
    bool in_context(const FormulaPtr& f) const;
};

struct LineDiagnostic {
    size_t index;
    std::string message;
};

struct CheckResult {
    bool ok = true;
    std::vector<LineDiagnostic> diagnostics;
    std::string summary() const;
};

// ---------------------------------------------------------------------------
// Operations

// Searches the system's schemes for one whose instance is phi. Witness terms
// for substitution nodes are recovered positionally and verified by
// re-instantiation; ct supplies candidates when the substitution is vacuous.
struct AxiomMatch {
    SchemeId scheme;
    Instantiation inst;
};
std::optional<AxiomMatch> is_axiom_instance(const FormulaPtr& phi, SystemId sys,
                                            const std::vector<Term>& ct);
// Restricted to a single scheme.
std::optional<AxiomMatch> match_scheme(const FormulaPtr& phi, SchemeId id,
                                       const std::vector<Term>& ct);

// Checks every line against the consequence relation's clauses. Never throws
// on a rule violation; each violated clause yields a line-indexed diagnostic.
CheckResult check_proof(const HilbertProof& pf, SystemId sys);

struct ElaborationError : std::runtime_error {
    explicit ElaborationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deduction theorem: from a checking proof of Gamma, hyp |- psi produces a
// checking proof of Gamma \ {hyp} |- hyp -> psi. Generalization and
// existential-instantiation lines require var not free in hyp; violations are
// rejected with a diagnostic rather than mis-elaborated.
HilbertProof deduction_elaborate(const HilbertProof& pf, const FormulaPtr& hyp, SystemId sys);

// From Gamma |- phi | psi, phi, Gamma |- chi and psi, Gamma |- chi, builds
// Gamma |- chi using the disjunction-elimination scheme.
HilbertProof derive_or_elim(const HilbertProof& pf_or, const HilbertProof& pf_left,
                            const HilbertProof& pf_right, SystemId sys);

// From Gamma |- bot builds Gamma |- phi.
HilbertProof derive_efq(const HilbertProof& pf_bot, const FormulaPtr& phi, SystemId sys);

// From Gamma |- exists x phi and phi[x:=t], Gamma |- chi, where the closed
// term t occurs nowhere in Gamma, phi or chi, builds Gamma |- chi. The
// elaboration re-abstracts t to a fresh variable before applying the
// existential-instantiation rule.
HilbertProof derive_exists_elim(const HilbertProof& pf_ex, const HilbertProof& pf_body,
                                const FormulaPtr& phi, const std::string& x, const Term& t,
                                SystemId sys);

// ---------------------------------------------------------------------------
// Proof text format

std::string proof_to_string(const HilbertProof& pf, SystemId sys);
// Parses the proof file format; axiom justifications may omit bindings, in
// which case they are recovered by scheme matching over ct.
struct ParsedProof {
    SystemId system;
    HilbertProof proof;
};
ParsedProof parse_proof(const std::string& text, const Signature& sig);

}  // namespace bes

#endif
