#ifndef BES_SIMULATION_HPP
#define BES_SIMULATION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bes/atomic.hpp"
#include "bes/hilbert.hpp"
#include "bes/support.hpp"
#include "bes/syntax.hpp"

namespace bes {

enum class Variant { K, J };
std::string to_string(Variant v);
SystemId system_of(Variant v);

// The flattening map for a sequent Gamma |> goal. Its domain is the
// subformula set Xi extended with the axiom-shaped composites the simulation
// rules range over (the injection itself is what matters; how far it reaches
// is a generation parameter). Eigenvariables are fresh constants standing in
// for the variables of the sequent, so open formulas are flattened through
// their eigenvariable instances.
class FlatMap {
public:
    // The subformula set of Gamma and goal proper.
    const std::vector<FormulaPtr>& xi() const { return xi_; }
    // The full flat domain (sorted by printed form; flat_k names follow it).
    const std::vector<FormulaPtr>& domain() const { return domain_; }
    const Signature& extended_signature() const { return sig_ext_; }
    const std::vector<Term>& closed_term_universe() const { return ct_; }
    const std::map<std::string, std::string>& eigenvariables() const { return alpha_; }

    bool has_flat(const FormulaPtr& f) const;
    // The flat atom of f; open formulas go through their eigenvariable
    // closure. Throws SyntaxError when f is outside the domain.
    Atom flat(const FormulaPtr& f) const;
    bool is_flat_atom(const Atom& a) const;

    // Decoders. Off-image atoms decode to themselves (as atomic formulas).
    FormulaPtr sharp_l(const Atom& a) const;
    FormulaPtr sharp_r(const Atom& a) const;

    // Replaces every eigenvariable constant by its variable.
    FormulaPtr decode_eigen(const FormulaPtr& f) const;
    // phi-bar: free variables replaced by their eigenvariable constants.
    FormulaPtr eigen_instance(const FormulaPtr& f) const;
    bool mentions_eigenvariable(const FormulaPtr& f) const;

    // Atom universe for the P-slot rules: flats of the core domain plus the
    // source atoms of the sequent.
    const std::vector<Atom>& p_slot_universe() const { return p_universe_; }

    friend FlatMap make_flat_map(const std::vector<FormulaPtr>& context, const FormulaPtr& goal,
                                 const Signature& sig, const std::vector<FormulaPtr>& extra_domain);

private:
    std::vector<FormulaPtr> xi_;
    std::vector<FormulaPtr> domain_;
    std::map<std::string, Atom> flat_by_print_;
    std::map<Atom, FormulaPtr> preimage_;
    std::map<std::string, std::string> alpha_;      // variable -> eigen constant
    std::map<std::string, std::string> alpha_inv_;  // eigen constant -> variable
    Signature sig_ext_;
    std::vector<Term> ct_;
    std::vector<Atom> p_universe_;
};

// Builds the flat map for the sequent. extra_domain formulas (closed) are
// grafted into the domain before closure; the deduction-support enrichment
// uses this hook.
FlatMap make_flat_map(const std::vector<FormulaPtr>& context, const FormulaPtr& goal,
                      const Signature& sig, const std::vector<FormulaPtr>& extra_domain = {});

struct NaturalBaseOptions {
    // Conjunction rules in the classical base (off by default; the classical
    // fragment is bot/implication/forall unless this is set).
    bool and_in_k = false;
};

struct NaturalBase {
    Variant variant;
    AtomicSystem system;
    std::map<std::string, size_t> schema_counts;

    std::string stats() const;
};

NaturalBase build_natural_base(const FlatMap& fm, Variant variant,
                               const NaturalBaseOptions& opts = {});

// Axiom schemes whose flats are generated for the variant.
const std::vector<SchemeId>& enabled_schemes(Variant v, const NaturalBaseOptions& opts);

// ---------------------------------------------------------------------------
// Simulation and extraction

struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Maps a checking Hilbert proof line-by-line onto the natural base: axiom
// lines to zero-level flats, modus ponens to the mp rule, generalization to
// the gen rule. Every line formula must lie in the flat domain.
BaseDerivation simulate_hilbert(const HilbertProof& pf, const FlatMap& fm, const NaturalBase& nb);

// Compiles a validated base derivation back into a Hilbert proof of
// sharp_l(context) |- sharp_r(conclusion) in C (variant K) or I (variant J).
HilbertProof extract_hilbert(const BaseDerivation& d, const FlatMap& fm, Variant variant);

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineOptions {
    Variant variant = Variant::K;
    NaturalBaseOptions base;
    // Deduction-support enrichment rounds used by the clause-check harness;
    // 0 leaves the base exactly as generated.
    int enrich_rounds = 0;
};

struct PipelineResult {
    bool ok = false;
    std::string failure;  // non-empty when !ok
    FlatMap fm;
    NaturalBase nb;
    std::optional<BaseDerivation> derivation;
    std::optional<HilbertProof> extracted;
    CheckResult verdict;
    std::string transcript;
};

// Runs flatten -> (simulate | search) -> extract -> check. With a source
// proof the derivation is its simulation; without one the finite base is
// searched for a derivation of the flat goal from the flat context.
PipelineResult completeness_pipeline(const std::vector<FormulaPtr>& context,
                                     const FormulaPtr& goal, const Signature& sig,
                                     const PipelineOptions& opts,
                                     const HilbertProof* source = nullptr);

// True if the formula stays inside the classical-variant fragment.
bool in_classical_fragment(const FormulaPtr& f, bool allow_and);

// ---------------------------------------------------------------------------
// Clause-check harness (used by the props command and the acceptance suite)

struct ClauseCheckResult {
    size_t samples_and = 0, fail_and = 0;
    size_t samples_imp = 0, fail_imp = 0;
    size_t samples_all = 0, fail_all = 0;
    bool ok() const { return fail_and == 0 && fail_imp == 0 && fail_all == 0; }
    std::string to_text() const;
};

// Checks the derivability biconditionals for conjunction, implication and
// universal flats over the generated base:
//   |- *(a & b)   iff  |- *a and |- *b
//   |- *(a -> b)  iff  *a |- *b
//   |- *(all x a) iff  |- *(a[x:=t]) for every t
// Implication instances whose right-hand side holds get the deduction-support
// enrichment before the final verdict.
ClauseCheckResult check_flat_clauses(const std::vector<FormulaPtr>& context,
                                     const FormulaPtr& goal, const Signature& sig, Variant variant,
                                     int max_samples_per_clause, int enrich_rounds);

// Grows the flat domain with the line formulas of deduction-elaborated
// extractions for every anchor implication whose flat hypothesis derives its
// flat conclusion, so the implication flat itself becomes derivable. Returns
// the rebuilt pair.
struct EnrichResult {
    FlatMap fm;
    NaturalBase nb;
    int rounds_used = 0;
};
EnrichResult enrich_for_implications(const std::vector<FormulaPtr>& context,
                                     const FormulaPtr& goal, const Signature& sig, Variant variant,
                                     const NaturalBaseOptions& opts,
                                     const std::vector<FormulaPtr>& anchors, int max_rounds);

}  // namespace bes

#endif
