#include "bes/hilbert.hpp"

#include <algorithm>
#include <sstream>

namespace bes {

std::string to_string(SystemId sys) { return sys == SystemId::C ? "C" : "I"; }

std::string to_string(SchemeId id) {
    switch (id) {
        case SchemeId::K: return "K";
        case SchemeId::S: return "S";
        case SchemeId::ForallE: return "forallE";
        case SchemeId::AndI: return "andI";
        case SchemeId::AndE1: return "andE1";
        case SchemeId::AndE2: return "andE2";
        case SchemeId::OrI1: return "orI1";
        case SchemeId::OrI2: return "orI2";
        case SchemeId::OrE: return "orE";
        case SchemeId::ExistsI: return "existsI";
        case SchemeId::NegI: return "negI";
        case SchemeId::EFQ: return "EFQ";
        case SchemeId::DNE: return "DNE";
    }
    return "?";
}

std::optional<SchemeId> scheme_id_from_string(const std::string& name) {
    static const std::vector<SchemeId> all = {
        SchemeId::K,    SchemeId::S,    SchemeId::ForallE, SchemeId::AndI, SchemeId::AndE1,
        SchemeId::AndE2, SchemeId::OrI1, SchemeId::OrI2,    SchemeId::OrE,  SchemeId::ExistsI,
        SchemeId::NegI, SchemeId::EFQ,  SchemeId::DNE};
    for (SchemeId id : all)
        if (to_string(id) == name) return id;
    return std::nullopt;
}

const SchemePtr& scheme_of(SchemeId id) {
    using S = Scheme;
    static const SchemePtr X = S::metavar("X");
    static const SchemePtr Y = S::metavar("Y");
    static const SchemePtr Z = S::metavar("Z");
    static const std::vector<SchemePtr> table = [] {
        std::vector<SchemePtr> t(13);
        t[(int)SchemeId::K] = S::impl(X, S::impl(Y, X));
        t[(int)SchemeId::S] =
            S::impl(S::impl(X, S::impl(Y, Z)), S::impl(S::impl(X, Y), S::impl(X, Z)));
        t[(int)SchemeId::ForallE] = S::impl(S::forall("x", X), S::subst(X, "x", "t"));
        t[(int)SchemeId::AndI] = S::impl(X, S::impl(Y, S::conj(X, Y)));
        t[(int)SchemeId::AndE1] = S::impl(S::conj(X, Y), X);
        t[(int)SchemeId::AndE2] = S::impl(S::conj(X, Y), Y);
        t[(int)SchemeId::OrI1] = S::impl(X, S::disj(X, Y));
        t[(int)SchemeId::OrI2] = S::impl(Y, S::disj(X, Y));
        t[(int)SchemeId::OrE] =
            S::impl(S::impl(X, Z), S::impl(S::impl(Y, Z), S::impl(S::disj(X, Y), Z)));
        t[(int)SchemeId::ExistsI] = S::impl(S::subst(X, "x", "t"), S::exists("x", X));
        t[(int)SchemeId::NegI] =
            S::impl(S::impl(X, Y), S::impl(S::impl(X, S::neg(Y)), S::neg(X)));
        t[(int)SchemeId::EFQ] = S::impl(S::impl(X, S::falsum()), S::impl(X, Y));
        t[(int)SchemeId::DNE] = S::impl(S::neg(S::neg(X)), X);
        return t;
    }();
    return table[(int)id];
}

const std::vector<SchemeId>& schemes_of(SystemId sys) {
    static const std::vector<SchemeId> c = {
        SchemeId::K,    SchemeId::S,    SchemeId::ForallE, SchemeId::AndI, SchemeId::AndE1,
        SchemeId::AndE2, SchemeId::OrI1, SchemeId::OrI2,    SchemeId::OrE,  SchemeId::ExistsI,
        SchemeId::NegI, SchemeId::EFQ,  SchemeId::DNE};
    static const std::vector<SchemeId> i = [] {
        std::vector<SchemeId> v = c;
        v.pop_back();
        return v;
    }();
    return sys == SystemId::C ? c : i;
}

bool scheme_in_system(SchemeId id, SystemId sys) {
    const auto& v = schemes_of(sys);
    return std::find(v.begin(), v.end(), id) != v.end();
}

bool HilbertProof::in_context(const FormulaPtr& f) const {
    for (const auto& g : context)
        if (equal(f, g)) return true;
    return false;
}

std::string CheckResult::summary() const {
    if (ok) return "accepted";
    std::string s = "rejected:";
    for (const auto& d : diagnostics)
        s += "\n  line " + std::to_string(d.index) + ": " + d.message;
    return s;
}

// ---------------------------------------------------------------------------
// Axiom-instance matching

namespace {

struct MatchState {
    std::map<std::string, FormulaPtr> formulas;
    std::map<std::string, std::string> vars;
    // Substitution constraints postponed until the rest of the scheme has
    // resolved the base metavariable and the variable slot.
    struct Pending {
        SchemePtr node;
        FormulaPtr target;
    };
    std::vector<Pending> pending;
};

bool match_rec(const SchemePtr& s, const FormulaPtr& f, MatchState& st) {
    switch (s->kind) {
        case Scheme::Kind::MetaVar: {
            auto it = st.formulas.find(s->name);
            if (it != st.formulas.end()) return equal(it->second, f);
            st.formulas[s->name] = f;
            return true;
        }
        case Scheme::Kind::Falsum:
            return f->kind == Formula::Kind::Falsum;
        case Scheme::Kind::And:
            return f->kind == Formula::Kind::And && match_rec(s->lhs, f->lhs, st) &&
                   match_rec(s->rhs, f->rhs, st);
        case Scheme::Kind::Or:
            return f->kind == Formula::Kind::Or && match_rec(s->lhs, f->lhs, st) &&
                   match_rec(s->rhs, f->rhs, st);
        case Scheme::Kind::Implies:
            return f->kind == Formula::Kind::Implies && match_rec(s->lhs, f->lhs, st) &&
                   match_rec(s->rhs, f->rhs, st);
        case Scheme::Kind::Forall:
        case Scheme::Kind::Exists: {
            Formula::Kind want = s->kind == Scheme::Kind::Forall ? Formula::Kind::Forall
                                                                 : Formula::Kind::Exists;
            if (f->kind != want) return false;
            auto it = st.vars.find(s->name);
            if (it != st.vars.end()) {
                if (it->second != f->name) return false;
            } else {
                st.vars[s->name] = f->name;
            }
            return match_rec(s->lhs, f->lhs, st);
        }
        case Scheme::Kind::Subst:
            st.pending.push_back({s, f});
            return true;
    }
    return false;
}

// Walks base and target in lockstep; wherever base has a free occurrence of x
// the corresponding target subterm is recorded as the witness. All recorded
// positions must agree.
bool extract_term(const Term& base, const Term& target, const std::string& x,
                  std::optional<Term>& witness) {
    if (base.is_var && base.name == x) {
        if (witness && !(*witness == target)) return false;
        witness = target;
        return true;
    }
    if (base.is_var != target.is_var || base.name != target.name ||
        base.args.size() != target.args.size())
        return false;
    for (size_t i = 0; i < base.args.size(); ++i)
        if (!extract_term(base.args[i], target.args[i], x, witness)) return false;
    return true;
}

bool extract_witness(const FormulaPtr& base, const FormulaPtr& target, const std::string& x,
                     std::optional<Term>& witness) {
    if (base->kind != target->kind) return false;
    switch (base->kind) {
        case Formula::Kind::Atom: {
            if (base->name != target->name || base->args.size() != target->args.size())
                return false;
            for (size_t i = 0; i < base->args.size(); ++i)
                if (!extract_term(base->args[i], target->args[i], x, witness)) return false;
            return true;
        }
        case Formula::Kind::Falsum:
            return true;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            return extract_witness(base->lhs, target->lhs, x, witness) &&
                   extract_witness(base->rhs, target->rhs, x, witness);
        case Formula::Kind::Forall:
        case Formula::Kind::Exists: {
            if (base->name != target->name) return false;
            if (base->name == x) return cmp(base->lhs, target->lhs) == 0;  // x bound below
            return extract_witness(base->lhs, target->lhs, x, witness);
        }
    }
    return false;
}

void closed_subterms_of(const Term& t, std::vector<Term>& out) {
    if (term_closed(t)) out.push_back(t);
    for (const auto& a : t.args) closed_subterms_of(a, out);
}

void closed_subterms_of(const FormulaPtr& f, std::vector<Term>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            for (const auto& a : f->args) closed_subterms_of(a, out);
            return;
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            closed_subterms_of(f->lhs, out);
            closed_subterms_of(f->rhs, out);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            closed_subterms_of(f->lhs, out);
            return;
    }
}

}  // namespace

std::optional<AxiomMatch> match_scheme(const FormulaPtr& phi, SchemeId id,
                                       const std::vector<Term>& ct) {
    MatchState st;
    if (!match_rec(scheme_of(id), phi, st)) return std::nullopt;

    Instantiation iota;
    iota.formulas = st.formulas;
    iota.vars = st.vars;

    for (const auto& p : st.pending) {
        Instantiation base_iota = iota;
        FormulaPtr base;
        try {
            base = instantiate_scheme(p.node->lhs, base_iota);
        } catch (const SyntaxError&) {
            return std::nullopt;  // base metavariable unresolved elsewhere
        }
        auto vit = iota.vars.find(p.node->var_slot);
        if (vit == iota.vars.end()) return std::nullopt;
        const std::string& x = vit->second;

        std::optional<Term> witness;
        if (!extract_witness(base, p.target, x, witness)) return std::nullopt;
        if (!witness) {
            // x not free in the base: any witness works, prefer ct then the
            // closed subterms of phi, deterministically.
            std::vector<Term> cands = ct;
            closed_subterms_of(phi, cands);
            if (cands.empty()) return std::nullopt;
            witness = cands.front();
        }
        auto tit = iota.terms.find(p.node->term_slot);
        if (tit != iota.terms.end()) {
            if (!(tit->second == *witness)) return std::nullopt;
        } else {
            iota.terms[p.node->term_slot] = *witness;
        }
    }

    // Verify by re-instantiation; a capturing substitution fails the match.
    try {
        if (!equal(instantiate_scheme(scheme_of(id), iota), phi)) return std::nullopt;
    } catch (const SyntaxError&) {
        return std::nullopt;
    }
    return AxiomMatch{id, std::move(iota)};
}

std::optional<AxiomMatch> is_axiom_instance(const FormulaPtr& phi, SystemId sys,
                                            const std::vector<Term>& ct) {
    for (SchemeId id : schemes_of(sys))
        if (auto m = match_scheme(phi, id, ct)) return m;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Proof checking

CheckResult check_proof(const HilbertProof& pf, SystemId sys) {
    CheckResult res;
    auto bad = [&](size_t idx, const std::string& msg) {
        res.ok = false;
        res.diagnostics.push_back({idx, msg});
    };

    std::map<size_t, const ProofLine*> by_index;
    size_t prev = 0;
    for (const auto& line : pf.lines) {
        if (line.index <= prev) {
            bad(line.index, "line indices must be strictly increasing");
            continue;
        }
        prev = line.index;
        if (!line.formula) {
            bad(line.index, "line has no formula");
            continue;
        }

        auto earlier = [&](size_t ref) -> const ProofLine* {
            auto it = by_index.find(ref);
            return it == by_index.end() ? nullptr : it->second;
        };

        switch (line.just.kind) {
            case Justification::Kind::Axiom: {
                if (!scheme_in_system(line.just.scheme, sys)) {
                    bad(line.index, "scheme " + to_string(line.just.scheme) +
                                        " is not an axiom of system " + to_string(sys));
                    break;
                }
                try {
                    FormulaPtr inst = instantiate_scheme(scheme_of(line.just.scheme), line.just.inst);
                    if (!equal(inst, line.formula))
                        bad(line.index, "formula is not the stated instance of scheme " +
                                            to_string(line.just.scheme) + " (instance is " +
                                            to_string(inst) + ")");
                } catch (const SyntaxError& e) {
                    bad(line.index, std::string("axiom instantiation failed: ") + e.what());
                }
                break;
            }
            case Justification::Kind::Hypothesis: {
                if (!pf.in_context(line.formula))
                    bad(line.index, "hypothesis '" + to_string(line.formula) +
                                        "' is not in the context");
                break;
            }
            case Justification::Kind::ModusPonens: {
                const ProofLine* a = earlier(line.just.from);
                const ProofLine* b = earlier(line.just.from_impl);
                if (!a || !b) {
                    bad(line.index, "modus ponens references a missing or later line");
                    break;
                }
                if (b->formula->kind != Formula::Kind::Implies) {
                    bad(line.index, "line " + std::to_string(b->index) +
                                        " is not an implication");
                    break;
                }
                if (!equal(b->formula->lhs, a->formula))
                    bad(line.index, "implication antecedent does not match line " +
                                        std::to_string(a->index));
                else if (!equal(b->formula->rhs, line.formula))
                    bad(line.index, "formula is not the consequent of line " +
                                        std::to_string(b->index));
                break;
            }
            case Justification::Kind::Generalization: {
                const ProofLine* a = earlier(line.just.from);
                if (!a) {
                    bad(line.index, "generalization references a missing or later line");
                    break;
                }
                const std::string& x = line.just.var;
                if (a->formula->kind != Formula::Kind::Implies) {
                    bad(line.index, "generalization premise must be an implication");
                    break;
                }
                if (line.formula->kind != Formula::Kind::Implies ||
                    line.formula->rhs->kind != Formula::Kind::Forall ||
                    line.formula->rhs->name != x) {
                    bad(line.index, "conclusion must have shape psi -> forall " + x + " phi");
                    break;
                }
                if (!equal(line.formula->lhs, a->formula->lhs)) {
                    bad(line.index, "antecedent differs from premise antecedent");
                    break;
                }
                if (!equal(line.formula->rhs->lhs, a->formula->rhs)) {
                    bad(line.index, "quantified body differs from premise consequent");
                    break;
                }
                if (free_vars(a->formula->lhs).count(x))
                    bad(line.index, "variable '" + x + "' is free in the antecedent");
                break;
            }
            case Justification::Kind::ExistentialInstantiation: {
                const ProofLine* a = earlier(line.just.from);
                if (!a) {
                    bad(line.index, "existential instantiation references a missing or later line");
                    break;
                }
                const std::string& x = line.just.var;
                if (a->formula->kind != Formula::Kind::Implies) {
                    bad(line.index, "existential instantiation premise must be an implication");
                    break;
                }
                if (line.formula->kind != Formula::Kind::Implies ||
                    line.formula->lhs->kind != Formula::Kind::Exists ||
                    line.formula->lhs->name != x) {
                    bad(line.index, "conclusion must have shape exists " + x + " phi -> psi");
                    break;
                }
                if (!equal(line.formula->lhs->lhs, a->formula->lhs)) {
                    bad(line.index, "existential body differs from premise antecedent");
                    break;
                }
                if (!equal(line.formula->rhs, a->formula->rhs)) {
                    bad(line.index, "consequent differs from premise consequent");
                    break;
                }
                if (free_vars(a->formula->rhs).count(x))
                    bad(line.index, "variable '" + x + "' is free in the consequent");
                break;
            }
        }
        by_index[line.index] = &line;
    }
    if (pf.lines.empty()) bad(0, "proof has no lines");
    return res;
}

}  // namespace bes
