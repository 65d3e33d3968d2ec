#include <algorithm>

#include "bes/hilbert.hpp"

namespace bes {

namespace {

// Accumulates lines with automatic indexing. Axiom helpers build the line
// formula by instantiation so the emitted justification is always exact.
class ProofBuilder {
public:
    explicit ProofBuilder(std::vector<FormulaPtr> context) { pf_.context = std::move(context); }

    size_t add(FormulaPtr f, Justification j) {
        pf_.lines.push_back({pf_.lines.size() + 1, std::move(f), std::move(j)});
        return pf_.lines.size();
    }

    size_t axiom(SchemeId id, Instantiation iota) {
        FormulaPtr f = instantiate_scheme(scheme_of(id), iota);
        return add(f, Justification::axiom(id, std::move(iota)));
    }

    size_t axiom2(SchemeId id, FormulaPtr x, FormulaPtr y) {
        Instantiation iota;
        iota.formulas["X"] = std::move(x);
        iota.formulas["Y"] = std::move(y);
        return axiom(id, std::move(iota));
    }

    size_t axiom3(SchemeId id, FormulaPtr x, FormulaPtr y, FormulaPtr z) {
        Instantiation iota;
        iota.formulas["X"] = std::move(x);
        iota.formulas["Y"] = std::move(y);
        iota.formulas["Z"] = std::move(z);
        return axiom(id, std::move(iota));
    }

    size_t hyp(FormulaPtr f) { return add(std::move(f), Justification::hyp()); }

    size_t mp(size_t i, size_t j) {
        FormulaPtr impl = formula(j);  // copy: adding lines may reallocate
        if (impl->kind != Formula::Kind::Implies || !equal(impl->lhs, formula(i)))
            throw ElaborationError("internal: bad modus ponens composition");
        return add(impl->rhs, Justification::mp(i, j));
    }

    size_t gen(size_t i, const std::string& x) {
        FormulaPtr prem = formula(i);
        if (prem->kind != Formula::Kind::Implies)
            throw ElaborationError("internal: generalization premise not an implication");
        return add(Formula::impl(prem->lhs, Formula::forall(x, prem->rhs)),
                   Justification::gen(i, x));
    }

    size_t exi(size_t i, const std::string& x) {
        FormulaPtr prem = formula(i);
        if (prem->kind != Formula::Kind::Implies)
            throw ElaborationError("internal: existential instantiation premise not an implication");
        return add(Formula::impl(Formula::exists(x, prem->lhs), prem->rhs),
                   Justification::exi(i, x));
    }

    const FormulaPtr& formula(size_t index) const { return pf_.lines.at(index - 1).formula; }

    // Appends all lines of other (its context must already be covered by
    // ours); returns the re-mapped index of its last line.
    size_t import(const HilbertProof& other) {
        std::map<size_t, size_t> remap;
        size_t last = 0;
        for (const auto& line : other.lines) {
            Justification j = line.just;
            switch (j.kind) {
                case Justification::Kind::ModusPonens:
                    j.from = remap.at(j.from);
                    j.from_impl = remap.at(j.from_impl);
                    break;
                case Justification::Kind::Generalization:
                case Justification::Kind::ExistentialInstantiation:
                    j.from = remap.at(j.from);
                    break;
                default:
                    break;
            }
            last = add(line.formula, std::move(j));
            remap[line.index] = last;
        }
        return last;
    }

    // --- derived one-liners used across the elaborators ---

    // chi (at line i) weakened to phi -> chi.
    size_t weaken(size_t i, const FormulaPtr& phi) {
        FormulaPtr chi = formula(i);
        size_t k = axiom2(SchemeId::K, chi, phi);
        return mp(i, k);
    }

    // |- phi -> phi.
    size_t identity(const FormulaPtr& phi) {
        FormulaPtr pp = Formula::impl(phi, phi);
        size_t k1 = axiom2(SchemeId::K, phi, pp);
        size_t s1 = axiom3(SchemeId::S, phi, pp, phi);
        size_t m1 = mp(k1, s1);
        size_t k2 = axiom2(SchemeId::K, phi, phi);
        return mp(k2, m1);
    }

    // From i: X -> Y and j: Y -> Z, derives X -> Z.
    size_t compose(size_t i, size_t j) {
        FormulaPtr xy = formula(i);
        FormulaPtr yz = formula(j);
        size_t w = weaken(j, xy->lhs);  // X -> (Y -> Z)
        size_t s = axiom3(SchemeId::S, xy->lhs, yz->lhs, yz->rhs);
        size_t m = mp(w, s);  // (X -> Y) -> (X -> Z)
        return mp(i, m);
    }

    // From i: X -> (Y -> Z), derives Y -> (X -> Z).
    size_t commute(size_t i) {
        FormulaPtr f = formula(i);
        FormulaPtr x = f->lhs;
        FormulaPtr y = f->rhs->lhs;
        FormulaPtr z = f->rhs->rhs;
        size_t s = axiom3(SchemeId::S, x, y, z);
        size_t m1 = mp(i, s);                 // (X -> Y) -> (X -> Z)
        size_t k = axiom2(SchemeId::K, y, x); // Y -> (X -> Y)
        return compose(k, m1);                // Y -> (X -> Z)
    }

    // From i: A -> (B -> C) and j: C -> D, derives A -> (B -> D).
    size_t compose_under2(size_t i, size_t j) {
        FormulaPtr f = formula(i);
        FormulaPtr a = f->lhs;
        FormulaPtr b = f->rhs->lhs;
        FormulaPtr c = f->rhs->rhs;
        FormulaPtr d = formula(j)->rhs;
        size_t w1 = weaken(j, b);  // B -> (C -> D)
        size_t s1 = axiom3(SchemeId::S, b, c, d);
        size_t m1 = mp(w1, s1);    // (B -> C) -> (B -> D)
        size_t w2 = weaken(m1, a); // A -> ((B -> C) -> (B -> D))
        size_t s2 = axiom3(SchemeId::S, a, Formula::impl(b, c), Formula::impl(b, d));
        size_t m2 = mp(w2, s2);    // (A -> (B -> C)) -> (A -> (B -> D))
        return mp(i, m2);
    }

    HilbertProof take() { return std::move(pf_); }

private:
    HilbertProof pf_;
};

std::vector<FormulaPtr> context_without(const std::vector<FormulaPtr>& ctx, const FormulaPtr& f) {
    std::vector<FormulaPtr> out;
    for (const auto& g : ctx)
        if (!equal(f, g)) out.push_back(g);
    return out;
}

std::vector<FormulaPtr> context_union(std::initializer_list<const std::vector<FormulaPtr>*> cs) {
    FormulaSet seen;
    std::vector<FormulaPtr> out;
    for (const auto* c : cs)
        for (const auto& f : *c)
            if (seen.insert(f).second) out.push_back(f);
    return out;
}

void require_checks(const HilbertProof& pf, SystemId sys, const char* what) {
    CheckResult r = check_proof(pf, sys);
    if (!r.ok)
        throw ElaborationError(std::string(what) + " does not check under system " +
                               to_string(sys) + ": " + r.summary());
}

}  // namespace

HilbertProof deduction_elaborate(const HilbertProof& pf, const FormulaPtr& hyp, SystemId sys) {
    require_checks(pf, sys, "deduction input");

    ProofBuilder b(context_without(pf.context, hyp));
    std::map<size_t, size_t> image;       // old index -> line proving hyp -> formula
    std::map<size_t, FormulaPtr> orig;    // old index -> original formula
    for (const auto& line : pf.lines) orig[line.index] = line.formula;

    for (const auto& line : pf.lines) {
        const FormulaPtr& chi = line.formula;
        switch (line.just.kind) {
            case Justification::Kind::Axiom: {
                size_t a = b.add(chi, line.just);
                image[line.index] = b.weaken(a, hyp);
                break;
            }
            case Justification::Kind::Hypothesis: {
                if (equal(chi, hyp)) {
                    image[line.index] = b.identity(hyp);
                } else {
                    size_t h = b.hyp(chi);
                    image[line.index] = b.weaken(h, hyp);
                }
                break;
            }
            case Justification::Kind::ModusPonens: {
                const FormulaPtr& phi_i = orig.at(line.just.from);
                size_t s = b.axiom3(SchemeId::S, hyp, phi_i, chi);
                size_t m1 = b.mp(image.at(line.just.from_impl), s);
                image[line.index] = b.mp(image.at(line.just.from), m1);
                break;
            }
            case Justification::Kind::Generalization: {
                const std::string& x = line.just.var;
                if (free_vars(hyp).count(x))
                    throw ElaborationError(
                        "cannot discharge hypothesis '" + to_string(hyp) +
                        "': generalized variable '" + x + "' occurs free in it");
                // premise: psi -> A, conclusion: psi -> forall x A
                const FormulaPtr& psi = chi->lhs;
                const FormulaPtr& body = chi->rhs->lhs;
                FormulaPtr pair = Formula::conj(hyp, psi);
                size_t e1 = b.axiom2(SchemeId::AndE1, hyp, psi);   // hyp&psi -> hyp
                size_t e2 = b.axiom2(SchemeId::AndE2, hyp, psi);   // hyp&psi -> psi
                size_t c = b.compose(e1, image.at(line.just.from)); // hyp&psi -> (psi -> A)
                size_t s = b.axiom3(SchemeId::S, pair, psi, body);
                size_t m = b.mp(c, s);                              // (hyp&psi -> psi) -> (hyp&psi -> A)
                size_t d = b.mp(e2, m);                             // hyp&psi -> A
                size_t g = b.gen(d, x);                             // hyp&psi -> forall x A
                size_t i2 = b.axiom2(SchemeId::AndI, hyp, psi);     // hyp -> (psi -> hyp&psi)
                image[line.index] = b.compose_under2(i2, g);        // hyp -> (psi -> forall x A)
                break;
            }
            case Justification::Kind::ExistentialInstantiation: {
                const std::string& x = line.just.var;
                if (free_vars(hyp).count(x))
                    throw ElaborationError(
                        "cannot discharge hypothesis '" + to_string(hyp) +
                        "': instantiated variable '" + x + "' occurs free in it");
                size_t c1 = b.commute(image.at(line.just.from));  // A -> (hyp -> psi)
                size_t c2 = b.exi(c1, x);                         // exists x A -> (hyp -> psi)
                image[line.index] = b.commute(c2);                // hyp -> (exists x A -> psi)
                break;
            }
        }
    }

    HilbertProof out = b.take();
    require_checks(out, sys, "internal: deduction output");
    return out;
}

HilbertProof derive_or_elim(const HilbertProof& pf_or, const HilbertProof& pf_left,
                            const HilbertProof& pf_right, SystemId sys) {
    require_checks(pf_or, sys, "disjunction premise");
    FormulaPtr disj = pf_or.conclusion();
    if (!disj || disj->kind != Formula::Kind::Or)
        throw ElaborationError("first premise must conclude a disjunction");
    const FormulaPtr& phi = disj->lhs;
    const FormulaPtr& psi = disj->rhs;
    FormulaPtr chi = pf_left.conclusion();
    if (!chi || !equal(chi, pf_right.conclusion()))
        throw ElaborationError("case proofs must conclude the same formula");

    HilbertProof d1 = deduction_elaborate(pf_left, phi, sys);
    HilbertProof d2 = deduction_elaborate(pf_right, psi, sys);

    ProofBuilder b(context_union({&pf_or.context, &d1.context, &d2.context}));
    size_t l1 = b.import(d1);  // phi -> chi
    size_t l2 = b.import(d2);  // psi -> chi
    size_t lo = b.import(pf_or);
    size_t a = b.axiom3(SchemeId::OrE, phi, psi, chi);
    size_t m1 = b.mp(l1, a);
    size_t m2 = b.mp(l2, m1);  // phi|psi -> chi
    b.mp(lo, m2);
    HilbertProof out = b.take();
    require_checks(out, sys, "internal: or-elimination output");
    return out;
}

HilbertProof derive_efq(const HilbertProof& pf_bot, const FormulaPtr& phi, SystemId sys) {
    require_checks(pf_bot, sys, "absurdity premise");
    if (!pf_bot.conclusion() || pf_bot.conclusion()->kind != Formula::Kind::Falsum)
        throw ElaborationError("premise must conclude bot");

    ProofBuilder b(pf_bot.context);
    size_t lb = b.import(pf_bot);
    size_t e = b.axiom2(SchemeId::EFQ, Formula::falsum(), phi);  // (bot->bot) -> (bot->phi)
    size_t id = b.identity(Formula::falsum());
    size_t m1 = b.mp(id, e);  // bot -> phi
    b.mp(lb, m1);
    HilbertProof out = b.take();
    require_checks(out, sys, "internal: ex-falso output");
    return out;
}

namespace {

void all_vars_term(const Term& t, std::set<std::string>& out) {
    if (t.is_var) out.insert(t.name);
    for (const auto& a : t.args) all_vars_term(a, out);
}

// Every variable name appearing anywhere, bound or free, binder names
// included.
void all_vars(const FormulaPtr& f, std::set<std::string>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            for (const auto& t : f->args) all_vars_term(t, out);
            return;
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            all_vars(f->lhs, out);
            all_vars(f->rhs, out);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            out.insert(f->name);
            all_vars(f->lhs, out);
            return;
    }
}

Term replace_term(const Term& t, const Term& from, const Term& to) {
    if (t == from) return to;
    Term out = t;
    for (auto& a : out.args) a = replace_term(a, from, to);
    return out;
}

FormulaPtr replace_in_formula(const FormulaPtr& f, const Term& from, const Term& to) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            std::vector<Term> args = f->args;
            for (auto& a : args) a = replace_term(a, from, to);
            return Formula::atom(f->name, std::move(args));
        }
        case Formula::Kind::Falsum:
            return f;
        case Formula::Kind::And:
            return Formula::conj(replace_in_formula(f->lhs, from, to),
                                 replace_in_formula(f->rhs, from, to));
        case Formula::Kind::Or:
            return Formula::disj(replace_in_formula(f->lhs, from, to),
                                 replace_in_formula(f->rhs, from, to));
        case Formula::Kind::Implies:
            return Formula::impl(replace_in_formula(f->lhs, from, to),
                                 replace_in_formula(f->rhs, from, to));
        case Formula::Kind::Forall:
            return Formula::forall(f->name, replace_in_formula(f->lhs, from, to));
        case Formula::Kind::Exists:
            return Formula::exists(f->name, replace_in_formula(f->lhs, from, to));
    }
    return f;
}

// Uniformly replaces the closed term t by the fresh variable y in every line.
// Axiom instantiations are rebuilt alongside and verified; freshness of y
// keeps every rule application and side condition intact.
HilbertProof reabstract(const HilbertProof& pf, const Term& t, const std::string& y) {
    Term yv = Term::var(y);
    HilbertProof out;
    out.context = pf.context;  // context is t-free by the freshness checks
    for (const auto& line : pf.lines) {
        ProofLine nl = line;
        nl.formula = replace_in_formula(line.formula, t, yv);
        if (nl.just.kind == Justification::Kind::Axiom) {
            for (auto& [k, f] : nl.just.inst.formulas) f = replace_in_formula(f, t, yv);
            for (auto& [k, tm] : nl.just.inst.terms) tm = replace_term(tm, t, yv);
            FormulaPtr rebuilt = instantiate_scheme(scheme_of(nl.just.scheme), nl.just.inst);
            if (!equal(rebuilt, nl.formula))
                throw ElaborationError("internal: axiom instance did not survive re-abstraction");
        }
        out.lines.push_back(std::move(nl));
    }
    return out;
}

}  // namespace

HilbertProof derive_exists_elim(const HilbertProof& pf_ex, const HilbertProof& pf_body,
                                const FormulaPtr& phi, const std::string& x, const Term& t,
                                SystemId sys) {
    require_checks(pf_ex, sys, "existential premise");
    require_checks(pf_body, sys, "case proof");
    if (!term_closed(t))
        throw ElaborationError("witness term '" + to_string(t) + "' is not closed");

    FormulaPtr ex = pf_ex.conclusion();
    if (!ex || ex->kind != Formula::Kind::Exists || ex->name != x || !equal(ex->lhs, phi))
        throw ElaborationError("first premise must conclude exists " + x + " " + to_string(phi));

    FormulaPtr inst = substitute(phi, x, t);
    if (!pf_body.in_context(inst))
        throw ElaborationError("case proof context is missing '" + to_string(inst) + "'");
    FormulaPtr chi = pf_body.conclusion();

    // The witness must be fresh for the surrounding sequent.
    auto check_fresh = [&](const FormulaPtr& f, const std::string& where) {
        if (occurs(f, t))
            throw ElaborationError("witness term '" + to_string(t) + "' occurs in " + where +
                                   " '" + to_string(f) + "'");
    };
    for (const auto& g : pf_ex.context) check_fresh(g, "context formula");
    for (const auto& g : pf_body.context)
        if (!equal(g, inst)) check_fresh(g, "context formula");
    check_fresh(phi, "the existential body");
    check_fresh(chi, "the conclusion");

    HilbertProof d1 = deduction_elaborate(pf_body, inst, sys);  // Gamma |- phi[x:=t] -> chi

    // Fresh variable for re-abstraction.
    std::set<std::string> used;
    for (const auto& l : d1.lines) all_vars(l.formula, used);
    for (const auto& g : d1.context) all_vars(g, used);
    all_vars(phi, used);
    all_vars(chi, used);
    used.insert(x);
    std::string y = "y";
    for (int i = 0; used.count(y); ++i) y = "y" + std::to_string(i);

    HilbertProof d2 = reabstract(d1, t, y);  // Gamma |- phi[x:=y] -> chi
    FormulaPtr phi_y = substitute_capture_checked(phi, x, Term::var(y));

    ProofBuilder b(context_union({&pf_ex.context, &d2.context}));
    size_t l2 = b.import(d2);
    size_t e1 = b.exi(l2, y);  // exists y phi[x:=y] -> chi
    Instantiation iota;
    iota.formulas["X"] = phi_y;
    iota.vars["x"] = y;
    iota.terms["t"] = Term::var(x);
    size_t b1 = b.axiom(SchemeId::ExistsI, iota);  // phi -> exists y phi[x:=y]
    if (!equal(b.formula(b1)->lhs, phi))
        throw ElaborationError("internal: re-abstraction did not restore the existential body");
    size_t e2 = b.exi(b1, x);  // exists x phi -> exists y phi[x:=y]
    size_t lx = b.import(pf_ex);
    size_t m1 = b.mp(lx, e2);
    b.mp(m1, e1);
    HilbertProof out = b.take();
    require_checks(out, sys, "internal: exists-elimination output");
    return out;
}

}  // namespace bes
