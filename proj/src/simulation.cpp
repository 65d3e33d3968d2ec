#include "bes/simulation.hpp"

#include <algorithm>
#include <sstream>

namespace bes {

std::string to_string(Variant v) { return v == Variant::K ? "K" : "J"; }
SystemId system_of(Variant v) { return v == Variant::K ? SystemId::C : SystemId::I; }

// ---------------------------------------------------------------------------
// FlatMap

namespace {

void collect_vars_term(const Term& t, std::set<std::string>& out) {
    if (t.is_var) out.insert(t.name);
    for (const auto& a : t.args) collect_vars_term(a, out);
}

void collect_vars(const FormulaPtr& f, std::set<std::string>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            for (const auto& t : f->args) collect_vars_term(t, out);
            return;
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            collect_vars(f->lhs, out);
            collect_vars(f->rhs, out);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            out.insert(f->name);
            collect_vars(f->lhs, out);
            return;
    }
}

Term map_constants(const Term& t, const std::map<std::string, std::string>& m, bool to_var) {
    if (t.is_var) return t;
    if (t.args.empty()) {
        auto it = m.find(t.name);
        if (it != m.end()) return to_var ? Term::var(it->second) : Term::cnst(it->second);
        return t;
    }
    Term out = t;
    for (auto& a : out.args) a = map_constants(a, m, to_var);
    return out;
}

FormulaPtr map_formula_constants(const FormulaPtr& f, const std::map<std::string, std::string>& m,
                                 bool to_var) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            std::vector<Term> args = f->args;
            for (auto& a : args) a = map_constants(a, m, to_var);
            return Formula::atom(f->name, std::move(args));
        }
        case Formula::Kind::Falsum:
            return f;
        case Formula::Kind::And:
            return Formula::conj(map_formula_constants(f->lhs, m, to_var),
                                 map_formula_constants(f->rhs, m, to_var));
        case Formula::Kind::Or:
            return Formula::disj(map_formula_constants(f->lhs, m, to_var),
                                 map_formula_constants(f->rhs, m, to_var));
        case Formula::Kind::Implies:
            return Formula::impl(map_formula_constants(f->lhs, m, to_var),
                                 map_formula_constants(f->rhs, m, to_var));
        case Formula::Kind::Forall:
            return Formula::forall(f->name, map_formula_constants(f->lhs, m, to_var));
        case Formula::Kind::Exists:
            return Formula::exists(f->name, map_formula_constants(f->lhs, m, to_var));
    }
    return f;
}

bool mentions_constant(const Term& t, const std::map<std::string, std::string>& m) {
    if (t.is_var) return false;
    if (t.args.empty()) return m.count(t.name) > 0;
    for (const auto& a : t.args)
        if (mentions_constant(a, m)) return true;
    return false;
}

bool mentions_constant(const FormulaPtr& f, const std::map<std::string, std::string>& m) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            for (const auto& t : f->args)
                if (mentions_constant(t, m)) return true;
            return false;
        case Formula::Kind::Falsum:
            return false;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            return mentions_constant(f->lhs, m) || mentions_constant(f->rhs, m);
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            return mentions_constant(f->lhs, m);
    }
    return false;
}

void collect_atoms(const FormulaPtr& f, std::set<Atom>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            out.insert(Atom{f->name, f->args});
            return;
        case Formula::Kind::Falsum:
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            collect_atoms(f->lhs, out);
            collect_atoms(f->rhs, out);
            return;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
            collect_atoms(f->lhs, out);
            return;
    }
}

constexpr size_t kDomainCap = 400000;

}  // namespace

bool FlatMap::has_flat(const FormulaPtr& f) const {
    if (closed(f)) return flat_by_print_.count(to_string(f)) > 0;
    try {
        FormulaPtr rep = eigen_instance(f);
        return flat_by_print_.count(to_string(rep)) > 0;
    } catch (const SyntaxError&) {
        return false;
    }
}

Atom FlatMap::flat(const FormulaPtr& f) const {
    FormulaPtr rep = closed(f) ? f : eigen_instance(f);
    auto it = flat_by_print_.find(to_string(rep));
    if (it == flat_by_print_.end())
        throw SyntaxError("flat domain does not contain '" + to_string(rep) + "'");
    return it->second;
}

bool FlatMap::is_flat_atom(const Atom& a) const { return preimage_.count(a) > 0; }

FormulaPtr FlatMap::decode_eigen(const FormulaPtr& f) const {
    return map_formula_constants(f, alpha_inv_, true);
}

FormulaPtr FlatMap::eigen_instance(const FormulaPtr& f) const {
    FormulaPtr out = f;
    for (const auto& v : free_vars(f)) {
        auto it = alpha_.find(v);
        if (it == alpha_.end())
            throw SyntaxError("no eigenvariable is assigned to variable '" + v + "'");
        out = substitute(out, v, Term::cnst(it->second));
    }
    return out;
}

bool FlatMap::mentions_eigenvariable(const FormulaPtr& f) const {
    return mentions_constant(f, alpha_inv_);
}

FormulaPtr FlatMap::sharp_r(const Atom& a) const {
    auto it = preimage_.find(a);
    if (it == preimage_.end()) return Formula::atom(a.pred, a.args);
    return decode_eigen(it->second);
}

FormulaPtr FlatMap::sharp_l(const Atom& a) const {
    auto it = preimage_.find(a);
    if (it == preimage_.end()) return Formula::atom(a.pred, a.args);
    if (!mentions_eigenvariable(it->second)) return it->second;
    return universal_closure(decode_eigen(it->second));
}

FlatMap make_flat_map(const std::vector<FormulaPtr>& context, const FormulaPtr& goal,
                      const Signature& sig, const std::vector<FormulaPtr>& extra_domain) {
    sig.validate();
    FlatMap fm;

    std::vector<FormulaPtr> sources = context;
    sources.push_back(goal);
    for (const auto& f : sources)
        if (!closed(f))
            throw SyntaxError("flat map inputs must be closed; '" + to_string(f) + "' is not");

    // Eigenvariables: one fresh constant per variable of the sequent.
    std::set<std::string> vars;
    for (const auto& f : sources) collect_vars(f, vars);
    for (const auto& f : extra_domain) collect_vars(f, vars);
    fm.sig_ext_ = sig;
    for (const auto& v : vars) {
        std::string name = "ev_" + v;
        if (sig.is_constant(name) || sig.is_function(name) || sig.is_predicate(name))
            throw SyntaxError("eigenvariable constant '" + name +
                              "' collides with a declared symbol");
        fm.alpha_[v] = name;
        fm.alpha_inv_[name] = v;
        fm.sig_ext_.constants.push_back(name);
    }
    fm.ct_ = closed_terms(fm.sig_ext_);

    // Xi proper: subformulae of the sequent over the extended term universe.
    FormulaSet xi;
    for (const auto& f : sources)
        for (const auto& s : subformulae(f, fm.ct_)) xi.insert(s);
    fm.xi_.assign(xi.begin(), xi.end());
    std::sort(fm.xi_.begin(), fm.xi_.end(),
              [](const FormulaPtr& a, const FormulaPtr& b) { return to_string(a) < to_string(b); });

    // Core of the flat domain: Xi, bot and the designated tautology top. The
    // composite slots range over this core only; grafted extras join the
    // domain afterwards so enrichment cannot blow the composite layer up.
    FormulaSet domain(xi);
    domain.insert(Formula::falsum());
    FormulaPtr top = Formula::impl(Formula::falsum(),
                                   Formula::impl(Formula::falsum(), Formula::falsum()));
    domain.insert(top);

    std::vector<FormulaPtr> pool(domain.begin(), domain.end());
    for (const auto& f : extra_domain) {
        if (!closed(f))
            throw SyntaxError("extra domain member '" + to_string(f) + "' is not closed");
        domain.insert(f);
    }

    // Axiom-shaped composites with slots ranging over the pool.
    auto add = [&](const FormulaPtr& f) { domain.insert(f); };
    for (const auto& a : pool) {
        add(Formula::impl(Formula::neg(Formula::neg(a)), a));  // DNE shape
        for (const auto& b : pool) {
            add(Formula::impl(a, Formula::impl(b, a)));                          // K
            add(Formula::impl(a, Formula::impl(b, Formula::conj(a, b))));        // andI
            add(Formula::impl(Formula::conj(a, b), a));                          // andE1
            add(Formula::impl(Formula::conj(a, b), b));                          // andE2
            add(Formula::impl(a, Formula::disj(a, b)));                          // orI1
            add(Formula::impl(b, Formula::disj(a, b)));                          // orI2
            add(Formula::impl(Formula::impl(a, b),
                              Formula::impl(Formula::impl(a, Formula::neg(b)), Formula::neg(a))));
            add(Formula::impl(Formula::impl(a, Formula::falsum()), Formula::impl(a, b)));  // EFQ
            for (const auto& c : pool) {
                add(Formula::impl(Formula::impl(a, Formula::impl(b, c)),
                                  Formula::impl(Formula::impl(a, b), Formula::impl(a, c))));  // S
                add(Formula::impl(Formula::impl(a, c),
                                  Formula::impl(Formula::impl(b, c),
                                                Formula::impl(Formula::disj(a, b), c))));  // orE
            }
        }
        if (a->kind == Formula::Kind::Forall)
            for (const auto& t : fm.ct_)
                add(Formula::impl(a, substitute(a->lhs, a->name, t)));  // forallE
        if (a->kind == Formula::Kind::Exists)
            for (const auto& t : fm.ct_)
                add(Formula::impl(substitute(a->lhs, a->name, t), a));  // existsI
    }

    // Closure: operands of binaries, instances of quantified members, and the
    // eigenvariable premises the gen rule needs.
    std::vector<FormulaPtr> work(domain.begin(), domain.end());
    while (!work.empty()) {
        if (domain.size() > kDomainCap)
            throw SyntaxError("flat domain exceeds the size cap; shrink the sequent or the "
                              "term depth bound");
        FormulaPtr f = work.back();
        work.pop_back();
        auto push = [&](const FormulaPtr& g) {
            if (domain.insert(g).second) work.push_back(g);
        };
        switch (f->kind) {
            case Formula::Kind::And:
            case Formula::Kind::Or:
            case Formula::Kind::Implies:
                push(f->lhs);
                push(f->rhs);
                if (f->kind == Formula::Kind::Implies &&
                    f->rhs->kind == Formula::Kind::Forall) {
                    auto it = fm.alpha_.find(f->rhs->name);
                    if (it != fm.alpha_.end())
                        push(Formula::impl(
                            f->lhs,
                            substitute(f->rhs->lhs, f->rhs->name, Term::cnst(it->second))));
                }
                break;
            case Formula::Kind::Forall:
            case Formula::Kind::Exists:
                for (const auto& t : fm.ct_) push(substitute(f->lhs, f->name, t));
                break;
            default:
                break;
        }
    }

    fm.domain_.assign(domain.begin(), domain.end());
    std::sort(fm.domain_.begin(), fm.domain_.end(),
              [](const FormulaPtr& a, const FormulaPtr& b) { return to_string(a) < to_string(b); });

    for (const auto& [p, ar] : sig.predicates)
        if (p.rfind("flat_", 0) == 0)
            throw SyntaxError("predicate names starting with 'flat_' are reserved for the "
                              "simulation ('" + p + "')");

    for (size_t i = 0; i < fm.domain_.size(); ++i) {
        Atom a = Atom::prop("flat_" + std::to_string(i));
        fm.flat_by_print_[to_string(fm.domain_[i])] = a;
        fm.preimage_[a] = fm.domain_[i];
    }

    // P-slot universe: flats of the core pool plus the sequent's own atoms.
    std::set<Atom> puni;
    for (const auto& f : pool) puni.insert(fm.flat_by_print_.at(to_string(f)));
    for (const auto& f : pool) collect_atoms(f, puni);
    fm.p_universe_.assign(puni.begin(), puni.end());
    return fm;
}

// ---------------------------------------------------------------------------
// Natural base

const std::vector<SchemeId>& enabled_schemes(Variant v, const NaturalBaseOptions& opts) {
    static const std::vector<SchemeId> k_plain = {SchemeId::K, SchemeId::S, SchemeId::ForallE,
                                                  SchemeId::DNE};
    static const std::vector<SchemeId> k_and = {SchemeId::K,     SchemeId::S,
                                                SchemeId::ForallE, SchemeId::AndI,
                                                SchemeId::AndE1,  SchemeId::AndE2,
                                                SchemeId::DNE};
    if (v == Variant::K) return opts.and_in_k ? k_and : k_plain;
    return schemes_of(SystemId::I);
}

std::string NaturalBase::stats() const {
    std::ostringstream out;
    size_t total = system.rules.size();
    out << "variant " << to_string(variant) << ", " << total << " rule(s)";
    for (const auto& [tag, n] : schema_counts) out << "\n  " << tag << ": " << n;
    return out.str();
}

NaturalBase build_natural_base(const FlatMap& fm, Variant variant,
                               const NaturalBaseOptions& opts) {
    NaturalBase nb;
    nb.variant = variant;
    const auto& ct = fm.closed_term_universe();
    std::vector<AtomicRule> rules;
    auto count = [&](const std::string& tag) { ++nb.schema_counts[tag]; };

    for (const auto& f : fm.domain()) {
        // zero-level axiom flats
        for (SchemeId id : enabled_schemes(variant, opts)) {
            if (match_scheme(f, id, ct)) {
                rules.push_back(AtomicRule::fact(fm.flat(f)));
                count("axiom " + to_string(id));
                break;
            }
        }
        // modus ponens
        if (f->kind == Formula::Kind::Implies) {
            rules.push_back(AtomicRule::make(
                {{{}, fm.flat(f->lhs)}, {{}, fm.flat(f)}}, fm.flat(f->rhs)));
            count("mp");
            // generalization
            if (f->rhs->kind == Formula::Kind::Forall) {
                const std::string& x = f->rhs->name;
                auto it = fm.eigenvariables().find(x);
                if (it != fm.eigenvariables().end()) {
                    FormulaPtr prem = Formula::impl(
                        f->lhs, substitute(f->rhs->lhs, x, Term::cnst(it->second)));
                    if (fm.has_flat(prem) &&
                        !free_vars(fm.decode_eigen(f->lhs)).count(x)) {
                        rules.push_back(
                            AtomicRule::make({{{}, fm.flat(prem)}}, fm.flat(f)));
                        count("gen");
                    }
                }
            }
        }
        if (variant == Variant::J) {
            if (f->kind == Formula::Kind::Or) {
                for (const auto& p : fm.p_slot_universe()) {
                    rules.push_back(AtomicRule::make({{{fm.flat(f->lhs)}, p},
                                                      {{fm.flat(f->rhs)}, p},
                                                      {{}, fm.flat(f)}},
                                                     p));
                    count("orE");
                }
            }
            if (f->kind == Formula::Kind::Exists) {
                for (const auto& t : ct) {
                    FormulaPtr inst = substitute(f->lhs, f->name, t);
                    for (const auto& p : fm.p_slot_universe()) {
                        rules.push_back(AtomicRule::make(
                            {{{}, fm.flat(f)}, {{fm.flat(inst)}, p}}, p));
                        count("existsE");
                    }
                }
            }
        }
    }
    if (variant == Variant::J) {
        Atom bot = fm.flat(Formula::falsum());
        for (const auto& p : fm.p_slot_universe()) {
            rules.push_back(AtomicRule::make({{{}, bot}}, p));
            count("efq");
        }
    }
    nb.system = AtomicSystem::of(std::move(rules));
    return nb;
}

// ---------------------------------------------------------------------------
// Simulation

BaseDerivation simulate_hilbert(const HilbertProof& pf, const FlatMap& fm,
                                const NaturalBase& nb) {
    SystemId sys = system_of(nb.variant);
    CheckResult cr = check_proof(pf, sys);
    if (!cr.ok)
        throw SimulationError("proof does not check under system " + to_string(sys) + ": " +
                              cr.summary());

    AtomSet ctx;
    for (const auto& g : pf.context) ctx.insert(fm.flat(g));

    std::map<size_t, BaseDerivation> done;
    auto flat_of_line = [&](const FormulaPtr& f, size_t idx) -> Atom {
        try {
            return fm.flat(f);
        } catch (const SyntaxError& e) {
            throw SimulationError("line " + std::to_string(idx) + " is outside the flat domain: " +
                                  e.what());
        }
    };

    for (const auto& line : pf.lines) {
        Atom a = flat_of_line(line.formula, line.index);
        switch (line.just.kind) {
            case Justification::Kind::Hypothesis:
                done[line.index] =
                    BaseDerivation{BaseDerivation::Kind::Ref, ctx, a, std::nullopt, {}};
                break;
            case Justification::Kind::Axiom: {
                AtomicRule r = AtomicRule::fact(a);
                if (!nb.system.contains(r))
                    throw SimulationError(
                        "line " + std::to_string(line.index) + ": no zero-level rule for scheme " +
                        to_string(line.just.scheme) + " in the variant-" + to_string(nb.variant) +
                        " base");
                done[line.index] = BaseDerivation{BaseDerivation::Kind::App, ctx, a, r, {}};
                break;
            }
            case Justification::Kind::ModusPonens: {
                Atom ant = done.at(line.just.from).atom;
                Atom imp = done.at(line.just.from_impl).atom;
                AtomicRule r = AtomicRule::make({{{}, ant}, {{}, imp}}, a);
                if (!nb.system.contains(r))
                    throw SimulationError("line " + std::to_string(line.index) +
                                          ": missing mp rule instance");
                std::vector<BaseDerivation> subs;
                for (const auto& p : r.premises)
                    subs.push_back(p.conclusion == ant ? done.at(line.just.from)
                                                       : done.at(line.just.from_impl));
                done[line.index] =
                    BaseDerivation{BaseDerivation::Kind::App, ctx, a, r, std::move(subs)};
                break;
            }
            case Justification::Kind::Generalization: {
                Atom prem = done.at(line.just.from).atom;
                AtomicRule r = AtomicRule::make({{{}, prem}}, a);
                if (!nb.system.contains(r))
                    throw SimulationError("line " + std::to_string(line.index) +
                                          ": missing gen rule instance");
                done[line.index] = BaseDerivation{BaseDerivation::Kind::App, ctx, a, r,
                                                  {done.at(line.just.from)}};
                break;
            }
            case Justification::Kind::ExistentialInstantiation:
                throw SimulationError("line " + std::to_string(line.index) +
                                      ": existential instantiation has no simulating rule");
        }
    }
    BaseDerivation root = done.at(pf.lines.back().index);
    if (!validate_derivation(root, nb.system))
        throw SimulationError("internal: simulated derivation failed validation");
    return root;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

struct Extractor {
    const FlatMap& fm;
    Variant variant;
    SystemId sys;

    std::vector<FormulaPtr> sharp_context(const AtomSet& ctx) const {
        FormulaSet seen;
        std::vector<FormulaPtr> out;
        for (const auto& a : ctx)
            if (seen.insert(fm.sharp_l(a)).second) out.push_back(fm.sharp_l(a));
        return out;
    }

    [[noreturn]] void fail(const BaseDerivation& d, const std::string& msg) const {
        throw SimulationError("extraction failed at node for '" + to_string(d.atom) +
                              "': " + msg);
    }

    HilbertProof ref_case(const BaseDerivation& d) const {
        FormulaPtr l = fm.sharp_l(d.atom);
        FormulaPtr r = fm.sharp_r(d.atom);
        HilbertProof pf;
        pf.context = sharp_context(d.context);
        pf.lines.push_back({1, l, Justification::hyp()});
        size_t cur = 1;
        // peel the universal closure down to the open instance
        while (!equal(pf.lines.back().formula, r)) {
            FormulaPtr f = pf.lines.back().formula;
            if (f->kind != Formula::Kind::Forall)
                fail(d, "left decode is not a universal closure of the right decode");
            Instantiation iota;
            iota.formulas["X"] = f->lhs;
            iota.vars["x"] = f->name;
            iota.terms["t"] = Term::var(f->name);
            FormulaPtr ax = instantiate_scheme(scheme_of(SchemeId::ForallE), iota);
            pf.lines.push_back({pf.lines.size() + 1, ax,
                                Justification::axiom(SchemeId::ForallE, iota)});
            pf.lines.push_back({pf.lines.size() + 1, ax->rhs,
                                Justification::mp(cur, pf.lines.size())});
            cur = pf.lines.size();
        }
        return pf;
    }

    HilbertProof extract(const BaseDerivation& d) const {
        if (d.kind == BaseDerivation::Kind::Ref) return ref_case(d);
        const AtomicRule& r = *d.rule;

        if (r.premises.empty()) {
            FormulaPtr f = fm.sharp_r(d.atom);
            auto m = is_axiom_instance(f, sys, fm.closed_term_universe());
            if (!m) fail(d, "decoded zero-level conclusion '" + to_string(f) +
                            "' is not an axiom instance of system " + to_string(sys));
            HilbertProof pf;
            pf.context = sharp_context(d.context);
            pf.lines.push_back({1, f, Justification::axiom(m->scheme, m->inst)});
            return pf;
        }

        std::vector<size_t> hypless, hypful;
        for (size_t i = 0; i < r.premises.size(); ++i)
            (r.premises[i].hypotheses.empty() ? hypless : hypful).push_back(i);

        FormulaPtr goal = fm.sharp_r(d.atom);

        if (hypful.empty() && r.premises.size() == 1) {
            // gen instance or the efq rule, told apart by the premise decode
            FormulaPtr prem_f = fm.sharp_r(r.premises[0].conclusion);
            FormulaPtr concl = goal;
            if (concl->kind == Formula::Kind::Implies &&
                concl->rhs->kind == Formula::Kind::Forall && prem_f->kind == Formula::Kind::Implies) {
                HilbertProof pf = extract(d.subtrees[0]);
                size_t prem_idx = pf.lines.back().index;
                const std::string& x = concl->rhs->name;
                FormulaPtr gen_f =
                    Formula::impl(pf.lines.back().formula->lhs,
                                  Formula::forall(x, pf.lines.back().formula->rhs));
                if (equal(gen_f, concl)) {
                    pf.lines.push_back(
                        {pf.lines.back().index + 1, gen_f, Justification::gen(prem_idx, x)});
                    return pf;
                }
            }
            if (prem_f->kind == Formula::Kind::Falsum) {
                HilbertProof pf_bot = extract(d.subtrees[0]);
                try {
                    return derive_efq(pf_bot, goal, sys);
                } catch (const ElaborationError& e) {
                    fail(d, e.what());
                }
            }
            fail(d, "unrecognized single-premise rule");
        }

        if (hypful.empty() && r.premises.size() == 2) {
            // mp rule
            FormulaPtr f1 = fm.sharp_r(r.premises[0].conclusion);
            FormulaPtr f2 = fm.sharp_r(r.premises[1].conclusion);
            int impl_at = -1;
            if (f2->kind == Formula::Kind::Implies && equal(f2->lhs, f1) && equal(f2->rhs, goal))
                impl_at = 1;
            else if (f1->kind == Formula::Kind::Implies && equal(f1->lhs, f2) &&
                     equal(f1->rhs, goal))
                impl_at = 0;
            if (impl_at < 0) fail(d, "two-premise rule is not an mp instance");
            HilbertProof ant = extract(d.subtrees[impl_at == 1 ? 0 : 1]);
            HilbertProof imp = extract(d.subtrees[impl_at]);
            HilbertProof pf;
            pf.context = sharp_context(d.context);
            size_t ia = append(pf, ant);
            size_t ii = append(pf, imp);
            pf.lines.push_back({pf.lines.size() + 1, goal, Justification::mp(ia, ii)});
            return pf;
        }

        if (hypless.size() == 1 && !hypful.empty()) {
            FormulaPtr anchor = fm.sharp_r(r.premises[hypless[0]].conclusion);
            if (anchor->kind == Formula::Kind::Or) {
                // orE: cases for lhs and rhs (identical cases collapse)
                HilbertProof pf_or = extract(d.subtrees[hypless[0]]);
                const HilbertProof* left = nullptr;
                const HilbertProof* right = nullptr;
                std::vector<HilbertProof> cases;
                for (size_t i : hypful) cases.push_back(extract(d.subtrees[i]));
                Atom fl = fm.flat(anchor->lhs);
                Atom fr = fm.flat(anchor->rhs);
                for (size_t k = 0; k < hypful.size(); ++k) {
                    const AtomSet& hs = r.premises[hypful[k]].hypotheses;
                    if (hs.count(fl)) left = &cases[k];
                    if (hs.count(fr)) right = &cases[k];
                }
                if (!left || !right) fail(d, "or-elimination cases do not cover both disjuncts");
                FormulaPtr dl = fm.sharp_l(fl);
                if (!equal(dl, fm.sharp_r(fl)))
                    fail(d, "disjunct '" + to_string(dl) + "' does not decode to itself");
                FormulaPtr dr = fm.sharp_l(fr);
                if (!equal(dr, fm.sharp_r(fr)))
                    fail(d, "disjunct '" + to_string(dr) + "' does not decode to itself");
                try {
                    return derive_or_elim(pf_or, *left, *right, sys);
                } catch (const ElaborationError& e) {
                    fail(d, e.what());
                }
            }
            if (anchor->kind == Formula::Kind::Exists && hypful.size() == 1) {
                HilbertProof pf_ex = extract(d.subtrees[hypless[0]]);
                HilbertProof pf_body = extract(d.subtrees[hypful[0]]);
                const std::string& x = anchor->name;
                const FormulaPtr& body = anchor->lhs;
                // recover the witness from the hypothesis flat
                const AtomSet& hs = r.premises[hypful[0]].hypotheses;
                if (hs.size() != 1) fail(d, "exists-elimination premise carries multiple hypotheses");
                FormulaPtr hyp_f = fm.sharp_r(*hs.begin());
                if (!equal(fm.sharp_l(*hs.begin()), hyp_f))
                    fail(d, "instantiated hypothesis does not decode to itself");
                std::optional<Term> witness;
                for (const auto& t : fm.closed_term_universe()) {
                    try {
                        if (equal(substitute(body, x, t), hyp_f)) {
                            bool fresh = !occurs(body, t) && !occurs(goal, t);
                            for (const auto& g : pf_ex.context)
                                if (occurs(g, t)) fresh = false;
                            if (fresh) {
                                witness = t;
                                break;
                            }
                            if (!witness) witness = t;
                        }
                    } catch (const SyntaxError&) {
                    }
                }
                if (!witness)
                    fail(d, "no closed term reproduces the instantiated hypothesis '" +
                               to_string(hyp_f) + "'");
                try {
                    return derive_exists_elim(pf_ex, pf_body, body, x, *witness, sys);
                } catch (const ElaborationError& e) {
                    fail(d, e.what());
                }
            }
        }
        fail(d, "unrecognized rule shape");
    }

    static size_t append(HilbertProof& pf, const HilbertProof& other) {
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
            pf.lines.push_back({pf.lines.size() + 1, line.formula, std::move(j)});
            last = pf.lines.back().index;
            remap[line.index] = last;
        }
        return last;
    }
};

}  // namespace

HilbertProof extract_hilbert(const BaseDerivation& d, const FlatMap& fm, Variant variant) {
    Extractor ex{fm, variant, system_of(variant)};
    HilbertProof pf = ex.extract(d);
    CheckResult cr = check_proof(pf, system_of(variant));
    if (!cr.ok)
        throw SimulationError("internal: extracted proof does not check: " + cr.summary());
    return pf;
}

// ---------------------------------------------------------------------------
// Pipeline

bool in_classical_fragment(const FormulaPtr& f, bool allow_and) {
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Falsum:
            return true;
        case Formula::Kind::Implies:
            return in_classical_fragment(f->lhs, allow_and) &&
                   in_classical_fragment(f->rhs, allow_and);
        case Formula::Kind::And:
            return allow_and && in_classical_fragment(f->lhs, allow_and) &&
                   in_classical_fragment(f->rhs, allow_and);
        case Formula::Kind::Or:
        case Formula::Kind::Exists:
            return false;
        case Formula::Kind::Forall:
            return in_classical_fragment(f->lhs, allow_and);
    }
    return false;
}

namespace {

std::string transcript_of(const PipelineResult& res, const std::vector<FormulaPtr>& context,
                          const FormulaPtr& goal, SystemId sys) {
    std::ostringstream out;
    out << "== FLATMAP ==\n";
    out << "sequent:";
    for (size_t i = 0; i < context.size(); ++i)
        out << (i ? "; " : " ") << to_string(context[i]);
    out << " |> " << to_string(goal) << "\n";
    out << "xi size: " << res.fm.xi().size() << ", flat domain size: " << res.fm.domain().size()
        << "\n";
    if (!res.fm.eigenvariables().empty()) {
        out << "eigenvariables:";
        for (const auto& [v, c] : res.fm.eigenvariables()) out << " " << v << " -> " << c;
        out << "\n";
    }
    out << "xi flats:\n";
    for (const auto& f : res.fm.xi())
        out << "  " << to_string(res.fm.flat(f)) << " = " << to_string(f) << "\n";
    out << "== BASE ==\n" << res.nb.stats() << "\n";
    out << "== DERIVATION ==\n";
    if (res.derivation)
        out << to_string(*res.derivation);
    else
        out << "(none)\n";
    out << "== EXTRACTED-PROOF ==\n";
    if (res.extracted)
        out << proof_to_string(*res.extracted, sys);
    else
        out << "(none)\n";
    out << "== VERDICT ==\n";
    if (!res.failure.empty())
        out << "failure: " << res.failure << "\n";
    else
        out << res.verdict.summary() << "\n";
    return out.str();
}

}  // namespace

PipelineResult completeness_pipeline(const std::vector<FormulaPtr>& context,
                                     const FormulaPtr& goal, const Signature& sig,
                                     const PipelineOptions& opts, const HilbertProof* source) {
    PipelineResult res;
    SystemId sys = system_of(opts.variant);
    try {
        if (opts.variant == Variant::K) {
            for (const auto& f : context)
                if (!in_classical_fragment(f, opts.base.and_in_k))
                    throw SimulationError("fragment violation: context formula '" + to_string(f) +
                                          "' is outside the classical fragment");
            if (!in_classical_fragment(goal, opts.base.and_in_k))
                throw SimulationError("fragment violation: goal '" + to_string(goal) +
                                      "' is outside the classical fragment");
        }
        res.fm = make_flat_map(context, goal, sig);
        res.nb = build_natural_base(res.fm, opts.variant, opts.base);

        if (source) {
            FormulaSet want(context.begin(), context.end());
            FormulaSet have(source->context.begin(), source->context.end());
            bool same = want.size() == have.size();
            for (const auto& f : have)
                if (!want.count(f)) same = false;
            if (!same || !source->conclusion() || !equal(source->conclusion(), goal))
                throw SimulationError("source proof does not prove the requested sequent");
            res.derivation = simulate_hilbert(*source, res.fm, res.nb);
        } else {
            AtomSet ctx;
            for (const auto& g : context) ctx.insert(res.fm.flat(g));
            auto d = derives(res.nb.system, ctx, res.fm.flat(goal));
            if (!d) {
                res.failure =
                    "search exhausted: the finite natural base has no derivation of the flat goal";
                res.transcript = transcript_of(res, context, goal, sys);
                return res;
            }
            res.derivation = std::move(d);
        }
        res.extracted = extract_hilbert(*res.derivation, res.fm, opts.variant);
        res.verdict = check_proof(*res.extracted, sys);
        bool sequent_ok = equal(res.extracted->conclusion(), goal);
        FormulaSet want(context.begin(), context.end());
        for (const auto& g : res.extracted->context)
            if (!want.count(g)) sequent_ok = false;
        if (!res.verdict.ok) res.failure = "extracted proof was rejected";
        else if (!sequent_ok)
            res.failure = "extracted proof proves a different sequent";
        res.ok = res.failure.empty();
    } catch (const std::exception& e) {
        res.failure = e.what();
    }
    res.transcript = transcript_of(res, context, goal, sys);
    return res;
}

// ---------------------------------------------------------------------------
// Clause checks and enrichment

EnrichResult enrich_for_implications(const std::vector<FormulaPtr>& context,
                                     const FormulaPtr& goal, const Signature& sig, Variant variant,
                                     const NaturalBaseOptions& opts,
                                     const std::vector<FormulaPtr>& anchors, int max_rounds) {
    EnrichResult out;
    FormulaSet extra;
    for (int round = 0;; ++round) {
        std::vector<FormulaPtr> extra_v(extra.begin(), extra.end());
        out.fm = make_flat_map(context, goal, sig, extra_v);
        out.nb = build_natural_base(out.fm, variant, opts);
        out.rounds_used = round;
        if (round >= max_rounds) break;

        bool changed = false;
        DerivabilityEngine engine(out.nb.system);
        for (const auto& anchor : anchors) {
            if (anchor->kind != Formula::Kind::Implies || !out.fm.has_flat(anchor)) continue;
            if (engine.query({}, out.fm.flat(anchor))) continue;
            auto w = engine.query({out.fm.flat(anchor->lhs)}, out.fm.flat(anchor->rhs));
            if (!w) continue;
            try {
                HilbertProof pf = extract_hilbert(*w, out.fm, variant);
                HilbertProof dt = deduction_elaborate(pf, anchor->lhs, system_of(variant));
                for (const auto& line : dt.lines) {
                    FormulaPtr rep = closed(line.formula) ? line.formula
                                                          : out.fm.eigen_instance(line.formula);
                    if (extra.insert(rep).second) changed = true;
                }
            } catch (const std::exception&) {
                // anchors whose witnesses cannot be elaborated are left as-is
                continue;
            }
        }
        if (!changed) break;
    }
    return out;
}

std::string ClauseCheckResult::to_text() const {
    std::ostringstream out;
    out << "conjunction flats: " << samples_and << " sampled, " << fail_and << " failed\n";
    out << "implication flats: " << samples_imp << " sampled, " << fail_imp << " failed\n";
    out << "universal flats:   " << samples_all << " sampled, " << fail_all << " failed\n";
    return out.str();
}

ClauseCheckResult check_flat_clauses(const std::vector<FormulaPtr>& context,
                                     const FormulaPtr& goal, const Signature& sig, Variant variant,
                                     int max_samples_per_clause, int enrich_rounds) {
    ClauseCheckResult res;
    NaturalBaseOptions opts;
    opts.and_in_k = (variant == Variant::K);

    FlatMap fm0 = make_flat_map(context, goal, sig);
    std::vector<FormulaPtr> imp_anchors;
    for (const auto& f : fm0.domain()) {
        if (f->kind == Formula::Kind::Implies &&
            static_cast<int>(imp_anchors.size()) < max_samples_per_clause &&
            !fm0.mentions_eigenvariable(f))
            imp_anchors.push_back(f);
    }

    EnrichResult er = enrich_for_implications(context, goal, sig, variant, opts, imp_anchors,
                                              enrich_rounds);
    const FlatMap& fm = er.fm;
    const NaturalBase& nb = er.nb;

    DerivabilityEngine engine(nb.system);
    auto derivable = [&](const FormulaPtr& f) {
        return engine.query({}, fm.flat(f)).has_value();
    };
    auto derivable_from = [&](const FormulaPtr& hyp, const FormulaPtr& f) {
        return engine.query({fm.flat(hyp)}, fm.flat(f)).has_value();
    };

    int n_and = 0, n_all = 0;
    for (const auto& f : fm.domain()) {
        if (fm.mentions_eigenvariable(f)) continue;
        if (f->kind == Formula::Kind::And && n_and < max_samples_per_clause) {
            ++n_and;
            ++res.samples_and;
            bool lhs = derivable(f);
            bool rhs = derivable(f->lhs) && derivable(f->rhs);
            if (lhs != rhs) ++res.fail_and;
        }
        if (f->kind == Formula::Kind::Forall && n_all < max_samples_per_clause) {
            ++n_all;
            ++res.samples_all;
            bool lhs = derivable(f);
            bool rhs = true;
            for (const auto& t : fm.closed_term_universe())
                if (!derivable(substitute(f->lhs, f->name, t))) {
                    rhs = false;
                    break;
                }
            if (lhs != rhs) ++res.fail_all;
        }
    }
    for (const auto& f : imp_anchors) {
        if (!fm.has_flat(f)) continue;
        ++res.samples_imp;
        bool lhs = derivable(f);
        bool rhs = derivable_from(f->lhs, f->rhs);
        if (lhs != rhs) ++res.fail_imp;
    }
    return res;
}

}  // namespace bes
