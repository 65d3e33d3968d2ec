#include "bes/atomic.hpp"

#include <algorithm>
#include <sstream>

namespace bes {

int cmp(const Atom& a, const Atom& b) {
    if (int c = a.pred.compare(b.pred)) return c < 0 ? -1 : 1;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (int c = cmp(a.args[i], b.args[i])) return c;
    return 0;
}

bool atom_closed(const Atom& a) {
    for (const auto& t : a.args)
        if (!term_closed(t)) return false;
    return true;
}

std::set<std::string> atom_vars(const Atom& a) {
    std::set<std::string> vs;
    for (const auto& t : a.args) term_free_vars(t, vs);
    return vs;
}

std::string to_string(const Atom& a) {
    std::string s = a.pred;
    if (!a.args.empty()) {
        s += "(";
        for (size_t i = 0; i < a.args.size(); ++i) {
            if (i) s += ", ";
            s += to_string(a.args[i]);
        }
        s += ")";
    }
    return s;
}

Atom parse_atom(const std::string& text, const Signature& sig) {
    FormulaPtr f = parse_formula(text, sig);
    if (f->kind != Formula::Kind::Atom)
        throw SyntaxError("expected an atom, got '" + to_string(f) + "'");
    return Atom{f->name, f->args};
}

int cmp(const RulePremise& a, const RulePremise& b) {
    if (int c = cmp(a.conclusion, b.conclusion)) return c;
    if (a.hypotheses.size() != b.hypotheses.size())
        return a.hypotheses.size() < b.hypotheses.size() ? -1 : 1;
    auto it = a.hypotheses.begin(), jt = b.hypotheses.begin();
    for (; it != a.hypotheses.end(); ++it, ++jt)
        if (int c = cmp(*it, *jt)) return c;
    return 0;
}

AtomicRule AtomicRule::make(std::vector<RulePremise> prems, Atom c) {
    std::sort(prems.begin(), prems.end());
    prems.erase(std::unique(prems.begin(), prems.end()), prems.end());
    return AtomicRule{std::move(prems), std::move(c)};
}

int cmp(const AtomicRule& a, const AtomicRule& b) {
    if (int c = cmp(a.conclusion, b.conclusion)) return c;
    if (a.premises.size() != b.premises.size())
        return a.premises.size() < b.premises.size() ? -1 : 1;
    for (size_t i = 0; i < a.premises.size(); ++i)
        if (int c = cmp(a.premises[i], b.premises[i])) return c;
    return 0;
}

RuleLevel level(const AtomicRule& r) {
    if (r.premises.empty()) return RuleLevel::Zero;
    for (const auto& p : r.premises)
        if (!p.hypotheses.empty()) return RuleLevel::Second;
    return RuleLevel::First;
}

std::string to_string(RuleLevel l) {
    switch (l) {
        case RuleLevel::Zero: return "zero";
        case RuleLevel::First: return "first";
        case RuleLevel::Second: return "second";
    }
    return "?";
}

std::string to_string(const AtomicRule& r) {
    std::ostringstream out;
    RuleLevel l = level(r);
    if (l == RuleLevel::Second) {
        out << "{ ";
        for (size_t i = 0; i < r.premises.size(); ++i) {
            if (i) out << " ; ";
            out << "[";
            size_t k = 0;
            for (const auto& h : r.premises[i].hypotheses) out << (k++ ? ", " : "") << to_string(h);
            out << "] => " << to_string(r.premises[i].conclusion);
        }
        out << " } => " << to_string(r.conclusion);
    } else {
        for (size_t i = 0; i < r.premises.size(); ++i)
            out << (i ? ", " : "") << to_string(r.premises[i].conclusion);
        if (!r.premises.empty()) out << " ";
        out << "=> " << to_string(r.conclusion);
    }
    return out.str();
}

AtomicSystem AtomicSystem::of(std::vector<AtomicRule> rs) {
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    return AtomicSystem{std::move(rs)};
}

bool AtomicSystem::contains(const AtomicRule& r) const {
    return std::binary_search(rules.begin(), rules.end(), r);
}

bool AtomicSystem::subset_of(const AtomicSystem& other) const {
    for (const auto& r : rules)
        if (!other.contains(r)) return false;
    return true;
}

AtomicSystem AtomicSystem::union_with(const AtomicSystem& other) const {
    std::vector<AtomicRule> rs = rules;
    rs.insert(rs.end(), other.rules.begin(), other.rules.end());
    return AtomicSystem::of(std::move(rs));
}

std::set<Atom> AtomicSystem::atoms() const {
    std::set<Atom> out;
    for (const auto& r : rules) {
        out.insert(r.conclusion);
        for (const auto& p : r.premises) {
            out.insert(p.conclusion);
            out.insert(p.hypotheses.begin(), p.hypotheses.end());
        }
    }
    return out;
}

int cmp(const AtomicSystem& a, const AtomicSystem& b) {
    if (a.rules.size() != b.rules.size()) return a.rules.size() < b.rules.size() ? -1 : 1;
    for (size_t i = 0; i < a.rules.size(); ++i)
        if (int c = cmp(a.rules[i], b.rules[i])) return c;
    return 0;
}

void validate_closed(const AtomicSystem& s) {
    for (const auto& r : s.rules) {
        auto check = [&](const Atom& a) {
            if (!atom_closed(a))
                throw SyntaxError("rule '" + to_string(r) + "' contains the open atom '" +
                                  to_string(a) + "'");
        };
        check(r.conclusion);
        for (const auto& p : r.premises) {
            check(p.conclusion);
            for (const auto& h : p.hypotheses) check(h);
        }
    }
}

// ---------------------------------------------------------------------------
// Derivability

size_t BaseDerivation::node_count() const {
    size_t n = 1;
    for (const auto& s : subtrees) n += s.node_count();
    return n;
}

std::string to_string(const BaseDerivation& d, int indent) {
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    std::string ctx;
    size_t k = 0;
    for (const auto& a : d.context) ctx += (k++ ? ", " : "") + to_string(a);
    std::string out = pad + "[" + ctx + "] |- " + to_string(d.atom);
    if (d.kind == BaseDerivation::Kind::Ref) {
        out += "   (ref)\n";
    } else {
        out += "   (app " + to_string(*d.rule) + ")\n";
        for (const auto& s : d.subtrees) out += to_string(s, indent + 1);
    }
    return out;
}

bool validate_derivation(const BaseDerivation& d, const AtomicSystem& s) {
    if (d.kind == BaseDerivation::Kind::Ref) return d.context.count(d.atom) > 0;
    if (!d.rule || !s.contains(*d.rule)) return false;
    if (!(d.rule->conclusion == d.atom)) return false;
    if (d.subtrees.size() != d.rule->premises.size()) return false;
    for (size_t i = 0; i < d.subtrees.size(); ++i) {
        const RulePremise& p = d.rule->premises[i];
        const BaseDerivation& sub = d.subtrees[i];
        if (!(sub.atom == p.conclusion)) return false;
        AtomSet want = d.context;
        want.insert(p.hypotheses.begin(), p.hypotheses.end());
        if (sub.context != want) return false;
        if (!validate_derivation(sub, s)) return false;
    }
    return true;
}

namespace {

}  // namespace

// Tabled goal-directed search, iterated to a fixpoint. Within one pass a goal
// hitting an in-progress ancestor counts as false and failures are cached per
// pass; established judgments carry their witness and persist. Passes repeat
// while new judgments keep appearing, so the per-pass cycle cut converges on
// the least fixpoint; failures confirmed by a stable pass are definitive and
// persist too. Hypothesis-free premises are tried first, which keeps
// discharge-carrying rules from spawning extended contexts unless their
// enabling premise actually holds.
struct DerivabilityEngine::Impl {
    using Key = std::pair<AtomSet, Atom>;

    AtomicSystem sys;
    size_t budget;
    size_t visited = 0;
    size_t new_trues = 0;
    std::map<Atom, std::vector<size_t>> by_conclusion;
    std::vector<std::vector<size_t>> premise_order;  // aligned with sys.rules
    std::map<Key, BaseDerivation> true_;
    std::set<Key> definitive_false_;
    std::set<Key> false_;
    std::set<Key> in_progress_;

    Impl(AtomicSystem s, size_t b) : sys(std::move(s)), budget(b) {
        premise_order.resize(sys.rules.size());
        for (size_t i = 0; i < sys.rules.size(); ++i) {
            by_conclusion[sys.rules[i].conclusion].push_back(i);
            auto& order = premise_order[i];
            for (size_t p = 0; p < sys.rules[i].premises.size(); ++p) order.push_back(p);
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b2) {
                return sys.rules[i].premises[a].hypotheses.size() <
                       sys.rules[i].premises[b2].hypotheses.size();
            });
        }
    }

    std::optional<BaseDerivation> run(const AtomSet& ctx, const Atom& goal) {
        while (true) {
            false_.clear();
            new_trues = 0;
            auto r = search(ctx, goal);
            if (r) return r;
            if (new_trues == 0) {
                definitive_false_.insert(false_.begin(), false_.end());
                false_.clear();
                return std::nullopt;
            }
        }
    }

    std::optional<BaseDerivation> search(const AtomSet& ctx, const Atom& goal) {
        if (ctx.count(goal))
            return BaseDerivation{BaseDerivation::Kind::Ref, ctx, goal, std::nullopt, {}};

        Key key{ctx, goal};
        if (auto it = true_.find(key); it != true_.end()) return it->second;
        if (definitive_false_.count(key) || false_.count(key) || in_progress_.count(key))
            return std::nullopt;
        if (++visited > budget)
            throw SyntaxError("derivability search budget exceeded (" + std::to_string(budget) +
                              " judgments)");

        in_progress_.insert(key);
        std::optional<BaseDerivation> found;
        if (auto rit = by_conclusion.find(goal); rit != by_conclusion.end()) {
            for (size_t ri : rit->second) {
                const AtomicRule& r = sys.rules[ri];
                std::vector<BaseDerivation> subs(
                    r.premises.size(),
                    BaseDerivation{BaseDerivation::Kind::Ref, {}, goal, std::nullopt, {}});
                bool ok = true;
                for (size_t pi : premise_order[ri]) {
                    const RulePremise& p = r.premises[pi];
                    AtomSet sub_ctx = ctx;
                    sub_ctx.insert(p.hypotheses.begin(), p.hypotheses.end());
                    auto sub = search(sub_ctx, p.conclusion);
                    if (!sub) {
                        ok = false;
                        break;
                    }
                    subs[pi] = std::move(*sub);
                }
                if (ok) {
                    found = BaseDerivation{BaseDerivation::Kind::App, ctx, goal, r,
                                           std::move(subs)};
                    break;
                }
            }
        }
        in_progress_.erase(key);

        if (found) {
            true_.emplace(key, *found);
            ++new_trues;
            return found;
        }
        false_.insert(key);
        return std::nullopt;
    }
};

DerivabilityEngine::DerivabilityEngine(AtomicSystem s, size_t budget)
    : impl_(std::make_unique<Impl>(std::move(s), budget)) {}
DerivabilityEngine::~DerivabilityEngine() = default;
DerivabilityEngine::DerivabilityEngine(DerivabilityEngine&&) noexcept = default;
DerivabilityEngine& DerivabilityEngine::operator=(DerivabilityEngine&&) noexcept = default;

std::optional<BaseDerivation> DerivabilityEngine::query(const AtomSet& context,
                                                        const Atom& goal) {
    return impl_->run(context, goal);
}

const AtomicSystem& DerivabilityEngine::system() const { return impl_->sys; }

std::optional<BaseDerivation> derives(const AtomicSystem& s, const AtomSet& context,
                                      const Atom& goal, size_t budget) {
    DerivabilityEngine engine(s, budget);
    return engine.query(context, goal);
}

// ---------------------------------------------------------------------------
// Open systems

namespace {

Atom atom_apply(const Atom& a, const std::map<std::string, Term>& theta) {
    Atom out = a;
    for (auto& t : out.args)
        for (const auto& [v, r] : theta) t = term_subst(t, v, r);
    return out;
}

AtomicRule rule_apply(const AtomicRule& r, const std::map<std::string, Term>& theta) {
    std::vector<RulePremise> prems;
    for (const auto& p : r.premises) {
        AtomSet hs;
        for (const auto& h : p.hypotheses) hs.insert(atom_apply(h, theta));
        prems.push_back({std::move(hs), atom_apply(p.conclusion, theta)});
    }
    return AtomicRule::make(std::move(prems), atom_apply(r.conclusion, theta));
}

std::set<std::string> rule_vars(const AtomicRule& r) {
    std::set<std::string> vs = atom_vars(r.conclusion);
    for (const auto& p : r.premises) {
        auto cv = atom_vars(p.conclusion);
        vs.insert(cv.begin(), cv.end());
        for (const auto& h : p.hypotheses) {
            auto hv = atom_vars(h);
            vs.insert(hv.begin(), hv.end());
        }
    }
    return vs;
}

// Enumerates all maps from vars into ct, invoking fn on each.
template <typename Fn>
void for_each_unifier(const std::vector<std::string>& vars, const std::vector<Term>& ct, Fn fn) {
    std::map<std::string, Term> theta;
    std::vector<size_t> idx(vars.size(), 0);
    if (ct.empty() && !vars.empty()) return;
    while (true) {
        for (size_t i = 0; i < vars.size(); ++i) theta[vars[i]] = ct[idx[i]];
        fn(theta);
        size_t k = idx.size();
        while (k > 0 && ++idx[k - 1] == ct.size()) idx[--k] = 0;
        if (k == 0) break;
    }
}

}  // namespace

AtomicSystem close_open_system(const std::vector<OpenAtomicRule>& open_rules,
                               const std::vector<Term>& ct) {
    std::vector<AtomicRule> out;
    for (const auto& r : open_rules) {
        auto vs = rule_vars(r);
        std::vector<std::string> vars(vs.begin(), vs.end());
        for_each_unifier(vars, ct,
                         [&](const std::map<std::string, Term>& theta) {
                             out.push_back(rule_apply(r, theta));
                         });
        if (vars.empty()) out.push_back(r);
    }
    AtomicSystem closed = AtomicSystem::of(std::move(out));
    validate_closed(closed);
    return closed;
}

std::string OpenCorrespondenceReport::to_text() const {
    std::ostringstream out;
    out << "open derivable:   " << (open_derivable ? "yes" : "no") << "\n";
    out << "closed derivable: " << (closed_derivable ? "yes" : "no") << "\n";
    if (!witness.empty()) {
        out << "witness:";
        for (const auto& [v, t] : witness) out << " " << v << " := " << to_string(t);
        out << "\n";
    }
    out << (agree() ? "sides agree" : "MISMATCH") << "\n";
    return out.str();
}

OpenCorrespondenceReport open_correspondence_check(const std::vector<OpenAtomicRule>& open_rules,
                                                   const Atom& goal,
                                                   const std::vector<Term>& ct) {
    OpenCorrespondenceReport rep;
    // Open derivability treats open atoms as inert syntax (no unification in
    // rule application).
    AtomicSystem open_sys = AtomicSystem::of(open_rules);
    rep.open_derivable = derives(open_sys, {}, goal).has_value();

    AtomicSystem closure = close_open_system(open_rules, ct);
    auto gv = atom_vars(goal);
    std::vector<std::string> vars(gv.begin(), gv.end());
    bool found = false;
    for_each_unifier(vars, ct, [&](const std::map<std::string, Term>& theta) {
        if (found) return;
        if (derives(closure, {}, atom_apply(goal, theta))) {
            found = true;
            rep.witness = theta;
        }
    });
    if (vars.empty() && !found) found = derives(closure, {}, goal).has_value();
    rep.closed_derivable = found;
    return rep;
}

// ---------------------------------------------------------------------------
// Base file format

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

}  // namespace

AtomicRule parse_rule(const std::string& line, const Signature& sig) {
    std::string s = trim(line);
    if (s.rfind("{", 0) == 0) {
        // second level: { [h, h] => c ; ... } => conclusion
        size_t close = s.rfind('}');
        if (close == std::string::npos) throw SyntaxError("rule '" + s + "': missing '}'");
        std::string inner = s.substr(1, close - 1);
        std::string rest = trim(s.substr(close + 1));
        if (rest.rfind("=>", 0) != 0)
            throw SyntaxError("rule '" + s + "': expected '=>' after '}'");
        Atom concl = parse_atom(trim(rest.substr(2)), sig);
        std::vector<RulePremise> prems;
        for (const auto& part : split_top(inner, ';')) {
            size_t arrow = part.find("=>");
            if (arrow == std::string::npos)
                throw SyntaxError("rule '" + s + "': premise '" + part + "' missing '=>'");
            std::string hyp = trim(part.substr(0, arrow));
            if (hyp.empty() || hyp.front() != '[' || hyp.back() != ']')
                throw SyntaxError("rule '" + s + "': premise hypotheses need brackets");
            AtomSet hs;
            std::string hyplist = hyp.substr(1, hyp.size() - 2);
            for (const auto& h : split_top(hyplist, ','))
                if (!h.empty()) hs.insert(parse_atom(h, sig));
            prems.push_back({std::move(hs), parse_atom(trim(part.substr(arrow + 2)), sig)});
        }
        return AtomicRule::make(std::move(prems), std::move(concl));
    }
    size_t arrow = s.find("=>");
    if (arrow == std::string::npos) throw SyntaxError("rule '" + s + "': missing '=>'");
    Atom concl = parse_atom(trim(s.substr(arrow + 2)), sig);
    std::vector<RulePremise> prems;
    std::string lhs = trim(s.substr(0, arrow));
    if (!lhs.empty())
        for (const auto& part : split_top(lhs, ','))
            prems.push_back({{}, parse_atom(part, sig)});
    return AtomicRule::make(std::move(prems), std::move(concl));
}

AtomicSystem parse_base(const std::string& text, const Signature& sig) {
    std::vector<AtomicRule> rules;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            rules.push_back(parse_rule(line, sig));
        } catch (const SyntaxError& e) {
            throw SyntaxError("base line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return AtomicSystem::of(std::move(rules));
}

std::string base_to_string(const AtomicSystem& s) {
    std::string out;
    for (const auto& r : s.rules) out += to_string(r) + "\n";
    return out;
}

}  // namespace bes
