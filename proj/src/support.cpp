#include "bes/support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bes {

Basis::Basis(std::vector<AtomicSystem> bases, std::vector<Atom> universe, std::vector<Term> ct)
    : bases_(std::move(bases)), universe_(std::move(universe)), ct_(std::move(ct)) {
    if (bases_.empty()) throw SyntaxError("a basis needs at least one atomic system");
    std::sort(bases_.begin(), bases_.end());
    bases_.erase(std::unique(bases_.begin(), bases_.end()), bases_.end());
    for (const auto& b : bases_) validate_closed(b);

    // atoms mentioned by any member join the universe
    std::set<Atom> uni(universe_.begin(), universe_.end());
    for (const auto& b : bases_)
        for (const auto& a : b.atoms()) uni.insert(a);
    universe_.assign(uni.begin(), uni.end());

    ext_.resize(bases_.size());
    for (size_t i = 0; i < bases_.size(); ++i)
        for (size_t j = 0; j < bases_.size(); ++j)
            if (bases_[i].subset_of(bases_[j])) ext_[i].push_back(j);

    // verify closure properties
    zero_level_complete_ = true;
    for (const auto& b : bases_) {
        for (const auto& q : universe_) {
            AtomicSystem bq = b.union_with(AtomicSystem::of({AtomicRule::fact(q)}));
            if (!std::binary_search(bases_.begin(), bases_.end(), bq)) {
                zero_level_complete_ = false;
                break;
            }
        }
        if (!zero_level_complete_) break;
    }
    union_closed_ = true;
    for (size_t i = 0; i < bases_.size() && union_closed_; ++i)
        for (size_t j = i + 1; j < bases_.size(); ++j) {
            AtomicSystem u = bases_[i].union_with(bases_[j]);
            if (!std::binary_search(bases_.begin(), bases_.end(), u)) {
                union_closed_ = false;
                break;
            }
        }
}

size_t Basis::index_of(const AtomicSystem& b) const {
    auto it = std::lower_bound(bases_.begin(), bases_.end(), b);
    if (it == bases_.end() || !(*it == b))
        throw SyntaxError("atomic system is not a member of the basis");
    return static_cast<size_t>(it - bases_.begin());
}

const std::vector<size_t>& Basis::extensions_of(size_t base_index) const {
    return ext_.at(base_index);
}

Basis powerset_basis(const AtomicSystem& pool, std::vector<Atom> universe, std::vector<Term> ct) {
    size_t n = pool.rules.size();
    if (n > 20) throw SyntaxError("powerset basis pool too large");
    std::vector<AtomicSystem> bases;
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
        std::vector<AtomicRule> rs;
        for (size_t i = 0; i < n; ++i)
            if (mask & (size_t{1} << i)) rs.push_back(pool.rules[i]);
        bases.push_back(AtomicSystem::of(std::move(rs)));
    }
    return Basis(std::move(bases), std::move(universe), std::move(ct));
}

Basis zero_complete_basis(std::vector<AtomicSystem> seeds, std::vector<Atom> universe,
                          std::vector<Term> ct) {
    std::set<Atom> uni(universe.begin(), universe.end());
    for (const auto& b : seeds)
        for (const auto& a : b.atoms()) uni.insert(a);

    std::set<AtomicSystem> all(seeds.begin(), seeds.end());
    std::vector<AtomicSystem> work(seeds.begin(), seeds.end());
    while (!work.empty()) {
        AtomicSystem b = work.back();
        work.pop_back();
        for (const auto& q : uni) {
            AtomicSystem bq = b.union_with(AtomicSystem::of({AtomicRule::fact(q)}));
            if (all.insert(bq).second) work.push_back(bq);
        }
    }
    return Basis(std::vector<AtomicSystem>(all.begin(), all.end()),
                 std::vector<Atom>(uni.begin(), uni.end()), std::move(ct));
}

std::vector<AtomicSystem> extensions(const Basis& basis, const AtomicSystem& base) {
    size_t i = basis.index_of(base);
    std::vector<AtomicSystem> out;
    for (size_t j : basis.extensions_of(i)) out.push_back(basis.bases()[j]);
    return out;
}

// ---------------------------------------------------------------------------
// Support evaluation

bool SupportEvaluator::atom_supported(size_t base_index, const Atom& a) {
    auto it = engines_.find(base_index);
    if (it == engines_.end())
        it = engines_.emplace(base_index, DerivabilityEngine(basis_.bases()[base_index])).first;
    return it->second.query({}, a).has_value();
}

bool SupportEvaluator::supports(size_t base_index, const FormulaPtr& goal) {
    FormulaPtr g = goal;
    if (!closed(g)) g = universal_closure(g);  // (wff)

    std::pair<size_t, std::string> key{base_index, to_string(g)};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    bool result = false;
    switch (g->kind) {
        case Formula::Kind::Atom:
            result = atom_supported(base_index, Atom{g->name, g->args});
            break;
        case Formula::Kind::Falsum: {
            result = true;
            for (const auto& p : basis_.universe())
                if (!atom_supported(base_index, p)) {
                    result = false;
                    break;
                }
            break;
        }
        case Formula::Kind::And:
            result = supports(base_index, g->lhs) && supports(base_index, g->rhs);
            break;
        case Formula::Kind::Implies:
            result = supports(base_index, std::vector<FormulaPtr>{g->lhs}, g->rhs);
            break;
        case Formula::Kind::Forall: {
            result = true;
            for (const auto& t : basis_.closed_term_universe())
                if (!supports(base_index, substitute(g->lhs, g->name, t))) {
                    result = false;
                    break;
                }
            break;
        }
        case Formula::Kind::Or: {
            result = true;
            for (size_t c : basis_.extensions_of(base_index)) {
                for (const auto& p : basis_.universe()) {
                    FormulaPtr pa = Formula::atom(p.pred, p.args);
                    bool left = supports(c, std::vector<FormulaPtr>{g->lhs}, pa);
                    bool right = supports(c, std::vector<FormulaPtr>{g->rhs}, pa);
                    if (left && right && !supports(c, pa)) {
                        result = false;
                        break;
                    }
                }
                if (!result) break;
            }
            break;
        }
        case Formula::Kind::Exists: {
            result = true;
            for (size_t c : basis_.extensions_of(base_index)) {
                for (const auto& p : basis_.universe()) {
                    FormulaPtr pa = Formula::atom(p.pred, p.args);
                    bool all_insts = true;
                    for (const auto& t : basis_.closed_term_universe()) {
                        FormulaPtr inst = substitute(g->lhs, g->name, t);
                        if (!supports(c, std::vector<FormulaPtr>{inst}, pa)) {
                            all_insts = false;
                            break;
                        }
                    }
                    if (all_insts && !supports(c, pa)) {
                        result = false;
                        break;
                    }
                }
                if (!result) break;
            }
            break;
        }
    }
    memo_[key] = result;
    return result;
}

bool SupportEvaluator::supports(size_t base_index, const std::vector<FormulaPtr>& context,
                                const FormulaPtr& goal) {
    if (context.empty()) return supports(base_index, goal);
    // (Inf)
    for (size_t c : basis_.extensions_of(base_index)) {
        bool all = true;
        for (const auto& f : context)
            if (!supports(c, f)) {
                all = false;
                break;
            }
        if (all && !supports(c, goal)) return false;
    }
    return true;
}

bool SupportEvaluator::supports_valid(const std::vector<FormulaPtr>& context,
                                      const FormulaPtr& goal) {
    for (size_t i = 0; i < basis_.bases().size(); ++i)
        if (!supports(i, context, goal)) return false;
    return true;
}

bool supports(const SupportQuery& q) {
    SupportEvaluator ev(*q.basis);
    return ev.supports(q.base_index, q.context, q.goal);
}

// ---------------------------------------------------------------------------
// Harnesses

std::string MonotonicityReport::to_text() const {
    std::ostringstream out;
    out << "monotonicity: " << checked << " instance(s) checked, " << violations.size()
        << " violation(s)\n";
    for (const auto& v : violations)
        out << "  base " << v.base_index << " supports '" << to_string(v.formula)
            << "' but extension " << v.ext_index << " does not\n";
    return out.str();
}

MonotonicityReport check_monotonicity(const Basis& basis, const std::vector<FormulaPtr>& sample) {
    MonotonicityReport rep;
    SupportEvaluator ev(basis);
    for (const auto& f : sample) {
        for (size_t b = 0; b < basis.bases().size(); ++b) {
            if (!ev.supports(b, f)) continue;
            for (size_t c : basis.extensions_of(b)) {
                ++rep.checked;
                if (!ev.supports(c, f)) rep.violations.push_back({b, c, f});
            }
        }
    }
    return rep;
}

std::string AtomicCutReport::to_text() const {
    std::ostringstream out;
    out << "atomic cut: " << checked << " base(s) checked, " << mismatches.size()
        << " mismatch(es)\n";
    for (const auto& m : mismatches)
        out << "  base " << m.base_index << ": lhs=" << m.lhs << " rhs=" << m.rhs << "\n";
    return out.str();
}

AtomicCutReport check_atomic_cut(const Basis& basis, const AtomSet& q_atoms,
                                 const AtomSet& p_atoms, const Atom& goal) {
    if (!basis.zero_level_complete())
        throw SyntaxError("atomic-cut check needs a zero-level-complete basis");
    AtomicCutReport rep;
    std::vector<DerivabilityEngine> engines;
    engines.reserve(basis.bases().size());
    for (const auto& b : basis.bases()) engines.emplace_back(b);
    for (size_t b = 0; b < basis.bases().size(); ++b) {
        ++rep.checked;
        AtomSet joint = q_atoms;
        joint.insert(p_atoms.begin(), p_atoms.end());
        bool lhs = engines[b].query(joint, goal).has_value();
        bool rhs = true;
        for (size_t x : basis.extensions_of(b)) {
            bool all_q = true;
            for (const auto& q : q_atoms)
                if (!engines[x].query({}, q)) {
                    all_q = false;
                    break;
                }
            if (all_q && !engines[x].query(p_atoms, goal)) {
                rhs = false;
                break;
            }
        }
        if (lhs != rhs) rep.mismatches.push_back({b, lhs, rhs});
    }
    return rep;
}

AtCompReport check_atomic_completeness(const Basis& basis, const AtomSet& context,
                                       const Atom& goal) {
    AtCompReport rep;
    SupportEvaluator ev(basis);
    std::vector<FormulaPtr> ctx;
    for (const auto& a : context) ctx.push_back(Formula::atom(a.pred, a.args));
    FormulaPtr g = Formula::atom(goal.pred, goal.args);
    std::vector<DerivabilityEngine> engines;
    engines.reserve(basis.bases().size());
    for (const auto& b : basis.bases()) engines.emplace_back(b);
    for (size_t b = 0; b < basis.bases().size(); ++b) {
        ++rep.checked;
        bool sup = ev.supports(b, ctx, g);
        bool der = engines[b].query(context, goal).has_value();
        if (sup != der) ++rep.mismatches;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Basis file format

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string read_file_rel(const std::string& base_path, const std::string& rel) {
    std::string dir;
    auto slash = base_path.find_last_of('/');
    if (slash != std::string::npos) dir = base_path.substr(0, slash + 1);
    std::string path = rel.front() == '/' ? rel : dir + rel;
    std::ifstream in(path);
    if (!in) throw SyntaxError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Basis parse_basis_file(const std::string& path, const Signature& sig) {
    std::ifstream in(path);
    if (!in) throw SyntaxError("cannot read basis file '" + path + "'");
    std::vector<AtomicSystem> listed;
    std::optional<AtomicSystem> pool;
    bool want_powerset = false, want_union = false;
    std::vector<Atom> universe;
    std::vector<Atom> zero_atoms;
    bool want_zero = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto fail = [&](const std::string& m) {
            throw SyntaxError("basis file line " + std::to_string(lineno) + ": " + m);
        };
        if (line.rfind("universe", 0) == 0) {
            std::istringstream as(line.substr(8));
            std::string part;
            while (std::getline(as, part, ',')) {
                part = trim(part);
                if (!part.empty()) universe.push_back(parse_atom(part, sig));
            }
        } else if (line.rfind("base ", 0) == 0) {
            listed.push_back(parse_base(read_file_rel(path, trim(line.substr(5))), sig));
        } else if (line.rfind("pool ", 0) == 0) {
            pool = parse_base(read_file_rel(path, trim(line.substr(5))), sig);
        } else if (line == "powerset-of-pool") {
            want_powerset = true;
        } else if (line == "union-closed") {
            want_union = true;
        } else if (line.rfind("zero-complete over", 0) == 0) {
            want_zero = true;
            std::istringstream as(line.substr(18));
            std::string part;
            while (std::getline(as, part, ',')) {
                part = trim(part);
                if (!part.empty()) zero_atoms.push_back(parse_atom(part, sig));
            }
        } else {
            fail("unknown directive '" + line + "'");
        }
    }

    std::vector<AtomicSystem> bases = listed;
    if (want_powerset) {
        if (!pool) throw SyntaxError("powerset-of-pool needs a 'pool <file>' directive");
        size_t n = pool->rules.size();
        if (n > 20) throw SyntaxError("powerset pool too large");
        for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
            std::vector<AtomicRule> rs;
            for (size_t i = 0; i < n; ++i)
                if (mask & (size_t{1} << i)) rs.push_back(pool->rules[i]);
            bases.push_back(AtomicSystem::of(std::move(rs)));
        }
    }
    if (bases.empty()) bases.push_back(AtomicSystem::of({}));

    std::vector<Term> ct;
    try {
        ct = closed_terms(sig);
    } catch (const SyntaxError&) {
        // quantifier-free use: empty closed-term universe
    }

    if (want_zero) {
        std::vector<Atom> uni = universe;
        uni.insert(uni.end(), zero_atoms.begin(), zero_atoms.end());
        return zero_complete_basis(std::move(bases), std::move(uni), std::move(ct));
    }
    if (want_union) {
        std::set<AtomicSystem> all(bases.begin(), bases.end());
        bool grew = true;
        while (grew) {
            grew = false;
            std::vector<AtomicSystem> cur(all.begin(), all.end());
            for (size_t i = 0; i < cur.size(); ++i)
                for (size_t j = i + 1; j < cur.size(); ++j)
                    if (all.insert(cur[i].union_with(cur[j])).second) grew = true;
        }
        bases.assign(all.begin(), all.end());
    }
    return Basis(std::move(bases), std::move(universe), std::move(ct));
}

}  // namespace bes
