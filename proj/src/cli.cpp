#include "bes/cli.hpp"

#include <CLI11.hpp>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "bes/hilbert.hpp"
#include "bes/simulation.hpp"
#include "bes/support.hpp"

namespace bes {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SyntaxError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Builds a signature from the ground atoms of a base file: outermost heads
// become predicates, inner heads functions, leaves constants.
Signature infer_signature_from_base(const std::string& text) {
    Signature sig;
    auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t i = 0;
        while (i < line.size()) {
            if (!std::isalpha(static_cast<unsigned char>(line[i])) && line[i] != '_') {
                ++i;
                continue;
            }
            size_t start = i;
            while (i < line.size() && is_ident(line[i])) ++i;
            std::string head = line.substr(start, i - start);
            // the whole atom: head plus a balanced argument list if present
            std::string atom = head;
            if (i < line.size() && line[i] == '(') {
                int depth = 0;
                size_t j = i;
                do {
                    if (line[j] == '(') ++depth;
                    if (line[j] == ')') --depth;
                    ++j;
                } while (j < line.size() && depth > 0);
                atom += line.substr(i, j - i);
                i = j;
            }
            // parse the atom generically, declaring symbols as encountered
            struct Mini {
                const std::string& s;
                size_t p = 0;
                Signature& sig;
                bool outer = true;
                void skip() {
                    while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
                }
                void term() {
                    skip();
                    size_t st = p;
                    while (p < s.size() &&
                           (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '_'))
                        ++p;
                    std::string name = s.substr(st, p - st);
                    skip();
                    if (p < s.size() && s[p] == '(') {
                        ++p;
                        int arity = 0;
                        while (true) {
                            term();
                            ++arity;
                            skip();
                            if (p < s.size() && s[p] == ',') {
                                ++p;
                                continue;
                            }
                            break;
                        }
                        if (p < s.size() && s[p] == ')') ++p;
                        if (!sig.is_function(name)) sig.functions[name] = arity;
                    } else {
                        if (!sig.is_constant(name) && !sig.is_function(name))
                            sig.constants.push_back(name);
                    }
                }
                void atom() {
                    skip();
                    size_t st = p;
                    while (p < s.size() &&
                           (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '_'))
                        ++p;
                    std::string name = s.substr(st, p - st);
                    int arity = 0;
                    skip();
                    if (p < s.size() && s[p] == '(') {
                        ++p;
                        while (true) {
                            term();
                            ++arity;
                            skip();
                            if (p < s.size() && s[p] == ',') {
                                ++p;
                                continue;
                            }
                            break;
                        }
                        if (p < s.size() && s[p] == ')') ++p;
                    }
                    if (!sig.is_predicate(name)) sig.predicates[name] = arity;
                }
            };
            Mini m{atom, 0, sig};
            m.atom();
        }
    }
    // functions shadow accidental constant entries
    std::vector<std::string> keep;
    for (const auto& c : sig.constants)
        if (!sig.is_function(c) && !sig.is_predicate(c)) keep.push_back(c);
    sig.constants = keep;
    sig.validate();
    return sig;
}

std::vector<FormulaPtr> parse_formula_list(const std::string& text, const Signature& sig) {
    std::vector<FormulaPtr> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ';')) {
        size_t a = part.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        out.push_back(parse_formula(part, sig));
    }
    return out;
}

AtomSet parse_atom_list(const std::string& text, const Signature& sig) {
    AtomSet out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        size_t a = part.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        out.insert(parse_atom(part, sig));
    }
    return out;
}

// ---------------------------------------------------------------------------
// props: the property harnesses, seeded and reproducible

FormulaPtr random_formula(std::mt19937_64& rng, const std::vector<FormulaPtr>& atoms,
                          int max_weight) {
    std::uniform_int_distribution<int> pick(0, 5);
    if (max_weight <= 0) {
        std::uniform_int_distribution<size_t> ai(0, atoms.size() - 1);
        return atoms[ai(rng)];
    }
    switch (pick(rng)) {
        case 0: {
            std::uniform_int_distribution<size_t> ai(0, atoms.size() - 1);
            return atoms[ai(rng)];
        }
        case 1:
            return Formula::falsum();
        case 2:
            return Formula::conj(random_formula(rng, atoms, max_weight - 1),
                                 random_formula(rng, atoms, max_weight - 1));
        case 3:
            return Formula::disj(random_formula(rng, atoms, max_weight - 1),
                                 random_formula(rng, atoms, max_weight - 1));
        default:
            return Formula::impl(random_formula(rng, atoms, max_weight - 1),
                                 random_formula(rng, atoms, max_weight - 1));
    }
}

int run_props(uint64_t seed, int depth, int n_atoms, std::ostream& out) {
    out << "seed: " << seed << ", depth: " << depth << ", atoms: " << n_atoms << "\n";
    std::mt19937_64 rng(seed);
    bool all_ok = true;

    std::string sig_text = "const c\n";
    std::vector<FormulaPtr> atoms;
    std::vector<Atom> atom_pool;
    for (int i = 0; i < n_atoms; ++i) {
        std::string name = i == 0 ? "p" : (i == 1 ? "q" : (i == 2 ? "r" : "a" + std::to_string(i)));
        sig_text += "pred " + name + "/0\n";
        atoms.push_back(Formula::atom(name));
        atom_pool.push_back(Atom::prop(name));
    }
    Signature sig = parse_signature(sig_text);
    Atom p = atom_pool[0], q = atom_pool[std::min<size_t>(1, atom_pool.size() - 1)],
         r = atom_pool[std::min<size_t>(2, atom_pool.size() - 1)];

    // monotonicity over the powerset of a small mixed pool
    {
        AtomicSystem pool = AtomicSystem::of({
            AtomicRule::fact(p),
            AtomicRule::make({{{}, p}}, q),
            AtomicRule::make({{{p}, q}}, r),
            AtomicRule::fact(r),
        });
        Basis basis = powerset_basis(pool, atom_pool, closed_terms(sig));
        std::vector<FormulaPtr> sample;
        for (int i = 0; i < 40; ++i) sample.push_back(random_formula(rng, atoms, depth));
        MonotonicityReport rep = check_monotonicity(basis, sample);
        out << rep.to_text();
        all_ok = all_ok && rep.ok();
    }

    // atomic completeness and atomic cut over a zero-level-complete basis
    {
        Basis basis = zero_complete_basis(
            {AtomicSystem::of({AtomicRule::make({{{}, p}}, q)})}, atom_pool, closed_terms(sig));
        size_t mism = 0, checked = 0;
        std::vector<AtomSet> contexts = {{}, {p}, {q}, {p, q}, {p, r}};
        for (const auto& ctx : contexts)
            for (const auto& g : {p, q, r}) {
                AtCompReport rep = check_atomic_completeness(basis, ctx, g);
                checked += rep.checked;
                mism += rep.mismatches;
            }
        out << "atomic completeness: " << checked << " instance(s) checked, " << mism
            << " mismatch(es)\n";
        all_ok = all_ok && mism == 0;

        AtomicCutReport cut = check_atomic_cut(basis, {q}, {p}, r);
        out << cut.to_text();
        all_ok = all_ok && cut.ok();
    }

    // flat clause checks on two small sequents
    {
        Signature fsig = parse_signature("const c\nconst d\npred p/0\npred q/0\npred P/1\n");
        struct Case {
            const char* goal;
            Variant variant;
        };
        std::vector<Case> cases = {
            {"(p & q) -> (q & p)", Variant::J},
            {"p -> (q -> p)", Variant::K},
            {"forall x P(x) -> P(c)", Variant::K},
        };
        for (const auto& c : cases) {
            FormulaPtr g = parse_formula(c.goal, fsig);
            ClauseCheckResult res = check_flat_clauses({}, g, fsig, c.variant, 40, 4);
            out << "clause checks for '" << c.goal << "' (variant " << to_string(c.variant)
                << "):\n"
                << res.to_text();
            all_ok = all_ok && res.ok();
        }
    }

    out << (all_ok ? "props: PASS" : "props: FAIL") << "\n";
    return all_ok ? 0 : 1;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"base-extension semantics workbench"};
    app.require_subcommand(1);

    std::string sig_path, base_path, basis_path, proof_path, goal_text, context_text;
    std::string formula_text, variant_text = "K";
    uint64_t seed = 1;
    int base_index = 0;
    int prop_depth = 3, prop_atoms = 3;
    bool valid_everywhere = false, allow_and = false;

    auto* cmd_parse = app.add_subcommand("parse", "parse a formula and echo it normalized");
    cmd_parse->add_option("--sig", sig_path, "signature file")->required();
    cmd_parse->add_option("formula", formula_text, "formula text")->required();

    auto* cmd_check = app.add_subcommand("check-proof", "check a proof file");
    cmd_check->add_option("--sig", sig_path, "signature file")->required();
    cmd_check->add_option("proof", proof_path, "proof file")->required();

    auto* cmd_derive = app.add_subcommand("derive", "decide derivability in an atomic system");
    cmd_derive->add_option("--sig", sig_path, "signature file (inferred from the base if omitted)");
    cmd_derive->add_option("--base", base_path, "base file")->required();
    cmd_derive->add_option("--context", context_text, "comma-separated atoms");
    cmd_derive->add_option("--goal", goal_text, "goal atom")->required();

    auto* cmd_support = app.add_subcommand("support", "evaluate a support judgment over a basis");
    cmd_support->add_option("--sig", sig_path, "signature file")->required();
    cmd_support->add_option("--basis", basis_path, "basis file")->required();
    cmd_support->add_option("--base", base_index, "index of the base to evaluate at (default 0)");
    cmd_support->add_option("--context", context_text, "semicolon-separated formulas");
    cmd_support->add_option("--goal", goal_text, "goal formula")->required();
    cmd_support->add_flag("--valid", valid_everywhere, "quantify over every base of the basis");

    auto* cmd_sim = app.add_subcommand("simulate", "flatten a proof into a base derivation");
    cmd_sim->add_option("--sig", sig_path, "signature file")->required();
    cmd_sim->add_option("--variant", variant_text, "K or J");
    cmd_sim->add_option("--proof", proof_path, "proof file")->required();

    auto* cmd_extract = app.add_subcommand(
        "extract", "search the natural base and compile the derivation to a proof");
    cmd_extract->add_option("--sig", sig_path, "signature file")->required();
    cmd_extract->add_option("--variant", variant_text, "K or J");
    cmd_extract->add_option("--goal", goal_text, "goal formula")->required();
    cmd_extract->add_option("--context", context_text, "semicolon-separated formulas");
    cmd_extract->add_flag("--allow-and", allow_and, "admit conjunction in the classical fragment");

    auto* cmd_round = app.add_subcommand("roundtrip",
                                         "simulate (or search) then extract and re-check");
    cmd_round->add_option("--sig", sig_path, "signature file")->required();
    cmd_round->add_option("--variant", variant_text, "K or J");
    cmd_round->add_option("--goal", goal_text, "goal formula")->required();
    cmd_round->add_option("--context", context_text, "semicolon-separated formulas");
    cmd_round->add_option("--proof", proof_path, "source proof file (searched when omitted)");
    cmd_round->add_flag("--allow-and", allow_and, "admit conjunction in the classical fragment");

    auto* cmd_props = app.add_subcommand("props", "run the property harnesses");
    cmd_props->add_option("--seed", seed, "random seed (printed in the report)");
    cmd_props->add_option("--depth", prop_depth, "maximum depth of sampled formulas");
    cmd_props->add_option("--atoms", prop_atoms, "number of nullary atoms in the pools");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*cmd_parse) {
            Signature sig = parse_signature(slurp(sig_path));
            out << to_string(parse_formula(formula_text, sig)) << "\n";
            return 0;
        }
        if (*cmd_check) {
            Signature sig = parse_signature(slurp(sig_path));
            ParsedProof pp = parse_proof(slurp(proof_path), sig);
            CheckResult res = check_proof(pp.proof, pp.system);
            out << res.summary() << "\n";
            return res.ok ? 0 : 1;
        }
        if (*cmd_derive) {
            std::string base_text = slurp(base_path);
            Signature sig = sig_path.empty() ? infer_signature_from_base(base_text)
                                             : parse_signature(slurp(sig_path));
            AtomicSystem base = parse_base(base_text, sig);
            validate_closed(base);
            AtomSet ctx =
                context_text.empty() ? AtomSet{} : parse_atom_list(context_text, sig);
            Atom goal = parse_atom(goal_text, sig);
            auto w = derives(base, ctx, goal);
            if (w) {
                out << "derivable\n" << to_string(*w);
                return 0;
            }
            out << "not derivable\n";
            return 1;
        }
        if (*cmd_support) {
            Signature sig = parse_signature(slurp(sig_path));
            Basis basis = parse_basis_file(basis_path, sig);
            std::vector<FormulaPtr> ctx =
                context_text.empty() ? std::vector<FormulaPtr>{}
                                     : parse_formula_list(context_text, sig);
            FormulaPtr goal = parse_formula(goal_text, sig);
            SupportEvaluator ev(basis);
            bool res;
            if (valid_everywhere) {
                res = ev.supports_valid(ctx, goal);
                out << (res ? "supported in every base" : "not supported in some base") << "\n";
            } else {
                if (base_index < 0 || static_cast<size_t>(base_index) >= basis.bases().size())
                    throw SyntaxError("base index out of range");
                res = ev.supports(static_cast<size_t>(base_index), ctx, goal);
                out << (res ? "supported" : "not supported") << "\n";
            }
            return res ? 0 : 1;
        }
        if (*cmd_sim || *cmd_extract || *cmd_round) {
            Signature sig = parse_signature(slurp(sig_path));
            PipelineOptions popts;
            if (variant_text == "K")
                popts.variant = Variant::K;
            else if (variant_text == "J")
                popts.variant = Variant::J;
            else
                throw SyntaxError("variant must be K or J");
            popts.base.and_in_k = allow_and;

            if (*cmd_sim) {
                ParsedProof pp = parse_proof(slurp(proof_path), sig);
                FormulaPtr goal = pp.proof.conclusion();
                FlatMap fm = make_flat_map(pp.proof.context, goal, sig);
                NaturalBase nb = build_natural_base(fm, popts.variant, popts.base);
                BaseDerivation d = simulate_hilbert(pp.proof, fm, nb);
                out << "== BASE ==\n" << nb.stats() << "\n== DERIVATION ==\n" << to_string(d);
                return 0;
            }

            std::vector<FormulaPtr> ctx =
                context_text.empty() ? std::vector<FormulaPtr>{}
                                     : parse_formula_list(context_text, sig);
            std::optional<ParsedProof> pp;
            if (*cmd_round && !proof_path.empty()) {
                pp = parse_proof(slurp(proof_path), sig);
                if (ctx.empty()) ctx = pp->proof.context;
            }
            FormulaPtr goal = parse_formula(goal_text, sig);
            PipelineResult res = completeness_pipeline(ctx, goal, sig, popts,
                                                       pp ? &pp->proof : nullptr);
            out << res.transcript;
            return res.ok ? 0 : 1;
        }
        if (*cmd_props) {
            if (prop_atoms < 1 || prop_atoms > 8) throw SyntaxError("--atoms must be 1..8");
            if (prop_depth < 0 || prop_depth > 6) throw SyntaxError("--depth must be 0..6");
            return run_props(seed, prop_depth, prop_atoms, out);
        }
    } catch (const SyntaxError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SimulationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ElaborationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
    err << "no command executed\n";
    return 2;
}

}  // namespace bes
