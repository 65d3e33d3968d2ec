#include <sstream>

#include "bes/hilbert.hpp"

namespace bes {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Splits on top-level commas (no splitting inside parentheses).
std::vector<std::string> split_args(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

std::string just_to_string(const Justification& j) {
    switch (j.kind) {
        case Justification::Kind::Hypothesis:
            return "hyp";
        case Justification::Kind::ModusPonens:
            return "mp(" + std::to_string(j.from) + ", " + std::to_string(j.from_impl) + ")";
        case Justification::Kind::Generalization:
            return "gen(" + std::to_string(j.from) + ", " + j.var + ")";
        case Justification::Kind::ExistentialInstantiation:
            return "exi(" + std::to_string(j.from) + ", " + j.var + ")";
        case Justification::Kind::Axiom: {
            std::string s = "axiom(" + to_string(j.scheme);
            for (const auto& [k, f] : j.inst.formulas) s += ", " + k + " := " + to_string(f);
            for (const auto& [k, v] : j.inst.vars) s += ", " + k + " := " + v;
            for (const auto& [k, t] : j.inst.terms) s += ", " + k + " := " + to_string(t);
            s += ")";
            return s;
        }
    }
    return "?";
}

}  // namespace

std::string proof_to_string(const HilbertProof& pf, SystemId sys) {
    std::ostringstream out;
    out << "system " << to_string(sys) << "\n";
    if (!pf.context.empty()) {
        out << "context:";
        for (size_t i = 0; i < pf.context.size(); ++i)
            out << (i ? "; " : " ") << to_string(pf.context[i]);
        out << "\n";
    }
    for (const auto& line : pf.lines)
        out << line.index << ". " << to_string(line.formula) << " by " << just_to_string(line.just)
            << "\n";
    return out.str();
}

ParsedProof parse_proof(const std::string& text, const Signature& sig) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& m) -> void {
        throw SyntaxError("proof line " + std::to_string(lineno) + ": " + m);
    };

    ParsedProof out{SystemId::C, {}};
    bool have_system = false;
    std::vector<Term> ct;
    try {
        ct = closed_terms(sig);
    } catch (const SyntaxError&) {
        // signatures without constants still support proofs; matching then
        // draws witnesses from the formula's own subterms
    }

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (!have_system) {
            std::istringstream ls(line);
            std::string kw, name;
            ls >> kw >> name;
            if (kw != "system" || (name != "C" && name != "I"))
                fail("expected 'system C' or 'system I'");
            out.system = name == "C" ? SystemId::C : SystemId::I;
            have_system = true;
            continue;
        }
        if (line.rfind("context:", 0) == 0) {
            std::string rest = trim(line.substr(8));
            if (rest.empty()) continue;
            std::istringstream cs(rest);
            std::string part;
            while (std::getline(cs, part, ';')) {
                part = trim(part);
                if (!part.empty()) out.proof.context.push_back(parse_formula(part, sig));
            }
            continue;
        }

        // n. FORMULA by JUSTIFICATION
        size_t dot = line.find('.');
        if (dot == std::string::npos) fail("expected 'N. FORMULA by JUSTIFICATION'");
        size_t index = 0;
        try {
            index = static_cast<size_t>(std::stoul(trim(line.substr(0, dot))));
        } catch (...) {
            fail("bad line number '" + trim(line.substr(0, dot)) + "'");
        }
        std::string rest = line.substr(dot + 1);
        size_t by = rest.rfind(" by ");
        if (by == std::string::npos) fail("missing ' by ' separator");
        FormulaPtr f = parse_formula(trim(rest.substr(0, by)), sig);
        std::string just = trim(rest.substr(by + 4));

        Justification j = Justification::hyp();
        if (just == "hyp") {
            j = Justification::hyp();
        } else if (just.rfind("mp(", 0) == 0 && just.back() == ')') {
            auto args = split_args(just.substr(3, just.size() - 4));
            if (args.size() != 2) fail("mp takes two line numbers");
            j = Justification::mp(std::stoul(args[0]), std::stoul(args[1]));
        } else if ((just.rfind("gen(", 0) == 0 || just.rfind("exi(", 0) == 0) &&
                   just.back() == ')') {
            auto args = split_args(just.substr(4, just.size() - 5));
            if (args.size() != 2) fail("expected (line, variable)");
            size_t from = std::stoul(args[0]);
            j = just[0] == 'g' ? Justification::gen(from, args[1])
                               : Justification::exi(from, args[1]);
        } else if (just.rfind("axiom(", 0) == 0 && just.back() == ')') {
            auto args = split_args(just.substr(6, just.size() - 7));
            if (args.empty()) fail("axiom needs a scheme name");
            auto id = scheme_id_from_string(args[0]);
            if (!id) fail("unknown axiom scheme '" + args[0] + "'");
            Instantiation iota;
            bool explicit_bindings = args.size() > 1;
            std::set<std::string> mvs = scheme_metavars(scheme_of(*id));
            for (size_t i = 1; i < args.size(); ++i) {
                size_t sep = args[i].find(":=");
                if (sep == std::string::npos) fail("expected 'NAME := VALUE' in axiom binding");
                std::string key = trim(args[i].substr(0, sep));
                std::string val = trim(args[i].substr(sep + 2));
                if (mvs.count(key)) {
                    iota.formulas[key] = parse_formula(val, sig);
                } else if (key == "x") {
                    iota.vars["x"] = val;
                } else if (key == "t") {
                    iota.terms["t"] = parse_term(val, sig);
                } else {
                    fail("unknown binding '" + key + "' for scheme " + args[0]);
                }
            }
            if (explicit_bindings) {
                j = Justification::axiom(*id, std::move(iota));
            } else {
                auto m = match_scheme(f, *id, ct);
                if (!m)
                    fail("formula is not an instance of scheme " + args[0] +
                         " (no witnessing instantiation found)");
                j = Justification::axiom(*id, std::move(m->inst));
            }
        } else {
            fail("unknown justification '" + just + "'");
        }
        out.proof.lines.push_back({index, f, std::move(j)});
    }
    if (!have_system) throw SyntaxError("proof file missing 'system C|I' header");
    if (out.proof.lines.empty()) throw SyntaxError("proof file has no lines");
    return out;
}

}  // namespace bes
