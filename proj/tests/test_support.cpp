#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "bes/support.hpp"
#include "testutil.hpp"

using namespace bes;

namespace {

Signature prop_sig() { return parse_signature("const c\npred p/0\npred q/0\npred r/0\n"); }

FormulaPtr parse(const std::string& s) { return parse_formula(s, prop_sig()); }

Atom prop(const std::string& n) { return Atom::prop(n); }

AtomicSystem facts(std::initializer_list<std::string> names) {
    std::vector<AtomicRule> rs;
    for (const auto& n : names) rs.push_back(AtomicRule::fact(prop(n)));
    return AtomicSystem::of(std::move(rs));
}

}  // namespace

TEST_CASE("extensions") {
    Basis b({facts({}), facts({"p"})}, {prop("p")}, closed_terms(prop_sig()));
    auto ext = extensions(b, facts({}));
    CHECK(ext.size() == 2);
    auto top = extensions(b, facts({"p"}));
    REQUIRE(top.size() == 1);
    CHECK(top[0] == facts({"p"}));
    CHECK_THROWS_AS(extensions(b, facts({"q"})), SyntaxError);

    // powerset of a two-rule pool: a singleton has two extensions
    Signature sig = prop_sig();
    AtomicSystem pool = parse_base("=> p\np => q\n", sig);
    Basis pw = powerset_basis(pool, {prop("p"), prop("q")}, closed_terms(sig));
    CHECK(pw.bases().size() == 4);
    AtomicSystem one = AtomicSystem::of({pool.rules[0]});
    CHECK(extensions(pw, one).size() == 2);
    CHECK(pw.union_closed());
}

TEST_CASE("support clauses on worked examples") {
    Signature asig = parse_signature("const s\npred H/1\npred M/1\n");
    AtomicSystem ar = parse_base("=> H(s)\nH(s) => M(s)\n", asig);
    Basis ab({facts({}), ar}, {}, closed_terms(asig));
    SupportEvaluator ev(ab);
    CHECK(ev.supports(ab.index_of(ar), parse_formula("M(s)", asig)));
    CHECK_FALSE(ev.supports(ab.index_of(facts({})), parse_formula("M(s)", asig)));

    // conjunction over a base holding both conjuncts
    Basis pq({facts({"p", "q"})}, {prop("p"), prop("q")}, closed_terms(prop_sig()));
    SupportEvaluator ev2(pq);
    CHECK(ev2.supports(0, parse("p & q")));
    CHECK_FALSE(ev2.supports(0, parse("p & r")));

    // disjunction p | p over the powerset of the pool {=> p}
    Basis pp({facts({}), facts({"p"})}, {prop("p")}, closed_terms(prop_sig()));
    SupportEvaluator ev3(pp);
    CHECK_FALSE(ev3.supports(pp.index_of(facts({})), parse("p | p")));
    CHECK(ev3.supports(pp.index_of(facts({"p"})), parse("p | p")));
}

TEST_CASE("implication and falsum clauses") {
    Basis b({facts({}), facts({"p"}), facts({"q"}), facts({"p", "q"})},
            {prop("p"), prop("q")}, closed_terms(prop_sig()));
    SupportEvaluator ev(b);
    size_t empty = b.index_of(facts({}));

    // p -> p holds everywhere; p -> q fails at the empty base because the
    // extension holding only p does not derive q
    CHECK(ev.supports(empty, parse("p -> p")));
    CHECK_FALSE(ev.supports(empty, parse("p -> q")));

    // bot demands every universe atom: false where some atom is missing,
    // true at the base holding facts for the whole declared universe
    CHECK_FALSE(ev.supports(empty, Formula::falsum()));
    CHECK_FALSE(ev.supports(b.index_of(facts({"p"})), Formula::falsum()));
    CHECK(ev.supports(b.index_of(facts({"p", "q"})), Formula::falsum()));
}

TEST_CASE("quantifier clauses and the wff closure") {
    Signature sig = parse_signature("const c\nconst d\npred P/1\n");
    auto ct = closed_terms(sig);
    auto fact = [&](const std::string& a) {
        return AtomicSystem::of({AtomicRule::fact(parse_atom(a, sig))});
    };
    AtomicSystem both = fact("P(c)").union_with(fact("P(d)"));
    Basis b({AtomicSystem::of({}), fact("P(c)"), fact("P(d)"), both}, {}, ct);
    SupportEvaluator ev(b);

    CHECK(ev.supports(b.index_of(both), parse_formula("forall x P(x)", sig)));
    CHECK_FALSE(ev.supports(b.index_of(fact("P(c)")), parse_formula("forall x P(x)", sig)));

    // open goals evaluate through their universal closure
    CHECK(ev.supports(b.index_of(both), parse_formula("P(x)", sig)));
    CHECK_FALSE(ev.supports(b.index_of(fact("P(c)")), parse_formula("P(x)", sig)));

    // exists: the base holding P(c) supports exists x P(x)
    CHECK(ev.supports(b.index_of(fact("P(c)")), parse_formula("exists x P(x)", sig)));

    // over this basis the empty base also supports it vacuously (no member
    // separates the instances from an independent atom); adding such a
    // separator makes the judgment fail
    CHECK(ev.supports(b.index_of(AtomicSystem::of({})), parse_formula("exists x P(x)", sig)));
    Signature sig_r = parse_signature("const c\nconst d\npred P/1\npred r/0\n");
    AtomicSystem cr = fact("P(c)").union_with(AtomicSystem::of({AtomicRule::fact(prop("r"))}));
    AtomicSystem dr = fact("P(d)").union_with(AtomicSystem::of({AtomicRule::fact(prop("r"))}));
    Basis sep({AtomicSystem::of({}), cr, dr}, {prop("r")}, closed_terms(sig_r));
    SupportEvaluator evs(sep);
    CHECK_FALSE(evs.supports(sep.index_of(AtomicSystem::of({})),
                             parse_formula("exists x P(x)", sig_r)));
    CHECK(evs.supports(sep.index_of(cr), parse_formula("exists x P(x)", sig_r)));
}

TEST_CASE("supports_valid") {
    Basis b = zero_complete_basis({facts({})}, {prop("p"), prop("q"), prop("r")},
                                  closed_terms(prop_sig()));
    CHECK(b.zero_level_complete());
    SupportEvaluator ev(b);

    // Gamma = {phi} |- phi from (Inf)
    CHECK(ev.supports_valid({parse("p & q")}, parse("p & q")));
    // a K instance is supported over a zero-level-complete basis
    CHECK(ev.supports_valid({}, parse("p -> (q -> p)")));
    // bot fails at the empty base of a nonempty universe
    CHECK_FALSE(ev.supports_valid({}, Formula::falsum()));
}

TEST_CASE("monotonicity harness") {
    Signature sig = prop_sig();
    AtomicSystem pool = parse_base("=> p\np => q\n=> r\nq => r\n", sig);
    Basis b = powerset_basis(pool, {prop("p"), prop("q"), prop("r")}, closed_terms(sig));

    std::vector<FormulaPtr> sample = {parse("p"),      parse("p -> q"), parse("p | q"),
                                      parse("p & r"),  parse("~q"),     Formula::falsum(),
                                      parse("p | ~p")};
    MonotonicityReport rep = check_monotonicity(b, sample);
    CHECK(rep.ok());
    CHECK(rep.checked > 0);

    MonotonicityReport empty = check_monotonicity(b, {});
    CHECK(empty.ok());
    CHECK(empty.checked == 0);
}

TEST_CASE("atomic cut harness") {
    Signature sig = prop_sig();
    Basis b = zero_complete_basis({AtomicSystem::of({parse_rule("p => q", sig)})},
                                  {prop("p"), prop("q"), prop("r")}, closed_terms(sig));
    REQUIRE(b.zero_level_complete());

    // Q empty: both sides collapse to plain derivability
    AtomicCutReport r1 = check_atomic_cut(b, {}, {prop("p")}, prop("q"));
    CHECK(r1.ok());
    // Q = {q}, also routed through the extension adding q as a fact
    AtomicCutReport r2 = check_atomic_cut(b, {prop("q")}, {prop("p")}, prop("r"));
    CHECK(r2.ok());
    // goal inside P: ref on both sides
    AtomicCutReport r3 = check_atomic_cut(b, {prop("q")}, {prop("p")}, prop("p"));
    CHECK(r3.ok());

    Basis incomplete({facts({})}, {prop("p")}, closed_terms(sig));
    CHECK_FALSE(incomplete.zero_level_complete());
    CHECK_THROWS_AS(check_atomic_cut(incomplete, {}, {}, prop("p")), SyntaxError);
}

TEST_CASE("atomic completeness harness (AtComp)") {
    Signature sig = prop_sig();
    Basis b = zero_complete_basis({AtomicSystem::of({parse_rule("p => q", sig)}),
                                   AtomicSystem::of({parse_rule("{ [p] => q } => r", sig)})},
                                  {prop("p"), prop("q"), prop("r")}, closed_terms(sig));
    std::vector<AtomSet> contexts = {{}, {prop("p")}, {prop("q")}, {prop("p"), prop("q")},
                                     {prop("p"), prop("r")}};
    for (const auto& ctx : contexts)
        for (const auto& g : {prop("p"), prop("q"), prop("r")}) {
            AtCompReport rep = check_atomic_completeness(b, ctx, g);
            CAPTURE(to_string(g));
            CHECK(rep.ok());
        }
}

TEST_CASE("property: support of positive goals is extension-stable") {
    Signature sig = prop_sig();
    AtomicSystem pool = parse_base("=> p\np => q\n{ [q] => p } => r\n", sig);
    Basis b = powerset_basis(pool, {prop("p"), prop("q"), prop("r")}, closed_terms(sig));
    SupportEvaluator ev(b);
    std::vector<FormulaPtr> goals = {parse("p -> q"), parse("p | q"), parse("~p"),
                                     parse("p -> (q -> p)"), parse("p | ~p")};
    for (const auto& g : goals)
        for (size_t i = 0; i < b.bases().size(); ++i) {
            if (!ev.supports(i, g)) continue;
            for (size_t j : b.extensions_of(i)) CHECK(ev.supports(j, g));
        }
}

TEST_CASE("double negation over finite zero-complete bases") {
    // Over a finite universe the bot clause is attainable (all atoms
    // derivable), which validates ~~a exactly where a's triggers explode.
    // Double negation elimination then holds when inter-atom derivability is
    // symmetric and fails for one-way rules: with p => q the judgment ~~q
    // becomes vacuously supported at bases that cannot derive q.
    Signature sig = prop_sig();
    std::vector<Atom> atoms = {prop("p"), prop("q"), prop("r")};
    auto dne = [&](const char* a) {
        FormulaPtr f = parse(a);
        return Formula::impl(Formula::neg(Formula::neg(f)), f);
    };

    Basis facts_only = zero_complete_basis({AtomicSystem::of({})}, atoms, closed_terms(sig));
    SupportEvaluator ev0(facts_only);
    CHECK(ev0.supports_valid({}, dne("p")));
    CHECK(ev0.supports_valid({}, dne("q")));

    Basis symmetric = zero_complete_basis({parse_base("p => q\nq => p\n", sig)}, atoms,
                                          closed_terms(sig));
    SupportEvaluator ev1(symmetric);
    CHECK(ev1.supports_valid({}, dne("p")));
    CHECK(ev1.supports_valid({}, dne("q")));

    Basis chain = zero_complete_basis({parse_base("p => q\n", sig)}, atoms, closed_terms(sig));
    SupportEvaluator ev2(chain);
    CHECK(ev2.supports_valid({}, dne("p")));
    CHECK_FALSE(ev2.supports_valid({}, dne("q")));  // the finite-basis caveat
}

TEST_CASE("basis file format") {
    Signature sig = prop_sig();
    std::string dir = "/tmp/bes_basis_test";
    if (std::system(("mkdir -p " + dir).c_str()) != 0) FAIL("cannot create temp dir");
    {
        std::ofstream pool(dir + "/pool.base");
        pool << "=> p\np => q\n";
    }
    {
        std::ofstream bf(dir + "/powerset.basis");
        bf << "pool pool.base\npowerset-of-pool\nuniverse r\n";
    }
    Basis b = parse_basis_file(dir + "/powerset.basis", sig);
    CHECK(b.bases().size() == 4);
    // universe contains the declared atom plus everything the pool mentions
    CHECK(b.universe().size() == 3);

    {
        std::ofstream bf(dir + "/zc.basis");
        bf << "base pool.base\nzero-complete over p, q\n";
    }
    Basis zc = parse_basis_file(dir + "/zc.basis", sig);
    CHECK(zc.zero_level_complete());

    CHECK_THROWS_AS(parse_basis_file(dir + "/missing.basis", sig), SyntaxError);
}
