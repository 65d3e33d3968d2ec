#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bes/syntax.hpp"

using namespace bes;

namespace {

Signature test_sig() {
    return parse_signature(
        "const c\n"
        "const d\n"
        "fun f/1\n"
        "pred P/1\n"
        "pred Q/1\n"
        "pred R/2\n"
        "pred p/0\n"
        "pred q/0\n"
        "depth 1\n");
}

FormulaPtr parse(const std::string& s) { return parse_formula(s, test_sig()); }

}  // namespace

TEST_CASE("signature parsing and validation") {
    Signature sig = test_sig();
    CHECK(sig.is_constant("c"));
    CHECK(sig.is_function("f"));
    CHECK(sig.predicates.at("R") == 2);
    CHECK(sig.term_depth_bound == 1);
    CHECK_THROWS_AS(parse_signature("const c\npred c/1\n"), SyntaxError);
    CHECK_THROWS_AS(parse_signature("什么\n"), SyntaxError);
}

TEST_CASE("parsing basics") {
    CHECK(to_string(parse("forall x (P(x) -> P(x))")) == "forall x (P(x) -> P(x))");
    // negation is sugar for implication into bot
    FormulaPtr n = parse("~P(c)");
    REQUIRE(n->kind == Formula::Kind::Implies);
    CHECK(n->rhs->kind == Formula::Kind::Falsum);
    CHECK(to_string(n) == "~P(c)");
    // arities are enforced with a position
    CHECK_THROWS_WITH_AS(parse("P(f(c,d))"), doctest::Contains("expects 1 argument"),
                         SyntaxError);
    CHECK_THROWS_WITH_AS(parse("S(c)"), doctest::Contains("unknown predicate"), SyntaxError);
    CHECK_THROWS_WITH_AS(parse("p -> "), doctest::Contains("expected a formula"), SyntaxError);
    CHECK_THROWS_AS(parse("p @ q"), SyntaxError);
}

TEST_CASE("grammar precedence") {
    // -> is right-associative and loosest
    FormulaPtr f = parse("p -> q -> p");
    CHECK(equal(f, Formula::impl(parse("p"), parse("q -> p"))));
    // ~ binds tightest, then &, then |
    FormulaPtr g = parse("~p & q | p");
    CHECK(g->kind == Formula::Kind::Or);
    CHECK(g->lhs->kind == Formula::Kind::And);
    // quantifier scope is the smallest following formula
    FormulaPtr h = parse("forall x P(x) & Q(x)");
    CHECK(h->kind == Formula::Kind::And);
    CHECK(h->lhs->kind == Formula::Kind::Forall);
}

TEST_CASE("free variables") {
    CHECK(free_vars(parse("P(c)")).empty());
    CHECK(free_vars(parse("forall x R(x, y)")) == std::set<std::string>{"y"});
    // the conjunct lies outside the quantifier scope
    CHECK(free_vars(parse("forall x P(x) & Q(x)")) == std::set<std::string>{"x"});
    CHECK(closed(parse("forall x P(x)")));
}

TEST_CASE("substitution") {
    Signature sig = test_sig();
    FormulaPtr px = parse("P(x)");
    CHECK(equal(substitute(px, "x", Term::cnst("c")), parse("P(c)")));
    // bound occurrences stay put
    FormulaPtr all = parse("forall x P(x)");
    CHECK(equal(substitute(all, "x", Term::cnst("c")), all));
    // open substitution terms are rejected by the public operation
    CHECK_THROWS_AS(substitute(px, "x", Term::var("y")), SyntaxError);
    // the capture-checked variant allows them unless a binder captures
    CHECK(equal(substitute_capture_checked(px, "x", Term::var("y")), parse("P(y)")));
    FormulaPtr trap = parse("forall y R(y, x)");
    CHECK_THROWS_WITH_AS(substitute_capture_checked(trap, "x", Term::var("y")),
                         doctest::Contains("capture"), SyntaxError);
    // substitution leaves formulas without the variable unchanged
    CHECK(equal(substitute(parse("P(c)"), "x", Term::cnst("d")), parse("P(c)")));
}

TEST_CASE("universal closure") {
    CHECK(equal(universal_closure(parse("P(c)")), parse("P(c)")));
    CHECK(equal(universal_closure(parse("P(x)")), parse("forall x P(x)")));
    // binders in reverse order of first printed occurrence
    CHECK(to_string(universal_closure(parse("R(x, y)"))) == "forall y forall x R(x, y)");
    CHECK(free_vars(universal_closure(parse("R(x, y)"))).empty());
}

TEST_CASE("closed terms") {
    Signature sig = test_sig();
    auto ct = closed_terms(sig);
    std::vector<std::string> names;
    for (const auto& t : ct) names.push_back(to_string(t));
    CHECK(names == std::vector<std::string>{"c", "d", "f(c)", "f(d)"});

    Signature depth0 = sig;
    depth0.term_depth_bound = 0;
    auto ct0 = closed_terms(depth0);
    CHECK(ct0.size() == 2);

    Signature none = parse_signature("pred p/0\n");
    CHECK_THROWS_AS(closed_terms(none), SyntaxError);
}

TEST_CASE("subformulae") {
    Signature sig = test_sig();
    auto ct = closed_terms(sig);

    auto sf = subformulae(parse("p & q"), ct);
    CHECK(sf.size() == 3);

    Signature small = parse_signature("const c\nconst d\npred P/1\n");
    auto ct2 = closed_terms(small);
    auto sf2 = subformulae(parse_formula("forall x P(x)", small), ct2);
    REQUIRE(sf2.size() == 3);
    CHECK(to_string(sf2[0]) == "P(c)");
    CHECK(to_string(sf2[1]) == "P(d)");
    CHECK(to_string(sf2[2]) == "forall x P(x)");

    auto sfb = subformulae(Formula::falsum(), ct);
    CHECK(sfb.size() == 1);

    CHECK_THROWS_AS(subformulae(parse("P(x)"), ct), SyntaxError);
}

TEST_CASE("weight") {
    CHECK(weight(parse("p")) == 0);
    CHECK(weight(Formula::falsum()) == 1);
    CHECK(weight(parse("p -> bot")) == 2);
    CHECK(weight(parse("forall x P(x)")) == 1);
    CHECK(weight(parse("p & q | p")) == 2);
}

TEST_CASE("scheme instantiation") {
    // forall x X -> X[x:=t] with X := P(x) & Q(t'), the worked example shape
    SchemePtr s = Scheme::impl(Scheme::forall("x", Scheme::metavar("X")),
                               Scheme::subst(Scheme::metavar("X"), "x", "t"));
    Instantiation iota;
    iota.formulas["X"] = parse("P(x) & Q(c)");
    iota.vars["x"] = "x";
    iota.terms["t"] = Term::cnst("c");
    CHECK(to_string(instantiate_scheme(s, iota)) ==
          "forall x (P(x) & Q(c)) -> P(c) & Q(c)");

    // bot -> (bot -> bot) is both a formula and an instance of X -> (Y -> X)
    SchemePtr k = Scheme::impl(Scheme::metavar("X"),
                               Scheme::impl(Scheme::metavar("Y"), Scheme::metavar("X")));
    Instantiation bot;
    bot.formulas["X"] = Formula::falsum();
    bot.formulas["Y"] = Formula::falsum();
    FormulaPtr kbot = instantiate_scheme(k, bot);
    CHECK(equal(kbot, parse("bot -> (bot -> bot)")));
    // bot -> bot prints through the negation sugar
    CHECK(to_string(kbot) == "bot -> ~bot");

    SchemePtr just_bot = Scheme::falsum();
    CHECK(equal(instantiate_scheme(just_bot, bot), Formula::falsum()));

    Instantiation missing;
    CHECK_THROWS_WITH_AS(instantiate_scheme(k, missing), doctest::Contains("missing"),
                         SyntaxError);
}

// ---------------------------------------------------------------------------
// Properties

namespace {

FormulaPtr random_formula(std::mt19937_64& rng, int depth, std::vector<std::string>* scope) {
    std::uniform_int_distribution<int> pick(0, 7);
    std::uniform_int_distribution<int> var_pick(0, 2);
    static const std::vector<std::string> vars = {"x", "y", "z"};
    auto term = [&]() -> Term {
        if (!scope->empty()) {
            std::uniform_int_distribution<int> c(0, 3);
            int k = c(rng);
            if (k == 0) return Term::cnst("c");
            if (k == 1) return Term::app("f", {Term::cnst("d")});
            std::uniform_int_distribution<size_t> vi(0, scope->size() - 1);
            return Term::var((*scope)[vi(rng)]);
        }
        return var_pick(rng) ? Term::cnst("c") : Term::cnst("d");
    };
    if (depth <= 0) {
        int k = pick(rng);
        if (k == 0) return Formula::falsum();
        if (k < 4) return Formula::atom("p");
        return Formula::atom("P", {term()});
    }
    switch (pick(rng)) {
        case 0:
            return Formula::atom("R", {term(), term()});
        case 1:
            return Formula::falsum();
        case 2:
            return Formula::conj(random_formula(rng, depth - 1, scope),
                                 random_formula(rng, depth - 1, scope));
        case 3:
            return Formula::disj(random_formula(rng, depth - 1, scope),
                                 random_formula(rng, depth - 1, scope));
        case 4:
        case 5:
            return Formula::impl(random_formula(rng, depth - 1, scope),
                                 random_formula(rng, depth - 1, scope));
        case 6: {
            std::uniform_int_distribution<size_t> vi(0, vars.size() - 1);
            std::string v = vars[vi(rng)];
            scope->push_back(v);
            FormulaPtr body = random_formula(rng, depth - 1, scope);
            scope->pop_back();
            return Formula::forall(v, body);
        }
        default: {
            std::uniform_int_distribution<size_t> vi(0, vars.size() - 1);
            std::string v = vars[vi(rng)];
            scope->push_back(v);
            FormulaPtr body = random_formula(rng, depth - 1, scope);
            scope->pop_back();
            return Formula::exists(v, body);
        }
    }
}

}  // namespace

TEST_CASE("property: parse-print round trip") {
    Signature sig = test_sig();
    std::mt19937_64 rng(20240811);
    std::vector<std::string> scope;
    for (int i = 0; i < 500; ++i) {
        FormulaPtr f = random_formula(rng, 4, &scope);
        FormulaPtr back = parse_formula(to_string(f), sig);
        CAPTURE(to_string(f));
        CHECK(equal(f, back));
    }
}

TEST_CASE("property: substitution is identity off the free variables") {
    std::mt19937_64 rng(7);
    std::vector<std::string> scope;
    for (int i = 0; i < 300; ++i) {
        FormulaPtr f = random_formula(rng, 3, &scope);
        if (free_vars(f).count("x")) continue;
        CHECK(equal(substitute(f, "x", Term::cnst("c")), f));
    }
}

TEST_CASE("property: universal closure closes everything") {
    std::mt19937_64 rng(8);
    std::vector<std::string> scope = {"x", "y"};
    for (int i = 0; i < 300; ++i) {
        FormulaPtr f = random_formula(rng, 3, &scope);
        CHECK(free_vars(universal_closure(f)).empty());
    }
}

TEST_CASE("property: closed substitution preserves weight") {
    std::mt19937_64 rng(9);
    std::vector<std::string> scope = {"x"};
    for (int i = 0; i < 300; ++i) {
        FormulaPtr f = random_formula(rng, 3, &scope);
        CHECK(weight(substitute(f, "x", Term::cnst("c"))) == weight(f));
    }
}

TEST_CASE("property: subformulae are closed, contain the root, monotone in CT") {
    Signature sig = test_sig();
    auto ct_small = closed_terms([&] {
        Signature s = sig;
        s.term_depth_bound = 0;
        return s;
    }());
    auto ct_big = closed_terms(sig);

    std::mt19937_64 rng(10);
    std::vector<std::string> scope;
    for (int i = 0; i < 120; ++i) {
        FormulaPtr f = random_formula(rng, 3, &scope);
        if (!closed(f)) continue;
        auto small = subformulae(f, ct_small);
        auto big = subformulae(f, ct_big);
        bool found = false;
        for (const auto& g : small) {
            CHECK(closed(g));
            if (equal(g, f)) found = true;
        }
        CHECK(found);
        // monotone: everything under the small universe appears under the big
        FormulaSet bigset(big.begin(), big.end());
        for (const auto& g : small) CHECK(bigset.count(g) == 1);
        // quantified members dominate their instances' weight
        for (const auto& g : big)
            if (g->kind == Formula::Kind::Forall || g->kind == Formula::Kind::Exists)
                for (const auto& t : ct_big)
                    CHECK(weight(substitute(g->lhs, g->name, t)) < weight(g));
    }
}
