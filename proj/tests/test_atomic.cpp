#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bes/atomic.hpp"
#include "testutil.hpp"

using namespace bes;

namespace {

Signature aristotle_sig() { return parse_signature("const s\npred H/1\npred M/1\n"); }

AtomicSystem aristotle() {
    Signature sig = aristotle_sig();
    return parse_base("=> H(s)\nH(s) => M(s)\n", sig);
}

Atom prop(const std::string& n) { return Atom::prop(n); }

}  // namespace

TEST_CASE("rule levels") {
    Signature sig = aristotle_sig();
    CHECK(level(parse_rule("=> H(s)", sig)) == RuleLevel::Zero);
    CHECK(level(parse_rule("H(s) => M(s)", sig)) == RuleLevel::First);

    Signature ps = parse_signature("pred p/0\npred q/0\npred r/0\n");
    CHECK(level(parse_rule("{ [p] => q } => r", ps)) == RuleLevel::Second);
    CHECK(level(parse_rule("{ [] => q ; [p] => p } => r", ps)) == RuleLevel::Second);
}

TEST_CASE("base file round trip") {
    Signature ps = parse_signature("pred p/0\npred q/0\npred r/0\npred s/0\n");
    std::string text = "{ [p, q] => r ; [] => s } => p\n=> q\np, q => r\n";
    AtomicSystem sys = parse_base(text, ps);
    CHECK(sys.rules.size() == 3);
    AtomicSystem back = parse_base(base_to_string(sys), ps);
    CHECK(sys == back);
    CHECK_THROWS_AS(parse_base("p q\n", ps), SyntaxError);
}

TEST_CASE("derivability: worked examples") {
    AtomicSystem a = aristotle();
    Signature sig = aristotle_sig();
    Atom ms = parse_atom("M(s)", sig);

    auto w = derives(a, {}, ms);
    REQUIRE(w.has_value());
    CHECK(validate_derivation(*w, a));

    // ref on a context member, regardless of the system
    Signature ps = parse_signature("pred p/0\npred q/0\npred r/0\n");
    auto wr = derives(a, {ms}, ms);
    REQUIRE(wr.has_value());
    CHECK(wr->kind == BaseDerivation::Kind::Ref);

    // second-level rule fires only if its hypothetical premise holds
    AtomicSystem s2 = parse_base("{ [p] => q } => r\n", ps);
    CHECK_FALSE(derives(s2, {}, prop("r")).has_value());
    AtomicSystem s3 = parse_base("{ [p] => q } => r\np => q\n", ps);
    auto w3 = derives(s3, {}, prop("r"));
    REQUIRE(w3.has_value());
    CHECK(validate_derivation(*w3, s3));
}

TEST_CASE("derivability handles cyclic rules") {
    Signature ps = parse_signature("pred p/0\npred q/0\n");
    AtomicSystem cyc = parse_base("p => q\nq => p\n", ps);
    CHECK_FALSE(derives(cyc, {}, prop("p")).has_value());
    AtomicSystem cyc2 = parse_base("p => q\nq => p\n=> p\n", ps);
    CHECK(derives(cyc2, {}, prop("q")).has_value());
    // self-loop plus an alternative route
    AtomicSystem self = parse_base("p => p\n=> p\n", ps);
    CHECK(derives(self, {}, prop("p")).has_value());
}

TEST_CASE("open systems: closure") {
    Signature sig = parse_signature("const s\nconst t\npred H/1\npred M/1\n");
    OpenAtomicRule open_rule = parse_rule("H(x) => M(x)", sig);

    auto one = close_open_system({open_rule}, {Term::cnst("s")});
    CHECK(one.rules.size() == 1);
    CHECK(to_string(one.rules[0]) == "H(s) => M(s)");

    auto two = close_open_system({open_rule}, closed_terms(sig));
    CHECK(two.rules.size() == 2);

    // rules without variables pass through untouched
    AtomicRule ground = parse_rule("=> H(s)", sig);
    auto same = close_open_system({ground}, closed_terms(sig));
    CHECK(same.rules.size() == 1);
    CHECK(same.rules[0] == ground);
}

TEST_CASE("open correspondence") {
    Signature sig = parse_signature("const s\npred H/1\npred M/1\n");
    std::vector<OpenAtomicRule> open_rules = {parse_rule("=> H(x)", sig),
                                              parse_rule("H(x) => M(x)", sig)};
    Atom goal = parse_atom("M(x)", sig);
    auto rep = open_correspondence_check(open_rules, goal, closed_terms(sig));
    CHECK(rep.open_derivable);
    CHECK(rep.closed_derivable);
    CHECK(rep.agree());
    REQUIRE(rep.witness.count("x"));
    CHECK(to_string(rep.witness.at("x")) == "s");

    auto rep2 = open_correspondence_check({}, goal, closed_terms(sig));
    CHECK_FALSE(rep2.open_derivable);
    CHECK_FALSE(rep2.closed_derivable);
    CHECK(rep2.agree());

    // variable-free rules: both sides coincide trivially
    std::vector<OpenAtomicRule> ground = {parse_rule("=> M(s)", sig)};
    auto rep3 = open_correspondence_check(ground, parse_atom("M(s)", sig), closed_terms(sig));
    CHECK(rep3.open_derivable);
    CHECK(rep3.closed_derivable);
}

TEST_CASE("property: weakening") {
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        testutil::AtomicGen gen(seed);
        AtomicSystem s = gen.system();
        AtomSet ctx = gen.atom_set(2);
        Atom goal = gen.atom();
        if (!derives(s, ctx, goal)) continue;
        AtomSet bigger = ctx;
        bigger.insert(gen.atom());
        CHECK(derives(s, bigger, goal).has_value());
        AtomicSystem larger = s.union_with(AtomicSystem::of({gen.rule()}));
        CHECK(derives(larger, ctx, goal).has_value());
    }
}

TEST_CASE("property: ref soundness") {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        testutil::AtomicGen gen(seed * 97);
        AtomicSystem s = gen.system();
        AtomSet ctx = gen.atom_set(2);
        for (const auto& a : ctx) CHECK(derives(s, ctx, a).has_value());
    }
}

TEST_CASE("property: derives agrees with the saturation oracle") {
    size_t positives = 0;
    for (uint64_t seed = 1; seed <= 400; ++seed) {
        testutil::AtomicGen gen(seed * 1337 + 5);
        AtomicSystem s = gen.system();
        AtomSet ctx = gen.atom_set(2);
        Atom goal = gen.atom();
        auto got = derives(s, ctx, goal);
        bool want = testutil::oracle_derives(s, ctx, goal);
        CAPTURE(base_to_string(s));
        CAPTURE(to_string(goal));
        CHECK(got.has_value() == want);
        if (got) {
            ++positives;
            CHECK(validate_derivation(*got, s));
        }
    }
    CHECK(positives > 50);  // the generator exercises both outcomes
}
