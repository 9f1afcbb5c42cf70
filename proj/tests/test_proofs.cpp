#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "kw/bundled.hpp"
#include "kw/checker.hpp"
#include "kw/proofs.hpp"

using namespace kw;

TEST_CASE("schema matching") {
  const Schema& truth = builtin_schema(SchemaId::Truth);
  const auto kp = match_schema(truth, parse("K p -> p"));
  REQUIRE(kp.has_value());
  CHECK(kp->box == Modality::K);
  CHECK(kp->vars.at("phi") == var("p"));

  CHECK(!match_schema(truth, parse("W p -> p")).has_value());  // box is K or A only
  CHECK(!match_schema(truth, parse("K p -> q")).has_value());

  const auto ni = match_schema(builtin_schema(SchemaId::NegativeIntrospection),
                               parse("!A p -> A !A p"));
  REQUIRE(ni.has_value());
  CHECK(ni->box == Modality::A);
  CHECK(ni->vars.at("phi") == var("p"));

  // box resolves uniformly: a mixed instance must not match
  CHECK(!match_schema(builtin_schema(SchemaId::Distributivity),
                      parse("K(p->q) -> (A p -> K q)"))
             .has_value());
  CHECK(match_schema(builtin_schema(SchemaId::KnowAll), parse("K A (p->q) -> (W p -> W q)"))
            .has_value());
}

TEST_CASE("matching then instantiating reproduces the formula") {
  std::mt19937_64 rng(31);
  kwtest::FormulaGen gen;
  for (int i = 0; i < 200; ++i) {
    const Schema& schema = all_schemas()[i % all_schemas().size()];
    SchemaBinding b;
    b.vars.emplace(schema.metavars[0], gen(rng, 3));
    if (schema.metavars.size() > 1) b.vars.emplace(schema.metavars[1], gen(rng, 3));
    if (schema.has_box) b.box = (i % 2) ? Modality::K : Modality::A;
    const Formula inst = instantiate_schema(schema, b);
    const auto back = match_schema(schema, inst);
    REQUIRE(back.has_value());
    CHECK(instantiate_schema(schema, *back) == inst);
  }
}

TEST_CASE("tautology recognition treats modal formulas as atoms") {
  CHECK(check_tautology(parse("p -> p")));
  CHECK(check_tautology(parse("W p -> W p")));
  CHECK(!check_tautology(parse("K p -> p")));  // K p and p are distinct atoms
  CHECK(check_tautology(parse("p | !p")));
  CHECK(check_tautology(parse("(p -> q) -> ((q -> r) -> (p -> r))")));
  CHECK(!check_tautology(parse("p -> q")));
  CHECK(check_tautology(parse("@ns p -> @ns p")));
  CHECK(check_tautology(parse("true")));
  CHECK(!check_tautology(parse("false")));
}

TEST_CASE("the tautology atom budget fails loudly") {
  Formula f = var("x1");
  for (int i = 2; i <= 21; ++i) f = implies(f, var("x" + std::to_string(i)));
  CHECK_THROWS_AS(check_tautology(f), TautologyBudgetError);
}

TEST_CASE("tautologies agree with bounded validity on propositional formulas") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 60; ++i) {
    const Formula f = kwtest::random_propositional(rng, 4);
    CHECK(check_tautology(f) == bounded_validity(f, Bounds{1, 1, 1, 2}).valid_within());
  }
}

TEST_CASE("the bundled derivations are accepted") {
  for (const Schema& s : all_schemas()) {
    const DerivationCheck c = check_derivation(axiom_demo_derivation(s.id));
    CHECK(c.ok());
    CHECK(c.concludes_theorem());
  }
  const DerivationCheck k = check_derivation(positive_introspection_derivation(Modality::K));
  CHECK(k.ok());
  CHECK(k.concludes_theorem());
  CHECK(positive_introspection_derivation(Modality::K).conclusion() == parse("K p -> K K p"));
  const DerivationCheck a = check_derivation(positive_introspection_derivation(Modality::A));
  CHECK(a.ok());
  CHECK(positive_introspection_derivation(Modality::A).conclusion() == parse("A p -> A A p"));
  const DerivationCheck mp = check_derivation(mp_demo_derivation());
  CHECK(mp.ok());
  CHECK(!mp.concludes_theorem());  // it rests on its hypotheses
}

TEST_CASE("single-line corruptions are rejected at the right line") {
  SUBCASE("swapped modus ponens operands") {
    Derivation d = positive_introspection_derivation(Modality::K);
    d.lines[2].justification = ModusPonens{1, 0};
    const DerivationCheck c = check_derivation(d);
    REQUIRE(!c.ok());
    CHECK(c.error->line == 2);
  }
  SUBCASE("edited conclusion formula") {
    Derivation d = positive_introspection_derivation(Modality::K);
    d.lines[11].formula = parse("K p -> K K q");
    const DerivationCheck c = check_derivation(d);
    REQUIRE(!c.ok());
    CHECK(c.error->line == 11);
  }
  SUBCASE("edited axiom line formula") {
    Derivation d = positive_introspection_derivation(Modality::A);
    d.lines[0].formula = parse("!A p -> A !A q");
    const DerivationCheck c = check_derivation(d);
    REQUIRE(!c.ok());
    CHECK(c.error->line == 0);
  }
  SUBCASE("every one-line axiom rejects a formula edit") {
    for (const Schema& s : all_schemas()) {
      Derivation d = axiom_demo_derivation(s.id);
      d.lines[0].formula = implies(d.lines[0].formula, var("z"));
      const DerivationCheck c = check_derivation(d);
      REQUIRE(!c.ok());
      CHECK(c.error->line == 0);
    }
  }
}

TEST_CASE("derivation checking error paths") {
  const Formula p = var("p"), q = var("q");

  SUBCASE("empty derivation") {
    CHECK(!check_derivation(Derivation{}).ok());
  }
  SUBCASE("premise index out of range") {
    Derivation d;
    d.hypotheses = {p};
    d.lines.push_back({p, PremiseRef{3}});
    const DerivationCheck c = check_derivation(d);
    REQUIRE(!c.ok());
    CHECK(c.error->line == 0);
    CHECK(c.error->reason.find("premise index") != std::string::npos);
  }
  SUBCASE("premise formula mismatch") {
    Derivation d;
    d.hypotheses = {p};
    d.lines.push_back({q, PremiseRef{0}});
    CHECK(!check_derivation(d).ok());
  }
  SUBCASE("necessitation of a hypothesis is illegal") {
    Derivation d;
    d.hypotheses = {p};
    d.lines.push_back({p, PremiseRef{0}});
    d.lines.push_back({know(p), NecessitationJust{Modality::K, 0}});
    const DerivationCheck c = check_derivation(d);
    REQUIRE(!c.ok());
    CHECK(c.error->line == 1);
    CHECK(c.error->reason.find("deduction line") != std::string::npos);
  }
  SUBCASE("necessitation survives through theorem-only modus ponens") {
    Derivation d;
    d.lines.push_back({implies(p, p), TautologyJust{}});
    d.lines.push_back({implies(implies(p, p), implies(q, implies(p, p))), TautologyJust{}});
    d.lines.push_back({implies(q, implies(p, p)), ModusPonens{0, 1}});
    d.lines.push_back({know_who(implies(q, implies(p, p))),
                       NecessitationJust{Modality::W, 2}});
    const DerivationCheck c = check_derivation(d);
    CHECK(c.ok());
    CHECK(c.concludes_theorem());
  }
  SUBCASE("modus ponens must cite earlier lines") {
    Derivation d;
    d.lines.push_back({p, ModusPonens{0, 0}});
    CHECK(!check_derivation(d).ok());
  }
  SUBCASE("modus ponens shape errors") {
    Derivation d;
    d.hypotheses = {p, q};
    d.lines.push_back({p, PremiseRef{0}});
    d.lines.push_back({q, PremiseRef{1}});
    d.lines.push_back({q, ModusPonens{0, 1}});  // line 1 is not an implication
    const DerivationCheck c = check_derivation(d);
    REQUIRE(!c.ok());
    CHECK(c.error->line == 2);
  }
  SUBCASE("a tautology citation must actually be one") {
    Derivation d;
    d.lines.push_back({parse("K p -> p"), TautologyJust{}});
    CHECK(!check_derivation(d).ok());
  }
  SUBCASE("axiom box discipline") {
    SchemaBinding b;
    b.vars.emplace("phi", p);
    Derivation d;
    d.lines.push_back({parse("K p -> p"), AxiomRef{SchemaId::Truth, b}});  // box missing
    CHECK(!check_derivation(d).ok());

    SchemaBinding b2 = b;
    b2.box = Modality::K;
    Derivation d2;
    d2.lines.push_back({parse("W p -> K W p"),
                        AxiomRef{SchemaId::IntrospectionOfKnowWho, b2}});  // spurious box
    CHECK(!check_derivation(d2).ok());
  }
}

TEST_CASE("derivation files round-trip") {
  for (const Derivation& d :
       {mp_demo_derivation(), positive_introspection_derivation(Modality::K), positive_introspection_derivation(Modality::A),
        axiom_demo_derivation(SchemaId::KnowAll)}) {
    const std::string text = serialize_derivation(d);
    const Derivation back = parse_derivation(text);
    CHECK(serialize_derivation(back) == text);
    CHECK(check_derivation(back).ok());
    CHECK(back.conclusion() == d.conclusion());
  }
}

TEST_CASE("derivation file format errors") {
  CHECK_THROWS_AS(parse_derivation("nope"), DerivationFormatError);
  CHECK_THROWS_AS(parse_derivation(R"({"lines": []})"), DerivationFormatError);
  CHECK_THROWS_AS(parse_derivation(R"({"hypotheses": [], "lines": [], "x": 1})"),
                  DerivationFormatError);
  CHECK_THROWS_AS(
      parse_derivation(R"({"hypotheses": [], "lines": [{"formula": "p", "rule": "zap"}]})"),
      DerivationFormatError);
  CHECK_THROWS_AS(
      parse_derivation(
          R"({"hypotheses": [], "lines": [{"formula": "p (", "rule": "taut"}]})"),
      DerivationFormatError);
  CHECK_THROWS_AS(
      parse_derivation(
          R"({"hypotheses": [], "lines": [{"formula": "p -> p", "rule": "axiom", "args": {"schema": "zap"}}]})"),
      DerivationFormatError);
}

TEST_CASE("lifting the modus ponens demo") {
  const Derivation lifted = lift_box(mp_demo_derivation(), Modality::K);
  CHECK(lifted.hypotheses ==
        std::vector<Formula>{parse("K p"), parse("K (p -> q)")});
  CHECK(lifted.conclusion() == parse("K q"));
  const DerivationCheck c = check_derivation(lifted);
  CHECK(c.ok());
  CHECK(!c.concludes_theorem());
}

TEST_CASE("lifting a theorem-only derivation necessitates it") {
  Derivation d;
  d.lines.push_back({parse("p -> p"), TautologyJust{}});
  const Derivation lifted = lift_box(d, Modality::A);
  CHECK(lifted.hypotheses.empty());
  CHECK(lifted.conclusion() == parse("A (p -> p)"));
  CHECK(check_derivation(lifted).ok());
}

TEST_CASE("lifting a restated premise") {
  Derivation d;
  d.hypotheses = {var("p")};
  d.lines.push_back({var("p"), PremiseRef{0}});
  const Derivation lifted = lift_box(d, Modality::K);
  CHECK(lifted.hypotheses == std::vector<Formula>{parse("K p")});
  CHECK(lifted.conclusion() == parse("K p"));
  CHECK(check_derivation(lifted).ok());
}

TEST_CASE("lift_box rejects broken inputs and W") {
  Derivation d;
  d.lines.push_back({parse("K p -> p"), TautologyJust{}});  // not a tautology
  CHECK_THROWS_AS(lift_box(d, Modality::K), ProofError);
  CHECK_THROWS_AS(lift_box(mp_demo_derivation(), Modality::W), ProofError);
}

TEST_CASE("lifting random accepted derivations") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const Derivation d = kwtest::random_accepted_derivation(rng);
    REQUIRE(check_derivation(d).ok());
    const Modality box = (i % 2) ? Modality::K : Modality::A;
    const Derivation lifted = lift_box(d, box);
    CHECK(check_derivation(lifted).ok());
    REQUIRE(lifted.hypotheses.size() == d.hypotheses.size());
    for (std::size_t h = 0; h < d.hypotheses.size(); ++h)
      CHECK(lifted.hypotheses[h] == apply_modality(box, d.hypotheses[h]));
    CHECK(lifted.conclusion() == apply_modality(box, d.conclusion()));
  }
}

TEST_CASE("accepted theorem conclusions survive the bounded validity screen") {
  const Bounds b{2, 2, 1, 1};
  CHECK(bounded_validity(positive_introspection_derivation(Modality::K).conclusion(), b).valid_within());
  CHECK(bounded_validity(axiom_demo_derivation(SchemaId::KnowNobody).conclusion(), b)
            .valid_within());
}
