// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances and budgets in code.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "kw/bundled.hpp"
#include "kw/checker.hpp"
#include "kw/formula.hpp"
#include "kw/model.hpp"
#include "kw/proofs.hpp"
#include "oracle.hpp"

using namespace kw;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool expect(bool cond, const std::string& what, std::string& detail) {
  if (!cond && detail.empty()) detail = what;
  return cond;
}

// ── criterion 1: the bundled-model evaluations ──────────────────────────────

bool figure_one(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  Evaluator ns(nightstalker_model());
  ok &= expect(ns.evaluate({"b", "s1"}, parse("@ns p")).holds, "@ns p at b@s1", detail);
  ok &= expect(ns.evaluate({"b", "s1"}, parse("K @ns p")).holds, "K @ns p at b@s1", detail);
  const EvalResult wp = ns.evaluate({"b", "s1"}, parse("W p"));
  ok &= expect(wp.holds && wp.witness == "ns", "W p at b@s1 with witness ns", detail);
  ok &= expect(ns.evaluate({"d", "s1"}, parse("p")).holds, "p at d@s1", detail);
  ok &= expect(!ns.evaluate({"b", "s1"}, parse("p")).holds, "p false at b@s1", detail);
  Evaluator pc(pressconf_model());
  ok &= expect(!pc.evaluate({"j", "s1"}, parse("W p")).holds, "W p false at j@s1", detail);
  ok &= expect(pc.evaluate({"j", "s1"}, parse("W W p")).holds, "W W p at j@s1", detail);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok &= expect(secs < 1.0, "runtime under one second", detail);
  return ok;
}

// ── criterion 2: axiom soundness fuzz ───────────────────────────────────────

bool axiom_fuzz(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Formula> pool = {
      parse("p1"),      parse("p2"),     parse("!p1"),    parse("p1 -> p2"),
      parse("K p1"),    parse("A p1"),   parse("W p1"),   parse("!W p2"),
      parse("K A p1"),  parse("@n1 p1"),
  };
  std::uint64_t violations = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const Model m = random_model(seed, Bounds{3, 3, 2, 2});
    for (const Schema& s : all_schemas()) violations += check_schema_on_model(m, s, pool).size();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = expect(violations == 0,
                   "zero violations, got " + std::to_string(violations), detail);
  ok &= expect(secs < 120.0, "runtime under two minutes", detail);
  return ok;
}

// ── criterion 3: bounded validity regression ────────────────────────────────

bool validity_regression(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const Bounds b{2, 2, 1, 1};
  bool ok = true;
  for (const char* text :
       {"K p -> p", "A p -> p", "K(p->q) -> (Kp -> Kq)", "!Kp -> K!Kp", "A!p -> !Wp",
        "K A (p->q) -> (W p -> W q)", "W p -> K W p"}) {
    const Verdict v = bounded_validity(parse(text), b);
    ok &= expect(v.valid_within(), std::string("expected valid: ") + text, detail);
  }
  for (const char* text : {"K !A !p -> W p", "W p"}) {
    const Formula f = parse(text);
    const Verdict v = bounded_validity(f, b);
    ok &= expect(!v.valid_within(), std::string("expected counterexample: ") + text, detail);
    if (v.counterexample) {
      ok &= expect(validate(v.counterexample->model).empty(),
                   std::string("countermodel validates: ") + text, detail);
      ok &= expect(!evaluate(v.counterexample->model, v.counterexample->view, f).holds,
                   std::string("countermodel re-verifies: ") + text, detail);
      ok &= expect(!kwtest::oracle_holds(v.counterexample->model, v.counterexample->view, f),
                   std::string("countermodel re-verifies on the reference route: ") + text,
                   detail);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok &= expect(secs < 60.0, "runtime under one minute", detail);
  return ok;
}

// ── criterion 4: proof suite ────────────────────────────────────────────────

bool proof_suite(std::string& detail) {
  bool ok = true;
  for (const Schema& s : all_schemas()) {
    ok &= expect(check_derivation(axiom_demo_derivation(s.id)).ok(),
                 "one-line axiom accepted: " + s.key, detail);
    Derivation corrupted = axiom_demo_derivation(s.id);
    corrupted.lines[0].formula = implies(corrupted.lines[0].formula, var("z"));
    const DerivationCheck c = check_derivation(corrupted);
    ok &= expect(!c.ok() && c.error->line == 0, "corrupted axiom rejected at line 0: " + s.key,
                 detail);
  }
  for (const Modality box : {Modality::K, Modality::A}) {
    const Derivation d = positive_introspection_derivation(box);
    const DerivationCheck c = check_derivation(d);
    ok &= expect(c.ok() && c.concludes_theorem(),
                 "positive introspection derivation accepted", detail);
    ok &= expect(d.conclusion() == parse(box == Modality::K ? "K p -> K K p" : "A p -> A A p"),
                 "positive introspection conclusion", detail);

    Derivation swap = d;  // index swap in the first modus ponens
    swap.lines[2].justification = ModusPonens{1, 0};
    const DerivationCheck cs = check_derivation(swap);
    ok &= expect(!cs.ok() && cs.error->line == 2, "index swap rejected at line 2", detail);

    Derivation edit = d;  // formula edit on the final line
    edit.lines[11].formula = lnot(edit.lines[11].formula);
    const DerivationCheck ce = check_derivation(edit);
    ok &= expect(!ce.ok() && ce.error->line == 11, "formula edit rejected at line 11", detail);
  }
  return ok;
}

// ── criterion 5: box lifting ────────────────────────────────────────────────

bool lift_suite(std::string& detail) {
  bool ok = true;
  const Derivation lifted = lift_box(mp_demo_derivation(), Modality::K);
  ok &= expect(check_derivation(lifted).ok(), "lifted demo accepted", detail);
  ok &= expect(lifted.hypotheses == std::vector<Formula>{parse("K p"), parse("K (p -> q)")},
               "lifted demo hypotheses", detail);
  ok &= expect(lifted.conclusion() == parse("K q"), "lifted demo conclusion", detail);

  std::mt19937_64 rng(5005);
  for (int i = 0; i < 100; ++i) {
    const Derivation d = kwtest::random_accepted_derivation(rng);
    if (!check_derivation(d).ok()) return expect(false, "generator produced a reject", detail);
    const Modality box = (i % 2) ? Modality::K : Modality::A;
    const Derivation l = lift_box(d, box);
    ok &= expect(check_derivation(l).ok(), "random lift accepted", detail);
    bool hyps = l.hypotheses.size() == d.hypotheses.size();
    for (std::size_t h = 0; hyps && h < d.hypotheses.size(); ++h)
      hyps = l.hypotheses[h] == apply_modality(box, d.hypotheses[h]);
    ok &= expect(hyps, "random lift hypotheses boxed in order", detail);
    ok &= expect(l.conclusion() == apply_modality(box, d.conclusion()),
                 "random lift conclusion boxed", detail);
    if (!ok) break;
  }
  return ok;
}

// ── criterion 6: labelling vs the reference evaluator ───────────────────────

bool oracle_equivalence(std::string& detail) {
  std::mt19937_64 rng(6006);
  kwtest::FormulaGen gen;
  gen.vars = {"p1", "p2"};
  for (int i = 0; i < 500; ++i) {
    const Model m = random_model(rng(), Bounds{3, 3, 2, 2});
    gen.names = m.names;
    const Formula f = gen(rng, 4);
    const Labelling lab = label(m, f);
    for (std::size_t g = 0; g < lab.subformulas.size(); ++g) {
      std::vector<View> by_oracle, by_evaluate;
      for (const auto& [a, ss] : m.presence)
        for (const auto& s : ss) {
          if (kwtest::oracle_holds(m, {a, s}, lab.subformulas[g]))
            by_oracle.push_back({a, s});
          if (evaluate(m, {a, s}, lab.subformulas[g]).holds) by_evaluate.push_back({a, s});
        }
      std::sort(by_oracle.begin(), by_oracle.end());
      std::sort(by_evaluate.begin(), by_evaluate.end());
      if (lab.satisfying[g] != by_oracle || lab.satisfying[g] != by_evaluate)
        return expect(false,
                      "disagreement on " + render(lab.subformulas[g]) + " (pair " +
                          std::to_string(i) + ")",
                      detail);
    }
  }
  return true;
}

// ── criterion 7: round trips ────────────────────────────────────────────────

bool round_trips(std::string& detail) {
  std::mt19937_64 rng(7007);
  for (int i = 0; i < 1000; ++i) {
    const Formula f = kwtest::random_formula(rng, 8);
    if (parse(render(f)) != f)
      return expect(false, "formula round trip broke on " + render(f), detail);
  }
  const std::string path = "acceptance_roundtrip.kwm";
  for (int i = 0; i < 200; ++i) {
    const Model m = random_model(rng(), Bounds{3, 3, 2, 2});
    store_model(m, path);
    const Model back = load_model(path);
    if (!(back == m)) {
      std::remove(path.c_str());
      return expect(false, "model round trip broke at seed index " + std::to_string(i),
                    detail);
    }
  }
  std::remove(path.c_str());
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"bundled-model evaluations", figure_one},
      {"axiom soundness on 10000 random models", axiom_fuzz},
      {"bounded validity regression", validity_regression},
      {"derivation checking", proof_suite},
      {"box lifting", lift_suite},
      {"labelling vs reference evaluator on 500 pairs", oracle_equivalence},
      {"round trips (1000 formulae, 200 models)", round_trips},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu: %-48s %s (%.2fs)%s%s\n", i + 1, criteria[i].name.c_str(),
                ok ? "PASS" : "FAIL", secs, detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++failures;
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
