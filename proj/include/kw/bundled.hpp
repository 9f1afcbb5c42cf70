#pragma once

// Bundled example models and derivations, shipped by `kw examples`.
//
// The night-stalker model: two possible worlds. In s1 agent d committed the
// crime, in s2 agent e did (e exists only in s2). Spokesman b cannot tell the
// worlds apart but the name ns tracks the culprit for him, so b knows who —
// without knowing which world is real. Variable p reads "is the culprit".
//
// The press-conference model adds journalist j, also unable to tell the
// worlds apart. For j the name ns sticks to d in both worlds and sp names the
// spokesman, so j does not know who the culprit is, yet knows who (namely sp)
// knows who.

#include <string>
#include <utility>
#include <vector>

#include "kw/checker.hpp"
#include "kw/formula.hpp"
#include "kw/model.hpp"
#include "kw/proofs.hpp"

namespace kw {

inline Model nightstalker_model() {
  Model m;
  m.states = {"s1", "s2"};
  m.agents = {"b", "d", "e"};
  m.names = {"ns"};
  m.presence = {{"b", {"s1", "s2"}}, {"d", {"s1", "s2"}}, {"e", {"s2"}}};
  m.indist = {{"b", {{"s1", "s2"}}}, {"d", {{"s1"}, {"s2"}}}, {"e", {{"s2"}}}};
  m.ident = {{"b", "s1", "ns", "d"},
             {"b", "s2", "ns", "e"},
             {"d", "s1", "ns", "d"},
             {"d", "s2", "ns", "d"},
             {"e", "s2", "ns", "e"}};
  m.valuation = {{"p", {{"d", "s1"}, {"e", "s2"}}}};
  m.normalize();
  return m;
}

inline Model pressconf_model() {
  Model m = nightstalker_model();
  m.agents.push_back("j");
  m.names.push_back("sp");
  m.presence["j"] = {"s1", "s2"};
  m.indist["j"] = {{"s1", "s2"}};
  // j's ns fixates on d in both worlds; sp names the spokesman for everyone
  m.ident.push_back({"j", "s1", "ns", "d"});
  m.ident.push_back({"j", "s2", "ns", "d"});
  for (const std::string a : {"b", "d", "j"}) {
    m.ident.push_back({a, "s1", "sp", "b"});
    m.ident.push_back({a, "s2", "sp", "b"});
  }
  m.ident.push_back({"e", "s2", "sp", "b"});
  m.normalize();
  return m;
}

// q from p and p -> q, by one modus ponens.
inline Derivation mp_demo_derivation() {
  const Formula p = var("p");
  const Formula q = var("q");
  Derivation d;
  d.hypotheses = {p, implies(p, q)};
  d.lines.push_back({p, PremiseRef{0}});
  d.lines.push_back({implies(p, q), PremiseRef{1}});
  d.lines.push_back({q, ModusPonens{0, 1}});
  return d;
}

// box p -> box box p, from truth, distributivity, and negative introspection.
// Writing a = box p, b = box !box p, c = box !box !box p, d = box box p:
// negative introspection gives !a -> b, so !b -> a; necessitating and
// distributing gives c -> d; truth gives b -> !a, and !b -> c is negative
// introspection again; chaining closes a -> d.
inline Derivation positive_introspection_derivation(Modality box) {
  if (box == Modality::W) throw ProofError("positive_introspection_derivation requires box = K or A");
  auto boxed = [&](const Formula& f) { return apply_modality(box, f); };
  const Formula p = var("p");
  const Formula a = boxed(p);
  const Formula b = boxed(lnot(a));
  const Formula c = boxed(lnot(b));
  const Formula d2 = boxed(a);

  auto bind1 = [&](const Formula& phi) {
    SchemaBinding bd;
    bd.vars.emplace("phi", phi);
    bd.box = box;
    return bd;
  };
  auto bind2 = [&](const Formula& phi, const Formula& psi) {
    SchemaBinding bd = bind1(phi);
    bd.vars.emplace("psi", psi);
    return bd;
  };

  Derivation d;
  const Formula l0 = implies(lnot(a), b);
  d.lines.push_back({l0, AxiomRef{SchemaId::NegativeIntrospection, bind1(p)}});
  const Formula l2 = implies(lnot(b), a);
  d.lines.push_back({implies(l0, l2), TautologyJust{}});
  d.lines.push_back({l2, ModusPonens{0, 1}});
  d.lines.push_back({boxed(l2), NecessitationJust{box, 2}});
  const Formula l5 = implies(boxed(lnot(b)), d2);
  d.lines.push_back(
      {implies(boxed(l2), l5), AxiomRef{SchemaId::Distributivity, bind2(lnot(b), a)}});
  d.lines.push_back({l5, ModusPonens{3, 4}});
  const Formula l6 = implies(b, lnot(a));
  d.lines.push_back({l6, AxiomRef{SchemaId::Truth, bind1(lnot(a))}});
  const Formula l7 = implies(lnot(b), c);
  d.lines.push_back({l7, AxiomRef{SchemaId::NegativeIntrospection, bind1(lnot(a))}});
  const Formula goal = implies(a, d2);
  d.lines.push_back(
      {implies(l6, implies(l7, implies(l5, goal))), TautologyJust{}});
  d.lines.push_back({implies(l7, implies(l5, goal)), ModusPonens{6, 8}});
  d.lines.push_back({implies(l5, goal), ModusPonens{7, 9}});
  d.lines.push_back({goal, ModusPonens{5, 10}});
  return d;
}

// One-line derivation citing the schema at a small example instance.
inline Derivation axiom_demo_derivation(SchemaId id) {
  const Formula p = var("p");
  const Formula q = var("q");
  SchemaBinding binding;
  binding.vars.emplace("phi", p);
  switch (id) {
    case SchemaId::Truth:
      binding.box = Modality::K;
      break;
    case SchemaId::Distributivity:
      binding.vars.emplace("psi", q);
      binding.box = Modality::A;
      break;
    case SchemaId::NegativeIntrospection:
      binding.box = Modality::K;
      break;
    case SchemaId::KnowAll:
      binding.vars.emplace("psi", q);
      break;
    case SchemaId::KnowNobody:
    case SchemaId::IntrospectionOfKnowWho:
      break;
  }
  Derivation d;
  d.lines.push_back(
      {instantiate_schema(builtin_schema(id), binding), AxiomRef{id, binding}});
  return d;
}

struct BundledFile {
  std::string name;
  std::string contents;
};

inline std::vector<BundledFile> bundled_files() {
  std::vector<BundledFile> out;
  out.push_back({"nightstalker.kwm", serialize_model(nightstalker_model())});
  out.push_back({"pressconf.kwm", serialize_model(pressconf_model())});
  out.push_back({"mp_demo.kwd", serialize_derivation(mp_demo_derivation())});
  out.push_back({"posintro_k.kwd", serialize_derivation(positive_introspection_derivation(Modality::K))});
  out.push_back({"posintro_a.kwd", serialize_derivation(positive_introspection_derivation(Modality::A))});
  for (const Schema& s : all_schemas())
    out.push_back({"axiom_" + s.key + ".kwd", serialize_derivation(axiom_demo_derivation(s.id))});
  return out;
}

}  // namespace kw
