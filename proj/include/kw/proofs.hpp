#pragma once

// ============================================================================
// kw/proofs.hpp — Hilbert-style proof system
// ============================================================================
//
// Axiom schemas (box stands uniformly for K or A within one instance):
//
//   truth        box phi -> phi
//   dist         box (phi -> psi) -> (box phi -> box psi)
//   negintro     !box phi -> box !box phi
//   knownobody   A !phi -> !W phi
//   knowall      K A (phi -> psi) -> (W phi -> W psi)
//   introwho     W phi -> K W phi
//
// plus propositional tautologies over modal atoms. A derivation is a list of
// justified lines over an ordered hypothesis list. Lines are classified:
//
//   theorem lines    tautologies, axiom instances, necessitations, and
//                    modus ponens of two theorem lines
//   deduction lines  premises, and modus ponens involving a deduction line
//
// Necessitation (for A, K, or W) applies to theorem lines only; hypotheses
// feed the conclusion through modus ponens alone. lift_box() rewrites an
// accepted derivation of psi from phi_1..phi_n into one of box psi from
// box phi_1..box phi_n.
//
// File format (.kwd): JSON object {hypotheses: [string], lines: [...]} where
// each line is {formula, rule, args}; rules are premise/taut/axiom/mp/nec.
// ============================================================================

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kw/formula.hpp"

namespace kw {

// ── modalities ──────────────────────────────────────────────────────────────

enum class Modality : std::uint8_t { K, A, W };

inline std::string to_string(Modality m) {
  switch (m) {
    case Modality::K: return "K";
    case Modality::A: return "A";
    case Modality::W: return "W";
  }
  return "?";
}

inline std::optional<Modality> modality_from_string(const std::string& s) {
  if (s == "K") return Modality::K;
  if (s == "A") return Modality::A;
  if (s == "W") return Modality::W;
  return std::nullopt;
}

inline Formula apply_modality(Modality m, const Formula& f) {
  switch (m) {
    case Modality::K: return know(f);
    case Modality::A: return all_agents(f);
    case Modality::W: return know_who(f);
  }
  throw std::logic_error("bad modality");
}

// ── schema patterns ─────────────────────────────────────────────────────────

// A pattern is a formula shape whose leaves may be metavariables and whose
// modal nodes may be the box placeholder (K or A, uniform per instance).
class Pattern {
 public:
  enum class Kind : std::uint8_t { Meta, Not, Implies, Box, Know, AllAgents, KnowWho };

  Kind kind() const { return node_->kind; }
  const std::string& meta() const { return node_->id; }
  Pattern body() const { return Pattern(node_->a); }
  Pattern left() const { return Pattern(node_->a); }
  Pattern right() const { return Pattern(node_->b); }

  friend Pattern meta(const std::string& id);
  friend Pattern pnot(const Pattern& p);
  friend Pattern pimplies(const Pattern& l, const Pattern& r);
  friend Pattern pbox(const Pattern& p);
  friend Pattern pknow(const Pattern& p);
  friend Pattern pall(const Pattern& p);
  friend Pattern pknow_who(const Pattern& p);

 private:
  struct Node {
    Kind kind;
    std::string id;
    std::shared_ptr<const Node> a, b;
  };
  explicit Pattern(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Pattern make(Kind k, std::string id, std::shared_ptr<const Node> a,
                      std::shared_ptr<const Node> b) {
    return Pattern(std::make_shared<const Node>(Node{k, std::move(id), std::move(a),
                                                     std::move(b)}));
  }
  std::shared_ptr<const Node> node_;
};

inline Pattern meta(const std::string& id) {
  return Pattern::make(Pattern::Kind::Meta, id, nullptr, nullptr);
}
inline Pattern pnot(const Pattern& p) {
  return Pattern::make(Pattern::Kind::Not, {}, p.node_, nullptr);
}
inline Pattern pimplies(const Pattern& l, const Pattern& r) {
  return Pattern::make(Pattern::Kind::Implies, {}, l.node_, r.node_);
}
inline Pattern pbox(const Pattern& p) {
  return Pattern::make(Pattern::Kind::Box, {}, p.node_, nullptr);
}
inline Pattern pknow(const Pattern& p) {
  return Pattern::make(Pattern::Kind::Know, {}, p.node_, nullptr);
}
inline Pattern pall(const Pattern& p) {
  return Pattern::make(Pattern::Kind::AllAgents, {}, p.node_, nullptr);
}
inline Pattern pknow_who(const Pattern& p) {
  return Pattern::make(Pattern::Kind::KnowWho, {}, p.node_, nullptr);
}

enum class SchemaId : std::uint8_t {
  Truth,
  Distributivity,
  NegativeIntrospection,
  KnowNobody,
  KnowAll,
  IntrospectionOfKnowWho,
};

struct Schema {
  SchemaId id;
  std::string key;                     // file-format identifier
  Pattern pattern;
  std::vector<std::string> metavars;   // in binding order
  bool has_box;
};

inline const std::vector<Schema>& all_schemas() {
  static const std::vector<Schema> kSchemas = [] {
    const Pattern phi = meta("phi");
    const Pattern psi = meta("psi");
    std::vector<Schema> v;
    v.push_back({SchemaId::Truth, "truth", pimplies(pbox(phi), phi), {"phi"}, true});
    v.push_back({SchemaId::Distributivity, "dist",
                 pimplies(pbox(pimplies(phi, psi)), pimplies(pbox(phi), pbox(psi))),
                 {"phi", "psi"},
                 true});
    v.push_back({SchemaId::NegativeIntrospection, "negintro",
                 pimplies(pnot(pbox(phi)), pbox(pnot(pbox(phi)))),
                 {"phi"},
                 true});
    v.push_back({SchemaId::KnowNobody, "knownobody",
                 pimplies(pall(pnot(phi)), pnot(pknow_who(phi))),
                 {"phi"},
                 false});
    v.push_back({SchemaId::KnowAll, "knowall",
                 pimplies(pknow(pall(pimplies(phi, psi))),
                          pimplies(pknow_who(phi), pknow_who(psi))),
                 {"phi", "psi"},
                 false});
    v.push_back({SchemaId::IntrospectionOfKnowWho, "introwho",
                 pimplies(pknow_who(phi), pknow(pknow_who(phi))),
                 {"phi"},
                 false});
    return v;
  }();
  return kSchemas;
}

inline const Schema& builtin_schema(SchemaId id) {
  for (const Schema& s : all_schemas())
    if (s.id == id) return s;
  throw std::logic_error("bad schema id");
}

inline const Schema* schema_by_key(const std::string& key) {
  for (const Schema& s : all_schemas())
    if (s.key == key) return &s;
  return nullptr;
}

struct SchemaBinding {
  std::map<std::string, Formula> vars;
  std::optional<Modality> box;  // K or A; set iff the schema uses box
};

namespace detail {

inline bool match_pattern(const Pattern& p, const Formula& f, SchemaBinding& b) {
  using PK = Pattern::Kind;
  using FK = Formula::Kind;
  switch (p.kind()) {
    case PK::Meta: {
      auto [it, inserted] = b.vars.try_emplace(p.meta(), f);
      return inserted || it->second == f;
    }
    case PK::Not:
      return f.is(FK::Not) && match_pattern(p.body(), f.body(), b);
    case PK::Implies:
      return f.is(FK::Implies) && match_pattern(p.left(), f.left(), b) &&
             match_pattern(p.right(), f.right(), b);
    case PK::Know:
      return f.is(FK::Know) && match_pattern(p.body(), f.body(), b);
    case PK::AllAgents:
      return f.is(FK::AllAgents) && match_pattern(p.body(), f.body(), b);
    case PK::KnowWho:
      return f.is(FK::KnowWho) && match_pattern(p.body(), f.body(), b);
    case PK::Box: {
      Modality m;
      if (f.is(FK::Know))
        m = Modality::K;
      else if (f.is(FK::AllAgents))
        m = Modality::A;
      else
        return false;
      if (b.box && *b.box != m) return false;
      b.box = m;
      return match_pattern(p.body(), f.body(), b);
    }
  }
  return false;
}

}  // namespace detail

// Structural match of f against the schema; bindings are consistent across
// occurrences and box resolves uniformly to K or A.
inline std::optional<SchemaBinding> match_schema(const Schema& schema, const Formula& f) {
  SchemaBinding b;
  if (!detail::match_pattern(schema.pattern, f, b)) return std::nullopt;
  return b;
}

struct ProofError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Formula instantiate_schema(const Pattern& p, const SchemaBinding& b) {
  using PK = Pattern::Kind;
  switch (p.kind()) {
    case PK::Meta: {
      const auto it = b.vars.find(p.meta());
      if (it == b.vars.end())
        throw ProofError("binding does not cover metavariable '" + p.meta() + "'");
      return it->second;
    }
    case PK::Not: return lnot(instantiate_schema(p.body(), b));
    case PK::Implies:
      return implies(instantiate_schema(p.left(), b), instantiate_schema(p.right(), b));
    case PK::Know: return know(instantiate_schema(p.body(), b));
    case PK::AllAgents: return all_agents(instantiate_schema(p.body(), b));
    case PK::KnowWho: return know_who(instantiate_schema(p.body(), b));
    case PK::Box: {
      if (!b.box) throw ProofError("binding does not fix the box modality");
      if (*b.box == Modality::W) throw ProofError("box must be K or A");
      return apply_modality(*b.box, instantiate_schema(p.body(), b));
    }
  }
  throw std::logic_error("bad pattern");
}

inline Formula instantiate_schema(const Schema& s, const SchemaBinding& b) {
  return instantiate_schema(s.pattern, b);
}

// ── propositional tautology recognition ─────────────────────────────────────

inline constexpr int kTautologyAtomBudget = 20;

struct TautologyBudgetError : std::runtime_error {
  explicit TautologyBudgetError(std::size_t atoms_)
      : std::runtime_error("tautology check exceeds atom budget: " +
                           std::to_string(atoms_) + " > " +
                           std::to_string(kTautologyAtomBudget)),
        atoms(atoms_) {}
  std::size_t atoms;
};

namespace detail {

// Maximal subformulae whose head is not a Boolean connective, in first-visit
// order. These are the truth-table atoms.
inline void collect_modal_atoms(const Formula& f, std::vector<Formula>& atoms,
                                std::unordered_set<Formula, FormulaHash>& seen) {
  switch (f.kind()) {
    case Formula::Kind::Not:
      collect_modal_atoms(f.body(), atoms, seen);
      return;
    case Formula::Kind::Implies:
      collect_modal_atoms(f.left(), atoms, seen);
      collect_modal_atoms(f.right(), atoms, seen);
      return;
    default:
      if (seen.insert(f).second) atoms.push_back(f);
      return;
  }
}

inline bool eval_boolean(const Formula& f,
                         const std::unordered_map<Formula, std::size_t, FormulaHash>& ix,
                         std::uint32_t assignment) {
  switch (f.kind()) {
    case Formula::Kind::Not:
      return !eval_boolean(f.body(), ix, assignment);
    case Formula::Kind::Implies:
      return !eval_boolean(f.left(), ix, assignment) ||
             eval_boolean(f.right(), ix, assignment);
    default:
      return (assignment >> ix.at(f)) & 1;
  }
}

}  // namespace detail

// Truth-table validity over modal atoms (W/K/A/@-headed subformulae and
// variables each count as one atom). Throws past the atom budget.
inline bool check_tautology(const Formula& f) {
  std::vector<Formula> atoms;
  std::unordered_set<Formula, FormulaHash> seen;
  detail::collect_modal_atoms(f, atoms, seen);
  if (atoms.size() > kTautologyAtomBudget) throw TautologyBudgetError(atoms.size());
  std::unordered_map<Formula, std::size_t, FormulaHash> ix;
  for (std::size_t i = 0; i < atoms.size(); ++i) ix.emplace(atoms[i], i);
  const std::uint32_t total = 1u << atoms.size();
  for (std::uint32_t a = 0; a < total; ++a)
    if (!detail::eval_boolean(f, ix, a)) return false;
  return true;
}

// ── derivations ─────────────────────────────────────────────────────────────

struct PremiseRef {
  std::size_t index;  // zero-based hypothesis index
};
struct TautologyJust {};
struct AxiomRef {
  SchemaId schema;
  SchemaBinding binding;
};
struct ModusPonens {
  std::size_t antecedent;   // line holding phi
  std::size_t implication;  // line holding phi -> psi
};
struct NecessitationJust {
  Modality modality;
  std::size_t line;
};

using Justification =
    std::variant<PremiseRef, TautologyJust, AxiomRef, ModusPonens, NecessitationJust>;

struct DerivationLine {
  Formula formula;
  Justification justification;
};

struct Derivation {
  std::vector<Formula> hypotheses;
  std::vector<DerivationLine> lines;

  const Formula& conclusion() const {
    if (lines.empty()) throw ProofError("derivation has no lines");
    return lines.back().formula;
  }
};

struct DerivationError {
  std::size_t line;
  std::string reason;
};

struct DerivationCheck {
  std::optional<DerivationError> error;
  std::vector<bool> theorem_line;  // classification of each checked line

  bool ok() const { return !error.has_value(); }
  // True when the conclusion is a theorem line (no hypothesis feeds it).
  bool concludes_theorem() const { return ok() && !theorem_line.empty() && theorem_line.back(); }
};

inline DerivationCheck check_derivation(const Derivation& d) {
  DerivationCheck out;
  auto fail = [&](std::size_t line, std::string reason) {
    out.error = DerivationError{line, std::move(reason)};
    return out;
  };
  if (d.lines.empty()) return fail(0, "derivation has no lines");

  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const DerivationLine& ln = d.lines[i];
    if (const auto* p = std::get_if<PremiseRef>(&ln.justification)) {
      if (p->index >= d.hypotheses.size())
        return fail(i, "premise index " + std::to_string(p->index) + " out of range");
      if (ln.formula != d.hypotheses[p->index])
        return fail(i, "formula differs from hypothesis " + std::to_string(p->index));
      out.theorem_line.push_back(false);
    } else if (std::holds_alternative<TautologyJust>(ln.justification)) {
      try {
        if (!check_tautology(ln.formula))
          return fail(i, "formula is not a propositional tautology");
      } catch (const TautologyBudgetError& e) {
        return fail(i, e.what());
      }
      out.theorem_line.push_back(true);
    } else if (const auto* ax = std::get_if<AxiomRef>(&ln.justification)) {
      const Schema& schema = builtin_schema(ax->schema);
      if (schema.has_box) {
        if (!ax->binding.box || *ax->binding.box == Modality::W)
          return fail(i, "axiom '" + schema.key + "' needs box = K or A");
      } else if (ax->binding.box) {
        return fail(i, "axiom '" + schema.key + "' takes no box");
      }
      std::optional<Formula> expect;
      try {
        expect = instantiate_schema(schema, ax->binding);
      } catch (const ProofError& e) {
        return fail(i, e.what());
      }
      if (*expect != ln.formula)
        return fail(i, "formula is not the cited instance of '" + schema.key + "'");
      out.theorem_line.push_back(true);
    } else if (const auto* mp = std::get_if<ModusPonens>(&ln.justification)) {
      if (mp->antecedent >= i || mp->implication >= i)
        return fail(i, "modus ponens may only cite earlier lines");
      const Formula& impl = d.lines[mp->implication].formula;
      if (!impl.is(Formula::Kind::Implies))
        return fail(i, "line " + std::to_string(mp->implication) + " is not an implication");
      if (impl.left() != d.lines[mp->antecedent].formula)
        return fail(i, "antecedent does not match line " + std::to_string(mp->antecedent));
      if (impl.right() != ln.formula)
        return fail(i, "formula is not the consequent of line " +
                           std::to_string(mp->implication));
      out.theorem_line.push_back(out.theorem_line[mp->antecedent] &&
                                 out.theorem_line[mp->implication]);
    } else if (const auto* nec = std::get_if<NecessitationJust>(&ln.justification)) {
      if (nec->line >= i) return fail(i, "necessitation may only cite an earlier line");
      if (!out.theorem_line[nec->line])
        return fail(i, "necessitation applied to a deduction line");
      if (ln.formula != apply_modality(nec->modality, d.lines[nec->line].formula))
        return fail(i, "formula is not " + to_string(nec->modality) + " of line " +
                           std::to_string(nec->line));
      out.theorem_line.push_back(true);
    }
  }
  return out;
}

// ── box lifting ─────────────────────────────────────────────────────────────

// From an accepted derivation of psi from phi_1..phi_n, builds an accepted
// derivation of box psi from box phi_1..box phi_n:
//   * theorem lines are copied and followed by a necessitation,
//   * premises become boxed premises,
//   * each modus ponens on the deduction side goes through a distributivity
//     instance: box phi and box(phi -> psi) yield box psi.
inline Derivation lift_box(const Derivation& d, Modality box) {
  if (box == Modality::W) throw ProofError("lift_box requires box = K or A");
  const DerivationCheck check = check_derivation(d);
  if (!check.ok())
    throw ProofError("input derivation is not accepted (line " +
                     std::to_string(check.error->line) + ": " + check.error->reason + ")");

  Derivation out;
  out.hypotheses.reserve(d.hypotheses.size());
  for (const Formula& h : d.hypotheses) out.hypotheses.push_back(apply_modality(box, h));

  std::vector<std::size_t> copy_ix(d.lines.size());   // theorem lines only
  std::vector<std::size_t> boxed_ix(d.lines.size());  // line holding box(original)

  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const DerivationLine& ln = d.lines[i];
    if (check.theorem_line[i]) {
      Justification just = ln.justification;
      if (auto* mp = std::get_if<ModusPonens>(&just)) {
        mp->antecedent = copy_ix[mp->antecedent];
        mp->implication = copy_ix[mp->implication];
      } else if (auto* nec = std::get_if<NecessitationJust>(&just)) {
        nec->line = copy_ix[nec->line];
      }
      out.lines.push_back({ln.formula, just});
      copy_ix[i] = out.lines.size() - 1;
      out.lines.push_back(
          {apply_modality(box, ln.formula), NecessitationJust{box, copy_ix[i]}});
      boxed_ix[i] = out.lines.size() - 1;
    } else if (const auto* p = std::get_if<PremiseRef>(&ln.justification)) {
      out.lines.push_back({out.hypotheses[p->index], PremiseRef{p->index}});
      boxed_ix[i] = out.lines.size() - 1;
    } else {
      const auto& mp = std::get<ModusPonens>(ln.justification);
      const Formula phi = d.lines[mp.antecedent].formula;
      const Formula psi = ln.formula;
      SchemaBinding binding;
      binding.vars.emplace("phi", phi);
      binding.vars.emplace("psi", psi);
      binding.box = box;
      const Schema& dist = builtin_schema(SchemaId::Distributivity);
      out.lines.push_back(
          {instantiate_schema(dist, binding), AxiomRef{SchemaId::Distributivity, binding}});
      const std::size_t dist_ix = out.lines.size() - 1;
      out.lines.push_back(
          {implies(apply_modality(box, phi), apply_modality(box, psi)),
           ModusPonens{boxed_ix[mp.implication], dist_ix}});
      const std::size_t step_ix = out.lines.size() - 1;
      out.lines.push_back(
          {apply_modality(box, psi), ModusPonens{boxed_ix[mp.antecedent], step_ix}});
      boxed_ix[i] = out.lines.size() - 1;
    }
  }
  return out;
}

// ── .kwd persistence ────────────────────────────────────────────────────────

struct DerivationFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Formula parse_formula_field(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_string()) throw DerivationFormatError(ctx + " must be a formula string");
  try {
    return parse(j.get<std::string>());
  } catch (const ParseError& e) {
    throw DerivationFormatError(ctx + ": " + e.what() + " at byte " +
                                std::to_string(e.offset));
  }
}

}  // namespace detail

inline Derivation derivation_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DerivationFormatError("derivation file must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "hypotheses" && key != "lines")
      throw DerivationFormatError("unknown field '" + key + "'");
  Derivation d;
  const auto hyp = j.find("hypotheses");
  if (hyp == j.end() || !hyp->is_array())
    throw DerivationFormatError("missing field 'hypotheses'");
  for (std::size_t i = 0; i < hyp->size(); ++i)
    d.hypotheses.push_back(
        detail::parse_formula_field((*hyp)[i], "hypothesis " + std::to_string(i)));

  const auto lines = j.find("lines");
  if (lines == j.end() || !lines->is_array())
    throw DerivationFormatError("missing field 'lines'");
  for (std::size_t i = 0; i < lines->size(); ++i) {
    const auto& lj = (*lines)[i];
    const std::string ctx = "line " + std::to_string(i);
    if (!lj.is_object()) throw DerivationFormatError(ctx + " must be an object");
    const Formula f = detail::parse_formula_field(
        lj.contains("formula") ? lj["formula"] : nlohmann::json(), ctx + " formula");
    if (!lj.contains("rule") || !lj["rule"].is_string())
      throw DerivationFormatError(ctx + " is missing 'rule'");
    const std::string rule = lj["rule"].get<std::string>();
    const nlohmann::json args =
        lj.contains("args") ? lj["args"] : nlohmann::json::object();

    Justification just;
    if (rule == "premise") {
      if (!args.contains("index") || !args["index"].is_number_unsigned())
        throw DerivationFormatError(ctx + ": premise needs an 'index'");
      just = PremiseRef{args["index"].get<std::size_t>()};
    } else if (rule == "taut") {
      just = TautologyJust{};
    } else if (rule == "axiom") {
      if (!args.contains("schema") || !args["schema"].is_string())
        throw DerivationFormatError(ctx + ": axiom needs a 'schema'");
      const Schema* schema = schema_by_key(args["schema"].get<std::string>());
      if (!schema)
        throw DerivationFormatError(ctx + ": unknown schema '" +
                                    args["schema"].get<std::string>() + "'");
      SchemaBinding binding;
      if (args.contains("box")) {
        if (!args["box"].is_string())
          throw DerivationFormatError(ctx + ": 'box' must be \"K\" or \"A\"");
        const auto m = modality_from_string(args["box"].get<std::string>());
        if (!m || *m == Modality::W)
          throw DerivationFormatError(ctx + ": 'box' must be \"K\" or \"A\"");
        binding.box = m;
      }
      if (args.contains("binding")) {
        if (!args["binding"].is_object())
          throw DerivationFormatError(ctx + ": 'binding' must be an object");
        for (const auto& [mv, ftext] : args["binding"].items())
          binding.vars.emplace(mv,
                               detail::parse_formula_field(ftext, ctx + " binding " + mv));
      }
      just = AxiomRef{schema->id, std::move(binding)};
    } else if (rule == "mp") {
      if (!args.contains("lines") || !args["lines"].is_array() ||
          args["lines"].size() != 2 || !args["lines"][0].is_number_unsigned() ||
          !args["lines"][1].is_number_unsigned())
        throw DerivationFormatError(ctx + ": mp needs 'lines': [antecedent, implication]");
      just = ModusPonens{args["lines"][0].get<std::size_t>(),
                         args["lines"][1].get<std::size_t>()};
    } else if (rule == "nec") {
      if (!args.contains("modality") || !args["modality"].is_string())
        throw DerivationFormatError(ctx + ": nec needs a 'modality'");
      const auto m = modality_from_string(args["modality"].get<std::string>());
      if (!m) throw DerivationFormatError(ctx + ": modality must be A, K, or W");
      if (!args.contains("line") || !args["line"].is_number_unsigned())
        throw DerivationFormatError(ctx + ": nec needs a 'line'");
      just = NecessitationJust{*m, args["line"].get<std::size_t>()};
    } else {
      throw DerivationFormatError(ctx + ": unknown rule '" + rule + "'");
    }
    d.lines.push_back({f, std::move(just)});
  }
  return d;
}

inline nlohmann::json derivation_to_json(const Derivation& d) {
  nlohmann::json j;
  j["hypotheses"] = nlohmann::json::array();
  for (const Formula& h : d.hypotheses) j["hypotheses"].push_back(render(h));
  j["lines"] = nlohmann::json::array();
  for (const DerivationLine& ln : d.lines) {
    nlohmann::json lj;
    lj["formula"] = render(ln.formula);
    if (const auto* p = std::get_if<PremiseRef>(&ln.justification)) {
      lj["rule"] = "premise";
      lj["args"]["index"] = p->index;
    } else if (std::holds_alternative<TautologyJust>(ln.justification)) {
      lj["rule"] = "taut";
    } else if (const auto* ax = std::get_if<AxiomRef>(&ln.justification)) {
      lj["rule"] = "axiom";
      lj["args"]["schema"] = builtin_schema(ax->schema).key;
      if (ax->binding.box) lj["args"]["box"] = to_string(*ax->binding.box);
      for (const auto& [mv, f] : ax->binding.vars) lj["args"]["binding"][mv] = render(f);
    } else if (const auto* mp = std::get_if<ModusPonens>(&ln.justification)) {
      lj["rule"] = "mp";
      lj["args"]["lines"] = {mp->antecedent, mp->implication};
    } else if (const auto* nec = std::get_if<NecessitationJust>(&ln.justification)) {
      lj["rule"] = "nec";
      lj["args"]["modality"] = to_string(nec->modality);
      lj["args"]["line"] = nec->line;
    }
    j["lines"].push_back(std::move(lj));
  }
  return j;
}

inline std::string serialize_derivation(const Derivation& d) {
  return derivation_to_json(d).dump(2) + "\n";
}

inline Derivation parse_derivation(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DerivationFormatError(std::string("invalid JSON: ") + e.what());
  }
  return derivation_from_json(j);
}

inline Derivation load_derivation(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DerivationFormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_derivation(buf.str());
}

inline void store_derivation(const Derivation& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DerivationFormatError("cannot write '" + path + "'");
  out << serialize_derivation(d);
}

}  // namespace kw
