// kw — command line front end: model validation, formula checking, bounded
// validity search, derivation checking, and bundled examples.
//
// Exit codes: 0 true/valid/accepted, 1 false/counterexample/rejected,
// 2 usage, parse, or validation errors. Output is line oriented and
// deterministic; diagnostics go to stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kw/bundled.hpp"
#include "kw/checker.hpp"
#include "kw/formula.hpp"
#include "kw/model.hpp"
#include "kw/proofs.hpp"

namespace {

constexpr int kTrue = 0;
constexpr int kFalse = 1;
constexpr int kError = 2;

int workers_from_env() {
  const char* env = std::getenv("KW_PARALLELISM");
  if (!env) return 1;
  const int w = std::atoi(env);
  return w < 1 ? 1 : (w > 64 ? 64 : w);
}

kw::View parse_view_arg(const std::string& s) {
  const auto at = s.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == s.size())
    throw std::invalid_argument("view must be written agent@state, got '" + s + "'");
  return {s.substr(0, at), s.substr(at + 1)};
}

std::string describe_parse_error(const kw::ParseError& e) {
  std::string msg = std::string("parse error at byte ") + std::to_string(e.offset) + ": " +
                    e.what();
  if (!e.expected.empty()) {
    msg += " (expected";
    for (const auto& t : e.expected) msg += " " + t;
    msg += ")";
  }
  return msg;
}

int cmd_validate(const std::string& path, bool lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kw::ModelFormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw kw::ModelFormatError(std::string("invalid JSON: ") + e.what());
  }
  kw::Model m = kw::model_from_json(j);
  if (lenient)
    for (const auto& t : kw::drop_absent_user_tuples(m))
      std::cout << "warning code=ident_user_absent dropped tuple=" << kw::to_string(t) << "\n";
  const auto issues = kw::validate(m);
  if (issues.empty()) {
    std::cout << "ok states=" << m.states.size() << " agents=" << m.agents.size()
              << " names=" << m.names.size() << "\n";
    return kTrue;
  }
  for (const auto& i : issues) std::cout << kw::to_string(i) << "\n";
  return kFalse;
}

int cmd_check(const std::string& path, const std::string& view_arg,
              const std::string& formula_text, bool want_witness) {
  const kw::Model m = kw::load_model(path);
  const kw::View v = parse_view_arg(view_arg);
  const kw::Formula f = kw::parse(formula_text);
  const kw::EvalResult r = kw::evaluate(m, v, f);
  std::cout << (r.holds ? "true" : "false");
  if (want_witness && r.witness) std::cout << " witness=" << *r.witness;
  std::cout << "\n";
  return r.holds ? kTrue : kFalse;
}

int cmd_label(const std::string& path, const std::string& formula_text) {
  const kw::Model m = kw::load_model(path);
  const kw::Labelling lab = kw::label(m, kw::parse(formula_text));
  for (std::size_t i = 0; i < lab.subformulas.size(); ++i) {
    std::cout << kw::render(lab.subformulas[i]) << ":";
    for (const kw::View& v : lab.satisfying[i]) std::cout << " " << kw::to_string(v);
    std::cout << "\n";
  }
  return kTrue;
}

int cmd_valid(const std::string& formula_text, const kw::Bounds& bounds,
              const std::string& countermodel_path) {
  const kw::Formula f = kw::parse(formula_text);
  const kw::Verdict v = kw::bounded_validity(f, bounds, workers_from_env());
  if (v.valid_within()) {
    std::cout << "valid-within " << kw::to_string(v.bounds) << "\n";
    std::cout << "models-checked=" << v.models_checked << "\n";
    return kTrue;
  }
  const kw::Counterexample& cx = *v.counterexample;
  std::cout << "counterexample view=" << kw::to_string(cx.view) << "\n";
  std::cout << "states=" << cx.model.states.size() << " agents=" << cx.model.agents.size()
            << " names=" << cx.model.names.size() << "\n";
  std::cout << "models-checked=" << v.models_checked << "\n";
  if (!countermodel_path.empty()) {
    kw::store_model(cx.model, countermodel_path);
    std::cout << "countermodel=" << countermodel_path << "\n";
  }
  return kFalse;
}

int cmd_prove(const std::string& path) {
  const kw::Derivation d = kw::load_derivation(path);
  const kw::DerivationCheck c = kw::check_derivation(d);
  if (c.ok()) {
    std::cout << "accepted lines=" << d.lines.size()
              << " theorem=" << (c.concludes_theorem() ? "yes" : "no") << "\n";
    return kTrue;
  }
  std::cout << "rejected line=" << c.error->line << " reason=" << c.error->reason << "\n";
  return kFalse;
}

int cmd_lift(const std::string& path, const std::string& box_arg,
             const std::string& out_path) {
  const auto box = kw::modality_from_string(box_arg);
  if (!box || *box == kw::Modality::W)
    throw std::invalid_argument("--box must be K or A");
  const kw::Derivation d = kw::load_derivation(path);
  const kw::DerivationCheck c = kw::check_derivation(d);
  if (!c.ok()) {
    std::cout << "rejected line=" << c.error->line << " reason=" << c.error->reason << "\n";
    return kFalse;
  }
  const kw::Derivation lifted = kw::lift_box(d, *box);
  if (out_path.empty()) {
    std::cout << kw::serialize_derivation(lifted);
  } else {
    kw::store_derivation(lifted, out_path);
    std::cout << "lifted lines=" << lifted.lines.size()
              << " conclusion=" << kw::render(lifted.conclusion()) << " out=" << out_path
              << "\n";
  }
  return kTrue;
}

int cmd_gen(std::uint64_t seed, const kw::Bounds& bounds, const std::string& out_path) {
  const kw::Model m = kw::random_model(seed, bounds);
  kw::store_model(m, out_path);
  std::cout << "generated path=" << out_path << " states=" << m.states.size()
            << " agents=" << m.agents.size() << " names=" << m.names.size()
            << " vars=" << m.valuation.size() << "\n";
  return kTrue;
}

int cmd_examples(const std::string& which, const std::string& dir) {
  bool any = false;
  for (const kw::BundledFile& f : kw::bundled_files()) {
    const bool is_model = f.name.ends_with(".kwm");
    const bool selected = which == "all" || (which == "derivations" && !is_model) ||
                          f.name == which + ".kwm" || f.name == which + ".kwd";
    if (!selected) continue;
    const std::string path = (std::filesystem::path(dir) / f.name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << f.contents;
    std::cout << "wrote " << path << "\n";
    any = true;
  }
  if (!any)
    throw std::invalid_argument("unknown example '" + which +
                                "' (try: nightstalker, pressconf, derivations, all)");
  return kTrue;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"know-who epistemic logic toolkit"};
  app.require_subcommand(1);

  std::string model_path, view_arg, formula_text, derivation_path;
  std::string out_path, dir = ".", box_arg, which = "all";
  bool lenient = false, want_witness = false;
  kw::Bounds bounds;
  std::uint64_t seed = 0;

  auto add_bounds = [&](CLI::App* cmd) {
    cmd->add_option("--states", bounds.max_states, "max states (default 2)");
    cmd->add_option("--agents", bounds.max_agents, "max agents (default 2)");
    cmd->add_option("--names", bounds.max_names, "max names (default 1)");
    cmd->add_option("--vars", bounds.max_vars, "max variables (default 1)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a .kwm model file");
  validate->add_option("model", model_path, "model file")->required();
  validate->add_flag("--lenient", lenient, "drop ident tuples whose user is absent");

  CLI::App* check = app.add_subcommand("check", "evaluate a formula at a view");
  check->add_option("model", model_path, "model file")->required();
  check->add_option("view", view_arg, "view as agent@state")->required();
  check->add_option("formula", formula_text, "formula text")->required();
  check->add_flag("--witness", want_witness, "report the witnessing name for know-who");

  CLI::App* label = app.add_subcommand("label", "satisfying views of every subformula");
  label->add_option("model", model_path, "model file")->required();
  label->add_option("formula", formula_text, "formula text")->required();

  CLI::App* valid = app.add_subcommand("valid", "bounded validity search");
  valid->add_option("formula", formula_text, "formula text")->required();
  add_bounds(valid);
  valid->add_option("--countermodel", out_path, "write the countermodel here");

  CLI::App* prove = app.add_subcommand("prove", "check a .kwd derivation file");
  prove->add_option("derivation", derivation_path, "derivation file")->required();

  CLI::App* lift = app.add_subcommand("lift", "box-lift an accepted derivation");
  lift->add_option("derivation", derivation_path, "derivation file")->required();
  lift->add_option("--box", box_arg, "K or A")->required();
  lift->add_option("-o,--out", out_path, "output file (stdout when omitted)");

  CLI::App* gen = app.add_subcommand("gen", "generate a random model");
  gen->add_option("--seed", seed, "random seed (default 0)");
  add_bounds(gen);
  gen->add_option("-o,--out", out_path, "output file")->required();

  CLI::App* examples = app.add_subcommand("examples", "write bundled models and derivations");
  examples->add_option("name", which, "nightstalker, pressconf, derivations, or all");
  examples->add_option("--dir", dir, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(model_path, lenient);
    if (app.got_subcommand(check))
      return cmd_check(model_path, view_arg, formula_text, want_witness);
    if (app.got_subcommand(label)) return cmd_label(model_path, formula_text);
    if (app.got_subcommand(valid)) return cmd_valid(formula_text, bounds, out_path);
    if (app.got_subcommand(prove)) return cmd_prove(derivation_path);
    if (app.got_subcommand(lift)) return cmd_lift(derivation_path, box_arg, out_path);
    if (app.got_subcommand(gen)) return cmd_gen(seed, bounds, out_path);
    if (app.got_subcommand(examples)) return cmd_examples(which, dir);
  } catch (const kw::ParseError& e) {
    std::cerr << "kw: " << describe_parse_error(e) << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "kw: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
