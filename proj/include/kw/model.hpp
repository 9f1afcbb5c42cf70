#pragma once

// ============================================================================
// kw/model.hpp — epistemic models with names
// ============================================================================
//
// A model bundles:
//   states      finite set of state ids
//   agents      finite set of agent ids
//   presence    agent -> states where the agent is present
//   indist      agent -> partition of its present states into
//               indistinguishability classes
//   names       finite nonempty set of name ids
//   ident       identification tuples (user, state, name, referent):
//               "user, in state, may use name to refer to referent"
//   valuation   variable -> set of views (agent, state) where it is true
//
// A view is a pair (agent, state) with the agent present in the state;
// formulae are evaluated at views.
//
// Well-formedness, checked by validate():
//   * indist(a) partitions exactly presence(a)
//   * every (a, s, n) with s in presence(a) has at least one referent   [cond6a]
//   * every referent of a tuple is present in the tuple's state         [cond6b]
//   * every tuple's user is present in the tuple's state (strict mode)
//   * every valuation view lies inside presence
//   * names is nonempty
//
// File format (.kwm): a JSON object with exactly the fields
//   states, agents, presence, indist, names, ident, valuation
// Serialization is canonical: all ids, tuples, classes and view lists are
// sorted, so store(load(p)) is byte-identical.
// ============================================================================

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace kw {

struct View {
  std::string agent;
  std::string state;
  friend auto operator<=>(const View&, const View&) = default;
};

struct IdentTuple {
  std::string user;
  std::string state;
  std::string name;
  std::string referent;
  friend auto operator<=>(const IdentTuple&, const IdentTuple&) = default;
};

inline std::string to_string(const View& v) { return v.agent + "@" + v.state; }

inline std::string to_string(const IdentTuple& t) {
  return t.user + "," + t.state + "," + t.name + "," + t.referent;
}

struct Model {
  std::vector<std::string> states;
  std::vector<std::string> agents;
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> presence;
  std::map<std::string, std::vector<std::vector<std::string>>> indist;
  std::vector<IdentTuple> ident;
  std::map<std::string, std::vector<View>> valuation;

  friend bool operator==(const Model&, const Model&) = default;

  // Canonical form: ids sorted, classes sorted by first element, every agent
  // keyed in presence/indist.
  void normalize() {
    std::sort(states.begin(), states.end());
    std::sort(agents.begin(), agents.end());
    std::sort(names.begin(), names.end());
    for (const auto& a : agents) {
      presence.try_emplace(a);
      indist.try_emplace(a);
    }
    for (auto& [a, ss] : presence) std::sort(ss.begin(), ss.end());
    for (auto& [a, classes] : indist) {
      for (auto& cls : classes) std::sort(cls.begin(), cls.end());
      std::sort(classes.begin(), classes.end());
    }
    std::sort(ident.begin(), ident.end());
    for (auto& [v, views] : valuation) std::sort(views.begin(), views.end());
  }
};

// ── validation ──────────────────────────────────────────────────────────────

struct ValidationIssue {
  enum class Code {
    Cond6a,                    // no referent for (agent, state, name)
    Cond6b,                    // referent absent in the tuple's state
    IndistNotPartition,        // indist(a) does not partition presence(a)
    ValuationOutsidePresence,  // valuation view outside presence
    EmptyNameSet,
    IdentUserAbsent,           // tuple user absent in the tuple's state
    DuplicateId,
    UnknownId,                 // reference to an undeclared state/agent/name
  };
  Code code;
  std::string detail;  // key=value description of the offending elements
};

inline std::string to_string(ValidationIssue::Code c) {
  using Code = ValidationIssue::Code;
  switch (c) {
    case Code::Cond6a: return "cond6a";
    case Code::Cond6b: return "cond6b";
    case Code::IndistNotPartition: return "indist_not_partition";
    case Code::ValuationOutsidePresence: return "valuation_outside_presence";
    case Code::EmptyNameSet: return "empty_name_set";
    case Code::IdentUserAbsent: return "ident_user_absent";
    case Code::DuplicateId: return "duplicate_id";
    case Code::UnknownId: return "unknown_id";
  }
  return "?";
}

inline std::string to_string(const ValidationIssue& i) {
  return "error code=" + to_string(i.code) + (i.detail.empty() ? "" : " " + i.detail);
}

// Returns the complete list of violations; empty means the model is valid.
inline std::vector<ValidationIssue> validate(const Model& m) {
  using Code = ValidationIssue::Code;
  std::vector<ValidationIssue> out;
  auto issue = [&](Code c, std::string d) { out.push_back({c, std::move(d)}); };

  auto check_dups = [&](const std::vector<std::string>& ids, const char* what) {
    std::set<std::string> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second) issue(Code::DuplicateId, std::string(what) + "=" + id);
  };
  check_dups(m.states, "state");
  check_dups(m.agents, "agent");
  check_dups(m.names, "name");

  if (m.names.empty()) issue(Code::EmptyNameSet, "");

  const std::set<std::string> states(m.states.begin(), m.states.end());
  const std::set<std::string> agents(m.agents.begin(), m.agents.end());
  const std::set<std::string> names(m.names.begin(), m.names.end());

  // presence
  std::map<std::string, std::set<std::string>> pres;
  for (const auto& [a, ss] : m.presence) {
    if (!agents.contains(a)) {
      issue(Code::UnknownId, "presence agent=" + a);
      continue;
    }
    auto& dst = pres[a];
    for (const auto& s : ss) {
      if (!states.contains(s)) {
        issue(Code::UnknownId, "presence agent=" + a + " state=" + s);
        continue;
      }
      if (!dst.insert(s).second)
        issue(Code::DuplicateId, "presence agent=" + a + " state=" + s);
    }
  }

  // indist: each agent's classes must partition exactly its presence set
  for (const auto& [a, classes] : m.indist) {
    if (!agents.contains(a)) {
      issue(Code::UnknownId, "indist agent=" + a);
      continue;
    }
    bool broken = false;
    std::set<std::string> covered;
    for (const auto& cls : classes) {
      if (cls.empty()) broken = true;
      for (const auto& s : cls) {
        if (!states.contains(s)) {
          issue(Code::UnknownId, "indist agent=" + a + " state=" + s);
          broken = true;
          continue;
        }
        if (!pres[a].contains(s) || !covered.insert(s).second) broken = true;
      }
    }
    if (covered.size() != pres[a].size()) broken = true;
    if (broken) issue(Code::IndistNotPartition, "agent=" + a);
  }
  for (const auto& a : m.agents)
    if (!pres[a].empty() && !m.indist.contains(a))
      issue(Code::IndistNotPartition, "agent=" + a);

  // ident
  std::set<IdentTuple> tuples;
  for (const auto& t : m.ident) {
    bool known = true;
    if (!agents.contains(t.user)) issue(Code::UnknownId, "ident agent=" + t.user), known = false;
    if (!states.contains(t.state)) issue(Code::UnknownId, "ident state=" + t.state), known = false;
    if (!names.contains(t.name)) issue(Code::UnknownId, "ident name=" + t.name), known = false;
    if (!agents.contains(t.referent))
      issue(Code::UnknownId, "ident agent=" + t.referent), known = false;
    if (!known) continue;
    if (!tuples.insert(t).second) {
      issue(Code::DuplicateId, "ident tuple=" + to_string(t));
      continue;
    }
    if (!pres[t.user].contains(t.state))
      issue(Code::IdentUserAbsent, "tuple=" + to_string(t));
    else if (!pres[t.referent].contains(t.state))
      issue(Code::Cond6b, "tuple=" + to_string(t));
  }

  // cond6a: every (agent, present state, name) needs at least one referent
  for (const auto& a : m.agents)
    for (const auto& s : pres[a])
      for (const auto& n : m.names) {
        bool found = false;
        for (const auto& t : m.ident)
          if (t.user == a && t.state == s && t.name == n) {
            found = true;
            break;
          }
        if (!found) issue(Code::Cond6a, "agent=" + a + " state=" + s + " name=" + n);
      }

  // valuation
  for (const auto& [p, views] : m.valuation) {
    std::set<View> seen;
    for (const auto& v : views) {
      if (!agents.contains(v.agent) || !states.contains(v.state)) {
        issue(Code::UnknownId, "valuation var=" + p + " view=" + to_string(v));
        continue;
      }
      if (!seen.insert(v).second) {
        issue(Code::DuplicateId, "valuation var=" + p + " view=" + to_string(v));
        continue;
      }
      if (!pres[v.agent].contains(v.state))
        issue(Code::ValuationOutsidePresence, "var=" + p + " view=" + to_string(v));
    }
  }

  return out;
}

// Drops ident tuples whose user is absent in the tuple's state; used by the
// lenient loading mode. Returns the dropped tuples.
inline std::vector<IdentTuple> drop_absent_user_tuples(Model& m) {
  std::map<std::string, std::set<std::string>> pres;
  for (const auto& [a, ss] : m.presence) pres[a].insert(ss.begin(), ss.end());
  std::vector<IdentTuple> dropped;
  std::erase_if(m.ident, [&](const IdentTuple& t) {
    const auto it = pres.find(t.user);
    const bool absent = it == pres.end() || !it->second.contains(t.state);
    if (absent) dropped.push_back(t);
    return absent;
  });
  return dropped;
}

// ── errors ──────────────────────────────────────────────────────────────────

struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelInvalidError : std::runtime_error {
  explicit ModelInvalidError(std::vector<ValidationIssue> issues_)
      : std::runtime_error(describe(issues_)), issues(std::move(issues_)) {}
  std::vector<ValidationIssue> issues;

 private:
  static std::string describe(const std::vector<ValidationIssue>& is) {
    std::string s = "model is not well-formed:";
    for (const auto& i : is) s += "\n  " + to_string(i);
    return s;
  }
};

struct ModelQueryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ── queries ─────────────────────────────────────────────────────────────────

namespace detail {

inline bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

inline const std::vector<std::string>& presence_of(const Model& m, const std::string& a) {
  static const std::vector<std::string> kEmpty;
  const auto it = m.presence.find(a);
  return it == m.presence.end() ? kEmpty : it->second;
}

}  // namespace detail

// Agents present in state s, sorted.
inline std::vector<std::string> present_agents(const Model& m, const std::string& s) {
  if (!detail::contains(m.states, s)) throw ModelQueryError("unknown state '" + s + "'");
  std::vector<std::string> out;
  for (const auto& a : m.agents)
    if (detail::contains(detail::presence_of(m, a), s)) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

// The indistinguishability class of agent a containing state s, sorted.
inline std::vector<std::string> epistemic_class(const Model& m, const std::string& a,
                                                const std::string& s) {
  if (!detail::contains(m.agents, a)) throw ModelQueryError("unknown agent '" + a + "'");
  if (!detail::contains(m.states, s)) throw ModelQueryError("unknown state '" + s + "'");
  if (!detail::contains(detail::presence_of(m, a), s))
    throw ModelQueryError("agent '" + a + "' is absent in state '" + s + "'");
  const auto it = m.indist.find(a);
  if (it != m.indist.end())
    for (const auto& cls : it->second)
      if (detail::contains(cls, s)) {
        std::vector<std::string> out = cls;
        std::sort(out.begin(), out.end());
        return out;
      }
  throw ModelQueryError("state '" + s + "' is in no indistinguishability class of '" + a +
                        "'");
}

// Agents that `a` may refer to by name n in state s, sorted. Nonempty on any
// validated model.
inline std::vector<std::string> referents(const Model& m, const std::string& a,
                                          const std::string& s, const std::string& n) {
  if (!detail::contains(m.agents, a)) throw ModelQueryError("unknown agent '" + a + "'");
  if (!detail::contains(m.states, s)) throw ModelQueryError("unknown state '" + s + "'");
  if (!detail::contains(m.names, n)) throw ModelQueryError("unknown name '" + n + "'");
  if (!detail::contains(detail::presence_of(m, a), s))
    throw ModelQueryError("agent '" + a + "' is absent in state '" + s + "'");
  std::vector<std::string> out;
  for (const auto& t : m.ident)
    if (t.user == a && t.state == s && t.name == n) out.push_back(t.referent);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ── JSON persistence ────────────────────────────────────────────────────────

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) throw ModelFormatError(std::string("missing field '") + field + "'");
  return *it;
}

inline std::vector<std::string> string_array(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array()) throw ModelFormatError("field '" + ctx + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string())
      throw ModelFormatError("field '" + ctx + "' must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline Model model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelFormatError("model file must be a JSON object");
  static const std::set<std::string> kKnown = {"states", "agents",    "presence", "indist",
                                               "names",  "ident",     "valuation"};
  for (const auto& [key, _] : j.items())
    if (!kKnown.contains(key)) throw ModelFormatError("unknown field '" + key + "'");

  Model m;
  m.states = detail::string_array(detail::require_field(j, "states"), "states");
  m.agents = detail::string_array(detail::require_field(j, "agents"), "agents");
  m.names = detail::string_array(detail::require_field(j, "names"), "names");

  const auto& pres = detail::require_field(j, "presence");
  if (!pres.is_object()) throw ModelFormatError("field 'presence' must be an object");
  for (const auto& [a, ss] : pres.items())
    m.presence[a] = detail::string_array(ss, "presence." + a);

  const auto& ind = detail::require_field(j, "indist");
  if (!ind.is_object()) throw ModelFormatError("field 'indist' must be an object");
  for (const auto& [a, classes] : ind.items()) {
    if (!classes.is_array())
      throw ModelFormatError("field 'indist." + a + "' must be an array of classes");
    auto& dst = m.indist[a];
    for (const auto& cls : classes) dst.push_back(detail::string_array(cls, "indist." + a));
  }

  const auto& ident = detail::require_field(j, "ident");
  if (!ident.is_array()) throw ModelFormatError("field 'ident' must be an array");
  for (const auto& t : ident) {
    const auto parts = detail::string_array(t, "ident");
    if (parts.size() != 4)
      throw ModelFormatError("ident tuples must be [user, state, name, referent]");
    m.ident.push_back({parts[0], parts[1], parts[2], parts[3]});
  }

  const auto& val = detail::require_field(j, "valuation");
  if (!val.is_object()) throw ModelFormatError("field 'valuation' must be an object");
  for (const auto& [p, views] : val.items()) {
    if (!views.is_array())
      throw ModelFormatError("field 'valuation." + p + "' must be an array");
    auto& dst = m.valuation[p];  // keep vars with empty view sets
    for (const auto& v : views) {
      const auto parts = detail::string_array(v, "valuation." + p);
      if (parts.size() != 2)
        throw ModelFormatError("valuation views must be [agent, state]");
      dst.push_back({parts[0], parts[1]});
    }
  }
  return m;
}

inline nlohmann::json model_to_json(const Model& m) {
  Model c = m;
  c.normalize();
  nlohmann::json j;
  j["states"] = c.states;
  j["agents"] = c.agents;
  j["names"] = c.names;
  j["presence"] = nlohmann::json::object();
  for (const auto& [a, ss] : c.presence) j["presence"][a] = ss;
  j["indist"] = nlohmann::json::object();
  for (const auto& [a, classes] : c.indist) j["indist"][a] = classes;
  j["ident"] = nlohmann::json::array();
  for (const auto& t : c.ident)
    j["ident"].push_back({t.user, t.state, t.name, t.referent});
  j["valuation"] = nlohmann::json::object();
  for (const auto& [p, views] : c.valuation) {
    auto arr = nlohmann::json::array();
    for (const auto& v : views) arr.push_back({v.agent, v.state});
    j["valuation"][p] = arr;
  }
  return j;
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(2) + "\n"; }

// Parses and validates; lenient mode first drops ident tuples with an absent
// user (reported via *dropped when given).
inline Model parse_model(const std::string& text, bool lenient = false,
                         std::vector<IdentTuple>* dropped = nullptr) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError(std::string("invalid JSON: ") + e.what());
  }
  Model m = model_from_json(j);
  if (lenient) {
    auto d = drop_absent_user_tuples(m);
    if (dropped) *dropped = std::move(d);
  }
  if (auto issues = validate(m); !issues.empty()) throw ModelInvalidError(std::move(issues));
  m.normalize();
  return m;
}

inline Model load_model(const std::string& path, bool lenient = false,
                        std::vector<IdentTuple>* dropped = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), lenient, dropped);
}

inline void store_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError("cannot write '" + path + "'");
  out << serialize_model(m);
}

}  // namespace kw
