#pragma once

// ============================================================================
// kw/checker.hpp — semantic engine
// ============================================================================
//
// Truth at a view (a, s), per clause:
//
//   p        (a, s) is in the valuation of p
//   !x       x fails at (a, s)
//   x -> y   x fails or y holds at (a, s)
//   A x      x holds at (a', s) for every agent a' present in s
//   K x      x holds at (a, s') for every s' the agent cannot distinguish
//   W x      some name n satisfies: for every indistinguishable s' and every
//            referent a' of n used by a in s', x holds at (a', s')
//   @n x     x holds at (a', s) for every referent a' of n used by a in s
//
// Evaluator computes satisfying-view sets bottom-up with memoization shared
// across formulae, so labelling a batch of related formulae on one model is
// cheap. bounded_validity() searches every model up to size bounds, in a
// fixed deterministic order, and returns the first countermodel (greedily
// minimized) or a bounded validity verdict.
// ============================================================================

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "kw/formula.hpp"
#include "kw/model.hpp"
#include "kw/proofs.hpp"

namespace kw {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ── size bounds ─────────────────────────────────────────────────────────────

struct Bounds {
  int max_states = 2;
  int max_agents = 2;
  int max_names = 1;
  int max_vars = 1;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

inline std::string to_string(const Bounds& b) {
  return "states=" + std::to_string(b.max_states) + " agents=" + std::to_string(b.max_agents) +
         " names=" + std::to_string(b.max_names) + " vars=" + std::to_string(b.max_vars);
}

inline void check_bounds(const Bounds& b) {
  if (b.max_states < 0 || b.max_agents < 0 || b.max_vars < 0)
    throw std::invalid_argument("bounds must be nonnegative");
  if (b.max_names < 1) throw std::invalid_argument("max_names must be at least 1");
  if (b.max_states > 12 || b.max_agents > 12 || b.max_names > 12 || b.max_vars > 12)
    throw std::invalid_argument("bounds beyond 12 are not tractable");
}

// ── view bitsets ────────────────────────────────────────────────────────────

namespace detail {

class ViewBits {
 public:
  ViewBits() = default;
  explicit ViewBits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

  bool all() const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (~w_[i] & mask(i)) return false;
    return true;
  }

  // Index of the lowest clear bit, or -1 when all set.
  long first_unset() const {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const std::uint64_t inv = ~w_[i] & mask(i);
      if (inv) return static_cast<long>(i * 64 + std::countr_zero(inv));
    }
    return -1;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (const auto w : w_) c += std::popcount(w);
    return c;
  }

  friend ViewBits operator~(ViewBits x) {
    for (std::size_t i = 0; i < x.w_.size(); ++i) x.w_[i] = ~x.w_[i] & x.mask(i);
    return x;
  }
  friend ViewBits operator|(ViewBits x, const ViewBits& y) {
    for (std::size_t i = 0; i < x.w_.size(); ++i) x.w_[i] |= y.w_[i];
    return x;
  }
  friend ViewBits operator&(ViewBits x, const ViewBits& y) {
    for (std::size_t i = 0; i < x.w_.size(); ++i) x.w_[i] &= y.w_[i];
    return x;
  }
  friend bool operator==(const ViewBits&, const ViewBits&) = default;

 private:
  // Mask of valid bits in word i.
  std::uint64_t mask(std::size_t i) const {
    const std::size_t used = (i + 1) * 64 <= n_ ? 64 : n_ - i * 64;
    return used == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

}  // namespace detail

// ── evaluation ──────────────────────────────────────────────────────────────

struct EvalResult {
  bool holds;
  std::optional<std::string> witness;  // least witnessing name, know-who only
};

struct Labelling {
  std::vector<Formula> subformulas;           // post-order, queried formula last
  std::vector<std::vector<View>> satisfying;  // aligned with subformulas
};

// Compiled form of a validated model. Query results are memoized per formula,
// so repeated evaluation of overlapping formulae shares work.
class Evaluator {
 public:
  explicit Evaluator(const Model& m) { compile(m); }

  std::size_t view_count() const { return views_.size(); }
  const std::vector<View>& views() const { return views_; }

  // Satisfying views of f, over all views of the model.
  const detail::ViewBits& sat(const Formula& f) {
    const auto it = memo_.find(f);
    if (it != memo_.end()) return it->second;
    detail::ViewBits r = compute(f);
    return memo_.emplace(f, std::move(r)).first->second;
  }

  bool holds(const View& v, const Formula& f) { return sat(f).test(view_index(v)); }

  EvalResult evaluate(const View& v, const Formula& f) {
    const std::size_t ix = view_index(v);
    const bool h = sat(f).test(ix);
    EvalResult r{h, std::nullopt};
    if (h && f.is(Formula::Kind::KnowWho)) r.witness = witness_at(ix, f);
    return r;
  }

  Labelling label(const Formula& f) {
    Labelling out;
    out.subformulas = subformulas(f);
    for (const Formula& g : out.subformulas) {
      const detail::ViewBits& bits = sat(g);
      std::vector<View> vs;
      for (std::size_t i = 0; i < views_.size(); ++i)
        if (bits.test(i)) vs.push_back(views_[i]);
      out.satisfying.push_back(std::move(vs));
    }
    return out;
  }

  std::size_t view_index(const View& v) const {
    const auto a = agent_ix_.find(v.agent);
    if (a == agent_ix_.end()) throw EvalError("unknown agent '" + v.agent + "'");
    const auto s = state_ix_.find(v.state);
    if (s == state_ix_.end()) throw EvalError("unknown state '" + v.state + "'");
    const int ix = view_ix_[a->second][s->second];
    if (ix < 0)
      throw EvalError("agent '" + v.agent + "' is absent in state '" + v.state + "'");
    return static_cast<std::size_t>(ix);
  }

 private:
  void compile(const Model& m) {
    states_ = m.states;
    agents_ = m.agents;
    names_ = m.names;
    std::sort(states_.begin(), states_.end());
    std::sort(agents_.begin(), agents_.end());
    std::sort(names_.begin(), names_.end());
    for (std::size_t i = 0; i < states_.size(); ++i) state_ix_[states_[i]] = i;
    for (std::size_t i = 0; i < agents_.size(); ++i) agent_ix_[agents_[i]] = i;
    for (std::size_t i = 0; i < names_.size(); ++i) name_ix_[names_[i]] = i;

    view_ix_.assign(agents_.size(), std::vector<int>(states_.size(), -1));
    views_at_state_.assign(states_.size(), {});
    for (std::size_t a = 0; a < agents_.size(); ++a) {
      auto ps = detail::presence_of(m, agents_[a]);
      std::sort(ps.begin(), ps.end());
      for (const auto& s : ps) {
        const auto si = state_ix_.find(s);
        if (si == state_ix_.end()) throw EvalError("presence names unknown state '" + s + "'");
        view_ix_[a][si->second] = static_cast<int>(views_.size());
        views_.push_back({agents_[a], s});
      }
    }
    for (std::size_t v = 0; v < views_.size(); ++v)
      views_at_state_[state_ix_.at(views_[v].state)].push_back(v);

    // indistinguishability classes, resolved to view-index lists
    class_views_.assign(views_.size(), {});
    for (std::size_t a = 0; a < agents_.size(); ++a) {
      const auto it = m.indist.find(agents_[a]);
      if (it == m.indist.end()) continue;
      for (const auto& cls : it->second) {
        std::vector<std::size_t> members;
        for (const auto& s : cls) {
          const auto si = state_ix_.find(s);
          const int ix = si == state_ix_.end() ? -1 : view_ix_[a][si->second];
          if (ix < 0)
            throw EvalError("indistinguishability class of '" + agents_[a] +
                            "' names absent state '" + s + "'");
          members.push_back(static_cast<std::size_t>(ix));
        }
        for (const std::size_t v : members) class_views_[v] = members;
      }
    }
    for (std::size_t v = 0; v < views_.size(); ++v)
      if (class_views_[v].empty())
        throw EvalError("view " + to_string(views_[v]) +
                        " is in no indistinguishability class; validate the model first");

    // identification tuples, resolved to (user view, name) -> referent views
    ref_views_.assign(views_.size(), std::vector<std::vector<std::size_t>>(names_.size()));
    for (const auto& t : m.ident) {
      const auto a = agent_ix_.find(t.user);
      const auto s = state_ix_.find(t.state);
      const auto n = name_ix_.find(t.name);
      const auto r = agent_ix_.find(t.referent);
      if (a == agent_ix_.end() || s == state_ix_.end() || n == name_ix_.end() ||
          r == agent_ix_.end())
        throw EvalError("ident tuple names unknown ids; validate the model first");
      const int uv = view_ix_[a->second][s->second];
      if (uv < 0) continue;  // user absent: the semantics never consults the tuple
      const int rv = view_ix_[r->second][s->second];
      if (rv < 0)
        throw EvalError("ident tuple " + to_string(t) +
                        " has an absent referent; validate the model first");
      ref_views_[uv][n->second].push_back(static_cast<std::size_t>(rv));
    }

    for (const auto& [p, views] : m.valuation) {
      detail::ViewBits bits(views_.size());
      for (const auto& v : views) {
        const auto a = agent_ix_.find(v.agent);
        const auto s = state_ix_.find(v.state);
        const int ix = (a == agent_ix_.end() || s == state_ix_.end())
                           ? -1
                           : view_ix_[a->second][s->second];
        if (ix < 0)
          throw EvalError("valuation of '" + p + "' lies outside presence at " +
                          to_string(v) + "; validate the model first");
        bits.set(static_cast<std::size_t>(ix));
      }
      valuation_.emplace(p, std::move(bits));
    }
  }

  detail::ViewBits compute(const Formula& f) {
    const std::size_t nv = views_.size();
    switch (f.kind()) {
      case Formula::Kind::Var: {
        const auto it = valuation_.find(f.var_name());
        return it == valuation_.end() ? detail::ViewBits(nv) : it->second;
      }
      case Formula::Kind::Not: {
        const detail::ViewBits a = sat(f.body());
        return ~a;
      }
      case Formula::Kind::Implies: {
        const detail::ViewBits a = sat(f.left());
        const detail::ViewBits b = sat(f.right());
        return ~a | b;
      }
      case Formula::Kind::AllAgents: {
        const detail::ViewBits c = sat(f.body());
        detail::ViewBits r(nv);
        for (std::size_t s = 0; s < views_at_state_.size(); ++s) {
          bool ok = true;
          for (const std::size_t v : views_at_state_[s])
            if (!c.test(v)) {
              ok = false;
              break;
            }
          if (ok)
            for (const std::size_t v : views_at_state_[s]) r.set(v);
        }
        return r;
      }
      case Formula::Kind::Know: {
        const detail::ViewBits c = sat(f.body());
        detail::ViewBits r(nv);
        for (std::size_t v = 0; v < nv; ++v) {
          bool ok = true;
          for (const std::size_t u : class_views_[v])
            if (!c.test(u)) {
              ok = false;
              break;
            }
          if (ok) r.set(v);
        }
        return r;
      }
      case Formula::Kind::KnowWho: {
        const detail::ViewBits c = sat(f.body());
        detail::ViewBits r(nv);
        for (std::size_t v = 0; v < nv; ++v)
          if (witness_index(v, c) >= 0) r.set(v);
        return r;
      }
      case Formula::Kind::AtName: {
        const auto n = name_ix_.find(f.name());
        if (n == name_ix_.end()) throw EvalError("unknown name '@" + f.name() + "'");
        const detail::ViewBits c = sat(f.body());
        detail::ViewBits r(nv);
        for (std::size_t v = 0; v < nv; ++v) {
          bool ok = true;
          for (const std::size_t u : ref_views_[v][n->second])
            if (!c.test(u)) {
              ok = false;
              break;
            }
          if (ok) r.set(v);
        }
        return r;
      }
    }
    throw std::logic_error("bad formula kind");
  }

  // Least name index witnessing know-who of a formula with satisfying set c
  // at view v, or -1.
  long witness_index(std::size_t v, const detail::ViewBits& c) const {
    for (std::size_t n = 0; n < names_.size(); ++n) {
      bool ok = true;
      for (const std::size_t u : class_views_[v]) {
        for (const std::size_t w : ref_views_[u][n])
          if (!c.test(w)) {
            ok = false;
            break;
          }
        if (!ok) break;
      }
      if (ok) return static_cast<long>(n);
    }
    return -1;
  }

  std::string witness_at(std::size_t view, const Formula& know_who_formula) {
    const detail::ViewBits c = sat(know_who_formula.body());
    const long n = witness_index(view, c);
    if (n < 0) throw std::logic_error("witness requested for a failing know-who");
    return names_[static_cast<std::size_t>(n)];
  }

  std::vector<std::string> states_, agents_, names_;
  std::unordered_map<std::string, std::size_t> state_ix_, agent_ix_, name_ix_;
  std::vector<View> views_;                              // sorted (agent, state)
  std::vector<std::vector<int>> view_ix_;                // [agent][state] -> view or -1
  std::vector<std::vector<std::size_t>> views_at_state_;
  std::vector<std::vector<std::size_t>> class_views_;    // per view
  std::vector<std::vector<std::vector<std::size_t>>> ref_views_;  // [view][name]
  std::unordered_map<std::string, detail::ViewBits> valuation_;
  std::unordered_map<Formula, detail::ViewBits, FormulaHash> memo_;
};

inline EvalResult evaluate(const Model& m, const View& v, const Formula& f) {
  return Evaluator(m).evaluate(v, f);
}

inline Labelling label(const Model& m, const Formula& f) { return Evaluator(m).label(f); }

// ── model enumeration ───────────────────────────────────────────────────────

namespace detail {

// All partitions of {0..n-1} in restricted-growth-string order; each partition
// lists blocks ordered by first element.
inline std::vector<std::vector<std::vector<int>>> partitions_of(int n) {
  if (n > 12) throw std::invalid_argument("partition enumeration beyond 12 elements");
  std::vector<std::vector<std::vector<int>>> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> rgs(n, 0);
  for (;;) {
    int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
    std::vector<std::vector<int>> p(blocks);
    for (int i = 0; i < n; ++i) p[rgs[i]].push_back(i);
    out.push_back(std::move(p));
    int i = n - 1;
    for (; i > 0; --i) {
      int mx = 0;
      for (int q = 0; q < i; ++q) mx = std::max(mx, rgs[q]);
      if (rgs[i] <= mx) {
        ++rgs[i];
        for (int q = i + 1; q < n; ++q) rgs[q] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

}  // namespace detail

// Exhaustive deterministic stream of all well-formed models with canonical
// ids s1..sk, a1..am, n1..nj, p1..pv, for all sizes within the bounds
// (names start at 1). Order: sizes ascending (states, agents, names, vars),
// then presence, indistinguishability, identification, valuation, each as an
// odometer with the earlier component most significant.
class ModelEnumerator {
 public:
  explicit ModelEnumerator(const Bounds& b, int fixed_vars = -1, int min_names = 1)
      : b_(b),
        v_lo_(fixed_vars >= 0 ? fixed_vars : 0),
        v_hi_(fixed_vars >= 0 ? fixed_vars : b.max_vars),
        j_lo_(min_names) {
    check_bounds(b);
    if (fixed_vars > 12) throw std::invalid_argument("bounds beyond 12 are not tractable");
    if (b.max_states * b.max_agents > 62)
      throw std::invalid_argument("enumeration space too large (over 62 views)");
    if (j_lo_ < 1 || j_lo_ > b.max_names)
      throw std::invalid_argument("min_names outside bounds");
    k_ = 0;
    m_ = 0;
    j_ = j_lo_;
    v_ = v_lo_;
    pmask_.clear();
    rebuild_domains();
  }

  std::optional<Model> next() {
    if (done_) return std::nullopt;
    if (fresh_) {
      fresh_ = false;
      return materialize();
    }
    if (advance_digits()) return materialize();
    if (advance_presence()) {
      rebuild_domains();
      return materialize();
    }
    if (!advance_sizes()) {
      done_ = true;
      return std::nullopt;
    }
    pmask_.assign(m_, 0);
    rebuild_domains();
    return materialize();
  }

 private:
  bool advance_sizes() {
    if (++v_ <= v_hi_) return true;
    v_ = v_lo_;
    if (++j_ <= b_.max_names) return true;
    j_ = j_lo_;
    if (++m_ <= b_.max_agents) return true;
    m_ = 0;
    return ++k_ <= b_.max_states;
  }

  bool advance_presence() {
    const std::uint32_t radix = std::uint32_t{1} << k_;
    for (std::size_t i = pmask_.size(); i-- > 0;) {
      if (++pmask_[i] < radix) {
        for (std::size_t q = i + 1; q < pmask_.size(); ++q) pmask_[q] = 0;
        return true;
      }
      pmask_[i] = 0;
    }
    return false;
  }

  bool advance_digits() {
    for (std::size_t i = digits_.size(); i-- > 0;) {
      if (++digits_[i] < radix_[i]) return true;
      digits_[i] = 0;
    }
    return false;
  }

  void rebuild_domains() {
    part_lists_.clear();
    triples_.clear();
    radix_.clear();

    std::vector<std::vector<int>> present_at(k_);  // agent indices per state
    views_ = 0;
    for (int a = 0; a < m_; ++a)
      for (int s = 0; s < k_; ++s)
        if (pmask_[a] >> s & 1) {
          present_at[s].push_back(a);
          ++views_;
        }

    for (int a = 0; a < m_; ++a) {
      part_lists_.push_back(detail::partitions_of(std::popcount(pmask_[a])));
      radix_.push_back(part_lists_.back().size());
    }
    for (int a = 0; a < m_; ++a)
      for (int s = 0; s < k_; ++s) {
        if (!(pmask_[a] >> s & 1)) continue;
        for (int n = 0; n < j_; ++n) {
          triples_.push_back({a, s, n, present_at[s]});
          radix_.push_back((std::uint64_t{1} << present_at[s].size()) - 1);
        }
      }
    for (int p = 0; p < v_; ++p) radix_.push_back(std::uint64_t{1} << views_);
    digits_.assign(radix_.size(), 0);
  }

  Model materialize() const {
    Model m;
    for (int s = 0; s < k_; ++s) m.states.push_back("s" + std::to_string(s + 1));
    for (int a = 0; a < m_; ++a) m.agents.push_back("a" + std::to_string(a + 1));
    for (int n = 0; n < j_; ++n) m.names.push_back("n" + std::to_string(n + 1));

    std::vector<std::vector<int>> present_states(m_);  // state bits per agent, ascending
    for (int a = 0; a < m_; ++a)
      for (int s = 0; s < k_; ++s)
        if (pmask_[a] >> s & 1) present_states[a].push_back(s);

    for (int a = 0; a < m_; ++a) {
      auto& ps = m.presence[m.agents[a]];
      for (const int s : present_states[a]) ps.push_back(m.states[s]);
      const auto& partition = part_lists_[a][digits_[a]];
      auto& classes = m.indist[m.agents[a]];
      for (const auto& block : partition) {
        std::vector<std::string> cls;
        for (const int pos : block) cls.push_back(m.states[present_states[a][pos]]);
        classes.push_back(std::move(cls));
      }
    }

    for (std::size_t t = 0; t < triples_.size(); ++t) {
      const TripleDom& dom = triples_[t];
      const std::uint64_t mask = digits_[m_ + t] + 1;  // nonempty subset
      for (std::size_t q = 0; q < dom.present.size(); ++q)
        if (mask >> q & 1)
          m.ident.push_back({m.agents[dom.agent], m.states[dom.state], m.names[dom.name],
                             m.agents[dom.present[q]]});
    }

    // view order: agents ascending, then their present states ascending
    std::vector<View> views;
    for (int a = 0; a < m_; ++a)
      for (const int s : present_states[a]) views.push_back({m.agents[a], m.states[s]});
    for (int p = 0; p < v_; ++p) {
      const std::uint64_t mask = digits_[m_ + triples_.size() + p];
      auto& vs = m.valuation["p" + std::to_string(p + 1)];
      for (std::size_t q = 0; q < views.size(); ++q)
        if (mask >> q & 1) vs.push_back(views[q]);
    }

    m.normalize();
    return m;
  }

  struct TripleDom {
    int agent;
    int state;
    int name;
    std::vector<int> present;  // candidate referents (agent indices) at the state
  };

  Bounds b_;
  int v_lo_, v_hi_, j_lo_;
  int k_ = 0, m_ = 0, j_ = 1, v_ = 0;
  bool done_ = false, fresh_ = true;
  std::vector<std::uint32_t> pmask_;
  std::vector<std::vector<std::vector<std::vector<int>>>> part_lists_;  // per agent
  std::vector<TripleDom> triples_;
  int views_ = 0;
  std::vector<std::uint64_t> digits_;
  std::vector<std::uint64_t> radix_;
};

inline ModelEnumerator enumerate_models(const Bounds& b) { return ModelEnumerator(b); }

inline std::uint64_t count_models(const Bounds& b) {
  ModelEnumerator en(b);
  std::uint64_t c = 0;
  while (en.next()) ++c;
  return c;
}

// ── bounded validity ────────────────────────────────────────────────────────

struct Counterexample {
  Model model;
  View view;
};

struct Verdict {
  Bounds bounds;
  std::uint64_t models_checked = 0;
  std::optional<Counterexample> counterexample;
  bool valid_within() const { return !counterexample.has_value(); }
};

namespace detail {

inline Formula rename_vars(const Formula& f,
                           const std::map<std::string, std::string>& ren) {
  switch (f.kind()) {
    case Formula::Kind::Var: {
      const auto it = ren.find(f.var_name());
      return it == ren.end() ? f : var(it->second);
    }
    case Formula::Kind::Not: return lnot(rename_vars(f.body(), ren));
    case Formula::Kind::Implies:
      return implies(rename_vars(f.left(), ren), rename_vars(f.right(), ren));
    case Formula::Kind::KnowWho: return know_who(rename_vars(f.body(), ren));
    case Formula::Kind::Know: return know(rename_vars(f.body(), ren));
    case Formula::Kind::AllAgents: return all_agents(rename_vars(f.body(), ren));
    case Formula::Kind::AtName: return at_name(f.name(), rename_vars(f.body(), ren));
  }
  throw std::logic_error("bad formula kind");
}

inline bool falsifies(const Model& m, const View& v, const Formula& f) {
  Evaluator ev(m);
  return !ev.holds(v, f);
}

inline void drop_state(Model& m, const std::string& s) {
  std::erase(m.states, s);
  for (auto& [a, ss] : m.presence) std::erase(ss, s);
  for (auto& [a, classes] : m.indist) {
    for (auto& cls : classes) std::erase(cls, s);
    std::erase_if(classes, [](const auto& cls) { return cls.empty(); });
  }
  std::erase_if(m.ident, [&](const IdentTuple& t) { return t.state == s; });
  for (auto& [p, views] : m.valuation)
    std::erase_if(views, [&](const View& v) { return v.state == s; });
}

inline void drop_agent(Model& m, const std::string& a) {
  std::erase(m.agents, a);
  m.presence.erase(a);
  m.indist.erase(a);
  std::erase_if(m.ident, [&](const IdentTuple& t) { return t.user == a || t.referent == a; });
  for (auto& [p, views] : m.valuation)
    std::erase_if(views, [&](const View& v) { return v.agent == a; });
}

// Greedy minimization: drop states, agents, and ident tuples while the model
// stays well-formed and the view still falsifies f.
inline Model minimize_counterexample(Model m, const View& view, const Formula& f) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& s : std::vector<std::string>(m.states))
      if (s != view.state) {
        Model cand = m;
        drop_state(cand, s);
        if (validate(cand).empty() && falsifies(cand, view, f)) {
          m = std::move(cand);
          changed = true;
        }
      }
    for (const auto& a : std::vector<std::string>(m.agents))
      if (a != view.agent) {
        Model cand = m;
        drop_agent(cand, a);
        if (validate(cand).empty() && falsifies(cand, view, f)) {
          m = std::move(cand);
          changed = true;
        }
      }
    for (const auto& t : std::vector<IdentTuple>(m.ident)) {
      Model cand = m;
      std::erase(cand.ident, t);
      if (validate(cand).empty() && falsifies(cand, view, f)) {
        m = std::move(cand);
        changed = true;
      }
    }
  }
  return m;
}

struct BatchHit {
  std::size_t offset;  // position within the batch
  std::size_t view;    // falsified view index
};

}  // namespace detail

// Checks f at every view of every model within the bounds and returns the
// first counterexample in enumeration order, else a bounded-validity verdict.
// The search space uses exactly the variables occurring in f (canonically
// renamed); any @-names must be canonical n1..n<max_names>. Deterministic for
// any worker count.
inline Verdict bounded_validity(const Formula& f, const Bounds& b, int workers = 1) {
  check_bounds(b);

  // canonical variable renaming (the reserved p0 stays fixed: it only occurs
  // in the true/false desugarings, which hold or fail independently of it)
  std::vector<std::string> vars = variables(f);
  std::erase(vars, std::string(kReservedVar));
  if (vars.size() > 12)
    throw std::invalid_argument("formula has too many variables to enumerate");
  std::map<std::string, std::string> ren, ren_back;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string canon = "p" + std::to_string(i + 1);
    ren[vars[i]] = canon;
    ren_back[canon] = vars[i];
  }
  const Formula query = detail::rename_vars(f, ren);

  int min_names = 1;
  for (const std::string& n : at_names(f)) {
    int ix = -1;
    if (n.size() >= 2 && n[0] == 'n' && n[1] != '0') {
      ix = 0;
      for (std::size_t q = 1; q < n.size(); ++q) {
        if (n[q] < '0' || n[q] > '9') {
          ix = -1;
          break;
        }
        ix = ix * 10 + (n[q] - '0');
      }
    }
    if (ix < 1 || ix > b.max_names)
      throw std::invalid_argument("@-name '" + n + "' is outside the canonical names n1..n" +
                                  std::to_string(b.max_names));
    min_names = std::max(min_names, ix);
  }

  ModelEnumerator en(b, static_cast<int>(vars.size()), min_names);
  Verdict verdict{b, 0, std::nullopt};

  const int nworkers = std::max(1, workers);
  const std::size_t batch_size = nworkers == 1 ? 1 : static_cast<std::size_t>(nworkers) * 256;

  std::vector<Model> batch;
  std::optional<detail::BatchHit> hit;
  while (!hit) {
    batch.clear();
    while (batch.size() < batch_size) {
      auto m = en.next();
      if (!m) break;
      batch.push_back(std::move(*m));
    }
    if (batch.empty()) break;

    if (nworkers == 1 || batch.size() == 1) {
      for (std::size_t i = 0; i < batch.size() && !hit; ++i) {
        Evaluator ev(batch[i]);
        const long miss = ev.sat(query).first_unset();
        if (miss >= 0) hit = detail::BatchHit{i, static_cast<std::size_t>(miss)};
      }
    } else {
      std::vector<std::optional<detail::BatchHit>> local(nworkers);
      std::vector<std::exception_ptr> errors(nworkers);
      std::vector<std::thread> pool;
      for (int w = 0; w < nworkers; ++w)
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < batch.size(); i += nworkers) {
              Evaluator ev(batch[i]);
              const long miss = ev.sat(query).first_unset();
              if (miss >= 0) {
                local[w] = detail::BatchHit{i, static_cast<std::size_t>(miss)};
                return;
              }
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
      for (const auto& l : local)
        if (l && (!hit || l->offset < hit->offset)) hit = l;
    }

    verdict.models_checked += hit ? hit->offset + 1 : batch.size();
  }

  if (hit) {
    const Model& found = batch[hit->offset];
    const View view = Evaluator(found).views()[hit->view];
    Model small = detail::minimize_counterexample(found, view, query);
    // undo the canonical renaming so the countermodel falsifies f itself
    std::map<std::string, std::vector<View>> valuation;
    for (auto& [p, views] : small.valuation) {
      const auto it = ren_back.find(p);
      valuation[it == ren_back.end() ? p : it->second] = std::move(views);
    }
    small.valuation = std::move(valuation);
    verdict.counterexample = Counterexample{std::move(small), view};
  }
  return verdict;
}

// ── random models ───────────────────────────────────────────────────────────

namespace detail {

// Uniform draw from [0, n) by rejection; stable across platforms.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

}  // namespace detail

// Deterministic in (seed, bounds); sizes, presence, partitions, referent sets
// and valuation are drawn uniformly from the legal choices, so the result
// always validates.
inline Model random_model(std::uint64_t seed, const Bounds& b) {
  check_bounds(b);
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) { return detail::uniform_below(rng, n); };
  auto coin = [&] { return below(2) == 1; };

  const int k = static_cast<int>(below(b.max_states + 1));
  const int mc = static_cast<int>(below(b.max_agents + 1));
  const int j = 1 + static_cast<int>(below(b.max_names));
  const int v = static_cast<int>(below(b.max_vars + 1));

  Model m;
  for (int s = 0; s < k; ++s) m.states.push_back("s" + std::to_string(s + 1));
  for (int a = 0; a < mc; ++a) m.agents.push_back("a" + std::to_string(a + 1));
  for (int n = 0; n < j; ++n) m.names.push_back("n" + std::to_string(n + 1));

  std::vector<std::vector<int>> present(mc);
  for (int a = 0; a < mc; ++a)
    for (int s = 0; s < k; ++s)
      if (coin()) present[a].push_back(s);
  std::vector<std::vector<int>> present_at(k);
  for (int a = 0; a < mc; ++a)
    for (const int s : present[a]) present_at[s].push_back(a);

  for (int a = 0; a < mc; ++a) {
    auto& ps = m.presence[m.agents[a]];
    for (const int s : present[a]) ps.push_back(m.states[s]);
    const auto parts = detail::partitions_of(static_cast<int>(present[a].size()));
    const auto& partition = parts[below(parts.size())];
    auto& classes = m.indist[m.agents[a]];
    for (const auto& block : partition) {
      std::vector<std::string> cls;
      for (const int pos : block) cls.push_back(m.states[present[a][pos]]);
      classes.push_back(std::move(cls));
    }
  }

  for (int a = 0; a < mc; ++a)
    for (const int s : present[a])
      for (int n = 0; n < j; ++n) {
        // uniform nonempty subset of the agents present in s
        std::vector<int> chosen;
        while (chosen.empty())
          for (const int r : present_at[s])
            if (coin()) chosen.push_back(r);
        for (const int r : chosen)
          m.ident.push_back({m.agents[a], m.states[s], m.names[n], m.agents[r]});
      }

  std::vector<View> views;
  for (int a = 0; a < mc; ++a)
    for (const int s : present[a]) views.push_back({m.agents[a], m.states[s]});
  for (int p = 0; p < v; ++p) {
    auto& vs = m.valuation["p" + std::to_string(p + 1)];
    for (const View& view : views)
      if (coin()) vs.push_back(view);
  }

  m.normalize();
  return m;
}

// ── schema checking on models ───────────────────────────────────────────────

struct SchemaViolation {
  View view;
  Formula instance;
  std::optional<Modality> box;
};

namespace detail {

inline std::vector<SchemaBinding> schema_bindings(const Schema& schema,
                                                  std::span<const Formula> pool) {
  std::vector<SchemaBinding> out;
  std::vector<std::optional<Modality>> boxes;
  if (schema.has_box)
    boxes = {Modality::K, Modality::A};
  else
    boxes = {std::nullopt};
  for (const auto& box : boxes) {
    if (schema.metavars.size() == 1) {
      for (const Formula& f : pool) {
        SchemaBinding b;
        b.vars.emplace(schema.metavars[0], f);
        b.box = box;
        out.push_back(std::move(b));
      }
    } else {
      for (const Formula& f : pool)
        for (const Formula& g : pool) {
          SchemaBinding b;
          b.vars.emplace(schema.metavars[0], f);
          b.vars.emplace(schema.metavars[1], g);
          b.box = box;
          out.push_back(std::move(b));
        }
    }
  }
  return out;
}

}  // namespace detail

// Instantiates the schema with every tuple from the pool (box read as both K
// and A) and evaluates each instance at every view; returns all failures.
inline std::vector<SchemaViolation> check_schema_on_model(const Model& m, const Schema& schema,
                                                          std::span<const Formula> pool) {
  std::vector<SchemaViolation> out;
  Evaluator ev(m);
  for (const SchemaBinding& binding : detail::schema_bindings(schema, pool)) {
    const Formula inst = instantiate_schema(schema, binding);
    const detail::ViewBits& bits = ev.sat(inst);
    if (bits.all()) continue;
    for (std::size_t v = 0; v < ev.view_count(); ++v)
      if (!bits.test(v)) out.push_back({ev.views()[v], inst, binding.box});
  }
  return out;
}

// Same sweep with a caller-supplied truth predicate; lets tests aim the
// detector at a deliberately broken evaluator.
template <typename HoldsFn>
std::vector<SchemaViolation> check_schema_with(const Model& m, const Schema& schema,
                                               std::span<const Formula> pool,
                                               HoldsFn&& holds) {
  std::vector<SchemaViolation> out;
  std::vector<View> views;
  for (const auto& [a, ss] : m.presence)
    for (const auto& s : ss) views.push_back({a, s});
  std::sort(views.begin(), views.end());
  for (const SchemaBinding& binding : detail::schema_bindings(schema, pool)) {
    const Formula inst = instantiate_schema(schema, binding);
    for (const View& v : views)
      if (!holds(m, v, inst)) out.push_back({v, inst, binding.box});
  }
  return out;
}

}  // namespace kw
