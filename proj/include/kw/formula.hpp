#pragma once

// ============================================================================
// kw/formula.hpp — abstract syntax, parser, and printer
// ============================================================================
//
// The language has seven core node kinds:
//
//   Var       propositional variable (lowercase identifier)
//   Not       !x
//   Implies   x -> y            (right-associative)
//   KnowWho   W x               "knows an agent for whom x is true"
//   Know      K x               "knows that x is true about herself"
//   AllAgents A x               "x is true for all agents in the state"
//   AtName    @n x              "x is true for any agent called n here"
//
// Surface sugar never reaches the tree; the parser desugars
//
//   x & y    to  !(x -> !y)
//   x | y    to  !x -> y
//   x <-> y  to  (x -> y) & (y -> x), then desugared
//   true     to  p0 -> p0
//   false    to  !(p0 -> p0)
//
// where p0 is a reserved variable that cannot be written in source text.
// Formulae are immutable values; copies share structure and are cheap.
// ============================================================================

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace kw {

inline constexpr std::string_view kReservedVar = "p0";

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t offset_,
             std::vector<std::string> expected_ = {})
      : std::runtime_error(msg), offset(offset_), expected(std::move(expected_)) {}
  std::size_t offset;                  // byte offset into the source text
  std::vector<std::string> expected;   // tokens that would have been accepted
};

namespace detail {

inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// variable: [a-z][a-z0-9_]*
inline bool is_var_id(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s)
    if (!is_ident_char(c)) return false;
  return true;
}

// name (after '@'): [a-z0-9_]+
inline bool is_name_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_ident_char(c)) return false;
  return true;
}

}  // namespace detail

class Formula {
 public:
  enum class Kind : std::uint8_t { Var, Not, Implies, KnowWho, Know, AllAgents, AtName };

  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return node_->kind == k; }

  // Var only.
  const std::string& var_name() const {
    assert(is(Kind::Var));
    return node_->id;
  }

  // AtName only.
  const std::string& name() const {
    assert(is(Kind::AtName));
    return node_->id;
  }

  // Unary nodes (Not, KnowWho, Know, AllAgents, AtName).
  Formula body() const {
    assert(!is(Kind::Var) && !is(Kind::Implies));
    return Formula(node_->a);
  }

  // Implies only.
  Formula left() const {
    assert(is(Kind::Implies));
    return Formula(node_->a);
  }
  Formula right() const {
    assert(is(Kind::Implies));
    return Formula(node_->b);
  }

  std::size_t hash() const { return node_->h; }

  friend bool operator==(const Formula& x, const Formula& y) {
    return equal(x.node_.get(), y.node_.get());
  }
  friend bool operator!=(const Formula& x, const Formula& y) { return !(x == y); }

  friend Formula var(const std::string& id);
  friend Formula lnot(const Formula& f);
  friend Formula implies(const Formula& l, const Formula& r);
  friend Formula know_who(const Formula& f);
  friend Formula know(const Formula& f);
  friend Formula all_agents(const Formula& f);
  friend Formula at_name(const std::string& n, const Formula& f);

 private:
  struct Node {
    Kind kind;
    std::string id;                    // Var name or AtName name
    std::shared_ptr<const Node> a, b;  // children
    std::size_t h;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula make(Kind k, std::string id, std::shared_ptr<const Node> a,
                      std::shared_ptr<const Node> b) {
    std::size_t h = detail::hash_mix(static_cast<std::size_t>(k) + 1,
                                     std::hash<std::string>{}(id));
    if (a) h = detail::hash_mix(h, a->h);
    if (b) h = detail::hash_mix(h, b->h);
    return Formula(std::make_shared<const Node>(
        Node{k, std::move(id), std::move(a), std::move(b), h}));
  }

  static bool equal(const Node* x, const Node* y) {
    if (x == y) return true;
    if (x->h != y->h || x->kind != y->kind || x->id != y->id) return false;
    if (x->a && !equal(x->a.get(), y->a.get())) return false;
    if (x->b && !equal(x->b.get(), y->b.get())) return false;
    return true;
  }

  std::shared_ptr<const Node> node_;

  friend struct FormulaHash;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

// ── constructors ────────────────────────────────────────────────────────────

inline Formula var(const std::string& id) {
  if (!detail::is_var_id(id))
    throw std::invalid_argument("invalid variable id '" + id + "'");
  return Formula::make(Formula::Kind::Var, id, nullptr, nullptr);
}

inline Formula lnot(const Formula& f) {
  return Formula::make(Formula::Kind::Not, {}, f.node_, nullptr);
}

inline Formula implies(const Formula& l, const Formula& r) {
  return Formula::make(Formula::Kind::Implies, {}, l.node_, r.node_);
}

inline Formula know_who(const Formula& f) {
  return Formula::make(Formula::Kind::KnowWho, {}, f.node_, nullptr);
}

inline Formula know(const Formula& f) {
  return Formula::make(Formula::Kind::Know, {}, f.node_, nullptr);
}

inline Formula all_agents(const Formula& f) {
  return Formula::make(Formula::Kind::AllAgents, {}, f.node_, nullptr);
}

inline Formula at_name(const std::string& n, const Formula& f) {
  if (!detail::is_name_id(n))
    throw std::invalid_argument("invalid name id '" + n + "'");
  return Formula::make(Formula::Kind::AtName, n, f.node_, nullptr);
}

// ── derived connectives (always desugared) ──────────────────────────────────

inline Formula top() {
  Formula p0 = var(std::string(kReservedVar));
  return implies(p0, p0);
}

inline Formula bottom() { return lnot(top()); }

inline bool is_top(const Formula& f) {
  return f.is(Formula::Kind::Implies) && f.left().is(Formula::Kind::Var) &&
         f.right().is(Formula::Kind::Var) && f.left().var_name() == kReservedVar &&
         f.right().var_name() == kReservedVar;
}

inline bool is_bottom(const Formula& f) {
  return f.is(Formula::Kind::Not) && is_top(f.body());
}

inline Formula land(const Formula& l, const Formula& r) {
  return lnot(implies(l, lnot(r)));
}

inline Formula lor(const Formula& l, const Formula& r) {
  return implies(lnot(l), r);
}

inline Formula liff(const Formula& l, const Formula& r) {
  return land(implies(l, r), implies(r, l));
}

// Right-nested conjunction of a list; the empty conjunction is true.
inline Formula conj_all(std::span<const Formula> fs) {
  if (fs.empty()) return top();
  Formula acc = fs.back();
  for (std::size_t i = fs.size() - 1; i-- > 0;) acc = land(fs[i], acc);
  return acc;
}

inline Formula conj_all(const std::vector<Formula>& fs) {
  return conj_all(std::span<const Formula>(fs));
}

// ── traversal helpers ────────────────────────────────────────────────────────

namespace detail {

inline void collect_subformulas(const Formula& f, std::vector<Formula>& out,
                                std::unordered_set<Formula, FormulaHash>& seen) {
  if (seen.contains(f)) return;
  switch (f.kind()) {
    case Formula::Kind::Var:
      break;
    case Formula::Kind::Implies:
      collect_subformulas(f.left(), out, seen);
      collect_subformulas(f.right(), out, seen);
      break;
    default:
      collect_subformulas(f.body(), out, seen);
      break;
  }
  if (seen.insert(f).second) out.push_back(f);
}

}  // namespace detail

// Post-order list of distinct subformulae; children precede parents, f is last.
inline std::vector<Formula> subformulas(const Formula& f) {
  std::vector<Formula> out;
  std::unordered_set<Formula, FormulaHash> seen;
  detail::collect_subformulas(f, out, seen);
  return out;
}

// Sorted distinct variable ids occurring in f (including the reserved p0 when
// the true/false desugarings are present).
inline std::vector<std::string> variables(const Formula& f) {
  std::vector<std::string> out;
  for (const Formula& g : subformulas(f))
    if (g.is(Formula::Kind::Var)) out.push_back(g.var_name());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Sorted distinct @-names occurring in f.
inline std::vector<std::string> at_names(const Formula& f) {
  std::vector<std::string> out;
  for (const Formula& g : subformulas(f))
    if (g.is(Formula::Kind::AtName)) out.push_back(g.name());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ── parser ──────────────────────────────────────────────────────────────────

namespace detail {

struct Token {
  enum class T {
    LParen, RParen, Bang, Amp, Pipe, Arrow, Iff,
    ModW, ModK, ModA, At, True, False, Var, End
  };
  T t;
  std::string text;  // variable id or @-name
  std::size_t offset;
};

inline const std::vector<std::string>& atom_expected() {
  static const std::vector<std::string> kSet = {"!",    "W",     "K",        "A", "@name",
                                                "true", "false", "variable", "("};
  return kSet;
}

inline std::vector<Token> tokenize(std::string_view src) {
  using T = Token::T;
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    const std::size_t at = i;
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    switch (c) {
      case '(': out.push_back({T::LParen, "(", at}); ++i; continue;
      case ')': out.push_back({T::RParen, ")", at}); ++i; continue;
      case '!': out.push_back({T::Bang, "!", at}); ++i; continue;
      case '&': out.push_back({T::Amp, "&", at}); ++i; continue;
      case '|': out.push_back({T::Pipe, "|", at}); ++i; continue;
      case '-':
        if (i + 1 < n && src[i + 1] == '>') {
          out.push_back({T::Arrow, "->", at});
          i += 2;
          continue;
        }
        throw ParseError("unknown token '-'", at, {"->"});
      case '<':
        if (i + 2 < n && src[i + 1] == '-' && src[i + 2] == '>') {
          out.push_back({T::Iff, "<->", at});
          i += 3;
          continue;
        }
        throw ParseError("unknown token '<'", at, {"<->"});
      case '@': {
        std::size_t j = i + 1;
        while (j < n && is_ident_char(src[j])) ++j;
        if (j == i + 1)
          throw ParseError("'@' must be immediately followed by a name", at, {"@name"});
        out.push_back({T::At, std::string(src.substr(i + 1, j - i - 1)), at});
        i = j;
        continue;
      }
      default: break;
    }
    if (c == 'W' || c == 'K' || c == 'A') {
      out.push_back({c == 'W' ? T::ModW : (c == 'K' ? T::ModK : T::ModA),
                     std::string(1, c), at});
      ++i;
      continue;
    }
    if (c >= 'A' && c <= 'Z')
      throw ParseError(std::string("unknown token '") + c + "': modal prefixes are W, K, A",
                       at);
    if (c >= 'a' && c <= 'z') {
      std::size_t j = i;
      while (j < n && is_ident_char(src[j])) ++j;
      std::string id(src.substr(i, j - i));
      i = j;
      if (id == "true") {
        out.push_back({T::True, id, at});
      } else if (id == "false") {
        out.push_back({T::False, id, at});
      } else if (id == kReservedVar) {
        throw ParseError("variable 'p0' is reserved", at);
      } else {
        out.push_back({T::Var, id, at});
      }
      continue;
    }
    throw ParseError(std::string("unknown token '") + c + "'", at);
  }
  out.push_back({T::End, "", n});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  Formula parse() {
    using T = Token::T;
    if (cur().t == T::End) throw ParseError("empty input", 0, atom_expected());
    Formula f = iff();
    if (cur().t != T::End)
      throw ParseError("expected end of input", cur().offset,
                       {"->", "<->", "&", "|", "end of input"});
    return f;
  }

 private:
  using T = Token::T;

  const Token& cur() const { return toks_[pos_]; }
  void next() { ++pos_; }
  bool accept(T t) {
    if (cur().t != t) return false;
    next();
    return true;
  }

  Formula iff() {
    Formula f = impl();
    while (accept(T::Iff)) f = liff(f, impl());
    return f;
  }

  Formula impl() {
    Formula f = disj();
    if (accept(T::Arrow)) return implies(f, impl());  // right-associative
    return f;
  }

  Formula disj() {
    Formula f = conj();
    while (accept(T::Pipe)) f = lor(f, conj());
    return f;
  }

  Formula conj() {
    Formula f = unary();
    while (accept(T::Amp)) f = land(f, unary());
    return f;
  }

  Formula unary() {
    switch (cur().t) {
      case T::Bang: next(); return lnot(unary());
      case T::ModW: next(); return know_who(unary());
      case T::ModK: next(); return know(unary());
      case T::ModA: next(); return all_agents(unary());
      case T::At: {
        std::string n = cur().text;
        next();
        return at_name(n, unary());
      }
      default: return atom();
    }
  }

  Formula atom() {
    switch (cur().t) {
      case T::True: next(); return top();
      case T::False: next(); return bottom();
      case T::Var: {
        std::string id = cur().text;
        next();
        return var(id);
      }
      case T::LParen: {
        const std::size_t open_at = cur().offset;
        next();
        Formula f = iff();
        if (!accept(T::RParen))
          throw ParseError("unbalanced '(' opened at byte " + std::to_string(open_at),
                           cur().offset, {")"});
        return f;
      }
      case T::RParen:
        throw ParseError("unbalanced ')'", cur().offset, atom_expected());
      case T::End:
        throw ParseError("unexpected end of input", cur().offset, atom_expected());
      default:
        throw ParseError("expected a formula", cur().offset, atom_expected());
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse(std::string_view text) { return detail::Parser(text).parse(); }

// ── printer ─────────────────────────────────────────────────────────────────

namespace detail {

// Minimal parenthesization: implication is the only binary core connective,
// right-associative and loosest; prefixes bind to the smallest unary/atom.
inline void render_to(const Formula& f, std::string& out, bool arg_position) {
  if (is_top(f)) {
    out += "true";
    return;
  }
  if (is_bottom(f)) {
    out += "false";
    return;
  }
  switch (f.kind()) {
    case Formula::Kind::Var:
      out += f.var_name();
      return;
    case Formula::Kind::Not:
      out += '!';
      render_to(f.body(), out, true);
      return;
    case Formula::Kind::KnowWho:
      out += "W ";
      render_to(f.body(), out, true);
      return;
    case Formula::Kind::Know:
      out += "K ";
      render_to(f.body(), out, true);
      return;
    case Formula::Kind::AllAgents:
      out += "A ";
      render_to(f.body(), out, true);
      return;
    case Formula::Kind::AtName:
      out += '@';
      out += f.name();
      out += ' ';
      render_to(f.body(), out, true);
      return;
    case Formula::Kind::Implies: {
      if (arg_position) {
        out += '(';
        render_to(f, out, false);
        out += ')';
        return;
      }
      render_to(f.left(), out, true);
      out += " -> ";
      render_to(f.right(), out, false);
      return;
    }
  }
}

}  // namespace detail

inline std::string render(const Formula& f) {
  std::string out;
  detail::render_to(f, out, false);
  return out;
}

}  // namespace kw
