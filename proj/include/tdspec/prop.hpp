#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdspec/lex.hpp"

namespace tdspec {

enum class PKind { False, True, Var, Not, And, Or, Implies, Iff };

struct PropNode;
using Prop = std::shared_ptr<const PropNode>;

struct PropNode {
  PKind kind;
  std::string var;  // Var
  Prop lhs, rhs;    // Not uses lhs only
};

inline Prop p_false() { return std::make_shared<PropNode>(PropNode{PKind::False, "", nullptr, nullptr}); }
inline Prop p_true() { return std::make_shared<PropNode>(PropNode{PKind::True, "", nullptr, nullptr}); }
inline Prop p_var(std::string name) { return std::make_shared<PropNode>(PropNode{PKind::Var, std::move(name), nullptr, nullptr}); }
inline Prop p_not(Prop a) { return std::make_shared<PropNode>(PropNode{PKind::Not, "", std::move(a), nullptr}); }
inline Prop p_and(Prop a, Prop b) { return std::make_shared<PropNode>(PropNode{PKind::And, "", std::move(a), std::move(b)}); }
inline Prop p_or(Prop a, Prop b) { return std::make_shared<PropNode>(PropNode{PKind::Or, "", std::move(a), std::move(b)}); }
inline Prop p_implies(Prop a, Prop b) { return std::make_shared<PropNode>(PropNode{PKind::Implies, "", std::move(a), std::move(b)}); }
inline Prop p_iff(Prop a, Prop b) { return std::make_shared<PropNode>(PropNode{PKind::Iff, "", std::move(a), std::move(b)}); }

inline Prop p_and_all(const std::vector<Prop>& ps) {
  if (ps.empty()) return p_true();
  Prop r = ps[0];
  for (std::size_t i = 1; i < ps.size(); ++i) r = p_and(r, ps[i]);
  return r;
}
inline Prop p_or_all(const std::vector<Prop>& ps) {
  if (ps.empty()) return p_false();
  Prop r = ps[0];
  for (std::size_t i = 1; i < ps.size(); ++i) r = p_or(r, ps[i]);
  return r;
}

inline bool prop_equal(const Prop& a, const Prop& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case PKind::False:
    case PKind::True: return true;
    case PKind::Var: return a->var == b->var;
    case PKind::Not: return prop_equal(a->lhs, b->lhs);
    default: return prop_equal(a->lhs, b->lhs) && prop_equal(a->rhs, b->rhs);
  }
}

inline void collect_vars(const Prop& p, std::set<std::string>& out) {
  if (!p) return;
  if (p->kind == PKind::Var) out.insert(p->var);
  collect_vars(p->lhs, out);
  collect_vars(p->rhs, out);
}

inline std::set<std::string> prop_vars(const Prop& p) {
  std::set<std::string> s;
  collect_vars(p, s);
  return s;
}

inline std::size_t prop_size(const Prop& p) {
  if (!p) return 0;
  return 1 + prop_size(p->lhs) + prop_size(p->rhs);
}

inline bool eval_prop(const Prop& p, const std::function<bool(const std::string&)>& env) {
  switch (p->kind) {
    case PKind::False: return false;
    case PKind::True: return true;
    case PKind::Var: return env(p->var);
    case PKind::Not: return !eval_prop(p->lhs, env);
    case PKind::And: return eval_prop(p->lhs, env) && eval_prop(p->rhs, env);
    case PKind::Or: return eval_prop(p->lhs, env) || eval_prop(p->rhs, env);
    case PKind::Implies: return !eval_prop(p->lhs, env) || eval_prop(p->rhs, env);
    case PKind::Iff: return eval_prop(p->lhs, env) == eval_prop(p->rhs, env);
  }
  return false;
}

/// Maps variable names to bit positions of a letter bitmask.
struct VarIndex {
  std::map<std::string, int> idx;
  explicit VarIndex(const std::vector<std::string>& vars = {}) {
    for (std::size_t i = 0; i < vars.size(); ++i) idx[vars[i]] = static_cast<int>(i);
  }
  int at(const std::string& v) const {
    auto it = idx.find(v);
    if (it == idx.end()) throw ApiError("variable '" + v + "' not in alphabet");
    return it->second;
  }
};

inline bool eval_prop(const Prop& p, const VarIndex& vi, std::uint32_t letter) {
  switch (p->kind) {
    case PKind::False: return false;
    case PKind::True: return true;
    case PKind::Var: return (letter >> vi.at(p->var)) & 1u;
    case PKind::Not: return !eval_prop(p->lhs, vi, letter);
    case PKind::And: return eval_prop(p->lhs, vi, letter) && eval_prop(p->rhs, vi, letter);
    case PKind::Or: return eval_prop(p->lhs, vi, letter) || eval_prop(p->rhs, vi, letter);
    case PKind::Implies: return !eval_prop(p->lhs, vi, letter) || eval_prop(p->rhs, vi, letter);
    case PKind::Iff: return eval_prop(p->lhs, vi, letter) == eval_prop(p->rhs, vi, letter);
  }
  return false;
}

/// Substitute whole propositions for variables.
inline Prop substitute(const Prop& p, const std::map<std::string, Prop>& map) {
  switch (p->kind) {
    case PKind::False:
    case PKind::True: return p;
    case PKind::Var: {
      auto it = map.find(p->var);
      return it == map.end() ? p : it->second;
    }
    case PKind::Not: return p_not(substitute(p->lhs, map));
    case PKind::And: return p_and(substitute(p->lhs, map), substitute(p->rhs, map));
    case PKind::Or: return p_or(substitute(p->lhs, map), substitute(p->rhs, map));
    case PKind::Implies: return p_implies(substitute(p->lhs, map), substitute(p->rhs, map));
    case PKind::Iff: return p_iff(substitute(p->lhs, map), substitute(p->rhs, map));
  }
  return p;
}

// Printing. Precedence: iff < implies < or < and < not/atom.
namespace detail {
inline int prop_prec(PKind k) {
  switch (k) {
    case PKind::Iff: return 0;
    case PKind::Implies: return 1;
    case PKind::Or: return 2;
    case PKind::And: return 3;
    default: return 4;
  }
}
inline void print_prop_rec(const Prop& p, int parent, std::string& out) {
  int prec = prop_prec(p->kind);
  bool paren = prec < parent;
  if (paren) out += "(";
  switch (p->kind) {
    case PKind::False: out += "false"; break;
    case PKind::True: out += "true"; break;
    case PKind::Var: out += p->var; break;
    case PKind::Not:
      out += "!";
      print_prop_rec(p->lhs, 4, out);
      break;
    case PKind::And:
      print_prop_rec(p->lhs, 3, out);
      out += " && ";
      print_prop_rec(p->rhs, 4, out);
      break;
    case PKind::Or:
      print_prop_rec(p->lhs, 2, out);
      out += " || ";
      print_prop_rec(p->rhs, 3, out);
      break;
    case PKind::Implies:
      print_prop_rec(p->lhs, 2, out);
      out += " => ";
      print_prop_rec(p->rhs, 1, out);
      break;
    case PKind::Iff:
      print_prop_rec(p->lhs, 0, out);
      out += " <=> ";
      print_prop_rec(p->rhs, 1, out);
      break;
  }
  if (paren) out += ")";
}
}  // namespace detail

inline std::string print_prop(const Prop& p) {
  std::string out;
  detail::print_prop_rec(p, 0, out);
  return out;
}

// Recursive-descent parser. Grammar (low to high):
//   iff := imp ('<=>' imp)*            (right-assoc)
//   imp := or ('=>' imp)?
//   or  := and ('||' and)*
//   and := unary ('&&' unary)*
//   unary := '!' unary | atom
//   atom := '0' | '1' | 'true' | 'false' | ident | '(' iff ')'
namespace detail {

class PropParser {
 public:
  PropParser(Lexer& lx, const std::set<std::string>* sigma) : lx_(lx), sigma_(sigma) {}

  Prop parse() { return iff(); }

  Prop iff() {
    Prop a = imp();
    while (lx_.accept(Tok::Iff)) a = p_iff(a, imp());
    return a;
  }
  Prop imp() {
    Prop a = disj();
    if (lx_.accept(Tok::Implies)) return p_implies(a, imp());
    return a;
  }
  Prop disj() {
    Prop a = conj();
    while (lx_.accept(Tok::Or)) a = p_or(a, conj());
    return a;
  }
  Prop conj() {
    Prop a = unary();
    while (lx_.accept(Tok::And)) a = p_and(a, unary());
    return a;
  }
  Prop unary() {
    if (lx_.accept(Tok::Not)) return p_not(unary());
    return atom();
  }
  Prop atom() {
    if (lx_.kind() == Tok::Nat) {
      Token t = lx_.next();
      if (t.value == 0) return p_false();
      if (t.value == 1) return p_true();
      throw ParseError("expected propositional constant 0 or 1", t.line, t.col);
    }
    if (lx_.kind() == Tok::Ident) {
      Token t = lx_.next();
      if (t.text == "true") return p_true();
      if (t.text == "false") return p_false();
      if (sigma_ && !sigma_->count(t.text))
        throw UndeclaredVariableError(t.text, t.line, t.col);
      return p_var(t.text);
    }
    if (lx_.accept(Tok::LParen)) {
      Prop a = iff();
      lx_.expect(Tok::RParen, "')'");
      return a;
    }
    lx_.fail("expected propositional formula");
  }

 private:
  Lexer& lx_;
  const std::set<std::string>* sigma_;
};

}  // namespace detail

/// Parse a propositional formula over the declared variable set.
inline Prop parse_prop(const std::string& text, const std::set<std::string>& sigma) {
  Lexer lx(text);
  detail::PropParser p(lx, &sigma);
  Prop r = p.parse();
  if (lx.kind() != Tok::End) lx.fail("trailing input after formula");
  return r;
}

/// Parse without a declared-variable check (used where the scope is implicit).
inline Prop parse_prop_any(const std::string& text) {
  Lexer lx(text);
  detail::PropParser p(lx, nullptr);
  Prop r = p.parse();
  if (lx.kind() != Tok::End) lx.fail("trailing input after formula");
  return r;
}

// Truth-table based simplification to a small canonical DNF over the support.
// Used to keep automaton edge guards readable and deterministic.
namespace detail {

// Grow a cube (care-mask, values) to a prime implicant of the on-set.
inline void grow_cube(std::uint32_t& care, std::uint32_t vals, unsigned nvars,
                      const std::vector<bool>& onset) {
  for (unsigned v = 0; v < nvars; ++v) {
    std::uint32_t bit = 1u << v;
    if (!(care & bit)) continue;
    std::uint32_t try_care = care & ~bit;
    // Check all assignments matching the widened cube are in the on-set.
    bool ok = true;
    for (std::uint32_t a = 0; a < (1u << nvars) && ok; ++a) {
      if ((a & try_care) == (vals & try_care) && !onset[a]) ok = false;
    }
    if (ok) care = try_care;
  }
}

}  // namespace detail

/// Simplify to a short DNF over the prop's own support. Exact (truth-table)
/// for supports up to 16 variables; returned formula is deterministic.
inline Prop simplify_prop(const Prop& p) {
  std::set<std::string> varset = prop_vars(p);
  std::vector<std::string> vars(varset.begin(), varset.end());
  unsigned n = static_cast<unsigned>(vars.size());
  if (n > 16) return p;
  VarIndex vi(vars);
  std::uint32_t total = 1u << n;
  std::vector<bool> onset(total);
  bool any = false, all = true;
  for (std::uint32_t a = 0; a < total; ++a) {
    onset[a] = eval_prop(p, vi, a);
    any = any || onset[a];
    all = all && onset[a];
  }
  if (!any) return p_false();
  if (all) return p_true();
  // Greedy prime-implicant cover in ascending assignment order.
  std::vector<bool> covered(total, false);
  std::vector<Prop> terms;
  for (std::uint32_t a = 0; a < total; ++a) {
    if (!onset[a] || covered[a]) continue;
    std::uint32_t care = total - 1;
    detail::grow_cube(care, a, n, onset);
    for (std::uint32_t b = 0; b < total; ++b)
      if ((b & care) == (a & care)) covered[b] = true;
    std::vector<Prop> lits;
    for (unsigned v = 0; v < n; ++v) {
      if (!(care & (1u << v))) continue;
      lits.push_back((a >> v) & 1u ? p_var(vars[v]) : p_not(p_var(vars[v])));
    }
    terms.push_back(lits.empty() ? p_true() : p_and_all(lits));
  }
  return p_or_all(terms);
}

}  // namespace tdspec
