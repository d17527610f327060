#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdspec/prop.hpp"

namespace tdspec {

enum class FKind {
  PtAtom,       // <phi>   : phi holds at the start point (no length constraint)
  AllButLast,   // [phi]   : phi at all positions except the last
  All,          // [[phi]] : phi at all positions including the last
  Unit,         // {phi}   : unit interval whose start satisfies phi
  Chop,         // D1 ^ D2
  Not,
  Or,
  And,
  Star,
  Exists,
  Forall,
  SlenCmp,      // slen  op c
  ScountCmp,    // scount phi op c
  SdurCmp,      // sdur  phi op c
};

enum class CmpOp { Lt, Le, Eq, Ge, Gt };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FKind kind;
  Prop prop;          // atoms and counting terms
  std::string var;    // Exists / Forall
  CmpOp op = CmpOp::Eq;
  long long bound = 0;  // comparisons, always >= 0
  Formula lhs, rhs;   // unary nodes use lhs
};

namespace detail {
inline Formula mk(FormulaNode n) { return std::make_shared<FormulaNode>(std::move(n)); }
}

inline Formula f_pt_atom(Prop phi) { return detail::mk({FKind::PtAtom, std::move(phi), "", CmpOp::Eq, 0, nullptr, nullptr}); }
inline Formula f_all_but_last(Prop phi) { return detail::mk({FKind::AllButLast, std::move(phi), "", CmpOp::Eq, 0, nullptr, nullptr}); }
inline Formula f_all(Prop phi) { return detail::mk({FKind::All, std::move(phi), "", CmpOp::Eq, 0, nullptr, nullptr}); }
inline Formula f_unit(Prop phi) { return detail::mk({FKind::Unit, std::move(phi), "", CmpOp::Eq, 0, nullptr, nullptr}); }
inline Formula f_chop(Formula a, Formula b) { return detail::mk({FKind::Chop, nullptr, "", CmpOp::Eq, 0, std::move(a), std::move(b)}); }
inline Formula f_not(Formula a) { return detail::mk({FKind::Not, nullptr, "", CmpOp::Eq, 0, std::move(a), nullptr}); }
inline Formula f_or(Formula a, Formula b) { return detail::mk({FKind::Or, nullptr, "", CmpOp::Eq, 0, std::move(a), std::move(b)}); }
inline Formula f_and(Formula a, Formula b) { return detail::mk({FKind::And, nullptr, "", CmpOp::Eq, 0, std::move(a), std::move(b)}); }
inline Formula f_star(Formula a) { return detail::mk({FKind::Star, nullptr, "", CmpOp::Eq, 0, std::move(a), nullptr}); }
inline Formula f_exists(std::string v, Formula a) { return detail::mk({FKind::Exists, nullptr, std::move(v), CmpOp::Eq, 0, std::move(a), nullptr}); }
inline Formula f_forall(std::string v, Formula a) { return detail::mk({FKind::Forall, nullptr, std::move(v), CmpOp::Eq, 0, std::move(a), nullptr}); }
inline Formula f_slen(CmpOp op, long long c) { return detail::mk({FKind::SlenCmp, nullptr, "", op, c, nullptr, nullptr}); }
inline Formula f_scount(Prop phi, CmpOp op, long long c) { return detail::mk({FKind::ScountCmp, std::move(phi), "", op, c, nullptr, nullptr}); }
inline Formula f_sdur(Prop phi, CmpOp op, long long c) { return detail::mk({FKind::SdurCmp, std::move(phi), "", op, c, nullptr, nullptr}); }

// Derived constructs; the parser expands these before any later stage sees them.
inline Formula f_true() { return f_slen(CmpOp::Ge, 0); }
inline Formula f_false() { return f_slen(CmpOp::Lt, 0); }
inline Formula f_point() { return f_slen(CmpOp::Eq, 0); }
inline Formula f_ext() { return f_slen(CmpOp::Ge, 1); }
inline Formula f_diamond(Formula d) { return f_chop(f_true(), f_chop(std::move(d), f_true())); }
inline Formula f_box(Formula d) { return f_not(f_diamond(f_not(std::move(d)))); }
inline Formula f_implies(Formula a, Formula b) { return f_or(f_not(std::move(a)), std::move(b)); }
inline Formula f_and_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return f_true();
  Formula r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = f_and(r, fs[i]);
  return r;
}
inline Formula f_or_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return f_false();
  Formula r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = f_or(r, fs[i]);
  return r;
}

inline bool formula_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->var != b->var || a->op != b->op || a->bound != b->bound)
    return false;
  if (!!a->prop != !!b->prop) return false;
  if (a->prop && !prop_equal(a->prop, b->prop)) return false;
  return formula_equal(a->lhs, b->lhs) && formula_equal(a->rhs, b->rhs);
}

/// Node count including embedded propositional trees.
inline std::size_t formula_size(const Formula& f) {
  if (!f) return 0;
  return 1 + prop_size(f->prop) + formula_size(f->lhs) + formula_size(f->rhs);
}

/// Free variables (propositional leaves minus quantified names).
inline void free_vars_rec(const Formula& f, std::set<std::string>& bound,
                          std::set<std::string>& out) {
  if (!f) return;
  if (f->prop) {
    for (const auto& v : prop_vars(f->prop))
      if (!bound.count(v)) out.insert(v);
  }
  if (f->kind == FKind::Exists || f->kind == FKind::Forall) {
    bool fresh = bound.insert(f->var).second;
    free_vars_rec(f->lhs, bound, out);
    if (fresh) bound.erase(f->var);
    return;
  }
  free_vars_rec(f->lhs, bound, out);
  free_vars_rec(f->rhs, bound, out);
}

inline std::set<std::string> formula_free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

namespace detail {
inline Formula rename_rec(const Formula& f, std::map<std::string, std::string>& env,
                          std::set<std::string>& used, int& counter) {
  if (!f) return f;
  if (f->kind == FKind::Exists || f->kind == FKind::Forall) {
    std::string fresh = f->var;
    if (used.count(fresh)) {
      do {
        fresh = f->var + "~" + std::to_string(counter++);
      } while (used.count(fresh));
    }
    used.insert(fresh);
    auto it = env.find(f->var);
    std::optional<std::string> saved;
    if (it != env.end()) saved = it->second;
    env[f->var] = fresh;
    Formula body = rename_rec(f->lhs, env, used, counter);
    if (saved) env[f->var] = *saved; else env.erase(f->var);
    return f->kind == FKind::Exists ? f_exists(fresh, body) : f_forall(fresh, body);
  }
  Prop prop = f->prop;
  if (prop && !env.empty()) {
    std::map<std::string, Prop> sub;
    for (const auto& [from, to] : env)
      if (from != to) sub[from] = p_var(to);
    if (!sub.empty()) prop = substitute(prop, sub);
  }
  FormulaNode n = *f;
  n.prop = prop;
  n.lhs = rename_rec(f->lhs, env, used, counter);
  n.rhs = rename_rec(f->rhs, env, used, counter);
  return detail::mk(std::move(n));
}

inline void all_names_rec(const Formula& f, std::set<std::string>& out) {
  if (!f) return;
  if (f->prop) collect_vars(f->prop, out);
  if (!f->var.empty()) out.insert(f->var);
  all_names_rec(f->lhs, out);
  all_names_rec(f->rhs, out);
}
}  // namespace detail

/// Alpha-rename bound variables so that every binder introduces a unique name
/// distinct from free variables and from `reserved`.
inline Formula rename_apart(const Formula& f, const std::set<std::string>& reserved = {}) {
  // A binder keeps its spelling unless it collides with a reserved name, a
  // free variable, or an earlier binder.
  std::set<std::string> used = reserved;
  std::set<std::string> free = formula_free_vars(f);
  used.insert(free.begin(), free.end());
  std::map<std::string, std::string> env;
  int counter = 0;
  return detail::rename_rec(f, env, used, counter);
}

// ---------------------------------------------------------------------------
// Fragment classification: CE < SeCe < FullQDDC.
// SeCe forbids Not/Exists/Forall; CE additionally forbids And.

enum class FragmentTag { CE, SeCe, FullQDDC };

using Path = std::vector<int>;

inline std::string path_to_string(const Path& p) {
  if (p.empty()) return "root";
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ".";
    s += std::to_string(p[i]);
  }
  return s;
}

struct FragmentInfo {
  FragmentTag tag = FragmentTag::CE;
  std::vector<Path> not_sece;  // Not / Exists / Forall nodes
  std::vector<Path> not_ce;    // And nodes
};

namespace detail {
inline void classify_rec(const Formula& f, Path& path, FragmentInfo& info) {
  if (!f) return;
  if (f->kind == FKind::Not || f->kind == FKind::Exists || f->kind == FKind::Forall)
    info.not_sece.push_back(path);
  if (f->kind == FKind::And) info.not_ce.push_back(path);
  if (f->lhs) {
    path.push_back(0);
    classify_rec(f->lhs, path, info);
    path.pop_back();
  }
  if (f->rhs) {
    path.push_back(1);
    classify_rec(f->rhs, path, info);
    path.pop_back();
  }
}
}  // namespace detail

inline FragmentInfo classify_fragment(const Formula& f) {
  FragmentInfo info;
  Path path;
  detail::classify_rec(f, path, info);
  if (!info.not_sece.empty())
    info.tag = FragmentTag::FullQDDC;
  else if (!info.not_ce.empty())
    info.tag = FragmentTag::SeCe;
  else
    info.tag = FragmentTag::CE;
  return info;
}

// ---------------------------------------------------------------------------
// Printer. Precedence levels, weakest first:
//   0 quantifier  1 =>  2 ||  3 &&  4 ^  5 unary/postfix-star/atom
// Chop and => are printed right-associated.

namespace detail {
inline const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "=";
}

inline int formula_prec(const FormulaNode& f) {
  switch (f.kind) {
    case FKind::Exists:
    case FKind::Forall: return 0;
    case FKind::Or: return 2;
    case FKind::And: return 3;
    case FKind::Chop: return 4;
    default: return 5;
  }
}

inline void print_formula_rec(const Formula& f, int parent, std::string& out) {
  int prec = formula_prec(*f);
  bool paren = prec < parent;
  if (paren) out += "(";
  switch (f->kind) {
    case FKind::PtAtom: out += "<" + print_prop(f->prop) + ">"; break;
    case FKind::AllButLast: out += "[" + print_prop(f->prop) + "]"; break;
    case FKind::All: out += "[[" + print_prop(f->prop) + "]]"; break;
    case FKind::Unit: out += "{" + print_prop(f->prop) + "}"; break;
    case FKind::SlenCmp:
      out += "slen ";
      out += cmp_text(f->op);
      out += " " + std::to_string(f->bound);
      break;
    case FKind::ScountCmp:
    case FKind::SdurCmp: {
      out += f->kind == FKind::ScountCmp ? "scount " : "sdur ";
      bool simple = f->prop->kind == PKind::Var || f->prop->kind == PKind::True ||
                    f->prop->kind == PKind::False;
      if (simple) out += print_prop(f->prop);
      else out += "(" + print_prop(f->prop) + ")";
      out += " ";
      out += cmp_text(f->op);
      out += " " + std::to_string(f->bound);
      break;
    }
    case FKind::Chop:
      print_formula_rec(f->lhs, 5, out);
      out += " ^ ";
      print_formula_rec(f->rhs, 4, out);
      break;
    case FKind::Not:
      out += "!";
      print_formula_rec(f->lhs, 5, out);
      break;
    case FKind::Star:
      print_formula_rec(f->lhs, 6, out);  // always parenthesize compound bodies
      out += "*";
      break;
    case FKind::And:
      print_formula_rec(f->lhs, 3, out);
      out += " && ";
      print_formula_rec(f->rhs, 4, out);
      break;
    case FKind::Or:
      print_formula_rec(f->lhs, 2, out);
      out += " || ";
      print_formula_rec(f->rhs, 3, out);
      break;
    case FKind::Exists:
      out += "ex " + f->var + ". ";
      print_formula_rec(f->lhs, 0, out);
      break;
    case FKind::Forall:
      out += "all " + f->var + ". ";
      print_formula_rec(f->lhs, 0, out);
      break;
  }
  if (paren) out += ")";
}
}  // namespace detail

inline std::string print_formula(const Formula& f) {
  std::string out;
  detail::print_formula_rec(f, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser.

namespace detail {

class QddcParser {
 public:
  QddcParser(Lexer& lx, const std::set<std::string>* sigma,
             const std::map<std::string, long long>* consts)
      : lx_(lx), sigma_(sigma), consts_(consts) {}

  Formula parse() { return quantified(); }

  Formula quantified() {
    if (lx_.peek().kind == Tok::Ident &&
        (lx_.peek().text == "ex" || lx_.peek().text == "all")) {
      bool ex = lx_.peek().text == "ex";
      lx_.next();
      Token v = lx_.expect(Tok::Ident, "quantified variable");
      lx_.expect(Tok::Dot, "'.'");
      Formula body = quantified();
      return ex ? f_exists(v.text, body) : f_forall(v.text, body);
    }
    return implies();
  }

  Formula implies() {
    Formula a = disj();
    if (lx_.accept(Tok::Implies)) return f_implies(a, implies());
    return a;
  }
  Formula disj() {
    Formula a = conj();
    while (lx_.accept(Tok::Or)) a = f_or(a, conj());
    return a;
  }
  Formula conj() {
    Formula a = chop();
    while (lx_.accept(Tok::And)) a = f_and(a, chop());
    return a;
  }
  Formula chop() {
    Formula a = unary();
    if (lx_.accept(Tok::Chop)) return f_chop(a, chop());
    return a;
  }
  Formula unary() {
    if (lx_.accept(Tok::Not)) return f_not(unary());
    if (lx_.peek().kind == Tok::Ident) {
      if (lx_.peek().text == "__diamond") { lx_.next(); return f_diamond(unary()); }
      if (lx_.peek().text == "__box") { lx_.next(); return f_box(unary()); }
    }
    return postfix();
  }
  Formula postfix() {
    Formula a = atom();
    while (lx_.accept(Tok::Star)) a = f_star(a);
    return a;
  }

  Formula atom() {
    switch (lx_.kind()) {
      case Tok::Lt: {
        lx_.next();
        Prop phi = prop_expr();
        lx_.expect(Tok::Gt, "'>'");
        return f_pt_atom(phi);
      }
      case Tok::LBrack: {
        lx_.next();
        Prop phi = prop_expr();
        lx_.expect(Tok::RBrack, "']'");
        return f_all_but_last(phi);
      }
      case Tok::LLBrack: {
        lx_.next();
        Prop phi = prop_expr();
        lx_.expect(Tok::RRBrack, "']]'");
        return f_all(phi);
      }
      case Tok::LBrace: {
        lx_.next();
        Prop phi = prop_expr();
        lx_.expect(Tok::RBrace, "'}'");
        return f_unit(phi);
      }
      case Tok::LParen: {
        lx_.next();
        Formula d = quantified();
        lx_.expect(Tok::RParen, "')'");
        return d;
      }
      case Tok::Ident: {
        const std::string& id = lx_.peek().text;
        if (id == "slen") { lx_.next(); auto [op, c] = comparison(); return f_slen(op, c); }
        if (id == "scount") { lx_.next(); Prop phi = prop_atom(); auto [op, c] = comparison(); return f_scount(phi, op, c); }
        if (id == "sdur") { lx_.next(); Prop phi = prop_atom(); auto [op, c] = comparison(); return f_sdur(phi, op, c); }
        if (id == "pt") { lx_.next(); return f_point(); }
        if (id == "ext") { lx_.next(); return f_ext(); }
        if (id == "true") { lx_.next(); return f_true(); }
        if (id == "false") { lx_.next(); return f_false(); }
        break;
      }
      default: break;
    }
    // Diamond / Box written as <> and [] arrive as '<' '>' / '[' ']' pairs.
    lx_.fail("expected QDDC formula");
  }

 private:
  Prop prop_expr() {
    PropParser p(lx_, sigma_);
    return p.parse();
  }

  // Argument of scount/sdur: a variable, constant, negation, or parenthesized
  // propositional formula.
  Prop prop_atom() {
    if (lx_.accept(Tok::Not)) return p_not(prop_atom());
    if (lx_.kind() == Tok::LParen) {
      lx_.next();
      Prop phi = prop_expr();
      lx_.expect(Tok::RParen, "')'");
      return phi;
    }
    if (lx_.kind() == Tok::Ident || lx_.kind() == Tok::Nat) {
      PropParser p(lx_, sigma_);
      // Single atom only.
      return p.atom();
    }
    lx_.fail("expected propositional argument");
  }

  std::pair<CmpOp, long long> comparison() {
    CmpOp op;
    switch (lx_.kind()) {
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Eq: op = CmpOp::Eq; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      default: lx_.fail("expected comparison operator");
    }
    lx_.next();
    if (lx_.kind() == Tok::Minus)
      lx_.fail("negative constants are not allowed");
    if (lx_.kind() == Tok::Ident) {
      Token t = lx_.next();
      if (consts_) {
        auto it = consts_->find(t.text);
        if (it != consts_->end()) return {op, it->second};
      }
      throw ParseError("unresolved constant '" + t.text + "'", t.line, t.col);
    }
    Token t = lx_.expect(Tok::Nat, "natural constant");
    return {op, t.value};
  }

  Lexer& lx_;
  const std::set<std::string>* sigma_;
  const std::map<std::string, long long>* consts_;
};

}  // namespace detail

/// Parse a QDDC formula. Named constants are resolved through `consts` when
/// given; otherwise numerals are required.
inline Formula parse_qddc(const std::string& text, const std::set<std::string>& sigma,
                          const std::map<std::string, long long>* consts = nullptr) {
  // Pre-pass for modal sugar: rewrite "<>" and "[]" token pairs. They only
  // appear as prefixes of a formula, so a textual rewrite is unambiguous.
  std::string rewritten;
  rewritten.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<' && i + 1 < text.size() && text[i + 1] == '>') {
      rewritten += " __diamond ";
      ++i;
    } else if (text[i] == '[' && i + 1 < text.size() && text[i + 1] == ']') {
      rewritten += " __box ";
      ++i;
    } else {
      rewritten.push_back(text[i]);
    }
  }
  Lexer lx(rewritten);
  detail::QddcParser parser(lx, &sigma, consts);
  Formula f = parser.parse();
  if (lx.kind() != Tok::End) lx.fail("trailing input after formula");
  return f;
}

}  // namespace tdspec
