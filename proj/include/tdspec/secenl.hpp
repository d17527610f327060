#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tdspec/formula.hpp"

namespace tdspec {

/// A SeCe formula together with the set of its variables used as nominals.
struct NominatedFormula {
  Formula d;
  std::vector<std::string> theta;  // sorted, no duplicates
};

enum class LKind { Pref, Init, Anti, Implies, Follows, Triggers };

inline const char* lkind_name(LKind k) {
  switch (k) {
    case LKind::Pref: return "pref";
    case LKind::Init: return "init";
    case LKind::Anti: return "anti";
    case LKind::Implies: return "implies";
    case LKind::Follows: return "follows";
    case LKind::Triggers: return "triggers";
  }
  return "?";
}

/// Number of nominated parts: pref/anti 1, init/implies 2, follows/triggers 3.
inline int lkind_arity(LKind k) {
  switch (k) {
    case LKind::Pref:
    case LKind::Anti: return 1;
    case LKind::Init:
    case LKind::Implies: return 2;
    default: return 3;
  }
}

struct SeCeNLNode;
using SeCeNL = std::shared_ptr<const SeCeNLNode>;

struct SeCeNLNode {
  enum class Kind { Atom, Not, And, Or } kind = Kind::Atom;
  LKind op = LKind::Pref;
  std::vector<NominatedFormula> parts;  // Atom only
  SeCeNL lhs, rhs;
};

inline SeCeNL l_atom(LKind op, std::vector<NominatedFormula> parts) {
  auto n = std::make_shared<SeCeNLNode>();
  n->kind = SeCeNLNode::Kind::Atom;
  n->op = op;
  n->parts = std::move(parts);
  return n;
}
inline SeCeNL l_not(SeCeNL a) {
  auto n = std::make_shared<SeCeNLNode>();
  n->kind = SeCeNLNode::Kind::Not;
  n->lhs = std::move(a);
  return n;
}
inline SeCeNL l_and(SeCeNL a, SeCeNL b) {
  auto n = std::make_shared<SeCeNLNode>();
  n->kind = SeCeNLNode::Kind::And;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
inline SeCeNL l_or(SeCeNL a, SeCeNL b) {
  auto n = std::make_shared<SeCeNLNode>();
  n->kind = SeCeNLNode::Kind::Or;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
inline SeCeNL l_and_all(const std::vector<SeCeNL>& xs) {
  if (xs.empty()) throw ApiError("empty conjunction of SeCeNL formulas");
  SeCeNL r = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) r = l_and(r, xs[i]);
  return r;
}

inline bool secenl_equal(const SeCeNL& a, const SeCeNL& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == SeCeNLNode::Kind::Atom) {
    if (a->op != b->op || a->parts.size() != b->parts.size()) return false;
    for (std::size_t i = 0; i < a->parts.size(); ++i) {
      if (a->parts[i].theta != b->parts[i].theta) return false;
      if (!formula_equal(a->parts[i].d, b->parts[i].d)) return false;
    }
    return true;
  }
  return secenl_equal(a->lhs, b->lhs) && secenl_equal(a->rhs, b->rhs);
}

/// Size measure used by the translation-size checks: one unit per boolean or
/// atomic node, plus body sizes and nominal annotations.
inline std::size_t secenl_size(const SeCeNL& z) {
  if (!z) return 0;
  if (z->kind == SeCeNLNode::Kind::Atom) {
    std::size_t s = 1;
    for (const auto& p : z->parts) s += formula_size(p.d) + p.theta.size();
    return s;
  }
  return 1 + secenl_size(z->lhs) + secenl_size(z->rhs);
}

/// Validate a nominated part: body must be SeCe, theta must occur in the body
/// and stay clear of the system alphabet.
inline void check_nominated(const NominatedFormula& nf, const std::set<std::string>& sigma) {
  auto info = classify_fragment(nf.d);
  if (info.tag == FragmentTag::FullQDDC) {
    throw FragmentError("SeCeNL body is not SeCe (offending node at " +
                        path_to_string(info.not_sece.front()) + ")");
  }
  auto vars = formula_free_vars(nf.d);
  for (const auto& u : nf.theta) {
    if (sigma.count(u))
      throw FragmentError("nominal '" + u + "' clashes with the system alphabet");
    if (!vars.count(u))
      throw FragmentError("nominal '" + u + "' does not occur in its formula");
  }
}

inline void check_secenl(const SeCeNL& z, const std::set<std::string>& sigma) {
  if (!z) return;
  if (z->kind == SeCeNLNode::Kind::Atom) {
    for (const auto& p : z->parts) check_nominated(p, sigma);
    return;
  }
  check_secenl(z->lhs, sigma);
  check_secenl(z->rhs, sigma);
}

// ---------------------------------------------------------------------------
// Printer.

namespace detail {
inline void print_nominated(const NominatedFormula& nf, std::string& out) {
  out += print_formula(nf.d);
  if (!nf.theta.empty()) {
    out += " : {";
    for (std::size_t i = 0; i < nf.theta.size(); ++i) {
      if (i) out += ", ";
      out += nf.theta[i];
    }
    out += "}";
  }
}

inline void print_secenl_rec(const SeCeNL& z, int parent, std::string& out) {
  switch (z->kind) {
    case SeCeNLNode::Kind::Atom: {
      out += lkind_name(z->op);
      out += "(";
      int arity = lkind_arity(z->op);
      for (int i = 0; i < arity; ++i) {
        if (i == 1) out += z->op == LKind::Init ? " / " : " ~> ";
        if (i == 2) out += " / ";
        print_nominated(z->parts[static_cast<std::size_t>(i)], out);
      }
      out += ")";
      break;
    }
    case SeCeNLNode::Kind::Not:
      out += "!";
      // Parenthesize everything but atoms for clarity.
      if (z->lhs->kind == SeCeNLNode::Kind::Atom) {
        print_secenl_rec(z->lhs, 3, out);
      } else {
        out += "(";
        print_secenl_rec(z->lhs, 0, out);
        out += ")";
      }
      break;
    case SeCeNLNode::Kind::And: {
      bool paren = parent > 2;
      if (paren) out += "(";
      print_secenl_rec(z->lhs, 2, out);
      out += " && ";
      print_secenl_rec(z->rhs, 3, out);
      if (paren) out += ")";
      break;
    }
    case SeCeNLNode::Kind::Or: {
      bool paren = parent > 1;
      if (paren) out += "(";
      print_secenl_rec(z->lhs, 1, out);
      out += " || ";
      print_secenl_rec(z->rhs, 2, out);
      if (paren) out += ")";
      break;
    }
  }
}
}  // namespace detail

inline std::string print_secenl(const SeCeNL& z) {
  std::string out;
  detail::print_secenl_rec(z, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser.
//   secenl := or-combination of atoms with !, &&, ||, parentheses
//   atom   := op '(' nominated (sep nominated)* ')'
//   nominated := qddc-formula [':' '{' [id {',' id}] '}']

namespace detail {

class SeCeNLParser {
 public:
  SeCeNLParser(Lexer& lx, const std::set<std::string>& sigma,
               const std::set<std::string>& theta,
               const std::map<std::string, long long>* consts)
      : lx_(lx), sigma_(sigma), theta_(theta), consts_(consts) {
    allowed_ = sigma;
    allowed_.insert(theta.begin(), theta.end());
  }

  SeCeNL parse() { return disj(); }

  SeCeNL disj() {
    SeCeNL a = conj();
    while (lx_.accept(Tok::Or)) a = l_or(a, conj());
    return a;
  }
  SeCeNL conj() {
    SeCeNL a = unary();
    while (lx_.accept(Tok::And)) a = l_and(a, unary());
    return a;
  }
  SeCeNL unary() {
    if (lx_.accept(Tok::Not)) return l_not(unary());
    if (lx_.kind() == Tok::LParen) {
      lx_.next();
      SeCeNL a = disj();
      lx_.expect(Tok::RParen, "')'");
      return a;
    }
    return atom();
  }

  SeCeNL atom() {
    Token t = lx_.expect(Tok::Ident, "liveness operator");
    LKind op;
    if (t.text == "pref") op = LKind::Pref;
    else if (t.text == "init") op = LKind::Init;
    else if (t.text == "anti") op = LKind::Anti;
    else if (t.text == "implies") op = LKind::Implies;
    else if (t.text == "follows") op = LKind::Follows;
    else if (t.text == "triggers") op = LKind::Triggers;
    else throw ParseError("unknown liveness operator '" + t.text + "'", t.line, t.col);
    lx_.expect(Tok::LParen, "'('");
    std::vector<NominatedFormula> parts;
    parts.push_back(nominated());
    int arity = lkind_arity(op);
    if (arity >= 2) {
      if (op == LKind::Init) lx_.expect(Tok::Slash, "'/'");
      else lx_.expect(Tok::Leadsto, "'~>'");
      parts.push_back(nominated());
    }
    if (arity == 3) {
      lx_.expect(Tok::Slash, "'/'");
      parts.push_back(nominated());
    }
    lx_.expect(Tok::RParen, "')'");
    for (auto& p : parts) check_nominated(p, sigma_);
    return l_atom(op, std::move(parts));
  }

  NominatedFormula nominated() {
    QddcParser qp(lx_, &allowed_, consts_);
    NominatedFormula nf;
    nf.d = qp.parse();
    if (lx_.accept(Tok::Colon)) {
      lx_.expect(Tok::LBrace, "'{'");
      if (lx_.kind() != Tok::RBrace) {
        do {
          Token u = lx_.expect(Tok::Ident, "nominal name");
          if (!theta_.count(u.text))
            throw ParseError("undeclared nominal '" + u.text + "'", u.line, u.col);
          nf.theta.push_back(u.text);
        } while (lx_.accept(Tok::Comma));
      }
      lx_.expect(Tok::RBrace, "'}'");
      std::sort(nf.theta.begin(), nf.theta.end());
      nf.theta.erase(std::unique(nf.theta.begin(), nf.theta.end()), nf.theta.end());
    }
    return nf;
  }

 private:
  Lexer& lx_;
  std::set<std::string> sigma_;
  std::set<std::string> theta_;
  std::set<std::string> allowed_;
  const std::map<std::string, long long>* consts_;
};

}  // namespace detail

inline SeCeNL parse_secenl(const std::string& text, const std::set<std::string>& sigma,
                           const std::set<std::string>& theta,
                           const std::map<std::string, long long>* consts = nullptr) {
  for (const auto& u : theta)
    if (sigma.count(u)) throw ApiError("nominal '" + u + "' clashes with the alphabet");
  // Same modal-sugar pre-pass as parse_qddc.
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
  detail::SeCeNLParser p(lx, sigma, theta, consts);
  SeCeNL z = p.parse();
  if (lx.kind() != Tok::End) lx.fail("trailing input after formula");
  return z;
}

}  // namespace tdspec
