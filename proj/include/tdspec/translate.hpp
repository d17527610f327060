#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tdspec/secenl.hpp"

namespace tdspec {

/// focc(D) = D && !(D ^ ext): D holds and no proper prefix interval does.
/// The output contains negation, so it is full QDDC; it is only ever used
/// downstream of the SeCe fragment checks.
inline Formula focc(const Formula& d) {
  return f_and(d, f_not(f_chop(d, f_ext())));
}

enum class RelKind { Exists1, Forall1 };

/// Relativized quantifiers restricting variables to singleton occurrence:
///   exists1: ex u1. ... ex un. ((scount u1 = 1 && ...) && body)
///   forall1: all u1. ... all un. ((scount u1 = 1 && ...) => body)
inline Formula relativize(RelKind kind, const std::vector<std::string>& theta,
                          const Formula& body) {
  if (theta.empty()) return body;
  std::vector<Formula> singles;
  singles.reserve(theta.size());
  for (const auto& u : theta) singles.push_back(f_scount(p_var(u), CmpOp::Eq, 1));
  Formula guard = f_and_all(singles);
  Formula inner = kind == RelKind::Exists1 ? f_and(guard, body) : f_implies(guard, body);
  for (auto it = theta.rbegin(); it != theta.rend(); ++it)
    inner = kind == RelKind::Exists1 ? f_exists(*it, inner) : f_forall(*it, inner);
  return inner;
}

namespace detail {

inline Formula pref_q(const Formula& x) {  // nominal-free pref as a QDDC formula
  return f_not(f_chop(f_not(x), f_true()));
}

inline std::vector<std::string> theta_minus(const std::vector<std::string>& a,
                                            const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<std::string> theta_union(const std::vector<std::string>& a,
                                            const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Formula ex1(const std::vector<std::string>& theta, const Formula& body) {
  return relativize(RelKind::Exists1, theta, body);
}
inline Formula all1(const std::vector<std::string>& theta, const Formula& body) {
  return relativize(RelKind::Forall1, theta, body);
}

inline Formula aleph_atom(const SeCeNLNode& atom) {
  const auto& P = atom.parts;
  bool nominal_free = true;
  for (const auto& p : P) nominal_free = nominal_free && p.theta.empty();

  if (nominal_free) {
    switch (atom.op) {
      case LKind::Pref:
        return f_not(f_chop(f_not(P[0].d), f_true()));
      case LKind::Init:
        return pref_q(f_implies(focc(P[1].d), f_chop(P[0].d, f_true())));
      case LKind::Anti:
        return f_not(f_diamond(P[0].d));
      case LKind::Implies:
        return f_box(f_implies(P[0].d, P[1].d));
      case LKind::Follows:
        return f_box(f_not(f_chop(
            P[0].d, f_and(focc(P[2].d), f_not(f_chop(P[1].d, f_true()))))));
      case LKind::Triggers: {
        Formula oblig = f_implies(focc(P[2].d), f_chop(P[1].d, f_true()));
        Formula a = f_box(f_implies(f_chop(P[0].d, f_true()), oblig));
        Formula b = f_box(f_implies(P[0].d, pref_q(oblig)));
        return f_and(a, b);
      }
    }
  }

  switch (atom.op) {
    case LKind::Pref:
      // The prefix check relativizes per prefix: some singleton placement of
      // the nominals inside each prefix must satisfy D.
      return f_not(f_chop(f_not(ex1(P[0].theta, P[0].d)), f_true()));
    case LKind::Init: {
      const auto& t1 = P[0].theta;
      const auto& t2 = P[1].theta;
      Formula body = f_implies(
          P[1].d, ex1(theta_minus(t1, t2), f_chop(P[0].d, f_true())));
      return pref_q(all1(t2, body));
    }
    case LKind::Anti:
      return f_not(ex1(P[0].theta, f_diamond(P[0].d)));
    case LKind::Implies: {
      const auto& t1 = P[0].theta;
      const auto& t2 = P[1].theta;
      return f_box(all1(t1, f_implies(P[0].d, ex1(theta_minus(t2, t1), P[1].d))));
    }
    case LKind::Follows: {
      const auto& t1 = P[0].theta;
      const auto& t2 = P[1].theta;
      const auto& t3 = P[2].theta;
      Formula d2part = ex1(theta_minus(t2, theta_union(t1, t3)),
                           f_chop(P[1].d, f_true()));
      Formula bad = f_chop(P[0].d, f_and(focc(P[2].d), f_not(d2part)));
      return f_box(all1(t1, all1(theta_minus(t3, t1), f_not(bad))));
    }
    case LKind::Triggers: {
      const auto& t1 = P[0].theta;
      const auto& t2 = P[1].theta;
      const auto& t3 = P[2].theta;
      Formula oblig = all1(theta_minus(t3, t1),
                           f_implies(focc(P[2].d),
                                     ex1(theta_minus(t2, theta_union(t1, t3)),
                                         f_chop(P[1].d, f_true()))));
      Formula a = f_box(all1(t1, f_implies(f_chop(P[0].d, f_true()), oblig)));
      Formula b = f_box(all1(t1, f_implies(P[0].d, pref_q(oblig))));
      return f_and(a, b);
    }
  }
  throw ApiError("unhandled SeCeNL atom");
}

}  // namespace detail

/// Translation from SeCeNL to QDDC. Total on all six atomic forms and all
/// boolean combinations; the nominal-free and nominal code paths are kept
/// separate and selected by emptiness of the nominal sets.
inline Formula aleph(const SeCeNL& z) {
  switch (z->kind) {
    case SeCeNLNode::Kind::Atom: return detail::aleph_atom(*z);
    case SeCeNLNode::Kind::Not: return f_not(aleph(z->lhs));
    case SeCeNLNode::Kind::And: return f_and(aleph(z->lhs), aleph(z->rhs));
    case SeCeNLNode::Kind::Or: return f_or(aleph(z->lhs), aleph(z->rhs));
  }
  throw ApiError("unhandled SeCeNL node");
}

}  // namespace tdspec
