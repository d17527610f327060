#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tdspec/formula.hpp"
#include "tdspec/semantics.hpp"
#include "tdspec/word.hpp"

namespace tdspec::testutil {

/// Word from single-character variable names: wchars("pq", {"p", "", "pq"})
/// builds a 3-letter word where e.g. the last letter has both p and q.
inline Word wchars(const std::string& vars, const std::vector<std::string>& rows) {
  Word w;
  for (char c : vars) w.vars.push_back(std::string(1, c));
  for (const auto& row : rows) {
    std::uint32_t letter = 0;
    for (char c : row) {
      auto pos = vars.find(c);
      if (pos == std::string::npos) throw ApiError("unknown char var");
      letter |= 1u << pos;
    }
    w.letters.push_back(letter);
  }
  return w;
}

/// All words over `vars` of exactly length len, in lexicographic letter order.
inline void for_each_word(const std::vector<std::string>& vars, int len,
                          const std::function<void(const Word&)>& fn) {
  std::uint32_t letters = 1u << vars.size();
  Word w;
  w.vars = vars;
  w.letters.assign(static_cast<std::size_t>(len), 0);
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(len), 0);
  for (;;) {
    fn(w);
    int i = len - 1;
    while (i >= 0) {
      if (++w.letters[static_cast<std::size_t>(i)] < letters) break;
      w.letters[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

inline void for_each_word_upto(const std::vector<std::string>& vars, int maxlen,
                               const std::function<void(const Word&)>& fn) {
  for (int len = 1; len <= maxlen; ++len) for_each_word(vars, len, fn);
}

/// Naive reference satisfier: direct recursion over the satisfaction relation
/// with no sharing at all. Exponential; for cross-checking on tiny words only.
inline bool naive_sat(const Word& w, int b, int e, const Formula& f);

inline bool naive_holds_at(const Word& w, const Prop& p, int i) {
  VarIndex vi(w.vars);
  return eval_prop(p, vi, w.letters[static_cast<std::size_t>(i)]);
}

inline bool naive_sat(const Word& w, int b, int e, const Formula& f) {
  switch (f->kind) {
    case FKind::PtAtom: return naive_holds_at(w, f->prop, b);
    case FKind::AllButLast:
      for (int i = b; i < e; ++i)
        if (!naive_holds_at(w, f->prop, i)) return false;
      return true;
    case FKind::All:
      for (int i = b; i <= e; ++i)
        if (!naive_holds_at(w, f->prop, i)) return false;
      return true;
    case FKind::Unit: return e == b + 1 && naive_holds_at(w, f->prop, b);
    case FKind::Chop:
      for (int i = b; i <= e; ++i)
        if (naive_sat(w, b, i, f->lhs) && naive_sat(w, i, e, f->rhs)) return true;
      return false;
    case FKind::Not: return !naive_sat(w, b, e, f->lhs);
    case FKind::Or: return naive_sat(w, b, e, f->lhs) || naive_sat(w, b, e, f->rhs);
    case FKind::And: return naive_sat(w, b, e, f->lhs) && naive_sat(w, b, e, f->rhs);
    case FKind::Star: {
      if (b == e) return true;
      // Chains with strictly increasing cut points.
      std::vector<bool> reach(static_cast<std::size_t>(e) + 1, false);
      std::function<bool(int)> go = [&](int i) -> bool {
        if (i == e) return true;
        if (reach[static_cast<std::size_t>(i)]) return false;
        reach[static_cast<std::size_t>(i)] = true;
        for (int j = i + 1; j <= e; ++j)
          if (naive_sat(w, i, j, f->lhs) && go(j)) return true;
        return false;
      };
      return go(b);
    }
    case FKind::Exists:
    case FKind::Forall: {
      int idx = var_index(w, f->var);
      Word v = w;
      if (idx < 0) {
        idx = static_cast<int>(v.vars.size());
        v.vars.push_back(f->var);
      }
      std::uint64_t total = 1ULL << v.letters.size();
      for (std::uint64_t a = 0; a < total; ++a) {
        for (std::size_t i = 0; i < v.letters.size(); ++i) {
          if ((a >> i) & 1ULL) v.letters[i] = w.letters[i] | (1u << idx);
          else v.letters[i] = w.letters[i] & ~(1u << idx);
        }
        bool s = naive_sat(v, b, e, f->lhs);
        if (f->kind == FKind::Exists && s) return true;
        if (f->kind == FKind::Forall && !s) return false;
      }
      return f->kind == FKind::Forall;
    }
    case FKind::SlenCmp:
    case FKind::ScountCmp:
    case FKind::SdurCmp: {
      long long x;
      if (f->kind == FKind::SlenCmp) {
        x = e - b;
      } else {
        x = 0;
        int hi = f->kind == FKind::ScountCmp ? e : e - 1;
        for (int i = b; i <= hi; ++i)
          if (naive_holds_at(w, f->prop, i)) ++x;
      }
      switch (f->op) {
        case CmpOp::Lt: return x < f->bound;
        case CmpOp::Le: return x <= f->bound;
        case CmpOp::Eq: return x == f->bound;
        case CmpOp::Ge: return x >= f->bound;
        case CmpOp::Gt: return x > f->bound;
      }
      return false;
    }
  }
  return false;
}

}  // namespace tdspec::testutil
