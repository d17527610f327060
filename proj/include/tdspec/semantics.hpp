#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "tdspec/formula.hpp"
#include "tdspec/word.hpp"

namespace tdspec {

// Reference interpreter for QDDC over finite words. This module is the oracle:
// it follows the satisfaction relation directly and is kept independent of the
// automaton pipeline. Satisfaction is computed for all intervals at once as
// bit rows: rows[b] has bit e set iff the formula holds on [b,e].
//
// Quantifiers are evaluated by enumerating p-variants of the whole word, so
// evaluation is exponential in quantifier nesting; fine at desk scale.

enum class TermKind { Slen, Scount, Sdur };

inline long long eval_term(const Word& w, const Interval& iv, TermKind t,
                           const Prop& phi = nullptr) {
  check_word(w);
  check_interval(w, iv);
  if (t == TermKind::Slen) return iv.e - iv.b;
  VarIndex vi(w.vars);
  long long count = 0;
  int hi = t == TermKind::Scount ? iv.e : iv.e - 1;
  for (int i = iv.b; i <= hi; ++i)
    if (eval_prop(phi, vi, w.letters[static_cast<std::size_t>(i)])) ++count;
  return count;
}

namespace detail {

struct SatRows {
  std::vector<std::uint64_t> rows;  // rows[b], bit e
};

class Evaluator {
 public:
  Evaluator(const Word& w, const Formula& formula) : w_(w) {
    check_word(w);
    if (w.length() > 62) throw ApiError("oracle evaluation limited to 62 positions");
    n_ = w.last();
    Formula renamed = rename_apart(formula);
    register_qvars(renamed);
    root_ = flatten(renamed);
    suffix_.resize(static_cast<std::size_t>(n_) + 1);
    for (int b = 0; b <= n_; ++b)
      suffix_[static_cast<std::size_t>(b)] =
          (~0ULL >> (63 - n_)) & ~((b == 0) ? 0ULL : ((1ULL << b) - 1));
    vi_ = VarIndex(w.vars);
    qbits_.assign(qvars_.size(), 0);
  }

  SatRows eval_root() { return eval(root_); }

 private:
  struct Node {
    FKind kind;
    Prop prop;
    CmpOp op = CmpOp::Eq;
    long long bound = 0;
    int lhs = -1, rhs = -1;
    int qvar = -1;               // Exists/Forall: id of the bound variable
    std::vector<int> qsupport;   // quantified vars this subtree depends on
    std::unordered_map<std::uint64_t, SatRows> cache;
  };

  void register_qvars(const Formula& f) {
    if (!f) return;
    if (f->kind == FKind::Exists || f->kind == FKind::Forall) {
      if (!qvar_ids_.count(f->var)) {
        qvar_ids_[f->var] = static_cast<int>(qvars_.size());
        qvars_.push_back(f->var);
      }
    }
    register_qvars(f->lhs);
    register_qvars(f->rhs);
  }

  int flatten(const Formula& f) {
    int lhs = f->lhs ? flatten(f->lhs) : -1;
    int rhs = f->rhs ? flatten(f->rhs) : -1;
    Node nd;
    nd.kind = f->kind;
    nd.prop = f->prop;
    nd.op = f->op;
    nd.bound = f->bound;
    nd.lhs = lhs;
    nd.rhs = rhs;
    if (f->kind == FKind::Exists || f->kind == FKind::Forall)
      nd.qvar = qvar_ids_.at(f->var);
    // Quantified support: free quantified variables of the subtree.
    std::vector<bool> sup(qvars_.size() + 8, false);
    if (nd.prop)
      for (const auto& v : prop_vars(nd.prop)) {
        auto it = qvar_ids_.find(v);
        if (it != qvar_ids_.end()) sup[static_cast<std::size_t>(it->second)] = true;
      }
    auto merge_child = [&](int c) {
      if (c < 0) return;
      for (int q : nodes_[static_cast<std::size_t>(c)].qsupport)
        sup[static_cast<std::size_t>(q)] = true;
    };
    merge_child(lhs);
    merge_child(rhs);
    if (nd.qvar >= 0) sup[static_cast<std::size_t>(nd.qvar)] = false;  // bound here
    for (std::size_t q = 0; q < sup.size(); ++q)
      if (sup[q]) nd.qsupport.push_back(static_cast<int>(q));
    nodes_.push_back(std::move(nd));
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::uint64_t projection_key(const Node& nd) const {
    // Mix the assignments of the supporting quantified variables.
    std::uint64_t h = 1469598103934665603ULL;
    for (int q : nd.qsupport) {
      h ^= qbits_[static_cast<std::size_t>(q)] + 0x9e3779b97f4a7c15ULL;
      h *= 1099511628211ULL;
    }
    return h;
  }

  std::uint64_t posmask(const Prop& p) {
    std::uint64_t m = 0;
    for (int i = 0; i <= n_; ++i)
      if (eval_at(p, i)) m |= 1ULL << i;
    return m;
  }

  bool eval_at(const Prop& p, int i) {
    switch (p->kind) {
      case PKind::False: return false;
      case PKind::True: return true;
      case PKind::Var: {
        auto it = qvar_ids_.find(p->var);
        if (it != qvar_ids_.end())
          return (qbits_[static_cast<std::size_t>(it->second)] >> i) & 1ULL;
        return (w_.letters[static_cast<std::size_t>(i)] >> vi_.at(p->var)) & 1u;
      }
      case PKind::Not: return !eval_at(p->lhs, i);
      case PKind::And: return eval_at(p->lhs, i) && eval_at(p->rhs, i);
      case PKind::Or: return eval_at(p->lhs, i) || eval_at(p->rhs, i);
      case PKind::Implies: return !eval_at(p->lhs, i) || eval_at(p->rhs, i);
      case PKind::Iff: return eval_at(p->lhs, i) == eval_at(p->rhs, i);
    }
    return false;
  }

  SatRows eval(int id) {
    Node& nd = nodes_[static_cast<std::size_t>(id)];
    std::uint64_t key = projection_key(nd);
    auto hit = nd.cache.find(key);
    if (hit != nd.cache.end()) return hit->second;
    SatRows r;
    r.rows.assign(static_cast<std::size_t>(n_) + 1, 0);
    switch (nd.kind) {
      case FKind::PtAtom: {
        std::uint64_t pm = posmask(nd.prop);
        for (int b = 0; b <= n_; ++b)
          if ((pm >> b) & 1ULL) r.rows[static_cast<std::size_t>(b)] = suffix_[static_cast<std::size_t>(b)];
        break;
      }
      case FKind::AllButLast:
      case FKind::All: {
        std::uint64_t pm = posmask(nd.prop);
        std::vector<int> run(static_cast<std::size_t>(n_) + 2, 0);
        for (int i = n_; i >= 0; --i)
          run[static_cast<std::size_t>(i)] =
              ((pm >> i) & 1ULL) ? run[static_cast<std::size_t>(i) + 1] + 1 : 0;
        for (int b = 0; b <= n_; ++b) {
          int rn = run[static_cast<std::size_t>(b)];
          if (nd.kind == FKind::AllButLast) {
            int hi = std::min(n_, b + rn);
            r.rows[static_cast<std::size_t>(b)] = range_mask(b, hi);
          } else {
            if (rn > 0) r.rows[static_cast<std::size_t>(b)] = range_mask(b, b + rn - 1);
          }
        }
        break;
      }
      case FKind::Unit: {
        std::uint64_t pm = posmask(nd.prop);
        for (int b = 0; b < n_; ++b)
          if ((pm >> b) & 1ULL) r.rows[static_cast<std::size_t>(b)] = 1ULL << (b + 1);
        break;
      }
      case FKind::SlenCmp: {
        for (int b = 0; b <= n_; ++b)
          r.rows[static_cast<std::size_t>(b)] = slen_mask(b, nd.op, nd.bound);
        break;
      }
      case FKind::ScountCmp:
      case FKind::SdurCmp: {
        std::uint64_t pm = posmask(nd.prop);
        for (int b = 0; b <= n_; ++b) {
          long long cnt = 0;
          std::uint64_t row = 0;
          for (int e = b; e <= n_; ++e) {
            if (nd.kind == FKind::ScountCmp) {
              if ((pm >> e) & 1ULL) ++cnt;  // counts position e itself
            } else if (e > b) {
              if ((pm >> (e - 1)) & 1ULL) ++cnt;  // excludes the last point
            }
            if (cmp(cnt, nd.op, nd.bound)) row |= 1ULL << e;
          }
          r.rows[static_cast<std::size_t>(b)] = row;
        }
        break;
      }
      case FKind::Chop: {
        SatRows a = eval(nd.lhs), b = eval(nd.rhs);
        for (int i = 0; i <= n_; ++i) {
          std::uint64_t left = a.rows[static_cast<std::size_t>(i)];
          std::uint64_t acc = 0;
          while (left) {
            int m = std::countr_zero(left);
            left &= left - 1;
            acc |= b.rows[static_cast<std::size_t>(m)];
          }
          r.rows[static_cast<std::size_t>(i)] = acc;
        }
        break;
      }
      case FKind::Not: {
        SatRows a = eval(nd.lhs);
        for (int b = 0; b <= n_; ++b)
          r.rows[static_cast<std::size_t>(b)] =
              ~a.rows[static_cast<std::size_t>(b)] & suffix_[static_cast<std::size_t>(b)];
        break;
      }
      case FKind::And:
      case FKind::Or: {
        SatRows a = eval(nd.lhs), b = eval(nd.rhs);
        for (int i = 0; i <= n_; ++i)
          r.rows[static_cast<std::size_t>(i)] =
              nd.kind == FKind::And
                  ? (a.rows[static_cast<std::size_t>(i)] & b.rows[static_cast<std::size_t>(i)])
                  : (a.rows[static_cast<std::size_t>(i)] | b.rows[static_cast<std::size_t>(i)]);
        break;
      }
      case FKind::Star: {
        SatRows a = eval(nd.lhs);
        for (int b = n_; b >= 0; --b) {
          std::uint64_t acc = 1ULL << b;  // zero iterations on the point interval
          // Chains may be taken strictly increasing; degenerate steps add nothing.
          std::uint64_t left =
              a.rows[static_cast<std::size_t>(b)] & ~((1ULL << (b + 1)) - 1);
          while (left) {
            int m = std::countr_zero(left);
            left &= left - 1;
            acc |= r.rows[static_cast<std::size_t>(m)];
          }
          r.rows[static_cast<std::size_t>(b)] = acc;
        }
        break;
      }
      case FKind::Exists:
      case FKind::Forall: {
        bool exists = nd.kind == FKind::Exists;
        std::size_t q = static_cast<std::size_t>(nd.qvar);
        std::uint64_t total = 1ULL << (n_ + 1);
        bool first = true;
        std::uint64_t saved = qbits_[q];
        for (std::uint64_t a = 0; a < total; ++a) {
          qbits_[q] = a;
          SatRows sub = eval(nd.lhs);
          if (first) {
            r.rows = sub.rows;
            first = false;
          } else {
            bool saturated = true;
            for (int b = 0; b <= n_; ++b) {
              auto& row = r.rows[static_cast<std::size_t>(b)];
              if (exists) row |= sub.rows[static_cast<std::size_t>(b)];
              else row &= sub.rows[static_cast<std::size_t>(b)];
              if (exists ? row != suffix_[static_cast<std::size_t>(b)] : row != 0)
                saturated = false;
            }
            if (saturated) break;
          }
        }
        qbits_[q] = saved;
        break;
      }
    }
    nd.cache.emplace(key, r);
    return r;
  }

  static bool cmp(long long x, CmpOp op, long long c) {
    switch (op) {
      case CmpOp::Lt: return x < c;
      case CmpOp::Le: return x <= c;
      case CmpOp::Eq: return x == c;
      case CmpOp::Ge: return x >= c;
      case CmpOp::Gt: return x > c;
    }
    return false;
  }

  std::uint64_t range_mask(int lo, int hi) const {
    if (hi < lo) return 0;
    std::uint64_t m = (hi >= 63) ? ~0ULL : ((1ULL << (hi + 1)) - 1);
    return m & ~((lo == 0) ? 0ULL : ((1ULL << lo) - 1));
  }

  std::uint64_t slen_mask(int b, CmpOp op, long long c) const {
    // Bits e in [b..n] with (e-b) op c.
    switch (op) {
      case CmpOp::Lt: return range_mask(b, std::min<long long>(n_, b + c - 1));
      case CmpOp::Le: return range_mask(b, std::min<long long>(n_, b + c));
      case CmpOp::Eq: return (b + c <= n_) ? (1ULL << (b + c)) : 0;
      case CmpOp::Ge: return (b + c <= n_) ? range_mask(static_cast<int>(b + c), n_) : 0;
      case CmpOp::Gt: return (b + c + 1 <= n_) ? range_mask(static_cast<int>(b + c + 1), n_) : 0;
    }
    return 0;
  }

  const Word& w_;
  int n_ = 0;
  int root_ = -1;
  VarIndex vi_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> qvar_ids_;
  std::vector<std::string> qvars_;
  std::vector<std::uint64_t> qbits_;
  std::vector<std::uint64_t> suffix_;
};

}  // namespace detail

/// Satisfaction rows for all intervals: result[b] bit e <=> sigma,[b,e] |= D.
inline std::vector<std::uint64_t> sat_all_intervals(const Word& w, const Formula& d) {
  detail::Evaluator ev(w, d);
  return ev.eval_root().rows;
}

inline bool sat_interval(const Word& w, const Interval& iv, const Formula& d) {
  check_interval(w, iv);
  auto rows = sat_all_intervals(w, d);
  return (rows[static_cast<std::size_t>(iv.b)] >> iv.e) & 1ULL;
}

/// sigma |= D  iff  sigma,[0,|sigma|-1] |= D.
inline bool sat_word(const Word& w, const Formula& d) {
  return sat_interval(w, Interval{0, w.last()}, d);
}

}  // namespace tdspec
