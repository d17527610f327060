#pragma once

#include <functional>
#include <map>
#include <unordered_map>

#include "tdspec/secenl.hpp"
#include "tdspec/semantics.hpp"
#include "tdspec/translate.hpp"

namespace tdspec {

// Direct implementation of the SeCeNL language definitions: nominal
// valuations are enumerated over the relevant interval, with consistency
// between valuations of shared nominals enforced by pinning. Independent of
// the aleph translation so the two can be cross-validated.

namespace detail {

class BodyEval {
 public:
  BodyEval(const Word& w, Formula d, std::vector<std::string> theta)
      : theta_(std::move(theta)) {
    ext_ = w;
    for (const auto& u : theta_) {
      theta_bit_.push_back(static_cast<int>(ext_.vars.size()));
      ext_.vars.push_back(u);
    }
    d_ = std::move(d);
  }

  /// nu[i] is the position of theta[i].
  bool sat(const std::vector<int>& nu, int b, int e) {
    const auto& rows = rows_for(nu);
    return (rows[static_cast<std::size_t>(b)] >> e) & 1ULL;
  }

 private:
  const std::vector<std::uint64_t>& rows_for(const std::vector<int>& nu) {
    std::uint64_t key = 0;
    for (int p : nu) key = key * 67 + static_cast<std::uint64_t>(p) + 1;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    for (auto& letter : ext_.letters) {
      for (int bit : theta_bit_) letter &= ~(1u << bit);
    }
    for (std::size_t i = 0; i < nu.size(); ++i)
      ext_.letters[static_cast<std::size_t>(nu[i])] |= 1u << theta_bit_[i];
    auto rows = sat_all_intervals(ext_, d_);
    return cache_.emplace(key, std::move(rows)).first->second;
  }

  Formula d_;
  std::vector<std::string> theta_;
  std::vector<int> theta_bit_;
  Word ext_;
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> cache_;
};

using Pinned = std::map<std::string, int>;

/// Enumerate valuations of theta into [lo,hi]; pinned entries are fixed and
/// must land inside the window. Returns true iff pred accepted some valuation.
inline bool exists_nu(const std::vector<std::string>& theta, const Pinned& pinned,
                      int lo, int hi,
                      const std::function<bool(const std::vector<int>&)>& pred) {
  std::vector<int> nu(theta.size());
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == theta.size()) return pred(nu);
    auto it = pinned.find(theta[i]);
    if (it != pinned.end()) {
      if (it->second < lo || it->second > hi) return false;
      nu[i] = it->second;
      return go(i + 1);
    }
    for (int p = lo; p <= hi; ++p) {
      nu[i] = p;
      if (go(i + 1)) return true;
    }
    return false;
  };
  return go(0);
}

inline bool forall_nu(const std::vector<std::string>& theta, const Pinned& pinned,
                      int lo, int hi,
                      const std::function<bool(const std::vector<int>&)>& pred) {
  return !exists_nu(theta, pinned, lo, hi,
                    [&](const std::vector<int>& nu) { return !pred(nu); });
}

inline Pinned pin(const std::vector<std::string>& from_theta, const std::vector<int>& nu,
                  const std::vector<std::string>& onto) {
  Pinned out;
  for (std::size_t i = 0; i < from_theta.size(); ++i) {
    if (std::find(onto.begin(), onto.end(), from_theta[i]) != onto.end())
      out[from_theta[i]] = nu[i];
  }
  return out;
}

inline bool sat_atom(const Word& w, const SeCeNLNode& atom) {
  const auto& P = atom.parts;
  int n = w.last();
  switch (atom.op) {
    case LKind::Pref: {
      BodyEval body(w, P[0].d, P[0].theta);
      for (int j = 0; j <= n; ++j) {
        if (!exists_nu(P[0].theta, {}, 0, j,
                       [&](const std::vector<int>& nu) { return body.sat(nu, 0, j); }))
          return false;
      }
      return true;
    }
    case LKind::Init: {
      BodyEval b1(w, P[0].d, P[0].theta);
      BodyEval b2(w, P[1].d, P[1].theta);
      for (int j = 0; j <= n; ++j) {
        bool ok = forall_nu(P[1].theta, {}, 0, j, [&](const std::vector<int>& nu1) {
          if (!b2.sat(nu1, 0, j)) return true;
          for (int k = 0; k <= j; ++k) {
            Pinned pins = pin(P[1].theta, nu1, P[0].theta);
            if (exists_nu(P[0].theta, pins, 0, k,
                          [&](const std::vector<int>& nu2) { return b1.sat(nu2, 0, k); }))
              return true;
          }
          return false;
        });
        if (!ok) return false;
      }
      return true;
    }
    case LKind::Anti: {
      BodyEval body(w, P[0].d, P[0].theta);
      for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
          if (exists_nu(P[0].theta, {}, i, j,
                        [&](const std::vector<int>& nu) { return body.sat(nu, i, j); }))
            return false;
        }
      return true;
    }
    case LKind::Implies: {
      BodyEval b1(w, P[0].d, P[0].theta);
      BodyEval b2(w, P[1].d, P[1].theta);
      for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
          bool ok = forall_nu(P[0].theta, {}, i, j, [&](const std::vector<int>& nu1) {
            if (!b1.sat(nu1, i, j)) return true;
            Pinned pins = pin(P[0].theta, nu1, P[1].theta);
            return exists_nu(P[1].theta, pins, i, j,
                             [&](const std::vector<int>& nu2) { return b2.sat(nu2, i, j); });
          });
          if (!ok) return false;
        }
      return true;
    }
    case LKind::Follows:
    case LKind::Triggers: {
      bool follows = atom.op == LKind::Follows;
      BodyEval b1(w, P[0].d, P[0].theta);
      BodyEval b2(w, P[1].d, P[1].theta);
      BodyEval b3(w, focc(P[2].d), P[2].theta);
      for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
          bool ok = forall_nu(P[0].theta, {}, i, j, [&](const std::vector<int>& nu1) {
            if (!b1.sat(nu1, i, j)) return true;
            int anchor = follows ? j : i;  // D3/D2 measured from here
            for (int k = anchor; k <= n; ++k) {
              Pinned pins3 = pin(P[0].theta, nu1, P[2].theta);
              bool all2 = forall_nu(P[2].theta, pins3, anchor, k,
                                    [&](const std::vector<int>& nu2) {
                if (!b3.sat(nu2, anchor, k)) return true;
                for (int l = anchor; l <= k; ++l) {
                  Pinned pins2 = pin(P[0].theta, nu1, P[1].theta);
                  for (auto& [var, pos] : pin(P[2].theta, nu2, P[1].theta))
                    pins2[var] = pos;
                  if (exists_nu(P[1].theta, pins2, anchor, l,
                                [&](const std::vector<int>& nu3) {
                                  return b2.sat(nu3, anchor, l);
                                }))
                    return true;
                }
                return false;
              });
              if (!all2) return false;
            }
            return true;
          });
          if (!ok) return false;
        }
      return true;
    }
  }
  throw ApiError("unhandled SeCeNL atom");
}

}  // namespace detail

/// sigma |= zeta, per the SeCeNL language definitions.
inline bool sat_secenl(const Word& w, const SeCeNL& z) {
  check_word(w);
  switch (z->kind) {
    case SeCeNLNode::Kind::Atom: return detail::sat_atom(w, *z);
    case SeCeNLNode::Kind::Not: return !sat_secenl(w, z->lhs);
    case SeCeNLNode::Kind::And: return sat_secenl(w, z->lhs) && sat_secenl(w, z->rhs);
    case SeCeNLNode::Kind::Or: return sat_secenl(w, z->lhs) || sat_secenl(w, z->rhs);
  }
  throw ApiError("unhandled SeCeNL node");
}

}  // namespace tdspec
