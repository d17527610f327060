#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdspec/formula.hpp"
#include "tdspec/prop.hpp"
#include "tdspec/word.hpp"

#include "json.hpp"

namespace tdspec {

// Finite automata over the letter space 2^Sigma. Edges carry propositional
// guards instead of one edge per letter; operations refine guards into
// behavioural classes (minterms over the guards' support) on demand.
//
// The word universe is non-empty words throughout. Public results never
// accept the empty word; the accepts_empty flag exists for construction-time
// bookkeeping only.

struct AutomatonEdge {
  int from;
  Prop guard;
  int to;
};

struct Nfa {
  std::vector<std::string> alphabet;
  int num_states = 0;
  std::vector<int> initial;
  std::vector<bool> accepting;
  std::vector<AutomatonEdge> edges;
  bool accepts_empty = false;
};

struct Dfa {
  std::vector<std::string> alphabet;
  int num_states = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<AutomatonEdge> edges;  // disjoint and exhaustive per state
  bool minimal = false;
};

namespace detail {

/// Compare letters lexicographically with the first declared variable most
/// significant and false < true.
inline bool letter_lex_less(std::uint32_t a, std::uint32_t b, std::size_t nvars) {
  for (std::size_t i = 0; i < nvars; ++i) {
    bool ba = (a >> i) & 1u, bb = (b >> i) & 1u;
    if (ba != bb) return !ba;
  }
  return false;
}

/// Behavioural letter classes for a set of guards: letters with identical
/// guard valuations are interchangeable for every automaton operation.
struct Classes {
  std::vector<std::string> alphabet;
  std::vector<std::uint32_t> reps;                 // one representative per class
  std::vector<std::vector<std::uint32_t>> onsets;  // support assignments per class
  std::vector<int> support;                        // alphabet indices
  std::uint32_t min_letter(int cls) const {
    std::uint32_t best = onsets[static_cast<std::size_t>(cls)][0];
    for (std::uint32_t a : onsets[static_cast<std::size_t>(cls)])
      if (letter_lex_less(expand(a), expand(best), alphabet.size())) best = a;
    return expand(best);
  }
  std::uint32_t expand(std::uint32_t packed) const {
    std::uint32_t letter = 0;
    for (std::size_t i = 0; i < support.size(); ++i)
      if ((packed >> i) & 1u) letter |= 1u << support[static_cast<std::size_t>(i)];
    return letter;
  }
};

inline Classes compute_classes(const std::vector<std::string>& alphabet,
                               const std::vector<Prop>& guards) {
  Classes cl;
  cl.alphabet = alphabet;
  VarIndex vi(alphabet);
  std::set<int> sup;
  for (const auto& g : guards)
    for (const auto& v : prop_vars(g)) sup.insert(vi.at(v));
  cl.support.assign(sup.begin(), sup.end());
  if (cl.support.size() > 22)
    throw ApiError("guard support too large for classification (" +
                   std::to_string(cl.support.size()) + " variables)");
  std::uint32_t total = 1u << cl.support.size();
  std::map<std::vector<bool>, int> sig_to_class;
  for (std::uint32_t packed = 0; packed < total; ++packed) {
    std::uint32_t letter = cl.expand(packed);
    std::vector<bool> sig;
    sig.reserve(guards.size());
    for (const auto& g : guards) sig.push_back(eval_prop(g, vi, letter));
    auto [it, fresh] = sig_to_class.emplace(std::move(sig), static_cast<int>(cl.reps.size()));
    if (fresh) {
      cl.reps.push_back(letter);
      cl.onsets.emplace_back();
    }
    cl.onsets[static_cast<std::size_t>(it->second)].push_back(packed);
  }
  return cl;
}

/// DNF over the given variables from an explicit on-set of support
/// assignments; deterministic output.
inline Prop dnf_from_assignments(const std::vector<std::string>& vars,
                                 const std::vector<std::uint32_t>& on,
                                 std::uint32_t total) {
  if (on.empty()) return p_false();
  if (on.size() == total) return p_true();
  std::vector<bool> onset(total, false);
  for (std::uint32_t a : on) onset[a] = true;
  unsigned n = static_cast<unsigned>(vars.size());
  std::vector<bool> covered(total, false);
  std::vector<Prop> terms;
  for (std::uint32_t a = 0; a < total; ++a) {
    if (!onset[a] || covered[a]) continue;
    std::uint32_t care = total - 1;
    grow_cube(care, a, n, onset);
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

/// Guard for a set of classes, expressed over the support variables.
inline Prop classes_guard(const Classes& cl, const std::vector<int>& class_ids) {
  std::vector<std::string> vars;
  for (int s : cl.support) vars.push_back(cl.alphabet[static_cast<std::size_t>(s)]);
  std::vector<std::uint32_t> on;
  for (int c : class_ids)
    for (std::uint32_t a : cl.onsets[static_cast<std::size_t>(c)]) on.push_back(a);
  return dnf_from_assignments(vars, on, 1u << cl.support.size());
}

/// Dense deterministic transition table over classes.
struct DenseDfa {
  Classes classes;
  int num_states = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<int> trans;  // state * classes + class -> state
  int at(int s, int c) const {
    return trans[static_cast<std::size_t>(s) * classes.reps.size() +
                 static_cast<std::size_t>(c)];
  }
};

inline std::vector<Prop> guard_list(const std::vector<AutomatonEdge>& edges) {
  std::vector<Prop> gs;
  gs.reserve(edges.size());
  for (const auto& e : edges) gs.push_back(e.guard);
  return gs;
}

inline DenseDfa to_dense(const Dfa& d) {
  DenseDfa dd;
  dd.classes = compute_classes(d.alphabet, guard_list(d.edges));
  dd.num_states = d.num_states;
  dd.initial = d.initial;
  dd.accepting = d.accepting;
  std::size_t ncls = dd.classes.reps.size();
  dd.trans.assign(static_cast<std::size_t>(d.num_states) * ncls, -1);
  VarIndex vi(d.alphabet);
  for (const auto& e : d.edges) {
    for (std::size_t c = 0; c < ncls; ++c) {
      if (!eval_prop(e.guard, vi, dd.classes.reps[c])) continue;
      int& slot = dd.trans[static_cast<std::size_t>(e.from) * ncls + c];
      if (slot != -1 && slot != e.to)
        throw ApiError("automaton is not deterministic");
      slot = e.to;
    }
  }
  for (int v : dd.trans)
    if (v == -1) throw ApiError("automaton is not total");
  return dd;
}

inline Dfa from_dense(const DenseDfa& dd, bool minimal_flag) {
  Dfa d;
  d.alphabet = dd.classes.alphabet;
  d.num_states = dd.num_states;
  d.initial = dd.initial;
  d.accepting = dd.accepting;
  d.minimal = minimal_flag;
  std::size_t ncls = dd.classes.reps.size();
  for (int s = 0; s < dd.num_states; ++s) {
    std::map<int, std::vector<int>> by_target;
    for (std::size_t c = 0; c < ncls; ++c)
      by_target[dd.at(s, static_cast<int>(c))].push_back(static_cast<int>(c));
    // Deterministic edge order: by least letter of the class set.
    std::vector<std::pair<std::uint32_t, int>> order;
    for (const auto& [target, cls] : by_target) {
      std::uint32_t m = dd.classes.min_letter(cls[0]);
      for (int c : cls) {
        std::uint32_t mc = dd.classes.min_letter(c);
        if (letter_lex_less(mc, m, d.alphabet.size())) m = mc;
      }
      order.emplace_back(m, target);
    }
    std::sort(order.begin(), order.end(),
              [&](const auto& a, const auto& b) {
                return letter_lex_less(a.first, b.first, d.alphabet.size());
              });
    for (const auto& [m, target] : order)
      d.edges.push_back({s, classes_guard(dd.classes, by_target[target]), target});
  }
  return d;
}

}  // namespace detail

inline void check_alphabets(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
  if (a != b) throw ApiError("automaton alphabet mismatch");
}

/// Verify determinism and totality by minterm analysis of the guards.
inline bool is_deterministic_total(const Dfa& d) {
  try {
    detail::to_dense(d);
    return true;
  } catch (const ApiError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Atom automata. Each accepts exactly the words that, read as the interval
// [0,|w|-1], satisfy the atom.

namespace detail {
inline void check_guard_vars(const Prop& phi, const std::vector<std::string>& alphabet) {
  std::set<std::string> al(alphabet.begin(), alphabet.end());
  for (const auto& v : prop_vars(phi))
    if (!al.count(v)) throw ApiError("guard variable '" + v + "' not in alphabet");
}

inline bool cmp_ll(long long x, CmpOp op, long long c) {
  switch (op) {
    case CmpOp::Lt: return x < c;
    case CmpOp::Le: return x <= c;
    case CmpOp::Eq: return x == c;
    case CmpOp::Ge: return x >= c;
    case CmpOp::Gt: return x > c;
  }
  return false;
}
}  // namespace detail

inline Dfa atom_pt(const std::vector<std::string>& alphabet, const Prop& phi) {
  detail::check_guard_vars(phi, alphabet);
  Dfa d;
  d.alphabet = alphabet;
  d.num_states = 3;
  d.initial = 0;
  d.accepting = {false, true, false};
  d.edges = {{0, phi, 1}, {0, p_not(phi), 2}, {1, p_true(), 1}, {2, p_true(), 2}};
  return d;
}

inline Dfa atom_all_but_last(const std::vector<std::string>& alphabet, const Prop& phi) {
  detail::check_guard_vars(phi, alphabet);
  Dfa d;
  d.alphabet = alphabet;
  d.num_states = 4;
  d.initial = 0;
  // 1: all positions so far satisfy phi; 2: all but the final one do; 3: dead.
  d.accepting = {false, true, true, false};
  d.edges = {{0, phi, 1}, {0, p_not(phi), 2}, {1, phi, 1}, {1, p_not(phi), 2},
             {2, p_true(), 3}, {3, p_true(), 3}};
  return d;
}

inline Dfa atom_all(const std::vector<std::string>& alphabet, const Prop& phi) {
  detail::check_guard_vars(phi, alphabet);
  Dfa d;
  d.alphabet = alphabet;
  d.num_states = 3;
  d.initial = 0;
  d.accepting = {false, true, false};
  d.edges = {{0, phi, 1}, {0, p_not(phi), 2}, {1, phi, 1}, {1, p_not(phi), 2},
             {2, p_true(), 2}};
  return d;
}

inline Dfa atom_unit(const std::vector<std::string>& alphabet, const Prop& phi) {
  detail::check_guard_vars(phi, alphabet);
  // A unit interval spans two positions: exactly two letters, phi at the first.
  Dfa d;
  d.alphabet = alphabet;
  d.num_states = 4;
  d.initial = 0;
  d.accepting = {false, false, true, false};
  d.edges = {{0, phi, 1}, {0, p_not(phi), 3}, {1, p_true(), 2}, {2, p_true(), 3},
             {3, p_true(), 3}};
  return d;
}

inline Dfa atom_slen(const std::vector<std::string>& alphabet, CmpOp op, long long c) {
  Dfa d;
  d.alphabet = alphabet;
  // State 0 initial; 1+j for slen = j (j = 0..c); final state saturates slen > c.
  int sat = static_cast<int>(c) + 2;
  d.num_states = sat + 1;
  d.initial = 0;
  d.accepting.assign(static_cast<std::size_t>(d.num_states), false);
  for (long long j = 0; j <= c; ++j)
    d.accepting[static_cast<std::size_t>(1 + j)] = detail::cmp_ll(j, op, c);
  d.accepting[static_cast<std::size_t>(sat)] = detail::cmp_ll(c + 1, op, c);
  for (int s = 0; s < d.num_states; ++s) {
    int next = s == 0 ? 1 : std::min(s + 1, sat);
    d.edges.push_back({s, p_true(), next});
  }
  return d;
}

inline Dfa atom_scount(const std::vector<std::string>& alphabet, const Prop& phi,
                       CmpOp op, long long c) {
  detail::check_guard_vars(phi, alphabet);
  Dfa d;
  d.alphabet = alphabet;
  // State 0 initial; 1+k holds count k, saturating at c+1.
  long long satk = c + 1;
  d.num_states = static_cast<int>(satk) + 2;
  d.initial = 0;
  d.accepting.assign(static_cast<std::size_t>(d.num_states), false);
  for (long long k = 0; k <= satk; ++k)
    d.accepting[static_cast<std::size_t>(1 + k)] = detail::cmp_ll(k, op, c);
  auto state_of = [&](long long k) { return static_cast<int>(1 + std::min(k, satk)); };
  d.edges.push_back({0, phi, state_of(1)});
  d.edges.push_back({0, p_not(phi), state_of(0)});
  for (long long k = 0; k <= satk; ++k) {
    d.edges.push_back({state_of(k), phi, state_of(k + 1)});
    d.edges.push_back({state_of(k), p_not(phi), state_of(k)});
  }
  return d;
}

inline Dfa atom_sdur(const std::vector<std::string>& alphabet, const Prop& phi,
                     CmpOp op, long long c) {
  detail::check_guard_vars(phi, alphabet);
  Dfa d;
  d.alphabet = alphabet;
  // States: 0 initial; then (k, b) with k the count excluding the last
  // position (saturating at c+1) and b the truth of phi at the last position.
  long long satk = c + 1;
  auto state_of = [&](long long k, bool b) {
    return static_cast<int>(1 + 2 * std::min(k, satk) + (b ? 1 : 0));
  };
  d.num_states = static_cast<int>(satk) * 2 + 3;
  d.initial = 0;
  d.accepting.assign(static_cast<std::size_t>(d.num_states), false);
  for (long long k = 0; k <= satk; ++k)
    for (int b = 0; b <= 1; ++b)
      d.accepting[static_cast<std::size_t>(state_of(k, b))] = detail::cmp_ll(k, op, c);
  d.edges.push_back({0, phi, state_of(0, true)});
  d.edges.push_back({0, p_not(phi), state_of(0, false)});
  for (long long k = 0; k <= satk; ++k)
    for (int b = 0; b <= 1; ++b) {
      d.edges.push_back({state_of(k, b), phi, state_of(k + b, true)});
      d.edges.push_back({state_of(k, b), p_not(phi), state_of(k + b, false)});
    }
  return d;
}

// ---------------------------------------------------------------------------
// Boolean products and complement.

enum class ProductMode { And, Or };

inline Dfa product(const Dfa& a, const Dfa& b, ProductMode mode) {
  bool conjunction = mode == ProductMode::And;
  check_alphabets(a.alphabet, b.alphabet);
  std::vector<Prop> guards = detail::guard_list(a.edges);
  for (const auto& e : b.edges) guards.push_back(e.guard);
  detail::Classes cl = detail::compute_classes(a.alphabet, guards);
  // Build both dense tables over the joint classes (inputs must be total and
  // deterministic; to_dense on each would verify but duplicate the work).
  auto dense_over = [&](const Dfa& d) {
    detail::DenseDfa dd;
    dd.classes = cl;
    dd.num_states = d.num_states;
    dd.initial = d.initial;
    dd.accepting = d.accepting;
    std::size_t ncls = cl.reps.size();
    dd.trans.assign(static_cast<std::size_t>(d.num_states) * ncls, -1);
    VarIndex vi(d.alphabet);
    for (const auto& e : d.edges)
      for (std::size_t c = 0; c < ncls; ++c)
        if (eval_prop(e.guard, vi, cl.reps[c]))
          dd.trans[static_cast<std::size_t>(e.from) * ncls + c] = e.to;
    return dd;
  };
  detail::DenseDfa xa = dense_over(a), xb = dense_over(b);
  std::size_t ncls = cl.reps.size();
  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> states;
  auto id_of = [&](int s, int t) {
    auto [it, fresh] = ids.emplace(std::make_pair(s, t), static_cast<int>(states.size()));
    if (fresh) states.emplace_back(s, t);
    return it->second;
  };
  detail::DenseDfa out;
  out.classes = cl;
  out.initial = id_of(a.initial, b.initial);
  std::queue<int> queue;
  queue.push(out.initial);
  std::vector<std::vector<int>> rows;
  rows.emplace_back();
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop();
    auto [s, t] = states[static_cast<std::size_t>(id)];
    std::vector<int> row(ncls, -1);
    for (std::size_t c = 0; c < ncls; ++c) {
      int ns = xa.at(s, static_cast<int>(c));
      int nt = xb.at(t, static_cast<int>(c));
      std::size_t before = states.size();
      int nid = id_of(ns, nt);
      if (states.size() > before) {
        rows.emplace_back();
        queue.push(nid);
      }
      row[c] = nid;
    }
    rows[static_cast<std::size_t>(id)] = std::move(row);
  }
  out.num_states = static_cast<int>(states.size());
  out.trans.reserve(states.size() * ncls);
  for (const auto& row : rows)
    for (int v : row) out.trans.push_back(v);
  out.accepting.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    bool fa = a.accepting[static_cast<std::size_t>(states[i].first)];
    bool fb = b.accepting[static_cast<std::size_t>(states[i].second)];
    out.accepting[i] = conjunction ? (fa && fb) : (fa || fb);
  }
  return detail::from_dense(out, false);
}

inline Dfa product(const Dfa& a, const Dfa& b, const std::string& mode) {
  if (mode == "and") return product(a, b, ProductMode::And);
  if (mode == "or") return product(a, b, ProductMode::Or);
  throw ApiError("product mode must be 'and' or 'or'");
}

/// Complement relative to the non-empty-word universe.
inline Dfa complement(const Dfa& a) {
  detail::DenseDfa dd = detail::to_dense(a);  // verifies total determinism
  for (std::size_t i = 0; i < dd.accepting.size(); ++i)
    dd.accepting[i] = !dd.accepting[i];
  Dfa out = detail::from_dense(dd, false);
  // The initial state's acceptance bit is the empty-word judgment; keep the
  // universe at non-empty words by splitting the initial state if needed.
  if (out.accepting[static_cast<std::size_t>(out.initial)]) {
    bool has_incoming = false;
    for (const auto& e : out.edges)
      if (e.to == out.initial) has_incoming = true;
    if (has_incoming) {
      int fresh = out.num_states++;
      out.accepting.push_back(false);
      std::vector<AutomatonEdge> extra;
      for (const auto& e : out.edges)
        if (e.from == out.initial) extra.push_back({fresh, e.guard, e.to});
      out.edges.insert(out.edges.end(), extra.begin(), extra.end());
      out.initial = fresh;
    } else {
      out.accepting[static_cast<std::size_t>(out.initial)] = false;
    }
  }
  out.minimal = false;
  return out;
}

// ---------------------------------------------------------------------------
// Fusion concatenation and fusion iteration (the chop and star constructions):
// the cut-point letter is consumed by both sides.

inline Nfa fusion_concat(const Dfa& a, const Dfa& b) {
  check_alphabets(a.alphabet, b.alphabet);
  Nfa out;
  out.alphabet = a.alphabet;
  out.num_states = a.num_states + b.num_states;
  out.initial = {a.initial};
  out.accepting.assign(static_cast<std::size_t>(out.num_states), false);
  for (int s = 0; s < b.num_states; ++s)
    out.accepting[static_cast<std::size_t>(a.num_states + s)] =
        b.accepting[static_cast<std::size_t>(s)];
  for (const auto& e : a.edges) out.edges.push_back(e);
  for (const auto& e : b.edges)
    out.edges.push_back({a.num_states + e.from, e.guard, a.num_states + e.to});
  // Bridge: the letter that completes an accepted left word is also the first
  // letter the right automaton reads.
  for (const auto& ea : a.edges) {
    if (!a.accepting[static_cast<std::size_t>(ea.to)]) continue;
    for (const auto& eb : b.edges) {
      if (eb.from != b.initial) continue;
      out.edges.push_back({ea.from, p_and(ea.guard, eb.guard), a.num_states + eb.to});
    }
  }
  return out;
}

inline Nfa fusion_star(const Dfa& a) {
  Nfa out;
  out.alphabet = a.alphabet;
  out.num_states = a.num_states + 2;
  int s0 = a.num_states, sf = a.num_states + 1;
  out.initial = {s0, a.initial};
  out.accepting.assign(static_cast<std::size_t>(out.num_states), false);
  for (int s = 0; s < a.num_states; ++s)
    out.accepting[static_cast<std::size_t>(s)] = a.accepting[static_cast<std::size_t>(s)];
  out.accepting[static_cast<std::size_t>(sf)] = true;  // every length-1 word
  for (const auto& e : a.edges) out.edges.push_back(e);
  out.edges.push_back({s0, p_true(), sf});
  for (const auto& ea : a.edges) {
    if (!a.accepting[static_cast<std::size_t>(ea.to)]) continue;
    for (const auto& eb : a.edges) {
      if (eb.from != a.initial) continue;
      out.edges.push_back({ea.from, p_and(ea.guard, eb.guard), eb.to});
    }
  }
  return out;
}

/// Existential abstraction of one variable; the alphabet shrinks by it.
inline Nfa project(const Dfa& a, const std::string& var) {
  auto it = std::find(a.alphabet.begin(), a.alphabet.end(), var);
  if (it == a.alphabet.end()) throw ApiError("variable '" + var + "' not in alphabet");
  Nfa out;
  out.alphabet = a.alphabet;
  out.alphabet.erase(out.alphabet.begin() + (it - a.alphabet.begin()));
  out.num_states = a.num_states;
  out.initial = {a.initial};
  out.accepting = a.accepting;
  for (const auto& e : a.edges) {
    Prop hi = substitute(e.guard, {{var, p_true()}});
    Prop lo = substitute(e.guard, {{var, p_false()}});
    out.edges.push_back({e.from, p_or(hi, lo), e.to});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subset construction and canonical minimization.

inline Dfa determinize(const Nfa& n, std::size_t state_cap = 0) {
  detail::Classes cl = detail::compute_classes(n.alphabet, detail::guard_list(n.edges));
  std::size_t ncls = cl.reps.size();
  // Per (state, class) target sets.
  std::vector<std::vector<std::vector<int>>> step(
      static_cast<std::size_t>(n.num_states), std::vector<std::vector<int>>(ncls));
  VarIndex vi(n.alphabet);
  for (const auto& e : n.edges)
    for (std::size_t c = 0; c < ncls; ++c)
      if (eval_prop(e.guard, vi, cl.reps[c]))
        step[static_cast<std::size_t>(e.from)][c].push_back(e.to);
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> subsets;
  auto id_of = [&](std::vector<int> subset) {
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    auto [it, fresh] = ids.emplace(subset, static_cast<int>(subsets.size()));
    if (fresh) subsets.push_back(it->first);
    return it->second;
  };
  detail::DenseDfa out;
  out.classes = cl;
  out.initial = id_of(n.initial);
  std::vector<std::vector<int>> rows;
  std::queue<int> queue;
  queue.push(out.initial);
  rows.emplace_back();
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop();
    std::vector<int> subset = subsets[static_cast<std::size_t>(id)];
    std::vector<int> row(ncls, -1);
    for (std::size_t c = 0; c < ncls; ++c) {
      std::vector<int> next;
      for (int s : subset)
        for (int t : step[static_cast<std::size_t>(s)][c]) next.push_back(t);
      std::size_t before = subsets.size();
      int nid = id_of(std::move(next));
      if (subsets.size() > before) {
        rows.emplace_back();
        queue.push(nid);
        if (state_cap && subsets.size() > state_cap)
          throw CapExceededError("determinize", subsets.size());
      }
      row[c] = nid;
    }
    rows[static_cast<std::size_t>(id)] = std::move(row);
  }
  out.num_states = static_cast<int>(subsets.size());
  for (const auto& row : rows)
    for (int v : row) out.trans.push_back(v);
  out.accepting.resize(subsets.size(), false);
  for (std::size_t i = 0; i < subsets.size(); ++i)
    for (int s : subsets[i])
      if (n.accepting[static_cast<std::size_t>(s)]) out.accepting[i] = true;
  return detail::from_dense(out, false);
}

/// Unique minimal total DFA with canonical BFS state numbering; language
/// equality of canonical automata is structural equality.
inline Dfa minimize(const Dfa& d) {
  detail::DenseDfa dd = detail::to_dense(d);
  std::size_t ncls = dd.classes.reps.size();
  // Normalize the empty-word bit: give the initial state a fresh copy without
  // incoming edges so the flag cannot encode acceptance of looping words.
  {
    bool has_incoming = false;
    for (int v : dd.trans)
      if (v == dd.initial) has_incoming = true;
    if (dd.accepting[static_cast<std::size_t>(dd.initial)] && has_incoming) {
      int fresh = dd.num_states++;
      for (std::size_t c = 0; c < ncls; ++c)
        dd.trans.push_back(dd.at(dd.initial, static_cast<int>(c)));
      dd.accepting.push_back(false);
      dd.initial = fresh;
    } else {
      dd.accepting[static_cast<std::size_t>(dd.initial)] = false;
    }
  }
  // Reachable restriction.
  std::vector<int> reach_id(static_cast<std::size_t>(dd.num_states), -1);
  std::vector<int> order;
  std::queue<int> queue;
  reach_id[static_cast<std::size_t>(dd.initial)] = 0;
  order.push_back(dd.initial);
  queue.push(dd.initial);
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop();
    for (std::size_t c = 0; c < ncls; ++c) {
      int t = dd.at(s, static_cast<int>(c));
      if (reach_id[static_cast<std::size_t>(t)] == -1) {
        reach_id[static_cast<std::size_t>(t)] = static_cast<int>(order.size());
        order.push_back(t);
        queue.push(t);
      }
    }
  }
  int nreach = static_cast<int>(order.size());
  std::vector<int> trans(static_cast<std::size_t>(nreach) * ncls);
  std::vector<bool> acc(static_cast<std::size_t>(nreach));
  for (int i = 0; i < nreach; ++i) {
    int s = order[static_cast<std::size_t>(i)];
    acc[static_cast<std::size_t>(i)] = dd.accepting[static_cast<std::size_t>(s)];
    for (std::size_t c = 0; c < ncls; ++c)
      trans[static_cast<std::size_t>(i) * ncls + c] =
          reach_id[static_cast<std::size_t>(dd.at(s, static_cast<int>(c)))];
  }
  // Moore partition refinement.
  std::vector<int> block(static_cast<std::size_t>(nreach));
  for (int i = 0; i < nreach; ++i) block[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)] ? 1 : 0;
  int nblocks = 2;
  for (;;) {
    std::map<std::vector<int>, int> sig_ids;
    std::vector<int> next(static_cast<std::size_t>(nreach));
    for (int i = 0; i < nreach; ++i) {
      std::vector<int> sig;
      sig.reserve(ncls + 1);
      sig.push_back(block[static_cast<std::size_t>(i)]);
      for (std::size_t c = 0; c < ncls; ++c)
        sig.push_back(block[static_cast<std::size_t>(
            trans[static_cast<std::size_t>(i) * ncls + c])]);
      auto [it, fresh] = sig_ids.emplace(std::move(sig), static_cast<int>(sig_ids.size()));
      (void)fresh;
      next[static_cast<std::size_t>(i)] = it->second;
    }
    int newblocks = static_cast<int>(sig_ids.size());
    block.swap(next);
    if (newblocks == nblocks) break;
    nblocks = newblocks;
  }
  // Quotient, then canonical BFS renumbering ordered by least letter.
  std::vector<int> qtrans(static_cast<std::size_t>(nblocks) * ncls, -1);
  std::vector<bool> qacc(static_cast<std::size_t>(nblocks), false);
  for (int i = 0; i < nreach; ++i) {
    int bidx = block[static_cast<std::size_t>(i)];
    qacc[static_cast<std::size_t>(bidx)] = acc[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < ncls; ++c)
      qtrans[static_cast<std::size_t>(bidx) * ncls + c] =
          block[static_cast<std::size_t>(trans[static_cast<std::size_t>(i) * ncls + c])];
  }
  int qinit = block[0];
  // Class order by least letter, shared by renumbering and edge emission.
  std::vector<int> class_order(ncls);
  for (std::size_t c = 0; c < ncls; ++c) class_order[c] = static_cast<int>(c);
  std::sort(class_order.begin(), class_order.end(), [&](int x, int y) {
    return detail::letter_lex_less(dd.classes.min_letter(x), dd.classes.min_letter(y),
                                   dd.classes.alphabet.size());
  });
  std::vector<int> canon(static_cast<std::size_t>(nblocks), -1);
  std::vector<int> corder;
  canon[static_cast<std::size_t>(qinit)] = 0;
  corder.push_back(qinit);
  std::queue<int> cq;
  cq.push(qinit);
  while (!cq.empty()) {
    int s = cq.front();
    cq.pop();
    for (int c : class_order) {
      int t = qtrans[static_cast<std::size_t>(s) * ncls + static_cast<std::size_t>(c)];
      if (canon[static_cast<std::size_t>(t)] == -1) {
        canon[static_cast<std::size_t>(t)] = static_cast<int>(corder.size());
        corder.push_back(t);
        cq.push(t);
      }
    }
  }
  detail::DenseDfa out;
  out.classes = dd.classes;
  out.num_states = nblocks;
  out.initial = 0;
  out.accepting.resize(static_cast<std::size_t>(nblocks));
  out.trans.assign(static_cast<std::size_t>(nblocks) * ncls, -1);
  for (int s = 0; s < nblocks; ++s) {
    int old = corder[static_cast<std::size_t>(s)];
    out.accepting[static_cast<std::size_t>(s)] = qacc[static_cast<std::size_t>(old)];
    for (std::size_t c = 0; c < ncls; ++c)
      out.trans[static_cast<std::size_t>(s) * ncls + c] = canon[static_cast<std::size_t>(
          qtrans[static_cast<std::size_t>(old) * ncls + c])];
  }
  Dfa result = detail::from_dense(out, true);
  return result;
}

// ---------------------------------------------------------------------------
// Decision helpers.

inline bool is_empty(const Dfa& d) {
  detail::DenseDfa dd = detail::to_dense(d);
  std::size_t ncls = dd.classes.reps.size();
  std::vector<bool> seen(static_cast<std::size_t>(dd.num_states), false);
  std::queue<int> queue;
  // Acceptance counts only after at least one letter.
  for (std::size_t c = 0; c < ncls; ++c) {
    int t = dd.at(dd.initial, static_cast<int>(c));
    if (!seen[static_cast<std::size_t>(t)]) {
      seen[static_cast<std::size_t>(t)] = true;
      queue.push(t);
    }
  }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop();
    if (dd.accepting[static_cast<std::size_t>(s)]) return false;
    for (std::size_t c = 0; c < ncls; ++c) {
      int t = dd.at(s, static_cast<int>(c));
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        queue.push(t);
      }
    }
  }
  return true;
}

/// Universality over non-empty words.
inline bool is_universal(const Dfa& d) {
  detail::DenseDfa dd = detail::to_dense(d);
  std::size_t ncls = dd.classes.reps.size();
  std::vector<bool> seen(static_cast<std::size_t>(dd.num_states), false);
  std::queue<int> queue;
  for (std::size_t c = 0; c < ncls; ++c) {
    int t = dd.at(dd.initial, static_cast<int>(c));
    if (!seen[static_cast<std::size_t>(t)]) {
      seen[static_cast<std::size_t>(t)] = true;
      queue.push(t);
    }
  }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop();
    if (!dd.accepting[static_cast<std::size_t>(s)]) return false;
    for (std::size_t c = 0; c < ncls; ++c) {
      int t = dd.at(s, static_cast<int>(c));
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        queue.push(t);
      }
    }
  }
  return true;
}

/// Minimum-length accepted word with lexicographically least letters under
/// the declared variable order; nullopt iff the language is empty.
inline std::optional<Word> shortest_word(const Dfa& d) {
  detail::DenseDfa dd = detail::to_dense(d);
  std::size_t ncls = dd.classes.reps.size();
  std::vector<int> class_order(ncls);
  for (std::size_t c = 0; c < ncls; ++c) class_order[c] = static_cast<int>(c);
  std::vector<std::uint32_t> min_letters(ncls);
  for (std::size_t c = 0; c < ncls; ++c) min_letters[c] = dd.classes.min_letter(static_cast<int>(c));
  std::sort(class_order.begin(), class_order.end(), [&](int x, int y) {
    return detail::letter_lex_less(min_letters[static_cast<std::size_t>(x)],
                                   min_letters[static_cast<std::size_t>(y)],
                                   d.alphabet.size());
  });
  struct Visit {
    int parent = -1;
    std::uint32_t letter = 0;
  };
  std::vector<Visit> visit(static_cast<std::size_t>(dd.num_states));
  std::vector<bool> seen(static_cast<std::size_t>(dd.num_states), false);
  std::queue<int> queue;
  // The initial state is a virtual root: acceptance requires >= 1 letter.
  int found = -1;
  auto expand = [&](int s, bool root) {
    for (int c : class_order) {
      int t = dd.at(s, c);
      if (seen[static_cast<std::size_t>(t)]) continue;
      seen[static_cast<std::size_t>(t)] = true;
      visit[static_cast<std::size_t>(t)] = {root ? -1 : s, min_letters[static_cast<std::size_t>(c)]};
      if (dd.accepting[static_cast<std::size_t>(t)] && found == -1) found = t;
      queue.push(t);
    }
  };
  expand(dd.initial, true);
  while (found == -1 && !queue.empty()) {
    int s = queue.front();
    queue.pop();
    expand(s, false);
  }
  if (found == -1) return std::nullopt;
  std::vector<std::uint32_t> letters;
  for (int s = found; s != -1; s = visit[static_cast<std::size_t>(s)].parent) {
    letters.push_back(visit[static_cast<std::size_t>(s)].letter);
    if (visit[static_cast<std::size_t>(s)].parent == -1) break;
  }
  std::reverse(letters.begin(), letters.end());
  Word w;
  w.vars = d.alphabet;
  w.letters = letters;
  return w;
}

/// Run a word through a total DFA; true iff it ends in an accepting state.
inline bool dfa_accepts(const Dfa& d, const Word& w) {
  check_alphabets(d.alphabet, w.vars);
  VarIndex vi(d.alphabet);
  int s = d.initial;
  for (std::uint32_t letter : w.letters) {
    int next = -1;
    for (const auto& e : d.edges) {
      if (e.from != s) continue;
      if (eval_prop(e.guard, vi, letter)) {
        next = e.to;
        break;
      }
    }
    if (next == -1) throw ApiError("automaton is not total");
    s = next;
  }
  return d.accepting[static_cast<std::size_t>(s)];
}

/// Fast acceptance testing for a batch of words over the same automaton:
/// letters map to behavioural classes through their support projection.
struct DfaRunner {
  explicit DfaRunner(const Dfa& d) : dense_(detail::to_dense(d)) {
    packed_class_.assign(1u << dense_.classes.support.size(), 0);
    for (std::size_t c = 0; c < dense_.classes.onsets.size(); ++c)
      for (std::uint32_t packed : dense_.classes.onsets[c])
        packed_class_[packed] = static_cast<int>(c);
  }

  int class_of(std::uint32_t letter) const {
    std::uint32_t packed = 0;
    for (std::size_t i = 0; i < dense_.classes.support.size(); ++i)
      if ((letter >> dense_.classes.support[i]) & 1u) packed |= 1u << i;
    return packed_class_[packed];
  }

  bool accepts(const Word& w) const { return dense_.accepting[static_cast<std::size_t>(state_after(w.letters))]; }

  int initial() const { return dense_.initial; }
  int step(int s, std::uint32_t letter) const { return dense_.at(s, class_of(letter)); }
  bool accepting(int s) const { return dense_.accepting[static_cast<std::size_t>(s)]; }
  int num_states() const { return dense_.num_states; }

  int state_after(const std::vector<std::uint32_t>& letters) const {
    int s = dense_.initial;
    for (std::uint32_t letter : letters) s = step(s, letter);
    return s;
  }

 private:
  detail::DenseDfa dense_;
  std::vector<int> packed_class_;
};

/// Structural isomorphism of two canonical automata over a joint letter
/// classification; used by the canonicity checks.
inline bool isomorphic(const Dfa& a, const Dfa& b) {
  if (a.alphabet != b.alphabet || a.num_states != b.num_states) return false;
  std::vector<Prop> guards = detail::guard_list(a.edges);
  for (const auto& e : b.edges) guards.push_back(e.guard);
  detail::Classes cl = detail::compute_classes(a.alphabet, guards);
  VarIndex vi(a.alphabet);
  auto dense_over = [&](const Dfa& d) {
    std::size_t ncls = cl.reps.size();
    std::vector<int> t(static_cast<std::size_t>(d.num_states) * ncls, -1);
    for (const auto& e : d.edges)
      for (std::size_t c = 0; c < ncls; ++c)
        if (eval_prop(e.guard, vi, cl.reps[c]))
          t[static_cast<std::size_t>(e.from) * ncls + c] = e.to;
    return t;
  };
  std::vector<int> ta = dense_over(a), tb = dense_over(b);
  // Find the bijection by synchronized BFS from the initial states.
  std::size_t ncls = cl.reps.size();
  std::vector<int> map_ab(static_cast<std::size_t>(a.num_states), -1);
  map_ab[static_cast<std::size_t>(a.initial)] = b.initial;
  std::queue<int> queue;
  queue.push(a.initial);
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop();
    int t = map_ab[static_cast<std::size_t>(s)];
    if (a.accepting[static_cast<std::size_t>(s)] != b.accepting[static_cast<std::size_t>(t)])
      return false;
    for (std::size_t c = 0; c < ncls; ++c) {
      int sa = ta[static_cast<std::size_t>(s) * ncls + c];
      int sb = tb[static_cast<std::size_t>(t) * ncls + c];
      int& m = map_ab[static_cast<std::size_t>(sa)];
      if (m == -1) {
        m = sb;
        queue.push(sa);
      } else if (m != sb) {
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Serialization: {alphabet, states, initial, accepting, edges} with guards in
// the propositional surface grammar. Field order is fixed.

inline nlohmann::ordered_json dfa_to_json(const Dfa& d) {
  nlohmann::ordered_json j;
  j["alphabet"] = d.alphabet;
  j["states"] = d.num_states;
  j["initial"] = d.initial;
  std::vector<int> acc;
  for (int s = 0; s < d.num_states; ++s)
    if (d.accepting[static_cast<std::size_t>(s)]) acc.push_back(s);
  j["accepting"] = acc;
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : d.edges) {
    nlohmann::ordered_json je;
    je["from"] = e.from;
    je["guard"] = print_prop(e.guard);
    je["to"] = e.to;
    j["edges"].push_back(je);
  }
  return j;
}

inline Dfa dfa_from_json(const nlohmann::json& j) {
  Dfa d;
  d.alphabet = j.at("alphabet").get<std::vector<std::string>>();
  d.num_states = j.at("states").get<int>();
  d.initial = j.at("initial").get<int>();
  d.accepting.assign(static_cast<std::size_t>(d.num_states), false);
  for (int s : j.at("accepting").get<std::vector<int>>())
    d.accepting.at(static_cast<std::size_t>(s)) = true;
  std::set<std::string> sigma(d.alphabet.begin(), d.alphabet.end());
  for (const auto& je : j.at("edges")) {
    AutomatonEdge e;
    e.from = je.at("from").get<int>();
    e.guard = parse_prop(je.at("guard").get<std::string>(), sigma);
    e.to = je.at("to").get<int>();
    if (e.from < 0 || e.from >= d.num_states || e.to < 0 || e.to >= d.num_states)
      throw ApiError("edge endpoint out of range in DFA JSON");
    d.edges.push_back(std::move(e));
  }
  return d;
}

}  // namespace tdspec
