#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "tdspec/analysis.hpp"
#include "tdspec/automata.hpp"

namespace tdspec {

// Safety-game synthesis from a requirement monitor with an input/output
// partition. A round is: environment picks the inputs, controller picks the
// outputs, the combined letter drives the monitor (Mealy convention; the
// Moore flag flips the order so outputs are chosen before seeing the inputs).
// Driving the monitor into a rejecting state loses.

struct SafetyGame {
  Dfa req;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  bool moore = false;
  // step[state * 2^(in+out) + (out << nin | in)] -> monitor state
  std::vector<int> step;
  std::vector<bool> safe;  // accepting monitor states
  int num_states = 0;
  int initial = 0;

  int at(int s, std::uint32_t in, std::uint32_t out) const {
    std::size_t moves = 1u << (inputs.size() + outputs.size());
    return step[static_cast<std::size_t>(s) * moves +
                ((static_cast<std::size_t>(out) << inputs.size()) | in)];
  }
};

inline SafetyGame build_game(const Dfa& req, const std::vector<std::string>& inputs,
                             const std::vector<std::string>& outputs, bool moore = false) {
  std::set<std::string> in_set(inputs.begin(), inputs.end());
  std::set<std::string> out_set(outputs.begin(), outputs.end());
  for (const auto& v : inputs)
    if (out_set.count(v))
      throw ApiError("variable '" + v + "' is both input and output");
  std::set<std::string> alpha(req.alphabet.begin(), req.alphabet.end());
  std::set<std::string> part = in_set;
  part.insert(out_set.begin(), out_set.end());
  if (alpha != part)
    throw ApiError("input/output partition does not cover the requirement alphabet");
  if (inputs.size() + outputs.size() > 20)
    throw ApiError("too many game variables");

  SafetyGame g;
  g.req = req;
  g.inputs = inputs;
  g.outputs = outputs;
  g.moore = moore;
  g.num_states = req.num_states;
  g.initial = req.initial;
  g.safe = req.accepting;
  DfaRunner runner(req);
  // Map (input,output) assignment bits onto monitor alphabet positions.
  std::vector<int> src;  // alphabet index -> combined move bit
  for (const auto& v : req.alphabet) {
    auto iit = std::find(inputs.begin(), inputs.end(), v);
    if (iit != inputs.end()) {
      src.push_back(static_cast<int>(iit - inputs.begin()));
    } else {
      auto oit = std::find(outputs.begin(), outputs.end(), v);
      src.push_back(static_cast<int>(inputs.size() + (oit - outputs.begin())));
    }
  }
  std::size_t moves = 1u << (inputs.size() + outputs.size());
  g.step.resize(static_cast<std::size_t>(req.num_states) * moves);
  // Monitor states are canonical ids 0..n-1, but DfaRunner works on its own
  // dense copy which preserves state numbering.
  for (int s = 0; s < req.num_states; ++s)
    for (std::size_t mv = 0; mv < moves; ++mv) {
      std::uint32_t letter = 0;
      for (std::size_t i = 0; i < src.size(); ++i)
        if ((mv >> src[i]) & 1u) letter |= 1u << i;
      g.step[static_cast<std::size_t>(s) * moves + mv] = runner.step(s, letter);
    }
  return g;
}

/// Winning region and maximally permissive strategy. For Mealy games,
/// allowed[s * 2^nin + in] is the non-empty set of safe outputs (as a
/// bitmask) for winning states.
struct GameSolution {
  bool realizable = false;
  std::vector<bool> winning;
  std::vector<std::uint32_t> allowed;  // per (state, input): output set
  std::vector<int> removal_round;     // fixpoint round at which a state left
};

inline GameSolution solve_safety(const SafetyGame& g) {
  std::size_t nin = g.inputs.size(), nout = g.outputs.size();
  std::uint32_t ni = 1u << nin, no = 1u << nout;
  GameSolution sol;
  sol.winning.assign(static_cast<std::size_t>(g.num_states), true);
  sol.removal_round.assign(static_cast<std::size_t>(g.num_states), -1);
  auto survives = [&](int s, const std::vector<bool>& w) {
    if (!g.moore) {
      for (std::uint32_t in = 0; in < ni; ++in) {
        bool any = false;
        for (std::uint32_t out = 0; out < no && !any; ++out) {
          int t = g.at(s, in, out);
          any = g.safe[static_cast<std::size_t>(t)] && w[static_cast<std::size_t>(t)];
        }
        if (!any) return false;
      }
      return true;
    }
    for (std::uint32_t out = 0; out < no; ++out) {
      bool all = true;
      for (std::uint32_t in = 0; in < ni && all; ++in) {
        int t = g.at(s, in, out);
        all = g.safe[static_cast<std::size_t>(t)] && w[static_cast<std::size_t>(t)];
      }
      if (all) return true;
    }
    return false;
  };
  int round = 0;
  for (;;) {
    ++round;
    bool changed = false;
    for (int s = 0; s < g.num_states; ++s) {
      if (!sol.winning[static_cast<std::size_t>(s)]) continue;
      if (!survives(s, sol.winning)) {
        sol.winning[static_cast<std::size_t>(s)] = false;
        sol.removal_round[static_cast<std::size_t>(s)] = round;
        changed = true;
      }
    }
    if (!changed) break;
  }
  sol.realizable = sol.winning[static_cast<std::size_t>(g.initial)];
  sol.allowed.assign(static_cast<std::size_t>(g.num_states) * ni, 0);
  for (int s = 0; s < g.num_states; ++s) {
    if (!sol.winning[static_cast<std::size_t>(s)]) continue;
    for (std::uint32_t in = 0; in < ni; ++in) {
      std::uint32_t mask = 0;
      for (std::uint32_t out = 0; out < no; ++out) {
        int t = g.at(s, in, out);
        if (g.safe[static_cast<std::size_t>(t)] && sol.winning[static_cast<std::size_t>(t)])
          mask |= 1u << out;
      }
      sol.allowed[static_cast<std::size_t>(s) * ni + in] = mask;
    }
  }
  return sol;
}

/// Shortest input sequence after which every output response has lost, found
/// by search over sets of surviving monitor states. Some unrealizable games
/// admit no such oblivious sequence; then the subset search exhausts and the
/// fallback reports one adaptive path following the fixpoint rounds.
struct UnrealizableExplanation {
  std::vector<std::uint32_t> input_sequence;  // assignments to inputs
  bool universal = true;
};

inline std::optional<UnrealizableExplanation> explain_unrealizable(
    const SafetyGame& g, const GameSolution& sol, std::size_t subset_cap = 200000) {
  if (sol.realizable) return std::nullopt;
  std::size_t nin = g.inputs.size(), nout = g.outputs.size();
  std::uint32_t ni = 1u << nin, no = 1u << nout;
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> sets;
  struct Parent {
    int id;
    std::uint32_t in;
  };
  std::vector<Parent> parents;
  auto id_of = [&](std::vector<int> v, int parent, std::uint32_t in) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    auto [it, fresh] = ids.emplace(v, static_cast<int>(sets.size()));
    if (fresh) {
      sets.push_back(it->first);
      parents.push_back({parent, in});
    }
    return std::make_pair(it->second, fresh);
  };
  auto [root, rf] = id_of({g.initial}, -1, 0);
  (void)rf;
  std::queue<int> queue;
  queue.push(root);
  while (!queue.empty() && sets.size() <= subset_cap) {
    int id = queue.front();
    queue.pop();
    std::vector<int> cur = sets[static_cast<std::size_t>(id)];
    for (std::uint32_t in = 0; in < ni; ++in) {
      std::vector<int> next;
      for (int s : cur)
        for (std::uint32_t out = 0; out < no; ++out) {
          int t = g.at(s, in, out);
          if (g.safe[static_cast<std::size_t>(t)]) next.push_back(t);
        }
      if (next.empty()) {
        UnrealizableExplanation ex;
        ex.input_sequence.push_back(in);
        for (int p = id; parents[static_cast<std::size_t>(p)].id != -1;
             p = parents[static_cast<std::size_t>(p)].id)
          ex.input_sequence.push_back(parents[static_cast<std::size_t>(p)].in);
        std::reverse(ex.input_sequence.begin(), ex.input_sequence.end());
        return ex;
      }
      auto [nid, fresh] = id_of(std::move(next), id, in);
      if (fresh) queue.push(nid);
    }
  }
  // Adaptive fallback: walk states by decreasing removal round, reporting the
  // inputs that shrank the winning region.
  UnrealizableExplanation ex;
  ex.universal = false;
  int s = g.initial;
  std::set<int> visited;
  while (visited.insert(s).second) {
    int round = sol.removal_round[static_cast<std::size_t>(s)];
    std::uint32_t pick_in = 0;
    int pick_next = -1;
    for (std::uint32_t in = 0; in < ni && pick_next == -1; ++in) {
      bool all_bad = true;
      int best = -1;
      for (std::uint32_t out = 0; out < no; ++out) {
        int t = g.at(s, in, out);
        if (!g.safe[static_cast<std::size_t>(t)]) continue;
        if (sol.winning[static_cast<std::size_t>(t)] ||
            sol.removal_round[static_cast<std::size_t>(t)] >= round) {
          all_bad = false;
          break;
        }
        best = t;
      }
      if (all_bad) {
        pick_in = in;
        pick_next = best;
      }
    }
    if (pick_next == -1) break;
    ex.input_sequence.push_back(pick_in);
    s = pick_next;
  }
  ex.input_sequence.push_back(0);
  return ex;
}

// ---------------------------------------------------------------------------
// Controllers: deterministic total Mealy machines extracted from the
// permissive strategy, with soft requirements as a tie-breaking preference
// order and lexicographically least outputs as the final tie-breaker.

struct SoftPreference {
  std::vector<Prop> prefs;  // highest priority first, over outputs and Y-vars
};

struct Controller {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  int num_states = 0;
  int initial = 0;
  // table[state * 2^nin + in] = {output assignment, next state}
  std::vector<std::pair<std::uint32_t, int>> table;
  bool moore = false;

  const std::pair<std::uint32_t, int>& at(int s, std::uint32_t in) const {
    return table[static_cast<std::size_t>(s) * (1u << inputs.size()) + in];
  }
};

namespace detail {

/// Variables of the preference props: plain outputs or Y-prefixed previous
/// cycle values of inputs/outputs.
struct PrefEnv {
  std::vector<std::string> outputs;
  std::vector<std::string> yvars;  // without the Y prefix, resolution order
};

inline PrefEnv pref_env(const SafetyGame& g, const SoftPreference& prefs) {
  PrefEnv env;
  env.outputs = g.outputs;
  std::set<std::string> ins(g.inputs.begin(), g.inputs.end());
  std::set<std::string> outs(g.outputs.begin(), g.outputs.end());
  std::set<std::string> seen;
  for (const auto& p : prefs.prefs) {
    for (const auto& v : prop_vars(p)) {
      if (outs.count(v)) continue;
      if (v.size() > 1 && v[0] == 'Y') {
        std::string base = v.substr(1);
        if ((ins.count(base) || outs.count(base)) && seen.insert(base).second) {
          env.yvars.push_back(base);
          continue;
        }
      }
      throw ApiError("soft requirement references '" + v +
                     "' (must be an output or Y<input/output>)");
    }
  }
  return env;
}

}  // namespace detail

/// Deterministic controller extraction. For each (state, input) the output is
/// chosen from the safe set by the highest-priority satisfied preferences,
/// then by lexicographically least output assignment; the controller is then
/// state-minimized.
inline Controller extract_controller(const SafetyGame& g, const GameSolution& sol,
                                     const SoftPreference& prefs = {}) {
  if (!sol.realizable) throw ApiError("game is unrealizable; no controller exists");
  std::size_t nin = g.inputs.size(), nout = g.outputs.size();
  std::uint32_t ni = 1u << nin, no = 1u << nout;
  detail::PrefEnv env = detail::pref_env(g, prefs);
  // Preference evaluation scope: outputs then Y-vars.
  std::vector<std::string> scope = g.outputs;
  for (const auto& y : env.yvars) scope.push_back("Y" + y);
  VarIndex vi(scope);
  // Resolve Y-var source bit in the (in, out) move of the previous cycle.
  std::vector<int> ybit;
  for (const auto& y : env.yvars) {
    auto iit = std::find(g.inputs.begin(), g.inputs.end(), y);
    if (iit != g.inputs.end()) ybit.push_back(static_cast<int>(iit - g.inputs.begin()));
    else
      ybit.push_back(static_cast<int>(
          nin + (std::find(g.outputs.begin(), g.outputs.end(), y) - g.outputs.begin())));
  }

  auto choose = [&](std::uint32_t mask, std::uint32_t ybits) -> std::uint32_t {
    std::uint32_t best = 0;
    long long best_score = -1;
    for (std::uint32_t out = 0; out < no; ++out) {
      if (!((mask >> out) & 1u)) continue;
      std::uint32_t letter = out;
      for (std::size_t i = 0; i < env.yvars.size(); ++i)
        if ((ybits >> i) & 1u) letter |= 1u << (nout + i);
      long long score = 0;
      for (const auto& p : prefs.prefs)
        score = (score << 1) | (eval_prop(p, vi, letter) ? 1 : 0);
      if (score > best_score ||
          (score == best_score &&
           detail::letter_lex_less(out, best, nout))) {
        best = out;
        best_score = score;
      }
    }
    return best;
  };
  // Moore choice: the output must be safe for every input.
  auto choose_moore = [&](int s, std::uint32_t ybits) -> std::uint32_t {
    std::uint32_t mask = (1u << no) - 1;
    if (no == 32) mask = ~0u;
    std::uint32_t inter = ~0u;
    for (std::uint32_t in = 0; in < ni; ++in)
      inter &= sol.allowed[static_cast<std::size_t>(s) * ni + in];
    (void)mask;
    return choose(inter, ybits);
  };

  struct Key {
    int s;
    std::uint32_t ybits;
    bool operator<(const Key& o) const {
      return s != o.s ? s < o.s : ybits < o.ybits;
    }
  };
  std::map<Key, int> ids;
  std::vector<Key> states;
  auto id_of = [&](Key k) {
    auto [it, fresh] = ids.emplace(k, static_cast<int>(states.size()));
    if (fresh) states.push_back(k);
    return std::make_pair(it->second, fresh);
  };
  Controller ctrl;
  ctrl.inputs = g.inputs;
  ctrl.outputs = g.outputs;
  ctrl.moore = g.moore;
  auto [init, f0] = id_of({g.initial, 0});
  (void)f0;
  ctrl.initial = init;
  std::queue<int> queue;
  queue.push(init);
  std::vector<std::vector<std::pair<std::uint32_t, int>>> rows;
  rows.emplace_back();
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop();
    Key k = states[static_cast<std::size_t>(id)];
    std::vector<std::pair<std::uint32_t, int>> row(ni);
    std::uint32_t moore_out = g.moore ? choose_moore(k.s, k.ybits) : 0;
    for (std::uint32_t in = 0; in < ni; ++in) {
      std::uint32_t out = g.moore
                              ? moore_out
                              : choose(sol.allowed[static_cast<std::size_t>(k.s) * ni + in],
                                       k.ybits);
      int nmon = g.at(k.s, in, out);
      std::uint32_t move = (out << nin) | in;
      std::uint32_t ny = 0;
      for (std::size_t i = 0; i < ybit.size(); ++i)
        if ((move >> ybit[i]) & 1u) ny |= 1u << i;
      auto [nid, fresh] = id_of({nmon, ny});
      if (fresh) {
        rows.emplace_back();
        queue.push(nid);
      }
      row[in] = {out, nid};
    }
    rows[static_cast<std::size_t>(id)] = std::move(row);
  }
  ctrl.num_states = static_cast<int>(states.size());
  ctrl.table.reserve(states.size() * ni);
  for (const auto& row : rows)
    for (const auto& cell : row) ctrl.table.push_back(cell);

  // Mealy minimization by partition refinement on (outputs, successor blocks).
  std::vector<int> block(static_cast<std::size_t>(ctrl.num_states), 0);
  for (;;) {
    std::map<std::vector<std::uint32_t>, int> sig_ids;
    std::vector<int> next(block.size());
    for (int s = 0; s < ctrl.num_states; ++s) {
      std::vector<std::uint32_t> sig;
      sig.push_back(static_cast<std::uint32_t>(block[static_cast<std::size_t>(s)]));
      for (std::uint32_t in = 0; in < ni; ++in) {
        auto [out, t] = ctrl.at(s, in);
        sig.push_back(out);
        sig.push_back(static_cast<std::uint32_t>(block[static_cast<std::size_t>(t)]));
      }
      auto [it, fresh] = sig_ids.emplace(std::move(sig), static_cast<int>(sig_ids.size()));
      (void)fresh;
      next[static_cast<std::size_t>(s)] = it->second;
    }
    bool stable = static_cast<int>(sig_ids.size()) ==
                  *std::max_element(block.begin(), block.end()) + 1;
    block.swap(next);
    if (stable) break;
  }
  int nblocks = *std::max_element(block.begin(), block.end()) + 1;
  if (nblocks != ctrl.num_states) {
    // Quotient with BFS renumbering from the initial block.
    std::vector<int> canon(static_cast<std::size_t>(nblocks), -1);
    std::vector<int> rep(static_cast<std::size_t>(nblocks), -1);
    for (int s = 0; s < ctrl.num_states; ++s)
      if (rep[static_cast<std::size_t>(block[static_cast<std::size_t>(s)])] == -1)
        rep[static_cast<std::size_t>(block[static_cast<std::size_t>(s)])] = s;
    std::queue<int> bq;
    int binit = block[static_cast<std::size_t>(ctrl.initial)];
    canon[static_cast<std::size_t>(binit)] = 0;
    bq.push(binit);
    std::vector<int> order{binit};
    while (!bq.empty()) {
      int b = bq.front();
      bq.pop();
      int s = rep[static_cast<std::size_t>(b)];
      for (std::uint32_t in = 0; in < ni; ++in) {
        int tb = block[static_cast<std::size_t>(ctrl.at(s, in).second)];
        if (canon[static_cast<std::size_t>(tb)] == -1) {
          canon[static_cast<std::size_t>(tb)] = static_cast<int>(order.size());
          order.push_back(tb);
          bq.push(tb);
        }
      }
    }
    Controller min;
    min.inputs = ctrl.inputs;
    min.outputs = ctrl.outputs;
    min.moore = ctrl.moore;
    min.num_states = nblocks;
    min.initial = 0;
    min.table.resize(static_cast<std::size_t>(nblocks) * ni);
    for (int i = 0; i < nblocks; ++i) {
      int s = rep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      for (std::uint32_t in = 0; in < ni; ++in) {
        auto [out, t] = ctrl.at(s, in);
        min.table[static_cast<std::size_t>(i) * ni + in] = {
            out, canon[static_cast<std::size_t>(block[static_cast<std::size_t>(t)])]};
      }
    }
    return min;
  }
  return ctrl;
}

// ---------------------------------------------------------------------------
// Controller serialization and the closed-loop view as a SystemModel.

inline nlohmann::ordered_json controller_to_json(const Controller& c) {
  nlohmann::ordered_json j;
  j["kind"] = c.moore ? "moore-controller" : "mealy-controller";
  j["inputs"] = c.inputs;
  j["outputs"] = c.outputs;
  j["states"] = c.num_states;
  j["initial"] = c.initial;
  j["arms"] = nlohmann::ordered_json::array();
  std::uint32_t ni = 1u << c.inputs.size();
  for (int s = 0; s < c.num_states; ++s)
    for (std::uint32_t in = 0; in < ni; ++in) {
      auto [out, t] = c.at(s, in);
      nlohmann::ordered_json arm;
      arm["state"] = s;
      nlohmann::ordered_json jin;
      for (std::size_t i = 0; i < c.inputs.size(); ++i)
        jin[c.inputs[i]] = static_cast<int>((in >> i) & 1u);
      arm["input"] = jin;
      nlohmann::ordered_json jout;
      for (std::size_t i = 0; i < c.outputs.size(); ++i)
        jout[c.outputs[i]] = static_cast<int>((out >> i) & 1u);
      arm["outputs"] = jout;
      arm["next"] = t;
      j["arms"].push_back(arm);
    }
  return j;
}

inline Controller controller_from_json(const nlohmann::json& j) {
  Controller c;
  c.moore = j.value("kind", "mealy-controller") == std::string("moore-controller");
  c.inputs = j.at("inputs").get<std::vector<std::string>>();
  c.outputs = j.at("outputs").get<std::vector<std::string>>();
  c.num_states = j.at("states").get<int>();
  c.initial = j.at("initial").get<int>();
  std::uint32_t ni = 1u << c.inputs.size();
  c.table.assign(static_cast<std::size_t>(c.num_states) * ni, {0, -1});
  for (const auto& arm : j.at("arms")) {
    int s = arm.at("state").get<int>();
    std::uint32_t in = 0, out = 0;
    for (std::size_t i = 0; i < c.inputs.size(); ++i)
      if (arm.at("input").at(c.inputs[i]).get<int>()) in |= 1u << i;
    for (std::size_t i = 0; i < c.outputs.size(); ++i)
      if (arm.at("outputs").at(c.outputs[i]).get<int>()) out |= 1u << i;
    c.table[static_cast<std::size_t>(s) * ni + in] = {out, arm.at("next").get<int>()};
  }
  for (const auto& [out, t] : c.table)
    if (t < 0 || t >= c.num_states) throw ApiError("controller table is not total");
  return c;
}

/// View a controller as a synchronous system model (one latch per state bit)
/// for closed-loop model checking.
inline SystemModel controller_to_system_model(const Controller& c) {
  SystemModel m;
  m.inputs = c.inputs;
  int bits = 1;
  while ((1 << bits) < c.num_states) ++bits;
  std::uint32_t ni = 1u << c.inputs.size();
  auto state_minterm = [&](int s) {
    std::vector<Prop> lits;
    for (int b = 0; b < bits; ++b) {
      Prop v = p_var("cstate" + std::to_string(b));
      lits.push_back(((s >> b) & 1) ? v : p_not(v));
    }
    return p_and_all(lits);
  };
  auto input_minterm = [&](std::uint32_t in) {
    std::vector<Prop> lits;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) {
      Prop v = p_var(c.inputs[i]);
      lits.push_back(((in >> i) & 1u) ? v : p_not(v));
    }
    return lits.empty() ? p_true() : p_and_all(lits);
  };
  // The initial state must be encoded as all-false latches; renumber by
  // swapping if needed.
  auto enc = [&](int s) {
    if (s == c.initial) return 0;
    if (s == 0) return c.initial;
    return s;
  };
  for (int b = 0; b < bits; ++b) {
    std::vector<Prop> cases;
    for (int s = 0; s < c.num_states; ++s)
      for (std::uint32_t in = 0; in < ni; ++in) {
        auto [out, t] = c.at(s, in);
        (void)out;
        if ((enc(t) >> b) & 1)
          cases.push_back(p_and(state_minterm(enc(s)), input_minterm(in)));
      }
    Latch l;
    l.name = "cstate" + std::to_string(b);
    l.init = false;
    l.next = cases.empty() ? p_false() : p_or_all(cases);
    m.latches.push_back(std::move(l));
  }
  for (std::size_t o = 0; o < c.outputs.size(); ++o) {
    std::vector<Prop> cases;
    for (int s = 0; s < c.num_states; ++s)
      for (std::uint32_t in = 0; in < ni; ++in) {
        auto [out, t] = c.at(s, in);
        (void)t;
        if ((out >> o) & 1u)
          cases.push_back(p_and(state_minterm(enc(s)), input_minterm(in)));
      }
    OutputDef od;
    od.name = c.outputs[o];
    od.def = cases.empty() ? p_false() : p_or_all(cases);
    m.outputs.push_back(std::move(od));
  }
  return m;
}

}  // namespace tdspec
