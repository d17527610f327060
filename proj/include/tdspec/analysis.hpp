#pragma once

#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "tdspec/automata.hpp"
#include "tdspec/compile.hpp"
#include "tdspec/word.hpp"

namespace tdspec {

enum class VerdictKind {
  Sat,
  Unsat,
  Valid,
  Invalid,
  Equivalent,
  Inequivalent,
  Holds,
  Fails,
};

inline const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Sat: return "sat";
    case VerdictKind::Unsat: return "unsat";
    case VerdictKind::Valid: return "valid";
    case VerdictKind::Invalid: return "invalid";
    case VerdictKind::Equivalent: return "equivalent";
    case VerdictKind::Inequivalent: return "inequivalent";
    case VerdictKind::Holds: return "holds";
    case VerdictKind::Fails: return "fails";
  }
  return "?";
}

/// A witness accompanies exactly the sat/invalid/inequivalent/fails verdicts.
struct Verdict {
  VerdictKind kind;
  std::optional<Word> witness;
  std::optional<std::size_t> failure_position;
};

inline Verdict check_sat(const Dfa& d) {
  auto w = shortest_word(d);
  if (!w) return {VerdictKind::Unsat, std::nullopt, std::nullopt};
  return {VerdictKind::Sat, std::move(w), std::nullopt};
}

inline Verdict check_valid(const Dfa& d) {
  Dfa neg = complement(d);
  auto w = shortest_word(neg);
  if (!w) return {VerdictKind::Valid, std::nullopt, std::nullopt};
  return {VerdictKind::Invalid, std::move(w), std::nullopt};
}

inline Verdict check_equiv(const Dfa& a, const Dfa& b) {
  Dfa only_a = product(a, complement(b), ProductMode::And);
  Dfa only_b = product(b, complement(a), ProductMode::And);
  auto wa = shortest_word(only_a);
  auto wb = shortest_word(only_b);
  if (!wa && !wb) return {VerdictKind::Equivalent, std::nullopt, std::nullopt};
  std::optional<Word> w;
  if (wa && (!wb || wa->length() <= wb->length())) w = std::move(wa);
  else w = std::move(wb);
  return {VerdictKind::Inequivalent, std::move(w), std::nullopt};
}

/// Monitor run: the trace violates as soon as some prefix is rejected;
/// failure_position is the index of the first offending step.
inline Verdict run_trace(const Dfa& dfa, const Word& trace) {
  check_word(trace);
  // The trace may carry extra variables; every automaton variable must be
  // present in the trace header.
  std::vector<int> proj;
  for (const auto& v : dfa.alphabet) {
    int idx = var_index(trace, v);
    if (idx < 0) throw ApiError("trace is missing variable '" + v + "'");
    proj.push_back(idx);
  }
  VarIndex vi(dfa.alphabet);
  int s = dfa.initial;
  for (std::size_t t = 0; t < trace.letters.size(); ++t) {
    std::uint32_t letter = 0;
    for (std::size_t i = 0; i < proj.size(); ++i)
      if ((trace.letters[t] >> proj[i]) & 1u) letter |= 1u << i;
    int next = -1;
    for (const auto& e : dfa.edges) {
      if (e.from != s) continue;
      if (eval_prop(e.guard, vi, letter)) {
        next = e.to;
        break;
      }
    }
    if (next == -1) throw ApiError("automaton is not total");
    s = next;
    if (!dfa.accepting[static_cast<std::size_t>(s)]) {
      Word prefix;
      prefix.vars = trace.vars;
      prefix.letters.assign(trace.letters.begin(),
                            trace.letters.begin() + static_cast<long>(t) + 1);
      return {VerdictKind::Fails, std::move(prefix), t};
    }
  }
  return {VerdictKind::Holds, std::nullopt, std::nullopt};
}

/// Structural prefix-closedness: no reachable rejecting state can reach an
/// accepting state again.
inline bool is_prefix_closed(const Dfa& d) {
  detail::DenseDfa dd = detail::to_dense(d);
  std::size_t ncls = dd.classes.reps.size();
  std::vector<bool> reach(static_cast<std::size_t>(dd.num_states), false);
  std::queue<int> queue;
  reach[static_cast<std::size_t>(dd.initial)] = true;
  queue.push(dd.initial);
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop();
    for (std::size_t c = 0; c < ncls; ++c) {
      int t = dd.at(s, static_cast<int>(c));
      if (!reach[static_cast<std::size_t>(t)]) {
        reach[static_cast<std::size_t>(t)] = true;
        queue.push(t);
      }
    }
  }
  for (int s = 0; s < dd.num_states; ++s) {
    if (!reach[static_cast<std::size_t>(s)] || dd.accepting[static_cast<std::size_t>(s)] ||
        s == dd.initial)
      continue;
    // Forward search from the rejecting state.
    std::vector<bool> seen(static_cast<std::size_t>(dd.num_states), false);
    std::queue<int> q2;
    seen[static_cast<std::size_t>(s)] = true;
    q2.push(s);
    while (!q2.empty()) {
      int x = q2.front();
      q2.pop();
      if (dd.accepting[static_cast<std::size_t>(x)]) return false;
      for (std::size_t c = 0; c < ncls; ++c) {
        int t = dd.at(x, static_cast<int>(c));
        if (!seen[static_cast<std::size_t>(t)]) {
          seen[static_cast<std::size_t>(t)] = true;
          q2.push(t);
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Synchronous system models: latches with next-state functions plus
// combinational outputs over inputs and latches.

struct Latch {
  std::string name;
  bool init = false;
  Prop next;
};

struct OutputDef {
  std::string name;
  Prop def;
};

struct SystemModel {
  std::vector<std::string> inputs;
  std::vector<Latch> latches;
  std::vector<OutputDef> outputs;
};

inline void check_model(const SystemModel& m) {
  std::set<std::string> scope(m.inputs.begin(), m.inputs.end());
  for (const auto& l : m.latches) scope.insert(l.name);
  auto check_scope = [&](const Prop& p, const std::string& what) {
    for (const auto& v : prop_vars(p))
      if (!scope.count(v))
        throw ApiError(what + " references '" + v +
                       "' which is neither an input nor a latch");
  };
  for (const auto& l : m.latches) check_scope(l.next, "latch '" + l.name + "'");
  for (const auto& o : m.outputs) check_scope(o.def, "output '" + o.name + "'");
}

inline SystemModel model_from_json(const nlohmann::json& j) {
  SystemModel m;
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  for (const auto& jl : j.at("latches")) {
    Latch l;
    l.name = jl.at("name").get<std::string>();
    l.init = jl.at("init").get<bool>();
    l.next = parse_prop_any(jl.at("next").get<std::string>());
    m.latches.push_back(std::move(l));
  }
  for (const auto& jo : j.at("outputs")) {
    OutputDef o;
    o.name = jo.at("name").get<std::string>();
    o.def = parse_prop_any(jo.at("def").get<std::string>());
    m.outputs.push_back(std::move(o));
  }
  check_model(m);
  return m;
}

inline nlohmann::ordered_json model_to_json(const SystemModel& m) {
  nlohmann::ordered_json j;
  j["inputs"] = m.inputs;
  j["latches"] = nlohmann::ordered_json::array();
  for (const auto& l : m.latches) {
    nlohmann::ordered_json jl;
    jl["name"] = l.name;
    jl["init"] = l.init;
    jl["next"] = print_prop(l.next);
    j["latches"].push_back(jl);
  }
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : m.outputs) {
    nlohmann::ordered_json jo;
    jo["name"] = o.name;
    jo["def"] = print_prop(o.def);
    j["outputs"].push_back(jo);
  }
  return j;
}

namespace detail {

/// Compiled evaluator for one synchronous step of a model.
struct ModelStepper {
  explicit ModelStepper(const SystemModel& m) : model(m) {
    check_model(m);
    std::vector<std::string> scope = m.inputs;
    for (const auto& l : m.latches) scope.push_back(l.name);
    vi = VarIndex(scope);
    nin = m.inputs.size();
  }

  std::uint64_t scope_word(std::uint32_t input_bits, std::uint64_t latch_bits) const {
    return static_cast<std::uint64_t>(input_bits) | (latch_bits << nin);
  }

  std::uint32_t outputs(std::uint32_t input_bits, std::uint64_t latch_bits) const {
    std::uint32_t env = static_cast<std::uint32_t>(scope_word(input_bits, latch_bits));
    std::uint32_t out = 0;
    for (std::size_t i = 0; i < model.outputs.size(); ++i)
      if (eval_prop(model.outputs[i].def, vi, env)) out |= 1u << i;
    return out;
  }

  std::uint64_t next_latches(std::uint32_t input_bits, std::uint64_t latch_bits) const {
    std::uint32_t env = static_cast<std::uint32_t>(scope_word(input_bits, latch_bits));
    std::uint64_t next = 0;
    for (std::size_t i = 0; i < model.latches.size(); ++i)
      if (eval_prop(model.latches[i].next, vi, env)) next |= 1ULL << i;
    return next;
  }

  std::uint64_t initial_latches() const {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < model.latches.size(); ++i)
      if (model.latches[i].init) bits |= 1ULL << i;
    return bits;
  }

  const SystemModel& model;
  VarIndex vi;
  std::size_t nin = 0;
};

}  // namespace detail

/// Product reachability of the model with the requirement monitor: holds iff
/// no reachable prefix drives the monitor into a rejecting state. Fails with
/// a shortest counterexample trace over inputs and outputs.
inline Verdict model_check(const SystemModel& m, const Dfa& req,
                           std::size_t product_cap = 10000000) {
  detail::ModelStepper stepper(m);
  // The requirement alphabet must be covered by the model's inputs/outputs.
  std::map<std::string, std::pair<bool, int>> source;  // var -> (is_input, idx)
  for (std::size_t i = 0; i < m.inputs.size(); ++i)
    source[m.inputs[i]] = {true, static_cast<int>(i)};
  for (std::size_t i = 0; i < m.outputs.size(); ++i)
    source[m.outputs[i].name] = {false, static_cast<int>(i)};
  std::vector<std::pair<bool, int>> req_src;
  for (const auto& v : req.alphabet) {
    auto it = source.find(v);
    if (it == source.end())
      throw ApiError("requirement variable '" + v + "' is not an input or output");
    req_src.push_back(it->second);
  }
  DfaRunner runner(req);
  struct Key {
    std::uint64_t latches;
    int dfa_state;
    bool operator<(const Key& o) const {
      return latches != o.latches ? latches < o.latches : dfa_state < o.dfa_state;
    }
  };
  std::map<Key, int> ids;
  std::vector<Key> states;
  struct Parent {
    int id = -1;
    std::uint32_t input = 0;
  };
  std::vector<Parent> parents;
  auto id_of = [&](Key k, int parent, std::uint32_t input) {
    auto [it, fresh] = ids.emplace(k, static_cast<int>(states.size()));
    if (fresh) {
      states.push_back(k);
      parents.push_back({parent, input});
    }
    return std::make_pair(it->second, fresh);
  };
  Key init{stepper.initial_latches(), runner.initial()};
  std::queue<int> queue;
  auto [iid, ifresh] = id_of(init, -1, 0);
  (void)ifresh;
  queue.push(iid);
  std::uint32_t ninputs = 1u << m.inputs.size();
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop();
    Key cur = states[static_cast<std::size_t>(id)];
    for (std::uint32_t in = 0; in < ninputs; ++in) {
      std::uint32_t out = stepper.outputs(in, cur.latches);
      std::uint32_t letter = 0;
      for (std::size_t i = 0; i < req_src.size(); ++i) {
        auto [is_input, idx] = req_src[i];
        bool bit = is_input ? ((in >> idx) & 1u) : ((out >> idx) & 1u);
        if (bit) letter |= 1u << i;
      }
      int nd = runner.step(cur.dfa_state, letter);
      Key next{stepper.next_latches(in, cur.latches), nd};
      auto [nid, fresh] = id_of(next, id, in);
      if (!runner.accepting(nd)) {
        // Reconstruct the input sequence, then replay for the full trace.
        std::vector<std::uint32_t> ins;
        ins.push_back(in);
        for (int p = id; parents[static_cast<std::size_t>(p)].id != -1;
             p = parents[static_cast<std::size_t>(p)].id)
          ins.push_back(parents[static_cast<std::size_t>(p)].input);
        std::reverse(ins.begin(), ins.end());
        Word trace;
        trace.vars = m.inputs;
        for (const auto& o : m.outputs) trace.vars.push_back(o.name);
        std::uint64_t latches = stepper.initial_latches();
        for (std::uint32_t step_in : ins) {
          std::uint32_t step_out = stepper.outputs(step_in, latches);
          trace.letters.push_back(step_in |
                                  (step_out << m.inputs.size()));
          latches = stepper.next_latches(step_in, latches);
        }
        return {VerdictKind::Fails, std::move(trace), ins.size() - 1};
      }
      if (fresh) {
        if (states.size() > product_cap)
          throw CapExceededError("model-check product", states.size());
        queue.push(nid);
      }
    }
  }
  return {VerdictKind::Holds, std::nullopt, std::nullopt};
}

}  // namespace tdspec
