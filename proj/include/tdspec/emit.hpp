#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "tdspec/analysis.hpp"
#include "tdspec/automata.hpp"
#include "tdspec/synth.hpp"

namespace tdspec {

struct EmitTarget {
  enum class Format { Json, SmvObserver, Dot } format = Format::Json;
  enum class Artifact { Monitor, Controller } artifact = Artifact::Monitor;
};

namespace detail {

// SMV-flavoured propositional syntax: &, |, !, ->, <->, TRUE, FALSE.
inline void print_prop_smv_rec(const Prop& p, int parent, std::string& out) {
  int prec = prop_prec(p->kind);
  bool paren = prec < parent;
  if (paren) out += "(";
  switch (p->kind) {
    case PKind::False: out += "FALSE"; break;
    case PKind::True: out += "TRUE"; break;
    case PKind::Var: out += p->var; break;
    case PKind::Not:
      out += "!";
      print_prop_smv_rec(p->lhs, 4, out);
      break;
    case PKind::And:
      print_prop_smv_rec(p->lhs, 3, out);
      out += " & ";
      print_prop_smv_rec(p->rhs, 4, out);
      break;
    case PKind::Or:
      print_prop_smv_rec(p->lhs, 2, out);
      out += " | ";
      print_prop_smv_rec(p->rhs, 3, out);
      break;
    case PKind::Implies:
      print_prop_smv_rec(p->lhs, 2, out);
      out += " -> ";
      print_prop_smv_rec(p->rhs, 1, out);
      break;
    case PKind::Iff:
      print_prop_smv_rec(p->lhs, 0, out);
      out += " <-> ";
      print_prop_smv_rec(p->rhs, 1, out);
      break;
  }
  if (paren) out += ")";
}

inline std::string print_prop_smv(const Prop& p) {
  std::string out;
  print_prop_smv_rec(p, 0, out);
  return out;
}

/// Translate the SMV-flavoured syntax back into the surface grammar; used by
/// the built-in observer interpreter.
inline std::string smv_prop_to_surface(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 3, "<->") == 0) {
      out += "<=>";
      i += 2;
    } else if (s.compare(i, 2, "->") == 0) {
      out += "=>";
      ++i;
    } else if (s[i] == '&') {
      out += "&&";
    } else if (s[i] == '|') {
      out += "||";
    } else if (s.compare(i, 4, "TRUE") == 0 &&
               (i + 4 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 4])))) {
      out += "true";
      i += 3;
    } else if (s.compare(i, 5, "FALSE") == 0 &&
               (i + 5 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 5])))) {
      out += "false";
      i += 4;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace detail

/// SMV-style observer module: one enumerated state variable, next-state cases
/// per (state x guard minterm), and an ok output that is true exactly while
/// every prefix so far satisfies the monitored property.
inline std::string emit_smv_observer(const Dfa& d, const std::string& name = "monitor") {
  detail::DenseDfa dd = detail::to_dense(d);  // also checks total determinism
  std::size_t ncls = dd.classes.reps.size();
  std::ostringstream out;
  out << "MODULE " << name << "(";
  for (std::size_t i = 0; i < d.alphabet.size(); ++i) {
    if (i) out << ", ";
    out << d.alphabet[i];
  }
  out << ")\n";
  out << "VAR\n  state : 0.." << (d.num_states - 1) << ";\n";
  out << "DEFINE\n";
  out << "  next_state :=\n    case\n";
  for (int s = 0; s < d.num_states; ++s) {
    for (std::size_t c = 0; c < ncls; ++c) {
      Prop guard = detail::classes_guard(dd.classes, {static_cast<int>(c)});
      out << "      state = " << s << " & (" << detail::print_prop_smv(guard)
          << ") : " << dd.at(s, static_cast<int>(c)) << ";\n";
    }
  }
  out << "      TRUE : " << d.initial << ";\n";
  out << "    esac;\n";
  bool all = true, none = true;
  for (int s = 0; s < d.num_states; ++s) {
    if (d.accepting[static_cast<std::size_t>(s)]) none = false;
    else all = false;
  }
  if (all) {
    out << "  ok := TRUE;\n";
  } else if (none) {
    out << "  ok := FALSE;\n";
  } else {
    out << "  ok := next_state in {";
    bool first = true;
    for (int s = 0; s < d.num_states; ++s) {
      if (!d.accepting[static_cast<std::size_t>(s)]) continue;
      if (!first) out << ", ";
      out << s;
      first = false;
    }
    out << "};\n";
  }
  out << "ASSIGN\n";
  out << "  init(state) := " << d.initial << ";\n";
  out << "  next(state) := next_state;\n";
  return out.str();
}

inline std::string emit_dot_monitor(const Dfa& d) {
  std::ostringstream out;
  out << "digraph monitor {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __init [shape=point];\n";
  for (int s = 0; s < d.num_states; ++s)
    if (d.accepting[static_cast<std::size_t>(s)])
      out << "  s" << s << " [shape=doublecircle];\n";
  out << "  __init -> s" << d.initial << ";\n";
  for (const auto& e : d.edges)
    out << "  s" << e.from << " -> s" << e.to << " [label=\"" << print_prop(e.guard)
        << "\"];\n";
  out << "}\n";
  return out.str();
}

inline std::string emit_dot_controller(const Controller& c) {
  std::ostringstream out;
  out << "digraph controller {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __init [shape=point];\n  __init -> s" << c.initial << ";\n";
  std::uint32_t ni = 1u << c.inputs.size();
  for (int s = 0; s < c.num_states; ++s)
    for (std::uint32_t in = 0; in < ni; ++in) {
      auto [outbits, t] = c.at(s, in);
      out << "  s" << s << " -> s" << t << " [label=\"";
      for (std::size_t i = 0; i < c.inputs.size(); ++i) {
        if (i) out << ",";
        out << (((in >> i) & 1u) ? "" : "!") << c.inputs[i];
      }
      out << " / ";
      for (std::size_t i = 0; i < c.outputs.size(); ++i) {
        if (i) out << ",";
        out << (((outbits >> i) & 1u) ? "" : "!") << c.outputs[i];
      }
      out << "\"];\n";
    }
  out << "}\n";
  return out.str();
}

inline std::string emit_monitor(const Dfa& d, EmitTarget::Format format) {
  switch (format) {
    case EmitTarget::Format::Json: return dfa_to_json(d).dump(2) + "\n";
    case EmitTarget::Format::SmvObserver: return emit_smv_observer(d);
    case EmitTarget::Format::Dot: return emit_dot_monitor(d);
  }
  throw ApiError("unknown emit format");
}

inline std::string emit_controller(const Controller& c, EmitTarget::Format format) {
  switch (format) {
    case EmitTarget::Format::Json: return controller_to_json(c).dump(2) + "\n";
    case EmitTarget::Format::SmvObserver:
      throw ApiError("smv-observer output applies to monitors only");
    case EmitTarget::Format::Dot: return emit_dot_controller(c);
  }
  throw ApiError("unknown emit format");
}

// ---------------------------------------------------------------------------
// Interpreter over the emitted observer text. Parses the case table back out
// of the module and replays traces; used to validate emission against
// run_trace without an external model checker.

class ObserverSim {
 public:
  explicit ObserverSim(const std::string& smv_text) {
    std::istringstream in(smv_text);
    std::string line;
    while (std::getline(in, line)) {
      auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t");
        std::size_t b = s.find_last_not_of(" \t;");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      std::string t = trim(line);
      if (t.rfind("MODULE", 0) == 0) {
        auto l = t.find('('), r = t.rfind(')');
        std::string params = t.substr(l + 1, r - l - 1);
        std::istringstream ps(params);
        std::string v;
        while (std::getline(ps, v, ',')) vars_.push_back(trim(v));
      } else if (t.rfind("state = ", 0) == 0) {
        // state = S & (guard) : T
        std::size_t amp = t.find('&');
        int from = std::stoi(t.substr(8, amp - 8));
        std::size_t colon = t.rfind(':');
        std::string guard = trim(t.substr(amp + 1, colon - amp - 1));
        if (guard.front() == '(') guard = guard.substr(1, guard.size() - 2);
        int to = std::stoi(t.substr(colon + 1));
        arms_.push_back({from, parse_prop_any(detail::smv_prop_to_surface(guard)), to});
      } else if (t.rfind("ok := TRUE", 0) == 0) {
        all_ok_ = true;
      } else if (t.rfind("ok := FALSE", 0) == 0) {
        none_ok_ = true;
      } else if (t.rfind("ok := next_state in {", 0) == 0) {
        std::string set = t.substr(t.find('{') + 1);
        set = set.substr(0, set.find('}'));
        std::istringstream ss(set);
        std::string item;
        while (std::getline(ss, item, ',')) ok_states_.insert(std::stoi(trim(item)));
      } else if (t.rfind("init(state) :=", 0) == 0) {
        init_ = std::stoi(trim(t.substr(t.find(":=") + 2)));
      }
    }
  }

  /// ok bit per step of the trace.
  std::vector<bool> run(const Word& trace) const {
    std::vector<int> proj;
    for (const auto& v : vars_) {
      int idx = var_index(trace, v);
      if (idx < 0) throw ApiError("trace is missing variable '" + v + "'");
      proj.push_back(idx);
    }
    VarIndex vi(vars_);
    std::vector<bool> ok;
    int s = init_;
    for (std::uint32_t raw : trace.letters) {
      std::uint32_t letter = 0;
      for (std::size_t i = 0; i < proj.size(); ++i)
        if ((raw >> proj[i]) & 1u) letter |= 1u << i;
      int next = -1;
      for (const auto& arm : arms_) {
        if (arm.from != s) continue;
        if (eval_prop(arm.guard, vi, letter)) {
          next = arm.to;
          break;
        }
      }
      if (next == -1) throw ApiError("observer case table is not total");
      s = next;
      ok.push_back(all_ok_ ? true : none_ok_ ? false : ok_states_.count(s) > 0);
    }
    return ok;
  }

 private:
  struct Arm {
    int from;
    Prop guard;
    int to;
  };
  std::vector<std::string> vars_;
  std::vector<Arm> arms_;
  std::set<int> ok_states_;
  bool all_ok_ = false;
  bool none_ok_ = false;
  int init_ = 0;
};

}  // namespace tdspec
