#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tdspec/errors.hpp"

namespace tdspec {

/// Non-empty finite word: one truth assignment to the declared variables per
/// position. Bit i of a letter corresponds to vars[i].
struct Word {
  std::vector<std::string> vars;
  std::vector<std::uint32_t> letters;

  int last() const { return static_cast<int>(letters.size()) - 1; }
  std::size_t length() const { return letters.size(); }
  bool holds(int var_idx, int pos) const {
    return (letters[static_cast<std::size_t>(pos)] >> var_idx) & 1u;
  }
};

/// Observation interval [b,e] with 0 <= b <= e <= last position.
struct Interval {
  int b = 0;
  int e = 0;
};

inline void check_word(const Word& w) {
  if (w.letters.empty()) throw ApiError("words must be non-empty");
  if (w.vars.size() > 31) throw ApiError("too many variables in a word");
}

inline void check_interval(const Word& w, const Interval& iv) {
  if (iv.b < 0 || iv.b > iv.e || iv.e > w.last())
    throw ApiError("interval [" + std::to_string(iv.b) + "," + std::to_string(iv.e) +
                   "] out of range for word of length " + std::to_string(w.length()));
}

inline int var_index(const Word& w, const std::string& name) {
  for (std::size_t i = 0; i < w.vars.size(); ++i)
    if (w.vars[i] == name) return static_cast<int>(i);
  return -1;
}

/// Trace text format: a header line with the comma-separated variable order,
/// then one line per time step of `var=0|1` pairs. Every declared variable
/// must be assigned on every line.
inline Word parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Word w;
  int lineno = 0;
  // Header.
  while (std::getline(in, line)) {
    ++lineno;
    std::string t;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty() || t.rfind("//", 0) == 0) continue;
    std::istringstream hs(t);
    std::string name;
    while (std::getline(hs, name, ',')) {
      if (name.empty()) throw ParseError("empty variable name in trace header", lineno, 1);
      w.vars.push_back(name);
    }
    break;
  }
  if (w.vars.empty()) throw ParseError("missing trace header", lineno, 1);
  while (std::getline(in, line)) {
    ++lineno;
    std::string t;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty() || t.rfind("//", 0) == 0) continue;
    std::uint32_t letter = 0;
    std::vector<bool> seen(w.vars.size(), false);
    std::istringstream ls(t);
    std::string item;
    while (std::getline(ls, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ParseError("expected var=0|1 in trace line", lineno, 1);
      std::string name = item.substr(0, eq);
      std::string val = item.substr(eq + 1);
      int idx = var_index(w, name);
      if (idx < 0) throw ParseError("unknown variable '" + name + "' in trace", lineno, 1);
      if (seen[static_cast<std::size_t>(idx)])
        throw ParseError("duplicate variable '" + name + "' in trace line", lineno, 1);
      seen[static_cast<std::size_t>(idx)] = true;
      if (val == "1") letter |= 1u << idx;
      else if (val != "0")
        throw ParseError("bad value for '" + name + "' (want 0 or 1)", lineno, 1);
    }
    for (std::size_t i = 0; i < w.vars.size(); ++i)
      if (!seen[i])
        throw ParseError("missing variable '" + w.vars[i] + "' in trace line", lineno, 1);
    w.letters.push_back(letter);
  }
  check_word(w);
  return w;
}

inline std::string print_trace(const Word& w) {
  std::string out;
  for (std::size_t i = 0; i < w.vars.size(); ++i) {
    if (i) out += ",";
    out += w.vars[i];
  }
  out += "\n";
  for (std::uint32_t letter : w.letters) {
    for (std::size_t i = 0; i < w.vars.size(); ++i) {
      if (i) out += ",";
      out += w.vars[i] + "=" + (((letter >> i) & 1u) ? "1" : "0");
    }
    out += "\n";
  }
  return out;
}

}  // namespace tdspec
