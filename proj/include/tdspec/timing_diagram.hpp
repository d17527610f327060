#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdspec/secenl.hpp"
#include "tdspec/semantics.hpp"

#include "json.hpp"

namespace tdspec {

enum class WaveSymbol { Low, High, DontCare2, DontCareX };

struct WaveCell {
  std::vector<std::string> markers;  // nominals anchored at this cell's start
  WaveSymbol symbol = WaveSymbol::Low;
  bool stutter = false;  // the '|' suffix
};

struct Waveform {
  std::vector<WaveCell> cells;
};

/// Interval bound with optionally open or missing ends. Missing ends drop the
/// corresponding comparison; distances are naturals, so ordering a-before-b is
/// always implied.
struct SyncBound {
  std::optional<long long> lo;
  bool lo_strict = false;
  std::optional<long long> hi;
  bool hi_strict = false;
};

struct SyncConstraint {
  std::string a;
  std::string b;
  SyncBound bound;
};

struct DiagramRow {
  std::string label;   // as written; empty for @null rows
  Prop signal;         // null for @null rows
  Waveform wave;
};

struct TimingDiagram {
  std::vector<DiagramRow> rows;
  std::vector<SyncConstraint> constraints;
  std::vector<std::string> theta;  // union of markers, sorted
};

// ---------------------------------------------------------------------------
// Waveform parsing: symbols 0 1 2 x with optional '|', markers as `name:`
// prefixes binding the next symbol.

inline Waveform parse_waveform(const std::string& text) {
  Waveform w;
  std::vector<std::string> pending;
  std::set<std::string> seen;
  std::size_t i = 0;
  auto symbol_cell = [&](WaveSymbol s) {
    WaveCell cell;
    cell.markers = pending;
    pending.clear();
    cell.symbol = s;
    if (i < text.size() && text[i] == '|') {
      cell.stutter = true;
      ++i;
    }
    w.cells.push_back(std::move(cell));
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '0' || c == '1' || c == '2') {
      ++i;
      symbol_cell(c == '0' ? WaveSymbol::Low
                           : c == '1' ? WaveSymbol::High : WaveSymbol::DontCare2);
      continue;
    }
    if (c == 'x') {
      // Always a don't-care cell; marker names must not begin with 'x'.
      ++i;
      symbol_cell(WaveSymbol::DontCareX);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      if (j < text.size() && text[j] == ':') {
        std::string name = text.substr(i, j - i);
        if (!seen.insert(name).second)
          throw ParseError("duplicate nominal '" + name + "' in waveform", 1,
                           static_cast<int>(i) + 1);
        pending.push_back(name);
        i = j + 1;
        continue;
      }
      throw ParseError("unknown waveform symbol '" + std::string(1, c) + "'", 1,
                       static_cast<int>(i) + 1);
    }
    throw ParseError("unknown waveform symbol '" + std::string(1, c) + "'", 1,
                     static_cast<int>(i) + 1);
  }
  if (!pending.empty())
    throw ParseError("dangling nominal marker '" + pending.back() + "'", 1,
                     static_cast<int>(i));
  if (w.cells.empty()) throw ParseError("empty waveform", 1, 1);
  return w;
}

// ---------------------------------------------------------------------------
// Diagram assembly and validation.

inline void check_diagram(const TimingDiagram& t) {
  // Nominals are unique within each waveform but may be shared across
  // waveforms: that is how rows synchronize.
  std::set<std::string> markers;
  for (const auto& row : t.rows) {
    std::set<std::string> in_row;
    for (const auto& cell : row.wave.cells)
      for (const auto& m : cell.markers) {
        if (!in_row.insert(m).second)
          throw ApiError("nominal '" + m + "' appears more than once in one waveform");
        markers.insert(m);
      }
  }
  for (const auto& c : t.constraints) {
    if (!markers.count(c.a))
      throw ApiError("constraint references unknown nominal '" + c.a + "'");
    if (!markers.count(c.b))
      throw ApiError("constraint references unknown nominal '" + c.b + "'");
    if (c.bound.lo && c.bound.hi && *c.bound.lo > *c.bound.hi)
      throw ApiError("constraint bound has l > r");
  }
}

inline TimingDiagram make_diagram(std::vector<DiagramRow> rows,
                                  std::vector<SyncConstraint> constraints) {
  TimingDiagram t;
  t.rows = std::move(rows);
  t.constraints = std::move(constraints);
  std::set<std::string> markers;
  for (const auto& row : t.rows)
    for (const auto& cell : row.wave.cells)
      for (const auto& m : cell.markers) markers.insert(m);
  t.theta.assign(markers.begin(), markers.end());
  check_diagram(t);
  return t;
}

/// Parse the body of a td block: wavelines (`label: cells;`, `@null: cells;`)
/// followed by synclines (`@sync: (a, b, bound);`). The full block wrapper
/// (`td name(params) {...}`) is handled by the spec-file parser.
inline TimingDiagram parse_td_block(const std::string& text,
                                    const std::set<std::string>& sigma,
                                    const std::map<std::string, long long>* consts = nullptr);

namespace detail {

inline std::optional<long long> sync_value(Lexer& lx,
                                           const std::map<std::string, long long>* consts) {
  if (lx.kind() == Tok::Nat) return lx.next().value;
  if (lx.kind() == Tok::Ident) {
    Token t = lx.next();
    if (consts) {
      auto it = consts->find(t.text);
      if (it != consts->end()) return it->second;
    }
    throw ParseError("unresolved constant '" + t.text + "'", t.line, t.col);
  }
  return std::nullopt;
}

inline SyncBound parse_sync_bound(Lexer& lx, const std::map<std::string, long long>* consts) {
  SyncBound b;
  if (lx.kind() == Tok::Nat || lx.kind() == Tok::Ident) {
    auto v = sync_value(lx, consts);
    b.lo = v;
    b.hi = v;
    return b;
  }
  bool lo_closed;
  if (lx.accept(Tok::LBrack)) lo_closed = true;
  else if (lx.accept(Tok::LParen)) lo_closed = false;
  else lx.fail("expected interval bound");
  b.lo = sync_value(lx, consts);
  b.lo_strict = !lo_closed;
  lx.expect(Tok::Comma, "','");
  b.hi = sync_value(lx, consts);
  if (lx.accept(Tok::RBrack)) b.hi_strict = false;
  else if (lx.accept(Tok::RParen)) b.hi_strict = true;
  else lx.fail("expected ']' or ')'");
  return b;
}

}  // namespace detail

inline TimingDiagram parse_td_block(const std::string& text,
                                    const std::set<std::string>& sigma,
                                    const std::map<std::string, long long>* consts) {
  Lexer lx(text);
  std::vector<DiagramRow> rows;
  std::vector<SyncConstraint> constraints;
  while (lx.kind() != Tok::End) {
    if (lx.kind() == Tok::At) {
      lx.next();
      Token kw = lx.expect(Tok::Ident, "'sync' or 'null'");
      if (kw.text == "null") {
        lx.expect(Tok::Colon, "':'");
        std::string raw = lx.raw_until_semi();
        lx.expect(Tok::Semi, "';'");
        DiagramRow row;
        row.wave = parse_waveform(raw);
        for (const auto& cell : row.wave.cells)
          if (cell.symbol != WaveSymbol::DontCare2)
            throw ParseError("@null rows may only use don't-care symbol 2", kw.line, kw.col);
        rows.push_back(std::move(row));
      } else if (kw.text == "sync") {
        lx.expect(Tok::Colon, "':'");
        lx.expect(Tok::LParen, "'('");
        SyncConstraint c;
        c.a = lx.expect(Tok::Ident, "nominal").text;
        lx.expect(Tok::Comma, "','");
        c.b = lx.expect(Tok::Ident, "nominal").text;
        lx.expect(Tok::Comma, "','");
        c.bound = detail::parse_sync_bound(lx, consts);
        lx.expect(Tok::RParen, "')'");
        lx.expect(Tok::Semi, "';'");
        constraints.push_back(std::move(c));
      } else {
        throw ParseError("expected '@sync' or '@null'", kw.line, kw.col);
      }
      continue;
    }
    // Waveform row: a propositional label (usually a plain variable).
    detail::PropParser pp(lx, &sigma);
    DiagramRow row;
    row.signal = pp.parse();
    row.label = print_prop(row.signal);
    lx.expect(Tok::Colon, "':'");
    std::string raw = lx.raw_until_semi();
    lx.expect(Tok::Semi, "';'");
    row.wave = parse_waveform(raw);
    rows.push_back(std::move(row));
  }
  return make_diagram(std::move(rows), std::move(constraints));
}

// ---------------------------------------------------------------------------
// Diagram satisfaction (the oracle side of the xi equivalence).
//
// Waveform concatenation shares its cut point with both sides, like chop; the
// cut ranges over the whole interval including its end point, which matches
// the xi translation on degenerate diagrams.

using NominalValuation = std::map<std::string, int>;

namespace detail {

struct RowMatcher {
  // reach[k][x] = bitmask of y such that cells[k..] tile [x, y].
  std::vector<std::vector<std::uint64_t>> reach;

  RowMatcher(const Word& w, const DiagramRow& row, const NominalValuation& nu) {
    int n = w.last();
    VarIndex vi(w.vars);
    std::uint64_t pm = 0;
    if (row.signal) {
      for (int i = 0; i <= n; ++i)
        if (eval_prop(row.signal, vi, w.letters[static_cast<std::size_t>(i)]))
          pm |= 1ULL << i;
    }
    const auto& cells = row.wave.cells;
    int m = static_cast<int>(cells.size());
    reach.assign(static_cast<std::size_t>(m) + 1,
                 std::vector<std::uint64_t>(static_cast<std::size_t>(n) + 1, 0));
    for (int x = 0; x <= n; ++x)
      reach[static_cast<std::size_t>(m)][static_cast<std::size_t>(x)] = 1ULL << x;
    // Runs of constantly-true / constantly-false signal for stutter cells.
    std::vector<int> run_true(static_cast<std::size_t>(n) + 2, 0);
    std::vector<int> run_false(static_cast<std::size_t>(n) + 2, 0);
    for (int i = n; i >= 0; --i) {
      run_true[static_cast<std::size_t>(i)] =
          ((pm >> i) & 1ULL) ? run_true[static_cast<std::size_t>(i) + 1] + 1 : 0;
      run_false[static_cast<std::size_t>(i)] =
          ((pm >> i) & 1ULL) ? 0 : run_false[static_cast<std::size_t>(i) + 1] + 1;
    }
    auto range_mask = [&](int lo, int hi) -> std::uint64_t {
      if (hi < lo) return 0;
      std::uint64_t mask = (hi >= 63) ? ~0ULL : ((1ULL << (hi + 1)) - 1);
      return mask & ~((lo == 0) ? 0ULL : ((1ULL << lo) - 1));
    };
    for (int k = m - 1; k >= 0; --k) {
      const WaveCell& cell = cells[static_cast<std::size_t>(k)];
      for (int x = 0; x <= n; ++x) {
        // Marker check: every marker of this cell must sit at x.
        bool ok = true;
        for (const auto& mk : cell.markers) {
          auto it = nu.find(mk);
          if (it == nu.end() || it->second != x) { ok = false; break; }
        }
        if (!ok) continue;
        std::uint64_t ys = 0;
        bool sig = (pm >> x) & 1ULL;
        switch (cell.symbol) {
          case WaveSymbol::Low:
            if (cell.stutter)
              ys = range_mask(x, std::min(n, x + run_false[static_cast<std::size_t>(x)]));
            else if (!sig && x + 1 <= n) ys = 1ULL << (x + 1);
            break;
          case WaveSymbol::High:
            if (cell.stutter)
              ys = range_mask(x, std::min(n, x + run_true[static_cast<std::size_t>(x)]));
            else if (sig && x + 1 <= n) ys = 1ULL << (x + 1);
            break;
          case WaveSymbol::DontCare2:
            if (cell.stutter) ys = range_mask(x, n);
            else if (x + 1 <= n) ys = 1ULL << (x + 1);
            break;
          case WaveSymbol::DontCareX:
            if (cell.stutter)
              ys = range_mask(x, std::min(n, x + std::max(run_true[static_cast<std::size_t>(x)],
                                                          run_false[static_cast<std::size_t>(x)])));
            else if (x + 1 <= n) ys = 1ULL << (x + 1);
            break;
        }
        std::uint64_t acc = 0;
        while (ys) {
          int y = std::countr_zero(ys);
          ys &= ys - 1;
          acc |= reach[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(y)];
        }
        reach[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)] = acc;
      }
    }
  }
};

inline bool nu_meets_constraints(const NominalValuation& nu, const TimingDiagram& t) {
  for (const auto& c : t.constraints) {
    long long d = static_cast<long long>(nu.at(c.b)) - static_cast<long long>(nu.at(c.a));
    if (d < 0) return false;
    if (c.bound.lo && (c.bound.lo_strict ? d <= *c.bound.lo : d < *c.bound.lo)) return false;
    if (c.bound.hi && (c.bound.hi_strict ? d >= *c.bound.hi : d > *c.bound.hi)) return false;
  }
  return true;
}

}  // namespace detail

/// sigma,[b,e] |=_nu T. The valuation must be total on the diagram's nominals;
/// a valuation outside [b,e] simply fails to satisfy the diagram.
inline bool sat_timing_diagram(const Word& w, const Interval& iv,
                               const NominalValuation& nu, const TimingDiagram& t) {
  check_word(w);
  check_interval(w, iv);
  for (const auto& u : t.theta) {
    auto it = nu.find(u);
    if (it == nu.end()) throw ApiError("valuation missing nominal '" + u + "'");
    if (it->second < iv.b || it->second > iv.e) return false;
  }
  if (!detail::nu_meets_constraints(nu, t)) return false;
  for (const auto& row : t.rows) {
    detail::RowMatcher m(w, row, nu);
    if (!((m.reach[0][static_cast<std::size_t>(iv.b)] >> iv.e) & 1ULL)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// xi: timing diagrams to nominated SeCe formulas.
//
// Cells translate per the fixed table; nominal markers become point-anchored
// operands (<u> && pt) so that marker positions coincide with cell boundaries.

namespace detail {

inline Formula xi_cell(const WaveCell& cell, const Prop& signal) {
  switch (cell.symbol) {
    case WaveSymbol::Low:
      return cell.stutter ? f_or(f_point(), f_all_but_last(p_not(signal)))
                          : f_unit(p_not(signal));
    case WaveSymbol::High:
      return cell.stutter ? f_or(f_point(), f_all_but_last(signal)) : f_unit(signal);
    case WaveSymbol::DontCare2:
      return cell.stutter ? f_true() : f_slen(CmpOp::Eq, 1);
    case WaveSymbol::DontCareX:
      return cell.stutter
                 ? f_or(f_or(f_point(), f_all_but_last(signal)),
                        f_all_but_last(p_not(signal)))
                 : f_slen(CmpOp::Eq, 1);
  }
  throw ApiError("unhandled wave symbol");
}

inline Formula marker_operand(const std::string& u) {
  return f_and(f_pt_atom(p_var(u)), f_point());
}

}  // namespace detail

/// Translate one waveform; `signal` may be null only for @null rows (whose
/// cells are signal-independent).
inline Formula xi_waveform(const Waveform& w, const Prop& signal) {
  std::vector<Formula> ops;
  for (const auto& cell : w.cells) {
    for (const auto& m : cell.markers) ops.push_back(detail::marker_operand(m));
    ops.push_back(detail::xi_cell(cell, signal));
  }
  Formula f = ops.back();
  for (auto it = ops.rbegin() + 1; it != ops.rend(); ++it) f = f_chop(*it, f);
  return f;
}

inline Formula xi_constraint(const SyncConstraint& c) {
  std::vector<Formula> bounds;
  if (c.bound.lo)
    bounds.push_back(f_slen(c.bound.lo_strict ? CmpOp::Gt : CmpOp::Ge, *c.bound.lo));
  if (c.bound.hi)
    bounds.push_back(f_slen(c.bound.hi_strict ? CmpOp::Lt : CmpOp::Le, *c.bound.hi));
  Formula mid;
  if (bounds.empty()) mid = f_true();
  else if (c.bound.lo && c.bound.hi && *c.bound.lo == *c.bound.hi && !c.bound.lo_strict &&
           !c.bound.hi_strict)
    mid = f_slen(CmpOp::Eq, *c.bound.lo);
  else
    mid = f_and_all(bounds);
  return f_chop(f_true(),
                f_chop(detail::marker_operand(c.a),
                       f_chop(mid, f_chop(detail::marker_operand(c.b), f_true()))));
}

inline Formula xi_constraints(const std::vector<SyncConstraint>& cs) {
  std::vector<Formula> conj;
  conj.reserve(cs.size());
  for (const auto& c : cs) conj.push_back(xi_constraint(c));
  return f_and_all(conj);
}

/// xi(T): conjunction of all waveform translations and constraint formulas,
/// nominated by the diagram's marker set.
inline NominatedFormula xi(const TimingDiagram& t) {
  check_diagram(t);
  std::vector<Formula> conj;
  for (const auto& row : t.rows) conj.push_back(xi_waveform(row.wave, row.signal));
  if (!t.constraints.empty()) conj.push_back(xi_constraints(t.constraints));
  return NominatedFormula{f_and_all(conj), t.theta};
}

/// Size measure for the linearity check: one token per cell, marker, and
/// constraint component (two nominal references plus up to two bound values).
inline std::size_t diagram_size(const TimingDiagram& t) {
  std::size_t s = 0;
  for (const auto& row : t.rows)
    for (const auto& cell : row.wave.cells) s += 1 + cell.markers.size();
  for (const auto& c : t.constraints)
    s += 3 + (c.bound.lo ? 1 : 0) + (c.bound.hi ? 1 : 0);
  return s;
}

// ---------------------------------------------------------------------------
// Live timing diagrams: liveness operators applied to diagram operands.

struct LiveTimingDiagram {
  LKind op;
  std::vector<TimingDiagram> operands;
};

inline SeCeNL to_secenl(const LiveTimingDiagram& ltd) {
  if (static_cast<int>(ltd.operands.size()) != lkind_arity(ltd.op))
    throw ApiError("wrong number of diagram operands for the liveness operator");
  std::vector<NominatedFormula> parts;
  parts.reserve(ltd.operands.size());
  for (const auto& t : ltd.operands) parts.push_back(xi(t));
  return l_atom(ltd.op, std::move(parts));
}

// ---------------------------------------------------------------------------
// WaveDrom export. Deterministic: fixed key order, two-space indent, LF.

inline std::string bound_text(const SyncBound& b) {
  if (b.lo && b.hi && *b.lo == *b.hi && !b.lo_strict && !b.hi_strict)
    return std::to_string(*b.lo);
  std::string s;
  s += b.lo_strict ? "(" : "[";
  if (b.lo) s += std::to_string(*b.lo);
  s += ",";
  if (b.hi) s += std::to_string(*b.hi);
  s += b.hi_strict ? ")" : "]";
  return s;
}

inline std::string export_wavedrom(const TimingDiagram& t) {
  check_diagram(t);
  nlohmann::ordered_json doc;
  // WaveDrom cannot share node names across signals: duplicates get a
  // deterministic _k suffix by occurrence order (the first keeps its name).
  std::map<std::string, int> uses;
  std::map<std::string, std::string> renamed;  // per edge endpoints: first name wins
  doc["signal"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    std::string wave, node;
    for (const auto& cell : row.wave.cells) {
      std::string label;
      for (const auto& m : cell.markers) {
        int k = ++uses[m];
        std::string name = k == 1 ? m : m + "_" + std::to_string(k);
        if (k == 1) renamed[m] = name;
        label += name;
      }
      char c = '0';
      switch (cell.symbol) {
        case WaveSymbol::Low: c = '0'; break;
        case WaveSymbol::High: c = '1'; break;
        case WaveSymbol::DontCare2: c = '='; break;
        case WaveSymbol::DontCareX: c = 'x'; break;
      }
      wave += c;
      node += label.empty() ? "." : label;
      if (cell.stutter) {
        wave += '.';
        node += '.';
      }
    }
    nlohmann::ordered_json sig;
    sig["name"] = row.label.empty() ? "@null" : row.label;
    sig["wave"] = wave;
    sig["node"] = node;
    doc["signal"].push_back(sig);
  }
  if (!t.constraints.empty()) {
    doc["edge"] = nlohmann::ordered_json::array();
    for (const auto& c : t.constraints) {
      doc["edge"].push_back(renamed.at(c.a) + "~>" + renamed.at(c.b) + " " +
                            bound_text(c.bound));
    }
  }
  return doc.dump(2) + "\n";
}

}  // namespace tdspec
