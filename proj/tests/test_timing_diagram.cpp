#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "generators.hpp"
#include "helpers.hpp"
#include "tdspec/timing_diagram.hpp"

using namespace tdspec;
using namespace tdspec::testutil;

namespace {

const std::set<std::string> kPQ{"p", "q"};

TimingDiagram fig3() {
  return parse_td_block(
      "p: 01a:2x011xb:x2|220c:00;\n"
      "q: 00a:0|d:11|e:xxx|f:01c:11;\n"
      "@sync:(a,d,[1,8]);\n"
      "@sync:(d,c,[20,30]);\n"
      "@sync:(a,b,[10,10]);\n",
      kPQ);
}

/// Check a diagram against its xi formula for all words up to maxlen over the
/// diagram's signals, all intervals, and all valuations into the interval.
void check_xi_equivalence(const TimingDiagram& t, const std::vector<std::string>& sigma,
                          int maxlen) {
  NominatedFormula nf = xi(t);
  for_each_word_upto(sigma, maxlen, [&](const Word& w) {
    int n = w.last();
    std::vector<int> pos(nf.theta.size(), 0);
    for (;;) {
      Word ext = word_with_nominals(w, nf.theta, pos);
      auto rows = sat_all_intervals(ext, nf.d);
      NominalValuation nu;
      for (std::size_t i = 0; i < nf.theta.size(); ++i) nu[nf.theta[i]] = pos[i];
      for (int b = 0; b <= n; ++b)
        for (int e = b; e <= n; ++e) {
          bool dia = sat_timing_diagram(w, {b, e}, nu, t);
          bool frm = (rows[static_cast<std::size_t>(b)] >> e) & 1ULL;
          if (dia != frm) {
            CAPTURE(print_formula(nf.d), print_trace(ext), b, e);
            REQUIRE(dia == frm);
          }
        }
      // Next valuation.
      std::size_t i = 0;
      while (i < pos.size() && ++pos[i] > n) pos[i++] = 0;
      if (i == pos.size()) break;
    }
  });
}

}  // namespace

TEST_CASE("parse_waveform handles the composite example string") {
  Waveform w = parse_waveform("01a:2x011xb:x2|220c:00");
  REQUIRE(w.cells.size() == 15);
  REQUIRE(w.cells[2].markers == std::vector<std::string>{"a"});
  REQUIRE(w.cells[2].symbol == WaveSymbol::DontCare2);
  REQUIRE(w.cells[8].markers == std::vector<std::string>{"b"});
  REQUIRE(w.cells[8].symbol == WaveSymbol::DontCareX);
  REQUIRE(w.cells[9].symbol == WaveSymbol::DontCare2);
  REQUIRE(w.cells[9].stutter);
  REQUIRE(w.cells[13].markers == std::vector<std::string>{"c"});
  int nmarkers = 0;
  for (const auto& c : w.cells) nmarkers += static_cast<int>(c.markers.size());
  REQUIRE(nmarkers == 3);
}

TEST_CASE("parse_waveform corner cases") {
  Waveform w = parse_waveform("1|");
  REQUIRE(w.cells.size() == 1);
  REQUIRE(w.cells[0].symbol == WaveSymbol::High);
  REQUIRE(w.cells[0].stutter);
  REQUIRE_THROWS_AS(parse_waveform("0y:"), ParseError);   // dangling marker
  REQUIRE_THROWS_AS(parse_waveform(""), ParseError);      // empty
  REQUIRE_THROWS_AS(parse_waveform("0z0"), ParseError);   // unknown symbol
  REQUIRE_THROWS_AS(parse_waveform("a:1a:0"), ParseError);  // duplicate nominal
}

TEST_CASE("parse_td_block assembles the two-signal example diagram") {
  TimingDiagram t = fig3();
  REQUIRE(t.rows.size() == 2);
  REQUIRE(t.constraints.size() == 3);
  REQUIRE(t.theta == std::vector<std::string>{"a", "b", "c", "d", "e", "f"});
}

TEST_CASE("diagram validation errors") {
  REQUIRE_THROWS_AS(parse_td_block("p: 1a:0;\n@sync:(a,z,[1,2]);\n", kPQ), ApiError);
  REQUIRE_THROWS_AS(parse_td_block("p: 1a:0b:1;\n@sync:(a,b,[3,1]);\n", kPQ), ApiError);
  REQUIRE_NOTHROW(parse_td_block("p: 01|x;\n", kPQ));
  // Shared nominals across waveforms are permitted and kept un-renamed;
  // repeating one inside a single waveform is an error.
  REQUIRE_NOTHROW(parse_td_block("p: a:1;\nq: a:0|1;\n", kPQ));
  REQUIRE_THROWS_AS(parse_waveform("a:1 0 a:0"), ParseError);
}

TEST_CASE("xi translates cells per the table") {
  Prop P = p_var("p");
  REQUIRE(formula_equal(xi_waveform(parse_waveform("1|"), P),
                        f_or(f_point(), f_all_but_last(P))));
  REQUIRE(formula_equal(xi_waveform(parse_waveform("x"), P), f_slen(CmpOp::Eq, 1)));
  REQUIRE(formula_equal(xi_waveform(parse_waveform("2|"), P), f_true()));
  REQUIRE(formula_equal(xi_waveform(parse_waveform("0"), P), f_unit(p_not(P))));
  REQUIRE(formula_equal(
      xi_waveform(parse_waveform("x|"), P),
      f_or(f_or(f_point(), f_all_but_last(P)), f_all_but_last(p_not(P)))));
}

TEST_CASE("xi of the example waveform is a chop chain with point markers") {
  Formula f = xi_waveform(parse_waveform("01a:2x011xb:x2|220c:00"), p_var("p"));
  // 15 cells + 3 markers = 18 chop operands.
  int operands = 1;
  const FormulaNode* cur = f.get();
  while (cur->kind == FKind::Chop) {
    ++operands;
    cur = cur->rhs.get();
  }
  REQUIRE(operands == 18);
  // The marker operand for `a` is the third one: <a> && pt.
  const FormulaNode* third = f->rhs->rhs->lhs.get();
  REQUIRE(third->kind == FKind::And);
  REQUIRE(third->lhs->kind == FKind::PtAtom);
  REQUIRE(print_prop(third->lhs->prop) == "a");
  REQUIRE(third->rhs->kind == FKind::SlenCmp);
}

TEST_CASE("xi_constraint shapes") {
  SyncConstraint c18{"a", "d", {1, false, 8, false}};
  Formula f = xi_constraint(c18);
  // true ^ (<a> && pt) ^ (slen >= 1 && slen <= 8) ^ (<d> && pt) ^ true
  REQUIRE(f->kind == FKind::Chop);
  const auto& bound = f->rhs->rhs->lhs;
  REQUIRE(bound->kind == FKind::And);
  REQUIRE(bound->lhs->op == CmpOp::Ge);
  REQUIRE(bound->lhs->bound == 1);
  REQUIRE(bound->rhs->op == CmpOp::Le);
  REQUIRE(bound->rhs->bound == 8);

  SyncConstraint c10{"a", "b", {10, false, 10, false}};
  REQUIRE(formula_equal(
      xi_constraint(c10),
      f_chop(f_true(),
             f_chop(f_and(f_pt_atom(p_var("a")), f_point()),
                    f_chop(f_slen(CmpOp::Eq, 10),
                           f_chop(f_and(f_pt_atom(p_var("b")), f_point()), f_true()))))));

  SyncConstraint sep{"u", "v", {3, true, std::nullopt, false}};
  Formula fs = xi_constraint(sep);
  const auto& mid = fs->rhs->rhs->lhs;
  REQUIRE(mid->kind == FKind::SlenCmp);
  REQUIRE(mid->op == CmpOp::Gt);
  REQUIRE(mid->bound == 3);
}

TEST_CASE("xi output stays in the negation-free fragments") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    TimingDiagram t = gen_diagram(rng, {"p", "q"}, 4, 3, 2);
    auto tag = classify_fragment(xi(t).d).tag;
    REQUIRE((tag == FragmentTag::CE || tag == FragmentTag::SeCe));
  }
}

TEST_CASE("single-cell diagram translates to one unit conjunct") {
  TimingDiagram t = parse_td_block("p: 1;\n", kPQ);
  NominatedFormula nf = xi(t);
  REQUIRE(nf.theta.empty());
  REQUIRE(formula_equal(nf.d, f_unit(p_var("p"))));
}

TEST_CASE("diagram semantics matches xi on exhaustive words and valuations") {
  // Hand-picked diagrams covering markers, stutters and constraints.
  check_xi_equivalence(parse_td_block("p: 0u:1|;\n", kPQ), {"p"}, 5);
  check_xi_equivalence(parse_td_block("p: u:1|v:1;\n@sync:(u,v,[1,2]);\n", kPQ), {"p"}, 5);
  check_xi_equivalence(parse_td_block("p: 2|u:0x;\nq: 1|v:x|;\n@sync:(u,v,(0,]);\n", kPQ),
                       {"p", "q"}, 4);
  std::mt19937_64 rng(20250810);
  for (int i = 0; i < 12; ++i) {
    TimingDiagram t = gen_diagram(rng, {"p"}, 3, 2, 1);
    CAPTURE(print_formula(xi(t).d));
    check_xi_equivalence(t, {"p"}, 4);
  }
}

TEST_CASE("xi node count is linear in diagram size") {
  std::mt19937_64 rng(5150);
  for (int i = 0; i < 60; ++i) {
    TimingDiagram t = gen_diagram(rng, {"p", "q"}, 6, 4, 2);
    double ratio = static_cast<double>(formula_size(xi(t).d)) /
                   static_cast<double>(diagram_size(t));
    CAPTURE(diagram_size(t), formula_size(xi(t).d));
    REQUIRE(ratio <= 12.0);
  }
}

TEST_CASE("wavedrom export is deterministic and shaped correctly") {
  TimingDiagram t = fig3();
  std::string doc1 = export_wavedrom(t);
  std::string doc2 = export_wavedrom(t);
  REQUIRE(doc1 == doc2);
  auto j = nlohmann::json::parse(doc1);
  REQUIRE(j["signal"].size() == 2);
  REQUIRE(j["signal"][0]["name"] == "p");
  REQUIRE(j["signal"][0]["wave"].get<std::string>().substr(0, 3) == "01=");
  REQUIRE(j["edge"].size() == 3);
  TimingDiagram plain = parse_td_block("p: 010;\n", kPQ);
  auto jp = nlohmann::json::parse(export_wavedrom(plain));
  REQUIRE_FALSE(jp.contains("edge"));
}
