#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "tdspec/semantics.hpp"

using namespace tdspec;
using namespace tdspec::testutil;

namespace {

const std::set<std::string> kPQR{"p", "q", "r", "u", "P"};

Formula qf(const std::string& s) { return parse_qddc(s, kPQR); }

Formula random_formula(std::mt19937_64& rng, int depth, int quant_budget) {
  auto prop = [&]() -> Prop {
    switch (rng() % 4) {
      case 0: return p_var("p");
      case 1: return p_var("q");
      case 2: return p_not(p_var("p"));
      default: return p_or(p_var("p"), p_var("q"));
    }
  };
  if (depth <= 0) {
    switch (rng() % 6) {
      case 0: return f_pt_atom(prop());
      case 1: return f_all_but_last(prop());
      case 2: return f_all(prop());
      case 3: return f_unit(prop());
      case 4: return f_scount(prop(), CmpOp::Ge, static_cast<long long>(rng() % 3));
      default: return f_slen(static_cast<CmpOp>(rng() % 5), static_cast<long long>(rng() % 4));
    }
  }
  switch (rng() % 9) {
    case 0: return f_chop(random_formula(rng, depth - 1, quant_budget),
                          random_formula(rng, depth - 1, 0));
    case 1: return f_not(random_formula(rng, depth - 1, quant_budget));
    case 2: return f_or(random_formula(rng, depth - 1, quant_budget),
                        random_formula(rng, depth - 1, 0));
    case 3: return f_and(random_formula(rng, depth - 1, quant_budget),
                         random_formula(rng, depth - 1, 0));
    case 4: return f_star(random_formula(rng, depth - 1, 0));
    case 5:
      if (quant_budget > 0)
        return f_exists("u", random_formula(rng, depth - 1, quant_budget - 1));
      return random_formula(rng, 0, 0);
    case 6: return f_sdur(prop(), CmpOp::Le, static_cast<long long>(rng() % 3));
    default: return random_formula(rng, 0, 0);
  }
}

}  // namespace

TEST_CASE("eval_term matches the counting conventions") {
  Word w = wchars("p", {"p", "", "p"});
  REQUIRE(eval_term(w, {0, 2}, TermKind::Scount, p_var("p")) == 2);
  REQUIRE(eval_term(w, {0, 2}, TermKind::Sdur, p_var("p")) == 1);
  Word w4 = wchars("p", {"", "", "", ""});
  REQUIRE(eval_term(w4, {0, 3}, TermKind::Slen) == 3);
}

TEST_CASE("half-open vs closed run atoms (Example 1)") {
  // p at positions 0..6, then q only at 7.
  std::vector<std::string> rows(7, "p");
  rows.push_back("q");
  Word w = wchars("pq", rows);
  REQUIRE(sat_interval(w, {0, 7}, qf("[p]")));
  REQUIRE_FALSE(sat_interval(w, {0, 7}, qf("[[p]]")));
}

TEST_CASE("chop splits with a shared point (Example 2)") {
  // positions 0..3: {p}, 4..7: {p,q,r}, 8..10: {q,r}
  std::vector<std::string> rows;
  for (int i = 0; i < 4; ++i) rows.push_back("p");
  for (int i = 4; i < 8; ++i) rows.push_back("pqr");
  for (int i = 8; i <= 10; ++i) rows.push_back("qr");
  Word w = wchars("pqr", rows);
  Formula f = qf("[p] ^ [[!p && r]]");
  REQUIRE(sat_interval(w, {0, 10}, f));
  REQUIRE_FALSE(sat_interval(w, {0, 7}, f));
}

TEST_CASE("point atom constrains only the start of its subinterval") {
  Word w = wchars("pq", {"p", "", "q"});
  REQUIRE(sat_interval(w, {0, 2}, qf("<p> ^ [[q]]")));  // chop point i = 2
}

TEST_CASE("word-level satisfaction evaluates the full interval") {
  REQUIRE(sat_word(wchars("p", {"p", "p"}), qf("[[p]]")));
  REQUIRE_FALSE(sat_word(wchars("p", {"p", ""}), qf("[[p]]")));
}

TEST_CASE("window-rise pattern family accepts its canonical model") {
  // P low at 0..2, high at 3..4; u marks position 0.
  Word w = wchars("Pu", {"u", "", "", "P", "P"});
  Formula f = qf("[!P]^<u>^((slen=3)&&([!P]^[[P]]))^[[P]]");
  REQUIRE(sat_word(w, f));
  // Without the marker the <u> operand fails.
  Word wno = wchars("Pu", {"", "", "", "P", "P"});
  REQUIRE_FALSE(sat_word(wno, f));
}

TEST_CASE("oracle agrees with naive recursive satisfier") {
  std::mt19937_64 rng(424242);
  std::vector<std::string> vars{"p", "q"};
  for (int iter = 0; iter < 60; ++iter) {
    Formula f = random_formula(rng, 3, 1);
    for_each_word_upto(vars, 4, [&](const Word& w) {
      auto rows = sat_all_intervals(w, f);
      for (int b = 0; b <= w.last(); ++b)
        for (int e = b; e <= w.last(); ++e) {
          bool fast = (rows[static_cast<std::size_t>(b)] >> e) & 1ULL;
          bool slow = naive_sat(w, b, e, f);
          if (fast != slow) {
            CAPTURE(print_formula(f), print_trace(w), b, e);
            REQUIRE(fast == slow);
          }
        }
    });
  }
}

TEST_CASE("chop monotonicity on exhaustive small words") {
  std::mt19937_64 rng(777);
  std::vector<std::string> vars{"p", "q"};
  for (int iter = 0; iter < 30; ++iter) {
    Formula d1 = random_formula(rng, 2, 0);
    Formula d2 = random_formula(rng, 2, 0);
    Formula chop = f_chop(d1, d2);
    for_each_word_upto(vars, 4, [&](const Word& w) {
      auto r1 = sat_all_intervals(w, d1);
      auto r2 = sat_all_intervals(w, d2);
      auto rc = sat_all_intervals(w, chop);
      for (int b = 0; b <= w.last(); ++b)
        for (int i = b; i <= w.last(); ++i)
          for (int e = i; e <= w.last(); ++e)
            if (((r1[b] >> i) & 1ULL) && ((r2[i] >> e) & 1ULL))
              REQUIRE(((rc[b] >> e) & 1ULL));
    });
  }
}

TEST_CASE("box/diamond duality at every interval") {
  std::mt19937_64 rng(31337);
  std::vector<std::string> vars{"p", "q"};
  for (int iter = 0; iter < 25; ++iter) {
    Formula d = random_formula(rng, 2, 0);
    Formula dia = f_diamond(d);
    Formula dia_expl = f_chop(f_true(), f_chop(d, f_true()));
    Formula box = f_box(d);
    Formula box_dual = f_not(f_diamond(f_not(d)));
    for_each_word_upto(vars, 4, [&](const Word& w) {
      auto a = sat_all_intervals(w, dia);
      auto b = sat_all_intervals(w, dia_expl);
      auto c = sat_all_intervals(w, box);
      auto d2 = sat_all_intervals(w, box_dual);
      REQUIRE(a == b);
      REQUIRE(c == d2);
    });
  }
}

TEST_CASE("quantifier duality on words up to length 5") {
  std::mt19937_64 rng(2024);
  std::vector<std::string> vars{"p", "q"};
  for (int iter = 0; iter < 12; ++iter) {
    Formula d = random_formula(rng, 2, 0);
    Formula fa = f_forall("p", d);
    Formula dual = f_not(f_exists("p", f_not(d)));
    for_each_word_upto(vars, 5, [&](const Word& w) {
      REQUIRE(sat_word(w, fa) == sat_word(w, dual));
    });
  }
}

TEST_CASE("scount equals sdur plus the last point") {
  std::mt19937_64 rng(555);
  std::vector<std::string> vars{"p", "q"};
  Prop phi = p_or(p_var("p"), p_not(p_var("q")));
  for_each_word_upto(vars, 5, [&](const Word& w) {
    for (int b = 0; b <= w.last(); ++b)
      for (int e = b; e <= w.last(); ++e) {
        long long sc = eval_term(w, {b, e}, TermKind::Scount, phi);
        long long sd = eval_term(w, {b, e}, TermKind::Sdur, phi);
        VarIndex vi(w.vars);
        long long last = eval_prop(phi, vi, w.letters[static_cast<std::size_t>(e)]) ? 1 : 0;
        REQUIRE(sc == sd + last);
      }
  });
}

TEST_CASE("trace round-trip and bit-exact errors") {
  Word w = wchars("pq", {"p", "", "pq"});
  Word back = parse_trace(print_trace(w));
  REQUIRE(back.vars == w.vars);
  REQUIRE(back.letters == w.letters);
  REQUIRE_THROWS_AS(parse_trace("p,q\np=1\n"), ParseError);       // missing q
  REQUIRE_THROWS_AS(parse_trace("p\np=1,q=0\n"), ParseError);     // unknown q
  REQUIRE_THROWS_AS(parse_trace("p\np=2\n"), ParseError);         // bad value
  REQUIRE_THROWS_AS(parse_trace("p\n"), ApiError);                // empty word
}
