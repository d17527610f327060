#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "generators.hpp"
#include "helpers.hpp"
#include "tdspec/secenl_sat.hpp"
#include "tdspec/translate.hpp"

using namespace tdspec;
using namespace tdspec::testutil;

TEST_CASE("focc of a half-open run atom holds exactly on points") {
  Formula f = focc(f_all_but_last(p_var("p")));
  for_each_word_upto({"p"}, 4, [&](const Word& w) {
    auto fr = sat_all_intervals(w, f);
    auto pr = sat_all_intervals(w, f_point());
    REQUIRE(fr == pr);
  });
}

TEST_CASE("focc of a fixed-length formula is itself") {
  Formula f = focc(f_slen(CmpOp::Eq, 3));
  for_each_word_upto({"p"}, 5, [&](const Word& w) {
    REQUIRE(sat_all_intervals(w, f) == sat_all_intervals(w, f_slen(CmpOp::Eq, 3)));
  });
}

TEST_CASE("focc of a chop pattern keeps only the first occurrence") {
  Formula d = f_chop(f_pt_atom(p_var("p")), f_all(p_var("q")));
  Formula f = focc(d);
  Word w = wchars("pq", {"pq", "q"});
  auto rows = sat_all_intervals(w, f);
  REQUIRE(((rows[0] >> 0) & 1ULL));      // holds at [0,0]
  REQUIRE_FALSE(((rows[0] >> 1) & 1ULL));  // [0,1] has the proper prefix [0,0]
  REQUIRE_FALSE(((rows[1] >> 1) & 1ULL));
}

TEST_CASE("relativize structure and degenerate cases") {
  Formula d = f_all(p_var("p"));
  REQUIRE(formula_equal(relativize(RelKind::Forall1, {}, d), d));

  Formula two = relativize(RelKind::Exists1, {"u", "v"}, d);
  REQUIRE(two->kind == FKind::Exists);
  REQUIRE(two->var == "u");
  REQUIRE(two->lhs->kind == FKind::Exists);
  REQUIRE(two->lhs->var == "v");
  const auto& body = two->lhs->lhs;
  REQUIRE(body->kind == FKind::And);
  REQUIRE(body->lhs->kind == FKind::And);
  REQUIRE(body->lhs->lhs->kind == FKind::ScountCmp);
  REQUIRE(body->lhs->lhs->bound == 1);

  // exists1 {u}. true^<u>^true is satisfiable on every non-empty word.
  Formula anchored = relativize(RelKind::Exists1, {"u"}, f_diamond(f_pt_atom(p_var("u"))));
  for_each_word_upto({"p"}, 3, [&](const Word& w) { REQUIRE(sat_word(w, anchored)); });
}

TEST_CASE("aleph of nominal-free atoms matches the printed definitions") {
  Formula d = f_all(p_var("p"));
  Formula d2 = f_all(p_var("q"));
  SeCeNL anti = l_atom(LKind::Anti, {{d, {}}});
  REQUIRE(formula_equal(aleph(anti), f_not(f_chop(f_true(), f_chop(d, f_true())))));

  SeCeNL pref = l_atom(LKind::Pref, {{d, {}}});
  REQUIRE(formula_equal(aleph(pref), f_not(f_chop(f_not(d), f_true()))));

  SeCeNL imp = l_atom(LKind::Implies, {{d, {}}, {d2, {}}});
  REQUIRE(formula_equal(aleph(imp), f_box(f_implies(d, d2))));
}

TEST_CASE("aleph of the nominal implication relativizes both sides") {
  Formula d1 = f_chop(f_and(f_pt_atom(p_var("u")), f_point()), f_all(p_var("p")));
  Formula d2 = f_chop(f_and(f_pt_atom(p_var("u")), f_point()),
                      f_chop(f_and(f_pt_atom(p_var("v")), f_point()), f_all(p_var("q"))));
  SeCeNL imp = l_atom(LKind::Implies, {{d1, {"u"}}, {d2, {"u", "v"}}});
  Formula expected = f_box(relativize(
      RelKind::Forall1, {"u"},
      f_implies(d1, relativize(RelKind::Exists1, {"v"}, d2))));
  REQUIRE(formula_equal(aleph(imp), expected));
}

TEST_CASE("aleph preserves SeCeNL semantics on exhaustive small words") {
  std::mt19937_64 rng(97531);
  std::vector<std::string> vars{"p"};
  std::vector<SeCeNLSpec> shapes = {
      {LKind::Pref, {{}}},
      {LKind::Pref, {{"u"}}},
      {LKind::Init, {{}, {}}},
      {LKind::Init, {{"u"}, {"v"}}},
      {LKind::Anti, {{}}},
      {LKind::Anti, {{"u"}}},
      {LKind::Implies, {{}, {}}},
      {LKind::Implies, {{"u"}, {"u"}}},
      {LKind::Implies, {{"u"}, {"v"}}},
      {LKind::Follows, {{}, {}, {}}},
      {LKind::Follows, {{"u"}, {"v"}, {}}},
      {LKind::Triggers, {{}, {}, {}}},
      {LKind::Triggers, {{"u"}, {"u"}, {}}},
  };
  for (const auto& shape : shapes) {
    for (int rep = 0; rep < 3; ++rep) {
      SeCeNL z = gen_secenl_atom(rng, vars, shape);
      Formula q = aleph(z);
      for_each_word_upto(vars, 4, [&](const Word& w) {
        bool lhs = sat_secenl(w, z);
        bool rhs = sat_word(w, q);
        if (lhs != rhs) {
          CAPTURE(print_secenl(z), print_formula(q), print_trace(w));
          REQUIRE(lhs == rhs);
        }
      });
    }
  }
}

TEST_CASE("aleph output size stays within the linear budget") {
  std::mt19937_64 rng(222);
  std::vector<std::string> vars{"p", "q"};
  std::vector<SeCeNLSpec> shapes = {
      {LKind::Pref, {{"u"}}},
      {LKind::Init, {{"u"}, {"v"}}},
      {LKind::Anti, {{"u", "v"}}},
      {LKind::Implies, {{"u", "v"}, {"v"}}},
      {LKind::Follows, {{"u"}, {"v"}, {"w"}}},
      {LKind::Triggers, {{"u"}, {"v"}, {"w"}}},
  };
  for (const auto& shape : shapes) {
    for (int rep = 0; rep < 20; ++rep) {
      SeCeNL z = gen_secenl_atom(rng, vars, shape);
      double ratio = static_cast<double>(formula_size(aleph(z))) /
                     static_cast<double>(secenl_size(z));
      CAPTURE(print_secenl(z), ratio);
      REQUIRE(ratio <= 20.0);
    }
  }
}

TEST_CASE("aleph is total on boolean combinations") {
  std::mt19937_64 rng(4);
  std::vector<std::string> vars{"p"};
  SeCeNL a = gen_secenl_atom(rng, vars, {LKind::Anti, {{}}});
  SeCeNL b = gen_secenl_atom(rng, vars, {LKind::Pref, {{}}});
  SeCeNL combo = l_or(l_not(a), l_and(a, b));
  Formula f = aleph(combo);
  REQUIRE(f->kind == FKind::Or);
  for_each_word_upto(vars, 4, [&](const Word& w) {
    REQUIRE(sat_secenl(w, combo) == sat_word(w, f));
  });
}
