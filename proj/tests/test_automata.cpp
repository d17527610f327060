#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "tdspec/automata.hpp"
#include "tdspec/semantics.hpp"

using namespace tdspec;
using namespace tdspec::testutil;

namespace {

const std::vector<std::string> kP{"p"};
const std::vector<std::string> kPQ{"p", "q"};

/// Language equality against the oracle on all words up to maxlen.
void check_language(const Dfa& d, const Formula& f, const std::vector<std::string>& vars,
                    int maxlen) {
  DfaRunner run(d);
  for_each_word_upto(vars, maxlen, [&](const Word& w) {
    bool dfa = run.accepts(w);
    bool oracle = sat_word(w, f);
    if (dfa != oracle) {
      CAPTURE(print_formula(f), print_trace(w));
      REQUIRE(dfa == oracle);
    }
  });
}

}  // namespace

TEST_CASE("atom automata accept their defining examples") {
  Dfa all_p = atom_all(kP, p_var("p"));
  REQUIRE(dfa_accepts(all_p, wchars("p", {"p", "p"})));
  REQUIRE_FALSE(dfa_accepts(all_p, wchars("p", {"p", ""})));

  Dfa len3 = atom_slen(kP, CmpOp::Eq, 3);
  REQUIRE(dfa_accepts(len3, wchars("p", {"", "", "", ""})));
  REQUIRE_FALSE(dfa_accepts(len3, wchars("p", {"", "", ""})));
  REQUIRE_FALSE(dfa_accepts(len3, wchars("p", {"", "", "", "", ""})));

  check_language(atom_pt(kPQ, p_var("p")), f_pt_atom(p_var("p")), kPQ, 4);
  check_language(atom_all_but_last(kPQ, p_var("p")), f_all_but_last(p_var("p")), kPQ, 4);
  check_language(atom_unit(kPQ, p_var("q")), f_unit(p_var("q")), kPQ, 4);
  check_language(atom_scount(kPQ, p_var("p"), CmpOp::Ge, 2),
                 f_scount(p_var("p"), CmpOp::Ge, 2), kPQ, 4);
  check_language(atom_sdur(kPQ, p_var("p"), CmpOp::Le, 1),
                 f_sdur(p_var("p"), CmpOp::Le, 1), kPQ, 4);
}

TEST_CASE("the half-open run automaton minimizes to four states") {
  Dfa m = minimize(atom_all_but_last(kP, p_var("p")));
  REQUIRE(m.num_states == 4);
  REQUIRE(is_deterministic_total(m));
  // start, all-p-prefix/last-p, all-p-prefix/last-not-p, dead
}

TEST_CASE("product languages and classical identities") {
  Dfa ap = atom_all(kPQ, p_var("p"));
  Dfa aq = atom_all(kPQ, p_var("q"));
  Dfa both = product(ap, aq, "and");
  REQUIRE(dfa_accepts(both, wchars("pq", {"pq", "pq"})));
  REQUIRE_FALSE(dfa_accepts(both, wchars("pq", {"pq", "p"})));

  Dfa comp = complement(ap);
  REQUIRE(dfa_accepts(comp, wchars("pq", {"", ""})));
  REQUIRE(is_empty(product(ap, comp, "and")));
  REQUIRE(is_universal(product(ap, comp, "or")));
  // Double complement restores the language.
  REQUIRE(isomorphic(minimize(complement(complement(ap))), minimize(ap)));
}

TEST_CASE("fusion concatenation implements chop") {
  Dfa left = atom_pt(kPQ, p_var("p"));
  Dfa right = atom_all(kPQ, p_var("q"));
  Dfa chop = minimize(determinize(fusion_concat(left, right)));
  REQUIRE(dfa_accepts(chop, wchars("pq", {"pq", "q"})));
  REQUIRE(dfa_accepts(chop, wchars("pq", {"p", "", "q"})));  // cut at the last letter
  check_language(chop, f_chop(f_pt_atom(p_var("p")), f_all(p_var("q"))), kPQ, 5);

  // Fusing with the point formula is the identity on languages.
  Dfa pt = atom_slen(kPQ, CmpOp::Eq, 0);
  Dfa idl = minimize(determinize(fusion_concat(pt, right)));
  Dfa idr = minimize(determinize(fusion_concat(right, pt)));
  REQUIRE(isomorphic(idl, minimize(right)));
  REQUIRE(isomorphic(idr, minimize(right)));
}

TEST_CASE("fusion accepts the two-phase example word") {
  // p at 0..3, {p,q,r} at 4..7, {q,r} at 8..10.
  std::vector<std::string> pqr{"p", "q", "r"};
  Dfa left = atom_all_but_last(pqr, p_var("p"));
  Dfa right = atom_all(pqr, p_and(p_not(p_var("p")), p_var("r")));
  Dfa chop = minimize(determinize(fusion_concat(left, right)));
  std::vector<std::string> rows;
  for (int i = 0; i < 4; ++i) rows.push_back("p");
  for (int i = 4; i < 8; ++i) rows.push_back("pqr");
  for (int i = 8; i <= 10; ++i) rows.push_back("qr");
  REQUIRE(dfa_accepts(chop, wchars("pqr", rows)));
}

TEST_CASE("fusion star closes under iteration") {
  Dfa step = atom_slen(kP, CmpOp::Eq, 1);
  REQUIRE(is_universal(minimize(determinize(fusion_star(step)))));

  Dfa allp = atom_all(kP, p_var("p"));
  Dfa star = minimize(determinize(fusion_star(allp)));
  check_language(star, f_star(f_all(p_var("p"))), kP, 5);

  Dfa none = atom_slen(kP, CmpOp::Lt, 0);
  Dfa star_empty = minimize(determinize(fusion_star(none)));
  check_language(star_empty, f_star(f_false()), kP, 4);
  REQUIRE(dfa_accepts(star_empty, wchars("p", {""})));
  REQUIRE_FALSE(dfa_accepts(star_empty, wchars("p", {"", ""})));
}

TEST_CASE("projection abstracts a variable existentially") {
  Dfa iff = atom_all(kPQ, p_iff(p_var("p"), p_var("q")));
  Dfa projected = minimize(determinize(project(iff, "p")));
  REQUIRE(projected.alphabet == std::vector<std::string>{"q"});
  REQUIRE(is_universal(projected));

  Dfa allp = atom_all(kP, p_var("p"));
  REQUIRE(is_universal(minimize(determinize(project(allp, "p")))));

  Dfa none = atom_slen(kP, CmpOp::Lt, 0);
  REQUIRE(is_empty(minimize(determinize(project(none, "p")))));
  REQUIRE_THROWS_AS(project(allp, "zz"), ApiError);
}

TEST_CASE("minimize is idempotent and canonical") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 40; ++i) {
    // Random small formula-free automaton via random products of atoms.
    Dfa a = atom_scount(kPQ, p_var("p"), CmpOp::Ge, static_cast<long long>(rng() % 3));
    Dfa b = atom_all_but_last(kPQ, rng() % 2 ? p_var("q") : p_or(p_var("p"), p_var("q")));
    Dfa c = product(a, b, rng() % 2 == 0 ? ProductMode::And : ProductMode::Or);
    Dfa m = minimize(c);
    REQUIRE(m.minimal);
    REQUIRE(is_deterministic_total(m));
    Dfa mm = minimize(m);
    REQUIRE(m.num_states == mm.num_states);
    REQUIRE(isomorphic(m, mm));
  }
  // Language-equal automata minimize to isomorphic ones: two routes to the
  // same language.
  Dfa r1 = minimize(product(atom_all(kPQ, p_var("p")), atom_all(kPQ, p_var("q")), ProductMode::And));
  Dfa r2 = minimize(atom_all(kPQ, p_and(p_var("p"), p_var("q"))));
  REQUIRE(isomorphic(r1, r2));
  // Canonical numbering: equal structures byte-for-byte.
  REQUIRE(dfa_to_json(r1).dump() == dfa_to_json(r2).dump());
}

TEST_CASE("guard partition invariants hold on operation results") {
  Dfa a = minimize(determinize(fusion_concat(atom_pt(kPQ, p_var("p")),
                                             atom_all(kPQ, p_var("q")))));
  REQUIRE(is_deterministic_total(a));
  Dfa b = product(a, complement(a), "or");
  REQUIRE(is_deterministic_total(b));
}

TEST_CASE("emptiness, universality and shortest witnesses") {
  Dfa pt = atom_slen(kPQ, CmpOp::Eq, 0);
  Dfa ext = atom_slen(kPQ, CmpOp::Ge, 1);
  REQUIRE(is_universal(product(pt, ext, "or")));
  REQUIRE(is_empty(product(pt, ext, "and")));

  auto w = shortest_word(atom_slen(kPQ, CmpOp::Eq, 3));
  REQUIRE(w.has_value());
  REQUIRE(w->letters == std::vector<std::uint32_t>{0, 0, 0, 0});

  REQUIRE_FALSE(shortest_word(product(pt, ext, "and")).has_value());

  // Lexicographically least: first declared variable counts most.
  Dfa needs_q = atom_pt(kPQ, p_var("q"));
  auto wq = shortest_word(needs_q);
  REQUIRE(wq.has_value());
  REQUIRE(wq->letters == std::vector<std::uint32_t>{0b10});

  // Shortest really is shortest: BFS layer equals word length.
  Dfa len2 = atom_slen(kPQ, CmpOp::Ge, 2);
  REQUIRE(shortest_word(len2)->letters.size() == 3);
}

TEST_CASE("kernel operations preserve language equations against the oracle") {
  std::mt19937_64 rng(314159);
  for (int i = 0; i < 25; ++i) {
    Prop phi = rng() % 2 ? p_var("p") : p_or(p_var("p"), p_not(p_var("q")));
    Prop psi = rng() % 2 ? p_var("q") : p_and(p_var("p"), p_var("q"));
    Dfa a = atom_all_but_last(kPQ, phi);
    Dfa b = atom_unit(kPQ, psi);
    Formula fa = f_all_but_last(phi), fb = f_unit(psi);
    switch (rng() % 4) {
      case 0:
        check_language(minimize(determinize(fusion_concat(a, b))), f_chop(fa, fb), kPQ, 5);
        break;
      case 1:
        check_language(minimize(product(a, b, ProductMode::And)), f_and(fa, fb), kPQ, 5);
        break;
      case 2:
        check_language(minimize(complement(a)), f_not(fa), kPQ, 5);
        break;
      default:
        check_language(minimize(determinize(fusion_star(a))), f_star(fa), kPQ, 5);
        break;
    }
  }
}

TEST_CASE("dfa json round-trips and is deterministic") {
  Dfa a = minimize(determinize(fusion_concat(atom_pt(kPQ, p_var("p")),
                                             atom_all(kPQ, p_var("q")))));
  auto j = dfa_to_json(a);
  Dfa back = dfa_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(isomorphic(minimize(back), a));
  REQUIRE(dfa_to_json(a).dump() == j.dump());
  REQUIRE_THROWS_AS(dfa_from_json(nlohmann::json::parse(
                        R"({"alphabet":["p"],"states":1,"initial":0,"accepting":[],"edges":[{"from":0,"guard":"p","to":5}]})")),
                    ApiError);
}

TEST_CASE("alphabet mismatches are rejected") {
  Dfa a = atom_all(kP, p_var("p"));
  Dfa b = atom_all(kPQ, p_var("q"));
  REQUIRE_THROWS_AS(product(a, b, "and"), ApiError);
  REQUIRE_THROWS_AS(fusion_concat(a, b), ApiError);
}
