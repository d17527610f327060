#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tdspec/formula.hpp"

using namespace tdspec;

namespace {

const std::set<std::string> kSigma{"p", "q", "r", "u", "P"};

Formula parse(const std::string& s) { return parse_qddc(s, kSigma); }

Prop random_small_prop(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return p_var("p");
    case 1: return p_var("q");
    case 2: return p_not(p_var("p"));
    default: return p_and(p_var("p"), p_var("q"));
  }
}

Formula random_formula(std::mt19937_64& rng, int depth) {
  if (depth <= 0) {
    switch (rng() % 5) {
      case 0: return f_pt_atom(random_small_prop(rng));
      case 1: return f_all_but_last(random_small_prop(rng));
      case 2: return f_all(random_small_prop(rng));
      case 3: return f_unit(random_small_prop(rng));
      default: return f_slen(CmpOp::Le, static_cast<long long>(rng() % 4));
    }
  }
  switch (rng() % 8) {
    case 0: return f_chop(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 1: return f_not(random_formula(rng, depth - 1));
    case 2: return f_or(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return f_and(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 4: return f_star(random_formula(rng, depth - 1));
    case 5: return f_exists("u", random_formula(rng, depth - 1));
    case 6: return f_scount(random_small_prop(rng), CmpOp::Ge, static_cast<long long>(rng() % 3));
    default: return random_formula(rng, 0);
  }
}

}  // namespace

TEST_CASE("parse_qddc parses the window-rise pattern") {
  Formula f = parse("[!P]^<u>^((slen=3)&&([!P]^[[P]]))^[[P]]");
  // Chop is right-associated: [!P] ^ (<u> ^ ((...) ^ [[P]]))
  REQUIRE(f->kind == FKind::Chop);
  REQUIRE(f->lhs->kind == FKind::AllButLast);
  REQUIRE(print_prop(f->lhs->prop) == "!P");
  const auto& r1 = f->rhs;
  REQUIRE(r1->kind == FKind::Chop);
  REQUIRE(r1->lhs->kind == FKind::PtAtom);
  REQUIRE(print_prop(r1->lhs->prop) == "u");
  const auto& r2 = r1->rhs;
  REQUIRE(r2->kind == FKind::Chop);
  REQUIRE(r2->lhs->kind == FKind::And);
  REQUIRE(r2->lhs->lhs->kind == FKind::SlenCmp);
  REQUIRE(r2->lhs->lhs->bound == 3);
  REQUIRE(r2->rhs->kind == FKind::All);
}

TEST_CASE("derived constructs expand structurally") {
  REQUIRE(formula_equal(parse("<> [p]"), parse("true ^ [p] ^ true")));
  REQUIRE(formula_equal(parse("[] [p]"), parse("!(true ^ (![p]) ^ true)")));
  REQUIRE(formula_equal(parse("pt"), parse("slen = 0")));
  REQUIRE(formula_equal(parse("ext"), parse("slen >= 1")));
  REQUIRE(formula_equal(parse("true"), f_slen(CmpOp::Ge, 0)));
  REQUIRE(formula_equal(parse("false"), f_slen(CmpOp::Lt, 0)));
  // Expansion is idempotent: re-parsing the expansion yields the same tree.
  Formula once = parse("<> {p}");
  Formula twice = parse_qddc(print_formula(once), kSigma);
  REQUIRE(formula_equal(once, twice));
}

TEST_CASE("formula => is sugar for negation and disjunction") {
  REQUIRE(formula_equal(parse("[p] => [[q]]"), parse("(![p]) || [[q]]")));
}

TEST_CASE("precedence: quantifiers weakest, chop binds tighter than and/or") {
  Formula f = parse("ex u. <u> ^ [p] && [[q]]");
  REQUIRE(f->kind == FKind::Exists);
  REQUIRE(f->lhs->kind == FKind::And);
  REQUIRE(f->lhs->lhs->kind == FKind::Chop);
  Formula g = parse("[p] || [q] && [[r]]");
  REQUIRE(g->kind == FKind::Or);
  REQUIRE(g->rhs->kind == FKind::And);
}

TEST_CASE("negative constants are rejected") {
  REQUIRE_THROWS_AS(parse("slen = -1"), ParseError);
  REQUIRE_THROWS_AS(parse("scount p < -2"), ParseError);
}

TEST_CASE("undeclared variables are rejected inside atoms") {
  REQUIRE_THROWS_AS(parse_qddc("[zz]", {"p"}), UndeclaredVariableError);
}

TEST_CASE("named constants resolve through the provided table") {
  std::map<std::string, long long> consts{{"w", 10}};
  Formula f = parse_qddc("slen >= w", kSigma, &consts);
  REQUIRE(f->bound == 10);
  REQUIRE_THROWS_AS(parse_qddc("slen >= w", kSigma), ParseError);
}

TEST_CASE("qddc print/parse round-trip on random trees") {
  std::mt19937_64 rng(123456);
  for (int i = 0; i < 400; ++i) {
    Formula f = random_formula(rng, 4);
    CAPTURE(print_formula(f));
    Formula g = parse_qddc(print_formula(f), kSigma);
    REQUIRE(formula_equal(f, g));
  }
}

TEST_CASE("classify_fragment on the three witness shapes") {
  Formula ce = f_chop(f_all_but_last(p_var("p")), f_all(p_var("q")));
  REQUIRE(classify_fragment(ce).tag == FragmentTag::CE);

  Formula sece = f_and(f_all_but_last(p_var("p")), f_all(p_var("q")));
  auto info = classify_fragment(sece);
  REQUIRE(info.tag == FragmentTag::SeCe);
  REQUIRE(info.not_ce.size() == 1);
  REQUIRE(info.not_ce[0].empty());  // the root And

  Formula full = f_not(f_all_but_last(p_var("p")));
  auto finfo = classify_fragment(full);
  REQUIRE(finfo.tag == FragmentTag::FullQDDC);
  REQUIRE(finfo.not_sece.size() == 1);
  REQUIRE(path_to_string(finfo.not_sece[0]) == "root");
}

TEST_CASE("classify_fragment is monotone under adding banned nodes") {
  std::mt19937_64 rng(99);
  auto leq = [](FragmentTag a, FragmentTag b) {
    return static_cast<int>(a) <= static_cast<int>(b);
  };
  for (int i = 0; i < 200; ++i) {
    Formula f = random_formula(rng, 3);
    FragmentTag base = classify_fragment(f).tag;
    REQUIRE(leq(base, classify_fragment(f_not(f)).tag));
    REQUIRE(classify_fragment(f_not(f)).tag == FragmentTag::FullQDDC);
    REQUIRE(classify_fragment(f_exists("u", f)).tag == FragmentTag::FullQDDC);
    REQUIRE(leq(base, classify_fragment(f_and(f, f_point())).tag));
  }
}

TEST_CASE("rename_apart separates shadowed binders") {
  Formula f = f_exists("u", f_and(f_pt_atom(p_var("u")),
                                  f_exists("u", f_all(p_var("u")))));
  Formula r = rename_apart(f, {"u"});
  REQUIRE(r->kind == FKind::Exists);
  REQUIRE(r->var != "u");
  const auto& inner = r->lhs->rhs;
  REQUIRE(inner->kind == FKind::Exists);
  REQUIRE(inner->var != r->var);
  // The outer atom refers to the outer binder, the inner one to the inner.
  REQUIRE(print_prop(r->lhs->lhs->prop) == r->var);
  REQUIRE(print_prop(inner->lhs->prop) == inner->var);
}

TEST_CASE("formula_size counts formula and prop nodes") {
  REQUIRE(formula_size(f_pt_atom(p_var("p"))) == 2);
  REQUIRE(formula_size(f_chop(f_point(), f_point())) == 3);
}
