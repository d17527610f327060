#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tdspec/prop.hpp"

using namespace tdspec;

namespace {

Prop random_prop(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 7);
  switch (pick(rng)) {
    case 0: return p_var(vars[rng() % vars.size()]);
    case 1: return p_true();
    case 2: return p_false();
    case 3: return p_not(random_prop(rng, vars, depth - 1));
    case 4: return p_and(random_prop(rng, vars, depth - 1), random_prop(rng, vars, depth - 1));
    case 5: return p_or(random_prop(rng, vars, depth - 1), random_prop(rng, vars, depth - 1));
    case 6: return p_implies(random_prop(rng, vars, depth - 1), random_prop(rng, vars, depth - 1));
    default: return p_iff(random_prop(rng, vars, depth - 1), random_prop(rng, vars, depth - 1));
  }
}

}  // namespace

TEST_CASE("parse_prop basic forms") {
  std::set<std::string> sigma{"p", "q"};
  Prop f = parse_prop("p && !q", sigma);
  REQUIRE(f->kind == PKind::And);
  REQUIRE(f->lhs->kind == PKind::Var);
  REQUIRE(f->lhs->var == "p");
  REQUIRE(f->rhs->kind == PKind::Not);
  REQUIRE(f->rhs->lhs->var == "q");
}

TEST_CASE("parse_prop implication as in requirement texts") {
  std::set<std::string> sigma{"DH2O", "HH2O"};
  Prop f = parse_prop("DH2O => HH2O", sigma);
  REQUIRE(f->kind == PKind::Implies);
  REQUIRE(f->lhs->var == "DH2O");
  REQUIRE(f->rhs->var == "HH2O");
}

TEST_CASE("parse_prop rejects undeclared variables by name") {
  std::set<std::string> sigma{"p"};
  try {
    parse_prop("p && r", sigma);
    FAIL("expected undeclared-variable error");
  } catch (const UndeclaredVariableError& e) {
    REQUIRE(e.variable == "r");
  }
}

TEST_CASE("parse_prop precedence and constants") {
  std::set<std::string> sigma{"a", "b", "c"};
  // implies is right-associative and weaker than ||.
  Prop f = parse_prop("a || b => c => 0", sigma);
  REQUIRE(f->kind == PKind::Implies);
  REQUIRE(f->lhs->kind == PKind::Or);
  REQUIRE(f->rhs->kind == PKind::Implies);
  REQUIRE(f->rhs->rhs->kind == PKind::False);
  REQUIRE(parse_prop("1", sigma)->kind == PKind::True);
}

TEST_CASE("prop print/parse round-trip") {
  std::mt19937_64 rng(20250810);
  std::vector<std::string> vars{"p", "q", "r"};
  std::set<std::string> sigma(vars.begin(), vars.end());
  for (int i = 0; i < 300; ++i) {
    Prop f = random_prop(rng, vars, 4);
    Prop g = parse_prop(print_prop(f), sigma);
    CAPTURE(print_prop(f));
    REQUIRE(prop_equal(f, g));
  }
}

TEST_CASE("eval_prop over letters") {
  VarIndex vi({"p", "q"});
  Prop f = parse_prop_any("p <=> !q");
  REQUIRE(eval_prop(f, vi, 0b01));   // p=1 q=0
  REQUIRE(eval_prop(f, vi, 0b10));   // p=0 q=1
  REQUIRE_FALSE(eval_prop(f, vi, 0b11));
  REQUIRE_FALSE(eval_prop(f, vi, 0b00));
}

TEST_CASE("simplify_prop produces equivalent small DNF") {
  std::mt19937_64 rng(7);
  std::vector<std::string> vars{"p", "q", "r"};
  VarIndex vi(vars);
  for (int i = 0; i < 200; ++i) {
    Prop f = random_prop(rng, vars, 4);
    Prop s = simplify_prop(f);
    for (std::uint32_t a = 0; a < 8; ++a)
      REQUIRE(eval_prop(f, vi, a) == eval_prop(s, vi, a));
  }
  REQUIRE(simplify_prop(parse_prop_any("p && !p"))->kind == PKind::False);
  REQUIRE(simplify_prop(parse_prop_any("p || !p"))->kind == PKind::True);
}

TEST_CASE("substitute replaces variables with propositions") {
  Prop f = parse_prop_any("X && !Y");
  Prop g = substitute(f, {{"X", p_var("a")}, {"Y", p_and(p_var("b"), p_var("c"))}});
  REQUIRE(print_prop(g) == "a && !(b && c)");
}
