#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "tdspec/automata.hpp"
#include "tdspec/formula.hpp"

namespace tdspec {

struct NodeStat {
  std::string path;
  std::size_t states = 0;  // after minimization
  std::size_t peak = 0;    // before minimization
};

struct CompilationReport {
  std::vector<NodeStat> node_stats;  // post-order
  std::size_t final_states = 0;
  double total_ms = 0.0;
};

struct CompileOptions {
  std::size_t state_cap = 2000000;
  long long constant_cap = 100000;
};

namespace detail {

struct CompileCtx {
  CompileOptions opts;
  CompilationReport report;
};

inline Dfa compile_rec(const Formula& f, const std::vector<std::string>& alph,
                       const Path& path, CompileCtx& ctx);

inline Dfa finish_node(Dfa d, std::size_t peak, const Path& path, CompileCtx& ctx) {
  if (peak > ctx.opts.state_cap)
    throw CapExceededError(path_to_string(path), peak);
  Dfa m = minimize(d);
  if (static_cast<std::size_t>(m.num_states) > ctx.opts.state_cap)
    throw CapExceededError(path_to_string(path), static_cast<std::size_t>(m.num_states));
  ctx.report.node_stats.push_back(
      {path_to_string(path), static_cast<std::size_t>(m.num_states), peak});
  return m;
}

inline Dfa compile_rec(const Formula& f, const std::vector<std::string>& alph,
                       const Path& path, CompileCtx& ctx) {
  auto child_path = [&](int i) {
    Path p = path;
    p.push_back(i);
    return p;
  };
  switch (f->kind) {
    case FKind::PtAtom:
      return finish_node(atom_pt(alph, f->prop), 0, path, ctx);
    case FKind::AllButLast:
      return finish_node(atom_all_but_last(alph, f->prop), 0, path, ctx);
    case FKind::All:
      return finish_node(atom_all(alph, f->prop), 0, path, ctx);
    case FKind::Unit:
      return finish_node(atom_unit(alph, f->prop), 0, path, ctx);
    case FKind::SlenCmp:
    case FKind::ScountCmp:
    case FKind::SdurCmp: {
      if (f->bound > ctx.opts.constant_cap)
        throw CapExceededError(path_to_string(path),
                               static_cast<std::size_t>(f->bound));
      Dfa d = f->kind == FKind::SlenCmp
                  ? atom_slen(alph, f->op, f->bound)
                  : f->kind == FKind::ScountCmp
                        ? atom_scount(alph, f->prop, f->op, f->bound)
                        : atom_sdur(alph, f->prop, f->op, f->bound);
      return finish_node(std::move(d), 0, path, ctx);
    }
    case FKind::Chop: {
      Dfa a = compile_rec(f->lhs, alph, child_path(0), ctx);
      Dfa b = compile_rec(f->rhs, alph, child_path(1), ctx);
      Dfa det = determinize(fusion_concat(a, b), ctx.opts.state_cap);
      return finish_node(det, static_cast<std::size_t>(det.num_states), path, ctx);
    }
    case FKind::Star: {
      Dfa a = compile_rec(f->lhs, alph, child_path(0), ctx);
      Dfa det = determinize(fusion_star(a), ctx.opts.state_cap);
      return finish_node(det, static_cast<std::size_t>(det.num_states), path, ctx);
    }
    case FKind::Not: {
      Dfa a = compile_rec(f->lhs, alph, child_path(0), ctx);
      return finish_node(complement(a), static_cast<std::size_t>(a.num_states), path, ctx);
    }
    case FKind::And:
    case FKind::Or: {
      Dfa a = compile_rec(f->lhs, alph, child_path(0), ctx);
      Dfa b = compile_rec(f->rhs, alph, child_path(1), ctx);
      Dfa p = product(a, b, f->kind == FKind::And ? ProductMode::And : ProductMode::Or);
      return finish_node(p, static_cast<std::size_t>(p.num_states), path, ctx);
    }
    case FKind::Exists: {
      std::vector<std::string> inner = alph;
      inner.push_back(f->var);
      Dfa a = compile_rec(f->lhs, inner, child_path(0), ctx);
      Dfa det = determinize(project(a, f->var), ctx.opts.state_cap);
      return finish_node(det, static_cast<std::size_t>(det.num_states), path, ctx);
    }
    case FKind::Forall: {
      std::vector<std::string> inner = alph;
      inner.push_back(f->var);
      Dfa a = compile_rec(f->lhs, inner, child_path(0), ctx);
      Dfa na = minimize(complement(a));
      Dfa det = determinize(project(na, f->var), ctx.opts.state_cap);
      Dfa m = minimize(det);
      if (static_cast<std::size_t>(det.num_states) > ctx.opts.state_cap)
        throw CapExceededError(path_to_string(path),
                               static_cast<std::size_t>(det.num_states));
      return finish_node(complement(m), static_cast<std::size_t>(det.num_states), path,
                         ctx);
    }
  }
  throw ApiError("unhandled formula node");
}

}  // namespace detail

/// Compile a QDDC formula into the minimal total DFA of its word models,
/// minimizing after every constructor. Throws CapExceededError with the
/// offending subformula path when the state cap is hit.
inline std::pair<Dfa, CompilationReport> compile(const Formula& d,
                                                 const std::vector<std::string>& sigma,
                                                 const CompileOptions& opts = {}) {
  auto t0 = std::chrono::steady_clock::now();
  std::set<std::string> declared(sigma.begin(), sigma.end());
  for (const auto& v : formula_free_vars(d))
    if (!declared.count(v))
      throw ApiError("free variable '" + v + "' is not in the declared alphabet");
  detail::CompileCtx ctx;
  ctx.opts = opts;
  Formula renamed = rename_apart(d, declared);
  Dfa result = detail::compile_rec(renamed, sigma, {}, ctx);
  ctx.report.final_states = static_cast<std::size_t>(result.num_states);
  ctx.report.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(result), std::move(ctx.report)};
}

inline Dfa compile_dfa(const Formula& d, const std::vector<std::string>& sigma,
                       const CompileOptions& opts = {}) {
  return compile(d, sigma, opts).first;
}

inline nlohmann::ordered_json report_to_json(const CompilationReport& r) {
  nlohmann::ordered_json j;
  j["final_states"] = r.final_states;
  j["total_ms"] = r.total_ms;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& s : r.node_stats) {
    nlohmann::ordered_json js;
    js["path"] = s.path;
    js["states"] = s.states;
    js["peak"] = s.peak;
    j["nodes"].push_back(js);
  }
  return j;
}

}  // namespace tdspec
