#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tdspec/compile.hpp"
#include "tdspec/secenl.hpp"
#include "tdspec/timing_diagram.hpp"
#include "tdspec/translate.hpp"

namespace tdspec {

// Specification files: an interface block declaring the variable universe,
// named timing-diagram / formula / implies-macro blocks, and a main block of
// assume/req items. Grammar sketch (whitespace-insensitive, // comments):
//
//   spec       := interface block* main
//   interface  := "interface" "{" decl* "}"
//   decl       := ("input"|"output"|"auxvar"|"nominal") idlist ";"
//              |  "constant" id "=" nat {"," id "=" nat} ";"
//              |  "softreq" prop ";"
//   block      := "td" id "(" params ")" "{" waveline* syncline* "}"
//              |  "dc" id "(" params ")" "{" qddc ";" "}"
//              |  "#" "implies" id "(" params ")" "{" tdblock tdblock "}"
//   main       := "main" "(" ")" "{" (("assume"|"req") expr ";")* "}"
//
// Main expressions are boolean combinations of liveness atoms whose parts are
// QDDC formulas, dc calls, or td calls; implies-macro calls expand to
// implies(xi(td1) ~> xi(td2)); a bare formula or td reference is wrapped as a
// pref requirement.

struct SpecInterface {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> auxvars;
  std::vector<std::string> nominals;
  std::map<std::string, long long> constants;
  std::vector<Prop> softreqs;
};

struct TdTemplate {
  std::string name;
  std::vector<std::string> params;
  std::string raw_body;
};

struct DcTemplate {
  std::string name;
  std::vector<std::string> params;
  std::string raw_formula;
};

struct MacroTemplate {
  std::string name;
  std::vector<std::string> params;
  TdTemplate antecedent;
  TdTemplate consequent;
};

struct SpecItem {
  bool is_assume = false;
  SeCeNL formula;
  std::string raw;
};

struct SpecFile {
  SpecInterface iface;
  std::vector<TdTemplate> tds;
  std::vector<DcTemplate> dcs;
  std::vector<MacroTemplate> macros;
  std::vector<SpecItem> items;

  std::vector<std::string> alphabet() const {
    std::vector<std::string> a = iface.inputs;
    a.insert(a.end(), iface.outputs.begin(), iface.outputs.end());
    a.insert(a.end(), iface.auxvars.begin(), iface.auxvars.end());
    return a;
  }
  std::size_t num_assumes() const {
    std::size_t n = 0;
    for (const auto& it : items) n += it.is_assume ? 1 : 0;
    return n;
  }
  std::size_t num_reqs() const { return items.size() - num_assumes(); }
  const TdTemplate* find_td(const std::string& name) const {
    for (const auto& t : tds)
      if (t.name == name) return &t;
    return nullptr;
  }
  const DcTemplate* find_dc(const std::string& name) const {
    for (const auto& t : dcs)
      if (t.name == name) return &t;
    return nullptr;
  }
  const MacroTemplate* find_macro(const std::string& name) const {
    for (const auto& t : macros)
      if (t.name == name) return &t;
    return nullptr;
  }
};

namespace detail {

using MacroArg = std::variant<Prop, long long>;

/// Substitute formal parameters into a formula's propositional leaves.
inline Formula formula_subst_props(const Formula& f, const std::map<std::string, Prop>& sub) {
  if (!f) return f;
  FormulaNode n = *f;
  if (n.prop) n.prop = substitute(n.prop, sub);
  n.lhs = formula_subst_props(f->lhs, sub);
  n.rhs = formula_subst_props(f->rhs, sub);
  return mk(std::move(n));
}

inline TimingDiagram instantiate_td(const TdTemplate& tpl, const std::vector<MacroArg>& args,
                                    const std::set<std::string>& sigma,
                                    const std::map<std::string, long long>& consts) {
  if (args.size() != tpl.params.size())
    throw ApiError("td '" + tpl.name + "' expects " + std::to_string(tpl.params.size()) +
                   " arguments");
  std::set<std::string> scope = sigma;
  std::map<std::string, long long> consts2 = consts;
  std::map<std::string, Prop> prop_sub;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& p = tpl.params[i];
    if (std::holds_alternative<long long>(args[i])) {
      consts2[p] = std::get<long long>(args[i]);
    } else {
      scope.insert(p);
      prop_sub[p] = std::get<Prop>(args[i]);
    }
  }
  TimingDiagram t = parse_td_block(tpl.raw_body, scope, &consts2);
  for (auto& row : t.rows) {
    if (!row.signal) continue;
    row.signal = substitute(row.signal, prop_sub);
    row.label = print_prop(row.signal);
    for (const auto& v : prop_vars(row.signal))
      if (!sigma.count(v))
        throw ApiError("waveform signal references undeclared variable '" + v + "'");
  }
  return t;
}

inline Formula instantiate_dc(const DcTemplate& tpl, const std::vector<MacroArg>& args,
                              const std::set<std::string>& sigma,
                              const std::map<std::string, long long>& consts) {
  if (args.size() != tpl.params.size())
    throw ApiError("dc '" + tpl.name + "' expects " + std::to_string(tpl.params.size()) +
                   " arguments");
  std::set<std::string> scope = sigma;
  std::map<std::string, long long> consts2 = consts;
  std::map<std::string, Prop> prop_sub;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& p = tpl.params[i];
    if (std::holds_alternative<long long>(args[i])) {
      consts2[p] = std::get<long long>(args[i]);
    } else {
      scope.insert(p);
      prop_sub[p] = std::get<Prop>(args[i]);
    }
  }
  Formula f = parse_qddc(tpl.raw_formula, scope, &consts2);
  return formula_subst_props(f, prop_sub);
}

class SpecParser {
 public:
  explicit SpecParser(const std::string& text) : lx_(rewrite(text)) {}

  static std::string rewrite(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '<' && i + 1 < text.size() && text[i + 1] == '>') {
        out += " __diamond ";
        ++i;
      } else if (text[i] == '[' && i + 1 < text.size() && text[i + 1] == ']') {
        out += " __box ";
        ++i;
      } else {
        out.push_back(text[i]);
      }
    }
    return out;
  }

  SpecFile parse() {
    parse_interface();
    for (;;) {
      if (lx_.kind() == Tok::Ident && lx_.peek().text == "td") {
        lx_.next();
        spec_.tds.push_back(parse_td_template());
      } else if (lx_.kind() == Tok::Ident && lx_.peek().text == "dc") {
        lx_.next();
        spec_.dcs.push_back(parse_dc_template());
      } else if (lx_.kind() == Tok::Hash) {
        lx_.next();
        lx_.expect_keyword("implies");
        spec_.macros.push_back(parse_macro_template());
      } else {
        break;
      }
    }
    parse_main();
    if (lx_.kind() != Tok::End) lx_.fail("trailing input after main block");
    return spec_;
  }

 private:
  void declare(const std::string& name, const Token& at) {
    if (!declared_.insert(name).second)
      throw ParseError("duplicate declaration of '" + name + "'", at.line, at.col);
  }

  void parse_interface() {
    lx_.expect_keyword("interface");
    lx_.expect(Tok::LBrace, "'{'");
    while (!lx_.accept(Tok::RBrace)) {
      Token kw = lx_.expect(Tok::Ident, "interface declaration");
      if (kw.text == "input" || kw.text == "output" || kw.text == "auxvar" ||
          kw.text == "nominal") {
        do {
          Token id = lx_.expect(Tok::Ident, "identifier");
          declare(id.text, id);
          if (kw.text == "input") spec_.iface.inputs.push_back(id.text);
          else if (kw.text == "output") spec_.iface.outputs.push_back(id.text);
          else if (kw.text == "auxvar") spec_.iface.auxvars.push_back(id.text);
          else spec_.iface.nominals.push_back(id.text);
        } while (lx_.accept(Tok::Comma));
        lx_.expect(Tok::Semi, "';'");
      } else if (kw.text == "constant") {
        do {
          Token id = lx_.expect(Tok::Ident, "constant name");
          declare(id.text, id);
          lx_.expect(Tok::Eq, "'='");
          Token v = lx_.expect(Tok::Nat, "natural");
          spec_.iface.constants[id.text] = v.value;
        } while (lx_.accept(Tok::Comma));
        lx_.expect(Tok::Semi, "';'");
      } else if (kw.text == "softreq") {
        PropParser pp(lx_, nullptr);
        Prop p = pp.parse();
        // Soft requirements may reference outputs and Y-prefixed variables;
        // checked again at synthesis time.
        spec_.iface.softreqs.push_back(p);
        lx_.expect(Tok::Semi, "';'");
      } else {
        throw ParseError("unknown interface declaration '" + kw.text + "'", kw.line, kw.col);
      }
    }
    for (const auto& v : sigma_vars()) sigma_.insert(v);
    for (const auto& u : spec_.iface.nominals) theta_.insert(u);
  }

  std::vector<std::string> sigma_vars() const {
    std::vector<std::string> a = spec_.iface.inputs;
    a.insert(a.end(), spec_.iface.outputs.begin(), spec_.iface.outputs.end());
    a.insert(a.end(), spec_.iface.auxvars.begin(), spec_.iface.auxvars.end());
    return a;
  }

  std::vector<std::string> parse_params() {
    lx_.expect(Tok::LParen, "'('");
    std::vector<std::string> params;
    if (!lx_.accept(Tok::RParen)) {
      do {
        params.push_back(lx_.expect(Tok::Ident, "parameter name").text);
      } while (lx_.accept(Tok::Comma));
      lx_.expect(Tok::RParen, "')'");
    }
    return params;
  }

  /// Capture the raw text between braces, honoring nesting.
  std::string raw_braced_block() {
    Token open = lx_.expect(Tok::LBrace, "'{'");
    std::size_t start = open.offset + 1;
    int depth = 1;
    std::size_t end = start;
    while (depth > 0) {
      if (lx_.kind() == Tok::End) lx_.fail("unterminated block");
      Token t = lx_.next();
      if (t.kind == Tok::LBrace) ++depth;
      if (t.kind == Tok::RBrace) {
        --depth;
        end = t.offset;
      }
    }
    return lx_.source().substr(start, end - start);
  }

  TdTemplate parse_td_template() {
    TdTemplate tpl;
    Token name = lx_.expect(Tok::Ident, "td name");
    declare(name.text, name);
    tpl.name = name.text;
    tpl.params = parse_params();
    tpl.raw_body = raw_braced_block();
    validate_td(tpl);
    return tpl;
  }

  DcTemplate parse_dc_template() {
    DcTemplate tpl;
    Token name = lx_.expect(Tok::Ident, "dc name");
    declare(name.text, name);
    tpl.name = name.text;
    tpl.params = parse_params();
    std::string body = raw_braced_block();
    auto semi = body.find_last_of(';');
    if (semi == std::string::npos)
      throw ParseError("dc block must end with ';'", name.line, name.col);
    tpl.raw_formula = body.substr(0, semi);
    validate_dc(tpl);
    return tpl;
  }

  MacroTemplate parse_macro_template() {
    MacroTemplate m;
    Token name = lx_.expect(Tok::Ident, "macro name");
    declare(name.text, name);
    m.name = name.text;
    m.params = parse_params();
    lx_.expect(Tok::LBrace, "'{'");
    m.antecedent = parse_inner_td(m.params);
    m.consequent = parse_inner_td(m.params);
    lx_.expect(Tok::RBrace, "'}'");
    return m;
  }

  TdTemplate parse_inner_td(const std::vector<std::string>& macro_params) {
    lx_.expect_keyword("td");
    TdTemplate tpl;
    Token name = lx_.expect(Tok::Ident, "td name");
    tpl.name = name.text;
    // Inner parameter lists document which macro parameters the speclet uses;
    // the binding scope is the macro's parameter list.
    parse_params();
    tpl.params = macro_params;
    tpl.raw_body = raw_braced_block();
    return tpl;
  }

  /// Template validation: parse once with formal parameters standing in both
  /// for propositional arguments and for numeric constants.
  void validate_td(const TdTemplate& tpl) {
    std::set<std::string> scope = sigma_;
    std::map<std::string, long long> consts = spec_.iface.constants;
    for (const auto& p : tpl.params) {
      scope.insert(p);
      consts[p] = 0;
    }
    parse_td_block(tpl.raw_body, scope, &consts);
  }

  void validate_dc(const DcTemplate& tpl) {
    std::set<std::string> scope = sigma_;
    std::map<std::string, long long> consts = spec_.iface.constants;
    for (const auto& p : tpl.params) {
      scope.insert(p);
      consts[p] = 0;
    }
    parse_qddc(tpl.raw_formula, scope, &consts);
  }

  void parse_main() {
    lx_.expect_keyword("main");
    lx_.expect(Tok::LParen, "'('");
    lx_.expect(Tok::RParen, "')'");
    lx_.expect(Tok::LBrace, "'{'");
    while (!lx_.accept(Tok::RBrace)) {
      Token kw = lx_.expect(Tok::Ident, "'assume' or 'req'");
      bool is_assume;
      if (kw.text == "assume") is_assume = true;
      else if (kw.text == "req") is_assume = false;
      else throw ParseError("expected 'assume' or 'req'", kw.line, kw.col);
      std::size_t start = lx_.peek().offset;
      SeCeNL z = parse_expr();
      Token semi = lx_.expect(Tok::Semi, "';'");
      SpecItem item;
      item.is_assume = is_assume;
      item.formula = z;
      item.raw = lx_.source().substr(start, semi.offset - start);
      spec_.items.push_back(std::move(item));
    }
  }

  SeCeNL parse_expr() {
    SeCeNL a = parse_conj();
    while (lx_.accept(Tok::Or)) a = l_or(a, parse_conj());
    return a;
  }
  SeCeNL parse_conj() {
    SeCeNL a = parse_unary();
    while (lx_.accept(Tok::And)) a = l_and(a, parse_unary());
    return a;
  }
  SeCeNL parse_unary() {
    if (lx_.accept(Tok::Not)) return l_not(parse_unary());
    return parse_atom();
  }

  static bool is_liveness_op(const std::string& s) {
    return s == "pref" || s == "init" || s == "anti" || s == "implies" ||
           s == "follows" || s == "triggers";
  }

  SeCeNL parse_atom() {
    if (lx_.kind() == Tok::Ident) {
      const std::string& id = lx_.peek().text;
      if (is_liveness_op(id)) return parse_liveness_atom();
      if (spec_.find_macro(id)) {
        Token name = lx_.next();
        auto args = parse_args();
        return expand_macro(*spec_.find_macro(name.text), args);
      }
      if (spec_.find_td(id)) {
        Token name = lx_.next();
        auto args = parse_args();
        NominatedFormula nf =
            xi(instantiate_td(*spec_.find_td(name.text), args, sigma_,
                              spec_.iface.constants));
        return l_atom(LKind::Pref, {std::move(nf)});
      }
      if (spec_.find_dc(id)) {
        Token name = lx_.next();
        auto args = parse_args();
        Formula f = instantiate_dc(*spec_.find_dc(name.text), args, sigma_,
                                   spec_.iface.constants);
        NominatedFormula nf{f, {}};
        check_nominated(nf, sigma_);
        return l_atom(LKind::Pref, {std::move(nf)});
      }
    }
    // Bare formula: wrapped as an invariant (pref) requirement.
    NominatedFormula nf = parse_part();
    check_nominated(nf, sigma_);
    return l_atom(LKind::Pref, {std::move(nf)});
  }

  SeCeNL parse_liveness_atom() {
    Token op_tok = lx_.expect(Tok::Ident, "liveness operator");
    LKind op;
    if (op_tok.text == "pref") op = LKind::Pref;
    else if (op_tok.text == "init") op = LKind::Init;
    else if (op_tok.text == "anti") op = LKind::Anti;
    else if (op_tok.text == "implies") op = LKind::Implies;
    else if (op_tok.text == "follows") op = LKind::Follows;
    else op = LKind::Triggers;
    lx_.expect(Tok::LParen, "'('");
    std::vector<NominatedFormula> parts;
    parts.push_back(parse_part());
    int arity = lkind_arity(op);
    if (arity >= 2) {
      if (op == LKind::Init) lx_.expect(Tok::Slash, "'/'");
      else lx_.expect(Tok::Leadsto, "'~>'");
      parts.push_back(parse_part());
    }
    if (arity == 3) {
      lx_.expect(Tok::Slash, "'/'");
      parts.push_back(parse_part());
    }
    lx_.expect(Tok::RParen, "')'");
    for (auto& p : parts) check_nominated(p, sigma_);
    return l_atom(op, std::move(parts));
  }

  /// A nominated part: a td/dc reference or a QDDC formula, with an optional
  /// explicit nominal annotation.
  NominatedFormula parse_part() {
    NominatedFormula nf;
    if (lx_.kind() == Tok::Ident) {
      const std::string& id = lx_.peek().text;
      if (spec_.find_td(id)) {
        lx_.next();
        auto args = parse_args();
        nf = xi(instantiate_td(*spec_.find_td(id), args, sigma_, spec_.iface.constants));
        return nf;
      }
      if (spec_.find_dc(id)) {
        lx_.next();
        auto args = parse_args();
        nf.d = instantiate_dc(*spec_.find_dc(id), args, sigma_, spec_.iface.constants);
        nf.theta = parse_theta_annotation();
        return nf;
      }
    }
    std::set<std::string> scope = sigma_;
    scope.insert(theta_.begin(), theta_.end());
    QddcParser qp(lx_, &scope, &spec_.iface.constants);
    nf.d = qp.parse();
    nf.theta = parse_theta_annotation();
    return nf;
  }

  std::vector<std::string> parse_theta_annotation() {
    std::vector<std::string> theta;
    if (lx_.accept(Tok::Colon)) {
      lx_.expect(Tok::LBrace, "'{'");
      if (lx_.kind() != Tok::RBrace) {
        do {
          Token u = lx_.expect(Tok::Ident, "nominal name");
          if (!theta_.count(u.text))
            throw ParseError("undeclared nominal '" + u.text + "'", u.line, u.col);
          theta.push_back(u.text);
        } while (lx_.accept(Tok::Comma));
      }
      lx_.expect(Tok::RBrace, "'}'");
      std::sort(theta.begin(), theta.end());
    }
    return theta;
  }

  std::vector<MacroArg> parse_args() {
    lx_.expect(Tok::LParen, "'('");
    std::vector<MacroArg> args;
    if (!lx_.accept(Tok::RParen)) {
      do {
        if (lx_.kind() == Tok::Nat) {
          args.emplace_back(lx_.next().value);
        } else if (lx_.kind() == Tok::Ident &&
                   spec_.iface.constants.count(lx_.peek().text)) {
          args.emplace_back(spec_.iface.constants.at(lx_.next().text));
        } else {
          PropParser pp(lx_, &sigma_);
          args.emplace_back(pp.parse());
        }
      } while (lx_.accept(Tok::Comma));
      lx_.expect(Tok::RParen, "')'");
    }
    return args;
  }

  SeCeNL expand_macro(const MacroTemplate& m, const std::vector<MacroArg>& args) {
    if (args.size() != m.params.size())
      throw ApiError("macro '" + m.name + "' expects " + std::to_string(m.params.size()) +
                     " arguments");
    NominatedFormula a =
        xi(instantiate_td(m.antecedent, args, sigma_, spec_.iface.constants));
    NominatedFormula c =
        xi(instantiate_td(m.consequent, args, sigma_, spec_.iface.constants));
    return l_atom(LKind::Implies, {std::move(a), std::move(c)});
  }

  Lexer lx_;
  SpecFile spec_;
  std::set<std::string> sigma_;
  std::set<std::string> theta_;
  std::set<std::string> declared_;
};

}  // namespace detail

inline SpecFile parse_spec_file(const std::string& text) {
  detail::SpecParser p(text);
  return p.parse();
}

/// The overall requirement: conjunction of assumes implies conjunction of
/// reqs (vacuously true parts drop out).
inline SeCeNL spec_requirement(const SpecFile& spec) {
  std::vector<SeCeNL> assumes, reqs;
  for (const auto& item : spec.items)
    (item.is_assume ? assumes : reqs).push_back(item.formula);
  if (reqs.empty()) {
    // No commitments: the requirement is vacuously true.
    NominatedFormula top{f_true(), {}};
    reqs.push_back(l_atom(LKind::Pref, {top}));
  }
  SeCeNL commit = l_and_all(reqs);
  if (assumes.empty()) return commit;
  return l_or(l_not(l_and_all(assumes)), commit);
}

/// Compile the full spec requirement into its monitor automaton over the
/// declared alphabet.
inline std::pair<Dfa, CompilationReport> compile_spec(const SpecFile& spec,
                                                      const CompileOptions& opts = {}) {
  return compile(aleph(spec_requirement(spec)), spec.alphabet(), opts);
}

}  // namespace tdspec
