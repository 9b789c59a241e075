#include "bondsat/rules.hpp"

#include "bondsat/sexpr.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

namespace bondsat {

const char *stop_reason_name(StopReason r) {
    switch (r) {
    case StopReason::Saturated: return "saturated";
    case StopReason::IterLimit: return "iter_limit";
    case StopReason::NodeLimit: return "node_limit";
    case StopReason::TimeLimit: return "time_limit";
    }
    return "?";
}

namespace {

// ---- rule text parsing ----------------------------------------------------

WidthSpec parse_width_spec(const std::string &text, const SExpr &at) {
    if (text.empty()) fail(errc::parse, "empty width at " + at.where());
    if (text == "_") return WidthSpec::wildcard();
    if (isdigit(static_cast<unsigned char>(text[0]))) {
        int w = 0;
        for (char c : text) {
            if (!isdigit(static_cast<unsigned char>(c)))
                fail(errc::parse, "malformed width '" + text + "' at " + at.where());
            w = w * 10 + (c - '0');
            if (w > 1000) break;
        }
        if (!width_ok(w)) fail(errc::parse, "width out of range at " + at.where());
        return WidthSpec::lit(w);
    }
    return WidthSpec::variable(text);
}

std::pair<std::string, WidthSpec> split_spec_head(const SExpr &s) {
    size_t colon = s.atom.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= s.atom.size())
        fail(errc::parse, "expected OP:WIDTH at " + s.where());
    return {s.atom.substr(0, colon), parse_width_spec(s.atom.substr(colon + 1), s)};
}

uint64_t parse_pattern_uint(const SExpr &s) {
    if (!s.is_atom() || s.atom.empty()) fail(errc::parse, "expected integer at " + s.where());
    uint64_t v = 0;
    for (char c : s.atom) {
        if (!isdigit(static_cast<unsigned char>(c)))
            fail(errc::parse, "expected integer at " + s.where());
        v = v * 10 + static_cast<uint64_t>(c - '0');
    }
    return v;
}

Pattern parse_pattern(const SExpr &e) {
    if (e.is_atom()) {
        if (e.atom.size() < 2 || e.atom[0] != '?')
            fail(errc::parse, "expected ?var or (op:w ...) at " + e.where());
        Pattern p;
        p.is_var = true;
        std::string body = e.atom.substr(1);
        size_t colon = body.find(':');
        if (colon != std::string::npos) {
            p.var = body.substr(0, colon);
            p.var_width = parse_width_spec(body.substr(colon + 1), e);
        } else {
            p.var = body;
        }
        if (p.var.empty()) fail(errc::parse, "empty variable name at " + e.where());
        return p;
    }
    if (e.items.empty() || !e.items[0].is_atom())
        fail(errc::parse, "expected (op:w ...) at " + e.where());
    auto [head, width] = split_spec_head(e.items[0]);
    Pattern p;
    p.width = width;
    if (head == "const") {
        if (e.items.size() != 2) fail(errc::parse, "const pattern takes one value at " + e.where());
        p.sym = NodeSym::make_const(parse_pattern_uint(e.items[1]));
        return p;
    }
    auto op = op_from_name(head);
    if (!op) fail(errc::parse, "unknown operator '" + head + "' at " + e.where());
    if (static_cast<int>(e.items.size()) - 1 != op_arity(*op))
        fail(errc::parse, "operator " + head + " expects " + std::to_string(op_arity(*op)) +
                              " operands at " + e.where());
    p.sym = NodeSym::make_op(*op);
    for (size_t i = 1; i < e.items.size(); ++i) p.children.push_back(parse_pattern(e.items[i]));
    return p;
}

void collect_vars(const Pattern &p, std::set<std::string> &vars, std::set<std::string> &widths) {
    auto widths_of = [&](const WidthSpec &w) {
        if (w.kind == WidthSpec::Kind::Var) widths.insert(w.var);
    };
    if (p.is_var) {
        vars.insert(p.var);
        if (p.var_width) widths_of(*p.var_width);
        return;
    }
    widths_of(p.width);
    for (const Pattern &c : p.children) collect_vars(c, vars, widths);
}

void check_rhs_bound(const Pattern &rhs, const std::set<std::string> &vars,
                     const std::set<std::string> &widths) {
    if (rhs.is_var) {
        if (!vars.count(rhs.var)) fail(errc::parse, "unbound rhs variable ?" + rhs.var);
        if (rhs.var_width) fail(errc::parse, "rhs variables cannot carry width constraints");
        return;
    }
    if (rhs.width.kind == WidthSpec::Kind::Wildcard)
        fail(errc::parse, "rhs widths must be literal or bound variables");
    if (rhs.width.kind == WidthSpec::Kind::Var && !widths.count(rhs.width.var))
        fail(errc::parse, "unbound rhs width variable " + rhs.width.var);
    for (const Pattern &c : rhs.children) check_rhs_bound(c, vars, widths);
}

bool is_ellipsis(const SExpr &e) { return e.is_atom("..."); }

// `(let Muls (mul:64)...) => (let Bond (bond Muls...))`
Rewrite parse_bonding(const SExpr &lhs, const SExpr &rhs) {
    Rewrite r;
    r.stage = Stage::Bonding;
    if (lhs.items.size() < 3 || !lhs.items[1].is_atom() || !lhs.items[2].is_list())
        fail(errc::parse, "expected (let NAME (op:w) ...) at " + lhs.where());
    r.set_name = lhs.items[1].atom;
    const SExpr &group = lhs.items[2];
    if (group.items.size() != 1 || !group.items[0].is_atom())
        fail(errc::parse, "bond group must be a bare (op:w) at " + group.where());
    auto [head, width] = split_spec_head(group.items[0]);
    auto op = op_from_name(head);
    if (!op) fail(errc::parse, "unknown operator '" + head + "' at " + group.where());
    if (width.kind != WidthSpec::Kind::Literal)
        fail(errc::parse, "bond group width must be literal at " + group.where());
    r.group_op = *op;
    r.group_width = width.literal;
    for (size_t i = 3; i < lhs.items.size(); ++i)
        if (!is_ellipsis(lhs.items[i]))
            fail(errc::parse, "unexpected token after bond group at " + lhs.items[i].where());

    if (rhs.items.size() < 3 || !rhs.items[0].is_atom("let") || !rhs.items[1].is_atom() ||
        !rhs.items[2].is_list())
        fail(errc::parse, "expected (let NAME (bond SET...)) at " + rhs.where());
    r.bond_name = rhs.items[1].atom;
    const SExpr &bondform = rhs.items[2];
    // the ellipsis may be glued to the set name, as in (bond Muls...)
    std::string referenced;
    if (bondform.items.size() >= 2 && bondform.items[1].is_atom()) {
        referenced = bondform.items[1].atom;
        if (referenced.size() > 3 && referenced.compare(referenced.size() - 3, 3, "...") == 0)
            referenced.resize(referenced.size() - 3);
    }
    if (bondform.items.size() < 2 || !bondform.items[0].is_atom("bond") ||
        referenced != r.set_name)
        fail(errc::parse, "bond must reference the gathered set at " + bondform.where());
    r.name = "bond-" + std::string(op_name(*op)) + ":" + std::to_string(r.group_width);
    return r;
}

// `(unify Bond (mul:64 advice:64 advice:64))`
Rewrite parse_unification(const SExpr &form) {
    Rewrite r;
    r.stage = Stage::Unification;
    if (form.items.size() != 3 || !form.items[1].is_atom() || !form.items[2].is_list())
        fail(errc::parse, "expected (unify NAME (op:w advice:w...)) at " + form.where());
    r.bond_name = form.items[1].atom;
    const SExpr &tmpl = form.items[2];
    if (tmpl.items.empty() || !tmpl.items[0].is_atom())
        fail(errc::parse, "malformed template at " + tmpl.where());
    auto [head, width] = split_spec_head(tmpl.items[0]);
    auto op = op_from_name(head);
    if (!op) fail(errc::parse, "unknown operator '" + head + "' at " + tmpl.where());
    if (width.kind != WidthSpec::Kind::Literal)
        fail(errc::parse, "template width must be literal at " + tmpl.where());
    r.tmpl.op = *op;
    r.tmpl.width = width.literal;
    for (size_t i = 1; i < tmpl.items.size(); ++i) {
        const SExpr &leaf = tmpl.items[i];
        if (!leaf.is_atom()) fail(errc::parse, "template leaves must be advice:w at " + leaf.where());
        auto [aname, awidth] = split_spec_head(leaf);
        if (aname != "advice" || awidth.kind != WidthSpec::Kind::Literal)
            fail(errc::parse, "template leaves must be advice:w at " + leaf.where());
        r.tmpl.advice_widths.push_back(awidth.literal);
    }
    if (static_cast<int>(r.tmpl.advice_widths.size()) != op_arity(*op))
        fail(errc::parse, "template needs " + std::to_string(op_arity(*op)) +
                              " advice leaves at " + tmpl.where());
    r.name = "unify-" + r.bond_name;
    return r;
}

} // namespace

Rewrite parse_rule(std::string_view text) {
    auto forms = parse_sexprs(text);
    if (forms.size() == 1) {
        if (forms[0].is_list() && !forms[0].items.empty() && forms[0].items[0].is_atom("unify"))
            return parse_unification(forms[0]);
        fail(errc::parse, "expected LHS => RHS or (unify ...)");
    }
    if (forms.size() != 3 || !forms[1].is_atom("=>"))
        fail(errc::parse, "expected LHS => RHS");

    const SExpr &lhs = forms[0];
    const SExpr &rhs = forms[2];
    if (lhs.is_list() && !lhs.items.empty() && lhs.items[0].is_atom("let"))
        return parse_bonding(lhs, rhs);

    Rewrite r;
    r.stage = Stage::Generic;
    r.lhs = parse_pattern(lhs);
    r.rhs = parse_pattern(rhs);
    if (r.lhs.is_var) fail(errc::parse, "lhs cannot be a bare variable");
    std::set<std::string> vars, widths;
    collect_vars(r.lhs, vars, widths);
    check_rhs_bound(r.rhs, vars, widths);
    std::string trimmed(text.substr(0, std::min<size_t>(text.size(), 40)));
    r.name = trimmed;
    return r;
}

std::vector<Rewrite> parse_rules_file(std::string_view text) {
    std::vector<Rewrite> rules;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        line_no++;
        size_t comment = line.find(';');
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (!blank) {
            try {
                Rewrite r = parse_rule(line);
                r.name = "L" + std::to_string(line_no) + " " + r.name;
                rules.push_back(std::move(r));
            } catch (const Error &e) {
                fail(e.code(), "rule at line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return rules;
}

// ---- e-matching ------------------------------------------------------------

namespace {

struct Binding {
    std::map<std::string, EClassId> vars;
    std::map<std::string, int> widths;
};

bool bind_width(Binding &b, const WidthSpec &spec, int width) {
    switch (spec.kind) {
    case WidthSpec::Kind::Literal: return spec.literal == width;
    case WidthSpec::Kind::Wildcard: return true;
    case WidthSpec::Kind::Var: {
        auto it = b.widths.find(spec.var);
        if (it != b.widths.end()) return it->second == width;
        b.widths[spec.var] = width;
        return true;
    }
    }
    return false;
}

void match_class(const EGraph &g, const Pattern &p, EClassId cls, const Binding &context,
                 std::vector<Binding> &out) {
    cls = g.find(cls);
    if (p.is_var) {
        Binding b = context;
        if (p.var_width && !bind_width(b, *p.var_width, g.eclass(cls).width)) return;
        auto it = b.vars.find(p.var);
        if (it != b.vars.end()) {
            if (it->second != cls) return; // non-linear occurrence must agree
        } else {
            b.vars[p.var] = cls;
        }
        out.push_back(std::move(b));
        return;
    }

    for (const ENode &node : g.eclass(cls).nodes) {
        if (p.sym.kind != node.sym.kind) continue;
        if (p.sym.kind == NodeSym::Kind::Op && p.sym.op != node.sym.op) continue;
        if (p.sym.kind == NodeSym::Kind::Const && p.sym.value != node.sym.value) continue;
        if (p.sym.kind != NodeSym::Kind::Op && p.sym.kind != NodeSym::Kind::Const) continue;

        Binding b = context;
        if (!bind_width(b, p.width, node.width)) continue;

        std::vector<Binding> partial{std::move(b)};
        for (size_t i = 0; i < p.children.size() && !partial.empty(); ++i) {
            std::vector<Binding> next;
            for (const Binding &ctx : partial) match_class(g, p.children[i], node.children[i], ctx, next);
            partial = std::move(next);
        }
        for (Binding &done : partial) out.push_back(std::move(done));
    }
}

std::string match_key(const Match &m) {
    std::ostringstream os;
    os << m.root.value;
    for (const auto &[k, v] : m.vars) os << ";" << k << "=" << v.value;
    for (const auto &[k, v] : m.widths) os << ";" << k << ":" << v;
    return os.str();
}

} // namespace

std::vector<Match> ematch(const EGraph &g, const Pattern &p) {
    if (!g.clean()) fail(errc::not_rebuilt, "ematch needs a rebuilt graph");
    std::vector<Match> matches;
    std::set<std::string> seen;
    for (EClassId cls : g.canonical_ids()) {
        std::vector<Binding> bindings;
        match_class(g, p, cls, Binding{}, bindings);
        for (Binding &b : bindings) {
            Match m{cls, std::move(b.vars), std::move(b.widths)};
            if (seen.insert(match_key(m)).second) matches.push_back(std::move(m));
        }
    }
    return matches;
}

// ---- rewriting -------------------------------------------------------------

namespace {

int resolve_width(const WidthSpec &spec, const Match &m) {
    switch (spec.kind) {
    case WidthSpec::Kind::Literal: return spec.literal;
    case WidthSpec::Kind::Var: return m.widths.at(spec.var);
    case WidthSpec::Kind::Wildcard: fail(errc::structural, "wildcard width in template");
    }
    return 0;
}

EClassId instantiate(EGraph &g, const Pattern &t, const Match &m) {
    if (t.is_var) return m.vars.at(t.var);
    ENode node;
    node.sym = t.sym;
    node.width = resolve_width(t.width, m);
    for (const Pattern &c : t.children) node.children.push_back(instantiate(g, c, m));
    return g.add(node);
}

void apply_one(EGraph &g, const Rewrite &r, const Match &m, size_t &merges) {
    if (r.rhs.is_var) {
        EClassId target = m.vars.at(r.rhs.var);
        if (!g.same(target, m.root)) {
            g.merge(target, m.root);
            merges++;
        }
        return;
    }
    ENode node;
    node.sym = r.rhs.sym;
    node.width = resolve_width(r.rhs.width, m);
    for (const Pattern &c : r.rhs.children) node.children.push_back(instantiate(g, c, m));
    if (auto hit = g.lookup(node)) {
        if (!g.same(*hit, m.root)) {
            g.merge(*hit, m.root);
            merges++;
        }
        return;
    }
    g.add_into(node, m.root);
}

} // namespace

size_t apply_rewrite(EGraph &g, const Rewrite &r, const std::vector<Match> &matches) {
    if (r.stage != Stage::Generic)
        fail(errc::stage, "rule '" + r.name + "' cannot run in the generic stage");
    size_t merges = 0;
    for (const Match &m : matches) {
        if (r.native) {
            r.native(g, m, merges);
        } else {
            apply_one(g, r, m, merges);
        }
    }
    merges += g.rebuild();
    return merges;
}

SaturationReport saturate(EGraph &g, const std::vector<Rewrite> &rules, const Limits &limits) {
    for (const Rewrite &r : rules)
        if (r.stage != Stage::Generic)
            fail(errc::stage, "saturate only accepts generic rules, got '" + r.name + "'");
    g.rebuild();

    const auto start = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        return elapsed > limits.millis;
    };

    SaturationReport rep;
    rep.stop = StopReason::IterLimit;
    for (int iter = 0; iter < limits.iters; ++iter) {
        std::vector<std::vector<Match>> all;
        all.reserve(rules.size());
        for (const Rewrite &r : rules) all.push_back(ematch(g, r.lhs));

        size_t nodes_before = g.enode_count();
        size_t merges = 0;
        for (size_t i = 0; i < rules.size(); ++i) merges += apply_rewrite(g, rules[i], all[i]);

        rep.iterations = iter + 1;
        rep.merges_per_iteration.push_back(merges);

        if (merges == 0 && g.enode_count() == nodes_before) {
            rep.stop = StopReason::Saturated;
            break;
        }
        if (g.enode_count() > limits.nodes) {
            rep.stop = StopReason::NodeLimit;
            break;
        }
        if (out_of_time()) {
            rep.stop = StopReason::TimeLimit;
            break;
        }
    }
    rep.final_classes = g.class_count();
    rep.final_nodes = g.enode_count();
    return rep;
}

PipelineRun run_staged_pipeline(EGraph &g, const std::vector<Rewrite> &generic,
                                const std::vector<Rewrite> &bonding,
                                const std::vector<Rewrite> &unification, const Limits &limits,
                                const std::map<std::string, EClassId> &roots) {
    for (const Rewrite &r : bonding)
        if (r.stage != Stage::Bonding) fail(errc::stage, "'" + r.name + "' is not a bonding rule");
    for (const Rewrite &r : unification)
        if (r.stage != Stage::Unification)
            fail(errc::stage, "'" + r.name + "' is not a unification rule");

    PipelineRun run;
    run.report = saturate(g, generic, limits);

    std::set<std::pair<Op, int>> bonded_groups;
    std::set<std::string> declared;
    for (const Rewrite &r : bonding) {
        declared.insert(r.bond_name);
        if (!bonded_groups.insert({r.group_op, r.group_width}).second) continue;
        auto cands = select_bond_set(g, r.group_op, r.group_width, AncestryConstraint::ForbidRelated);
        if (cands.size() < 2) continue;
        run.records.push_back(bond(g, r.group_op, r.group_width, cands, roots));
        run.record_by_name[r.bond_name] = run.records.size() - 1;
    }

    for (const Rewrite &r : unification) {
        if (!declared.count(r.bond_name))
            fail(errc::stage, "unify references unknown bond '" + r.bond_name + "'");
        auto it = run.record_by_name.find(r.bond_name);
        if (it == run.record_by_name.end()) continue; // group never formed
        unify_with_template(g, run.records[it->second], r.tmpl);
    }

    g.rebuild();
    return run;
}

// ---- shipped rule set ------------------------------------------------------

namespace {

std::optional<uint64_t> class_const(const EGraph &g, EClassId cls) {
    for (const ENode &n : g.eclass(cls).nodes)
        if (n.sym.kind == NodeSym::Kind::Const) return n.sym.value;
    return std::nullopt;
}

bool attach_const(EGraph &g, EClassId root, uint64_t value, int width, size_t &merges) {
    ENode node{NodeSym::make_const(value), width, {}};
    if (auto hit = g.lookup(node)) {
        if (!g.same(*hit, root)) {
            g.merge(*hit, root);
            merges++;
            return true;
        }
        return false;
    }
    g.add_into(node, root);
    return true;
}

NativeApply fold_binary(Op op) {
    return [op](EGraph &g, const Match &m, size_t &merges) {
        auto a = class_const(g, m.vars.at("a"));
        auto b = class_const(g, m.vars.at("b"));
        if (!a || !b) return false;
        int w = m.widths.at("w");
        uint64_t args[2] = {*a, *b};
        return attach_const(g, m.root, eval_op(op, w, args), w, merges);
    };
}

NativeApply fold_unary(Op op) {
    return [op](EGraph &g, const Match &m, size_t &merges) {
        auto x = class_const(g, m.vars.at("x"));
        if (!x) return false;
        int w = m.widths.at("w");
        uint64_t args[1] = {*x};
        return attach_const(g, m.root, eval_op(op, w, args), w, merges);
    };
}

Rewrite named(std::string name, std::string_view text) {
    Rewrite r = parse_rule(text);
    r.name = std::move(name);
    return r;
}

Rewrite native_rule(std::string name, std::string_view lhs_text, NativeApply apply) {
    Rewrite r;
    r.stage = Stage::Generic;
    r.name = std::move(name);
    r.lhs = parse_pattern(parse_one_sexpr(lhs_text));
    r.native = std::move(apply);
    return r;
}

} // namespace

std::vector<Rewrite> default_generic_rules() {
    std::vector<Rewrite> rules;
    rules.push_back(named("upcast-mul",
                          "(mul:bw ?a ?b) => (trunc:bw (mul:64 (zext:64 ?a) (zext:64 ?b)))"));
    rules.push_back(named("upcast-add",
                          "(add:bw ?a ?b) => (trunc:bw (add:64 (zext:64 ?a) (zext:64 ?b)))"));
    rules.push_back(named("comm-mul", "(mul:w ?a ?b) => (mul:w ?b ?a)"));
    rules.push_back(named("comm-add", "(add:w ?a ?b) => (add:w ?b ?a)"));
    rules.push_back(named("add-identity", "(add:w ?a (const:w 0)) => ?a"));
    rules.push_back(named("mul-identity", "(mul:w ?a (const:w 1)) => ?a"));
    rules.push_back(named("zext-identity", "(zext:w ?x:w) => ?x"));
    rules.push_back(named("trunc-identity", "(trunc:w ?x:w) => ?x"));
    rules.push_back(native_rule("fold-add", "(add:w ?a ?b)", fold_binary(Op::Add)));
    rules.push_back(native_rule("fold-mul", "(mul:w ?a ?b)", fold_binary(Op::Mul)));
    rules.push_back(native_rule("fold-zext", "(zext:w ?x)", fold_unary(Op::Zext)));
    rules.push_back(native_rule("fold-trunc", "(trunc:w ?x)", fold_unary(Op::Trunc)));
    return rules;
}

std::vector<Rewrite> default_bonding_rules() {
    std::vector<Rewrite> rules;
    rules.push_back(parse_rule("(let Muls (mul:64)...) => (let BondMul (bond Muls...))"));
    rules.push_back(parse_rule("(let Adds (add:64)...) => (let BondAdd (bond Adds...))"));
    return rules;
}

std::vector<Rewrite> default_unification_rules() {
    std::vector<Rewrite> rules;
    rules.push_back(parse_rule("(unify BondMul (mul:64 advice:64 advice:64))"));
    rules.push_back(parse_rule("(unify BondAdd (add:64 advice:64 advice:64))"));
    return rules;
}

void split_rules(const std::vector<Rewrite> &all, std::vector<Rewrite> &generic,
                 std::vector<Rewrite> &bonding, std::vector<Rewrite> &unification) {
    for (const Rewrite &r : all) {
        switch (r.stage) {
        case Stage::Generic: generic.push_back(r); break;
        case Stage::Bonding: bonding.push_back(r); break;
        case Stage::Unification: unification.push_back(r); break;
        }
    }
}

} // namespace bondsat
