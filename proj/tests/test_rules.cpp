#include "bondsat/rules.hpp"

#include "bondsat/pipeline.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <set>

using namespace bondsat;
using namespace bondsat::test;

TEST_CASE("parsing the upcast rule yields a generic rewrite with a width variable") {
    Rewrite r = parse_rule("(mul:bw ?a ?b) => (trunc:bw (mul:64 (zext:64 ?a) (zext:64 ?b)))");
    CHECK(r.stage == Stage::Generic);
    CHECK(r.lhs.sym.is_op(Op::Mul));
    CHECK(r.lhs.width.kind == WidthSpec::Kind::Var);
    CHECK(r.lhs.width.var == "bw");
    CHECK(r.rhs.sym.is_op(Op::Trunc));
    CHECK(r.rhs.children.size() == 1);
}

TEST_CASE("parsing the gather/bond rule yields a bonding rewrite") {
    Rewrite r = parse_rule("(let Muls (mul:64)...) => (let Bond (bond Muls...))");
    CHECK(r.stage == Stage::Bonding);
    CHECK(r.group_op == Op::Mul);
    CHECK(r.group_width == 64);
    CHECK(r.set_name == "Muls");
    CHECK(r.bond_name == "Bond");
}

TEST_CASE("parsing the unify rule yields a unification rewrite") {
    Rewrite r = parse_rule("(unify Bond (mul:64 advice:64 advice:64))");
    CHECK(r.stage == Stage::Unification);
    CHECK(r.bond_name == "Bond");
    CHECK(r.tmpl.op == Op::Mul);
    CHECK(r.tmpl.width == 64);
    CHECK(r.tmpl.advice_widths == std::vector<int>{64, 64});
}

TEST_CASE("rule parse errors") {
    CHECK_THROWS_AS(parse_rule("(mul:w ?a ?b) => (mul:w ?a ?c)"), Error); // unbound rhs var
    CHECK_THROWS_AS(parse_rule("(div:w ?a ?b) => ?a"), Error);            // unknown op
    CHECK_THROWS_AS(parse_rule("(mul:w ?a ?b) => (mul:x ?a ?b)"), Error); // unbound rhs width
    CHECK_THROWS_AS(parse_rule("(mul:99 ?a ?b) => ?a"), Error);           // width out of range
    CHECK_THROWS_AS(parse_rule("(mul:8 ?a ?b)"), Error);                  // missing =>
    CHECK_THROWS_AS(parse_rule("(unify Bond (mul:64 advice:64))"), Error); // arity mismatch
}

TEST_CASE("rule files take one rule per line with comments") {
    auto rules = parse_rules_file(read_file(fixture_path("share_mul_w32.rules")));
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].stage == Stage::Bonding);
    CHECK(rules[0].group_width == 32);
    CHECK(rules[1].stage == Stage::Unification);
}

TEST_CASE("ematch finds a single match when the sites are congruent") {
    // duplicate components collapse by hashconsing, so (mul:64 ?a ?b) has one match
    EGraph g;
    EClassId a = g.add(input_node("a", 64));
    EClassId b = g.add(input_node("b", 64));
    g.add(op_node(Op::Mul, 64, {a, b}));
    g.add(op_node(Op::Mul, 64, {a, b}));
    g.rebuild();
    auto matches = ematch(g, parse_rule("(mul:64 ?a ?b) => (mul:64 ?b ?a)").lhs);
    CHECK(matches.size() == 1);
}

TEST_CASE("a bare variable pattern matches every class") {
    EGraph g;
    EClassId a = g.add(input_node("a", 8));
    EClassId b = g.add(input_node("b", 8));
    g.add(op_node(Op::Add, 8, {a, b}));
    g.rebuild();
    Pattern p;
    p.is_var = true;
    p.var = "x";
    CHECK(ematch(g, p).size() == g.class_count());
}

TEST_CASE("non-linear patterns require equal canonical classes") {
    EGraph g;
    EClassId x = g.add(input_node("x", 32));
    EClassId y = g.add(input_node("y", 32));
    EClassId xx = g.add(op_node(Op::Add, 32, {x, x}));
    g.add(op_node(Op::Add, 32, {x, y}));
    g.rebuild();
    auto matches = ematch(g, parse_rule("(add:32 ?a ?a) => ?a").lhs);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].root == g.find(xx));
}

TEST_CASE("ematch agrees with brute-force tree enumeration on small graphs") {
    std::mt19937_64 rng(99);
    std::vector<Pattern> patterns = {
        parse_rule("(add:w ?a ?b) => (add:w ?b ?a)").lhs,
        parse_rule("(add:4 ?a ?a) => ?a").lhs,
        parse_rule("(xor:4 (add:4 ?a ?b) ?c) => ?a").lhs,
        parse_rule("(zext:w ?x:w) => ?x").lhs,
    };
    for (int trial = 0; trial < 30; ++trial) {
        GenOptions opt;
        opt.inputs = 2;
        opt.max_nodes = 10;
        opt.widths = {4};
        Circuit c = gen_circuit(rng, opt);
        IngestResult in = circuit_to_egraph(c);
        EGraph &g = in.graph;
        if (g.class_count() > 8) continue;

        for (const Pattern &p : patterns) {
            std::set<std::string> expected;
            for (EClassId cls : g.canonical_ids()) {
                std::vector<GroundTree> trees;
                enumerate_trees(g, cls, 3, trees);
                for (const GroundTree &t : trees) {
                    std::map<std::string, EClassId> vars;
                    std::map<std::string, int> widths;
                    if (tree_match(p, t, vars, widths)) {
                        std::ostringstream key;
                        key << g.find(cls).value;
                        for (auto &[k, v] : vars) key << ";" << k << "=" << g.find(v).value;
                        for (auto &[k, v] : widths) key << ";" << k << ":" << v;
                        expected.insert(key.str());
                    }
                }
            }
            std::set<std::string> got;
            for (const Match &m : ematch(g, p)) {
                std::ostringstream key;
                key << m.root.value;
                for (auto &[k, v] : m.vars) key << ";" << k << "=" << v.value;
                for (auto &[k, v] : m.widths) key << ";" << k << ":" << v;
                got.insert(key.str());
            }
            CHECK(got == expected);
        }
    }
}

TEST_CASE("applying the upcast rule adds the widened form into the same class") {
    EGraph g;
    EClassId a = g.add(input_node("a", 8));
    EClassId b = g.add(input_node("b", 8));
    EClassId m = g.add(op_node(Op::Mul, 8, {a, b}));
    g.rebuild();

    Rewrite up = parse_rule("(mul:bw ?a ?b) => (trunc:bw (mul:64 (zext:64 ?a) (zext:64 ?b)))");
    auto matches = ematch(g, up.lhs);
    size_t merges = apply_rewrite(g, up, matches);
    CHECK(merges == 0); // new structure, no new equalities

    bool found = false;
    for (const ENode &n : g.eclass(m).nodes)
        if (n.sym.is_op(Op::Trunc)) found = true;
    CHECK(found);

    // re-applying the same matches is absorbed by the hashcons
    size_t nodes = g.enode_count();
    CHECK(apply_rewrite(g, up, matches) == 0);
    CHECK(g.enode_count() == nodes);

    // together with the width identities the upcast closes out
    std::vector<Rewrite> closing = {up, parse_rule("(zext:w ?x:w) => ?x"),
                                    parse_rule("(trunc:w ?x:w) => ?x")};
    SaturationReport rep = saturate(g, closing, Limits{});
    CHECK(rep.stop == StopReason::Saturated);
}

TEST_CASE("commutativity adds one node and no merges") {
    EGraph g;
    EClassId x = g.add(input_node("x", 8));
    EClassId y = g.add(input_node("y", 8));
    EClassId root = g.add(op_node(Op::Add, 8, {x, y}));
    g.rebuild();

    Rewrite comm = parse_rule("(add:w ?a ?b) => (add:w ?b ?a)");
    size_t before = g.enode_count();
    size_t merges = apply_rewrite(g, comm, ematch(g, comm.lhs));
    CHECK(merges == 0);
    CHECK(g.enode_count() == before + 1);
    CHECK(g.eclass(root).nodes.size() == 2);
}

TEST_CASE("saturate with no rules reports saturation after one iteration") {
    EGraph g;
    g.add(input_node("x", 8));
    SaturationReport rep = saturate(g, {}, Limits{});
    CHECK(rep.iterations == 1);
    CHECK(rep.stop == StopReason::Saturated);
    CHECK(rep.merges_per_iteration == std::vector<size_t>{0});
}

TEST_CASE("the default rule set saturates the duplicate-pair fixture") {
    IngestResult in = circuit_to_egraph(load_fixture("duplicate_pair.circuit"));
    SaturationReport rep = saturate(in.graph, default_generic_rules(), Limits{});
    CHECK(rep.stop == StopReason::Saturated);
    CHECK(rep.merges_per_iteration.back() == 0);
}

TEST_CASE("an explosive associativity rule hits the node limit") {
    EGraph g;
    std::vector<EClassId> xs;
    for (int i = 0; i < 6; ++i) xs.push_back(g.add(input_node("x" + std::to_string(i), 8)));
    EClassId sum = xs[0];
    for (int i = 1; i < 6; ++i) sum = g.add(op_node(Op::Add, 8, {sum, xs[i]}));
    g.rebuild();

    std::vector<Rewrite> rules = {
        parse_rule("(add:w (add:w ?a ?b) ?c) => (add:w ?a (add:w ?b ?c))"),
        parse_rule("(add:w ?a ?b) => (add:w ?b ?a)"),
    };
    Limits limits;
    limits.nodes = 500;
    SaturationReport rep = saturate(g, rules, limits);
    CHECK(rep.stop == StopReason::NodeLimit);
    CHECK(rep.final_nodes > 500);
}

TEST_CASE("saturate rejects staged rules") {
    EGraph g;
    g.add(input_node("x", 8));
    auto bondrule = parse_rule("(let Muls (mul:64)...) => (let B (bond Muls...))");
    CHECK_THROWS_AS(saturate(g, {bondrule}, Limits{}), Error);
    CHECK_THROWS_AS(apply_rewrite(g, bondrule, {}), Error);
}

TEST_CASE("the staged pipeline bonds and unifies the two-site circuit") {
    IngestResult in = circuit_to_egraph(load_fixture("distinct_pair.circuit"));
    EGraph &g = in.graph;
    std::map<std::string, EClassId> roots(in.roots.begin(), in.roots.end());

    PipelineRun run = run_staged_pipeline(g, default_generic_rules(), default_bonding_rules(),
                                          default_unification_rules(), Limits{}, roots);
    REQUIRE(run.records.size() >= 1);
    const BondRecord &mulrec = run.records[run.record_by_name.at("BondMul")];
    CHECK(mulrec.bnode.map.site_count() == 2);
    CHECK(mulrec.template_node.has_value());

    bool advice_mul = false;
    for (size_t idx : g.eclass(mulrec.bond_class).template_nodes) {
        const ENode &n = g.eclass(mulrec.bond_class).nodes[idx];
        if (n.sym.is_op(Op::Mul) && n.width == 64) advice_mul = true;
    }
    CHECK(advice_mul);
}

TEST_CASE("a pipeline with no bonding rules behaves exactly like saturate") {
    IngestResult a = circuit_to_egraph(load_fixture("duplicate_pair.circuit"));
    IngestResult b = circuit_to_egraph(load_fixture("duplicate_pair.circuit"));
    SaturationReport plain = saturate(a.graph, default_generic_rules(), Limits{});
    PipelineRun staged =
        run_staged_pipeline(b.graph, default_generic_rules(), {}, {}, Limits{});
    CHECK(staged.records.empty());
    CHECK(plain.iterations == staged.report.iterations);
    CHECK(plain.final_classes == staged.report.final_classes);
    CHECK(plain.final_nodes == staged.report.final_nodes);
}

TEST_CASE("rerunning the pipeline on its own output graph forms no new bonds") {
    IngestResult in = circuit_to_egraph(load_fixture("distinct_pair.circuit"));
    EGraph &g = in.graph;
    PipelineRun first = run_staged_pipeline(g, default_generic_rules(), default_bonding_rules(),
                                            default_unification_rules(), Limits{});
    REQUIRE(!first.records.empty());
    PipelineRun second = run_staged_pipeline(g, {}, default_bonding_rules(),
                                             default_unification_rules(), Limits{});
    CHECK(second.records.empty());
}

TEST_CASE("unify referencing an undeclared bond name is a stage error") {
    IngestResult in = circuit_to_egraph(load_fixture("distinct_pair.circuit"));
    auto unify = parse_rule("(unify Nope (mul:64 advice:64 advice:64))");
    CHECK_THROWS_AS(
        run_staged_pipeline(in.graph, {}, default_bonding_rules(), {unify}, Limits{}),
        Error);
}
