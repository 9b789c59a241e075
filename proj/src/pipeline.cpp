#include "bondsat/pipeline.hpp"

#include "bondsat/dot.hpp"

#include <map>

namespace bondsat {

IngestResult circuit_to_egraph(const Circuit &c) {
    c.validate();
    IngestResult out;
    EGraph &g = out.graph;

    std::vector<EClassId> id_of(c.nodes.size());
    for (NodeRef i = 0; i < c.nodes.size(); ++i) {
        const CircuitNode &n = c.nodes[i];
        switch (n.kind) {
        case CircuitNode::Kind::Input:
            id_of[i] = g.add(ENode{NodeSym::make_input(n.name), n.width, {}});
            out.inputs.emplace_back(n.name, n.width);
            break;
        case CircuitNode::Kind::Const:
            id_of[i] = g.add(ENode{NodeSym::make_const(n.value), n.width, {}});
            break;
        case CircuitNode::Kind::Advice:
            id_of[i] = g.add(ENode{NodeSym::make_advice(n.name), n.width, {}});
            break;
        case CircuitNode::Kind::Op: {
            std::vector<EClassId> children;
            for (NodeRef o : n.operands) children.push_back(id_of[o]);
            id_of[i] = g.add(ENode{NodeSym::make_op(n.op), n.width, std::move(children)});
            break;
        }
        case CircuitNode::Kind::Shared:
            id_of[i] = EClassId{}; // only its use sites carry a value
            break;
        case CircuitNode::Kind::Use: {
            const CircuitNode &sh = c.nodes[n.shared];
            std::vector<EClassId> children;
            for (NodeRef o : n.operands) children.push_back(id_of[o]);
            id_of[i] = g.add(ENode{NodeSym::make_op(sh.op), n.width, std::move(children)});
            break;
        }
        }
    }
    g.rebuild();
    for (const auto &[name, ref] : c.outputs) {
        if (!id_of[ref].valid()) fail(errc::structural, "output references a shared unit directly");
        out.roots.emplace_back(name, id_of[ref]);
    }
    return out;
}

RuleSet RuleSet::defaults() {
    RuleSet rs;
    rs.generic = default_generic_rules();
    rs.bonding = default_bonding_rules();
    rs.unification = default_unification_rules();
    return rs;
}

RuleSet RuleSet::from_text(std::string_view text) {
    RuleSet rs;
    split_rules(parse_rules_file(text), rs.generic, rs.bonding, rs.unification);
    return rs;
}

OptimizeOutcome optimize_circuit(const Circuit &input, const RuleSet &rules, const CostModel &costs,
                                 const Limits &limits, const CheckConfig &check, bool capture_dots) {
    OptimizeOutcome out;
    out.stats_before = circuit_stats(input);
    out.cost_before = circuit_cost(input, costs);

    IngestResult ingest = circuit_to_egraph(input);
    EGraph &g = ingest.graph;
    if (capture_dots) out.egraph_dot_pre = egraph_to_dot(g);

    std::map<std::string, EClassId> root_map(ingest.roots.begin(), ingest.roots.end());
    PipelineRun run =
        run_staged_pipeline(g, rules.generic, rules.bonding, rules.unification, limits, root_map);
    out.saturation = run.report;
    for (const BondRecord &rec : run.records) {
        out.bonds.push_back(BondSummary{std::string(op_name(rec.bnode.op)), rec.bnode.width,
                                        rec.bnode.map.site_count(), rec.template_node.has_value()});
    }
    if (capture_dots) out.egraph_dot_post = egraph_to_dot(g);

    out.optimized = extract_circuit(g, ingest.roots, costs, run.records, ingest.inputs);
    out.stats_after = circuit_stats(out.optimized);
    out.cost_after = circuit_cost(out.optimized, costs);

    CheckMode mode;
    switch (check.mode) {
    case CheckConfig::Mode::Exhaustive: mode = CheckMode::exhaustive(); break;
    case CheckConfig::Mode::Random: mode = CheckMode::random(check.samples, check.seed); break;
    case CheckConfig::Mode::Auto: {
        int bits = 0;
        for (const auto &[name, w] : ingest.inputs) bits += w;
        mode = bits <= check.exhaustive_bits ? CheckMode::exhaustive()
                                             : CheckMode::random(check.samples, check.seed);
        break;
    }
    }
    out.equivalence = check_equivalence(input, out.optimized, mode);
    return out;
}

} // namespace bondsat
