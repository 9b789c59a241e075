#include "bondsat/extract.hpp"

#include "bondsat/sexpr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace bondsat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double CostModel::op_cost(Op op, int width) const {
    auto it = op_costs.find({static_cast<int>(op), width});
    if (it != op_costs.end()) return it->second;
    switch (op) {
    case Op::Mul: return static_cast<double>(width);
    case Op::Add:
    case Op::Sub: return static_cast<double>((width + 7) / 8);
    case Op::And:
    case Op::Or:
    case Op::Xor: return 1.0;
    case Op::Zext:
    case Op::Trunc: return 0.0;
    }
    return 0.0;
}

CostModel CostModel::parse(std::string_view text) {
    CostModel m;
    size_t pos = 0;
    size_t line_no = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                       : nl - pos));
        line_no++;
        if (size_t c = line.find(';'); c != std::string::npos) line.resize(c);
        std::istringstream is(line);
        std::string key, eq, value;
        if (is >> key) {
            if (!(is >> eq >> value) || eq != "=")
                fail(errc::parse, "cost line " + std::to_string(line_no) + ": expected KEY = VALUE");
            double cost = 0;
            try {
                cost = std::stod(value);
            } catch (...) {
                fail(errc::parse, "cost line " + std::to_string(line_no) + ": bad value");
            }
            if (cost < 0 || !std::isfinite(cost))
                fail(errc::bad_value, "cost line " + std::to_string(line_no) +
                                          ": costs must be nonnegative");
            if (key == "use_route") {
                m.use_route = cost;
            } else {
                size_t colon = key.find(':');
                if (colon == std::string::npos)
                    fail(errc::parse, "cost line " + std::to_string(line_no) + ": expected op:width");
                auto op = op_from_name(key.substr(0, colon));
                if (!op)
                    fail(errc::parse, "cost line " + std::to_string(line_no) + ": unknown op");
                int w = 0;
                try {
                    w = std::stoi(key.substr(colon + 1));
                } catch (...) {
                    fail(errc::parse, "cost line " + std::to_string(line_no) + ": bad width");
                }
                if (!width_ok(w))
                    fail(errc::parse, "cost line " + std::to_string(line_no) + ": bad width");
                m.op_costs[{static_cast<int>(*op), w}] = cost;
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return m;
}

double ClassCosts::at(const EGraph &g, EClassId id) const {
    auto it = cost.find(g.find(id).value);
    return it == cost.end() ? kInf : it->second;
}

namespace {

double leaf_or_op_cost(const CostModel &m, const NodeSym &sym, int width) {
    return sym.kind == NodeSym::Kind::Op ? m.op_cost(sym.op, width) : 0.0;
}

// Candidate comparison: lower cost, then e-node before b-node, then
// lexicographic op, then insertion order.
struct Candidate {
    double cost = kInf;
    int kind_rank = 0; // 0 = e-node/template, 1 = b-node
    std::string op;
    size_t index = 0;
    Choice choice;

    bool better_than(const Candidate &o) const {
        if (cost != o.cost) return cost < o.cost;
        if (kind_rank != o.kind_rank) return kind_rank < o.kind_rank;
        if (op != o.op) return op < o.op;
        return index < o.index;
    }
};

} // namespace

ClassCosts class_costs(const EGraph &g, const CostModel &m) {
    ClassCosts out;
    auto ids = g.canonical_ids();

    bool changed = true;
    while (changed) {
        changed = false;
        for (EClassId id : ids) {
            const EClass &cls = g.eclass(id);
            Candidate best;

            if (cls.has_bnodes()) {
                const BNode &bn = cls.bnodes.front();
                double site_children = 0;
                for (const auto &entry : bn.map.entries)
                    for (EClassId c : entry.children) site_children += out.at(g, c);

                Candidate bnode;
                bnode.cost = site_children +
                             static_cast<double>(bn.map.site_count()) * m.op_cost(bn.op, bn.width);
                bnode.kind_rank = 1;
                bnode.op = op_name(bn.op);
                bnode.choice = Choice{Choice::Kind::BNode, 0};
                best = bnode;

                for (size_t idx : cls.template_nodes) {
                    const ENode &t = cls.nodes[idx];
                    Candidate tc;
                    tc.cost = leaf_or_op_cost(m, t.sym, t.width) +
                              static_cast<double>(bn.map.site_count()) *
                                  static_cast<double>(bn.map.child_arity()) * m.use_route +
                              site_children;
                    tc.kind_rank = 0;
                    tc.op = t.sym.kind == NodeSym::Kind::Op ? op_name(t.sym.op) : t.sym.display();
                    tc.index = idx;
                    tc.choice = Choice{Choice::Kind::Template, idx};
                    if (tc.better_than(best)) best = tc;
                }
            } else {
                for (size_t idx = 0; idx < cls.nodes.size(); ++idx) {
                    const ENode &n = cls.nodes[idx];
                    Candidate c;
                    c.cost = leaf_or_op_cost(m, n.sym, n.width);
                    for (EClassId ch : n.children) c.cost += out.at(g, ch);
                    c.kind_rank = 0;
                    c.op = n.sym.kind == NodeSym::Kind::Op ? op_name(n.sym.op) : n.sym.display();
                    c.index = idx;
                    c.choice = Choice{Choice::Kind::ENode, idx};
                    if (c.better_than(best)) best = c;
                }
            }

            if (best.cost < out.at(g, id)) {
                out.cost[id.value] = best.cost;
                out.choice[id.value] = best.choice;
                changed = true;
            }
        }
    }
    return out;
}

double circuit_cost(const Circuit &c, const CostModel &m) {
    double total = 0;
    for (const CircuitNode &n : c.nodes) {
        switch (n.kind) {
        case CircuitNode::Kind::Op: total += m.op_cost(n.op, n.width); break;
        case CircuitNode::Kind::Shared: total += m.op_cost(n.op, n.width); break;
        case CircuitNode::Kind::Use: total += static_cast<double>(n.operands.size()) * m.use_route; break;
        default: break;
        }
    }
    return total;
}

namespace {

// Shared walking machinery for the greedy extractor and the brute-force
// oracle; the choice function is the only difference.
struct ExtractionEngine {
    const EGraph &g;
    const std::vector<BondRecord> &recs;
    std::function<Choice(EClassId)> choose;

    CircuitBuilder builder;
    std::unordered_map<uint32_t, NodeRef> done;
    std::unordered_map<const BondRecord *, DispersedBond> dispersed;
    std::set<uint32_t> in_progress;

    std::map<uint32_t, const BondRecord *> rec_of;

    ExtractionEngine(const EGraph &g_, const std::vector<BondRecord> &recs_,
                     std::function<Choice(EClassId)> choose_)
        : g(g_), recs(recs_), choose(std::move(choose_)) {
        for (const BondRecord &r : recs) rec_of[g.find(r.bond_class).value] = &r;
    }

    const DispersedBond &materialize_bond(const BondRecord *rec) {
        auto it = dispersed.find(rec);
        if (it != dispersed.end()) return it->second;
        EClassId bclass = g.find(rec->bond_class);
        if (!in_progress.insert(bclass.value).second)
            fail(errc::cycle, "extraction revisited a bond class");

        std::unordered_map<uint32_t, NodeRef> children;
        for (const auto &entry : rec->bnode.map.entries)
            for (EClassId c : entry.children) children[c.value] = ref_for(c);

        Choice ch = choose(bclass);
        BondChoice bc = ch.kind == Choice::Kind::Template ? BondChoice::TemplateChosen
                                                          : BondChoice::BNodeChosen;
        DispersedBond d = disperse(*rec, bc, builder, children);
        in_progress.erase(bclass.value);
        return dispersed.emplace(rec, std::move(d)).first->second;
    }

    NodeRef ref_for(EClassId raw) {
        EClassId can = g.find(raw);
        auto rit = rec_of.find(can.value);
        if (rit != rec_of.end()) {
            const BondRecord *rec = rit->second;
            auto parent = rec->resolve(raw);
            if (!parent)
                fail(errc::structural,
                     "reference c" + std::to_string(raw.value) + " has no bond provenance");
            const DispersedBond &d = materialize_bond(rec);
            auto site = d.site_of(*parent);
            if (!site) fail(errc::structural, "bond dispersion lost a site");
            return *site;
        }

        auto dit = done.find(can.value);
        if (dit != done.end()) return dit->second;
        if (!in_progress.insert(can.value).second)
            fail(errc::cycle, "cyclic extraction choice at class " + std::to_string(can.value));

        const EClass &cls = g.eclass(can);
        Choice ch = choose(can);
        if (ch.kind != Choice::Kind::ENode || ch.node_index >= cls.nodes.size())
            fail(errc::structural, "invalid extraction choice");
        const ENode &n = cls.nodes[ch.node_index];

        NodeRef ref = 0;
        switch (n.sym.kind) {
        case NodeSym::Kind::Input: ref = builder.input(n.sym.name, n.width); break;
        case NodeSym::Kind::Const: ref = builder.constant(n.sym.value, n.width); break;
        case NodeSym::Kind::Advice:
            fail(errc::structural, "free advice leaf reached during extraction");
        case NodeSym::Kind::Op: {
            std::vector<NodeRef> operands;
            for (EClassId c : n.children) operands.push_back(ref_for(c));
            ref = builder.op(n.sym.op, n.width, std::move(operands));
            break;
        }
        }
        in_progress.erase(can.value);
        done[can.value] = ref;
        return ref;
    }
};

} // namespace

Circuit extract_circuit(const EGraph &g, const Roots &roots, const CostModel &m,
                        const std::vector<BondRecord> &recs,
                        const std::vector<std::pair<std::string, int>> &declared_inputs) {
    ClassCosts costs = class_costs(g, m);
    for (const auto &[name, root] : roots) {
        if (costs.at(g, root) == kInf)
            fail(errc::unextractable, "root " + name + " has infinite cost");
    }

    ExtractionEngine engine(g, recs, [&](EClassId id) { return costs.choice.at(g.find(id).value); });
    for (const auto &[name, width] : declared_inputs) engine.builder.input(name, width);

    std::vector<std::pair<std::string, NodeRef>> outputs;
    for (const auto &[name, root] : roots) outputs.emplace_back(name, engine.ref_for(root));
    return engine.builder.finish(std::move(outputs));
}

namespace {

// Reachable canonical classes; bond classes contribute their bond-map
// children rather than their member nodes.
std::vector<EClassId> reachable_classes(const EGraph &g, const Roots &roots,
                                        const std::map<uint32_t, const BondRecord *> &rec_of) {
    std::set<uint32_t> seen;
    std::vector<uint32_t> stack;
    for (const auto &[name, r] : roots) stack.push_back(g.find(r).value);
    while (!stack.empty()) {
        uint32_t id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        auto rit = rec_of.find(id);
        if (rit != rec_of.end()) {
            for (const auto &entry : rit->second->bnode.map.entries)
                for (EClassId c : entry.children) stack.push_back(g.find(c).value);
            continue;
        }
        for (const ENode &n : g.eclass(EClassId{id}).nodes)
            for (EClassId c : n.children) stack.push_back(g.find(c).value);
    }
    std::vector<EClassId> out;
    for (uint32_t v : seen) out.push_back(EClassId{v});
    std::sort(out.begin(), out.end());
    return out;
}

size_t class_depth(const EGraph &g, EClassId cls, const std::map<uint32_t, const BondRecord *> &rec_of,
                   std::set<uint32_t> &path) {
    uint32_t id = g.find(cls).value;
    if (path.count(id)) return 0; // ignore cycles
    path.insert(id);
    size_t best = 0;
    auto visit_child = [&](EClassId c) { best = std::max(best, class_depth(g, c, rec_of, path)); };
    auto rit = rec_of.find(id);
    if (rit != rec_of.end()) {
        for (const auto &entry : rit->second->bnode.map.entries)
            for (EClassId c : entry.children) visit_child(c);
    } else {
        for (const ENode &n : g.eclass(EClassId{id}).nodes)
            for (EClassId c : n.children) visit_child(c);
    }
    path.erase(id);
    return best + 1;
}

} // namespace

std::pair<Circuit, double> brute_force_extract(const EGraph &g, const Roots &roots,
                                               const CostModel &m,
                                               const std::vector<BondRecord> &recs,
                                               const BruteForceBounds &bounds) {
    std::map<uint32_t, const BondRecord *> rec_of;
    for (const BondRecord &r : recs) rec_of[g.find(r.bond_class).value] = &r;

    std::vector<EClassId> classes = reachable_classes(g, roots, rec_of);
    if (classes.size() > bounds.max_classes)
        fail(errc::too_large, "graph has " + std::to_string(classes.size()) + " reachable classes");
    for (const auto &[name, r] : roots) {
        std::set<uint32_t> path;
        if (class_depth(g, r, rec_of, path) > bounds.max_depth)
            fail(errc::too_large, "graph deeper than " + std::to_string(bounds.max_depth));
    }

    // Per-class choice alternatives.
    std::vector<std::vector<Choice>> alternatives;
    for (EClassId cls : classes) {
        std::vector<Choice> alts;
        const EClass &c = g.eclass(cls);
        if (rec_of.count(cls.value)) {
            alts.push_back(Choice{Choice::Kind::BNode, 0});
            for (size_t idx : c.template_nodes) alts.push_back(Choice{Choice::Kind::Template, idx});
        } else {
            for (size_t idx = 0; idx < c.nodes.size(); ++idx)
                alts.push_back(Choice{Choice::Kind::ENode, idx});
        }
        if (alts.empty()) fail(errc::unextractable, "empty class during enumeration");
        alternatives.push_back(std::move(alts));
    }

    std::map<uint32_t, size_t> class_slot;
    for (size_t i = 0; i < classes.size(); ++i) class_slot[classes[i].value] = i;

    std::optional<Circuit> best;
    double best_cost = kInf;

    std::vector<size_t> pick(classes.size(), 0);
    while (true) {
        auto choose = [&](EClassId id) {
            return alternatives[class_slot.at(g.find(id).value)][pick[class_slot.at(g.find(id).value)]];
        };
        try {
            ExtractionEngine engine(g, recs, choose);
            std::vector<std::pair<std::string, NodeRef>> outputs;
            for (const auto &[name, root] : roots) outputs.emplace_back(name, engine.ref_for(root));
            Circuit c = engine.builder.finish(std::move(outputs));
            double cost = circuit_cost(c, m);
            if (cost < best_cost) {
                best_cost = cost;
                best = std::move(c);
            }
        } catch (const Error &e) {
            if (e.code() != errc::cycle) throw; // cyclic assignments are skipped
        }

        size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < alternatives[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }

    if (!best) fail(errc::unextractable, "no acyclic choice function exists");
    return {std::move(*best), best_cost};
}

} // namespace bondsat
