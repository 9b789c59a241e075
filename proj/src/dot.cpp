#include "bondsat/dot.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace bondsat {

std::string egraph_to_dot(const EGraph &g) {
    std::ostringstream os;
    os << "digraph egraph {\n";
    os << "  compound=true;\n";
    os << "  node [fontname=\"monospace\"];\n";

    auto ids = g.canonical_ids();
    // Anchor node per cluster so inter-class edges have a target.
    auto anchor = [](EClassId id) { return "c" + std::to_string(id.value) + "_0"; };

    for (EClassId id : ids) {
        const EClass &cls = g.eclass(id);
        os << "  subgraph cluster_" << id.value << " {\n";
        os << "    label=\"c" << id.value << " :" << cls.width << "\";\n";
        size_t k = 0;
        for (const ENode &n : cls.nodes) {
            os << "    c" << id.value << "_" << k << " [label=\"" << n.sym.display() << ":"
               << n.width << "\"";
            if (n.sym.kind == NodeSym::Kind::Advice) os << ", shape=diamond";
            os << "];\n";
            k++;
        }
        for (size_t b = 0; b < cls.bnodes.size(); ++b) {
            os << "    c" << id.value << "_" << k
               << " [shape=circle, style=filled, fillcolor=black, label=\"\", width=0.25];\n";
            k++;
        }
        os << "  }\n";
    }

    for (EClassId id : ids) {
        const EClass &cls = g.eclass(id);
        size_t k = 0;
        for (const ENode &n : cls.nodes) {
            std::set<uint32_t> targets;
            for (EClassId c : n.children) targets.insert(g.find(c).value);
            for (uint32_t t : targets)
                os << "  c" << id.value << "_" << k << " -> " << anchor(EClassId{t})
                   << " [lhead=cluster_" << t << "];\n";
            k++;
        }
        for (const BNode &b : cls.bnodes) {
            std::set<uint32_t> targets;
            for (const auto &entry : b.map.entries)
                for (EClassId c : entry.children) targets.insert(g.find(c).value);
            for (uint32_t t : targets)
                os << "  c" << id.value << "_" << k << " -> " << anchor(EClassId{t})
                   << " [lhead=cluster_" << t << ", style=dashed];\n";
            k++;
        }
    }

    os << "}\n";
    return os.str();
}

std::string circuit_to_dot(const Circuit &c) {
    std::ostringstream os;
    os << "digraph circuit {\n";
    os << "  rankdir=BT;\n";
    os << "  node [fontname=\"monospace\"];\n";

    for (NodeRef i = 0; i < c.nodes.size(); ++i) {
        const CircuitNode &n = c.nodes[i];
        os << "  n" << i << " [";
        switch (n.kind) {
        case CircuitNode::Kind::Input:
            os << "label=\"" << n.name << " :" << n.width << "\", shape=box";
            break;
        case CircuitNode::Kind::Const: os << "label=\"" << n.value << "\", shape=box"; break;
        case CircuitNode::Kind::Advice:
            os << "label=\"" << n.name << "\", shape=diamond";
            break;
        case CircuitNode::Kind::Op:
            os << "label=\"" << op_name(n.op) << ":" << n.width << "\"";
            break;
        case CircuitNode::Kind::Shared:
            os << "label=\"" << n.name << ": " << op_name(n.op) << ":" << n.width
               << "\", style=filled, fillcolor=lightgrey";
            break;
        case CircuitNode::Kind::Use: os << "label=\"use:" << n.width << "\""; break;
        }
        os << "];\n";
    }
    for (NodeRef i = 0; i < c.nodes.size(); ++i) {
        const CircuitNode &n = c.nodes[i];
        for (NodeRef o : n.operands) os << "  n" << o << " -> n" << i << ";\n";
        if (n.kind == CircuitNode::Kind::Use)
            os << "  n" << n.shared << " -> n" << i << " [style=dashed];\n";
    }
    for (const auto &[name, ref] : c.outputs) {
        os << "  out_" << name << " [label=\"" << name << "\", shape=plaintext];\n";
        os << "  n" << ref << " -> out_" << name << ";\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace bondsat
