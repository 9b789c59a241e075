#include "bondsat/bond.hpp"

#include <algorithm>
#include <set>

namespace bondsat {

bool class_reaches(const EGraph &g, EClassId from, EClassId to) {
    EClassId target = g.find(to);
    std::vector<uint32_t> stack{g.find(from).value};
    std::set<uint32_t> seen;
    while (!stack.empty()) {
        uint32_t cur = stack.back();
        stack.pop_back();
        if (cur == target.value) return true;
        if (!seen.insert(cur).second) continue;
        for (const ENode &n : g.eclass(EClassId{cur}).nodes)
            for (EClassId c : n.children) stack.push_back(g.find(c).value);
    }
    return false;
}

namespace {

// Children-first traversal order over canonical classes; deterministic
// (entry points and children visited by ascending id).
std::vector<EClassId> topo_order(const EGraph &g) {
    std::vector<EClassId> order;
    std::set<uint32_t> done;
    for (EClassId root : g.canonical_ids()) {
        // state: (class, next child edge to process)
        std::vector<std::pair<uint32_t, size_t>> stack;
        std::set<uint32_t> in_stack;
        auto push = [&](uint32_t id) {
            if (done.count(id) || in_stack.count(id)) return;
            stack.emplace_back(id, 0);
            in_stack.insert(id);
        };
        push(g.find(root).value);
        while (!stack.empty()) {
            auto [id, edge] = stack.back();
            std::vector<uint32_t> kids;
            for (const ENode &n : g.eclass(EClassId{id}).nodes)
                for (EClassId c : n.children) kids.push_back(g.find(c).value);
            std::sort(kids.begin(), kids.end());
            kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
            if (edge < kids.size()) {
                stack.back().second++;
                push(kids[edge]);
            } else {
                done.insert(id);
                in_stack.erase(id);
                order.push_back(EClassId{id});
                stack.pop_back();
            }
        }
    }
    return order;
}

const ENode *first_site_node(const EClass &cls, Op op, int width) {
    for (const ENode &n : cls.nodes)
        if (n.sym.is_op(op) && n.width == width) return &n;
    return nullptr;
}

} // namespace

std::vector<BondCandidate> select_bond_set(const EGraph &g, Op op, int width,
                                           AncestryConstraint constraint) {
    if (!g.clean()) fail(errc::not_rebuilt, "select_bond_set needs a rebuilt graph");

    std::vector<BondCandidate> kept;
    for (EClassId cls : topo_order(g)) {
        const EClass &c = g.eclass(cls);
        if (c.has_bnodes()) continue;
        const ENode *site = first_site_node(c, op, width);
        if (!site) continue;

        BondCandidate cand{cls, {}};
        bool viable = true;
        for (EClassId ch : site->children) {
            EClassId cc = g.find(ch);
            if (g.eclass(cc).has_bnodes() || class_reaches(g, cc, cls)) {
                viable = false; // would chain b-nodes or close a cycle
                break;
            }
            cand.children.push_back(cc);
        }
        if (!viable) continue;

        if (constraint == AncestryConstraint::ForbidRelated) {
            for (const BondCandidate &prev : kept) {
                if (class_reaches(g, cand.parent, prev.parent) ||
                    class_reaches(g, prev.parent, cand.parent)) {
                    viable = false;
                    break;
                }
            }
        }
        if (viable) kept.push_back(std::move(cand));
    }

    if (kept.size() < 2) return {};
    return kept;
}

std::optional<EClassId> BondRecord::resolve(EClassId raw) const {
    auto it = pre_bond_fiber.find(raw.value);
    if (it == pre_bond_fiber.end()) return std::nullopt;
    return EClassId{it->second};
}

BondRecord bond(EGraph &g, Op op, int width, const std::vector<BondCandidate> &set,
                const std::map<std::string, EClassId> &roots) {
    if (set.size() < 2) fail(errc::bond_too_small, "bonding needs at least 2 sites");
    if (!g.clean()) fail(errc::not_rebuilt, "bond needs a rebuilt graph");

    std::set<uint32_t> parents;
    for (const BondCandidate &cand : set) {
        EClassId p = g.find(cand.parent);
        if (p != cand.parent) fail(errc::structural, "bond parent is not canonical");
        const EClass &cls = g.eclass(p);
        if (cls.has_bnodes()) fail(errc::structural, "bond parent already holds a b-node");
        if (!first_site_node(cls, op, width))
            fail(errc::structural, "bond parent has no matching site node");
        if (!parents.insert(p.value).second) fail(errc::structural, "bond parents must be distinct");
        for (EClassId ch : cand.children) {
            EClassId cc = g.find(ch);
            if (g.eclass(cc).has_bnodes())
                fail(errc::structural, "bond child resolves into a b-node class");
            if (class_reaches(g, cc, p)) fail(errc::cyclic_bond, "bond child reaches its own site");
        }
    }
    for (size_t i = 0; i < set.size(); ++i) {
        for (size_t j = i + 1; j < set.size(); ++j) {
            if (class_reaches(g, set[i].parent, set[j].parent) ||
                class_reaches(g, set[j].parent, set[i].parent))
                fail(errc::cyclic_bond, "bonded sites must not be ancestors of each other");
        }
    }

    BondRecord rec;
    for (EClassId cls : g.canonical_ids())
        if (g.eclass(cls).has_bnodes()) rec.prior_bond_classes.push_back(cls);

    // Snapshot provenance before the merge makes the parents indistinguishable.
    for (uint32_t id = 0; id < g.id_limit(); ++id) {
        uint32_t f = g.find(EClassId{id}).value;
        if (parents.count(f)) rec.pre_bond_fiber[id] = f;
    }
    for (const auto &[name, root] : roots) {
        if (auto p = rec.resolve(g.find(root))) rec.output_provenance[name] = *p;
    }

    std::vector<BondMap::Entry> entries;
    for (const BondCandidate &cand : set) {
        BondMap::Entry e{cand.parent, {}};
        for (EClassId ch : cand.children) e.children.push_back(g.find(ch));
        entries.push_back(std::move(e));
    }
    rec.bnode = BNode{g.fresh_bnode_symbol(), op, width, BondMap::make(std::move(entries))};

    EClassId bclass = g.fresh_class(width);
    g.attach_bnode(rec.bnode, bclass);
    EClassId merged = bclass;
    for (const BondCandidate &cand : set) merged = g.merge(merged, cand.parent);
    g.rebuild(); // bond classes are opaque, so this only drains the worklist
    rec.bond_class = g.find(merged);
    return rec;
}

EClassId unify_with_template(EGraph &g, BondRecord &rec, const UnifyTemplate &tmpl) {
    if (static_cast<int>(tmpl.advice_widths.size()) != op_arity(tmpl.op))
        fail(errc::structural, "template arity does not match its operator");
    if (tmpl.advice_widths.size() != rec.bnode.map.child_arity())
        fail(errc::structural, "template arity does not match the bond-map child lists");
    if (tmpl.op != rec.bnode.op || tmpl.width != rec.bnode.width)
        fail(errc::structural, "template op/width must match the bonded sites");

    std::vector<EClassId> advice;
    for (int w : tmpl.advice_widths) {
        std::string name = "adv" + std::to_string(g.fresh_advice_serial());
        advice.push_back(g.add(ENode{NodeSym::make_advice(name), w, {}}));
    }
    ENode node{NodeSym::make_op(tmpl.op), tmpl.width, advice};
    EClassId cls = g.add_into(node, rec.bond_class);
    g.mark_template(cls, g.eclass(cls).nodes.size() - 1);

    if (!rec.template_node) {
        rec.template_node = node;
        rec.advice_classes = advice;
        rec.template_advice_widths = tmpl.advice_widths;
    }
    return cls;
}

DispersedBond disperse(const BondRecord &rec, BondChoice choice, CircuitBuilder &builder,
                       const std::unordered_map<uint32_t, NodeRef> &extracted_children) {
    for (const auto &entry : rec.bnode.map.entries)
        for (EClassId c : entry.children)
            if (!extracted_children.count(c.value))
                fail(errc::incomplete_extraction,
                     "missing extracted child c" + std::to_string(c.value));

    DispersedBond out;
    if (choice == BondChoice::BNodeChosen) {
        for (const auto &entry : rec.bnode.map.entries) {
            std::vector<NodeRef> operands;
            for (EClassId c : entry.children) operands.push_back(extracted_children.at(c.value));
            out.sites.emplace_back(entry.parent,
                                   builder.op(rec.bnode.op, rec.bnode.width, std::move(operands)));
        }
    } else {
        if (!rec.template_node)
            fail(errc::structural, "template choice without a unified template");
        NodeRef shared =
            builder.shared_unit(rec.bnode.op, rec.bnode.width, rec.template_advice_widths);
        out.shared = shared;
        for (const auto &entry : rec.bnode.map.entries) {
            std::vector<NodeRef> bound;
            for (EClassId c : entry.children) bound.push_back(extracted_children.at(c.value));
            out.sites.emplace_back(entry.parent, builder.use_site(shared, std::move(bound)));
        }
    }
    return out;
}

} // namespace bondsat
