#include "bondsat/egraph.hpp"

#include <algorithm>
#include <sstream>

namespace bondsat {

std::string NodeSym::display() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::Op: os << op_name(op); break;
    case Kind::Const: os << "const " << value; break;
    case Kind::Input: os << "in " << name; break;
    case Kind::Advice: os << "advice " << name; break;
    }
    return os.str();
}

std::string ENode::display() const {
    std::ostringstream os;
    os << sym.display() << ":" << width;
    for (EClassId c : children) os << " c" << c.value;
    return os.str();
}

void EGraph::check_exists(EClassId id) const {
    if (!id.valid() || id.value >= uf_.size())
        fail(errc::structural, "unknown e-class id " + std::to_string(id.value));
}

void EGraph::check_node(const ENode &node) const {
    if (!width_ok(node.width))
        fail(errc::structural, "node width out of range: " + std::to_string(node.width));
    if (static_cast<int>(node.children.size()) != node.sym.arity())
        fail(errc::structural, "arity mismatch for " + node.sym.display());
    for (EClassId c : node.children) check_exists(c);
}

EClassId EGraph::find(EClassId id) const {
    check_exists(id);
    uint32_t v = id.value;
    while (uf_[v] != v) v = uf_[v];
    return EClassId{v};
}

ENode EGraph::canonical(ENode node) const {
    for (EClassId &c : node.children) c = find(c);
    return node;
}

ENode EGraph::semi_canonical(ENode node) const {
    for (EClassId &c : node.children) {
        EClassId cc = find(c);
        if (!classes_[cc.value]->has_bnodes()) c = cc;
    }
    return node;
}

EClassId EGraph::fresh_class(int width) {
    uint32_t id = static_cast<uint32_t>(uf_.size());
    uf_.push_back(id);
    EClass cls;
    cls.width = width;
    classes_.emplace_back(std::move(cls));
    return EClassId{id};
}

EClass &EGraph::class_mut(EClassId id) {
    EClassId c = find(id);
    return *classes_[c.value];
}

const EClass &EGraph::eclass(EClassId id) const {
    EClassId c = find(id);
    return *classes_[c.value];
}

std::optional<EClassId> EGraph::lookup(const ENode &node) const {
    // Keys keep bond-resolving slots raw so consumers of distinct bonded
    // sites never collide.
    ENode key = semi_canonical(node);
    auto it = hashcons_.find(key);
    if (it == hashcons_.end()) return std::nullopt;
    return find(it->second);
}

EClassId EGraph::add(ENode node) {
    check_node(node);
    ENode key = semi_canonical(node);
    if (auto it = hashcons_.find(key); it != hashcons_.end()) return find(it->second);

    EClassId id = fresh_class(key.width);
    classes_[id.value]->nodes.push_back(key);
    enode_count_++;
    std::vector<uint32_t> attached;
    for (EClassId c : key.children) {
        uint32_t cc = find(c).value;
        if (std::find(attached.begin(), attached.end(), cc) != attached.end()) continue;
        attached.push_back(cc);
        classes_[cc]->parents.emplace_back(key, id);
    }
    hashcons_[key] = id;
    return id;
}

EClassId EGraph::add_into(ENode node, EClassId target) {
    check_node(node);
    EClassId tcan = find(target);
    ENode key = semi_canonical(node);
    if (auto it = hashcons_.find(key); it != hashcons_.end()) {
        EClassId existing = find(it->second);
        if (existing != tcan) merge(existing, tcan);
        return find(target);
    }
    EClass &cls = *classes_[tcan.value];
    if (cls.width != node.width)
        fail(errc::width_mismatch, "node width " + std::to_string(node.width) +
                                       " does not match class width " + std::to_string(cls.width));
    cls.nodes.push_back(key);
    enode_count_++;
    std::vector<uint32_t> attached;
    for (EClassId c : key.children) {
        uint32_t cc = find(c).value;
        if (std::find(attached.begin(), attached.end(), cc) != attached.end()) continue;
        attached.push_back(cc);
        classes_[cc]->parents.emplace_back(key, tcan);
    }
    hashcons_[key] = tcan;
    return tcan;
}

EClassId EGraph::merge(EClassId a, EClassId b) {
    EClassId ca = find(a);
    EClassId cb = find(b);
    if (ca == cb) return ca;

    uint32_t lo = std::min(ca.value, cb.value);
    uint32_t hi = std::max(ca.value, cb.value);
    EClass &dst = *classes_[lo];
    EClass &src = *classes_[hi];
    if (dst.width != src.width)
        fail(errc::width_mismatch, "cannot merge classes of widths " +
                                       std::to_string(dst.width) + " and " +
                                       std::to_string(src.width));

    for (size_t t : src.template_nodes) dst.template_nodes.push_back(t + dst.nodes.size());
    dst.nodes.insert(dst.nodes.end(), std::make_move_iterator(src.nodes.begin()),
                     std::make_move_iterator(src.nodes.end()));
    for (BNode &bn : src.bnodes) {
        bool dup = std::any_of(dst.bnodes.begin(), dst.bnodes.end(),
                               [&](const BNode &d) { return d == bn; });
        if (!dup) dst.bnodes.push_back(std::move(bn));
    }
    dst.parents.insert(dst.parents.end(), std::make_move_iterator(src.parents.begin()),
                       std::make_move_iterator(src.parents.end()));
    classes_[hi].reset();
    uf_[hi] = lo;
    dirty_.push_back(EClassId{lo});
    return EClassId{lo};
}

void EGraph::repair(EClassId cls_id, size_t &merges) {
    EClassId cur = find(cls_id);
    if (classes_[cur.value]->has_bnodes()) return; // opaque to congruence

    auto parents = std::move(classes_[cur.value]->parents);
    classes_[cur.value]->parents.clear();

    std::vector<std::pair<ENode, EClassId>> repaired;
    std::unordered_map<ENode, size_t, ENodeHash> index;
    for (auto &[pnode, pcls] : parents) {
        EClassId pcan = find(pcls);
        if (classes_[pcan.value]->has_bnodes()) {
            // Nodes living in bond classes keep their frozen hashcons keys;
            // re-canonicalizing them could merge tied-but-distinct sites.
            repaired.emplace_back(std::move(pnode), pcan);
            continue;
        }
        hashcons_.erase(pnode);
        ENode canon = semi_canonical(std::move(pnode));
        auto [it, inserted] = index.try_emplace(canon, repaired.size());
        if (inserted) {
            repaired.emplace_back(std::move(canon), pcan);
        } else {
            EClassId other = repaired[it->second].second;
            if (find(other) != pcan) {
                merge(other, pcan);
                merges++;
            }
            repaired[it->second].second = find(other);
        }
    }
    for (auto &[node, pcls] : repaired) {
        EClassId pcan = find(pcls);
        if (!classes_[pcan.value]->has_bnodes()) hashcons_[node] = pcan;
    }

    EClass &live = class_mut(cls_id);
    live.parents.insert(live.parents.end(), std::make_move_iterator(repaired.begin()),
                        std::make_move_iterator(repaired.end()));
}

size_t EGraph::rebuild() {
    size_t merges = 0;
    while (!dirty_.empty()) {
        auto todo = std::move(dirty_);
        dirty_.clear();
        std::vector<uint32_t> ids;
        ids.reserve(todo.size());
        for (EClassId d : todo) ids.push_back(find(d).value);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        for (uint32_t id : ids) repair(find(EClassId{id}), merges);
    }
    sweep_classes();
    return merges;
}

void EGraph::sweep_classes() {
    for (uint32_t id = 0; id < classes_.size(); ++id) {
        if (!classes_[id] || uf_[id] != id) continue;
        EClass &cls = *classes_[id];
        if (cls.has_bnodes()) continue; // keep raw site references

        std::vector<ENode> kept;
        std::unordered_map<ENode, bool, ENodeHash> seen;
        for (ENode &n : cls.nodes) {
            ENode s = semi_canonical(std::move(n));
            if (seen.try_emplace(s, true).second) kept.push_back(std::move(s));
        }
        enode_count_ -= cls.nodes.size() - kept.size();
        cls.nodes = std::move(kept);
    }
}

std::vector<EClassId> EGraph::canonical_ids() const {
    std::vector<EClassId> ids;
    for (uint32_t id = 0; id < classes_.size(); ++id)
        if (classes_[id] && uf_[id] == id) ids.push_back(EClassId{id});
    return ids;
}

size_t EGraph::class_count() const {
    size_t n = 0;
    for (uint32_t id = 0; id < classes_.size(); ++id)
        if (classes_[id] && uf_[id] == id) n++;
    return n;
}

EClassId EGraph::attach_bnode(BNode bnode, EClassId target) {
    EClassId tcan = find(target);
    EClass &cls = *classes_[tcan.value];
    bool dup = std::any_of(cls.bnodes.begin(), cls.bnodes.end(),
                           [&](const BNode &d) { return d == bnode; });
    if (!dup) cls.bnodes.push_back(std::move(bnode));
    return tcan;
}

void EGraph::mark_template(EClassId cls, size_t node_index) {
    EClass &c = class_mut(cls);
    if (node_index >= c.nodes.size()) fail(errc::structural, "template index out of range");
    c.template_nodes.push_back(node_index);
}

} // namespace bondsat
