#pragma once

#include "bondsat/bnode.hpp"
#include "bondsat/enode.hpp"
#include "bondsat/errors.hpp"

#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bondsat {

// An equality class: a mixed set of e-nodes and b-nodes, plus parent
// back-references used for congruence repair.
struct EClass {
    int width = 1;
    std::vector<ENode> nodes;
    std::vector<BNode> bnodes;
    // Indices into `nodes` marking unification templates (advice-leaf
    // replacements added by unify_with_template).
    std::vector<size_t> template_nodes;
    std::vector<std::pair<ENode, EClassId>> parents;

    bool has_bnodes() const { return !bnodes.empty(); }
    size_t size() const { return nodes.size() + bnodes.size(); }
};

// Union-find + hashcons e-graph with deferred congruence repair. Classes
// holding b-nodes are opaque to rebuild: no upward merging happens through
// them and their member nodes keep the child ids they were stored with, so
// pre-bond targets stay recoverable for dispersion.
class EGraph {
  public:
    EClassId add(ENode node);

    // Attaches a node to an existing class instead of creating a fresh one.
    // A hashcons hit on another class merges the two classes.
    EClassId add_into(ENode node, EClassId target);

    // Hashcons probe on the canonicalized node.
    std::optional<EClassId> lookup(const ENode &node) const;

    EClassId find(EClassId id) const;
    bool same(EClassId a, EClassId b) const { return find(a) == find(b); }

    EClassId merge(EClassId a, EClassId b);

    // Restores hashcons and congruence invariants; returns the number of
    // congruence-driven class merges performed.
    size_t rebuild();

    bool clean() const { return dirty_.empty(); }

    const EClass &eclass(EClassId id) const;
    std::vector<EClassId> canonical_ids() const;

    size_t class_count() const;
    size_t enode_count() const { return enode_count_; }
    uint32_t id_limit() const { return static_cast<uint32_t>(uf_.size()); }

    // Canonicalizes every child slot.
    ENode canonical(ENode node) const;

    // Canonicalizes child slots except those resolving into b-node classes,
    // which keep their stored ids.
    ENode semi_canonical(ENode node) const;

    // Hooks for the bond module.
    EClassId fresh_class(int width);
    EClassId attach_bnode(BNode bnode, EClassId target);
    void mark_template(EClassId cls, size_t node_index);
    uint32_t fresh_bnode_symbol() { return next_bnode_symbol_++; }
    uint32_t fresh_advice_serial() { return next_advice_serial_++; }

  private:
    EClass &class_mut(EClassId id);
    void check_exists(EClassId id) const;
    void check_node(const ENode &node) const;
    void repair(EClassId cls_id, size_t &merges);
    void sweep_classes();

    std::vector<uint32_t> uf_;
    std::vector<std::optional<EClass>> classes_;
    std::unordered_map<ENode, EClassId, ENodeHash> hashcons_;
    std::vector<EClassId> dirty_;
    size_t enode_count_ = 0;
    uint32_t next_bnode_symbol_ = 0;
    uint32_t next_advice_serial_ = 0;
};

} // namespace bondsat
