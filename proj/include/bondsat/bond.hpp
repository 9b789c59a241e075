#pragma once

#include "bondsat/bnode.hpp"
#include "bondsat/circuit.hpp"
#include "bondsat/egraph.hpp"

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace bondsat {

enum class AncestryConstraint { ForbidRelated, None };

struct BondCandidate {
    EClassId parent;
    std::vector<EClassId> children;
};

// True when `to` is reachable from `from` through e-node child edges
// (canonical classes, zero or more steps).
bool class_reaches(const EGraph &g, EClassId from, EClassId to);

// Scans the frozen graph children-first for classes holding an (op, width)
// e-node and eagerly keeps a conflict-free subset: a candidate survives only
// if it is neither ancestor nor descendant of any already-kept candidate.
// Classes that already hold b-nodes, or whose operands resolve into b-node
// classes, are never candidates. Returns [] when fewer than two survive.
std::vector<BondCandidate> select_bond_set(const EGraph &g, Op op, int width,
                                           AncestryConstraint constraint);

// Everything needed to undo a bond: the b-node itself, where it lives, and
// a snapshot of which pre-bond class every reference resolved to.
struct BondRecord {
    BNode bnode;
    EClassId bond_class;
    // find() restricted to ids that resolved into a bonded parent, captured
    // before the merge collapsed them.
    std::unordered_map<uint32_t, uint32_t> pre_bond_fiber;
    std::map<std::string, EClassId> output_provenance;
    // Canonical ids of classes already holding b-nodes when this bond was
    // formed; the staging invariant forbids referencing them.
    std::vector<EClassId> prior_bond_classes;
    std::optional<ENode> template_node;
    std::vector<EClassId> advice_classes;
    std::vector<int> template_advice_widths;

    // Original parent class of a pre-bond reference, if it was bonded here.
    std::optional<EClassId> resolve(EClassId raw) const;
};

// Ties the candidate sites together: records the bond-map and provenance,
// then merges every parent and a fresh b-node class into one class. The
// `roots` map lets output references be routed back to their original
// parent at dispersion time.
BondRecord bond(EGraph &g, Op op, int width, const std::vector<BondCandidate> &set,
                const std::map<std::string, EClassId> &roots = {});

struct UnifyTemplate {
    Op op = Op::Mul;
    int width = 64;
    std::vector<int> advice_widths;
};

// Adds a replacement e-node over fresh advice leaves into the bond class.
EClassId unify_with_template(EGraph &g, BondRecord &rec, const UnifyTemplate &tmpl);

enum class BondChoice { BNodeChosen, TemplateChosen };

struct DispersedBond {
    std::optional<NodeRef> shared;
    std::vector<std::pair<EClassId, NodeRef>> sites; // bond-map order

    std::optional<NodeRef> site_of(EClassId parent) const {
        for (const auto &[p, r] : sites)
            if (p == parent) return r;
        return std::nullopt;
    }
};

// Inverse of bonding. BNodeChosen re-materializes one ordinary node per
// bonded parent; TemplateChosen emits the shared unit once plus one use
// site per parent binding each advice leaf to that parent's original child.
DispersedBond disperse(const BondRecord &rec, BondChoice choice, CircuitBuilder &builder,
                       const std::unordered_map<uint32_t, NodeRef> &extracted_children);

} // namespace bondsat
