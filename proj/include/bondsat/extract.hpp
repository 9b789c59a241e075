#pragma once

#include "bondsat/bond.hpp"
#include "bondsat/circuit.hpp"
#include "bondsat/egraph.hpp"

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bondsat {

// Per-(op, width) node costs plus a routing cost per use-site operand.
// Shared bodies are counted once per circuit.
struct CostModel {
    std::map<std::pair<int, int>, double> op_costs; // (op, width) -> cost
    double use_route = 1.0;

    double op_cost(Op op, int width) const;

    static CostModel defaults() { return {}; }
    // `op:width = cost` and `use_route = cost` lines; `;` comments; missing
    // entries fall back to the defaults.
    static CostModel parse(std::string_view text);
};

struct Choice {
    enum class Kind { ENode, BNode, Template };
    Kind kind = Kind::ENode;
    size_t node_index = 0; // ENode/Template: index into the class node list
};

struct ClassCosts {
    std::unordered_map<uint32_t, double> cost;
    std::unordered_map<uint32_t, Choice> choice;

    double at(const EGraph &g, EClassId id) const;
};

// Bottom-up tree-cost fixpoint. For a bond class the choice is binary:
// the b-node (materialize every bonded site independently) or a unified
// template (shared body once plus routing per use). Unreachable classes
// stay at infinite cost.
ClassCosts class_costs(const EGraph &g, const CostModel &m);

using Roots = std::vector<std::pair<std::string, EClassId>>;

// Walks the chosen nodes from the roots and disperses bond classes per the
// cost choice. `declared_inputs` pre-registers inputs so the result keeps
// the source signature even when an input becomes dead.
Circuit extract_circuit(const EGraph &g, const Roots &roots, const CostModel &m,
                        const std::vector<BondRecord> &recs,
                        const std::vector<std::pair<std::string, int>> &declared_inputs = {});

// True DAG cost of a concrete circuit under the model.
double circuit_cost(const Circuit &c, const CostModel &m);

struct BruteForceBounds {
    size_t max_classes = 8;
    size_t max_depth = 4;
};

// Enumerates every consistent choice function and returns a cheapest
// induced circuit by true DAG cost. Test oracle only.
std::pair<Circuit, double> brute_force_extract(const EGraph &g, const Roots &roots,
                                               const CostModel &m,
                                               const std::vector<BondRecord> &recs,
                                               const BruteForceBounds &bounds = {});

} // namespace bondsat
