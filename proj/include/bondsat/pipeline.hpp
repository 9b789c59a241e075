#pragma once

#include "bondsat/circuit.hpp"
#include "bondsat/egraph.hpp"
#include "bondsat/extract.hpp"
#include "bondsat/rules.hpp"

#include <string>
#include <vector>

namespace bondsat {

struct IngestResult {
    EGraph graph;
    Roots roots;
    std::vector<std::pair<std::string, int>> inputs;
};

// Builds an e-graph from a circuit. Use sites are inlined as their shared
// body applied to the bound operands, so re-optimizing an optimized
// netlist rediscovers the sharing from scratch.
IngestResult circuit_to_egraph(const Circuit &c);

struct RuleSet {
    std::vector<Rewrite> generic;
    std::vector<Rewrite> bonding;
    std::vector<Rewrite> unification;

    static RuleSet defaults();
    static RuleSet from_text(std::string_view text);
};

struct CheckConfig {
    enum class Mode { Auto, Exhaustive, Random };
    Mode mode = Mode::Auto;
    size_t samples = 1000;
    uint64_t seed = kDefaultSeed;
    // Auto picks exhaustive when the total input bits fit.
    int exhaustive_bits = 16;
};

struct BondSummary {
    std::string op;
    int width = 0;
    size_t sites = 0;
    bool unified = false;
};

struct OptimizeOutcome {
    Circuit optimized;
    SaturationReport saturation;
    std::vector<BondSummary> bonds;
    OpStats stats_before;
    OpStats stats_after;
    double cost_before = 0;
    double cost_after = 0;
    EquivReport equivalence;
    std::string egraph_dot_pre;
    std::string egraph_dot_post;
};

OptimizeOutcome optimize_circuit(const Circuit &input, const RuleSet &rules, const CostModel &costs,
                                 const Limits &limits, const CheckConfig &check,
                                 bool capture_dots = false);

} // namespace bondsat
