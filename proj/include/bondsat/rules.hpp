#pragma once

#include "bondsat/bond.hpp"
#include "bondsat/egraph.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bondsat {

struct WidthSpec {
    enum class Kind { Literal, Var, Wildcard };
    Kind kind = Kind::Literal;
    int literal = 0;
    std::string var;

    static WidthSpec lit(int w) { return {Kind::Literal, w, {}}; }
    static WidthSpec variable(std::string name) { return {Kind::Var, 0, std::move(name)}; }
    static WidthSpec wildcard() { return {Kind::Wildcard, 0, {}}; }
};

// Pattern tree: a variable leaf "?x" (optionally width-constrained, "?x:w")
// or an operator/const node over child patterns. Non-linear variables must
// match the same canonical class.
struct Pattern {
    bool is_var = false;
    std::string var;
    std::optional<WidthSpec> var_width;

    NodeSym sym;
    WidthSpec width;
    std::vector<Pattern> children;
};

struct Match {
    EClassId root;
    std::map<std::string, EClassId> vars;
    std::map<std::string, int> widths;
};

enum class Stage { Generic, Bonding, Unification };

struct Rewrite;
// Computed rewrites (constant folding); returns whether the graph changed.
using NativeApply = std::function<bool(EGraph &, const Match &, size_t &merges)>;

struct Rewrite {
    std::string name;
    Stage stage = Stage::Generic;

    // Generic
    Pattern lhs;
    Pattern rhs;
    NativeApply native;

    // Bonding: gather (group_op:group_width) sites under `set_name`, bind
    // the resulting b-node to `bond_name`.
    std::string set_name;
    std::string bond_name;
    Op group_op = Op::Mul;
    int group_width = 64;

    // Unification: unify the b-node bound to `bond_name` with `tmpl`.
    UnifyTemplate tmpl;
};

Rewrite parse_rule(std::string_view text);
// One rule per line, `;` comments.
std::vector<Rewrite> parse_rules_file(std::string_view text);

// Complete up to canonical classes, deduplicated, deterministic order
// (class id, then node order).
std::vector<Match> ematch(const EGraph &g, const Pattern &p);

// Applies a generic rewrite over pre-collected matches, rebuilds, and
// returns the number of class merges (0 means no new information).
size_t apply_rewrite(EGraph &g, const Rewrite &r, const std::vector<Match> &matches);

struct Limits {
    int iters = 30;
    size_t nodes = 10000;
    int64_t millis = 5000;
};

enum class StopReason { Saturated, IterLimit, NodeLimit, TimeLimit };
const char *stop_reason_name(StopReason r);

struct SaturationReport {
    int iterations = 0;
    std::vector<size_t> merges_per_iteration;
    StopReason stop = StopReason::Saturated;
    size_t final_classes = 0;
    size_t final_nodes = 0;
};

SaturationReport saturate(EGraph &g, const std::vector<Rewrite> &rules, const Limits &limits);

struct PipelineRun {
    SaturationReport report;
    std::vector<BondRecord> records;
    std::map<std::string, size_t> record_by_name;
};

// Stage A: generic saturation to a limit. Stage B: each bonding rule runs
// exactly once against the frozen graph (at most one b-node per (op, width)
// group per run). Stage C: unification, then a final rebuild. No generic
// rule runs after stage B, which is what rules out b-node chains.
PipelineRun run_staged_pipeline(EGraph &g, const std::vector<Rewrite> &generic,
                                const std::vector<Rewrite> &bonding,
                                const std::vector<Rewrite> &unification, const Limits &limits,
                                const std::map<std::string, EClassId> &roots = {});

std::vector<Rewrite> default_generic_rules();
std::vector<Rewrite> default_bonding_rules();
std::vector<Rewrite> default_unification_rules();

void split_rules(const std::vector<Rewrite> &all, std::vector<Rewrite> &generic,
                 std::vector<Rewrite> &bonding, std::vector<Rewrite> &unification);

} // namespace bondsat
