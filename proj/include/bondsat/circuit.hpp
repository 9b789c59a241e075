#pragma once

#include "bondsat/errors.hpp"
#include "bondsat/ops.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bondsat {

// Fixed default seed for reproducible random checking.
inline constexpr uint64_t kDefaultSeed = 0xB04E44;

using NodeRef = uint32_t;

struct CircuitNode {
    enum class Kind : uint8_t { Input, Const, Advice, Op, Shared, Use };

    Kind kind = Kind::Input;
    int width = 1;
    std::string name;  // input/advice/shared name
    uint64_t value = 0;
    Op op = Op::Add; // op node or shared body
    // Op: operands; Shared: its advice leaves; Use: bound operands aligned
    // with the shared's advice order.
    std::vector<NodeRef> operands;
    NodeRef shared = 0; // Use: the Shared node it invokes
};

// Acyclic data-flow graph of bit-vector operations. Operand refs always
// point at earlier nodes, so the node list is a topological order.
struct Circuit {
    std::vector<CircuitNode> nodes;
    std::vector<NodeRef> inputs;
    std::vector<std::pair<std::string, NodeRef>> outputs;

    const CircuitNode &at(NodeRef r) const {
        if (r >= nodes.size()) fail(errc::structural, "node ref out of range");
        return nodes[r];
    }

    void validate() const;
};

Circuit parse_circuit(std::string_view text);
std::string serialize_circuit(const Circuit &c);

std::map<std::string, uint64_t> evaluate(const Circuit &c,
                                         const std::map<std::string, uint64_t> &inputs);

struct CheckMode {
    enum class Kind { Exhaustive, Random };
    Kind kind = Kind::Exhaustive;
    size_t samples = 1000;
    uint64_t seed = kDefaultSeed;

    static CheckMode exhaustive() { return {Kind::Exhaustive, 0, 0}; }
    static CheckMode random(size_t samples, uint64_t seed = kDefaultSeed) {
        return {Kind::Random, samples, seed};
    }
};

struct Counterexample {
    std::map<std::string, uint64_t> inputs;
    std::string output;
    uint64_t lhs = 0;
    uint64_t rhs = 0;
};

struct EquivReport {
    bool equal = true;
    std::optional<Counterexample> cex;
    size_t vectors = 0;
    std::string mode;
};

EquivReport check_equivalence(const Circuit &a, const Circuit &b, const CheckMode &mode);

struct OpStats {
    std::map<std::string, size_t> counts; // "mul:64", "input:32", ... one key per node
    size_t shared_units = 0;
    size_t use_sites = 0;
    std::map<std::string, size_t> uses_per_shared;
    size_t total_nodes = 0;

    // Total across widths: op nodes plus shared bodies of that op.
    size_t ops_of(Op op) const;
};

OpStats circuit_stats(const Circuit &c);

// Structurally deduplicating circuit constructor used by extraction and
// dispersion. `finish` prunes nodes unreachable from the outputs, except
// declared inputs which always stay (they are part of the signature).
class CircuitBuilder {
  public:
    NodeRef input(const std::string &name, int width);
    NodeRef constant(uint64_t value, int width);
    NodeRef op(Op op, int width, std::vector<NodeRef> operands);
    NodeRef advice(const std::string &name, int width);
    // Creates a shared unit with fresh advice leaves; returns the Shared ref.
    NodeRef shared_unit(Op op, int width, const std::vector<int> &advice_widths);
    NodeRef use_site(NodeRef shared, std::vector<NodeRef> bound);

    const CircuitNode &at(NodeRef r) const { return nodes_.at(r); }

    Circuit finish(std::vector<std::pair<std::string, NodeRef>> outputs);

  private:
    std::vector<CircuitNode> nodes_;
    std::map<std::string, NodeRef> named_;
    std::map<std::pair<uint64_t, int>, NodeRef> consts_;
    std::map<std::string, NodeRef> structural_;
    size_t shared_counter_ = 0;
};

} // namespace bondsat
