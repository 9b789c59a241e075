#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace bondsat {

// The closed operator alphabet of the circuit language. Everything else in
// the graph is a leaf (input, const, advice).
enum class Op : uint8_t {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Zext,
    Trunc,
};

inline constexpr int kMaxWidth = 64;

constexpr int op_arity(Op op) {
    switch (op) {
    case Op::Zext:
    case Op::Trunc:
        return 1;
    default:
        return 2;
    }
}

std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

constexpr uint64_t width_mask(int width) {
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

constexpr bool width_ok(int width) { return width >= 1 && width <= kMaxWidth; }

// Wrap-around unsigned semantics; zext preserves the value, trunc reduces
// modulo the target width.
uint64_t eval_op(Op op, int width, std::span<const uint64_t> args);

// Operand-width discipline: binary ops need operands at the node width,
// zext widens (operand <= node), trunc narrows (operand >= node).
bool operand_width_ok(Op op, int node_width, int operand_width);

} // namespace bondsat
