#include "bondsat/ops.hpp"

#include "bondsat/errors.hpp"

namespace bondsat {

std::string_view op_name(Op op) {
    switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::Zext: return "zext";
    case Op::Trunc: return "trunc";
    }
    return "?";
}

std::optional<Op> op_from_name(std::string_view name) {
    if (name == "add") return Op::Add;
    if (name == "sub") return Op::Sub;
    if (name == "mul") return Op::Mul;
    if (name == "and") return Op::And;
    if (name == "or") return Op::Or;
    if (name == "xor") return Op::Xor;
    if (name == "zext") return Op::Zext;
    if (name == "trunc") return Op::Trunc;
    return std::nullopt;
}

uint64_t eval_op(Op op, int width, std::span<const uint64_t> args) {
    const uint64_t mask = width_mask(width);
    switch (op) {
    case Op::Add: return (args[0] + args[1]) & mask;
    case Op::Sub: return (args[0] - args[1]) & mask;
    case Op::Mul: return (args[0] * args[1]) & mask;
    case Op::And: return args[0] & args[1];
    case Op::Or: return args[0] | args[1];
    case Op::Xor: return args[0] ^ args[1];
    case Op::Zext: return args[0];
    case Op::Trunc: return args[0] & mask;
    }
    fail(errc::structural, "unknown operator");
}

bool operand_width_ok(Op op, int node_width, int operand_width) {
    switch (op) {
    case Op::Zext: return operand_width <= node_width;
    case Op::Trunc: return operand_width >= node_width;
    default: return operand_width == node_width;
    }
}

} // namespace bondsat
