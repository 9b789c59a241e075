#pragma once

#include "bondsat/ops.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bondsat {

// Dense class identifier. Retired ids stay resolvable through the
// union-find forever; they are never reused.
struct EClassId {
    uint32_t value = UINT32_MAX;

    constexpr bool valid() const { return value != UINT32_MAX; }
    friend constexpr bool operator==(EClassId, EClassId) = default;
    friend constexpr auto operator<=>(EClassId, EClassId) = default;
};

// Node symbol: an operator from the closed alphabet, or one of the leaf
// kinds. Consts carry their value, inputs and advice their name.
struct NodeSym {
    enum class Kind : uint8_t { Op, Const, Input, Advice };

    Kind kind = Kind::Op;
    Op op = Op::Add;
    uint64_t value = 0;
    std::string name;

    static NodeSym make_op(Op op) {
        NodeSym s;
        s.kind = Kind::Op;
        s.op = op;
        return s;
    }
    static NodeSym make_const(uint64_t value) {
        NodeSym s;
        s.kind = Kind::Const;
        s.value = value;
        return s;
    }
    static NodeSym make_input(std::string name) {
        NodeSym s;
        s.kind = Kind::Input;
        s.name = std::move(name);
        return s;
    }
    static NodeSym make_advice(std::string name) {
        NodeSym s;
        s.kind = Kind::Advice;
        s.name = std::move(name);
        return s;
    }

    int arity() const { return kind == Kind::Op ? op_arity(op) : 0; }
    bool is_op(Op o) const { return kind == Kind::Op && op == o; }

    friend bool operator==(const NodeSym &, const NodeSym &) = default;

    std::string display() const;
};

// Function symbol paired with ordered child classes. Structural equality is
// over (symbol, width, children); callers compare canonicalized forms.
struct ENode {
    NodeSym sym;
    int width = 1;
    std::vector<EClassId> children;

    friend bool operator==(const ENode &, const ENode &) = default;

    std::string display() const;
};

inline void hash_combine(size_t &seed, size_t v) {
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

struct NodeSymHash {
    size_t operator()(const NodeSym &s) const {
        size_t h = std::hash<uint8_t>{}(static_cast<uint8_t>(s.kind));
        hash_combine(h, std::hash<uint8_t>{}(static_cast<uint8_t>(s.op)));
        hash_combine(h, std::hash<uint64_t>{}(s.value));
        hash_combine(h, std::hash<std::string>{}(s.name));
        return h;
    }
};

struct ENodeHash {
    size_t operator()(const ENode &n) const {
        size_t h = NodeSymHash{}(n.sym);
        hash_combine(h, std::hash<int>{}(n.width));
        for (EClassId c : n.children) hash_combine(h, std::hash<uint32_t>{}(c.value));
        return h;
    }
};

} // namespace bondsat

template <> struct std::hash<bondsat::EClassId> {
    size_t operator()(bondsat::EClassId id) const { return std::hash<uint32_t>{}(id.value); }
};
