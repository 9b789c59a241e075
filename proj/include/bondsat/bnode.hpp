#pragma once

#include "bondsat/enode.hpp"
#include "bondsat/errors.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace bondsat {

// Mapping from each bonded parent class to that parent's original child
// classes, captured when the bond is formed and never re-canonicalized
// afterwards. Entries are kept sorted by parent id so that bond-map
// identity is entry-for-entry comparison.
struct BondMap {
    struct Entry {
        EClassId parent;
        std::vector<EClassId> children;

        friend bool operator==(const Entry &, const Entry &) = default;
    };

    std::vector<Entry> entries;

    static BondMap make(std::vector<Entry> entries) {
        if (entries.size() < 2) fail(errc::bond_too_small, "bond-map needs at least 2 parents");
        std::sort(entries.begin(), entries.end(),
                  [](const Entry &a, const Entry &b) { return a.parent < b.parent; });
        const size_t arity = entries.front().children.size();
        for (size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].children.size() != arity)
                fail(errc::structural, "bond-map child lists must have equal length");
            if (i > 0 && entries[i].parent == entries[i - 1].parent)
                fail(errc::structural, "bond-map parents must be distinct");
        }
        BondMap map;
        map.entries = std::move(entries);
        return map;
    }

    size_t site_count() const { return entries.size(); }
    size_t child_arity() const { return entries.empty() ? 0 : entries.front().children.size(); }

    friend bool operator==(const BondMap &, const BondMap &) = default;
};

// A unique symbol carrying a bond-map. Two b-nodes are equal exactly when
// their bond-maps are identical; the symbol and the bonded group key are
// bookkeeping and do not take part in equality or hashing.
struct BNode {
    uint32_t symbol = 0;
    Op op = Op::Add; // operator of the bonded sites
    int width = 1;   // width of the bonded sites
    BondMap map;

    friend bool operator==(const BNode &a, const BNode &b) { return a.map == b.map; }
};

struct BondMapHash {
    size_t operator()(const BondMap &m) const {
        size_t h = std::hash<size_t>{}(m.entries.size());
        for (const auto &e : m.entries) {
            hash_combine(h, std::hash<uint32_t>{}(e.parent.value));
            for (EClassId c : e.children) hash_combine(h, std::hash<uint32_t>{}(c.value));
        }
        return h;
    }
};

struct BNodeHash {
    size_t operator()(const BNode &n) const { return BondMapHash{}(n.map); }
};

} // namespace bondsat

template <> struct std::hash<bondsat::BNode> {
    size_t operator()(const bondsat::BNode &n) const { return bondsat::BNodeHash{}(n); }
};
