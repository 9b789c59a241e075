#pragma once

#include "bondsat/circuit.hpp"
#include "bondsat/egraph.hpp"
#include "bondsat/rules.hpp"

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bondsat::test {

inline std::string fixture_path(const std::string &name) {
    return std::string(BONDSAT_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Circuit load_fixture(const std::string &name) {
    return parse_circuit(read_file(fixture_path(name)));
}

inline ENode input_node(const std::string &name, int width) {
    return ENode{NodeSym::make_input(name), width, {}};
}
inline ENode const_node(uint64_t value, int width) {
    return ENode{NodeSym::make_const(value), width, {}};
}
inline ENode op_node(Op op, int width, std::vector<EClassId> children) {
    return ENode{NodeSym::make_op(op), width, std::move(children)};
}

// ---- random circuit generator ----------------------------------------------

struct GenOptions {
    int inputs = 3;
    int input_width = 4;
    size_t max_nodes = 60;
    std::vector<int> widths = {2, 4};
    std::vector<Op> op_pool = {Op::Add, Op::Sub, Op::Mul, Op::And,
                               Op::Or,  Op::Xor, Op::Zext, Op::Trunc};
    bool tree_only = false; // no operand reuse, so tree cost equals DAG cost
    // chance (out of 100) of drawing operands from leaves; high values make
    // shallow parallel sites that bonding can pick up
    int leaf_bias = 0;
    int max_outputs = 3;
};

inline Circuit gen_circuit(std::mt19937_64 &rng, const GenOptions &opt = {}) {
    Circuit c;
    auto pick = [&](size_t n) { return static_cast<size_t>(rng() % n); };

    std::vector<bool> used(opt.max_nodes + 16, false);
    auto candidates = [&](auto &&pred) {
        std::vector<NodeRef> out;
        for (NodeRef i = 0; i < c.nodes.size(); ++i) {
            if (opt.tree_only && used[i]) continue;
            if (pred(c.nodes[i])) out.push_back(i);
        }
        return out;
    };
    auto is_leaf = [&](const CircuitNode &n) {
        return n.kind == CircuitNode::Kind::Input || n.kind == CircuitNode::Kind::Const;
    };

    for (int i = 0; i < opt.inputs; ++i) {
        CircuitNode n;
        n.kind = CircuitNode::Kind::Input;
        n.name = "i" + std::to_string(i);
        n.width = opt.input_width;
        c.nodes.push_back(n);
        c.inputs.push_back(static_cast<NodeRef>(c.nodes.size() - 1));
    }

    size_t target = 4 + pick(opt.max_nodes - 8);
    size_t attempts = 0;
    while (c.nodes.size() < target && attempts < target * 8) {
        attempts++;
        if (pick(8) == 0) {
            int w = opt.widths[pick(opt.widths.size())];
            CircuitNode n;
            n.kind = CircuitNode::Kind::Const;
            n.width = w;
            n.value = rng() & width_mask(w);
            c.nodes.push_back(n);
            continue;
        }
        Op op = opt.op_pool[pick(opt.op_pool.size())];
        int w = opt.widths[pick(opt.widths.size())];
        auto fits = [&](const CircuitNode &n) { return operand_width_ok(op, w, n.width); };
        auto pool = candidates(fits);
        if (pool.size() < static_cast<size_t>(op_arity(op))) continue;
        CircuitNode n;
        n.kind = CircuitNode::Kind::Op;
        n.op = op;
        n.width = w;
        for (int j = 0; j < op_arity(op); ++j) {
            if (opt.tree_only) {
                pool = candidates(fits); // each operand used at most once
                if (pool.empty()) break;
            }
            auto leafy = candidates([&](const CircuitNode &m) { return fits(m) && is_leaf(m); });
            NodeRef r;
            if (static_cast<int>(pick(100)) < opt.leaf_bias && !leafy.empty())
                r = leafy[pick(leafy.size())];
            else
                r = pool[pick(pool.size())];
            n.operands.push_back(r);
            used[r] = true;
        }
        if (static_cast<int>(n.operands.size()) != op_arity(op)) continue;
        c.nodes.push_back(n);
    }

    int outputs = 1 + static_cast<int>(pick(opt.max_outputs));
    std::set<NodeRef> chosen;
    for (int i = 0; i < outputs; ++i) chosen.insert(static_cast<NodeRef>(pick(c.nodes.size())));
    int k = 0;
    for (NodeRef r : chosen) c.outputs.emplace_back("o" + std::to_string(k++), r);
    c.validate();
    return c;
}

// ---- naive congruence-closure oracle ----------------------------------------

// Fixpoint congruence closure over an explicit term table; used to check the
// e-graph's rebuild against an independent implementation.
struct CongruenceOracle {
    struct Term {
        NodeSym sym;
        int width;
        std::vector<size_t> children;
    };

    std::vector<Term> terms;
    std::vector<size_t> uf;

    size_t find(size_t x) const {
        while (uf[x] != x) x = uf[x];
        return x;
    }

    size_t add(NodeSym sym, int width, std::vector<size_t> children = {}) {
        for (size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].sym == sym && terms[i].width == width && terms[i].children == children)
                return i;
        }
        terms.push_back(Term{std::move(sym), width, std::move(children)});
        uf.push_back(terms.size() - 1);
        return terms.size() - 1;
    }

    void merge(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) uf[std::max(a, b)] = std::min(a, b);
    }

    // Closes under congruence; returns the number of merges performed.
    size_t close() {
        size_t merges = 0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t i = 0; i < terms.size(); ++i) {
                for (size_t j = i + 1; j < terms.size(); ++j) {
                    if (find(i) == find(j)) continue;
                    if (terms[i].sym != terms[j].sym || terms[i].width != terms[j].width) continue;
                    if (terms[i].children.size() != terms[j].children.size()) continue;
                    bool congruent = true;
                    for (size_t k = 0; k < terms[i].children.size(); ++k)
                        if (find(terms[i].children[k]) != find(terms[j].children[k])) {
                            congruent = false;
                            break;
                        }
                    if (congruent) {
                        merge(i, j);
                        merges++;
                        changed = true;
                    }
                }
            }
        }
        return merges;
    }
};

// ---- e-graph invariant checks ------------------------------------------------

inline void check_invariants(const EGraph &g) {
    for (EClassId id : g.canonical_ids()) {
        const EClass &cls = g.eclass(id);
        if (cls.size() == 0) throw std::runtime_error("empty class");
        if (cls.has_bnodes()) continue;
        std::set<std::string> seen;
        for (const ENode &n : cls.nodes) {
            // hashcons soundness: canonical lookup lands in this class
            auto hit = g.lookup(n);
            if (!hit || *hit != id) throw std::runtime_error("hashcons does not map node to class");
            // dedup: canonical forms unique within the class
            ENode canon = g.canonical(n);
            std::ostringstream key;
            key << canon.sym.display() << ":" << canon.width;
            for (EClassId ch : canon.children) key << " " << ch.value;
            if (!seen.insert(key.str()).second)
                throw std::runtime_error("duplicate structural node in class");
        }
    }
    // congruence: canonical forms never span two classes
    std::map<std::string, uint32_t> owner;
    for (EClassId id : g.canonical_ids()) {
        for (const ENode &n : g.eclass(id).nodes) {
            ENode canon = g.canonical(n);
            std::ostringstream key;
            key << canon.sym.display() << ":" << canon.width;
            for (EClassId ch : canon.children) key << " " << ch.value;
            auto [it, fresh] = owner.emplace(key.str(), id.value);
            if (!fresh && it->second != id.value)
                throw std::runtime_error("congruent nodes in different classes");
        }
    }
}

// ---- ground-tree enumeration (ematch oracle) ---------------------------------

struct GroundTree {
    NodeSym sym;
    int width = 1;
    EClassId cls;
    std::vector<GroundTree> children;
};

inline void enumerate_trees(const EGraph &g, EClassId cls, int depth,
                            std::vector<GroundTree> &out) {
    cls = g.find(cls);
    if (depth <= 0) return;
    for (const ENode &n : g.eclass(cls).nodes) {
        std::vector<std::vector<GroundTree>> child_options;
        bool ok = true;
        for (EClassId c : n.children) {
            std::vector<GroundTree> opts;
            enumerate_trees(g, c, depth - 1, opts);
            if (opts.empty()) {
                ok = false;
                break;
            }
            child_options.push_back(std::move(opts));
        }
        if (!ok) continue;
        std::vector<GroundTree> partial{GroundTree{n.sym, n.width, cls, {}}};
        for (const auto &opts : child_options) {
            std::vector<GroundTree> next;
            for (const GroundTree &p : partial) {
                for (const GroundTree &o : opts) {
                    GroundTree t = p;
                    t.children.push_back(o);
                    next.push_back(std::move(t));
                }
            }
            partial = std::move(next);
        }
        for (GroundTree &t : partial) out.push_back(std::move(t));
    }
}

inline bool tree_match(const Pattern &p, const GroundTree &t,
                       std::map<std::string, EClassId> &vars, std::map<std::string, int> &widths) {
    auto bind_width = [&](const WidthSpec &spec, int w) {
        switch (spec.kind) {
        case WidthSpec::Kind::Literal: return spec.literal == w;
        case WidthSpec::Kind::Wildcard: return true;
        case WidthSpec::Kind::Var: {
            auto it = widths.find(spec.var);
            if (it != widths.end()) return it->second == w;
            widths[spec.var] = w;
            return true;
        }
        }
        return false;
    };
    if (p.is_var) {
        if (p.var_width && !bind_width(*p.var_width, t.width)) return false;
        auto it = vars.find(p.var);
        if (it != vars.end()) return it->second == t.cls;
        vars[p.var] = t.cls;
        return true;
    }
    if (p.sym.kind != t.sym.kind) return false;
    if (p.sym.kind == NodeSym::Kind::Op && p.sym.op != t.sym.op) return false;
    if (p.sym.kind == NodeSym::Kind::Const && p.sym.value != t.sym.value) return false;
    if (!bind_width(p.width, t.width)) return false;
    if (p.children.size() != t.children.size()) return false;
    for (size_t i = 0; i < p.children.size(); ++i)
        if (!tree_match(p.children[i], t.children[i], vars, widths)) return false;
    return true;
}

} // namespace bondsat::test
