#include "bondsat/circuit.hpp"

#include "bondsat/sexpr.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace bondsat {

void Circuit::validate() const {
    std::set<std::string> seen_inputs;
    for (NodeRef r : inputs) {
        if (at(r).kind != CircuitNode::Kind::Input) fail(errc::structural, "input list entry is not an input node");
        if (!seen_inputs.insert(at(r).name).second) fail(errc::structural, "duplicate input name " + at(r).name);
    }
    for (NodeRef i = 0; i < nodes.size(); ++i) {
        const CircuitNode &n = nodes[i];
        if (!width_ok(n.width)) fail(errc::width_mismatch, "node width out of range");
        for (NodeRef o : n.operands) {
            if (o >= i) fail(errc::cycle, "operand does not point at an earlier node");
        }
        switch (n.kind) {
        case CircuitNode::Kind::Const:
            if (n.width < 64 && n.value > width_mask(n.width))
                fail(errc::bad_value, "const value does not fit its width");
            break;
        case CircuitNode::Kind::Op:
            if (static_cast<int>(n.operands.size()) != op_arity(n.op))
                fail(errc::structural, "operand count mismatch");
            for (NodeRef o : n.operands)
                if (!operand_width_ok(n.op, n.width, at(o).width))
                    fail(errc::width_mismatch, "operand width violates operator discipline");
            break;
        case CircuitNode::Kind::Shared:
            for (NodeRef o : n.operands)
                if (at(o).kind != CircuitNode::Kind::Advice)
                    fail(errc::structural, "shared body operands must be advice leaves");
            if (static_cast<int>(n.operands.size()) != op_arity(n.op))
                fail(errc::structural, "shared body operand count mismatch");
            break;
        case CircuitNode::Kind::Use: {
            if (n.shared >= i || at(n.shared).kind != CircuitNode::Kind::Shared)
                fail(errc::structural, "use site must reference an earlier shared node");
            const CircuitNode &s = at(n.shared);
            if (n.operands.size() != s.operands.size())
                fail(errc::structural, "use site bindings must cover the shared advice leaves");
            for (size_t j = 0; j < n.operands.size(); ++j)
                if (at(n.operands[j]).width != at(s.operands[j]).width)
                    fail(errc::width_mismatch, "binding width does not match advice width");
            break;
        }
        default: break;
        }
    }
    for (const auto &[name, r] : outputs) {
        if (r >= nodes.size()) fail(errc::unknown_name, "output " + name + " does not resolve");
    }
}

namespace {

int parse_width_token(const SExpr &s) {
    if (!s.is_atom() || s.atom.size() < 2 || s.atom[0] != ':')
        fail(errc::parse, "expected width token like :32 at " + s.where());
    int w = 0;
    for (size_t i = 1; i < s.atom.size(); ++i) {
        if (!isdigit(static_cast<unsigned char>(s.atom[i])))
            fail(errc::parse, "malformed width at " + s.where());
        w = w * 10 + (s.atom[i] - '0');
        if (w > 1000) break;
    }
    if (!width_ok(w)) fail(errc::parse, "width out of range at " + s.where());
    return w;
}

// Splits atoms of the shape "mul:64" / "const:8".
std::pair<std::string, int> split_head(const SExpr &s) {
    size_t colon = s.atom.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= s.atom.size())
        fail(errc::parse, "expected OP:WIDTH at " + s.where());
    std::string op = s.atom.substr(0, colon);
    int w = 0;
    for (size_t i = colon + 1; i < s.atom.size(); ++i) {
        if (!isdigit(static_cast<unsigned char>(s.atom[i])))
            fail(errc::parse, "malformed width at " + s.where());
        w = w * 10 + (s.atom[i] - '0');
        if (w > 1000) break;
    }
    if (!width_ok(w)) fail(errc::parse, "width out of range at " + s.where());
    return {op, w};
}

uint64_t parse_uint(const SExpr &s) {
    if (!s.is_atom() || s.atom.empty()) fail(errc::parse, "expected integer at " + s.where());
    uint64_t v = 0;
    for (char c : s.atom) {
        if (!isdigit(static_cast<unsigned char>(c)))
            fail(errc::parse, "expected decimal integer at " + s.where());
        uint64_t d = static_cast<uint64_t>(c - '0');
        if (v > (UINT64_MAX - d) / 10) fail(errc::bad_value, "integer too large at " + s.where());
        v = v * 10 + d;
    }
    return v;
}

struct NetlistParser {
    Circuit circuit;
    std::map<std::string, NodeRef> names;
    std::map<std::string, NodeRef> shareds;

    NodeRef append(CircuitNode node) {
        circuit.nodes.push_back(std::move(node));
        return static_cast<NodeRef>(circuit.nodes.size() - 1);
    }

    void define(const std::string &name, NodeRef r, const SExpr &at) {
        if (names.count(name) || shareds.count(name))
            fail(errc::parse, "duplicate name '" + name + "' at " + at.where());
        names[name] = r;
    }

    NodeRef expr(const SExpr &e) {
        if (e.is_atom()) {
            auto it = names.find(e.atom);
            if (it == names.end())
                fail(errc::unknown_name, "'" + e.atom + "' is not defined at " + e.where());
            return it->second;
        }
        if (e.items.empty() || !e.items[0].is_atom())
            fail(errc::parse, "expected (OP:W ...) at " + e.where());
        auto [head, width] = split_head(e.items[0]);
        if (head == "const") {
            if (e.items.size() != 2) fail(errc::parse, "const takes one value at " + e.where());
            uint64_t v = parse_uint(e.items[1]);
            if (width < 64 && v > width_mask(width))
                fail(errc::bad_value, "const value does not fit width at " + e.items[1].where());
            CircuitNode n;
            n.kind = CircuitNode::Kind::Const;
            n.width = width;
            n.value = v;
            return append(std::move(n));
        }
        auto op = op_from_name(head);
        if (!op) fail(errc::parse, "unknown operator '" + head + "' at " + e.where());
        if (static_cast<int>(e.items.size()) - 1 != op_arity(*op))
            fail(errc::parse, "operator " + head + " expects " + std::to_string(op_arity(*op)) +
                                  " operands at " + e.where());
        CircuitNode n;
        n.kind = CircuitNode::Kind::Op;
        n.width = width;
        n.op = *op;
        for (size_t i = 1; i < e.items.size(); ++i) {
            NodeRef r = expr(e.items[i]);
            if (!operand_width_ok(*op, width, circuit.nodes[r].width))
                fail(errc::width_mismatch, "operand width violates " + head + " discipline at " +
                                               e.items[i].where());
            n.operands.push_back(r);
        }
        return append(std::move(n));
    }

    void form(const SExpr &f) {
        if (!f.is_list() || f.items.empty() || !f.items[0].is_atom())
            fail(errc::parse, "expected a (...) form at " + f.where());
        const std::string &head = f.items[0].atom;

        if (head == "input") {
            if (f.items.size() != 3 || !f.items[1].is_atom())
                fail(errc::parse, "expected (input NAME :W) at " + f.where());
            CircuitNode n;
            n.kind = CircuitNode::Kind::Input;
            n.name = f.items[1].atom;
            n.width = parse_width_token(f.items[2]);
            NodeRef r = append(std::move(n));
            define(f.items[1].atom, r, f);
            circuit.inputs.push_back(r);
        } else if (head == "let") {
            if (f.items.size() != 3 || !f.items[1].is_atom())
                fail(errc::parse, "expected (let NAME EXPR) at " + f.where());
            NodeRef r = expr(f.items[2]);
            define(f.items[1].atom, r, f);
        } else if (head == "shared") {
            if (f.items.size() != 3 || !f.items[1].is_atom() || !f.items[2].is_list())
                fail(errc::parse, "expected (shared NAME (OP:W (advice NAME :W)+)) at " + f.where());
            const SExpr &body = f.items[2];
            if (body.items.empty() || !body.items[0].is_atom())
                fail(errc::parse, "malformed shared body at " + body.where());
            auto [opname, width] = split_head(body.items[0]);
            auto op = op_from_name(opname);
            if (!op) fail(errc::parse, "unknown operator '" + opname + "' at " + body.where());
            CircuitNode sh;
            sh.kind = CircuitNode::Kind::Shared;
            sh.name = f.items[1].atom;
            sh.width = width;
            sh.op = *op;
            std::set<std::string> advice_names;
            for (size_t i = 1; i < body.items.size(); ++i) {
                const SExpr &adv = body.items[i];
                if (!adv.is_list() || adv.items.size() != 3 || !adv.items[0].is_atom("advice") ||
                    !adv.items[1].is_atom())
                    fail(errc::parse, "expected (advice NAME :W) at " + adv.where());
                if (!advice_names.insert(adv.items[1].atom).second)
                    fail(errc::parse, "duplicate advice name at " + adv.where());
                CircuitNode a;
                a.kind = CircuitNode::Kind::Advice;
                a.name = adv.items[1].atom;
                a.width = parse_width_token(adv.items[2]);
                if (!operand_width_ok(*op, width, a.width))
                    fail(errc::width_mismatch, "advice width violates operator discipline at " +
                                                   adv.where());
                sh.operands.push_back(append(std::move(a)));
            }
            if (static_cast<int>(sh.operands.size()) != op_arity(*op))
                fail(errc::parse, "shared body needs " + std::to_string(op_arity(*op)) +
                                      " advice leaves at " + body.where());
            NodeRef r = append(std::move(sh));
            if (names.count(f.items[1].atom) || shareds.count(f.items[1].atom))
                fail(errc::parse, "duplicate name '" + f.items[1].atom + "' at " + f.where());
            shareds[f.items[1].atom] = r;
        } else if (head == "use") {
            if (f.items.size() < 4 || !f.items[1].is_atom() || !f.items[2].is_atom())
                fail(errc::parse, "expected (use NAME SHAREDNAME (bind ADV EXPR)+) at " + f.where());
            auto sit = shareds.find(f.items[2].atom);
            if (sit == shareds.end())
                fail(errc::unknown_name, "'" + f.items[2].atom + "' is not a shared unit at " + f.where());
            const NodeRef shared_ref = sit->second;
            std::map<std::string, NodeRef> binds;
            for (size_t i = 3; i < f.items.size(); ++i) {
                const SExpr &b = f.items[i];
                if (!b.is_list() || b.items.size() != 3 || !b.items[0].is_atom("bind") ||
                    !b.items[1].is_atom())
                    fail(errc::parse, "expected (bind ADVNAME EXPR) at " + b.where());
                if (!binds.emplace(b.items[1].atom, expr(b.items[2])).second)
                    fail(errc::parse, "duplicate binding at " + b.where());
            }
            const CircuitNode &sh = circuit.nodes[shared_ref];
            CircuitNode use;
            use.kind = CircuitNode::Kind::Use;
            use.width = sh.width;
            use.shared = shared_ref;
            for (NodeRef adv : sh.operands) {
                const CircuitNode &a = circuit.nodes[adv];
                auto bit = binds.find(a.name);
                if (bit == binds.end())
                    fail(errc::parse, "binding for advice '" + a.name + "' missing at " + f.where());
                if (circuit.nodes[bit->second].width != a.width)
                    fail(errc::width_mismatch, "binding width does not match advice '" + a.name +
                                                   "' at " + f.where());
                use.operands.push_back(bit->second);
                binds.erase(bit);
            }
            if (!binds.empty())
                fail(errc::parse, "unknown advice binding '" + binds.begin()->first + "' at " +
                                      f.where());
            NodeRef r = append(std::move(use));
            define(f.items[1].atom, r, f);
        } else if (head == "output") {
            if (f.items.size() != 3 || !f.items[1].is_atom())
                fail(errc::parse, "expected (output NAME EXPR) at " + f.where());
            for (const auto &[name, ref] : circuit.outputs)
                if (name == f.items[1].atom)
                    fail(errc::parse, "duplicate output '" + name + "' at " + f.where());
            circuit.outputs.emplace_back(f.items[1].atom, expr(f.items[2]));
        } else {
            fail(errc::parse, "unknown form '" + head + "' at " + f.where());
        }
    }
};

} // namespace

Circuit parse_circuit(std::string_view text) {
    SExpr top = parse_one_sexpr(text);
    if (!top.is_list() || top.items.empty() || !top.items[0].is_atom("circuit"))
        fail(errc::parse, "expected (circuit ...)");
    NetlistParser p;
    for (size_t i = 1; i < top.items.size(); ++i) p.form(top.items[i]);
    if (p.circuit.outputs.empty()) fail(errc::parse, "circuit needs at least one output");
    p.circuit.validate();
    return std::move(p.circuit);
}

std::string serialize_circuit(const Circuit &c) {
    c.validate();

    std::set<std::string> used;
    for (const CircuitNode &n : c.nodes)
        if (n.kind == CircuitNode::Kind::Input || n.kind == CircuitNode::Kind::Advice)
            used.insert(n.name);

    auto fresh = [&](std::string base) {
        while (used.count(base)) base += "_";
        used.insert(base);
        return base;
    };

    std::vector<std::string> name_of(c.nodes.size());
    size_t lets = 0, shareds = 0, uses = 0;
    std::vector<std::string> forms;
    for (NodeRef i = 0; i < c.nodes.size(); ++i) {
        const CircuitNode &n = c.nodes[i];
        std::ostringstream os;
        switch (n.kind) {
        case CircuitNode::Kind::Input:
            name_of[i] = n.name;
            os << "(input " << n.name << " :" << n.width << ")";
            forms.push_back(os.str());
            break;
        case CircuitNode::Kind::Const:
            name_of[i] = fresh("n" + std::to_string(lets++));
            os << "(let " << name_of[i] << " (const:" << n.width << " " << n.value << "))";
            forms.push_back(os.str());
            break;
        case CircuitNode::Kind::Op:
            name_of[i] = fresh("n" + std::to_string(lets++));
            os << "(let " << name_of[i] << " (" << op_name(n.op) << ":" << n.width;
            for (NodeRef o : n.operands) os << " " << name_of[o];
            os << "))";
            forms.push_back(os.str());
            break;
        case CircuitNode::Kind::Advice:
            name_of[i] = n.name; // emitted inline by its shared unit
            break;
        case CircuitNode::Kind::Shared:
            name_of[i] = fresh("s" + std::to_string(shareds++));
            os << "(shared " << name_of[i] << " (" << op_name(n.op) << ":" << n.width;
            for (NodeRef a : n.operands)
                os << " (advice " << c.nodes[a].name << " :" << c.nodes[a].width << ")";
            os << "))";
            forms.push_back(os.str());
            break;
        case CircuitNode::Kind::Use:
            name_of[i] = fresh("u" + std::to_string(uses++));
            os << "(use " << name_of[i] << " " << name_of[n.shared];
            for (size_t j = 0; j < n.operands.size(); ++j)
                os << " (bind " << c.nodes[c.nodes[n.shared].operands[j]].name << " "
                   << name_of[n.operands[j]] << ")";
            os << ")";
            forms.push_back(os.str());
            break;
        }
    }
    for (const auto &[name, ref] : c.outputs)
        forms.push_back("(output " + name + " " + name_of[ref] + ")");

    std::ostringstream out;
    if (forms.size() <= 2) {
        out << "(circuit";
        for (const std::string &f : forms) out << " " << f;
        out << ")\n";
    } else {
        out << "(circuit\n";
        for (const std::string &f : forms) out << "  " << f << "\n";
        out << ")\n";
    }
    return out.str();
}

std::map<std::string, uint64_t> evaluate(const Circuit &c,
                                         const std::map<std::string, uint64_t> &inputs) {
    std::vector<std::optional<uint64_t>> memo(c.nodes.size());

    for (NodeRef r : c.inputs) {
        const CircuitNode &n = c.nodes[r];
        auto it = inputs.find(n.name);
        if (it == inputs.end()) fail(errc::unknown_name, "missing input " + n.name);
        if (n.width < 64 && it->second > width_mask(n.width))
            fail(errc::bad_value, "input value for " + n.name + " does not fit width");
    }

    std::function<uint64_t(NodeRef)> eval = [&](NodeRef r) -> uint64_t {
        if (memo[r]) return *memo[r];
        const CircuitNode &n = c.nodes[r];
        uint64_t v = 0;
        switch (n.kind) {
        case CircuitNode::Kind::Input: v = inputs.at(n.name); break;
        case CircuitNode::Kind::Const: v = n.value; break;
        case CircuitNode::Kind::Advice:
            fail(errc::unbound_advice, "advice '" + n.name + "' evaluated outside a use site");
        case CircuitNode::Kind::Shared:
            fail(errc::unbound_advice, "shared unit '" + n.name + "' evaluated outside a use site");
        case CircuitNode::Kind::Op: {
            uint64_t args[2] = {0, 0};
            for (size_t j = 0; j < n.operands.size(); ++j) args[j] = eval(n.operands[j]);
            v = eval_op(n.op, n.width, std::span<const uint64_t>(args, n.operands.size()));
            break;
        }
        case CircuitNode::Kind::Use: {
            // Call semantics: each advice leaf takes the value of the bound
            // operand, then the shared body op is applied.
            const CircuitNode &sh = c.nodes[n.shared];
            uint64_t args[2] = {0, 0};
            for (size_t j = 0; j < n.operands.size(); ++j) args[j] = eval(n.operands[j]);
            v = eval_op(sh.op, n.width, std::span<const uint64_t>(args, n.operands.size()));
            break;
        }
        }
        memo[r] = v;
        return v;
    };

    std::map<std::string, uint64_t> out;
    for (const auto &[name, ref] : c.outputs) out[name] = eval(ref);
    return out;
}

namespace {

std::map<std::string, int> input_signature(const Circuit &c) {
    std::map<std::string, int> sig;
    for (NodeRef r : c.inputs) sig[c.nodes[r].name] = c.nodes[r].width;
    return sig;
}

std::map<std::string, int> output_signature(const Circuit &c) {
    std::map<std::string, int> sig;
    for (const auto &[name, ref] : c.outputs) sig[name] = c.nodes[ref].width;
    return sig;
}

} // namespace

EquivReport check_equivalence(const Circuit &a, const Circuit &b, const CheckMode &mode) {
    auto sig_in = input_signature(a);
    if (sig_in != input_signature(b)) fail(errc::signature_mismatch, "input signatures differ");
    if (output_signature(a) != output_signature(b))
        fail(errc::signature_mismatch, "output signatures differ");

    EquivReport report;

    auto try_vector = [&](const std::map<std::string, uint64_t> &vec) {
        auto lhs = evaluate(a, vec);
        auto rhs = evaluate(b, vec);
        report.vectors++;
        for (const auto &[name, lv] : lhs) {
            uint64_t rv = rhs.at(name);
            if (lv != rv) {
                report.equal = false;
                report.cex = Counterexample{vec, name, lv, rv};
                return false;
            }
        }
        return true;
    };

    if (mode.kind == CheckMode::Kind::Exhaustive) {
        int total_bits = 0;
        for (const auto &[name, w] : sig_in) total_bits += w;
        if (total_bits > 22)
            fail(errc::too_large, "exhaustive check over " + std::to_string(total_bits) + " bits");
        report.mode = "exhaustive";
        uint64_t count = uint64_t{1} << total_bits;
        for (uint64_t x = 0; x < count; ++x) {
            std::map<std::string, uint64_t> vec;
            uint64_t rest = x;
            for (const auto &[name, w] : sig_in) {
                vec[name] = rest & width_mask(w);
                rest >>= w;
            }
            if (!try_vector(vec)) return report;
        }
    } else {
        std::ostringstream os;
        os << "random(samples=" << mode.samples << ", seed=" << mode.seed << ")";
        report.mode = os.str();
        std::mt19937_64 rng(mode.seed);
        for (size_t i = 0; i < mode.samples; ++i) {
            std::map<std::string, uint64_t> vec;
            for (const auto &[name, w] : sig_in) vec[name] = rng() & width_mask(w);
            if (!try_vector(vec)) return report;
        }
    }
    return report;
}

size_t OpStats::ops_of(Op op) const {
    std::string prefix = std::string(op_name(op)) + ":";
    size_t n = 0;
    for (const auto &[key, count] : counts)
        if (key.rfind(prefix, 0) == 0) n += count;
    return n;
}

OpStats circuit_stats(const Circuit &c) {
    OpStats s;
    s.total_nodes = c.nodes.size();
    auto key = [](const std::string &k, int w) { return k + ":" + std::to_string(w); };
    for (const CircuitNode &n : c.nodes) {
        switch (n.kind) {
        case CircuitNode::Kind::Input: s.counts[key("input", n.width)]++; break;
        case CircuitNode::Kind::Const: s.counts[key("const", n.width)]++; break;
        case CircuitNode::Kind::Advice: s.counts[key("advice", n.width)]++; break;
        case CircuitNode::Kind::Op: s.counts[key(std::string(op_name(n.op)), n.width)]++; break;
        case CircuitNode::Kind::Shared:
            // The body is the one hardware unit, so it counts under its op.
            s.counts[key(std::string(op_name(n.op)), n.width)]++;
            s.shared_units++;
            s.uses_per_shared[n.name];
            break;
        case CircuitNode::Kind::Use:
            s.counts[key("use", n.width)]++;
            s.use_sites++;
            s.uses_per_shared[c.nodes[n.shared].name]++;
            break;
        }
    }
    return s;
}

NodeRef CircuitBuilder::input(const std::string &name, int width) {
    auto it = named_.find(name);
    if (it != named_.end()) {
        const CircuitNode &n = nodes_[it->second];
        if (n.kind != CircuitNode::Kind::Input || n.width != width)
            fail(errc::structural, "conflicting redeclaration of input " + name);
        return it->second;
    }
    CircuitNode n;
    n.kind = CircuitNode::Kind::Input;
    n.name = name;
    n.width = width;
    nodes_.push_back(std::move(n));
    NodeRef r = static_cast<NodeRef>(nodes_.size() - 1);
    named_[name] = r;
    return r;
}

NodeRef CircuitBuilder::constant(uint64_t value, int width) {
    if (width < 64 && value > width_mask(width)) fail(errc::bad_value, "const does not fit width");
    auto it = consts_.find({value, width});
    if (it != consts_.end()) return it->second;
    CircuitNode n;
    n.kind = CircuitNode::Kind::Const;
    n.value = value;
    n.width = width;
    nodes_.push_back(std::move(n));
    NodeRef r = static_cast<NodeRef>(nodes_.size() - 1);
    consts_[{value, width}] = r;
    return r;
}

NodeRef CircuitBuilder::op(Op op, int width, std::vector<NodeRef> operands) {
    if (static_cast<int>(operands.size()) != op_arity(op))
        fail(errc::structural, "operand count mismatch");
    std::ostringstream key;
    key << "o:" << static_cast<int>(op) << ":" << width;
    for (NodeRef r : operands) {
        if (r >= nodes_.size()) fail(errc::structural, "operand ref out of range");
        if (!operand_width_ok(op, width, nodes_[r].width))
            fail(errc::width_mismatch, "operand width violates operator discipline");
        key << "," << r;
    }
    auto it = structural_.find(key.str());
    if (it != structural_.end()) return it->second;
    CircuitNode n;
    n.kind = CircuitNode::Kind::Op;
    n.op = op;
    n.width = width;
    n.operands = std::move(operands);
    nodes_.push_back(std::move(n));
    NodeRef r = static_cast<NodeRef>(nodes_.size() - 1);
    structural_[key.str()] = r;
    return r;
}

NodeRef CircuitBuilder::advice(const std::string &name, int width) {
    auto it = named_.find(name);
    if (it != named_.end()) {
        const CircuitNode &n = nodes_[it->second];
        if (n.kind != CircuitNode::Kind::Advice || n.width != width)
            fail(errc::structural, "conflicting redeclaration of advice " + name);
        return it->second;
    }
    CircuitNode n;
    n.kind = CircuitNode::Kind::Advice;
    n.name = name;
    n.width = width;
    nodes_.push_back(std::move(n));
    NodeRef r = static_cast<NodeRef>(nodes_.size() - 1);
    named_[name] = r;
    return r;
}

NodeRef CircuitBuilder::shared_unit(Op op, int width, const std::vector<int> &advice_widths) {
    if (static_cast<int>(advice_widths.size()) != op_arity(op))
        fail(errc::structural, "shared body needs arity-many advice leaves");
    std::string base = "s" + std::to_string(shared_counter_++);
    CircuitNode sh;
    sh.kind = CircuitNode::Kind::Shared;
    sh.name = base;
    sh.op = op;
    sh.width = width;
    for (size_t j = 0; j < advice_widths.size(); ++j) {
        if (!operand_width_ok(op, width, advice_widths[j]))
            fail(errc::width_mismatch, "advice width violates operator discipline");
        sh.operands.push_back(advice(base + "_a" + std::to_string(j), advice_widths[j]));
    }
    nodes_.push_back(std::move(sh));
    return static_cast<NodeRef>(nodes_.size() - 1);
}

NodeRef CircuitBuilder::use_site(NodeRef shared, std::vector<NodeRef> bound) {
    if (shared >= nodes_.size() || nodes_[shared].kind != CircuitNode::Kind::Shared)
        fail(errc::structural, "use site must reference a shared unit");
    const CircuitNode &sh = nodes_[shared];
    if (bound.size() != sh.operands.size())
        fail(errc::structural, "use site bindings must cover the shared advice leaves");
    std::ostringstream key;
    key << "u:" << shared;
    for (size_t j = 0; j < bound.size(); ++j) {
        if (bound[j] >= nodes_.size()) fail(errc::structural, "binding ref out of range");
        if (nodes_[bound[j]].width != nodes_[sh.operands[j]].width)
            fail(errc::width_mismatch, "binding width does not match advice width");
        key << "," << bound[j];
    }
    auto it = structural_.find(key.str());
    if (it != structural_.end()) return it->second;
    CircuitNode n;
    n.kind = CircuitNode::Kind::Use;
    n.width = sh.width;
    n.shared = shared;
    n.operands = std::move(bound);
    nodes_.push_back(std::move(n));
    NodeRef r = static_cast<NodeRef>(nodes_.size() - 1);
    structural_[key.str()] = r;
    return r;
}

Circuit CircuitBuilder::finish(std::vector<std::pair<std::string, NodeRef>> outputs) {
    std::vector<bool> live(nodes_.size(), false);
    std::vector<NodeRef> stack;
    for (const auto &[name, r] : outputs) {
        if (r >= nodes_.size()) fail(errc::structural, "output ref out of range");
        stack.push_back(r);
    }
    for (NodeRef i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].kind == CircuitNode::Kind::Input) stack.push_back(i);
    while (!stack.empty()) {
        NodeRef r = stack.back();
        stack.pop_back();
        if (live[r]) continue;
        live[r] = true;
        for (NodeRef o : nodes_[r].operands) stack.push_back(o);
        if (nodes_[r].kind == CircuitNode::Kind::Use) stack.push_back(nodes_[r].shared);
    }

    Circuit c;
    std::vector<NodeRef> remap(nodes_.size(), 0);
    for (NodeRef i = 0; i < nodes_.size(); ++i) {
        if (!live[i]) continue;
        CircuitNode n = nodes_[i];
        for (NodeRef &o : n.operands) o = remap[o];
        if (n.kind == CircuitNode::Kind::Use) n.shared = remap[n.shared];
        if (n.kind == CircuitNode::Kind::Input) c.inputs.push_back(static_cast<NodeRef>(c.nodes.size()));
        remap[i] = static_cast<NodeRef>(c.nodes.size());
        c.nodes.push_back(std::move(n));
    }
    for (auto &[name, r] : outputs) r = remap[r];
    c.outputs = std::move(outputs);
    c.validate();
    return c;
}

} // namespace bondsat
