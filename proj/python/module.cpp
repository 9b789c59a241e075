#include "bondsat/circuit.hpp"
#include "bondsat/dot.hpp"
#include "bondsat/extract.hpp"
#include "bondsat/pipeline.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

using namespace bondsat;

py::dict stats_dict(const OpStats &s) {
    py::dict d;
    py::dict counts;
    for (const auto &[key, n] : s.counts) counts[py::str(key)] = n;
    d["counts"] = counts;
    d["total_nodes"] = s.total_nodes;
    d["shared_units"] = s.shared_units;
    d["use_sites"] = s.use_sites;
    py::dict per;
    for (const auto &[key, n] : s.uses_per_shared) per[py::str(key)] = n;
    d["uses_per_shared"] = per;
    return d;
}

py::dict equiv_dict(const EquivReport &rep) {
    py::dict d;
    d["equal"] = rep.equal;
    d["mode"] = rep.mode;
    d["vectors"] = rep.vectors;
    if (rep.cex) {
        py::dict cex;
        cex["inputs"] = rep.cex->inputs;
        cex["output"] = rep.cex->output;
        cex["lhs"] = rep.cex->lhs;
        cex["rhs"] = rep.cex->rhs;
        d["counterexample"] = cex;
    } else {
        d["counterexample"] = py::none();
    }
    return d;
}

CheckConfig make_check(const std::string &mode, size_t samples, uint64_t seed) {
    CheckConfig check;
    check.samples = samples;
    check.seed = seed;
    if (mode == "exhaustive") check.mode = CheckConfig::Mode::Exhaustive;
    else if (mode == "random") check.mode = CheckConfig::Mode::Random;
    else if (mode == "auto") check.mode = CheckConfig::Mode::Auto;
    else fail(errc::bad_value, "check mode must be auto|exhaustive|random");
    return check;
}

py::dict optimize(const std::string &circuit_text, const py::object &rules_text,
                  const py::object &costs_text, int iters, size_t nodes, int64_t millis,
                  const std::string &check_mode, size_t samples, uint64_t seed, bool emit_dot) {
    Circuit input = parse_circuit(circuit_text);
    RuleSet rules = rules_text.is_none()
                        ? RuleSet::defaults()
                        : RuleSet::from_text(rules_text.cast<std::string>());
    CostModel costs = costs_text.is_none() ? CostModel::defaults()
                                           : CostModel::parse(costs_text.cast<std::string>());
    Limits limits{iters, nodes, millis};

    OptimizeOutcome out =
        optimize_circuit(input, rules, costs, limits, make_check(check_mode, samples, seed),
                         emit_dot);

    py::dict d;
    d["optimized"] = serialize_circuit(out.optimized);
    d["equal"] = out.equivalence.equal;
    d["equivalence"] = equiv_dict(out.equivalence);
    d["stats_before"] = stats_dict(out.stats_before);
    d["stats_after"] = stats_dict(out.stats_after);
    d["cost_before"] = out.cost_before;
    d["cost_after"] = out.cost_after;
    py::dict sat;
    sat["iterations"] = out.saturation.iterations;
    sat["merges_per_iteration"] = out.saturation.merges_per_iteration;
    sat["stop"] = stop_reason_name(out.saturation.stop);
    sat["final_classes"] = out.saturation.final_classes;
    sat["final_nodes"] = out.saturation.final_nodes;
    d["saturation"] = sat;
    py::list bonds;
    for (const auto &b : out.bonds) {
        py::dict rec;
        rec["op"] = b.op;
        rec["width"] = b.width;
        rec["sites"] = b.sites;
        rec["unified"] = b.unified;
        bonds.append(rec);
    }
    d["bond_records"] = bonds;
    if (emit_dot) {
        d["egraph_dot_pre"] = out.egraph_dot_pre;
        d["egraph_dot_post"] = out.egraph_dot_post;
    }
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "equality saturation with bond nodes for combinational circuits";

    py::register_exception<Error>(m, "BondsatError");

    m.def("normalize", [](const std::string &text) { return serialize_circuit(parse_circuit(text)); },
          py::arg("circuit"), "parse a netlist and serialize it back in canonical form");

    m.def(
        "evaluate",
        [](const std::string &text, const std::map<std::string, uint64_t> &inputs) {
            return evaluate(parse_circuit(text), inputs);
        },
        py::arg("circuit"), py::arg("inputs"), "evaluate a netlist on one input assignment");

    m.def(
        "stats",
        [](const std::string &text) { return stats_dict(circuit_stats(parse_circuit(text))); },
        py::arg("circuit"), "per-op/width counts plus shared-unit and use-site totals");

    m.def(
        "check_equivalence",
        [](const std::string &a, const std::string &b, const std::string &mode, size_t samples,
           uint64_t seed) {
            CheckMode m2 = mode == "exhaustive" ? CheckMode::exhaustive()
                                                : CheckMode::random(samples, seed);
            return equiv_dict(check_equivalence(parse_circuit(a), parse_circuit(b), m2));
        },
        py::arg("circuit_a"), py::arg("circuit_b"), py::arg("mode") = "exhaustive",
        py::arg("samples") = 1000, py::arg("seed") = kDefaultSeed);

    m.def(
        "circuit_dot",
        [](const std::string &text) { return circuit_to_dot(parse_circuit(text)); },
        py::arg("circuit"));

    m.def("optimize", &optimize, py::arg("circuit"), py::arg("rules") = py::none(),
          py::arg("costs") = py::none(), py::arg("iters") = 30, py::arg("nodes") = 10000,
          py::arg("millis") = 5000, py::arg("check") = "auto", py::arg("samples") = 1000,
          py::arg("seed") = kDefaultSeed, py::arg("emit_dot") = false,
          "run the staged pipeline and return the optimized netlist plus reports");

    m.attr("DEFAULT_SEED") = kDefaultSeed;
}
