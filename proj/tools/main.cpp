#include "bondsat/circuit.hpp"
#include "bondsat/dot.hpp"
#include "bondsat/errors.hpp"
#include "bondsat/extract.hpp"
#include "bondsat/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using bondsat::Error;
using Json = nlohmann::ordered_json;

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) bondsat::fail(bondsat::errc::unknown_name, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) bondsat::fail(bondsat::errc::unknown_name, "cannot write " + path);
    out << text;
}

std::string default_prefix(const std::string &input) {
    size_t slash = input.find_last_of('/');
    size_t dot = input.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return input;
    return input.substr(0, dot);
}

Json stats_json(const bondsat::OpStats &s, double cost) {
    Json j;
    j["total_nodes"] = s.total_nodes;
    j["counts"] = Json::object();
    for (const auto &[key, n] : s.counts) j["counts"][key] = n;
    j["shared_units"] = s.shared_units;
    j["use_sites"] = s.use_sites;
    j["uses_per_shared"] = Json::object();
    for (const auto &[key, n] : s.uses_per_shared) j["uses_per_shared"][key] = n;
    j["total_cost"] = cost;
    return j;
}

void init_logging() {
    const char *level = std::getenv("BONDSAT_LOG");
    if (!level) {
        spdlog::set_level(spdlog::level::warn);
        return;
    }
    spdlog::set_level(spdlog::level::from_str(level));
}

int run_optimize(const std::string &input_path, const std::string &rules_path,
                 const std::string &costs_path, const bondsat::Limits &limits,
                 const std::string &check_kind, size_t samples, uint64_t seed,
                 const std::vector<std::string> &emit, std::string out_prefix) {
    if (out_prefix.empty()) out_prefix = default_prefix(input_path);

    spdlog::info("parsing {}", input_path);
    bondsat::Circuit input = bondsat::parse_circuit(read_file(input_path));

    bondsat::RuleSet rules = rules_path.empty() ? bondsat::RuleSet::defaults()
                                                : bondsat::RuleSet::from_text(read_file(rules_path));
    bondsat::CostModel costs = costs_path.empty() ? bondsat::CostModel::defaults()
                                                  : bondsat::CostModel::parse(read_file(costs_path));

    bondsat::CheckConfig check;
    check.samples = samples;
    check.seed = seed;
    if (check_kind == "exhaustive") check.mode = bondsat::CheckConfig::Mode::Exhaustive;
    else if (check_kind == "random") check.mode = bondsat::CheckConfig::Mode::Random;
    else check.mode = bondsat::CheckConfig::Mode::Auto;

    bool dot_egraph = false, dot_circuit = false;
    for (const std::string &e : emit) {
        if (e == "dot-egraph") dot_egraph = true;
        else if (e == "dot-circuit") dot_circuit = true;
        else if (e == "stats") continue; // always written
        else bondsat::fail(bondsat::errc::bad_value, "unknown emit flag " + e);
    }

    spdlog::info("running staged pipeline (iters={} nodes={} millis={})", limits.iters,
                 limits.nodes, limits.millis);
    bondsat::OptimizeOutcome outcome =
        bondsat::optimize_circuit(input, rules, costs, limits, check, dot_egraph);
    spdlog::info("saturation stopped: {} after {} iterations",
                 bondsat::stop_reason_name(outcome.saturation.stop), outcome.saturation.iterations);

    write_file(out_prefix + ".opt.circuit", bondsat::serialize_circuit(outcome.optimized));

    Json j;
    j["input"] = input_path;
    j["before"] = stats_json(outcome.stats_before, outcome.cost_before);
    j["after"] = stats_json(outcome.stats_after, outcome.cost_after);
    Json sat;
    sat["iterations"] = outcome.saturation.iterations;
    sat["merges_per_iteration"] = outcome.saturation.merges_per_iteration;
    sat["stop"] = bondsat::stop_reason_name(outcome.saturation.stop);
    sat["final_classes"] = outcome.saturation.final_classes;
    sat["final_nodes"] = outcome.saturation.final_nodes;
    j["saturation"] = sat;
    j["bond_records"] = Json::array();
    for (const auto &b : outcome.bonds) {
        Json rec;
        rec["op"] = b.op;
        rec["width"] = b.width;
        rec["sites"] = b.sites;
        rec["unified"] = b.unified;
        j["bond_records"].push_back(rec);
    }
    Json equiv;
    equiv["equal"] = outcome.equivalence.equal;
    equiv["mode"] = outcome.equivalence.mode;
    equiv["vectors"] = outcome.equivalence.vectors;
    j["equivalence"] = equiv;
    write_file(out_prefix + ".stats.json", j.dump(2) + "\n");

    std::ostringstream eq;
    eq << (outcome.equivalence.equal ? "PASS" : "FAIL") << " " << outcome.equivalence.mode
       << " vectors=" << outcome.equivalence.vectors << "\n";
    if (outcome.equivalence.cex) {
        const auto &cex = *outcome.equivalence.cex;
        eq << "counterexample output=" << cex.output << " expected=" << cex.lhs
           << " got=" << cex.rhs << "\n";
        for (const auto &[name, v] : cex.inputs) eq << "  " << name << " = " << v << "\n";
    }
    write_file(out_prefix + ".equiv.txt", eq.str());

    if (dot_egraph) {
        write_file(out_prefix + ".egraph.pre.dot", outcome.egraph_dot_pre);
        write_file(out_prefix + ".egraph.post.dot", outcome.egraph_dot_post);
    }
    if (dot_circuit) {
        write_file(out_prefix + ".circuit.pre.dot", bondsat::circuit_to_dot(input));
        write_file(out_prefix + ".circuit.post.dot", bondsat::circuit_to_dot(outcome.optimized));
    }

    if (!outcome.equivalence.equal) {
        spdlog::error("equivalence check failed; see {}.equiv.txt", out_prefix);
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    init_logging();

    CLI::App app{"bondsat: equality saturation with bond nodes for circuit optimization"};
    app.require_subcommand(1);

    auto *opt = app.add_subcommand("optimize", "optimize a circuit netlist");
    std::string input_path, rules_path, costs_path, out_prefix, check_kind = "auto";
    bondsat::Limits limits;
    size_t samples = 1000;
    uint64_t seed = bondsat::kDefaultSeed;
    std::vector<std::string> emit;
    opt->add_option("circuit", input_path, "input netlist")->required();
    opt->add_option("--rules", rules_path, "rule file (default: built-in rules)");
    opt->add_option("--costs", costs_path, "cost model file");
    opt->add_option("--iters", limits.iters, "saturation iteration limit");
    opt->add_option("--nodes", limits.nodes, "saturation node limit");
    opt->add_option("--millis", limits.millis, "saturation time limit (ms)");
    opt->add_option("--check", check_kind, "equivalence check: auto|exhaustive|random");
    opt->add_option("--samples", samples, "random check sample count");
    opt->add_option("--seed", seed, "random check seed");
    opt->add_option("--emit", emit, "extra artifacts: dot-egraph,dot-circuit,stats")
        ->delimiter(',');
    opt->add_option("--out", out_prefix, "output path prefix (default: input stem)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (opt->parsed())
            return run_optimize(input_path, rules_path, costs_path, limits, check_kind, samples,
                                seed, emit, out_prefix);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
