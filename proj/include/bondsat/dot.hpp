#pragma once

#include "bondsat/circuit.hpp"
#include "bondsat/egraph.hpp"

#include <string>

namespace bondsat {

// Deterministic DOT: e-classes as clusters, b-nodes as filled black
// circles, advice leaves as diamonds.
std::string egraph_to_dot(const EGraph &g);

std::string circuit_to_dot(const Circuit &c);

} // namespace bondsat
