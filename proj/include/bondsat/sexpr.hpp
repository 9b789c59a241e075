#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bondsat {

// Minimal s-expression reader shared by the netlist and rule parsers.
// Atoms are runs of non-delimiter characters; `;` comments run to end of
// line. Every node carries its source position for error messages.
struct SExpr {
    enum class Kind { Atom, List };

    Kind kind = Kind::Atom;
    std::string atom;
    std::vector<SExpr> items;
    int line = 0;
    int col = 0;

    bool is_atom() const { return kind == Kind::Atom; }
    bool is_list() const { return kind == Kind::List; }
    bool is_atom(std::string_view text) const { return is_atom() && atom == text; }
    std::string where() const;
};

// Parses all top-level forms in `text`.
std::vector<SExpr> parse_sexprs(std::string_view text);

// Parses exactly one top-level form; anything else is a parse error.
SExpr parse_one_sexpr(std::string_view text);

} // namespace bondsat
