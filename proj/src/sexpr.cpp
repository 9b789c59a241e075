#include "bondsat/sexpr.hpp"

#include "bondsat/errors.hpp"

#include <cctype>
#include <sstream>

namespace bondsat {

std::string SExpr::where() const {
    std::ostringstream os;
    os << "line " << line << ", col " << col;
    return os.str();
}

namespace {

struct Cursor {
    std::string_view text;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    char take() {
        char c = text[pos++];
        if (c == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
        return c;
    }

    void skip_blank() {
        while (!done()) {
            char c = peek();
            if (c == ';') {
                while (!done() && peek() != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }
};

bool atom_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ';';
}

SExpr parse_form(Cursor &cur) {
    cur.skip_blank();
    if (cur.done()) fail(errc::parse, "unexpected end of input");

    SExpr node;
    node.line = cur.line;
    node.col = cur.col;

    if (cur.peek() == '(') {
        cur.take();
        node.kind = SExpr::Kind::List;
        while (true) {
            cur.skip_blank();
            if (cur.done()) fail(errc::parse, "unclosed '(' at " + node.where());
            if (cur.peek() == ')') {
                cur.take();
                break;
            }
            node.items.push_back(parse_form(cur));
        }
        return node;
    }
    if (cur.peek() == ')') {
        std::ostringstream os;
        os << "stray ')' at line " << cur.line << ", col " << cur.col;
        fail(errc::parse, os.str());
    }

    node.kind = SExpr::Kind::Atom;
    while (!cur.done() && atom_char(cur.peek())) node.atom.push_back(cur.take());
    return node;
}

} // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) {
    Cursor cur{text};
    std::vector<SExpr> forms;
    while (true) {
        cur.skip_blank();
        if (cur.done()) break;
        forms.push_back(parse_form(cur));
    }
    return forms;
}

SExpr parse_one_sexpr(std::string_view text) {
    auto forms = parse_sexprs(text);
    if (forms.size() != 1) fail(errc::parse, "expected exactly one form");
    return std::move(forms.front());
}

} // namespace bondsat
