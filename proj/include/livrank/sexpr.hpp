#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace livrank
{

// A parsed s-expression with the source position of its first character.
struct sexpr
{
    bool is_atom = false;
    std::string atom;
    std::vector<sexpr> items;
    int line = 1;
    int column = 1;

    [[nodiscard]] bool is_list() const { return !is_atom; }
    [[nodiscard]] bool is_atom_equal( std::string_view text ) const { return is_atom && atom == text; }
    [[nodiscard]] std::string where() const;
    [[nodiscard]] std::string to_string() const;
};

// Reads every top-level s-expression of `text`. `;` starts a line comment.
// Throws error(parse_error) with line/column on unbalanced input.
std::vector<sexpr> read_sexprs( std::string_view text );

} // namespace livrank
