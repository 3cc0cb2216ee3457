#pragma once

#include "livrank/fol.hpp"
#include "livrank/ranking.hpp"
#include "livrank/sexpr.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace livrank
{

// A named formula with parameters: fairness r_i(x) and helpful psi_i(x).
struct param_formula
{
    std::string name;
    std::vector< var > params;
    expr formula;
};

struct hint_decl
{
    std::vector< int > path;
    std::string block;
    hint_tuples tuples;
};

struct problem
{
    std::string name;
    bool slow = false;

    signature sig;
    expr init;
    expr trans;
    std::vector< expr > axioms;

    // Omitting every fairness declaration yields the single assumption
    // "fair" with r = true.
    std::vector< param_formula > fairness;
    bool default_fairness = false;

    expr p;
    expr q;
    bool default_p = false; // p taken to be init

    expr rho;
    expr trigger;
    bool default_trigger = false; // rho and not q
    std::vector< param_formula > helpful; // aligned with fairness

    std::optional< ranking_node > ranking; // hints already attached
    std::vector< hint_decl > hints;
};

problem parse_problem( std::string_view text );
problem load_problem( const std::filesystem::path& file );

// Prints a problem back in the input syntax. parse_problem(unparse(p))
// reproduces p.
std::string unparse( const problem& p );

// Structural equality of two parsed problems (formulas compared as trees).
bool same_problem( const problem& a, const problem& b );

struct diagnostic
{
    bool is_error = false;
    std::string message;
};

// Checks that need the whole problem: closedness, helpful/fairness parameter
// agreement and finite-domain constructors over sorts not declared :finite
// (an error with strict_finite, a warning otherwise).
std::vector< diagnostic > validate_problem( const problem& p, bool strict_finite = false );

// Expression parser, also used by tests. `scope` lists variables that may
// occur free; with allow_primes a trailing ' selects the post-state copy of a
// mutable symbol.
expr parse_expr( const sexpr& e, const signature& sig, const std::vector< var >& scope, bool allow_primes );
expr parse_expr( std::string_view text, const signature& sig, const std::vector< var >& scope = {},
                 bool allow_primes = false );

ranking_node parse_ranking( const sexpr& e, const signature& sig );

} // namespace livrank
