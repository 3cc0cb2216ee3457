#pragma once

#include "livrank/fol.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace livrank
{

// A formula l(y_low, y_high) over the plain signature comparing two tuples.
struct order_formula
{
    std::vector< var > low;
    std::vector< var > high;
    expr body;
};

// l with its symbols moved to copy `t` and the two slots filled by `a`, `b`.
expr apply_order( const order_formula& l, tag t, const std::vector< expr >& a, const std::vector< expr >& b );

// Agreement of l between the two ranked copies, asymmetry and transitivity.
expr mk_immut_order( const order_formula& l );

enum class ctor
{
    bin,
    pos,
    pw,
    lex,
    lin,
    dom_pw,
    dom_perm,
    dom_lex,
    dom_lin,
};

std::string_view to_string( ctor c );

// Hint terms live in the ranking copies already: symbols of the higher
// (pre-state) copy carry sub1, those of the lower copy sub0.
using hint_tuples = std::vector< std::vector< expr > >;
using hint_set = std::map< std::string, hint_tuples >;

// Constructor tree as written by the user.
struct ranking_node
{
    ctor kind = ctor::bin;
    std::vector< var > vars;  // parameters of bin/pos, aggregated tuple of the dom-* nodes
    expr formula;             // alpha of bin and dom-lin
    std::vector< expr > terms; // pos
    order_formula order;      // pos, dom-lex, dom-lin
    int k = 0;                // dom-perm
    bool loose = false;       // dom-perm: only the i<j distinctness family shown in the literature
    std::vector< expr > guards; // lin
    std::vector< ranking_node > children;
    hint_set hints;
};

// Parameters of the ranking a node produces, computed from the tree alone.
std::vector< var > node_params( const ranking_node& node );

// Existential blocks a constructor introduces, in declaration order. The
// first one is the default block of a hint without `:block`.
std::vector< std::string > hint_blocks( ctor c );

// Sorts a single hint tuple of `block` must have.
std::vector< std::string > hint_tuple_sorts( const ranking_node& node, const std::string& block );

struct implicit_ranking
{
    std::vector< var > params;
    expr conserved;
    expr reduced;
    bool finite_domain = false;
    std::shared_ptr< const ranking_node > node;
};

// Copies of a parameter tuple in the lower / higher ranked structure.
std::vector< var > low_copy( const std::vector< var >& xs );
std::vector< var > high_copy( const std::vector< var >& xs );

// The constructors. Each checks that the resulting formulas only mention the
// two copies of its parameters (error free_var_escape otherwise).
implicit_ranking bin( const expr& alpha, const std::vector< var >& params );
implicit_ranking pos( const std::vector< expr >& terms, const order_formula& l, const std::vector< var >& params );
implicit_ranking pw( const std::vector< implicit_ranking >& rs );
implicit_ranking lex( const std::vector< implicit_ranking >& rs );
implicit_ranking lin( const std::vector< expr >& guards, const std::vector< implicit_ranking >& rs );
implicit_ranking dom_pw( const implicit_ranking& r, const std::vector< var >& ys, const hint_set& hints = {} );
implicit_ranking dom_perm( const implicit_ranking& r, const std::vector< var >& ys, int k, bool loose = false,
                           const hint_set& hints = {} );
implicit_ranking dom_lex( const implicit_ranking& r, const std::vector< var >& ys, const order_formula& l,
                          const hint_set& hints = {} );
implicit_ranking dom_lin( const implicit_ranking& r, const std::vector< var >& ys, const order_formula& l,
                          const expr& alpha, const hint_set& hints = {} );

// Attaches hint tuples to the node addressed by `path` (child indices from
// the root). Errors: bad_hint_path, sort_mismatch.
void apply_hints( ranking_node& root, const std::vector< int >& path, const std::string& block,
                  const hint_tuples& tuples );

struct elaborate_options
{
    bool use_hints = true;
    bool require_closed = true;
    // Mutation testing: the bin leaf at this path compares its two states
    // the wrong way round (its sub0 and sub1 copies are exchanged).
    std::optional< std::vector< int > > swap_roles_at;
};

using node_visitor = std::function< void( const std::vector< int >& path, const implicit_ranking& r ) >;

// Bottom-up construction of the whole tree. `visit` sees every node's result
// in post-order.
implicit_ranking elaborate( const ranking_node& root, const signature& sig, const elaborate_options& opts = {},
                            const node_visitor& visit = {} );

std::string path_string( const std::vector< int >& path );

} // namespace livrank
