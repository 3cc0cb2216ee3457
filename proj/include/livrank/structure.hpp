#pragma once

#include "livrank/fol.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace livrank
{

// Elements of a sort of size n are 0..n-1. Tables are indexed row-major by
// the argument values; relations store 0/1, functions the result element.
// A symbol with an empty table is uninterpreted in this structure.
struct finite_structure
{
    std::vector< int > sizes;                // per sort index of the signature
    std::vector< std::vector< int > > tables; // per symbol index

    static finite_structure empty( const signature& sig, std::vector< int > sizes );
};

std::size_t table_size( const signature& sig, const symbol_decl& s, const std::vector< int >& sizes );
int range_size( const signature& sig, const symbol_decl& s, const std::vector< int >& sizes );

// Which structure interprets each tag. Immutable symbols are read from the
// `plain` slot, which paired structures share a domain and scaffold with.
struct frames
{
    std::array< const finite_structure*, 4 > at{};

    static frames single( const finite_structure& s );
    static frames transition( const finite_structure& pre, const finite_structure& post );
    static frames ranked( const finite_structure& low, const finite_structure& high );
};

using assignment = std::map< var, int >;

// Tarskian semantics by exhaustive quantifier expansion. Throws
// error(missing_assignment) for free variables outside `v` or symbols the
// frames leave uninterpreted.
bool eval( const expr& f, const signature& sig, const frames& fr, const assignment& v = {} );
int eval_term( const expr& t, const signature& sig, const frames& fr, const assignment& v = {} );

// Formulas compiled against one signature into a flat node array. Variables
// (free and bound) live in integer slots shared by everything added to the
// same evaluator.
class evaluator
{
public:
    explicit evaluator( const signature& sig );

    int slot( const var& v );
    [[nodiscard]] int find_slot( const var& v ) const; // -1 when absent
    [[nodiscard]] std::size_t slot_count() const { return _slots.size(); }

    int add( const expr& e );

    bool holds( int handle, const frames& fr, std::vector< int >& slots ) const;
    int value( int handle, const frames& fr, std::vector< int >& slots ) const;

    [[nodiscard]] const signature& sig() const { return *_sig; }

private:
    struct cnode
    {
        op kind = op::true_;
        int symbol = -1;
        int t = 0;
        int slot = -1;
        std::vector< int > kids;
        std::vector< int > qslots;
        std::vector< int > qsorts;
        std::vector< int > argsorts;
    };

    const signature* _sig;
    std::map< var, int > _slots;
    std::vector< cnode > _nodes;

    int compile( const expr& e );
    int run( int n, const frames& fr, const std::vector< int >& sizes, std::vector< int >& slots ) const;
    bool quantify( const cnode& c, std::size_t i, bool want, const frames& fr, const std::vector< int >& sizes,
                   std::vector< int >& slots ) const;
};

struct enumeration_options
{
    std::uint64_t budget = 1'000'000;  // exhaustive up to this many cases
    std::uint64_t samples = 10'000;     // otherwise this many seeded samples
    std::uint64_t seed = 0;
    bool require_exhaustive = false;    // error(budget_exceeded) instead of sampling
};

struct enumeration_stats
{
    bool exhaustive = true;
    double space = 0;          // cases before constraint pruning (scaffold counted after pruning)
    std::uint64_t visited = 0; // worlds handed to the callback
};

// Enumerates tuples ("worlds") of structures over one domain that agree on
// immutable symbols. `tag_state` says which world member interprets each
// tag (-1: unused). Only `symbols` are enumerated; the rest keep the tables
// of `base`. Constraints are closed formulas evaluated as soon as all the
// symbols they mention are assigned, so they prune whole subtrees.
class world_enumerator
{
public:
    world_enumerator( const signature& sig, std::vector< finite_structure > base, std::array< int, 4 > tag_state,
                      const std::vector< std::size_t >& symbols, const std::vector< expr >& constraints );

    using visitor = std::function< bool( const std::vector< finite_structure >& ) >;

    // Visits worlds satisfying every constraint until `visit` returns false.
    enumeration_stats run( const enumeration_options& opts, const visitor& visit );

    // Counts the cases an exhaustive run would face (scaffold pruned).
    double space();

    [[nodiscard]] frames frames_of( const std::vector< finite_structure >& w ) const;

private:
    struct cell
    {
        std::size_t symbol;
        int state; // -1: immutable, written to every member
        std::size_t grid;
        int range;
    };

    const signature* _sig;
    std::vector< finite_structure > _world;
    std::array< int, 4 > _tag_state;
    std::vector< cell > _cells;
    evaluator _eval;
    std::vector< std::vector< int > > _checks; // per stage (index + 1), handles
    std::vector< int > _slots;
    double _space = -1;

    bool stage_ok( std::size_t stage );
    void write( const cell& c, const std::vector< int >& table );
    bool exhaustive( std::size_t k, const visitor& visit, std::uint64_t& visited, std::uint64_t limit );
};

// Strict total order on the given structure (used to filter structures for
// height computations).
expr strict_total_order( const std::vector< var >& low, const std::vector< var >& high, const expr& body );

std::string describe( const finite_structure& s, const signature& sig, const std::string& indent = "" );

} // namespace livrank
