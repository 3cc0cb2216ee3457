#include "livrank/error.hpp"
#include "livrank/problem.hpp"
#include "livrank/structure.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace livrank;

namespace
{

signature small()
{
    signature sig;
    sig.add_sort( { "s", true } );
    sig.add_symbol( { "c", symbol_kind::constant, {}, "s", false } );
    sig.add_symbol( { "r", symbol_kind::relation, { "s" }, "", true } );
    return sig;
}

std::uint64_t count( world_enumerator& w, const enumeration_options& opts, enumeration_stats* stats = nullptr )
{
    std::uint64_t n = 0;
    const auto st = w.run( opts, [ & ]( const std::vector< finite_structure >& ) {
        ++n;
        return true;
    } );
    if ( stats )
        *stats = st;
    return n;
}

} // namespace

TEST( structure, table_shapes )
{
    const signature sig = small();
    const auto s = finite_structure::empty( sig, { 3 } );
    EXPECT_EQ( table_size( sig, *sig.find_symbol( "c" ), s.sizes ), 1u );
    EXPECT_EQ( table_size( sig, *sig.find_symbol( "r" ), s.sizes ), 3u );
    EXPECT_EQ( range_size( sig, *sig.find_symbol( "c" ), s.sizes ), 3 );
    EXPECT_EQ( range_size( sig, *sig.find_symbol( "r" ), s.sizes ), 2 );
    EXPECT_TRUE( s.tables[ 0 ].empty() );
}

TEST( structure, evaluation_on_hand_built_structure )
{
    const signature sig = small();
    auto s = finite_structure::empty( sig, { 3 } );
    s.tables[ sig.symbol_index( "c" ) ] = { 2 };
    s.tables[ sig.symbol_index( "r" ) ] = { 0, 1, 1 };
    const auto fr = frames::single( s );
    EXPECT_TRUE( eval( parse_expr( "(r c)", sig ), sig, fr ) );
    EXPECT_FALSE( eval( parse_expr( "(forall ((x s)) (r x))", sig ), sig, fr ) );
    EXPECT_TRUE( eval( parse_expr( "(exists ((x s)) (and (r x) (not (= x c))))", sig ), sig, fr ) );
    EXPECT_EQ( eval_term( parse_expr( "(ite (r c) c c)", sig ), sig, fr ), 2 );
}

TEST( structure, free_variable_needs_assignment )
{
    const signature sig = small();
    auto s = finite_structure::empty( sig, { 2 } );
    s.tables[ 0 ] = { 0 };
    s.tables[ 1 ] = { 1, 0 };
    const var x{ "x", "s" };
    const expr f = parse_expr( "(r x)", sig, { x } );
    EXPECT_TRUE( eval( f, sig, frames::single( s ), { { x, 0 } } ) );
    try
    {
        eval( f, sig, frames::single( s ) );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::missing_assignment );
    }
}

TEST( structure, uninterpreted_symbol_is_reported )
{
    const signature sig = small();
    const auto s = finite_structure::empty( sig, { 2 } );
    try
    {
        eval( parse_expr( "(r c)", sig ), sig, frames::single( s ) );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::missing_assignment );
    }
}

TEST( structure, exhaustive_counts )
{
    const signature sig = small();
    enumeration_options opts;
    {
        world_enumerator w( sig, { finite_structure::empty( sig, { 2 } ) }, { 0, -1, -1, -1 }, { 1 }, {} );
        EXPECT_EQ( w.space(), 4.0 );
        EXPECT_EQ( count( w, opts ), 4u );
    }
    {
        world_enumerator w( sig, { finite_structure::empty( sig, { 2 } ) }, { 0, -1, -1, -1 }, { 0, 1 }, {} );
        enumeration_stats st;
        EXPECT_EQ( count( w, opts, &st ), 8u );
        EXPECT_TRUE( st.exhaustive );
        EXPECT_EQ( st.visited, 8u );
    }
}

TEST( structure, constraints_prune_worlds )
{
    const signature sig = small();
    world_enumerator w( sig, { finite_structure::empty( sig, { 2 } ) }, { 0, -1, -1, -1 }, { 0, 1 },
                        { parse_expr( "(r c)", sig ) } );
    EXPECT_EQ( count( w, {} ), 4u );
}

TEST( structure, paired_worlds_share_immutables )
{
    const signature sig = small();
    const auto base = finite_structure::empty( sig, { 2 } );
    world_enumerator w( sig, { base, base }, { 0, 1, -1, -1 }, { 0, 1 }, {} );
    std::uint64_t n = 0;
    w.run( {}, [ & ]( const std::vector< finite_structure >& world ) {
        ++n;
        EXPECT_EQ( world[ 0 ].tables[ 0 ], world[ 1 ].tables[ 0 ] );
        return true;
    } );
    EXPECT_EQ( n, 2u * 4u * 4u );
}

TEST( structure, small_budget_switches_to_sampling )
{
    const signature sig = small();
    world_enumerator w( sig, { finite_structure::empty( sig, { 2 } ) }, { 0, -1, -1, -1 }, { 0, 1 }, {} );
    enumeration_options opts;
    opts.budget = 4;
    opts.samples = 5;
    enumeration_stats st;
    const auto n = count( w, opts, &st );
    EXPECT_FALSE( st.exhaustive );
    EXPECT_LE( n, 5u );
    EXPECT_GT( n, 0u );
    opts.require_exhaustive = true;
    try
    {
        count( w, opts );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::budget_exceeded );
    }
}

TEST( structure, sampling_is_seeded )
{
    const signature sig = small();
    const auto run = []( const signature& g, std::uint64_t seed ) {
        world_enumerator w( g, { finite_structure::empty( g, { 4 } ) }, { 0, -1, -1, -1 }, { 0, 1 }, {} );
        enumeration_options opts;
        opts.budget = 10;
        opts.samples = 20;
        opts.seed = seed;
        std::vector< std::vector< int > > seen;
        w.run( opts, [ & ]( const std::vector< finite_structure >& world ) {
            seen.push_back( world[ 0 ].tables[ 1 ] );
            return true;
        } );
        return seen;
    };
    EXPECT_EQ( run( sig, 3 ), run( sig, 3 ) );
}

TEST( structure, visitor_can_stop_early )
{
    const signature sig = small();
    world_enumerator w( sig, { finite_structure::empty( sig, { 2 } ) }, { 0, -1, -1, -1 }, { 0, 1 }, {} );
    int n = 0;
    w.run( {}, [ & ]( const std::vector< finite_structure >& ) { return ++n < 3; } );
    EXPECT_EQ( n, 3 );
}

TEST( structure, strict_total_order_filter )
{
    signature sig;
    sig.add_sort( { "s", true } );
    sig.add_symbol( { "lt", symbol_kind::relation, { "s", "s" }, "", false } );
    const var u{ "u", "s" };
    const var v{ "v", "s" };
    const expr order = strict_total_order( { u }, { v }, parse_expr( "(lt u v)", sig, { u, v } ) );
    world_enumerator w( sig, { finite_structure::empty( sig, { 3 } ) }, { 0, -1, -1, -1 }, { 0 }, { order } );
    EXPECT_EQ( count( w, {} ), 6u ); // 3! orders
}

TEST( structure, describe_lists_every_symbol )
{
    const signature sig = small();
    auto s = finite_structure::empty( sig, { 2 } );
    s.tables[ 0 ] = { 1 };
    s.tables[ 1 ] = { 1, 0 };
    const std::string d = describe( s, sig );
    EXPECT_NE( d.find( "c" ), std::string::npos );
    EXPECT_NE( d.find( "r" ), std::string::npos );
}
