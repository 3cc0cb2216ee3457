#include "livrank/error.hpp"
#include "livrank/oracle.hpp"
#include "livrank/problem.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace livrank;
using livrank::testing::load_benchmark;

namespace
{

// Index structure of size n with lt the usual order and ptr at `ptr`.
finite_structure counter_state( const signature& sig, int n, int ptr, const std::vector< int >& bits )
{
    auto s = finite_structure::empty( sig, { n } );
    auto& lt = s.tables[ sig.symbol_index( "lt" ) ];
    lt.assign( static_cast< std::size_t >( n * n ), 0 );
    for ( int a = 0; a < n; ++a )
        for ( int b = a + 1; b < n; ++b )
            lt[ static_cast< std::size_t >( a * n + b ) ] = 1;
    s.tables[ sig.symbol_index( "zero" ) ] = { 0 };
    s.tables[ sig.symbol_index( "top" ) ] = { n - 1 };
    s.tables[ sig.symbol_index( "ptr" ) ] = { ptr };
    s.tables[ sig.symbol_index( "a" ) ] = bits;
    return s;
}

} // namespace

TEST( oracle, bin_of_true_has_height_one )
{
    const problem p = load_benchmark( "toy_stab" );
    const auto node = parse_ranking( read_sexprs( "(bin true ())" ).front(), p.sig );
    const height_function h( node, p.sig );
    const auto s = finite_structure::empty( p.sig, { 2 } );
    const auto v = h( s, std::vector< int >{} );
    EXPECT_EQ( v.value, 1u );
    EXPECT_EQ( v.bound, 1u );
}

TEST( oracle, toy_height_is_bounded_by_n_squared )
{
    const problem p = load_benchmark( "toy_stab" );
    const height_function h( *p.ranking, p.sig );
    std::mt19937_64 rng( 1 );
    for ( int n = 1; n <= 4; ++n )
        for ( int round = 0; round < 20; ++round )
        {
            auto s = finite_structure::empty( p.sig, { n } );
            livrank::testing::randomize( s, p.sig, rng );
            const auto v = h( s, std::vector< int >{} );
            EXPECT_EQ( v.bound, static_cast< std::uint64_t >( n * n ) );
            EXPECT_LE( v.value, v.bound );
        }
}

TEST( oracle, counter_height_is_bounded_by_n_times_two_to_the_n_minus_one )
{
    const problem p = load_benchmark( "binary_counter" );
    const height_function h( *p.ranking, p.sig );
    for ( int n = 1; n <= 4; ++n )
    {
        const auto v = h( counter_state( p.sig, n, n - 1, std::vector< int >( static_cast< std::size_t >( n ), 1 ) ),
                          std::vector< int >{} );
        EXPECT_EQ( v.bound, static_cast< std::uint64_t >( n * ( 1 << n ) - 1 ) );
        EXPECT_EQ( v.value, v.bound ) << "all ones with the pointer at the top is the largest state";
    }
}

TEST( oracle, pos_height_is_position_in_order )
{
    const problem p = load_benchmark( "binary_counter" );
    const ranking_node& pos_node = p.ranking->children[ 1 ];
    ASSERT_EQ( pos_node.kind, ctor::pos );
    const height_function h( pos_node, p.sig );
    const std::vector< int > bits{ 0, 0, 0 };
    EXPECT_EQ( h( counter_state( p.sig, 3, 2, bits ), std::vector< int >{} ).value, 2u );
    EXPECT_EQ( h( counter_state( p.sig, 3, 1, bits ), std::vector< int >{} ).value, 1u );
    EXPECT_EQ( h( counter_state( p.sig, 3, 1, bits ), std::vector< int >{} ).bound, 2u );
}

TEST( oracle, dom_lex_weighs_earlier_elements_more )
{
    const problem p = load_benchmark( "binary_counter" );
    const ranking_node& digits = p.ranking->children[ 0 ];
    const height_function h( digits, p.sig );
    // bit i counts when i <= ptr; index 0 is the most significant
    EXPECT_EQ( h( counter_state( p.sig, 3, 2, { 1, 0, 0 } ), std::vector< int >{} ).value, 4u );
    EXPECT_EQ( h( counter_state( p.sig, 3, 2, { 0, 1, 1 } ), std::vector< int >{} ).value, 3u );
    EXPECT_EQ( h( counter_state( p.sig, 3, 0, { 0, 1, 1 } ), std::vector< int >{} ).value, 0u );
}

TEST( oracle, multi_variable_dom_lex_is_unsupported )
{
    const problem p = load_benchmark( "leader_ring" );
    try
    {
        check_oracle_support( *p.ranking );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::oracle_unsupported );
    }
}

TEST( oracle, toy_ranking_is_sound_up_to_size_three )
{
    const problem p = load_benchmark( "toy_stab" );
    for ( int n = 1; n <= 3; ++n )
    {
        const auto r = check_ranking_soundness( *p.ranking, p.sig, { n } );
        EXPECT_EQ( r.violations, 0u ) << n;
        EXPECT_TRUE( r.exhaustive ) << n;
        EXPECT_GT( r.cases, 0u );
    }
}

TEST( oracle, swapped_bin_leaf_is_caught )
{
    const problem p = load_benchmark( "toy_stab" );
    elaborate_options opts;
    opts.use_hints = false;
    opts.require_closed = false;
    opts.swap_roles_at = std::vector< int >{ 0, 0 };
    const auto mutated = elaborate( *p.ranking, p.sig, opts );
    const auto r = check_ranking_soundness( mutated, *p.ranking, p.sig, { 2 } );
    EXPECT_GT( r.violations, 0u );
    ASSERT_TRUE( r.witness );
    EXPECT_FALSE( r.witness->description.empty() );
}

TEST( oracle, toy_premises_hold_on_small_structures )
{
    const problem p = load_benchmark( "toy_stab" );
    for ( const auto& ob : generate_premises( p, elaborate( *p.ranking, p.sig ) ) )
        for ( int n = 1; n <= 3; ++n )
            EXPECT_EQ( bounded_premise_check( ob, p.sig, { n } ).violations, 0u ) << ob.name << " at " << n;
}

TEST( oracle, mutated_premises_are_falsified )
{
    const problem p = load_benchmark( "broken_toy_stab" );
    std::uint64_t found = 0;
    for ( const auto& ob : generate_premises( p, elaborate( *p.ranking, p.sig ) ) )
    {
        const auto r = bounded_premise_check( ob, p.sig, { 3 } );
        found += r.violations;
        if ( r.violations > 0 )
        {
            EXPECT_TRUE( r.witness );
        }
    }
    EXPECT_GT( found, 0u );
}

TEST( oracle, report_line_is_json )
{
    const problem p = load_benchmark( "toy_stab" );
    const auto line = check_ranking_soundness( *p.ranking, p.sig, { 2 } ).json_line();
    EXPECT_EQ( line.front(), '{' );
    EXPECT_EQ( line.back(), '}' );
    EXPECT_NE( line.find( "\"violations\":0" ), std::string::npos ) << line;
}

TEST( oracle, uniform_sizes_respect_caps )
{
    const problem p = load_benchmark( "dijkstra_k_a" );
    const auto sizes = uniform_sizes( p.sig, 3, { { "value", 2 } } );
    ASSERT_EQ( sizes.size(), 2u );
    EXPECT_EQ( sizes[ p.sig.sort_index( "machine" ) ], 3 );
    EXPECT_EQ( sizes[ p.sig.sort_index( "value" ) ], 2 );
}
