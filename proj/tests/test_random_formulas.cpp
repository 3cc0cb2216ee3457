#include "livrank/smt.hpp"
#include "livrank/structure.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace livrank;

namespace
{

signature small()
{
    signature sig;
    sig.add_sort( { "s", true } );
    for ( const char* c : { "a", "b", "c" } )
        sig.add_symbol( { c, symbol_kind::constant, {}, "s", false } );
    sig.add_symbol( { "r", symbol_kind::relation, { "s" }, "", false } );
    sig.add_symbol( { "e", symbol_kind::relation, { "s", "s" }, "", false } );
    return sig;
}

class generator
{
public:
    generator( const signature& sig, std::uint64_t seed, bool quantifiers )
            : _sig{ sig }, _rng{ seed }, _quantifiers{ quantifiers }
    {
    }

    expr formula( int depth )
    {
        if ( depth == 0 )
            return atom();
        switch ( pick( _quantifiers ? 8 : 6 ) )
        {
        case 0:
            return mk_not( formula( depth - 1 ) );
        case 1:
            return mk_and( formula( depth - 1 ), formula( depth - 1 ) );
        case 2:
            return mk_or( formula( depth - 1 ), formula( depth - 1 ) );
        case 3:
            return mk_implies( formula( depth - 1 ), formula( depth - 1 ) );
        case 4:
            return mk_iff( formula( depth - 1 ), formula( depth - 1 ) );
        case 5:
            return atom();
        default:
        {
            const var v{ "x" + std::to_string( _scope.size() ), "s" };
            _scope.push_back( v );
            expr body = formula( depth - 1 );
            _scope.pop_back();
            return pick( 2 ) ? mk_forall( { v }, body ) : mk_exists( { v }, body );
        }
        }
    }

private:
    const signature& _sig;
    std::mt19937_64 _rng;
    bool _quantifiers;
    std::vector< var > _scope;

    int pick( int n ) { return std::uniform_int_distribution< int >( 0, n - 1 )( _rng ); }

    expr term()
    {
        const int n = 3 + static_cast< int >( _scope.size() );
        const int k = pick( n );
        if ( k < 3 )
            return mk_app( *_sig.find_symbol( std::string( 1, static_cast< char >( 'a' + k ) ) ), tag::plain );
        return mk_var( _scope[ static_cast< std::size_t >( k - 3 ) ] );
    }

    expr atom()
    {
        switch ( pick( 3 ) )
        {
        case 0:
            return mk_app( *_sig.find_symbol( "r" ), tag::plain, { term() } );
        case 1:
            return mk_app( *_sig.find_symbol( "e" ), tag::plain, { term(), term() } );
        default:
            return mk_eq( term(), term() );
        }
    }
};

// A structure of size <= 3 falsifying f, found by enumeration with not f as
// a pruning constraint.
bool has_small_falsifier( const signature& sig, const expr& f )
{
    std::vector< std::size_t > all( sig.symbols().size() );
    for ( std::size_t k = 0; k < all.size(); ++k )
        all[ k ] = k;
    for ( int n = 1; n <= 3; ++n )
    {
        world_enumerator w( sig, { finite_structure::empty( sig, { n } ) }, { 0, -1, -1, -1 }, all, { mk_not( f ) } );
        enumeration_options opts;
        opts.require_exhaustive = true;
        bool found = false;
        w.run( opts, [ & ]( const std::vector< finite_structure >& ) {
            found = true;
            return false;
        } );
        if ( found )
            return true;
    }
    return false;
}

} // namespace

// Without quantifiers a formula over three constants has a counter-model iff
// it has one with at most three elements, so the two deciders must agree.
TEST( random_formulas, quantifier_free_solver_matches_evaluator )
{
    if ( !livrank::testing::solver_available() )
        GTEST_SKIP() << "no solver";
    const signature sig = small();
    int valid = 0;
    for ( std::uint64_t seed = 0; seed < 100; ++seed )
    {
        generator g( sig, seed, false );
        const expr f = g.formula( 1 + static_cast< int >( seed % 4 ) );
        const auto v = check( { "random", 0, f }, sig, solver_config{} );
        ASSERT_NE( v.kind, verdict_kind::unknown ) << to_string( f );
        const bool falsifiable = has_small_falsifier( sig, f );
        EXPECT_EQ( v.kind == verdict_kind::counter_model, falsifiable ) << to_string( f );
        valid += v.kind == verdict_kind::valid;
    }
    EXPECT_GT( valid, 0 );
}

// With quantifiers small structures only refute: a solver-valid formula must
// hold on every small structure.
TEST( random_formulas, quantified_valid_formulas_have_no_small_falsifier )
{
    if ( !livrank::testing::solver_available() )
        GTEST_SKIP() << "no solver";
    const signature sig = small();
    int decided = 0;
    for ( std::uint64_t seed = 100; seed < 200; ++seed )
    {
        generator g( sig, seed, true );
        const expr f = g.formula( 2 + static_cast< int >( seed % 3 ) );
        solver_config cfg;
        cfg.timeout = 10;
        const auto v = check( { "random", 0, f }, sig, cfg );
        const bool falsifiable = has_small_falsifier( sig, f );
        if ( v.kind == verdict_kind::valid )
        {
            EXPECT_FALSE( falsifiable ) << to_string( f );
        }
        if ( falsifiable )
        {
            EXPECT_NE( v.kind, verdict_kind::valid ) << to_string( f );
        }
        decided += v.kind != verdict_kind::unknown;
    }
    EXPECT_GT( decided, 90 );
}
