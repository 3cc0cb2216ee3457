#include "livrank/error.hpp"
#include "livrank/problem.hpp"
#include "livrank/vcgen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace livrank;
using livrank::testing::load_benchmark;

namespace
{

std::vector< std::string > names_of( const std::vector< proof_obligation >& obs )
{
    std::vector< std::string > out;
    for ( const auto& ob : obs )
        out.push_back( ob.name );
    return out;
}

const std::string two_schedulers = R"(
(sort machine :finite)
(constant bot machine :immutable)
(relation priv (machine) :mutable)
(constant skd machine :mutable)
(init (priv skd))
(transition (and (priv skd) (= skd' bot) (forall ((x machine)) (= (priv' x) (= x bot)))))
(property :q (= skd bot))
(fairness left () (priv bot))
(fairness right ((x machine)) (= skd x))
(helpful left () (not (priv bot)))
(helpful right ((x machine)) (priv x))
(ranking (dom-pw ((i machine)) (bin (priv i) ((i machine)))))
)";

} // namespace

TEST( vcgen, one_fairness_assumption_gives_eight_obligations )
{
    const problem p = load_benchmark( "toy_stab" );
    const auto obs = generate_premises( p, elaborate( *p.ranking, p.sig ) );
    EXPECT_EQ( names_of( obs ), ( std::vector< std::string >{ "init", "consec", "trigger", "stability", "conserved",
                                                              "helpful-exists", "psi-stability@fair",
                                                              "reduced@fair" } ) );
    for ( std::size_t k = 0; k < obs.size(); ++k )
        EXPECT_EQ( obs[ k ].premise, static_cast< int >( k ) + 1 );
}

TEST( vcgen, obligation_count_grows_with_fairness )
{
    const problem p = parse_problem( two_schedulers );
    const auto obs = generate_premises( p, elaborate( *p.ranking, p.sig ) );
    ASSERT_EQ( obs.size(), 6u + 2u * 2u );
    EXPECT_EQ( names_of( obs ),
               ( std::vector< std::string >{ "init", "consec", "trigger", "stability", "conserved", "helpful-exists",
                                             "psi-stability@left", "psi-stability@right", "reduced@left",
                                             "reduced@right" } ) );
}

TEST( vcgen, obligations_are_closed_two_state_formulas )
{
    for ( const char* name : { "toy_stab", "binary_counter", "mutex_ring", "leader_ring", "dijkstra_k_b" } )
    {
        const problem p = load_benchmark( name );
        for ( const auto& ob : generate_premises( p, elaborate( *p.ranking, p.sig ) ) )
        {
            EXPECT_TRUE( ob.formula.free().empty() ) << name << " " << ob.name;
            for ( tag t : symbol_tags( ob.formula ) )
                EXPECT_TRUE( t == tag::plain || t == tag::primed ) << name << " " << ob.name;
            EXPECT_EQ( well_sorted( ob.formula, p.sig ), "Bool" );
        }
    }
}

TEST( vcgen, single_state_premises_do_not_mention_post_state )
{
    const problem p = load_benchmark( "mutex_ring" );
    for ( const auto& ob : generate_premises( p, elaborate( *p.ranking, p.sig ) ) )
        if ( ob.premise == 1 || ob.premise == 3 || ob.premise == 6 )
            EXPECT_FALSE( symbol_tags( ob.formula ).count( tag::primed ) ) << ob.name;
        else
            EXPECT_TRUE( symbol_tags( ob.formula ).count( tag::primed ) ) << ob.name;
}

TEST( vcgen, parameterized_ranking_is_not_closed )
{
    const problem p = load_benchmark( "toy_stab" );
    const var i{ "i", "machine" };
    try
    {
        generate_premises( p, bin( parse_expr( "(priv i)", p.sig, { i } ), { i } ) );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::not_closed );
    }
}

TEST( vcgen, over_transition_reads_higher_copy_as_pre_state )
{
    const problem p = load_benchmark( "toy_stab" );
    const auto r = bin( parse_expr( "(priv skd)", p.sig ), {} );
    // conserved: priv@0 skd@0 -> priv@1 skd@1, i.e. post -> pre
    const expr f = over_transition( r.conserved );
    EXPECT_EQ( to_string( f ), "(=> (priv' skd') (priv skd))" );
    EXPECT_EQ( to_string( over_transition( r.reduced ) ), "(and (priv skd) (not (priv' skd')))" );
}

TEST( vcgen, negation_is_what_the_solver_refutes )
{
    const problem p = load_benchmark( "toy_stab" );
    for ( const auto& ob : generate_premises( p, elaborate( *p.ranking, p.sig ) ) )
        EXPECT_TRUE( structurally_equal( premise_negation( ob ), mk_not( ob.formula ) ) );
}

TEST( vcgen, conserved_premise_assumes_axioms_on_both_copies )
{
    const problem p = load_benchmark( "toy_stab" );
    const auto obs = generate_premises( p, elaborate( *p.ranking, p.sig ) );
    const auto& conserved = obs[ 4 ];
    ASSERT_EQ( conserved.name, "conserved" );
    ASSERT_EQ( conserved.formula.kind(), op::implies );
    const std::string text = to_string( conserved.formula.arg( 0 ) );
    const std::string axiom = to_string( p.axioms.front() );
    const auto first = text.find( axiom );
    ASSERT_NE( first, std::string::npos );
    EXPECT_NE( text.find( axiom, first + 1 ), std::string::npos );
}
