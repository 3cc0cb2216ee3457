#include "livrank/error.hpp"
#include "livrank/problem.hpp"
#include "livrank/smt.hpp"
#include "livrank/vcgen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace livrank;
using livrank::testing::load_benchmark;
using livrank::testing::read_text;
using livrank::testing::solver_available;

namespace
{

const problem& toy()
{
    static const problem p = load_benchmark( "toy_stab" );
    return p;
}

std::vector< proof_obligation > toy_obligations()
{
    return generate_premises( toy(), elaborate( *toy().ranking, toy().sig ) );
}

proof_obligation obligation( const std::string& text )
{
    return { "test", 0, parse_expr( text, toy().sig, {}, true ) };
}

// A valid obligation default solver settings cannot settle quickly: the
// mutated toy ranking without hints, reduced implies conserved.
proof_obligation hard_obligation()
{
    const problem p = load_benchmark( "broken_toy_stab" );
    elaborate_options opts;
    opts.use_hints = false;
    const auto r = elaborate( *p.ranking, p.sig, opts );
    return { "hard", 0, mk_implies( r.reduced, r.conserved ) };
}

} // namespace

TEST( smt, emitted_script_matches_golden_file )
{
    const auto obs = toy_obligations();
    ASSERT_EQ( obs[ 4 ].name, "conserved" );
    EXPECT_EQ( emit_query( obs[ 4 ], toy().sig, solver_config{} ),
               read_text( std::string{ LIVRANK_GOLDEN } + "/toy_stab_conserved.smt2" ) );
}

TEST( smt, emitted_script_is_deterministic )
{
    const auto a = toy_obligations();
    const auto b = toy_obligations();
    for ( std::size_t k = 0; k < a.size(); ++k )
        EXPECT_EQ( emit_query( a[ k ], toy().sig, solver_config{} ), emit_query( b[ k ], toy().sig, solver_config{} ) );
}

TEST( smt, script_declares_only_needed_copies )
{
    const std::string s = emit_query( obligation( "(priv skd)" ), toy().sig, solver_config{} );
    EXPECT_NE( s.find( "(declare-sort machine 0)" ), std::string::npos );
    EXPECT_NE( s.find( "(declare-fun |priv'| (machine) Bool)" ), std::string::npos );
    EXPECT_EQ( s.find( "priv@0" ), std::string::npos );
    EXPECT_NE( s.find( "(assert (not (priv skd)))" ), std::string::npos );
    EXPECT_NE( s.find( "(check-sat)" ), std::string::npos );
}

TEST( smt, extra_options_are_emitted_in_order )
{
    solver_config cfg;
    cfg.options = { ":smt.mbqi true", ":smt.random_seed 5" };
    const std::string s = emit_query( obligation( "true" ), toy().sig, cfg );
    const auto a = s.find( "(set-option :smt.mbqi true)" );
    const auto b = s.find( "(set-option :smt.random_seed 5)" );
    ASSERT_NE( a, std::string::npos );
    ASSERT_NE( b, std::string::npos );
    EXPECT_LT( a, b );
}

TEST( smt, symbols_with_markers_are_quoted )
{
    EXPECT_EQ( smt_symbol( "priv", tag::plain ), "priv" );
    EXPECT_EQ( smt_symbol( "priv", tag::primed ), "|priv'|" );
    EXPECT_EQ( smt_symbol( "priv", tag::sub0 ), "priv@0" );
}

TEST( smt, valid_obligation )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto v = check( obligation( "(=> (priv skd) (exists ((x machine)) (priv x)))" ), toy().sig, solver_config{} );
    EXPECT_EQ( v.kind, verdict_kind::valid );
    EXPECT_TRUE( v.model.empty() );
}

TEST( smt, falsifiable_obligation_yields_model )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto v = check( obligation( "(=> (priv skd) (priv' skd'))" ), toy().sig, solver_config{} );
    EXPECT_EQ( v.kind, verdict_kind::counter_model );
    EXPECT_NE( v.model.find( "skd" ), std::string::npos );
}

TEST( smt, tiny_timeout_gives_unknown )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    solver_config cfg;
    cfg.timeout = 0.001;
    const auto v = check( hard_obligation(), load_benchmark( "broken_toy_stab" ).sig, cfg );
    EXPECT_EQ( v.kind, verdict_kind::unknown );
    EXPECT_EQ( v.reason, "timeout" );
}

TEST( smt, non_positive_timeout_is_rejected )
{
    solver_config cfg;
    cfg.timeout = 0;
    try
    {
        check( obligation( "true" ), toy().sig, cfg );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::solver_launch_failure );
    }
}

TEST( smt, missing_solver_fails_to_launch )
{
    solver_config cfg;
    cfg.solver_path = "/nonexistent/solver";
    try
    {
        check( obligation( "true" ), toy().sig, cfg );
        FAIL();
    }
    catch ( const error& e )
    {
        EXPECT_EQ( e.code(), error_code::solver_launch_failure );
    }
    EXPECT_TRUE( solver_identity( cfg ).empty() );
}

TEST( smt, identity_names_the_solver )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const std::string id = solver_identity( solver_config{} );
    EXPECT_NE( id.find( "Z3" ), std::string::npos ) << id;
}

TEST( smt, toy_obligations_are_all_valid )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto report = discharge_all( toy_obligations(), toy().sig, solver_config{}, 2 );
    EXPECT_TRUE( report.verified() );
    EXPECT_FALSE( report.refuted() );
}

TEST( smt, parallel_discharge_keeps_order_and_verdicts )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto obs = toy_obligations();
    const auto one = discharge_all( obs, toy().sig, solver_config{}, 1 );
    const auto four = discharge_all( obs, toy().sig, solver_config{}, 4 );
    ASSERT_EQ( one.entries.size(), obs.size() );
    ASSERT_EQ( four.entries.size(), obs.size() );
    for ( std::size_t k = 0; k < obs.size(); ++k )
    {
        EXPECT_EQ( one.entries[ k ].obligation.name, obs[ k ].name );
        EXPECT_EQ( four.entries[ k ].obligation.name, obs[ k ].name );
        EXPECT_EQ( one.entries[ k ].verdict.kind, four.entries[ k ].verdict.kind ) << obs[ k ].name;
    }
}

TEST( smt, mutated_ranking_is_refuted )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const problem p = load_benchmark( "broken_toy_stab" );
    const auto report =
            discharge_all( generate_premises( p, elaborate( *p.ranking, p.sig ) ), p.sig, solver_config{}, 4 );
    EXPECT_TRUE( report.refuted() );
    EXPECT_FALSE( report.verified() );
}

TEST( smt, custom_script_runs )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto v = run_script( "(declare-const a Bool)\n(assert (and a (not a)))\n(check-sat)\n(get-model)\n",
                               solver_config{} );
    EXPECT_EQ( v.kind, verdict_kind::valid );
}
