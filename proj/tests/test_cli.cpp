#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

using livrank::testing::benchmark_path;
using livrank::testing::read_text;
using livrank::testing::run_cli;
using livrank::testing::solver_available;

namespace fs = std::filesystem;

namespace
{

fs::path scratch( const std::string& name )
{
    const fs::path dir = fs::temp_directory_path() / ( "livrank_cli_" + std::to_string( ::getpid() ) );
    fs::create_directories( dir );
    return dir / name;
}

std::string write_file( const std::string& name, const std::string& text )
{
    const auto path = scratch( name );
    std::ofstream( path ) << text;
    return path.string();
}

const std::string stuttering = R"(
(sort machine :finite)
(constant bot machine :immutable)
(constant skd machine :mutable)
(init (not (= skd bot)))
(transition (= skd' skd))
(property :q (= skd bot))
(ranking (bin true ()))
)";

} // namespace

TEST( cli, verify_toy_succeeds )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto r = run_cli( { "verify", benchmark_path( "toy_stab" ) } );
    EXPECT_EQ( r.code, 0 );
    EXPECT_NE( r.out.find( "Verified" ), std::string::npos ) << r.out;
}

TEST( cli, verify_mutated_ranking_is_refuted )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto r = run_cli( { "verify", benchmark_path( "broken_toy_stab" ) } );
    EXPECT_EQ( r.code, 1 );
    EXPECT_NE( r.out.find( "CounterModel" ), std::string::npos ) << r.out;
}

TEST( cli, verify_timeout_is_unknown )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto r = run_cli( { "verify", benchmark_path( "dijkstra_k_c" ), "--premise", "stability", "--timeout", "0.001" } );
    EXPECT_EQ( r.code, 2 );
    EXPECT_NE( r.out.find( "Unknown" ), std::string::npos ) << r.out;
}

TEST( cli, missing_file_is_an_input_error )
{
    EXPECT_EQ( run_cli( { "verify", "/nonexistent/problem.lrk" } ).code, 3 );
}

TEST( cli, malformed_problem_is_an_input_error )
{
    const auto path = write_file( "bad.lrk", "(sort machine :finite)\n(relation r (thing))\n" );
    EXPECT_EQ( run_cli( { "emit", path } ).code, 3 );
}

TEST( cli, unknown_premise_name_is_an_input_error )
{
    EXPECT_EQ( run_cli( { "emit", benchmark_path( "toy_stab" ), "--premise", "nothing" } ).code, 3 );
}

TEST( cli, missing_solver_is_an_input_error )
{
    EXPECT_EQ( run_cli( { "verify", benchmark_path( "toy_stab" ), "--solver", "/nonexistent/solver" } ).code, 3 );
}

TEST( cli, emit_is_deterministic )
{
    const auto a = run_cli( { "emit", benchmark_path( "mutex_ring" ) } );
    const auto b = run_cli( { "emit", benchmark_path( "mutex_ring" ) } );
    EXPECT_EQ( a.code, 0 );
    EXPECT_EQ( a.out, b.out );
    EXPECT_NE( a.out.find( "(check-sat)" ), std::string::npos );
}

TEST( cli, emitted_files_are_numbered_by_obligation )
{
    const auto dir = scratch( "emit" );
    const auto r = run_cli( { "emit", benchmark_path( "toy_stab" ), "--emit-smt", dir.string() } );
    ASSERT_EQ( r.code, 0 );
    EXPECT_TRUE( fs::exists( dir / "01-init.smt2" ) );
    EXPECT_TRUE( fs::exists( dir / "08-reduced@fair.smt2" ) );
    EXPECT_EQ( read_text( ( dir / "05-conserved.smt2" ).string() ),
               read_text( std::string{ LIVRANK_GOLDEN } + "/toy_stab_conserved.smt2" ) );
}

TEST( cli, reports_are_byte_identical )
{
    if ( !solver_available() )
        GTEST_SKIP() << "no solver";
    const auto a = scratch( "a.json" ).string();
    const auto b = scratch( "b.json" ).string();
    run_cli( { "verify", benchmark_path( "binary_counter" ), "--report", a, "--jobs", "4" } );
    run_cli( { "verify", benchmark_path( "binary_counter" ), "--report", b, "--jobs", "1" } );
    EXPECT_FALSE( read_text( a ).empty() );
    EXPECT_EQ( read_text( a ), read_text( b ) );
}

TEST( cli, oracle_modes )
{
    EXPECT_EQ( run_cli( { "oracle", benchmark_path( "toy_stab" ), "--max-size", "2" } ).code, 0 );
    const auto broken = run_cli( { "oracle", benchmark_path( "broken_toy_stab" ), "--max-size", "3" } );
    EXPECT_EQ( broken.code, 1 );
    EXPECT_NE( broken.out.find( "Violated" ), std::string::npos );
    const auto leader = run_cli( { "oracle", benchmark_path( "leader_ring" ), "--max-size", "1" } );
    EXPECT_EQ( leader.code, 2 );
    EXPECT_NE( leader.out.find( "Unsupported" ), std::string::npos );
}

TEST( cli, oracle_report_is_reproducible )
{
    const auto a = scratch( "oa.json" ).string();
    const auto b = scratch( "ob.json" ).string();
    run_cli( { "oracle", benchmark_path( "binary_counter" ), "--max-size", "2", "--seed", "9", "--report", a } );
    run_cli( { "oracle", benchmark_path( "binary_counter" ), "--max-size", "2", "--seed", "9", "--report", b } );
    EXPECT_FALSE( read_text( a ).empty() );
    EXPECT_EQ( read_text( a ), read_text( b ) );
}

TEST( cli, model_check_modes )
{
    const auto toy = run_cli( { "mc", benchmark_path( "toy_stab" ), "--size", "machine=3" } );
    EXPECT_EQ( toy.code, 0 );
    EXPECT_NE( toy.out.find( "max steps to q 3" ), std::string::npos ) << toy.out;
    const auto stuck = run_cli( { "mc", write_file( "stutter.lrk", stuttering ) } );
    EXPECT_EQ( stuck.code, 1 );
    EXPECT_NE( stuck.out.find( "cycle" ), std::string::npos ) << stuck.out;
    EXPECT_EQ( run_cli( { "mc", benchmark_path( "toy_stab" ), "--size", "nosuchsort=2" } ).code, 3 );
}
