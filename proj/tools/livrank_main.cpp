#include "livrank/error.hpp"
#include "livrank/model_check.hpp"
#include "livrank/oracle.hpp"
#include "livrank/problem.hpp"
#include "livrank/report.hpp"
#include "livrank/smt.hpp"
#include "livrank/vcgen.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace
{

using namespace livrank;

enum exit_code
{
    exit_ok = 0,
    exit_refuted = 1,
    exit_unknown = 2,
    exit_input = 3,
};

struct options
{
    std::string mode;
    std::string file;
    std::string solver = solver_config::default_solver_path();
    double timeout = 60.0;
    unsigned jobs = std::max( 1u, std::thread::hardware_concurrency() );
    std::vector< std::string > premises;
    std::string emit_dir;
    std::vector< std::string > sizes;
    std::uint64_t samples = 10'000;
    std::uint64_t seed = 0;
    bool strict_finite = false;
    std::string report;
    std::string logic = "UF";
    std::vector< std::string > solver_options;
    int max_size = 3;
};

struct input_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::map< std::string, int > parse_sizes( const std::vector< std::string >& items, const signature& sig )
{
    std::map< std::string, int > out;
    for ( const auto& item : items )
    {
        const auto eq = item.find( '=' );
        if ( eq == std::string::npos )
            throw input_error( "--size expects sort=N, got '" + item + "'" );
        const auto sort = item.substr( 0, eq );
        if ( !sig.find_sort( sort ) )
            throw input_error( "--size names unknown sort '" + sort + "'" );
        int n = 0;
        try
        {
            n = std::stoi( item.substr( eq + 1 ) );
        }
        catch ( const std::exception& )
        {
            throw input_error( "--size expects a number in '" + item + "'" );
        }
        if ( n < 1 )
            throw input_error( "--size must be positive in '" + item + "'" );
        out[ sort ] = n;
    }
    return out;
}

std::string read_file( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw input_error( "cannot read " + path );
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string script_name( const proof_obligation& ob, std::size_t index )
{
    std::ostringstream out;
    out << std::setw( 2 ) << std::setfill( '0' ) << index + 1 << "-" << ob.name << ".smt2";
    return out.str();
}

void write_scripts( const std::vector< proof_obligation >& obs, const signature& sig, const solver_config& cfg,
                    const std::string& dir )
{
    std::filesystem::create_directories( dir );
    for ( std::size_t i = 0; i < obs.size(); ++i )
    {
        std::ofstream out( std::filesystem::path( dir ) / script_name( obs[ i ], i ), std::ios::binary );
        out << emit_query( obs[ i ], sig, cfg );
    }
}

std::vector< proof_obligation > selected( std::vector< proof_obligation > obs, const std::vector< std::string >& names )
{
    if ( names.empty() )
        return obs;
    std::vector< proof_obligation > out;
    std::set< std::string > wanted( names.begin(), names.end() );
    for ( auto& ob : obs )
        if ( wanted.erase( ob.name ) )
            out.push_back( std::move( ob ) );
    if ( !wanted.empty() )
        throw input_error( "no premise named '" + *wanted.begin() + "'" );
    return out;
}

int run_verify( const options& opt, const problem& p, const solver_config& cfg, run_report& rep, bool emit_only )
{
    if ( !p.ranking )
        throw input_error( "the problem declares no ranking" );
    const auto r = elaborate( *p.ranking, p.sig );
    const auto obs = selected( generate_premises( p, r ), opt.premises );

    if ( emit_only )
    {
        if ( opt.emit_dir.empty() )
            for ( const auto& ob : obs )
                std::cout << emit_query( ob, p.sig, cfg ) << "\n";
        else
        {
            write_scripts( obs, p.sig, cfg, opt.emit_dir );
            std::cout << "wrote " << obs.size() << " scripts to " << opt.emit_dir << "\n";
        }
        rep.status = "Emitted";
        return exit_ok;
    }
    if ( !opt.emit_dir.empty() )
        write_scripts( obs, p.sig, cfg, opt.emit_dir );

    rep.solver = solver_identity( cfg );
    if ( rep.solver.empty() )
        throw input_error( "cannot run solver '" + cfg.solver_path + "'" );

    const auto result = discharge_all( obs, p.sig, cfg, opt.jobs );
    rep.obligations = result.entries;
    bool unknown = false;
    for ( const auto& e : result.entries )
    {
        std::cout << "  [" << e.obligation.premise << "] " << std::left << std::setw( 28 ) << e.obligation.name;
        if ( !e.error.empty() )
        {
            unknown = true;
            std::cout << "Error " << e.error << "\n";
            continue;
        }
        std::cout << std::setw( 13 ) << to_string( e.verdict.kind ) << std::right << std::fixed
                  << std::setprecision( 2 ) << e.verdict.wall_time << "s";
        if ( e.verdict.kind == verdict_kind::unknown )
        {
            unknown = true;
            std::cout << " (" << e.verdict.reason << ")";
        }
        std::cout << "\n";
        if ( e.verdict.kind == verdict_kind::counter_model )
            std::cout << e.verdict.model << "\n";
    }
    if ( result.verified() )
    {
        rep.status = "Verified";
        return exit_ok;
    }
    if ( result.refuted() )
    {
        rep.status = "Failed";
        return exit_refuted;
    }
    rep.status = unknown ? "Unknown" : "Failed";
    return exit_unknown;
}

int run_oracle( const options& opt, const problem& p, run_report& rep )
{
    if ( !p.ranking )
        throw input_error( "the problem declares no ranking" );
    const auto caps = parse_sizes( opt.sizes, p.sig );
    oracle_options oo;
    oo.enumeration.samples = opt.samples;
    oo.enumeration.seed = opt.seed;

    std::uint64_t violations = 0;
    bool unsupported = false;
    try
    {
        for ( int n = 1; n <= opt.max_size; ++n )
        {
            auto r = check_ranking_soundness( *p.ranking, p.sig, uniform_sizes( p.sig, n, caps ), oo );
            violations += r.violations;
            std::cout << r.json_line() << "\n";
            rep.oracle.push_back( std::move( r ) );
        }
    }
    catch ( const error& e )
    {
        if ( e.code() != error_code::oracle_unsupported )
            throw;
        unsupported = true;
        rep.diagnostics.push_back( e.what() );
        std::cout << "ranking outside oracle support: " << e.detail() << "\n";
    }

    const auto r = elaborate( *p.ranking, p.sig );
    const auto obs = selected( generate_premises( p, r ), opt.premises );
    for ( int n = 1; n <= opt.max_size; ++n )
        for ( const auto& ob : obs )
        {
            auto b = bounded_premise_check( ob, p.sig, uniform_sizes( p.sig, n, caps ), oo );
            violations += b.violations;
            std::cout << b.json_line() << "\n";
            rep.oracle.push_back( std::move( b ) );
        }

    if ( violations > 0 )
    {
        rep.status = "Violated";
        return exit_refuted;
    }
    rep.status = unsupported ? "Unsupported" : "Clean";
    return unsupported ? exit_unknown : exit_ok;
}

int run_mc( const options& opt, const problem& p, run_report& rep )
{
    const auto caps = parse_sizes( opt.sizes, p.sig );
    std::vector< int > sizes;
    for ( const auto& s : p.sig.sorts() )
        sizes.push_back( caps.count( s.name ) ? caps.at( s.name ) : 2 );
    rep.sizes = sizes;
    enumeration_options eo;
    eo.seed = opt.seed;
    try
    {
        const auto result = model_check_liveness( p, sizes, eo );
        rep.liveness = result;
        std::cout << ( result.holds ? "Holds" : "Violated" ) << ": " << result.scaffolds << " scaffolds, "
                  << result.states << " reachable states, " << result.transitions << " transitions, max steps to q "
                  << ( result.max_steps < 0 ? std::string{ "unbounded" } : std::to_string( result.max_steps ) )
                  << "\n";
        if ( result.trace )
        {
            std::cout << "scaffold:\n" << result.trace->scaffold;
            for ( std::size_t i = 0; i < result.trace->stem.size(); ++i )
                std::cout << "stem " << i << ":\n" << result.trace->stem[ i ];
            for ( std::size_t i = 0; i < result.trace->cycle.size(); ++i )
                std::cout << "cycle " << i << ":\n" << result.trace->cycle[ i ];
        }
        rep.status = result.holds ? "Holds" : "Violated";
        return result.holds ? exit_ok : exit_refuted;
    }
    catch ( const error& e )
    {
        if ( e.code() != error_code::budget_exceeded )
            throw;
        rep.diagnostics.push_back( e.what() );
        rep.status = "BudgetExceeded";
        std::cout << e.what() << "\n";
        return exit_unknown;
    }
}

int run( const options& opt )
{
    run_report rep;
    rep.file = opt.file;
    rep.mode = opt.mode;
    int code = exit_input;
    try
    {
        const std::string text = read_file( opt.file );
        rep.content_hash = sha256_hex( text );
        const problem p = parse_problem( text );
        rep.problem_name = p.name;

        bool invalid = false;
        for ( const auto& d : validate_problem( p, opt.strict_finite ) )
        {
            std::cerr << ( d.is_error ? "error: " : "warning: " ) << d.message << "\n";
            rep.diagnostics.push_back( ( d.is_error ? "error: " : "warning: " ) + d.message );
            invalid = invalid || d.is_error;
        }
        if ( invalid )
            throw input_error( "invalid problem" );

        solver_config cfg;
        cfg.solver_path = opt.solver;
        cfg.timeout = opt.timeout;
        cfg.logic = opt.logic;
        cfg.options = opt.solver_options;

        if ( opt.mode == "verify" || opt.mode == "emit" )
            code = run_verify( opt, p, cfg, rep, opt.mode == "emit" );
        else if ( opt.mode == "oracle" )
            code = run_oracle( opt, p, rep );
        else
            code = run_mc( opt, p, rep );
    }
    catch ( const input_error& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        rep.status = "InputError";
        code = exit_input;
    }
    catch ( const error& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        rep.diagnostics.push_back( e.what() );
        rep.status = "InputError";
        code = exit_input;
    }
    if ( !rep.status.empty() )
        std::cout << rep.status << "\n";

    if ( !opt.report.empty() )
    {
        std::ofstream out( opt.report, std::ios::binary );
        out << rep.to_json();
    }
    return code;
}

} // namespace

int main( int argc, char** argv )
{
    options opt;
    CLI::App app{ "livrank: liveness verification with implicit rankings" };
    app.add_option( "mode", opt.mode, "verify | oracle | mc | emit" )
            ->required()
            ->check( CLI::IsMember( { "verify", "oracle", "mc", "emit" } ) );
    app.add_option( "file", opt.file, "problem file" )->required();
    app.add_option( "--solver", opt.solver, "solver executable (default $LIVRANK_SOLVER or z3)" );
    app.add_option( "--timeout", opt.timeout, "per-obligation timeout in seconds" )
            ->check( CLI::PositiveNumber );
    app.add_option( "--jobs", opt.jobs, "parallel solver processes" )->check( CLI::PositiveNumber );
    app.add_option( "--premise", opt.premises, "only this obligation (repeatable)" );
    app.add_option( "--emit-smt", opt.emit_dir, "write solver scripts to this directory" );
    app.add_option( "--size", opt.sizes, "domain size sort=N (repeatable)" );
    app.add_option( "--max-size", opt.max_size, "largest uniform domain size for the oracle" )
            ->check( CLI::Range( 1, 6 ) );
    app.add_option( "--samples", opt.samples, "samples when exhaustive enumeration is too large" );
    app.add_option( "--seed", opt.seed, "sampling seed" );
    app.add_flag( "--strict-finite", opt.strict_finite, "reject finite-domain constructors over sorts not marked :finite" );
    app.add_option( "--report", opt.report, "write a JSON report" );
    app.add_option( "--logic", opt.logic, "solver logic (default UF)" );
    app.add_option( "--solver-option", opt.solver_options, "extra (set-option ...) body, e.g. ':smt.mbqi true'" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        const int rc = app.exit( e );
        return rc == 0 ? 0 : exit_input;
    }
    return run( opt );
}
