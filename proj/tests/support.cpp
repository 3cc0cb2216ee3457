#include "support.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace livrank::testing
{

std::string benchmark_path( const std::string& name ) { return std::string{ LIVRANK_BENCHMARKS } + "/" + name + ".lrk"; }

problem load_benchmark( const std::string& name ) { return load_problem( benchmark_path( name ) ); }

bool solver_available()
{
    static const bool ok = !solver_identity( solver_config{} ).empty();
    return ok;
}

cli_result run_cli( const std::vector< std::string >& args )
{
    std::string cmd = "'" + std::string{ LIVRANK_CLI } + "'";
    for ( const auto& a : args )
        cmd += " '" + a + "'";
    cmd += " 2>/dev/null";
    cli_result r;
    FILE* pipe = popen( cmd.c_str(), "r" );
    if ( !pipe )
        return r;
    char buf[ 4096 ];
    std::size_t n;
    while ( ( n = fread( buf, 1, sizeof buf, pipe ) ) > 0 )
        r.out.append( buf, n );
    const int status = pclose( pipe );
    r.code = WIFEXITED( status ) ? WEXITSTATUS( status ) : -1;
    return r;
}

std::string read_text( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void randomize( finite_structure& s, const signature& sig, std::mt19937_64& rng, const std::vector< std::string >& symbols )
{
    for ( std::size_t i = 0; i < sig.symbols().size(); ++i )
    {
        const auto& d = sig.symbols()[ i ];
        if ( !symbols.empty() && std::find( symbols.begin(), symbols.end(), d.name ) == symbols.end() )
            continue;
        std::uniform_int_distribution< int > pick( 0, range_size( sig, d, s.sizes ) - 1 );
        s.tables[ i ].assign( table_size( sig, d, s.sizes ), 0 );
        for ( auto& x : s.tables[ i ] )
            x = pick( rng );
    }
}

const std::vector< std::string >& all_benchmarks()
{
    static const std::vector< std::string > names = {
        "toy_stab",     "binary_counter", "mutex_ring",   "leader_ring",     "broken_toy_stab",
        "dijkstra_k_a", "dijkstra_k_b",   "dijkstra_k_c", "dijkstra_k_fair",
    };
    return names;
}

verdict_kind prove_over_copies( const expr& body, const std::vector< var >& params, const signature& sig )
{
    auto vs = low_copy( params );
    const auto hs = high_copy( params );
    vs.insert( vs.end(), hs.begin(), hs.end() );
    verdict_kind last = verdict_kind::unknown;
    for ( const char* option :
          { "", ":smt.random_seed 3", ":smt.relevancy 0", ":smt.pull_nested_quantifiers true" } )
    {
        solver_config cfg;
        cfg.timeout = 20;
        if ( *option )
            cfg.options.push_back( option );
        last = check( { "ranking-check", 0, mk_forall( vs, body ) }, sig, cfg ).kind;
        if ( last != verdict_kind::unknown )
            return last;
    }
    return last;
}

std::vector< named_ranking > invariant_rankings()
{
    std::vector< named_ranking > out;
    for ( const auto& name : all_benchmarks() )
    {
        problem p = load_benchmark( name );
        ranking_node root = *p.ranking;
        out.push_back( { name, std::move( p ), std::move( root ) } );
    }

    const problem toy = load_benchmark( "toy_stab" );
    const std::string extra = R"(
(pw (bin (priv i) ((i machine))) (bin (= skd i) ((i machine))))
(dom-pw ((i machine))
  (lin (branch (priv i) (bin (= skd i) ((i machine)))) (branch (= skd i) (bin (priv (next i)) ((i machine))))))
(dom-lin (order ((u machine)) ((v machine)) (lt u v)) (priv i) ((i machine))
  (lex (bin (priv i) ((i machine))) (bin (= skd i) ((i machine)))))
(dom-perm 2 ((i machine)) (dom-pw ((j machine)) (bin (and (priv i) (lt i j)) ((i machine) (j machine)))))
)";
    int k = 0;
    for ( const auto& e : read_sexprs( extra ) )
        out.push_back( { "synthetic " + std::to_string( k++ ), toy, parse_ranking( e, toy.sig ) } );
    return out;
}

std::vector< std::string > reduced_implies_conserved_failures( const named_ranking& r, std::set< ctor >& kinds )
{
    std::vector< std::string > failures;
    for ( bool hinted : { true, false } )
    {
        elaborate_options opts;
        opts.use_hints = hinted;
        opts.require_closed = false;
        elaborate( r.root, r.source.sig, opts, [ & ]( const std::vector< int >& path, const implicit_ranking& ir ) {
            kinds.insert( ir.node->kind );
            const auto v = prove_over_copies( mk_implies( ir.reduced, ir.conserved ), ir.params, r.source.sig );
            if ( v != verdict_kind::valid )
                failures.push_back( r.name + " at " + path_string( path ) + ( hinted ? " (hinted): " : ": " ) +
                                    std::string{ to_string( v ) } );
        } );
    }
    return failures;
}

namespace
{

void strip_hints( ranking_node& n )
{
    n.hints.clear();
    for ( auto& c : n.children )
        strip_hints( c );
}

const ranking_node& node_at( const ranking_node& root, const std::vector< int >& path )
{
    const ranking_node* n = &root;
    for ( int k : path )
        n = &n->children[ static_cast< std::size_t >( k ) ];
    return *n;
}

} // namespace

std::vector< std::string > hinted_implies_unhinted_failures( const problem& p, int& checked )
{
    std::vector< std::string > failures;
    ranking_node bare = *p.ranking;
    strip_hints( bare );
    for ( const auto& h : p.hints )
    {
        ranking_node one = bare;
        const std::string block = h.block.empty() ? hint_blocks( node_at( one, h.path ).kind ).front() : h.block;
        apply_hints( one, h.path, block, h.tuples );
        auto at_path = [ & ]( bool hinted ) {
            std::optional< implicit_ranking > found;
            elaborate_options opts;
            opts.use_hints = hinted;
            opts.require_closed = false;
            elaborate( one, p.sig, opts, [ & ]( const std::vector< int >& path, const implicit_ranking& r ) {
                if ( path == h.path )
                    found = r;
            } );
            return *found;
        };
        const auto with = at_path( true );
        const auto without = at_path( false );
        const std::string where = p.name + " " + path_string( h.path ) + " " + block;
        for ( bool reduced : { true, false } )
        {
            const expr body = reduced ? mk_implies( with.reduced, without.reduced )
                                      : mk_implies( with.conserved, without.conserved );
            const auto v = prove_over_copies( body, with.params, p.sig );
            if ( v != verdict_kind::valid )
                failures.push_back( where + ( reduced ? " reduced: " : " conserved: " ) + std::string{ to_string( v ) } );
        }
        ++checked;
    }
    return failures;
}

std::uint64_t dom_perm_zero_disagreements( std::uint64_t& cases )
{
    const problem toy = load_benchmark( "toy_stab" );
    const signature& sig = toy.sig;
    const var i{ "i", "machine" };
    const var j{ "j", "machine" };
    const auto inner = bin( parse_expr( "(and (priv i) (lt i j))", sig, { i, j } ), { i, j } );
    std::uint64_t bad = 0;
    for ( const auto& ys : std::vector< std::vector< var > >{ { j }, { i }, { i, j } } )
    {
        const auto a = dom_perm( inner, ys, 0 );
        const auto b = dom_pw( inner, ys );
        const std::size_t m = a.params.size();
        for ( int n = 1; n <= 2; ++n )
        {
            std::vector< std::size_t > all( sig.symbols().size() );
            std::iota( all.begin(), all.end(), 0 );
            const auto base = finite_structure::empty( sig, { n } );
            world_enumerator worlds( sig, { base, base }, { 0, -1, 0, 1 }, all, {} );
            enumeration_options opts;
            opts.require_exhaustive = true;
            worlds.run( opts, [ & ]( const std::vector< finite_structure >& w ) {
                const frames fr = worlds.frames_of( w );
                std::vector< int > xs( 2 * m, 0 );
                while ( true )
                {
                    assignment v;
                    for ( std::size_t k = 0; k < m; ++k )
                    {
                        v[ a.params[ k ].with_tag( tag::sub0 ) ] = xs[ k ];
                        v[ a.params[ k ].with_tag( tag::sub1 ) ] = xs[ m + k ];
                    }
                    ++cases;
                    if ( eval( a.conserved, sig, fr, v ) != eval( b.conserved, sig, fr, v ) ||
                         eval( a.reduced, sig, fr, v ) != eval( b.reduced, sig, fr, v ) )
                        ++bad;
                    std::size_t k = 0;
                    while ( k < xs.size() && ++xs[ k ] == n )
                        xs[ k++ ] = 0;
                    if ( k == xs.size() )
                        break;
                }
                return true;
            } );
        }
    }
    return bad;
}

} // namespace livrank::testing
