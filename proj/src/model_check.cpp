#include "livrank/model_check.hpp"
#include "livrank/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <map>

namespace livrank
{

namespace
{

constexpr std::size_t none = static_cast< std::size_t >( -1 );

// Shortest path from `from` to the first state satisfying `target`, moving
// only through `allowed` states. With `step` at least one edge is taken.
std::vector< std::size_t > bfs_path( const explicit_system& sys, std::size_t from,
                                     const std::function< bool( std::size_t ) >& target,
                                     const std::function< bool( std::size_t ) >& allowed, bool step )
{
    if ( !step && target( from ) )
        return { from };
    std::vector< std::size_t > parent( sys.succ.size(), none );
    std::deque< std::size_t > todo;
    std::vector< bool > seen( sys.succ.size(), false );
    todo.push_back( from );
    while ( !todo.empty() )
    {
        const auto s = todo.front();
        todo.pop_front();
        for ( auto t : sys.succ[ s ] )
        {
            if ( !allowed( t ) || seen[ t ] )
                continue;
            seen[ t ] = true;
            parent[ t ] = s;
            if ( target( t ) )
            {
                std::vector< std::size_t > path{ t };
                for ( auto x = s; x != from; x = parent[ x ] )
                    path.push_back( x );
                path.push_back( from );
                std::reverse( path.begin(), path.end() );
                return path;
            }
            todo.push_back( t );
        }
    }
    return {};
}

// Iterative Tarjan over the states with `inside` set. Components come out
// in reverse topological order (sinks first).
std::vector< std::vector< std::size_t > > components( const explicit_system& sys, const std::vector< bool >& inside )
{
    const std::size_t n = sys.succ.size();
    std::vector< std::size_t > index( n, none ), low( n, 0 );
    std::vector< bool > on_stack( n, false );
    std::vector< std::size_t > stack;
    std::vector< std::vector< std::size_t > > out;
    std::size_t counter = 0;

    for ( std::size_t root = 0; root < n; ++root )
    {
        if ( !inside[ root ] || index[ root ] != none )
            continue;
        std::vector< std::pair< std::size_t, std::size_t > > work{ { root, 0 } };
        index[ root ] = low[ root ] = counter++;
        stack.push_back( root );
        on_stack[ root ] = true;
        while ( !work.empty() )
        {
            auto& [ v, i ] = work.back();
            if ( i < sys.succ[ v ].size() )
            {
                const auto w = sys.succ[ v ][ i++ ];
                if ( !inside[ w ] )
                    continue;
                if ( index[ w ] == none )
                {
                    index[ w ] = low[ w ] = counter++;
                    stack.push_back( w );
                    on_stack[ w ] = true;
                    work.emplace_back( w, 0 );
                }
                else if ( on_stack[ w ] )
                    low[ v ] = std::min( low[ v ], index[ w ] );
                continue;
            }
            const auto done = v;
            work.pop_back();
            if ( !work.empty() )
                low[ work.back().first ] = std::min( low[ work.back().first ], low[ done ] );
            if ( low[ done ] == index[ done ] )
            {
                std::vector< std::size_t > comp;
                std::size_t x;
                do
                {
                    x = stack.back();
                    stack.pop_back();
                    on_stack[ x ] = false;
                    comp.push_back( x );
                } while ( x != done );
                out.push_back( std::move( comp ) );
            }
        }
    }
    return out;
}

bool has_cycle( const explicit_system& sys, const std::vector< std::size_t >& comp )
{
    if ( comp.size() > 1 )
        return true;
    const auto& s = sys.succ[ comp.front() ];
    return std::find( s.begin(), s.end(), comp.front() ) != s.end();
}

} // namespace

graph_verdict check_explicit( const explicit_system& sys )
{
    const std::size_t n = sys.succ.size();
    graph_verdict out;

    std::vector< bool > reach( n, false );
    std::vector< std::size_t > parent( n, none );
    std::deque< std::size_t > todo;
    for ( std::size_t s = 0; s < n; ++s )
        if ( sys.initial[ s ] )
        {
            reach[ s ] = true;
            todo.push_back( s );
        }
    while ( !todo.empty() )
    {
        const auto s = todo.front();
        todo.pop_front();
        for ( auto t : sys.succ[ s ] )
            if ( !reach[ t ] )
            {
                reach[ t ] = true;
                parent[ t ] = s;
                todo.push_back( t );
            }
    }

    std::vector< bool > open( n, false ); // reachable and q-free
    for ( std::size_t s = 0; s < n; ++s )
        open[ s ] = reach[ s ] && !sys.q[ s ];

    const auto comps = components( sys, open );
    std::vector< std::size_t > comp_of( n, none );
    std::vector< bool > fair_comp( comps.size(), false );
    for ( std::size_t c = 0; c < comps.size(); ++c )
    {
        for ( auto s : comps[ c ] )
            comp_of[ s ] = c;
        bool fair = has_cycle( sys, comps[ c ] );
        for ( const auto& f : sys.fairness )
            fair = fair && std::any_of( comps[ c ].begin(), comps[ c ].end(), [ & ]( auto s ) { return f[ s ]; } );
        fair_comp[ c ] = fair;
    }

    // Components are listed sinks first, so one pass propagates "can reach a
    // fair component" and the longest q-free run.
    std::vector< bool > doomed( comps.size(), false );
    std::vector< std::int64_t > steps( n, 0 );
    std::vector< bool > cyclic( comps.size(), false );
    for ( std::size_t c = 0; c < comps.size(); ++c )
    {
        doomed[ c ] = fair_comp[ c ];
        cyclic[ c ] = has_cycle( sys, comps[ c ] );
        for ( auto s : comps[ c ] )
            for ( auto t : sys.succ[ s ] )
                if ( open[ t ] && comp_of[ t ] != c )
                {
                    doomed[ c ] = doomed[ c ] || doomed[ comp_of[ t ] ];
                    cyclic[ c ] = cyclic[ c ] || cyclic[ comp_of[ t ] ];
                }
        if ( cyclic[ c ] )
            continue;
        const auto s = comps[ c ].front();
        for ( auto t : sys.succ[ s ] )
            steps[ s ] = std::max( steps[ s ], open[ t ] ? 1 + steps[ t ] : 1 );
    }

    std::size_t witness = none;
    for ( std::size_t s = 0; s < n; ++s )
    {
        if ( !open[ s ] || !sys.p[ s ] )
            continue;
        const auto c = comp_of[ s ];
        if ( doomed[ c ] && witness == none )
            witness = s;
        out.max_steps = ( cyclic[ c ] || out.max_steps < 0 ) ? -1 : std::max( out.max_steps, steps[ s ] );
    }
    if ( witness == none )
        return out;

    out.holds = false;
    lasso l;
    for ( auto x = witness; x != none; x = parent[ x ] )
        l.stem.push_back( x );
    std::reverse( l.stem.begin(), l.stem.end() );
    l.stem.pop_back();

    auto in_open = [ & ]( std::size_t s ) { return open[ s ]; };
    const auto to_fair = bfs_path( sys, witness, [ & ]( std::size_t s ) { return fair_comp[ comp_of[ s ] ]; },
                                   in_open, false );
    l.stem.insert( l.stem.end(), to_fair.begin(), to_fair.end() - 1 );

    const auto entry = to_fair.back();
    const auto c = comp_of[ entry ];
    auto in_comp = [ & ]( std::size_t s ) { return open[ s ] && comp_of[ s ] == c; };
    std::vector< std::size_t > cycle{ entry };
    for ( const auto& f : sys.fairness )
    {
        const auto leg = bfs_path( sys, cycle.back(), [ & ]( std::size_t s ) { return f[ s ]; }, in_comp, false );
        cycle.insert( cycle.end(), leg.begin() + 1, leg.end() );
    }
    const auto home = bfs_path( sys, cycle.back(), [ & ]( std::size_t s ) { return s == entry; }, in_comp, true );
    cycle.insert( cycle.end(), home.begin() + 1, home.end() - 1 );
    l.cycle = std::move( cycle );
    out.counterexample = std::move( l );
    return out;
}

namespace
{

std::vector< std::size_t > symbols_where( const signature& sig, bool is_mutable )
{
    std::vector< std::size_t > out;
    for ( std::size_t i = 0; i < sig.symbols().size(); ++i )
        if ( sig.symbols()[ i ].is_mutable == is_mutable )
            out.push_back( i );
    return out;
}

bool only_immutable( const expr& f, const signature& sig )
{
    for ( const auto& [ name, t ] : symbols_of( f ) )
        if ( sig.find_symbol( name )->is_mutable )
            return false;
    return true;
}

std::string describe_part( const finite_structure& s, const signature& sig, bool is_mutable )
{
    finite_structure part = s;
    for ( std::size_t i = 0; i < sig.symbols().size(); ++i )
        if ( sig.symbols()[ i ].is_mutable != is_mutable )
            part.tables[ i ].clear();
    std::string text = describe( part, sig );
    // Sort lines are shared by every state; keep them only in the scaffold.
    if ( is_mutable )
    {
        std::string kept;
        std::size_t start = 0;
        while ( start < text.size() )
        {
            const auto end = text.find( '\n', start );
            const auto line = text.substr( start, end - start + 1 );
            if ( line.rfind( "sort ", 0 ) != 0 )
                kept += line;
            start = end + 1;
        }
        text = kept;
    }
    return text;
}

} // namespace

liveness_result model_check_liveness( const problem& p, const std::vector< int >& sizes,
                                      const enumeration_options& opts )
{
    const auto& sig = p.sig;
    liveness_result result;

    std::vector< expr > scaffold_axioms;
    for ( const auto& a : p.axioms )
        if ( only_immutable( a, sig ) )
            scaffold_axioms.push_back( a );

    enumeration_options scaffold_opts;
    scaffold_opts.budget = std::numeric_limits< std::uint64_t >::max();
    world_enumerator scaffolds( sig, { finite_structure::empty( sig, sizes ) }, { 0, -1, -1, -1 },
                                symbols_where( sig, false ), scaffold_axioms );

    const auto mutables = symbols_where( sig, true );
    evaluator ev( sig );
    const int init = ev.add( p.init );
    const int trans = ev.add( p.trans );
    const int pre = ev.add( p.p );
    const int goal = ev.add( p.q );
    struct instance
    {
        int handle;
        std::vector< int > slots;
        std::vector< int > values;
    };
    std::vector< instance > fair;
    for ( const auto& f : p.fairness )
    {
        instance base{ ev.add( f.formula ), {}, {} };
        for ( const auto& x : f.params )
            base.slots.push_back( ev.slot( x ) );
        std::vector< int > t( f.params.size(), 0 );
        for ( ;; )
        {
            base.values = t;
            fair.push_back( base );
            std::size_t i = 0;
            while ( i < t.size() && ++t[ i ] == sizes[ sig.sort_index( f.params[ i ].sort ) ] )
                t[ i++ ] = 0;
            if ( i == t.size() )
                break;
        }
    }
    std::vector< int > slots( ev.slot_count(), 0 );

    enumeration_options state_opts = opts;
    state_opts.require_exhaustive = true;

    scaffolds.run( scaffold_opts, [ & ]( const std::vector< finite_structure >& scaffold ) {
        ++result.scaffolds;
        std::vector< finite_structure > states;
        world_enumerator valuations( sig, scaffold, { 0, -1, -1, -1 }, mutables, p.axioms );
        valuations.run( state_opts, [ & ]( const std::vector< finite_structure >& w ) {
            states.push_back( w[ 0 ] );
            return true;
        } );

        const std::size_t n = states.size();
        explicit_system sys;
        sys.succ.resize( n );
        sys.initial.resize( n );
        sys.p.resize( n );
        sys.q.resize( n );
        sys.fairness.assign( fair.size(), std::vector< bool >( n, false ) );
        for ( std::size_t s = 0; s < n; ++s )
        {
            const auto fr = frames::single( states[ s ] );
            sys.initial[ s ] = ev.holds( init, fr, slots );
            sys.p[ s ] = ev.holds( pre, fr, slots );
            sys.q[ s ] = ev.holds( goal, fr, slots );
            for ( std::size_t i = 0; i < fair.size(); ++i )
            {
                for ( std::size_t k = 0; k < fair[ i ].slots.size(); ++k )
                    slots[ static_cast< std::size_t >( fair[ i ].slots[ k ] ) ] = fair[ i ].values[ k ];
                sys.fairness[ i ][ s ] = ev.holds( fair[ i ].handle, fr, slots );
            }
        }

        // Successors are only computed for states reachable from an initial one.
        std::vector< bool > seen( n, false );
        std::deque< std::size_t > todo;
        for ( std::size_t s = 0; s < n; ++s )
            if ( sys.initial[ s ] )
            {
                seen[ s ] = true;
                todo.push_back( s );
            }
        std::uint64_t reached = 0;
        while ( !todo.empty() )
        {
            const auto s = todo.front();
            todo.pop_front();
            ++reached;
            for ( std::size_t t = 0; t < n; ++t )
            {
                if ( !ev.holds( trans, frames::transition( states[ s ], states[ t ] ), slots ) )
                    continue;
                sys.succ[ s ].push_back( t );
                ++result.transitions;
                if ( !seen[ t ] )
                {
                    seen[ t ] = true;
                    todo.push_back( t );
                }
            }
        }
        result.states += reached;

        const auto verdict = check_explicit( sys );
        result.max_steps = ( verdict.max_steps < 0 || result.max_steps < 0 )
                                   ? -1
                                   : std::max( result.max_steps, verdict.max_steps );
        if ( verdict.holds )
            return true;
        result.holds = false;
        lasso_trace trace;
        trace.scaffold = describe_part( scaffold[ 0 ], sig, false );
        for ( auto s : verdict.counterexample->stem )
            trace.stem.push_back( describe_part( states[ s ], sig, true ) );
        for ( auto s : verdict.counterexample->cycle )
            trace.cycle.push_back( describe_part( states[ s ], sig, true ) );
        result.trace = std::move( trace );
        return false;
    } );
    return result;
}

} // namespace livrank
