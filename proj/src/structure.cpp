#include "livrank/structure.hpp"
#include "livrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace livrank
{

std::size_t table_size( const signature& sig, const symbol_decl& s, const std::vector< int >& sizes )
{
    std::size_t n = 1;
    for ( const auto& a : s.args )
        n *= static_cast< std::size_t >( sizes[ sig.sort_index( a ) ] );
    return n;
}

int range_size( const signature& sig, const symbol_decl& s, const std::vector< int >& sizes )
{
    return s.is_relation() ? 2 : sizes[ sig.sort_index( s.result ) ];
}

finite_structure finite_structure::empty( const signature& sig, std::vector< int > sizes )
{
    finite_structure s;
    s.sizes = std::move( sizes );
    s.tables.resize( sig.symbols().size() );
    return s;
}

frames frames::single( const finite_structure& s )
{
    frames f;
    f.at[ static_cast< int >( tag::plain ) ] = &s;
    return f;
}

frames frames::transition( const finite_structure& pre, const finite_structure& post )
{
    frames f;
    f.at[ static_cast< int >( tag::plain ) ] = &pre;
    f.at[ static_cast< int >( tag::primed ) ] = &post;
    return f;
}

frames frames::ranked( const finite_structure& low, const finite_structure& high )
{
    frames f;
    f.at[ static_cast< int >( tag::plain ) ] = &low;
    f.at[ static_cast< int >( tag::sub0 ) ] = &low;
    f.at[ static_cast< int >( tag::sub1 ) ] = &high;
    return f;
}

namespace
{

const std::vector< int >& sizes_of( const frames& fr )
{
    for ( const auto* s : fr.at )
        if ( s )
            return s->sizes;
    throw error( error_code::missing_assignment, "no structure to evaluate in" );
}

} // namespace

evaluator::evaluator( const signature& sig ) : _sig{ &sig } {}

int evaluator::slot( const var& v )
{
    auto [ it, fresh ] = _slots.emplace( v, static_cast< int >( _slots.size() ) );
    (void)fresh;
    return it->second;
}

int evaluator::find_slot( const var& v ) const
{
    const auto it = _slots.find( v );
    return it == _slots.end() ? -1 : it->second;
}

int evaluator::add( const expr& e ) { return compile( e ); }

int evaluator::compile( const expr& e )
{
    cnode c;
    c.kind = e.kind();
    switch ( e.kind() )
    {
    case op::variable: c.slot = slot( e.variable() ); break;
    case op::app:
    {
        c.symbol = static_cast< int >( _sig->symbol_index( e.name() ) );
        c.t = static_cast< int >( e.is_mutable() ? e.symbol_tag() : tag::plain );
        for ( const auto& a : _sig->symbols()[ static_cast< std::size_t >( c.symbol ) ].args )
            c.argsorts.push_back( static_cast< int >( _sig->sort_index( a ) ) );
        break;
    }
    case op::eq:
        if ( e.arg( 0 ).is_formula() )
            c.kind = op::iff;
        break;
    case op::forall:
    case op::exists:
        for ( const auto& b : e.bound() )
        {
            c.qslots.push_back( slot( b ) );
            c.qsorts.push_back( static_cast< int >( _sig->sort_index( b.sort ) ) );
        }
        break;
    default: break;
    }
    for ( const auto& a : e.args() )
        c.kids.push_back( compile( a ) );
    _nodes.push_back( std::move( c ) );
    return static_cast< int >( _nodes.size() - 1 );
}

bool evaluator::holds( int handle, const frames& fr, std::vector< int >& slots ) const
{
    if ( slots.size() < _slots.size() )
        slots.resize( _slots.size(), 0 );
    return run( handle, fr, sizes_of( fr ), slots ) != 0;
}

int evaluator::value( int handle, const frames& fr, std::vector< int >& slots ) const
{
    if ( slots.size() < _slots.size() )
        slots.resize( _slots.size(), 0 );
    return run( handle, fr, sizes_of( fr ), slots );
}

bool evaluator::quantify( const cnode& c, std::size_t i, bool want, const frames& fr, const std::vector< int >& sizes,
                          std::vector< int >& slots ) const
{
    // want = false for forall: stop at the first falsifying value.
    if ( i == c.qslots.size() )
        return ( run( c.kids[ 0 ], fr, sizes, slots ) != 0 ) == want;
    const int s = c.qslots[ i ];
    const int saved = slots[ static_cast< std::size_t >( s ) ];
    const int n = sizes[ static_cast< std::size_t >( c.qsorts[ i ] ) ];
    bool found = false;
    for ( int d = 0; d < n && !found; ++d )
    {
        slots[ static_cast< std::size_t >( s ) ] = d;
        found = quantify( c, i + 1, want, fr, sizes, slots );
    }
    slots[ static_cast< std::size_t >( s ) ] = saved;
    return found;
}

int evaluator::run( int n, const frames& fr, const std::vector< int >& sizes, std::vector< int >& slots ) const
{
    const cnode& c = _nodes[ static_cast< std::size_t >( n ) ];
    switch ( c.kind )
    {
    case op::variable: return slots[ static_cast< std::size_t >( c.slot ) ];
    case op::app:
    {
        const finite_structure* s = fr.at[ static_cast< std::size_t >( c.t ) ];
        const auto& sym = _sig->symbols()[ static_cast< std::size_t >( c.symbol ) ];
        if ( !s || s->tables[ static_cast< std::size_t >( c.symbol ) ].empty() )
            throw error( error_code::missing_assignment,
                         "no interpretation for " + tagged_name( sym.name, static_cast< tag >( c.t ) ) );
        std::size_t idx = 0;
        for ( std::size_t i = 0; i < c.kids.size(); ++i )
            idx = idx * static_cast< std::size_t >( sizes[ static_cast< std::size_t >( c.argsorts[ i ] ) ] )
                  + static_cast< std::size_t >( run( c.kids[ i ], fr, sizes, slots ) );
        return s->tables[ static_cast< std::size_t >( c.symbol ) ][ idx ];
    }
    case op::ite:
        return run( c.kids[ 0 ], fr, sizes, slots ) ? run( c.kids[ 1 ], fr, sizes, slots )
                                                    : run( c.kids[ 2 ], fr, sizes, slots );
    case op::true_: return 1;
    case op::false_: return 0;
    case op::eq: return run( c.kids[ 0 ], fr, sizes, slots ) == run( c.kids[ 1 ], fr, sizes, slots );
    case op::iff:
        return ( run( c.kids[ 0 ], fr, sizes, slots ) != 0 ) == ( run( c.kids[ 1 ], fr, sizes, slots ) != 0 );
    case op::not_: return !run( c.kids[ 0 ], fr, sizes, slots );
    case op::and_:
        for ( int k : c.kids )
            if ( !run( k, fr, sizes, slots ) )
                return 0;
        return 1;
    case op::or_:
        for ( int k : c.kids )
            if ( run( k, fr, sizes, slots ) )
                return 1;
        return 0;
    case op::implies: return !run( c.kids[ 0 ], fr, sizes, slots ) || run( c.kids[ 1 ], fr, sizes, slots );
    case op::forall: return !quantify( c, 0, false, fr, sizes, slots );
    case op::exists: return quantify( c, 0, true, fr, sizes, slots );
    }
    return 0;
}

namespace
{

template < typename F >
auto evaluate_with( const expr& f, const signature& sig, const assignment& v, F&& go )
{
    for ( const auto& x : f.free() )
        if ( !v.count( x ) )
            throw error( error_code::missing_assignment, "no value for variable " + tagged_name( x.name, x.t ) );
    evaluator ev( sig );
    for ( const auto& [ x, d ] : v )
        ev.slot( x );
    const int h = ev.add( f );
    std::vector< int > slots( ev.slot_count(), 0 );
    for ( const auto& [ x, d ] : v )
        slots[ static_cast< std::size_t >( ev.find_slot( x ) ) ] = d;
    return go( ev, h, slots );
}

} // namespace

bool eval( const expr& f, const signature& sig, const frames& fr, const assignment& v )
{
    return evaluate_with( f, sig, v,
                          [ & ]( evaluator& ev, int h, std::vector< int >& slots ) { return ev.holds( h, fr, slots ); } );
}

int eval_term( const expr& t, const signature& sig, const frames& fr, const assignment& v )
{
    return evaluate_with( t, sig, v,
                          [ & ]( evaluator& ev, int h, std::vector< int >& slots ) { return ev.value( h, fr, slots ); } );
}

world_enumerator::world_enumerator( const signature& sig, std::vector< finite_structure > base,
                                    std::array< int, 4 > tag_state, const std::vector< std::size_t >& symbols,
                                    const std::vector< expr >& constraints )
        : _sig{ &sig }, _world{ std::move( base ) }, _tag_state{ tag_state }, _eval{ sig }
{
    if ( _tag_state[ 0 ] < 0 )
        _tag_state[ 0 ] = 0;
    const auto& sizes = _world.front().sizes;
    auto add_cell = [ & ]( std::size_t sym, int state ) {
        const auto& d = sig.symbols()[ sym ];
        _cells.push_back( { sym, state, table_size( sig, d, sizes ), range_size( sig, d, sizes ) } );
    };
    for ( auto sym : symbols )
        if ( !sig.symbols()[ sym ].is_mutable )
            add_cell( sym, -1 );
    for ( int m = 0; m < static_cast< int >( _world.size() ); ++m )
        for ( auto sym : symbols )
            if ( sig.symbols()[ sym ].is_mutable )
                add_cell( sym, m );

    _checks.resize( _cells.size() + 1 );
    for ( const auto& c : constraints )
    {
        std::size_t stage = 0;
        for ( const auto& [ name, t ] : symbols_of( c ) )
        {
            const auto sym = sig.symbol_index( name );
            const int state = sig.symbols()[ sym ].is_mutable ? _tag_state[ static_cast< std::size_t >( t ) ] : -1;
            for ( std::size_t i = 0; i < _cells.size(); ++i )
                if ( _cells[ i ].symbol == sym && _cells[ i ].state == state )
                    stage = std::max( stage, i + 1 );
        }
        _checks[ stage ].push_back( _eval.add( c ) );
    }
}

frames world_enumerator::frames_of( const std::vector< finite_structure >& w ) const
{
    frames f;
    for ( std::size_t t = 0; t < 4; ++t )
        if ( _tag_state[ t ] >= 0 && static_cast< std::size_t >( _tag_state[ t ] ) < w.size() )
            f.at[ t ] = &w[ static_cast< std::size_t >( _tag_state[ t ] ) ];
    return f;
}

bool world_enumerator::stage_ok( std::size_t stage )
{
    if ( _checks[ stage ].empty() )
        return true;
    const frames fr = frames_of( _world );
    for ( int h : _checks[ stage ] )
        if ( !_eval.holds( h, fr, _slots ) )
            return false;
    return true;
}

void world_enumerator::write( const cell& c, const std::vector< int >& table )
{
    if ( c.state >= 0 )
        _world[ static_cast< std::size_t >( c.state ) ].tables[ c.symbol ] = table;
    else
        for ( auto& s : _world )
            s.tables[ c.symbol ] = table;
}

bool world_enumerator::exhaustive( std::size_t k, const visitor& visit, std::uint64_t& visited, std::uint64_t limit )
{
    if ( k == limit )
    {
        ++visited;
        return visit( _world );
    }
    const cell& c = _cells[ k ];
    std::vector< int > table( c.grid, 0 );
    for ( ;; )
    {
        write( c, table );
        if ( stage_ok( k + 1 ) && !exhaustive( k + 1, visit, visited, limit ) )
            return false;
        std::size_t i = 0;
        while ( i < table.size() && ++table[ i ] == c.range )
            table[ i++ ] = 0;
        if ( i == table.size() )
            return true;
    }
}

double world_enumerator::space()
{
    if ( _space >= 0 )
        return _space;
    std::size_t immutable = 0;
    double raw_scaffold = 1;
    double mutable_part = 1;
    for ( const auto& c : _cells )
    {
        const double n = std::pow( static_cast< double >( c.range ), static_cast< double >( c.grid ) );
        if ( c.state < 0 )
        {
            ++immutable;
            raw_scaffold *= n;
        }
        else
            mutable_part *= n;
    }
    double scaffolds = raw_scaffold;
    if ( immutable > 0 && raw_scaffold <= 1e7 && stage_ok( 0 ) )
    {
        std::uint64_t count = 0;
        exhaustive( 0, []( const auto& ) { return true; }, count, immutable );
        scaffolds = static_cast< double >( count );
    }
    _space = scaffolds * mutable_part;
    return _space;
}

enumeration_stats world_enumerator::run( const enumeration_options& opts, const visitor& visit )
{
    enumeration_stats stats;
    stats.space = space();
    if ( stats.space <= static_cast< double >( opts.budget ) )
    {
        if ( stage_ok( 0 ) )
            exhaustive( 0, visit, stats.visited, _cells.size() );
        return stats;
    }
    if ( opts.require_exhaustive )
        throw error( error_code::budget_exceeded, "exhaustive enumeration of " + std::to_string( stats.space )
                                                          + " cases exceeds the budget of "
                                                          + std::to_string( opts.budget ) );
    stats.exhaustive = false;
    if ( !stage_ok( 0 ) )
        return stats;

    // Cells are drawn at random up to a trailing block small enough to be
    // enumerated in full; every completion of a drawn prefix counts as a
    // sample. This keeps rejection rates low when the last constraint (say
    // a transition relation) is only satisfiable by few tables.
    constexpr double suffix_limit = 1 << 16;
    std::size_t suffix = _cells.size();
    double tail = 1;
    while ( suffix > 0 )
    {
        const auto& c = _cells[ suffix - 1 ];
        tail *= std::pow( static_cast< double >( c.range ), static_cast< double >( c.grid ) );
        if ( tail > suffix_limit )
            break;
        --suffix;
    }

    const visitor bounded = [ & ]( const std::vector< finite_structure >& w ) {
        return visit( w ) && stats.visited < opts.samples;
    };
    std::mt19937_64 rng( opts.seed );
    constexpr int tries_per_cell = 1000;
    const std::uint64_t max_restarts = opts.samples * 10;
    std::uint64_t restarts = 0;
    while ( stats.visited < opts.samples && restarts < max_restarts )
    {
        bool ok = true;
        for ( std::size_t k = 0; k < suffix && ok; ++k )
        {
            const cell& c = _cells[ k ];
            std::uniform_int_distribution< int > pick( 0, c.range - 1 );
            std::vector< int > table( c.grid );
            ok = false;
            for ( int t = 0; t < tries_per_cell && !ok; ++t )
            {
                for ( auto& x : table )
                    x = pick( rng );
                write( c, table );
                ok = stage_ok( k + 1 );
            }
        }
        const auto before = stats.visited;
        if ( ok && !exhaustive( suffix, bounded, stats.visited, _cells.size() ) )
            break;
        if ( stats.visited == before )
            ++restarts;
    }
    return stats;
}

expr strict_total_order( const std::vector< var >& low, const std::vector< var >& high, const expr& body )
{
    auto fresh = [ & ]( const char* suffix ) {
        std::vector< var > out;
        for ( const auto& v : low )
            out.push_back( var{ v.name + "." + suffix, v.sort, tag::plain } );
        return out;
    };
    const auto a = fresh( "ta" );
    const auto b = fresh( "tb" );
    const auto c = fresh( "tc" );
    auto l = [ & ]( const std::vector< var >& x, const std::vector< var >& y ) {
        std::map< var, expr > m;
        for ( std::size_t i = 0; i < low.size(); ++i )
        {
            m[ low[ i ] ] = mk_var( x[ i ] );
            m[ high[ i ] ] = mk_var( y[ i ] );
        }
        return substitute( body, m );
    };
    auto both = a;
    both.insert( both.end(), b.begin(), b.end() );
    auto all3 = both;
    all3.insert( all3.end(), c.begin(), c.end() );
    return mk_and( { mk_forall( a, mk_not( l( a, a ) ) ),
                     mk_forall( all3, mk_implies( mk_and( l( a, b ), l( b, c ) ), l( a, c ) ) ),
                     mk_forall( both, mk_or( { mk_tuple_eq( mk_vars( a ), mk_vars( b ) ), l( a, b ), l( b, a ) } ) ) } );
}

std::string describe( const finite_structure& s, const signature& sig, const std::string& indent )
{
    std::ostringstream out;
    for ( std::size_t i = 0; i < sig.sorts().size(); ++i )
        out << indent << "sort " << sig.sorts()[ i ].name << " = {0.." << s.sizes[ i ] - 1 << "}\n";
    for ( std::size_t i = 0; i < sig.symbols().size(); ++i )
    {
        const auto& d = sig.symbols()[ i ];
        const auto& t = s.tables[ i ];
        if ( t.empty() )
            continue;
        out << indent << d.name << " = ";
        if ( d.args.empty() )
        {
            out << ( d.is_relation() ? ( t[ 0 ] ? "true" : "false" ) : std::to_string( t[ 0 ] ) ) << "\n";
            continue;
        }
        out << "{";
        bool first = true;
        std::vector< int > args( d.args.size(), 0 );
        for ( std::size_t idx = 0; idx < t.size(); ++idx )
        {
            // Decode the row-major index back into argument values.
            std::size_t rest = idx;
            for ( std::size_t a = d.args.size(); a-- > 0; )
            {
                const auto n = static_cast< std::size_t >( s.sizes[ sig.sort_index( d.args[ a ] ) ] );
                args[ a ] = static_cast< int >( rest % n );
                rest /= n;
            }
            if ( d.is_relation() && !t[ idx ] )
                continue;
            out << ( first ? "" : ", " );
            first = false;
            if ( args.size() > 1 )
                out << "(";
            for ( std::size_t a = 0; a < args.size(); ++a )
                out << ( a ? "," : "" ) << args[ a ];
            if ( args.size() > 1 )
                out << ")";
            if ( !d.is_relation() )
                out << "->" << t[ idx ];
        }
        out << "}\n";
    }
    return out.str();
}

} // namespace livrank
