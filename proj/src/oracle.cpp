#include "livrank/oracle.hpp"
#include "livrank/error.hpp"

#include <json.hpp>

#include <set>
#include <sstream>

namespace livrank
{

namespace
{

std::uint64_t checked_add( std::uint64_t a, std::uint64_t b )
{
    std::uint64_t r;
    if ( __builtin_add_overflow( a, b, &r ) )
        throw error( error_code::oracle_unsupported, "height exceeds 64 bits" );
    return r;
}

std::uint64_t checked_mul( std::uint64_t a, std::uint64_t b )
{
    std::uint64_t r;
    if ( __builtin_mul_overflow( a, b, &r ) )
        throw error( error_code::oracle_unsupported, "height exceeds 64 bits" );
    return r;
}

std::uint64_t checked_pow( std::uint64_t base, int e )
{
    std::uint64_t r = 1;
    for ( int i = 0; i < e; ++i )
        r = checked_mul( r, base );
    return r;
}

void collect_support( const ranking_node& n, const std::string& where )
{
    switch ( n.kind )
    {
    case ctor::pos:
        if ( n.terms.size() != 1 )
            throw error( error_code::oracle_unsupported, "pos over " + std::to_string( n.terms.size() )
                                                                 + " terms at " + where + " has no height" );
        break;
    case ctor::dom_lex:
    case ctor::dom_lin:
        if ( n.vars.size() != 1 )
            throw error( error_code::oracle_unsupported, std::string{ to_string( n.kind ) } + " over "
                                                                 + std::to_string( n.vars.size() )
                                                                 + " variables at " + where + " has no height" );
        break;
    default: break;
    }
    for ( std::size_t i = 0; i < n.children.size(); ++i )
        collect_support( n.children[ i ], where + "." + std::to_string( i ) );
}

} // namespace

void check_oracle_support( const ranking_node& root ) { collect_support( root, "root" ); }

struct height_function::impl
{
    struct hnode
    {
        ctor kind = ctor::bin;
        std::vector< int > var_slots;
        std::vector< int > var_sorts;
        int formula = -1;
        int term = -1;
        int order = -1;
        int low = -1;
        int high = -1;
        int total = -1;
        int order_sort = -1;
        std::vector< int > guards;
        std::vector< hnode > kids;
    };

    const signature* sig;
    evaluator ev;
    std::vector< var > params;
    std::vector< int > param_slots;
    hnode root;

    impl( const ranking_node& r, const signature& s ) : sig{ &s }, ev{ s }
    {
        check_oracle_support( r );
        params = node_params( r );
        for ( const auto& p : params )
            param_slots.push_back( ev.slot( p ) );
        root = build( r );
    }

    hnode build( const ranking_node& n )
    {
        hnode h;
        h.kind = n.kind;
        for ( const auto& v : n.vars )
        {
            h.var_slots.push_back( ev.slot( v ) );
            h.var_sorts.push_back( static_cast< int >( sig->sort_index( v.sort ) ) );
        }
        if ( n.kind == ctor::bin || n.kind == ctor::dom_lin )
            h.formula = ev.add( n.formula );
        if ( n.kind == ctor::pos )
            h.term = ev.add( n.terms.front() );
        if ( n.kind == ctor::pos || n.kind == ctor::dom_lex || n.kind == ctor::dom_lin )
        {
            h.order = ev.add( n.order.body );
            h.low = ev.slot( n.order.low.front() );
            h.high = ev.slot( n.order.high.front() );
            h.total = ev.add( strict_total_order( n.order.low, n.order.high, n.order.body ) );
            h.order_sort = static_cast< int >( sig->sort_index( n.order.low.front().sort ) );
        }
        for ( const auto& g : n.guards )
            h.guards.push_back( ev.add( g ) );
        for ( const auto& c : n.children )
            h.kids.push_back( build( c ) );
        return h;
    }

    int size_of( const finite_structure& s, int sort ) const { return s.sizes[ static_cast< std::size_t >( sort ) ]; }

    // Number of elements strictly below e in the order of h.
    std::uint64_t position( const hnode& h, int e, int n, const frames& fr, std::vector< int >& slots ) const
    {
        const int saved_low = slots[ static_cast< std::size_t >( h.low ) ];
        const int saved_high = slots[ static_cast< std::size_t >( h.high ) ];
        std::uint64_t below = 0;
        for ( int d = 0; d < n; ++d )
        {
            slots[ static_cast< std::size_t >( h.low ) ] = d;
            slots[ static_cast< std::size_t >( h.high ) ] = e;
            below += ev.holds( h.order, fr, slots ) ? 1 : 0;
        }
        slots[ static_cast< std::size_t >( h.low ) ] = saved_low;
        slots[ static_cast< std::size_t >( h.high ) ] = saved_high;
        return below;
    }

    void require_total( const hnode& h, const frames& fr, std::vector< int >& slots ) const
    {
        if ( !ev.holds( h.total, fr, slots ) )
            throw error( error_code::oracle_unsupported, "order is not a strict total order on this structure" );
    }

    // Calls `each` once per tuple of the node's aggregated variables.
    template < typename F >
    void tuples( const hnode& h, const finite_structure& s, std::vector< int >& slots, F&& each ) const
    {
        std::vector< int > saved;
        for ( int sl : h.var_slots )
            saved.push_back( slots[ static_cast< std::size_t >( sl ) ] );
        std::vector< int > t( h.var_slots.size(), 0 );
        for ( ;; )
        {
            for ( std::size_t i = 0; i < t.size(); ++i )
                slots[ static_cast< std::size_t >( h.var_slots[ i ] ) ] = t[ i ];
            each();
            std::size_t i = 0;
            while ( i < t.size() && ++t[ i ] == size_of( s, h.var_sorts[ i ] ) )
                t[ i++ ] = 0;
            if ( i == t.size() )
                break;
        }
        for ( std::size_t i = 0; i < saved.size(); ++i )
            slots[ static_cast< std::size_t >( h.var_slots[ i ] ) ] = saved[ i ];
    }

    height_value eval( const hnode& h, const finite_structure& s, std::vector< int >& slots ) const
    {
        const frames fr = frames::single( s );
        switch ( h.kind )
        {
        case ctor::bin: return { ev.holds( h.formula, fr, slots ) ? 1u : 0u, 1 };
        case ctor::pos:
        {
            require_total( h, fr, slots );
            const int n = size_of( s, h.order_sort );
            const int e = ev.value( h.term, fr, slots );
            return { position( h, e, n, fr, slots ), static_cast< std::uint64_t >( n - 1 ) };
        }
        case ctor::pw:
        {
            height_value out;
            for ( const auto& k : h.kids )
            {
                const auto v = eval( k, s, slots );
                out.value = checked_add( out.value, v.value );
                out.bound = checked_add( out.bound, v.bound );
            }
            return out;
        }
        case ctor::lex:
        {
            // Most significant child first; each position counts h_j + 1 values.
            height_value out;
            std::uint64_t span = 1;
            for ( std::size_t i = h.kids.size(); i-- > 0; )
            {
                const auto v = eval( h.kids[ i ], s, slots );
                out.value = checked_add( out.value, checked_mul( v.value, span ) );
                span = checked_mul( span, checked_add( v.bound, 1 ) );
            }
            out.bound = span - 1;
            return out;
        }
        case ctor::lin:
        {
            height_value out;
            std::uint64_t offset = 0;
            bool placed = false;
            for ( std::size_t i = 0; i < h.kids.size(); ++i )
            {
                const auto v = eval( h.kids[ i ], s, slots );
                if ( !placed && ev.holds( h.guards[ i ], fr, slots ) )
                {
                    out.value = checked_add( offset, v.value );
                    placed = true;
                }
                offset = checked_add( offset, checked_add( v.bound, 1 ) );
            }
            out.bound = offset - 1;
            return out;
        }
        case ctor::dom_pw:
        case ctor::dom_perm:
        {
            height_value out;
            tuples( h, s, slots, [ & ] {
                const auto v = eval( h.kids[ 0 ], s, slots );
                out.value = checked_add( out.value, v.value );
                out.bound = checked_add( out.bound, v.bound );
            } );
            return out;
        }
        case ctor::dom_lex:
        {
            require_total( h, fr, slots );
            const int n = size_of( s, h.var_sorts[ 0 ] );
            height_value out;
            std::uint64_t base = 0;
            tuples( h, s, slots, [ & ] {
                const auto v = eval( h.kids[ 0 ], s, slots );
                base = checked_add( v.bound, 1 );
                const int d = slots[ static_cast< std::size_t >( h.var_slots[ 0 ] ) ];
                const auto p = position( h, d, n, fr, slots );
                out.value = checked_add( out.value,
                                         checked_mul( v.value, checked_pow( base, n - 1 - static_cast< int >( p ) ) ) );
            } );
            out.bound = checked_pow( base, n ) - 1;
            return out;
        }
        case ctor::dom_lin:
        {
            require_total( h, fr, slots );
            const int n = size_of( s, h.var_sorts[ 0 ] );
            height_value out;
            std::uint64_t base = 0;
            std::uint64_t best = 0;
            bool found = false;
            tuples( h, s, slots, [ & ] {
                const auto v = eval( h.kids[ 0 ], s, slots );
                base = checked_add( v.bound, 1 );
                if ( !ev.holds( h.formula, fr, slots ) )
                    return;
                const int d = slots[ static_cast< std::size_t >( h.var_slots[ 0 ] ) ];
                const auto p = position( h, d, n, fr, slots );
                if ( !found || p < best )
                {
                    found = true;
                    best = p;
                    out.value = checked_add( checked_mul( p, base ), v.value );
                }
            } );
            out.bound = checked_mul( static_cast< std::uint64_t >( n ), base ) - 1;
            return out;
        }
        }
        return {};
    }

};

height_function::height_function( const ranking_node& root, const signature& sig )
        : _impl{ std::make_unique< impl >( root, sig ) }
{
}

height_function::~height_function() = default;
height_function::height_function( height_function&& ) noexcept = default;

const std::vector< var >& height_function::params() const { return _impl->params; }

height_value height_function::operator()( const finite_structure& s, const std::vector< int >& param_values ) const
{
    if ( param_values.size() != _impl->params.size() )
        throw error( error_code::missing_assignment, "height needs one value per parameter" );
    std::vector< int > slots( _impl->ev.slot_count(), 0 );
    for ( std::size_t i = 0; i < param_values.size(); ++i )
        slots[ static_cast< std::size_t >( _impl->param_slots[ i ] ) ] = param_values[ i ];
    return _impl->eval( _impl->root, s, slots );
}

height_value height_function::operator()( const finite_structure& s, const assignment& v ) const
{
    std::vector< int > values;
    for ( const auto& p : _impl->params )
    {
        const auto it = v.find( p );
        if ( it == v.end() )
            throw error( error_code::missing_assignment, "no value for parameter " + p.name );
        values.push_back( it->second );
    }
    return ( *this )( s, values );
}

std::vector< int > uniform_sizes( const signature& sig, int n, const std::map< std::string, int >& caps )
{
    std::vector< int > out;
    for ( const auto& s : sig.sorts() )
    {
        const auto it = caps.find( s.name );
        out.push_back( it == caps.end() ? n : std::min( n, it->second ) );
    }
    return out;
}

std::string oracle_report::json_line() const
{
    nlohmann::ordered_json j;
    j[ "kind" ] = kind;
    j[ "subject" ] = subject;
    j[ "sizes" ] = sizes;
    j[ "seed" ] = seed;
    j[ "exhaustive" ] = exhaustive;
    j[ "cases" ] = cases;
    j[ "skipped" ] = skipped;
    j[ "violations" ] = violations;
    j[ "flags" ] = flags;
    j[ "witness" ] = witness ? nlohmann::ordered_json( witness->description ) : nlohmann::ordered_json();
    return j.dump();
}

namespace
{

void symbol_indices( const expr& f, const signature& sig, std::set< std::size_t >& out )
{
    for ( const auto& [ name, t ] : symbols_of( f ) )
        out.insert( sig.symbol_index( name ) );
}

void tree_symbols( const ranking_node& n, const signature& sig, std::set< std::size_t >& out )
{
    symbol_indices( n.formula, sig, out );
    symbol_indices( n.order.body, sig, out );
    for ( const auto& t : n.terms )
        symbol_indices( t, sig, out );
    for ( const auto& g : n.guards )
        symbol_indices( g, sig, out );
    for ( const auto& c : n.children )
        tree_symbols( c, sig, out );
}

void tree_orders( const ranking_node& n, std::vector< expr >& out )
{
    if ( n.kind == ctor::pos || n.kind == ctor::dom_lex || n.kind == ctor::dom_lin )
        out.push_back( strict_total_order( n.order.low, n.order.high, n.order.body ) );
    for ( const auto& c : n.children )
        tree_orders( c, out );
}

std::vector< std::string > finite_flags( const signature& sig )
{
    std::vector< std::string > out;
    for ( const auto& s : sig.sorts() )
        if ( !s.finite )
            out.push_back( "sort '" + s.name + "' is not declared :finite" );
    return out;
}

// Calls `each` for every tuple of values of `vars`; stops when it returns false.
template < typename F >
bool for_each_tuple( const std::vector< var >& vars, const signature& sig, const std::vector< int >& sizes, F&& each )
{
    std::vector< int > t( vars.size(), 0 );
    for ( ;; )
    {
        if ( !each( t ) )
            return false;
        std::size_t i = 0;
        while ( i < t.size() && ++t[ i ] == sizes[ sig.sort_index( vars[ i ].sort ) ] )
            t[ i++ ] = 0;
        if ( i == t.size() )
            return true;
    }
}

std::string show_assignment( const std::vector< var >& vars, const std::vector< int >& values )
{
    std::string out = "{";
    for ( std::size_t i = 0; i < vars.size(); ++i )
        out += ( i ? ", " : "" ) + tagged_name( vars[ i ].name, vars[ i ].t ) + "=" + std::to_string( values[ i ] );
    return out + "}";
}

void flatten_conjuncts( const expr& f, std::vector< expr >& out )
{
    if ( f.kind() == op::and_ )
        for ( const auto& a : f.args() )
            flatten_conjuncts( a, out );
    else
        out.push_back( f );
}

} // namespace

oracle_report check_ranking_soundness( const ranking_node& root, const signature& sig, const std::vector< int >& sizes,
                                       const oracle_options& opts )
{
    elaborate_options eo;
    eo.use_hints = false;
    eo.require_closed = false;
    return check_ranking_soundness( elaborate( root, sig, eo ), root, sig, sizes, opts );
}

oracle_report check_ranking_soundness( const implicit_ranking& r, const ranking_node& root, const signature& sig,
                                       const std::vector< int >& sizes, const oracle_options& opts )
{
    height_function height( root, sig );

    oracle_report rep;
    rep.kind = "ranking-soundness";
    rep.subject = to_string( root.kind );
    rep.sizes = sizes;
    rep.seed = opts.enumeration.seed;
    rep.flags = finite_flags( sig );

    std::set< std::size_t > symbols;
    symbol_indices( r.conserved, sig, symbols );
    symbol_indices( r.reduced, sig, symbols );
    tree_symbols( root, sig, symbols );

    std::vector< expr > constraints;
    std::vector< expr > orders;
    tree_orders( root, orders );
    for ( const auto& o : orders )
    {
        constraints.push_back( retag( o, tag::plain, tag::sub0, false ) );
        constraints.push_back( retag( o, tag::plain, tag::sub1, false ) );
    }

    const auto base = finite_structure::empty( sig, sizes );
    world_enumerator worlds( sig, { base, base }, { 0, -1, 0, 1 },
                             std::vector< std::size_t >( symbols.begin(), symbols.end() ), constraints );

    evaluator ev( sig );
    const auto lows = low_copy( r.params );
    const auto highs = high_copy( r.params );
    std::vector< int > low_slots, high_slots;
    for ( const auto& v : lows )
        low_slots.push_back( ev.slot( v ) );
    for ( const auto& v : highs )
        high_slots.push_back( ev.slot( v ) );
    const int conserved = ev.add( r.conserved );
    const int reduced = ev.add( r.reduced );

    // Height parameters follow node_params; map them onto r.params.
    std::vector< std::size_t > order_of;
    for ( const auto& p : height.params() )
        for ( std::size_t i = 0; i < r.params.size(); ++i )
            if ( r.params[ i ] == p )
                order_of.push_back( i );

    auto reorder = [ & ]( const std::vector< int >& values ) {
        std::vector< int > out;
        for ( auto i : order_of )
            out.push_back( values[ i ] );
        return out;
    };

    std::vector< int > slots( ev.slot_count(), 0 );
    const auto stats = worlds.run( opts.enumeration, [ & ]( const std::vector< finite_structure >& w ) {
        const frames fr = frames::ranked( w[ 0 ], w[ 1 ] );
        for_each_tuple( r.params, sig, sizes, [ & ]( const std::vector< int >& v0 ) {
            for_each_tuple( r.params, sig, sizes, [ & ]( const std::vector< int >& v1 ) {
                ++rep.cases;
                for ( std::size_t i = 0; i < v0.size(); ++i )
                {
                    slots[ static_cast< std::size_t >( low_slots[ i ] ) ] = v0[ i ];
                    slots[ static_cast< std::size_t >( high_slots[ i ] ) ] = v1[ i ];
                }
                const bool le = ev.holds( conserved, fr, slots );
                const bool lt = ev.holds( reduced, fr, slots );
                height_value h0, h1;
                try
                {
                    h0 = height( w[ 0 ], reorder( v0 ) );
                    h1 = height( w[ 1 ], reorder( v1 ) );
                }
                catch ( const error& e )
                {
                    if ( e.code() != error_code::oracle_unsupported )
                        throw;
                    ++rep.skipped;
                    return true;
                }
                std::string problem;
                if ( lt && !le )
                    problem = "reduced holds but conserved does not";
                else if ( lt && !( h0.value < h1.value ) )
                    problem = "reduced holds but the height does not decrease";
                else if ( le && !( h0.value <= h1.value ) )
                    problem = "conserved holds but the height increases";
                else if ( h0.value > h0.bound || h1.value > h1.bound )
                    problem = "height exceeds its bound";
                if ( !problem.empty() )
                {
                    ++rep.violations;
                    if ( !rep.witness )
                    {
                        std::ostringstream out;
                        out << problem << "\nlow structure (height " << h0.value << " of " << h0.bound << "):\n"
                            << describe( w[ 0 ], sig, "  " ) << "high structure (height " << h1.value << " of "
                            << h1.bound << "):\n"
                            << describe( w[ 1 ], sig, "  " ) << "assignment " << show_assignment( lows, v0 ) << " "
                            << show_assignment( highs, v1 ) << "\n";
                        rep.witness = oracle_witness{ out.str() };
                    }
                }
                return true;
            } );
            return true;
        } );
        return true;
    } );
    rep.exhaustive = stats.exhaustive;
    return rep;
}

oracle_report bounded_premise_check( const proof_obligation& ob, const signature& sig, const std::vector< int >& sizes,
                                     const oracle_options& opts )
{
    if ( !ob.formula.free().empty() )
        throw error( error_code::not_closed, "obligation " + ob.name + " has free variables" );

    oracle_report rep;
    rep.kind = "premise";
    rep.subject = ob.name;
    rep.sizes = sizes;
    rep.seed = opts.enumeration.seed;
    rep.flags = finite_flags( sig );

    // Closed conjuncts of the antecedent must hold in any falsifier.
    std::vector< expr > constraints;
    if ( ob.formula.kind() == op::implies )
    {
        std::vector< expr > parts;
        flatten_conjuncts( ob.formula.arg( 0 ), parts );
        for ( const auto& p : parts )
            if ( p.free().empty() )
                constraints.push_back( p );
    }

    std::set< std::size_t > symbols;
    symbol_indices( ob.formula, sig, symbols );
    const auto base = finite_structure::empty( sig, sizes );
    world_enumerator worlds( sig, { base, base }, { 0, 1, -1, -1 },
                             std::vector< std::size_t >( symbols.begin(), symbols.end() ), constraints );

    evaluator ev( sig );
    const int formula = ev.add( ob.formula );
    std::vector< int > slots( ev.slot_count(), 0 );
    const auto stats = worlds.run( opts.enumeration, [ & ]( const std::vector< finite_structure >& w ) {
        ++rep.cases;
        if ( ev.holds( formula, frames::transition( w[ 0 ], w[ 1 ] ), slots ) )
            return true;
        ++rep.violations;
        if ( !rep.witness )
            rep.witness = oracle_witness{ "pre-state:\n" + describe( w[ 0 ], sig, "  " ) + "post-state:\n"
                                          + describe( w[ 1 ], sig, "  " ) };
        return true;
    } );
    rep.exhaustive = stats.exhaustive;
    return rep;
}

} // namespace livrank
