#include "livrank/ranking.hpp"
#include "livrank/error.hpp"

#include <algorithm>

namespace livrank
{

std::string_view to_string( ctor c )
{
    switch ( c )
    {
    case ctor::bin: return "bin";
    case ctor::pos: return "pos";
    case ctor::pw: return "pw";
    case ctor::lex: return "lex";
    case ctor::lin: return "lin";
    case ctor::dom_pw: return "dom-pw";
    case ctor::dom_perm: return "dom-perm";
    case ctor::dom_lex: return "dom-lex";
    case ctor::dom_lin: return "dom-lin";
    }
    return "?";
}

std::string path_string( const std::vector< int >& path )
{
    std::string out = "(";
    for ( std::size_t i = 0; i < path.size(); ++i )
        out += ( i ? " " : "" ) + std::to_string( path[ i ] );
    return out + ")";
}

namespace
{

std::vector< var > with_tag( const std::vector< var >& xs, tag t )
{
    std::vector< var > out;
    out.reserve( xs.size() );
    for ( const auto& x : xs )
        out.push_back( x.with_tag( t ) );
    return out;
}

std::vector< var > renamed( const std::vector< var >& xs, const std::string& suffix )
{
    std::vector< var > out;
    out.reserve( xs.size() );
    for ( const auto& x : xs )
        out.push_back( var{ x.name + "." + suffix, x.sort, tag::plain } );
    return out;
}

// Moves a plain-signature formula into ranking copy t, retagging the given
// free variables alongside.
expr copy_to( const expr& f, tag t, const std::vector< var >& vars )
{
    expr g = retag( f, tag::plain, t, false );
    std::map< var, expr > m;
    for ( const auto& v : vars )
        m.emplace( v, mk_var( v.with_tag( t ) ) );
    return substitute( g, m );
}

// Fills both copies of the aggregated tuple of an inner ranking formula.
expr fill( const expr& f, const std::vector< var >& ys, const std::vector< expr >& low,
           const std::vector< expr >& high )
{
    std::map< var, expr > m;
    for ( std::size_t i = 0; i < ys.size(); ++i )
    {
        m.emplace( ys[ i ].with_tag( tag::sub0 ), low[ i ] );
        m.emplace( ys[ i ].with_tag( tag::sub1 ), high[ i ] );
    }
    return substitute( f, m );
}

expr bind_vars( const expr& f, const std::vector< var >& xs, const std::vector< expr >& ts )
{
    std::map< var, expr > m;
    for ( std::size_t i = 0; i < xs.size(); ++i )
        m.emplace( xs[ i ], ts[ i ] );
    return substitute( f, m );
}

std::vector< expr > slice( const std::vector< expr >& ts, std::size_t from, std::size_t n )
{
    return { ts.begin() + static_cast< long >( from ), ts.begin() + static_cast< long >( from + n ) };
}

bool same_params( const std::vector< var >& a, const std::vector< var >& b )
{
    if ( a.size() != b.size() )
        return false;
    for ( std::size_t i = 0; i < a.size(); ++i )
        if ( !( a[ i ] == b[ i ] ) || a[ i ].sort != b[ i ].sort )
            return false;
    return true;
}

std::string names( const std::vector< var >& xs )
{
    std::string out = "[";
    for ( std::size_t i = 0; i < xs.size(); ++i )
        out += ( i ? " " : "" ) + xs[ i ].name;
    return out + "]";
}

void check_subset( const std::vector< var >& free, const std::vector< var >& allowed, const std::string& what )
{
    for ( const auto& v : free )
        if ( std::find( allowed.begin(), allowed.end(), v ) == allowed.end() )
            throw error( error_code::free_var_escape,
                         what + " mentions '" + tagged_name( v.name, v.t ) + "' outside " + names( allowed ) );
}

implicit_ranking finish( std::vector< var > params, expr conserved, expr reduced, bool finite, ranking_node node )
{
    auto allowed = low_copy( params );
    auto high = high_copy( params );
    allowed.insert( allowed.end(), high.begin(), high.end() );
    check_subset( conserved.free(), allowed, std::string{ to_string( node.kind ) } + " conserved formula" );
    check_subset( reduced.free(), allowed, std::string{ to_string( node.kind ) } + " reduced formula" );
    return implicit_ranking{ std::move( params ), std::move( conserved ), std::move( reduced ), finite,
                             std::make_shared< const ranking_node >( std::move( node ) ) };
}

// Splits r.params into the aggregated tuple and the rest.
std::vector< var > remaining_params( const implicit_ranking& r, const std::vector< var >& ys, ctor c )
{
    for ( const auto& y : ys )
    {
        auto it = std::find( r.params.begin(), r.params.end(), y );
        if ( it == r.params.end() || it->sort != y.sort )
            throw error( error_code::not_a_param, std::string{ to_string( c ) } + " aggregates '" + y.name +
                                                      "' which is not a parameter of " + names( r.params ) );
    }
    for ( std::size_t i = 0; i < ys.size(); ++i )
        for ( std::size_t j = i + 1; j < ys.size(); ++j )
            if ( ys[ i ] == ys[ j ] )
                throw error( error_code::not_a_param, "'" + ys[ i ].name + "' aggregated twice" );
    std::vector< var > rest;
    for ( const auto& p : r.params )
        if ( std::find( ys.begin(), ys.end(), p ) == ys.end() )
            rest.push_back( p );
    return rest;
}

void check_order_arity( const order_formula& l, const std::vector< var >& ys, ctor c )
{
    if ( l.low.size() != ys.size() || l.high.size() != ys.size() )
        throw error( error_code::arity_mismatch, std::string{ to_string( c ) } + " order compares " +
                                                     std::to_string( l.low.size() ) + "-tuples but aggregates " +
                                                     std::to_string( ys.size() ) + " variables" );
    for ( std::size_t i = 0; i < ys.size(); ++i )
        if ( l.low[ i ].sort != ys[ i ].sort || l.high[ i ].sort != ys[ i ].sort )
            throw error( error_code::arity_mismatch,
                         std::string{ to_string( c ) } + " order slot " + std::to_string( i ) + " has sort " +
                             l.low[ i ].sort + " but '" + ys[ i ].name + "' has sort " + ys[ i ].sort );
}

const hint_tuples* block( const hint_set& hints, const char* name )
{
    auto it = hints.find( name );
    return it == hints.end() || it->second.empty() ? nullptr : &it->second;
}

void check_hint_blocks( const hint_set& hints, ctor c )
{
    auto allowed = hint_blocks( c );
    for ( const auto& [ name, tuples ] : hints )
        if ( std::find( allowed.begin(), allowed.end(), name ) == allowed.end() )
            throw error( error_code::bad_hint_path,
                         std::string{ to_string( c ) } + " has no existential block '" + name + "'" );
}

// Either the existential block itself or the disjunction of its hinted
// instances. `body` receives the instantiation of the bound tuple.
expr exists_or_hinted( const std::vector< var >& bound, const hint_tuples* hints,
                       const std::function< expr( const std::vector< expr >& ) >& body )
{
    if ( !hints )
        return mk_exists( bound, body( mk_vars( bound ) ) );
    std::vector< expr > cases;
    for ( const auto& t : *hints )
        cases.push_back( body( t ) );
    return mk_or( std::move( cases ) );
}

} // namespace

std::vector< var > low_copy( const std::vector< var >& xs ) { return with_tag( xs, tag::sub0 ); }
std::vector< var > high_copy( const std::vector< var >& xs ) { return with_tag( xs, tag::sub1 ); }

expr apply_order( const order_formula& l, tag t, const std::vector< expr >& a, const std::vector< expr >& b )
{
    if ( a.size() != l.low.size() || b.size() != l.high.size() )
        throw error( error_code::arity_mismatch, "order applied to tuples of the wrong length" );
    expr body = t == tag::plain ? l.body : retag( l.body, tag::plain, t, false );
    std::map< var, expr > m;
    for ( std::size_t i = 0; i < a.size(); ++i )
    {
        m.emplace( l.low[ i ], a[ i ] );
        m.emplace( l.high[ i ], b[ i ] );
    }
    return substitute( body, m );
}

expr mk_immut_order( const order_formula& l )
{
    auto y1 = renamed( l.low, "1" );
    auto y2 = renamed( l.low, "2" );
    auto y3 = renamed( l.low, "3" );
    auto t1 = mk_vars( y1 );
    auto t2 = mk_vars( y2 );
    auto t3 = mk_vars( y3 );

    std::vector< var > y12 = y1;
    y12.insert( y12.end(), y2.begin(), y2.end() );
    std::vector< var > y123 = y12;
    y123.insert( y123.end(), y3.begin(), y3.end() );

    expr agreement =
            mk_forall( y12, mk_iff( apply_order( l, tag::sub0, t1, t2 ), apply_order( l, tag::sub1, t1, t2 ) ) );
    expr asymmetry = mk_forall(
            y12, mk_implies( apply_order( l, tag::sub0, t1, t2 ), mk_not( apply_order( l, tag::sub0, t2, t1 ) ) ) );
    expr transitivity = mk_forall(
            y123, mk_implies( mk_and( apply_order( l, tag::sub0, t1, t2 ), apply_order( l, tag::sub0, t2, t3 ) ),
                              apply_order( l, tag::sub0, t1, t3 ) ) );
    return mk_and( { agreement, asymmetry, transitivity } );
}

std::vector< var > node_params( const ranking_node& node )
{
    switch ( node.kind )
    {
    case ctor::bin:
    case ctor::pos: return node.vars;
    case ctor::pw:
    case ctor::lex:
    case ctor::lin: return node.children.empty() ? std::vector< var >{} : node_params( node.children.front() );
    default: break;
    }
    if ( node.children.empty() )
        return {};
    std::vector< var > rest;
    for ( const auto& p : node_params( node.children.front() ) )
        if ( std::find( node.vars.begin(), node.vars.end(), p ) == node.vars.end() )
            rest.push_back( p );
    return rest;
}

std::vector< std::string > hint_blocks( ctor c )
{
    switch ( c )
    {
    case ctor::dom_pw: return { "witness" };
    case ctor::dom_perm: return { "sigma", "witness" };
    case ctor::dom_lex: return { "witness", "star" };
    case ctor::dom_lin: return { "witness", "cross" };
    default: return {};
    }
}

std::vector< std::string > hint_tuple_sorts( const ranking_node& node, const std::string& block )
{
    std::vector< std::string > one;
    for ( const auto& v : node.vars )
        one.push_back( v.sort );
    std::size_t copies = 1;
    if ( node.kind == ctor::dom_perm && block == "sigma" )
        copies = 2 * static_cast< std::size_t >( std::max( node.k, 0 ) );
    if ( node.kind == ctor::dom_lin && block == "cross" )
        copies = 2;
    std::vector< std::string > out;
    for ( std::size_t i = 0; i < copies; ++i )
        out.insert( out.end(), one.begin(), one.end() );
    return out;
}

// ---------------------------------------------------------------- base constructors

implicit_ranking bin( const expr& alpha, const std::vector< var >& params )
{
    check_subset( alpha.free(), params, "bin formula" );
    expr a0 = copy_to( alpha, tag::sub0, params );
    expr a1 = copy_to( alpha, tag::sub1, params );
    ranking_node node;
    node.kind = ctor::bin;
    node.vars = params;
    node.formula = alpha;
    return finish( params, mk_implies( a0, a1 ), mk_and( a1, mk_not( a0 ) ), false, std::move( node ) );
}

implicit_ranking pos( const std::vector< expr >& terms, const order_formula& l, const std::vector< var >& params )
{
    if ( terms.size() != l.low.size() || terms.size() != l.high.size() )
        throw error( error_code::arity_mismatch, "pos compares " + std::to_string( terms.size() ) +
                                                     " terms with an order over " + std::to_string( l.low.size() ) +
                                                     "-tuples" );
    std::vector< expr > t0, t1;
    for ( std::size_t i = 0; i < terms.size(); ++i )
    {
        if ( terms[ i ].sort() != l.low[ i ].sort )
            throw error( error_code::arity_mismatch, "pos term " + to_string( terms[ i ] ) + " has sort " +
                                                         terms[ i ].sort() + ", order slot expects " + l.low[ i ].sort );
        check_subset( terms[ i ].free(), params, "pos term" );
        t0.push_back( copy_to( terms[ i ], tag::sub0, params ) );
        t1.push_back( copy_to( terms[ i ], tag::sub1, params ) );
    }
    expr order = mk_immut_order( l );
    expr below = apply_order( l, tag::sub0, t0, t1 );
    ranking_node node;
    node.kind = ctor::pos;
    node.vars = params;
    node.terms = terms;
    node.order = l;
    return finish( params, mk_and( order, mk_or( below, mk_tuple_eq( t0, t1 ) ) ), mk_and( order, below ), true,
                   std::move( node ) );
}

// ---------------------------------------------------------------- finite aggregations

namespace
{

void check_family( const std::vector< implicit_ranking >& rs, ctor c )
{
    if ( rs.empty() )
        throw error( error_code::empty_list, std::string{ to_string( c ) } + " needs at least one ranking" );
    for ( const auto& r : rs )
        if ( !same_params( r.params, rs.front().params ) )
            throw error( error_code::param_mismatch, std::string{ to_string( c ) } + " mixes parameters " +
                                                         names( rs.front().params ) + " and " + names( r.params ) );
}

ranking_node family_node( ctor c, const std::vector< implicit_ranking >& rs )
{
    ranking_node node;
    node.kind = c;
    for ( const auto& r : rs )
        node.children.push_back( *r.node );
    return node;
}

bool any_finite( const std::vector< implicit_ranking >& rs )
{
    return std::any_of( rs.begin(), rs.end(), []( const auto& r ) { return r.finite_domain; } );
}

} // namespace

implicit_ranking pw( const std::vector< implicit_ranking >& rs )
{
    check_family( rs, ctor::pw );
    std::vector< expr > le, lt;
    for ( const auto& r : rs )
    {
        le.push_back( r.conserved );
        lt.push_back( r.reduced );
    }
    expr conserved = mk_and( le );
    return finish( rs.front().params, conserved, mk_and( conserved, mk_or( lt ) ), any_finite( rs ),
                   family_node( ctor::pw, rs ) );
}

implicit_ranking lex( const std::vector< implicit_ranking >& rs )
{
    check_family( rs, ctor::lex );
    std::vector< expr > cases, all;
    for ( std::size_t i = 0; i < rs.size(); ++i )
    {
        std::vector< expr > c{ rs[ i ].reduced };
        for ( std::size_t j = 0; j < i; ++j )
            c.push_back( rs[ j ].conserved );
        cases.push_back( mk_and( std::move( c ) ) );
        all.push_back( rs[ i ].conserved );
    }
    expr reduced = mk_or( cases );
    return finish( rs.front().params, mk_or( reduced, mk_and( all ) ), reduced, any_finite( rs ),
                   family_node( ctor::lex, rs ) );
}

implicit_ranking lin( const std::vector< expr >& guards, const std::vector< implicit_ranking >& rs )
{
    check_family( rs, ctor::lin );
    if ( guards.size() != rs.size() )
        throw error( error_code::arity_mismatch, "lin needs one guard per branch" );
    const auto& params = rs.front().params;

    std::vector< expr > b0, b1;
    for ( std::size_t i = 0; i < guards.size(); ++i )
    {
        check_subset( guards[ i ].free(), params, "lin guard" );
        std::vector< expr > parts{ guards[ i ] };
        for ( std::size_t j = 0; j < i; ++j )
            parts.push_back( mk_not( guards[ j ] ) );
        expr beta = mk_and( std::move( parts ) );
        b0.push_back( copy_to( beta, tag::sub0, params ) );
        b1.push_back( copy_to( beta, tag::sub1, params ) );
    }

    std::vector< expr > cross;
    for ( std::size_t i = 0; i < rs.size(); ++i )
        for ( std::size_t j = i + 1; j < rs.size(); ++j )
            cross.push_back( mk_and( b0[ i ], b1[ j ] ) );

    auto combine = [ & ]( bool reduced ) {
        std::vector< expr > cases;
        for ( std::size_t i = 0; i < rs.size(); ++i )
            cases.push_back( mk_and( { reduced ? rs[ i ].reduced : rs[ i ].conserved, b0[ i ], b1[ i ] } ) );
        cases.insert( cases.end(), cross.begin(), cross.end() );
        return mk_or( std::move( cases ) );
    };

    ranking_node node = family_node( ctor::lin, rs );
    node.guards = guards;
    return finish( params, combine( false ), combine( true ), any_finite( rs ), std::move( node ) );
}

// ---------------------------------------------------------------- domain aggregations

implicit_ranking dom_pw( const implicit_ranking& r, const std::vector< var >& ys, const hint_set& hints )
{
    check_hint_blocks( hints, ctor::dom_pw );
    auto rest = remaining_params( r, ys, ctor::dom_pw );
    auto y = mk_vars( ys );

    expr conserved = mk_forall( ys, fill( r.conserved, ys, y, y ) );
    expr some = exists_or_hinted( ys, block( hints, "witness" ),
                                  [ & ]( const std::vector< expr >& t ) { return fill( r.reduced, ys, t, t ); } );

    ranking_node node;
    node.kind = ctor::dom_pw;
    node.vars = ys;
    node.children = { *r.node };
    node.hints = hints;
    return finish( rest, conserved, mk_and( conserved, some ), true, std::move( node ) );
}

implicit_ranking dom_perm( const implicit_ranking& r, const std::vector< var >& ys, int k, bool loose,
                           const hint_set& hints )
{
    if ( k < 0 )
        throw error( error_code::bad_k, "dom-perm needs k >= 0, got " + std::to_string( k ) );
    check_hint_blocks( hints, ctor::dom_perm );
    if ( k == 0 )
    {
        if ( block( hints, "sigma" ) )
            throw error( error_code::bad_hint_path, "dom-perm with k = 0 has no permutation block" );
        auto out = dom_pw( r, ys, hints );
        ranking_node node = *out.node;
        node.kind = ctor::dom_perm;
        node.k = 0;
        node.loose = loose;
        out.node = std::make_shared< const ranking_node >( std::move( node ) );
        return out;
    }

    auto rest = remaining_params( r, ys, ctor::dom_perm );
    const std::size_t m = ys.size();

    std::vector< std::vector< var > > fwd, bwd;
    std::vector< var > sigma_vars;
    for ( int i = 1; i <= k; ++i )
    {
        fwd.push_back( renamed( ys, "fwd" + std::to_string( i ) ) );
        bwd.push_back( renamed( ys, "bwd" + std::to_string( i ) ) );
        sigma_vars.insert( sigma_vars.end(), fwd.back().begin(), fwd.back().end() );
        sigma_vars.insert( sigma_vars.end(), bwd.back().begin(), bwd.back().end() );
    }

    // Transposition terms and distinctness, as functions of the tuple values
    // chosen for the sigma variables (plain variables or hint terms).
    auto split = [ & ]( const std::vector< expr >& s ) {
        std::vector< std::vector< expr > > f, b;
        for ( std::size_t i = 0; i < static_cast< std::size_t >( k ); ++i )
        {
            f.push_back( slice( s, 2 * i * m, m ) );
            b.push_back( slice( s, ( 2 * i + 1 ) * m, m ) );
        }
        return std::make_pair( f, b );
    };

    auto permuted = [ & ]( const std::vector< expr >& s, const std::vector< expr >& yv ) {
        auto [ f, b ] = split( s );
        std::vector< expr > out;
        for ( std::size_t c = 0; c < m; ++c )
        {
            expr t = yv[ c ];
            for ( std::size_t i = static_cast< std::size_t >( k ); i-- > 0; )
            {
                t = mk_ite( mk_tuple_eq( yv, b[ i ] ), f[ i ][ c ], t );
                t = mk_ite( mk_tuple_eq( yv, f[ i ] ), b[ i ][ c ], t );
            }
            out.push_back( t );
        }
        return out;
    };

    auto distinct = [ & ]( const std::vector< expr >& s ) {
        auto [ f, b ] = split( s );
        std::vector< expr > parts;
        for ( std::size_t i = 0; i < f.size(); ++i )
            for ( std::size_t j = i + 1; j < f.size(); ++j )
            {
                parts.push_back( mk_not( mk_tuple_eq( f[ i ], f[ j ] ) ) );
                parts.push_back( mk_not( mk_tuple_eq( b[ i ], b[ j ] ) ) );
                parts.push_back( mk_not( mk_tuple_eq( f[ i ], b[ j ] ) ) );
                if ( !loose )
                    parts.push_back( mk_not( mk_tuple_eq( b[ i ], f[ j ] ) ) );
            }
        return mk_and( std::move( parts ) );
    };

    auto y = mk_vars( ys );
    auto body = [ & ]( const std::vector< expr >& s, bool reduced ) {
        expr all = mk_forall( ys, fill( r.conserved, ys, y, permuted( s, y ) ) );
        if ( !reduced )
            return mk_and( distinct( s ), all );
        expr some = exists_or_hinted( ys, block( hints, "witness" ), [ & ]( const std::vector< expr >& t ) {
            return fill( r.reduced, ys, t, permuted( s, t ) );
        } );
        return mk_and( { distinct( s ), all, some } );
    };

    const auto* sigma_hints = block( hints, "sigma" );
    expr conserved = exists_or_hinted( sigma_vars, sigma_hints,
                                       [ & ]( const std::vector< expr >& s ) { return body( s, false ); } );
    expr reduced = exists_or_hinted( sigma_vars, sigma_hints,
                                     [ & ]( const std::vector< expr >& s ) { return body( s, true ); } );

    ranking_node node;
    node.kind = ctor::dom_perm;
    node.vars = ys;
    node.k = k;
    node.loose = loose;
    node.children = { *r.node };
    node.hints = hints;
    return finish( rest, conserved, reduced, true, std::move( node ) );
}

implicit_ranking dom_lex( const implicit_ranking& r, const std::vector< var >& ys, const order_formula& l,
                          const hint_set& hints )
{
    check_hint_blocks( hints, ctor::dom_lex );
    auto rest = remaining_params( r, ys, ctor::dom_lex );
    check_order_arity( l, ys, ctor::dom_lex );

    auto y = mk_vars( ys );
    auto star = renamed( ys, "star" );
    expr earlier = exists_or_hinted( star, block( hints, "star" ), [ & ]( const std::vector< expr >& t ) {
        return mk_and( apply_order( l, tag::sub0, t, y ), fill( r.reduced, ys, t, t ) );
    } );
    expr conserved =
            mk_and( mk_immut_order( l ), mk_forall( ys, mk_or( fill( r.conserved, ys, y, y ), earlier ) ) );
    expr some = exists_or_hinted( ys, block( hints, "witness" ),
                                  [ & ]( const std::vector< expr >& t ) { return fill( r.reduced, ys, t, t ); } );

    ranking_node node;
    node.kind = ctor::dom_lex;
    node.vars = ys;
    node.order = l;
    node.children = { *r.node };
    node.hints = hints;
    return finish( rest, conserved, mk_and( conserved, some ), true, std::move( node ) );
}

implicit_ranking dom_lin( const implicit_ranking& r, const std::vector< var >& ys, const order_formula& l,
                          const expr& alpha, const hint_set& hints )
{
    check_hint_blocks( hints, ctor::dom_lin );
    auto rest = remaining_params( r, ys, ctor::dom_lin );
    check_order_arity( l, ys, ctor::dom_lin );

    std::vector< var > scope = ys;
    scope.insert( scope.end(), rest.begin(), rest.end() );
    check_subset( alpha.free(), scope, "dom-lin formula" );

    auto y = mk_vars( ys );
    auto other = renamed( ys, "other" );
    auto o = mk_vars( other );
    expr beta = mk_and( alpha, mk_forall( other, mk_or( { apply_order( l, tag::plain, y, o ), mk_tuple_eq( y, o ),
                                                          mk_not( bind_vars( alpha, ys, o ) ) } ) ) );

    // beta in copy c for the tuple u, with the remaining parameters of that copy.
    auto beta_at = [ & ]( tag c, const std::vector< expr >& u ) {
        return bind_vars( copy_to( beta, c, rest ), ys, u );
    };

    auto cross_vars = renamed( ys, "cross" );
    std::vector< var > pair_vars = ys;
    pair_vars.insert( pair_vars.end(), cross_vars.begin(), cross_vars.end() );
    expr cross = exists_or_hinted( pair_vars, block( hints, "cross" ), [ & ]( const std::vector< expr >& t ) {
        auto a = slice( t, 0, ys.size() );
        auto b = slice( t, ys.size(), ys.size() );
        return mk_and( { beta_at( tag::sub0, a ), beta_at( tag::sub1, b ), apply_order( l, tag::sub0, a, b ) } );
    } );

    auto combine = [ & ]( const expr& inner ) {
        expr same = exists_or_hinted( ys, block( hints, "witness" ), [ & ]( const std::vector< expr >& t ) {
            return mk_and( { fill( inner, ys, t, t ), beta_at( tag::sub0, t ), beta_at( tag::sub1, t ) } );
        } );
        return mk_and( mk_immut_order( l ), mk_or( same, cross ) );
    };

    ranking_node node;
    node.kind = ctor::dom_lin;
    node.vars = ys;
    node.order = l;
    node.formula = alpha;
    node.children = { *r.node };
    node.hints = hints;
    return finish( rest, combine( r.conserved ), combine( r.reduced ), true, std::move( node ) );
}

// ---------------------------------------------------------------- hints and elaboration

void apply_hints( ranking_node& root, const std::vector< int >& path, const std::string& block_name,
                  const hint_tuples& tuples )
{
    ranking_node* node = &root;
    for ( int i : path )
    {
        if ( i < 0 || static_cast< std::size_t >( i ) >= node->children.size() )
            throw error( error_code::bad_hint_path, "hint path " + path_string( path ) + " leaves the ranking tree" );
        node = &node->children[ static_cast< std::size_t >( i ) ];
    }
    auto blocks = hint_blocks( node->kind );
    if ( std::find( blocks.begin(), blocks.end(), block_name ) == blocks.end() ||
         ( node->kind == ctor::dom_perm && node->k == 0 && block_name == "sigma" ) )
        throw error( error_code::bad_hint_path, "hint path " + path_string( path ) + " addresses a " +
                                                    std::string{ to_string( node->kind ) } +
                                                    " node without existential block '" + block_name + "'" );
    auto sorts = hint_tuple_sorts( *node, block_name );
    for ( const auto& t : tuples )
    {
        if ( t.size() != sorts.size() )
            throw error( error_code::sort_mismatch, "hint tuple for " + path_string( path ) + " has " +
                                                        std::to_string( t.size() ) + " terms, expected " +
                                                        std::to_string( sorts.size() ) );
        for ( std::size_t i = 0; i < t.size(); ++i )
            if ( t[ i ].sort() != sorts[ i ] )
                throw error( error_code::sort_mismatch, "hint term " + to_string( t[ i ] ) + " has sort " +
                                                            ( t[ i ].sort().empty() ? "Bool" : t[ i ].sort() ) +
                                                            ", expected " + sorts[ i ] );
    }
    auto& slot = node->hints[ block_name ];
    slot.insert( slot.end(), tuples.begin(), tuples.end() );
}

namespace
{

var_context context_of( const std::vector< var >& xs )
{
    var_context ctx;
    for ( const auto& x : xs )
        ctx[ x ] = x.sort;
    return ctx;
}

void check_order( const order_formula& l, const signature& sig )
{
    std::vector< var > both = l.low;
    both.insert( both.end(), l.high.begin(), l.high.end() );
    if ( well_sorted( l.body, sig, context_of( both ) ) != "Bool" )
        throw error( error_code::sort_mismatch, "order body is not a formula" );
    check_subset( l.body.free(), both, "order formula" );
}

implicit_ranking build( const ranking_node& node, const signature& sig, const elaborate_options& opts,
                        std::vector< int >& path, const node_visitor& visit )
{
    std::vector< implicit_ranking > kids;
    for ( std::size_t i = 0; i < node.children.size(); ++i )
    {
        path.push_back( static_cast< int >( i ) );
        kids.push_back( build( node.children[ i ], sig, opts, path, visit ) );
        path.pop_back();
    }
    const hint_set none;
    const hint_set& hints = opts.use_hints ? node.hints : none;

    auto one_child = [ & ]() -> const implicit_ranking& {
        if ( kids.size() != 1 )
            throw error( error_code::arity_mismatch,
                         std::string{ to_string( node.kind ) } + " takes exactly one inner ranking" );
        return kids.front();
    };

    implicit_ranking out;
    switch ( node.kind )
    {
    case ctor::bin:
        if ( well_sorted( node.formula, sig, context_of( node.vars ) ) != "Bool" )
            throw error( error_code::sort_mismatch, "bin expects a formula" );
        out = bin( node.formula, node.vars );
        if ( opts.swap_roles_at && *opts.swap_roles_at == path )
        {
            // primed never occurs in a bin's formulas, so it can hold sub0 meanwhile
            auto swap = [ & ]( const expr& f ) {
                return retag( retag( retag( f, tag::sub0, tag::primed, true ), tag::sub1, tag::sub0, true ),
                              tag::primed, tag::sub1, true );
            };
            out.conserved = swap( out.conserved );
            out.reduced = swap( out.reduced );
        }
        break;
    case ctor::pos:
        check_order( node.order, sig );
        for ( const auto& t : node.terms )
            well_sorted( t, sig, context_of( node.vars ) );
        out = pos( node.terms, node.order, node.vars );
        break;
    case ctor::pw: out = pw( kids ); break;
    case ctor::lex: out = lex( kids ); break;
    case ctor::lin: {
        if ( !kids.empty() )
            for ( const auto& g : node.guards )
                if ( well_sorted( g, sig, context_of( kids.front().params ) ) != "Bool" )
                    throw error( error_code::sort_mismatch, "lin guard is not a formula" );
        out = lin( node.guards, kids );
        break;
    }
    case ctor::dom_pw: out = dom_pw( one_child(), node.vars, hints ); break;
    case ctor::dom_perm: out = dom_perm( one_child(), node.vars, node.k, node.loose, hints ); break;
    case ctor::dom_lex:
        check_order( node.order, sig );
        out = dom_lex( one_child(), node.vars, node.order, hints );
        break;
    case ctor::dom_lin: {
        check_order( node.order, sig );
        if ( well_sorted( node.formula, sig, context_of( one_child().params ) ) != "Bool" )
            throw error( error_code::sort_mismatch, "dom-lin expects a formula" );
        out = dom_lin( one_child(), node.vars, node.order, node.formula, hints );
        break;
    }
    }
    // Keep the user's hints on the node even when elaborating without them.
    if ( !opts.use_hints && !node.hints.empty() )
    {
        ranking_node copy = *out.node;
        copy.hints = node.hints;
        out.node = std::make_shared< const ranking_node >( std::move( copy ) );
    }
    if ( visit )
        visit( path, out );
    return out;
}

} // namespace

implicit_ranking elaborate( const ranking_node& root, const signature& sig, const elaborate_options& opts,
                            const node_visitor& visit )
{
    std::vector< int > path;
    auto out = build( root, sig, opts, path, visit );
    if ( opts.swap_roles_at )
    {
        const ranking_node* at = &root;
        for ( int i : *opts.swap_roles_at )
        {
            if ( !at || i < 0 || static_cast< std::size_t >( i ) >= at->children.size() )
            {
                at = nullptr;
                break;
            }
            at = &at->children[ static_cast< std::size_t >( i ) ];
        }
        if ( !at || at->kind != ctor::bin )
            throw error( error_code::bad_hint_path,
                         "no bin leaf at " + path_string( *opts.swap_roles_at ) );
    }
    if ( opts.require_closed && !out.params.empty() )
        throw error( error_code::not_closed, "the root ranking has parameters " + names( out.params ) );
    return out;
}

} // namespace livrank
