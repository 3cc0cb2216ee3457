#include "livrank/fol.hpp"
#include "livrank/error.hpp"

#include <algorithm>
#include <functional>

namespace livrank
{

std::string_view tag_suffix( tag t )
{
    switch ( t )
    {
    case tag::plain: return "";
    case tag::primed: return "'";
    case tag::sub0: return "@0";
    case tag::sub1: return "@1";
    }
    return "";
}

// ---------------------------------------------------------------- signature

void signature::add_sort( sort_decl sort )
{
    if ( _sort_index.count( sort.name ) )
        throw error( error_code::sort_error, "duplicate sort '" + sort.name + "'" );
    _sort_index.emplace( sort.name, _sorts.size() );
    _sorts.push_back( std::move( sort ) );
}

void signature::add_symbol( symbol_decl symbol )
{
    if ( _symbol_index.count( symbol.name ) )
        throw error( error_code::sort_error, "duplicate symbol '" + symbol.name + "'" );
    auto check = [ & ]( const std::string& s ) {
        if ( !find_sort( s ) )
            throw error( error_code::sort_error, "symbol '" + symbol.name + "' uses undeclared sort '" + s + "'" );
    };
    for ( const auto& a : symbol.args )
        check( a );
    if ( !symbol.is_relation() )
        check( symbol.result );
    _symbol_index.emplace( symbol.name, _symbols.size() );
    _symbols.push_back( std::move( symbol ) );
}

const sort_decl* signature::find_sort( std::string_view name ) const
{
    auto it = _sort_index.find( std::string{ name } );
    return it == _sort_index.end() ? nullptr : &_sorts[ it->second ];
}

const symbol_decl* signature::find_symbol( std::string_view name ) const
{
    auto it = _symbol_index.find( std::string{ name } );
    return it == _symbol_index.end() ? nullptr : &_symbols[ it->second ];
}

std::size_t signature::sort_index( std::string_view name ) const
{
    auto it = _sort_index.find( std::string{ name } );
    if ( it == _sort_index.end() )
        throw error( error_code::sort_error, "undeclared sort '" + std::string{ name } + "'" );
    return it->second;
}

std::size_t signature::symbol_index( std::string_view name ) const
{
    auto it = _symbol_index.find( std::string{ name } );
    if ( it == _symbol_index.end() )
        throw error( error_code::unsorted_symbol, "undeclared symbol '" + std::string{ name } + "'" );
    return it->second;
}

// ---------------------------------------------------------------- expr access

namespace
{

const std::shared_ptr< const expr::node >& true_node()
{
    static const auto n = [] {
        auto p = std::make_shared< expr::node >();
        p->kind = op::true_;
        return std::shared_ptr< const expr::node >{ p };
    }();
    return n;
}

const std::shared_ptr< const expr::node >& false_node()
{
    static const auto n = [] {
        auto p = std::make_shared< expr::node >();
        p->kind = op::false_;
        return std::shared_ptr< const expr::node >{ p };
    }();
    return n;
}

std::vector< var > merge_free( const std::vector< expr >& args )
{
    std::vector< var > out;
    for ( const auto& a : args )
    {
        std::vector< var > merged;
        std::set_union( out.begin(), out.end(), a.free().begin(), a.free().end(), std::back_inserter( merged ) );
        out = std::move( merged );
    }
    return out;
}

expr make( expr::node n )
{
    if ( n.kind == op::variable )
        n.free_vars = { n.v };
    else if ( n.kind == op::forall || n.kind == op::exists )
    {
        n.free_vars = n.args[ 0 ].free();
        std::vector< var > bound = n.bound;
        std::sort( bound.begin(), bound.end() );
        std::vector< var > rest;
        std::set_difference( n.free_vars.begin(), n.free_vars.end(), bound.begin(), bound.end(),
                             std::back_inserter( rest ) );
        n.free_vars = std::move( rest );
    }
    else
        n.free_vars = merge_free( n.args );
    return expr{ std::make_shared< const expr::node >( std::move( n ) ) };
}

} // namespace

expr::expr() : _n{ true_node() } {}

op expr::kind() const { return _n->kind; }
const std::string& expr::name() const { return _n->name; }
tag expr::symbol_tag() const { return _n->t; }
bool expr::is_mutable() const { return _n->is_mutable; }
const std::string& expr::sort() const { return _n->sort; }
const var& expr::variable() const { return _n->v; }
const std::vector< var >& expr::bound() const { return _n->bound; }
const std::vector< expr >& expr::args() const { return _n->args; }
const std::vector< var >& expr::free() const { return _n->free_vars; }

// ---------------------------------------------------------------- builders

expr mk_var( const var& v )
{
    expr::node n;
    n.kind = op::variable;
    n.v = v;
    n.sort = v.sort;
    return make( std::move( n ) );
}

expr mk_app( const symbol_decl& symbol, tag t, std::vector< expr > args )
{
    expr::node n;
    n.kind = op::app;
    n.name = symbol.name;
    n.is_mutable = symbol.is_mutable;
    n.t = symbol.is_mutable ? t : tag::plain;
    n.sort = symbol.result;
    n.args = std::move( args );
    return make( std::move( n ) );
}

expr mk_ite( expr cond, expr then_term, expr else_term )
{
    if ( cond.is_true() )
        return then_term;
    if ( cond.is_false() )
        return else_term;
    expr::node n;
    n.kind = op::ite;
    n.sort = then_term.sort();
    n.args = { std::move( cond ), std::move( then_term ), std::move( else_term ) };
    return make( std::move( n ) );
}

expr mk_true() { return expr{ true_node() }; }
expr mk_false() { return expr{ false_node() }; }
expr mk_bool( bool value ) { return value ? mk_true() : mk_false(); }

expr mk_eq( expr a, expr b )
{
    if ( a.is_formula() )
        return mk_iff( std::move( a ), std::move( b ) );
    expr::node n;
    n.kind = op::eq;
    n.args = { std::move( a ), std::move( b ) };
    return make( std::move( n ) );
}

expr mk_not( expr f )
{
    if ( f.is_true() )
        return mk_false();
    if ( f.is_false() )
        return mk_true();
    if ( f.kind() == op::not_ )
        return f.arg( 0 );
    expr::node n;
    n.kind = op::not_;
    n.args = { std::move( f ) };
    return make( std::move( n ) );
}

expr mk_and( std::vector< expr > fs )
{
    std::vector< expr > kept;
    for ( auto& f : fs )
    {
        if ( f.is_false() )
            return mk_false();
        if ( !f.is_true() )
            kept.push_back( std::move( f ) );
    }
    if ( kept.empty() )
        return mk_true();
    if ( kept.size() == 1 )
        return kept.front();
    expr::node n;
    n.kind = op::and_;
    n.args = std::move( kept );
    return make( std::move( n ) );
}

expr mk_and( expr a, expr b ) { return mk_and( std::vector< expr >{ std::move( a ), std::move( b ) } ); }

expr mk_or( std::vector< expr > fs )
{
    std::vector< expr > kept;
    for ( auto& f : fs )
    {
        if ( f.is_true() )
            return mk_true();
        if ( !f.is_false() )
            kept.push_back( std::move( f ) );
    }
    if ( kept.empty() )
        return mk_false();
    if ( kept.size() == 1 )
        return kept.front();
    expr::node n;
    n.kind = op::or_;
    n.args = std::move( kept );
    return make( std::move( n ) );
}

expr mk_or( expr a, expr b ) { return mk_or( std::vector< expr >{ std::move( a ), std::move( b ) } ); }

expr mk_implies( expr a, expr b )
{
    if ( a.is_true() )
        return b;
    if ( a.is_false() || b.is_true() )
        return mk_true();
    if ( b.is_false() )
        return mk_not( std::move( a ) );
    expr::node n;
    n.kind = op::implies;
    n.args = { std::move( a ), std::move( b ) };
    return make( std::move( n ) );
}

expr mk_iff( expr a, expr b )
{
    if ( a.is_true() )
        return b;
    if ( b.is_true() )
        return a;
    if ( a.is_false() )
        return mk_not( std::move( b ) );
    if ( b.is_false() )
        return mk_not( std::move( a ) );
    expr::node n;
    n.kind = op::iff;
    n.args = { std::move( a ), std::move( b ) };
    return make( std::move( n ) );
}

namespace
{

expr mk_quant( op kind, std::vector< var > vars, expr body )
{
    if ( vars.empty() || body.is_true() || body.is_false() )
        return body;
    expr::node n;
    n.kind = kind;
    n.bound = std::move( vars );
    n.args = { std::move( body ) };
    return make( std::move( n ) );
}

} // namespace

expr mk_forall( std::vector< var > vars, expr body ) { return mk_quant( op::forall, std::move( vars ), std::move( body ) ); }
expr mk_exists( std::vector< var > vars, expr body ) { return mk_quant( op::exists, std::move( vars ), std::move( body ) ); }

expr mk_tuple_eq( const std::vector< expr >& a, const std::vector< expr >& b )
{
    std::vector< expr > parts;
    for ( std::size_t i = 0; i < a.size(); ++i )
        parts.push_back( mk_eq( a[ i ], b[ i ] ) );
    return mk_and( std::move( parts ) );
}

std::vector< expr > mk_vars( const std::vector< var >& vs )
{
    std::vector< expr > out;
    out.reserve( vs.size() );
    for ( const auto& v : vs )
        out.push_back( mk_var( v ) );
    return out;
}

// ---------------------------------------------------------------- rebuild helper

namespace
{

expr rebuild( const expr& f, std::vector< expr > args, std::vector< var > bound )
{
    switch ( f.kind() )
    {
    case op::app: {
        expr::node n = *f.raw();
        n.args = std::move( args );
        return make( std::move( n ) );
    }
    case op::ite: return mk_ite( args[ 0 ], args[ 1 ], args[ 2 ] );
    case op::eq: return mk_eq( args[ 0 ], args[ 1 ] );
    case op::not_: return mk_not( args[ 0 ] );
    case op::and_: return mk_and( std::move( args ) );
    case op::or_: return mk_or( std::move( args ) );
    case op::implies: return mk_implies( args[ 0 ], args[ 1 ] );
    case op::iff: return mk_iff( args[ 0 ], args[ 1 ] );
    case op::forall: return mk_forall( std::move( bound ), args[ 0 ] );
    case op::exists: return mk_exists( std::move( bound ), args[ 0 ] );
    default: return f;
    }
}

bool same_args( const std::vector< expr >& a, const std::vector< expr >& b )
{
    for ( std::size_t i = 0; i < a.size(); ++i )
        if ( a[ i ].raw() != b[ i ].raw() )
            return false;
    return true;
}

} // namespace

// ---------------------------------------------------------------- sort checking

namespace
{

std::string describe( const expr& e )
{
    auto s = to_string( e );
    if ( s.size() > 80 )
        s = s.substr( 0, 77 ) + "...";
    return s;
}

std::string check( const expr& e, const signature& sig, var_context& ctx )
{
    auto expect_formula = [ & ]( const expr& sub ) {
        auto s = check( sub, sig, ctx );
        if ( s != "Bool" )
            throw error( error_code::sort_mismatch, "expected formula, got term of sort " + s + " in " + describe( e ) );
    };

    switch ( e.kind() )
    {
    case op::true_:
    case op::false_: return "Bool";
    case op::variable: {
        auto it = ctx.find( e.variable() );
        if ( it == ctx.end() )
            throw error( error_code::unsorted_symbol, "unbound variable '" + tagged_name( e.variable().name, e.variable().t ) + "'" );
        if ( it->second != e.variable().sort )
            throw error( error_code::sort_mismatch, "variable '" + e.variable().name + "' expected " + it->second +
                                                        " but carries " + e.variable().sort );
        return it->second;
    }
    case op::app: {
        const auto* sym = sig.find_symbol( e.name() );
        if ( !sym )
            throw error( error_code::unsorted_symbol, "undeclared symbol '" + e.name() + "' in " + describe( e ) );
        if ( !sym->is_mutable && e.symbol_tag() != tag::plain )
            throw error( error_code::tag_mismatch, "immutable symbol '" + e.name() + "' carries a tag" );
        if ( sym->args.size() != e.args().size() )
            throw error( error_code::sort_mismatch, "'" + e.name() + "' expects " + std::to_string( sym->args.size() ) +
                                                        " arguments, got " + std::to_string( e.args().size() ) );
        for ( std::size_t i = 0; i < sym->args.size(); ++i )
        {
            auto s = check( e.arg( i ), sig, ctx );
            if ( s != sym->args[ i ] )
                throw error( error_code::sort_mismatch, "argument " + std::to_string( i + 1 ) + " of '" + e.name() +
                                                            "' expected " + sym->args[ i ] + ", got " + s );
        }
        return sym->is_relation() ? "Bool" : sym->result;
    }
    case op::ite: {
        expect_formula( e.arg( 0 ) );
        auto a = check( e.arg( 1 ), sig, ctx );
        auto b = check( e.arg( 2 ), sig, ctx );
        if ( a != b || a == "Bool" )
            throw error( error_code::sort_mismatch, "ite branches have sorts " + a + " and " + b );
        return a;
    }
    case op::eq: {
        auto a = check( e.arg( 0 ), sig, ctx );
        auto b = check( e.arg( 1 ), sig, ctx );
        if ( a != b )
            throw error( error_code::sort_mismatch, "equality between " + a + " and " + b + " in " + describe( e ) );
        return "Bool";
    }
    case op::not_:
    case op::and_:
    case op::or_:
    case op::implies:
    case op::iff:
        for ( const auto& a : e.args() )
            expect_formula( a );
        return "Bool";
    case op::forall:
    case op::exists: {
        var_context saved = ctx;
        for ( const auto& v : e.bound() )
        {
            if ( !sig.find_sort( v.sort ) )
                throw error( error_code::unsorted_symbol, "variable '" + v.name + "' has undeclared sort '" + v.sort + "'" );
            ctx[ v ] = v.sort;
        }
        expect_formula( e.arg( 0 ) );
        ctx = std::move( saved );
        return "Bool";
    }
    }
    return "Bool";
}

} // namespace

std::string well_sorted( const expr& item, const signature& sig, const var_context& ctx )
{
    var_context scope = ctx;
    return check( item, sig, scope );
}

std::set< var > free_vars( const expr& f ) { return { f.free().begin(), f.free().end() }; }

// ---------------------------------------------------------------- substitution

namespace
{

void collect_var_names( const expr& f, std::set< std::string >& out )
{
    if ( f.kind() == op::variable )
        out.insert( f.variable().name );
    for ( const auto& v : f.bound() )
        out.insert( v.name );
    for ( const auto& a : f.args() )
        collect_var_names( a, out );
}

bool mentions_any( const expr& f, const std::map< var, expr >& m )
{
    for ( const auto& v : f.free() )
        if ( m.count( v ) )
            return true;
    return false;
}

expr subst( const expr& f, const std::map< var, expr >& m )
{
    if ( !mentions_any( f, m ) )
        return f;

    if ( f.kind() == op::variable )
        return m.at( f.variable() );

    if ( f.kind() == op::forall || f.kind() == op::exists )
    {
        std::map< var, expr > inner;
        for ( const auto& [ v, t ] : m )
            if ( std::find( f.bound().begin(), f.bound().end(), v ) == f.bound().end() )
                inner.emplace( v, t );

        std::set< var > captured;
        for ( const auto& [ v, t ] : inner )
        {
            if ( std::find( f.arg( 0 ).free().begin(), f.arg( 0 ).free().end(), v ) == f.arg( 0 ).free().end() )
                continue;
            for ( const auto& fv : t.free() )
                captured.insert( fv );
        }

        std::vector< var > bound = f.bound();
        std::set< std::string > used;
        bool renamed = false;
        for ( auto& b : bound )
        {
            if ( !captured.count( b ) )
                continue;
            if ( !renamed )
            {
                collect_var_names( f, used );
                for ( const auto& c : captured )
                    used.insert( c.name );
                renamed = true;
            }
            std::string base = b.name.substr( 0, b.name.find( '!' ) );
            std::string fresh;
            for ( int n = 1;; ++n )
            {
                fresh = base + "!" + std::to_string( n );
                if ( !used.count( fresh ) )
                    break;
            }
            used.insert( fresh );
            var nb{ fresh, b.sort, b.t };
            inner[ b ] = mk_var( nb );
            b = nb;
        }

        if ( inner.empty() )
            return f;
        return rebuild( f, { subst( f.arg( 0 ), inner ) }, std::move( bound ) );
    }

    std::vector< expr > args;
    args.reserve( f.args().size() );
    for ( const auto& a : f.args() )
        args.push_back( subst( a, m ) );
    return rebuild( f, std::move( args ), f.bound() );
}

} // namespace

expr substitute( const expr& f, const std::map< var, expr >& m )
{
    for ( const auto& [ v, t ] : m )
        if ( t.sort() != v.sort )
            throw error( error_code::sort_mismatch, "cannot substitute " + to_string( t ) + " (" +
                                                        ( t.sort().empty() ? "Bool" : t.sort() ) + ") for " + v.name +
                                                        " (" + v.sort + ")" );
    return subst( f, m );
}

// ---------------------------------------------------------------- retagging

namespace
{

bool has_tag( const expr& f, tag t, bool include_vars )
{
    if ( f.kind() == op::app && f.is_mutable() && f.symbol_tag() == t )
        return true;
    if ( include_vars )
    {
        if ( f.kind() == op::variable && f.variable().t == t )
            return true;
        for ( const auto& b : f.bound() )
            if ( b.t == t )
                return true;
    }
    for ( const auto& a : f.args() )
        if ( has_tag( a, t, include_vars ) )
            return true;
    return false;
}

expr do_retag( const expr& f, tag from, tag to, bool include_vars )
{
    switch ( f.kind() )
    {
    case op::true_:
    case op::false_: return f;
    case op::variable:
        if ( include_vars && f.variable().t == from )
            return mk_var( f.variable().with_tag( to ) );
        return f;
    default: break;
    }

    std::vector< expr > args;
    args.reserve( f.args().size() );
    for ( const auto& a : f.args() )
        args.push_back( do_retag( a, from, to, include_vars ) );

    std::vector< var > bound = f.bound();
    bool bound_changed = false;
    if ( include_vars )
        for ( auto& b : bound )
            if ( b.t == from )
            {
                b.t = to;
                bound_changed = true;
            }

    if ( f.kind() == op::app )
    {
        const bool moves = f.is_mutable() && f.symbol_tag() == from;
        if ( !moves && same_args( args, f.args() ) )
            return f;
        expr::node n = *f.raw();
        n.args = std::move( args );
        if ( moves )
            n.t = to;
        return make( std::move( n ) );
    }

    if ( !bound_changed && same_args( args, f.args() ) )
        return f;
    return rebuild( f, std::move( args ), std::move( bound ) );
}

} // namespace

expr retag( const expr& f, tag from, tag to, bool include_vars )
{
    if ( from == to )
        return f;
    if ( has_tag( f, to, include_vars ) )
        throw error( error_code::tag_mismatch,
                     "target copy '" + std::string{ tag_suffix( to ) } + "' already occurs in " + describe( f ) );
    return do_retag( f, from, to, include_vars );
}

std::set< tag > symbol_tags( const expr& f )
{
    std::set< tag > out;
    std::function< void( const expr& ) > walk = [ & ]( const expr& e ) {
        if ( e.kind() == op::app && e.is_mutable() )
            out.insert( e.symbol_tag() );
        for ( const auto& a : e.args() )
            walk( a );
    };
    walk( f );
    return out;
}

std::set< std::pair< std::string, tag > > symbols_of( const expr& f )
{
    std::set< std::pair< std::string, tag > > out;
    std::function< void( const expr& ) > walk = [ & ]( const expr& e ) {
        if ( e.kind() == op::app )
            out.emplace( e.name(), e.symbol_tag() );
        for ( const auto& a : e.args() )
            walk( a );
    };
    walk( f );
    return out;
}

// ---------------------------------------------------------------- equality

bool structurally_equal( const expr& a, const expr& b )
{
    if ( a.raw() == b.raw() )
        return true;
    if ( a.kind() != b.kind() || a.name() != b.name() || a.symbol_tag() != b.symbol_tag() || a.sort() != b.sort() ||
         a.args().size() != b.args().size() || a.bound().size() != b.bound().size() )
        return false;
    if ( a.kind() == op::variable && !( a.variable() == b.variable() ) )
        return false;
    for ( std::size_t i = 0; i < a.bound().size(); ++i )
        if ( !( a.bound()[ i ] == b.bound()[ i ] ) || a.bound()[ i ].sort != b.bound()[ i ].sort )
            return false;
    for ( std::size_t i = 0; i < a.args().size(); ++i )
        if ( !structurally_equal( a.arg( i ), b.arg( i ) ) )
            return false;
    return true;
}

namespace
{

using binding = std::vector< std::pair< var, var > >;

bool alpha_eq( const expr& a, const expr& b, binding& env )
{
    if ( a.kind() != b.kind() || a.args().size() != b.args().size() )
        return false;
    switch ( a.kind() )
    {
    case op::variable: {
        for ( auto it = env.rbegin(); it != env.rend(); ++it )
        {
            bool la = it->first == a.variable();
            bool lb = it->second == b.variable();
            if ( la || lb )
                return la && lb;
        }
        return a.variable() == b.variable();
    }
    case op::app:
        if ( a.name() != b.name() || a.symbol_tag() != b.symbol_tag() )
            return false;
        break;
    case op::forall:
    case op::exists: {
        if ( a.bound().size() != b.bound().size() )
            return false;
        for ( std::size_t i = 0; i < a.bound().size(); ++i )
        {
            if ( a.bound()[ i ].sort != b.bound()[ i ].sort )
                return false;
            env.emplace_back( a.bound()[ i ], b.bound()[ i ] );
        }
        bool ok = alpha_eq( a.arg( 0 ), b.arg( 0 ), env );
        env.resize( env.size() - a.bound().size() );
        return ok;
    }
    default: break;
    }
    for ( std::size_t i = 0; i < a.args().size(); ++i )
        if ( !alpha_eq( a.arg( i ), b.arg( i ), env ) )
            return false;
    return true;
}

} // namespace

bool alpha_equivalent( const expr& a, const expr& b )
{
    binding env;
    return alpha_eq( a, b, env );
}

std::size_t expr_size( const expr& f )
{
    std::size_t n = 1;
    for ( const auto& a : f.args() )
        n += expr_size( a );
    return n;
}

// ---------------------------------------------------------------- printing

std::string tagged_name( std::string_view name, tag t )
{
    return std::string{ name } + std::string{ tag_suffix( t ) };
}

std::string smt_symbol( std::string_view name, tag t )
{
    auto s = tagged_name( name, t );
    return t == tag::primed ? "|" + s + "|" : s;
}

namespace
{

void print( const expr& f, std::string& out, bool smt )
{
    auto name_of = [ & ]( std::string_view n, tag t ) { return smt ? smt_symbol( n, t ) : tagged_name( n, t ); };
    auto list = [ & ]( std::string_view head ) {
        out += '(';
        out += head;
        for ( const auto& a : f.args() )
        {
            out += ' ';
            print( a, out, smt );
        }
        out += ')';
    };

    switch ( f.kind() )
    {
    case op::true_: out += "true"; return;
    case op::false_: out += "false"; return;
    case op::variable: out += name_of( f.variable().name, f.variable().t ); return;
    case op::app:
        if ( f.args().empty() )
            out += name_of( f.name(), f.symbol_tag() );
        else
            list( name_of( f.name(), f.symbol_tag() ) );
        return;
    case op::ite: list( "ite" ); return;
    case op::eq: list( "=" ); return;
    case op::iff: list( "=" ); return;
    case op::not_: list( "not" ); return;
    case op::and_: list( "and" ); return;
    case op::or_: list( "or" ); return;
    case op::implies: list( "=>" ); return;
    case op::forall:
    case op::exists:
        out += f.kind() == op::forall ? "(forall (" : "(exists (";
        for ( std::size_t i = 0; i < f.bound().size(); ++i )
        {
            if ( i > 0 )
                out += ' ';
            out += "(" + name_of( f.bound()[ i ].name, f.bound()[ i ].t ) + " " + f.bound()[ i ].sort + ")";
        }
        out += ") ";
        print( f.arg( 0 ), out, smt );
        out += ')';
        return;
    }
}

} // namespace

std::string to_string( const expr& f )
{
    std::string out;
    print( f, out, false );
    return out;
}

std::string to_smtlib( const expr& f )
{
    std::string out;
    print( f, out, true );
    return out;
}

} // namespace livrank
