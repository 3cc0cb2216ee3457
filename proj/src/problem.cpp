#include "livrank/problem.hpp"
#include "livrank/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace livrank
{

namespace
{

[[noreturn]] void fail( error_code code, const sexpr& at, const std::string& what )
{
    throw error( code, at.where() + ": " + what );
}

const std::set< std::string >& reserved_words()
{
    static const std::set< std::string > words{
            "and",   "or",       "not",     "=>",     "=",          "ite",       "forall",     "exists",
            "true",  "false",    "let",     "Bool",   "distinct",   "assert",    "check-sat",  "declare-fun",
            "declare-sort", "define-fun", "push", "pop", "iff",   "xor",       "par",        "_",
            "!",     "as",       "match",   "order",  "branch",     "tuple",     "path" };
    return words;
}

bool valid_identifier( const std::string& s )
{
    if ( s.empty() || !( std::isalpha( static_cast< unsigned char >( s[ 0 ] ) ) || s[ 0 ] == '_' ) )
        return false;
    for ( char c : s )
        if ( !( std::isalnum( static_cast< unsigned char >( c ) ) || c == '_' || c == '-' ) )
            return false;
    return !reserved_words().count( s );
}

std::string identifier( const sexpr& e, const char* what )
{
    if ( !e.is_atom || !valid_identifier( e.atom ) )
        fail( error_code::parse_error, e, std::string{ "expected " } + what + " name, got '" + e.to_string() + "'" );
    return e.atom;
}

std::string sort_name( const sexpr& e, const signature& sig )
{
    if ( !e.is_atom )
        fail( error_code::parse_error, e, "expected a sort name" );
    if ( !sig.find_sort( e.atom ) )
        fail( error_code::sort_error, e, "undeclared sort '" + e.atom + "'" );
    return e.atom;
}

std::vector< var > parse_binders( const sexpr& e, const signature& sig )
{
    if ( !e.is_list() )
        fail( error_code::parse_error, e, "expected a variable list ((x sort) ...)" );
    std::vector< var > out;
    for ( const auto& b : e.items )
    {
        if ( !b.is_list() || b.items.size() != 2 )
            fail( error_code::parse_error, b, "expected (name sort)" );
        std::string name = identifier( b.items[ 0 ], "variable" );
        if ( sig.find_symbol( name ) )
            fail( error_code::parse_error, b, "variable '" + name + "' shadows a symbol" );
        for ( const auto& v : out )
            if ( v.name == name )
                fail( error_code::parse_error, b, "variable '" + name + "' declared twice" );
        out.push_back( var{ name, sort_name( b.items[ 1 ], sig ), tag::plain } );
    }
    return out;
}

std::string sort_label( const expr& e ) { return e.is_formula() ? "Bool" : e.sort(); }

// Scope entries are looked up by their printed name, so a primed variable is
// found as "x'".
using scope_map = std::map< std::string, var >;

class expr_parser
{
    const signature& _sig;
    bool _allow_primes;

public:
    expr_parser( const signature& sig, bool allow_primes ) : _sig{ sig }, _allow_primes{ allow_primes } {}

    expr formula( const sexpr& e, const scope_map& scope )
    {
        expr f = parse( e, scope );
        if ( !f.is_formula() )
            fail( error_code::sort_mismatch, e, "expected a formula, got a term of sort " + f.sort() );
        return f;
    }

    expr term( const sexpr& e, const scope_map& scope )
    {
        expr t = parse( e, scope );
        if ( t.is_formula() )
            fail( error_code::sort_mismatch, e, "expected a term, got a formula" );
        return t;
    }

    expr parse( const sexpr& e, const scope_map& scope )
    {
        if ( e.is_atom )
            return atom( e, scope );
        if ( e.items.empty() )
            fail( error_code::parse_error, e, "empty expression" );
        const sexpr& head = e.items[ 0 ];
        if ( !head.is_atom )
            fail( error_code::parse_error, head, "expected an operator or symbol" );
        const std::string& h = head.atom;
        const std::size_t n = e.items.size() - 1;

        auto formulas = [ & ] {
            std::vector< expr > out;
            for ( std::size_t i = 1; i < e.items.size(); ++i )
                out.push_back( formula( e.items[ i ], scope ) );
            return out;
        };
        auto need = [ & ]( std::size_t k ) {
            if ( n != k )
                fail( error_code::parse_error, e, "'" + h + "' takes " + std::to_string( k ) + " arguments" );
        };

        if ( h == "and" )
            return mk_and( formulas() );
        if ( h == "or" )
            return mk_or( formulas() );
        if ( h == "not" )
        {
            need( 1 );
            return mk_not( formula( e.items[ 1 ], scope ) );
        }
        if ( h == "=>" )
        {
            need( 2 );
            auto fs = formulas();
            return mk_implies( fs[ 0 ], fs[ 1 ] );
        }
        if ( h == "iff" )
        {
            need( 2 );
            auto fs = formulas();
            return mk_iff( fs[ 0 ], fs[ 1 ] );
        }
        if ( h == "=" )
        {
            need( 2 );
            expr a = parse( e.items[ 1 ], scope );
            expr b = parse( e.items[ 2 ], scope );
            if ( sort_label( a ) != sort_label( b ) )
                fail( error_code::sort_mismatch, e,
                      "equality between " + sort_label( a ) + " and " + sort_label( b ) );
            return a.is_formula() ? mk_iff( a, b ) : mk_eq( a, b );
        }
        if ( h == "ite" )
        {
            need( 3 );
            expr c = formula( e.items[ 1 ], scope );
            expr a = parse( e.items[ 2 ], scope );
            expr b = parse( e.items[ 3 ], scope );
            if ( sort_label( a ) != sort_label( b ) )
                fail( error_code::sort_mismatch, e, "ite branches of sorts " + sort_label( a ) + " and " +
                                                        sort_label( b ) );
            if ( a.is_formula() )
                return mk_or( mk_and( c, a ), mk_and( mk_not( c ), b ) );
            return mk_ite( c, a, b );
        }
        if ( h == "forall" || h == "exists" )
        {
            need( 2 );
            auto bound = parse_binders( e.items[ 1 ], _sig );
            scope_map inner = scope;
            for ( const auto& v : bound )
                inner[ v.name ] = v;
            expr body = formula( e.items[ 2 ], inner );
            return h == "forall" ? mk_forall( bound, body ) : mk_exists( bound, body );
        }
        return application( head, e, scope );
    }

private:
    const symbol_decl& lookup( const sexpr& at, std::string name, tag& t )
    {
        t = tag::plain;
        if ( !_sig.find_symbol( name ) && name.size() > 1 && name.back() == '\'' )
        {
            name.pop_back();
            t = tag::primed;
        }
        const symbol_decl* sym = _sig.find_symbol( name );
        if ( !sym )
            fail( error_code::unsorted_symbol, at, "undeclared symbol or unbound variable '" + at.atom + "'" );
        if ( t == tag::primed )
        {
            if ( !_allow_primes )
                fail( error_code::parse_error, at, "primed symbol '" + at.atom + "' outside a transition" );
            if ( !sym->is_mutable )
                fail( error_code::tag_mismatch, at, "immutable symbol '" + name + "' cannot be primed" );
        }
        return *sym;
    }

    expr atom( const sexpr& e, const scope_map& scope )
    {
        if ( e.atom == "true" )
            return mk_true();
        if ( e.atom == "false" )
            return mk_false();
        auto it = scope.find( e.atom );
        if ( it != scope.end() )
            return mk_var( it->second );
        tag t;
        const symbol_decl& sym = lookup( e, e.atom, t );
        if ( !sym.args.empty() )
            fail( error_code::sort_mismatch, e, "'" + sym.name + "' expects " + std::to_string( sym.args.size() ) +
                                                    " arguments" );
        return mk_app( sym, t );
    }

    expr application( const sexpr& head, const sexpr& e, const scope_map& scope )
    {
        tag t;
        const symbol_decl& sym = lookup( head, head.atom, t );
        const std::size_t n = e.items.size() - 1;
        if ( n != sym.args.size() )
            fail( error_code::sort_mismatch, e, "'" + sym.name + "' expects " + std::to_string( sym.args.size() ) +
                                                    " arguments, got " + std::to_string( n ) );
        std::vector< expr > args;
        for ( std::size_t i = 0; i < n; ++i )
        {
            expr a = term( e.items[ i + 1 ], scope );
            if ( a.sort() != sym.args[ i ] )
                fail( error_code::sort_mismatch, e.items[ i + 1 ], "argument " + std::to_string( i + 1 ) + " of '" +
                                                                       sym.name + "' expects " + sym.args[ i ] +
                                                                       ", got " + a.sort() );
            args.push_back( std::move( a ) );
        }
        return mk_app( sym, t, std::move( args ) );
    }
};

scope_map scope_of( const std::vector< var >& vars )
{
    scope_map out;
    for ( const auto& v : vars )
        out[ tagged_name( v.name, v.t ) ] = v;
    return out;
}

// ---------------------------------------------------------------- rankings

order_formula parse_order( const sexpr& e, const signature& sig )
{
    if ( !e.is_list() || e.items.size() != 4 || !e.items[ 0 ].is_atom_equal( "order" ) )
        fail( error_code::parse_error, e, "expected (order ((y0 s)...) ((y1 s)...) formula)" );
    order_formula l;
    l.low = parse_binders( e.items[ 1 ], sig );
    l.high = parse_binders( e.items[ 2 ], sig );
    if ( l.low.size() != l.high.size() )
        fail( error_code::arity_mismatch, e, "order slots have different lengths" );
    for ( std::size_t i = 0; i < l.low.size(); ++i )
    {
        if ( l.low[ i ].sort != l.high[ i ].sort )
            fail( error_code::arity_mismatch, e, "order slots have different sorts" );
        for ( const auto& h : l.high )
            if ( h == l.low[ i ] )
                fail( error_code::parse_error, e, "order slots reuse the name '" + h.name + "'" );
    }
    std::vector< var > both = l.low;
    both.insert( both.end(), l.high.begin(), l.high.end() );
    l.body = expr_parser{ sig, false }.formula( e.items[ 3 ], scope_of( both ) );
    return l;
}

ranking_node parse_node( const sexpr& e, const signature& sig )
{
    if ( !e.is_list() || e.items.empty() || !e.items[ 0 ].is_atom )
        fail( error_code::parse_error, e, "expected a ranking expression" );
    const std::string& h = e.items[ 0 ].atom;
    const auto& it = e.items;
    ranking_node node;

    auto arity = [ & ]( std::size_t k ) {
        if ( it.size() != k + 1 )
            fail( error_code::parse_error, e, "'" + h + "' takes " + std::to_string( k ) + " arguments" );
    };

    if ( h == "bin" )
    {
        arity( 2 );
        node.kind = ctor::bin;
        node.vars = parse_binders( it[ 2 ], sig );
        node.formula = expr_parser{ sig, false }.formula( it[ 1 ], scope_of( node.vars ) );
    }
    else if ( h == "pos" )
    {
        arity( 3 );
        node.kind = ctor::pos;
        node.vars = parse_binders( it[ 3 ], sig );
        node.order = parse_order( it[ 2 ], sig );
        if ( !it[ 1 ].is_list() )
            fail( error_code::parse_error, it[ 1 ], "expected a term list (t ...)" );
        for ( const auto& t : it[ 1 ].items )
            node.terms.push_back( expr_parser{ sig, false }.term( t, scope_of( node.vars ) ) );
    }
    else if ( h == "pw" || h == "lex" )
    {
        node.kind = h == "pw" ? ctor::pw : ctor::lex;
        for ( std::size_t i = 1; i < it.size(); ++i )
            node.children.push_back( parse_node( it[ i ], sig ) );
    }
    else if ( h == "lin" )
    {
        node.kind = ctor::lin;
        for ( std::size_t i = 1; i < it.size(); ++i )
        {
            const auto& b = it[ i ];
            if ( !b.is_list() || b.items.size() != 3 || !b.items[ 0 ].is_atom_equal( "branch" ) )
                fail( error_code::parse_error, b, "expected (branch guard ranking)" );
            node.children.push_back( parse_node( b.items[ 2 ], sig ) );
            node.guards.push_back(
                    expr_parser{ sig, false }.formula( b.items[ 1 ], scope_of( node_params( node.children.back() ) ) ) );
        }
    }
    else if ( h == "dom-pw" )
    {
        arity( 2 );
        node.kind = ctor::dom_pw;
        node.vars = parse_binders( it[ 1 ], sig );
        node.children.push_back( parse_node( it[ 2 ], sig ) );
    }
    else if ( h == "dom-perm" )
    {
        if ( it.size() != 4 && !( it.size() == 5 && it[ 4 ].is_atom_equal( ":loose" ) ) )
            fail( error_code::parse_error, e, "expected (dom-perm k ((y s)...) ranking [:loose])" );
        node.kind = ctor::dom_perm;
        try
        {
            std::size_t used = 0;
            node.k = it[ 1 ].is_atom ? std::stoi( it[ 1 ].atom, &used ) : -1;
            if ( !it[ 1 ].is_atom || used != it[ 1 ].atom.size() )
                throw std::invalid_argument( "k" );
        }
        catch ( const std::exception& )
        {
            fail( error_code::bad_k, it[ 1 ], "dom-perm expects a natural number k" );
        }
        if ( node.k < 0 )
            fail( error_code::bad_k, it[ 1 ], "dom-perm expects a natural number k" );
        node.loose = it.size() == 5;
        node.vars = parse_binders( it[ 2 ], sig );
        node.children.push_back( parse_node( it[ 3 ], sig ) );
    }
    else if ( h == "dom-lex" )
    {
        arity( 3 );
        node.kind = ctor::dom_lex;
        node.order = parse_order( it[ 1 ], sig );
        node.vars = parse_binders( it[ 2 ], sig );
        node.children.push_back( parse_node( it[ 3 ], sig ) );
    }
    else if ( h == "dom-lin" )
    {
        arity( 4 );
        node.kind = ctor::dom_lin;
        node.order = parse_order( it[ 1 ], sig );
        node.vars = parse_binders( it[ 3 ], sig );
        node.children.push_back( parse_node( it[ 4 ], sig ) );
        node.formula = expr_parser{ sig, false }.formula( it[ 2 ], scope_of( node_params( node.children.back() ) ) );
    }
    else
        fail( error_code::unknown_constructor, e.items[ 0 ], "unknown ranking constructor '" + h + "'" );

    // Aggregated variables must be parameters of the inner ranking.
    if ( node.kind == ctor::dom_pw || node.kind == ctor::dom_perm || node.kind == ctor::dom_lex ||
         node.kind == ctor::dom_lin )
    {
        auto inner = node_params( node.children.front() );
        for ( const auto& y : node.vars )
        {
            auto p = std::find( inner.begin(), inner.end(), y );
            if ( p == inner.end() || p->sort != y.sort )
                fail( error_code::not_a_param, e, "'" + y.name + "' is not a parameter of the inner ranking" );
        }
    }
    return node;
}

// ---------------------------------------------------------------- printing

std::string binders( const std::vector< var >& vs )
{
    std::string out = "(";
    for ( std::size_t i = 0; i < vs.size(); ++i )
        out += ( i ? " (" : "(" ) + vs[ i ].name + " " + vs[ i ].sort + ")";
    return out + ")";
}

std::string order_text( const order_formula& l )
{
    return "(order " + binders( l.low ) + " " + binders( l.high ) + " " + to_string( l.body ) + ")";
}

void print_node( const ranking_node& n, std::string& out )
{
    switch ( n.kind )
    {
    case ctor::bin: out += "(bin " + to_string( n.formula ) + " " + binders( n.vars ) + ")"; return;
    case ctor::pos: {
        out += "(pos (";
        for ( std::size_t i = 0; i < n.terms.size(); ++i )
            out += ( i ? " " : "" ) + to_string( n.terms[ i ] );
        out += ") " + order_text( n.order ) + " " + binders( n.vars ) + ")";
        return;
    }
    case ctor::pw:
    case ctor::lex:
        out += n.kind == ctor::pw ? "(pw" : "(lex";
        for ( const auto& c : n.children )
        {
            out += " ";
            print_node( c, out );
        }
        out += ")";
        return;
    case ctor::lin:
        out += "(lin";
        for ( std::size_t i = 0; i < n.children.size(); ++i )
        {
            out += " (branch " + to_string( n.guards[ i ] ) + " ";
            print_node( n.children[ i ], out );
            out += ")";
        }
        out += ")";
        return;
    case ctor::dom_pw: out += "(dom-pw " + binders( n.vars ) + " "; break;
    case ctor::dom_perm: out += "(dom-perm " + std::to_string( n.k ) + " " + binders( n.vars ) + " "; break;
    case ctor::dom_lex: out += "(dom-lex " + order_text( n.order ) + " " + binders( n.vars ) + " "; break;
    case ctor::dom_lin:
        out += "(dom-lin " + order_text( n.order ) + " " + to_string( n.formula ) + " " + binders( n.vars ) + " ";
        break;
    }
    print_node( n.children.front(), out );
    if ( n.kind == ctor::dom_perm && n.loose )
        out += " :loose";
    out += ")";
}

const ranking_node* resolve( const ranking_node& root, const std::vector< int >& path )
{
    const ranking_node* n = &root;
    for ( int i : path )
    {
        if ( i < 0 || static_cast< std::size_t >( i ) >= n->children.size() )
            return nullptr;
        n = &n->children[ static_cast< std::size_t >( i ) ];
    }
    return n;
}

// Hint terms are written over the transition vocabulary: plain symbols are
// the pre-state (the higher ranked copy) and primed ones the post-state.
expr hint_to_ranking( const expr& t, const std::vector< var >& params )
{
    expr out = retag( retag( t, tag::plain, tag::sub1, false ), tag::primed, tag::sub0, false );
    std::map< var, expr > m;
    for ( const auto& p : params )
    {
        m.emplace( p, mk_var( p.with_tag( tag::sub1 ) ) );
        m.emplace( p.with_tag( tag::primed ), mk_var( p.with_tag( tag::sub0 ) ) );
    }
    return substitute( out, m );
}

expr hint_from_ranking( const expr& t, const std::vector< var >& params )
{
    expr out = retag( retag( t, tag::sub0, tag::primed, false ), tag::sub1, tag::plain, false );
    std::map< var, expr > m;
    for ( const auto& p : params )
    {
        m.emplace( p.with_tag( tag::sub1 ), mk_var( p ) );
        m.emplace( p.with_tag( tag::sub0 ), mk_var( p.with_tag( tag::primed ) ) );
    }
    return substitute( out, m );
}

symbol_decl parse_symbol( const sexpr& e, const signature& sig )
{
    const std::string& h = e.items[ 0 ].atom;
    symbol_decl s;
    s.is_mutable = true;
    std::size_t next = 2;
    s.name = identifier( e.items.size() > 1 ? e.items[ 1 ] : e, "symbol" );
    if ( sig.find_sort( s.name ) )
        fail( error_code::sort_error, e, "symbol '" + s.name + "' clashes with a sort" );

    auto arg_sorts = [ & ]( const sexpr& l ) {
        if ( !l.is_list() )
            fail( error_code::parse_error, l, "expected an argument sort list" );
        std::vector< std::string > out;
        for ( const auto& a : l.items )
            out.push_back( sort_name( a, sig ) );
        return out;
    };

    if ( h == "constant" )
    {
        if ( e.items.size() < 3 )
            fail( error_code::parse_error, e, "expected (constant name sort [:mutable|:immutable])" );
        s.kind = symbol_kind::constant;
        s.result = sort_name( e.items[ 2 ], sig );
        next = 3;
    }
    else if ( h == "function" )
    {
        if ( e.items.size() < 4 )
            fail( error_code::parse_error, e, "expected (function name (sorts) sort [flags])" );
        s.kind = symbol_kind::function;
        s.args = arg_sorts( e.items[ 2 ] );
        s.result = sort_name( e.items[ 3 ], sig );
        if ( s.args.empty() )
            s.kind = symbol_kind::constant;
        next = 4;
    }
    else
    {
        if ( e.items.size() < 3 )
            fail( error_code::parse_error, e, "expected (relation name (sorts) [flags])" );
        s.kind = symbol_kind::relation;
        s.args = arg_sorts( e.items[ 2 ] );
        next = 3;
    }
    for ( ; next < e.items.size(); ++next )
    {
        if ( e.items[ next ].is_atom_equal( ":mutable" ) )
            s.is_mutable = true;
        else if ( e.items[ next ].is_atom_equal( ":immutable" ) )
            s.is_mutable = false;
        else
            fail( error_code::parse_error, e.items[ next ], "unknown symbol flag '" + e.items[ next ].to_string() + "'" );
    }
    return s;
}

std::string symbol_text( const symbol_decl& s )
{
    std::string flag = s.is_mutable ? ":mutable" : ":immutable";
    auto list = [ & ] {
        std::string out = "(";
        for ( std::size_t i = 0; i < s.args.size(); ++i )
            out += ( i ? " " : "" ) + s.args[ i ];
        return out + ")";
    };
    switch ( s.kind )
    {
    case symbol_kind::constant: return "(constant " + s.name + " " + s.result + " " + flag + ")";
    case symbol_kind::function: return "(function " + s.name + " " + list() + " " + s.result + " " + flag + ")";
    case symbol_kind::relation: return "(relation " + s.name + " " + list() + " " + flag + ")";
    }
    return "";
}

bool same_vars( const std::vector< var >& a, const std::vector< var >& b )
{
    if ( a.size() != b.size() )
        return false;
    for ( std::size_t i = 0; i < a.size(); ++i )
        if ( !( a[ i ] == b[ i ] ) || a[ i ].sort != b[ i ].sort )
            return false;
    return true;
}

bool same_exprs( const std::vector< expr >& a, const std::vector< expr >& b )
{
    if ( a.size() != b.size() )
        return false;
    for ( std::size_t i = 0; i < a.size(); ++i )
        if ( !structurally_equal( a[ i ], b[ i ] ) )
            return false;
    return true;
}

bool same_node( const ranking_node& a, const ranking_node& b )
{
    if ( a.kind != b.kind || !same_vars( a.vars, b.vars ) || !structurally_equal( a.formula, b.formula ) ||
         !same_exprs( a.terms, b.terms ) || !same_vars( a.order.low, b.order.low ) ||
         !same_vars( a.order.high, b.order.high ) || !structurally_equal( a.order.body, b.order.body ) ||
         a.k != b.k || a.loose != b.loose || !same_exprs( a.guards, b.guards ) ||
         a.children.size() != b.children.size() || a.hints.size() != b.hints.size() )
        return false;
    for ( auto ia = a.hints.begin(), ib = b.hints.begin(); ia != a.hints.end(); ++ia, ++ib )
    {
        if ( ia->first != ib->first || ia->second.size() != ib->second.size() )
            return false;
        for ( std::size_t i = 0; i < ia->second.size(); ++i )
            if ( !same_exprs( ia->second[ i ], ib->second[ i ] ) )
                return false;
    }
    for ( std::size_t i = 0; i < a.children.size(); ++i )
        if ( !same_node( a.children[ i ], b.children[ i ] ) )
            return false;
    return true;
}

bool same_param_formulas( const std::vector< param_formula >& a, const std::vector< param_formula >& b )
{
    if ( a.size() != b.size() )
        return false;
    for ( std::size_t i = 0; i < a.size(); ++i )
        if ( a[ i ].name != b[ i ].name || !same_vars( a[ i ].params, b[ i ].params ) ||
             !structurally_equal( a[ i ].formula, b[ i ].formula ) )
            return false;
    return true;
}

} // namespace

// ---------------------------------------------------------------- public parsing API

expr parse_expr( const sexpr& e, const signature& sig, const std::vector< var >& scope, bool allow_primes )
{
    return expr_parser{ sig, allow_primes }.parse( e, scope_of( scope ) );
}

expr parse_expr( std::string_view text, const signature& sig, const std::vector< var >& scope, bool allow_primes )
{
    auto items = read_sexprs( text );
    if ( items.size() != 1 )
        throw error( error_code::parse_error, "expected exactly one expression" );
    return parse_expr( items.front(), sig, scope, allow_primes );
}

ranking_node parse_ranking( const sexpr& e, const signature& sig ) { return parse_node( e, sig ); }

problem parse_problem( std::string_view text )
{
    problem p;
    auto forms = read_sexprs( text );

    for ( const auto& f : forms )
        if ( !f.is_list() || f.items.empty() || !f.items[ 0 ].is_atom )
            fail( error_code::parse_error, f, "expected a top-level form (keyword ...)" );

    // Declarations first, so that the remaining forms may come in any order.
    for ( const auto& f : forms )
    {
        const std::string& h = f.items[ 0 ].atom;
        if ( h == "sort" )
        {
            if ( f.items.size() < 2 || f.items.size() > 3 ||
                 ( f.items.size() == 3 && !f.items[ 2 ].is_atom_equal( ":finite" ) ) )
                fail( error_code::parse_error, f, "expected (sort name [:finite])" );
            std::string name = identifier( f.items[ 1 ], "sort" );
            if ( p.sig.find_sort( name ) || p.sig.find_symbol( name ) )
                fail( error_code::sort_error, f, "duplicate name '" + name + "'" );
            p.sig.add_sort( sort_decl{ name, f.items.size() == 3 } );
        }
        else if ( h == "constant" || h == "function" || h == "relation" )
        {
            auto s = parse_symbol( f, p.sig );
            if ( p.sig.find_symbol( s.name ) )
                fail( error_code::sort_error, f, "duplicate symbol '" + s.name + "'" );
            p.sig.add_symbol( std::move( s ) );
        }
    }

    expr_parser state{ p.sig, false };
    expr_parser two_state{ p.sig, true };
    bool seen_init = false, seen_trans = false, seen_property = false, seen_rho = false, seen_trigger = false;
    std::vector< const sexpr* > helpful_forms, hint_forms;
    const sexpr* ranking_form = nullptr;

    auto once = [ & ]( bool& seen, const sexpr& f ) {
        if ( seen )
            fail( error_code::parse_error, f, "duplicate '" + f.items[ 0 ].atom + "' form" );
        seen = true;
    };
    auto single_formula = [ & ]( const sexpr& f, expr_parser& ep ) {
        if ( f.items.size() != 2 )
            fail( error_code::parse_error, f, "'" + f.items[ 0 ].atom + "' takes one formula" );
        return ep.formula( f.items[ 1 ], {} );
    };

    for ( const auto& f : forms )
    {
        const std::string& h = f.items[ 0 ].atom;
        if ( h == "sort" || h == "constant" || h == "function" || h == "relation" )
            continue;
        if ( h == "name" )
        {
            if ( f.items.size() < 2 || f.items.size() > 3 ||
                 ( f.items.size() == 3 && !f.items[ 2 ].is_atom_equal( ":slow" ) ) )
                fail( error_code::parse_error, f, "expected (name id [:slow])" );
            p.name = f.items[ 1 ].atom;
            p.slow = f.items.size() == 3;
        }
        else if ( h == "init" )
        {
            once( seen_init, f );
            p.init = single_formula( f, state );
        }
        else if ( h == "transition" )
        {
            once( seen_trans, f );
            p.trans = single_formula( f, two_state );
        }
        else if ( h == "axiom" )
            p.axioms.push_back( single_formula( f, state ) );
        else if ( h == "fairness" )
        {
            if ( f.items.size() != 4 )
                fail( error_code::parse_error, f, "expected (fairness name ((x s)...) formula)" );
            param_formula r;
            r.name = identifier( f.items[ 1 ], "fairness" );
            for ( const auto& other : p.fairness )
                if ( other.name == r.name )
                    fail( error_code::parse_error, f, "duplicate fairness '" + r.name + "'" );
            r.params = parse_binders( f.items[ 2 ], p.sig );
            r.formula = state.formula( f.items[ 3 ], scope_of( r.params ) );
            p.fairness.push_back( std::move( r ) );
        }
        else if ( h == "property" )
        {
            once( seen_property, f );
            bool has_p = false, has_q = false;
            for ( std::size_t i = 1; i < f.items.size(); i += 2 )
            {
                if ( i + 1 >= f.items.size() )
                    fail( error_code::parse_error, f, "property keyword without a formula" );
                if ( f.items[ i ].is_atom_equal( ":p" ) && !has_p )
                {
                    p.p = state.formula( f.items[ i + 1 ], {} );
                    has_p = true;
                }
                else if ( f.items[ i ].is_atom_equal( ":q" ) && !has_q )
                {
                    p.q = state.formula( f.items[ i + 1 ], {} );
                    has_q = true;
                }
                else
                    fail( error_code::parse_error, f.items[ i ], "expected a single :p and a single :q" );
            }
            if ( !has_q )
                fail( error_code::parse_error, f, "property needs :q" );
            p.default_p = !has_p;
        }
        else if ( h == "rho" )
        {
            once( seen_rho, f );
            p.rho = single_formula( f, state );
        }
        else if ( h == "trigger" )
        {
            once( seen_trigger, f );
            p.trigger = single_formula( f, state );
        }
        else if ( h == "helpful" )
            helpful_forms.push_back( &f );
        else if ( h == "ranking" )
        {
            if ( ranking_form )
                fail( error_code::parse_error, f, "duplicate 'ranking' form" );
            if ( f.items.size() != 2 )
                fail( error_code::parse_error, f, "expected (ranking expr)" );
            ranking_form = &f;
        }
        else if ( h == "hint" )
            hint_forms.push_back( &f );
        else
            fail( error_code::parse_error, f.items[ 0 ], "unknown form '" + h + "'" );
    }

    if ( !seen_trans )
        throw error( error_code::parse_error, "missing (transition ...)" );
    if ( !seen_property )
        throw error( error_code::parse_error, "missing (property :q ...)" );
    if ( p.default_p )
        p.p = p.init;
    if ( !seen_trigger )
    {
        p.default_trigger = true;
        p.trigger = mk_and( p.rho, mk_not( p.q ) );
    }

    if ( p.fairness.empty() )
    {
        p.default_fairness = true;
        p.fairness.push_back( param_formula{ "fair", {}, mk_true() } );
    }
    for ( const auto& r : p.fairness )
        p.helpful.push_back( param_formula{ r.name, r.params, mk_true() } );
    std::set< std::string > seen_helpful;
    for ( const sexpr* f : helpful_forms )
    {
        if ( f->items.size() != 4 )
            fail( error_code::parse_error, *f, "expected (helpful name ((x s)...) formula)" );
        std::string name = identifier( f->items[ 1 ], "fairness" );
        auto it = std::find_if( p.helpful.begin(), p.helpful.end(), [ & ]( const auto& h ) { return h.name == name; } );
        if ( it == p.helpful.end() )
            fail( error_code::parse_error, *f, "helpful formula for unknown fairness '" + name + "'" );
        if ( !seen_helpful.insert( name ).second )
            fail( error_code::parse_error, *f, "duplicate helpful formula for '" + name + "'" );
        it->params = parse_binders( f->items[ 2 ], p.sig );
        it->formula = state.formula( f->items[ 3 ], scope_of( it->params ) );
    }

    if ( ranking_form )
        p.ranking = parse_node( ranking_form->items[ 1 ], p.sig );

    for ( const sexpr* f : hint_forms )
    {
        const auto& items = f->items;
        if ( !p.ranking )
            fail( error_code::bad_hint_path, *f, "hint without a ranking" );
        if ( items.size() < 3 || !items[ 1 ].is_list() || items[ 1 ].items.empty() ||
             !items[ 1 ].items[ 0 ].is_atom_equal( "path" ) )
            fail( error_code::parse_error, *f, "expected (hint (path i ...) [:block name] (tuple ...))" );

        hint_decl decl;
        for ( std::size_t i = 1; i < items[ 1 ].items.size(); ++i )
        {
            const auto& a = items[ 1 ].items[ i ];
            if ( !a.is_atom || a.atom.empty() || !std::all_of( a.atom.begin(), a.atom.end(), ::isdigit ) )
                fail( error_code::bad_hint_path, a, "hint path entries are child indices" );
            decl.path.push_back( std::stoi( a.atom ) );
        }
        const ranking_node* node = resolve( *p.ranking, decl.path );
        if ( !node )
            fail( error_code::bad_hint_path, items[ 1 ], "hint path " + path_string( decl.path ) +
                                                             " leaves the ranking tree" );
        auto blocks = hint_blocks( node->kind );
        if ( blocks.empty() )
            fail( error_code::bad_hint_path, items[ 1 ], "hint path " + path_string( decl.path ) + " addresses a " +
                                                             std::string{ to_string( node->kind ) } +
                                                             " node, which has no existential block" );

        std::size_t next = 2;
        decl.block = blocks.front();
        if ( node->kind == ctor::dom_perm && node->k == 0 )
            decl.block = "witness";
        if ( items[ next ].is_atom_equal( ":block" ) )
        {
            if ( items.size() < next + 3 || !items[ next + 1 ].is_atom )
                fail( error_code::parse_error, *f, "expected :block name followed by tuples" );
            decl.block = items[ next + 1 ].atom;
            next += 2;
        }
        if ( items.size() != next + 1 || !items[ next ].is_list() )
            fail( error_code::parse_error, *f, "expected one list of hint tuples" );
        if ( std::find( blocks.begin(), blocks.end(), decl.block ) == blocks.end() )
            fail( error_code::bad_hint_path, *f, std::string{ to_string( node->kind ) } +
                                                     " has no existential block '" + decl.block + "'" );

        auto params = node_params( *node );
        std::vector< var > scope = params;
        for ( const auto& v : params )
            scope.push_back( v.with_tag( tag::primed ) );
        if ( decl.block == "star" )
            scope.insert( scope.end(), node->vars.begin(), node->vars.end() );
        auto sm = scope_of( scope );

        const std::size_t width = hint_tuple_sorts( *node, decl.block ).size();
        for ( const auto& t : items[ next ].items )
        {
            std::vector< const sexpr* > terms;
            if ( width == 1 )
                terms.push_back( t.is_list() && t.items.size() == 1 ? &t.items[ 0 ] : &t );
            else
            {
                if ( !t.is_list() || t.items.size() != width )
                    fail( error_code::sort_mismatch, t, "hint tuple must list " + std::to_string( width ) + " terms" );
                for ( const auto& x : t.items )
                    terms.push_back( &x );
            }
            std::vector< expr > tuple;
            for ( const sexpr* x : terms )
                tuple.push_back( hint_to_ranking( two_state.term( *x, sm ), params ) );
            decl.tuples.push_back( std::move( tuple ) );
        }
        try
        {
            apply_hints( *p.ranking, decl.path, decl.block, decl.tuples );
        }
        catch ( const error& e )
        {
            fail( e.code(), *f, e.detail() );
        }
        p.hints.push_back( std::move( decl ) );
    }
    return p;
}

problem load_problem( const std::filesystem::path& file )
{
    std::ifstream in( file, std::ios::binary );
    if ( !in )
        throw error( error_code::parse_error, "cannot read '" + file.string() + "'" );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_problem( buffer.str() );
}

std::string unparse( const problem& p )
{
    std::string out;
    auto line = [ & ]( const std::string& s ) { out += s + "\n"; };
    if ( !p.name.empty() )
        line( "(name " + p.name + ( p.slow ? " :slow)" : ")" ) );
    for ( const auto& s : p.sig.sorts() )
        line( "(sort " + s.name + ( s.finite ? " :finite)" : ")" ) );
    for ( const auto& s : p.sig.symbols() )
        line( symbol_text( s ) );
    line( "(init " + to_string( p.init ) + ")" );
    line( "(transition " + to_string( p.trans ) + ")" );
    for ( const auto& a : p.axioms )
        line( "(axiom " + to_string( a ) + ")" );
    if ( !p.default_fairness )
        for ( const auto& r : p.fairness )
            line( "(fairness " + r.name + " " + binders( r.params ) + " " + to_string( r.formula ) + ")" );
    line( "(property" + ( p.default_p ? std::string{} : " :p " + to_string( p.p ) ) + " :q " + to_string( p.q ) + ")" );
    line( "(rho " + to_string( p.rho ) + ")" );
    if ( !p.default_trigger )
        line( "(trigger " + to_string( p.trigger ) + ")" );
    for ( const auto& h : p.helpful )
        if ( !h.formula.is_true() )
            line( "(helpful " + h.name + " " + binders( h.params ) + " " + to_string( h.formula ) + ")" );
    if ( p.ranking )
    {
        // Print the bare tree; hints follow as separate forms.
        std::function< ranking_node( const ranking_node& ) > strip = [ & ]( const ranking_node& n ) {
            ranking_node c = n;
            c.hints.clear();
            for ( auto& k : c.children )
                k = strip( k );
            return c;
        };
        std::string r;
        print_node( strip( *p.ranking ), r );
        line( "(ranking " + r + ")" );
        for ( const auto& h : p.hints )
        {
            const ranking_node* node = resolve( *p.ranking, h.path );
            auto params = node ? node_params( *node ) : std::vector< var >{};
            std::string s = "(hint (path";
            for ( int i : h.path )
                s += " " + std::to_string( i );
            s += ") :block " + h.block + " (";
            for ( std::size_t i = 0; i < h.tuples.size(); ++i )
            {
                s += i ? " (" : "(";
                for ( std::size_t j = 0; j < h.tuples[ i ].size(); ++j )
                    s += ( j ? " " : "" ) + to_string( hint_from_ranking( h.tuples[ i ][ j ], params ) );
                s += ")";
            }
            line( s + "))" );
        }
    }
    return out;
}

bool same_problem( const problem& a, const problem& b )
{
    if ( a.name != b.name || a.slow != b.slow || a.sig.sorts().size() != b.sig.sorts().size() ||
         a.sig.symbols().size() != b.sig.symbols().size() )
        return false;
    for ( std::size_t i = 0; i < a.sig.sorts().size(); ++i )
        if ( a.sig.sorts()[ i ].name != b.sig.sorts()[ i ].name ||
             a.sig.sorts()[ i ].finite != b.sig.sorts()[ i ].finite )
            return false;
    for ( std::size_t i = 0; i < a.sig.symbols().size(); ++i )
    {
        const auto& x = a.sig.symbols()[ i ];
        const auto& y = b.sig.symbols()[ i ];
        if ( x.name != y.name || x.kind != y.kind || x.args != y.args || x.result != y.result ||
             x.is_mutable != y.is_mutable )
            return false;
    }
    if ( !structurally_equal( a.init, b.init ) || !structurally_equal( a.trans, b.trans ) ||
         !same_exprs( a.axioms, b.axioms ) || !same_param_formulas( a.fairness, b.fairness ) ||
         a.default_fairness != b.default_fairness || !structurally_equal( a.p, b.p ) ||
         !structurally_equal( a.q, b.q ) || a.default_p != b.default_p || !structurally_equal( a.rho, b.rho ) ||
         !structurally_equal( a.trigger, b.trigger ) || a.default_trigger != b.default_trigger ||
         !same_param_formulas( a.helpful, b.helpful ) || a.ranking.has_value() != b.ranking.has_value() )
        return false;
    if ( a.ranking && !same_node( *a.ranking, *b.ranking ) )
        return false;
    if ( a.hints.size() != b.hints.size() )
        return false;
    for ( std::size_t i = 0; i < a.hints.size(); ++i )
    {
        const auto& x = a.hints[ i ];
        const auto& y = b.hints[ i ];
        if ( x.path != y.path || x.block != y.block || x.tuples.size() != y.tuples.size() )
            return false;
        for ( std::size_t j = 0; j < x.tuples.size(); ++j )
            if ( !same_exprs( x.tuples[ j ], y.tuples[ j ] ) )
                return false;
    }
    return true;
}

// ---------------------------------------------------------------- validation

std::vector< diagnostic > validate_problem( const problem& p, bool strict_finite )
{
    std::vector< diagnostic > out;
    auto report = [ & ]( bool is_error, std::string message ) { out.push_back( { is_error, std::move( message ) } ); };

    auto closed = [ & ]( const expr& f, const std::string& what, bool two_state ) {
        if ( !f.free().empty() )
            report( true, what + " is not closed (free variable '" + f.free().front().name + "')" );
        if ( !two_state && symbol_tags( f ).count( tag::primed ) )
            report( true, what + " mentions post-state symbols" );
        auto tags = symbol_tags( f );
        if ( tags.count( tag::sub0 ) || tags.count( tag::sub1 ) )
            report( true, what + " mentions ranking copies" );
    };
    closed( p.init, "init", false );
    closed( p.trans, "transition", true );
    closed( p.p, "p", false );
    closed( p.q, "q", false );
    closed( p.rho, "rho", false );
    closed( p.trigger, "trigger", false );
    for ( std::size_t i = 0; i < p.axioms.size(); ++i )
        closed( p.axioms[ i ], "axiom " + std::to_string( i + 1 ), false );

    auto subset = [ & ]( const param_formula& f, const std::string& what ) {
        for ( const auto& v : f.formula.free() )
            if ( std::find( f.params.begin(), f.params.end(), v ) == f.params.end() )
                report( true, what + " '" + f.name + "' has free variable '" + v.name + "' outside its parameters" );
        if ( symbol_tags( f.formula ).count( tag::primed ) )
            report( true, what + " '" + f.name + "' mentions post-state symbols" );
    };
    for ( const auto& r : p.fairness )
        subset( r, "fairness" );
    if ( p.helpful.size() != p.fairness.size() )
        report( true, "helpful formulas do not match the fairness assumptions" );
    for ( std::size_t i = 0; i < p.helpful.size() && i < p.fairness.size(); ++i )
    {
        subset( p.helpful[ i ], "helpful formula" );
        if ( p.helpful[ i ].name != p.fairness[ i ].name || !same_vars( p.helpful[ i ].params, p.fairness[ i ].params ) )
            report( true, "helpful formula '" + p.helpful[ i ].name + "' has parameters " +
                                  binders( p.helpful[ i ].params ) + " but its fairness assumption has " +
                                  binders( p.fairness[ i ].params ) );
    }

    if ( !p.ranking )
    {
        report( true, "no ranking declared" );
        return out;
    }
    try
    {
        elaborate( *p.ranking, p.sig );
    }
    catch ( const error& e )
    {
        report( true, std::string{ "ranking: " } + e.what() );
    }

    std::function< void( const ranking_node&, std::vector< int >& ) > walk = [ & ]( const ranking_node& n,
                                                                                 std::vector< int >& path ) {
        std::vector< std::string > sorts;
        if ( n.kind == ctor::pos )
            for ( const auto& v : n.order.low )
                sorts.push_back( v.sort );
        if ( n.kind == ctor::dom_pw || n.kind == ctor::dom_perm || n.kind == ctor::dom_lex || n.kind == ctor::dom_lin )
            for ( const auto& v : n.vars )
                sorts.push_back( v.sort );
        std::set< std::string > seen;
        for ( const auto& s : sorts )
        {
            const auto* decl = p.sig.find_sort( s );
            if ( decl && !decl->finite && seen.insert( s ).second )
                report( strict_finite, "finite-domain constructor over non-finite sort '" + s + "' (" +
                                               std::string{ to_string( n.kind ) } + " at path " + path_string( path ) +
                                               ")" );
        }
        for ( std::size_t i = 0; i < n.children.size(); ++i )
        {
            path.push_back( static_cast< int >( i ) );
            walk( n.children[ i ], path );
            path.pop_back();
        }
    };
    std::vector< int > path;
    walk( *p.ranking, path );
    return out;
}

} // namespace livrank
