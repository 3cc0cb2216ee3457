#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace livrank
{

// Which copy of the signature a symbol (or variable) occurrence belongs to.
// `plain` is the pre-state / base signature, `primed` the post-state copy of a
// transition, and `sub0`/`sub1` the lower/higher ranked copies used inside
// implicit rankings.
enum class tag : std::uint8_t
{
    plain,
    primed,
    sub0,
    sub1,
};

std::string_view tag_suffix( tag t );

struct sort_decl
{
    std::string name;
    bool finite = false;
};

enum class symbol_kind
{
    constant,
    function,
    relation,
};

struct symbol_decl
{
    std::string name;
    symbol_kind kind = symbol_kind::constant;
    std::vector< std::string > args;
    std::string result; // empty for relations
    bool is_mutable = false;

    [[nodiscard]] bool is_relation() const { return kind == symbol_kind::relation; }
};

class signature
{
    std::vector< sort_decl > _sorts;
    std::vector< symbol_decl > _symbols;
    std::unordered_map< std::string, std::size_t > _sort_index;
    std::unordered_map< std::string, std::size_t > _symbol_index;

public:
    // Both throw error(sort_error) on duplicates or references to undeclared sorts.
    void add_sort( sort_decl sort );
    void add_symbol( symbol_decl symbol );

    [[nodiscard]] const std::vector< sort_decl >& sorts() const { return _sorts; }
    [[nodiscard]] const std::vector< symbol_decl >& symbols() const { return _symbols; }

    [[nodiscard]] const sort_decl* find_sort( std::string_view name ) const;
    [[nodiscard]] const symbol_decl* find_symbol( std::string_view name ) const;
    [[nodiscard]] std::size_t sort_index( std::string_view name ) const;
    [[nodiscard]] std::size_t symbol_index( std::string_view name ) const;
};

// Variables are identified by name and tag; the sort travels along.
struct var
{
    std::string name;
    std::string sort;
    tag t = tag::plain;

    [[nodiscard]] var with_tag( tag nt ) const { return var{ name, sort, nt }; }

    friend bool operator==( const var& a, const var& b ) { return a.name == b.name && a.t == b.t; }
    friend bool operator<( const var& a, const var& b )
    {
        return a.name != b.name ? a.name < b.name : a.t < b.t;
    }
};

enum class op : std::uint8_t
{
    variable,
    app,
    ite,
    true_,
    false_,
    eq,
    not_,
    and_,
    or_,
    implies,
    iff,
    forall,
    exists,
};

// Immutable, shared term/formula tree. A default-constructed expr is `true`.
class expr
{
public:
    struct node;

    expr();
    explicit expr( std::shared_ptr< const node > n ) : _n{ std::move( n ) } {}

    [[nodiscard]] op kind() const;
    [[nodiscard]] const std::string& name() const;   // symbol name of an application
    [[nodiscard]] tag symbol_tag() const;             // tag of an application
    [[nodiscard]] bool is_mutable() const;            // application of a mutable symbol
    [[nodiscard]] const std::string& sort() const;    // empty for formulas
    [[nodiscard]] const var& variable() const;
    [[nodiscard]] const std::vector< var >& bound() const;
    [[nodiscard]] const std::vector< expr >& args() const;
    [[nodiscard]] const expr& arg( std::size_t i ) const { return args()[ i ]; }
    [[nodiscard]] const std::vector< var >& free() const; // sorted

    [[nodiscard]] bool is_term() const { return !sort().empty(); }
    [[nodiscard]] bool is_formula() const { return sort().empty(); }
    [[nodiscard]] bool is_true() const { return kind() == op::true_; }
    [[nodiscard]] bool is_false() const { return kind() == op::false_; }
    [[nodiscard]] const node* raw() const { return _n.get(); }

private:
    std::shared_ptr< const node > _n;
};

struct expr::node
{
    op kind = op::true_;
    std::string name;
    tag t = tag::plain;
    bool is_mutable = false;
    std::string sort;
    var v;
    std::vector< var > bound;
    std::vector< expr > args;
    std::vector< var > free_vars;
};

// Constructors. Boolean connectives absorb true/false and `not` removes double
// negation; nothing else is simplified.
expr mk_var( const var& v );
expr mk_app( const symbol_decl& symbol, tag t, std::vector< expr > args = {} );
expr mk_ite( expr cond, expr then_term, expr else_term );
expr mk_true();
expr mk_false();
expr mk_bool( bool value );
expr mk_eq( expr a, expr b );
expr mk_not( expr f );
expr mk_and( std::vector< expr > fs );
expr mk_and( expr a, expr b );
expr mk_or( std::vector< expr > fs );
expr mk_or( expr a, expr b );
expr mk_implies( expr a, expr b );
expr mk_iff( expr a, expr b );
expr mk_forall( std::vector< var > vars, expr body );
expr mk_exists( std::vector< var > vars, expr body );

// Tuple helpers: component-wise equality, and its negation.
expr mk_tuple_eq( const std::vector< expr >& a, const std::vector< expr >& b );
std::vector< expr > mk_vars( const std::vector< var >& vs );

using var_context = std::map< var, std::string >;

// Returns the sort of a term or "Bool" for a formula. Throws
// error(unsorted_symbol) / error(sort_mismatch).
std::string well_sorted( const expr& item, const signature& sig, const var_context& ctx = {} );

std::set< var > free_vars( const expr& f );

// Capture-avoiding simultaneous substitution. Bound variables that would
// capture a replacement term's variables are renamed to `name!N` with the
// smallest unused N. Throws error(sort_mismatch).
expr substitute( const expr& f, const std::map< var, expr >& m );

// Moves every mutable-symbol occurrence tagged `from` to `to` (and, with
// include_vars, every variable tagged `from`). Immutable symbols are never
// tagged. Throws error(tag_mismatch) if `to` already occurs, since that would
// merge two signature copies.
expr retag( const expr& f, tag from, tag to, bool include_vars );

// Tags carried by mutable symbol occurrences.
std::set< tag > symbol_tags( const expr& f );

// (name, tag) of every symbol application.
std::set< std::pair< std::string, tag > > symbols_of( const expr& f );

bool structurally_equal( const expr& a, const expr& b );
bool alpha_equivalent( const expr& a, const expr& b );
std::size_t expr_size( const expr& f );

// Variable and symbol names as printed: name plus the tag marker.
std::string tagged_name( std::string_view name, tag t );

// S-expression pretty printer (`'` for primed, `@0`/`@1` for ranking copies).
std::string to_string( const expr& f );

// SMT-LIB 2 rendering; names with markers are quoted when needed.
std::string to_smtlib( const expr& f );
std::string smt_symbol( std::string_view name, tag t );

} // namespace livrank
