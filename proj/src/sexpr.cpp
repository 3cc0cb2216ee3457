#include "livrank/sexpr.hpp"
#include "livrank/error.hpp"

#include <cctype>

namespace livrank
{

std::string_view to_string( error_code code )
{
    switch ( code )
    {
    case error_code::unsorted_symbol: return "UnsortedSymbol";
    case error_code::sort_mismatch: return "SortMismatch";
    case error_code::tag_mismatch: return "TagMismatch";
    case error_code::parse_error: return "ParseError";
    case error_code::sort_error: return "SortError";
    case error_code::unknown_constructor: return "UnknownConstructor";
    case error_code::bad_hint_path: return "BadHintPath";
    case error_code::free_var_escape: return "FreeVarEscape";
    case error_code::arity_mismatch: return "ArityMismatch";
    case error_code::param_mismatch: return "ParamMismatch";
    case error_code::empty_list: return "EmptyList";
    case error_code::not_a_param: return "NotAParam";
    case error_code::bad_k: return "BadK";
    case error_code::not_closed: return "NotClosed";
    case error_code::missing_assignment: return "MissingAssignment";
    case error_code::budget_exceeded: return "BudgetExceeded";
    case error_code::oracle_unsupported: return "OracleUnsupported";
    case error_code::solver_launch_failure: return "SolverLaunchFailure";
    case error_code::solver_protocol_error: return "SolverProtocolError";
    }
    return "Error";
}

std::string sexpr::where() const
{
    return std::to_string( line ) + ":" + std::to_string( column );
}

std::string sexpr::to_string() const
{
    if ( is_atom )
        return atom;
    std::string out = "(";
    for ( std::size_t i = 0; i < items.size(); ++i )
    {
        if ( i > 0 )
            out += ' ';
        out += items[ i ].to_string();
    }
    return out + ")";
}

namespace
{

class reader
{
    std::string_view _text;
    std::size_t _pos = 0;
    int _line = 1;
    int _column = 1;

    [[nodiscard]] bool done() const { return _pos >= _text.size(); }
    [[nodiscard]] char peek() const { return _text[ _pos ]; }

    void advance()
    {
        if ( _text[ _pos ] == '\n' )
        {
            ++_line;
            _column = 1;
        }
        else
            ++_column;
        ++_pos;
    }

    [[noreturn]] void fail( const std::string& what, int line, int column ) const
    {
        throw error( error_code::parse_error,
                     std::to_string( line ) + ":" + std::to_string( column ) + ": " + what );
    }

public:
    explicit reader( std::string_view text ) : _text{ text } {}

    void skip_blank()
    {
        while ( !done() )
        {
            const char c = peek();
            if ( c == ';' )
            {
                while ( !done() && peek() != '\n' )
                    advance();
            }
            else if ( std::isspace( static_cast< unsigned char >( c ) ) )
                advance();
            else
                break;
        }
    }

    [[nodiscard]] bool at_end()
    {
        skip_blank();
        return done();
    }

    sexpr read()
    {
        skip_blank();
        if ( done() )
            fail( "unexpected end of input", _line, _column );

        sexpr out;
        out.line = _line;
        out.column = _column;

        if ( peek() == ')' )
            fail( "unbalanced ')'", _line, _column );

        if ( peek() == '(' )
        {
            advance();
            while ( true )
            {
                skip_blank();
                if ( done() )
                    fail( "unterminated list opened here", out.line, out.column );
                if ( peek() == ')' )
                {
                    advance();
                    break;
                }
                out.items.push_back( read() );
            }
            return out;
        }

        out.is_atom = true;
        while ( !done() )
        {
            const char c = peek();
            if ( c == '(' || c == ')' || c == ';' || std::isspace( static_cast< unsigned char >( c ) ) )
                break;
            out.atom += c;
            advance();
        }
        return out;
    }
};

} // namespace

std::vector< sexpr > read_sexprs( std::string_view text )
{
    reader in{ text };
    std::vector< sexpr > out;
    while ( !in.at_end() )
        out.push_back( in.read() );
    return out;
}

} // namespace livrank
