#include "livrank/smt.hpp"
#include "livrank/error.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace livrank
{

std::string solver_config::default_solver_path()
{
    const char* env = std::getenv( "LIVRANK_SOLVER" );
    return env && *env ? std::string{ env } : std::string{ "z3" };
}

std::string_view to_string( verdict_kind k )
{
    switch ( k )
    {
    case verdict_kind::valid: return "Valid";
    case verdict_kind::counter_model: return "CounterModel";
    case verdict_kind::unknown: return "Unknown";
    }
    return "Unknown";
}

namespace
{

std::string sort_list( const std::vector< std::string >& sorts )
{
    std::string out = "(";
    for ( std::size_t i = 0; i < sorts.size(); ++i )
        out += ( i ? " " : "" ) + sorts[ i ];
    return out + ")";
}

std::string declaration( const symbol_decl& s, tag t )
{
    return "(declare-fun " + smt_symbol( s.name, t ) + " " + sort_list( s.args ) + " "
           + ( s.is_relation() ? std::string{ "Bool" } : s.result ) + ")\n";
}

using clock_type = std::chrono::steady_clock;

// A solver child process talking over two pipes. Destruction kills and
// reaps the child if it is still running.
class solver_process
{
    pid_t _pid = -1;
    int _in = -1;
    int _out = -1;
    std::string _buffer;
    clock_type::time_point _deadline;

public:
    solver_process( const solver_config& cfg, clock_type::time_point deadline ) : _deadline{ deadline }
    {
        static std::once_flag ignore_sigpipe;
        // A solver that dies mid-write must surface as an error, not kill us.
        std::call_once( ignore_sigpipe, [] { std::signal( SIGPIPE, SIG_IGN ); } );

        int to_child[ 2 ];
        int from_child[ 2 ];
        if ( pipe2( to_child, O_CLOEXEC ) != 0 )
            throw error( error_code::solver_launch_failure, std::strerror( errno ) );
        if ( pipe2( from_child, O_CLOEXEC ) != 0 )
        {
            close( to_child[ 0 ] );
            close( to_child[ 1 ] );
            throw error( error_code::solver_launch_failure, std::strerror( errno ) );
        }

        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init( &actions );
        posix_spawn_file_actions_adddup2( &actions, to_child[ 0 ], STDIN_FILENO );
        posix_spawn_file_actions_adddup2( &actions, from_child[ 1 ], STDOUT_FILENO );
        posix_spawn_file_actions_addopen( &actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0 );

        std::string path = cfg.solver_path;
        std::string flag = "-in";
        char* argv[] = { path.data(), flag.data(), nullptr };
        const int rc = posix_spawnp( &_pid, path.c_str(), &actions, nullptr, argv, environ );
        posix_spawn_file_actions_destroy( &actions );
        close( to_child[ 0 ] );
        close( from_child[ 1 ] );
        _in = to_child[ 1 ];
        _out = from_child[ 0 ];
        if ( rc != 0 )
        {
            _pid = -1;
            close_fds();
            throw error( error_code::solver_launch_failure, "cannot start '" + path + "': " + std::strerror( rc ) );
        }
        fcntl( _in, F_SETFL, fcntl( _in, F_GETFL ) | O_NONBLOCK );
        fcntl( _out, F_SETFL, fcntl( _out, F_GETFL ) | O_NONBLOCK );
    }

    solver_process( const solver_process& ) = delete;
    solver_process& operator=( const solver_process& ) = delete;

    ~solver_process()
    {
        close_fds();
        if ( _pid > 0 )
        {
            kill( _pid, SIGKILL );
            int status = 0;
            while ( waitpid( _pid, &status, 0 ) < 0 && errno == EINTR )
            {
            }
        }
    }

    // False on deadline expiry.
    bool send( std::string_view text )
    {
        while ( !text.empty() )
        {
            pollfd fds[ 2 ] = { { _in, POLLOUT, 0 }, { _out, POLLIN, 0 } };
            if ( !wait_on( fds, 2 ) )
                return false;
            if ( fds[ 1 ].revents & ( POLLIN | POLLHUP ) )
                drain();
            if ( fds[ 0 ].revents & ( POLLERR | POLLHUP ) )
                throw error( error_code::solver_protocol_error, "solver closed its input" );
            if ( fds[ 0 ].revents & POLLOUT )
            {
                const ssize_t n = write( _in, text.data(), text.size() );
                if ( n < 0 && errno != EAGAIN && errno != EINTR )
                    throw error( error_code::solver_protocol_error, std::strerror( errno ) );
                if ( n > 0 )
                    text.remove_prefix( static_cast< std::size_t >( n ) );
            }
        }
        return true;
    }

    // Next non-empty line, or nullopt on deadline expiry.
    std::optional< std::string > read_line()
    {
        for ( ;; )
        {
            const auto nl = _buffer.find( '\n' );
            if ( nl != std::string::npos )
            {
                std::string line = _buffer.substr( 0, nl );
                _buffer.erase( 0, nl + 1 );
                while ( !line.empty() && ( line.back() == '\r' || line.back() == ' ' ) )
                    line.pop_back();
                if ( !line.empty() )
                    return line;
                continue;
            }
            if ( !fill() )
                return std::nullopt;
        }
    }

    // One balanced s-expression, or nullopt on deadline expiry.
    std::optional< std::string > read_sexpr()
    {
        for ( ;; )
        {
            int depth = 0;
            bool seen = false;
            bool in_string = false;
            bool in_quote = false;
            for ( std::size_t i = 0; i < _buffer.size(); ++i )
            {
                const char c = _buffer[ i ];
                if ( in_string )
                    in_string = c != '"';
                else if ( in_quote )
                    in_quote = c != '|';
                else if ( c == '"' )
                    in_string = true;
                else if ( c == '|' )
                    in_quote = true;
                else if ( c == '(' )
                {
                    ++depth;
                    seen = true;
                }
                else if ( c == ')' && --depth == 0 && seen )
                {
                    std::string out = _buffer.substr( 0, i + 1 );
                    _buffer.erase( 0, i + 1 );
                    const auto first = out.find( '(' );
                    return out.substr( first );
                }
            }
            if ( !fill() )
                return std::nullopt;
        }
    }

    void finish()
    {
        try
        {
            send( "(exit)\n" );
        }
        catch ( const error& )
        {
        }
        close_fds();
        int status = 0;
        const auto until = clock_type::now() + std::chrono::seconds( 2 );
        while ( clock_type::now() < until )
        {
            if ( waitpid( _pid, &status, WNOHANG ) == _pid )
            {
                _pid = -1;
                return;
            }
            std::this_thread::sleep_for( std::chrono::milliseconds( 1 ) );
        }
    }

private:
    void close_fds()
    {
        if ( _in >= 0 )
            close( _in );
        if ( _out >= 0 )
            close( _out );
        _in = _out = -1;
    }

    bool wait_on( pollfd* fds, nfds_t n )
    {
        for ( ;; )
        {
            const auto left = std::chrono::duration_cast< std::chrono::milliseconds >( _deadline - clock_type::now() );
            if ( left.count() <= 0 )
                return false;
            const int rc = poll( fds, n, static_cast< int >( std::min< long long >( left.count(), 1000 ) ) );
            if ( rc > 0 )
                return true;
            if ( rc < 0 && errno != EINTR )
                throw error( error_code::solver_protocol_error, std::strerror( errno ) );
        }
    }

    void drain()
    {
        char chunk[ 4096 ];
        for ( ;; )
        {
            const ssize_t n = read( _out, chunk, sizeof chunk );
            if ( n > 0 )
            {
                _buffer.append( chunk, static_cast< std::size_t >( n ) );
                continue;
            }
            if ( n == 0 )
                throw error( error_code::solver_protocol_error,
                             "solver exited unexpectedly" + ( _buffer.empty() ? "" : ": " + _buffer ) );
            if ( errno == EINTR )
                continue;
            return;
        }
    }

    bool fill()
    {
        pollfd fds[ 1 ] = { { _out, POLLIN, 0 } };
        if ( !wait_on( fds, 1 ) )
            return false;
        drain();
        return true;
    }
};

double seconds_since( clock_type::time_point start )
{
    return std::chrono::duration< double >( clock_type::now() - start ).count();
}

} // namespace

std::string emit_query( const proof_obligation& ob, const signature& sig, const solver_config& cfg )
{
    std::ostringstream out;
    out << "; obligation " << ob.name << " (premise " << ob.premise << ")\n";
    out << "(set-option :produce-models true)\n";
    for ( const auto& o : cfg.options )
        out << "(set-option " << o << ")\n";
    out << "(set-logic " << cfg.logic << ")\n";
    for ( const auto& s : sig.sorts() )
        out << "(declare-sort " << s.name << " 0)\n";

    const auto used = symbols_of( ob.formula );
    for ( const auto& s : sig.symbols() )
    {
        out << declaration( s, tag::plain );
        if ( !s.is_mutable )
            continue;
        out << declaration( s, tag::primed );
        for ( tag t : { tag::sub0, tag::sub1 } )
            if ( used.count( { s.name, t } ) )
                out << declaration( s, t );
    }
    out << "(assert " << to_smtlib( premise_negation( ob ) ) << ")\n";
    out << "(check-sat)\n";
    out << "(get-model)\n";
    return out.str();
}

solver_verdict run_script( const std::string& script, const solver_config& cfg )
{
    if ( !( cfg.timeout > 0 ) )
        throw error( error_code::solver_launch_failure, "timeout must be positive" );

    const auto start = clock_type::now();
    const auto deadline = start + std::chrono::duration_cast< clock_type::duration >(
                                          std::chrono::duration< double >( cfg.timeout ) );

    std::string head = script;
    const auto get_model = head.rfind( "(get-model)" );
    if ( get_model != std::string::npos )
        head.erase( get_model );

    solver_verdict v;
    solver_process proc( cfg, deadline );
    auto timed_out = [ & ] {
        v.kind = verdict_kind::unknown;
        v.reason = "timeout";
        v.wall_time = seconds_since( start );
        return v;
    };

    if ( !proc.send( head ) )
        return timed_out();
    const auto status = proc.read_line();
    if ( !status )
        return timed_out();

    if ( *status == "unsat" )
        v.kind = verdict_kind::valid;
    else if ( *status == "sat" )
    {
        v.kind = verdict_kind::counter_model;
        if ( !proc.send( "(get-model)\n" ) )
            return timed_out();
        const auto model = proc.read_sexpr();
        if ( !model )
            return timed_out();
        v.model = *model;
    }
    else if ( *status == "unknown" )
    {
        v.kind = verdict_kind::unknown;
        v.reason = "incomplete";
        if ( proc.send( "(get-info :reason-unknown)\n" ) )
            if ( const auto why = proc.read_sexpr() )
                if ( why->find( "timeout" ) != std::string::npos || why->find( "canceled" ) != std::string::npos )
                    v.reason = "timeout";
    }
    else
        throw error( error_code::solver_protocol_error, "unexpected solver response: " + *status );

    proc.finish();
    v.wall_time = seconds_since( start );
    return v;
}

solver_verdict check( const proof_obligation& ob, const signature& sig, const solver_config& cfg )
{
    return run_script( emit_query( ob, sig, cfg ), cfg );
}

bool discharge_report::verified() const
{
    for ( const auto& e : entries )
        if ( !e.error.empty() || e.verdict.kind != verdict_kind::valid )
            return false;
    return true;
}

bool discharge_report::refuted() const
{
    for ( const auto& e : entries )
        if ( e.error.empty() && e.verdict.kind == verdict_kind::counter_model )
            return true;
    return false;
}

discharge_report discharge_all( const std::vector< proof_obligation >& obs, const signature& sig,
                                const solver_config& cfg, unsigned jobs )
{
    discharge_report report;
    report.entries.resize( obs.size() );
    std::atomic< std::size_t > next{ 0 };

    // Each worker writes only its own slots, so the entries need no lock.
    auto worker = [ & ] {
        for ( std::size_t i = next++; i < obs.size(); i = next++ )
        {
            auto& e = report.entries[ i ];
            e.obligation = obs[ i ];
            try
            {
                e.verdict = check( obs[ i ], sig, cfg );
            }
            catch ( const error& ex )
            {
                e.error = ex.what();
            }
        }
    };

    const unsigned n = std::max( 1u, std::min< unsigned >( jobs, static_cast< unsigned >( obs.size() ) ) );
    std::vector< std::thread > pool;
    for ( unsigned i = 1; i < n; ++i )
        pool.emplace_back( worker );
    worker();
    for ( auto& t : pool )
        t.join();
    return report;
}

std::string solver_identity( const solver_config& cfg )
{
    try
    {
        solver_process proc( cfg, clock_type::now() + std::chrono::seconds( 10 ) );
        if ( !proc.send( "(get-info :name)\n(get-info :version)\n" ) )
            return {};
        const auto name = proc.read_sexpr();
        const auto version = name ? proc.read_sexpr() : std::nullopt;
        if ( !version )
            return {};
        auto quoted = []( const std::string& s ) {
            const auto a = s.find( '"' );
            const auto b = s.rfind( '"' );
            return a == std::string::npos || b <= a ? s : s.substr( a + 1, b - a - 1 );
        };
        proc.finish();
        return quoted( *name ) + " " + quoted( *version );
    }
    catch ( const error& )
    {
        return {};
    }
}

} // namespace livrank
