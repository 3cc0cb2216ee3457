#include "livrank/report.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <iomanip>
#include <sstream>

namespace livrank
{

std::string sha256_hex( std::string_view data )
{
    unsigned char digest[ EVP_MAX_MD_SIZE ];
    unsigned int len = 0;
    EVP_Digest( data.data(), data.size(), digest, &len, EVP_sha256(), nullptr );
    std::ostringstream out;
    for ( unsigned int i = 0; i < len; ++i )
        out << std::hex << std::setw( 2 ) << std::setfill( '0' ) << static_cast< int >( digest[ i ] );
    return out.str();
}

std::string run_report::to_json() const
{
    using json = nlohmann::ordered_json;
    json j;
    j[ "problem" ] = { { "file", file }, { "sha256", content_hash }, { "name", problem_name } };
    j[ "mode" ] = mode;
    if ( !solver.empty() )
        j[ "solver" ] = solver;
    if ( !sizes.empty() )
        j[ "sizes" ] = sizes;

    json obs = json::array();
    for ( const auto& e : obligations )
    {
        json o;
        o[ "name" ] = e.obligation.name;
        o[ "premise" ] = e.obligation.premise;
        if ( !e.error.empty() )
            o[ "error" ] = e.error;
        else
        {
            o[ "verdict" ] = std::string{ to_string( e.verdict.kind ) };
            if ( e.verdict.kind == verdict_kind::unknown )
                o[ "reason" ] = e.verdict.reason;
            if ( e.verdict.kind == verdict_kind::counter_model )
                o[ "model" ] = e.verdict.model;
        }
        obs.push_back( std::move( o ) );
    }
    if ( !obligations.empty() )
        j[ "obligations" ] = std::move( obs );

    if ( !oracle.empty() )
    {
        json rs = json::array();
        for ( const auto& r : oracle )
            rs.push_back( json::parse( r.json_line() ) );
        j[ "oracle" ] = std::move( rs );
    }

    if ( liveness )
    {
        json l;
        l[ "holds" ] = liveness->holds;
        l[ "max_steps" ] = liveness->max_steps;
        l[ "scaffolds" ] = liveness->scaffolds;
        l[ "states" ] = liveness->states;
        l[ "transitions" ] = liveness->transitions;
        if ( liveness->trace )
            l[ "lasso" ] = { { "scaffold", liveness->trace->scaffold },
                             { "stem", liveness->trace->stem },
                             { "cycle", liveness->trace->cycle } };
        j[ "liveness" ] = std::move( l );
    }
    if ( !diagnostics.empty() )
        j[ "diagnostics" ] = diagnostics;
    j[ "status" ] = status;
    return j.dump( 2 ) + "\n";
}

} // namespace livrank
