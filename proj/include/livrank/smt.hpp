#pragma once

#include "livrank/fol.hpp"
#include "livrank/vcgen.hpp"

#include <string>
#include <vector>

namespace livrank
{

struct solver_config
{
    std::string solver_path = default_solver_path();
    double timeout = 60.0;   // seconds, > 0
    std::string logic = "UF";
    std::vector< std::string > options; // extra `(set-option ...)` bodies, e.g. ":smt.mbqi true"

    // $LIVRANK_SOLVER when set, otherwise `z3` from PATH.
    static std::string default_solver_path();
};

enum class verdict_kind
{
    valid,
    counter_model,
    unknown,
};

std::string_view to_string( verdict_kind k );

struct solver_verdict
{
    verdict_kind kind = verdict_kind::unknown;
    std::string reason; // timeout | incomplete | ... (unknown only)
    std::string model;  // verbatim (counter_model only)
    double wall_time = 0.0;
};

// Complete solver script: sorts, plain and primed symbol declarations (plus
// any ranking copies that occur), the negated obligation, check-sat and
// get-model. Output depends only on the arguments.
std::string emit_query( const proof_obligation& ob, const signature& sig, const solver_config& cfg );

// One solver process per call. Throws error(solver_launch_failure) /
// error(solver_protocol_error); the process is reaped on every path.
solver_verdict check( const proof_obligation& ob, const signature& sig, const solver_config& cfg );

// Runs an arbitrary script whose last command before get-model is
// check-sat. Exposed for tests that build their own queries.
solver_verdict run_script( const std::string& script, const solver_config& cfg );

struct discharge_entry
{
    proof_obligation obligation;
    solver_verdict verdict;
    std::string error; // non-empty when the solver could not be driven
};

struct discharge_report
{
    std::vector< discharge_entry > entries; // generation order
    [[nodiscard]] bool verified() const;
    [[nodiscard]] bool refuted() const;
};

discharge_report discharge_all( const std::vector< proof_obligation >& obs, const signature& sig,
                                const solver_config& cfg, unsigned jobs );

// "name version" as reported by the solver itself, or empty on failure.
std::string solver_identity( const solver_config& cfg );

} // namespace livrank
