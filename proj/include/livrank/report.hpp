#pragma once

#include "livrank/model_check.hpp"
#include "livrank/oracle.hpp"
#include "livrank/smt.hpp"

#include <optional>
#include <string>
#include <vector>

namespace livrank
{

std::string sha256_hex( std::string_view data );

// Everything a run decided, in a form that is byte-stable for fixed inputs,
// seed and solver version. Wall-clock times are deliberately left out.
struct run_report
{
    std::string file;
    std::string content_hash;
    std::string problem_name;
    std::string mode;
    std::string solver;
    std::vector< discharge_entry > obligations;
    std::vector< oracle_report > oracle;
    std::optional< liveness_result > liveness;
    std::vector< int > sizes;
    std::vector< std::string > diagnostics;
    std::string status;

    [[nodiscard]] std::string to_json() const;
};

} // namespace livrank
