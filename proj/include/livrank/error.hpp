#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace livrank
{

enum class error_code
{
    unsorted_symbol,
    sort_mismatch,
    tag_mismatch,
    parse_error,
    sort_error,
    unknown_constructor,
    bad_hint_path,
    free_var_escape,
    arity_mismatch,
    param_mismatch,
    empty_list,
    not_a_param,
    bad_k,
    not_closed,
    missing_assignment,
    budget_exceeded,
    oracle_unsupported,
    solver_launch_failure,
    solver_protocol_error,
};

std::string_view to_string( error_code code );

// Every failure surfaced by the library carries one of the codes above so
// that callers (and tests) can dispatch on the kind of problem.
class error : public std::runtime_error
{
    error_code _code;
    std::string _detail;

public:
    error( error_code code, const std::string& message )
            : std::runtime_error( std::string{ to_string( code ) } + ": " + message ), _code{ code }, _detail{ message }
    {
    }

    [[nodiscard]] error_code code() const { return _code; }
    [[nodiscard]] const std::string& detail() const { return _detail; }
};

} // namespace livrank
