#pragma once

#include "livrank/problem.hpp"
#include "livrank/structure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace livrank
{

// An explicit finite transition graph with state-based fairness sets.
struct explicit_system
{
    std::vector< std::vector< std::size_t > > succ;
    std::vector< bool > initial;
    std::vector< bool > p;
    std::vector< bool > q;
    std::vector< std::vector< bool > > fairness; // each set must be visited infinitely often
};

// stem leads from an initial state to cycle[0]; the last cycle state steps
// back to cycle[0].
struct lasso
{
    std::vector< std::size_t > stem;
    std::vector< std::size_t > cycle;
};

struct graph_verdict
{
    bool holds = true;
    std::optional< lasso > counterexample;
    // Longest run of transitions from a reachable p-state until q holds;
    // -1 when a reachable cycle avoids q (only possible when it is unfair).
    std::int64_t max_steps = 0;
};

// Checks (all fairness sets visited infinitely often) -> always (p -> eventually q)
// by searching strongly connected components of the reachable q-free part.
graph_verdict check_explicit( const explicit_system& sys );

struct lasso_trace
{
    std::string scaffold;            // immutable symbols of the violating run
    std::vector< std::string > stem; // one description per state
    std::vector< std::string > cycle;
};

struct liveness_result
{
    bool holds = true;
    std::int64_t max_steps = 0; // maximum over scaffolds, -1 if unbounded anywhere
    std::uint64_t scaffolds = 0;
    std::uint64_t states = 0;    // reachable states summed over scaffolds
    std::uint64_t transitions = 0;
    std::optional< lasso_trace > trace;
};

// Explicit-state check of the liveness property of `p` at fixed domain sizes.
// Immutable symbols range over every scaffold satisfying the immutable-only
// axioms; the state graph of each scaffold is built over all mutable
// valuations satisfying the axioms. Parameterized fairness is instantiated
// for every tuple. Throws error(budget_exceeded) when one scaffold has more
// than opts.budget candidate states.
liveness_result model_check_liveness( const problem& p, const std::vector< int >& sizes,
                                      const enumeration_options& opts = {} );

} // namespace livrank
