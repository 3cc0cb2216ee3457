#pragma once

#include "livrank/problem.hpp"
#include "livrank/ranking.hpp"
#include "livrank/smt.hpp"
#include "livrank/structure.hpp"

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace livrank::testing
{

std::string benchmark_path( const std::string& name );
problem load_benchmark( const std::string& name );

// True when the configured solver answers (get-info :version).
bool solver_available();

struct cli_result
{
    int code = -1;
    std::string out;
};

// Runs the livrank binary with `args` (shell-quoted) and captures stdout.
cli_result run_cli( const std::vector< std::string >& args );

std::string read_text( const std::string& path );

// Fills every table of `symbols` (all symbols when empty) uniformly at random.
void randomize( finite_structure& s, const signature& sig, std::mt19937_64& rng,
                const std::vector< std::string >& symbols = {} );

// Every benchmark under benchmarks/, in a fixed order.
const std::vector< std::string >& all_benchmarks();

// Solver check of the universal closure of `body` over both ranking copies
// of `params`. Quantifier instantiation is heuristic, so a query the default
// settings give up on is retried with other settings; only Valid counts.
verdict_kind prove_over_copies( const expr& body, const std::vector< var >& params, const signature& sig );

// Rankings that, together, use all nine constructors: the benchmark
// rankings plus small ones over the toy signature for pw, lin and dom-lin.
struct named_ranking
{
    std::string name;
    problem source;
    ranking_node root;
};
std::vector< named_ranking > invariant_rankings();

// Failures of reduced => conserved, hinted and unhinted, at every node.
// `kinds` collects the constructors that were visited.
std::vector< std::string > reduced_implies_conserved_failures( const named_ranking& r, std::set< ctor >& kinds );

// Failures of hinted => unhinted at the node of each hint declaration of
// `p`, one hint at a time. `checked` counts the hint declarations.
std::vector< std::string > hinted_implies_unhinted_failures( const problem& p, int& checked );

// Exhaustive comparison of dom-perm with k = 0 and dom-pw on every pair of
// toy structures of size <= 2. Returns the number of disagreements.
std::uint64_t dom_perm_zero_disagreements( std::uint64_t& cases );

} // namespace livrank::testing
