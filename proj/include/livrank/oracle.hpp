#pragma once

#include "livrank/ranking.hpp"
#include "livrank/structure.hpp"
#include "livrank/vcgen.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace livrank
{

struct height_value
{
    std::uint64_t value = 0;
    std::uint64_t bound = 0;
};

// Arithmetic reading of a constructor tree on one finite structure:
// indicator, position, sums, weighted sums and offsets, all bounded by a
// function of the domain sizes. Construction rejects trees outside the
// supported fragment (multi-term pos, multi-variable dom-lex/dom-lin) with
// error(oracle_unsupported); evaluation raises the same error when an order
// is not a strict total order on the structure at hand.
class height_function
{
public:
    height_function( const ranking_node& root, const signature& sig );
    ~height_function();
    height_function( height_function&& ) noexcept;

    // Parameters in the order of node_params(root).
    [[nodiscard]] const std::vector< var >& params() const;

    height_value operator()( const finite_structure& s, const std::vector< int >& param_values ) const;
    height_value operator()( const finite_structure& s, const assignment& v ) const;

private:
    struct impl;
    std::unique_ptr< impl > _impl;
};

// Rejects trees the height function cannot interpret.
void check_oracle_support( const ranking_node& root );

struct oracle_witness
{
    std::string description; // printable structures and assignments
};

struct oracle_report
{
    std::string kind;    // ranking-soundness | premise
    std::string subject; // ranking path or obligation name
    std::vector< int > sizes;
    std::uint64_t seed = 0;
    bool exhaustive = true;
    std::uint64_t cases = 0;
    std::uint64_t skipped = 0; // orders that are not strict total orders
    std::uint64_t violations = 0;
    std::vector< std::string > flags; // e.g. sorts not declared finite
    std::optional< oracle_witness > witness;

    [[nodiscard]] std::string json_line() const;
};

struct oracle_options
{
    enumeration_options enumeration;
};

// Empirical check of the ranking conditions with heights as the ranking
// function: on every pair of structures over a shared domain and every pair
// of parameter assignments, the reduced formula must imply a strict height
// decrease, the conserved formula a non-increase, and reduced must imply
// conserved. Hints are ignored (the unhinted formulas are checked).
oracle_report check_ranking_soundness( const ranking_node& root, const signature& sig, const std::vector< int >& sizes,
                                       const oracle_options& opts = {} );

// Same check for formulas built elsewhere (for instance a mutated
// elaboration of `heights`), measured with the heights of `heights`.
oracle_report check_ranking_soundness( const implicit_ranking& r, const ranking_node& heights, const signature& sig,
                                       const std::vector< int >& sizes, const oracle_options& opts = {} );

// Evaluates an obligation on two-state structures (pre, post) sharing
// immutable symbols and reports the first falsifying pair.
oracle_report bounded_premise_check( const proof_obligation& ob, const signature& sig, const std::vector< int >& sizes,
                                     const oracle_options& opts = {} );

// Domain sizes: every sort gets n unless capped in `caps` (by sort name).
std::vector< int > uniform_sizes( const signature& sig, int n, const std::map< std::string, int >& caps = {} );

} // namespace livrank
