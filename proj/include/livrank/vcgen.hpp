#pragma once

#include "livrank/fol.hpp"
#include "livrank/problem.hpp"
#include "livrank/ranking.hpp"

#include <string>
#include <vector>

namespace livrank
{

// A closed formula over the plain and primed signature that must be valid.
struct proof_obligation
{
    std::string name;  // init, consec, trigger, stability, conserved, helpful-exists, psi-stability@r, reduced@r
    int premise = 0;   // 1..8
    expr formula;
};

// Ranking formulas read over a transition: the lower copy becomes the
// post-state and the higher copy the pre-state.
expr over_transition( const expr& ranking_formula );

// The eight premise families, 6 + 2 * |fairness| obligations in total.
// Axioms are assumed in the pre-state, and in the post-state as well for
// premises that mention the transition. Throws error(not_closed).
std::vector< proof_obligation > generate_premises( const problem& p, const implicit_ranking& r );

// The formula whose unsatisfiability establishes the obligation.
expr premise_negation( const proof_obligation& ob );

} // namespace livrank
