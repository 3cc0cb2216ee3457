#include "livrank/vcgen.hpp"
#include "livrank/error.hpp"

namespace livrank
{

expr over_transition( const expr& ranking_formula )
{
    return retag( retag( ranking_formula, tag::sub1, tag::plain, false ), tag::sub0, tag::primed, false );
}

namespace
{

expr primed( const expr& f ) { return retag( f, tag::plain, tag::primed, false ); }

} // namespace

std::vector< proof_obligation > generate_premises( const problem& p, const implicit_ranking& r )
{
    if ( !r.params.empty() )
        throw error( error_code::not_closed, "premises need a closed ranking" );

    const expr axioms = mk_and( p.axioms );
    const expr both = mk_and( axioms, primed( axioms ) );
    const expr step = mk_and( { both, p.trigger, p.trans, mk_not( primed( p.q ) ) } );

    std::vector< proof_obligation > out;
    out.push_back( { "init", 1, mk_implies( mk_and( axioms, p.init ), p.rho ) } );
    out.push_back( { "consec", 2, mk_implies( mk_and( { both, p.rho, p.trans } ), primed( p.rho ) ) } );
    out.push_back( { "trigger", 3, mk_implies( mk_and( { axioms, p.rho, p.p, mk_not( p.q ) } ), p.trigger ) } );
    out.push_back( { "stability", 4, mk_implies( step, primed( p.trigger ) ) } );
    out.push_back( { "conserved", 5, mk_implies( step, over_transition( r.conserved ) ) } );

    std::vector< expr > some;
    for ( const auto& h : p.helpful )
        some.push_back( mk_exists( h.params, h.formula ) );
    out.push_back( { "helpful-exists", 6, mk_implies( mk_and( axioms, p.trigger ), mk_or( some ) ) } );

    for ( std::size_t i = 0; i < p.fairness.size(); ++i )
    {
        const auto& fair = p.fairness[ i ];
        const auto& psi = p.helpful[ i ].formula;
        out.push_back( { "psi-stability@" + fair.name, 7,
                         mk_forall( fair.params, mk_implies( mk_and( { step, psi, mk_not( fair.formula ) } ),
                                                             primed( psi ) ) ) } );
    }
    const expr reduced = over_transition( r.reduced );
    for ( std::size_t i = 0; i < p.fairness.size(); ++i )
    {
        const auto& fair = p.fairness[ i ];
        const auto& psi = p.helpful[ i ].formula;
        out.push_back( { "reduced@" + fair.name, 8,
                         mk_forall( fair.params, mk_implies( mk_and( { step, psi, fair.formula } ), reduced ) ) } );
    }
    return out;
}

expr premise_negation( const proof_obligation& ob ) { return mk_not( ob.formula ); }

} // namespace livrank
