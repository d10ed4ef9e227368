"""Long-run strategy abundances under rare mutations.

In the small-mutation limit the population is almost always homogeneous and
hops between strategies via fixation events. The stationary distribution of
that embedded Markov chain gives each strategy's long-run abundance. Here the
ten classic repeated-game strategies compete, then ADCO(3,2) is added.
"""

from repdyn import (
    AdcoStrategy,
    GameParams,
    classics_roster,
    cooperation_level,
    embedded_chain,
    payoff_matrix,
)

params = GameParams(epsilon=0.01)
M, BETA = 100, 1.0

for label, extra in (("ten classics", []), ("classics + ADCO(3,2)",
                                            [AdcoStrategy(3, 2)])):
    strategies = classics_roster(params) + extra
    matrix = payoff_matrix(strategies, params)
    chain = embedded_chain(matrix, M, BETA)
    coop = cooperation_level(chain.abundance, matrix)
    print(f"\n{label}  (M={M}, beta={BETA}, eps={params.epsilon})")
    print(f"  cooperation level: {coop:.3f}")
    order = sorted(zip(chain.abundance, chain.specs), reverse=True)
    for ab, spec in order[:5]:
        print(f"  {spec:>14}  {ab:.4f}")
