"""Bistability against ALLD: the invasion barrier of coordinated cooperation.

Cooperative automata cannot invade ALLD from rarity; both monomorphic states
are stable and the unstable interior fixed point x* marks the basin boundary.
A lower x* means cooperation needs a smaller critical mass. ADCO's
forgiveness lowers x* relative to plain AoN_K.
"""

import numpy as np

from repdyn import (
    AdcoStrategy,
    AonStrategy,
    GameParams,
    interior_fixed_point,
    pair_payoff,
    parse_spec,
    replicator_trajectory,
)

params = GameParams()
alld = parse_spec("ALLD")
alld_self = pair_payoff(alld, alld, params).payoff_a

print(f"{'strategy':>12}  {'x* (basin boundary)':>20}")
for K in (2, 5, 10):
    for strat in (AonStrategy(K), AdcoStrategy(K, 2)):
        cross = pair_payoff(strat, alld, params)
        pay = np.array([
            [pair_payoff(strat, strat, params).payoff_a, cross.payoff_a],
            [cross.payoff_b, alld_self],
        ])
        fp = interior_fixed_point(pay)
        print(f"{strat.spec:>12}  {fp.x_star:>20.4f}  ({fp.stability})")

# trajectories from either side of the boundary run to opposite vertices
strat = AdcoStrategy(5, 2)
cross = pair_payoff(strat, alld, params)
pay = np.array([
    [pair_payoff(strat, strat, params).payoff_a, cross.payoff_a],
    [cross.payoff_b, alld_self],
])
x_star = interior_fixed_point(pay).x_star
for x0 in (x_star - 0.02, x_star + 0.02):
    traj = replicator_trajectory(pay, x0)
    print(f"\nADCO(5,2) vs ALLD from x0={x0:.4f}: "
          f"x -> {traj.converged_to:g} after {traj.generations} generations")
