"""Three independent routes to the same long-run payoff.

A strategy pair under noise induces a Markov chain over joint automaton
states. This script computes the ADCO(2,1) vs GTFT_0.2 payoff (a) exactly
from the product chain, (b) from the closed form where one exists (AoN self
play), and (c) by seeded Monte Carlo, and shows they agree.
"""

from repdyn import (
    AonStrategy,
    GameParams,
    aon_self_payoff,
    monte_carlo_payoff,
    pair_payoff,
    parse_spec,
)

params = GameParams()  # T=5, R=3, P=1, S=0, eps=0.001

a = parse_spec("ADCO:K=2,t=1")
b = parse_spec("GTFT:q=0.2")
exact = pair_payoff(a, b, params)
mc = monte_carlo_payoff(a, b, params, rounds=2_000_000, seed=0)
print("ADCO(2,1) vs GTFT_0.2")
print(f"  product chain : payoff_a = {exact.payoff_a:.6f}")
print(f"  Monte Carlo   : payoff_a = {mc[0]:.6f} +- {mc[2]:.6f}")

aon = AonStrategy(4)
chain_val = pair_payoff(aon, aon, params).payoff_a
closed = aon_self_payoff(4, params)
print("\nAoN_4 self play")
print(f"  closed form   : {closed:.12f}")
print(f"  product chain : {chain_val:.12f}")

# the extortionate zero-determinant strategy enforces a linear payoff
# relation against any opponent: (pi_zd - P) = chi (pi_opp - P)
p0 = GameParams(epsilon=0.0)
zd = parse_spec("ZD:chi=3", p0)
res = pair_payoff(zd, parse_spec("RANDOM"), p0)
print("\nZD extortion (chi=3) vs RANDOM, noise-free")
print(f"  pi_zd - P  = {res.payoff_a - p0.P:.6f}")
print(f"  3(pi_o - P) = {3 * (res.payoff_b - p0.P):.6f}")
