"""Seeded Monte Carlo kernels (numba-jitted) for payoff and cooperation-rate
estimation, plus the agent-based mutation-selection simulation loop.

All kernels seed numba's thread-local RNG at entry, so results are
reproducible given the seed and independent of call order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .game import GameParams
from .strategy import (
    KIND_AUTOMATON,
    KIND_CURE,
    KIND_HARD_MAJORITY,
    InfiniteMemoryStrategy,
    Strategy,
    is_finite,
    lower_to_automaton,
)

_EMPTY_INTENTS = np.zeros(1, dtype=np.float64)
_EMPTY_NEXT = np.zeros((1, 4), dtype=np.int64)


def _descriptor(strategy: Strategy):
    """Kernel-side description: (kind, intents, next_state, initial, param)."""
    if is_finite(strategy):
        auto = lower_to_automaton(strategy)
        return (
            KIND_AUTOMATON,
            np.ascontiguousarray(auto.coop_intent, dtype=np.float64),
            np.ascontiguousarray(auto.next_state, dtype=np.int64),
            auto.initial_state,
            0,
        )
    assert isinstance(strategy, InfiniteMemoryStrategy)
    return (strategy.kind, _EMPTY_INTENTS, _EMPTY_NEXT, 0, strategy.delta)


@njit(cache=True, nogil=True)
def _pair_kernel(
    kind_a, intents_a, next_a, init_a, par_a,
    kind_b, intents_b, next_b, init_b, par_b,
    eps, pay_r, pay_s, pay_t, pay_p,
    rounds, burn_in, n_batches, seed,
):
    np.random.seed(seed)
    sa = init_a
    sb = init_b
    a_opp_c = 0; a_opp_d = 0; a_imb = 0
    b_opp_c = 0; b_opp_d = 0; b_imb = 0

    kept = rounds - burn_in
    batch_len = kept // n_batches
    kept = batch_len * n_batches
    batch_a = np.zeros(n_batches)
    batch_b = np.zeros(n_batches)
    coop_a = 0.0
    coop_b = 0.0
    idx = 0

    for r in range(rounds):
        if kind_a == 0:
            ia = intents_a[sa]
        elif kind_a == 1:
            ia = 0.0 if r == 0 else (1.0 if a_opp_c >= a_opp_d else 0.0)
        else:
            ia = 1.0 if a_imb <= par_a else 0.0
        if kind_b == 0:
            ib = intents_b[sb]
        elif kind_b == 1:
            ib = 0.0 if r == 0 else (1.0 if b_opp_c >= b_opp_d else 0.0)
        else:
            ib = 1.0 if b_imb <= par_b else 0.0

        pa = ia * (1.0 - eps) + (1.0 - ia) * eps
        pb = ib * (1.0 - eps) + (1.0 - ib) * eps
        ca = np.random.random() < pa
        cb = np.random.random() < pb

        if ca:
            ua = pay_r if cb else pay_s
            ub = pay_r if cb else pay_t
        else:
            ua = pay_t if cb else pay_p
            ub = pay_s if cb else pay_p

        if r >= burn_in and idx < kept:
            batch_a[idx // batch_len] += ua
            batch_b[idx // batch_len] += ub
            if ca:
                coop_a += 1.0
            if cb:
                coop_b += 1.0
            idx += 1

        if kind_a == 0:
            oa = (0 if cb else 1) if ca else (2 if cb else 3)
            sa = next_a[sa, oa]
        elif kind_a == 1:
            if cb:
                a_opp_c += 1
            else:
                a_opp_d += 1
        else:
            a_imb += (0 if cb else 1) - (0 if ca else 1)
            if a_imb < 0:
                a_imb = 0
        if kind_b == 0:
            ob = (0 if ca else 1) if cb else (2 if ca else 3)
            sb = next_b[sb, ob]
        elif kind_b == 1:
            if ca:
                b_opp_c += 1
            else:
                b_opp_d += 1
        else:
            b_imb += (0 if ca else 1) - (0 if cb else 1)
            if b_imb < 0:
                b_imb = 0

    batch_a /= batch_len
    batch_b /= batch_len
    mean_a = batch_a.mean()
    mean_b = batch_b.mean()
    var_a = 0.0
    var_b = 0.0
    for i in range(n_batches):
        var_a += (batch_a[i] - mean_a) ** 2
        var_b += (batch_b[i] - mean_b) ** 2
    se_a = np.sqrt(var_a / (n_batches - 1) / n_batches)
    se_b = np.sqrt(var_b / (n_batches - 1) / n_batches)
    return mean_a, mean_b, se_a, se_b, coop_a / kept, coop_b / kept


def monte_carlo_payoff(
    a: Strategy,
    b: Strategy,
    params: GameParams,
    rounds: int = 10_000_000,
    burn_in: int = 10_000,
    seed: int = 0,
    n_batches: int = 100,
):
    """Time-average per-round payoffs of a vs b after burn-in.

    Returns (payoff_a, payoff_b, se_a, se_b, coop_rate_a, coop_rate_b); the
    standard errors come from batch means over n_batches batches.
    """
    if rounds < 10_000:
        raise ValueError("rounds must be at least 10^4")
    if burn_in >= rounds:
        raise ValueError("burn_in must be smaller than rounds")
    params.validate()
    da = _descriptor(a)
    db = _descriptor(b)
    return _pair_kernel(
        *da, *db,
        params.epsilon, params.R, params.S, params.T, params.P,
        rounds, burn_in, n_batches, seed,
    )


@njit(cache=True, nogil=True)
def _group_kernel(
    intents, next_coord, next_uncoord, N, eps, rounds, burn_in, n_batches, seed
):
    np.random.seed(seed)
    s = 0
    kept = rounds - burn_in
    batch_len = kept // n_batches
    kept = batch_len * n_batches
    batches = np.zeros(n_batches)
    idx = 0
    for r in range(rounds):
        i = intents[s]
        p = i * (1.0 - eps) + (1.0 - i) * eps
        c = np.random.binomial(N, p)
        if r >= burn_in and idx < kept:
            batches[idx // batch_len] += c / N
            idx += 1
        if c == 0 or c == N:
            s = next_coord[s]
        else:
            s = next_uncoord[s]
    batches /= batch_len
    mean = batches.mean()
    var = 0.0
    for k in range(n_batches):
        var += (batches[k] - mean) ** 2
    se = np.sqrt(var / (n_batches - 1) / n_batches)
    return mean, se


def monte_carlo_group_coop_rate(
    shared_machine,
    N: int,
    epsilon: float,
    rounds: int = 10_000_000,
    burn_in: int = 10_000,
    seed: int = 0,
    n_batches: int = 100,
):
    """Simulate N identical players sharing one automaton state; returns the
    implemented cooperation rate and its batch-means standard error.

    shared_machine: (intents, next_coordinated, next_uncoordinated) arrays.
    """
    intents, next_coord, next_uncoord = shared_machine
    return _group_kernel(
        np.ascontiguousarray(intents, dtype=np.float64),
        np.ascontiguousarray(next_coord, dtype=np.int64),
        np.ascontiguousarray(next_uncoord, dtype=np.int64),
        N, epsilon, rounds, burn_in, n_batches, seed,
    )


@njit(cache=True, nogil=True)
def _agent_kernel(pay, M, beta, mu, steps, burn_in, sample_every, init_strat, seed):
    np.random.seed(seed)
    n = pay.shape[0]
    strat = init_strat.copy()
    counts = np.zeros(n, dtype=np.int64)
    for p in range(M):
        counts[strat[p]] += 1

    n_samples = steps // sample_every
    series = np.zeros((n_samples, n), dtype=np.int64)
    abund = np.zeros(n)
    recorded = 0

    for step in range(steps):
        learner = np.random.randint(M)
        if mu > 0.0 and np.random.random() < mu:
            new = np.random.randint(n)
            counts[strat[learner]] -= 1
            strat[learner] = new
            counts[new] += 1
        else:
            model = np.random.randint(M)
            while model == learner:
                model = np.random.randint(M)
            si = strat[learner]
            sj = strat[model]
            if si != sj:
                pi = 0.0
                pj = 0.0
                for k in range(n):
                    pi += counts[k] * pay[si, k]
                    pj += counts[k] * pay[sj, k]
                # expected payoff excludes self-interaction
                pi = (pi - pay[si, si]) / (M - 1)
                pj = (pj - pay[sj, sj]) / (M - 1)
                if np.random.random() < 1.0 / (1.0 + np.exp(-beta * (pj - pi))):
                    counts[si] -= 1
                    strat[learner] = sj
                    counts[sj] += 1
        if (step + 1) % sample_every == 0:
            k = (step + 1) // sample_every - 1
            if k < n_samples:
                series[k] = counts
        if step >= burn_in:
            for k in range(n):
                abund[k] += counts[k]
            recorded += 1

    if recorded > 0:
        abund /= recorded * M
    return series, abund
