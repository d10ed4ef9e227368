"""Exact long-run payoffs and cooperation rates.

Three independent routes are provided and cross-checked by the test suite:
closed forms for homogeneous AoN/ADCO groups, product Markov chains over
joint automaton states for arbitrary strategy pairs, and seeded Monte Carlo
for the infinite-memory strategies.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .game import CC, CD, DC, DD, SWAP, GameParams, effective_coop_prob
from .mc import monte_carlo_payoff
from .strategy import (
    AdcoStrategy,
    AonStrategy,
    Memory1,
    Strategy,
    StrategyAutomaton,
    is_finite,
    lower_to_automaton,
    spec_of,
)

_SWAP = np.array(SWAP)


class ChainTooLargeError(RuntimeError):
    """Joint state space exceeds the configured cap."""


class ReducibleChainError(RuntimeError):
    """The chain has no unique stationary distribution (typically epsilon = 0)."""


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


# ---------------------------------------------------------------------------
# Closed forms for homogeneous groups


def group_coordination_prob(N: int, epsilon: float) -> float:
    """Per-round probability q that all N implemented actions coincide."""
    if N < 2:
        raise ValueError("group size must be at least 2")
    return epsilon**N + (1.0 - epsilon) ** N


def aon_group_coop_rate(K: int, N: int, epsilon: float) -> float:
    """Cooperation rate of a homogeneous AoN_K group of size N under noise."""
    if K < 1:
        raise ValueError("K must be at least 1")
    q = group_coordination_prob(N, epsilon)
    return epsilon + (1.0 - 2.0 * epsilon) * q**K


def adco_group_coop_rate(K: int, t: int, N: int, epsilon: float) -> float:
    """Cooperation rate of a homogeneous ADCO(K, t) group of size N under noise.

    At epsilon = 0 the formula degenerates (q = 1); the limit value 1 is
    returned.
    """
    if K < 1 or t < 1:
        raise ValueError("K and t must be at least 1")
    if epsilon == 0.0:
        group_coordination_prob(N, epsilon)  # still validates N
        return 1.0
    q = group_coordination_prob(N, epsilon)
    qk = q**K
    qt = q**t
    x0 = (1.0 - q) * (1.0 - qt) / ((1.0 - qk) * (1.0 - qt) + qk)
    return x0 * (
        (1.0 - qk) / (1.0 - q) * epsilon
        + qk / ((1.0 - qt) * (1.0 - q)) * (1.0 - epsilon)
    )


def aon_self_payoff(K: int, params: GameParams) -> float:
    """Long-run per-round payoff of AoN_K against itself (two players)."""
    if K < 1:
        raise ValueError("K must be at least 1")
    params.validate()
    e = params.epsilon
    q = e**2 + (1.0 - e) ** 2
    head = (1.0 - 2.0 * e) * q**K
    return (
        (e**2 + head) * params.R
        + ((1.0 - e) ** 2 - head) * params.P
        + e * (1.0 - e) * (params.T + params.S)
    )


# ---------------------------------------------------------------------------
# Stationary distributions

DENSE_SOLVE_LIMIT = 2000
POWER_ITERATION_CAP = 10**6


def stationary(transition: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix.

    Direct linear solve for dimension <= 2000, power iteration on the lazy
    chain (I + P)/2 above. Raises ReducibleChainError when the stationary
    distribution is not unique and ConvergenceError on iteration failure.
    """
    P = np.asarray(transition, dtype=float)
    n = P.shape[0]
    if P.shape != (n, n):
        raise ValueError("transition matrix must be square")
    row_err = np.abs(P.sum(axis=1) - 1.0).max()
    if row_err > 1e-12:
        raise ValueError(f"matrix is not row-stochastic (row-sum error {row_err:.3e})")

    if n == 1:
        return np.ones(1)

    if n <= DENSE_SOLVE_LIMIT:
        A = P.T - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        try:
            pi = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise ReducibleChainError(
                "singular balance system; chain has no unique stationary "
                "distribution (supply a start-state convention or epsilon > 0)"
            ) from exc
    else:
        pi = np.full(n, 1.0 / n)
        lazy = 0.5 * (P + np.eye(n))
        for _ in range(POWER_ITERATION_CAP):
            nxt = pi @ lazy
            if np.abs(nxt - pi).max() < 0.25 * tol:
                pi = nxt
                break
            pi = nxt
        else:
            res = float(np.abs(pi @ P - pi).max())
            raise ConvergenceError("power iteration did not converge", res)

    if pi.min() < -1e-9:
        raise ReducibleChainError("negative stationary entries; chain is degenerate")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.abs(pi @ P - pi).max())
    if residual > tol:
        raise ConvergenceError("stationary residual above tolerance", residual)
    return pi


# ---------------------------------------------------------------------------
# Product chains for strategy pairs


@dataclass(frozen=True)
class ProductChain:
    """Markov chain over reachable joint automaton states for a strategy pair.

    per_state_outcome_dist holds, per joint state, the probability of each
    implemented outcome (CC, CD, DC, DD) from player a's perspective.
    """

    states: tuple[tuple[int, int], ...]
    transition: np.ndarray
    per_state_outcome_dist: np.ndarray
    coop_prob_a: np.ndarray
    coop_prob_b: np.ndarray
    initial_index: int


def build_product_chain(
    a: StrategyAutomaton,
    b: StrategyAutomaton,
    params: GameParams,
    max_states: int = 10**6,
) -> ProductChain:
    """Reachable joint chain of two automata under implementation noise."""
    params.validate()
    eps = params.epsilon
    start = (a.initial_state, b.initial_state)
    index = {start: 0}
    order = [start]
    rows: list[dict[int, float]] = []
    out_dists = []
    pa_list = []
    pb_list = []

    frontier = [start]
    while frontier:
        nxt_frontier = []
        for sa, sb in frontier:
            pa = effective_coop_prob(float(a.coop_intent[sa]), eps)
            pb = effective_coop_prob(float(b.coop_intent[sb]), eps)
            dist = np.array(
                [pa * pb, pa * (1 - pb), (1 - pa) * pb, (1 - pa) * (1 - pb)]
            )
            row: dict[int, float] = {}
            for o in range(4):
                p = dist[o]
                if p == 0.0:
                    continue
                succ = (int(a.next_state[sa, o]), int(b.next_state[sb, SWAP[o]]))
                if succ not in index:
                    if len(index) >= max_states:
                        raise ChainTooLargeError(
                            f"joint state space exceeds cap of {max_states}; "
                            "raise max_states or use Monte Carlo"
                        )
                    index[succ] = len(order)
                    order.append(succ)
                    nxt_frontier.append(succ)
                row[index[succ]] = row.get(index[succ], 0.0) + p
            rows.append(row)
            out_dists.append(dist)
            pa_list.append(pa)
            pb_list.append(pb)
        frontier = nxt_frontier

    n = len(order)
    T = np.zeros((n, n))
    for i, row in enumerate(rows):
        for j, p in row.items():
            T[i, j] = p
    return ProductChain(
        states=tuple(order),
        transition=T,
        per_state_outcome_dist=np.array(out_dists),
        coop_prob_a=np.array(pa_list),
        coop_prob_b=np.array(pb_list),
        initial_index=0,
    )


class PairResult(NamedTuple):
    payoff_a: float
    payoff_b: float
    coop_rate_a: float
    coop_rate_b: float
    se_a: float = 0.0
    se_b: float = 0.0


def _payoff_vectors(params: GameParams):
    a = np.array([params.R, params.S, params.T, params.P])
    return a, a[_SWAP]


def chain_pair_payoff(chain: ProductChain, params: GameParams, tol: float = 1e-10) -> PairResult:
    """Expected per-round payoffs under the chain's stationary distribution."""
    pi = stationary(chain.transition, tol)
    vec_a, vec_b = _payoff_vectors(params)
    per_state = chain.per_state_outcome_dist
    return PairResult(
        payoff_a=float(pi @ per_state @ vec_a),
        payoff_b=float(pi @ per_state @ vec_b),
        coop_rate_a=float(pi @ chain.coop_prob_a),
        coop_rate_b=float(pi @ chain.coop_prob_b),
    )


def _deterministic_cycle_payoff(
    a: StrategyAutomaton, b: StrategyAutomaton, params: GameParams
) -> PairResult:
    """Noise-free payoff of two deterministic automata: average over the
    eventually periodic implemented-outcome cycle."""
    vec_a, vec_b = _payoff_vectors(params)
    seen: dict[tuple[int, int], int] = {}
    trajectory = []
    state = (a.initial_state, b.initial_state)
    while state not in seen:
        seen[state] = len(trajectory)
        sa, sb = state
        ca = int(round(float(a.coop_intent[sa])))
        cb = int(round(float(b.coop_intent[sb])))
        o = 2 * (1 - ca) + (1 - cb)
        trajectory.append((state, o))
        state = (int(a.next_state[sa, o]), int(b.next_state[sb, SWAP[o]]))
    cycle = trajectory[seen[state]:]
    outs = np.array([o for _, o in cycle])
    return PairResult(
        payoff_a=float(vec_a[outs].mean()),
        payoff_b=float(vec_b[outs].mean()),
        coop_rate_a=float(np.mean(outs <= CD)),
        coop_rate_b=float(np.mean((outs == CC) | (outs == DC))),
    )


def pair_payoff(
    a: Strategy,
    b: Strategy,
    params: GameParams,
    mc_rounds: int = 10_000_000,
    mc_burn_in: int = 10_000,
    mc_seed: int = 0,
    max_states: int = 10**6,
) -> PairResult:
    """Long-run per-round payoffs and cooperation rates of a against b.

    Analytical (product chain) whenever both strategies lower to finite
    automata; seeded Monte Carlo otherwise.
    """
    if is_finite(a) and is_finite(b):
        auto_a = lower_to_automaton(a)
        auto_b = lower_to_automaton(b)
        if params.epsilon == 0.0:
            det = np.concatenate([auto_a.coop_intent, auto_b.coop_intent])
            if np.all((det == 0.0) | (det == 1.0)):
                return _deterministic_cycle_payoff(auto_a, auto_b, params)
        chain = build_product_chain(auto_a, auto_b, params, max_states)
        return chain_pair_payoff(chain, params)
    pa, pb, se_a, se_b, ca, cb = monte_carlo_payoff(
        a, b, params, rounds=mc_rounds, burn_in=mc_burn_in, seed=mc_seed
    )
    return PairResult(pa, pb, ca, cb, se_a, se_b)


# ---------------------------------------------------------------------------
# Homogeneous-group shared-state chains


def shared_state_machine(strategy: AonStrategy | AdcoStrategy):
    """(intents, next_if_coordinated, next_if_uncoordinated) arrays for a
    homogeneous group: all players provably occupy the same automaton state,
    so the group evolves as a single chain driven by the coordination event."""
    auto = lower_to_automaton(strategy)
    return (
        np.array(auto.coop_intent),
        np.array(auto.next_state[:, CC]),
        np.array(auto.next_state[:, CD]),
    )


def group_shared_state_chain(
    strategy: AonStrategy | AdcoStrategy, N: int, epsilon: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Shared-state chain of a homogeneous group plus its cooperation rate.

    Returns (transition, stationary distribution, cooperation rate). Refuses
    epsilon = 0 (reducible chain); the closed forms cover that limit.
    """
    if epsilon <= 0.0:
        raise ReducibleChainError(
            "shared-state chain is reducible at epsilon = 0; use the closed form"
        )
    intents, nxt_c, nxt_u = shared_state_machine(strategy)
    q = group_coordination_prob(N, epsilon)
    n = intents.size
    T = np.zeros((n, n))
    for s in range(n):
        T[s, nxt_c[s]] += q
        T[s, nxt_u[s]] += 1.0 - q
    pi = stationary(T)
    coop = float(pi @ effective_coop_prob(intents, epsilon))
    return T, pi, coop


# ---------------------------------------------------------------------------
# Memory-1 pair payoffs, batched


def mem1_pair_payoffs_batch(
    vec_a: np.ndarray, vec_b: np.ndarray, params: GameParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized long-run payoffs for m memory-1 pairs.

    vec_a, vec_b: shape (m, 4) conditional cooperation probabilities.
    Returns (payoff_a, payoff_b, coop_a, coop_b), each shape (m,). Requires
    epsilon > 0 (noise makes the 4-state outcome chain irreducible).
    """
    params.validate()
    eps = params.epsilon
    if eps <= 0.0:
        raise ReducibleChainError("batched memory-1 path requires epsilon > 0")
    pa = eps + (1.0 - 2.0 * eps) * np.asarray(vec_a, dtype=float)  # (m,4)
    pb = eps + (1.0 - 2.0 * eps) * np.asarray(vec_b, dtype=float)[:, _SWAP]
    m = pa.shape[0]
    T = np.empty((m, 4, 4))
    T[:, :, CC] = pa * pb
    T[:, :, CD] = pa * (1 - pb)
    T[:, :, DC] = (1 - pa) * pb
    T[:, :, DD] = (1 - pa) * (1 - pb)
    A = np.transpose(T, (0, 2, 1)) - np.eye(4)
    A[:, 3, :] = 1.0
    rhs = np.zeros((m, 4, 1))
    rhs[:, 3, 0] = 1.0
    pi = np.linalg.solve(A, rhs)[:, :, 0]
    vec_pay_a, vec_pay_b = _payoff_vectors(params)
    return (
        pi @ vec_pay_a,
        pi @ vec_pay_b,
        np.einsum("mo,mo->m", pi, pa),
        np.einsum("mo,mo->m", pi, pb),
    )


# ---------------------------------------------------------------------------
# Full payoff matrices


@dataclass
class PayoffMatrix:
    """Ordered-pair long-run payoffs plus self-play cooperation rates."""

    specs: list[str]
    payoff: np.ndarray
    self_coop_rate: np.ndarray

    @property
    def n(self) -> int:
        return len(self.specs)


def payoff_matrix(
    strategies: Sequence[Strategy],
    params: GameParams,
    mc_rounds: int = 10_000_000,
    mc_burn_in: int = 10_000,
    master_seed: int = 0,
    n_jobs: int = 1,
    cache_path: str | None = None,
    mem1_chunk: int = 50_000,
) -> PayoffMatrix:
    """All ordered-pair payoffs for a strategy list.

    Memory-1 pairs are computed in vectorized batches, other finite pairs via
    product chains, pairs involving infinite-memory strategies via Monte
    Carlo with per-pair seeds derived from master_seed (results independent
    of evaluation order). If cache_path exists it is loaded instead.
    """
    if not strategies:
        raise ValueError("strategy list must be nonempty")
    specs = [spec_of(s) for s in strategies]
    if cache_path and os.path.exists(cache_path):
        cached = load_payoff_matrix(cache_path)
        if cached.specs == specs:
            return cached

    n = len(strategies)
    pay = np.zeros((n, n))
    coop_self = np.zeros(n)
    mem1 = [s.vector() if isinstance(s, Memory1) else None for s in strategies]

    mem1_pairs = []
    chain_pairs = []
    mc_pairs = []
    for i in range(n):
        for j in range(i, n):
            if mem1[i] is not None and mem1[j] is not None:
                mem1_pairs.append((i, j))
            elif is_finite(strategies[i]) and is_finite(strategies[j]):
                chain_pairs.append((i, j))
            else:
                mc_pairs.append((i, j))

    def _store(i, j, res: PairResult):
        pay[i, j] = res.payoff_a
        pay[j, i] = res.payoff_b
        if i == j:
            coop_self[i] = res.coop_rate_a

    if mem1_pairs:
        pairs = np.array(mem1_pairs)
        vecs = np.array([v if v is not None else (0.0,) * 4 for v in mem1])
        for lo in range(0, len(pairs), mem1_chunk):
            chunk = pairs[lo : lo + mem1_chunk]
            pa_, pb_, ca_, cb_ = mem1_pair_payoffs_batch(
                vecs[chunk[:, 0]], vecs[chunk[:, 1]], params
            )
            for k, (i, j) in enumerate(chunk):
                _store(int(i), int(j), PairResult(pa_[k], pb_[k], ca_[k], cb_[k]))

    def _chain_job(ij):
        i, j = ij
        return i, j, pair_payoff(strategies[i], strategies[j], params)

    def _mc_job(ij):
        i, j = ij
        seed = int(
            np.random.SeedSequence(entropy=master_seed, spawn_key=(i, j)).generate_state(1)[0]
        )
        return i, j, pair_payoff(
            strategies[i], strategies[j], params,
            mc_rounds=mc_rounds, mc_burn_in=mc_burn_in, mc_seed=seed,
        )

    try:
        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                for i, j, res in pool.map(_chain_job, chain_pairs):
                    _store(i, j, res)
                for i, j, res in pool.map(_mc_job, mc_pairs):
                    _store(i, j, res)
        else:
            for ij in chain_pairs:
                _store(*_chain_job(ij))
            for ij in mc_pairs:
                _store(*_mc_job(ij))
    except (ChainTooLargeError, ReducibleChainError, ConvergenceError) as exc:
        raise type(exc)(f"{exc} [while computing a strategy pair]") from exc

    result = PayoffMatrix(specs, pay, coop_self)
    if cache_path:
        save_payoff_matrix(result, cache_path)
    return result


def save_payoff_matrix(matrix: PayoffMatrix, path: str) -> None:
    """CSV with a spec header row (quoted where needed; memory-1 specs contain
    commas); companion .coop.csv holds self-play cooperation rates. Floats use
    17 significant digits (round-trippable)."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(matrix.specs)
        for row in matrix.payoff:
            writer.writerow([f"{x:.17g}" for x in row])
    with open(_coop_path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["spec", "self_coop_rate"])
        for spec, rho in zip(matrix.specs, matrix.self_coop_rate):
            writer.writerow([spec, f"{rho:.17g}"])


def load_payoff_matrix(path: str) -> PayoffMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        specs = next(reader)
        pay = np.array([[float(x) for x in row] for row in reader if row])
    coop = np.zeros(len(specs))
    coop_file = _coop_path(path)
    if os.path.exists(coop_file):
        with open(coop_file, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for k, row in enumerate(reader):
                if row:
                    coop[k] = float(row[1])
    return PayoffMatrix(specs, pay, coop)


def _coop_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.coop{ext or '.csv'}"
