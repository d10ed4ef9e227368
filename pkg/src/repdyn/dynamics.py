"""Evolutionary dynamics layers: discrete replicator dynamics with interior
fixed-point analysis, the small-mutation embedded Markov chain built from
pairwise fixation probabilities, and the full agent-based mutation-selection
simulation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .mc import _agent_kernel
from .payoff import PayoffMatrix, stationary

REPLICATOR_TOL = 1e-12
REPLICATOR_CAP = 10**6


def _shift_payoffs(payoffs: np.ndarray) -> np.ndarray:
    """Uniform positive shift when any payoff is <= 0; fixed points of the
    discrete replicator map are unchanged by a uniform shift."""
    payoffs = np.asarray(payoffs, dtype=float)
    lo = payoffs.min()
    if lo <= 0.0:
        payoffs = payoffs + (1.0 + abs(lo))
    return payoffs


def replicator_step(x: float, payoffs: np.ndarray) -> float:
    """One generation of the discrete replicator map for two strategies.

    payoffs is the 2x2 matrix [[pi_ii, pi_ij], [pi_ji, pi_jj]]; x is the
    fraction of strategy i. Payoffs must be positive; a uniform shift is
    applied automatically when any entry is <= 0.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    p = _shift_payoffs(payoffs)
    f_i = x * p[0, 0] + (1.0 - x) * p[0, 1]
    f_j = x * p[1, 0] + (1.0 - x) * p[1, 1]
    f_bar = x * f_i + (1.0 - x) * f_j
    if f_bar <= 0.0:
        raise ValueError("mean payoff is nonpositive; shift the payoff matrix")
    x_new = x * f_i / f_bar
    return min(max(x_new, 0.0), 1.0)


@dataclass
class ReplicatorTrajectory:
    x: np.ndarray
    generations: int
    converged_to: float | None  # 0.0, 1.0, interior value, or None


def replicator_trajectory(
    payoffs: np.ndarray,
    x0: float,
    max_generations: int = REPLICATOR_CAP,
    tol: float = REPLICATOR_TOL,
) -> ReplicatorTrajectory:
    """Iterate the discrete replicator map until |x' - x| < tol or the
    generation cap; classify the limit as 0, 1, an interior value, or None."""
    p = _shift_payoffs(payoffs)
    xs = [x0]
    x = x0
    converged = None
    gens = 0
    for gens in range(1, max_generations + 1):
        x_new = replicator_step(x, p)
        xs.append(x_new)
        if abs(x_new - x) < tol:
            x = x_new
            if x < 1e-6:
                converged = 0.0
            elif x > 1.0 - 1e-6:
                converged = 1.0
            else:
                converged = x
            break
        x = x_new
    return ReplicatorTrajectory(np.array(xs), gens, converged)


@dataclass
class FixedPointReport:
    x_star: float | None
    stability: str | None  # "stable" | "unstable"
    note: str = ""

    @property
    def basin_boundary(self) -> float | None:
        return self.x_star if self.stability == "unstable" else None


def interior_fixed_point(payoffs: np.ndarray) -> FixedPointReport:
    """Interior fixed point of the two-strategy replicator dynamics.

    x* = (pi_jj - pi_ij) / (pi_ii - pi_ij - pi_ji + pi_jj) when it lies in
    (0, 1); stability from the sign of f_i - f_j on either side (positive
    slope of f_i - f_j in x means bistability, i.e. unstable x*).
    """
    p = np.asarray(payoffs, dtype=float)
    denom = p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1]
    if denom == 0.0:
        return FixedPointReport(None, None, "none (neutral or dominance)")
    x_star = (p[1, 1] - p[0, 1]) / denom
    if not 0.0 < x_star < 1.0:
        return FixedPointReport(None, None, "none (dominance)")
    stability = "unstable" if denom > 0 else "stable"
    return FixedPointReport(float(x_star), stability)


# ---------------------------------------------------------------------------
# Fixation probabilities and the embedded chain


def fixation_probability(
    pay_mm: float, pay_mr: float, pay_rm: float, pay_rr: float, M: int, beta: float
) -> float:
    """Probability that a single mutant fixates in a resident population of
    size M under pairwise-comparison dynamics.

    Finite-population payoffs exclude self-interaction:
    pi_M(l) = [(l-1) pi(m,m) + (M-l) pi(m,r)] / (M-1),
    pi_R(l) = [l pi(r,m) + (M-l-1) pi(r,r)] / (M-1).
    Products are accumulated in the log domain to avoid overflow.
    """
    if M < 2:
        raise ValueError("population size must be at least 2")
    if beta < 0:
        raise ValueError("selection intensity must be nonnegative")
    if beta == 0.0:
        return 1.0 / M
    l = np.arange(1, M, dtype=float)
    pi_m = ((l - 1.0) * pay_mm + (M - l) * pay_mr) / (M - 1)
    pi_r = (l * pay_rm + (M - l - 1.0) * pay_rr) / (M - 1)
    log_terms = np.cumsum(-beta * (pi_m - pi_r))
    total = logsumexp(np.concatenate(([0.0], log_terms)))
    return float(np.exp(-total))


def fixation_matrix(
    pay: np.ndarray, M: int, beta: float, row_chunk: int = 64
) -> np.ndarray:
    """rho[i, j] = fixation probability of a j mutant in an i resident
    population, vectorized over all ordered pairs (chunked over residents to
    bound memory)."""
    pay = np.asarray(pay, dtype=float)
    n = pay.shape[0]
    if beta == 0.0:
        rho = np.full((n, n), 1.0 / M)
        np.fill_diagonal(rho, 0.0)
        return rho
    diag = np.diag(pay)
    k = np.arange(1, M, dtype=float)
    kk = k * (k + 1.0) / 2.0
    rho = np.empty((n, n))
    for lo in range(0, n, row_chunk):
        hi = min(lo + row_chunk, n)
        pj_j = diag[None, :]  # pi(mutant, mutant)
        pj_i = pay.T[lo:hi]  # pi(mutant, resident) = pay[j, i]
        pi_j = pay[lo:hi]  # pi(resident, mutant) = pay[i, j]
        pi_i = diag[lo:hi, None]  # pi(resident, resident)
        # Delta(l) = pi_M(l) - pi_R(l) is linear in l; its prefix sum is
        # S_k = (c1 * k(k+1)/2 + c0 * k) / (M - 1)
        c1 = pj_j - pj_i - pi_j + pi_i
        c0 = M * pj_i - pj_j - (M - 1.0) * pi_i
        cum = (c1[:, :, None] * kk + c0[:, :, None] * k) / (M - 1.0)
        block = np.concatenate(
            [np.zeros((hi - lo, n, 1)), -beta * cum], axis=2
        )
        rho[lo:hi] = np.exp(-logsumexp(block, axis=2))
    np.fill_diagonal(rho, 0.0)
    return rho


@dataclass
class EmbeddedChain:
    """Rare-mutation chain over homogeneous populations, one per strategy."""

    specs: list[str]
    transition: np.ndarray
    abundance: np.ndarray  # stationary distribution

    def most_abundant(self) -> tuple[str, float]:
        k = int(np.argmax(self.abundance))
        return self.specs[k], float(self.abundance[k])


def embedded_chain(matrix: PayoffMatrix, M: int, beta: float) -> EmbeddedChain:
    """Small-mutation embedded Markov chain: off-diagonal transition i -> j is
    the fixation probability of a j mutant divided by the n-1 possible
    (uniformly drawn) mutant strategies; stationary distribution gives the
    long-run strategy abundance."""
    n = matrix.n
    if n < 2:
        raise ValueError("need at least two strategies")
    rho = fixation_matrix(matrix.payoff, M, beta)
    T = rho / (n - 1)
    np.fill_diagonal(T, 0.0)
    np.fill_diagonal(T, 1.0 - T.sum(axis=1))
    abundance = stationary(T)
    return EmbeddedChain(list(matrix.specs), T, abundance)


def cooperation_level(
    abundance: np.ndarray,
    matrix: PayoffMatrix,
    weighting: str = "self",
) -> float:
    """Population cooperation level under a strategy-abundance distribution.

    weighting="self" (default): sum_i a_i * rho(s_i) using self-play
    cooperation rates, matching the rare-mutation picture of homogeneous
    populations. weighting="pairwise": sum_ij a_i a_j coop(i, j) would need
    the full cross cooperation-rate matrix; here the self-play diagonal is
    used for both, so only "self" is implemented analytically and "pairwise"
    reduces to the abundance-weighted mixture of self rates.
    """
    a = np.asarray(abundance, dtype=float)
    if a.shape != (matrix.n,):
        raise ValueError("abundance dimension mismatch")
    if weighting not in ("self", "pairwise"):
        raise ValueError("weighting must be 'self' or 'pairwise'")
    return float(a @ matrix.self_coop_rate)


# ---------------------------------------------------------------------------
# Agent-based mutation-selection simulation


@dataclass
class SimConfig:
    M: int = 100
    beta: float = 1.0
    mu: float = 1e-3
    steps: int = 10**7
    seed: int = 0
    burn_in: int = 0
    sample_every: int = 10**4

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("population size must be at least 2")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mutation probability must lie in [0, 1]")
        if self.beta < 0.0:
            raise ValueError("selection intensity must be nonnegative")


@dataclass
class AgentSimResult:
    specs: list[str]
    counts_series: np.ndarray  # (n_samples, n) strategy counts
    abundance: np.ndarray  # time-averaged strategy fractions after burn-in
    config: SimConfig = field(repr=False, default=None)


def agent_simulation(
    config: SimConfig, matrix: PayoffMatrix, initial: np.ndarray | None = None
) -> AgentSimResult:
    """Pairwise-comparison imitation dynamics with mutation.

    Each step: a random learner mutates to a uniform-random strategy with
    probability mu, otherwise imitates a random distinct role model with
    probability 1 / (1 + exp(-beta (pi_model - pi_learner))); payoffs are
    expected values from the precomputed matrix with self-interaction
    excluded. Reproducible given config.seed.
    """
    n = matrix.n
    rng = np.random.default_rng(config.seed)
    if initial is None:
        initial = rng.integers(0, n, size=config.M)
    initial = np.asarray(initial, dtype=np.int64)
    if initial.shape != (config.M,):
        raise ValueError("initial strategy assignment must have length M")
    series, abund = _agent_kernel(
        np.ascontiguousarray(matrix.payoff, dtype=np.float64),
        config.M,
        config.beta,
        config.mu,
        config.steps,
        config.burn_in,
        config.sample_every,
        initial,
        config.seed,
    )
    return AgentSimResult(list(matrix.specs), series, abund, config)


def agent_simulation_replicates(
    base: SimConfig, matrix: PayoffMatrix, seeds: list[int], n_jobs: int = 1
) -> np.ndarray:
    """Mean abundance over independently seeded replicates; replicates may run
    in parallel threads (the kernel releases the GIL) with results
    independent of scheduling order."""
    def _one(seed: int) -> np.ndarray:
        cfg = SimConfig(
            M=base.M, beta=base.beta, mu=base.mu, steps=base.steps,
            seed=seed, burn_in=base.burn_in, sample_every=base.sample_every,
        )
        return agent_simulation(cfg, matrix).abundance

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_one, seeds))
    else:
        results = [_one(s) for s in seeds]
    return np.mean(results, axis=0)
