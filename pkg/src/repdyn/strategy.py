"""Strategy representations: finite-state automata, memory-1 vectors, and the
two infinite-memory counting strategies.

Every analytically tractable strategy lowers to a StrategyAutomaton: a finite
set of internal states, a per-state cooperation-intent probability, and a
deterministic transition on the *implemented* action pair. Noise is applied
outside the automaton by the payoff/simulation layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .game import CC, CD, DC, DD, SWAP, GameParams, AXELROD

N_OUTCOMES = 4


class UnknownStrategy(ValueError):
    pass


@dataclass(frozen=True)
class StrategyAutomaton:
    """Finite-state automaton over implemented-outcome transitions.

    coop_intent: shape (n,), cooperation-intent probability per state.
    next_state: shape (n, 4), successor per (state, implemented outcome index).
    """

    coop_intent: np.ndarray
    next_state: np.ndarray
    initial_state: int
    label: str
    spec: str = ""

    def __post_init__(self):
        ci = np.asarray(self.coop_intent, dtype=float)
        ns = np.asarray(self.next_state, dtype=np.int64)
        if ci.ndim != 1 or ns.shape != (ci.size, N_OUTCOMES):
            raise ValueError("inconsistent automaton shapes")
        if np.any(ci < 0) or np.any(ci > 1):
            raise ValueError("cooperation intents must lie in [0, 1]")
        if np.any(ns < 0) or np.any(ns >= ci.size):
            raise ValueError("transition target out of range")
        if not 0 <= self.initial_state < ci.size:
            raise ValueError("initial state out of range")
        ci.setflags(write=False)
        ns.setflags(write=False)
        object.__setattr__(self, "coop_intent", ci)
        object.__setattr__(self, "next_state", ns)
        if not self.spec:
            object.__setattr__(self, "spec", self.label)

    @property
    def state_count(self) -> int:
        return self.coop_intent.size

    def intents_along(self, outcomes: np.ndarray) -> np.ndarray:
        """Intent probability before each round of an implemented-outcome history.

        outcomes: shape (..., h) of outcome indices. Returns shape (..., h)
        giving the intent held *after* observing outcomes[..., :k] for
        k = 1..h (the round-1 intent, which depends on the unused first-round
        convention, is not included).
        """
        outcomes = np.asarray(outcomes, dtype=np.int64)
        flat = outcomes.reshape(-1, outcomes.shape[-1])
        state = np.full(flat.shape[0], self.initial_state, dtype=np.int64)
        intents = np.empty_like(flat, dtype=float)
        for k in range(flat.shape[1]):
            state = self.next_state[state, flat[:, k]]
            intents[:, k] = self.coop_intent[state]
        return intents.reshape(outcomes.shape)


@dataclass(frozen=True)
class Memory1:
    """Memory-1 strategy [p_CC, p_CD, p_DC, p_DD] with optional first-round p0.

    p0 is stored for completeness but ignored by all long-run payoff
    computations (first-round behavior has no effect on average payoffs
    in the noisy infinitely repeated game).
    """

    p_cc: float
    p_cd: float
    p_dc: float
    p_dd: float
    p0: float | None = None
    label: str = ""
    spec_str: str = ""

    def __post_init__(self):
        for p in self.vector():
            if not 0.0 <= p <= 1.0:
                raise ValueError("memory-1 probabilities must lie in [0, 1]")

    def vector(self) -> tuple[float, float, float, float]:
        return (self.p_cc, self.p_cd, self.p_dc, self.p_dd)

    @property
    def spec(self) -> str:
        return self.spec_str or "M1:" + ",".join(_fmt(p) for p in self.vector())

    def lower(self) -> StrategyAutomaton:
        """4-state automaton whose state is the last implemented outcome."""
        intents = np.array(self.vector(), dtype=float)
        nxt = np.tile(np.arange(N_OUTCOMES), (N_OUTCOMES, 1))
        return StrategyAutomaton(
            coop_intent=intents,
            next_state=nxt,
            initial_state=CC,
            label=self.label or self.spec,
            spec=self.spec,
        )


def aon_transition(state: int, coordinated: bool, K: int) -> int:
    """AoN_K state update: run-length counter capped at K, reset on incoordination."""
    if not 0 <= state <= K:
        raise ValueError("state out of range")
    return min(state + 1, K) if coordinated else 0


@dataclass(frozen=True)
class AonStrategy:
    """All-or-None with cooperation threshold K: cooperate iff the last K
    rounds were all coordinated."""

    K: int

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("AoN requires K >= 1")

    @property
    def spec(self) -> str:
        return f"AoN:K={self.K}"

    def lower(self) -> StrategyAutomaton:
        K = self.K
        intents = np.zeros(K + 1)
        intents[K] = 1.0
        nxt = np.zeros((K + 1, N_OUTCOMES), dtype=np.int64)
        for s in range(K + 1):
            for o in range(N_OUTCOMES):
                nxt[s, o] = aon_transition(s, o in (CC, DD), K)
        return StrategyAutomaton(intents, nxt, 0, f"AoN_{K}", self.spec)


def adco_transition(state: int, coordinated: bool, K: int, t: int) -> int:
    """ADCO state update over states A_0..A_K (indices 0..K) and
    A_{K,1}..A_{K,t} (indices K+1..K+t)."""
    if not 0 <= state <= K + t:
        raise ValueError("state out of range")
    if coordinated:
        return min(state + 1, K + t)
    return K if state == K + t else 0


@dataclass(frozen=True)
class AdcoStrategy:
    """Adaptive coordination: AoN_K plus an observation phase of t further
    coordinated rounds, after which one uncoordinated round is forgiven
    (return to A_K, still cooperating) instead of punished (return to A_0)."""

    K: int
    t: int

    def __post_init__(self):
        if self.K <= 0 or self.t <= 0:
            raise ValueError("ADCO requires K >= 1 and t >= 1")

    @property
    def spec(self) -> str:
        return f"ADCO:K={self.K},t={self.t}"

    def lower(self) -> StrategyAutomaton:
        K, t = self.K, self.t
        n = K + 1 + t
        intents = np.zeros(n)
        intents[K:] = 1.0
        nxt = np.zeros((n, N_OUTCOMES), dtype=np.int64)
        for s in range(n):
            for o in range(N_OUTCOMES):
                nxt[s, o] = adco_transition(s, o in (CC, DD), K, t)
        return StrategyAutomaton(intents, nxt, 0, f"ADCO_{K},{t}", self.spec)


# Type codes shared with the Monte Carlo kernels.
KIND_AUTOMATON = 0
KIND_HARD_MAJORITY = 1
KIND_CURE = 2


@dataclass
class InfiniteMemoryStrategy:
    """Stateful simulator for the two counting strategies without a finite
    automaton representation. One instance per simulated match.

    HardMajority: defect in round 1; thereafter cooperate iff the opponent's
    implemented cooperations >= implemented defections.
    CumulativeReciprocity (CURE): track the imbalance d of opponent minus own
    implemented defections, floored at 0 after each update; cooperate iff
    d <= delta.
    """

    kind: int
    delta: int = 0
    label: str = ""
    _round: int = field(default=0, repr=False)
    _opp_c: int = field(default=0, repr=False)
    _opp_d: int = field(default=0, repr=False)
    _imbalance: int = field(default=0, repr=False)

    def __post_init__(self):
        if self.kind not in (KIND_HARD_MAJORITY, KIND_CURE):
            raise ValueError("unknown infinite-memory kind")
        if self.kind == KIND_CURE and self.delta < 0:
            raise ValueError("CURE tolerance must be nonnegative")
        if not self.label:
            self.label = self.spec

    @property
    def spec(self) -> str:
        if self.kind == KIND_HARD_MAJORITY:
            return "HardMajority"
        return f"CURE:delta={self.delta}"

    def reset(self) -> None:
        self._round = 0
        self._opp_c = 0
        self._opp_d = 0
        self._imbalance = 0

    def intent(self) -> float:
        if self.kind == KIND_HARD_MAJORITY:
            if self._round == 0:
                return 0.0
            return 1.0 if self._opp_c >= self._opp_d else 0.0
        return 1.0 if self._imbalance <= self.delta else 0.0

    def observe(self, own_cooperated: bool, opp_cooperated: bool) -> None:
        self._round += 1
        if self.kind == KIND_HARD_MAJORITY:
            if opp_cooperated:
                self._opp_c += 1
            else:
                self._opp_d += 1
        else:
            self._imbalance += (0 if opp_cooperated else 1) - (0 if own_cooperated else 1)
            if self._imbalance < 0:
                self._imbalance = 0


Strategy = Union[StrategyAutomaton, Memory1, AonStrategy, AdcoStrategy, InfiniteMemoryStrategy]


def zd_extortion(chi: float, params: GameParams = AXELROD) -> Memory1:
    """Extortionate zero-determinant memory-1 strategy with factor chi.

    Solves p_tilde = phi * [(S_X - P) - chi * (S_Y - P)] with the largest phi
    keeping all four probabilities in [0, 1]; p_DD = 0.
    """
    if chi < 1.0:
        raise ValueError("extortion factor must satisfy chi >= 1")
    T, R, P, S = params.T, params.R, params.P, params.S
    bounds = [
        1.0 / (chi * (T - P) + (P - S)),  # p_CD >= 0
        1.0 / ((T - P) + chi * (P - S)),  # p_DC <= 1
    ]
    if chi > 1.0:
        bounds.append(1.0 / ((chi - 1.0) * (R - P)))  # p_CC >= 0
    phi = min(bounds)
    p_cc = 1.0 - phi * (chi - 1.0) * (R - P)
    p_cd = 1.0 + phi * ((S - P) - chi * (T - P))
    p_dc = phi * ((T - P) - chi * (S - P))
    return Memory1(
        p_cc, p_cd, p_dc, 0.0, label=f"ZD_{_fmt(chi)}", spec_str=f"ZD:chi={_fmt(chi)}"
    )


def grim_automaton() -> StrategyAutomaton:
    """GRIM trigger: cooperative until any implemented defection by either
    player (including own error), then defects forever."""
    intents = np.array([1.0, 0.0])
    nxt = np.array([[0, 1, 1, 1], [1, 1, 1, 1]], dtype=np.int64)
    return StrategyAutomaton(intents, nxt, 0, "GRIM", "GRIM")


def lower_to_automaton(strategy: Strategy) -> StrategyAutomaton:
    """Canonicalize a finite-memory strategy into a StrategyAutomaton."""
    if isinstance(strategy, StrategyAutomaton):
        return strategy
    if isinstance(strategy, (Memory1, AonStrategy, AdcoStrategy)):
        return strategy.lower()
    raise TypeError(f"{strategy!r} has no finite automaton representation")


def is_finite(strategy: Strategy) -> bool:
    return not isinstance(strategy, InfiniteMemoryStrategy)


def spec_of(strategy: Strategy) -> str:
    if isinstance(strategy, StrategyAutomaton):
        return strategy.spec
    return strategy.spec


def _fmt(x: float) -> str:
    """Short float formatting for spec strings (0.2 not 0.20000...)."""
    if x == int(x):
        return str(int(x))
    return repr(float(x))


_BARE_MEMORY1 = {
    "ALLC": (1.0, 1.0, 1.0, 1.0),
    "ALLD": (0.0, 0.0, 0.0, 0.0),
    "RANDOM": (0.5, 0.5, 0.5, 0.5),
    "TFT": (1.0, 0.0, 1.0, 0.0),
    "WSLS": (1.0, 0.0, 0.0, 1.0),
}


def catalog(name: str, params: GameParams = AXELROD, **kwargs) -> Strategy:
    """Canonical strategy definitions by name.

    Known names: ALLC, ALLD, RANDOM, TFT, WSLS, GRIM, GTFT(q), ZD(chi),
    HardMajority, CURE(delta), AoN(K), ADCO(K, t), Memory1(vector).
    """
    key = name.strip()
    upper = key.upper()
    if upper in _BARE_MEMORY1:
        return Memory1(*_BARE_MEMORY1[upper], label=upper, spec_str=upper)
    if upper == "GRIM":
        return grim_automaton()
    if upper == "GTFT":
        q = float(kwargs["q"])
        if not 0.0 <= q <= 1.0:
            raise ValueError("GTFT generosity must lie in [0, 1]")
        return Memory1(1.0, q, 1.0, q, label=f"GTFT_{_fmt(q)}", spec_str=f"GTFT:q={_fmt(q)}")
    if upper == "ZD":
        return zd_extortion(float(kwargs["chi"]), params)
    if upper == "HARDMAJORITY":
        return InfiniteMemoryStrategy(KIND_HARD_MAJORITY)
    if upper == "CURE":
        return InfiniteMemoryStrategy(KIND_CURE, delta=int(kwargs["delta"]))
    if upper == "AON":
        return AonStrategy(int(kwargs["K"]))
    if upper == "ADCO":
        return AdcoStrategy(int(kwargs["K"]), int(kwargs["t"]))
    if upper == "M1" or upper == "MEMORY1":
        vec = kwargs["vector"]
        return Memory1(*[float(p) for p in vec])
    raise UnknownStrategy(f"unknown strategy name: {name!r}")


def parse_spec(spec: str, params: GameParams = AXELROD) -> Strategy:
    """Parse a CLI/config strategy spec string.

    Examples: "AoN:K=16", "ADCO:K=3,t=2", "GTFT:q=0.2", "ZD:chi=3",
    "CURE:delta=2", "M1:1,0,0,0.6", "WSLS".
    """
    spec = spec.strip()
    if ":" not in spec:
        return catalog(spec, params)
    head, _, rest = spec.partition(":")
    if head.upper() in ("M1", "MEMORY1"):
        parts = [p for p in rest.split(",") if p]
        if len(parts) == 5:  # leading p0
            p0, *vec = parts
            return Memory1(*[float(p) for p in vec], p0=float(p0))
        if len(parts) != 4:
            raise UnknownStrategy(f"memory-1 spec needs 4 probabilities: {spec!r}")
        return Memory1(*[float(p) for p in parts])
    kwargs = {}
    for item in rest.split(","):
        if not item:
            continue
        if "=" not in item:
            raise UnknownStrategy(f"malformed strategy spec: {spec!r}")
        k, _, v = item.partition("=")
        kwargs[k.strip()] = v.strip()
    return catalog(head, params, **kwargs)
