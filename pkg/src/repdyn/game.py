"""Repeated prisoner's dilemma primitives: actions, payoffs, implementation noise."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class Action(enum.IntEnum):
    """The two actions, ordered C before D for deterministic outcome indexing."""

    C = 0
    D = 1


# Canonical outcome indexing from the focal player's perspective.
# Every matrix/vector in the package uses this order.
CC, CD, DC, DD = 0, 1, 2, 3
OUTCOME_LABELS = ("CC", "CD", "DC", "DD")

# Index of the same joint outcome seen from the other player's perspective.
SWAP = (CC, DC, CD, DD)


class InvalidGameParams(ValueError):
    """Raised when the payoff/noise parameters violate the dilemma constraints."""


@dataclass(frozen=True)
class GameParams:
    """Prisoner's dilemma payoffs (T, R, P, S) plus implementation error rate.

    Constraints: T > R > P > S, T + S < 2R, and 0 <= epsilon <= 0.5.
    Defaults are the Axelrod tournament values.
    """

    T: float = 5.0
    R: float = 3.0
    P: float = 1.0
    S: float = 0.0
    epsilon: float = 0.001

    def validate(self) -> None:
        problems = []
        if not (self.T > self.R > self.P > self.S):
            problems.append(
                f"T > R > P > S violated: T={self.T}, R={self.R}, P={self.P}, S={self.S}"
            )
        if not (self.T + self.S < 2 * self.R):
            problems.append(f"T + S < 2R violated: T+S={self.T + self.S}, 2R={2 * self.R}")
        if not (0.0 <= self.epsilon <= 0.5):
            problems.append(f"epsilon must lie in [0, 0.5], got {self.epsilon}")
        if problems:
            raise InvalidGameParams("; ".join(problems))

    def payoff_vector(self) -> tuple[float, float, float, float]:
        """Focal-player payoff for each outcome in (CC, CD, DC, DD) order."""
        return (self.R, self.S, self.T, self.P)

    def to_dict(self) -> dict:
        return {"T": self.T, "R": self.R, "P": self.P, "S": self.S, "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d: dict) -> "GameParams":
        return cls(
            T=float(d.get("T", 5.0)),
            R=float(d.get("R", 3.0)),
            P=float(d.get("P", 1.0)),
            S=float(d.get("S", 0.0)),
            epsilon=float(d.get("epsilon", 0.001)),
        )


AXELROD = GameParams()


def validate(params: GameParams) -> None:
    """Raise InvalidGameParams naming each violated inequality."""
    params.validate()


def outcome_index(own: Action, opponent: Action) -> int:
    """Canonical index of the implemented action pair, focal perspective."""
    return 2 * int(own) + int(opponent)


def payoff_of(outcome: int | tuple[Action, Action], params: GameParams) -> float:
    """Focal-player payoff of one implemented outcome (CC->R, CD->S, DC->T, DD->P)."""
    if isinstance(outcome, tuple):
        outcome = outcome_index(*outcome)
    return params.payoff_vector()[outcome]


def effective_coop_prob(intent_prob: float, epsilon: float) -> float:
    """Probability of implementing C given intent probability and trembling hand."""
    return (1.0 - epsilon) * intent_prob + epsilon * (1.0 - intent_prob)


def is_coordinated(actions: Sequence[Action] | Iterable[int]) -> bool:
    """True iff all group members implemented the same action (N >= 2)."""
    acts = list(actions)
    if len(acts) < 2:
        raise ValueError("a group outcome needs at least two players")
    first = acts[0]
    return all(a == first for a in acts)
