"""Linear strategy agent: expected rewards y = H^T w and argmax selection.

Ties are always broken toward the lowest action index so logs replay
deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import factors
from .engine import Action, ContractViolation, GameState

if TYPE_CHECKING:
    from .decisions import DecisionSet

# Materialization of unbounded weights from shipped profiles: large enough to
# dominate any |h| <= 8 entry against all other contributions, finite so
# least-squares solves stay well-posed.
W_INF = 1.0e4


@dataclass(frozen=True)
class StrategyVector:
    """A named, ordered 12-weight strategy profile."""

    name: str
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != factors.NUM_FACTORS:
            raise ContractViolation(f"expected {factors.NUM_FACTORS} weights")
        if not all(math.isfinite(w) for w in self.weights):
            raise ContractViolation("weights must be finite after materialization")

    def as_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    def with_weight(self, factor: int, value: float) -> "StrategyVector":
        updated = list(self.weights)
        updated[factor] = float(value)
        return StrategyVector(self.name, tuple(updated))

    def with_array(self, values: np.ndarray, name: str | None = None) -> "StrategyVector":
        return StrategyVector(name or self.name, tuple(float(v) for v in values))


@dataclass(frozen=True)
class OutputVector:
    y: np.ndarray  # (20,)
    legal: np.ndarray  # (20,), bool


def expected_rewards(fm: factors.FactorMatrix, w: StrategyVector) -> OutputVector:
    return OutputVector(y=fm.h.T @ w.as_array(), legal=fm.legal.copy())


def masked_argmax(y: np.ndarray, legal: np.ndarray) -> int:
    """Lowest-index argmax over legal entries."""
    if not legal.any():
        raise ContractViolation("no legal action")
    return int(np.argmax(np.where(legal, y, -np.inf)))


def choose_action(state: GameState, w: StrategyVector) -> Action:
    fm = factors.factor_matrix(state, state.current_player)
    out = expected_rewards(fm, w)
    return Action(masked_argmax(out.y, out.legal))


def agreement(w: StrategyVector, decisions: "DecisionSet") -> float:
    """Fraction of recorded decisions this strategy independently reproduces."""
    if len(decisions) == 0:
        raise ContractViolation("agreement needs a non-empty decision set")
    w_arr = w.as_array()
    hits = sum(
        1
        for rec in decisions.records
        if masked_argmax(rec.h.T @ w_arr, rec.legal) == rec.action_index
    )
    return hits / len(decisions)
