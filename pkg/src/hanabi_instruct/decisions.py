"""Observed-decision bundles: the inputs to humanness fitting and instruction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import (
    Action,
    ContractViolation,
    GameConfig,
    GameState,
    SplitMix64,
    apply_action,
    is_terminal,
    new_game,
)
from .factors import factor_matrix
from .policy import StrategyVector, expected_rewards, masked_argmax


@dataclass
class DecisionRecord:
    """One observed decision: the factor matrix, legality mask and chosen action."""

    h: np.ndarray  # (12, 20)
    legal: np.ndarray  # (20,), bool
    action_index: int
    source: str = "unknown"
    actor: int = 0
    state: GameState | None = None

    def __post_init__(self):
        if not self.legal[self.action_index]:
            raise ContractViolation("recorded action is illegal in its own record")


@dataclass
class DecisionSet:
    records: list[DecisionRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def generate_selfplay_decisions(
    w: StrategyVector,
    count: int,
    seed: int,
    record_player: int | None = 0,
    source: str | None = None,
) -> DecisionSet:
    """Play self-play games with `w`, logging decisions until `count` records
    exist. `record_player` selects one seat; None records both seats, which
    avoids phase-locking artifacts when turn parity correlates with the
    decision type."""
    if count < 1:
        raise ContractViolation("need at least one decision")
    source = source or f"agent:{w.name}"
    rng = SplitMix64(seed)
    records: list[DecisionRecord] = []
    while len(records) < count:
        state = new_game(GameConfig(seed=rng.next_u64()))
        while is_terminal(state) is None and len(records) < count:
            actor = state.current_player
            fm = factor_matrix(state, actor)
            out = expected_rewards(fm, w)
            index = masked_argmax(out.y, out.legal)
            if record_player is None or actor == record_player:
                records.append(
                    DecisionRecord(
                        h=fm.h,
                        legal=fm.legal,
                        action_index=index,
                        source=source,
                        actor=actor,
                        state=state,
                    )
                )
            state, _ = apply_action(state, Action(index))
    return DecisionSet(records)


def selfplay_decision_source(w: StrategyVector, seed: int):
    """Callable yielding fresh decision batches from `w` playing itself."""
    rng = SplitMix64(seed)

    def source(count: int) -> DecisionSet:
        return generate_selfplay_decisions(w, count, rng.next_u64())

    return source
