"""The 12x20 matrix of expected per-action effects on the strategy factors.

Column i holds the factor-effect vector of action i; the factor order is a
frozen public contract (weights files, decision logs and API payloads all
index by it). Entries are non-negative magnitudes; all signs live in the
strategy weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import belief
from .engine import (
    Action,
    ActionKind,
    ActionOutcome,
    ContractViolation,
    GameState,
    NUM_ACTIONS,
    is_playable,
    is_terminal,
    legal_actions,
)

NUM_FACTORS = 12

FACTOR_KEYS = (
    "play-playable",
    "play-unplayable-lt2strikes",
    "play-unplayable-2strikes",
    "other-plays-playable",
    "other-plays-unplayable",
    "discard-non-endangered",
    "discard-unneeded",
    "play-singled-out",
    "clue-singles-playable",
    "clue-singles-nonplayable",
    "discard-singled-out",
    "clue-value-per-token",
)

FACTOR_LABELS = (
    "Playing a playable card",
    "Playing an unplayable card (fewer than 2 strikes)",
    "Playing an unplayable card (2 strikes)",
    "Other player playing a playable card",
    "Other player playing an unplayable card",
    "Discarding a non-endangered card",
    "Discarding an unneeded card",
    "Playing a singled out card",
    "Giving a clue that singles out a playable card",
    "Giving a clue that singles out a non-playable card",
    "Discarding a singled out card",
    "Added value to any clue per info token held",
)


class FactorId(IntEnum):
    PLAY_PLAYABLE = 0
    PLAY_UNPLAYABLE_LT2 = 1
    PLAY_UNPLAYABLE_2STRIKES = 2
    OTHER_PLAYS_PLAYABLE = 3
    OTHER_PLAYS_UNPLAYABLE = 4
    DISCARD_NON_ENDANGERED = 5
    DISCARD_UNNEEDED = 6
    PLAY_SINGLED_OUT = 7
    CLUE_SINGLES_PLAYABLE = 8
    CLUE_SINGLES_NONPLAYABLE = 9
    DISCARD_SINGLED_OUT = 10
    CLUE_VALUE_PER_TOKEN = 11

    @property
    def key(self) -> str:
        return FACTOR_KEYS[self]

    @property
    def label(self) -> str:
        return FACTOR_LABELS[self]


@dataclass(frozen=True)
class FactorMatrix:
    h: np.ndarray  # (12, 20), float64
    legal: np.ndarray  # (20,), bool


def factor_matrix(state: GameState, actor: int) -> FactorMatrix:
    """Expected factor effects of every action from the actor's perspective.

    Columns of illegal actions are still filled in (zeros wherever a
    predicate does not apply). Zero lookahead: clue columns value only the
    immediate consequence of the clue itself.
    """
    if is_terminal(state) is not None:
        raise ContractViolation("terminal state has no factor matrix")
    if actor != state.current_player:
        raise ContractViolation("factor matrix is defined for the player to move")

    legal = np.array(legal_actions(state), dtype=bool)
    h = np.zeros((NUM_FACTORS, NUM_ACTIONS))
    hand = state.hands[actor]
    probs = belief.hand_event_probabilities(state, actor)
    two_strikes = state.strikes == 2

    for s, slot in enumerate(hand):
        pr = probs[s]
        h[0, s] = pr.p_playable
        h[2 if two_strikes else 1, s] = pr.p_unplayable
        h[5, 5 + s] = 1.0 - pr.p_endangered
        h[6, 5 + s] = pr.p_unneeded
        if slot.singled_out:
            h[7, s] = 1.0
            h[10, 5 + s] = 1.0

    partner = state.hands[1 - actor]
    fireworks = state.fireworks
    tokens = float(state.info_tokens)
    for index in range(10, NUM_ACTIONS):
        action = Action(index)
        if action.kind is ActionKind.CLUE_COLOR:
            touched = [i for i, sl in enumerate(partner) if sl.card.color == action.color]
            newly = [i for i in touched if not partner[i].knowledge.positively_clued_color]
        else:
            touched = [i for i, sl in enumerate(partner) if sl.card.rank == action.rank]
            newly = [i for i in touched if not partner[i].knowledge.positively_clued_rank]
        if any(is_playable(partner[i].card, fireworks) for i in newly):
            h[3, index] = 1.0
        if len(touched) == 1:
            playable = is_playable(partner[touched[0]].card, fireworks)
            h[8, index] = 1.0 if playable else 0.0
            h[9, index] = 0.0 if playable else 1.0
            h[4, index] = 0.0 if playable else 1.0
        h[11, index] = tokens
    return FactorMatrix(h=h, legal=legal)


def audit_factors(state: GameState, action: Action, outcome: ActionOutcome) -> np.ndarray:
    """Realized 0/1 indicators for the rows the taken action could affect.

    `state` is the state the action was taken in. Rows for other action
    kinds stay zero; rows 3, 4 and 11 have no single-ply realization and are
    never audited.
    """
    v = np.zeros(NUM_FACTORS)
    kind = action.kind
    if kind is ActionKind.PLAY:
        v[0] = 1.0 if outcome.was_playable else 0.0
        v[2 if state.strikes == 2 else 1] = 0.0 if outcome.was_playable else 1.0
        v[7] = 1.0 if outcome.was_singled_out else 0.0
    elif kind is ActionKind.DISCARD:
        v[5] = 0.0 if outcome.was_endangered else 1.0
        v[6] = 1.0 if outcome.was_unneeded else 0.0
        v[10] = 1.0 if outcome.was_singled_out else 0.0
    elif len(outcome.touched_slots) == 1:
        v[8] = 1.0 if outcome.singled_card_playable else 0.0
        v[9] = 0.0 if outcome.singled_card_playable else 1.0
    return v
