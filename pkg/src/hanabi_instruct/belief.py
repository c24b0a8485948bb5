"""Count-based possibility tracking over hidden cards.

Each hidden slot gets a distribution over identities built from its clue
knowledge and the copies its owner can see elsewhere (partner hand, discard
pile, cards already on the stacks). Cards in the owner's other slots are
deliberately not subtracted: every slot conditions on public information and
the partner's visible hand only.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import (
    Card,
    CardKnowledge,
    ContractViolation,
    GameState,
    card_identity,
    copies_of,
    discard_counts,
    is_endangered,
    is_playable,
    is_unneeded,
    updated_knowledge,
)

# Public op: identical mechanics to the engine's internal clue update,
# including the empty-possibility-set contract check.
update_knowledge_on_clue = updated_knowledge


@dataclass(frozen=True)
class IdentityDistribution:
    """Unseen-copy weights for one hidden slot, restricted to its knowledge."""

    weights: dict[Card, int]
    total: int


def visible_identity_counts(state: GameState, player: int) -> list[int]:
    """Copies of each identity `player` can see: partner hand, discards, stacks."""
    counts = [0] * 25
    for slot in state.hands[1 - player]:
        counts[card_identity(slot.card)] += 1
    for card in state.discards:
        counts[card_identity(card)] += 1
    for color, height in enumerate(state.fireworks):
        for rank in range(1, height + 1):
            counts[color * 5 + rank - 1] += 1
    return counts


def _distribution(knowledge: CardKnowledge, visible: list[int]) -> IdentityDistribution:
    weights: dict[Card, int] = {}
    total = 0
    for color in sorted(knowledge.possible_colors):
        base = color * 5
        for rank in sorted(knowledge.possible_ranks):
            remaining = copies_of(rank) - visible[base + rank - 1]
            if remaining > 0:
                weights[Card(color, rank)] = remaining
                total += remaining
    if total == 0:
        raise ContractViolation("no identity is consistent with this slot's knowledge")
    return IdentityDistribution(weights=weights, total=total)


def identity_distribution(state: GameState, player: int, slot_index: int) -> IdentityDistribution:
    hand = state.hands[player]
    if not 0 <= slot_index < len(hand):
        raise ContractViolation(f"slot {slot_index} is not occupied")
    visible = visible_identity_counts(state, player)
    return _distribution(hand[slot_index].knowledge, visible)


@dataclass(frozen=True)
class CardEventProbs:
    p_playable: float
    p_unplayable: float
    p_endangered: float
    p_unneeded: float


def _event_probs(dist: IdentityDistribution, fireworks, disc) -> CardEventProbs:
    playable = endangered = unneeded = 0
    for card, weight in dist.weights.items():
        if is_playable(card, fireworks):
            playable += weight
        if is_endangered(card, fireworks, disc):
            endangered += weight
        if is_unneeded(card, fireworks, disc):
            unneeded += weight
    total = dist.total
    p_play = playable / total
    return CardEventProbs(
        p_playable=p_play,
        p_unplayable=1.0 - p_play,
        p_endangered=endangered / total,
        p_unneeded=unneeded / total,
    )


def card_event_probabilities(state: GameState, player: int, slot_index: int) -> CardEventProbs:
    """Expected playable/endangered/unneeded indicators for one hidden slot."""
    dist = identity_distribution(state, player, slot_index)
    return _event_probs(dist, state.fireworks, discard_counts(state))


def hand_event_probabilities(state: GameState, player: int) -> list[CardEventProbs]:
    """Event probabilities for every occupied slot, sharing the visible-count scan."""
    visible = visible_identity_counts(state, player)
    disc = discard_counts(state)
    fireworks = state.fireworks
    return [
        _event_probs(_distribution(slot.knowledge, visible), fireworks, disc)
        for slot in state.hands[player]
    ]
