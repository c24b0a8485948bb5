"""Shared test utilities: random playouts, state sampling, invariant checks."""

from __future__ import annotations

from collections import Counter

from hanabi_instruct.engine import (
    Action,
    GameConfig,
    GameState,
    SplitMix64,
    apply_action,
    canonical_deck,
    card_identity,
    is_terminal,
    legal_actions,
    new_game,
)

FULL_DECK_COUNTS = Counter(card_identity(c) for c in canonical_deck())


def random_legal_action(state: GameState, rng: SplitMix64) -> Action:
    mask = legal_actions(state)
    options = [i for i, ok in enumerate(mask) if ok]
    return Action(options[rng.randbelow(len(options))])


def random_playout(seed: int, on_transition=None) -> GameState:
    """Play random legal actions to the end; optionally observe transitions."""
    rng = SplitMix64(seed ^ 0xABCDEF)
    state = new_game(GameConfig(seed=seed))
    while is_terminal(state) is None:
        action = random_legal_action(state, rng)
        nxt, outcome = apply_action(state, action)
        if on_transition is not None:
            on_transition(state, action, nxt, outcome)
        state = nxt
    return state


def sample_states(n: int, seed: int, min_turn: int = 0) -> list[GameState]:
    """Mid-game states drawn from random playouts (non-terminal only)."""
    states: list[GameState] = []
    rng = SplitMix64(seed)
    while len(states) < n:
        game_seed = rng.next_u64()
        game_rng = SplitMix64(game_seed ^ 0x5EED)
        state = new_game(GameConfig(seed=game_seed))
        while is_terminal(state) is None and len(states) < n:
            if state.turn_number >= min_turn:
                states.append(state)
            state, _ = apply_action(state, random_legal_action(state, game_rng))
    return states


def card_conservation_ok(state: GameState) -> bool:
    counts = [0] * 25
    for card in state.deck or ():
        counts[card_identity(card)] += 1
    for hand in state.hands:
        for slot in hand:
            counts[card_identity(slot.card)] += 1
    for card in state.discards:
        counts[card_identity(card)] += 1
    for color, height in enumerate(state.fireworks):
        for rank in range(1, height + 1):
            counts[color * 5 + rank - 1] += 1
    return all(counts[i] == FULL_DECK_COUNTS[i] for i in range(25))


def bounds_ok(state: GameState) -> bool:
    return (
        0 <= state.info_tokens <= 8
        and 0 <= state.strikes <= 3
        and all(0 <= h <= 5 for h in state.fireworks)
        and 0 <= state.score() <= 25
    )


def knowledge_sound(state: GameState) -> bool:
    for hand in state.hands:
        for slot in hand:
            if slot.card.color not in slot.knowledge.possible_colors:
                return False
            if slot.card.rank not in slot.knowledge.possible_ranks:
                return False
    return True
