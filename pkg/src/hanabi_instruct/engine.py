"""Deterministic two-player Hanabi rules engine over a fixed 20-action space.

States are immutable values: every transition builds a new state and shares
the unchanged pieces, so games can be simulated in parallel without locking.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

NUM_COLORS = 5
COLOR_NAMES = ("C0", "C1", "C2", "C3", "C4")
RANKS = (1, 2, 3, 4, 5)
COPIES_PER_RANK = (3, 2, 2, 2, 1)  # copies of ranks 1..5 within one color
DECK_SIZE = 50
HAND_SIZE = 5
NUM_PLAYERS = 2
MAX_INFO_TOKENS = 8
MAX_STRIKES = 3
NUM_ACTIONS = 20
NUM_IDENTITIES = NUM_COLORS * len(RANKS)


class ContractViolation(Exception):
    """A caller broke a precondition; results past this point are untrustworthy."""


class IllegalAction(Exception):
    """An action that the rules reject, with a machine-readable reason code."""

    def __init__(self, reason: str, message: str | None = None):
        super().__init__(message or reason)
        self.reason = reason


class Card(NamedTuple):
    color: int  # 0..4
    rank: int  # 1..5


def card_identity(card: Card) -> int:
    """Dense identity index 0..24, color-major."""
    return card.color * 5 + card.rank - 1


def copies_of(rank: int) -> int:
    return COPIES_PER_RANK[rank - 1]


def canonical_deck() -> list[Card]:
    """The 50-card deck in canonical order (color-major, ranks ascending)."""
    return [
        Card(color, rank)
        for color in range(NUM_COLORS)
        for rank in RANKS
        for _ in range(copies_of(rank))
    ]


# ---------------------------------------------------------------------------
# PRNG: splitmix64, chosen so shuffles and seed streams replay identically on
# any host or Python version.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Tiny 64-bit generator driving deck shuffles and derived game seeds."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        # rejection sampling keeps the draw unbiased
        threshold = ((1 << 64) // n) * n
        u = self.next_u64()
        while u >= threshold:
            u = self.next_u64()
        return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------


class ActionKind(Enum):
    PLAY = "play"
    DISCARD = "discard"
    CLUE_COLOR = "clue_color"
    CLUE_RANK = "clue_rank"


@dataclass(frozen=True)
class Action:
    """One of the 20 canonical actions.

    Index layout: 0-4 play slot, 5-9 discard slot, 10-14 clue color C0-C4,
    15-19 clue rank 1-5. Everything else derives from the index.
    """

    index: int

    def __post_init__(self):
        if not 0 <= self.index < NUM_ACTIONS:
            raise ContractViolation(f"action index {self.index} out of range")

    @classmethod
    def play(cls, slot: int) -> "Action":
        _check_slot(slot)
        return cls(slot)

    @classmethod
    def discard(cls, slot: int) -> "Action":
        _check_slot(slot)
        return cls(5 + slot)

    @classmethod
    def clue_color(cls, color: int) -> "Action":
        if not 0 <= color < NUM_COLORS:
            raise ContractViolation(f"color {color} out of range")
        return cls(10 + color)

    @classmethod
    def clue_rank(cls, rank: int) -> "Action":
        if rank not in RANKS:
            raise ContractViolation(f"rank {rank} out of range")
        return cls(15 + rank - 1)

    @property
    def kind(self) -> ActionKind:
        i = self.index
        if i < 5:
            return ActionKind.PLAY
        if i < 10:
            return ActionKind.DISCARD
        if i < 15:
            return ActionKind.CLUE_COLOR
        return ActionKind.CLUE_RANK

    @property
    def slot(self) -> int:
        if self.index < 5:
            return self.index
        if self.index < 10:
            return self.index - 5
        raise ContractViolation("clue actions have no slot")

    @property
    def color(self) -> int:
        if 10 <= self.index < 15:
            return self.index - 10
        raise ContractViolation("not a color clue")

    @property
    def rank(self) -> int:
        if self.index >= 15:
            return self.index - 15 + 1
        raise ContractViolation("not a rank clue")

    def describe(self) -> str:
        kind = self.kind
        if kind is ActionKind.PLAY:
            return f"play slot {self.slot}"
        if kind is ActionKind.DISCARD:
            return f"discard slot {self.slot}"
        if kind is ActionKind.CLUE_COLOR:
            return f"clue color {COLOR_NAMES[self.color]}"
        return f"clue rank {self.rank}"


def _check_slot(slot: int) -> None:
    if not 0 <= slot < HAND_SIZE:
        raise ContractViolation(f"slot {slot} out of range")


# ---------------------------------------------------------------------------
# Card knowledge
# ---------------------------------------------------------------------------

ALL_COLORS = frozenset(range(NUM_COLORS))
ALL_RANKS = frozenset(RANKS)


@dataclass(frozen=True)
class CardKnowledge:
    """What a card's owner can deduce about it from clues alone."""

    possible_colors: frozenset[int] = ALL_COLORS
    possible_ranks: frozenset[int] = ALL_RANKS
    positively_clued_color: bool = False
    positively_clued_rank: bool = False


def updated_knowledge(knowledge: CardKnowledge, clue: Action, touched: bool) -> CardKnowledge:
    """Apply one clue's positive or negative information to a single slot."""
    kind = clue.kind
    if kind is ActionKind.CLUE_COLOR:
        value = clue.color
        if touched:
            new = replace(
                knowledge,
                possible_colors=knowledge.possible_colors & {value},
                positively_clued_color=True,
            )
        else:
            new = replace(knowledge, possible_colors=knowledge.possible_colors - {value})
    elif kind is ActionKind.CLUE_RANK:
        value = clue.rank
        if touched:
            new = replace(
                knowledge,
                possible_ranks=knowledge.possible_ranks & {value},
                positively_clued_rank=True,
            )
        else:
            new = replace(knowledge, possible_ranks=knowledge.possible_ranks - {value})
    else:
        raise ContractViolation("knowledge updates require a clue action")
    if not new.possible_colors or not new.possible_ranks:
        raise ContractViolation("clue emptied a possibility set; knowledge was unsound")
    return new


# ---------------------------------------------------------------------------
# Game state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HandSlot:
    card: Card
    knowledge: CardKnowledge = CardKnowledge()
    singled_out: bool = False
    drawn_turn: int = 0


@dataclass(frozen=True)
class GameConfig:
    seed: int
    strikeout_score_zero: bool = True
    hand_size: int = HAND_SIZE
    first_player: int = 0

    def __post_init__(self):
        if self.hand_size != HAND_SIZE:
            # the 20-entry action space hard-codes 5 slots
            raise ContractViolation("two-player games use a fixed hand size of 5")
        if self.first_player not in (0, 1):
            raise ContractViolation("first_player must be 0 or 1")


@dataclass(frozen=True)
class GameState:
    config: GameConfig
    deck: tuple[Card, ...] | None  # None: hidden/unknown (redacted exports)
    hands: tuple[tuple[HandSlot, ...], tuple[HandSlot, ...]]
    fireworks: tuple[int, int, int, int, int]
    discards: tuple[Card, ...]
    info_tokens: int
    strikes: int
    current_player: int
    turns_after_deck_empty: int
    turn_number: int

    def score(self) -> int:
        return sum(self.fireworks)

    @property
    def deck_size(self) -> int | None:
        return None if self.deck is None else len(self.deck)

    def hand(self, player: int) -> tuple[HandSlot, ...]:
        return self.hands[player]


def new_game(config: GameConfig) -> GameState:
    """Shuffle by seed and deal 5 cards to each player, alternating."""
    cards = canonical_deck()
    SplitMix64(config.seed).shuffle(cards)
    hands: tuple[list[HandSlot], list[HandSlot]] = ([], [])
    idx = 0
    for _ in range(config.hand_size):
        for p in (0, 1):
            hands[p].append(HandSlot(cards[idx]))
            idx += 1
    return GameState(
        config=config,
        deck=tuple(cards[idx:]),
        hands=(tuple(hands[0]), tuple(hands[1])),
        fireworks=(0, 0, 0, 0, 0),
        discards=(),
        info_tokens=MAX_INFO_TOKENS,
        strikes=0,
        current_player=config.first_player,
        turns_after_deck_empty=0,
        turn_number=0,
    )


# ---------------------------------------------------------------------------
# Card status predicates (ground truth; belief expectations reuse these)
# ---------------------------------------------------------------------------


def discard_counts(state: GameState) -> list[int]:
    counts = [0] * NUM_IDENTITIES
    for card in state.discards:
        counts[card_identity(card)] += 1
    return counts


def is_playable(card: Card, fireworks) -> bool:
    return card.rank == fireworks[card.color] + 1


def is_endangered(card: Card, fireworks, disc_counts) -> bool:
    """Unplayed, and down to the last copy outside the discard pile."""
    if fireworks[card.color] >= card.rank:
        return False
    return copies_of(card.rank) - disc_counts[card_identity(card)] == 1


def is_unneeded(card: Card, fireworks, disc_counts) -> bool:
    """Already played, or dead because a prerequisite rank is fully discarded."""
    height = fireworks[card.color]
    if card.rank <= height:
        return True
    base = card.color * 5
    for rank in range(height + 1, card.rank):
        if disc_counts[base + rank - 1] >= copies_of(rank):
            return True
    return False


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


def is_terminal(state: GameState) -> int | None:
    """Final score when the game is over, else None."""
    if state.strikes >= MAX_STRIKES:
        return 0 if state.config.strikeout_score_zero else state.score()
    if all(h == 5 for h in state.fireworks):
        return 25
    if state.turns_after_deck_empty >= NUM_PLAYERS:
        return state.score()
    return None


def legal_actions(state: GameState) -> tuple[bool, ...]:
    """20-entry legality mask for the current player."""
    if is_terminal(state) is not None:
        raise ContractViolation("terminal state has no legal actions")
    legal = [False] * NUM_ACTIONS
    hand = state.hands[state.current_player]
    may_discard = state.info_tokens < MAX_INFO_TOKENS
    for s in range(len(hand)):
        legal[s] = True
        legal[5 + s] = may_discard
    if state.info_tokens > 0:
        partner = state.hands[1 - state.current_player]
        for slot in partner:
            legal[10 + slot.card.color] = True
            legal[15 + slot.card.rank - 1] = True
    return tuple(legal)


def _illegality_reason(state: GameState, action: Action) -> str:
    kind = action.kind
    if kind in (ActionKind.PLAY, ActionKind.DISCARD):
        if action.slot >= len(state.hands[state.current_player]):
            return "slot_empty"
        return "discard_at_max_tokens"
    if state.info_tokens == 0:
        return "no_info_tokens"
    return "empty_clue"


@dataclass(frozen=True)
class ActionOutcome:
    """Ground truth recorded while applying an action; feeds factor audits.

    Status fields (was_playable and friends) are evaluated against the state
    the action was taken in, not the successor.
    """

    action: Action
    card: Card | None = None
    was_playable: bool | None = None
    was_endangered: bool | None = None
    was_unneeded: bool | None = None
    was_singled_out: bool = False
    strike: bool = False
    completed_stack: bool = False
    touched_slots: tuple[int, ...] = ()
    singled_slot: int | None = None
    singled_card_playable: bool | None = None
    drew_card: bool = False


def apply_action(state: GameState, action: Action) -> tuple[GameState, ActionOutcome]:
    """Pure transition: returns the successor state and the realized outcome."""
    if is_terminal(state) is not None:
        raise IllegalAction("terminal", "game is over")
    if state.deck is None:
        raise ContractViolation("state has a hidden deck and cannot be advanced")
    if not legal_actions(state)[action.index]:
        raise IllegalAction(_illegality_reason(state, action), f"illegal: {action.describe()}")

    p = state.current_player
    deck_was_empty = not state.deck
    hand = state.hands[p]
    deck = state.deck
    fireworks = state.fireworks
    discards = state.discards
    tokens = state.info_tokens
    strikes = state.strikes
    new_hands = list(state.hands)
    kind = action.kind

    if kind in (ActionKind.PLAY, ActionKind.DISCARD):
        s = action.slot
        slot = hand[s]
        disc_now = discard_counts(state)
        remaining = hand[:s] + hand[s + 1 :]
        drew = False
        if deck:
            remaining = remaining + (HandSlot(deck[0], drawn_turn=state.turn_number),)
            deck = deck[1:]
            drew = True
        new_hands[p] = remaining
        playable = is_playable(slot.card, fireworks)
        strike = False
        completed = False
        if kind is ActionKind.PLAY:
            if playable:
                fw = list(fireworks)
                fw[slot.card.color] += 1
                completed = fw[slot.card.color] == 5
                if completed and tokens < MAX_INFO_TOKENS:
                    tokens += 1
                fireworks = tuple(fw)
            else:
                discards = discards + (slot.card,)
                strikes += 1
                strike = True
        else:
            discards = discards + (slot.card,)
            tokens = min(MAX_INFO_TOKENS, tokens + 1)
        outcome = ActionOutcome(
            action=action,
            card=slot.card,
            was_playable=playable,
            was_endangered=is_endangered(slot.card, state.fireworks, disc_now),
            was_unneeded=is_unneeded(slot.card, state.fireworks, disc_now),
            was_singled_out=slot.singled_out,
            strike=strike,
            completed_stack=completed,
            drew_card=drew,
        )
    else:
        q = 1 - p
        partner = state.hands[q]
        if kind is ActionKind.CLUE_COLOR:
            touched = tuple(i for i, sl in enumerate(partner) if sl.card.color == action.color)
        else:
            touched = tuple(i for i, sl in enumerate(partner) if sl.card.rank == action.rank)
        touched_set = set(touched)
        singles = len(touched) == 1
        new_partner = []
        for i, sl in enumerate(partner):
            know = updated_knowledge(sl.knowledge, action, i in touched_set)
            # a single-card clue marks its target; multi-card clues clear nothing
            singled = sl.singled_out or (singles and i == touched[0])
            new_partner.append(replace(sl, knowledge=know, singled_out=singled))
        new_hands[q] = tuple(new_partner)
        tokens -= 1
        if singles:
            target = partner[touched[0]].card
            outcome = ActionOutcome(
                action=action,
                touched_slots=touched,
                singled_slot=touched[0],
                singled_card_playable=is_playable(target, fireworks),
            )
        else:
            outcome = ActionOutcome(action=action, touched_slots=touched)

    new_state = GameState(
        config=state.config,
        deck=deck,
        hands=(new_hands[0], new_hands[1]),
        fireworks=fireworks,
        discards=discards,
        info_tokens=tokens,
        strikes=strikes,
        current_player=1 - p,
        turns_after_deck_empty=state.turns_after_deck_empty + (1 if deck_was_empty else 0),
        turn_number=state.turn_number + 1,
    )
    return new_state, outcome


def replay(config: GameConfig, action_indices) -> GameState:
    """Rebuild the final state from a seed and an action index list."""
    state = new_game(config)
    for index in action_indices:
        state, _ = apply_action(state, Action(index))
    return state
