"""Canonical JSON serialization for states, decision logs, weights and traces.

All formats round-trip losslessly and are gated by an explicit schema
version. Floats are written with Python's shortest round-trip decimal
representation. Exported human-facing logs omit the hidden deck order;
full-fidelity replay logs include it behind a flag.
"""

from __future__ import annotations

import hashlib
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .decisions import DecisionRecord, DecisionSet
from .engine import (
    Card,
    CardKnowledge,
    GameConfig,
    GameState,
    HandSlot,
)
from .factors import FACTOR_KEYS, factor_matrix
from .policy import W_INF, StrategyVector

SCHEMA_VERSION = 1

PROFILE_FILES = {
    "human-like": "human_like.json",
    "human-complementary": "human_complementary.json",
    "self-play": "self_play.json",
}
PROFILE_NAMES = tuple(PROFILE_FILES)


class DataError(Exception):
    """Malformed or inconsistent data in a file or payload."""


# ---------------------------------------------------------------------------
# Game states
# ---------------------------------------------------------------------------


def _card_to_json(card: Card) -> list[int]:
    return [card.color, card.rank]


def _card_from_json(value) -> Card:
    color, rank = value
    if not (0 <= color <= 4 and 1 <= rank <= 5):
        raise DataError(f"bad card {value!r}")
    return Card(int(color), int(rank))


def _knowledge_to_json(k: CardKnowledge) -> dict:
    return {
        "colors": sorted(k.possible_colors),
        "ranks": sorted(k.possible_ranks),
        "clued_color": k.positively_clued_color,
        "clued_rank": k.positively_clued_rank,
    }


def _knowledge_from_json(d: dict) -> CardKnowledge:
    return CardKnowledge(
        possible_colors=frozenset(int(c) for c in d["colors"]),
        possible_ranks=frozenset(int(r) for r in d["ranks"]),
        positively_clued_color=bool(d["clued_color"]),
        positively_clued_rank=bool(d["clued_rank"]),
    )


def _slot_to_json(slot: HandSlot) -> dict:
    return {
        "card": _card_to_json(slot.card),
        "knowledge": _knowledge_to_json(slot.knowledge),
        "singled_out": slot.singled_out,
        "drawn_turn": slot.drawn_turn,
    }


def _slot_from_json(d: dict) -> HandSlot:
    return HandSlot(
        card=_card_from_json(d["card"]),
        knowledge=_knowledge_from_json(d["knowledge"]),
        singled_out=bool(d["singled_out"]),
        drawn_turn=int(d["drawn_turn"]),
    )


def serialize_state(state: GameState, include_deck: bool = False) -> dict:
    """State snapshot with a stable field order; deck omitted unless asked for."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "seed": state.config.seed,
            "strikeout_score_zero": state.config.strikeout_score_zero,
            "hand_size": state.config.hand_size,
            "first_player": state.config.first_player,
        },
        "deck": None,
        "hands": [[_slot_to_json(s) for s in hand] for hand in state.hands],
        "fireworks": list(state.fireworks),
        "discards": [_card_to_json(c) for c in state.discards],
        "info_tokens": state.info_tokens,
        "strikes": state.strikes,
        "current_player": state.current_player,
        "turns_after_deck_empty": state.turns_after_deck_empty,
        "turn_number": state.turn_number,
    }
    if include_deck and state.deck is not None:
        payload["deck"] = [_card_to_json(c) for c in state.deck]
    return payload


def parse_state(d: dict) -> GameState:
    try:
        if d["schema_version"] != SCHEMA_VERSION:
            raise DataError(f"unsupported state schema_version {d['schema_version']!r}")
        cfg = d["config"]
        config = GameConfig(
            seed=int(cfg["seed"]),
            strikeout_score_zero=bool(cfg["strikeout_score_zero"]),
            hand_size=int(cfg["hand_size"]),
            first_player=int(cfg.get("first_player", 0)),
        )
        deck = d.get("deck")
        return GameState(
            config=config,
            deck=None if deck is None else tuple(_card_from_json(c) for c in deck),
            hands=tuple(tuple(_slot_from_json(s) for s in hand) for hand in d["hands"]),
            fireworks=tuple(int(h) for h in d["fireworks"]),
            discards=tuple(_card_from_json(c) for c in d["discards"]),
            info_tokens=int(d["info_tokens"]),
            strikes=int(d["strikes"]),
            current_player=int(d["current_player"]),
            turns_after_deck_empty=int(d["turns_after_deck_empty"]),
            turn_number=int(d["turn_number"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed state: {exc}") from exc


def state_digest(state: GameState) -> str:
    """Stable hash of the full state (deck included when known)."""
    blob = json.dumps(serialize_state(state, include_deck=True), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Decision records
# ---------------------------------------------------------------------------


def decision_record_to_dict(
    record: DecisionRecord, include_h: bool = True, include_deck: bool = False
) -> dict:
    if record.state is None:
        raise DataError("only records carrying a state snapshot can be exported")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "state": serialize_state(record.state, include_deck=include_deck),
        "actor": record.actor,
        "action_index": record.action_index,
        "legal_mask": [int(b) for b in record.legal],
        "source": record.source,
    }
    if include_h:
        payload["factor_matrix"] = [[float(v) for v in row] for row in record.h]
    return payload


def decision_record_from_dict(d: dict) -> DecisionRecord:
    try:
        if d["schema_version"] != SCHEMA_VERSION:
            raise DataError(f"unsupported schema_version {d['schema_version']!r}")
        state = parse_state(d["state"])
        actor = int(d["actor"])
        action_index = int(d["action_index"])
        legal = np.array([bool(b) for b in d["legal_mask"]], dtype=bool)
        source = str(d["source"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed decision record: {exc}") from exc
    if len(legal) != 20:
        raise DataError("legal_mask must have 20 entries")
    if not 0 <= action_index < 20 or not legal[action_index]:
        raise DataError(f"action_index {action_index} is not legal per the record's mask")
    if actor != state.current_player:
        raise DataError("record actor is not the player to move in the stored state")
    if "factor_matrix" in d:
        h = np.array(d["factor_matrix"], dtype=float)
        if h.shape != (12, 20):
            raise DataError(f"factor_matrix has shape {h.shape}, expected (12, 20)")
    else:
        h = factor_matrix(state, actor).h
    return DecisionRecord(
        h=h, legal=legal, action_index=action_index, source=source, actor=actor, state=state
    )


def write_decisions(
    path, records, include_h: bool = True, include_deck: bool = False
) -> int:
    """Write records as JSON Lines; returns the number written."""
    records = records.records if isinstance(records, DecisionSet) else list(records)
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(decision_record_to_dict(record, include_h, include_deck)))
            fh.write("\n")
    return len(records)


def read_decisions(path) -> DecisionSet:
    """Read a JSON Lines decision log, recomputing factor matrices when absent."""
    records = []
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            try:
                records.append(decision_record_from_dict(payload))
            except DataError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return DecisionSet(records)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


def weights_to_dict(w: StrategyVector) -> dict:
    return {
        "name": w.name,
        "weights": [float(v) for v in w.weights],
        "factor_order": list(FACTOR_KEYS),
    }


def weights_from_dict(d: dict) -> StrategyVector:
    try:
        name = str(d["name"])
        raw = list(d["weights"])
        order = list(d["factor_order"])
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed weights file: {exc}") from exc
    if order != list(FACTOR_KEYS):
        raise DataError(
            "factor_order mismatch: weights files must list the twelve factors "
            f"in the frozen order {list(FACTOR_KEYS)}"
        )
    if len(raw) != 12:
        raise DataError(f"expected 12 weights, got {len(raw)}")
    values = []
    for v in raw:
        if v == "inf":
            values.append(W_INF)
        elif v == "-inf":
            values.append(-W_INF)
        elif isinstance(v, (int, float)) and math.isfinite(v):
            values.append(float(v))
        else:
            raise DataError(f"bad weight entry {v!r}")
    return StrategyVector(name=name, weights=tuple(values))


def save_weights(path, w: StrategyVector) -> None:
    Path(path).write_text(json.dumps(weights_to_dict(w), indent=2) + "\n", encoding="utf-8")


def load_weights(path) -> StrategyVector:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    return weights_from_dict(payload)


def load_profile(name: str) -> StrategyVector:
    """One of the three shipped strategy profiles."""
    key = name.replace("_", "-")
    if key not in PROFILE_FILES:
        raise DataError(f"unknown profile {name!r}; known: {', '.join(PROFILE_NAMES)}")
    text = resources.files("hanabi_instruct").joinpath("profiles", PROFILE_FILES[key]).read_text()
    return weights_from_dict(json.loads(text))


def resolve_weights(spec: str) -> StrategyVector:
    """A shipped profile name, or a path to a weights JSON file."""
    key = spec.replace("_", "-")
    if key in PROFILE_FILES:
        return load_profile(key)
    path = Path(spec)
    if not path.exists():
        raise DataError(f"{spec!r} is neither a known profile nor an existing file")
    return load_weights(path)


# ---------------------------------------------------------------------------
# Traces and schemas
# ---------------------------------------------------------------------------


def write_jsonl(path, rows) -> int:
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row))
            fh.write("\n")
            count += 1
    return count


def read_jsonl(path) -> list[dict]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
    return rows


def get_schema(name: str) -> dict:
    """A packaged JSON-schema document (the repo's public file contracts)."""
    text = resources.files("hanabi_instruct").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
