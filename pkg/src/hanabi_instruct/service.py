"""HTTP session host for live human-vs-agent play and instruction retrieval.

The human always sits in seat 0. Response bodies never contain the
identities of cards still in the human's hand; everything else (knowledge,
singled-out flags, fireworks, discards, tokens, partner hand) is exposed.
Sessions live in memory; finished sessions can be persisted as decision
logs.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import instructor, store
from .decisions import DecisionRecord, DecisionSet
from .engine import (
    Action,
    GameConfig,
    GameState,
    IllegalAction,
    apply_action,
    is_terminal,
    legal_actions,
    new_game,
)
from .factors import FACTOR_KEYS, FACTOR_LABELS, factor_matrix
from .policy import StrategyVector, choose_action, expected_rewards
from .store import DataError

HUMAN = 0
AGENT = 1


@dataclass
class Session:
    id: str
    profile_name: str
    agent: StrategyVector
    state: GameState
    seed: int
    log: list[DecisionRecord] = field(default_factory=list)
    status: str = "active"
    score: int | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


def _redacted_state(state: GameState) -> dict:
    """Client-facing snapshot; the human's own card identities stay hidden."""
    hands = []
    for player, hand in enumerate(state.hands):
        slots = []
        for slot in hand:
            entry = {
                "knowledge": {
                    "colors": sorted(slot.knowledge.possible_colors),
                    "ranks": sorted(slot.knowledge.possible_ranks),
                    "clued_color": slot.knowledge.positively_clued_color,
                    "clued_rank": slot.knowledge.positively_clued_rank,
                },
                "singled_out": slot.singled_out,
                "drawn_turn": slot.drawn_turn,
            }
            if player != HUMAN:
                entry["card"] = [slot.card.color, slot.card.rank]
            slots.append(entry)
        hands.append(slots)
    return {
        "current_player": state.current_player,
        "info_tokens": state.info_tokens,
        "strikes": state.strikes,
        "fireworks": list(state.fireworks),
        "score": state.score(),
        "discards": [[c.color, c.rank] for c in state.discards],
        "deck_size": state.deck_size,
        "turn_number": state.turn_number,
        "turns_after_deck_empty": state.turns_after_deck_empty,
        "hands": hands,
    }


def _outcome_dict(outcome) -> dict:
    d = {
        "action_index": outcome.action.index,
        "kind": outcome.action.kind.value,
        "description": outcome.action.describe(),
    }
    if outcome.card is not None:
        d.update(
            card=[outcome.card.color, outcome.card.rank],
            was_playable=outcome.was_playable,
            was_endangered=outcome.was_endangered,
            was_unneeded=outcome.was_unneeded,
            was_singled_out=outcome.was_singled_out,
            strike=outcome.strike,
            completed_stack=outcome.completed_stack,
        )
    else:
        d.update(
            touched_slots=list(outcome.touched_slots),
            singled_slot=outcome.singled_slot,
        )
    return d


class NewSessionRequest(BaseModel):
    agent_profile: str
    seed: int | None = None
    agent_first: bool = False


class ActionRequest(BaseModel):
    action_index: int


class InstructRequest(BaseModel):
    session_ids: list[str] | None = None
    decisions: list[dict] | None = None
    ideal_profile: str
    alpha: float = 0.7
    epsilon: float = 0.01


def create_app(persist_dir: str | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="hanabi-instruct session host")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def _load_profile(name: str) -> StrategyVector:
        try:
            return store.load_profile(name)
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def _session_payload(session: Session, extra: dict | None = None) -> dict:
        payload = {
            "session_id": session.id,
            "status": session.status,
            "agent_profile": session.profile_name,
            "state": _redacted_state(session.state),
            "state_hash": store.state_digest(session.state),
            "score": session.score,
            "decisions_logged": len(session.log),
        }
        if session.status == "active" and session.state.current_player == HUMAN:
            payload["legal_mask"] = [bool(b) for b in legal_actions(session.state)]
        else:
            payload["legal_mask"] = None
        if extra:
            payload.update(extra)
        return payload

    def _agent_reply(session: Session) -> dict | None:
        if session.status != "active" or session.state.current_player != AGENT:
            return None
        action = choose_action(session.state, session.agent)
        session.state, outcome = apply_action(session.state, action)
        _maybe_finish(session)
        return _outcome_dict(outcome)

    def _maybe_finish(session: Session) -> None:
        score = is_terminal(session.state)
        if score is None:
            return
        session.status = "finished"
        session.score = score
        if persist_dir and session.log:
            path = Path(persist_dir)
            path.mkdir(parents=True, exist_ok=True)
            store.write_decisions(path / f"{session.id}.jsonl", session.log)

    @app.get("/profiles")
    def profiles() -> dict:
        return {"profiles": list(store.PROFILE_NAMES)}

    @app.post("/sessions", status_code=201)
    def create_session(req: NewSessionRequest) -> dict:
        agent = _load_profile(req.agent_profile)
        seed = req.seed if req.seed is not None else int.from_bytes(os.urandom(8), "big")
        config = GameConfig(seed=seed, first_player=AGENT if req.agent_first else HUMAN)
        session = Session(
            id=uuid.uuid4().hex,
            profile_name=req.agent_profile,
            agent=agent,
            state=new_game(config),
            seed=seed,
        )
        sessions[session.id] = session
        opening = _agent_reply(session)
        return _session_payload(session, {"agent_move": opening})

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_payload(_get_session(session_id))

    @app.post("/sessions/{session_id}/action")
    def post_action(session_id: str, req: ActionRequest) -> dict:
        session = _get_session(session_id)
        with session.lock:
            if session.status != "active" or session.state.current_player != HUMAN:
                raise HTTPException(status_code=409, detail="not the human's turn")
            if not 0 <= req.action_index < 20:
                raise HTTPException(status_code=422, detail="action_index out of range")
            state = session.state
            mask = legal_actions(state)
            if not mask[req.action_index]:
                raise HTTPException(status_code=422, detail="illegal action")
            fm = factor_matrix(state, HUMAN)
            session.log.append(
                DecisionRecord(
                    h=fm.h,
                    legal=fm.legal,
                    action_index=req.action_index,
                    source="human",
                    actor=HUMAN,
                    state=state,
                )
            )
            try:
                session.state, outcome = apply_action(state, Action(req.action_index))
            except IllegalAction as exc:  # mask already checked; defensive
                session.log.pop()
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            _maybe_finish(session)
            agent_move = _agent_reply(session)
            return _session_payload(
                session, {"human_outcome": _outcome_dict(outcome), "agent_move": agent_move}
            )

    @app.get("/sessions/{session_id}/hpf")
    def get_hpf(session_id: str, masked: bool = Query(default=False)) -> dict:
        session = _get_session(session_id)
        if session.status != "active" or session.state.current_player != HUMAN:
            raise HTTPException(status_code=409, detail="not the human's turn")
        fm = factor_matrix(session.state, HUMAN)
        out = expected_rewards(fm, session.agent)
        legal = [bool(b) for b in fm.legal]
        h = [[float(v) for v in row] for row in fm.h]
        y = [float(v) for v in out.y]
        if masked:
            h = [[v if legal[i] else None for i, v in enumerate(row)] for row in h]
            y = [v if legal[i] else None for i, v in enumerate(y)]
        return {
            "h": h,
            "y": y,
            "legal_mask": legal,
            "factor_keys": list(FACTOR_KEYS),
            "factor_labels": list(FACTOR_LABELS),
            "weights": [float(v) for v in session.agent.weights],
            "masked": masked,
        }

    @app.post("/instruct")
    def post_instruct(req: InstructRequest) -> dict:
        ideal = _load_profile(req.ideal_profile)
        records: list[DecisionRecord] = []
        for session_id in req.session_ids or []:
            records.extend(_get_session(session_id).log)
        for payload in req.decisions or []:
            try:
                records.append(store.decision_record_from_dict(payload))
            except DataError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        if not records:
            raise HTTPException(status_code=422, detail="no decisions available")
        result = instructor.instruct(
            DecisionSet(records), ideal, alpha=req.alpha, epsilon=req.epsilon
        )
        return result.to_dict()

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
