"""Linear policy: reward computation, argmax selection, agreement."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hanabi_instruct import policy, store
from hanabi_instruct.decisions import generate_selfplay_decisions
from hanabi_instruct.engine import (
    Action,
    Card,
    ContractViolation,
    GameConfig,
    HandSlot,
    legal_actions,
    new_game,
)
from hanabi_instruct.factors import FactorMatrix, factor_matrix
from hanabi_instruct.policy import StrategyVector, W_INF

from _helpers import sample_states

ZERO = StrategyVector("zero", (0.0,) * 12)


def _fm(h, legal=None):
    legal = np.ones(20, dtype=bool) if legal is None else np.asarray(legal, dtype=bool)
    return FactorMatrix(h=np.asarray(h, dtype=float), legal=legal)


def triple_loop_rewards(h, w):
    """Independent oracle: naive elementwise multiply-accumulate."""
    y = [0.0] * 20
    for i in range(20):
        acc = 0.0
        for f in range(12):
            acc += h[f][i] * w[f]
        y[i] = acc
    return y


def test_zero_weights_zero_rewards():
    fm = _fm(np.random.default_rng(0).normal(size=(12, 20)))
    out = policy.expected_rewards(fm, ZERO)
    assert not out.y.any()


def test_single_entry_matrix():
    h = np.zeros((12, 20))
    h[0, 3] = 0.5
    out = policy.expected_rewards(_fm(h), ZERO.with_weight(0, 2.0))
    assert out.y[3] == 1.0
    assert np.count_nonzero(out.y) == 1


def test_matches_triple_loop_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        h = rng.normal(size=(12, 20))
        w = StrategyVector("r", tuple(rng.normal(size=12)))
        out = policy.expected_rewards(_fm(h), w)
        oracle = triple_loop_rewards(h, w.weights)
        assert np.max(np.abs(out.y - np.array(oracle))) <= 1e-12


def test_linearity():
    rng = np.random.default_rng(7)
    h = rng.normal(size=(12, 20))
    a = rng.normal(size=12)
    b = rng.normal(size=12)
    fm = _fm(h)
    ya = policy.expected_rewards(fm, StrategyVector("a", tuple(a))).y
    yb = policy.expected_rewards(fm, StrategyVector("b", tuple(b))).y
    yab = policy.expected_rewards(fm, StrategyVector("ab", tuple(a + b))).y
    assert np.max(np.abs(yab - (ya + yb))) <= 1e-12


def test_tie_break_picks_first_legal():
    y = np.zeros(20)
    legal = np.zeros(20, dtype=bool)
    legal[4:] = True
    assert policy.masked_argmax(y, legal) == 4


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_argmax_invariances(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    y = rng.normal(size=20)
    legal = rng.random(20) < 0.7
    if not legal.any():
        legal[0] = True
    scale = data.draw(st.floats(min_value=0.01, max_value=100.0))
    shift = data.draw(st.floats(min_value=-50.0, max_value=50.0))
    base = policy.masked_argmax(y, legal)
    assert policy.masked_argmax(scale * y, legal) == base
    assert policy.masked_argmax(y + shift, legal) == base


def test_chosen_action_always_legal():
    w = store.load_profile("self-play")
    for state in sample_states(100, seed=55):
        action = policy.choose_action(state, w)
        assert legal_actions(state)[action.index]


def test_positive_scaling_preserves_choice():
    w = store.load_profile("human-like")
    scaled = StrategyVector("scaled", tuple(3.0 * v for v in w.weights))
    for state in sample_states(40, seed=56):
        assert policy.choose_action(state, w) == policy.choose_action(state, scaled)


def test_single_out_clue_dominates_hand_computed():
    # partner holds exactly one C0 card, the playable C0-1; under human-like
    # weights the single-out clue column evaluates to 3 + 1.5 + 0.5*8 = 8.5
    # and beats every play column (|y| <= 1) and every other clue
    state = new_game(GameConfig(seed=70))
    partner = tuple(
        HandSlot(c) for c in [Card(0, 1), Card(1, 1), Card(1, 3), Card(2, 2), Card(3, 4)]
    )
    state = replace(state, hands=(state.hands[0], partner))
    w = store.load_profile("human-like")
    fm_out = policy.expected_rewards(factor_matrix(state, 0), w)
    clue = Action.clue_color(0)
    assert fm_out.y[clue.index] == 8.5
    assert policy.choose_action(state, w) == clue


def test_strategy_vector_validation():
    with pytest.raises(ContractViolation):
        StrategyVector("short", (1.0,) * 11)
    with pytest.raises(ContractViolation):
        StrategyVector("inf", (float("inf"),) + (0.0,) * 11)


def test_agreement_self_consistency():
    w = store.load_profile("self-play")
    decisions = generate_selfplay_decisions(w, 60, seed=11)
    assert policy.agreement(w, decisions) == 1.0
    perturbed = w.with_weight(5, 10.0)
    assert policy.agreement(perturbed, decisions) <= 1.0


def test_agreement_golden_baseline():
    # 376 synthetic decisions from the self-play profile, evaluated with the
    # human-like profile; regression pin for the repository
    sp = store.load_profile("self-play")
    hl = store.load_profile("human-like")
    decisions = generate_selfplay_decisions(sp, 376, seed=376)
    assert policy.agreement(hl, decisions) == pytest.approx(36 / 376, abs=1e-12)


def test_w_inf_value():
    assert W_INF == 1.0e4
