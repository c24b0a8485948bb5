"""Full-factorial coordinate-subset search for self-play score or humanness.

Each epoch evaluates a 3^4 grid over four weights with common random seeds
across all 81 configurations; the subset converges when the all-medium
configuration wins outright.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .decisions import DecisionSet
from .engine import ContractViolation, GameConfig, SplitMix64, apply_action, is_terminal, new_game
from .policy import StrategyVector, agreement, choose_action

ALL_MEDIUM = (1, 1, 1, 1)


@dataclass(frozen=True)
class ScoreStats:
    mean: float
    stddev: float
    histogram: tuple[int, ...]  # counts of scores 0..25
    n_games: int
    scores: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stddev": self.stddev,
            "histogram": list(self.histogram),
            "n_games": self.n_games,
        }


def play_game(seed: int, w_first: StrategyVector, w_second: StrategyVector) -> int:
    state = new_game(GameConfig(seed=seed))
    while (score := is_terminal(state)) is None:
        w = w_first if state.current_player == 0 else w_second
        state, _ = apply_action(state, choose_action(state, w))
    return score


def _play_game_spec(spec: tuple[int, StrategyVector, StrategyVector]) -> int:
    return play_game(*spec)


def game_seeds(seed: int, n_games: int) -> list[int]:
    """Per-game deck seeds derived from a master seed, independent of who plays."""
    rng = SplitMix64(seed)
    return [rng.next_u64() for _ in range(n_games)]


def selfplay_eval(
    w_a: StrategyVector,
    w_b: StrategyVector,
    n_games: int,
    seed: int,
    jobs: int = 1,
) -> ScoreStats:
    """Score statistics over seeded games, alternating which agent moves first."""
    if n_games < 1:
        raise ContractViolation("n_games must be >= 1")
    seeds = game_seeds(seed, n_games)
    specs = [
        (s, w_a, w_b) if i % 2 == 0 else (s, w_b, w_a) for i, s in enumerate(seeds)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_play_game_spec, specs, chunksize=max(1, n_games // (4 * jobs))))
    else:
        scores = [_play_game_spec(spec) for spec in specs]
    hist = [0] * 26
    for s in scores:
        hist[s] += 1
    arr = np.array(scores, dtype=float)
    stddev = float(arr.std(ddof=1)) if n_games > 1 else 0.0
    return ScoreStats(
        mean=float(arr.mean()),
        stddev=stddev,
        histogram=tuple(hist),
        n_games=n_games,
        scores=tuple(scores),
    )


# ---------------------------------------------------------------------------
# Factorial epochs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FactorialEpochSpec:
    subset: tuple[int, int, int, int]
    levels: tuple[tuple[float, float, float], ...]  # (low, medium, high) per factor
    games_per_config: int = 200
    seed: int = 0

    def __post_init__(self):
        if len(self.subset) != 4 or len(set(self.subset)) != 4:
            raise ContractViolation("an epoch tests exactly four distinct factors")
        if len(self.levels) != 4:
            raise ContractViolation("need one level triple per tested factor")
        for low, medium, high in self.levels:
            if not low < medium < high:
                raise ContractViolation("levels must be ordered low < medium < high")


@dataclass(frozen=True)
class EpochResult:
    spec: FactorialEpochSpec
    configs: tuple[tuple[int, int, int, int], ...]  # level indices, 81 rows
    scores: tuple[float, ...]
    best_config: tuple[int, int, int, int]
    best_weights: StrategyVector
    best_score: float
    converged: bool  # the all-medium configuration won

    def to_trace_dict(self) -> dict:
        return {
            "subset": list(self.spec.subset),
            "levels": [list(l) for l in self.spec.levels],
            "scores": [float(s) for s in self.scores],
            "winner_config": list(self.best_config),
            "winner_weights": list(self.best_weights.weights),
            "winner_score": self.best_score,
            "converged": self.converged,
        }


Objective = Callable[[StrategyVector, FactorialEpochSpec], float]


def make_selfplay_objective(jobs: int = 1) -> Objective:
    """Mean self-play score between identical copies; seeds come from the epoch
    spec so all 81 configurations share the same decks."""

    def objective(w: StrategyVector, spec: FactorialEpochSpec) -> float:
        return selfplay_eval(w, w, spec.games_per_config, spec.seed, jobs=jobs).mean

    return objective


def make_agreement_objective(decisions: DecisionSet) -> Objective:
    """Humanness: fraction of stored decisions reproduced. Never plays new games."""

    def objective(w: StrategyVector, spec: FactorialEpochSpec) -> float:
        return agreement(w, decisions)

    return objective


def config_weights(
    base_w: StrategyVector, spec: FactorialEpochSpec, config: tuple[int, int, int, int]
) -> StrategyVector:
    values = list(base_w.weights)
    for factor, level_index, levels in zip(spec.subset, config, spec.levels):
        values[factor] = levels[level_index]
    return StrategyVector(base_w.name, tuple(values))


def _medium_distance(config: tuple[int, int, int, int]) -> int:
    return sum(abs(level - 1) for level in config)


def run_epoch(
    base_w: StrategyVector,
    spec: FactorialEpochSpec,
    objective: Objective,
    _config_order: Sequence[int] | None = None,
) -> EpochResult:
    """Evaluate all 81 configurations; ties prefer the grid center."""
    configs = tuple(itertools.product((0, 1, 2), repeat=4))
    scores: list[float | None] = [None] * len(configs)
    order = _config_order if _config_order is not None else range(len(configs))
    for i in order:
        scores[i] = objective(config_weights(base_w, spec, configs[i]), spec)
    if any(s is None for s in scores):
        raise ContractViolation("every configuration must be evaluated")
    best = min(
        range(len(configs)),
        key=lambda i: (-scores[i], _medium_distance(configs[i]), configs[i]),
    )
    best_config = configs[best]
    return EpochResult(
        spec=spec,
        configs=configs,
        scores=tuple(float(s) for s in scores),
        best_config=best_config,
        best_weights=config_weights(base_w, spec, best_config),
        best_score=float(scores[best]),
        converged=best_config == ALL_MEDIUM,
    )


@dataclass
class TrainResult:
    weights: StrategyVector
    converged: bool
    hit_epoch_cap: bool
    trace: list[dict]


def train(
    base_w: StrategyVector,
    schedule: Sequence[FactorialEpochSpec],
    objective: Objective,
    max_epochs_per_subset: int = 12,
    trace_sink: Callable[[dict], None] | None = None,
) -> TrainResult:
    """Iterate epochs per subset, recentering the grid on each winner.

    The winner becomes the new medium; a factor's step halves whenever its
    winning level was low or high. A subset is done when all-medium wins.
    """
    w = base_w
    trace: list[dict] = []
    all_converged = True
    hit_cap = False
    for subset_spec in schedule:
        steps = [(high - low) / 2 for low, _, high in subset_spec.levels]
        levels = [list(triple) for triple in subset_spec.levels]
        converged = False
        for _ in range(max_epochs_per_subset):
            current = FactorialEpochSpec(
                subset=subset_spec.subset,
                levels=tuple(tuple(t) for t in levels),
                games_per_config=subset_spec.games_per_config,
                seed=subset_spec.seed,
            )
            result = run_epoch(w, current, objective)
            record = result.to_trace_dict()
            trace.append(record)
            if trace_sink is not None:
                trace_sink(record)
            w = result.best_weights
            if result.converged:
                converged = True
                break
            for k in range(4):
                if result.best_config[k] != 1:
                    steps[k] /= 2
                center = w.weights[subset_spec.subset[k]]
                levels[k] = [center - steps[k], center, center + steps[k]]
        if not converged:
            all_converged = False
            hit_cap = True
    return TrainResult(weights=w, converged=all_converged, hit_epoch_cap=hit_cap, trace=trace)


def crossplay_report(
    profiles: dict[str, StrategyVector],
    partner_name: str,
    n_games: int,
    seed: int,
    expected_best: str | None = None,
    jobs: int = 1,
) -> dict:
    """Mean scores of every profile paired with one fixed partner profile.

    When `expected_best` is given, the report flags whether that pairing
    actually achieved the maximum.
    """
    partner = profiles[partner_name]
    pairings = {}
    for name, w in profiles.items():
        stats = selfplay_eval(w, partner, n_games, seed, jobs=jobs)
        pairings[name] = stats.to_dict()
    report = {
        "partner": partner_name,
        "n_games": n_games,
        "seed": seed,
        "pairings": pairings,
    }
    if expected_best is not None:
        best = max(pairings, key=lambda n: pairings[n]["mean"])
        report["expected_best"] = expected_best
        report["observed_best"] = best
        report["ordering_holds"] = best == expected_best
    return report
