"""Strategy-correction math: target construction, stacked least squares,
quality scoring, greedy sparsification and instruction rendering.

Given a reference strategy and a set of observed decisions, `solve_dw` finds
the minimum-norm weight change that moves the reference toward making the
same decisions; `-dw` rendered per factor is the instruction for the observed
party. Argmax comparisons are restricted to each record's legal-action mask,
since that is the menu the decisions were actually made from.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import policy
from .decisions import DecisionSet
from .engine import ContractViolation
from .factors import NUM_FACTORS, FactorId, FactorMatrix
from .policy import StrategyVector, masked_argmax


@dataclass(frozen=True)
class StrategyDelta:
    values: np.ndarray  # (12,)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.values))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class InstructionResult:
    dw_dense: StrategyDelta
    dw_sparse: StrategyDelta
    q_dense: float
    q_sparse: float
    alpha: float
    epsilon: float
    rendered: tuple[str, ...]
    decisions_analyzed: int

    def to_dict(self) -> dict:
        return {
            "dw_dense": [float(v) for v in self.dw_dense.values],
            "dw_sparse": [float(v) for v in self.dw_sparse.values],
            "q_dense": self.q_dense,
            "q_sparse": self.q_sparse,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "rendered": list(self.rendered),
            "decisions_analyzed": self.decisions_analyzed,
        }


def _as_values(dw) -> np.ndarray:
    return dw.values if isinstance(dw, StrategyDelta) else np.asarray(dw, dtype=float)


def z_from(
    y: np.ndarray, t: int, epsilon: float, legal: np.ndarray | None = None
) -> np.ndarray:
    """Nearest output vector whose argmax is the observed action `t`.

    If `t` already wins, the vector is returned unchanged (no correction is
    owed). Otherwise entries at or above the pivot m (the mean of entries
    strictly greater than y[t]) are clamped to m and z[t] = m + epsilon, so
    t wins with margin exactly epsilon.
    """
    y = np.asarray(y, dtype=float)
    if epsilon <= 0:
        raise ContractViolation("epsilon must be positive")
    if legal is None:
        legal = np.ones(len(y), dtype=bool)
    if not legal[t]:
        raise ContractViolation("target action is illegal in this record")
    if masked_argmax(y, legal) == t:
        return y.copy()
    above = y[legal & (y > y[t])]
    m = float(above.mean()) if above.size else float(y[t])
    z = y.copy()
    others = legal.copy()
    others[t] = False
    z[others & (y >= m)] = m
    z[t] = m + epsilon
    return z


def solve_dw(decisions: DecisionSet, w_ref: StrategyVector, epsilon: float) -> StrategyDelta:
    """Minimum-norm least-squares weight change moving `w_ref` toward the
    observed decisions.

    Stacks every record's transposed factor matrix into a tall system and
    solves it with a rank-revealing (SVD) solver; rank-deficient systems are
    the norm, not the exception.
    """
    if len(decisions) == 0:
        raise ContractViolation("empty decision set")
    w_arr = w_ref.as_array()
    blocks = []
    residuals = []
    for rec in decisions.records:
        ht = rec.h.T  # (20, 12)
        y = ht @ w_arr
        z = z_from(y, rec.action_index, epsilon, rec.legal)
        blocks.append(ht)
        residuals.append(z - y)
    stacked = np.vstack(blocks)
    r = np.concatenate(residuals)
    dw, *_ = np.linalg.lstsq(stacked, r, rcond=None)
    return StrategyDelta(dw)


def quality(decisions: DecisionSet, w_ref: StrategyVector, dw) -> float:
    """Fraction of observed decisions explained as a dw-variation on w_ref."""
    if len(decisions) == 0:
        raise ContractViolation("empty decision set")
    w = w_ref.as_array() + _as_values(dw)
    hits = sum(
        1
        for rec in decisions.records
        if masked_argmax(rec.h.T @ w, rec.legal) == rec.action_index
    )
    return hits / len(decisions)


def lambda_merit(
    hs: Sequence[np.ndarray],
    targets: Sequence[np.ndarray],
    factor_subset: Sequence[int] | None = None,
) -> float:
    """Best-fit mean residual of the linear model over full output vectors.

    Measures how well any weight vector (optionally restricted to a factor
    subset) can reproduce the given outputs; ablating a useful factor makes
    it rise. Only computable when full target outputs are available, i.e.
    when emulating another agent.
    """
    if len(hs) == 0 or len(hs) != len(targets):
        raise ContractViolation("need matched factor matrices and target outputs")
    cols = list(factor_subset) if factor_subset is not None else list(range(NUM_FACTORS))
    blocks = [np.asarray(h, dtype=float).T[:, cols] for h in hs]
    stacked = np.vstack(blocks)
    y = np.concatenate([np.asarray(t, dtype=float) for t in targets])
    w, *_ = np.linalg.lstsq(stacked, y, rcond=None)
    norms = [
        float(np.linalg.norm(np.asarray(t, dtype=float) - b @ w))
        for b, t in zip(blocks, targets)
    ]
    return float(np.mean(norms))


def sparsify(
    decisions: DecisionSet, w_ref: StrategyVector, dw: StrategyDelta, alpha: float
) -> StrategyDelta:
    """Greedily zero entries of dw while quality stays above alpha.

    Each pass removes the entry whose removal keeps quality highest
    (ties: smaller magnitude, then lower factor index) and commits only
    while the resulting quality stays strictly above the threshold.
    """
    q = quality(decisions, w_ref, dw)
    if q < alpha:
        warnings.warn(
            f"quality {q:.3f} is below threshold {alpha:.3f}; returning the dense correction",
            stacklevel=2,
        )
        return StrategyDelta(dw.values.copy())
    values = dw.values.copy()
    while True:
        support = np.flatnonzero(values)
        if support.size == 0:
            break
        best_key = None
        best_factor = -1
        best_q = 0.0
        for f in support:
            trial = values.copy()
            trial[f] = 0.0
            qf = quality(decisions, w_ref, trial)
            key = (-qf, abs(values[f]), f)
            if best_key is None or key < best_key:
                best_key, best_factor, best_q = key, int(f), qf
        if best_q > alpha:
            values[best_factor] = 0.0
        else:
            break
    return StrategyDelta(values)


def render_instructions(dw: StrategyDelta) -> tuple[str, ...]:
    """Human-readable corrections from -dw, largest magnitude first."""
    entries = sorted(
        ((-dw.values[f], f) for f in dw.support),
        key=lambda e: (-abs(e[0]), e[1]),
    )
    return tuple(
        f"value {FactorId(f).label} {'more' if v > 0 else 'less'}" for v, f in entries
    )


def instruct(
    decisions: DecisionSet, ideal: StrategyVector, alpha: float, epsilon: float
) -> InstructionResult:
    """Full pipeline: solve, score, sparsify, render."""
    dense = solve_dw(decisions, ideal, epsilon)
    q_dense = quality(decisions, ideal, dense)
    sparse = sparsify(decisions, ideal, dense, alpha)
    q_sparse = quality(decisions, ideal, sparse)
    return InstructionResult(
        dw_dense=dense,
        dw_sparse=sparse,
        q_dense=q_dense,
        q_sparse=q_sparse,
        alpha=alpha,
        epsilon=epsilon,
        rendered=render_instructions(sparse),
        decisions_analyzed=len(decisions),
    )


def perception_equivalent_dw(
    fm: FactorMatrix | np.ndarray, dh: np.ndarray, w: StrategyVector
) -> StrategyDelta:
    """Strategy change equivalent to the observation error dh under weights w.

    Solves H^T dw ~= dh^T w in the least-squares sense via the SVD
    pseudoinverse, so H^T dw is exactly the projection of dh^T w onto the
    column space of H^T even when H H^T is singular.
    """
    h = fm.h if isinstance(fm, FactorMatrix) else np.asarray(fm, dtype=float)
    target = np.asarray(dh, dtype=float).T @ w.as_array()
    dw, *_ = np.linalg.lstsq(h.T, target, rcond=None)
    return StrategyDelta(dw)


@dataclass(frozen=True)
class EmulationPoint:
    batch: int
    weights: np.ndarray  # (12,) weights entering this batch
    agreement: float  # agreement of those weights on this batch's decisions
    delta: np.ndarray  # (12,) correction computed from this batch

    def to_dict(self) -> dict:
        return {
            "batch": self.batch,
            "weights": [float(v) for v in self.weights],
            "agreement": self.agreement,
            "delta": [float(v) for v in self.delta],
        }


def iterative_emulation(
    w_start: StrategyVector,
    decision_source: Callable[[int], DecisionSet],
    batches: int,
    g: int,
    epsilon: float,
    step: float = 1.0,
) -> list[EmulationPoint]:
    """Repeatedly correct `w_start` toward a decision source, one batch at a time.

    Each batch draws g fresh decisions, measures agreement of the current
    weights, computes the correction and applies `step` times it. The
    trajectory has batches+1 points; the last carries a zero delta.
    """
    if batches < 1:
        raise ContractViolation("need at least one batch")
    w = w_start
    points: list[EmulationPoint] = []
    for b in range(batches):
        batch = decision_source(g)
        agree = policy.agreement(w, batch)
        dw = solve_dw(batch, w, epsilon)
        points.append(EmulationPoint(b, w.as_array(), agree, dw.values.copy()))
        w = w.with_array(w.as_array() + step * dw.values)
    final_batch = decision_source(g)
    points.append(
        EmulationPoint(batches, w.as_array(), policy.agreement(w, final_batch), np.zeros(NUM_FACTORS))
    )
    return points
