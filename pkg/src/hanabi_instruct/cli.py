"""Command line entry point: desk-scale experiments, dataset generation,
training and instruction runs.

Every command is deterministic given --seed and writes machine-readable
output (JSON/JSONL/CSV). Exit codes: 0 success, 2 usage, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import instructor, store, training
from .decisions import generate_selfplay_decisions, selfplay_decision_source
from .factors import FACTOR_KEYS, FactorId
from .store import DataError
from .training import FactorialEpochSpec

USAGE_EXIT = 2
DATA_EXIT = 3


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _parse_subsets(spec: str) -> list[tuple[int, int, int, int]]:
    subsets = []
    for group in spec.split(";"):
        ids = tuple(int(x) for x in group.split(","))
        if len(ids) != 4:
            raise DataError(f"each subset needs exactly 4 factor ids, got {group!r}")
        if not all(0 <= i < 12 for i in ids):
            raise DataError(f"factor ids must be 0..11 in {group!r}")
        subsets.append(ids)
    return subsets


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_selfplay(args) -> int:
    w_a = store.resolve_weights(args.weights)
    w_b = store.resolve_weights(args.opponent) if args.opponent else w_a
    stats = training.selfplay_eval(w_a, w_b, args.games, args.seed, jobs=args.jobs)
    payload = {
        "weights": w_a.name,
        "opponent": w_b.name,
        "games": args.games,
        "seed": args.seed,
        **stats.to_dict(),
    }
    _emit(payload, args.out)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["game", "score"])
            writer.writerows(enumerate(stats.scores))
    return 0


def cmd_crossplay(args) -> int:
    profiles = {name: store.load_profile(name) for name in store.PROFILE_NAMES}
    report = training.crossplay_report(
        profiles,
        partner_name=args.partner,
        n_games=args.games,
        seed=args.seed,
        expected_best=args.expected_best,
        jobs=args.jobs,
    )
    _emit(report, args.out)
    return 0


def cmd_gen_decisions(args) -> int:
    w = store.resolve_weights(args.weights)
    batch = generate_selfplay_decisions(w, args.count, args.seed)
    written = store.write_decisions(
        args.out, batch, include_h=not args.omit_h, include_deck=args.include_deck
    )
    print(json.dumps({"written": written, "out": args.out, "weights": w.name, "seed": args.seed}))
    return 0


def _run_training(args, objective) -> int:
    base = store.resolve_weights(args.base)
    subsets = _parse_subsets(args.subsets)
    schedule = []
    for subset in subsets:
        levels = tuple(
            (base.weights[f] - args.step, base.weights[f], base.weights[f] + args.step)
            for f in subset
        )
        schedule.append(
            FactorialEpochSpec(
                subset=subset,
                levels=levels,
                games_per_config=args.games_per_config,
                seed=args.seed,
            )
        )
    result = training.train(
        base, schedule, objective, max_epochs_per_subset=args.max_epochs
    )
    if args.trace:
        store.write_jsonl(args.trace, result.trace)
    if args.out:
        store.save_weights(args.out, result.weights)
    _emit(
        {
            "weights": list(result.weights.weights),
            "converged": result.converged,
            "hit_epoch_cap": result.hit_epoch_cap,
            "epochs": len(result.trace),
        },
        None,
    )
    return 0


def cmd_train_factorial(args) -> int:
    return _run_training(args, training.make_selfplay_objective(jobs=args.jobs))


def cmd_fit_humanness(args) -> int:
    decisions = store.read_decisions(args.decisions)
    return _run_training(args, training.make_agreement_objective(decisions))


def cmd_instruct(args) -> int:
    decisions = store.read_decisions(args.decisions)
    ideal = store.resolve_weights(args.ideal)
    result = instructor.instruct(decisions, ideal, args.alpha, args.epsilon)
    _emit(result.to_dict(), args.out)
    if result.rendered:
        for line in result.rendered:
            print(line, file=sys.stderr)
    else:
        print("no instruction needed", file=sys.stderr)
    return 0


def cmd_fig5(args) -> int:
    target = store.resolve_weights(args.target_weights)
    if args.trial_weights:
        trial = store.resolve_weights(args.trial_weights)
    else:
        trial = target.with_weight(FactorId.DISCARD_NON_ENDANGERED, args.discard_weight)
        trial = trial.with_array(trial.as_array(), name=f"{target.name}+inflated-discard")
    source = selfplay_decision_source(target, args.seed)
    points = instructor.iterative_emulation(
        trial, source, batches=args.batches, g=args.g, epsilon=args.epsilon, step=args.step
    )
    if args.out:
        store.write_jsonl(args.out, (p.to_dict() for p in points))
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["batch", "agreement"] + [f"w_{k}" for k in FACTOR_KEYS])
            for p in points:
                writer.writerow([p.batch, p.agreement] + [float(v) for v in p.weights])
    summary = {
        "batches": args.batches,
        "g": args.g,
        "seed": args.seed,
        "agreement_start": points[0].agreement,
        "agreement_end": points[-1].agreement,
        "discard_weight_start": float(points[0].weights[FactorId.DISCARD_NON_ENDANGERED]),
        "discard_weight_end": float(points[-1].weights[FactorId.DISCARD_NON_ENDANGERED]),
    }
    _emit(summary, None)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(persist_dir=args.persist_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hanabi-instruct",
        description="Hanabi self-play, humanness fitting and strategy instruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selfplay", help="seeded score statistics for a pairing")
    p.add_argument("--weights", required=True, help="profile name or weights file")
    p.add_argument("--opponent", help="profile name or weights file (default: same)")
    p.add_argument("--games", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", help="write the JSON report here as well as stdout")
    p.add_argument("--csv", help="write per-game scores as CSV")
    p.set_defaults(func=cmd_selfplay)

    p = sub.add_parser("crossplay", help="every shipped profile paired with one partner")
    p.add_argument("--partner", default="human-like")
    p.add_argument("--games", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--expected-best", default="human-complementary")
    p.add_argument("--out")
    p.set_defaults(func=cmd_crossplay)

    p = sub.add_parser("gen-decisions", help="log one player's self-play decisions")
    p.add_argument("--weights", required=True)
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--omit-h", action="store_true", help="do not store factor matrices")
    p.add_argument("--include-deck", action="store_true", help="full-fidelity replay log")
    p.set_defaults(func=cmd_gen_decisions)

    for name, func in (("train-factorial", cmd_train_factorial), ("fit-humanness", cmd_fit_humanness)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} over 3^4 epochs")
        p.add_argument("--base", required=True, help="starting profile name or weights file")
        p.add_argument("--subsets", required=True, help='e.g. "0,1,5,11;3,7,8,9"')
        p.add_argument("--step", type=float, default=0.25, help="initial low/high offset")
        p.add_argument("--games-per-config", type=_positive_int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-epochs", type=_positive_int, default=12)
        p.add_argument("--jobs", type=_positive_int, default=1)
        p.add_argument("--trace", help="epoch trace JSONL path")
        p.add_argument("--out", help="write the trained weights JSON here")
        if name == "fit-humanness":
            p.add_argument("--decisions", required=True, help="decision log to fit against")
            p.set_defaults(func=func)
        else:
            p.set_defaults(func=func)

    p = sub.add_parser("instruct", help="generate sparse instructions from a decision log")
    p.add_argument("--decisions", required=True)
    p.add_argument("--ideal", required=True)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_instruct)

    p = sub.add_parser("fig5", help="iterative emulation of a target agent")
    p.add_argument("--batches", type=_positive_int, default=40)
    p.add_argument("--g", type=_positive_int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--target-weights", default="self-play")
    p.add_argument("--trial-weights", help="default: target with the discard weight inflated")
    p.add_argument("--discard-weight", type=float, default=10.0)
    p.add_argument("--out", help="trajectory JSONL path")
    p.add_argument("--csv", help="plot-ready CSV path")
    p.set_defaults(func=cmd_fig5)

    p = sub.add_parser("serve", help="run the HTTP session host")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--persist-dir", help="write finished sessions' decision logs here")
    p.add_argument("--ui-dir", help="serve a static web client from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
