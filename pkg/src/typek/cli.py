"""Command line front end.

Subcommands: ``minimax``, ``verify``, ``enumerate``, ``simulate``,
``geometry`` and ``convergence``. Games come from ``builtin:<name>`` or a
document path. Exit codes are stable for scripting: 0 on success, 1 when a
verification verdict is negative, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .game import (
    GameFormatError,
    StageGame,
    as_fraction,
    format_rational,
    load_builtin,
    parse_game,
)
from .minimax import minimax_point, minimax_value
from .strategies import CoordinationPlan, strategy_from_spec
from .simulate import fig2_convergence_experiment, run, trace_to_csv
from .equilibrium import (
    SearchBudgetError,
    discount_thresholds,
    enumerate_type_k,
    verify_type_k,
)
from .geometry import feasible_hull, pareto_frontier, project

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


class CliError(Exception):
    """Input or usage problem surfaced to the user with exit code 2."""


def _fmt(value: Fraction, decimal: bool) -> str:
    if decimal:
        return f"{float(value):.6f}"
    return str(format_rational(value))


def _load_game(spec: str) -> StageGame:
    if spec.startswith("builtin:"):
        return load_builtin(spec[len("builtin:"):])
    try:
        with open(spec, encoding="utf-8") as handle:
            text = handle.read()
    except FileNotFoundError:
        raise CliError(f"game file not found: {spec}") from None
    except OSError as exc:
        raise CliError(f"cannot read game file {spec}: {exc}") from None
    return parse_game(text)


def _parse_plan(game: StageGame, group_spec: str, path_spec: str) -> CoordinationPlan:
    group = [label.strip() for label in group_spec.split(",") if label.strip()]
    if not group:
        raise CliError("empty --group")
    phases = []
    for chunk in path_spec.split("|"):
        labels = [label.strip() for label in chunk.split(",")]
        phases.append(tuple(labels))
    try:
        return CoordinationPlan.from_labels(game, group, phases)
    except (ValueError, GameFormatError) as exc:
        raise CliError(str(exc)) from None


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("TYPEK_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"TYPEK_SEED is not an integer: {env!r}") from None


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _table(headers, rows) -> str:
    widths = [len(h) for h in headers]
    rendered = [[str(cell) for cell in row] for row in rows]
    for row in rendered:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rendered:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


def _csv(headers, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_minimax(args) -> int:
    game = _load_game(args.game)
    results = [minimax_value(game, i) for i in range(game.n_players)]
    headers = ["player", "value", "punishers", "best_reply"]
    rows = []
    for res in results:
        others = [j for j in range(game.n_players) if j != res.player]
        punisher = ",".join(
            game.actions[j][a] for j, a in zip(others, res.punisher_profile)
        )
        rows.append(
            [
                game.players[res.player],
                _fmt(res.value, args.decimal),
                punisher,
                game.actions[res.player][res.best_reply],
            ]
        )
    if args.format == "json":
        doc = {
            "game": game.name,
            "minimax_point": [format_rational(v) for v in minimax_point(game)],
            "players": [
                {
                    "player": row[0],
                    "value": format_rational(res.value),
                    "punishers": row[2],
                    "best_reply": row[3],
                }
                for row, res in zip(rows, results)
            ],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    elif args.format == "csv":
        _emit(_csv(headers, rows), args.output)
    else:
        _emit(_table(headers, rows), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    game = _load_game(args.game)
    plan = _parse_plan(game, args.group, args.path)
    report = verify_type_k(game, plan, args.max_period, args.mode)
    verdict = report.passed
    doc = report.to_json_dict()
    if args.delta is not None:
        delta = as_fraction(args.delta)
        thresholds = discount_thresholds(game, plan)
        satisfied = all(t.satisfied(delta) for t in thresholds.values())
        verdict = verdict and satisfied
        doc["discount"] = {
            "delta": format_rational(delta),
            "satisfied": satisfied,
            "thresholds": {
                game.players[m]: {
                    "gain": format_rational(t.gain),
                    "per_round_loss": format_rational(t.per_round_loss),
                    "delta_star": format_rational(t.delta_star),
                    "satisfied": t.satisfied(delta),
                }
                for m, t in sorted(thresholds.items())
            },
        }
    doc["verdict"] = verdict
    if args.format == "json":
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        k = len(plan.group)
        lines = [
            f"game: {game.name}",
            f"group: {','.join(game.players[i] for i in plan.group)}",
            f"path: {'|'.join(','.join(p) for p in plan.path_labels(game))}",
            f"profile payoff: ({', '.join(_fmt(v, args.decimal) for v in report.profile_payoff)})",
            "members above minimax (worst case): "
            + ", ".join(
                f"{game.players[i]}={'yes' if ok else 'no'}"
                for i, ok in sorted(report.eq4_holds.items())
            ),
            f"no profitable joint deviation ({report.mode}): "
            + ("yes" if report.eq5_holds else "no"),
            f"folk strict: {'yes' if report.folk_strict else 'no'}",
            f"stage NE: {'yes' if report.is_stage_ne else 'no'}"
            + (f", stable: {'yes' if report.stage_stable else 'no'}" if report.is_stage_ne else ""),
        ]
        if report.deviation_witness is not None:
            witness = report.deviation_witness
            path_txt = "|".join(
                ",".join(game.actions[p][a] for p, a in zip(plan.group, phase))
                for phase in witness.path
            )
            lines.append(f"deviation witness: {path_txt}")
        if args.delta is not None:
            lines.append(
                "discount condition: "
                + ("satisfied" if doc["discount"]["satisfied"] else "violated")
                + f" at delta={doc['discount']['delta']}"
            )
        lines.append(
            f"verdict: {'type-%d equilibrium' % k if verdict else 'not verified'}"
        )
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_enumerate(args) -> int:
    game = _load_game(args.game)
    reports = enumerate_type_k(
        game, args.max_period, mode=args.mode, budget=args.budget
    )
    if args.format == "json":
        _emit(
            json.dumps([r.to_json_dict() for r in reports], indent=2) + "\n",
            args.output,
        )
        return EXIT_OK
    headers = ["k", "group", "path", "payoff", "folk_strict", "stage_ne"]
    rows = []
    for r in reports:
        rows.append(
            [
                r.k,
                ",".join(game.players[i] for i in r.plan.group),
                "|".join(",".join(p) for p in r.plan.path_labels(game)),
                "(" + ", ".join(_fmt(v, args.decimal) for v in r.profile_payoff) + ")",
                r.folk_strict,
                r.is_stage_ne,
            ]
        )
    text = _csv(headers, rows) if args.format == "csv" else _table(headers, rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    game = _load_game(args.game)
    plan = None
    if args.group and args.path:
        plan = _parse_plan(game, args.group, args.path)
    specs = [s.strip() for s in args.strategies.split(",")]
    if len(specs) != game.n_players:
        raise CliError(
            f"{len(specs)} strategies given for {game.n_players} players"
        )
    try:
        machines = [
            strategy_from_spec(game, i, spec, plan) for i, spec in enumerate(specs)
        ]
    except ValueError as exc:
        raise CliError(str(exc)) from None
    seed = _resolve_seed(args.seed)
    sim = run(game, machines, args.horizon, seed=seed, delta=args.delta)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as handle:
            handle.write(trace_to_csv(sim))
    if args.format == "json":
        doc = {
            "game": game.name,
            "horizon": sim.horizon,
            "seed": sim.seed,
            "averages": [format_rational(v) for v in sim.averages],
        }
        if sim.discounted is not None:
            doc["delta"] = format_rational(sim.delta)
            doc["discounted"] = [format_rational(v) for v in sim.discounted]
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        headers = ["player", "average"] + (
            ["discounted"] if sim.discounted is not None else []
        )
        rows = []
        for i, label in enumerate(game.players):
            row = [label, _fmt(sim.averages[i], args.decimal)]
            if sim.discounted is not None:
                row.append(_fmt(sim.discounted[i], args.decimal))
            rows.append(row)
        text = _csv(headers, rows) if args.format == "csv" else _table(headers, rows)
        _emit(text, args.output)
    return EXIT_OK


def cmd_geometry(args) -> int:
    game = _load_game(args.game)
    geom = feasible_hull(game)
    axes = None
    polygon = None
    if args.project:
        labels = [s.strip() for s in args.project.split(",")]
        if len(labels) != 2:
            raise CliError("--project needs two comma-separated player labels")
        axes = tuple(game.player_index(lab) for lab in labels)
        if axes[0] == axes[1]:
            raise CliError("projection axes must be distinct")
        polygon = project(geom, axes)
    frontier = None
    if args.frontier:
        group = tuple(
            game.player_index(lab.strip()) for lab in args.frontier.split(",")
        )
        frontier = pareto_frontier(geom, group)
    if args.format == "json":
        doc = {
            "game": game.name,
            "dimension": geom.dimension,
            "minimax_point": [format_rational(v) for v in geom.minimax_point],
            "vertices": [[format_rational(v) for v in vec] for vec in geom.vertices],
        }
        if polygon is not None:
            doc["projection"] = {
                "axes": [game.players[a] for a in axes],
                "polygon": [[format_rational(v) for v in p] for p in polygon],
            }
        if frontier is not None:
            doc["frontier"] = {
                "group": args.frontier,
                "vertices": [[format_rational(v) for v in vec] for vec in frontier],
            }
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
        return EXIT_OK
    if polygon is not None:
        headers = [game.players[a] for a in axes]
        rows = [[_fmt(v, args.decimal) for v in p] for p in polygon]
    elif frontier is not None:
        headers = list(game.players)
        rows = [[_fmt(v, args.decimal) for v in vec] for vec in frontier]
    else:
        headers = list(game.players)
        rows = [[_fmt(v, args.decimal) for v in vec] for vec in geom.vertices]
    text = _csv(headers, rows) if args.format == "csv" else _table(headers, rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_convergence(args) -> int:
    seed = _resolve_seed(args.seed)
    probs = fig2_convergence_experiment(args.trials, args.rounds, seed=seed)
    headers = ["t", "probability"]
    rows = [
        [t + 1, _fmt(p, args.decimal) if not args.decimal else f"{float(p):.6f}"]
        for t, p in enumerate(probs)
    ]
    if args.format == "json":
        doc = {
            "trials": args.trials,
            "seed": seed,
            "probabilities": {
                str(t + 1): format_rational(p) for t, p in enumerate(probs)
            },
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    elif args.format == "csv":
        _emit(_csv(headers, rows), args.output)
    else:
        _emit(_table(headers, rows), args.output)
    return EXIT_OK


def _add_common(parser, game=True) -> None:
    if game:
        parser.add_argument(
            "--game", required=True, help="builtin:<name> or a game document path"
        )
    parser.add_argument(
        "--format", choices=("table", "json", "csv"), default="table"
    )
    parser.add_argument(
        "--decimal", action="store_true", help="render rationals as 6-place decimals"
    )
    parser.add_argument("--output", help="write the report to a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="typek",
        description="Coordination equilibria and payoff geometry for repeated games",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimax", help="per-player minimax values")
    _add_common(p)
    p.set_defaults(handler=cmd_minimax)

    p = sub.add_parser("verify", help="verify one coordination plan")
    _add_common(p)
    p.add_argument("--group", required=True, help="comma-separated player labels")
    p.add_argument(
        "--path",
        required=True,
        help="phases separated by '|', member actions by ',' in --group order",
    )
    p.add_argument("--max-period", type=int, default=None)
    p.add_argument("--mode", choices=("pareto", "strict"), default="pareto")
    p.add_argument("--delta", help="discount factor, e.g. 0.3 or 3/10")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("enumerate", help="enumerate all verified plans")
    _add_common(p)
    p.add_argument("--max-period", type=int, required=True)
    p.add_argument("--mode", choices=("pareto", "strict"), default="pareto")
    p.add_argument("--budget", type=int, default=500_000)
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("simulate", help="run strategy machines")
    _add_common(p)
    p.add_argument(
        "--strategies",
        required=True,
        help="per-player presets: grim, myopic, fig2row, fig2col, "
        "const:<action>, path:<a1|a2|...>",
    )
    p.add_argument("--group", help="group labels when grim/myopic presets are used")
    p.add_argument("--path", help="coordination path for grim/myopic presets")
    p.add_argument("--horizon", "-T", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--delta", help="discount factor for a discounted sum")
    p.add_argument("--trace-out", help="write the full trace as CSV to a file")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("geometry", help="feasible hull, frontier, projections")
    _add_common(p)
    p.add_argument("--project", help="two player labels, e.g. X,Y")
    p.add_argument("--frontier", help="group labels for a Pareto frontier")
    p.set_defaults(handler=cmd_geometry)

    p = sub.add_parser("convergence", help="coordination-game lock-in experiment")
    _add_common(p, game=False)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_convergence)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GameFormatError, SearchBudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
