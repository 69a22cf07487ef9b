"""Command-line front end.

Subcommands: ``demand``, ``axioms``, ``extract``, ``pde-check`` and
``indirect-sweep``. Each prints a table to stdout; ``--out`` additionally
writes CSV (``.csv``) or JSON (any other suffix), plus a run manifest next to
it at ``<out>.manifest.json``. Output files are deterministic once the
inputs and flags are fixed (the seed is a flag); timing lives only in the
manifest.

Exit codes: 0 success, 1 input error, 2 demand hit the iteration limit,
3 some extraction rows failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from consumer_theory import __version__
from consumer_theory.core import BudgetSet, PriceSystem, as_bundle
from consumer_theory.demand import (
    DEGENERATE_FACE,
    ITERATION_LIMIT,
    ConsumerProblem,
    NonFiniteUtilityError,
    SolverConfig,
    foc_residuals,
    solve_demand,
)
from consumer_theory.families import (
    UtilitySpecError,
    make_utility,
    pde_residual,
    pde_residual_scale,
)
from consumer_theory.preferences import SamplingConfig, check_all, find_redundant
from consumer_theory.representation import ExtractionConfig, RepresentationError, extract_value
from consumer_theory.specimens import load_relation

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ITERATION_LIMIT = 2
EXIT_EXTRACT_FAILED = 3

DEFAULT_SEED = 20240601
PDE_THRESHOLD = 1e-9


class InputError(Exception):
    pass


# --- input ---------------------------------------------------------------------


def read_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    if not text.strip():
        raise InputError(f"{path}: file is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _field(record: dict, key: str, path: str):
    if not isinstance(record, dict):
        raise InputError(f"{path}: top level must be an object")
    if key not in record:
        raise InputError(f"{path}: missing field {key!r}")
    return record[key]


def _number_list(value, name: str, path: str) -> list[float]:
    if not isinstance(value, list) or not value or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise InputError(f"{path}: field {name!r} must be a non-empty list of numbers")
    return [float(v) for v in value]


def load_problem(path: str) -> ConsumerProblem:
    """Problem file: {"utility": <utility spec>, "p": [...], "r": <number>}."""
    record = read_json(path)
    spec = _field(record, "utility", path)
    p = _number_list(_field(record, "p", path), "p", path)
    r = _field(record, "r", path)
    if isinstance(r, bool) or not isinstance(r, (int, float)):
        raise InputError(f"{path}: field 'r' must be a number")
    try:
        u = make_utility(spec)
        prices = PriceSystem(np.array(p))
        return ConsumerProblem(u, BudgetSet(prices, float(r)))
    except (UtilitySpecError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_bundles(path: str) -> list[list[float]]:
    """Bundles file: a JSON list of bundles, or {"bundles": [...]}."""
    record = read_json(path)
    if isinstance(record, dict):
        record = _field(record, "bundles", path)
    if not isinstance(record, list) or not record:
        raise InputError(f"{path}: expected a non-empty list of bundles")
    return [_number_list(b, f"bundles[{i}]", path) for i, b in enumerate(record)]


# --- output --------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _finite_row(row: dict) -> dict:
    """Replace a row containing inf/nan by an error marker."""
    bad = [k for k, v in row.items() if isinstance(v, float) and not math.isfinite(v)]
    if not bad:
        return row
    return {k: ("" if isinstance(v, float) else v) for k, v in row.items()} | {
        "error": f"non-finite value in {','.join(bad)}"
    }


def render_table(rows: list[dict], columns: Sequence[str]) -> str:
    cells = [[_cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def render_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def emit(args, rows: list[dict], columns: list[str], record: Any = None) -> None:
    rows = [_finite_row(r) for r in rows]
    if any("error" in r for r in rows) and "error" not in columns:
        columns = columns + ["error"]
    sys.stdout.write(render_table(rows, columns))
    if not args.out:
        return
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        out.write_text(render_csv(rows, columns))
    else:
        payload = record if record is not None else rows
        out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    manifest = {
        "command": args.command,
        "input": [str(p) for p in args.inputs],
        "seed": args.seed,
        "output": str(out),
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - args.started, 6),
    }
    Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# --- commands ------------------------------------------------------------------


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(tolerance=args.tol if args.tol is not None else 1e-8, max_iterations=args.max_iter)


def _solution_row(prob: ConsumerProblem, sol) -> dict:
    row = {
        "status": sol.status,
        "v": sol.indirect_value,
        "lambda": sol.multiplier,
        "foc_residual_norm": sol.foc_residual_norm,
        "budget_gap": sol.budget_gap,
        "iterations": sol.iterations,
    }
    row.update({f"x{i + 1}": float(v) for i, v in enumerate(sol.bundle)})
    return row


def cmd_demand(args) -> int:
    prob = load_problem(args.problem)
    args.inputs = [args.problem]
    sol = solve_demand(prob, _solver_cfg(args))
    record = sol.as_record()
    if sol.is_interior and prob.income > 0 and sol.status != DEGENERATE_FACE:
        res = foc_residuals(prob.utility, prob.prices, sol.bundle, sol.multiplier, prob.income)
        record["foc_residuals"] = res.tolist()
    else:
        record["foc_residuals"] = None
    columns = ["status", "v", "lambda", "foc_residual_norm", "budget_gap", "iterations"]
    columns += [f"x{i + 1}" for i in range(prob.budget.n)]
    emit(args, [_solution_row(prob, sol)], columns, record)
    return EXIT_ITERATION_LIMIT if sol.status == ITERATION_LIMIT else EXIT_OK


def _load_relation(path: str):
    spec = read_json(path)
    try:
        return load_relation(spec)
    except KeyError as exc:
        raise InputError(f"{path}: {exc.args[0]}") from exc
    except (UtilitySpecError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_axioms(args) -> int:
    rel = _load_relation(args.preferences)
    args.inputs = [args.preferences]
    cfg = SamplingConfig(
        sample_count=args.samples, box_upper=args.box, seed=args.seed, epsilon=args.epsilon,
        indifference_tol=args.tol if args.tol is not None else 1e-6,
    )
    rows = [r.as_row() for r in check_all(rel, cfg)]
    red = find_redundant(rel, cfg)
    rows.append({
        "axiom": "redundancy",
        "verdict": "witness-found" if red else "no-witness-found",
        "samples_used": len(rel.probe_points) + cfg.sample_count,
        "vacuous": False,
        "counterexample": "" if red is None else ";".join(
            "(" + ",".join(f"{v:.12g}" for v in b) + ")" for b in red
        ),
        "note": "",
    })
    emit(args, rows, ["axiom", "verdict", "samples_used", "vacuous", "counterexample", "note"])
    return EXIT_OK


def cmd_extract(args) -> int:
    rel = _load_relation(args.preferences)
    bundles = load_bundles(args.bundles)
    args.inputs = [args.preferences, args.bundles]
    for b in bundles:
        if len(b) != rel.n:
            raise InputError(f"{args.bundles}: bundle {b} has dimension {len(b)}, relation has {rel.n}")
    if args.precheck:
        cfg = SamplingConfig(sample_count=args.samples, seed=args.seed)
        for rep in check_all(rel, cfg):
            if rep.violated and rep.axiom in ("completeness", "transitivity", "continuity", "strong_monotonicity"):
                print(f"warning: {rep.axiom} violated; extracted values may not represent the relation",
                      file=sys.stderr)
    ecfg = ExtractionConfig(tolerance=args.tol if args.tol is not None else 1e-9, max_bracket=args.max_bracket)
    rows, failed = [], False
    for b in bundles:
        row = {"x": "(" + ",".join(_cell(float(v)) for v in b) + ")"}
        try:
            rv = extract_value(rel, as_bundle(b), ecfg)
            row.update(u=rv.value, bracket_low=rv.bracket_low, bracket_high=rv.bracket_high, width=rv.width)
        except RepresentationError as exc:
            failed = True
            lo, hi = exc.bracket
            row.update(u="", bracket_low=lo, bracket_high=hi, width=hi - lo, error=f"{type(exc).__name__}: {exc}")
        except ValueError as exc:
            failed = True
            row.update(error=str(exc))
        rows.append(row)
    emit(args, rows, ["x", "u", "bracket_low", "bracket_high", "width"])
    return EXIT_EXTRACT_FAILED if failed else EXIT_OK


def _pde_inputs(args):
    record = read_json(args.utility)
    spec = record.get("utility", record) if isinstance(record, dict) else record
    prices = args.prices
    if prices is None and isinstance(record, dict):
        prices = record.get("p") if "utility" in record else spec.get("p") if isinstance(spec, dict) else None
    if prices is None:
        raise InputError(f"{args.utility}: no prices; give 'p' in the file or --prices")
    if isinstance(prices, str):
        prices = [float(v) for v in prices.split(",")]
    try:
        u = make_utility(spec)
        p = PriceSystem(np.array(_number_list(list(prices), "p", args.utility)))
    except (UtilitySpecError, ValueError) as exc:
        raise InputError(f"{args.utility}: {exc}") from exc
    if p.n != u.n:
        raise InputError(f"{args.utility}: prices have dimension {p.n}, utility {u.n}")
    return u, p


def cmd_pde_check(args) -> int:
    u, p = _pde_inputs(args)
    args.inputs = [args.utility]
    if not 0 < args.grid_lo <= args.grid_hi:
        raise InputError("grid must satisfy 0 < grid-lo <= grid-hi (interior points only)")
    axis = np.linspace(args.grid_lo, args.grid_hi, args.grid_points)
    abs_res, scaled = [], []
    for point in itertools.product(axis, repeat=u.n):
        x = np.array(point)
        res = abs(pde_residual(u, p, x))
        abs_res.append(res)
        scaled.append(res / pde_residual_scale(u, x))
    threshold = args.tol if args.tol is not None else PDE_THRESHOLD
    row = {
        "points": len(abs_res),
        "max_abs_residual": float(max(abs_res)),
        "mean_abs_residual": float(np.mean(abs_res)),
        "max_scaled_residual": float(max(scaled)),
        "threshold": threshold,
        "pass": bool(max(scaled) <= threshold),
    }
    emit(args, [row], list(row))
    return EXIT_OK


def _sweep_values(args) -> list[float]:
    if args.values:
        try:
            return [float(v) for v in args.values.split(",")]
        except ValueError as exc:
            raise InputError(f"--values: {exc}") from exc
    if args.range:
        try:
            start, stop, num = args.range.split(":")
            return np.linspace(float(start), float(stop), int(num)).tolist()
        except ValueError as exc:
            raise InputError(f"--range must be start:stop:num ({exc})") from exc
    raise InputError("indirect-sweep needs --values or --range")


def cmd_indirect_sweep(args) -> int:
    prob = load_problem(args.problem)
    args.inputs = [args.problem]
    values = _sweep_values(args)
    if any(v <= 0 for v in values):
        raise InputError("sweep values must be positive")
    target = args.vary
    n = prob.budget.n
    if target != "r":
        if not (target.startswith("p") and target[1:].isdigit() and 1 <= int(target[1:]) <= n):
            raise InputError(f"--vary must be 'r' or p1..p{n}, got {target!r}")
    cfg = _solver_cfg(args)
    rows, worst = [], EXIT_OK
    for value in values:
        prices, r = prob.prices.prices.copy(), prob.income
        if target == "r":
            r = value
        else:
            prices[int(target[1:]) - 1] = value
        sub = ConsumerProblem(prob.utility, BudgetSet(PriceSystem(prices), r))
        row = {target: value}
        try:
            sol = solve_demand(sub, cfg)
            row.update(_solution_row(sub, sol))
            if sol.status == ITERATION_LIMIT:
                worst = EXIT_ITERATION_LIMIT
        except NonFiniteUtilityError as exc:
            row["error"] = str(exc)
        rows.append(row)
    columns = [target, "v", "lambda", "status"] + [f"x{i + 1}" for i in range(n)]
    emit(args, rows, columns)
    return worst


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write CSV (.csv) or JSON to this path, plus <out>.manifest.json")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=None, help="override the command's tolerance")
    common.add_argument("--samples", type=int, default=200)

    parser = argparse.ArgumentParser(prog="consumer-theory", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demand", parents=[common], help="solve one consumer problem")
    p.add_argument("problem")
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_demand)

    p = sub.add_parser("axioms", parents=[common], help="run the axiom falsifiers on a relation")
    p.add_argument("preferences")
    p.add_argument("--box", type=float, default=4.0, help="samples are drawn from [0, box]^n")
    p.add_argument("--epsilon", type=float, default=0.1, help="neighbourhood radius for local nonsatiation")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("extract", parents=[common], help="extract ray utilities for bundles")
    p.add_argument("preferences")
    p.add_argument("bundles")
    p.add_argument("--max-bracket", type=float, default=1e9)
    p.add_argument("--precheck", action="store_true", help="run the axiom falsifiers first and warn")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("pde-check", parents=[common], help="PDE residual statistics on a grid")
    p.add_argument("utility")
    p.add_argument("--prices", help="comma-separated prices (default: 'p' from the file)")
    p.add_argument("--grid-lo", type=float, default=0.5)
    p.add_argument("--grid-hi", type=float, default=4.0)
    p.add_argument("--grid-points", type=int, default=8)
    p.set_defaults(func=cmd_pde_check)

    p = sub.add_parser("indirect-sweep", parents=[common], help="indirect utility over a price or income grid")
    p.add_argument("problem")
    p.add_argument("--vary", default="r", help="'r' or p1..pn")
    p.add_argument("--values", help="comma-separated grid values")
    p.add_argument("--range", help="start:stop:num")
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_indirect_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.formatwarning = lambda message, *_a, **_k: f"warning: {message}\n"
    args.started = time.perf_counter()
    args.inputs = []
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonFiniteUtilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
