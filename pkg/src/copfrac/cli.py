"""Command-line front end.

Subcommands: ``measure``, ``sweep``, ``bounds``, ``verify`` and ``presets``.
Exit codes: 0 success, 2 validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from typing import List, Optional, Sequence

from .errors import CopfracError, JobValidationError
from .jobfile import JobFile, expand_sweep, load_job_file, parse_job_file
from .measures import ccfi_frechet_bounds, evaluate, frechet_bound_integral
from .orderings import PROPOSITION_IDS, verify_all

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

RESULT_COLUMNS = ("value", "error_estimate", "evaluations", "wall_time_ms")


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which matches the
    # validation exit code; raising keeps main() testable
    def error(self, message):
        raise _Usage(message)


def _threads() -> int:
    raw = os.environ.get("COPFRAC_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise JobValidationError("COPFRAC_THREADS", f"expected an integer, got {raw!r}") from None
    if n < 0:
        raise JobValidationError("COPFRAC_THREADS", "must be >= 0")
    return n or (os.cpu_count() or 1)


def preset_names() -> List[str]:
    folder = resources.files("copfrac") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def _resolve(path: str) -> JobFile:
    if not os.path.exists(path):
        name = path[:-5] if path.endswith(".json") else path
        if name in preset_names():
            text = (resources.files("copfrac") / "presets" / f"{name}.json").read_text(encoding="utf-8")
            return parse_job_file(json.loads(text))
    return load_job_file(path)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _run_cells(cells, workers):
    """Evaluate in parallel; results come back in input order."""

    def one(item):
        index, (j, cell, job) = item
        t0 = time.perf_counter()
        try:
            res = evaluate(job)
        except CopfracError as exc:
            return index, j, cell, None, exc, 0.0
        except ArithmeticError as exc:
            return index, j, cell, None, exc, 0.0
        return index, j, cell, res, None, (time.perf_counter() - t0) * 1e3

    items = list(enumerate(cells))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, items))
    return [one(i) for i in items]


def _emit(rows: List[dict], columns: Sequence[str], fmt: str, path: Optional[str], stdout):
    if fmt == "json":
        text = "".join(json.dumps({c: r[c] for c in columns}) + "\n" for r in rows)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        text = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _evaluate_file(job_file: JobFile, sweep: bool, args, stdout, stderr) -> int:
    if sweep:
        if not job_file.axes:
            raise JobValidationError("sweep", "the sweep command needs a sweep block")
        cells = expand_sweep(job_file)
    else:
        cells = expand_sweep(JobFile(job_file.jobs, (), job_file.output_format, job_file.output_path))
    workers = _threads() if sweep else 1
    results = _run_cells(cells, workers)
    for index, j, cell, res, exc, _ in results:
        if exc is not None:
            where = f"job {j}" + (f" sweep cell {index}" if sweep else "")
            stderr.write(f"error: {where}: {exc}\n")
            return EXIT_NUMERICAL

    multi = len(job_file.jobs) > 1
    lead = (["job"] if multi or not sweep else []) + [a.name for a in job_file.axes if sweep]
    if not sweep:
        lead.append("kind")
    results_cols = [c for c in RESULT_COLUMNS if not (args.no_timing and c == "wall_time_ms")]
    columns = lead + results_cols
    rows = []
    for index, j, cell, res, _, ms in results:
        row = {"job": j, "kind": cells[index][2].kind.value}
        for a, v in zip(job_file.axes, cell):
            row[a.name] = v
        row.update(value=res.value, error_estimate=res.error_estimate, evaluations=res.evaluations, wall_time_ms=round(ms, 3))
        rows.append(row)
    fmt = args.format or job_file.output_format
    _emit(rows, columns, fmt, args.output or job_file.output_path, stdout)
    if sweep:
        for line in _trend_lines(job_file, rows):
            stderr.write(line + "\n")
    return EXIT_OK


def _trend_lines(job_file: JobFile, rows):
    """Monotone-trend summary along each numeric sweep axis."""
    out = []
    for j in range(len(job_file.jobs)):
        mine = [r for r in rows if r["job"] == j]
        for axis in job_file.axes:
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in axis.values):
                continue
            others = [a.name for a in job_file.axes if a is not axis]
            lines = {}
            for r in mine:
                lines.setdefault(tuple(r[o] for o in others), []).append((r[axis.name], r["value"]))
            up = down = 0
            for seq in lines.values():
                vals = [v for _, v in sorted(seq, key=lambda t: t[0])]
                diffs = [b - a for a, b in zip(vals, vals[1:])]
                up += all(d >= 0 for d in diffs)
                down += all(d <= 0 for d in diffs)
            n = len(lines)
            if up == n:
                trend = "nondecreasing"
            elif down == n:
                trend = "nonincreasing"
            else:
                trend = f"mixed ({up}/{n} lines nondecreasing, {down}/{n} nonincreasing)"
            out.append(f"trend: job {j}: value {trend} along {axis.name}")
    return out


def cmd_measure(args, stdout, stderr) -> int:
    return _evaluate_file(_resolve(args.file), False, args, stdout, stderr)


def cmd_sweep(args, stdout, stderr) -> int:
    return _evaluate_file(_resolve(args.file), True, args, stdout, stderr)


def cmd_bounds(args, stdout, stderr) -> int:
    eta, g, d = args.eta, args.gamma, args.delta
    if not 0.0 < eta < 1.0:
        raise JobValidationError("--eta", f"fractional order must lie in (0, 1), got {eta!r}")
    for flag, val in (("--gamma", g), ("--delta", d)):
        if not (val > 0.0 and math.isfinite(val)):
            raise JobValidationError(flag, f"must be positive, got {val!r}")
    if g == 1.0 or d == 1.0:
        stderr.write("warning: an exponent of 1 makes that reference margin equal to the true one (degenerate PRHR)\n")
    closed = ccfi_frechet_bounds(eta, g, d)
    lines = {
        "w_side": closed.w_side,
        "m_side": closed.m_side,
    }
    for side in ("w", "m"):
        joint = frechet_bound_integral(eta, g, d, side).value
        split = frechet_bound_integral(eta, g, d, side, additive=True).value
        ref = getattr(closed, f"{side}_side")
        lines[f"{side}_quadrature_joint_kernel"] = joint
        lines[f"{side}_diff_joint_kernel"] = joint - ref
        lines[f"{side}_quadrature_additive_kernel"] = split
        lines[f"{side}_diff_additive_kernel"] = split - ref
    if args.format == "json":
        stdout.write(json.dumps(lines) + "\n")
    else:
        for k, v in lines.items():
            stdout.write(f"{k} = {v!r}\n")
    return EXIT_OK


def cmd_verify(args, stdout, stderr) -> int:
    filt = args.filter
    if filt and not any(filt in i for i in PROPOSITION_IDS):
        raise JobValidationError("filter", f"no proposition id matches {filt!r}")
    try:
        records = verify_all(filt, tol=args.tol)
    except (CopfracError, ArithmeticError) as exc:
        stderr.write(f"error: verification failed to evaluate: {exc}\n")
        return EXIT_NUMERICAL
    failed = 0
    for r in records:
        if args.format == "text":
            status = "probe" if not r["asserted"] else {True: "PASS", False: "FAIL", None: "hypotheses unmet"}[r["pass"]]
            stdout.write(f"{status:>16}  {r['id']:<14} {r['scenario']}: {r['comparison']}  gap={r['gap']:.3e}\n")
        else:
            stdout.write(json.dumps(r) + "\n")
        if r["asserted"] and r["pass"] is False:
            failed += 1
    asserted = sum(r["asserted"] for r in records)
    stderr.write(f"verify: {asserted - failed}/{asserted} asserted comparisons pass, {len(records) - asserted} reported only\n")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


def cmd_presets(args, stdout, stderr) -> int:
    for name in preset_names():
        stdout.write(name + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="copfrac", description="Copula-based fractional inaccuracy measures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (("measure", "evaluate every job in a job file"), ("sweep", "evaluate a job file over its sweep grid")):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("file", help="job file path or preset name")
        s.add_argument("--format", choices=("csv", "json"), help="override the file's output format")
        s.add_argument("-o", "--output", help="write records here instead of the file's output path")
        s.add_argument("--no-timing", action="store_true", help="omit the wall_time_ms column")

    b = sub.add_parser("bounds", help="closed-form Frechet bound integrals with quadrature checks")
    b.add_argument("--eta", type=float, required=True)
    b.add_argument("--gamma", type=float, required=True)
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--format", choices=("text", "json"), default="text")

    v = sub.add_parser("verify", help="run the ordering-proposition checks")
    v.add_argument("filter", nargs="?", help="substring of the proposition ids to run")
    v.add_argument("--tol", type=float, default=1e-6)
    v.add_argument("--format", choices=("json", "text"), default="json")

    sub.add_parser("presets", help="list the bundled sweep presets")
    return p


_COMMANDS = {
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "presets": cmd_presets,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](args, stdout, stderr)
    except JobValidationError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except CopfracError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
