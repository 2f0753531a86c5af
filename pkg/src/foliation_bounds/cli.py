"""Command-line front end: bound tables, model eigenvalues, verification suites and sweeps.

Usage examples::

    foliation-bounds bounds --n 3 --K 1 --d 1.5707963 --model
    foliation-bounds model --n 3 --K 1 --d 1.5 --a -0.75
    foliation-bounds verify --tolerance 1e-4 --mesh 64
    foliation-bounds examples --format json
    foliation-bounds sweep --n 3 --K 1 --d 1.5707963 --sweep s=0.01:0.99:99 --out s.csv

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 solver failure.
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
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from .bounds import BoundInput, BoundResult, best_bound, model_bound, shi_zhang
from .checks import CheckReport
from .errors import DomainError, HierarchyViolation, SolverError
from .foliation_zoo import standard_zoo
from .model_ode import ModelProblem, model_solve
from .suites import SuiteSettings, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
COMMANDS = ("bounds", "model", "verify", "examples", "sweep")
SWEEP_VARS = ("n", "K", "d", "s")
JSON_DIGITS = 12
TABLE_DIGITS = 6


class UsageError(ValueError):
    """Bad flags or configuration; maps to exit status 2."""


@dataclass(frozen=True)
class SweepRange:
    var: str
    start: float
    stop: float
    count: int

    @classmethod
    def parse(cls, text: str) -> "SweepRange":
        try:
            var, rest = text.split("=", 1)
            start, stop, count = rest.split(":")
            rng = cls(var.strip(), float(start), float(stop), int(count))
        except ValueError:
            raise UsageError(f"bad sweep {text!r}; expected var=start:stop:count") from None
        if rng.var not in SWEEP_VARS:
            raise UsageError(f"cannot sweep {rng.var!r}; choose from {', '.join(SWEEP_VARS)}")
        if rng.count < 1 or not math.isfinite(rng.start) or not math.isfinite(rng.stop):
            raise UsageError(f"empty sweep range {text!r}")
        if rng.count > 1 and rng.stop < rng.start:
            raise UsageError(f"empty sweep range {text!r} (stop < start)")
        return rng

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def to_dict(self) -> dict:
        return {"var": self.var, "start": self.start, "stop": self.stop, "count": self.count}


@dataclass
class RunConfig:
    command: str
    output_format: str = "table"
    output_path: Optional[str] = None
    tolerance: float = 1e-10
    mesh: int = 1024
    seed: int = 0
    use_model: bool = False
    negative_control: bool = False
    timing: bool = False
    jobs: int = 1
    n: Optional[int] = None
    K: Optional[float] = None
    d: Optional[float] = None
    s: Optional[float] = None
    a: Optional[float] = None
    k: Optional[float] = None
    sweeps: list = field(default_factory=list)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not 1e-12 <= self.tolerance <= 1e-4:
            raise UsageError(f"tolerance must lie in [1e-12, 1e-4], got {self.tolerance:g}")
        if self.mesh < 64 or self.mesh & (self.mesh - 1):
            raise UsageError(f"mesh must be a power of two >= 64, got {self.mesh}")
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")
        if self.command == "sweep":
            if not 1 <= len(self.sweeps) <= 2:
                raise UsageError("sweep needs one or two --sweep ranges")
            names = [r.var for r in self.sweeps]
            if len(set(names)) != len(names):
                raise UsageError("each variable may be swept once")
        return self

    @property
    def solver_tol(self) -> float:
        return min(max(self.tolerance, 1e-12), 1e-6)

    def to_dict(self) -> dict:
        inp = {key: getattr(self, key) for key in ("n", "K", "d", "s", "a", "k") if getattr(self, key) is not None}
        return {
            "command": self.command,
            "output_format": self.output_format,
            "output_path": self.output_path,
            "tolerance": self.tolerance,
            "mesh": self.mesh,
            "seed": self.seed,
            "use_model": self.use_model,
            "negative_control": self.negative_control,
            "input": inp,
            "sweeps": [r.to_dict() for r in self.sweeps],
        }


# --- number formatting -------------------------------------------------------


def round_sig(x, digits: int = JSON_DIGITS):
    """Round floats to ``digits`` significant digits; non-finite values become ``None``."""
    if x is None or isinstance(x, (bool, int, str)):
        return x
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{digits}g}")


def _clean(obj, digits: int = JSON_DIGITS):
    if isinstance(obj, dict):
        return {str(k): _clean(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, digits) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return round_sig(obj, digits)
    return obj


def _fmt(x, digits: int) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{digits}g}" if math.isfinite(x) else ""
    return str(x)


# --- records -----------------------------------------------------------------


def make_record(inp: dict, result: BoundResult, wall_time: Optional[float] = None) -> dict:
    diag = dict(result.diagnostics)
    diag.setdefault("method", "closed_form")
    diag.setdefault("mesh", None)
    diag.setdefault("residual", None)
    return {
        "input": inp,
        "bound": result.name,
        "value": result.value,
        "valid": bool(result.valid),
        "regime": _regime(result),
        "notes": result.note,
        "diagnostics": diag,
        "wall_time": wall_time,
    }


def _regime(result: BoundResult) -> Optional[str]:
    if result.name != "shi_zhang_optimal":
        return None
    return result.note.split(" ", 1)[0]


def suite_record(report: CheckReport) -> dict:
    return {
        "name": report.name,
        "passed": bool(report.passed),
        "worst_margin": report.worst_margin,
        "violations": report.violations,
        "details": report.details,
    }


def load_schema() -> dict:
    text = resources.files("foliation_bounds").joinpath("schema/report.schema.json").read_text("utf-8")
    return json.loads(text)


def build_report(cfg: RunConfig, records: list, suites: list) -> dict:
    report = _clean({"config": cfg.to_dict(), "records": records, "suite_results": suites})
    jsonschema.validate(report, load_schema())
    return report


# --- commands ----------------------------------------------------------------


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"{cfg.command} needs {', '.join(missing)}")


def _bound_results(cfg: RunConfig, inp: BoundInput) -> list[BoundResult]:
    results = best_bound(inp, cfg.use_model, cfg.solver_tol, cfg.k, cfg.mesh)
    if cfg.s is not None:
        results.append(shi_zhang(inp, cfg.s))
        results.sort(key=lambda r: -r.value)
    return results


def cmd_bounds(cfg: RunConfig) -> tuple[list, list]:
    _require(cfg, "n", "K", "d")
    t0 = time.perf_counter()
    inp = BoundInput(cfg.n, cfg.K, cfg.d)
    results = _bound_results(cfg, inp)
    wall = time.perf_counter() - t0 if cfg.timing else None
    echo = {"n": inp.n, "K": inp.K, "d": inp.d, "s": cfg.s}
    return [make_record(echo, r, wall) for r in results], []


def cmd_model(cfg: RunConfig) -> tuple[list, list]:
    _require(cfg, "n", "K", "d")
    a = -0.5 * cfg.d if cfg.a is None else cfg.a
    t0 = time.perf_counter()
    sol = model_solve(ModelProblem(cfg.K, cfg.n, a, cfg.d), cfg.solver_tol, True, cfg.mesh)
    wall = time.perf_counter() - t0 if cfg.timing else None
    res = BoundResult(
        "model",
        sol.value,
        True,
        f"lambda(K, n, delta, a) on [{a:.12g}, {a + cfg.d:.12g}]",
        diagnostics={
            "method": "shooting",
            "mesh": cfg.mesh,
            "residual": sol.spectrum.residual,
            "fd_value": sol.fd_value,
            "relative_disagreement": sol.relative_disagreement,
        },
    )
    return [make_record({"n": cfg.n, "K": cfg.K, "d": cfg.d, "a": a}, res, wall)], []


def cmd_examples(cfg: RunConfig) -> tuple[list, list]:
    records = []
    for ex in standard_zoo():
        inp = BoundInput(ex.ambient_dim, ex.K_ambient, ex.known_diameter)
        echo = {"n": inp.n, "K": inp.K, "d": inp.d, "fixture": ex.name}
        known = BoundResult("known_lambda1B", ex.known_lambda1B, True, "ground truth")
        records.append(make_record(echo, known))
        for r in best_bound(inp, cfg.use_model, cfg.solver_tol, None, cfg.mesh):
            records.append(make_record(echo, r))
    return records, []


def cmd_verify(cfg: RunConfig) -> tuple[list, list]:
    settings = SuiteSettings(cfg.tolerance, cfg.mesh, cfg.seed, cfg.negative_control)
    reports = run_suites(settings)
    # failing suites first, otherwise run order
    reports.sort(key=lambda r: r.passed)
    return [], [suite_record(r) for r in reports]


# --- sweep -------------------------------------------------------------------


def sweep_columns(cfg: RunConfig) -> list[str]:
    swept = [r.var for r in cfg.sweeps]
    cols = list(swept) + ["zhong_yang", "lichnerowicz", "li_type"]
    if "s" in swept or cfg.s is not None:
        cols.append("shi_zhang")
    cols.append("shi_zhang_optimal")
    if cfg.use_model:
        cols.append("model")
    return cols + ["status"]


def _sweep_point(args) -> dict:
    point, base, use_model, tol, mesh = args
    vals = {**base, **point}
    row = dict(point)
    try:
        n = vals["n"]
        if n is None or abs(n - round(n)) > 1e-9:
            raise DomainError(f"n must be an integer, got {n}")
        inp = BoundInput(int(round(n)), vals["K"], vals["d"])
        row["zhong_yang"] = math.pi**2 / inp.d**2
        row["lichnerowicz"] = inp.n * inp.K
        bounds = {r.name: r.value for r in best_bound(inp, False)}
        row["li_type"] = bounds["li_type"]
        row["shi_zhang_optimal"] = bounds["shi_zhang_optimal"]
        if vals.get("s") is not None:
            row["shi_zhang"] = shi_zhang(inp, vals["s"]).value
        status = "ok"
        if use_model:
            if inp.K == 0:
                row["model"] = row["zhong_yang"]
            elif inp.at_myers_limit:
                status = "model_skipped"
            else:
                row["model"] = model_bound(inp, tol, mesh).value
        row["status"] = status
    except DomainError as exc:
        row["status"] = f"invalid: {exc}"
    return row


def cmd_sweep(cfg: RunConfig) -> tuple[list, list]:
    base = {"n": cfg.n, "K": cfg.K, "d": cfg.d, "s": cfg.s}
    fixed = [v for v in ("n", "K", "d") if v not in {r.var for r in cfg.sweeps}]
    _require(cfg, *fixed)
    grids = [[(r.var, float(v)) for v in r.values()] for r in cfg.sweeps]
    points = [dict(combo) for combo in itertools.product(*grids)]
    # lexicographic in the swept values, in the order the ranges were given
    points.sort(key=lambda p: tuple(p[r.var] for r in cfg.sweeps))
    tasks = [(p, base, cfg.use_model, cfg.solver_tol, cfg.mesh) for p in points]
    t0 = time.perf_counter()
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    wall = time.perf_counter() - t0 if cfg.timing else None

    records = []
    for row in rows:
        echo = {key: row.get(key, base[key]) for key in ("n", "K", "d", "s")}
        if echo["n"] is not None:
            echo["n"] = int(round(echo["n"])) if abs(echo["n"] - round(echo["n"])) <= 1e-9 else None
        for name in sweep_columns(cfg):
            if name in SWEEP_VARS or name == "status" or name not in row:
                continue
            valid = not (name == "lichnerowicz" and echo["K"] == 0)
            res = BoundResult(name, row[name], valid, row["status"])
            records.append(make_record(echo, res, wall))
    return records, rows


# --- rendering ---------------------------------------------------------------


def render_csv(columns: Sequence[str], rows: Sequence[dict], digits: int = JSON_DIGITS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c), digits) for c in columns])
    return buf.getvalue()


def render_table(columns: Sequence[str], rows: Sequence[dict], digits: int = TABLE_DIGITS) -> str:
    cells = [[_fmt(row.get(c), digits) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


RECORD_COLUMNS = ("bound", "value", "valid", "notes")
SUITE_COLUMNS = ("name", "status", "worst_margin")


def _record_rows(records: list) -> list[dict]:
    return [{c: r[c] for c in RECORD_COLUMNS} | {"fixture": r["input"].get("fixture")} for r in records]


def _suite_rows(suites: list) -> list[dict]:
    return [
        {"name": s["name"], "status": "PASS" if s["passed"] else "FAIL", "worst_margin": s["worst_margin"]}
        for s in suites
    ]


def render(cfg: RunConfig, records: list, extra: list) -> str:
    """Serialise the run; ``extra`` is suite results for verify and raw rows for sweep."""
    if cfg.output_format == "json":
        suites = extra if cfg.command == "verify" else []
        report = build_report(cfg, records, suites)
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"

    if cfg.command == "sweep":
        cols, rows = sweep_columns(cfg), extra
    elif cfg.command == "verify":
        cols, rows = list(SUITE_COLUMNS), _suite_rows(extra)
    else:
        cols = (["fixture"] if cfg.command == "examples" else []) + list(RECORD_COLUMNS)
        rows = _record_rows(records)
    if cfg.output_format == "csv":
        return render_csv(cols, rows)
    return render_table(cols, rows)


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="ambient dimension (integer >= 2)")
    common.add_argument("--K", type=float, help="Ricci lower bound is (n-1)K, K >= 0")
    common.add_argument("--d", type=float, help="leaf-space diameter (model: interval length)")
    common.add_argument("--s", type=float, help="Shi-Zhang parameter in (0, 1)")
    common.add_argument("--a", type=float, help="model interval left end (default -d/2)")
    common.add_argument("--k", type=float, help="eigenfunction asymmetry for the refined bound, in (0, 1]")
    common.add_argument("--model", action="store_true", help="include the 1-D model eigenvalue")
    common.add_argument("--mesh", type=int, default=1024, help="finite-difference cells (power of two >= 64)")
    common.add_argument("--tolerance", type=float, default=1e-10, help="solver tolerance in [1e-12, 1e-4]")
    common.add_argument("--format", choices=("json", "csv", "table"), default=None, dest="output_format")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised suites")
    common.add_argument("--negative-control", action="store_true", help="inject a fault into the psi suite")
    common.add_argument("--sweep", action="append", default=[], metavar="VAR=START:STOP:COUNT")
    common.add_argument("--timing", action="store_true", help="record wall times (output is then not reproducible)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    ap = argparse.ArgumentParser(
        prog="foliation-bounds",
        description="Lower bounds for the first basic eigenvalue of singular Riemannian foliations.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "bounds": "table of every bound for (n, K, d)",
        "model": "first Neumann eigenvalue of the 1-D model",
        "verify": "run the verification suites",
        "examples": "bounds on the foliation fixtures",
        "sweep": "CSV of bounds over a parameter grid",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fmt = ns.output_format or ("csv" if ns.command == "sweep" else "table")
    cfg = RunConfig(
        command=ns.command,
        output_format=fmt,
        output_path=ns.out,
        tolerance=ns.tolerance,
        mesh=ns.mesh,
        seed=ns.seed,
        use_model=ns.model,
        negative_control=ns.negative_control,
        timing=ns.timing,
        jobs=ns.jobs,
        n=ns.n,
        K=ns.K,
        d=ns.d,
        s=ns.s,
        a=ns.a,
        k=ns.k,
        sweeps=[SweepRange.parse(t) for t in ns.sweep],
    )
    return cfg.validate()


HANDLERS = {
    "bounds": cmd_bounds,
    "model": cmd_model,
    "verify": cmd_verify,
    "examples": cmd_examples,
    "sweep": cmd_sweep,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute ``cfg``; returns ``(exit status, rendered output)``."""
    records, extra = HANDLERS[cfg.command](cfg)
    text = render(cfg, records, extra)
    status = EXIT_OK
    if cfg.command == "verify" and not all(s["passed"] for s in extra):
        status = EXIT_VERIFY
    return status, text


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        status, text = run(cfg)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, HierarchyViolation) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    if status == EXIT_VERIFY:
        print("verification failed", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
