"""Command-line front end: check hypotheses, solve, verify, sweep.

Configuration comes from an optional JSON file (--config) whose keys match
the flag names; explicit flags win. All data files are deterministic:
floats are written with repr (shortest round-trip, at most 17 significant
digits), JSON keys are sorted, and nothing carries a timestamp. Run
provenance lives in a separate run_meta.json sidecar so byte-identical
reruns stay byte-identical.

Exit codes: 0 success, 1 hypothesis failure, 2 input or config error,
3 non-convergence, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .coeffexpr import Coefficient, load_coefficient
from .fracops import as_alpha
from .hypotheses import (
    lemma1_profile,
    lemma2_constants,
    thm1_constants,
    thm2_constants,
    thm3_constants,
)
from .meshfun import GradedGrid, GridFunction, make_graded_grid
from .solver import SOLVE_CASES, SolveSpec, solve
from .verify import asymptotic_fit, boundary_limits, prop1_certify, residual

__all__ = ["main", "RunConfig"]

EXIT_OK = 0
EXIT_HYPOTHESIS = 1
EXIT_INPUT = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFY = 4

_OP_CASE = {"thm1": 1, "thm2": 2, "thm3": 3, "lemma2": 1}
_SWEEP_PARAMS = ("alpha", "amp", "T")


@dataclass(frozen=True)
class RunConfig:
    command: str
    coeff: str | None = None
    alpha: float = 0.5
    case: str | None = None
    a: float = 1.0
    b: float = 1.0
    T: float = 1.0
    tmax: float = 100.0
    nodes: int = 4096
    grading: float = 2.0
    out: str = "out"
    override_hypotheses: bool = False
    sweep: tuple[str, ...] = ()
    max_iterations: int = 60
    tolerance: float = 1e-10
    residual_tolerance: float = 5e-3
    sweep_ratios: bool = False

    def __post_init__(self) -> None:
        if self.case is not None and self.case not in SOLVE_CASES:
            raise ValueError(f"case must be one of {SOLVE_CASES}, got {self.case!r}")
        as_alpha(self.alpha)
        if self.nodes < 16:
            raise ValueError("need at least 16 nodes")


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=str, default=None)
    shared.add_argument("--coeff", type=str, default=None)
    shared.add_argument("--alpha", type=float, default=None)
    shared.add_argument("--case", type=str, choices=SOLVE_CASES, default=None)
    shared.add_argument("--a", type=float, default=None)
    shared.add_argument("--b", type=float, default=None)
    shared.add_argument("--T", type=float, default=None)
    shared.add_argument("--tmax", type=float, default=None)
    shared.add_argument("--nodes", type=int, default=None)
    shared.add_argument("--grading", type=float, default=None)
    shared.add_argument("--out", type=str, default=None)
    shared.add_argument("--override-hypotheses", action="store_true", default=None)
    shared.add_argument("--sweep", action="append", default=None,
                        metavar="param=lo:hi:steps")

    p = argparse.ArgumentParser(
        prog="fracasym",
        description="hypothesis checks, fixed-point solves, and solution "
                    "verification for fractional asymptotic integration",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("check", "evaluate the contraction constants and pass flags"),
        ("solve", "iterate the integral map to its fixed point"),
        ("verify", "residual, asymptotic fit and boundary limits of a solution"),
        ("sweep", "tabulate constants over a parameter grid"),
    ]:
        sub.add_parser(name, parents=[shared], help=doc)
    return p


_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def _load_config(ns: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if ns.config is not None:
        with open(ns.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(raw)
    for key in ("coeff", "alpha", "case", "a", "b", "T", "tmax", "nodes",
                "grading", "out", "sweep"):
        val = getattr(ns, key)
        if val is not None:
            merged[key] = val
    if ns.override_hypotheses is not None:
        merged["override_hypotheses"] = True
    if "sweep" in merged:
        merged["sweep"] = tuple(merged["sweep"])
    return RunConfig(command=ns.command, **merged)


def _grid(cfg: RunConfig) -> GradedGrid:
    return make_graded_grid(cfg.tmax, cfg.nodes, cfg.grading)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_meta(cfg: RunConfig) -> None:
    meta = {
        "tool": "fracasym",
        "command": cfg.command,
        "config": {k: getattr(cfg, k) for k in sorted(_CONFIG_KEYS)},
        "numpy": np.__version__,
        "python": sys.version.split()[0],
    }
    meta["config"]["sweep"] = list(cfg.sweep)
    _write_json(os.path.join(cfg.out, "run_meta.json"), meta)


def _case_constants(case: str, coeff: Coefficient, cfg: RunConfig, grid=None):
    """(report dict, contraction constant, passed) for one case."""
    al = cfg.alpha
    if case == "thm1":
        rep = thm1_constants(coeff, al, cfg.T, t_max=cfg.tmax)
        return rep.to_json_dict(), rep.k, rep.passed
    if case == "thm2":
        rep = thm2_constants(coeff, al, cfg.T, t_max=cfg.tmax)
        return rep.to_json_dict(), rep.k4, rep.passed
    if case == "thm3":
        rep = thm3_constants(coeff, al, t_max=cfg.tmax)
        return rep.to_json_dict(), rep.k3, rep.passed
    profile = lemma1_profile(coeff, al, grid=grid if grid is not None else _grid(cfg))
    rep = lemma2_constants(profile)
    d = rep.to_json_dict()
    d["mean_zero"] = bool(profile.mean_zero)
    return d, float(rep.k1), bool(rep.pass_k1)


def cmd_check(cfg: RunConfig, coeff: Coefficient) -> int:
    cases = (cfg.case,) if cfg.case else SOLVE_CASES
    grid = _grid(cfg)
    all_pass = True
    for case in cases:
        try:
            payload, _, passed = _case_constants(case, coeff, cfg, grid=grid)
            payload["passed"] = passed
        except ValueError as e:
            payload, passed = {"error": str(e), "passed": False}, False
        _write_json(os.path.join(cfg.out, f"check_{case}.json"), payload)
        all_pass = all_pass and passed
    return EXIT_OK if all_pass else EXIT_HYPOTHESIS


def cmd_solve(cfg: RunConfig, coeff: Coefficient) -> int:
    if cfg.case is None:
        print("error: solve needs --case", file=sys.stderr)
        return EXIT_INPUT
    spec = SolveSpec(
        case=cfg.case,
        alpha=cfg.alpha,
        a=cfg.a,
        b=cfg.b,
        coefficient=coeff,
        grid=_grid(cfg),
        split=cfg.T,
        max_iterations=cfg.max_iterations,
        tolerance=cfg.tolerance,
        attempt_anyway=cfg.override_hypotheses,
    )
    try:
        result = solve(spec)
    except ValueError as e:
        _write_json(
            os.path.join(cfg.out, f"solve_{cfg.case}.json"),
            {"error": str(e), "converged": False},
        )
        print(f"hypothesis gate: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    _write_json(os.path.join(cfg.out, f"solve_{cfg.case}.json"), result.to_json_dict())
    result.fixed_point.to_csv(os.path.join(cfg.out, f"fixed_point_{cfg.case}.csv"))
    if cfg.case in ("thm3", "lemma2"):
        result.solution.to_csv(os.path.join(cfg.out, f"solution_{cfg.case}.csv"))
    if not result.converged:
        print(
            f"did not reach tolerance {spec.tolerance!r} in "
            f"{spec.max_iterations} iterations",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _read_artifact_csv(path: str, grid: GradedGrid) -> np.ndarray:
    with open(path) as fh:
        rows = fh.read().strip().split("\n")
    if not rows or rows[0] != "t,value":
        raise ValueError(f"{path}: expected a 't,value' table")
    body = rows[1:]
    if len(body) != grid.n + 1:
        raise ValueError(
            f"{path}: {len(body)} rows do not match the configured grid "
            f"({grid.n + 1} nodes)"
        )
    t = np.empty(grid.n + 1)
    v = np.empty(grid.n + 1)
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed row {i + 2}")
        t[i], v[i] = float(parts[0]), float(parts[1])
    if not np.allclose(t, grid.nodes, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{path}: node times do not match the configured grid")
    return v


_VERIFY_HEAD = {
    # head exponent of the stored solution and the reference-head builder
    "thm1": (0.0, lambda t, al, a, b: a + b * t**al),
    "thm2": (None, lambda t, al, a, b: b * t**al),
    "thm3": (None, lambda t, al, a, b: b * t),
    "lemma2": (0.0, lambda t, al, a, b: np.ones_like(t)),
}


def cmd_verify(cfg: RunConfig, coeff: Coefficient) -> int:
    if cfg.case is None:
        print("error: verify needs --case", file=sys.stderr)
        return EXIT_INPUT
    case = cfg.case
    grid = _grid(cfg)
    sol_path = os.path.join(cfg.out, f"solution_{case}.csv")
    if not os.path.exists(sol_path):
        sol_path = os.path.join(cfg.out, f"fixed_point_{case}.csv")
    if not os.path.exists(sol_path):
        print(f"error: no solution artifact for {case} in {cfg.out}", file=sys.stderr)
        return EXIT_INPUT
    try:
        v = _read_artifact_csv(sol_path, grid)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    al = cfg.alpha
    head_e, head_fn = _VERIFY_HEAD[case]
    if head_e is None:
        head_e = al - 1.0
    x = GridFunction(grid, v, head_exponent=head_e if v[0] != 0.0 else 0.0)

    res = residual(x, _OP_CASE[case], coeff, al)
    _write_json(os.path.join(cfg.out, f"residual_{case}.json"), res.to_json_dict())
    res.to_csv(os.path.join(cfg.out, f"residual_{case}.csv"))

    fit_case = case if case != "lemma2" else "thm1"
    a_true, b_true = cfg.a, cfg.b
    if case == "lemma2":
        a_true, b_true = 1.0, 0.0
    rep = asymptotic_fit(x, fit_case, al, a_true=a_true, b_true=b_true)
    _write_json(os.path.join(cfg.out, f"asymptotic_{case}.json"), rep.to_json_dict())

    bl = boundary_limits(x, case, al)
    _write_json(os.path.join(cfg.out, f"boundary_{case}.json"), bl.to_json_dict())

    if case == "lemma2":
        fp_path = os.path.join(cfg.out, "fixed_point_lemma2.csv")
        if os.path.exists(fp_path):
            y = GridFunction(grid, _read_artifact_csv(fp_path, grid))
            _write_json(
                os.path.join(cfg.out, "certificate_lemma2.json"), prop1_certify(y)
            )

    t = grid.nodes[1:]
    head_vals = head_fn(t, al, a_true, b_true)
    weighted = t ** (1.0 - al) * np.abs(v[1:] - head_vals)
    with open(os.path.join(cfg.out, f"verify_{case}.csv"), "w", newline="\n") as fh:
        fh.write("t,x,head,weighted_remainder\n")
        for row in zip(t, v[1:], head_vals, weighted):
            fh.write(",".join(repr(float(u)) for u in row) + "\n")

    if res.sup_residual > cfg.residual_tolerance:
        print(
            f"residual {res.sup_residual!r} exceeds tolerance "
            f"{cfg.residual_tolerance!r}",
            file=sys.stderr,
        )
        return EXIT_VERIFY
    return EXIT_OK


def _parse_sweep_ranges(cfg: RunConfig) -> dict[str, np.ndarray]:
    axes = {
        "alpha": np.array([cfg.alpha]),
        "amp": np.array([1.0]),
        "T": np.array([cfg.T]),
    }
    for entry in cfg.sweep:
        name, _, rng = entry.partition("=")
        if name not in _SWEEP_PARAMS:
            raise ValueError(
                f"sweep parameter must be one of {_SWEEP_PARAMS}, got {name!r}"
            )
        parts = rng.split(":")
        if len(parts) != 3:
            raise ValueError(f"sweep range must be lo:hi:steps, got {rng!r}")
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        if steps < 0 or not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"bad sweep range {rng!r}")
        axes[name] = np.linspace(lo, hi, steps)
    return axes


def _scaled_coefficient(coeff: Coefficient, lam: float) -> Coefficient:
    if lam == 1.0:
        return coeff
    env = replace(coeff.envelope, amplitude=coeff.envelope.amplitude * abs(lam))
    if coeff.text is not None:
        return Coefficient.from_expression(
            f"{lam!r} * ({coeff.text})", env, alpha_context=coeff.alpha_context
        )
    scaled = np.column_stack([coeff.samples[:, 0], coeff.samples[:, 1] * lam])
    return Coefficient.from_samples(scaled, env, alpha_context=coeff.alpha_context)


def cmd_sweep(cfg: RunConfig, coeff: Coefficient) -> int:
    if cfg.case is None:
        print("error: sweep needs --case", file=sys.stderr)
        return EXIT_INPUT
    try:
        axes = _parse_sweep_ranges(cfg)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    cells = [
        (al, amp, T)
        for al in axes["alpha"]
        for amp in axes["amp"]
        for T in axes["T"]
    ]
    header = ["alpha", "amp", "T", "k", "passed", "observed_ratio", "error"]
    out_path = os.path.join(cfg.out, f"sweep_{cfg.case}.csv")

    def cell_row(cell: tuple[float, float, float]) -> list:
        al, amp, T = (float(c) for c in cell)
        cell_cfg = replace(cfg, alpha=al, T=T)
        try:
            scaled = _scaled_coefficient(coeff, amp)
            _, k, passed = _case_constants(cfg.case, scaled, cell_cfg)
            ratio = ""
            if cfg.sweep_ratios:
                spec = SolveSpec(
                    case=cfg.case,
                    alpha=al,
                    a=cfg.a,
                    b=cfg.b,
                    coefficient=scaled,
                    grid=_grid(cell_cfg),
                    split=T,
                    max_iterations=cfg.max_iterations,
                    tolerance=cfg.tolerance,
                    attempt_anyway=True,
                )
                ratio = repr(solve(spec).observed_ratio)
            return [repr(al), repr(amp), repr(T), repr(float(k)),
                    str(passed), ratio, ""]
        except ValueError as e:
            return [repr(al), repr(amp), repr(T), "", "False", "", str(e)]

    if cells:
        workers = min(8, len(cells))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(cell_row, cells))
    else:
        rows = []
    with open(out_path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else EXIT_OK
    try:
        cfg = _load_config(ns)
        if cfg.coeff is None:
            raise ValueError("a coefficient file is required (--coeff PATH)")
        coeff = load_coefficient(cfg.coeff)
        os.makedirs(cfg.out, exist_ok=True)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    _write_meta(cfg)

    try:
        if cfg.command == "check":
            return cmd_check(cfg, coeff)
        if cfg.command == "solve":
            return cmd_solve(cfg, coeff)
        if cfg.command == "verify":
            return cmd_verify(cfg, coeff)
        return cmd_sweep(cfg, coeff)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
