"""Command-line front end.

Subcommands: ``evolve``, ``steady``, ``sweep`` and ``figures``.  Exit codes:
0 success, 2 input or validation failure, 3 numeric failure, 4 disagreement
between independent steady-state routes.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytic, dynamics
from .entanglement import concurrence, concurrence_x_form
from .errors import CrossValidationError, DomainError, NumericError, UsageError
from .fileio import fmt, read_density_matrix_file, write_csv, write_trajectory_csv
from .model import INITIAL_STATE_NAMES, ModelParams, check_restrictions, named_initial_state

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CROSS_VALIDATION = 4

CROSS_VALIDATION_TOL = 1e-6

FIG1 = ModelParams(omega=1.0, j=0.1, delta=0.1, gamma=0.3)
FIG2 = ModelParams(omega=1.0, j=0.1, delta=0.458, gamma=0.458)
FIGURE_SPAN = 10.0  # gamma * t
FIG3_AXES = ((0.0, 5.0, 400), (0.0, 3.0, 400))
FIG4_POINTS = 241


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    initial: str  # state name or matrix file path
    integrator: dynamics.IntegratorConfig
    output_path: Path
    enforce_restrictions: bool = True


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count == 1:
            if self.start != self.stop:
                raise UsageError("a single-point axis needs start == stop")
        elif self.count < 2 or not self.start < self.stop:
            raise UsageError(f"axis needs count >= 2 and start < stop, got {self}")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        parts = text.split(":")
        try:
            if len(parts) == 1:
                v = float(parts[0])
                return cls(v, v, 1)
            if len(parts) == 3:
                return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError:
            pass
        raise UsageError(f"axis must be 'start:stop:count' or a single value, got {text!r}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepGrid:
    omega_bar_axis: Axis
    delta_bar_axis: Axis
    nbar_axis: Optional[Axis] = None

    @classmethod
    def parse(cls, text: str) -> "SweepGrid":
        parts = text.split(",")
        if len(parts) not in (2, 3):
            raise UsageError("grid must be 'w0:w1:nw,d0:d1:nd[,n0:n1:nn]'")
        axes = [Axis.parse(x) for x in parts]
        return cls(*axes)


# --------------------------------------------------------------------------
# commands


def resolve_initial_state(initial: str) -> np.ndarray:
    if initial in INITIAL_STATE_NAMES:
        return named_initial_state(initial)
    path = Path(initial)
    if not path.exists():
        raise UsageError(f"initial state {initial!r} is neither a known name {INITIAL_STATE_NAMES} nor a file")
    return read_density_matrix_file(path)


def _restriction_gate(p: ModelParams, enforce: bool) -> None:
    if p.omega <= 0:
        if enforce:
            raise DomainError("restrictions need omega > 0; pass --allow-restricted to proceed")
        return
    report = check_restrictions(p, warn=False)
    if not report.passed:
        msg = (
            f"restriction check failed: |J|/omega={report.j_ratio:.6g}, "
            f"(Omega-omega)/omega={report.anisotropy_ratio:.6g}, limit 0.1"
        )
        if enforce:
            raise DomainError(msg + " (use --allow-restricted to override)")
        log.warning(msg)


def cmd_evolve(cfg: RunConfig, stdout=None) -> dynamics.Trajectory:
    stdout = stdout or sys.stdout
    _restriction_gate(cfg.params, cfg.enforce_restrictions)
    rho0 = resolve_initial_state(cfg.initial)
    traj = dynamics.integrate(cfg.params, rho0, cfg.integrator)
    write_trajectory_csv(cfg.output_path, traj, cfg.params.gamma)
    conv = "none" if traj.converged_at is None else fmt(traj.converged_at)
    print(f"steady_C={fmt(traj.concurrences[-1])} converged_at={conv}", file=stdout)
    return traj


def _state_record(method: str, rho: np.ndarray, residual: float, **extra) -> dict:
    rec = {"method": method, "C": concurrence(rho), "residual": residual}
    for i in range(4):
        for k in range(4):
            rec[f"rho{i + 1}{k + 1}_re"] = float(rho[i, k].real)
            rec[f"rho{i + 1}{k + 1}_im"] = float(rho[i, k].imag)
    rec.update(extra)
    return rec


def steady_records(p: ModelParams, method: str, initial: str = "gg") -> list[dict]:
    """One record per requested method; ``all`` appends a cross-validation summary.

    The summary holds the largest pairwise matrix-entry deviation between the
    three routes and the gap between the closed-form concurrence and the
    concurrence of the closed-form matrix.
    """
    methods = ("analytic", "nullspace", "longtime") if method == "all" else (method,)
    records, matrices = [], {}
    for m in methods:
        if m == "analytic":
            res = analytic.steady_state_t0(p) if p.nbar == 0 else analytic.steady_state_finite_t(p)
            formula = analytic.steady_concurrence_t0(p) if p.nbar == 0 else analytic.steady_concurrence_finite_t(p)
            extra = {"C_formula": formula}
        elif m == "nullspace":
            res = dynamics.steady_state_nullspace(p)
            extra = {}
        elif m == "longtime":
            cfg = dynamics.IntegratorConfig.for_params(p, t_max=200.0 / p.gamma)
            res = dynamics.steady_state_longtime(p, resolve_initial_state(initial), cfg)
            extra = {}
        else:
            raise UsageError(f"unknown method {m!r}")
        matrices[m] = res.rho
        records.append(_state_record(m, res.rho, res.residual, **extra))

    if method == "all":
        deviation = max(float(np.max(np.abs(matrices[a] - matrices[b]))) for a, b in combinations(matrices, 2))
        formula_gap = abs(records[0]["C_formula"] - records[0]["C"])
        records.append(
            {
                "method": "cross_validation",
                "max_pairwise_deviation": deviation,
                "formula_vs_matrix_C": formula_gap,
                "agree": bool(deviation <= CROSS_VALIDATION_TOL and formula_gap <= CROSS_VALIDATION_TOL),
            }
        )
    return records


def cmd_steady(p: ModelParams, method: str, out=None, initial: str = "gg", stdout=None) -> list[dict]:
    """Write steady-state records as JSON lines.

    Records are written before a disagreement is reported, so a failing run
    still leaves the evidence behind; the disagreement then raises
    :class:`CrossValidationError`.
    """
    records = steady_records(p, method, initial)
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if out:
        Path(out).write_text(text)
    else:
        (stdout or sys.stdout).write(text)
    summary = records[-1]
    if summary["method"] == "cross_validation" and not summary["agree"]:
        raise CrossValidationError(
            f"steady-state routes disagree: max pairwise deviation {summary['max_pairwise_deviation']:.3e}, "
            f"formula vs matrix concurrence {summary['formula_vs_matrix_C']:.3e}"
        )
    return records


def sweep_rows(grid: SweepGrid):
    """Surface rows followed by per-slice ridge summary rows.

    Columns: ``kind, omega_bar, delta_bar, nbar, C, delta_max_pred``.  Surface
    rows have kind ``point``; for every (nbar, omega_bar) slice a ``ridge``
    row carries the grid argmax over delta_bar, its C, and (at nbar = 0) the
    closed-form optimal anisotropy.
    """
    wv = grid.omega_bar_axis.values()
    dv = grid.delta_bar_axis.values()
    nv = grid.nbar_axis.values() if grid.nbar_axis else np.array([0.0])
    points, ridges = [], []
    for n in nv:
        w2, d2 = np.meshgrid(wv, dv, indexing="ij")
        if n == 0:
            c = analytic.steady_concurrence_t0_grid(w2, d2)
        else:
            c = analytic.steady_concurrence_finite_t_scaled(w2, d2, n)
        for i, w in enumerate(wv):
            for k, d in enumerate(dv):
                points.append(["point", w, d, n, c[i, k], ""])
            best = int(np.argmax(c[i]))
            pred = analytic.delta_max(w, 1.0) if n == 0 else ""
            ridges.append(["ridge", w, dv[best], n, c[i, best], pred])
    return points + ridges


SWEEP_HEADER = ["kind", "omega_bar", "delta_bar", "nbar", "C", "delta_max_pred"]


def cmd_sweep(grid: SweepGrid, out) -> list:
    rows = sweep_rows(grid)
    write_csv(out, SWEEP_HEADER, rows)
    return rows


def figure_trajectories(p: ModelParams, workers: int = 1):
    cfg = dynamics.IntegratorConfig.for_params(p, t_max=FIGURE_SPAN / p.gamma)
    trajs = dynamics.map_ordered(
        lambda name: dynamics.integrate(p, named_initial_state(name), cfg), INITIAL_STATE_NAMES, workers
    )
    times = trajs[0].times
    overlay = [concurrence_x_form(analytic.analytic_trajectory_gg_product(p, t)).c for t in times]
    header = ["gamma_t"] + [f"C_{name}" for name in INITIAL_STATE_NAMES] + ["C_gg_analytic"]
    rows = [
        [p.gamma * t] + [tr.concurrences[i] for tr in trajs] + [overlay[i]] for i, t in enumerate(times)
    ]
    return header, rows


def fig4_rows():
    nstar = max(analytic.vanishing_temperature(FIG1), analytic.vanishing_temperature(FIG2))
    nbar = np.linspace(0.0, 1.2 * nstar, FIG4_POINTS)
    rows = []
    for n in nbar:
        rows.append([n] + [analytic.steady_concurrence_finite_t(p.with_(nbar=float(n))) for p in (FIG1, FIG2)])
    return ["nbar", "C_fig1", "C_fig2"], rows


def cmd_figures(which: Sequence[str], outdir, workers: int = 1) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in which:
        path = outdir / f"{name}.csv"
        if name == "fig1":
            write_csv(path, *figure_trajectories(FIG1, workers))
        elif name == "fig2":
            write_csv(path, *figure_trajectories(FIG2, workers))
        elif name == "fig3":
            grid = SweepGrid(Axis(*FIG3_AXES[0]), Axis(*FIG3_AXES[1]))
            cmd_sweep(grid, path)
        elif name == "fig4":
            write_csv(path, *fig4_rows())
        else:
            raise UsageError(f"unknown figure {name!r}")
        written.append(path)
    return written


# --------------------------------------------------------------------------
# argument handling


def _add_param_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--omega", type=float, default=1.0, help="qubit splitting (omega_bar with --scaled)")
    sp.add_argument("--j", type=float, default=0.1, help="exchange coupling J")
    sp.add_argument("--delta", type=float, default=0.1, help="anisotropy (delta_bar with --scaled)")
    sp.add_argument("--gamma", type=float, default=0.3, help="relaxation rate")
    sp.add_argument("--nbar", type=float, default=0.0, help="thermal occupation")
    sp.add_argument("--scaled", action="store_true", help="read omega, j, delta in units of gamma (gamma = 1)")


def _params(args) -> ModelParams:
    if args.scaled:
        return ModelParams(omega=args.omega, j=args.j, delta=args.delta, gamma=1.0, nbar=args.nbar)
    return ModelParams(omega=args.omega, j=args.j, delta=args.delta, gamma=args.gamma, nbar=args.nbar)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heisenberg-xy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="integrate the master equation and write a trajectory CSV")
    _add_param_flags(ev)
    ev.add_argument("--initial", default="gg", help=f"one of {', '.join(INITIAL_STATE_NAMES)} or a matrix file")
    ev.add_argument("--t-max", type=float, help="final time (default 30/gamma)")
    ev.add_argument("--dt", type=float, help="time step (default: half the stability bound)")
    ev.add_argument("--record-stride", type=int, default=1)
    ev.add_argument("--out", required=True)
    ev.add_argument("--allow-restricted", action="store_true", help="run even outside the validity window")

    st = sub.add_parser("steady", help="steady state by one or all methods (JSON lines)")
    _add_param_flags(st)
    st.add_argument("--method", choices=("analytic", "nullspace", "longtime", "all"), default="all")
    st.add_argument("--initial", default="gg", help="initial state for the longtime method")
    st.add_argument("--out", help="output file (default stdout)")

    sw = sub.add_parser("sweep", help="steady concurrence over a scaled parameter grid (gamma = 1)")
    sw.add_argument("--grid", required=True, help="w0:w1:nw,d0:d1:nd[,n0:n1:nn]; a bare value fixes an axis")
    sw.add_argument("--out", required=True)

    fg = sub.add_parser("figures", help="write CSV data behind figures 1-4")
    fg.add_argument("--which", nargs="+", choices=("fig1", "fig2", "fig3", "fig4"), default=["fig1", "fig2", "fig3", "fig4"])
    fg.add_argument("--outdir", required=True)
    fg.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "evolve":
            p = _params(args)
            cfg = RunConfig(
                params=p,
                initial=args.initial,
                integrator=dynamics.IntegratorConfig.for_params(
                    p, dt=args.dt, t_max=args.t_max, record_stride=args.record_stride
                ),
                output_path=Path(args.out),
                enforce_restrictions=not args.allow_restricted,
            )
            cmd_evolve(cfg)
        elif args.command == "steady":
            cmd_steady(_params(args), args.method, args.out, args.initial)
        elif args.command == "sweep":
            cmd_sweep(SweepGrid.parse(args.grid), args.out)
        elif args.command == "figures":
            for path in cmd_figures(args.which, args.outdir, args.workers):
                print(path)
    except CrossValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CROSS_VALIDATION
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
