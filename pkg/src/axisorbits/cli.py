"""Command-line front end.

Units: gravitational constant G = 1; masses and the period T are in the
matching units, T defaults to 2*pi.

Exit codes: 0 success, 1 numerical failure (unconverged run, trivial
minimiser, certificate unavailable), 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .action import action_value
from .configuration import DomainError, MassSystem, circular_config, validate_config
from .io import csv_text, dumps, write_csv, write_json
from .jacobi import (CertificateUnavailable, NoConjugatePoint, first_conjugate_point,
                     jacobi_frequency, jacobi_report)
from .loopspace import LoopZ, SymmetryClass
from .odeverify import verify_periodicity
from .optimizer import MinimizeOptions, minimize, minimize_refined

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("axisorbits")


class UsageError(Exception):
    pass


def _masses(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mass list {text!r}") from None


def _modes(text: str) -> int:
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError("--modes must be >= 1")
    return k


def _instance_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--masses", type=_masses, help="comma-separated masses, e.g. 0.5,0.5")
    src.add_argument("--instance", type=Path, help='JSON file {"masses": [...], "period": T}')
    p.add_argument("--n", type=int, choices=(2, 3), help="number of primaries (checked)")
    p.add_argument("--period", type=float, default=None, help="period T (default 2*pi)")


def _optimizer_args(p: argparse.ArgumentParser, refine: bool) -> None:
    p.add_argument("--modes", type=_modes, default=32, help="truncation order K (default 32)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gtol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--init-amplitude", type=float, default=None)
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=refine,
                   help="double K from --modes (warm start) until the EL residual is below "
                        f"--el-tol, up to K=512 (default: {'on' if refine else 'off'})")
    p.add_argument("--el-tol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axisorbits",
        description="Vertical periodic orbits of the circular restricted 3- and 4-body "
                    "problems (units with G = 1).")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="circular configuration of the primaries")
    _instance_args(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_config)

    p = sub.add_parser("minimize", help="minimise the action over a symmetry class")
    _instance_args(p)
    p.add_argument("--class", dest="cls", choices=("anti-half", "odd"), default="anti-half")
    _optimizer_args(p, refine=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("jacobi", help="second variation and conjugate point at z = 0")
    _instance_args(p)
    p.add_argument("--class", dest="cls", choices=("anti-half", "odd", "both"), default="both")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_jacobi)

    p = sub.add_parser("sweep", help="run jacobi + minimize over a grid of mass instances")
    p.add_argument("--sweep-grid", type=Path, required=True, help="JSON grid description")
    p.add_argument("--class", dest="cls", choices=("anti-half", "odd"), default="anti-half")
    _optimizer_args(p, refine=False)
    p.add_argument("--no-minimize", action="store_true", help="skip the minimisation columns")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, help="directory for sweep.csv (default: stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def load_system(args) -> MassSystem:
    if args.instance is not None:
        try:
            doc = json.loads(Path(args.instance).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read instance file: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("instance file must hold a JSON object")
        if args.period is not None:
            doc["period"] = args.period
        system = MassSystem.from_dict(doc)
    else:
        period = args.period if args.period is not None else 2.0 * math.pi
        system = MassSystem(tuple(args.masses), period)
    if args.n is not None and args.n != system.n_primaries:
        raise UsageError(f"--n {args.n} but {system.n_primaries} masses given")
    return system


def _options(args) -> MinimizeOptions:
    return MinimizeOptions(K=args.modes, gtol=args.gtol, max_iter=args.max_iter,
                           seed=args.seed, init_amplitude=args.init_amplitude)


def _out_dir(args) -> Optional[Path]:
    if args.out is None:
        return None
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {args.out}: {exc}") from exc
    return args.out


def _emit(doc: dict, out: Optional[Path], name: str) -> None:
    sys.stdout.write(dumps(doc))
    if out is not None:
        write_json(out / name, doc)


def cmd_config(args) -> int:
    system = load_system(args)
    out = _out_dir(args)
    config = circular_config(system)
    doc = {"instance": system.to_dict(), "config": config.to_dict(),
           "validation": validate_config(config, system).to_dict()}
    _emit(doc, out, "config.json")
    return EXIT_OK


def run_minimize(system: MassSystem, cls, opts: MinimizeOptions, refine: bool = False,
                 el_tol: float = 1e-6):
    config = circular_config(system)
    if refine:
        report = minimize_refined(system, cls, opts, el_tol=el_tol, config=config)
    else:
        report = minimize(system, cls, opts, config)
    check = verify_periodicity(report.loop, system, config)
    return config, report, check


def cmd_minimize(args) -> int:
    system = load_system(args)
    out = _out_dir(args)
    opts = _options(args)
    config, report, check = run_minimize(system, args.cls, opts, args.refine, args.el_tol)
    doc = {
        "instance": system.to_dict(),
        "config": config.to_dict(),
        "options": {"class": args.cls, "K": opts.K, "gtol": opts.gtol,
                    "max_iter": opts.max_iter, "seed": opts.seed,
                    "init_amplitude": opts.init_amplitude, "refine": args.refine,
                    "el_tol": args.el_tol},
        "report": report.to_dict(),
        "periodicity": check.to_dict(),
    }
    _emit(doc, out, "report.json")
    if out is not None:
        loop = report.loop
        t, z, dz = loop.sample_grid(report.action.grid_n)
        write_csv(out / "trajectory.csv", ("t", "z", "dz"), zip(t, z, dz))
        write_csv(out / "trace.csv", ("iteration", "action", "grad_norm"), report.trace)
        orbit = check.trajectory
        write_csv(out / "orbit.csv", orbit.CSV_HEADER, orbit.rows())
    if not report.converged:
        print(f"error: not converged ({report.message})", file=sys.stderr)
        return EXIT_NUMERIC
    if not report.nontrivial:
        print(f"error: trivial minimiser ({report.message})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_jacobi(args) -> int:
    system = load_system(args)
    out = _out_dir(args)
    classes = ("anti-half", "odd") if args.cls == "both" else (args.cls,)
    config = circular_config(system)
    try:
        report = jacobi_report(system, config, [SymmetryClass.parse(c) for c in classes])
    except (CertificateUnavailable, NoConjugatePoint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    doc = {"instance": system.to_dict(), "config": config.to_dict(), "jacobi": report.to_dict()}
    _emit(doc, out, "jacobi.json")
    return EXIT_OK


# -- sweeps --------------------------------------------------------------------

def grid_instances(doc: dict) -> list[MassSystem]:
    """Instances from a sweep-grid document.

    Either ``{"instances": [{"masses": [...], "period": T}, ...]}`` or
    ``{"n": 2, "period": T, "log_grid": {"min": a, "max": b, "points": k}}``
    (Cartesian product of a log-spaced axis, one axis per mass), or
    ``{"n": 3, "axes": [[...], [...], [...]]}``.
    """
    if "instances" in doc:
        return [MassSystem.from_dict(d) for d in doc["instances"]]
    n = int(doc.get("n", 2))
    period = float(doc.get("period", 2.0 * math.pi))
    if "axes" in doc:
        axes = doc["axes"]
        if len(axes) != n:
            raise UsageError("need one axis per mass")
    elif "log_grid" in doc:
        g = doc["log_grid"]
        axis = np.geomspace(float(g["min"]), float(g["max"]), int(g["points"])).tolist()
        axes = [axis] * n
    else:
        raise UsageError("sweep grid needs 'instances', 'axes' or 'log_grid'")
    return [MassSystem(tuple(ms), period) for ms in itertools.product(*axes)]


SWEEP_COLUMNS = ("omega", "c", "margin", "f0", "f_star", "nontrivial", "converged", "el_residual",
                 "error")


def sweep_row(system: MassSystem, cls: str, opts: Optional[MinimizeOptions],
              refine: bool = False, el_tol: float = 1e-6) -> list:
    row = [*system.masses]
    try:
        config = circular_config(system)
        omega = jacobi_frequency(system, config)
        c = first_conjugate_point(system, config)
        f0 = action_value(LoopZ.zero(system.period, cls, 1), config, system).value
        row += [omega, c, system.period / (2.0 * c) - 1.0, f0]
        if opts is None:
            return row + ["", "", "", "", ""]
        _, report, _ = run_minimize(system, cls, opts, refine, el_tol)
        return row + [report.action.value, int(report.nontrivial), int(report.converged),
                      report.action.el_residual_sup, ""]
    except Exception as exc:  # recorded per row, the sweep goes on
        width = system.n_primaries + len(SWEEP_COLUMNS)
        row = row[:system.n_primaries] + [""] * (width - system.n_primaries - 1)
        return row + [f"{type(exc).__name__}: {exc}"]


def _sweep_job(payload):
    masses, period, cls, opts, refine, el_tol = payload
    return sweep_row(MassSystem(masses, period), cls, opts, refine, el_tol)


def run_sweep(systems: Sequence[MassSystem], cls: str, opts: Optional[MinimizeOptions],
              workers: int = 1, refine: bool = False, el_tol: float = 1e-6) -> list[list]:
    jobs = [(s.masses, s.period, cls, opts, refine, el_tol) for s in systems]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_job, jobs))  # map keeps input order
    return [_sweep_job(j) for j in jobs]


def cmd_sweep(args) -> int:
    try:
        doc = json.loads(args.sweep_grid.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read sweep grid: {exc}") from exc
    systems = grid_instances(doc)
    if not systems:
        raise UsageError("sweep grid is empty")
    sizes = {s.n_primaries for s in systems}
    if len(sizes) != 1:
        raise UsageError("all sweep instances must have the same number of primaries")
    n = sizes.pop()
    out = _out_dir(args)
    opts = None if args.no_minimize else _options(args)
    rows = run_sweep(systems, args.cls, opts, max(1, args.workers), args.refine, args.el_tol)
    header = [f"m{i + 1}" for i in range(n)] + list(SWEEP_COLUMNS)
    if out is None:
        sys.stdout.write(csv_text(header, rows))
    else:
        write_csv(out / "sweep.csv", header, rows)
        print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}", file=sys.stderr)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit with status 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
