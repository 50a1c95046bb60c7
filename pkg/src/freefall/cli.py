"""Command-line front end.

Exit codes: 0 success, 1 computational failure (error name on stderr),
2 usage or configuration error (reported before any computation).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import serialize
from .acceptance import Acceptance
from .cascade import build_complex, evaluation_map, homology
from .config import FORMATS, RunConfig, load_config
from .critical import CriticalPoint, expand
from .errors import ConfigError, FreeFallError
from .fourier import action, gradient
from .heatflow import shoot_unstable
from .hessian import closed_form_eigenvalues, spectrum_numeric
from .linearization import lincheck_report

log = logging.getLogger("freefall")

CRIT_RESIDUAL_TOL = 1e-9
SPECTRUM_TOL = 1e-6


class UsageError(Exception):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise UsageError(msg)


def _finite(x: float, name: str) -> None:
    _require(math.isfinite(x), f"{name} must be finite")


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- commands -------------------------------------------------------------


def cmd_crit(args, run: RunConfig) -> int:
    _require(args.k >= 1, "--k must be a positive integer")
    _finite(args.phase, "--phase")
    n = args.modes if args.modes is not None else max(run.solver.n_modes, args.k)
    _require(n >= args.k, f"--modes must be at least k={args.k}")
    cp = CriticalPoint(args.k, args.phase)
    q = expand(cp, n)
    residual = float(np.max(np.abs(gradient(q).to_vector())))
    _emit(serialize.dumps({
        "critical_point": cp.to_dict(),
        "loop": q.to_dict(),
        "action": action(q),
        "gradient_residual": residual,
    }))
    return 0 if residual < CRIT_RESIDUAL_TOL else 1


def cmd_spectrum(args, run: RunConfig) -> int:
    _require(args.k >= 1, "--k must be a positive integer")
    _require(args.modes > args.k, f"--modes must exceed k={args.k} (the tangent mode needs mode k+1)")
    _finite(args.phase, "--phase")
    rep = spectrum_numeric(CriticalPoint(args.k, args.phase), args.modes)
    ref = closed_form_eigenvalues(args.k, args.modes)
    expected = np.sort(np.repeat([p[0] for p in ref], [p[1] for p in ref]))
    ok = bool(np.all(np.abs(rep.eigenvalues - expected) <= np.maximum(SPECTRUM_TOL, 1e-9 * np.abs(expected))))
    if args.csv or run.format == "csv":
        _emit(serialize.rows_to_csv(["eigenvalue", "multiplicity", "label"], rep.eigenpairs))
    else:
        _emit(serialize.dumps(dict(rep.to_dict(), matches_closed_form=ok)))
    return 0 if ok else 1


def cmd_flow(args, run: RunConfig) -> int:
    _require(args.k >= 1, "--k must be a positive integer")
    _require(run.solver.n_modes >= args.k + 1, "n_modes must be at least k+1")
    _finite(args.theta, "--theta")
    traj = shoot_unstable(args.k, args.theta, run.solver)
    small = traj.decimated(2000)
    stem = f"flow_k{args.k}_theta{args.theta:g}"
    jsonl = serialize.write_text(run.output_dir / f"{stem}.jsonl", serialize.trajectory_jsonl(small))
    csv_path = serialize.write_text(run.output_dir / f"{stem}.csv", serialize.trajectory_csv(small))
    _emit(serialize.dumps({
        "k": args.k,
        "theta": args.theta,
        "converged": traj.converged,
        "limit_circle": traj.limit_circle,
        "limit_phase": traj.limit_phase,
        "flow_time": float(traj.s_grid[-1]),
        "samples": len(traj),
        "files": [str(jsonl), str(csv_path)],
    }))
    return 0 if traj.converged else 1


def cmd_ev(args, run: RunConfig) -> int:
    _require(args.k >= 1, "--k must be a positive integer")
    _require(run.solver.n_modes >= args.k + 1, "n_modes must be at least k+1")
    table = evaluation_map(args.k, run.solver, jobs=run.jobs)
    if run.format == "json":  # CSV unless JSON is asked for
        text = serialize.dumps({
            "k": table.k,
            "theta": table.thetas,
            "ev_phase": table.ev_phases,
            "converged": table.converged_mask,
        })
        name = f"ev_k{args.k}.json"
    else:
        text = table.to_csv()
        name = f"ev_k{args.k}.csv"
    if args.out is not None:
        serialize.write_text(run.output_dir / name, text)
    _emit(text)
    return 0


def cmd_homology(args, run: RunConfig) -> int:
    _require(args.K >= 1, "--K must be a positive integer")
    _require(run.solver.n_modes >= args.K, "n_modes must be at least K")
    cx = build_complex(args.K, run.solver, jobs=run.jobs)
    res = homology(cx)
    payload = dict(cx.to_dict(), betti=res.nonzero(), ranks=res.ranks, representatives=res.representatives)
    text = serialize.dumps(payload)
    if args.out is not None:
        serialize.write_text(run.output_dir / f"homology_K{args.K}.json", text)
    _emit(text)
    return 0


def cmd_lincheck(args, run: RunConfig) -> int:
    _require(args.k >= 1, "--k must be a positive integer")
    _require(run.solver.n_modes >= args.k + 1, "n_modes must be at least k+1")
    _finite(args.theta, "--theta")
    rep = lincheck_report(args.k, args.theta, run.solver, seed=run.seed)
    text = serialize.dumps(rep)
    if args.out is not None:
        serialize.write_text(run.output_dir / f"lincheck_k{args.k}.json", text)
    _emit(text)
    return 0


def cmd_verify(args, run: RunConfig) -> int:
    suite = Acceptance(cfg=run.solver, seed=run.seed, jobs=run.jobs)
    results = []
    for i in range(1, 11):
        res = suite.run(i)
        results.append(res)
        _emit(res.line())
    failed = [r.number for r in results if not r.passed]
    _emit(f"{10 - len(failed)}/10 criteria passed")
    return 1 if failed else 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--out", help="output directory for written files")
    common.add_argument("--jobs", type=int, help="worker processes for theta sweeps (default: CPU count)")
    common.add_argument("--format", choices=FORMATS, help="output format")
    common.add_argument("--seed", type=int, help="seed for randomized checks")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(
        prog="freefall",
        description="Regularized free-fall functional: critical circles, heat flow and cascade homology.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crit", parents=[common], help="critical loop on C_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--modes", type=int)
    p.set_defaults(func=cmd_crit)

    p = sub.add_parser("spectrum", parents=[common], help="Hessian spectrum at C_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--csv", action="store_true", help="emit (eigenvalue, multiplicity, label) rows")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("flow", parents=[common], help="shoot one flow line m_{k+1} -> C_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("ev", parents=[common], help="tabulate the evaluation map")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_ev)

    p = sub.add_parser("homology", parents=[common], help="cascade complex and its Z/2 homology")
    p.add_argument("--K", type=int, required=True)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("lincheck", parents=[common], help="finite-difference and adjoint checks of D_u")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.set_defaults(func=cmd_lincheck)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        run = load_config(
            args.config,
            output_dir=args.out,
            format=args.format,
            seed=args.seed,
            log_level=args.log_level,
            jobs=args.jobs,
        )
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=run.logging_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, run)
    except UsageError as exc:
        print(f"UsageError: {exc}", file=sys.stderr)
        return 2
    except (FreeFallError, ValueError, ArithmeticError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
