"""Command-line front end.

Exit codes: 0 success; 1 invalid input or unknown case (or a failed verify);
2 solver did not converge; 3 a diagnostic ran but was inconclusive.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, analyticity, closedform, reporting, spectral, workflows
from .config import RunConfig, load_config
from .errors import SectorwaveError, SolveFailure, UnknownCase

log = logging.getLogger("sectorwave")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_INCONCLUSIVE = 0, 1, 2, 3
_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    name = os.environ.get("SECTORWAVE_LOG", "error").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(name, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def _fail(msg: str, code: int = EXIT_INPUT) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _out_dir(args, cfg: RunConfig | None) -> Path:
    out = Path(args.out or (cfg.output_dir if cfg else "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def cmd_solve(args) -> int:
    try:
        cfg = _config(args)
        if cfg.problem is None:
            return _fail("config has no 'problem' section")
        spec = cfg.problem
        out = _out_dir(args, cfg)
        try:
            rep = workflows.solve_spec(spec)
            status = "converged" if rep.converged else "max_iter"
        except SolveFailure as exc:
            rep, status = exc.report, type(exc).__name__
            print(f"error: {exc}", file=sys.stderr)
    except (SectorwaveError, ValueError) as exc:
        return _fail(str(exc))
    report = workflows.solve_report(rep, spec, status)
    report["seed"] = args.seed if args.seed is not None else cfg.seed
    spectral.write_csv(rep.solution, out / "solution.csv")
    reporting.write_json(report, out / "report.json")
    if not rep.converged:
        if status == "max_iter":
            print(f"error: no convergence in {spec.solver.max_iter} iterations; best residual {rep.best_residual:.3g}",
                  file=sys.stderr)
        return EXIT_NOT_CONVERGED
    print(f"converged in {rep.iterations} iterations, residual {rep.final_residual:.3e}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    try:
        cfg = _config(args)
        u = spectral.read_field(args.solution)
        res = workflows.run_diagnostics(u, cfg.diagnostics, cfg.ledger_params, cfg.poles)
    except (SectorwaveError, ValueError, OSError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    out = _out_dir(args, cfg)
    report = dict(res.report)
    report["seed"] = args.seed if args.seed is not None else cfg.seed
    reporting.write_json(report, out / "diagnostics.json")
    if res.ledger is not None:
        reporting.write_ledger_csv(res.ledger, out / "ledger.csv")
    if res.undecided:
        print("inconclusive: " + ", ".join(res.undecided), file=sys.stderr)
        return EXIT_INCONCLUSIVE
    print(f"diagnostics written to {out / 'diagnostics.json'}")
    return EXIT_OK


def cmd_poles(args) -> int:
    try:
        u = spectral.read_field(args.solution)
        ps = analyticity.pade_poles(u, args.center, args.max_degree)
    except (SectorwaveError, ValueError, OSError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    for c in ps.clusters:
        z = c.centroid
        print(f"{z.real:+.10f} {z.imag:+.10f}i  multiplicity {c.multiplicity}  diameter {c.diameter:.2e}")
    if args.out:
        out = _out_dir(args, None)
        reporting.write_json(
            {
                "poles": [[p.real, p.imag] for p in ps.poles],
                "residue_magnitudes": ps.residue_magnitudes,
                "spurious_rejected": ps.spurious_rejected,
                "clusters": [
                    {"centroid": [c.centroid.real, c.centroid.imag], "multiplicity": c.multiplicity,
                     "diameter": c.diameter}
                    for c in ps.clusters
                ],
            },
            out / "poles.json",
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        checks, details = workflows.verify_case(args.case)
    except UnknownCase as exc:
        return _fail(str(exc.args[0]))
    except SectorwaveError as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    print(f"case {args.case}: solved in {details['iterations']} iterations ({details['solve_seconds']:.2f} s)")
    for chk in checks:
        print("  " + chk.line())
    ok = all(c.passed for c in checks)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_INPUT


def cmd_oracle(args) -> int:
    if args.action == "list":
        for name in closedform.list_cases():
            case = closedform.get_case(name)
            print(f"{name:<22} decay {case.decay_rate_exact:.6g}  strip {case.strip_width_exact:.6g}")
        return EXIT_OK
    try:
        case = closedform.get_case(args.case)
    except UnknownCase as exc:
        return _fail(str(exc.args[0]))
    out = _out_dir(args, None)
    spectral.write_csv(case.sample(), out / f"{args.case}.csv")
    print(f"wrote {out / (args.case + '.csv')}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cfg = _config(args)
        if cfg.sweep is None:
            return _fail("config has no 'sweep' section")
        base = cfg.problem.model_dump() if cfg.problem else None
        points = workflows.sweep_points(cfg.sweep, cfg.problem)
    except (SectorwaveError, ValueError) as exc:
        return _fail(str(exc))
    grid = cfg.problem.grid.model_dump() if cfg.problem else closedform.REFERENCE_GRID.to_config()
    jobs = [(cfg.sweep.case, p, base, grid) for p in points]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(workflows.run_sweep_point, jobs))
    else:
        results = [workflows.run_sweep_point(j) for j in jobs]
    out = _out_dir(args, cfg)
    reporting.write_json(
        {"case": cfg.sweep.case, "results": results, "seed": args.seed if args.seed is not None else cfg.seed},
        out / "sweep.json",
    )
    bad = [r for r in results if r.get("status") != "ok"]
    print(f"{len(results) - len(bad)}/{len(results)} sweep points converged")
    return EXIT_NOT_CONVERGED if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--seed", type=int, default=None, help="seed recorded in reports")

    p = argparse.ArgumentParser(prog="sectorwave", description="Solitary-wave solver and analyticity diagnostics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[common], help="solve the configured problem").set_defaults(func=cmd_solve)

    d = sub.add_parser("diagnose", parents=[common], help="run analyticity diagnostics on a field file")
    d.add_argument("solution", help="field file (.csv or binary)")
    d.set_defaults(func=cmd_diagnose)

    q = sub.add_parser("poles", parents=[common], help="Pade poles of a field file")
    q.add_argument("solution")
    q.add_argument("--center", type=float, default=0.0)
    q.add_argument("--max-degree", type=int, default=8)
    q.set_defaults(func=cmd_poles)

    v = sub.add_parser("verify", parents=[common], help="solve a closed-form case and compare")
    v.add_argument("case")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", parents=[common], help="closed-form registry")
    osub = o.add_subparsers(dest="action", required=True)
    osub.add_parser("list", parents=[common])
    ex = osub.add_parser("export", parents=[common])
    ex.add_argument("case")
    o.set_defaults(func=cmd_oracle)

    sub.add_parser("sweep", parents=[common], help="parameter sweep").set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
