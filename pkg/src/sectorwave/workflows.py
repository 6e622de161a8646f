"""End-to-end pipelines shared by the command line and the acceptance tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analyticity as an
from . import closedform, solver
from .config import DiagnosticsSpec, LedgerSpec, PoleSpec, ProblemSpec, SweepSpec
from .errors import (
    BelowNoiseFloor,
    IllConditioned,
    Inconclusive,
    InsufficientDynamicRange,
    NonDecaying,
    SolveFailure,
)
from .spectral import Grid1D, SpectralField

# outcomes that mean "the diagnostic ran but could not decide"
_UNDECIDED = (Inconclusive, NonDecaying, BelowNoiseFloor, InsufficientDynamicRange, IllConditioned)


def eps_key(eps: float) -> str:
    return repr(float(eps))


# --- solve ----------------------------------------------------------------------


def solve_spec(spec: ProblemSpec) -> solver.SolveReport:
    """Build and solve the problem in ``spec``; failures raise with ``.report`` attached."""
    prob = spec.build()
    g = spec.guess
    guess = solver.default_guess(prob, g.amplitude, g.width, g.phase) if g else None
    s = spec.solver
    return solver.solve(prob, guess, method=s.method, tol=s.tol, max_iter=s.max_iter, damping=s.damping)


def solve_report(report: solver.SolveReport, spec: ProblemSpec | None = None, status: str = "ok") -> dict:
    out = report.summary()
    out["status"] = status
    out["tolerance"] = spec.solver.tol if spec else None
    if spec is not None:
        out["problem"] = spec.model_dump(exclude={"solver", "guess"})
        out["solver"] = spec.solver.model_dump()
    return out


# --- diagnostics ----------------------------------------------------------------


@dataclass
class DiagnosticResult:
    report: dict
    undecided: list
    ledger: an.NormLedger | None = None


def run_diagnostics(
    u: SpectralField,
    flags: DiagnosticsSpec = DiagnosticsSpec(),
    ledger_params: LedgerSpec = LedgerSpec(),
    pole_params: PoleSpec = PoleSpec(),
) -> DiagnosticResult:
    """Run the enabled analyticity diagnostics.

    Undecided outcomes (entire spectra, non-exponential tails, inconclusive
    ledgers) are recorded in the report and listed in ``undecided``.
    Precondition failures such as ``TruncationError`` propagate.
    """
    rep: dict = {"undecided": {}}
    undecided: list[str] = []

    def note(name, exc):
        undecided.append(name)
        rep["undecided"][name] = f"{type(exc).__name__}: {exc}"

    if flags.decay:
        try:
            fit = an.fit_decay(u)
            rep["decay"] = {"c": fit.c, "C": fit.C, "r2": fit.r_squared, "window": list(fit.window)}
        except _UNDECIDED as exc:
            rep["decay"] = None
            note("decay", exc)
    if flags.strip:
        try:
            sw = an.strip_width_from_spectrum(u)
            rep["strip_width"] = sw.width
            rep["strip"] = {"width": sw.width, "entire": sw.entire, "gamma": sw.gamma, "k_range": list(sw.k_range)}
            if sw.entire:
                note("strip", Inconclusive("spectrum decays faster than exponentially (entire)"))
        except _UNDECIDED as exc:
            rep["strip_width"] = None
            note("strip", exc)
    ledger = None
    if flags.ledger or flags.sector:
        ledger = an.build_norm_ledger(u, ledger_params.s, ledger_params.N_max, ledger_params.epsilons)
        rep["ledger"] = {
            "s": ledger.s,
            "N_max": ledger.N_max,
            "truncated": ledger.truncated,
            "partial_sums": {eps_key(e): v for e, v in ledger.partial_sums.items()},
            "bounded": {eps_key(e): ledger.bounded(e) for e in ledger.partial_sums},
        }
    sector_eps = None
    if flags.sector:
        try:
            est = an.estimate_sector(ledger, u)
            sector_eps = est.epsilon
        except Inconclusive as exc:
            est = exc.estimate
            note("sector", exc)
        rep["sector"] = {
            "epsilon": est.epsilon if est else None,
            "epsilon_star": est.epsilon_star if est else None,
            "A_sect_constant": est.A_sect_constant if est else None,
            "strip_width": est.strip_width if est else None,
        }
    poles = None
    if flags.poles:
        try:
            poles = an.pade_poles(u, pole_params.center, pole_params.max_degree)
            rep["poles"] = [[p.real, p.imag] for p in poles.poles]
            rep["pole_clusters"] = [
                {"centroid": [c.centroid.real, c.centroid.imag], "multiplicity": c.multiplicity, "diameter": c.diameter}
                for c in poles.clusters
            ]
            rep["spurious_rejected"] = poles.spurious_rejected
        except _UNDECIDED as exc:
            rep["poles"] = None
            note("poles", exc)
    if poles is not None and poles.poles and sector_eps is not None:
        rep["sector_containment"] = an.sector_containment(poles, sector_eps)
    else:
        rep["sector_containment"] = None
    rep["warnings"] = list(ledger.warnings) if ledger else []
    return DiagnosticResult(rep, undecided, ledger)


# --- closed-form verification ----------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} {self.value:.3e} {self.relation} {self.threshold:.3e}"


def _le(name, value, threshold) -> Check:
    return Check(name, float(value), float(threshold), bool(value <= threshold))


def verify_case(name: str, grid=closedform.REFERENCE_GRID) -> tuple[list[Check], dict]:
    """Solve a registered case from the default guess and compare with its closed form."""
    case = closedform.get_case(name)
    prob = case.problem(grid)
    t0 = time.perf_counter()
    try:
        rep = solver.solve(prob, tol=1e-10, max_iter=1000)
    except SolveFailure as exc:
        rep = exc.report
    elapsed = time.perf_counter() - t0
    u = rep.solution
    exact = case.evaluate(grid.x)
    checks = [
        _le("solve residual", solver.residual(prob, u), 1e-10),
        _le("max error vs closed form", np.abs(u.values - exact).max(), 1e-8),
    ]
    fit = an.fit_decay(u)
    checks.append(_le("decay rate relative error", abs(fit.c - case.decay_rate_exact) / case.decay_rate_exact, 0.02))
    strip = an.strip_width_from_spectrum(u).width
    checks.append(_le("decay rate / strip width", fit.c / strip, 1.05))
    details = {"iterations": rep.iterations, "solve_seconds": elapsed, "c": fit.c, "strip_width": strip}
    if case.pole_lattice.kind == "pole":
        poles = an.pade_poles(u)
        ring = case.pole_lattice.first_ring()
        centroids = np.array([c.centroid for c in poles.clusters])
        if centroids.size:
            dist = max(float(np.min(np.abs(centroids - z))) for z in ring)
            min_im = float(np.min(np.abs(centroids.imag)))
        else:
            dist = min_im = math.inf
        checks.append(_le("first-ring pole distance", dist, case.pole_tolerance))
        checks.append(_le("strip vs min|Im pole| rel. gap", abs(strip - min_im) / min_im, 0.05))
        details["poles"] = [[c.real, c.imag] for c in centroids]
    return checks, details


# --- sweeps ---------------------------------------------------------------------


def sweep_points(sweep: SweepSpec, base: ProblemSpec | None) -> list[dict]:
    """Parameter points in deterministic (input) order."""
    if sweep.case == "gkdv":
        return [{"l": l, "V": V} for l in (sweep.l or [1]) for V in (sweep.V or [2.0])]
    if sweep.case == "sharpness":
        return [{"theta": t} for t in sweep.theta]
    if base is None:
        raise ValueError("a 'problem' sweep needs a base problem")
    return [{"V": V} for V in sweep.V]


def run_sweep_point(args) -> dict:
    """Solve one sweep point; importable top-level function for worker pools."""
    case, point, base, grid_cfg = args
    grid = Grid1D(grid_cfg["L"], grid_cfg["N"])
    out = dict(point)
    try:
        if case == "gkdv":
            cf = closedform.gkdv_soliton(point["l"], point["V"])
        elif case == "sharpness":
            cf = closedform.sharpness_solution(point["theta"])
        else:
            cf = None
        if cf is not None:
            prob = cf.problem(grid)
            rep = solver.solve(prob, tol=1e-10, max_iter=1000)
            exact = cf.evaluate(grid.x)
            mid = int(np.argmin(np.abs(grid.x)))
            out["amplitude_exact"] = cf.amplitude
            out["amplitude_relative_error"] = abs(abs(rep.solution.values[mid]) - cf.amplitude) / cf.amplitude
            out["max_error"] = float(np.abs(rep.solution.values - exact).max())
            out["decay_rate_exact"] = cf.decay_rate_exact
        else:
            spec = ProblemSpec.model_validate({**base, "V": point["V"]})
            rep = solve_spec(spec)
        out.update(rep.summary())
        try:
            out["decay_rate"] = an.fit_decay(rep.solution).c
        except _UNDECIDED:
            out["decay_rate"] = None
        out["status"] = "ok" if rep.converged else "not_converged"
    except SolveFailure as exc:
        out["status"] = type(exc).__name__
        out["error"] = str(exc)
    except ValueError as exc:
        out["status"] = "invalid"
        out["error"] = str(exc)
    return out
