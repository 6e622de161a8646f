"""Exact solitary-wave profiles with their singularity lattices.

Each :class:`ClosedFormSolution` knows the equation it solves, its exact
exponential decay rate and the lattice of complex singularities that fixes
its strip width; the solver and the analyticity diagnostics are validated
against these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CriticalAngle, InvalidSpeed, UnknownCase
from .solver import (
    SolitaryWaveProblem,
    make_ground_state_problem,
    make_gkdv_problem,
    make_sharpness_problem,
)
from .spectral import Grid1D, SpectralField

REFERENCE_GRID = Grid1D(40 * math.pi, 4096)


@dataclass(frozen=True)
class PoleLattice:
    """Singularities ``base + k * step`` for integer k."""

    base: complex
    step: complex
    multiplicity: int  # 0 for branch points
    kind: str = "pole"  # "pole" or "branch_point"

    def points(self, k_min: int = -3, k_max: int = 3) -> np.ndarray:
        k = np.arange(k_min, k_max + 1)
        return self.base + k * self.step

    def first_ring(self) -> np.ndarray:
        """The two singularities nearest the origin (k = 0 and k = -1)."""
        return self.points(-1, 0)

    def sector_ratio(self, k_min: int = -200, k_max: int = 200) -> np.ndarray:
        z = self.points(k_min, k_max)
        return np.abs(z.imag) / (1.0 + np.abs(z.real))


@dataclass(frozen=True)
class ClosedFormSolution:
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    evaluate_complex: Callable[[np.ndarray], np.ndarray]
    pole_lattice: PoleLattice
    problem_factory: Callable[[Grid1D], SolitaryWaveProblem]
    decay_rate_exact: float
    strip_width_exact: float
    amplitude: float
    # acceptance distance between detected and exact first-ring poles
    pole_tolerance: float = 1e-3

    def problem(self, grid: Grid1D = REFERENCE_GRID) -> SolitaryWaveProblem:
        return self.problem_factory(grid)

    def sample(self, grid: Grid1D = REFERENCE_GRID) -> SpectralField:
        return SpectralField(grid, values=self.evaluate(grid.x))


def _sech_pow(w, power):
    """sech(w)^power, overflow-free for real and complex w (principal branch)."""
    w = np.asarray(w)
    if np.isrealobj(w):
        a = np.abs(w)
        return (2.0 * np.exp(-a) / (1.0 + np.exp(-2.0 * a))) ** power
    w = np.where(w.real < 0, -w, w)
    if float(power).is_integer():
        return (2.0 * np.exp(-w) / (1.0 + np.exp(-2.0 * w))) ** int(power)
    # fractional powers take the principal branch of cosh^(-power)
    big = w.real > 300.0
    out = np.cosh(np.where(big, 0.0, w)) ** (-power)
    return np.where(big, 0.0, out)


def gkdv_soliton(l: int, V: float) -> ClosedFormSolution:
    """u(x) = A sech^{2/l}(sqrt(V-1) l x / 2), A = ((l+1)(l+2)(V-1)/2)^{1/l}."""
    if not V > 1.0:
        raise InvalidSpeed(f"gKdV solitons need V > 1, got {V}")
    if l < 1:
        raise ValueError("l must be a positive integer")
    amp = ((l + 1) * (l + 2) * (V - 1) / 2.0) ** (1.0 / l)
    kappa = math.sqrt(V - 1) * l / 2.0
    power = 2.0 / l
    meromorphic = float(power).is_integer()
    first = 1j * math.pi / (l * math.sqrt(V - 1))
    lattice = PoleLattice(
        base=first,
        step=2 * first,
        multiplicity=int(power) if meromorphic else 0,
        kind="pole" if meromorphic else "branch_point",
    )
    return ClosedFormSolution(
        name=f"gkdv_l{l}_V{V:g}",
        evaluate=lambda x: amp * _sech_pow(kappa * np.asarray(x, dtype=float), power),
        evaluate_complex=lambda z: amp * _sech_pow(kappa * np.asarray(z, dtype=complex), power),
        pole_lattice=lattice,
        problem_factory=lambda grid: make_gkdv_problem(l, V, grid),
        decay_rate_exact=math.sqrt(V - 1),
        strip_width_exact=abs(first.imag),
        amplitude=amp,
    )


def sharpness_solution(theta: float) -> ClosedFormSolution:
    """u(x) = 3 sech^2(e^{-i theta} x / 2), poles on the ray e^{i(theta + pi/2)}."""
    if not -math.pi < theta <= math.pi:
        raise ValueError("theta must lie in (-pi, pi]")
    if abs(abs(theta) - math.pi / 2) < 1e-12:
        raise CriticalAngle("|theta| = pi/2 is excluded")
    rot = np.exp(-1j * theta) / 2.0
    ray = np.exp(1j * (theta + math.pi / 2))

    def f(z):
        return 3.0 * _sech_pow(rot * np.asarray(z, dtype=complex), 2)

    return ClosedFormSolution(
        name=f"sharpness_theta_{theta:.6g}",
        evaluate=f,
        evaluate_complex=f,
        pole_lattice=PoleLattice(base=complex(math.pi * ray), step=complex(2 * math.pi * ray), multiplicity=2),
        problem_factory=lambda grid: make_sharpness_problem(theta, grid),
        decay_rate_exact=abs(math.cos(theta)),
        strip_width_exact=math.pi * abs(math.cos(theta)),
        amplitude=3.0,
        pole_tolerance=1e-2,
    )


def nls_ground_state() -> ClosedFormSolution:
    """u(x) = sqrt(2) sech(x), solving -u'' + u = |u|^2 u."""
    r2 = math.sqrt(2.0)
    return ClosedFormSolution(
        name="nls_ground_state",
        evaluate=lambda x: r2 * _sech_pow(np.asarray(x, dtype=float), 1),
        evaluate_complex=lambda z: r2 * _sech_pow(np.asarray(z, dtype=complex), 1),
        pole_lattice=PoleLattice(base=0.5j * math.pi, step=1j * math.pi, multiplicity=1),
        problem_factory=lambda grid: make_ground_state_problem(3, grid),
        decay_rate_exact=1.0,
        strip_width_exact=math.pi / 2,
        amplitude=r2,
    )


REGISTRY: dict[str, Callable[[], ClosedFormSolution]] = {
    "gkdv_l1_V2": lambda: gkdv_soliton(1, 2.0),
    "sharpness_theta_pi6": lambda: sharpness_solution(math.pi / 6),
    "nls_ground_state": nls_ground_state,
}


def list_cases() -> list[str]:
    return sorted(REGISTRY)


def get_case(name: str) -> ClosedFormSolution:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise UnknownCase(f"unknown case {name!r}; known: {list_cases()}") from None
