"""Solitary-wave profiles from the fixed-point form u = K(D) F[u].

Three reductions of the travelling/standing-wave equation are supported:

* ``kdv_type``       (p(D) + V - 1) u = F[u]
* ``long_wave_type`` (V p(D) + V - 1) u = F[u]
* ``direct``         (p(D) + V) u = F[u]   (V may be complex; standing waves)

Products in ``F[u]`` are evaluated on a zero-padded grid so that degree-q
monomials do not alias.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import (
    Diverged,
    InvalidSpeed,
    NearCriticalAngle,
    NotElliptic,
    NotHomogeneous,
    SymbolConfigError,
    ZeroCollapse,
)
from .spectral import Grid1D, SpectralField
from .symbols import MultiplierSymbol, symbol_from_config, xi_squared

log = logging.getLogger(__name__)

FAMILIES = ("kdv_type", "long_wave_type", "direct")
_COLLAPSE_NORM = 1e-12


@dataclass(frozen=True)
class Term:
    l: int
    coefficient: complex = 1.0
    modulus_form: bool = False

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise SymbolConfigError(f"nonlinearity degree must be an integer >= 2, got {self.l}")
        if self.modulus_form and self.l % 2 == 0:
            raise SymbolConfigError("|u|^(l-1) u terms need odd l")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    def apply(self, u):
        if self.modulus_form:
            return self.coefficient * np.abs(u) ** (self.l - 1) * u
        return self.coefficient * u**self.l


@dataclass(frozen=True)
class Nonlinearity:
    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise SymbolConfigError("nonlinearity needs at least one term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def monomial(cls, l: int, coefficient: complex = 1.0, modulus_form: bool = False):
        return cls((Term(l, coefficient, modulus_form),))

    @property
    def max_degree(self) -> int:
        return max(t.l for t in self.terms)

    @property
    def degree(self) -> int | None:
        """Common degree q when F(tu) = t^q F(u) for t > 0, else None."""
        degrees = {t.l for t in self.terms}
        return degrees.pop() if len(degrees) == 1 else None

    @property
    def real_coefficients(self) -> bool:
        return all(t.coefficient.imag == 0 for t in self.terms)

    def padding_factor(self) -> int:
        return math.ceil((self.max_degree + 1) / 2)

    def spectrum(self, field_: SpectralField, terms=None) -> np.ndarray:
        """Dealiased spectrum of F[u] on the field's grid."""
        grid = field_.grid
        n = grid.n
        m = self.padding_factor() * n
        uh = field_.spectrum
        half = n // 2
        pad = np.zeros(m, dtype=complex)
        pad[:half] = uh[:half]
        pad[m - half + 1 :] = uh[half + 1 :]
        u = np.fft.ifft(pad) * (m / n)
        real = field_.real and self.real_coefficients
        if real:
            u = u.real
        total = 0
        for t in self.terms if terms is None else terms:
            total = total + t.apply(u)
        fh = np.fft.fft(total) * (n / m)
        out = np.zeros(n, dtype=complex)
        out[:half] = fh[:half]
        out[half + 1 :] = fh[m - half + 1 :]
        return out

    def __call__(self, field_: SpectralField) -> SpectralField:
        real = field_.real and self.real_coefficients
        return field_.with_spectrum(self.spectrum(field_), real=real)

    def to_config(self) -> list:
        return [
            {"l": t.l, "coeff": [t.coefficient.real, t.coefficient.imag], "modulus_form": t.modulus_form}
            for t in self.terms
        ]


@dataclass(frozen=True)
class SolitaryWaveProblem:
    symbol: MultiplierSymbol
    V: complex
    nonlinearity: Nonlinearity
    family: str
    grid: Grid1D

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SymbolConfigError(f"unknown equation family {self.family!r}")
        if self.family != "direct":
            if complex(self.V).imag != 0 or not complex(self.V).real > 1.0:
                raise InvalidSpeed(f"{self.family} solitary waves require a real wave speed V > 1, got {self.V}")
            object.__setattr__(self, "V", float(complex(self.V).real))
        denom = self.linear_symbol()
        if np.iscomplexobj(denom):
            if np.min(np.abs(denom)) < 1e-14:
                raise NotElliptic("linear symbol vanishes on the grid")
        elif np.min(denom) <= 0.0:
            raise NotElliptic("linear symbol is not positive on the grid")

    @property
    def equation_family(self) -> str:
        return self.family

    def linear_symbol(self, k=None) -> np.ndarray:
        k = self.grid.k if k is None else k
        p = self.symbol.eval_real(k)
        V = self.V
        if self.family == "kdv_type":
            return p + V - 1.0
        if self.family == "long_wave_type":
            return V * p + V - 1.0
        if isinstance(V, complex) and V.imag == 0:
            V = V.real
        return p + V

    @property
    def real(self) -> bool:
        return not np.iscomplexobj(self.linear_symbol()) and self.nonlinearity.real_coefficients

    def to_config(self) -> dict:
        V = complex(self.V)
        return {
            "family": self.family,
            "symbol": self.symbol.to_config(),
            "V": V.real if V.imag == 0 else [V.real, V.imag],
            "nonlinearity": self.nonlinearity.to_config(),
            "grid": self.grid.to_config(),
        }


@dataclass
class SolveReport:
    solution: SpectralField
    iterations: int
    final_residual: float
    stabilizer_history: list = field(default_factory=list)
    converged: bool = False
    best_residual: float = math.inf
    residual_history: list = field(default_factory=list)
    method: str = "petviashvili"

    def summary(self) -> dict:
        u = self.solution
        mid = int(np.argmin(np.abs(u.x)))
        return {
            "method": self.method,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "best_residual": self.best_residual,
            "stabilizer_history": list(self.stabilizer_history),
            "amplitude_at_origin": float(abs(u.values[mid])),
            "max_abs": float(np.abs(u.values).max()),
        }


# --- problem construction ---------------------------------------------------


def make_gkdv_problem(l: int, V: float, grid: Grid1D) -> SolitaryWaveProblem:
    """Profile equation of v_t + v_x + v^l v_x + v_xxx = 0: -u'' + (V-1) u = u^(l+1)/(l+1)."""
    if l < 1:
        raise SymbolConfigError("gKdV exponent l must be >= 1")
    if not V > 1.0:
        raise InvalidSpeed(f"gKdV solitary waves require V > 1, got V={V}")
    nl = Nonlinearity.monomial(l + 1, 1.0 / (l + 1))
    return SolitaryWaveProblem(xi_squared(), float(V), nl, "kdv_type", grid)


def make_ground_state_problem(l: int, grid: Grid1D, omega: float = 1.0) -> SolitaryWaveProblem:
    """-u'' + omega u = |u|^(l-1) u, the standing-wave equation (odd l)."""
    return SolitaryWaveProblem(
        xi_squared(), float(omega), Nonlinearity.monomial(l, 1.0, modulus_form=True), "direct", grid
    )


def make_sharpness_problem(theta: float, grid: Grid1D) -> SolitaryWaveProblem:
    """-u'' + e^{-2i theta} u = (e^{-2i theta} / 2) u^2."""
    rot = cmath.exp(-2j * theta)
    return SolitaryWaveProblem(xi_squared(), rot, Nonlinearity.monomial(2, rot / 2), "direct", grid)


def problem_from_config(cfg: dict) -> SolitaryWaveProblem:
    grid = Grid1D(cfg["grid"]["L"], cfg["grid"]["N"])
    terms = []
    for t in cfg["nonlinearity"]:
        c = t.get("coeff", [1.0, 0.0])
        coeff = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        terms.append(Term(int(t["l"]), coeff, bool(t.get("modulus_form", False))))
    V = cfg["V"]
    V = complex(V[0], V[1]) if isinstance(V, (list, tuple)) else float(V)
    return SolitaryWaveProblem(symbol_from_config(cfg["symbol"]), V, Nonlinearity(tuple(terms)), cfg["family"], grid)


def default_guess(prob: SolitaryWaveProblem, amplitude=None, width=None, phase: float = 0.0) -> SpectralField:
    """Gaussian whose width is the linear dispersion length and whose height balances L u ~ F[u]."""
    shift = float(np.min(np.abs(prob.linear_symbol())))
    m = max(prob.symbol.order_m, 1.0)
    if width is None:
        width = shift ** (-1.0 / m)
    if amplitude is None:
        t = max(prob.nonlinearity.terms, key=lambda t: abs(t.coefficient))
        amplitude = (shift / abs(t.coefficient)) ** (1.0 / (t.l - 1))
    g = amplitude * np.exp(-((prob.grid.x / width) ** 2))
    if phase:
        return SpectralField(prob.grid, values=g * np.exp(1j * phase))
    return SpectralField(prob.grid, values=g)


# --- residual and iterations ------------------------------------------------


def _residual_spectrum(prob: SolitaryWaveProblem, u: SpectralField, Fh=None):
    if Fh is None:
        Fh = prob.nonlinearity.spectrum(u)
    return prob.linear_symbol() * u.spectrum - Fh


def residual(prob: SolitaryWaveProblem, u: SpectralField, s: float = 0.0) -> float:
    """||L u - F[u]||_{H^s} for the problem's linear symbol L."""
    if u.grid != prob.grid:
        raise spectral.GridMismatch("field grid differs from problem grid")
    return spectral.hs_norm_spectrum(u.grid, _residual_spectrum(prob, u), s)


def _field(prob, uh, real):
    return SpectralField(prob.grid, spectrum=uh, real=real)


def _record(m):
    m = complex(m)
    return m.real if abs(m.imag) <= 1e-14 * abs(m) else abs(m)


def _iterate(prob, guess, tol, max_iter, s, step, method):
    Lh = prob.linear_symbol()
    real = guess.real and prob.real
    uh = np.asarray(guess.spectrum, dtype=complex)
    factors, history = [], []
    best, best_uh = math.inf, uh
    # an iterate that shrank a millionfold has fallen onto the trivial solution
    collapse = max(_COLLAPSE_NORM, 1e-6 * spectral.l2_norm(guess))
    it = 0
    while True:
        u = _field(prob, uh, real)
        if spectral.l2_norm(u) < collapse:
            raise ZeroCollapse(
                f"{method}: iterate collapsed to the trivial solution",
                SolveReport(u, it, 0.0, factors, False, best, history, method),
            )
        Fh = prob.nonlinearity.spectrum(u)
        res = spectral.hs_norm_spectrum(prob.grid, Lh * uh - Fh, s)
        history.append(res)
        if res < best:
            best, best_uh = res, uh
        if res <= tol:
            return SolveReport(u, it, res, factors, True, best, history, method)
        if res > 10.0 * best or not np.isfinite(res):
            raise Diverged(
                f"{method}: residual {res:.3g} grew past 10x its minimum {best:.3g}",
                SolveReport(_field(prob, best_uh, real), it, res, factors, False, best, history, method),
            )
        if it >= max_iter:
            log.info("%s stopped at max_iter=%d with residual %.3g", method, max_iter, res)
            return SolveReport(_field(prob, best_uh, real), it, best, factors, False, best, history, method)
        uh, factor = step(uh, Fh, Lh)
        factors.append(_record(factor))
        it += 1


def petviashvili_solve(
    prob: SolitaryWaveProblem,
    guess: SpectralField | None = None,
    tol: float = 1e-10,
    max_iter: int = 500,
    s: float = 0.0,
) -> SolveReport:
    """Petviashvili iteration u <- M^(q/(q-1)) K F[u], M = <L u, u> / <F[u], u>."""
    q = prob.nonlinearity.degree
    if q is None:
        raise NotHomogeneous("Petviashvili needs a nonlinearity of a single degree; use damped Picard")
    if guess is None:
        guess = default_guess(prob)
    expo = q / (q - 1.0)

    def step(uh, Fh, Lh):
        num = np.sum(Lh * np.abs(uh) ** 2)
        den = np.sum(Fh * np.conj(uh))
        if den == 0:
            raise ZeroCollapse("Petviashvili: <F[u], u> vanished")
        m = num / den
        if prob.real and guess.real:
            m = m.real
            return (m**expo) * Fh / Lh, m
        return (complex(m) ** expo) * Fh / Lh, m

    return _iterate(prob, guess, tol, max_iter, s, step, "petviashvili")


def nehari_scale(prob: SolitaryWaveProblem, uh: np.ndarray, real: bool) -> float:
    """Positive t closest to 1 with <L tu, tu> = <F[tu], tu> (1.0 if none exists)."""
    a = float(np.sum(prob.linear_symbol() * np.abs(uh) ** 2).real)
    u = _field(prob, uh, real)
    by_degree: dict[int, float] = {}
    for t in prob.nonlinearity.terms:
        fh = prob.nonlinearity.spectrum(u, terms=(t,))
        by_degree[t.l] = by_degree.get(t.l, 0.0) + float(np.sum(fh * np.conj(uh)).real)
    top = max(by_degree)
    poly = np.zeros(top)  # coefficients of t^(l-1), highest first
    for l, b in by_degree.items():
        poly[top - l] += b
    poly[-1] -= a
    roots = np.roots(poly)
    cand = [r.real for r in roots if abs(r.imag) < 1e-10 * max(1.0, abs(r)) and r.real > 0]
    if not cand:
        return 1.0
    return min(cand, key=lambda r: abs(r - 1.0))


def damped_picard_solve(
    prob: SolitaryWaveProblem,
    guess: SpectralField | None = None,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 2000,
    s: float = 0.0,
    renormalize: bool = True,
) -> SolveReport:
    """u <- (1 - d) u + d K F[u], optionally rescaled onto <L u, u> = <F[u], u>.

    Plain Picard is unstable along the amplitude direction of a ground state;
    the rescaling removes that mode and leaves fixed points unchanged.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if guess is None:
        guess = default_guess(prob)
    real = guess.real and prob.real

    def step(uh, Fh, Lh):
        new = (1.0 - damping) * uh + damping * Fh / Lh
        t = nehari_scale(prob, new, real) if renormalize else 1.0
        return t * new, t

    return _iterate(prob, guess, tol, max_iter, s, step, "picard")


def solve(prob, guess=None, method="petviashvili", tol=1e-10, max_iter=500, damping=0.5, s=0.0):
    """Dispatch to Petviashvili, falling back to damped Picard for non-homogeneous F."""
    if method == "petviashvili":
        try:
            return petviashvili_solve(prob, guess, tol=tol, max_iter=max_iter, s=s)
        except NotHomogeneous:
            log.warning("nonlinearity is not homogeneous; falling back to damped Picard")
    elif method != "picard":
        raise SymbolConfigError(f"unknown solver method {method!r}")
    return damped_picard_solve(prob, guess, damping=damping, tol=tol, max_iter=max_iter, s=s)


def verify_sharpness_example(theta: float, grid: Grid1D) -> float:
    """Max pointwise residual of -u'' + e^{-2i theta} u - (e^{-2i theta}/2) u^2 for u = 3 sech^2(e^{-i theta} x / 2)."""
    if not -math.pi < theta <= math.pi:
        raise ValueError("theta must lie in (-pi, pi]")
    if abs(abs(theta) - math.pi / 2) < 1e-3:
        raise NearCriticalAngle("|theta| = pi/2: the rotated profile no longer decays")
    w = np.exp(-1j * theta) * grid.x / 2
    u = SpectralField(grid, values=3.0 / np.cosh(w) ** 2)
    upp = spectral.differentiate(u, 2).values
    rot = np.exp(-2j * theta)
    r = -upp + rot * u.values - rot / 2 * u.values**2
    return float(np.abs(r).max())
