"""Fourier-multiplier symbols p(xi) and their analytic-symbol diagnostics.

A symbol carries a real evaluator, an optional holomorphic extension valid on
the sector ``|Im z| <= aperture * (1 + |Re z|)`` and its order ``m``.  The
diagnostics here check the lower bound ``p(xi) + V - 1 >= c <xi>^m`` and the
analytic estimates ``|d^a p(xi)| <= A^(a+1) a! <xi>^(m-a)`` (the latter via
Cauchy integrals on discs of radius proportional to ``<xi>``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import (
    ExtensionUnavailable,
    InvalidDomain,
    SectorViolation,
    SingularPoint,
    SymbolConfigError,
)

ArrayFn = Callable[[np.ndarray], np.ndarray]

# ξ coth ξ switches to its Maclaurin series below this radius.
_COTH_SERIES_RADIUS = 1e-2
_CAUCHY_POINTS = 64


def japanese(xi):
    """<xi> = (1 + |xi|^2)^(1/2)."""
    return np.sqrt(1.0 + np.abs(xi) ** 2)


@dataclass(frozen=True)
class MultiplierSymbol:
    name: str
    order_m: float
    real_fn: ArrayFn
    complex_fn: ArrayFn | None = None
    analytic_constant_A: float | None = None
    sector_aperture: float = 1.0
    singular_fn: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def eval_real(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.real_fn(xi)

    __call__ = eval_real

    def in_sector(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        bound = self.sector_aperture * (1.0 + np.abs(zeta.real))
        return np.abs(zeta.imag) <= bound * (1.0 + 1e-12)

    def eval_complex(self, zeta):
        """Holomorphic extension of the symbol, restricted to its declared sector."""
        if self.complex_fn is None:
            raise ExtensionUnavailable(f"symbol {self.name!r} has no complex evaluator")
        zeta = np.asarray(zeta, dtype=complex)
        if self.singular_fn is not None and np.any(self.singular_fn(zeta)):
            raise SingularPoint(f"{self.name}: evaluation point hits a singularity")
        if not np.all(self.in_sector(zeta)):
            raise SectorViolation(
                f"{self.name}: point outside |Im z| <= {self.sector_aperture}(1+|Re z|)"
            )
        return self.complex_fn(zeta)

    def to_config(self) -> dict:
        return {"symbol": self.name, **self.params}


def eval_complex(sym: MultiplierSymbol, zeta):
    return sym.eval_complex(zeta)


# --- built-in symbols -------------------------------------------------------


def _xi_coth_xi(z):
    z = np.asarray(z)
    small = np.abs(z) < _COTH_SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    out = safe / np.tanh(safe)
    z2 = z * z
    series = 1.0 + z2 * (1.0 / 3.0 + z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 - z2 / 4725.0)))
    return np.where(small, series, out)


def _coth_poles(z):
    # poles of coth at i*pi*k, k != 0; i*0 is removable for ξ coth ξ
    k = np.round(z.imag / np.pi)
    near = np.abs(z - 1j * np.pi * k) < 1e-12
    return near & (k != 0)


def polynomial_symbol(coeffs, name: str = "poly") -> MultiplierSymbol:
    """Real symbol p(xi) = sum_j a_j (i xi)^j; rejected unless real-valued on R."""
    a = np.array([complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in coeffs])
    if a.size == 0:
        raise SymbolConfigError("poly symbol needs at least one coefficient")
    b = a * (1j ** np.arange(a.size))
    scale = max(np.abs(b).max(), 1e-300)
    if np.any(np.abs(b.imag) > 1e-14 * scale):
        raise SymbolConfigError("poly symbol is not real-valued on the real axis")
    b = b.real.copy()
    nz = np.nonzero(np.abs(b) > 0)[0]
    degree = int(nz[-1]) if nz.size else 0
    b = b[: degree + 1]
    rev = b[::-1]

    def real_fn(xi):
        return np.polyval(rev, xi)

    def complex_fn(z):
        return np.polyval(rev.astype(complex), z)

    params = {"coeffs": list(coeffs)} if name == "poly" else {}
    return MultiplierSymbol(
        name=name,
        order_m=float(degree),
        real_fn=real_fn,
        complex_fn=complex_fn,
        sector_aperture=1.0,
        params=params,
    )


def xi_squared() -> MultiplierSymbol:
    return polynomial_symbol([0.0, 0.0, -1.0], name="xi_squared")


def xi_fourth() -> MultiplierSymbol:
    return polynomial_symbol([0.0, 0.0, 0.0, 0.0, 1.0], name="xi_fourth")


def ilw(lam: float = 0.0) -> MultiplierSymbol:
    """Intermediate-long-wave symbol xi coth(xi) + lambda (order 1)."""
    if lam <= -1.0:
        raise SymbolConfigError("ilw symbol needs lambda > -1")

    def real_fn(xi):
        return _xi_coth_xi(xi).real + lam

    def complex_fn(z):
        return _xi_coth_xi(z) + lam

    return MultiplierSymbol(
        name="ilw",
        order_m=1.0,
        real_fn=real_fn,
        complex_fn=complex_fn,
        # below pi so the sector never reaches the coth poles on the imaginary axis
        sector_aperture=1.0,
        singular_fn=_coth_poles,
        params={"lambda": lam},
    )


def constant_symbol(value: float = 1.0) -> MultiplierSymbol:
    return polynomial_symbol([value], name="poly")


_REGISTRY: dict[str, Callable[..., MultiplierSymbol]] = {
    "xi_squared": lambda: xi_squared(),
    "xi_fourth": lambda: xi_fourth(),
    "ilw": lambda **kw: ilw(kw.get("lambda", 0.0)),
    "poly": lambda **kw: polynomial_symbol(kw["coeffs"]),
}

_ALLOWED_KEYS = {"xi_squared": set(), "xi_fourth": set(), "ilw": {"lambda"}, "poly": {"coeffs"}}


def symbol_from_config(cfg: dict[str, Any]) -> MultiplierSymbol:
    """Build a symbol from ``{"symbol": name, **params}``; unknown names or keys are rejected."""
    cfg = dict(cfg)
    name = cfg.pop("symbol", None)
    if name not in _REGISTRY:
        raise SymbolConfigError(f"unknown symbol {name!r}; known: {sorted(_REGISTRY)}")
    extra = set(cfg) - _ALLOWED_KEYS[name]
    if extra:
        raise SymbolConfigError(f"unexpected keys for symbol {name!r}: {sorted(extra)}")
    if name == "poly" and "coeffs" not in cfg:
        raise SymbolConfigError("poly symbol requires 'coeffs'")
    return _REGISTRY[name](**cfg)


def builtin_symbols() -> list[MultiplierSymbol]:
    return [xi_squared(), xi_fourth(), ilw(0.0), ilw(0.5), polynomial_symbol([1.0, 0.0, -1.0])]


# --- diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class EllipticityReport:
    is_elliptic: bool
    c_lower: float
    witness_xi: float
    samples: int


@dataclass(frozen=True)
class AnalyticityCheck:
    max_alpha_tested: int
    fitted_A: float
    violations: list = field(default_factory=list)  # (alpha, xi, ratio)


def check_g_ellipticity(
    sym: MultiplierSymbol, V: float, xi_max: float, n_samples: int = 4096
) -> EllipticityReport:
    """Minimal ratio (p(xi) + V - 1) / <xi>^m over a window plus a geometric tail."""
    if not xi_max > 0:
        raise InvalidDomain("xi_max must be positive")
    n_samples = max(int(n_samples), 64)
    inner = np.linspace(-xi_max, xi_max, n_samples)
    tail = np.geomspace(xi_max, 1e4 * max(1.0, xi_max), n_samples // 2)
    xi = np.unique(np.concatenate([inner, [0.0], tail, -tail]))
    ratio = (sym.eval_real(xi) + V - 1.0) / japanese(xi) ** sym.order_m
    j = int(np.argmin(ratio))
    c = float(ratio[j])
    return EllipticityReport(is_elliptic=c > 0.0, c_lower=c, witness_xi=float(xi[j]), samples=xi.size)


def cauchy_derivatives(sym: MultiplierSymbol, xi: float, alpha_max: int, n_points: int = _CAUCHY_POINTS):
    """Derivatives d^a p(xi), a = 0..alpha_max, from the trapezoid rule on a circle."""
    eps = sym.sector_aperture
    r = eps * float(japanese(xi)) / (2.0 * (1.0 + eps))
    phi = 2.0 * np.pi * np.arange(n_points) / n_points
    with np.errstate(all="ignore"):
        vals = sym.eval_complex(xi + r * np.exp(1j * phi))
        out = np.empty(alpha_max + 1, dtype=complex)
        for a in range(alpha_max + 1):
            out[a] = math.factorial(a) / r**a * np.mean(vals * np.exp(-1j * a * phi))
    return out


def check_analytic_estimates(
    sym: MultiplierSymbol, alpha_max: int, xi_samples, A_cap: float = 1e3
) -> AnalyticityCheck:
    """Fit the smallest A with |d^a p| <= A^(a+1) a! <xi>^(m-a) on the samples."""
    if sym.complex_fn is None:
        raise ExtensionUnavailable(f"symbol {sym.name!r} has no complex evaluator")
    xi_samples = list(xi_samples)
    if not xi_samples:
        raise InvalidDomain("xi_samples must be non-empty")
    if alpha_max > 12:
        raise InvalidDomain("alpha_max above 12 exceeds the Cauchy-integral noise budget")
    worst = 0.0
    violations = []
    for xi in xi_samples:
        d = cauchy_derivatives(sym, float(xi), alpha_max)
        w = float(japanese(xi))
        for a in range(alpha_max + 1):
            mag = abs(d[a])
            denom = math.factorial(a) * w ** (sym.order_m - a)
            if not np.isfinite(mag):
                violations.append((a, float(xi), math.inf))
                continue
            need = (mag / denom) ** (1.0 / (a + 1))
            if need > A_cap:
                violations.append((a, float(xi), mag / (A_cap ** (a + 1) * denom)))
            else:
                worst = max(worst, need)
    fitted = A_cap if violations else max(worst, np.finfo(float).tiny)
    return AnalyticityCheck(max_alpha_tested=alpha_max, fitted_A=float(fitted), violations=violations)
