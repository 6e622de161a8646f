"""Periodic pseudospectral discretisation of the real line.

The line is truncated to ``[-L, L)`` with ``n`` equispaced points,
``x_j = -L + j dx``.  Spectra are unnormalised DFTs (``numpy.fft.fft``) so that
``u_j = (1/n) sum_m uhat_m exp(i k_m (x_j + L))`` and the trapezoid
quadrature gives ``||u||^2 = dx sum |u_j|^2 = (2L / n^2) sum |uhat_m|^2``.

High-order derivatives amplify roundoff like ``k^alpha``.  Every derivative
therefore works on a *cleaned* spectrum (modes below ``16 eps max|uhat|`` set to
zero) and carries a pointwise noise-floor estimate
``eps * k_eff^alpha * max|u|`` where ``k_eff`` is the largest resolved
wavenumber.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GridMismatch, InvalidDomain, NotElliptic, TruncationError
from .symbols import MultiplierSymbol, japanese

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
CLEAN_THRESHOLD = 16 * EPS
# safety factor on the eps * k^alpha * max|u| noise model
NOISE_SAFETY = 10.0
# a derivative whose noise exceeds this fraction of its own norm is flagged
PRECISION_BUDGET = 1e-6
_BOUNDARY_BAND = 0.95
_BINARY_MAGIC = "sectorwave-field"


@dataclass(frozen=True)
class Grid1D:
    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidDomain("half length L must be positive")
        n = int(self.n)
        if n < 2 or n & (n - 1):
            raise InvalidDomain("n_points must be a power of two")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def half_length_L(self) -> float:
        return self.L

    @property
    def n_points(self) -> int:
        return self.n

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L + self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers pi j / L in FFT order (the Nyquist mode sits at index n/2, negative)."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n) * (np.pi / self.L)
        k.setflags(write=False)
        return k

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.k

    @property
    def k_max(self) -> float:
        return np.pi * self.n / (2.0 * self.L)

    def to_config(self) -> dict:
        return {"L": self.L, "N": self.n}


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class SpectralField:
    """Samples of a function on a :class:`Grid1D` with a lazily synchronised spectrum.

    Fields are immutable; every operation returns a new field.  ``real`` records
    whether the represented function is real valued, ``noise_floor`` is the
    pointwise absolute roundoff estimate and ``warnings`` collects precision
    notices (e.g. ``"NoiseFloor"``) attached by the operations that produced it.
    """

    def __init__(self, grid: Grid1D, values=None, spectrum=None, real=None, noise_floor=0.0, warnings=()):
        if (values is None) == (spectrum is None):
            raise ValueError("give exactly one of values or spectrum")
        self.grid = grid
        self._values = None if values is None else _readonly(values)
        self._spectrum = None if spectrum is None else _readonly(np.asarray(spectrum, dtype=complex))
        for arr in (self._values, self._spectrum):
            if arr is not None and arr.shape != (grid.n,):
                raise GridMismatch(f"expected {grid.n} samples, got {arr.shape}")
        if real is None:
            real = values is not None and not np.iscomplexobj(self._values)
        self.real = bool(real)
        if self.real and self._values is not None and np.iscomplexobj(self._values):
            self._values = _readonly(self._values.real)
        self.noise_floor = float(noise_floor)
        self.warnings = tuple(warnings)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "SpectralField":
        return cls(grid, values=fn(grid.x))

    @property
    def dirty_flags(self) -> dict:
        return {"values": self._values is not None, "spectrum": self._spectrum is not None}

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = np.fft.ifft(self._spectrum)
            self._values = _readonly(v.real if self.real else v)
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = _readonly(np.fft.fft(self.values))
        return self._spectrum

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_values(self, values, **kw) -> "SpectralField":
        kw.setdefault("real", self.real and not np.iscomplexobj(values))
        return SpectralField(self.grid, values=values, **kw)

    def with_spectrum(self, spectrum, **kw) -> "SpectralField":
        kw.setdefault("real", self.real)
        return SpectralField(self.grid, spectrum=spectrum, **kw)

    def __repr__(self):
        return f"SpectralField(L={self.grid.L}, n={self.grid.n}, real={self.real})"


# --- norms and inner products ---------------------------------------------


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(np.abs(f.values) ** 2)))


def spectral_l2_norm(f: SpectralField) -> float:
    """The L2 norm computed on the Fourier side (Parseval partner of :func:`l2_norm`)."""
    n = f.grid.n
    return float(np.sqrt(2.0 * f.grid.L / n**2 * np.sum(np.abs(f.spectrum) ** 2)))


def hs_norm_spectrum(grid: Grid1D, spectrum, s: float) -> float:
    w = japanese(grid.k) ** (2.0 * s)
    return float(np.sqrt(2.0 * grid.L / grid.n**2 * np.sum(w * np.abs(spectrum) ** 2)))


def hs_norm(f: SpectralField, s: float = 0.0) -> float:
    return hs_norm_spectrum(f.grid, f.spectrum, s)


def inner(f: SpectralField, g: SpectralField) -> complex:
    """<f, g> = integral f conj(g) dx (trapezoid)."""
    return complex(f.grid.dx * np.sum(f.values * np.conj(g.values)))


def weighted_l2_norm(f: SpectralField, sigma: float) -> float:
    """||<x>^sigma f||_L2, the weighted-decay diagnostic."""
    return float(np.sqrt(f.grid.dx * np.sum(japanese(f.x) ** (2 * sigma) * np.abs(f.values) ** 2)))


# --- spectral cleaning and noise model --------------------------------------


def cleaned_spectrum(f: SpectralField, rel_threshold: float = CLEAN_THRESHOLD):
    """Spectrum with roundoff-level modes zeroed, and the largest retained |k|."""
    uh = f.spectrum
    peak = np.abs(uh).max()
    if peak == 0.0:
        return np.zeros_like(uh), 0.0
    keep = np.abs(uh) > rel_threshold * peak
    k_eff = float(np.abs(f.grid.k[keep]).max())
    return np.where(keep, uh, 0.0), k_eff


def noise_floor(f: SpectralField, alpha: int, k_eff: float | None = None) -> float:
    if k_eff is None:
        _, k_eff = cleaned_spectrum(f)
    amp = float(np.abs(f.values).max()) if f.grid.n else 0.0
    return NOISE_SAFETY * EPS * max(1.0, k_eff) ** alpha * amp + f.noise_floor * max(1.0, k_eff) ** alpha


def _ik_power(grid: Grid1D, alpha: int) -> np.ndarray:
    mult = (1j * grid.k) ** alpha
    if alpha % 2 == 1:
        mult[grid.n // 2] = 0.0
    return mult


def differentiate(f: SpectralField, alpha: int) -> SpectralField:
    """alpha-th derivative by multiplying the spectrum with (ik)^alpha."""
    if alpha < 0:
        raise ValueError("derivative order must be non-negative")
    if alpha == 0:
        return f
    uh, k_eff = cleaned_spectrum(f)
    eta = noise_floor(f, alpha, k_eff)
    out = f.with_spectrum(uh * _ik_power(f.grid, alpha), noise_floor=eta)
    warns = list(f.warnings)
    size = l2_norm(out)
    if eta * math.sqrt(2 * f.grid.L) > PRECISION_BUDGET * max(size, EPS):
        warns.append(f"NoiseFloor: d^{alpha} noise {eta:.3g} vs norm {size:.3g}")
        log.debug("noise floor reached at derivative order %d", alpha)
    out.warnings = tuple(warns)
    return out


def apply_multiplier(f: SpectralField, sym: MultiplierSymbol) -> SpectralField:
    mult = sym.eval_real(f.grid.k)
    return f.with_spectrum(f.spectrum * mult)


def divide_by_symbol(f: SpectralField, denom: np.ndarray) -> SpectralField:
    denom = np.asarray(denom)
    if np.any(np.abs(denom) < 1e-14):
        raise NotElliptic("inverse kernel denominator vanishes on the grid")
    real = f.real and not np.iscomplexobj(denom)
    return f.with_spectrum(f.spectrum / denom, real=real)


def apply_inverse_kernel(f: SpectralField, sym: MultiplierSymbol, V: float) -> SpectralField:
    """Multiply the spectrum by K(k) = 1 / (p(k) + V - 1)."""
    return divide_by_symbol(f, sym.eval_real(f.grid.k) + V - 1.0)


def translate(f: SpectralField, shift: float) -> SpectralField:
    """u(x) -> u(x - shift); exact grid roll when shift is a multiple of dx."""
    steps = shift / f.grid.dx
    if abs(steps - round(steps)) < 1e-12:
        return f.with_values(np.roll(f.values, int(round(steps))))
    return f.with_spectrum(f.spectrum * np.exp(-1j * f.grid.k * shift))


def reflect(f: SpectralField) -> SpectralField:
    """u(x) -> u(-x) on the grid (index j -> n - j)."""
    return f.with_values(np.roll(f.values[::-1], 1))


def point_derivatives(f: SpectralField, x0: float, n_max: int, rel_threshold: float = CLEAN_THRESHOLD):
    """Taylor coefficients u^(n)(x0) / n!, n = 0..n_max, by trigonometric interpolation."""
    uh, _ = cleaned_spectrum(f, rel_threshold)
    grid = f.grid
    phase = np.exp(1j * grid.k * (x0 + grid.L))
    nyq = grid.n // 2
    # the Nyquist mode interpolates as a cosine
    phase[nyq] = np.cos(grid.k[nyq] * (x0 + grid.L))
    coeffs = np.empty(n_max + 1, dtype=complex)
    ik = 1j * grid.k
    term = uh * phase / grid.n
    for n in range(n_max + 1):
        t = term.copy()
        if n % 2 == 1:
            t[nyq] = 0.0
        coeffs[n] = np.sum(t) / math.factorial(n)
        term = term * ik
    if f.real:
        coeffs = coeffs.real.astype(complex)
    return coeffs


# --- weighted Sobolev norms -------------------------------------------------


def _weighted_norm(f: SpectralField, alpha: int, beta: int, s: float, check_boundary: bool = True):
    """Value and noise bound of ||x^beta d^alpha f||_{H^s}."""
    grid = f.grid
    g = differentiate(f, alpha)
    vals = np.asarray(g.values)
    eta = noise_floor(f, alpha) if alpha else noise_floor(f, 0, k_eff=1.0)
    if beta > 0:
        kept = np.abs(vals) >= eta
        vals = np.where(kept, vals, 0.0)
        h = grid.x**beta * vals
        if check_boundary:
            peak = np.abs(h).max()
            edge = np.abs(grid.x) >= _BOUNDARY_BAND * grid.L
            if peak > 0 and np.abs(h[edge]).max() > 1e-6 * peak:
                raise TruncationError(
                    f"x^{beta} d^{alpha} f is not negligible at the boundary "
                    f"({np.abs(h[edge]).max():.3g} vs max {peak:.3g})"
                )
        support = float(np.sqrt(grid.dx * np.sum(np.abs(grid.x[kept]) ** (2 * beta))))
    else:
        h = vals
        support = math.sqrt(2 * grid.L)
    value = hs_norm_spectrum(grid, np.fft.fft(h), s)
    _, k_eff = cleaned_spectrum(f)
    noise = eta * support * float(japanese(k_eff)) ** s
    return value, noise, g.warnings


def weighted_sobolev_norm(f: SpectralField, alpha: int, beta: int, s: float) -> float:
    """||x^beta d^alpha f||_{H^s}: spectral derivative, physical weight, <k>^s weight, trapezoid norm.

    Values of ``d^alpha f`` below the derivative noise floor are dropped before
    the polynomial weight is applied, so roundoff in the far tail is not
    amplified by ``x^beta``.  Raises :class:`TruncationError` when the weighted
    function is still visible at the edge of the periodic box.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be non-negative")
    value, _, _ = _weighted_norm(f, alpha, beta, s)
    return value


# --- serialisation ----------------------------------------------------------


def grid_from_x(x) -> Grid1D:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise GridMismatch("need at least two grid points")
    grid = Grid1D(-x[0], n)
    if not np.allclose(x, grid.x, rtol=0, atol=1e-9 * grid.L):
        raise GridMismatch("x column is not the uniform grid -L + j dx")
    return grid


def write_csv(f: SpectralField, path) -> None:
    path = Path(path)
    vals = np.asarray(f.values, dtype=complex)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("x,re_u,im_u\n")
        for xi, v in zip(f.grid.x, vals):
            fh.write(f"{float(xi)!r},{float(v.real)!r},{float(v.imag)!r}\n")


def read_csv(path) -> SpectralField:
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise GridMismatch(f"malformed field CSV {path}: {exc}") from exc
    if data.shape[1] != 3:
        raise GridMismatch(f"{path}: expected columns x, re_u, im_u")
    grid = grid_from_x(data[:, 0])
    im = data[:, 2]
    if np.all(im == 0.0):
        return SpectralField(grid, values=data[:, 1])
    return SpectralField(grid, values=data[:, 1] + 1j * im)


def write_binary(f: SpectralField, path) -> None:
    """JSON header line followed by little-endian float64 (re, im) pairs."""
    header = {"format": _BINARY_MAGIC, "version": 1, "L": f.grid.L, "N": f.grid.n, "real": f.real}
    vals = np.asarray(f.values, dtype=complex)
    payload = np.empty(2 * vals.size, dtype="<f8")
    payload[0::2] = vals.real
    payload[1::2] = vals.imag
    with Path(path).open("wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        fh.write(payload.tobytes())


def read_binary(path) -> SpectralField:
    raw = Path(path).read_bytes()
    head, _, body = raw.partition(b"\n")
    try:
        header = json.loads(head.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GridMismatch(f"{path}: bad header") from exc
    if header.get("format") != _BINARY_MAGIC:
        raise GridMismatch(f"{path}: not a sectorwave field file")
    grid = Grid1D(header["L"], header["N"])
    payload = np.frombuffer(body, dtype="<f8")
    if payload.size != 2 * grid.n:
        raise GridMismatch(f"{path}: payload length does not match N")
    vals = payload[0::2] + 1j * payload[1::2]
    if header.get("real", False):
        return SpectralField(grid, values=vals.real.copy())
    return SpectralField(grid, values=vals)


def read_field(path) -> SpectralField:
    path = Path(path)
    if path.suffix == ".csv":
        return read_csv(path)
    return read_binary(path)
