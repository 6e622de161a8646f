"""Diagnostics for exponential decay and sector analyticity of a profile.

Four independent views of the same property:

* a log-linear fit of the tails, ``|u(x)| ~ C exp(-c|x|)``;
* the exponential decay rate of the spectrum, which equals the width of the
  strip of analyticity around the real axis;
* the ledger of weighted norms ``||x^b d^a u||_{H^s}`` and its generating sums
  ``S_N(eps) = sum_{a+b<=N} eps^(a+b) / max(a,b)! ||x^b d^a u||``;
* robust Pade approximants of the Taylor series, whose poles locate the
  nearest complex singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from . import spectral
from .errors import (
    BelowNoiseFloor,
    IllConditioned,
    Inconclusive,
    InsufficientDynamicRange,
    InvalidDomain,
    NonDecaying,
)
from .spectral import EPS, SpectralField

# --- tail decay ---------------------------------------------------------------

_DECAY_OUTER = 0.9
_MIN_TAIL_POINTS = 8


@dataclass(frozen=True)
class DecayFit:
    c: float
    C: float
    r_squared: float
    window: tuple[float, float]
    n_points: int = 0


def _linfit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def fit_decay(u: SpectralField, window_fraction: float = 0.1, floor: float = 1e-13) -> DecayFit:
    """Fit ``log|u| = log C - c|x|`` on ``window_fraction*L <= |x| <= 0.9 L``.

    Each tail is fitted separately and the slopes averaged.  Samples below
    ``floor`` (or the roundoff level of ``u``) are ignored.  Algebraic decay is
    recognised by a slope that flattens markedly between the inner and outer
    halves of the window and raises :class:`NonDecaying`.
    """
    if not 0.0 < window_fraction <= 0.45:
        raise InvalidDomain("window_fraction must lie in (0, 0.45]")
    grid = u.grid
    x = grid.x
    a = np.abs(np.asarray(u.values))
    peak = float(a.max())
    if peak == 0.0:
        raise BelowNoiseFloor("field is identically zero")
    level = max(floor, 1e3 * EPS * peak)
    ax = np.abs(x)
    usable = (ax >= window_fraction * grid.L) & (ax <= _DECAY_OUTER * grid.L) & (a > level)
    fits = []
    for side in (x < 0, x > 0):
        m = usable & side
        if m.sum() >= _MIN_TAIL_POINTS:
            fits.append((ax[m], np.log(a[m])))
    if not fits:
        raise BelowNoiseFloor(f"fewer than {_MIN_TAIL_POINTS} tail samples above {level:.3g}")
    slopes, intercepts = zip(*(_linfit(t, y) for t, y in fits))
    c = -float(np.mean(slopes))
    logC = float(np.mean(intercepts))
    if not c > 0.0:
        raise NonDecaying(f"tail slope {-c:.3g} is not negative")
    # algebraic tails flatten: compare inner and outer halves of the window
    for t, y in fits:
        if t.size >= 2 * _MIN_TAIL_POINTS:
            mid = np.median(t)
            inner, outer = t <= mid, t > mid
            s_in, _ = _linfit(t[inner], y[inner])
            s_out, _ = _linfit(t[outer], y[outer])
            if s_in < 0 and s_out > 0.5 * s_in:
                raise NonDecaying(
                    f"tail slope flattens from {s_in:.3g} to {s_out:.3g}: decay is slower than exponential"
                )
    t_all = np.concatenate([t for t, _ in fits])
    y_all = np.concatenate([y for _, y in fits])
    resid = y_all - (logC - c * t_all)
    ss_tot = float(np.sum((y_all - y_all.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(
        c=c,
        C=math.exp(logC),
        r_squared=r2,
        window=(float(t_all.min()), float(t_all.max())),
        n_points=int(t_all.size),
    )


# --- spectral strip width ------------------------------------------------------

_STRIP_TOP = 1e-3
_MIN_DECADES = 3.0


@dataclass(frozen=True)
class StripWidth:
    """Decay rate w of ``|uhat(k)| ~ k^gamma exp(-w|k|)``; ``entire`` flags super-exponential decay."""

    width: float
    gamma: float
    entire: bool
    k_range: tuple[float, float]
    per_side: tuple[float, ...] = ()

    def __float__(self) -> float:
        return self.width


def _fit_strip(k, a):
    # -log a = w k - gamma log k + b
    A = np.column_stack([k, -np.log(k), np.ones_like(k)])
    coef, *_ = np.linalg.lstsq(A, -np.log(a), rcond=None)
    return float(coef[0]), float(coef[1])


def strip_width_from_spectrum(u: SpectralField) -> StripWidth:
    """Exponential decay rate of the spectrum, fitted above the roundoff plateau.

    The fit uses modes between ``1e-3 max|uhat|`` and the noise floor, on each
    half-line of wavenumbers, and reports the smaller rate.  Fewer than three
    decades of usable spectrum raise :class:`InsufficientDynamicRange`.
    """
    grid = u.grid
    uh = np.abs(np.asarray(u.spectrum))
    peak = float(uh.max())
    if peak == 0.0:
        raise InsufficientDynamicRange("field is identically zero")
    bottom = 1e3 * EPS * peak
    k = grid.k
    nyq = grid.n // 2
    results = []
    for sign in (1.0, -1.0):
        side = np.nonzero((sign * k > 0) & (np.arange(grid.n) != nyq))[0]
        side = side[np.argsort(sign * k[side])]
        kk, aa = sign * k[side], uh[side]
        # stop at the first mode that drops into the noise plateau
        low = np.nonzero(aa <= bottom)[0]
        stop = int(low[0]) if low.size else kk.size
        kk, aa = kk[:stop], aa[:stop]
        m = aa <= _STRIP_TOP * peak
        kk, aa = kk[m], aa[m]
        if kk.size < 6 or math.log10(aa.max() / aa.min()) < _MIN_DECADES:
            raise InsufficientDynamicRange(
                "spectrum spans fewer than three decades above the noise floor"
            )
        w, gamma = _fit_strip(kk, aa)
        half = kk.size // 2
        w_lo, _ = _fit_strip(kk[:half], aa[:half]) if half >= 3 else (w, gamma)
        w_hi, _ = _fit_strip(kk[half:], aa[half:]) if kk.size - half >= 3 else (w, gamma)
        entire = w_hi > 1.2 * w_lo + 0.05
        results.append((w, gamma, entire, float(kk.min()), float(kk.max()), w_hi))
    j = int(np.argmin([r[0] for r in results]))
    w, gamma, _, k0, k1, _ = results[j]
    entire = all(r[2] for r in results)
    if entire:
        w = min(r[5] for r in results)
    return StripWidth(
        width=max(w, 0.0),
        gamma=gamma,
        entire=entire,
        k_range=(k0, k1),
        per_side=tuple(r[0] for r in results),
    )


# --- norm ledger ---------------------------------------------------------------

_TRUST_FACTOR = 10.0
DEFAULT_EPSILONS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class LedgerEntry:
    alpha: int
    beta: int
    value: float
    noise: float
    trusted: bool


@dataclass
class NormLedger:
    s: float
    N_max: int
    entries: dict  # (alpha, beta) -> LedgerEntry
    partial_sums: dict = field(default_factory=dict)  # eps -> [S_0 .. S_N]
    truncated: bool = False
    warnings: tuple = ()

    def value(self, alpha: int, beta: int) -> float:
        return self.entries[(alpha, beta)].value

    def ordered_entries(self) -> list[LedgerEntry]:
        return [self.entries[key] for key in sorted(self.entries, key=lambda ab: (ab[0] + ab[1], ab[0]))]

    def bounded(self, eps: float) -> bool:
        return is_bounded(self.partial_sums[eps])


def _generating_sums(entries, N_max: int, eps: float) -> list[float]:
    level = np.zeros(N_max + 1)
    for e in entries.values():
        if e.trusted:
            level[e.alpha + e.beta] += eps ** (e.alpha + e.beta) / math.factorial(max(e.alpha, e.beta)) * e.value
    return [float(v) for v in np.cumsum(level)]


def build_norm_ledger(u: SpectralField, s: float, N_max: int, epsilons=DEFAULT_EPSILONS) -> NormLedger:
    """All ``||x^b d^a u||_{H^s}`` with ``a + b <= N_max`` and their generating sums.

    An entry is trusted when it exceeds ten times its roundoff bound; untrusted
    entries are kept for inspection but left out of the sums, and the ledger is
    then marked ``truncated``.
    """
    if not 0 <= N_max <= 20:
        raise InvalidDomain("N_max must lie in [0, 20]")
    if s < 0:
        raise InvalidDomain("s must be non-negative")
    entries = {}
    warns: list[str] = []
    for total in range(N_max + 1):
        for alpha in range(total + 1):
            beta = total - alpha
            value, noise, w = spectral._weighted_norm(u, alpha, beta, s)
            warns.extend(x for x in w if x not in warns)
            entries[(alpha, beta)] = LedgerEntry(alpha, beta, value, noise, bool(value > _TRUST_FACTOR * noise))
    truncated = not all(e.trusted for e in entries.values())
    sums = {float(eps): _generating_sums(entries, N_max, float(eps)) for eps in epsilons}
    return NormLedger(s=s, N_max=N_max, entries=entries, partial_sums=sums, truncated=truncated, warnings=tuple(warns))


def is_bounded(partial: list[float], window: int = 5) -> bool:
    """Heuristic: the last ``window`` ratios ``S_N / S_{N-1}`` stay below ``1 + 10/N``."""
    n_last = len(partial) - 1
    if n_last < 1:
        return True
    for N in range(max(1, n_last - window + 1), n_last + 1):
        prev = partial[N - 1]
        if prev <= 0:
            continue
        if partial[N] / prev > 1.0 + 10.0 / N:
            return False
    return True


# --- sector estimate -----------------------------------------------------------


@dataclass(frozen=True)
class SectorEstimate:
    A_sect_constant: float
    epsilon: float
    epsilon_star: float
    strip_width: float
    bounded: dict
    truncated: bool = False


def estimate_sector(ledger: NormLedger, u: SpectralField | None = None) -> SectorEstimate:
    """Sector half-aperture from the ledger.

    ``epsilon_star`` is the largest tested eps (in the contiguous run from the
    smallest) whose generating sums stay bounded.  The constant ``C`` bounds
    ``||x^b d^a u|| <= C^(a+b+1) max(a,b)!`` over the trusted entries and gives
    ``epsilon = min(1/(2C), epsilon_star)``.  When every or no eps is bounded
    the test cannot separate and :class:`Inconclusive` is raised with the
    partial estimate attached.
    """
    eps_sorted = sorted(ledger.partial_sums)
    bounded = {eps: is_bounded(ledger.partial_sums[eps]) for eps in eps_sorted}
    star = 0.0
    for eps in eps_sorted:
        if not bounded[eps]:
            break
        star = eps
    C = 1.0
    for e in ledger.entries.values():
        if e.trusted and e.value > 0:
            C = max(C, (e.value / math.factorial(max(e.alpha, e.beta))) ** (1.0 / (e.alpha + e.beta + 1)))
    strip = 0.0
    if u is not None:
        try:
            strip = strip_width_from_spectrum(u).width
        except InsufficientDynamicRange:
            strip = 0.0
    est = SectorEstimate(
        A_sect_constant=C,
        epsilon=min(1.0 / (2.0 * C), star) if star > 0 else 1.0 / (2.0 * C),
        epsilon_star=star,
        strip_width=strip,
        bounded=bounded,
        truncated=ledger.truncated,
    )
    if all(bounded.values()):
        raise Inconclusive("generating sums bounded for every tested eps", annotation="entire", estimate=est)
    if star == 0.0:
        raise Inconclusive("generating sums unbounded for the smallest tested eps", annotation="unbounded", estimate=est)
    return est


# --- Pade poles ------------------------------------------------------------------

_SVD_FLOOR = 1e-12
_COND_LIMIT = 1e13
_FROISSART_RESIDUE = 1e-8
_CLUSTER_RADIUS = 0.05


@dataclass(frozen=True)
class PoleCluster:
    centroid: complex
    multiplicity: int
    diameter: float


@dataclass
class PoleSet:
    poles: list  # complex, sorted by distance from the center
    residue_magnitudes: list
    spurious_rejected: int
    clusters: list = field(default_factory=list)
    center: float = 0.0
    numerator_degree: int = 0
    denominator_degree: int = 0
    tolerance: float = _SVD_FLOOR

    def nearest(self, count: int = 2) -> list:
        return [c.centroid for c in self.clusters[:count]]


def robust_pade(c, m: int, n: int, tol: float):
    """Type (m, n) Pade approximant by SVD with rank reduction.

    Returns numerator ``a``, denominator ``b`` (ascending coefficients,
    ``b[0] = 1``) and the condition number of the final Toeplitz block.
    """
    c = np.asarray(c, dtype=complex)[: m + n + 1]
    ts = tol * np.linalg.norm(c)
    cond = 1.0
    while n > 0:
        col = np.r_[c[0], np.zeros(n)]
        Z = toeplitz(c[: m + n + 1], col)
        C = Z[m + 1 : m + n + 1, :]
        sv = np.linalg.svd(C, compute_uv=False)
        rank = int(np.sum(sv > ts))
        if rank == n:
            cond = float(sv[0] / sv[rank - 1])
            break
        m -= n - rank
        n = rank
    if n == 0:
        return c[: m + 1].copy(), np.array([1.0 + 0j]), 1.0
    _, _, Vh = np.linalg.svd(C)
    b = Vh.conj()[n]
    a = Z[: m + 1, : n + 1] @ b
    # drop denominator coefficients that are pure noise
    b[np.abs(b) < tol * np.abs(b).max()] = 0.0
    a, b = a / b[0], b / b[0]
    return a, b, cond


def _cluster(poles, center: float) -> list[PoleCluster]:
    groups: list[list[complex]] = []
    for p in poles:
        for g in groups:
            if any(abs(p - q) < _CLUSTER_RADIUS * max(abs(p - center), abs(q - center)) for q in g):
                g.append(p)
                break
        else:
            groups.append([p])
    out = []
    for g in groups:
        arr = np.array(g)
        diam = max((abs(a - b) for a in arr for b in arr), default=0.0)
        out.append(PoleCluster(complex(arr.mean()), len(g), float(diam)))
    out.sort(key=lambda cl: (abs(cl.centroid - center), cl.centroid.real, cl.centroid.imag))
    return out


def pade_poles(u: SpectralField, expansion_center: float = 0.0, max_degree: int = 8) -> PoleSet:
    """Poles of a robust diagonal Pade approximant of u's Taylor series at ``expansion_center``.

    Taylor coefficients come from the cleaned spectrum; their noise is gauged
    by recomputing them with a ten times coarser cleaning threshold, and that
    noise level is the SVD cutoff (never below 1e-12).  Poles with negligible
    residue or a numerator zero on top of them (Froissart doublets) are
    discarded.  Split copies of a multiple pole are grouped into clusters.
    """
    if not 1 <= max_degree <= 12:
        raise InvalidDomain("max_degree must lie in [1, 12]")
    L = u.grid.L
    if not -L <= expansion_center < L:
        raise InvalidDomain("expansion center lies outside the grid")
    n_coef = 2 * max_degree
    c = spectral.point_derivatives(u, expansion_center, n_coef)
    c_coarse = spectral.point_derivatives(u, expansion_center, n_coef, 10 * spectral.CLEAN_THRESHOLD)
    noise = np.abs(c - c_coarse)
    # roundoff carried by the sum over modes
    uh = np.abs(np.asarray(u.spectrum)) / u.grid.n
    kabs = np.abs(u.grid.k)
    noise += np.array([EPS * np.sum(uh * kabs**j) / math.factorial(j) for j in range(n_coef + 1)])

    orders = np.arange(n_coef + 1)
    tail = [(abs(c[j]) ** (1.0 / j)) for j in range(max_degree, n_coef + 1) if abs(c[j]) > 0]
    rho = 1.0 / max(tail) if tail and max(tail) > 0 else 1.0
    cs = c * rho**orders
    ns = noise * rho**orders
    tol = float(min(max(_SVD_FLOOR, np.linalg.norm(ns) / np.linalg.norm(cs)), 1e-2))
    a, b, cond = robust_pade(cs, max_degree, max_degree, tol)
    if cond > _COND_LIMIT:
        raise IllConditioned(f"Pade Toeplitz block has condition number {cond:.3g}")
    nb = int(np.max(np.nonzero(b)[0])) if b.size > 1 else 0
    b = b[: nb + 1]
    if nb == 0:
        return PoleSet([], [], 0, [], expansion_center, len(a) - 1, 0, tol)
    w = np.roots(b[::-1])
    db = np.polyder(b[::-1])
    res = np.polyval(a[::-1], w) / np.polyval(db, w)
    na = int(np.max(np.nonzero(np.abs(a) > 0)[0])) if np.any(np.abs(a) > 0) else 0
    zeros = np.roots(a[: na + 1][::-1]) if na > 0 else np.array([])
    scale = float(np.abs(cs).max())
    kept, mags, rejected = [], [], 0
    for wj, rj in zip(w, res):
        r = abs(rj)
        near_zero = zeros.size > 0 and np.min(np.abs(zeros - wj)) < 1e-3 * max(abs(wj), 1.0)
        if r < _FROISSART_RESIDUE * scale or (near_zero and r < 1e-3 * scale):
            rejected += 1
            continue
        kept.append(complex(expansion_center + rho * wj))
        mags.append(float(r * rho))
    order = sorted(range(len(kept)), key=lambda i: (abs(kept[i] - expansion_center), kept[i].real, kept[i].imag))
    poles = [kept[i] for i in order]
    mags = [mags[i] for i in order]
    return PoleSet(
        poles=poles,
        residue_magnitudes=mags,
        spurious_rejected=rejected,
        clusters=_cluster(poles, expansion_center),
        center=expansion_center,
        numerator_degree=len(a) - 1,
        denominator_degree=nb,
        tolerance=tol,
    )


def sector_containment(poles, epsilon: float) -> bool:
    """True iff every pole satisfies ``|Im z| > epsilon (1 + |Re z|)``."""
    if isinstance(poles, PoleSet):
        poles = poles.poles
    z = np.asarray(list(poles), dtype=complex)
    if z.size == 0:
        raise ValueError("pole list is empty")
    return bool(np.all(np.abs(z.imag) > epsilon * (1.0 + np.abs(z.real))))
