"""Fourier multipliers of the prime-progression averages and their approximants.

The weighted average over primes in a progression has multiplier a_hat; the
smooth major-arc approximant attaches to each reduced rational a/q a Gauss
sum, a plain average at the lcm spacing, and a compactly supported cutoff at
scale lcm^2.  This module evaluates all of them pointwise and on dyadic grids
of the torus, and measures the approximation error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expsums import FareyPoint, height
from .tables import ArithTables, Progression, reduced_residues

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Smooth cutoff


_MOLLIFIER_TABLE: tuple[np.ndarray, np.ndarray] | None = None


def _mollifier_tail() -> tuple[np.ndarray, np.ndarray]:
    """Upper-tail mass of the normalized bump exp(1 - 1/(1 - v^2)) on [-1, 1].

    Tabulated once on a dense grid; the integrand is smooth with all
    derivatives vanishing at the endpoints, so the trapezoid sums converge
    faster than any power of the spacing.
    """
    global _MOLLIFIER_TABLE
    if _MOLLIFIER_TABLE is None:
        v = np.linspace(-1.0, 1.0, (1 << 20) + 1)
        rho = np.zeros_like(v)
        inner = np.abs(v) < 1.0
        rho[inner] = np.exp(1.0 - 1.0 / (1.0 - v[inner] ** 2))
        steps = (rho[1:] + rho[:-1]) * (0.5 * (v[1] - v[0]))
        mass = np.concatenate(([0.0], np.cumsum(steps)))
        _MOLLIFIER_TABLE = (v, 1.0 - mass / mass[-1])
    return _MOLLIFIER_TABLE


def _default_evaluator(u) -> np.ndarray:
    # indicator of [-5/32, 5/32] mollified by the bump at half-width 3/32:
    # identically 1 for |u| <= 1/16, identically 0 for |u| >= 1/4, C-infinity
    a = np.abs(np.asarray(u, dtype=np.float64))
    s = np.clip((a - 5.0 / 32.0) / (3.0 / 32.0), -1.0, 1.0)
    grid, tail = _mollifier_tail()
    return np.interp(s, grid, tail)


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth even cutoff: 1 on [-1/16, 1/16], 0 outside (-1/4, 1/4)."""

    name: str = "bump"
    inner: float = 1.0 / 16.0
    outer: float = 1.0 / 4.0
    evaluator: Callable = _default_evaluator

    def __call__(self, u):
        return self.evaluator(u)


DEFAULT_CUTOFF = CutoffSpec()


# ---------------------------------------------------------------------------
# Spectral grid container


@dataclass
class SpectralProfile:
    """Multiplier values sampled on the grid {k/M : 0 <= k < M}."""

    grid_size: int
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def xi(self) -> np.ndarray:
        return np.arange(self.grid_size) / self.grid_size

    def sup(self) -> float:
        return float(np.abs(self.values).max())


# ---------------------------------------------------------------------------
# Plain averages


def geometric_sum(K: int, theta):
    """sum_{n=0}^{K-1} e(-n theta), stable near every integer theta."""
    th = np.asarray(theta, dtype=np.float64)
    tr = th - np.round(th)
    den = np.sin(np.pi * tr)
    small = np.abs(den) < 1e-14
    safe = np.where(small, 1.0, den)
    out = np.exp(-1j * np.pi * (K - 1) * tr) * np.sin(np.pi * K * tr) / safe
    out = np.where(small, complex(K), out)
    return out if th.ndim else complex(out)


def m_hat(theta, length: float):
    """Multiplier of the uniform average: (1/length) sum_{0 <= n < length} e(-n theta).

    length may be a non-integer real; the sum runs over the ceil(length)
    integers below it.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    K = math.ceil(length - 1e-9)
    return geometric_sum(K, theta) / length


def m_prog_hat(theta, N: int, prog: Progression):
    """(y/N) sum over n <= N, n = b mod y, of e(-n theta), n = b + my with m >= 0."""
    y, b = prog.y, prog.b
    if N < y:
        raise ValueError(f"N={N} smaller than spacing y={y}")
    count = (N - b) // y + 1
    theta = np.asarray(theta, dtype=np.float64)
    phase = np.exp(-2j * np.pi * b * theta)
    out = (y / N) * phase * geometric_sum(count, y * theta)
    return out if theta.ndim else complex(out)


# ---------------------------------------------------------------------------
# The prime multiplier


def _weighted_support(N: int, prog: Progression, tables: ArithTables):
    """Indices n < N in the progression with Lambda(n) > 0, and their weights."""
    if N > tables.bound + 1:
        raise ValueError(f"N={N} exceeds table bound {tables.bound}")
    start = prog.b if prog.b >= 1 else prog.y
    n = np.arange(start, N, prog.y, dtype=np.int64)
    w = tables.von_mangoldt[n]
    nz = w > 0
    return n[nz], w[nz]


def a_hat(theta: float, N: int, prog: Progression, tables: ArithTables) -> complex:
    """(phi(y)/N) sum over n < N, n = b mod y, of Lambda(n) e(-n theta)."""
    n, w = _weighted_support(N, prog, tables)
    phi_y = int(tables.totient[prog.y])
    return complex((phi_y / N) * np.sum(w * np.exp(-2j * np.pi * theta * n)))


def a_hat_profile(
    N: int, prog: Progression, M: int, tables: ArithTables
) -> SpectralProfile:
    """a_hat on the full grid {k/M} via a length-M transform of the padded kernel."""
    if M < N:
        raise ValueError(f"grid M={M} smaller than N={N}")
    _guard_grid(M)
    n, w = _weighted_support(N, prog, tables)
    phi_y = int(tables.totient[prog.y])
    kernel = np.zeros(M, dtype=np.float64)
    kernel[n] = (phi_y / N) * w
    values = np.fft.fft(kernel)
    return SpectralProfile(M, values, meta={"N": N, "y": prog.y, "b": prog.b})


def a_hat_uniform_grid(
    N: int,
    prog: Progression,
    theta0: float,
    dtheta: float,
    count: int,
    tables: ArithTables,
    extra_phase: float = 0.0,
) -> np.ndarray:
    """a_hat on the uniform grid theta0 + j*dtheta, j < count.

    extra_phase shifts every evaluation point by a constant (used to center a
    sweep on a rational a/q while keeping the recurrence in the offset).
    Phase-recurrence evaluation: one O(#prime powers) pass per grid point.
    """
    n, w = _weighted_support(N, prog, tables)
    phi_y = int(tables.totient[prog.y])
    z = w * np.exp(-2j * np.pi * (theta0 + extra_phase) * n)
    step = np.exp(-2j * np.pi * dtheta * n)
    out = np.empty(count, dtype=np.complex128)
    for j in range(count):
        out[j] = z.sum()
        z *= step
    return (phi_y / N) * out


# ---------------------------------------------------------------------------
# Farey points and the approximant


def farey_points(
    Qmax: int, prog: Progression, mode: str = "denominator"
) -> list[FareyPoint]:
    """All reduced a/q in [0, 1) passing the filter.

    mode "denominator": q <= Qmax.  mode "height": 1 <= h_y(q) <= Qmax
    (height-0 points are dropped; their Gauss sums vanish).
    """
    if Qmax < 1:
        raise ValueError("Qmax must be >= 1")
    if mode not in ("denominator", "height"):
        raise ValueError(f"unknown mode {mode!r}")
    points = []
    q_ceiling = Qmax if mode == "denominator" else prog.y * Qmax
    for q in range(1, q_ceiling + 1):
        if mode == "height" and not 1 <= height(q, prog.y) <= Qmax:
            continue
        for a in reduced_residues(q):
            points.append(FareyPoint.build(int(a), q, prog))
    return points


def _torus_offset(xi: float, center: float) -> float:
    return (xi - center + 0.5) % 1.0 - 0.5


def l_hat(
    xi: float,
    point: FareyPoint,
    N: int,
    prog: Progression,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
) -> complex:
    """One major-arc term: Upsilon * average at lcm spacing * cutoff at scale lcm^2."""
    if point.y != prog.y or point.b != prog.b:
        raise ValueError("FareyPoint built for a different progression context")
    if point.height == 0:
        return 0j
    ell = point.ell
    d = _torus_offset(xi, point.center)
    if abs(d) >= cutoff.outer / ell**2:
        return 0j
    return complex(point.upsilon * m_hat(ell * d, N / ell) * cutoff(ell * ell * d))


def _l_hat_window(point: FareyPoint, N: int, M: int, cutoff: CutoffSpec):
    """Grid indices inside the support of l_hat at this point, and the values there."""
    ell = point.ell
    radius = cutoff.outer / ell**2
    c = point.center
    k0 = math.floor((c - radius) * M) + 1
    k1 = math.ceil((c + radius) * M) - 1
    k = np.arange(k0, k1 + 1)
    d = k / M - c
    vals = point.upsilon * m_hat(ell * d, N / ell) * cutoff(ell * ell * d)
    return k % M, vals


def approximant_hat(
    xi: float,
    N: int,
    prog: Progression,
    q_cut: int,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
    points: list[FareyPoint] | None = None,
) -> complex:
    """Sum of l_hat over Farey points with q < q_cut (warn when q_cut > N^{1/10})."""
    _warn_qcut(q_cut, N)
    if points is None:
        points = farey_points(q_cut - 1, prog, "denominator") if q_cut > 1 else []
    total = 0j
    for p in points:
        if p.q < q_cut and p.height > 0:
            total += l_hat(xi, p, N, prog, cutoff)
    return total


def approximant_profile(
    N: int,
    prog: Progression,
    q_cut: int,
    cutoff: CutoffSpec,
    M: int,
    height_min: int = 1,
    height_max: int | None = None,
    points: list[FareyPoint] | None = None,
) -> SpectralProfile:
    """Approximant sampled on the full {k/M} grid, restricted to a height band."""
    _guard_grid(M)
    if points is None:
        points = farey_points(max(q_cut - 1, 1), prog, "denominator")
    values = np.zeros(M, dtype=np.complex128)
    for p in points:
        if p.q >= q_cut or p.height < max(height_min, 1):
            continue
        if height_max is not None and p.height > height_max:
            continue
        idx, vals = _l_hat_window(p, N, M, cutoff)
        values[idx] += vals  # indices within one window are distinct mod M
    meta = {
        "N": N,
        "y": prog.y,
        "b": prog.b,
        "q_cut": q_cut,
        "height_min": height_min,
        "height_max": height_max,
    }
    return SpectralProfile(M, values, meta=meta)


def _warn_qcut(q_cut: int, N: int) -> None:
    if q_cut > N ** (1.0 / 10.0):
        warnings.warn(
            f"q_cut={q_cut} exceeds N^(1/10)={N ** 0.1:.2f}; desk-scale override",
            stacklevel=3,
        )


def _guard_grid(M: int) -> None:
    from .tables import memory_cap

    if M > memory_cap():
        raise MemoryError(f"grid size {M} exceeds memory cap")
    if M & (M - 1):
        raise ValueError(f"grid size {M} must be a power of two")


# ---------------------------------------------------------------------------
# Error measurements


def near_zero_error(
    N: int,
    prog: Progression,
    J: int = 2,
    tables: ArithTables | None = None,
    points_per_unit: int = 64,
) -> float:
    """sup over |theta| < (log N)^J / N of |a_hat(theta) - m_hat(N/y, y theta)|.

    The error is even in theta (both multipliers conjugate under negation), so
    only theta >= 0 is swept.
    """
    y = prog.y
    if y >= math.log(N) ** J:
        warnings.warn(f"y={y} not below (log N)^J = {math.log(N) ** J:.3g}", stacklevel=2)
    T = math.log(N) ** J / N
    dtheta = 1.0 / (points_per_unit * N)
    count = int(T / dtheta) + 1
    avals = a_hat_uniform_grid(N, prog, 0.0, dtheta, count, tables)
    thetas = dtheta * np.arange(count)
    mvals = m_hat(y * thetas, N / y)
    return float(np.abs(avals - mvals).max())


def major_arc_error(
    N: int,
    prog: Progression,
    point: FareyPoint,
    J: int = 2,
    tables: ArithTables | None = None,
    points_per_unit: int = 64,
) -> float:
    """sup over |xi - a/q| < (log N)^J / N of |a_hat(xi) - Upsilon * m_hat(N/l, l(xi - a/q))|."""
    y, q = prog.y, point.q
    if max(y, q) >= math.log(N) ** J:
        warnings.warn(
            f"y={y}, q={q} not below (log N)^J = {math.log(N) ** J:.3g}", stacklevel=2
        )
    ell = point.ell
    T = math.log(N) ** J / N
    dtheta = 1.0 / (points_per_unit * N)
    half = int(T / dtheta)
    count = 2 * half + 1
    avals = a_hat_uniform_grid(
        N, prog, -half * dtheta, dtheta, count, tables, extra_phase=point.center
    )
    thetas = dtheta * (np.arange(count) - half)
    mvals = point.upsilon * m_hat(ell * thetas, N / ell)
    return float(np.abs(avals - mvals).max())


def approx_error_profile(
    N: int,
    prog: Progression,
    q_cut: int,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
    M: int | None = None,
    tables: ArithTables | None = None,
) -> tuple[float, SpectralProfile]:
    """Residual a_hat - approximant on the full grid; returns (sup error, profile)."""
    if M is None:
        M = 1 << (4 * N - 1).bit_length()  # smallest power of two >= 4N
    _warn_qcut(q_cut, N)
    prof = a_hat_profile(N, prog, M, tables)
    residual = prof.values.copy()
    for p in farey_points(max(q_cut - 1, 1), prog, "denominator"):
        if p.q >= q_cut or p.height == 0:
            continue
        idx, vals = _l_hat_window(p, N, M, cutoff)
        residual[idx] -= vals
    out = SpectralProfile(M, residual, meta={**prof.meta, "q_cut": q_cut, "kind": "residual"})
    return out.sup(), out
