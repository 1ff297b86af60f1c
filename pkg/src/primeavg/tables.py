"""Sieved arithmetic functions and Chebyshev-type prime counting in progressions.

Everything downstream consumes the immutable ArithTables built here: von
Mangoldt Lambda, Mobius mu, Euler totient phi and a primality flag, all up to
a configured bound.  Sums written "n < N" are implemented strictly
(1 <= n < N) throughout the package.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

# Hard ceiling on table entries unless overridden (env var or argument).
DEFAULT_MEMORY_CAP = 200_000_000

_TABLE_CACHE: dict[int, "ArithTables"] = {}


def memory_cap() -> int:
    return int(os.environ.get("PRIMEAVG_MEMORY_CAP", DEFAULT_MEMORY_CAP))


@dataclass(frozen=True)
class Progression:
    """Residue class b mod y with gcd(b, y) = 1."""

    y: int
    b: int

    def __post_init__(self):
        if self.y < 1:
            raise ValueError(f"spacing y must be positive, got {self.y}")
        if not 0 <= self.b < self.y:
            raise ValueError(f"residue b={self.b} out of range [0, {self.y})")
        if math.gcd(self.b, self.y) != 1:
            raise ValueError(f"gcd(b, y) must be 1, got b={self.b}, y={self.y}")


@dataclass(frozen=True)
class ArithTables:
    """Arrays indexed 0..bound (inclusive)."""

    bound: int
    von_mangoldt: np.ndarray  # float64, Lambda(n) in natural-log units
    mobius: np.ndarray        # int8, values in {-1, 0, 1}
    totient: np.ndarray       # int64
    is_prime: np.ndarray      # bool
    psi_cumulative: np.ndarray = field(repr=False, default=None)  # float64, sum Lambda(m), m <= n

    def psi(self, x: int) -> float:
        """Chebyshev sum of Lambda(n) over 1 <= n < x."""
        if x < 1:
            return 0.0
        return float(self.psi_cumulative[min(x - 1, self.bound)])


def build_tables(bound: int, cap: int | None = None) -> ArithTables:
    """Sieve Lambda, mu, phi and primality up to bound (inclusive).

    Deterministic, single allocation per array.  Results are cached by bound.
    """
    if bound < 2:
        raise ValueError(f"bound must be >= 2, got {bound}")
    if bound + 1 > (cap if cap is not None else memory_cap()):
        raise ValueError(f"bound {bound} exceeds memory cap")
    cached = _TABLE_CACHE.get(bound)
    if cached is not None:
        return cached

    n = bound
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    primes = np.flatnonzero(is_prime)

    mobius = np.ones(n + 1, dtype=np.int8)
    mobius[0] = 0
    totient = np.arange(n + 1, dtype=np.int64)
    lam = np.zeros(n + 1, dtype=np.float64)
    for p in primes:
        p = int(p)
        mobius[p::p] *= -1
        if p * p <= n:
            mobius[p * p :: p * p] = 0
        totient[p::p] -= totient[p::p] // p
        logp = math.log(p)
        pk = p
        while pk <= n:
            lam[pk] = logp
            pk *= p

    psi_cum = np.cumsum(lam)
    tables = ArithTables(
        bound=n,
        von_mangoldt=lam,
        mobius=mobius,
        totient=totient,
        is_prime=is_prime,
        psi_cumulative=psi_cum,
    )
    for arr in (lam, mobius, totient, is_prime, psi_cum):
        arr.setflags(write=False)
    _TABLE_CACHE[n] = tables
    return tables


def reduced_residues(q: int) -> np.ndarray:
    """The set A_q = {a in [0, q) : gcd(a, q) = 1}; A_1 = {0}."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q == 1:
        return np.array([0], dtype=np.int64)
    a = np.arange(q, dtype=np.int64)
    return a[np.gcd(a, q) == 1]


def psi_progression(x: int, prog: Progression, tables: ArithTables) -> float:
    """Sum of Lambda(n) over n < x with n = b mod y (strict upper limit)."""
    if x > tables.bound + 1:
        raise ValueError(f"x={x} exceeds table bound {tables.bound}")
    if x < 2:
        return 0.0
    start = prog.b if prog.b >= 1 else prog.y
    idx = np.arange(start, x, prog.y)
    return float(tables.von_mangoldt[idx].sum())


def sw_error_report(
    x_grid: list[int], prog: Progression, tables: ArithTables, J: int = 2
) -> list[dict]:
    """Relative error of Psi(x, y, b) against the main term x/phi(y).

    Rows carry (x, psi, main_term, rel_error) with
    rel_error = |Psi - x/phi(y)| * phi(y) / x.  Trend data only; no bound is
    asserted (the underlying estimate is ineffective).
    """
    if not x_grid:
        raise ValueError("empty x grid")
    phi_y = int(tables.totient[prog.y]) if prog.y > 1 else 1
    rows = []
    for x in x_grid:
        if prog.y > (math.log(max(x, 3))) ** J:
            import warnings

            warnings.warn(
                f"y={prog.y} exceeds (log x)^J = {(math.log(x)) ** J:.3g} at x={x}",
                stacklevel=2,
            )
        psi = psi_progression(x, prog, tables)
        main = x / phi_y
        rows.append(
            {
                "x": x,
                "psi": psi,
                "main_term": main,
                "rel_error": abs(psi - main) * phi_y / x,
            }
        )
    return rows
