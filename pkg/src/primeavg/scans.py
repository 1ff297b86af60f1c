"""Empirical scanners for the improving and maximal inequalities.

Theorem-level claims are asymptotic with ineffective constants; these scans
collect desk-scale evidence: ratio stability across dyadic N for the
fixed-scale improving inequality, and bounded weak-type ratios for the
dyadic maximal function.  Every random choice flows from a single seed and is
echoed into the report.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .fixtures import fixture_hash
from .tables import ArithTables, Progression, build_tables, reduced_residues

# Desk-scale replacement for the ineffective asymptotic onset threshold.
DEFAULT_N_FLOOR_FACTOR = 1 << 10


def _pow2_at_least(n: int) -> int:
    return 1 << (n - 1).bit_length()


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return v


@dataclass
class ScanReport:
    """Reproducible record of one scan: parameters, per-case rows, summary."""

    parameters: dict
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seed: int = 0
    version: str = __version__
    fixture_hash: str = field(default_factory=fixture_hash)

    def to_json(self) -> str:
        payload = {
            "parameters": self.parameters,
            "summary": self.summary,
            "seed": self.seed,
            "version": self.version,
            "fixture_hash": self.fixture_hash,
        }
        return json.dumps(payload, indent=2, sort_keys=True, default=_fmt)

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.rows[0].keys()))
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Kernels and single-case ratios


def a_kernel(N: int, prog: Progression, M: int, tables: ArithTables) -> np.ndarray:
    """Exact Lambda-weighted averaging kernel on Z_M: phi(y)/N * Lambda(n) on the progression."""
    start = prog.b if prog.b >= 1 else prog.y
    n = np.arange(start, N, prog.y, dtype=np.int64)
    kern = np.zeros(M, dtype=np.float64)
    kern[n] = (int(tables.totient[prog.y]) / N) * tables.von_mangoldt[n]
    return kern


def _convolve_fft(kern_fft: np.ndarray, f: np.ndarray) -> np.ndarray:
    return np.fft.ifft(kern_fft * np.fft.fft(f)).real


def improving_ratio(
    N: int,
    prog: Progression,
    r: float,
    F,
    tables: ArithTables,
    M: int | None = None,
) -> float:
    """||A 1_F||_{r'} / ((y/N)^{1/r - 1/r'} |F|^{1/r})."""
    F = np.asarray(list(F), dtype=np.int64)
    if len(F) == 0:
        raise ValueError("empty F")
    if not 1.0 < r < 2.0:
        raise ValueError(f"r must lie in (1, 2), got {r}")
    if M is None:
        M = _pow2_at_least(4 * N)
    rp = r / (r - 1.0)
    f = np.zeros(M)
    f[F % M] = 1.0
    conv = _convolve_fft(np.fft.fft(a_kernel(N, prog, M, tables)), f)
    num = float((np.abs(conv) ** rp).sum() ** (1.0 / rp))
    den = (prog.y / N) ** (1.0 / r - 1.0 / rp) * len(F) ** (1.0 / r)
    return num / den


def dual_ratio(
    N: int,
    prog: Progression,
    r: float,
    F,
    G,
    tables: ArithTables,
    M: int | None = None,
) -> tuple[float, bool]:
    """Duality-form ratio and whether the pair sits in the trivially-true regime.

    ratio = (y/N) <A 1_F, 1_G> / ((y|F|/N)^{1/r} (y|G|/N)^{1/r}).  The second
    entry is True when (y^2/N^2)|F||G| >= (log N)^{-r'}, i.e. the sizes are too
    large for the duality bound to say anything beyond the trivial one.
    """
    F = np.asarray(list(F), dtype=np.int64)
    G = np.asarray(list(G), dtype=np.int64)
    if len(F) == 0 or len(G) == 0:
        raise ValueError("empty sets")
    if M is None:
        M = _pow2_at_least(4 * N)
    y = prog.y
    f = np.zeros(M)
    f[F % M] = 1.0
    conv = _convolve_fft(np.fft.fft(a_kernel(N, prog, M, tables)), f)
    inner = float(conv[G % M].sum())
    ratio = (y / N) * inner / ((y * len(F) / N) ** (1.0 / r) * (y * len(G) / N) ** (1.0 / r))
    rp = r / (r - 1.0)
    trivial = (y**2 / N**2) * len(F) * len(G) >= math.log(N) ** (-rp)
    return ratio, trivial


# ---------------------------------------------------------------------------
# Input families


def input_families(
    N: int,
    prog: Progression,
    rng: np.random.Generator,
    densities=(3, 5),
    adversarial: bool = False,
    tables: ArithTables | None = None,
) -> dict[str, np.ndarray]:
    """Fixed a-priori test sets inside [0, N): intervals, progression segments,
    Bernoulli sets at dyadic densities, and optionally a greedy Lambda-weighted set."""
    y, b = prog.y, prog.b
    fams: dict[str, np.ndarray] = {}
    fams["interval"] = np.arange(N // 2, dtype=np.int64)
    start = b if b >= 1 else y
    fams["progression_segment"] = np.arange(start, N // 2, y, dtype=np.int64)
    for j in densities:
        mask = rng.random(N) < 2.0**-j
        idx = np.flatnonzero(mask)
        if len(idx) == 0:
            idx = np.array([0], dtype=np.int64)
        fams[f"bernoulli_2^-{j}"] = idx
    if adversarial and tables is not None:
        n = np.arange(start, N, y, dtype=np.int64)
        w = tables.von_mangoldt[n]
        k = max(len(n) // 8, 1)
        fams["greedy_lambda"] = np.sort(n[np.argsort(w)[::-1][:k]])
    return fams


# ---------------------------------------------------------------------------
# Improving scan


_IMPROVING_KEYS = {
    "N_list",
    "y_list",
    "r_list",
    "densities",
    "adversarial",
    "seed",
    "b_map",
    "n_floor_factor",
}


def _default_b(y: int) -> int:
    return 0 if y == 1 else 1


def _improving_cell(payload: tuple) -> list[dict]:
    N, y, b, r_list, densities, adversarial, seed = payload
    tables = build_tables(N)
    prog = Progression(y, b)
    M = _pow2_at_least(4 * N)
    rng = np.random.default_rng(seed)
    fams = input_families(N, prog, rng, densities, adversarial, tables)
    kern_fft = np.fft.fft(a_kernel(N, prog, M, tables))
    rows = []
    for name, F in fams.items():
        f = np.zeros(M)
        f[F] = 1.0
        conv = _convolve_fft(kern_fft, f)
        for r in r_list:
            rp = r / (r - 1.0)
            num = float((np.abs(conv) ** rp).sum() ** (1.0 / rp))
            den = (y / N) ** (1.0 / r - 1.0 / rp) * len(F) ** (1.0 / r)
            rows.append(
                {
                    "N": N,
                    "y": y,
                    "b": b,
                    "r": r,
                    "family": name,
                    "set_size": int(len(F)),
                    "ratio": num / den,
                }
            )
    return rows


def improving_scan(config: dict, workers: int = 1) -> ScanReport:
    """Improving-inequality sweep over (N, y, r, input family).

    Summary holds the max ratio per (y, r) at each N and a stability verdict:
    the max must move by less than a factor of 2 between consecutive scales.
    """
    unknown = set(config) - _IMPROVING_KEYS
    if unknown:
        raise KeyError(f"unknown config keys: {sorted(unknown)}")
    N_list = sorted(config["N_list"])
    y_list = config["y_list"]
    r_list = config.get("r_list", [1.5])
    densities = tuple(config.get("densities", (3, 5)))
    adversarial = bool(config.get("adversarial", True))
    seed = int(config.get("seed", 0))
    floor = int(config.get("n_floor_factor", DEFAULT_N_FLOOR_FACTOR))
    b_map = {int(k): v for k, v in config.get("b_map", {}).items()}

    cells = []
    for y in y_list:
        b = b_map.get(y, _default_b(y))
        for N in N_list:
            if N < floor * y:
                raise ValueError(f"N={N} below desk-scale floor {floor}*y for y={y}")
            cells.append((N, y, b, list(r_list), densities, adversarial, seed))

    rows: list[dict] = []
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for cell_rows in pool.map(_improving_cell, cells):
                rows.extend(cell_rows)
    else:
        for cell in cells:
            rows.extend(_improving_cell(cell))

    max_ratio: dict[tuple, dict[int, float]] = {}
    for row in rows:
        key = (row["y"], row["r"])
        per_n = max_ratio.setdefault(key, {})
        per_n[row["N"]] = max(per_n.get(row["N"], 0.0), row["ratio"])
    stability = {}
    verdict = True
    for (y, r), per_n in max_ratio.items():
        ns = sorted(per_n)
        factors = [per_n[ns[i + 1]] / per_n[ns[i]] for i in range(len(ns) - 1)]
        stable = all(0.5 < fct < 2.0 for fct in factors)
        verdict = verdict and stable
        stability[f"y={y},r={r}"] = {
            "max_ratio_by_N": {str(n): per_n[n] for n in ns},
            "step_factors": factors,
            "stable": stable,
        }
    params = {
        "N_list": N_list,
        "y_list": list(y_list),
        "r_list": list(r_list),
        "densities": list(densities),
        "adversarial": adversarial,
        "seed": seed,
    }
    return ScanReport(
        parameters=params,
        rows=rows,
        summary={"stability": stability, "stable": verdict},
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Maximal scan


_MAXIMAL_KEYS = {
    "N_list",
    "y_list",
    "r",
    "lambda_grid",
    "densities",
    "seed",
    "b_sweep",
    "n_floor_factor",
}


def _maximal_cell(payload: tuple) -> list[dict]:
    N_list, y, b, r, lambdas, densities, seed = payload
    N_max = max(N_list)
    tables = build_tables(N_max)
    prog = Progression(y, b)
    M = _pow2_at_least(4 * N_max)
    rng = np.random.default_rng(seed)
    fams = input_families(N_max, prog, rng, densities)
    kern_ffts = [np.fft.fft(a_kernel(N, prog, M, tables)) for N in N_list]
    rows = []
    for name, F in fams.items():
        f = np.zeros(M)
        f[F] = 1.0
        fhat = np.fft.fft(f)
        sup = np.zeros(M)
        for kf in kern_ffts:
            sup = np.maximum(sup, np.abs(np.fft.ifft(kf * fhat).real))
        strong = float((sup**r).sum() ** (1.0 / r) / len(F) ** (1.0 / r))
        for lam in lambdas:
            exceed = int((sup > lam).sum())
            weak = lam * exceed ** (1.0 / r) / len(F) ** (1.0 / r)
            rows.append(
                {
                    "y": y,
                    "b": b,
                    "r": r,
                    "family": name,
                    "set_size": int(len(F)),
                    "lambda": lam,
                    "q_policy": lam ** (-1.0 + r / 2.0),
                    "weak_ratio": weak,
                    "strong_ratio": strong,
                }
            )
    return rows


def maximal_scan(config: dict, workers: int = 1) -> ScanReport:
    """Weak-type sweep of the dyadic maximal function sup_N |A_{N,y,b} 1_F|.

    Ratios are lambda |{sup > lambda}|^{1/r} / |F|^{1/r} over a lambda grid;
    the strong-type norm is reported as a secondary column.  With b_sweep the
    scan covers every b in A_y and records the variation across b.
    """
    unknown = set(config) - _MAXIMAL_KEYS
    if unknown:
        raise KeyError(f"unknown config keys: {sorted(unknown)}")
    N_list = sorted(config["N_list"])
    y_list = config["y_list"]
    r = float(config.get("r", 2.0))
    lambdas = list(config.get("lambda_grid", [2.0**-k for k in range(1, 7)]))
    densities = tuple(config.get("densities", (3,)))
    seed = int(config.get("seed", 0))
    b_sweep = bool(config.get("b_sweep", False))
    floor = int(config.get("n_floor_factor", DEFAULT_N_FLOOR_FACTOR))

    cells = []
    for y in y_list:
        if min(N_list) < floor * y:
            raise ValueError(f"min N below desk-scale floor {floor}*y for y={y}")
        bs = [int(v) for v in reduced_residues(y)] if b_sweep else [_default_b(y)]
        for b in bs:
            cells.append((list(N_list), y, b, r, lambdas, densities, seed))

    rows: list[dict] = []
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for cell_rows in pool.map(_maximal_cell, cells):
                rows.extend(cell_rows)
    else:
        for cell in cells:
            rows.extend(_maximal_cell(cell))

    max_by_yb: dict[tuple, float] = {}
    for row in rows:
        key = (row["y"], row["b"])
        max_by_yb[key] = max(max_by_yb.get(key, 0.0), row["weak_ratio"])
    variation = {}
    for y in y_list:
        vals = [v for (yy, _), v in max_by_yb.items() if yy == y]
        if len(vals) > 1:
            variation[str(y)] = max(vals) / min(vals)
    summary = {
        "max_weak_ratio": max(max_by_yb.values()),
        "max_weak_by_yb": {f"y={y},b={b}": v for (y, b), v in sorted(max_by_yb.items())},
        "b_variation": variation,
    }
    params = {
        "N_list": N_list,
        "y_list": list(y_list),
        "r": r,
        "lambda_grid": lambdas,
        "densities": list(densities),
        "seed": seed,
        "b_sweep": b_sweep,
    }
    return ScanReport(parameters=params, rows=rows, summary=summary, seed=seed)


def fit_exponent(x: np.ndarray, yvals: np.ndarray) -> float:
    """Least-squares slope of log(yvals) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(yvals, dtype=float))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)
