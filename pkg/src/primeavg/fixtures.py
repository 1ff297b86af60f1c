"""Versioned measured constants and their comparison rules.

Fixtures freeze quantities measured at bring-up (decay errors, ratio
ceilings, fitted exponents).  Each entry carries a comparison kind:
"upper"  -> measured <= value * (1 + tol)
"close"  -> |measured - value| <= tol * |value|
"lower"  -> measured >= value * (1 - tol)
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources


def _raw() -> bytes:
    return resources.files("primeavg").joinpath("fixtures.json").read_bytes()


def load_fixtures() -> dict:
    return json.loads(_raw())


def fixture_hash() -> str:
    return hashlib.sha256(_raw()).hexdigest()[:16]


def check_fixture(name: str, measured: float, fixtures: dict | None = None) -> bool:
    fx = (fixtures or load_fixtures())[name]
    value, tol, kind = fx["value"], fx["tol"], fx["kind"]
    if kind == "upper":
        return measured <= value * (1.0 + tol)
    if kind == "lower":
        return measured >= value * (1.0 - tol)
    if kind == "close":
        return abs(measured - value) <= tol * abs(value)
    raise ValueError(f"unknown fixture kind {kind!r} for {name}")


# ---------------------------------------------------------------------------
# Re-measurement recipes
#
# Each fixture can be reproduced from scratch; `verify --fixtures` and the
# acceptance suite both go through this registry so the frozen constants and
# the measurement procedure can never drift apart.  Shared sweeps are cached
# per process.

_SWEEP_CACHE: dict = {}


def _tables(bound: int):
    from .tables import build_tables

    return build_tables(bound)


def _prog(y: int, b: int):
    from .tables import Progression

    return Progression(y, b)


def _measure_near_zero(y: int, b: int, N: int) -> float:
    from .multiplier import near_zero_error

    return near_zero_error(N, _prog(y, b), tables=_tables(max(N, 1 << 20)))


def _measure_residual_sup(y: int, b: int, N: int) -> float:
    from .multiplier import approx_error_profile

    sup, _ = approx_error_profile(N, _prog(y, b), 16, M=4 * N, tables=_tables(max(N, 1 << 20)))
    return sup


def _measure_dual_path_worst() -> float:
    import numpy as np

    from .highlow import DecompositionConfig, lo_kernel_closed, lo_kernel_spectral

    tables = _tables(1 << 20)
    worst = 0.0
    for y in range(1, 7):
        b = 0 if y == 1 else 1
        for Q in (2, 4, 8):
            cfg = DecompositionConfig(N=1 << 12, prog=_prog(y, b), Q=Q, M=1 << 16)
            ks = lo_kernel_spectral(cfg).values
            kc = lo_kernel_closed(cfg, tables).values
            peak = float(np.abs(ks).max())
            if peak > 0:
                worst = max(worst, float(np.abs(ks - kc).max()) / peak)
    return worst


def _bourgain_sweep(y: int, b: int) -> list[float]:
    import warnings

    from .expsums import bourgain_average

    key = ("bourgain", y, b)
    if key not in _SWEEP_CACHE:
        tables = _tables(1 << 18)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _SWEEP_CACHE[key] = [
                bourgain_average(Q, 16 * y * Q * Q, _prog(y, b), 2, tables)
                for Q in (4, 8, 16, 32)
            ]
    return _SWEEP_CACHE[key]


def _measure_bourgain_exponent(y: int, b: int) -> float:
    import numpy as np

    vals = _bourgain_sweep(y, b)
    return float(np.polyfit(np.log([4.0, 8.0, 16.0, 32.0]), np.log(vals), 1)[0])


def _measure_bourgain_ceiling() -> float:
    return max(
        v / Q**1.25
        for y, b in ((1, 0), (5, 1), (12, 1))
        for v, Q in zip(_bourgain_sweep(y, b), (4, 8, 16, 32))
    )


def hi_decay_family(N: int) -> list:
    """Inputs probing the High operator norm: interval, Bernoulli set, and
    progressions of every modulus below the denominator ceiling (the sharp
    class: their spectra spike exactly on the Farey points)."""
    import numpy as np

    rng = np.random.default_rng(7)
    fams = [np.arange(N // 8), np.flatnonzero(rng.random(N) < 0.125)]
    fams += [np.arange(0, N, qp) for qp in range(2, 32)]
    return fams


def _measure_hi_decay_slope(y: int, b: int) -> float:
    import numpy as np

    from .highlow import DecompositionConfig, apply_profile, hi_hat_profile, indicator

    N, M = 1 << 16, 1 << 18
    fams = hi_decay_family(N)
    maxima = []
    for Q in (2, 4, 8, 16):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = DecompositionConfig(N=N, prog=_prog(y, b), Q=Q, M=M, q_cut=32)
        profile = hi_hat_profile(cfg)
        maxima.append(
            max(
                float(np.linalg.norm(apply_profile(profile, indicator(F, M))) / np.sqrt(len(F)))
                for F in fams
            )
        )
    return float(np.polyfit(np.log([2.0, 4.0, 8.0, 16.0]), np.log(maxima), 1)[0])


def _measure_improving_max(y: int, b: int) -> float:
    from .scans import _improving_cell

    rows = _improving_cell((1 << 16, y, b, [1.5], (3, 5), True, 0))
    return max(row["ratio"] for row in rows)


def _maximal_summary() -> dict:
    if "maximal" not in _SWEEP_CACHE:
        from .scans import maximal_scan

        report = maximal_scan(
            {
                "N_list": [1 << k for k in range(10, 17)],
                "y_list": [1, 5],
                "r": 2.0,
                "lambda_grid": [2.0**-k for k in range(1, 7)],
                "seed": 0,
                "b_sweep": True,
                "n_floor_factor": 128,
            }
        )
        _SWEEP_CACHE["maximal"] = report.summary
    return _SWEEP_CACHE["maximal"]


def multifrequency_adapted_ratios(D: int = 12, M: int = 1 << 18) -> list[float]:
    """Per point count, the maximal-projection ratio on an input whose
    spectrum fills exactly the bands in play (the operator-norm probe)."""
    import math

    import numpy as np

    from .highlow import _wrapped_grid, multifrequency_max_ratio
    from .multiplier import DEFAULT_CUTOFF

    key = ("multifrequency", D, M)
    if key in _SWEEP_CACHE:
        return _SWEEP_CACHE[key]
    d = math.ceil(math.log2(D))
    n0 = 2 * d + 1
    xi = _wrapped_grid(M)
    out = []
    for k in (1, 2, 4, 8, 12):
        mult = np.zeros(M)
        for j in range(k):
            offset = (xi - j / D + 0.5) % 1.0 - 0.5
            mult += DEFAULT_CUTOFF((1 << n0) * offset)
        f = np.fft.ifft(mult).real
        out.append(multifrequency_max_ratio(D, k, M, f))
    _SWEEP_CACHE[key] = out
    return out


def _measure_lo_linf(y: int, b: int) -> float:
    import numpy as np

    from .highlow import DecompositionConfig, lo_linf_ratio

    N = 1 << 14
    cfg = DecompositionConfig(N=N, prog=_prog(y, b), Q=4, M=1 << 16)
    if y == 1:
        F = np.arange(N // 8)
    else:
        F = np.arange(b, N, y)
    return lo_linf_ratio(cfg, F, 1.5)


def _measure_sw_rel_error(y: int, b: int) -> float:
    from .tables import sw_error_report

    rows = sw_error_report([10**6], _prog(y, b), _tables(1 << 20))
    return rows[0]["rel_error"]


MEASUREMENTS = {
    "near_zero_y1_N12": lambda: _measure_near_zero(1, 0, 1 << 12),
    "near_zero_y1_N16": lambda: _measure_near_zero(1, 0, 1 << 16),
    "near_zero_y1_N20": lambda: _measure_near_zero(1, 0, 1 << 20),
    "near_zero_y3_N12": lambda: _measure_near_zero(3, 1, 1 << 12),
    "near_zero_y3_N16": lambda: _measure_near_zero(3, 1, 1 << 16),
    "near_zero_y3_N20": lambda: _measure_near_zero(3, 1, 1 << 20),
    "residual_sup_y1_N12": lambda: _measure_residual_sup(1, 0, 1 << 12),
    "residual_sup_y1_N20": lambda: _measure_residual_sup(1, 0, 1 << 20),
    "residual_sup_y3_N12": lambda: _measure_residual_sup(3, 1, 1 << 12),
    "residual_sup_y3_N20": lambda: _measure_residual_sup(3, 1, 1 << 20),
    "dual_path_worst_rel": _measure_dual_path_worst,
    "bourgain_ratio_ceiling_t2": _measure_bourgain_ceiling,
    "bourgain_exponent_y1": lambda: _measure_bourgain_exponent(1, 0),
    "bourgain_exponent_y5": lambda: _measure_bourgain_exponent(5, 1),
    "bourgain_exponent_y12": lambda: _measure_bourgain_exponent(12, 1),
    "hi_decay_slope_y1": lambda: _measure_hi_decay_slope(1, 0),
    "hi_decay_slope_y3": lambda: _measure_hi_decay_slope(3, 1),
    "improving_max_y1_r15": lambda: _measure_improving_max(1, 0),
    "improving_max_y3_r15": lambda: _measure_improving_max(3, 1),
    "improving_max_y5_r15": lambda: _measure_improving_max(5, 1),
    "maximal_weak_ceiling": lambda: _maximal_summary()["max_weak_ratio"],
    "maximal_b_variation_y5": lambda: _maximal_summary()["b_variation"]["5"],
    "multifrequency_d12_constant": lambda: max(multifrequency_adapted_ratios()),
    "multifrequency_d12_spread": lambda: (
        lambda r: max(r) / min(r)
    )(multifrequency_adapted_ratios()),
    "lo_linf_interval_y1": lambda: _measure_lo_linf(1, 0),
    "lo_linf_progression_y3": lambda: _measure_lo_linf(3, 1),
    "sw_rel_error_1e6_y1": lambda: _measure_sw_rel_error(1, 0),
    "sw_rel_error_1e6_y3": lambda: _measure_sw_rel_error(3, 1),
}


def measure_fixture(name: str) -> float:
    return float(MEASUREMENTS[name]())
