"""High/Low decomposition of the approximant by Ramanujan height.

The approximant splits into a Low part (heights below the threshold Q,
controlled in physical space through a closed-form kernel built from
Ramanujan sums) and a High part (heights at or above Q, controlled in
frequency space through Gauss-sum decay).  Everything lives on a cyclic
embedding Z_M so convolution and inversion are exact finite transforms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .expsums import ramanujan_table
from .multiplier import (
    DEFAULT_CUTOFF,
    CutoffSpec,
    SpectralProfile,
    approximant_profile,
    m_hat,
)
from .tables import ArithTables, Progression


@dataclass(frozen=True)
class DecompositionConfig:
    """Parameters steering one High/Low split."""

    N: int
    prog: Progression
    Q: int
    M: int
    cutoff: CutoffSpec = DEFAULT_CUTOFF
    q_cut: int | None = None  # denominator ceiling; defaults to y * Q

    def __post_init__(self):
        if self.q_cut is None:
            object.__setattr__(self, "q_cut", self.prog.y * self.Q + 1)
        if self.M < 4 * self.N:
            raise ValueError(f"M={self.M} must be at least 4N={4 * self.N}")
        if self.M & (self.M - 1):
            raise ValueError("M must be a power of two")
        if not (self.Q <= self.q_cut and self.q_cut <= self.N ** 0.1):
            warnings.warn(
                f"Q={self.Q} <= q_cut={self.q_cut} <= N^(1/10)={self.N ** 0.1:.2f} "
                "violated; desk-scale override",
                stacklevel=3,
            )


@dataclass
class CyclicSignal:
    """Real or complex signal on Z_M; norms run over the full cycle."""

    M: int
    values: np.ndarray

    def norm(self, r: float) -> float:
        a = np.abs(self.values)
        if math.isinf(r):
            return float(a.max())
        return float((a**r).sum() ** (1.0 / r))


def indicator(F, M: int) -> np.ndarray:
    f = np.zeros(M, dtype=np.float64)
    f[np.asarray(list(F), dtype=np.int64) % M] = 1.0
    return f


# ---------------------------------------------------------------------------
# Spectral profiles of the two parts


def lo_hat_profile(cfg: DecompositionConfig) -> SpectralProfile:
    """Sum of l_hat over Farey points with 0 < height < Q."""
    return approximant_profile(
        cfg.N, cfg.prog, cfg.q_cut, cfg.cutoff, cfg.M, height_min=1, height_max=cfg.Q - 1
    )


def hi_hat_profile(cfg: DecompositionConfig) -> SpectralProfile:
    """Sum of l_hat over Farey points with height >= Q (same q_cut ceiling as Low)."""
    return approximant_profile(
        cfg.N, cfg.prog, cfg.q_cut, cfg.cutoff, cfg.M, height_min=cfg.Q, height_max=None
    )


# ---------------------------------------------------------------------------
# Kernels


def _centered_coords(M: int) -> np.ndarray:
    x = np.arange(M, dtype=np.int64)
    return np.where(x < M // 2, x, x - M)


def _wrapped_grid(M: int) -> np.ndarray:
    k = np.arange(M, dtype=np.float64) / M
    return np.where(k < 0.5, k, k - 1.0)


def phi_kernel(cfg: DecompositionConfig, q: int) -> CyclicSignal:
    """Inverse transform of the spacing-lcm average times the scale-lcm^2 cutoff.

    The spectral side is m_hat of length N/l at l*xi, times cutoff(l^2 xi),
    with l = lcm(y, q).  Real-valued on Z_M within 1e-9.
    """
    ell = math.lcm(cfg.prog.y, q)
    if ell * ell > cfg.M // 4:
        raise ValueError(f"lcm^2 = {ell * ell} exceeds M/4 = {cfg.M // 4}")
    xi = _wrapped_grid(cfg.M)
    profile = m_hat(ell * xi, cfg.N / ell) * cfg.cutoff(ell * ell * xi)
    kernel = np.fft.ifft(profile)
    _assert_real(kernel, "phi_kernel")
    return CyclicSignal(cfg.M, kernel.real)


def lo_kernel_spectral(cfg: DecompositionConfig) -> CyclicSignal:
    """Low kernel by inverse transform of its spectral profile."""
    kernel = np.fft.ifft(lo_hat_profile(cfg).values)
    _assert_real(kernel, "lo_kernel_spectral")
    return CyclicSignal(cfg.M, kernel.real)


def lo_kernel_closed(cfg: DecompositionConfig, tables: ArithTables) -> CyclicSignal:
    """Low kernel via the closed-form resummation.

    Lo(x) = y 1_{y | x-b} sum over q' < Q coprime to y of
    Phi_{N,q'}(x) mu(q')/phi(q') tau_{q'}(x), with x in a centered window.
    """
    y, b = cfg.prog.y, cfg.prog.b
    x = _centered_coords(cfg.M)
    out = np.zeros(cfg.M, dtype=np.float64)
    for qp in range(1, cfg.Q):
        if math.gcd(qp, y) != 1:
            continue
        mu = int(tables.mobius[qp])
        if mu == 0:
            continue
        phi_qp = int(tables.totient[qp]) if qp > 1 else 1
        phi_vals = phi_kernel(cfg, qp).values
        tau_vals = ramanujan_table(qp, tables)[x % qp]
        out += phi_vals * (mu / phi_qp) * tau_vals
    mask = (x - b) % y == 0
    return CyclicSignal(cfg.M, y * mask * out)


def _assert_real(values: np.ndarray, what: str, tol: float = 1e-9) -> None:
    peak = max(np.abs(values.real).max(), 1e-300)
    worst = np.abs(values.imag).max()
    if worst > tol * max(peak, 1.0):
        raise ArithmeticError(f"{what}: imaginary part {worst:g} exceeds tolerance")


# ---------------------------------------------------------------------------
# Convolution and ratios


def convolve(kernel: CyclicSignal, f: CyclicSignal) -> CyclicSignal:
    """Cyclic convolution via the transform pair."""
    if kernel.M != f.M:
        raise ValueError(f"size mismatch: {kernel.M} vs {f.M}")
    out = np.fft.ifft(np.fft.fft(kernel.values) * np.fft.fft(f.values))
    if np.isrealobj(kernel.values) and np.isrealobj(f.values):
        return CyclicSignal(kernel.M, out.real)
    return CyclicSignal(kernel.M, out)


def apply_profile(profile: SpectralProfile, f: np.ndarray) -> np.ndarray:
    """Convolution of f with the kernel whose multiplier is the given profile."""
    if profile.grid_size != len(f):
        raise ValueError("size mismatch")
    return np.fft.ifft(profile.values * np.fft.fft(f))


def hi_l2_ratio(cfg: DecompositionConfig, F) -> float:
    """l2 norm of Hi * 1_F relative to |F|^(1/2)."""
    F = np.asarray(list(F))
    if len(F) == 0:
        raise ValueError("empty F")
    g = apply_profile(hi_hat_profile(cfg), indicator(F, cfg.M))
    return float(np.linalg.norm(g) / math.sqrt(len(F)))


def lo_linf_ratio(cfg: DecompositionConfig, F, r: float) -> float:
    """sup norm of Lo * 1_F relative to ((y/N)|F|)^(1/r)."""
    F = np.asarray(list(F))
    if len(F) == 0:
        raise ValueError("empty F")
    if not 1.0 < r < 2.0:
        raise ValueError(f"r must lie in (1, 2), got {r}")
    g = apply_profile(lo_hat_profile(cfg), indicator(F, cfg.M))
    scale = (cfg.prog.y / cfg.N * len(F)) ** (1.0 / r)
    return float(np.abs(g).max() / scale)


def maximal_ratios(
    cfgs: list[DecompositionConfig], f: np.ndarray, r: float
) -> tuple[float, float]:
    """(hi, lo) maximal-function norm ratios over a dyadic family of scales.

    Pointwise sup over N of |Hi_N * f| measured in l2 against ||f||_2, and of
    |Lo_N * f| in l^r against ||f||_r.
    """
    if not cfgs:
        raise ValueError("empty config list")
    M = cfgs[0].M
    if any(c.M != M for c in cfgs):
        raise ValueError("all configs must share the cyclic size M")
    fhat = np.fft.fft(f)
    hi_sup = np.zeros(M)
    lo_sup = np.zeros(M)
    for cfg in cfgs:
        hi_sup = np.maximum(hi_sup, np.abs(np.fft.ifft(hi_hat_profile(cfg).values * fhat)))
        lo_sup = np.maximum(lo_sup, np.abs(np.fft.ifft(lo_hat_profile(cfg).values * fhat)))
    f_l2 = np.linalg.norm(f)
    f_lr = float((np.abs(f) ** r).sum() ** (1.0 / r))
    hi_ratio = float(np.linalg.norm(hi_sup) / f_l2)
    lo_ratio = float((lo_sup**r).sum() ** (1.0 / r) / f_lr)
    return hi_ratio, lo_ratio


# ---------------------------------------------------------------------------
# Common-denominator multifrequency maximal harness


def multifrequency_max_ratio(
    D: int,
    num_points: int,
    M: int,
    f: np.ndarray,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
    scales: list[int] | None = None,
) -> float:
    """l2 ratio of the maximal function over smooth projections at {j/D}.

    Takes the first num_points rationals j/D, cutoffs at dyadic spatial
    scales 2^n with n > 2*log2(D), and measures
    || sup_n |F^{-1}[ sum_j eta(2^n (theta - j/D)) f_hat] | ||_2 / ||f||_2.
    """
    if not 1 <= num_points <= D:
        raise ValueError("num_points must lie in [1, D]")
    d = math.ceil(math.log2(D))
    if scales is None:
        scales = list(range(2 * d + 1, int(math.log2(M)) - 1))
    xi = _wrapped_grid(M)
    fhat = np.fft.fft(f)
    sup = np.zeros(M)
    for n in scales:
        if n <= 2 * d:
            raise ValueError(f"scale 2^{n} not above common denominator square {D ** 2}")
        mult = np.zeros(M)
        for j in range(num_points):
            offset = (xi - j / D + 0.5) % 1.0 - 0.5
            mult += cutoff((1 << n) * offset)
        g = np.fft.ifft(mult * fhat)
        sup = np.maximum(sup, np.abs(g))
    return float(np.linalg.norm(sup) / np.linalg.norm(f))
