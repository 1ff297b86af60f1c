import math

import numpy as np
import pytest

from primeavg.highlow import (
    CyclicSignal,
    DecompositionConfig,
    apply_profile,
    convolve,
    hi_hat_profile,
    hi_l2_ratio,
    indicator,
    lo_hat_profile,
    lo_kernel_closed,
    lo_kernel_spectral,
    lo_linf_ratio,
    maximal_ratios,
    multifrequency_max_ratio,
    phi_kernel,
)
from primeavg.multiplier import approximant_profile
from primeavg.tables import Progression


def _cfg(N=1 << 12, y=3, b=1, Q=4, M=None, **kw):
    return DecompositionConfig(N, Progression(y, b), Q, M or 4 * N, **kw)


# ---------------------------------------------------------------------------
# Config validation


def test_config_default_q_cut():
    cfg = _cfg(y=3, Q=4)
    assert cfg.q_cut == 13


def test_config_rejects_small_M():
    with pytest.raises(ValueError):
        DecompositionConfig(1 << 12, Progression(1, 0), 4, 1 << 12)


def test_config_rejects_non_power_of_two_M():
    with pytest.raises(ValueError):
        DecompositionConfig(1 << 12, Progression(1, 0), 4, 3 * (1 << 12))


def test_config_warns_on_desk_scale_override():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning):
            DecompositionConfig(1 << 12, Progression(1, 0), 4, 1 << 14, q_cut=64)


# ---------------------------------------------------------------------------
# Partition


def test_hi_plus_lo_partitions_approximant(tables):
    cfg = _cfg(N=1 << 14, y=3, b=1, Q=4)
    total = approximant_profile(cfg.N, cfg.prog, cfg.q_cut, cfg.cutoff, cfg.M)
    split = lo_hat_profile(cfg).values + hi_hat_profile(cfg).values
    assert np.abs(split - total.values).max() < 1e-10


def test_lo_vanishes_at_Q1(tables):
    # Q = 1 leaves no heights below the threshold
    cfg = _cfg(Q=1)
    assert np.abs(lo_hat_profile(cfg).values).max() == 0.0


# ---------------------------------------------------------------------------
# Kernels


def test_phi_kernel_real_and_round_trips(tables):
    cfg = _cfg(N=1 << 12, y=3, b=1, Q=4)
    ker = phi_kernel(cfg, 2)
    assert ker.values.dtype == np.float64
    ell = math.lcm(3, 2)
    from primeavg.highlow import _wrapped_grid
    from primeavg.multiplier import m_hat

    xi = _wrapped_grid(cfg.M)
    expected = m_hat(ell * xi, cfg.N / ell) * cfg.cutoff(ell * ell * xi)
    back = np.fft.fft(ker.values)
    assert np.abs(back - expected).max() < 1e-9


def test_phi_kernel_decay_envelope(tables):
    # the kernel concentrates on the one-sided window [0, N); the smooth
    # cutoff forces superpolynomial decay outside it
    cfg = _cfg(N=1 << 12, y=1, b=0, Q=2, M=1 << 15)
    ker = phi_kernel(cfg, 1).values
    from primeavg.highlow import _centered_coords

    x = _centered_coords(cfg.M)
    far = np.abs(ker[(x < -cfg.N // 2) | (x > 3 * cfg.N // 2)])
    assert far.max() < 1e-5 * np.abs(ker).max()


def test_phi_kernel_lcm_guard():
    cfg = _cfg(N=1 << 12, y=6, b=1, Q=8, M=1 << 14)
    with pytest.raises(ValueError):
        phi_kernel(cfg, 35)  # lcm(6, 35) = 210, 210^2 > M/4


def test_dual_path_low_kernels_agree(tables):
    cfg = _cfg(N=1 << 12, y=3, b=1, Q=4, M=1 << 16)
    spec = lo_kernel_spectral(cfg).values
    closed = lo_kernel_closed(cfg, tables).values
    peak = np.abs(spec).max()
    assert np.abs(spec - closed).max() < 1e-3 * peak


def test_low_kernel_envelope_invariant(tables):
    # |Lo(x)| stays under a multiple of y Q^2 / N uniformly
    cfg = _cfg(N=1 << 12, y=3, b=1, Q=4, M=1 << 15)
    ker = lo_kernel_closed(cfg, tables).values
    bound = cfg.prog.y * cfg.Q**2 / cfg.N
    assert np.abs(ker).max() <= 10.0 * bound


# ---------------------------------------------------------------------------
# Convolution plumbing


def test_convolve_with_delta_is_identity():
    M = 256
    rng = np.random.default_rng(3)
    f = rng.standard_normal(M)
    delta = np.zeros(M)
    delta[0] = 1.0
    out = convolve(CyclicSignal(M, delta), CyclicSignal(M, f))
    assert np.allclose(out.values, f, atol=1e-12)


def test_convolve_matches_direct_sum():
    M = 64
    rng = np.random.default_rng(4)
    k = rng.standard_normal(M)
    f = rng.standard_normal(M)
    direct = np.array(
        [sum(k[(x - u) % M] * f[u] for u in range(M)) for x in range(M)]
    )
    out = convolve(CyclicSignal(M, k), CyclicSignal(M, f))
    assert np.allclose(out.values, direct, atol=1e-10)


def test_convolve_is_linear():
    M = 128
    rng = np.random.default_rng(5)
    k = CyclicSignal(M, rng.standard_normal(M))
    f = rng.standard_normal(M)
    g = rng.standard_normal(M)
    lhs = convolve(k, CyclicSignal(M, 2 * f - 3 * g)).values
    rhs = 2 * convolve(k, CyclicSignal(M, f)).values - 3 * convolve(k, CyclicSignal(M, g)).values
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_convolve_size_mismatch():
    with pytest.raises(ValueError):
        convolve(CyclicSignal(64, np.zeros(64)), CyclicSignal(128, np.zeros(128)))


def test_apply_profile_size_mismatch(tables):
    cfg = _cfg()
    with pytest.raises(ValueError):
        apply_profile(lo_hat_profile(cfg), np.zeros(cfg.M // 2))


def test_cyclic_signal_norms():
    s = CyclicSignal(4, np.array([3.0, -4.0, 0.0, 0.0]))
    assert s.norm(2) == pytest.approx(5.0)
    assert s.norm(float("inf")) == pytest.approx(4.0)
    assert s.norm(1) == pytest.approx(7.0)


def test_indicator_wraps_modulo():
    f = indicator([1, 5, 5 + 8], 8)
    assert f.tolist() == [0, 1, 0, 0, 0, 1, 0, 0]


# ---------------------------------------------------------------------------
# Ratios


def test_hi_l2_ratio_rejects_empty(tables):
    with pytest.raises(ValueError):
        hi_l2_ratio(_cfg(), [])


def test_lo_linf_ratio_r_range(tables):
    cfg = _cfg()
    with pytest.raises(ValueError):
        lo_linf_ratio(cfg, [0, 1], 2.5)
    with pytest.raises(ValueError):
        lo_linf_ratio(cfg, [0, 1], 1.0)
    with pytest.raises(ValueError):
        lo_linf_ratio(cfg, [], 1.5)


def test_hi_ratio_decreases_in_Q(tables):
    # at a fixed denominator ceiling, larger Q strips more Farey points into
    # Low, shrinking the High norm
    N = 1 << 14
    F = np.arange(0, N, 3) + 1
    vals = [
        hi_l2_ratio(_cfg(N=N, y=3, b=1, Q=Q, M=4 * N, q_cut=25), F) for Q in (2, 8)
    ]
    assert vals[1] < vals[0]


def test_lo_linf_ratio_progression_order_one(tables):
    # input on the progression itself: Low sees nearly all its mass
    N = 1 << 12
    cfg = _cfg(N=N, y=3, b=1, Q=4, M=1 << 14)
    F = np.arange(1, N, 3)
    ratio = lo_linf_ratio(cfg, F, 1.5)
    assert 0.5 < ratio < 2.0


def test_maximal_ratios_single_config_reduces(tables):
    N = 1 << 12
    cfg = _cfg(N=N, y=1, b=0, Q=4, M=1 << 14)
    rng = np.random.default_rng(6)
    f = (rng.random(cfg.M) < 0.1).astype(np.float64)
    F = np.flatnonzero(f)
    hi, lo = maximal_ratios([cfg], f, 1.5)
    assert hi == pytest.approx(hi_l2_ratio(cfg, F) * math.sqrt(len(F)) / np.linalg.norm(f))
    assert lo >= 0.0


def test_maximal_ratios_validation(tables):
    with pytest.raises(ValueError):
        maximal_ratios([], np.zeros(16), 1.5)
    with pytest.raises(ValueError):
        maximal_ratios(
            [_cfg(N=1 << 12, M=1 << 14), _cfg(N=1 << 12, M=1 << 15)],
            np.zeros(1 << 14),
            1.5,
        )


def test_maximal_dominates_each_scale(tables):
    N = 1 << 12
    cfgs = [_cfg(N=N >> k, y=1, b=0, Q=4, M=1 << 14) for k in range(3)]
    rng = np.random.default_rng(8)
    f = rng.standard_normal(1 << 14)
    hi_all, lo_all = maximal_ratios(cfgs, f, 1.5)
    for c in cfgs:
        hi_one, lo_one = maximal_ratios([c], f, 1.5)
        assert hi_all >= hi_one - 1e-12
        assert lo_all >= lo_one - 1e-12


# ---------------------------------------------------------------------------
# Multifrequency


def test_multifrequency_validation():
    f = np.zeros(1 << 12)
    with pytest.raises(ValueError):
        multifrequency_max_ratio(4, 0, 1 << 12, f)
    with pytest.raises(ValueError):
        multifrequency_max_ratio(4, 5, 1 << 12, f)
    with pytest.raises(ValueError):
        multifrequency_max_ratio(4, 2, 1 << 12, f, scales=[3])


def test_multifrequency_single_point_bounded():
    # one smooth projection at frequency 0: ratio stays order one
    M = 1 << 12
    rng = np.random.default_rng(9)
    f = rng.standard_normal(M)
    ratio = multifrequency_max_ratio(4, 1, M, f)
    assert 0.0 < ratio < 3.0
