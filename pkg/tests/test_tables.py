import math

import numpy as np
import pytest

from primeavg.tables import (
    ArithTables,
    Progression,
    build_tables,
    psi_progression,
    reduced_residues,
    sw_error_report,
)


def _primes_below(n):
    sieve = np.ones(n, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


def test_von_mangoldt_against_prime_power_oracle(tables):
    # Lambda(n) = log p on prime powers p^k, else 0, checked up to 10^4
    lam = np.zeros(10_000)
    for p in _primes_below(10_000):
        pk = p
        while pk < 10_000:
            lam[pk] = math.log(p)
            pk *= p
    assert np.allclose(tables.von_mangoldt[:10_000], lam, atol=1e-12)


def test_mobius_divisor_sum_identity(tables):
    # sum over d | n of mu(d) is 1 at n=1 and 0 otherwise
    for n in range(1, 2000):
        s = sum(int(tables.mobius[d]) for d in range(1, n + 1) if n % d == 0)
        assert s == (1 if n == 1 else 0)


def test_totient_divisor_sum_identity(tables):
    # sum over d | n of phi(d) = n
    for n in range(1, 2000):
        s = sum(int(tables.totient[d]) for d in range(1, n + 1) if n % d == 0)
        assert s == n


def test_psi_strict_upper_limit(tables):
    # n < x convention: Psi(8) excludes Lambda(8) = log 2
    p8 = tables.psi(8)
    p9 = tables.psi(9)
    assert p9 - p8 == pytest.approx(math.log(2), abs=1e-12)
    assert tables.psi(3) == pytest.approx(math.log(2), abs=1e-12)


def test_psi_million_within_asymptotic_band(tables):
    x = 10**6
    assert abs(tables.psi(x) - x) / x < 0.003


def test_psi_progression_splits_psi(tables):
    x = 50_000
    total = sum(
        psi_progression(x, Progression(3, b), tables) for b in (1, 2)
    ) + float(tables.von_mangoldt[3:x:3].sum())
    assert total == pytest.approx(tables.psi(x), rel=1e-12)


def test_reduced_residues_basics():
    assert reduced_residues(1).tolist() == [0]
    assert reduced_residues(12).tolist() == [1, 5, 7, 11]
    assert len(reduced_residues(97)) == 96


def test_progression_validation():
    with pytest.raises(ValueError):
        Progression(4, 2)
    with pytest.raises(ValueError):
        Progression(3, 3)
    with pytest.raises(ValueError):
        Progression(0, 0)
    assert Progression(1, 0).y == 1


def test_build_tables_cached():
    a = build_tables(1 << 14)
    b = build_tables(1 << 14)
    assert a is b


def test_tables_are_write_protected(tables):
    with pytest.raises(ValueError):
        tables.von_mangoldt[0] = 1.0


def test_memory_cap_guard():
    with pytest.raises(ValueError):
        build_tables(1 << 22, cap=1000)


def test_psi_progression_bound_check(tables):
    with pytest.raises(ValueError):
        psi_progression(tables.bound + 10, Progression(1, 0), tables)


def test_sw_error_report_trend(tables):
    rows = sw_error_report([10**4, 10**5, 10**6], Progression(3, 1), tables)
    errs = [r["rel_error"] for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert all(r["main_term"] == r["x"] / 2 for r in rows)


def test_sw_error_report_warns_on_large_modulus(tables):
    with pytest.warns(UserWarning):
        sw_error_report([1000], Progression(97, 1), tables)


def test_arith_tables_type(tables):
    assert isinstance(tables, ArithTables)
    assert tables.mobius.dtype == np.int8
    assert tables.is_prime[2] and tables.is_prime[97] and not tables.is_prime[91]
