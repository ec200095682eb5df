import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critjac.errors import AdmissibilityError
from critjac.family import JacobiFamily, SpectralWindow, diagonal, weight
from critjac.poincare import (
    quotient_terms,
    min_index_N,
    odd_row_residual,
    poincare_F,
    poincare_G,
    poincare_residual,
    poincare_solve,
    reconstruct_f_from_x,
    split_xy,
    verify_poincare,
)
from critjac.recurrence import recurrence_forward, recurrence_residual
from critjac.signedlog import SignedLogSeq

mp.mp.dps = 50


def mp_F(c1, c2, a, lam, n):
    a, lam = mp.mpf(a), mp.mpf(lam)
    q = lambda k: mp.power(k, a)
    b = lambda k: mp.power(k, a) * (c1 if k % 2 else c2)
    return ((q(2 * n + 2) - lam) * b(2 * n) ** 2 / ((q(2 * n) - lam) * b(2 * n + 1) * b(2 * n + 2))
            - (q(2 * n + 1) - lam) * (q(2 * n + 2) - lam) / (b(2 * n + 1) * b(2 * n + 2))
            + b(2 * n + 1) / b(2 * n + 2))


def mp_G(c1, c2, a, lam, n):
    a, lam = mp.mpf(a), mp.mpf(lam)
    q = lambda k: mp.power(k, a)
    b = lambda k: mp.power(k, a) * (c1 if k % 2 else c2)
    return (q(2 * n + 2) - lam) * b(2 * n - 1) * b(2 * n) / ((q(2 * n) - lam) * b(2 * n + 1) * b(2 * n + 2))


def test_min_index():
    assert min_index_N(SpectralWindow(1, 2), 0.4) == 3
    assert min_index_N(1.0, 0.4) == 1
    for lo, hi in [(1, 2), (2.5, 7), (0.1, 10)]:
        N = min_index_N(SpectralWindow(lo, hi), 0.4)
        n = np.arange(N, N + 1000)
        assert np.all((2.0 * n) ** 0.4 > hi)
        assert N == 1 or (2.0 * (N - 1)) ** 0.4 <= hi or N == np.ceil(hi ** 2.5 / 2)


@pytest.mark.parametrize("lam,n", [(1.0, 10), (1.5, 50), (2.0, 3), (1.0, 10 ** 6)])
def test_F_G_duplicate_formula(fam, lam, n):
    assert poincare_F(fam, lam, n) == pytest.approx(float(mp_F(2, 1, 0.4, lam, n)), rel=1e-14)
    assert poincare_G(fam, lam, n) == pytest.approx(float(mp_G(2, 1, 0.4, lam, n)), rel=1e-14)


def test_F_at_zero_lambda(fam):
    n = 7
    q = lambda k: diagonal(fam, k)
    b = lambda k: weight(fam, k)
    ref = (q(2 * n + 2) * b(2 * n) ** 2 / (q(2 * n) * b(2 * n + 1) * b(2 * n + 2))
           - q(2 * n + 1) * q(2 * n + 2) / (b(2 * n + 1) * b(2 * n + 2))
           + b(2 * n + 1) / b(2 * n + 2))
    assert poincare_F(fam, 0.0, n) == pytest.approx(ref, rel=1e-14)


def test_limits(fam):
    for lam in np.linspace(1, 2, 9):
        assert abs(poincare_F(fam, lam, 10 ** 6) - 2) < 0.05
        assert abs(poincare_G(fam, lam, 10 ** 6) - 1) < 0.01


def test_quotient_factorisation(fam):
    n = np.arange(3, 2000)
    for lam in (1.0, 1.7):
        A, B, C = quotient_terms(fam, lam, n)
        F = fam.c2 / fam.c1 * A - B / fam.cc + fam.c1 / fam.c2 * C
        np.testing.assert_allclose(F, poincare_F(fam, lam, n), rtol=1e-14)
        G = A * np.power(2.0 * n - 1, 0.4) / np.power(2.0 * n, 0.4)
        np.testing.assert_allclose(G, poincare_G(fam, lam, n), rtol=1e-14)


def test_admissibility_guard(fam):
    with pytest.raises(AdmissibilityError):
        poincare_F(fam, 2.0, 1)
    with pytest.raises(AdmissibilityError):
        poincare_G(fam, 2.0, 2)


def forward_f(fam, lam, seed, n_max):
    return recurrence_forward(fam, lam, seed[0], seed[1], n_max)


@settings(max_examples=20, deadline=None)
@given(st.floats(1, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_split_then_reconstruct(lam, a, b):
    fam = JacobiFamily(2.0, 1.0, 0.4)
    if max(abs(a), abs(b)) < 1e-3:
        a = 1.0
    f = forward_f(fam, lam, (a, b), 3001)
    N = min_index_N(SpectralWindow(1, 2), 0.4)
    x, _ = split_xy(f)
    x = x.slice(N, x.stop_index)
    assert verify_poincare(fam, lam, x) <= 1e-12
    g = reconstruct_f_from_x(fam, lam, x)
    ref = f.slice(g.start_index, g.stop_index)
    assert np.abs(g.ratios() / ref.ratios() - 1).max() <= 1e-12
    assert np.all(g.exponents - ref.exponents <= 1)
    np.testing.assert_allclose(g.logmag, ref.logmag, rtol=1e-12, atol=1e-12)
    assert recurrence_residual(fam, lam, g).max() <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(1, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_poincare_solution_gives_recurrence_solution(lam, a, b):
    fam = JacobiFamily(2.0, 1.0, 0.4)
    if max(abs(a), abs(b)) < 1e-3:
        a = 1.0
    x = poincare_solve(fam, lam, a, b, 4, 2000)
    assert verify_poincare(fam, lam, x) <= 1e-12
    f = reconstruct_f_from_x(fam, lam, x)
    assert recurrence_residual(fam, lam, f).max() <= 1e-12
    assert odd_row_residual(fam, lam, f).max() <= 1e-12


def test_controls(fam):
    rng = np.random.default_rng(3)
    noise = SignedLogSeq.from_floats(rng.normal(size=200), start_index=3)
    assert verify_poincare(fam, 1.5, noise) > 1e-6
    zero = SignedLogSeq.from_floats(np.zeros(50), start_index=3)
    assert verify_poincare(fam, 1.5, zero) == 0.0
    f = reconstruct_f_from_x(fam, 1.5, zero)
    assert f.is_zero()


def test_split_indices(fam):
    f = SignedLogSeq.from_floats(np.arange(1.0, 12.0))
    x, y = split_xy(f)
    assert x.start_index == 1 and list(x.to_floats()) == [3, 5, 7, 9, 11]
    assert y.start_index == 1 and list(y.to_floats()) == [2, 4, 6, 8, 10]
