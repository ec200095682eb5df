import math

import numpy as np
import pytest

from critjac.errors import CapExceededError, NumericalError, ParameterError
from critjac.family import JacobiFamily
from critjac.kelley import (
    BoundParams,
    backward_limit,
    decaying_riccati,
    envelope_values,
    envelopes,
    growing_riccati,
    verify_trapping,
)
from critjac.riccati import beta, rectifier_residual, riccati_residual


@pytest.fixture(scope="module")
def bp():
    return BoundParams.default(0.4)


@pytest.fixture(scope="module")
def minus_env(fam, bp):
    return envelopes(fam, [1.0], bp, "minus")


@pytest.fixture(scope="module")
def plus_env(fam, bp):
    return envelopes(fam, [1.0], bp, "plus")


def brute_conditions(fam, bp, branch, lam, N, n_hi):
    """Direct transcription of the admissibility inequalities, one index at a time."""
    A, B = bp.offsets(branch)
    sgn = 1 if branch == "plus" else -1

    def env(n, off):
        return sgn * math.sqrt(-beta(fam, lam, n)) + off / n

    for n in range(N, n_hi + 1):
        b = beta(fam, lam, n)
        if b >= 0:
            return False
        v, w = env(n, A), env(n, B)
        if branch == "plus":
            if not (1 + v > 0 and 1 + w > 0 and w >= v):
                return False
        elif not (v >= w and abs(v) < 1 and abs(w) < 1):
            return False
        if n > N:
            vp, wp = env(n - 1, A), env(n - 1, B)
            if not 1 + b >= 0:
                return False
            if not v <= (1 + b) * vp / (1 + vp) - b:
                return False
            if not w >= (1 + b) * wp / (1 + wp) - b:
                return False
    return True


def test_default_bounds(bp):
    assert (bp.A_plus, bp.A_minus, bp.B_minus, bp.B_plus) == pytest.approx((0.09, 0.11, 0.09, 0.11), abs=1e-15)
    assert bp.p == pytest.approx(0.2)


def test_bounds_validation():
    with pytest.raises(ParameterError):
        BoundParams(0.2, 0.11, 0.11, 0.09, 0.11)
    with pytest.raises(ParameterError):
        BoundParams(0.2, 0.09, 0.11, 0.10, 0.11)
    with pytest.raises(ParameterError):
        BoundParams.default(0.4).offsets("sideways")


def test_gap_identities(fam, bp):
    n, _, v, w = envelope_values(fam, 1.5, bp, "plus", 100, 5000)
    np.testing.assert_allclose(w - v, (bp.B_plus - bp.A_plus) / n, rtol=1e-9, atol=1e-16)
    n, _, v, w = envelope_values(fam, 1.5, bp, "minus", 100, 5000)
    np.testing.assert_allclose(v - w, (bp.A_minus - bp.B_minus) / n, rtol=1e-9, atol=1e-16)


def test_minus_valid_from_matches_brute_force(fam, bp, minus_env):
    N = minus_env.valid_from
    assert N == 17737
    assert brute_conditions(fam, bp, "minus", 1.0, N, N + 3000)
    assert not brute_conditions(fam, bp, "minus", 1.0, N - 1, N + 10)
    assert minus_env.scans[0].binding == "minorant step"


def test_majorant_side_scan_is_short(fam, bp):
    env = envelopes(fam, np.linspace(1, 2, 9), bp, "minus", side="majorant")
    assert env.valid_from == 43


def test_uniform_index_is_max_over_grid(fam, bp):
    env = envelopes(fam, [1.0, 1.5, 2.0], bp, "minus")
    assert env.valid_from == max(s.valid_from for s in env.scans) == env.binding().valid_from
    assert env.binding().lam == 2.0


def test_cap_exceeded(fam, bp):
    with pytest.raises(CapExceededError):
        envelopes(fam, [1.0], bp, "minus", cap=5000)


def test_plus_trapping_and_seeds(fam, bp, plus_env):
    N = plus_env.valid_from
    for seed in ("mid", "v", "w"):
        sol = growing_riccati(fam, 1.0, bp, N, 2 * N, seed=seed)
        rep = verify_trapping(plus_env, sol)
        assert rep.trapped, (seed, rep)
    sol = growing_riccati(fam, 1.0, bp, N, 2 * N)
    assert riccati_residual(sol).max() <= 1e-13
    assert rectifier_residual(sol).max() <= 1e-13


def test_violated_seed_detected(fam, bp, plus_env):
    N = plus_env.valid_from
    w_N = plus_env.w(1.0, N, N)[0]
    sol = growing_riccati(fam, 1.0, bp, N, N + 100, seed=w_N + 0.1)
    rep = verify_trapping(plus_env, sol)
    assert not rep.trapped and rep.max_violation > 0 and rep.first_violation == N


def test_nested_bounds_keep_trapping(fam, bp, plus_env):
    tight = BoundParams.default(0.4, margin=0.05)
    env = envelopes(fam, [1.0], tight, "plus")
    assert env.valid_from >= plus_env.valid_from
    for e, b in ((plus_env, bp), (env, tight)):
        sol = growing_riccati(fam, 1.0, b, e.valid_from, e.valid_from + 50_000)
        assert verify_trapping(e, sol).trapped


def test_backward_limit_trapped_and_monotone(fam, bp, minus_env):
    N = minus_env.valid_from
    sol = backward_limit(fam, 1.0, bp, N, 2 * N)
    assert sol.certificate < 1e-10
    assert sol.info["monotone_drop"] <= 1e-12
    assert verify_trapping(minus_env, sol).trapped
    assert rectifier_residual(sol).max() <= 1e-13


def test_decaying_monotone_in_s(fam, bp):
    N = 200
    s_list = [400, 800, 1600, 3200]
    runs = [decaying_riccati(fam, 1.3, bp, [s], N).values for s in s_list]
    for a, b in zip(runs, runs[1:]):
        assert np.all(b[: a.size] - a >= -1e-12)


def test_decaying_convergence_certificate(fam, bp):
    sol = decaying_riccati(fam, 1.5, bp, [20_000, 40_000], 1000)
    assert sol.certificate < 1e-10
    assert sol.stop_index == 40_000


def test_decaying_argument_checks(fam, bp):
    with pytest.raises(ParameterError):
        decaying_riccati(fam, 1.5, bp, [500, 400], 100)
    with pytest.raises(ParameterError):
        decaying_riccati(fam, 1.5, bp, [50], 100)


def test_sharpness_constant(fam, bp):
    from critjac.riccati import phi

    for lam in (1.0, 2.0):
        g = growing_riccati(fam, lam, bp, 1000, 100_000)
        n, X = g.window(10_000, 100_000)
        assert np.max(np.abs(X - phi(fam, lam, n)) * n) <= max(bp.A_plus, bp.B_plus) + 0.05
        d = backward_limit(fam, lam, bp, 10_000, 100_000)
        n, X = d.window(10_000, 100_000)
        assert np.max(np.abs(X + phi(fam, lam, n)) * n) <= max(bp.A_minus, bp.B_minus) + 0.05


def test_off_boundary_family_rejected(bp):
    with pytest.raises(ParameterError):
        envelopes(JacobiFamily(1, 1, 0.4), [1.0], bp, "plus")
