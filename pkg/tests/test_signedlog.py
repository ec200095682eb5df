import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critjac.errors import ParameterError
from critjac.signedlog import SignedLogSeq, SignedLogValue

finite = st.floats(-1e300, 1e300, allow_nan=False).filter(lambda x: x == 0 or abs(x) > 1e-300)


def test_value_sentinel():
    assert SignedLogValue.from_float(0.0) == SignedLogValue(0, float("-inf"))
    with pytest.raises(ParameterError):
        SignedLogValue(0, 1.0)
    with pytest.raises(ParameterError):
        SignedLogValue(1, float("-inf"))
    with pytest.raises(ParameterError):
        SignedLogValue(2, 0.0)


@given(st.lists(finite, min_size=2, max_size=30))
def test_float_round_trip(xs):
    seq = SignedLogSeq.from_floats(xs, start_index=3)
    assert np.array_equal(seq.to_floats(), np.asarray(xs))
    assert seq.stop_index == 3 + len(xs) - 1
    for k, x in enumerate(xs):
        v = seq.value(3 + k)
        assert v.sign == np.sign(x)
        if x:
            assert v.logmag == pytest.approx(math.log(abs(x)), rel=1e-15, abs=1e-15)


def test_signed_log_construction_far_outside_double():
    seq = SignedLogSeq.from_signed_log([1, -1, 0], [5000.0, -7000.5, float("-inf")])
    assert list(seq.sign) == [1, -1, 0]
    assert seq.logmag[0] == pytest.approx(5000.0, rel=1e-15)
    assert seq.logmag[1] == pytest.approx(-7000.5, rel=1e-15)
    assert seq.logmag[2] == float("-inf")
    assert seq.to_floats()[0] == math.inf


def test_exact_ratios_and_scaling():
    seq = SignedLogSeq.from_floats([3.0, -6.0, 1.5])
    huge = seq.scaled(1.0, 5000)
    assert np.array_equal(huge.ratios(), [-2.0, -0.25])
    assert huge.logmag[0] == pytest.approx(math.log(3) + 5000 * math.log(2), rel=1e-15)
    assert np.array_equal(huge.normalized(2).to_floats(), [-0.5, 1.0, -0.25])


def test_slice_concat():
    seq = SignedLogSeq.from_floats(np.arange(1.0, 11.0))
    a, b = seq.slice(1, 6), seq.slice(5, 10)
    assert np.array_equal(a.concat(b).to_floats(), seq.to_floats())
    assert np.array_equal(seq.every_other(2, 1).to_floats(), [2, 4, 6, 8, 10])
    with pytest.raises(IndexError):
        seq.value(11)


def test_aligned_common_exponent():
    seq = SignedLogSeq.from_floats([1.0, 2.0 ** 40, 3.0]).scaled(1.0, 3000)
    (a, b), top = seq.aligned((0, 1))
    for k in range(2):
        assert math.ldexp(a[k], int(top[k]) - 3000) == seq.slice(1, 3).scaled(1.0, -3000).to_floats()[k]


def test_length_and_start_invariants():
    with pytest.raises(ParameterError):
        SignedLogSeq.from_floats([1.0])
    with pytest.raises(ParameterError):
        SignedLogSeq.from_floats([1.0, 2.0], start_index=0)
