"""Three-term recurrence b_{n-1} f_{n-1} + q_n f_n + b_n f_{n+1} = lambda f_n.

Both directions run on a local frame: the active pair is kept as ordinary
floats sharing one binary exponent, and the frame is rescaled by an exact
power of two whenever it drifts far from unity.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .family import JacobiFamily, entries
from .signedlog import Accumulator, SignedLogSeq

# rescale the frame once the pair leaves [2**-RESCALE_BITS, 2**RESCALE_BITS]
RESCALE_BITS = 256


def _rescale(u: float, v: float, e: int) -> tuple[float, float, int]:
    big = max(abs(u), abs(v))
    _, k = math.frexp(big)
    return math.ldexp(u, -k), math.ldexp(v, -k), e + k


def _check_seed(a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterError("seed values must be finite")
    if a == 0.0 and b == 0.0:
        raise ParameterError("zero seed pair only produces the trivial solution")


def recurrence_forward(
    family: JacobiFamily,
    lam: float,
    f1: float,
    f2: float,
    n_max: int,
    start: int = 1,
) -> SignedLogSeq:
    """Solve forward from the pair (f_start, f_start+1) up to f_n_max."""
    if n_max < start + 1:
        raise ParameterError(f"n_max must be at least start + 1 = {start + 1}")
    _check_seed(f1, f2)
    q, b = entries(family, n_max)
    q = q.tolist()
    b = b.tolist()
    acc = Accumulator(start)
    u, v, e = _rescale(f1, f2, 0)
    acc.push(u, e)
    acc.push(v, e)
    lo, hi = 2.0 ** -RESCALE_BITS, 2.0 ** RESCALE_BITS
    for n in range(start + 1, n_max):
        w = ((lam - q[n]) * v - b[n - 1] * u) / b[n]
        u, v = v, w
        acc.push(w, e)
        m = max(abs(u), abs(v))
        if m > hi or m < lo:
            u, v, e = _rescale(u, v, e)
    return acc.build()


def first_kind_polynomials(family: JacobiFamily, lam: float, n_max: int) -> SignedLogSeq:
    """Generalised eigenvector with f_1 = 1 and the first-row condition imposed."""
    f2 = (lam - 1.0) / family.c1  # (lam - q_1) / b_1 with q_1 = 1, b_1 = c1
    return recurrence_forward(family, lam, 1.0, f2, n_max)


def recurrence_backward(
    family: JacobiFamily,
    lam: float,
    f_top: tuple[float, float] | tuple[tuple[float, int], tuple[float, int]],
    m: int,
    down_to: int,
) -> SignedLogSeq:
    """Solve downward from (f_m, f_{m+1}) to f_down_to.

    ``f_top`` is either a pair of floats or a pair of (mantissa, exponent)
    tuples, the latter for values outside the double range.
    """
    if not m > down_to >= 1:
        raise ParameterError(f"need m > down_to >= 1, got m={m}, down_to={down_to}")
    (a, ea), (c, ec) = [(t, 0) if not isinstance(t, tuple) else t for t in f_top]
    _check_seed(a, c)
    e = max(ea if a != 0 else ec, ec if c != 0 else ea)
    hi_val = math.ldexp(c, ec - e)  # f_{m+1}
    lo_val = math.ldexp(a, ea - e)  # f_m
    q, b = entries(family, m + 1)
    q = q.tolist()
    b = b.tolist()
    acc = Accumulator(down_to)
    acc.push(hi_val, e)
    acc.push(lo_val, e)
    u, v = lo_val, hi_val  # u = f_n, v = f_{n+1}
    lo, hi = 2.0 ** -RESCALE_BITS, 2.0 ** RESCALE_BITS
    for n in range(m, down_to, -1):
        w = ((lam - q[n]) * u - b[n] * v) / b[n - 1]
        u, v = w, u
        acc.push(w, e)
        mm = max(abs(u), abs(v))
        if mm > hi or mm < lo:
            u, v, e = _rescale(u, v, e)
    return acc.reversed_build(down_to)


def recurrence_residual(family: JacobiFamily, lam: float, f: SignedLogSeq) -> np.ndarray:
    """Per-row residual of the recurrence at interior indices of ``f``.

    Entry k refers to row n = f.start_index + 1 + k. Each residual is divided
    by the largest of the three terms b_{n-1} f_{n-1}, (q_n - lambda) f_n and
    b_n f_{n+1}; rows whose terms all vanish report 0.
    """
    (fm, f0, fp), _ = f.aligned((-1, 0, 1))
    if fm.size == 0:
        return np.empty(0)
    n = np.arange(f.start_index + 1, f.start_index + 1 + fm.size)
    q, b = entries(family, int(n[-1]))
    t1 = b[n - 1] * fm
    t2 = (q[n] - lam) * f0
    t3 = b[n] * fp
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.abs(t3))
    res = np.abs(t1 + t2 + t3)
    return np.divide(res, scale, out=np.zeros_like(res), where=scale > 0)


def initial_condition_residual(family: JacobiFamily, lam: float, f: SignedLogSeq) -> float:
    """Scaled first-row defect |(q_1 - lambda) f_1 + b_1 f_2| for a sequence starting at 1."""
    if f.start_index != 1:
        raise ParameterError("the first-row condition needs f_1 and f_2")
    (f1, f2), _ = f.slice(1, 2).aligned((0, 1))
    t1 = (1.0 - lam) * f1[0]
    t2 = family.c1 * f2[0]
    scale = max(abs(t1), abs(t2))
    return 0.0 if scale == 0 else abs(t1 + t2) / scale
