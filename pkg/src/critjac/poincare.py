"""Even/odd decimation of the recurrence into a Poincare type equation.

With x_n = f_{2n+1} and y_n = f_{2n} the odd subsequence solves

    x_{n+1} + F_n x_n + G_n x_{n-1} = 0,

and the even one is recovered from the even rows of the recurrence,
y_n = (b_{2n-1} x_{n-1} + b_{2n} x_n) / (lambda - q_{2n}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ParameterError
from .family import JacobiFamily, SpectralWindow, entries
from .recurrence import RESCALE_BITS, _check_seed, _rescale
from .signedlog import Accumulator, SignedLogSeq

GUARD = 1e-12


@dataclass(frozen=True)
class PoincareCoeffs:
    n: int
    F: float
    G: float


def min_index_N(window: SpectralWindow | float, alpha: float) -> int:
    """Smallest N >= hi^(1/alpha) / 2 with (2n)^alpha > hi for all n >= N."""
    hi = window.hi if isinstance(window, SpectralWindow) else float(window)
    N = max(1, math.ceil(hi ** (1.0 / alpha) / 2.0))
    while (2.0 * N) ** alpha <= hi:
        N += 1
    return N


def _powers(family: JacobiFamily, n):
    """k^alpha for k = 2n-1, 2n, 2n+1, 2n+2."""
    n = np.asarray(n)
    if np.any(n < 1):
        raise AdmissibilityError("Poincare coefficients start at n = 1")
    two_n = 2.0 * n.astype(float)
    a = family.alpha
    return tuple(np.power(two_n + k, a) for k in (-1.0, 0.0, 1.0, 2.0))


def _admissible(p2n, lam):
    if np.any(p2n <= lam):
        raise AdmissibilityError("q_{2n} <= lambda: index below the admissible range for this lambda")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _F(c1, c2, lam, p0, p1, p2):
    b2n, b2n1, b2n2 = c2 * p0, c1 * p1, c2 * p2
    d = b2n1 * b2n2
    return (p2 - lam) * b2n * b2n / ((p0 - lam) * d) - (p1 - lam) * (p2 - lam) / d + b2n1 / b2n2


def _G(c1, c2, lam, pm, p0, p1, p2):
    return (p2 - lam) * (c1 * pm) * (c2 * p0) / ((p0 - lam) * (c1 * p1) * (c2 * p2))


def poincare_F(family: JacobiFamily, lam, n):
    """F_n(lambda) from the three-fraction formula."""
    pm, p0, p1, p2 = _powers(family, n)
    _admissible(p0, lam)
    return _out(_F(family.c1, family.c2, lam, p0, p1, p2))


def poincare_G(family: JacobiFamily, lam, n):
    """G_n(lambda)."""
    pm, p0, p1, p2 = _powers(family, n)
    _admissible(p0, lam)
    return _out(_G(family.c1, family.c2, lam, pm, p0, p1, p2))


def coefficient_range(family: JacobiFamily, lam: float, n_lo: int, n_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """(F_{n_lo-1..n_hi}, G_{n_lo..n_hi}) from one table of powers.

    Bit-identical to :func:`poincare_F` and :func:`poincare_G`, but each
    power k^alpha is evaluated once.
    """
    if n_lo < 2 or n_hi < n_lo:
        raise ParameterError("need 2 <= n_lo <= n_hi")
    k0 = 2 * (n_lo - 1) - 1
    table = np.power(np.arange(k0, 2 * n_hi + 3, dtype=float), family.alpha)

    def p(offset, first):  # (2n + offset)^alpha for n = first .. n_hi
        start = 2 * first + offset - k0
        return table[start:start + 2 * (n_hi - first) + 1:2]

    _admissible(p(0, n_lo - 1), lam)
    F = _F(family.c1, family.c2, lam, p(0, n_lo - 1), p(1, n_lo - 1), p(2, n_lo - 1))
    G = _G(family.c1, family.c2, lam, p(-1, n_lo), p(0, n_lo), p(1, n_lo), p(2, n_lo))
    return F, G


def poincare_coeffs(family: JacobiFamily, lam: float, n: int) -> PoincareCoeffs:
    return PoincareCoeffs(int(n), poincare_F(family, lam, n), poincare_G(family, lam, n))


def quotient_terms(family: JacobiFamily, lam, n):
    """The quotients (A_n, B_n, C_n) with F = (c2/c1) A - B/(c1 c2) + (c1/c2) C and G = A (2n-1)^a/(2n)^a."""
    pm, p0, p1, p2 = _powers(family, n)
    _admissible(p0, lam)
    A = (p2 - lam) * p0 * p0 / ((p0 - lam) * p1 * p2)
    B = (p1 - lam) * (p2 - lam) / (p1 * p2)
    C = p1 / p2
    return _out(A), _out(B), _out(C)


def poincare_solve(
    family: JacobiFamily, lam: float, x_prev: float, x_cur: float, start: int, n_max: int
) -> SignedLogSeq:
    """Solve the Poincare equation from (x_{start-1}, x_start) up to x_{n_max}.

    The result is indexed from start - 1, which must be >= 1.
    """
    if start < 2:
        raise ParameterError("start must be >= 2 so that x_{start-1} has index >= 1")
    if n_max < start + 1:
        raise ParameterError("n_max must exceed start")
    _check_seed(x_prev, x_cur)
    idx = np.arange(start, n_max)
    F = poincare_F(family, lam, idx).tolist()
    G = poincare_G(family, lam, idx).tolist()
    acc = Accumulator(start - 1)
    u, v, e = _rescale(x_prev, x_cur, 0)
    acc.push(u, e)
    acc.push(v, e)
    lo, hi = 2.0 ** -RESCALE_BITS, 2.0 ** RESCALE_BITS
    for k in range(len(F)):
        w = -F[k] * v - G[k] * u
        u, v = v, w
        acc.push(w, e)
        m = max(abs(u), abs(v))
        if m > hi or m < lo:
            u, v, e = _rescale(u, v, e)
    return acc.build()


def split_xy(f: SignedLogSeq) -> tuple[SignedLogSeq, SignedLogSeq]:
    """Split f into x_n = f_{2n+1} (n >= 1) and y_n = f_{2n} (n >= 1)."""
    first_odd = max(3, f.start_index + (f.start_index % 2 == 0))
    first_even = max(2, f.start_index + (f.start_index % 2 == 1))
    x = f.every_other(first_odd, (first_odd - 1) // 2)
    y = f.every_other(first_even, first_even // 2)
    return x, y


def poincare_residual(family: JacobiFamily, lam: float, x: SignedLogSeq) -> np.ndarray:
    """Scaled residual of x_{n+1} + F_n x_n + G_n x_{n-1} at interior n of ``x``.

    Each entry is divided by the largest of the three terms; rows whose terms
    all vanish report 0.
    """
    (xm, x0, xp), _ = x.aligned((-1, 0, 1))
    if x0.size == 0:
        return np.empty(0)
    n = np.arange(x.start_index + 1, x.start_index + 1 + x0.size)
    t1 = xp
    t2 = poincare_F(family, lam, n) * x0
    t3 = poincare_G(family, lam, n) * xm
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.abs(t3))
    res = np.abs(t1 + t2 + t3)
    return np.divide(res, scale, out=np.zeros_like(res), where=scale > 0)


def verify_poincare(family: JacobiFamily, lam: float, x: SignedLogSeq) -> float:
    r = poincare_residual(family, lam, x)
    return float(r.max()) if r.size else 0.0


def reconstruct_f_from_x(family: JacobiFamily, lam: float, x: SignedLogSeq) -> SignedLogSeq:
    """Interleave x with y_n = (b_{2n-1} x_{n-1} + b_{2n} x_n) / (lambda - q_{2n}).

    For x on [m, M] the result is f on [2m+1, 2M+1].
    """
    (xa, xb), top = x.aligned((0, 1))
    m = x.start_index
    n = np.arange(m + 1, x.stop_index + 1)
    q, b = entries(family, 2 * x.stop_index + 1)
    denom = lam - q[2 * n]
    if np.any(np.abs(denom) < GUARD * np.maximum(abs(lam), q[2 * n])):
        raise AdmissibilityError("lambda coincides with q_{2n}; y_n is undefined")
    y = (b[2 * n - 1] * xa + b[2 * n] * xb) / denom
    size = 2 * len(x) - 1
    mant = np.empty(size)
    exp = np.empty(size, dtype=np.int64)
    mant[0::2] = x.mantissas
    exp[0::2] = x.exponents
    mant[1::2] = y
    exp[1::2] = top
    return SignedLogSeq(2 * m + 1, mant, exp)


def odd_row_residual(family: JacobiFamily, lam: float, f: SignedLogSeq) -> np.ndarray:
    """Scaled residual of b_{2n-2} y_{n-1} + (q_{2n-1} - lambda) x_{n-1} + b_{2n-1} y_n.

    These are the odd rows of the original recurrence written in (x, y); the
    result has one entry per odd interior row 2n-1 of ``f``.
    """
    (fm, f0, fp), _ = f.aligned((-1, 0, 1))
    rows = np.arange(f.start_index + 1, f.start_index + 1 + f0.size)
    keep = rows % 2 == 1
    rows = rows[keep]
    if rows.size == 0:
        return np.empty(0)
    q, b = entries(family, int(rows[-1]))
    t1 = b[rows - 1] * fm[keep]
    t2 = (q[rows] - lam) * f0[keep]
    t3 = b[rows] * fp[keep]
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.abs(t3))
    res = np.abs(t1 + t2 + t3)
    return np.divide(res, scale, out=np.zeros_like(res), where=scale > 0)
