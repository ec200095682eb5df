"""Riccati form of the Poincare equation.

With beta_n = 4 G_n / (F_n F_{n-1}) - 1 and X_n = -2 x_{n+1} / (F_n x_n) - 1,
solutions of the Poincare equation correspond to solutions of

    X_n = (1 + beta_n) X_{n-1} / (1 + X_{n-1}) - beta_n,

equivalently X_n + X_n X_{n-1} = X_{n-1} - beta_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, NumericalError, ParameterError, SingularStepError
from .family import JacobiFamily
from .poincare import coefficient_range, poincare_F, poincare_G
from .signedlog import Accumulator, SignedLogSeq

STEP_GUARD = 1e-12
F_GUARD = 1e-9
BRANCHES = ("plus", "minus", "generic")


@dataclass(frozen=True)
class RiccatiSolution:
    """X_n for n = start_index .. start_index + len(values) - 1.

    Branch solutions (plus, minus) must stay in the bounded regime
    |X_n| < 1; ``generic`` marks transforms of arbitrary Poincare solutions,
    which need not.
    """

    start_index: int
    values: np.ndarray
    branch: str
    lam: float
    family: JacobiFamily
    certificate: float | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)
        if self.branch not in BRANCHES:
            raise ParameterError(f"branch must be one of {BRANCHES}")
        if self.start_index < 1 or vals.ndim != 1 or vals.size < 1:
            raise ParameterError("need start_index >= 1 and at least one value")
        if self.branch != "generic":
            if not np.all(np.abs(vals) < 1.0):
                raise NumericalError(f"{self.branch}-branch solution left the region |X| < 1")

    @property
    def stop_index(self) -> int:
        return self.start_index + self.values.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start_index, self.stop_index + 1)

    def window(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """(indices, values) restricted to [lo, hi]."""
        lo, hi = max(lo, self.start_index), min(hi, self.stop_index)
        if hi < lo:
            return np.empty(0, dtype=np.int64), np.empty(0)
        return np.arange(lo, hi + 1), self.values[lo - self.start_index:hi - self.start_index + 1]


def beta(family: JacobiFamily, lam, n):
    """beta_n(lambda) = 4 G_n / (F_n F_{n-1}) - 1."""
    n = np.asarray(n)
    if np.any(n < 2):
        raise AdmissibilityError("beta_n needs n >= 2")
    Fn = poincare_F(family, lam, n)
    Fm = poincare_F(family, lam, n - 1)
    if np.any(np.abs(Fn) < F_GUARD) or np.any(np.abs(Fm) < F_GUARD):
        raise NumericalError("F_n vanishes; beta_n undefined")
    out = 4.0 * poincare_G(family, lam, n) / (Fn * Fm) - 1.0
    return float(out) if np.ndim(out) == 0 else out


def beta_range(family: JacobiFamily, lam: float, n_lo: int, n_hi: int) -> np.ndarray:
    """beta_n for n = n_lo .. n_hi, bit-identical to :func:`beta`."""
    F, G = coefficient_range(family, lam, n_lo, n_hi)
    if np.any(np.abs(F) < F_GUARD):
        raise NumericalError("F_n vanishes; beta_n undefined")
    return 4.0 * G / (F[1:] * F[:-1]) - 1.0


def phi(family: JacobiFamily, lam, n):
    """sqrt(-beta_n); defined only where beta_n < 0."""
    b = np.asarray(beta(family, lam, n))
    if np.any(b >= 0):
        raise AdmissibilityError("beta_n >= 0: index below the asymptotic regime for this lambda")
    out = np.sqrt(-b)
    return float(out) if out.ndim == 0 else out


def psi0(family: JacobiFamily, lam: float) -> float:
    """Leading coefficient of phi_n n^{alpha/2}."""
    return math.sqrt(lam * 2.0 ** (1 - family.alpha) / family.cc)


def formal_X(family: JacobiFamily, lam, n, branch: str):
    """Two-term formal solution +-sqrt(-beta_n) + alpha/(4n)."""
    if branch not in ("plus", "minus"):
        raise ParameterError("branch must be 'plus' or 'minus'")
    sign = 1.0 if branch == "plus" else -1.0
    n = np.asarray(n)
    out = sign * np.asarray(phi(family, lam, n)) + family.alpha / (4.0 * n)
    return float(out) if out.ndim == 0 else out


def riccati_forward_step(X_prev: float, beta_n: float) -> float:
    d = 1.0 + X_prev
    if abs(d) < STEP_GUARD:
        raise SingularStepError(f"forward step singular: X_prev = {X_prev}")
    return (1.0 + beta_n) * X_prev / d - beta_n


def riccati_backward_step(X_n: float, beta_n: float) -> float:
    d = 1.0 - X_n
    if abs(d) < STEP_GUARD:
        raise SingularStepError(f"backward step singular: X_n = {X_n}")
    return (X_n + beta_n) / d


def iterate_forward(X0: float, betas) -> np.ndarray:
    """X_0 followed by forward steps with betas[0], betas[1], ... (beta_{N+1}, ...)."""
    out = [X0]
    X = X0
    for b in np.asarray(betas, dtype=float).tolist():
        d = 1.0 + X
        if abs(d) < STEP_GUARD:
            raise SingularStepError(f"forward step singular after {len(out) - 1} steps")
        X = (1.0 + b) * X / d - b
        out.append(X)
    return np.array(out)


def iterate_backward(X_top: float, betas) -> np.ndarray:
    """Backward run ending with X_top; betas[k] is beta at the index of values[k + 1].

    Returns X_N, ..., X_s in increasing index order for betas = beta_{N+1..s}.
    """
    bl = np.asarray(betas, dtype=float).tolist()
    out = [0.0] * (len(bl) + 1)
    out[-1] = X = X_top
    for k in range(len(bl) - 1, -1, -1):
        d = 1.0 - X
        if abs(d) < STEP_GUARD:
            raise SingularStepError(f"backward step singular at offset {k + 1}")
        X = (X + bl[k]) / d
        out[k] = X
    return np.array(out)


def x_to_X(family: JacobiFamily, lam: float, x: SignedLogSeq, branch: str = "generic") -> RiccatiSolution:
    """Riccati variable from a Poincare solution, using exact ratios x_{n+1}/x_n."""
    if np.any(x.mantissas[:-1] == 0):
        raise NumericalError("x_n vanishes; X_n undefined")
    n = np.arange(x.start_index, x.stop_index)
    F = np.asarray(poincare_F(family, lam, n))
    if np.any(np.abs(F) < F_GUARD):
        raise NumericalError("F_n vanishes; X_n undefined")
    X = -2.0 * x.ratios() / F - 1.0
    return RiccatiSolution(x.start_index, X, branch, lam, family)


def x_ratios(sol: RiccatiSolution) -> np.ndarray:
    """x_{n+1}/x_n = -(F_n/2)(1 + X_n) on the solution's index range."""
    F = np.asarray(poincare_F(sol.family, sol.lam, sol.indices))
    return -0.5 * F * (1.0 + sol.values)


def X_to_x(sol: RiccatiSolution, x_start: float = 1.0) -> SignedLogSeq:
    """Poincare solution x on [N, stop + 1] with x_N = x_start, built from the ratios."""
    acc = Accumulator(sol.start_index)
    m, e = math.frexp(x_start)
    acc.push(m, e)
    for r in x_ratios(sol).tolist():
        if r == 0.0:
            raise NumericalError("zero ratio: X_n = -1")
        m, k = math.frexp(m * r)
        e += k
        acc.push(m, e)
    return acc.build()


def _scaled(res, scale):
    res = np.abs(res)
    return np.divide(res, scale, out=np.zeros_like(res), where=scale > 0)


def riccati_residual(sol: RiccatiSolution, betas=None) -> np.ndarray:
    """Scaled residual of X_n + X_n X_{n-1} - X_{n-1} + beta_n for n > start.

    Divided by the largest of |X_n|, |X_n X_{n-1}|, |X_{n-1}|, |beta_n|.
    """
    X = sol.values
    if X.size < 2:
        return np.empty(0)
    b = beta(sol.family, sol.lam, sol.indices[1:]) if betas is None else np.asarray(betas)
    Xn, Xp = X[1:], X[:-1]
    terms = np.abs(np.stack([Xn, Xn * Xp, Xp, b]))
    return _scaled(Xn + Xn * Xp - Xp + b, terms.max(axis=0))


def rectifier(sol: RiccatiSolution) -> np.ndarray:
    """t_n = (X_n - 1)(X_n - X_{n-1}) for n > start."""
    X = sol.values
    return (X[1:] - 1.0) * (X[1:] - X[:-1])


def rectifier_residual(sol: RiccatiSolution, betas=None) -> np.ndarray:
    """Scaled gap between t_n and X_n^2 + beta_n.

    Divided by the largest term of both sides once expanded:
    X_n^2, |X_n X_{n-1}|, |X_n|, |X_{n-1}|, |beta_n|.
    """
    X = sol.values
    if X.size < 2:
        return np.empty(0)
    b = beta(sol.family, sol.lam, sol.indices[1:]) if betas is None else np.asarray(betas)
    Xn, Xp = X[1:], X[:-1]
    terms = np.abs(np.stack([Xn * Xn, Xn * Xp, Xn, Xp, b]))
    return _scaled(rectifier(sol) - (Xn * Xn + b), terms.max(axis=0))
