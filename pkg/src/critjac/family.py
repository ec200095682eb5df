"""The two-parameter Jacobi family b_n = n^alpha c_n, q_n = n^alpha.

Odd off-diagonal indices carry ``c1``, even ones carry ``c2``. Entries accept
integer scalars or integer numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

BOUNDARY_TOL = 1e-12
ALPHA_RANGE = (1.0 / 3.0, 0.5)


@dataclass(frozen=True)
class JacobiFamily:
    """Parameters (c1, c2, alpha) of the operator.

    ``experimental_alpha`` widens the admissible exponent range from
    (1/3, 1/2) to (0, 1); the asymptotic expansions are only derived for the
    narrow range, so it is off by default.
    """

    c1: float
    c2: float
    alpha: float
    experimental_alpha: bool = False

    def __post_init__(self):
        for name in ("c1", "c2", "alpha"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite real, got {value!r}")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ParameterError(f"c1 and c2 must be positive, got c1={self.c1}, c2={self.c2}")
        lo, hi = (0.0, 1.0) if self.experimental_alpha else ALPHA_RANGE
        if not lo < self.alpha < hi:
            raise ParameterError(f"alpha must lie in ({lo:.6g}, {hi:.6g}), got {self.alpha}")

    @property
    def cc(self) -> float:
        return self.c1 * self.c2

    @property
    def is_critical(self) -> bool:
        """True on the boundary |c1 - c2| = 1."""
        return abs(abs(self.c1 - self.c2) - 1.0) <= BOUNDARY_TOL

    def require_critical(self, what: str = "this operation") -> None:
        if not self.is_critical:
            raise ParameterError(
                f"{what} requires |c1 - c2| = 1, got |{self.c1} - {self.c2}| = {abs(self.c1 - self.c2)}"
            )


@dataclass(frozen=True)
class SpectralWindow:
    """A bounded interval [lo, hi] of the positive half-line."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError("window bounds must be finite")
        if not 0 < self.lo < self.hi:
            raise ParameterError(f"window must satisfy 0 < lo < hi, got [{self.lo}, {self.hi}]")

    def grid(self, points: int) -> np.ndarray:
        if points < 1:
            raise ParameterError("grid needs at least one point")
        if points == 1:
            return np.array([0.5 * (self.lo + self.hi)])
        return np.linspace(self.lo, self.hi, points)

    def __contains__(self, lam) -> bool:
        return self.lo <= lam <= self.hi


class PhaseTag(enum.Enum):
    ABSOLUTELY_CONTINUOUS = "AbsolutelyContinuous"
    DISCRETE = "Discrete"
    BOUNDARY_EASY = "BoundaryEasy"
    BOUNDARY_CRITICAL = "BoundaryCritical"


@dataclass(frozen=True)
class PhaseRegion:
    tag: PhaseTag
    discriminant: float


@dataclass(frozen=True)
class CarlemanReport:
    analytic_verdict: bool
    partial_sum: float


def _power(family: JacobiFamily, n):
    n_arr = np.asarray(n)
    if np.any(n_arr < 1):
        raise ParameterError("indices start at 1")
    out = np.power(n_arr.astype(float), family.alpha)
    return float(out) if out.ndim == 0 else out


def diagonal(family: JacobiFamily, n):
    """q_n = n^alpha."""
    return _power(family, n)


def weight(family: JacobiFamily, n):
    """b_n = n^alpha * c_n, with c_n = c1 for odd n and c2 for even n."""
    n_arr = np.asarray(n)
    c = np.where(n_arr % 2 == 1, family.c1, family.c2)
    out = _power(family, n_arr) * c
    return float(out) if np.ndim(out) == 0 else out


def entries(family: JacobiFamily, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (q_1..q_n_max, b_1..b_n_max), zero-padded at position 0.

    Index k of either array holds the entry with index k, which keeps loops
    that follow the recurrence readable.
    """
    idx = np.arange(1, n_max + 1)
    q = np.empty(n_max + 1)
    b = np.empty(n_max + 1)
    q[0] = b[0] = 0.0
    q[1:] = diagonal(family, idx)
    b[1:] = weight(family, idx)
    return q, b


def carleman_check(family: JacobiFamily, n_terms: int) -> CarlemanReport:
    """Carleman divergence of sum 1/b_n; divergent for every alpha <= 1."""
    if n_terms < 1:
        raise ParameterError("n_terms must be >= 1")
    terms = 1.0 / weight(family, np.arange(1, n_terms + 1))
    return CarlemanReport(analytic_verdict=family.alpha <= 1.0, partial_sum=float(math.fsum(terms)))


def phase_classify(c1: float, c2: float, tol: float = BOUNDARY_TOL) -> PhaseRegion:
    """Locate (c1, c2) in the phase plane.

    The discriminant |c1^2 + c2^2 - 1| / (c1 c2) separates the absolutely
    continuous region (< 2) from the discrete one (> 2). On the boundary the
    two arcs c1 + c2 = 1 and |c1 - c2| = 1 are told apart with the same
    tolerance.
    """
    if not (c1 > 0 and c2 > 0):
        raise ParameterError(f"c1 and c2 must be positive, got c1={c1}, c2={c2}")
    disc = abs(c1 * c1 + c2 * c2 - 1.0) / (c1 * c2)
    if abs(disc - 2.0) <= tol:
        if abs(c1 + c2 - 1.0) <= tol:
            tag = PhaseTag.BOUNDARY_EASY
        elif abs(abs(c1 - c2) - 1.0) <= tol:
            tag = PhaseTag.BOUNDARY_CRITICAL
        else:  # pragma: no cover - algebraically impossible for positive c1, c2
            raise ParameterError("boundary point on neither arc")
    elif disc < 2.0:
        tag = PhaseTag.ABSOLUTELY_CONTINUOUS
    else:
        tag = PhaseTag.DISCRETE
    return PhaseRegion(tag=tag, discriminant=disc)
