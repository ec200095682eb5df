"""Discrete spectrum on a window: finite sections versus shooting.

Finite sections are handled with Sturm counts of the shifted LDL^T pivots.
Shooting builds the decaying (subordinate) solution from the backward-limit
Riccati construction and measures how far it is from satisfying the
first-row condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import mpmath
import numpy as np

from .errors import NumericalError, ParameterError
from .family import JacobiFamily, SpectralWindow, entries
from .kelley import BoundParams, backward_limit, decaying_riccati, envelopes
from .poincare import min_index_N, reconstruct_f_from_x
from .recurrence import initial_condition_residual, recurrence_backward, recurrence_residual
from .riccati import X_to_x
from .signedlog import SignedLogSeq

BISECT_TOL = 1e-11


# ---------------------------------------------------------------- finite sections
def _pivmin(b: np.ndarray) -> float:
    return np.finfo(float).tiny * max(1.0, float(np.max(b * b)) if b.size else 1.0)


def sturm_counts(family: JacobiFamily, K: int, lams) -> np.ndarray:
    """Eigenvalues of the K x K section strictly below each lambda (vectorised)."""
    if K < 1:
        raise ParameterError("K must be >= 1")
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    q, b = entries(family, K)
    pivmin = _pivmin(b[1:K])
    b2 = (b * b).tolist()
    ql = q.tolist()
    d = ql[1] - lams
    d = np.where(np.abs(d) < pivmin, -pivmin, d)
    count = (d < 0).astype(np.int64)
    for k in range(2, K + 1):
        d = (ql[k] - lams) - b2[k - 1] / d
        d = np.where(np.abs(d) < pivmin, -pivmin, d)
        count += d < 0
    return count


def sturm_count(family: JacobiFamily, K: int, lam: float) -> int:
    return int(sturm_counts(family, K, [lam])[0])


@dataclass(frozen=True)
class TruncationSpectrum:
    K: int
    window: SpectralWindow
    eigenvalues: np.ndarray
    brackets: np.ndarray  # shape (m, 2)
    count_lo: int
    count_hi: int


def _bisect_counts(family, K, targets, lo, hi, tol):
    """Smallest lambda with count(lambda) > target, for each target, to float resolution."""
    a = np.full(targets.shape, lo, dtype=float)
    b = np.full(targets.shape, hi, dtype=float)
    for _ in range(200):
        mid = 0.5 * (a + b)
        active = (mid > a) & (mid < b)
        if not active.any():
            break
        c = sturm_counts(family, K, mid)
        up = c > targets
        b = np.where(active & up, mid, b)
        a = np.where(active & ~up, mid, a)
    if np.any(b - a > tol):
        raise NumericalError("bisection failed to reach the bracket tolerance")
    return a, b


def truncate_eigenvalues(
    family: JacobiFamily, K: int, window: SpectralWindow, tol: float = BISECT_TOL
) -> TruncationSpectrum:
    """All eigenvalues of the K x K section inside [lo, hi], bracketed by bisection."""
    if K < 2:
        raise ParameterError("K must be >= 2")
    c_lo, c_hi = (int(c) for c in sturm_counts(family, K, [window.lo, window.hi]))
    targets = np.arange(c_lo, c_hi)
    if targets.size == 0:
        return TruncationSpectrum(K, window, np.empty(0), np.empty((0, 2)), c_lo, c_hi)
    a, b = _bisect_counts(family, K, targets, window.lo, window.hi, tol)
    return TruncationSpectrum(K, window, 0.5 * (a + b), np.stack([a, b], axis=1), c_lo, c_hi)


# ---------------------------------------------------------------- decaying solution
def construction_index(family: JacobiFamily, window: SpectralWindow, bounds: BoundParams | None = None,
                       grid_points: int = 9) -> int:
    """First index from which the minus-branch majorant conditions hold on the window."""
    bounds = bounds or BoundParams.default(family.alpha)
    env = envelopes(family, window.grid(grid_points), bounds, "minus", side="majorant")
    return max(env.valid_from, min_index_N(window, family.alpha) + 1)


def decaying_solution(
    family: JacobiFamily,
    lam: float,
    N: int,
    n_max: int | None = None,
    bounds: BoundParams | None = None,
    tol: float = 1e-10,
    s_cap: int = 1_000_000,
    s: int | None = None,
) -> SignedLogSeq:
    """Subordinate solution f^- on [1, n_max], normalised by x_N = f_{2N+1} = 1.

    Above 2N+1 it is rebuilt from the backward-limit Riccati solution (or a
    single backward run from depth ``s`` when given); below, the recurrence
    is run downward, which is the stable direction for it.
    """
    bounds = bounds or BoundParams.default(family.alpha)
    n_max = 2 * N + 2 if n_max is None else int(n_max)
    if n_max < 2:
        raise ParameterError("n_max must be >= 2")
    keep = max(N + 1, (n_max + 1) // 2)
    if s is None:
        sol = backward_limit(family, lam, bounds, N, keep, tol=tol, s_cap=s_cap)
    else:
        if s <= keep:
            raise ParameterError(f"depth s={s} must exceed the kept range end {keep}")
        sol = decaying_riccati(family, lam, bounds, [s], N, keep)
        sol = replace(sol, values=sol.values[: keep - N + 1])
    x = X_to_x(sol, 1.0)  # x on [N, keep + 1]
    upper = reconstruct_f_from_x(family, lam, x)  # f on [2N+1, 2keep+3]
    m = 2 * N + 1
    lower = recurrence_backward(family, lam, (upper.pair(m), upper.pair(m + 1)), m, 1)
    f = lower.concat(upper.slice(m + 2, upper.stop_index)) if upper.stop_index >= m + 2 else lower
    return f.slice(1, max(2, min(n_max, f.stop_index)))


def shooting_mismatch(
    family: JacobiFamily,
    lam: float,
    N: int,
    bounds: BoundParams | None = None,
    s_cap: int = 1_000_000,
    s: int | None = None,
) -> float:
    """W(lambda) = [(q_1 - lambda) f_1 + b_1 f_2] / max(|f_1|, |f_2|) for the decaying solution."""
    f = decaying_solution(family, lam, N, 2 * N + 2, bounds, s_cap=s_cap, s=s)
    (f1, f2), _ = f.slice(1, 2).aligned((0, 1))
    return float(((1.0 - lam) * f1[0] + family.c1 * f2[0]) / max(abs(f1[0]), abs(f2[0])))


def shooting_scan(family: JacobiFamily, window: SpectralWindow, N: int, step: float = 0.01,
                  bounds: BoundParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """W on a uniform grid over the window (endpoints included)."""
    m = max(2, int(round((window.hi - window.lo) / step)) + 1)
    lams = np.linspace(window.lo, window.hi, m)
    return lams, np.array([shooting_mismatch(family, l, N, bounds) for l in lams])


def sign_change_brackets(lams: np.ndarray, W: np.ndarray) -> list[tuple[float, float]]:
    s = np.sign(W)
    out = []
    for k in range(len(W) - 1):
        if s[k] == 0:
            out.append((float(lams[k]), float(lams[k])))
        elif s[k] * s[k + 1] < 0:
            out.append((float(lams[k]), float(lams[k + 1])))
    if len(W) and s[-1] == 0:
        out.append((float(lams[-1]), float(lams[-1])))
    return out


# ---------------------------------------------------------------- eigenpairs
@dataclass(frozen=True)
class DecayFit:
    fitted: float
    predicted: float
    n_lo: int
    n_hi: int

    @property
    def ratio(self) -> float:
        return self.fitted / self.predicted


@dataclass(frozen=True)
class EigenpairEstimate:
    lambda0: float
    eigvec: SignedLogSeq
    recurrence_residual: float
    initial_residual: float
    decay_slope: float
    predicted_slope: float
    bracket: tuple[float, float]
    N: int
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.recurrence_residual > 1e-10 or self.initial_residual > 1e-10:
            raise NumericalError(
                f"eigenpair at {self.lambda0} not certified: residuals "
                f"{self.recurrence_residual:.3g}, {self.initial_residual:.3g}"
            )


def predicted_decay_slope(family: JacobiFamily, lam: float) -> float:
    """-sqrt(lambda / (2 c1 c2)) / (1 - alpha/2)."""
    return -math.sqrt(lam / (2 * family.cc)) / (1 - family.alpha / 2)


def growth_fit(f: SignedLogSeq, family: JacobiFamily, lam: float, n_lo: int = 1000, n_hi: int = 100_000,
               sign: float = -1.0) -> DecayFit:
    """OLS slope of log|f_n| against n^{1-alpha/2} over [n_lo, n_hi]."""
    if f.start_index > n_lo or f.stop_index < n_hi or n_hi <= n_lo:
        raise ParameterError(f"sequence covers [{f.start_index}, {f.stop_index}], fit needs [{n_lo}, {n_hi}]")
    seg = f.slice(n_lo, n_hi)
    L = seg.logmag
    ok = np.isfinite(L)
    t = seg.indices.astype(float) ** (1 - family.alpha / 2)
    slope = float(np.polyfit(t[ok], L[ok], 1)[0])
    return DecayFit(slope, sign * abs(predicted_decay_slope(family, lam)), n_lo, n_hi)


def decay_rate_fit(estimate: EigenpairEstimate, family: JacobiFamily, n_lo: int = 1000,
                   n_hi: int = 100_000) -> DecayFit:
    return growth_fit(estimate.eigvec, family, estimate.lambda0, n_lo, n_hi, sign=-1.0)


def _bisect_W(family, a, b, Wa, Wb, N, bounds):
    while True:
        mid = 0.5 * (a + b)
        if not a < mid < b:
            return a, b
        Wm = shooting_mismatch(family, mid, N, bounds)
        if Wm == 0:
            return mid, mid
        if np.sign(Wm) == np.sign(Wa):
            a, Wa = mid, Wm
        else:
            b, Wb = mid, Wm


def eigenvalue_refine(
    family: JacobiFamily,
    bracket: tuple[float, float],
    N: int,
    bounds: BoundParams | None = None,
    n_max: int = 100_000,
    fit_range: tuple[int, int] = (1000, 100_000),
) -> EigenpairEstimate:
    """Bisect W to float resolution inside a sign-change bracket and certify the eigenvector."""
    a, b = bracket
    Wa, Wb = shooting_mismatch(family, a, N, bounds), shooting_mismatch(family, b, N, bounds)
    if a != b and Wa * Wb > 0:
        raise NumericalError(f"W does not change sign on [{a}, {b}]")
    if a != b:
        a, b = _bisect_W(family, a, b, Wa, Wb, N, bounds)
    lam0 = 0.5 * (a + b)
    f = decaying_solution(family, lam0, N, n_max, bounds)
    rr = float(recurrence_residual(family, lam0, f).max())
    ir = initial_condition_residual(family, lam0, f)
    fit_lo, fit_hi = fit_range
    if f.stop_index >= fit_hi:
        fit = growth_fit(f, family, lam0, fit_lo, fit_hi)
        slope = fit.fitted
    else:
        slope = float("nan")
    return EigenpairEstimate(lam0, f, rr, ir, slope, predicted_decay_slope(family, lam0), (a, b), N)


def shooting_eigenvalues(
    family: JacobiFamily,
    window: SpectralWindow,
    N: int | None = None,
    bounds: BoundParams | None = None,
    step: float = 0.01,
    n_max: int = 100_000,
) -> list[EigenpairEstimate]:
    N = construction_index(family, window, bounds) if N is None else N
    lams, W = shooting_scan(family, window, N, step, bounds)
    return [eigenvalue_refine(family, br, N, bounds, n_max) for br in sign_change_brackets(lams, W)]


# ---------------------------------------------------------------- proportionality
@dataclass(frozen=True)
class Proportionality:
    C: float
    spread: float
    ratios: np.ndarray
    polished_lambda: str


def _first_kind_mp(family, lam, M):
    a = mpmath.mpf(family.alpha)
    c = (mpmath.mpf(family.c1), mpmath.mpf(family.c2))
    q = [mpmath.mpf(0)] + [mpmath.power(k, a) for k in range(1, M + 1)]
    b = [mpmath.mpf(0)] + [q[k] * c[(k + 1) % 2] for k in range(1, M + 1)]
    f = [mpmath.mpf(0), mpmath.mpf(1), (lam - q[1]) / b[1]]
    for n in range(2, M):
        f.append(((lam - q[n]) * f[n] - b[n - 1] * f[n - 1]) / b[n])
    return f


def proportionality(family: JacobiFamily, lam0: float, decaying: SignedLogSeq, n_max: int = 50,
                    M: int | None = None) -> Proportionality:
    """Ratio f*_n / f^-_n over n <= n_max, with f* the first-kind solution.

    In double precision f* at a rounded eigenvalue is swamped by the growing
    solution, so lambda0 is polished to high precision as a zero of f*_M
    (an eigenvalue of the (M-1)-section) and f* is evaluated there.
    """
    if decaying.start_index != 1 or decaying.stop_index < n_max:
        raise ParameterError("decaying solution must cover [1, n_max]")
    M = 3 * n_max if M is None else M
    growth = abs(predicted_decay_slope(family, lam0)) * M ** (1 - family.alpha / 2)
    dps = int(2 * growth / math.log(10)) + 40
    with mpmath.workdps(dps):
        lam = mpmath.findroot(lambda l: _first_kind_mp(family, l, M + 1)[M], mpmath.mpf(lam0), solver="secant",
                              tol=mpmath.mpf(10) ** (-(dps - 10)))
        f = _first_kind_mp(family, lam, n_max + 1)
        fm = decaying.slice(1, n_max)
        ratios = np.array([
            float(f[n] / (mpmath.mpf(fm.mantissas[n - 1]) * mpmath.power(2, int(fm.exponents[n - 1]))))
            for n in range(1, n_max + 1)
        ])
        lam_str = mpmath.nstr(lam, 30)
    C = float(np.median(ratios))
    spread = float((ratios.max() - ratios.min()) / abs(C))
    return Proportionality(C, spread, ratios, lam_str)


# ---------------------------------------------------------------- spacing
@dataclass(frozen=True)
class SpacingRow:
    K: int
    count: int
    min_gap: float
    audit_ok: bool
    eigenvalues: np.ndarray


def spacing_report(family: JacobiFamily, window: SpectralWindow, K_list: Sequence[int],
                   tol: float = BISECT_TOL) -> list[SpacingRow]:
    """Eigenvalue count and minimum gap per K, with a bracket audit.

    The audit checks that every bracket holds exactly one eigenvalue and that
    neighbours are separated by more than ten bracket widths.
    """
    K_list = list(K_list)
    if any(b <= a for a, b in zip(K_list, K_list[1:])):
        raise ParameterError("K_list must be ascending")
    rows = []
    for K in K_list:
        ts = truncate_eigenvalues(family, K, window, tol)
        ev = ts.eigenvalues
        gap = float(np.diff(ev).min()) if ev.size > 1 else float("inf")
        audit = True
        if ev.size:
            lo_c = sturm_counts(family, K, ts.brackets[:, 0])
            hi_c = sturm_counts(family, K, np.nextafter(ts.brackets[:, 1], np.inf))
            audit = bool(np.all(hi_c - lo_c == 1)) and (ev.size < 2 or gap > 10 * tol)
        rows.append(SpacingRow(K, int(ev.size), gap, audit, ev))
    return rows
