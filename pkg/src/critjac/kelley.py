"""Majorant/minorant envelopes for the Riccati equation and the branch solutions.

Envelopes are v_n = +-phi_n + A/n and w_n = +-phi_n + B/n with phi_n =
sqrt(-beta_n). A pair is admissible from N on when the one-step comparison
inequalities hold there:

    plus:  1 + v_n > 0, w_N >= v_N, 1 + beta_n >= 0 (n > N),
           v_n <= (1 + beta_n) v_{n-1} / (1 + v_{n-1}) - beta_n   (n > N),
           w_n >= (1 + beta_n) w_{n-1} / (1 + w_{n-1}) - beta_n   (n > N);
    minus: v_n >= w_n, |v_n| < 1, |w_n| < 1 and the three n > N conditions.

Then any forward solution started in [v_N, w_N] stays between the plus
envelopes, and the backward limit from X_{s,s} = w_s stays between the minus
ones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceededError, NumericalError, ParameterError
from .family import JacobiFamily
from .poincare import min_index_N
from .riccati import RiccatiSolution, beta_range, iterate_backward, iterate_forward

log = logging.getLogger(__name__)

DEFAULT_CAP = 5_000_000
CHUNK = 1_000_000
TRAP_ATOL = 1e-15
MONOTONE_TOL = 1e-12

# (name, applies to n >= N (True) or only n > N (False), envelope side)
_CONDITIONS = {
    "plus": (
        ("beta<0", True, "both"),
        ("1+v>0", True, "minorant"),
        ("1+w>0", True, "majorant"),
        ("w>=v", True, "both"),
        ("1+beta>=0", False, "both"),
        ("minorant step", False, "minorant"),
        ("majorant step", False, "majorant"),
    ),
    "minus": (
        ("beta<0", True, "both"),
        ("v>=w", True, "both"),
        ("|v|<1", True, "minorant"),
        ("|w|<1", True, "majorant"),
        ("1+beta>=0", False, "both"),
        ("minorant step", False, "minorant"),
        ("majorant step", False, "majorant"),
    ),
}


@dataclass(frozen=True)
class BoundParams:
    """Envelope offsets around p/2 with p = alpha/2."""

    p: float
    A_plus: float
    A_minus: float
    B_minus: float
    B_plus: float

    def __post_init__(self):
        half = self.p / 2
        if not self.p > 0:
            raise ParameterError("p must be positive")
        if not self.A_plus < half < self.A_minus:
            raise ParameterError(f"need A+ < p/2 < A-, got {self.A_plus}, {half}, {self.A_minus}")
        if not self.B_minus < half < self.B_plus:
            raise ParameterError(f"need B- < p/2 < B+, got {self.B_minus}, {half}, {self.B_plus}")

    @classmethod
    def default(cls, alpha: float, margin: float = 0.1) -> "BoundParams":
        p = alpha / 2
        lo, hi = (1 - margin) * p / 2, (1 + margin) * p / 2
        return cls(p, lo, hi, lo, hi)

    def offsets(self, branch: str) -> tuple[float, float]:
        """(A, B) for the minorant and majorant of ``branch``."""
        if branch == "plus":
            return self.A_plus, self.B_plus
        if branch == "minus":
            return self.A_minus, self.B_minus
        raise ParameterError("branch must be 'plus' or 'minus'")


def envelope_values(family: JacobiFamily, lam: float, bounds: BoundParams, branch: str, n_lo: int, n_hi: int):
    """(n, beta_n, v_n, w_n) on [n_lo, n_hi]; v, w are NaN where beta_n >= 0."""
    A, B = bounds.offsets(branch)
    n = np.arange(n_lo, n_hi + 1)
    b = beta_range(family, lam, n_lo, n_hi)
    with np.errstate(invalid="ignore"):
        ph = np.sqrt(np.where(b < 0, -b, np.nan))
    sign = 1.0 if branch == "plus" else -1.0
    return n, b, sign * ph + A / n, sign * ph + B / n


def _violations(branch: str, b, v, w):
    """Boolean failure masks, aligned with the arrays; step conditions at k use k - 1."""
    with np.errstate(invalid="ignore", divide="ignore"):
        out = {"beta<0": ~(b < 0)}
        if branch == "plus":
            out["1+v>0"] = ~(1 + v > 0)
            out["1+w>0"] = ~(1 + w > 0)
            out["w>=v"] = ~(w >= v)
        else:
            out["v>=w"] = ~(v >= w)
            out["|v|<1"] = ~(np.abs(v) < 1)
            out["|w|<1"] = ~(np.abs(w) < 1)
        bad_b = np.zeros_like(b, dtype=bool)
        bad_b[1:] = ~(1 + b[1:] >= 0)
        out["1+beta>=0"] = bad_b
        for name, e in (("minorant step", v), ("majorant step", w)):
            nxt = (1 + b[1:]) * e[:-1] / (1 + e[:-1]) - b[1:]
            ok = e[1:] <= nxt if name == "minorant step" else e[1:] >= nxt
            bad = np.zeros_like(b, dtype=bool)
            bad[1:] = ~ok
            out[name] = bad
    return out


@dataclass
class LambdaScan:
    lam: float
    first_index: int
    valid_from: int
    horizon: int
    last_failure: dict
    binding: str | None


@dataclass(frozen=True)
class EnvelopePair:
    """Envelopes for one branch over a lambda grid, admissible from ``valid_from``.

    The sequences themselves are evaluated on demand with :meth:`values`.
    """

    family: JacobiFamily
    lam_grid: tuple[float, ...]
    bounds: BoundParams
    branch: str
    valid_from: int
    side: str
    scans: tuple[LambdaScan, ...] = field(compare=False)

    def values(self, lam: float, n_lo: int, n_hi: int):
        """(n, v_n, w_n) on [n_lo, n_hi]."""
        n, _, v, w = envelope_values(self.family, lam, self.bounds, self.branch, n_lo, n_hi)
        return n, v, w

    def v(self, lam: float, n_lo: int, n_hi: int) -> np.ndarray:
        return self.values(lam, n_lo, n_hi)[1]

    def w(self, lam: float, n_lo: int, n_hi: int) -> np.ndarray:
        return self.values(lam, n_lo, n_hi)[2]

    @property
    def gap(self) -> float:
        """Coefficient of 1/n in |w_n - v_n|."""
        A, B = self.bounds.offsets(self.branch)
        return abs(B - A)

    def binding(self) -> LambdaScan:
        return max(self.scans, key=lambda s: s.valid_from)


def _scan_one(family, lam, bounds, branch, side, cap) -> LambdaScan:
    names = [c for c in _CONDITIONS[branch] if side == "both" or c[2] in (side, "both")]
    n0 = min_index_N(lam, family.alpha) + 1  # beta_n needs q_{2n-2} > lambda
    last = {name: None for name, _, _ in names}
    lo = n0
    horizon = min(max(10 * n0, 1000), cap)
    carry = None  # (b, v, w) at lo - 1
    while True:
        while lo <= horizon:
            hi = min(lo + CHUNK - 1, horizon)
            n, b, v, w = envelope_values(family, lam, bounds, branch, lo, hi)
            if carry is not None:
                n = np.concatenate([[lo - 1], n])
                b, v, w = (np.concatenate([[c], a]) for c, a in zip(carry, (b, v, w)))
            fails = _violations(branch, b, v, w)
            skip = 1 if carry is not None else 0
            for name, _, _ in names:
                bad = np.flatnonzero(fails[name][skip:])
                if bad.size:
                    last[name] = int(n[skip + bad[-1]])
            carry = (b[-1], v[-1], w[-1])
            lo = hi + 1
        candidate = n0
        for name, at_N, _ in names:
            if last[name] is not None:
                candidate = max(candidate, last[name] + 1 if at_N else last[name])
        if candidate >= cap:
            bad = [k for k, val in last.items() if val is not None and val >= cap - 1]
            raise CapExceededError(
                f"no admissible N below cap {cap} at lambda={lam}: {', '.join(bad) or 'conditions'} still fail near the cap"
            )
        want = min(10 * candidate, cap)
        if want <= horizon:
            break
        horizon = want
    binding = None
    if any(v is not None for v in last.values()):
        binding = max((k for k in last if last[k] is not None), key=lambda k: last[k])
    return LambdaScan(lam, n0, candidate, horizon, last, binding)


def envelopes(
    family: JacobiFamily,
    lam_grid: Iterable[float],
    bounds: BoundParams,
    branch: str,
    side: str = "both",
    cap: int = DEFAULT_CAP,
) -> EnvelopePair:
    """Scan for the first index from which every required inequality holds.

    For each lambda the last violation of each inequality is located on a
    horizon of ten times the running candidate (at most ``cap``); the
    admissible index is the maximum over the grid. ``side`` restricts the
    scan to the minorant or majorant conditions.
    """
    if side not in ("both", "minorant", "majorant"):
        raise ParameterError("side must be 'both', 'minorant' or 'majorant'")
    bounds.offsets(branch)
    family.require_critical("the envelope construction")
    grid = tuple(float(l) for l in lam_grid)
    if not grid or min(grid) <= 0:
        raise ParameterError("lambda grid must be non-empty and positive")
    scans = tuple(_scan_one(family, lam, bounds, branch, side, cap) for lam in grid)
    for s in scans:
        log.debug("lambda=%g %s valid_from=%d binding=%s", s.lam, branch, s.valid_from, s.binding)
    return EnvelopePair(family, grid, bounds, branch, max(s.valid_from for s in scans), side, scans)


@dataclass(frozen=True)
class TrappingReport:
    trapped: bool
    max_violation: float
    first_violation: int | None
    n_lo: int
    n_hi: int


def verify_trapping(
    envelope: EnvelopePair,
    solution: RiccatiSolution,
    n_lo: int | None = None,
    n_hi: int | None = None,
    atol: float = TRAP_ATOL,
) -> TrappingReport:
    """Check the branch sandwich on the overlap of the solution with [valid_from, ...]."""
    if solution.branch != envelope.branch:
        raise ParameterError("solution and envelope belong to different branches")
    lo = max(solution.start_index, envelope.valid_from if n_lo is None else n_lo)
    hi = solution.stop_index if n_hi is None else min(n_hi, solution.stop_index)
    if hi < lo:
        raise ParameterError("solution does not overlap the admissible range")
    n, X = solution.window(lo, hi)
    _, v, w = envelope.values(solution.lam, lo, hi)
    lower, upper = (v, w) if envelope.branch == "plus" else (w, v)
    viol = np.maximum(lower - X, X - upper)
    viol = np.where(np.isnan(viol), np.inf, viol)
    bad = np.flatnonzero(viol > atol)
    return TrappingReport(
        trapped=bad.size == 0,
        max_violation=float(max(viol.max(), 0.0)),
        first_violation=int(n[bad[0]]) if bad.size else None,
        n_lo=lo,
        n_hi=hi,
    )


def growing_riccati(
    family: JacobiFamily,
    lam: float,
    bounds: BoundParams,
    N: int,
    n_max: int,
    seed: str | float = "mid",
) -> RiccatiSolution:
    """Forward solution from X_N in [v_N, w_N]; ``seed`` is 'mid', 'v', 'w' or a value."""
    if n_max <= N:
        raise ParameterError("n_max must exceed N")
    _, _, v, w = envelope_values(family, lam, bounds, "plus", N, N)
    if isinstance(seed, str):
        X0 = {"mid": 0.5 * (v[0] + w[0]), "v": v[0], "w": w[0]}[seed]
    else:
        X0 = float(seed)
    if not np.isfinite(X0):
        raise NumericalError(f"beta_N >= 0 at N={N}; envelopes undefined")
    X = iterate_forward(X0, beta_range(family, lam, N + 1, n_max))
    return RiccatiSolution(N, X, "plus", lam, family, info={"seed": X0})


@dataclass(frozen=True)
class BackwardRun:
    s: int
    values: np.ndarray  # X_{N..s, s}


def decaying_riccati(
    family: JacobiFamily,
    lam: float,
    bounds: BoundParams,
    s_list: Sequence[int],
    N: int,
    keep: int | None = None,
    monotone_tol: float = MONOTONE_TOL,
) -> RiccatiSolution:
    """Backward runs X_{n,s} seeded with X_{s,s} = w_s for each s in s_list.

    Returns the run at the largest s; its certificate is the sup distance to
    the previous run over [N, keep] (keep defaults to half the first s).
    Raises when X_{n,s} decreases in s by more than ``monotone_tol``.
    """
    s_list = [int(s) for s in s_list]
    if not s_list or any(b <= a for a, b in zip(s_list, s_list[1:])) or s_list[0] <= N:
        raise ParameterError("s_list must be strictly increasing with every s > N")
    keep = max(N, (N + s_list[0]) // 2) if keep is None else int(keep)
    if keep > s_list[0]:
        raise ParameterError("keep must not exceed the first s")
    betas = beta_range(family, lam, N + 1, s_list[-1])
    _, ws = bounds.offsets("minus")
    runs = []
    for s in s_list:
        b_s = betas[s - N - 1]
        if not b_s < 0:
            raise NumericalError(f"beta_s >= 0 at s={s}")
        top = -np.sqrt(-b_s) + ws / s
        runs.append(BackwardRun(s, iterate_backward(top, betas[: s - N])))
    worst_drop, cert = 0.0, None
    for a, b in zip(runs, runs[1:]):
        d = b.values[: a.values.size] - a.values
        worst_drop = max(worst_drop, float(-d.min()))
        cert = float(np.abs(d[: keep - N + 1]).max())
    if worst_drop > monotone_tol:
        raise NumericalError(f"backward limit not monotone in s: drop {worst_drop:.3g}")
    last = runs[-1]
    return RiccatiSolution(
        N,
        last.values,
        "minus",
        lam,
        family,
        certificate=cert,
        info={"s_list": s_list, "keep": keep, "monotone_drop": worst_drop},
    )


def backward_limit(
    family: JacobiFamily,
    lam: float,
    bounds: BoundParams,
    N: int,
    keep: int,
    tol: float = 1e-10,
    s_cap: int = 1_000_000,
    s0: int | None = None,
) -> RiccatiSolution:
    """Grow s as N + 2 (s - N) until consecutive runs agree to ``tol`` on [N, keep].

    The result is truncated to [N, keep] and carries the final certificate and
    the list of s used; monotonicity in s is checked across the whole list.
    """
    if keep < N:
        raise ParameterError("keep must be >= N")
    s = max(2 * keep - N, keep + 64) if s0 is None else int(s0)
    if s > s_cap:
        raise CapExceededError(f"initial s={s} exceeds cap {s_cap}")
    s_list = [s]
    s = N + 2 * (s - N)
    while True:
        if s > s_cap:
            raise CapExceededError(f"backward limit did not converge to {tol} before s cap {s_cap}")
        s_list.append(s)
        sol = decaying_riccati(family, lam, bounds, s_list[-2:], N, keep=keep)
        if sol.certificate < tol:
            break
        s = N + 2 * (s - N)
    # monotonicity across every s used, not just the final pair
    full = decaying_riccati(family, lam, bounds, s_list, N, keep=keep) if len(s_list) > 2 else sol
    vals = full.values[: keep - N + 1]
    info = dict(full.info, s_list=s_list)
    return RiccatiSolution(N, vals, "minus", lam, family, certificate=sol.certificate, info=info)
