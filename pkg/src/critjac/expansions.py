"""Truncated large-n expansions of F_n, G_n, beta_n and their building blocks.

Every expansion is a finite sum of psi_k(lambda) n^{-s_k} together with the
order r of the neglected remainder. The coefficients are the closed forms
for the critical boundary |c1 - c2| = 1 and 1/3 < alpha < 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError
from .family import ALPHA_RANGE, JacobiFamily

Psi = Callable[[float], float]

# log-spaced abscissae 10^3, 10^3.5, ..., 10^6 for residual slope fits
SLOPE_GRID = np.round(10.0 ** np.arange(3.0, 6.01, 0.5)).astype(np.int64)


@dataclass(frozen=True)
class AsymptoticExpansion:
    terms: tuple[tuple[Psi, float], ...]
    remainder_order: float
    name: str = ""

    def __post_init__(self):
        ordered = tuple(sorted(self.terms, key=lambda t: t[1]))
        object.__setattr__(self, "terms", ordered)
        s = [t[1] for t in ordered]
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ParameterError(f"exponents must be distinct, got {s}")
        if s and s[-1] > self.remainder_order:
            raise ParameterError("remainder order below the last retained exponent")

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(t[1] for t in self.terms)

    def coefficients(self, lam: float) -> tuple[float, ...]:
        return tuple(psi(lam) for psi, _ in self.terms)

    def __call__(self, lam: float, n):
        n = np.asarray(n, dtype=float)
        out = sum(psi(lam) * n ** (-s) for psi, s in self.terms)
        out = np.broadcast_to(out, n.shape) if np.ndim(out) < n.ndim else out
        return float(out) if np.ndim(out) == 0 else np.asarray(out)


def _require(family: JacobiFamily) -> None:
    family.require_critical("the asymptotic expansions")
    if not ALPHA_RANGE[0] < family.alpha < ALPHA_RANGE[1]:
        raise ParameterError("the expansions are derived only for 1/3 < alpha < 1/2")


def _const(c: float) -> Psi:
    return lambda lam: c


def F_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    _require(family)
    a, cc = family.alpha, family.cc
    return AsymptoticExpansion(
        (
            (_const(2.0), 0.0),
            (lambda lam: 2.0 ** (1 - a) * lam / cc, a),
            (lambda lam: -(2.0 ** (-2 * a)) * lam ** 2 / cc, 2 * a),
            (_const(-a * (1 + 1 / (2 * cc))), 1.0),
        ),
        1 + a,
        "F",
    )


def G_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    _require(family)
    a = family.alpha
    return AsymptoticExpansion(((_const(1.0), 0.0), (_const(-a), 1.0)), 1 + a, "G")


def gamma_coefficients(family: JacobiFamily, lam: float) -> tuple[float, float, float, float]:
    """Coefficients of 4/(F_n F_{n-1}) = 1 + g1 n^-a + g2 n^-2a + g3 n^-1 + g4 n^-3a + ..."""
    _require(family)
    a, cc = family.alpha, family.cc
    g1 = -(2.0 ** (1 - a)) * lam / cc
    g2 = 2.0 ** (-2 * a) * (3 / cc + 1) * lam ** 2 / cc
    g3 = a * (1 + 1 / (2 * cc))
    g4 = -(2.0 ** (-3 * a)) * (3 + 4 / cc) * lam ** 3 / cc ** 2
    return g1, g2, g3, g4


def FF_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    """F_n F_{n-1}."""
    _require(family)
    a, cc = family.alpha, family.cc
    return AsymptoticExpansion(
        (
            (_const(4.0), 0.0),
            (lambda lam: 2.0 ** (3 - a) * lam / cc, a),
            (lambda lam: 2.0 ** (2 - 2 * a) / cc * (1 / cc - 1) * lam ** 2, 2 * a),
            (_const(-4 * a * (1 + 1 / (2 * cc))), 1.0),
            (lambda lam: -(2.0 ** (2 - 3 * a)) * lam ** 3 / cc ** 2, 3 * a),
        ),
        1 + a,
        "FF",
    )


def inverse_FF_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    """4 / (F_n F_{n-1}) built from the gamma coefficients."""
    _require(family)
    a = family.alpha
    return AsymptoticExpansion(
        (
            (_const(1.0), 0.0),
            (lambda lam: gamma_coefficients(family, lam)[0], a),
            (lambda lam: gamma_coefficients(family, lam)[1], 2 * a),
            (lambda lam: gamma_coefficients(family, lam)[2], 1.0),
            (lambda lam: gamma_coefficients(family, lam)[3], 3 * a),
        ),
        1 + a,
        "4/FF",
    )


def beta_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    _require(family)
    a, cc = family.alpha, family.cc
    return AsymptoticExpansion(
        (
            (lambda lam: -(2.0 ** (1 - a)) / cc * lam, a),
            (lambda lam: 2.0 ** (-2 * a) / cc * (3 / cc + 1) * lam ** 2, 2 * a),
            (_const(a / (2 * cc)), 1.0),
            (lambda lam: -(2.0 ** (-3 * a)) / cc ** 2 * (3 + 4 / cc) * lam ** 3, 3 * a),
        ),
        1 + a,
        "beta",
    )


def A_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    a = family.alpha
    return AsymptoticExpansion(((_const(1.0), 0.0), (_const(-a / 2), 1.0)), 1 + a, "A")


def B_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    a = family.alpha
    return AsymptoticExpansion(
        (
            (_const(1.0), 0.0),
            (lambda lam: -2 * lam * 2.0 ** (-a), a),
            (lambda lam: lam ** 2 * 2.0 ** (-2 * a), 2 * a),
        ),
        1 + a,
        "B",
    )


def C_expansion(family: JacobiFamily) -> AsymptoticExpansion:
    a = family.alpha
    return AsymptoticExpansion(((_const(1.0), 0.0), (_const(-a / 2), 1.0)), 2.0, "C")


def loglog_slope(n: Sequence[float], residual: Sequence[float]) -> float:
    """Least-squares slope of log|residual| against log n."""
    n = np.asarray(n, dtype=float)
    r = np.abs(np.asarray(residual, dtype=float))
    if np.any(r == 0):
        raise ParameterError("residual vanishes at a fit point; slope undefined")
    return float(np.polyfit(np.log(n), np.log(r), 1)[0])


def residual_slope(
    exact: Callable[[float, np.ndarray], np.ndarray],
    expansion: AsymptoticExpansion,
    lam: float,
    n_grid: Sequence[int] = SLOPE_GRID,
) -> float:
    n = np.asarray(n_grid)
    return loglog_slope(n, exact(lam, n) - expansion(lam, n))
