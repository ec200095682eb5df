"""Overflow-safe sequences for stretched-exponentially growing solutions.

Each term is held as ``mantissa * 2**exponent`` with the mantissa in
[0.5, 1) (or exactly zero). Rescaling by powers of two is exact, so
consecutive ratios and residuals are as accurate as plain float arithmetic,
while the public view is the pair (sign, natural-log magnitude).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError

LN2 = math.log(2.0)
NEG_INF = float("-inf")


@dataclass(frozen=True)
class SignedLogValue:
    sign: int
    logmag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ParameterError(f"sign must be -1, 0 or +1, got {self.sign}")
        if (self.sign == 0) != (self.logmag == NEG_INF):
            raise ParameterError("sign is 0 exactly when logmag is -inf")

    @classmethod
    def from_float(cls, x: float) -> "SignedLogValue":
        if x == 0:
            return cls(0, NEG_INF)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.logmag)


def split_float(x: float, e: int = 0) -> tuple[float, int]:
    """Normalise ``x * 2**e`` into (mantissa, exponent)."""
    if x == 0.0:
        return 0.0, 0
    m, k = math.frexp(x)
    return m, k + e


def _from_signed_log(sign: int, logmag: float) -> tuple[float, int]:
    if sign == 0:
        return 0.0, 0
    e = math.floor(logmag / LN2)
    return split_float(sign * math.exp(logmag - e * LN2), e)


class SignedLogSeq:
    """Contiguous sequence f_start, f_start+1, ..., f_stop."""

    __slots__ = ("start_index", "_mant", "_exp")

    def __init__(self, start_index: int, mantissas, exponents):
        mant = np.asarray(mantissas, dtype=float)
        exp = np.asarray(exponents, dtype=np.int64)
        if mant.shape != exp.shape or mant.ndim != 1:
            raise ParameterError("mantissas and exponents must be 1-d arrays of equal length")
        if int(start_index) < 1:
            raise ParameterError("start_index must be >= 1")
        if mant.size < 2:
            raise ParameterError("a solution needs at least two consecutive values")
        if not np.all(np.isfinite(mant)):
            raise ParameterError("mantissas must be finite")
        # renormalise so that equal values have one representation
        m, k = np.frexp(mant)
        exp = np.where(m == 0, 0, exp + k.astype(np.int64))
        self.start_index = int(start_index)
        self._mant = m
        self._exp = exp
        self._mant.setflags(write=False)
        self._exp.setflags(write=False)

    # construction -------------------------------------------------------
    @classmethod
    def from_floats(cls, values: Sequence[float], start_index: int = 1) -> "SignedLogSeq":
        values = np.asarray(values, dtype=float)
        return cls(start_index, values, np.zeros(values.shape, dtype=np.int64))

    @classmethod
    def from_signed_log(cls, signs: Iterable[int], logmags: Iterable[float], start_index: int = 1) -> "SignedLogSeq":
        pairs = [_from_signed_log(int(s), float(l)) for s, l in zip(signs, logmags)]
        for s, l in zip(signs, logmags):
            SignedLogValue(int(s), float(l))  # validates the sentinel convention
        mant = [p[0] for p in pairs]
        exp = [p[1] for p in pairs]
        return cls(start_index, mant, exp)

    @classmethod
    def from_values(cls, values: Iterable[SignedLogValue], start_index: int = 1) -> "SignedLogSeq":
        values = list(values)
        return cls.from_signed_log([v.sign for v in values], [v.logmag for v in values], start_index)

    # views --------------------------------------------------------------
    def __len__(self) -> int:
        return self._mant.size

    @property
    def stop_index(self) -> int:
        """Last index, inclusive."""
        return self.start_index + self._mant.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start_index, self.stop_index + 1)

    @property
    def mantissas(self) -> np.ndarray:
        return self._mant

    @property
    def exponents(self) -> np.ndarray:
        return self._exp

    @property
    def sign(self) -> np.ndarray:
        return np.sign(self._mant).astype(np.int8)

    @property
    def logmag(self) -> np.ndarray:
        out = np.full(self._mant.shape, NEG_INF)
        nz = self._mant != 0
        out[nz] = np.log(np.abs(self._mant[nz])) + self._exp[nz] * LN2
        return out

    @property
    def values(self) -> list[SignedLogValue]:
        return [SignedLogValue(int(s), float(l)) for s, l in zip(self.sign, self.logmag)]

    def _pos(self, n: int) -> int:
        if not self.start_index <= n <= self.stop_index:
            raise IndexError(f"index {n} outside [{self.start_index}, {self.stop_index}]")
        return n - self.start_index

    def value(self, n: int) -> SignedLogValue:
        i = self._pos(n)
        return SignedLogValue(int(np.sign(self._mant[i])), float(self.logmag[i]))

    def pair(self, n: int) -> tuple[float, int]:
        """(mantissa, exponent) of f_n."""
        i = self._pos(n)
        return float(self._mant[i]), int(self._exp[i])

    def __iter__(self):
        return iter(self.values)

    def __repr__(self):
        return f"SignedLogSeq(start_index={self.start_index}, length={len(self)})"

    def to_floats(self) -> np.ndarray:
        """Plain float values; entries beyond the double range become +-inf or 0."""
        with np.errstate(over="ignore", under="ignore"):
            e = np.clip(self._exp, -2000, 2000).astype(np.int32)
            return np.ldexp(self._mant, e)

    def relative_to(self, n: int) -> np.ndarray:
        """All values divided by |f_n|'s binary scale (safe when nearby)."""
        i = self._pos(n)
        e = np.clip(self._exp - self._exp[i], -2000, 2000).astype(np.int32)
        with np.errstate(over="ignore", under="ignore"):
            return np.ldexp(self._mant, e)

    def ratios(self) -> np.ndarray:
        """Exact consecutive ratios f_{k+1} / f_k for k = start .. stop-1."""
        m0, m1 = self._mant[:-1], self._mant[1:]
        de = np.clip(self._exp[1:] - self._exp[:-1], -2000, 2000).astype(np.int32)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            return np.ldexp(m1 / m0, de)

    def aligned(self, offsets: Sequence[int]) -> tuple[tuple[np.ndarray, ...], np.ndarray]:
        """Values at shifted positions brought to a common binary exponent.

        For offsets (o_0, ..., o_r) returns ``(arrays, top)`` with
        arrays[j][k] * 2**top[k] = f_{start + k + o_j + lo}, lo = -min(offsets),
        and top[k] the largest exponent among the r + 1 entries. Positions k
        run over every place where all shifted indices exist.
        """
        lo = -min(offsets)
        hi = len(self) - max(offsets)
        if hi <= lo:
            return tuple(np.empty(0) for _ in offsets), np.empty(0, dtype=np.int64)
        floor = np.iinfo(np.int64).min // 2
        mants = [self._mant[lo + o:hi + o] for o in offsets]
        exps = [np.where(m == 0, floor, self._exp[lo + o:hi + o]) for m, o in zip(mants, offsets)]
        top = np.maximum.reduce(exps)
        top = np.where(top == floor, 0, top)
        out = []
        for m, e in zip(mants, exps):
            shift = np.clip(e - top, -2000, 0).astype(np.int32)
            with np.errstate(under="ignore"):
                out.append(np.ldexp(m, shift))
        return tuple(out), top

    # transformations ----------------------------------------------------
    def slice(self, lo: int, hi: int) -> "SignedLogSeq":
        """Sub-sequence f_lo .. f_hi inclusive."""
        i, j = self._pos(lo), self._pos(hi)
        return SignedLogSeq(lo, self._mant[i:j + 1], self._exp[i:j + 1])

    def scaled(self, mantissa: float, exponent: int = 0) -> "SignedLogSeq":
        """Multiply every term by ``mantissa * 2**exponent``."""
        return SignedLogSeq(self.start_index, self._mant * mantissa, self._exp + exponent)

    def normalized(self, n: int) -> "SignedLogSeq":
        """Divide by f_n so that the n-th term becomes exactly 1."""
        m, e = self.pair(n)
        if m == 0:
            raise ZeroDivisionError(f"f_{n} is zero")
        return SignedLogSeq(self.start_index, self._mant / m, self._exp - e)

    def concat(self, other: "SignedLogSeq") -> "SignedLogSeq":
        """Join ``other`` after self, dropping the overlap (which must agree)."""
        if other.start_index > self.stop_index + 1:
            raise ParameterError("sequences are not contiguous")
        if other.start_index <= self.start_index:
            raise ParameterError("other must start after self")
        keep = other.start_index - self.start_index
        return SignedLogSeq(
            self.start_index,
            np.concatenate([self._mant[:keep], other._mant]),
            np.concatenate([self._exp[:keep], other._exp]),
        )

    def every_other(self, first: int, start_index: int) -> "SignedLogSeq":
        """Terms f_first, f_first+2, ... relabelled to begin at ``start_index``."""
        i = self._pos(first)
        return SignedLogSeq(start_index, self._mant[i::2], self._exp[i::2])

    def with_start(self, start_index: int) -> "SignedLogSeq":
        return SignedLogSeq(start_index, self._mant, self._exp)

    def is_zero(self) -> bool:
        return bool(np.all(self._mant == 0))


class Accumulator:
    """Append-only builder for :class:`SignedLogSeq` (plain lists, no numpy)."""

    __slots__ = ("start_index", "mant", "exp")

    def __init__(self, start_index: int):
        self.start_index = start_index
        self.mant: list[float] = []
        self.exp: list[int] = []

    def push(self, x: float, e: int) -> None:
        if x == 0.0:
            self.mant.append(0.0)
            self.exp.append(0)
        else:
            m, k = math.frexp(x)
            self.mant.append(m)
            self.exp.append(k + e)

    def build(self) -> SignedLogSeq:
        return SignedLogSeq(self.start_index, self.mant, self.exp)

    def reversed_build(self, start_index: int) -> SignedLogSeq:
        return SignedLogSeq(start_index, self.mant[::-1], self.exp[::-1])
