"""Run configuration: defaults, flat key=value files and flag overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ParameterError
from .family import JacobiFamily, SpectralWindow
from .kelley import BoundParams

FORMATS = ("csv", "json")
SOLVE_KINDS = ("first-kind", "forward", "backward")


@dataclass(frozen=True)
class RunConfig:
    c1: float = 2.0
    c2: float = 1.0
    alpha: float = 0.4
    lo: float = 1.0
    hi: float = 2.0
    grid: int = 9
    A_plus: float | None = None
    A_minus: float | None = None
    B_minus: float | None = None
    B_plus: float | None = None
    N: int | None = None
    s_cap: int = 1_000_000
    K: int = 4000
    n_max: int = 100_000
    step: float = 0.01
    valid_from_max: int = 10_000
    lam: float = 1.0
    kind: str = "first-kind"
    f1: float = 1.0
    f2: float = 0.0
    format: str = "csv"
    out: str | None = None

    # -------------------------------------------------------------- validation
    def validate(self) -> "RunConfig":
        self.family()
        self.window()
        self.bounds()
        if self.grid < 1:
            raise ParameterError("grid must be >= 1")
        if self.K < 2:
            raise ParameterError("K must be >= 2")
        if self.n_max < 3:
            raise ParameterError("n_max must be >= 3")
        if self.s_cap < 1:
            raise ParameterError("s_cap must be positive")
        if self.N is not None and self.N < 1:
            raise ParameterError("N must be >= 1")
        if not self.step > 0:
            raise ParameterError("step must be positive")
        if self.format not in FORMATS:
            raise ParameterError(f"format must be one of {FORMATS}")
        if self.kind not in SOLVE_KINDS:
            raise ParameterError(f"kind must be one of {SOLVE_KINDS}")
        return self

    def family(self) -> JacobiFamily:
        return JacobiFamily(self.c1, self.c2, self.alpha)

    def window(self) -> SpectralWindow:
        return SpectralWindow(self.lo, self.hi)

    def bounds(self) -> BoundParams:
        d = BoundParams.default(self.alpha)
        pick = lambda v, default: default if v is None else v
        return BoundParams(
            d.p,
            pick(self.A_plus, d.A_plus),
            pick(self.A_minus, d.A_minus),
            pick(self.B_minus, d.B_minus),
            pick(self.B_plus, d.B_plus),
        )

    # -------------------------------------------------------------- (de)serialisation
    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_text(self) -> str:
        lines = []
        for k, v in self.as_dict().items():
            lines.append(f"{k} = {'' if v is None else _fmt(v)}")
        return "\n".join(lines) + "\n"

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Copy with every non-None override applied (after type coercion)."""
        known = {f.name for f in fields(self)}
        clean = {}
        for k, v in overrides.items():
            key = _canon(k)
            if key not in known:
                raise ParameterError(f"unknown configuration key {k!r}")
            if v is not None:
                clean[key] = _coerce(key, v)
        return dataclasses.replace(self, **clean)

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        base = base or cls()
        values: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"line {lineno}: expected key = value, got {raw!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            key = _canon(k)
            if key not in _TYPES:
                raise ParameterError(f"line {lineno}: unknown key {k!r}")
            values[key] = None if v == "" else _coerce(key, v)
        return dataclasses.replace(base, **values)

    @classmethod
    def from_file(cls, path: str | Path, base: "RunConfig | None" = None) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ParameterError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text, base)


_TYPES = {
    "c1": float, "c2": float, "alpha": float, "lo": float, "hi": float, "grid": int,
    "A_plus": float, "A_minus": float, "B_minus": float, "B_plus": float,
    "N": int, "s_cap": int, "K": int, "n_max": int, "step": float, "valid_from_max": int,
    "lam": float, "kind": str, "f1": float, "f2": float, "format": str, "out": str,
}


def _canon(key: str) -> str:
    key = key.strip().replace("-", "_")
    for k in _TYPES:
        if k.lower() == key.lower():
            return k
    return key


def _coerce(key: str, value: Any) -> Any:
    typ = _TYPES[key]
    if isinstance(value, typ) and not isinstance(value, bool):
        return value
    try:
        if typ is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return typ(value)
    except (TypeError, ValueError, OverflowError) as exc:
        raise ParameterError(f"{key}: cannot read {value!r} as {typ.__name__}") from exc


def _fmt(v: Any) -> str:
    return repr(v) if isinstance(v, float) else str(v)  # shortest round-trip form
