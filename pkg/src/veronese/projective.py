"""Points of the real projective line and Moebius maps acting on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

INFINITY = math.inf


@dataclass(frozen=True)
class ProjParam:
    """A point ``(s:t)`` of RP^1, normalized so ``max(|s|, |t|) == 1`` and the
    first nonzero coordinate is positive.  The affine coordinate is ``t/s``."""

    s: float
    t: float

    def __post_init__(self):
        s, t = float(self.s), float(self.t)
        if not (math.isfinite(s) and math.isfinite(t)) or (s == 0.0 and t == 0.0):
            raise ValueError("(s:t) must be finite and not both zero")
        m = max(abs(s), abs(t))
        s, t = s / m, t / m
        if s < 0 or (s == 0.0 and t < 0):
            s, t = -s, -t
        object.__setattr__(self, "s", s + 0.0)
        object.__setattr__(self, "t", t + 0.0)

    @classmethod
    def affine(cls, t: float) -> "ProjParam":
        if math.isinf(t):
            return cls(0.0, 1.0)
        return cls(1.0, t)

    @classmethod
    def infinity(cls) -> "ProjParam":
        return cls(0.0, 1.0)

    @property
    def is_infinite(self) -> bool:
        return self.s == 0.0

    @property
    def value(self) -> float:
        """Affine coordinate ``t/s``; :data:`INFINITY` when ``s == 0``."""
        return INFINITY if self.s == 0.0 else self.t / self.s

    def isclose(self, other: "ProjParam", tol: float = 1e-12) -> bool:
        return abs(self.s * other.t - self.t * other.s) <= tol

    def __repr__(self):
        return f"ProjParam({self.s!r}:{self.t!r})"


ParamLike = Union[float, int, ProjParam]


def as_param(t: ParamLike) -> ProjParam:
    return t if isinstance(t, ProjParam) else ProjParam.affine(float(t))


def affine_value(t: ParamLike) -> float:
    return t.value if isinstance(t, ProjParam) else float(t)


@dataclass(frozen=True)
class MoebiusMap:
    """``t -> (a t + b) / (c t + d)`` with ``ad - bc != 0``."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0

    def __post_init__(self):
        if self.det == 0.0:
            raise ValueError("degenerate Moebius map: ad - bc == 0")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __call__(self, t: ParamLike):
        """Maps floats to floats (``inf`` allowed) and ProjParams to ProjParams."""
        if isinstance(t, ProjParam):
            return ProjParam(self.c * t.t + self.d * t.s, self.a * t.t + self.b * t.s)
        t = float(t)
        if math.isinf(t):
            return INFINITY if self.c == 0.0 else self.a / self.c
        den = self.c * t + self.d
        if den == 0.0:
            return INFINITY
        return (self.a * t + self.b) / den

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        """Composition: ``(self @ other)(t) == self(other(t))``."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def derivative(self, t: float) -> float:
        return self.det / (self.c * t + self.d) ** 2

    def second_derivative(self, t: float) -> float:
        return -2.0 * self.c * self.det / (self.c * t + self.d) ** 3

    @property
    def is_identity(self) -> bool:
        return self.b == 0.0 and self.c == 0.0 and self.a == self.d


IDENTITY = MoebiusMap()
