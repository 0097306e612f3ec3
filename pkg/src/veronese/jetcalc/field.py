"""Scalar fields on coordinate rectangles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import OutOfDomainError
from .expression import Expression, parse_expression
from .jets import Jet


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def contains(self, x: float, y: float, slack: float = 1e-12) -> bool:
        sx, sy = slack * self.width, slack * self.height
        return (self.x_min - sx <= x <= self.x_max + sx) and (self.y_min - sy <= y <= self.y_max + sy)

    def require(self, x: float, y: float) -> None:
        if not self.contains(x, y):
            raise OutOfDomainError(f"point ({x!r}, {y!r}) outside {self}")

    def grid(self, n: int, margin: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """Uniform ``n`` x ``n`` grid; ``margin`` is a fraction of each side."""
        mx, my = margin * self.width, margin * self.height
        xs = np.linspace(self.x_min + mx, self.x_max - mx, n)
        ys = np.linspace(self.y_min + my, self.y_max - my, n)
        return xs, ys

    def inner(self, margin: float) -> "Rect":
        mx, my = margin * self.width, margin * self.height
        return Rect(self.x_min + mx, self.x_max - mx, self.y_min + my, self.y_max - my)


UNIT_SQUARE = Rect(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class ScalarField:
    """A function of ``(x, y)`` given by an expression, restricted to a rectangle."""

    expression: Expression
    domain: Rect = UNIT_SQUARE

    def __post_init__(self):
        if len(self.expression.variables) != 2:
            raise ValueError("a scalar field needs an expression in exactly two variables")

    @classmethod
    def parse(cls, text: str, domain: Rect = UNIT_SQUARE, variables=("x", "y")) -> "ScalarField":
        return cls(parse_expression(text, variables), domain)

    def value(self, x: float, y: float) -> float:
        self.domain.require(x, y)
        return self.expression.evaluate(x, y)

    def jet(self, x: float, y: float, order: int = 3) -> Jet:
        self.domain.require(x, y)
        return self.expression.jet((x, y), order)


def eval_jet(field: ScalarField, point) -> Jet:
    """Order-3 jet of ``field`` at ``point``: value and all partials up to third order."""
    return field.jet(float(point[0]), float(point[1]), 3)
