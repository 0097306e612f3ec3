"""Truncated multivariate Taylor arithmetic.

A jet of order ``N`` in ``n`` variables is the Taylor polynomial of a function
at a point, truncated at total degree ``N``.  Coefficients are stored once per
monomial (graded order), so mixed partials are symmetric by construction.  The
product of two jets is the truncated Cauchy product, which is the Leibniz rule
with no error below the truncation order.

The hot kernels (``add``, ``mul``, ...) are generated as straight-line Python
per ``(nvars, order)`` and operate on plain tuples of floats; :class:`Jet` is
the user-facing wrapper.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

from ..errors import SingularityError

Coeffs = tuple


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def _gen(name: str, args: str, body: list[str]):
    src = f"def {name}({args}):\n" + "\n".join("    " + line for line in body)
    env: dict = {}
    exec(src, env)
    return env[name]


class JetAlgebra:
    """Kernels for jets with ``nvars`` variables truncated at ``order``."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError("need nvars >= 1 and order >= 0")
        self.nvars = nvars
        self.order = order
        mons = []
        for deg in range(order + 1):
            mons.extend(_compositions(deg, nvars))
        self.monomials = tuple(mons)
        self.index = {m: i for i, m in enumerate(mons)}
        self.size = len(mons)
        self.factorials = tuple(math.prod(math.factorial(k) for k in m) for m in mons)
        n = self.size
        unpack_a = ", ".join(f"a{i}" for i in range(n)) + ("," if n == 1 else "")
        unpack_b = ", ".join(f"b{i}" for i in range(n)) + ("," if n == 1 else "")

        terms: list[list[str]] = [[] for _ in range(n)]
        for i, mi in enumerate(mons):
            for j, mj in enumerate(mons):
                k = self.index.get(tuple(p + q for p, q in zip(mi, mj)))
                if k is not None:
                    terms[k].append(f"a{i}*b{j}")
        self.mul = _gen(
            "mul", "a, b",
            [f"{unpack_a} = a", f"{unpack_b} = b",
             "return (" + ", ".join("+".join(t) for t in terms) + ",)"],
        )
        self.add = _gen("add", "a, b", [
            f"{unpack_a} = a", f"{unpack_b} = b",
            "return (" + ", ".join(f"a{i}+b{i}" for i in range(n)) + ",)"])
        self.sub = _gen("sub", "a, b", [
            f"{unpack_a} = a", f"{unpack_b} = b",
            "return (" + ", ".join(f"a{i}-b{i}" for i in range(n)) + ",)"])
        self.neg = _gen("neg", "a", [
            f"{unpack_a} = a", "return (" + ", ".join(f"-a{i}" for i in range(n)) + ",)"])
        self.scale = _gen("scale", "k, a", [
            f"{unpack_a} = a", "return (" + ", ".join(f"k*a{i}" for i in range(n)) + ",)"])
        self.zero = (0.0,) * n
        self.one = (1.0,) + (0.0,) * (n - 1)

    def __repr__(self):
        return f"JetAlgebra(nvars={self.nvars}, order={self.order})"

    # construction -----------------------------------------------------
    def const(self, value: float) -> Coeffs:
        return (float(value),) + (0.0,) * (self.size - 1)

    def variable(self, i: int, value: float) -> Coeffs:
        c = [0.0] * self.size
        c[0] = float(value)
        if self.order >= 1:
            e = [0] * self.nvars
            e[i] = 1
            c[self.index[tuple(e)]] = 1.0
        return tuple(c)

    def seed(self, point: Sequence[float]) -> list[Coeffs]:
        return [self.variable(i, v) for i, v in enumerate(point)]

    def shift(self, a: Coeffs, k: float) -> Coeffs:
        return (a[0] + k,) + tuple(a[1:])

    # composition with univariate series ---------------------------------
    def compose(self, series: Sequence[float], a: Coeffs) -> Coeffs:
        """Evaluate ``sum_k series[k] * (a - a0)**k`` by Horner's rule."""
        h = (0.0,) + tuple(a[1:])
        r = self.const(series[self.order])
        for k in range(self.order - 1, -1, -1):
            r = self.mul(r, h)
            r = (r[0] + series[k],) + r[1:]
        return r

    def recip(self, a: Coeffs) -> Coeffs:
        a0 = a[0]
        if a0 == 0.0:
            raise SingularityError("division by zero")
        inv = 1.0 / a0
        s, term = [], inv
        for _ in range(self.order + 1):
            s.append(term)
            term = -term * inv
        return self.compose(s, a)

    def div(self, a: Coeffs, b: Coeffs) -> Coeffs:
        return self.mul(a, self.recip(b))

    def exp(self, a: Coeffs) -> Coeffs:
        return self.compose(exp_series(a[0], self.order), a)

    def log(self, a: Coeffs) -> Coeffs:
        return self.compose(log_series(a[0], self.order), a)

    def sin(self, a: Coeffs) -> Coeffs:
        return self.compose(sin_series(a[0], self.order), a)

    def cos(self, a: Coeffs) -> Coeffs:
        return self.compose(cos_series(a[0], self.order), a)

    def sqrt(self, a: Coeffs) -> Coeffs:
        return self.pow(a, 0.5)

    def ipow(self, a: Coeffs, n: int) -> Coeffs:
        if n < 0:
            return self.recip(self.ipow(a, -n))
        result, base = self.one, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def pow(self, a: Coeffs, q: float) -> Coeffs:
        if float(q).is_integer() and abs(q) <= 64:
            return self.ipow(a, int(q))
        return self.compose(pow_series(a[0], q, self.order), a)

    # calculus -----------------------------------------------------------
    def partial(self, a: Coeffs, alpha: tuple[int, ...]) -> float:
        i = self.index[tuple(alpha)]
        return a[i] * self.factorials[i]

    def derivative(self, a: Coeffs, var: int) -> Coeffs:
        """Jet of ``d a / d x_var``, one order lower."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        low = algebra(self.nvars, self.order - 1)
        out = []
        for m in low.monomials:
            up = list(m)
            up[var] += 1
            out.append((m[var] + 1) * a[self.index[tuple(up)]])
        return tuple(out)

    def truncate(self, a: Coeffs, order: int) -> Coeffs:
        low = algebra(self.nvars, order)
        return tuple(a[self.index[m]] for m in low.monomials)

    def compose_poly(self, poly: Coeffs, poly_alg: "JetAlgebra", inputs: Sequence[Coeffs]) -> Coeffs:
        """Substitute jets ``inputs`` into the Taylor polynomial ``poly``.

        ``poly`` is expanded about the constant terms of ``inputs``; only the
        increments ``inputs[i] - inputs[i][0]`` are raised to powers.
        """
        incs = [(0.0,) + tuple(x[1:]) for x in inputs]
        top = min(poly_alg.order, self.order)
        powers = []
        for h in incs:
            pw = [self.one]
            for _ in range(top):
                pw.append(self.mul(pw[-1], h))
            powers.append(pw)
        total = self.zero
        for c, m in zip(poly, poly_alg.monomials):
            if c == 0.0 or sum(m) > top:
                continue
            term = self.const(c)
            for i, k in enumerate(m):
                if k:
                    term = self.mul(term, powers[i][k])
            total = self.add(total, term)
        return total


@lru_cache(maxsize=None)
def algebra(nvars: int, order: int) -> JetAlgebra:
    return JetAlgebra(nvars, order)


# univariate Taylor series f^(k)(a0) / k! ---------------------------------

def exp_series(a0: float, n: int) -> list[float]:
    try:
        e = math.exp(a0)
    except OverflowError:
        raise SingularityError(f"exp overflow at {a0!r}") from None
    return [e / math.factorial(k) for k in range(n + 1)]


def log_series(a0: float, n: int) -> list[float]:
    if not a0 > 0.0:
        raise SingularityError(f"ln of non-positive value {a0!r}")
    return [math.log(a0)] + [(-1) ** (k + 1) / (k * a0 ** k) for k in range(1, n + 1)]


def sin_series(a0: float, n: int) -> list[float]:
    s, c = math.sin(a0), math.cos(a0)
    cyc = (s, c, -s, -c)
    return [cyc[k % 4] / math.factorial(k) for k in range(n + 1)]


def cos_series(a0: float, n: int) -> list[float]:
    s, c = math.sin(a0), math.cos(a0)
    cyc = (c, -s, -c, s)
    return [cyc[k % 4] / math.factorial(k) for k in range(n + 1)]


def pow_series(a0: float, q: float, n: int) -> list[float]:
    if a0 < 0.0 and not float(q).is_integer():
        raise SingularityError(f"non-integer power {q!r} of negative value {a0!r}")
    if a0 == 0.0:
        if q > 0 and n == 0:
            return [0.0]
        raise SingularityError(f"power {q!r} is singular at 0")
    out, binom = [], 1.0
    for k in range(n + 1):
        out.append(binom * a0 ** (q - k))
        binom *= (q - k) / (k + 1)
    return out


class Jet:
    """A truncated Taylor polynomial with operator overloading.

    ``coeffs`` are Taylor coefficients (``d^alpha f / alpha!``); use
    :meth:`partial` for derivatives.
    """

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: JetAlgebra, coeffs: Sequence[float]):
        if len(coeffs) != alg.size:
            raise ValueError(f"expected {alg.size} coefficients, got {len(coeffs)}")
        self.alg = alg
        self.coeffs = tuple(float(c) for c in coeffs)

    @classmethod
    def variables(cls, point: Sequence[float], order: int) -> list["Jet"]:
        alg = algebra(len(point), order)
        return [cls(alg, c) for c in alg.seed(point)]

    @property
    def order(self) -> int:
        return self.alg.order

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def partial(self, *alpha: int) -> float:
        """``partial(2, 1)`` is d^3/dx^2 dy for a two-variable jet."""
        return self.alg.partial(self.coeffs, alpha)

    def gradient(self) -> tuple[float, ...]:
        return tuple(self.partial(*e) for e in _unit_vectors(self.alg.nvars))

    def derivative(self, var: int) -> "Jet":
        low = algebra(self.alg.nvars, self.alg.order - 1)
        return Jet(low, self.alg.derivative(self.coeffs, var))

    def _lift(self, other) -> Coeffs:
        if isinstance(other, Jet):
            if other.alg is not self.alg:
                raise ValueError("jets from different algebras")
            return other.coeffs
        return self.alg.const(other)

    def _new(self, c) -> "Jet":
        j = Jet.__new__(Jet)
        j.alg, j.coeffs = self.alg, c
        return j

    def __add__(self, o):
        return self._new(self.alg.add(self.coeffs, self._lift(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return self._new(self.alg.sub(self.coeffs, self._lift(o)))

    def __rsub__(self, o):
        return self._new(self.alg.sub(self._lift(o), self.coeffs))

    def __mul__(self, o):
        return self._new(self.alg.mul(self.coeffs, self._lift(o)))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._new(self.alg.div(self.coeffs, self._lift(o)))

    def __rtruediv__(self, o):
        return self._new(self.alg.div(self._lift(o), self.coeffs))

    def __neg__(self):
        return self._new(self.alg.neg(self.coeffs))

    def __pow__(self, q):
        if isinstance(q, Jet):
            raise TypeError("exponent must be a constant")
        return self._new(self.alg.pow(self.coeffs, q))

    def exp(self):
        return self._new(self.alg.exp(self.coeffs))

    def log(self):
        return self._new(self.alg.log(self.coeffs))

    def sin(self):
        return self._new(self.alg.sin(self.coeffs))

    def cos(self):
        return self._new(self.alg.cos(self.coeffs))

    def sqrt(self):
        return self._new(self.alg.sqrt(self.coeffs))

    def __repr__(self):
        return f"Jet(order={self.order}, nvars={self.alg.nvars}, value={self.value!r})"


def _unit_vectors(n):
    return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
