"""Exact multivariate Laurent polynomials with rational coefficients.

Polynomials are immutable maps ``exponent tuple -> coefficient``.  Coefficients
are Python ``int`` or :class:`fractions.Fraction` (integral fractions are
stored as ``int``, which keeps the common integer case fast); a float mirror is
available through :meth:`LaurentPoly.to_float` and :func:`evaluate_many`.

Scalars that are powers of ``q`` are handled through :class:`BaseParam`, which
fixes a rational base ``r`` with ``q = r**4`` so that every ``q**(k/4)`` is an
exact integer power of ``r``.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]

__all__ = [
    "BaseParam",
    "LaurentPoly",
    "NotDivisible",
    "VariableMismatch",
    "as_rational",
    "exact_div",
    "evaluate_many",
    "format_rational",
    "parse_rational",
]


class NotDivisible(ArithmeticError):
    """Raised when an exact polynomial quotient does not exist."""


class VariableMismatch(ValueError):
    """Raised when combining polynomials over different variable counts."""


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        if a % b == 0:
            return a // b
        return Fraction(a, b)
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    return _norm(Fraction(a) / Fraction(b))


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, (int, Fraction)) or isinstance(value, Rational):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def format_rational(value) -> str:
    """Serialize an exact rational as ``"num/den"`` (denominator always shown)."""
    v = Fraction(value)
    return f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class BaseParam:
    """The deformation parameter, stored as ``r`` with ``q = r**4``.

    ``0 < r <= 1``.  ``r == 1`` is the classical (undeformed) point; it is
    allowed so that ``q -> 1`` degenerations can be computed exactly.
    """

    r: Fraction
    _powers: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        r = as_rational(self.r)
        if not (0 < r <= 1):
            raise ValueError(f"base parameter must satisfy 0 < r <= 1, got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def parse(cls, text) -> "BaseParam":
        return cls(as_rational(text))

    @property
    def q(self) -> Fraction:
        return self.r**4

    @property
    def classical(self) -> bool:
        return self.r == 1

    def power(self, k: int) -> Fraction:
        """Exact ``r**k``."""
        v = self._powers.get(k)
        if v is None:
            v = self.r**k
            self._powers[k] = v
        return v

    def q_power(self, c) -> Fraction:
        """Exact ``q**c`` for ``c`` a multiple of 1/4."""
        k = 4 * Fraction(c)
        if k.denominator != 1:
            raise ValueError(f"q**{c} is not an integer power of r")
        return self.power(int(k))

    def __str__(self) -> str:
        return format_rational(self.r)


class LaurentPoly:
    """Immutable multivariate Laurent polynomial.

    Terms are kept sorted lexicographically by exponent, so iteration order
    and serialization are deterministic.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | Iterable = (), *, _trusted=False):
        if nvars < 0:
            raise ValueError("variable count must be nonnegative")
        self.nvars = nvars
        if _trusted:
            self._terms = terms
        else:
            items = terms.items() if isinstance(terms, Mapping) else terms
            acc: dict[Exponent, object] = {}
            for e, c in items:
                e = tuple(int(x) for x in e)
                if len(e) != nvars:
                    raise VariableMismatch(f"exponent {e} has wrong length for {nvars} variables")
                acc[e] = acc.get(e, 0) + c
            self._terms = {e: _norm(acc[e]) for e in sorted(acc) if acc[e] != 0}
        self._hash = None

    @classmethod
    def _from_dict(cls, nvars: int, d: dict) -> "LaurentPoly":
        return cls(nvars, {e: _norm(d[e]) for e in sorted(d) if d[e] != 0}, _trusted=True)

    # constructors

    @classmethod
    def zero(cls, nvars: int) -> "LaurentPoly":
        return cls(nvars, {}, _trusted=True)

    @classmethod
    def constant(cls, nvars: int, c=1) -> "LaurentPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exponent: Sequence[int], c=1) -> "LaurentPoly":
        e = tuple(exponent)
        return cls(len(e), {e: c})

    @classmethod
    def variable(cls, nvars: int, i: int, power: int = 1) -> "LaurentPoly":
        e = [0] * nvars
        e[i] = power
        return cls(nvars, {tuple(e): 1})

    # basic protocol

    def terms(self) -> Iterator[tuple[Exponent, object]]:
        return iter(self._terms.items())

    def as_dict(self) -> dict[Exponent, object]:
        return dict(self._terms)

    def coefficient(self, exponent: Sequence[int]):
        return self._terms.get(tuple(exponent), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction, float)):
            return self == LaurentPoly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return f"LaurentPoly({self.nvars}, 0)"
        parts = []
        for e, c in self._terms.items():
            mon = "*".join(f"t{i + 1}^{k}" for i, k in enumerate(e) if k)
            parts.append(f"{c}" + (f"*{mon}" if mon else ""))
        return f"LaurentPoly({self.nvars}, " + " + ".join(parts) + ")"

    # arithmetic

    def _check(self, other: "LaurentPoly"):
        if other.nvars != self.nvars:
            raise VariableMismatch(f"{self.nvars} vs {other.nvars} variables")

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, float)):
            return LaurentPoly.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = dict(self._terms)
        for e, c in other._terms.items():
            d[e] = d.get(e, 0) + c
        return LaurentPoly._from_dict(self.nvars, d)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.nvars, {e: -c for e, c in self._terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "LaurentPoly":
        if c == 0:
            return LaurentPoly.zero(self.nvars)
        return LaurentPoly(self.nvars, {e: _norm(v * c) for e, v in self._terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, float)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self) < len(other):
            a, b = self._terms, other._terms
        else:
            a, b = other._terms, self._terms
        d: dict[Exponent, object] = {}
        get = d.get
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                d[e] = get(e, 0) + ca * cb
        return LaurentPoly._from_dict(self.nvars, d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self._terms) != 1:
                raise ValueError("negative powers are only defined for monomials")
            (e, c), = self._terms.items()
            return LaurentPoly.monomial(tuple(n * k for k in e), _div(1, c) ** -n)
        out = LaurentPoly.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, LaurentPoly):
            return exact_div(self, other)
        return self.scale(_div(1, other))

    # structure

    def degree_bounds(self) -> tuple[list[int], list[int]]:
        """Per-variable (min, max) exponents.  Undefined for the zero polynomial."""
        if not self._terms:
            raise ValueError("zero polynomial has no degree bounds")
        es = list(self._terms)
        lo = [min(e[i] for e in es) for i in range(self.nvars)]
        hi = [max(e[i] for e in es) for i in range(self.nvars)]
        return lo, hi

    def leading_term(self) -> tuple[Exponent, object]:
        e = next(reversed(self._terms))
        return e, self._terms[e]

    def leading_dominant_term(self, prefix: int | None = None):
        """Lex-largest exponent in the dominant cone, with its coefficient.

        The dominant cone is the set of weakly decreasing nonnegative vectors.
        Only the first ``prefix`` coordinates are tested (all by default).
        Returns ``None`` when no monomial is dominant.
        """
        k = self.nvars if prefix is None else prefix
        for e in reversed(self._terms):
            if _is_dominant(e[:k]):
                return e, self._terms[e]
        return None

    def map_exponents(self, fn, nvars: int | None = None) -> "LaurentPoly":
        n = self.nvars if nvars is None else nvars
        d: dict[Exponent, object] = {}
        for e, c in self._terms.items():
            ne = tuple(fn(e))
            d[ne] = d.get(ne, 0) + c
        return LaurentPoly._from_dict(n, d)

    def permute(self, perm: Sequence[int]) -> "LaurentPoly":
        """Substitute ``t_i -> t_{perm[i]}``."""
        inv = [0] * self.nvars
        for i, p in enumerate(perm):
            inv[p] = i
        return self.map_exponents(lambda e: (e[inv[j]] for j in range(self.nvars)))

    def invert_variables(self, which: Iterable[int]) -> "LaurentPoly":
        """Substitute ``t_i -> 1/t_i`` for the listed variables."""
        flip = set(which)
        return self.map_exponents(lambda e: (-x if i in flip else x for i, x in enumerate(e)))

    def scale_exponents(self, factor: int) -> "LaurentPoly":
        return self.map_exponents(lambda e: (factor * x for x in e))

    def halve_exponents(self) -> "LaurentPoly":
        """Map ``w -> t`` where ``t = w**2``; every exponent must be even."""
        for e in self._terms:
            if any(x % 2 for x in e):
                raise NotDivisible(f"odd exponent {e} cannot be mapped back to t-coordinates")
        return self.map_exponents(lambda e: (x // 2 for x in e))

    def embed(self, nvars: int, positions: Sequence[int]) -> "LaurentPoly":
        """Place variable ``i`` at index ``positions[i]`` of a larger ring."""
        def fn(e):
            out = [0] * nvars
            for i, x in enumerate(e):
                out[positions[i]] = x
            return out
        return self.map_exponents(fn, nvars)

    # evaluation

    def substitute_last(self, value) -> "LaurentPoly":
        """Fix the last variable at ``value`` and drop it."""
        if self.nvars < 1:
            raise ValueError("no variable to substitute")
        if value == 0:
            raise ZeroDivisionError("cannot substitute zero into a Laurent polynomial")
        n = self.nvars - 1
        pw: dict[int, object] = {}
        d: dict[Exponent, object] = {}
        for e, c in self._terms.items():
            k = e[-1]
            v = pw.get(k)
            if v is None:
                v = value**k if k >= 0 else _div(1, value ** (-k))
                pw[k] = v
            head = e[:-1]
            d[head] = d.get(head, 0) + c * v
        return LaurentPoly._from_dict(n, d)

    def evaluate(self, point: Sequence):
        """Evaluate at a point.  Exact for rational input, complex for floats."""
        if len(point) != self.nvars:
            raise VariableMismatch(f"point of length {len(point)} for {self.nvars} variables")
        if any(x == 0 for x in point):
            raise ZeroDivisionError("Laurent polynomials are undefined at zero coordinates")
        exact = all(isinstance(x, (int, Fraction)) for x in point)
        if not exact:
            return complex(evaluate_many(self, np.asarray([point], dtype=complex))[0])
        cache = [dict() for _ in point]
        total = 0
        for e, c in self._terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    v = cache[i].get(k)
                    if v is None:
                        x = Fraction(point[i])
                        v = x**k
                        cache[i][k] = v
                    term = term * v
            total += term
        return _norm(Fraction(total)) if not isinstance(total, float) else total

    def evaluate_r_powers(self, weights: Sequence, param: BaseParam):
        """Evaluate at ``t_i = r**weights[i]`` exactly (integer weights)."""
        return param_poly_value(self.collect_r_powers(weights), param)

    def collect_r_powers(self, weights: Sequence) -> dict[int, object]:
        """Collapse to a one-variable Laurent polynomial in ``r`` via ``t_i = r**w_i``."""
        ws = [int(w) for w in weights]
        if len(ws) != self.nvars:
            raise VariableMismatch("weight vector length mismatch")
        out: dict[int, object] = {}
        for e, c in self._terms.items():
            k = sum(w * x for w, x in zip(ws, e))
            out[k] = out.get(k, 0) + c
        return {k: v for k, v in sorted(out.items()) if v != 0}

    def to_float(self) -> "LaurentPoly":
        return LaurentPoly(self.nvars, {e: float(c) for e, c in self._terms.items()}, _trusted=True)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponent matrix (T, n) and float coefficient vector (T,)."""
        exps = np.array(list(self._terms), dtype=np.int64).reshape(len(self._terms), self.nvars)
        coefs = np.array([float(c) for c in self._terms.values()], dtype=np.float64)
        return exps, coefs

    # serialization

    def to_json(self) -> dict:
        return {
            "vars": self.nvars,
            "terms": [{"exp": list(e), "coef": format_rational(c)} for e, c in self._terms.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentPoly":
        n = int(data["vars"])
        return cls(n, [(tuple(t["exp"]), parse_rational(t["coef"])) for t in data["terms"]])


def _is_dominant(e: Sequence[int]) -> bool:
    if not e:
        return True
    if e[-1] < 0:
        return False
    return all(e[i] >= e[i + 1] for i in range(len(e) - 1))


def param_poly_value(rpoly: Mapping[int, object], param: BaseParam):
    """Exact value of ``sum c_k r**k``."""
    total = Fraction(0)
    for k, c in rpoly.items():
        total += c * param.power(k)
    return _norm(total)


def exact_div(num: LaurentPoly, den: LaurentPoly) -> LaurentPoly:
    """Exact quotient ``num / den``; raises :class:`NotDivisible` otherwise."""
    num._check(den)
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    n = num.nvars
    if num.is_zero():
        return LaurentPoly.zero(n)
    if len(den) == 1:
        (de, dc), = den.terms()
        return LaurentPoly._from_dict(
            n, {tuple(a - b for a, b in zip(e, de)): _div(c, dc) for e, c in num.terms()}
        )
    nlo, nhi = num.degree_bounds()
    dlo, dhi = den.degree_bounds()
    lo = [a - b for a, b in zip(nlo, dlo)]
    hi = [a - b for a, b in zip(nhi, dhi)]
    if any(a > b for a, b in zip(lo, hi)):
        raise NotDivisible("degree bounds exclude any quotient")
    lead_e, lead_c = den.leading_term()
    den_terms = list(den.terms())
    rem = num.as_dict()
    heap = [tuple(-x for x in e) for e in rem]
    heapq.heapify(heap)
    quot: dict[Exponent, object] = {}
    while rem:
        neg = heapq.heappop(heap)
        e = tuple(-x for x in neg)
        c = rem.get(e)
        if c is None:
            continue
        qe = tuple(a - b for a, b in zip(e, lead_e))
        if any(x < a or x > b for x, a, b in zip(qe, lo, hi)):
            raise NotDivisible(f"remainder term {e} cannot be cancelled")
        qc = _div(c, lead_c)
        quot[qe] = qc
        for de, dc in den_terms:
            ee = tuple(a + b for a, b in zip(qe, de))
            old = rem.get(ee)
            new = (0 if old is None else old) - qc * dc
            if new == 0:
                if old is not None:
                    del rem[ee]
            else:
                if old is None:
                    heapq.heappush(heap, tuple(-x for x in ee))
                rem[ee] = new
    return LaurentPoly._from_dict(n, quot)


def evaluate_many(p: LaurentPoly, points: np.ndarray) -> np.ndarray:
    """Float evaluation of ``p`` at each row of ``points`` (complex allowed)."""
    from . import kernels

    pts = np.asarray(points, dtype=np.complex128)
    if pts.ndim != 2 or pts.shape[1] != p.nvars:
        raise VariableMismatch(f"points must have shape (P, {p.nvars})")
    if p.is_zero():
        return np.zeros(pts.shape[0], dtype=np.complex128)
    exps, coefs = _cached_arrays(p)
    return kernels.eval_monomials(exps, coefs, pts)


@lru_cache(maxsize=4096)
def _cached_arrays(p: LaurentPoly):
    return p.arrays()
