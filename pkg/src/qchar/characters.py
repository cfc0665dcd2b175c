"""Characters of the classical Lie types A, B, C, D as exact Laurent polynomials.

``f^{X_N}_lam(t_1, ..., t_N)`` is built from the Weyl character formula: a
determinant numerator divided exactly by the Weyl denominator.  The same
formula is also evaluated numerically (:func:`character_values`) for the float
backend and for independent cross-checks.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .laurent import (
    BaseParam,
    LaurentPoly,
    evaluate_many,
    exact_div,
    format_rational,
)

TYPES = ("A", "B", "C", "D")

Signature = tuple[int, ...]


class InvalidSignature(ValueError):
    pass


def check_type(type_: str, allowed: Sequence[str] = TYPES) -> str:
    t = str(type_).upper()
    if t not in allowed:
        raise ValueError(f"type must be one of {', '.join(allowed)}; got {type_!r}")
    return t


def epsilon(type_: str) -> Fraction:
    """``eps(B) = 1/2``, ``eps(C) = 1``, ``eps(D) = 0``."""
    return {"B": Fraction(1, 2), "C": Fraction(1), "D": Fraction(0)}[check_type(type_, "BCD")]


def c_const(type_: str, i: int) -> Fraction:
    """``c(X)_i = i - 1 + eps(X)`` for ``i >= 1``."""
    if i < 1:
        raise ValueError("c(X)_i is defined for i >= 1")
    return i - 1 + epsilon(type_)


def rho(type_: str, n: int) -> tuple[Fraction, ...]:
    """Shift vector ``(c(X)_N, ..., c(X)_1)``; for type A ``(N-1, ..., 0)``."""
    t = check_type(type_)
    if t == "A":
        return tuple(Fraction(n - 1 - i) for i in range(n))
    return tuple(c_const(t, n - i) for i in range(n))


def shifted_indices(type_: str, lam: Sequence[int]) -> tuple[Fraction, ...]:
    """``l_i = lam_i + c(X)_{N-i+1}`` (strictly decreasing)."""
    return tuple(x + s for x, s in zip(lam, rho(type_, len(lam))))


def scaled_weights(type_: str, n: int) -> tuple[int, ...]:
    """Exponents ``k_i`` with ``q**c(X)_i = r**k_i`` (the point of q-dimension)."""
    t = check_type(type_)
    if t == "A":
        return tuple(4 * (n + 1 - 2 * i) for i in range(1, n + 1))
    return tuple(int(4 * c_const(t, i)) for i in range(1, n + 1))


# --- signatures ---------------------------------------------------------------

def validate_signature(type_: str, lam: Sequence[int]) -> Signature:
    """Return ``lam`` as a tuple, raising :class:`InvalidSignature` if illegal.

    Types B and C use nonnegative signatures; type D allows a negative last
    part (``lam_{N-1} >= |lam_N|``); type A allows any weakly decreasing tuple.
    """
    t = check_type(type_)
    try:
        lam = tuple(int(x) for x in lam)
    except (TypeError, ValueError) as exc:
        raise InvalidSignature(f"signature parts must be integers: {lam!r}") from exc
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        if not (t == "D" and len(lam) >= 2 and all(lam[i] >= lam[i + 1] for i in range(len(lam) - 2))
                and lam[-2] >= abs(lam[-1])):
            raise InvalidSignature(f"signature must be weakly decreasing: {lam}")
    if lam and t in "BC" and lam[-1] < 0:
        raise InvalidSignature(f"type {t} signatures must be nonnegative: {lam}")
    if lam and t == "D" and len(lam) >= 2 and lam[-2] < abs(lam[-1]):
        raise InvalidSignature(f"type D signatures need lam_(N-1) >= |lam_N|: {lam}")
    return lam


def parse_signature(text: str) -> Signature:
    """Parse ``"2,1,0"`` or ``"2.1.0"``; an empty string is the rank-0 signature."""
    text = text.strip()
    if not text:
        return ()
    sep = "," if "," in text else "."
    return tuple(int(x) for x in text.split(sep))


def format_signature(lam: Sequence[int]) -> str:
    return ".".join(str(x) for x in lam)


def tilde(lam: Sequence[int]) -> Signature:
    """``(lam_1, ..., lam_{N-1}, -lam_N)``."""
    lam = tuple(lam)
    return lam[:-1] + (-lam[-1],) if lam else lam


def signatures_of_size(n: int, size: int, max_part: int | None = None) -> list[Signature]:
    """Nonnegative signatures of rank ``n`` and total ``size``, lex-decreasing."""
    out: list[Signature] = []

    def rec(prefix, remaining, slots, cap):
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for part in range(min(cap, remaining), -1, -1):
            if part * slots < remaining:
                break
            rec(prefix + [part], remaining - part, slots - 1, part)

    cap = size if max_part is None else max_part
    rec([], size, n, cap)
    return out


def signatures_upto(n: int, max_size: int) -> list[Signature]:
    """Nonnegative signatures with ``|lam| <= max_size``, ordered by size then lex."""
    out: list[Signature] = []
    for s in range(max_size + 1):
        out.extend(sorted(signatures_of_size(n, s)))
    return out


# --- determinants over the polynomial ring -----------------------------------

def poly_det(matrix: Sequence[Sequence[LaurentPoly]], method: str = "laplace") -> LaurentPoly:
    """Determinant of a square matrix of Laurent polynomials.

    ``"laplace"`` expands along rows with memoized minors (``O(2**N)`` minors);
    ``"bareiss"`` is fraction-free elimination.  With dense polynomial entries
    the Bareiss intermediates grow much faster than the minors, so Laplace is
    the default.
    """
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    if method == "bareiss":
        return _bareiss_det([list(r) for r in matrix])
    if method != "laplace":
        raise ValueError(f"unknown determinant method {method!r}")
    return _laplace_det(matrix)


def _laplace_det(m):
    n = len(m)
    nv = m[0][0].nvars
    # minors over the trailing rows, keyed by the remaining column tuple
    minors = {(): LaurentPoly.constant(nv, 1)}
    for row in range(n - 1, -1, -1):
        nxt = {}
        for cols in itertools.combinations(range(n), n - row):
            total = LaurentPoly.zero(nv)
            for k, j in enumerate(cols):
                entry = m[row][j]
                sub = minors[cols[:k] + cols[k + 1:]]
                if entry.is_zero() or sub.is_zero():
                    continue
                term = entry * sub
                total = total - term if k % 2 else total + term
            nxt[cols] = total
        minors = nxt
    return minors[tuple(range(n))]


def _bareiss_det(m):
    n = len(m)
    nv = m[0][0].nvars
    sign = 1
    prev = LaurentPoly.constant(nv, 1)
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return LaurentPoly.zero(nv)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = exact_div(m[k][k] * m[i][j] - m[i][k] * m[k][j], prev)
        prev = m[k][k]
    d = m[n - 1][n - 1]
    return d if sign > 0 else -d


# --- building blocks ------------------------------------------------------------

def _univariate_entry(kind: str, l: Fraction, eps: Fraction) -> LaurentPoly:
    """One-variable entry, computed in doubled coordinates ``w`` with ``t = w**2``.

    ``kind == "ratio"``: ``(t**l - t**-l) / (t**eps - t**-eps)``
    ``kind == "plus"`` / ``"minus"``: ``t**l +- t**-l``
    """
    l2 = 2 * l
    if l2.denominator != 1:
        raise ValueError("index must be a half-integer")
    l2 = int(l2)
    if kind == "plus":
        w = LaurentPoly(1, {(l2,): 1}) + LaurentPoly(1, {(-l2,): 1})
    else:
        w = LaurentPoly(1, {(l2,): 1}) - LaurentPoly(1, {(-l2,): 1})
        if kind == "ratio":
            e2 = int(2 * eps)
            w = exact_div(w, LaurentPoly(1, {(e2,): 1}) - LaurentPoly(1, {(-e2,): 1}))
    return w.halve_exponents()


_ENTRY_CACHE: dict = {}


def _entry(kind, l, eps, n, j) -> LaurentPoly:
    key = (kind, l, eps)
    u = _ENTRY_CACHE.get(key)
    if u is None:
        u = _univariate_entry(kind, Fraction(l), Fraction(eps))
        _ENTRY_CACHE[key] = u
    return u.embed(n, [j])


def _numerator_matrix(kind, indices, eps, n):
    return [[_entry(kind, l, eps, n, j) for j in range(n)] for l in indices]


def symplectic_factor(n: int, i: int, j: int) -> LaurentPoly:
    """``t_i + 1/t_i - t_j - 1/t_j``."""
    terms = {}
    for k, s in ((i, 1), (j, -1)):
        for p in (1, -1):
            e = [0] * n
            e[k] = p
            terms[tuple(e)] = s
    return LaurentPoly(n, terms)


def weyl_denominator(type_: str, n: int) -> LaurentPoly:
    """Product-form Weyl denominator.

    Types B, C, D: ``prod_{i<j} (t_i + 1/t_i - t_j - 1/t_j)``.
    Type A: the literal ``prod_{i<j} (t_j - t_i)``.
    """
    t = check_type(type_)
    if n < 1:
        raise ValueError("rank must be >= 1")
    out = LaurentPoly.constant(n, 1)
    for i in range(n):
        for j in range(i + 1, n):
            if t == "A":
                out = out * (LaurentPoly.variable(n, j) - LaurentPoly.variable(n, i))
            else:
                out = out * symplectic_factor(n, i, j)
    return out


def weyl_denominator_det_forms(n: int) -> dict[str, LaurentPoly]:
    """The two determinant forms of the symplectic denominator.

    ``"D"``: ``(1/2) det[t_j**c(D)_{N-i+1} + t_j**-c(D)_{N-i+1}]``;
    ``"B"``, ``"C"``: ``det[(t_j**c - t_j**-c) / (t_j**eps - t_j**-eps)]``.
    """
    out = {"D": poly_det(_numerator_matrix("plus", rho("D", n), 0, n)).scale(Fraction(1, 2))}
    for t in "BC":
        out[t] = poly_det(_numerator_matrix("ratio", rho(t, n), epsilon(t), n))
    return out


def divide_by_weyl_denominator(p: LaurentPoly, type_: str) -> LaurentPoly:
    """Exact division by the Weyl denominator, one linear factor at a time."""
    n = p.nvars
    t = check_type(type_)
    for i in range(n):
        for j in range(i + 1, n):
            if t == "A":
                f = LaurentPoly.variable(n, i) - LaurentPoly.variable(n, j)
            else:
                f = symplectic_factor(n, i, j)
            p = exact_div(p, f)
    return p


def type_a_sign(n: int) -> int:
    """Sign relating ``det[t_j**(lam_i+N-i)] / prod_{i<j}(t_j - t_i)`` to the Schur polynomial."""
    return -1 if (n * (n - 1) // 2) % 2 else 1


# --- characters -------------------------------------------------------------------

@dataclass(frozen=True)
class CharacterPoly:
    type: str
    rank: int
    signature: Signature
    poly: LaurentPoly

    def qdim(self, param: BaseParam) -> Fraction:
        return Fraction(self.poly.evaluate_r_powers(scaled_weights(self.type, self.rank), param))

    def to_json(self, param: BaseParam | None = None) -> dict:
        out = {"type": self.type, "N": self.rank, "lambda": list(self.signature)}
        out.update(self.poly.to_json())
        if param is not None:
            out["qdim"] = format_rational(self.qdim(param))
        return out


def _compute_character(t: str, lam: Signature) -> LaurentPoly:
    n = len(lam)
    if n == 0:
        return LaurentPoly.constant(0, 1)
    if t == "A":
        num = poly_det([[LaurentPoly.variable(n, j, lam[i] + n - 1 - i) for j in range(n)]
                        for i in range(n)])
        return divide_by_weyl_denominator(num, "A")
    ls = shifted_indices(t, lam)
    if t in "BC":
        num = poly_det(_numerator_matrix("ratio", ls, epsilon(t), n))
    else:
        plus = poly_det(_numerator_matrix("plus", ls, 0, n))
        minus = poly_det(_numerator_matrix("minus", ls, 0, n))
        num = (plus + minus).scale(Fraction(1, 2))
    return divide_by_weyl_denominator(num, t)


class CharacterCache:
    """Thread-safe memo of character polynomials keyed by ``(type, lam)``.

    Entries are independent of ``r``.  With ``directory`` set, entries are also
    persisted as JSON files named by a hash of the key.
    """

    def __init__(self, directory: str | Path | None = None):
        self._mem: dict = {}
        self._lock = threading.Lock()
        self.directory = Path(directory) if directory else None

    def _path(self, key) -> Path:
        h = hashlib.sha256(json.dumps([key[0], list(key[1])]).encode()).hexdigest()[:32]
        return self.directory / f"{h}.json"

    def get(self, t: str, lam: Signature) -> LaurentPoly:
        key = (t, lam)
        p = self._mem.get(key)
        if p is not None:
            return p
        if self.directory is not None:
            path = self._path(key)
            if path.exists():
                p = LaurentPoly.from_json(json.loads(path.read_text()))
        if p is None:
            p = _compute_character(t, lam)
            if self.directory is not None:
                self.directory.mkdir(parents=True, exist_ok=True)
                self._path(key).write_text(json.dumps(p.to_json()))
        with self._lock:
            self._mem[key] = p
        return p

    def clear(self):
        with self._lock:
            self._mem.clear()


CACHE = CharacterCache()


def character(type_: str, lam: Sequence[int]) -> CharacterPoly:
    """The character ``f^{X_N}_lam`` (Schur polynomial for type A)."""
    t = check_type(type_)
    lam = validate_signature(t, lam)
    return CharacterPoly(t, len(lam), lam, CACHE.get(t, lam))


def basis_poly(type_: str, lam: Sequence[int]) -> LaurentPoly:
    """Polynomial behind ``g^{X_N}_lam``.

    For type D this is ``f_lam + f_{tilde lam}`` when ``lam_N > 0`` and ``f_lam``
    itself when ``lam_N = 0``; other types return ``f_lam``.
    """
    t = check_type(type_)
    lam = validate_signature(t, lam)
    p = CACHE.get(t, lam)
    if t == "D" and lam and lam[-1] != 0:
        p = p + CACHE.get(t, tilde(lam))
    return p


def qdimension(type_: str, lam: Sequence[int], param: BaseParam) -> Fraction:
    """``f_lam(q**c(X)_1, ..., q**c(X)_N)``, exact.

    Away from ``r = 1`` the Weyl ratio is evaluated at the point directly, which
    avoids expanding the character; at ``r = 1`` the denominator vanishes there
    and the polynomial is used instead.
    """
    t = check_type(type_)
    lam = validate_signature(t, lam)
    if param.classical or t == "A" or not lam:
        return character(t, lam).qdim(param)
    return _principal_ratio(t, lam, param)


def fraction_det(m: list[list[Fraction]]) -> Fraction:
    """Exact determinant by fraction-free Gaussian elimination."""
    a = [row[:] for row in m]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k + 1, n):
                    a[i][j] -= f * a[k][j]
    return det


def _principal_ratio(t: str, lam: Signature, param: BaseParam) -> Fraction:
    n = len(lam)
    xs = [Fraction(k, 4) for k in scaled_weights(t, n)]  # t_j = q**xs[j]

    def qp(e: Fraction) -> Fraction:
        return param.q_power(e)

    def sym(j: int) -> Fraction:
        return qp(xs[j]) + qp(-xs[j])

    den = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            den *= sym(i) - sym(j)
    ls = shifted_indices(t, lam)
    if t in "BC":
        eps = epsilon(t)
        num = fraction_det([[(qp(x * l) - qp(-x * l)) / (qp(x * eps) - qp(-x * eps)) for x in xs]
                            for l in ls])
    else:
        plus = fraction_det([[qp(x * l) + qp(-x * l) for x in xs] for l in ls])
        minus = fraction_det([[qp(x * l) - qp(-x * l) for x in xs] for l in ls])
        num = (plus + minus) / 2
    return num / den


def basis_qdim(type_: str, lam: Sequence[int], param: BaseParam) -> Fraction:
    t = check_type(type_)
    lam = tuple(lam)
    return Fraction(basis_poly(t, lam).evaluate_r_powers(scaled_weights(t, len(lam)), param))


def scaled_point(type_: str, n: int, param: BaseParam) -> np.ndarray:
    return np.array([float(param.power(k)) for k in scaled_weights(type_, n)])


def normalized_character_eval(type_: str, lam: Sequence[int], z, param: BaseParam):
    """``g^{X_N}_lam(z)`` for torus point(s) ``z`` (shape ``(N,)`` or ``(P, N)``)."""
    t = check_type(type_)
    lam = tuple(lam)
    n = len(lam)
    zz = np.atleast_2d(np.asarray(z, dtype=complex))
    if n == 0:
        vals = np.ones(zz.shape[0], dtype=complex)
    else:
        p = basis_poly(t, lam)
        s = scaled_point(t, n, param)
        num = evaluate_many(p, zz * s[None, :])
        den = float(basis_qdim(t, lam, param))
        vals = num / den
    return vals if np.ndim(z) == 2 else complex(vals[0])


def type_d_remark_check(lam: Sequence[int]) -> bool:
    """``f_lam + f_{tilde lam} == det[t**l + t**-l] / V^s`` exactly."""
    lam = validate_signature("D", lam)
    n = len(lam)
    lhs = CACHE.get("D", lam) + CACHE.get("D", tilde(lam))
    plus = poly_det(_numerator_matrix("plus", shifted_indices("D", lam), 0, n))
    return lhs == divide_by_weyl_denominator(plus, "D")


def invariance_check(type_: str, lam: Sequence[int]) -> bool:
    """Weyl-group invariance of ``f_lam``: permutations and (even, for D) sign flips."""
    t = check_type(type_, "BCD")
    p = character(t, lam).poly
    n = p.nvars
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        if p.permute(perm) != p:
            return False
    if t == "D":
        flips = [(0, 1)] if n >= 2 else []
    else:
        flips = [(0,)] if n >= 1 else []
    return all(p.invert_variables(f) == p for f in flips)


def jacobi_params(type_: str) -> tuple[Fraction, Fraction]:
    """Jacobi parameters of the torus measure in ``x = (z + 1/z)/2``.

    C: ``(1/2, 1/2)``; B: ``(1/2, -1/2)``.  These make the density
    ``|1 - z|**(2a+1) |1 + z|**(2b+1)`` equal to ``|Weyl denominator|**2``.
    """
    t = check_type(type_, "BC")
    return (Fraction(1, 2), Fraction(1, 2)) if t == "C" else (Fraction(1, 2), Fraction(-1, 2))


def alternant(type_: str, lam: Sequence[int]) -> LaurentPoly:
    """``det[t_j**l_i - t_j**-l_i]`` in doubled coordinates (exponents ``2 l``)."""
    n = len(lam)
    ls = [2 * l for l in shifted_indices(type_, lam)]
    rows = [[LaurentPoly.variable(n, j, int(l)) - LaurentPoly.variable(n, j, -int(l)) for j in range(n)]
            for l in ls]
    return poly_det(rows)


def torus_orthogonality_check(type_: str, lam, mu, order: int | None = None) -> float:
    """Deviation of ``int f_lam conj(f_mu) dm_{a,b}`` from ``delta_{lam,mu}``.

    The exact route uses Fourier bookkeeping: the density cancels the Weyl
    denominators, leaving ``<A_lam, A_mu> / (N! 2**N)`` for the alternants
    ``A``.  With ``order`` (a power of two) a tensor trapezoid rule on the torus
    is evaluated as well, and the larger deviation is returned.
    """
    t = check_type(type_, "BC")
    lam = validate_signature(t, lam)
    mu = validate_signature(t, mu)
    n = len(lam)
    a_l, a_m = alternant(t, lam), alternant(t, mu)
    inner = sum(c * a_m.coefficient(e) for e, c in a_l.terms())
    target = 1 if lam == mu else 0
    dev = abs(float(Fraction(inner, math.factorial(n) * 2**n)) - target)
    if order:
        if order & (order - 1):
            raise ValueError("quadrature order must be a power of two")
        dev = max(dev, abs(_torus_quadrature(t, lam, mu, order) - target))
    return dev


def _torus_quadrature(t, lam, mu, order):
    n = len(lam)
    a, b = jacobi_params(t)
    theta = 2 * np.pi * (np.arange(order) + 0.5) / order
    grid = np.array(list(itertools.product(range(order), repeat=n)))
    z = np.exp(1j * theta[grid])
    dens = np.ones(len(z))
    for j in range(n):
        dens *= np.abs(1 - z[:, j]) ** float(2 * a + 1) * np.abs(1 + z[:, j]) ** float(2 * b + 1)
        for k in range(j + 1, n):
            dens *= np.abs(z[:, j] - z[:, k]) ** 2 * np.abs(1 - z[:, j] * z[:, k]) ** 2
    fl = evaluate_many(character(t, lam).poly, z)
    fm = evaluate_many(character(t, mu).poly, z)
    val = np.mean(fl * np.conj(fm) * dens) / (math.factorial(n) * 2**n)
    return float(val.real)


# --- classical dimension oracle --------------------------------------------------

def positive_roots(type_: str, n: int) -> list[tuple[Fraction, ...]]:
    t = check_type(type_)
    roots = []

    def e(*pairs):
        v = [Fraction(0)] * n
        for i, s in pairs:
            v[i] += s
        return tuple(v)

    for i in range(n):
        for j in range(i + 1, n):
            roots.append(e((i, 1), (j, -1)))
            if t != "A":
                roots.append(e((i, 1), (j, 1)))
        if t == "B":
            roots.append(e((i, 1)))
        elif t == "C":
            roots.append(e((i, 2)))
    return roots


def weyl_dimension(type_: str, lam: Sequence[int]) -> int:
    """Classical dimension ``prod_{alpha>0} (lam+rho, alpha)/(rho, alpha)``.

    Uses the standard half-sum of positive roots, independent of the
    determinant pipeline.
    """
    t = check_type(type_)
    lam = validate_signature(t, lam)
    n = len(lam)
    roots = positive_roots(t, n)
    rho_std = [sum(r[i] for r in roots) / 2 for i in range(n)]
    num = Fraction(1)
    for r in roots:
        num *= sum((lam[i] + rho_std[i]) * r[i] for i in range(n)) / sum(rho_std[i] * r[i] for i in range(n))
    if num.denominator != 1:
        raise ArithmeticError("Weyl dimension must be an integer")
    return int(num)


# --- float backend: numeric Weyl formula ------------------------------------------

def _entry_values(kind, l, eps, z):
    if kind == "plus":
        return z ** int(l) + z ** int(-l)
    if kind == "minus":
        return z ** int(l) - z ** int(-l)
    # geometric sum (t**l - t**-l)/(t**eps - t**-eps) with integral exponents
    top = l - eps
    count = int(2 * l / (2 * eps)) if eps else 0
    step = 2 * eps
    out = np.zeros_like(z)
    for k in range(count):
        out = out + z ** int(top - k * step)
    return out


def character_values(type_: str, lam: Sequence[int], points) -> np.ndarray:
    """Evaluate ``f^{X_N}_lam`` at complex points by the determinant formula.

    Entries are expanded as geometric sums so points with ``t_j = 1`` (or -1)
    are allowed; the Weyl denominator itself must not vanish.
    """
    t = check_type(type_)
    lam = validate_signature(t, lam)
    z = np.atleast_2d(np.asarray(points, dtype=complex))
    n = len(lam)
    if n == 0:
        return np.ones(z.shape[0], dtype=complex)
    if t == "A":
        m = np.stack([np.stack([z[:, j] ** (lam[i] + n - 1 - i) for j in range(n)], -1)
                      for i in range(n)], -2)
        num = np.linalg.det(m)
        den = np.ones(z.shape[0], dtype=complex)
        for i in range(n):
            for j in range(i + 1, n):
                den *= z[:, i] - z[:, j]
        return num / den
    ls = shifted_indices(t, lam)

    def det_of(kind, eps):
        m = np.stack([np.stack([_entry_values(kind, l, eps, z[:, j]) for j in range(n)], -1)
                      for l in ls], -2)
        return np.linalg.det(m)

    if t in "BC":
        num = det_of("ratio", epsilon(t))
    else:
        num = 0.5 * (det_of("plus", 0) + det_of("minus", 0))
    den = np.ones(z.shape[0], dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            den *= z[:, i] + 1 / z[:, i] - z[:, j] - 1 / z[:, j]
    return num / den


def basis_values(type_: str, lam: Sequence[int], points) -> np.ndarray:
    """Numeric counterpart of :func:`basis_poly`."""
    t = check_type(type_)
    lam = tuple(lam)
    v = character_values(t, lam, points)
    if t == "D" and lam and lam[-1] != 0:
        v = v + character_values(t, tilde(lam), points)
    return v
