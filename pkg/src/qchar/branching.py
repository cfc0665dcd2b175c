"""Stochastic links between ranks of the B/C/D branching graph.

A link row is read off from the restriction of a character to ``N - 1``
variables: fixing ``t_N`` and expanding in characters of rank ``N - 1``
gives coefficients ``a_mu``, and

    Lambda(lam, mu) = a_mu * qdim_{N-1}(mu) / qdim_N(lam).

The expansion is done once per ``lam`` with ``t_N`` kept as a free spectator
variable, so the coefficients are Laurent polynomials in ``t_N`` and link rows
for any base parameter follow by evaluation.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from .characters import (
    Signature,
    basis_poly,
    basis_qdim,
    basis_values,
    c_const,
    check_type,
    format_signature,
    scaled_point,
    scaled_weights,
    validate_signature,
)
from .laurent import BaseParam, LaurentPoly, evaluate_many, format_rational, param_poly_value

log = logging.getLogger(__name__)

ITERATION_CAP = 10**6
LINK_TYPES = "BCD"


class NotInSpan(ArithmeticError):
    """The polynomial is not a finite combination of the basis characters."""


class LinkInvariantError(AssertionError):
    """A computed link row is negative somewhere or does not sum to one."""


class IllConditioned(RuntimeError):
    pass


class MissingRow(KeyError):
    pass


def _dominant(e) -> bool:
    return all(e[i] >= e[i + 1] for i in range(len(e) - 1)) and (not e or e[-1] >= 0)


def _expand(table: dict, type_: str, n: int) -> dict[Signature, dict[int, object]]:
    """Leading-term expansion of ``{head: {k: c}}`` in the rank-``n`` basis.

    ``head`` is the exponent of ``t_1..t_n`` and ``k`` the exponent of a spectator
    variable, so the result maps ``mu`` to a Laurent polynomial ``{k: a}``.
    """
    table = {h: dict(v) for h, v in table.items() if v}
    heap = [tuple(-x for x in h) for h in table if _dominant(h)]
    heapq.heapify(heap)
    out: dict[Signature, dict[int, object]] = {}
    steps = 0
    while table:
        steps += 1
        if steps > ITERATION_CAP:
            raise NotInSpan("iteration cap exceeded")
        while heap and tuple(-x for x in heap[0]) not in table:
            heapq.heappop(heap)
        if not heap:
            sample = next(iter(table))
            raise NotInSpan(f"no dominant term left; e.g. exponent {sample}")
        mu = tuple(-x for x in heapq.heappop(heap))
        coeff = dict(table[mu])
        g = basis_poly(type_, mu)
        lead = g.coefficient(mu)
        if lead != 1:
            coeff = {k: Fraction(c) / lead for k, c in coeff.items()}
        out[mu] = coeff
        for e, gc in g.terms():
            row = table.get(e)
            if row is None:
                row = table[e] = {}
                if _dominant(e):
                    heapq.heappush(heap, tuple(-x for x in e))
            for k, c in coeff.items():
                v = row.get(k, 0) - gc * c
                if v == 0:
                    row.pop(k, None)
                else:
                    row[k] = v
            if not row:
                del table[e]
    return out


def expand_in_characters(p: LaurentPoly, type_: str, n: int | None = None) -> dict[Signature, Fraction]:
    """Coefficients ``a_mu`` with ``p = sum a_mu g_mu`` over the rank-``n`` basis.

    The basis is ``f_mu`` for types B and C; for type D it is ``f_mu`` when
    ``mu_n = 0`` and ``f_mu + f_{tilde mu}`` otherwise.
    """
    t = check_type(type_, LINK_TYPES)
    n = p.nvars if n is None else n
    if n != p.nvars:
        raise ValueError(f"polynomial has {p.nvars} variables, expected {n}")
    coeffs = _expand({e: {0: c} for e, c in p.terms()}, t, n)
    return {mu: Fraction(a[0]) for mu, a in coeffs.items() if a.get(0, 0) != 0}


@lru_cache(maxsize=None)
def _branching_cached(t: str, lam: Signature):
    g = basis_poly(t, lam)
    table: dict = {}
    for e, c in g.terms():
        table.setdefault(e[:-1], {})[e[-1]] = c
    out = _expand(table, t, len(lam) - 1)
    return tuple(sorted((mu, tuple(sorted(a.items()))) for mu, a in out.items()))


def branching_coefficients(type_: str, lam) -> dict[Signature, dict[int, object]]:
    """Expansion of ``g_lam(t_1, .., t_{N-1}, s)`` as ``{mu: {k: coefficient of s**k}}``."""
    t = check_type(type_, LINK_TYPES)
    lam = validate_signature(t, lam)
    if not lam:
        raise ValueError("rank-0 signatures have no restriction")
    if t == "D" and lam[-1] < 0:
        raise ValueError("type D links use signatures with lam_N >= 0")
    return {mu: dict(a) for mu, a in _branching_cached(t, lam)}


def restrict(type_: str, lam, param: BaseParam) -> LaurentPoly:
    """``g_lam(t_1, .., t_{N-1}, q**c(X)_N)``; for B and C this is ``f_lam`` restricted.

    For type D the symmetrized numerator ``f_lam + f_{tilde lam}`` is used
    (``f_lam`` alone when ``lam_N = 0``).
    """
    t = check_type(type_, LINK_TYPES)
    lam = validate_signature(t, lam)
    n = len(lam)
    if n == 0:
        raise ValueError("rank must be >= 1")
    return basis_poly(t, lam).substitute_last(param.q_power(c_const(t, n)))


@dataclass(frozen=True)
class LinkRow:
    type: str
    source: Signature
    param: BaseParam
    weights: dict = field(hash=False)

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def items(self):
        return sorted(self.weights.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def as_float(self) -> dict[Signature, float]:
        return {mu: float(w) for mu, w in self.weights.items()}

    def to_json(self) -> dict:
        return {
            "type": self.type,
            "r": format_rational(self.param.r),
            "lambda": list(self.source),
            "row": [{"mu": list(mu), "weight": format_rational(w), "float": float(w)}
                    for mu, w in self.items()],
        }


def link_row(type_: str, lam, param: BaseParam, check: bool = True) -> LinkRow:
    """Row ``Lambda^N_{N-1}(lam, .)`` in exact arithmetic."""
    t = check_type(type_, LINK_TYPES)
    lam = validate_signature(t, lam)
    n = len(lam)
    if n == 0:
        raise ValueError("rank must be >= 1")
    if n == 1:
        weights = {(): Fraction(1)}
    else:
        s_exp = scaled_weights(t, n)[-1]
        den = basis_qdim(t, lam, param)
        weights = {}
        for mu, a in branching_coefficients(t, lam).items():
            w = Fraction(param_poly_value({k * s_exp: c for k, c in a.items()}, param))
            if w != 0:
                weights[mu] = w * basis_qdim(t, mu, param) / den
    row = LinkRow(t, lam, param, weights)
    if check:
        bad = [mu for mu, w in weights.items() if w < 0]
        if bad:
            raise LinkInvariantError(f"negative link weight at {bad[0]} for lam={lam}")
        if row.total() != 1:
            raise LinkInvariantError(f"row for lam={lam} sums to {row.total()}")
    return row


def link_matrix(type_: str, sources: Iterable, param: BaseParam) -> dict[Signature, LinkRow]:
    return {tuple(lam): link_row(type_, lam, param) for lam in sources}


# --- measures ------------------------------------------------------------------

@dataclass
class SignatureMeasure:
    """Finitely supported measure on signatures of one rank.

    ``tail`` is the mass left out of ``weights``; ``error`` bounds the summed
    absolute error of float weights.
    """

    rank: int
    weights: dict
    tail: float = 0.0
    error: float = 0.0

    def mass(self):
        return sum(self.weights.values())

    def get(self, lam, default=0.0):
        return self.weights.get(tuple(lam), default)

    def support(self) -> list[Signature]:
        return sorted(self.weights, key=lambda lam: (sum(lam), lam))

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "tail": float(self.tail),
            "error": float(self.error),
            "weights": [{"lambda": list(lam), "p": float(self.weights[lam])} for lam in self.support()],
        }


def pushforward(m: SignatureMeasure, rows: Mapping | Callable) -> SignatureMeasure:
    """``(m Lambda)(mu) = sum_lam m(lam) Lambda(lam, mu)``.

    ``rows`` is a mapping ``lam -> LinkRow`` (or ``lam -> {mu: weight}``) or a
    callable returning one.
    """
    out: dict = {}
    for lam, w in m.weights.items():
        if callable(rows):
            row = rows(lam)
        else:
            if lam not in rows:
                raise MissingRow(f"no link row for {format_signature(lam)}")
            row = rows[lam]
        entries = row.weights if isinstance(row, LinkRow) else row
        for mu, x in entries.items():
            if isinstance(w, float) or isinstance(x, float):
                out[mu] = out.get(mu, 0.0) + float(w) * float(x)
            else:
                out[mu] = out.get(mu, 0) + w * x
    return SignatureMeasure(m.rank - 1, out, m.tail, m.error)


# --- independent numeric routes ---------------------------------------------------

def candidate_targets(type_: str, lam) -> list[Signature]:
    """All rank ``N-1`` basis labels with ``mu_1 <= lam_1``."""
    n = len(lam)
    top = lam[0] if lam else 0
    out = [()]
    for _ in range(n - 1):
        out = [p + (x,) for p in out for x in range(0, top + 1) if not p or x <= p[-1]]
    return sorted(out)


def _random_torus(rng, n_points, n):
    return np.exp(2j * np.pi * rng.random((n_points, n)))


def _solve(values_fn, targets, rng, n, retries=5, oversample=3, max_cond=1e8):
    for _ in range(retries):
        z = _random_torus(rng, max(oversample * len(targets), 8), n)
        a = np.stack([values_fn(mu, z) for mu in targets], axis=1) if targets else np.zeros((len(z), 0))
        cond = np.linalg.cond(a) if targets else 1.0
        if cond > max_cond:
            continue
        b = values_fn(None, z)
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
        resid = float(np.max(np.abs(a @ x - b)) / max(1.0, np.max(np.abs(b))))
        return x, resid, cond
    raise IllConditioned("linear system ill-conditioned after retries")


@lru_cache(maxsize=None)
def _classical_multiplicities(t: str, lam: Signature, seed: int):
    n = len(lam)
    targets = candidate_targets(t, lam)
    rng = np.random.default_rng(seed)

    def values(mu, z):
        if mu is None:
            pts = np.concatenate([z, np.ones((len(z), 1))], axis=1)
            return basis_values(t, lam, pts)
        if not mu:
            return np.ones(len(z), dtype=complex)
        return basis_values(t, mu, z)

    x, resid, _ = _solve(values, targets, rng, n - 1)
    if resid > 1e-6:
        raise IllConditioned(f"residual {resid:.2e} too large")
    mult = {}
    for mu, v in zip(targets, x):
        k = int(round(v.real))
        if abs(v - k) > 1e-6:
            raise IllConditioned(f"non-integral multiplicity {v} at {mu}")
        if k:
            mult[mu] = k
    return mult


def classical_multiplicities(type_: str, lam, seed: int = 0) -> dict[Signature, int]:
    """Multiplicities in the ``t_N = 1`` restriction, by random evaluation.

    Characters are evaluated numerically from the Weyl formula (no exact
    division and no leading-term expansion) at random torus points, and the
    overdetermined system is solved by least squares.
    """
    t = check_type(type_, LINK_TYPES)
    lam = validate_signature(t, lam)
    if len(lam) == 1:
        return {(): int(round(basis_values(t, lam, np.ones((1, 1)))[0].real))}
    return dict(_classical_multiplicities(t, lam, seed))


def classical_branching_oracle(type_: str, lam, mu, seed: int = 0) -> int:
    """Multiplicity of ``mu`` in the restriction of ``lam`` at ``q = 1``."""
    return classical_multiplicities(type_, lam, seed).get(tuple(mu), 0)


def float_link_row(type_: str, lam, param: BaseParam, seed: int = 0) -> dict[Signature, float]:
    """Link row by least squares on float-evaluated normalized characters.

    Shares only the exact character polynomials with :func:`link_row`; the
    restriction, expansion and q-dimensions are replaced by float evaluation
    at random torus points.
    """
    t = check_type(type_, LINK_TYPES)
    lam = validate_signature(t, lam)
    n = len(lam)
    if n == 1:
        return {(): 1.0}
    targets = candidate_targets(t, lam)
    rng = np.random.default_rng(seed)
    s_big = scaled_point(t, n, param)
    g_lam = basis_poly(t, lam)
    top_val = float(evaluate_many(g_lam, s_big[None, :])[0].real)

    def values(mu, z):
        if mu is None:
            pts = np.concatenate([z, np.ones((len(z), 1))], axis=1) * s_big[None, :]
            return evaluate_many(g_lam, pts) / top_val
        if not mu:
            return np.ones(len(z), dtype=complex)
        s = s_big[:n - 1]
        g = basis_poly(t, mu)
        return evaluate_many(g, z * s[None, :]) / evaluate_many(g, s[None, :])[0].real

    x, resid, _ = _solve(values, targets, rng, n - 1)
    return {mu: float(v.real) for mu, v in zip(targets, x) if abs(v) > 1e-13}
