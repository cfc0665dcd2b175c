"""Coherent systems built from Voiculescu-type generating functions.

For parameters ``omega = (alpha, beta, gamma)``

    Phi(x) = exp(gamma (x - 1)) prod (1 + bt_i (x - 1)) / prod (1 - at_i (x - 1)),
    Psi(z) = Phi((z + 1/z) / 2),

with ``at = alpha (1 + alpha/2)`` and ``bt = beta (1 - beta/2)``.  The rank-``N``
character ``prod_j Psi(q**c_j z_j) / Psi(q**c_j)`` expands in normalized
characters with weights

    P_N(lam) = qdim(lam) det[psi(l_i - rho_j) - psi(l_i + rho_j)] / prod_j Psi(q**c_j)

where ``psi`` are the Laurent coefficients of ``Psi``, ``l = lam + rho`` and
``rho = (c_N, ..., c_1)``.  These measures are coherent under the links of
:mod:`qchar.branching`.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import eval_jacobi

from .branching import SignatureMeasure
from .characters import (
    c_const,
    check_type,
    jacobi_params,
    qdimension,
    shifted_indices,
    rho,
    signatures_of_size,
    validate_signature,
)
from .laurent import BaseParam, as_rational

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
COHERENT_TYPES = "BC"
CLAMP_FLOOR = -1e-12


class NonConvergent(ArithmeticError):
    """An evaluation point lies outside the disc of convergence of ``Phi``."""


class NegativeWeight(ArithmeticError):
    pass


class Inadmissible(ValueError):
    """``omega`` fails the admissibility conditions for the requested rank."""

    def __init__(self, report: "AdmissibilityReport"):
        super().__init__(report.message)
        self.report = report


def _as_list(values) -> tuple[float, ...]:
    if values is None:
        return ()
    if isinstance(values, str):
        values = [v for v in values.replace(" ", "").split(",") if v]
    return tuple(float(as_rational(v)) if isinstance(v, str) and "/" in v else float(v) for v in values)


@dataclass(frozen=True)
class OmegaParams:
    alpha: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    gamma: float = 0.0

    def __post_init__(self):
        a = tuple(sorted(_as_list(self.alpha), reverse=True))
        b = tuple(sorted(_as_list(self.beta), reverse=True))
        g = float(self.gamma)
        if any(x < 0 for x in a) or any(x < 0 for x in b):
            raise ValueError("alpha and beta entries must be nonnegative")
        if b and b[0] > 1:
            raise ValueError("beta_1 must be <= 1")
        if g < 0 or not math.isfinite(g):
            raise ValueError("gamma must be a finite nonnegative number")
        if any(not math.isfinite(x) for x in a + b):
            raise ValueError("alpha and beta entries must be finite")
        object.__setattr__(self, "alpha", tuple(x for x in a if x > 0))
        object.__setattr__(self, "beta", tuple(x for x in b if x > 0))
        object.__setattr__(self, "gamma", g)

    @property
    def alpha_tilde(self) -> tuple[float, ...]:
        return tuple(a * (1 + a / 2) for a in self.alpha)

    @property
    def beta_tilde(self) -> tuple[float, ...]:
        return tuple(b * (1 - b / 2) for b in self.beta)

    @property
    def pole(self) -> float:
        """Radius of convergence of the Taylor series of ``Phi`` at 0."""
        at = self.alpha_tilde
        return 1 + 1 / max(at) if at else math.inf

    def is_trivial(self) -> bool:
        return not self.alpha and not self.beta and self.gamma == 0

    def to_json(self) -> dict:
        return {"alpha": list(self.alpha), "beta": list(self.beta), "gamma": self.gamma}


# --- Phi and its Taylor coefficients ---------------------------------------------

def phi_eval(omega: OmegaParams, x: float) -> float:
    """Closed-form ``Phi(x)``."""
    if x >= omega.pole:
        raise NonConvergent(f"x={x} is beyond the pole at {omega.pole}")
    try:
        val = math.exp(omega.gamma * (x - 1))
    except OverflowError:
        raise NonConvergent(f"Phi({x}) overflows double precision") from None
    for b in omega.beta_tilde:
        val *= 1 + b * (x - 1)
    for a in omega.alpha_tilde:
        val /= 1 - a * (x - 1)
    return val


def psi_eval(omega: OmegaParams, u: float) -> float:
    """``Psi(u) = Phi((u + 1/u) / 2)`` for real ``u > 0``."""
    return phi_eval(omega, (u + 1 / u) / 2)


@dataclass(frozen=True)
class SeriesCoeffs:
    order: int
    coeffs: np.ndarray = field(repr=False)
    tail: float
    point: float

    def __getitem__(self, n: int) -> float:
        return float(self.coeffs[n]) if 0 <= n <= self.order else 0.0


def _series(omega: OmegaParams, order: int) -> np.ndarray:
    n = np.arange(order + 1)
    # exp(gamma (x - 1)) = e^-gamma sum gamma^n x^n / n!
    logs = n * math.log(omega.gamma) - np.array([math.lgamma(k + 1) for k in n]) if omega.gamma > 0 else None
    out = np.exp(logs - omega.gamma) if logs is not None else (n == 0).astype(float)
    for b in omega.beta_tilde:
        nxt = (1 - b) * out
        nxt[1:] += b * out[:-1]
        out = nxt
    for a in omega.alpha_tilde:
        ratio = a / (1 + a)
        # 1 / ((1 + a) - a x) = sum ratio^n x^n / (1 + a): a running recursion
        nxt = np.empty_like(out)
        acc = 0.0
        for k in range(order + 1):
            acc = acc * ratio + out[k]
            nxt[k] = acc / (1 + a)
        out = nxt
    return out


def _partial_sum(coeffs: np.ndarray, x: float) -> float:
    return math.fsum(float(c) * x**k for k, c in enumerate(coeffs))


def phi_coefficients(omega: OmegaParams, tol: float = 1e-14, point: float = 1.0,
                     min_order: int = 0, max_order: int = 1 << 14) -> SeriesCoeffs:
    """Taylor coefficients of ``Phi`` up to an order whose tail at ``point`` is < ``tol``.

    All coefficients are nonnegative, so the tail at ``x > 0`` equals the closed
    form minus the partial sum; a rounding allowance is added on top.
    """
    if point >= omega.pole:
        raise NonConvergent(f"point {point} is beyond the pole at {omega.pole}")
    target = phi_eval(omega, point)
    floor = 8 * EPS * target
    if tol <= floor:
        raise ValueError(f"tolerance {tol:.1e} is below the rounding floor {floor:.1e}")
    order = max(16, min_order)
    while True:
        c = _series(omega, order)
        tail = max(target - _partial_sum(c, point), 0.0) + floor
        if tail < tol or order >= max_order:
            if tail >= tol:
                raise NonConvergent(f"tail {tail:.3e} above tolerance at order {order}")
            return SeriesCoeffs(order, c, tail, point)
        order *= 2


def phi_series_eval(series: SeriesCoeffs, x: float) -> float:
    return _partial_sum(series.coeffs, x)


# --- Laurent coefficients of Psi ---------------------------------------------------

@dataclass(frozen=True)
class FourierCoeffs:
    half_width: int
    values: np.ndarray = field(repr=False)
    tail: float
    rel_err: float = 0.0

    def __getitem__(self, m: int) -> float:
        m = abs(int(m))
        if m > self.half_width:
            raise IndexError(f"Fourier index {m} beyond half-width {self.half_width}")
        return float(self.values[self.half_width + m])

    def array(self) -> np.ndarray:
        """Coefficients at ``-K..K``."""
        return self.values


def _psi_half(coeffs: np.ndarray, m_max: int) -> np.ndarray:
    terms: list[list[float]] = [[] for _ in range(m_max + 1)]
    for n, c in enumerate(coeffs):
        if c == 0.0:
            continue
        c = float(c)
        # ((z + 1/z) / 2)^n = 2^-n sum_k C(n, k) z^(n - 2k)
        for k in range((n - min(n, m_max) + 1) // 2, n // 2 + 1):
            terms[n - 2 * k].append(c * (math.comb(n, k) / 2**n))
    return np.array([math.fsum(t) for t in terms])


@lru_cache(maxsize=256)
def _fourier(omega: OmegaParams, half_width: int, tol: float) -> FourierCoeffs:
    # Every term of psi(m) is nonnegative, so doubling the series order until no
    # entry moves gives each psi(m) to relative (not just absolute) accuracy.
    series = phi_coefficients(omega, tol=tol, point=1.0, min_order=max(half_width, 16))
    half = _psi_half(series.coeffs, half_width)
    while True:
        if 2 * series.order > 1 << 14:
            raise NonConvergent("Fourier coefficients did not settle below the order cap")
        nxt = phi_coefficients(omega, tol=tol, point=1.0, min_order=2 * series.order)
        half2 = _psi_half(nxt.coeffs, half_width)
        live = half2 > 1e-290
        change = float(np.max(np.abs(half2[live] - half[live]) / half2[live])) if live.any() else 0.0
        series, half = nxt, half2
        if change <= 4 * EPS:
            break
    values = np.concatenate([half[:0:-1], half])
    return FourierCoeffs(half_width, values, series.tail, change + 4 * series.order * EPS)


def fourier_coefficients(omega: OmegaParams, half_width: int, tol: float = 1e-14) -> FourierCoeffs:
    """``psi(m)`` for ``|m| <= half_width``.

    ``psi(m) = sum_{n >= |m|, n = m mod 2} phi(n) 2**-n C(n, (n + m)/2)``.  The
    truncation error of every entry is bounded by the tail of ``sum phi(n)``
    (``tail``) and, entrywise, by ``rel_err`` times the entry.
    """
    if half_width < 0:
        raise ValueError("half-width must be nonnegative")
    return _fourier(omega, int(half_width), float(tol))


# --- scaled points and admissibility --------------------------------------------

def scaled_points(type_: str, n: int, param: BaseParam) -> tuple[Fraction, ...]:
    """``xhat_i = (q**c_i + q**-c_i) / 2`` for ``i = 1..n``, exact."""
    t = check_type(type_, COHERENT_TYPES)
    out = []
    for i in range(1, n + 1):
        v = param.q_power(c_const(t, i))
        out.append((v + 1 / v) / 2)
    return tuple(out)


def psi_at_scaled(omega: OmegaParams, type_: str, n: int, param: BaseParam) -> list[float]:
    """``Psi(q**c_i)`` for ``i = 1..n`` from the closed form."""
    return [phi_eval(omega, float(x)) for x in scaled_points(type_, n, param)]


@dataclass
class AdmissibilityReport:
    passed: bool
    type: str
    rank: int
    pole: float
    points: list[float]
    psi: list[float | None]
    margins: list[float]
    failed_index: int | None = None
    message: str = ""

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "type": self.type,
            "rank": self.rank,
            "pole": None if math.isinf(self.pole) else self.pole,
            "points": self.points,
            "psi": self.psi,
            "margins": [None if math.isinf(m) else m for m in self.margins],
            "failed_index": self.failed_index,
            "message": self.message,
        }


def admissibility_check(omega: OmegaParams, type_: str, n: int, param: BaseParam) -> AdmissibilityReport:
    """Checks ``xhat_i`` below the pole and ``Psi(q**c_i) > 0`` for ``i <= n``."""
    t = check_type(type_, COHERENT_TYPES)
    xs = [float(x) for x in scaled_points(t, n, param)]
    pole = omega.pole
    psis: list[float | None] = []
    margins = []
    failed = None
    msg = "admissible"
    for i, x in enumerate(xs, start=1):
        margins.append(pole - x)
        if x >= pole:
            psis.append(None)
            if failed is None:
                failed = i
                msg = f"scaled point {i} ({x:.6g}) is not below the pole {pole:.6g}"
            continue
        try:
            v = phi_eval(omega, x)
        except NonConvergent as exc:
            psis.append(None)
            if failed is None:
                failed = i
                msg = str(exc)
            continue
        psis.append(v)
        if v <= 0 and failed is None:
            failed = i
            msg = f"Psi(q^c_{i}) = {v:.3g} is not positive"
    return AdmissibilityReport(failed is None, t, n, pole, xs, psis, margins, failed, msg)


# --- determinants and normalizers -------------------------------------------------

def toeplitz_minor(omega: OmegaParams, lam: Sequence[int], series: SeriesCoeffs | None = None) -> float:
    """``det[phi(lam_j - j + i)]`` with ``phi(k) = 0`` for ``k < 0``."""
    lam = tuple(lam)
    n = len(lam)
    if n == 0:
        return 1.0
    if series is None or series.order < lam[0] + n:
        series = phi_coefficients(omega, min_order=lam[0] + n)
    m = np.array([[series[lam[j] - j + i] if lam[j] - j + i >= 0 else 0.0 for j in range(n)]
                  for i in range(n)])
    return float(np.linalg.det(m))


def _frac_det(m: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return det


def schur_at_scaled(lam: Sequence[int], points: Sequence) -> Fraction:
    """``det[x_i**(lam_j - j + N)] / V(x)``, normalized so ``lam = 0`` gives 1.

    Exact for rational points.
    """
    lam = tuple(lam)
    xs = [Fraction(x) for x in points]
    n = len(lam)
    if len(xs) != n:
        raise ValueError("need one point per part")
    if len(set(xs)) != n:
        raise ZeroDivisionError("scaled points must be pairwise distinct")
    num = _frac_det([[x ** (lam[j] - j - 1 + n) for j in range(n)] for x in xs])
    den = _frac_det([[x ** (n - 1 - j) for j in range(n)] for x in xs])
    return num / den


def kappa_normalizer(l: int, a, b) -> Fraction:
    """Leading coefficient ``Gamma(2l+a+b+1) / (2**l l! Gamma(l+a+b+1))`` of ``P_l^{(a,b)}``."""
    a, b = Fraction(a), Fraction(b)
    if l < 0:
        raise ValueError("l must be nonnegative")
    if abs(a) != Fraction(1, 2) or abs(b) != Fraction(1, 2) or a + b not in (0, 1):
        raise ValueError(f"unsupported Jacobi parameters ({a}, {b})")
    s = int(a + b)
    top = Fraction(math.factorial(2 * l + s), math.factorial(l + s))
    return top / (2**l * math.factorial(l))


def jacobi_identity_check(lam: Sequence[int], points: Sequence, a, b) -> float:
    """``|det[x_i**(lam_j-j+N)]/V - det[P_{l_i}(x_j)]/(V prod kappa(l_i))|``.

    The Jacobi polynomials come from :func:`scipy.special.eval_jacobi`.  The two
    sides agree only while the lower-order terms of the monic Jacobi polynomials
    cancel in the determinant, which depends on ``(a, b)`` and ``lam``.
    """
    lam = tuple(lam)
    n = len(lam)
    xs = np.array([float(x) for x in points])
    lhs = float(schur_at_scaled(lam, [Fraction(x) for x in points]))
    ls = [lam[i] - i - 1 + n for i in range(n)]
    m = np.array([[eval_jacobi(l, float(a), float(b), x) / float(kappa_normalizer(l, a, b)) for x in xs]
                  for l in ls])
    v = np.array([[x ** (n - 1 - j) for j in range(n)] for x in xs]).T
    rhs = float(np.linalg.det(m) / np.linalg.det(v)) if n else 1.0
    return abs(lhs - rhs)


# --- weights ------------------------------------------------------------------------

def _pair_det(psi: FourierCoeffs, ls, rs) -> tuple[float, float]:
    """``det[psi(l_i - r_j) - psi(l_i + r_j)]`` and a bound on its absolute error.

    Small determinants are expanded by permutations and summed with ``fsum``;
    the bound covers the entry errors (``psi.rel_err``) and the rounding of the
    products.
    """
    n = len(ls)
    if n == 0:
        return 1.0, 0.0
    m = np.empty((n, n))
    a = np.empty((n, n))
    for i, l in enumerate(ls):
        for j, r in enumerate(rs):
            x, y = psi[int(l - r)], psi[int(l + r)]
            m[i, j] = x - y
            a[i, j] = abs(x) + abs(y)
    if n <= 4:
        terms, perm = [], []
        for p, sign in _PERMS[n]:
            prod = sign
            prod_abs = 1.0
            for i in range(n):
                prod *= m[i, p[i]]
                prod_abs *= a[i, p[i]]
            terms.append(prod)
            perm.append(prod_abs)
        det = math.fsum(terms)
        size = math.fsum(perm)
    else:
        det = float(np.linalg.det(m))
        size = float(np.prod(a.sum(axis=1)))
    return det, n * (psi.rel_err + 2 * n * EPS) * size


def _perm_table(n):
    out = []
    for p in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        out.append((p, -1.0 if inv % 2 else 1.0))
    return out


_PERMS = {n: _perm_table(n) for n in range(1, 5)}


@dataclass
class WeightContext:
    """Per-(omega, type, rank, r) data shared by all weights of one measure."""

    omega: OmegaParams
    type: str
    rank: int
    param: BaseParam
    psi: FourierCoeffs
    norm: float
    report: AdmissibilityReport

    @classmethod
    def build(cls, omega, type_, n, param, max_part=24, tol=1e-14) -> "WeightContext":
        t = check_type(type_, COHERENT_TYPES)
        report = admissibility_check(omega, t, n, param)
        if not report.passed:
            raise Inadmissible(report)
        width = int(max_part + 2 * c_const(t, max(n, 1)) + 2)
        psi = fourier_coefficients(omega, width, tol)
        return cls(omega, t, n, param, psi, math.prod(report.psi), report)

    def ensure(self, lam):
        need = (lam[0] if lam else 0) + 2 * c_const(self.type, max(self.rank, 1)) + 1
        if need > self.psi.half_width:
            self.psi = fourier_coefficients(self.omega, int(2 * need), 1e-14)


def coherent_weight(omega: OmegaParams, type_: str, lam: Sequence[int], param: BaseParam,
                    ctx: WeightContext | None = None) -> float:
    """``P_N(lam)`` by the pair-Fourier determinant."""
    t = check_type(type_, COHERENT_TYPES)
    lam = validate_signature(t, lam)
    n = len(lam)
    if n == 0:
        return 1.0
    if ctx is None:
        ctx = WeightContext.build(omega, t, n, param, max_part=lam[0])
    return _weight_and_error(ctx, lam)[0]


def _weight_and_error(ctx: WeightContext, lam) -> tuple[float, float]:
    ctx.ensure(lam)
    det, err = _pair_det(ctx.psi, shifted_indices(ctx.type, lam), rho(ctx.type, len(lam)))
    scale = float(qdimension(ctx.type, lam, ctx.param)) / ctx.norm
    return scale * det, scale * err


def schur_route_weight(omega: OmegaParams, type_: str, lam: Sequence[int], param: BaseParam) -> float:
    """``det[phi(lam_j - j + i)] s_lam(xhat) / prod Psi(q**c_i)``.

    This is a probability measure on signatures (the Cauchy-Binet expansion of
    ``prod Phi(xhat_i)``) but it is not coherent under the links.
    """
    t = check_type(type_, COHERENT_TYPES)
    lam = validate_signature(t, lam)
    n = len(lam)
    if n == 0:
        return 1.0
    report = admissibility_check(omega, t, n, param)
    if not report.passed:
        raise Inadmissible(report)
    xs = scaled_points(t, n, param)
    xs_desc = xs[::-1]
    return toeplitz_minor(omega, lam) * float(schur_at_scaled(lam, xs_desc)) / math.prod(report.psi)


def _clamp(value: float, lam, err: float = 0.0) -> float:
    """Zero out negatives that rounding can explain; anything else is a bug."""
    if value >= 0:
        return value
    if value >= min(CLAMP_FLOOR, -err):
        log.info("clamped weight %.3e at %s to 0 (error bound %.1e)", value, lam, err)
        return 0.0
    raise NegativeWeight(f"weight {value:.3e} at {lam} is negative (error bound {err:.1e})")


def coherent_measure(omega: OmegaParams, type_: str, n: int, param: BaseParam, tol: float = 1e-10,
                     max_size: int = 60, route: str = "fourier") -> SignatureMeasure:
    """Weights ``P_N`` enumerated by size, then lexicographically.

    Stops once the accumulated mass reaches ``1 - tol`` or all sizes up to
    ``max_size`` are used; the missing mass is recorded as the tail.
    """
    t = check_type(type_, COHERENT_TYPES)
    if n == 0:
        return SignatureMeasure(0, {(): 1.0})
    if route not in ("fourier", "schur"):
        raise ValueError(f"unknown route {route!r}")
    ctx = WeightContext.build(omega, t, n, param, max_part=max_size) if route == "fourier" else None
    weights: dict = {}
    mass = error = 0.0
    for size in range(max_size + 1):
        for lam in sorted(signatures_of_size(n, size)):
            if route == "fourier":
                w, err = _weight_and_error(ctx, lam)
            else:
                w, err = schur_route_weight(omega, t, lam, param), 0.0
            w = _clamp(w, lam, err)
            weights[lam] = w
            mass += w
            error += err
        if mass >= 1 - tol:
            break
    return SignatureMeasure(n, weights, max(0.0, 1.0 - mass), error)


__all__ = [
    "AdmissibilityReport",
    "FourierCoeffs",
    "Inadmissible",
    "NegativeWeight",
    "NonConvergent",
    "OmegaParams",
    "SeriesCoeffs",
    "WeightContext",
    "admissibility_check",
    "coherent_measure",
    "coherent_weight",
    "fourier_coefficients",
    "jacobi_identity_check",
    "jacobi_params",
    "kappa_normalizer",
    "phi_coefficients",
    "phi_eval",
    "phi_series_eval",
    "psi_at_scaled",
    "psi_eval",
    "scaled_points",
    "schur_at_scaled",
    "schur_route_weight",
    "toeplitz_minor",
]
