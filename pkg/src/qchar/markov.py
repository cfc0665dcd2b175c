"""Markov generators on signatures, their semigroups, and jump-chain simulation.

For a coherent family with Fourier coefficients ``psi`` the generator is

    L(lam, mu) = qdim(mu)/qdim(lam) * det[F(l_i, m_j)] / (2**N prod_j Psi(q**c_j)) - delta

with ``F(l, m) = psi(l-m) + psi(m-l) - psi(l+m) - psi(-l-m)``.  All work is
done on the truncated state space ``|lam| <= cutoff``; probability flowing past
the cutoff is tracked as a per-row defect instead of being renormalized away.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from ._accel import BACKEND
from .branching import link_row
from .characters import (
    Signature,
    check_type,
    format_signature,
    qdimension,
    shifted_indices,
    signatures_upto,
    validate_signature,
)
from .coherent import (
    COHERENT_TYPES,
    FourierCoeffs,
    Inadmissible,
    OmegaParams,
    admissibility_check,
    fourier_coefficients,
)
from .laurent import BaseParam

RNG_NAME = "numpy.random.Generator(PCG64)"
POISSON_TAIL = 1e-14


class CutoffTooSmall(ValueError):
    pass


def fourier_entry(psi: FourierCoeffs, l, m) -> float:
    """``psi(l-m) + psi(m-l) - psi(l+m) - psi(-l-m)``, checked against ``2(psi(l-m) - psi(l+m))``."""
    d, s = l - m, l + m
    if Fraction(d).denominator != 1 or Fraction(s).denominator != 1:
        raise ValueError("l - m and l + m must be integers")
    d, s = int(d), int(s)
    full = psi[d] + psi[-d] - psi[s] - psi[-s]
    short = 2 * (psi[d] - psi[s])
    if abs(full - short) > 8 * np.finfo(float).eps * (abs(psi[d]) + abs(psi[s])):
        raise AssertionError(f"Fourier coefficients are not symmetric at {d} or {s}")
    return full


def bessel_i(m: int, x: float) -> float:
    """Modified Bessel function ``I_m(x)`` for integer ``m`` and ``x >= 0``.

    Ascending series, stopped once the remaining terms (bounded by a geometric
    series) fall below double precision relative to the partial sum.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    m = abs(int(m))
    if x == 0:
        return 1.0 if m == 0 else 0.0
    h = x / 2
    term = math.exp(m * math.log(h) - math.lgamma(m + 1))
    total = term
    k = 0
    while True:
        ratio = h * h / ((k + 1) * (m + k + 1))
        term *= ratio
        k += 1
        total += term
        if ratio < 0.5 and term * ratio / (1 - ratio) <= 1e-17 * total:
            return total


# --- generator --------------------------------------------------------------------

@dataclass
class GeneratorMatrix:
    type: str
    rank: int
    omega: OmegaParams
    param: BaseParam
    cutoff: int
    states: list[Signature]
    matrix: np.ndarray = field(repr=False)
    defect: np.ndarray = field(repr=False)
    qdims: np.ndarray = field(repr=False)
    normalizer: float = 1.0

    def index(self, lam) -> int:
        try:
            return self.states.index(tuple(lam))
        except ValueError:
            raise KeyError(f"{format_signature(lam)} is not in the truncated state space") from None

    @property
    def rates(self) -> np.ndarray:
        return -np.diag(self.matrix)

    def validity(self, off_tol: float = 1e-12, sum_tol: float = 1e-10) -> dict:
        off = self.matrix - np.diag(np.diag(self.matrix))
        min_off = float(off.min()) if len(self.states) > 1 else 0.0
        sums = self.matrix.sum(axis=1)
        excess = float(np.max(np.abs(sums) - np.maximum(self.defect, 0.0))) if len(sums) else 0.0
        return {
            "min_offdiag": min_off,
            "max_row_excess": excess,
            "max_defect": float(self.defect.max()) if len(sums) else 0.0,
            "passed": min_off >= -off_tol and excess <= sum_tol,
        }

    def to_json(self) -> dict:
        return {
            "type": self.type,
            "N": self.rank,
            "omega": self.omega.to_json(),
            "r": str(self.param),
            "cutoff": self.cutoff,
            "states": [format_signature(s) for s in self.states],
            "matrix": [[float(x) for x in row] for row in self.matrix],
            "defect": [float(x) for x in self.defect],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorMatrix":
        from .characters import parse_signature

        states = [parse_signature(s) if s else () for s in data["states"]]
        omega = OmegaParams(**data["omega"])
        param = BaseParam.parse(data["r"])
        t = data["type"]
        qd = np.array([float(qdimension(t, s, param)) for s in states])
        return cls(t, int(data["N"]), omega, param, int(data["cutoff"]), states,
                   np.array(data["matrix"], dtype=float), np.array(data["defect"], dtype=float), qd)


def generator(type_: str, n: int, omega: OmegaParams, param: BaseParam, cutoff: int,
              max_defect: float | None = None) -> GeneratorMatrix:
    """Truncated generator on ``{lam : |lam| <= cutoff}``."""
    t = check_type(type_, COHERENT_TYPES)
    if n < 1:
        raise ValueError("rank must be >= 1")
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    report = admissibility_check(omega, t, n, param)
    if not report.passed:
        raise Inadmissible(report)
    states = signatures_upto(n, cutoff)
    l2 = np.array([[int(2 * x) for x in shifted_indices(t, lam)] for lam in states], dtype=np.int64)
    width = int(l2.max()) + 2
    psi = fourier_coefficients(omega, width)
    dets = kernels.pair_fourier_dets(l2, l2, psi.array(), psi.half_width)
    qd = np.array([float(qdimension(t, lam, param)) for lam in states])
    norm = math.prod(report.psi)
    mat = (qd[None, :] / qd[:, None]) * dets / (2**n * norm)
    mat[np.diag_indices_from(mat)] -= 1.0
    defect = -mat.sum(axis=1)
    gen = GeneratorMatrix(t, n, omega, param, cutoff, states, mat, defect, qd, norm)
    if max_defect is not None and defect.max() > max_defect:
        raise CutoffTooSmall(f"row defect {defect.max():.3e} exceeds {max_defect:.1e}; raise the cutoff")
    return gen


# --- semigroup ---------------------------------------------------------------------

@dataclass
class Semigroup:
    t: float
    states: list[Signature]
    matrix: np.ndarray = field(repr=False)
    defect: np.ndarray = field(repr=False)
    terms: int = 0

    def row(self, lam) -> dict[Signature, float]:
        i = self.states.index(tuple(lam))
        return {s: float(v) for s, v in zip(self.states, self.matrix[i]) if v != 0.0}


def semigroup(gen: GeneratorMatrix, t: float) -> Semigroup:
    """``exp(t L)`` on the truncated space by uniformization.

    ``Q_t = e^{-ct} sum_k (ct)^k / k! P^k`` with ``P = I + L/c`` and
    ``c = max |L(lam, lam)|``; the Poisson series stops once its tail is below
    ``POISSON_TAIL``.  The returned defect is ``1 - row sum`` and covers both
    the truncation and the dropped Poisson tail.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    size = len(gen.states)
    c = float(np.max(np.abs(np.diag(gen.matrix)))) if size else 0.0
    if t == 0 or c == 0.0:
        q = np.eye(size)
        return Semigroup(t, gen.states, q, 1.0 - q.sum(axis=1), 0)
    p = np.eye(size) + gen.matrix / c
    np.clip(p, 0.0, None, out=p)
    ct = c * t
    weight = math.exp(-ct)
    acc = weight * np.eye(size)
    power = np.eye(size)
    used = weight
    k = 0
    while 1.0 - used > POISSON_TAIL and k < 10_000:
        k += 1
        power = power @ p
        weight *= ct / k
        used += weight
        acc += weight * power
    return Semigroup(t, gen.states, acc, 1.0 - acc.sum(axis=1), k)


# --- intertwining -----------------------------------------------------------------

@dataclass
class IntertwiningReport:
    t: float
    max_deviation: float
    max_excess: float
    bound: np.ndarray = field(repr=False)
    deviation: np.ndarray = field(repr=False)
    tight_rows: int = 0
    tight_deviation: float = 0.0

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_excess < tol


def link_block(type_: str, sources: Sequence[Signature], targets: Sequence[Signature], param: BaseParam):
    """Dense float link matrix and the row mass falling outside ``targets``."""
    index = {mu: j for j, mu in enumerate(targets)}
    out = np.zeros((len(sources), len(targets)))
    outside = np.zeros(len(sources))
    for i, lam in enumerate(sources):
        for mu, w in link_row(type_, lam, param).weights.items():
            j = index.get(mu)
            if j is None:
                outside[i] += float(w)
            else:
                out[i, j] = float(w)
    return out, outside


def intertwining_check(type_: str, n: int, omega: OmegaParams, param: BaseParam, t: float,
                       cutoff: int) -> IntertwiningReport:
    """Compare ``Lambda Q^{N-1}_t`` with ``Q^N_t Lambda`` on the truncated grid.

    Both truncated semigroups are sub-stochastic and entrywise below the true
    ones, so each side undershoots by at most its lost mass.  Row ``lam`` gets
    the bound ``d^N(lam) + sum_mu Lambda(lam, mu) d^{N-1}(mu)`` (with links
    leaving the grid counted as lost), and the check reports how far the
    deviation exceeds it.
    """
    if n < 2:
        raise ValueError("intertwining needs rank >= 2")
    g_hi = generator(type_, n, omega, param, cutoff)
    g_lo = generator(type_, n - 1, omega, param, cutoff)
    q_hi = semigroup(g_hi, t)
    q_lo = semigroup(g_lo, t)
    lam_mat, outside = link_block(type_, g_hi.states, g_lo.states, param)
    lhs = lam_mat @ q_lo.matrix
    rhs = q_hi.matrix @ lam_mat
    dev = np.abs(lhs - rhs)
    bound = np.maximum(q_hi.defect, 0.0) + lam_mat @ np.maximum(q_lo.defect, 0.0) + outside
    excess = dev - bound[:, None]
    tight = bound < 1e-8
    return IntertwiningReport(
        t=t,
        max_deviation=float(dev.max()),
        max_excess=float(excess.max()),
        bound=bound,
        deviation=dev.max(axis=1),
        tight_rows=int(tight.sum()),
        tight_deviation=float(dev[tight].max()) if tight.any() else 0.0,
    )


# --- simulation -------------------------------------------------------------------

ESCAPED = kernels.ESCAPED
EXHAUSTED = kernels.EXHAUSTED


def jump_table(gen: GeneratorMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative jump probabilities (last column = escape) and holding rates."""
    size = len(gen.states)
    rates = np.maximum(gen.rates, 0.0)
    off = gen.matrix.copy()
    off[np.diag_indices_from(off)] = 0.0
    np.clip(off, 0.0, None, out=off)
    cum = np.ones((size, size + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        probs = np.where(rates[:, None] > 0, off / rates[:, None], 0.0)
    cum[:, :size] = np.minimum(np.cumsum(probs, axis=1), 1.0)
    return cum, rates


def _draw_budget(rates: np.ndarray, horizon: float) -> int:
    """Jumps per run such that exceeding them has probability below 1e-12."""
    lam = float(rates.max()) * horizon if len(rates) else 0.0
    # walk the Poisson pmf until its upper tail is negligible
    pmf = math.exp(-lam)
    acc = pmf
    k = 0
    while 1.0 - acc > 1e-12:
        k += 1
        pmf *= lam / k
        acc += pmf
    return k + 8


def draw_uniforms(seed: int, runs: int, jumps: int) -> np.ndarray:
    """Uniforms on (0, 1]: two per jump (holding time, target), one row per run."""
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((runs, 2 * jumps))
    return 1.0 - u


@dataclass
class Trajectory:
    seed: int
    run: int
    records: list[tuple[float, Signature | str]]

    @property
    def flag(self) -> str | None:
        last = self.records[-1][1]
        return last if isinstance(last, str) else None

    def state_at(self, time: float):
        cur = self.records[0][1]
        for t, s in self.records:
            if t > time:
                break
            cur = s
        return cur


def _label(states, code):
    if code == ESCAPED:
        return "ESCAPED"
    if code == EXHAUSTED:
        return "EXHAUSTED"
    return states[code]


def simulate_many(gen: GeneratorMatrix, initial, horizon: float, runs: int, seed: int,
                  jumps: int | None = None) -> list[Trajectory]:
    """Independent jump-chain trajectories; run ``i`` consumes row ``i`` of the draws."""
    cum, rates = jump_table(gen)
    start = gen.index(initial)
    jumps = _draw_budget(rates, horizon) if jumps is None else jumps
    u = draw_uniforms(seed, runs, jumps)
    times, states, counts = kernels.jump_chain_paths(cum, rates, start, horizon, u)
    out = []
    for r in range(runs):
        recs = [(float(times[r, k]), _label(gen.states, int(states[r, k]))) for k in range(counts[r])]
        out.append(Trajectory(seed, r, recs))
    return out


def simulate(gen: GeneratorMatrix, initial, horizon: float, seed: int) -> Trajectory:
    """One trajectory (identical to run 0 of :func:`simulate_many` with the same seed)."""
    return simulate_many(gen, initial, horizon, 1, seed)[0]


def final_states(gen: GeneratorMatrix, initial, horizon: float, runs: int, seed: int,
                 jumps: int | None = None) -> np.ndarray:
    """State index at ``horizon`` per run (negative codes for escape/exhaustion)."""
    cum, rates = jump_table(gen)
    start = gen.index(initial)
    jumps = _draw_budget(rates, horizon) if jumps is None else jumps
    u = draw_uniforms(seed, runs, jumps)
    return kernels.jump_chain_final(cum, rates, start, horizon, u)


@dataclass
class MonteCarloReport:
    runs: int
    t: float
    max_z: float
    failures: list
    rows: list

    @property
    def passed(self) -> bool:
        return not self.failures


def monte_carlo_check(gen: GeneratorMatrix, initial, t: float, runs: int, seed: int,
                      sigmas: float = 3.0) -> MonteCarloReport:
    """Empirical time-``t`` marginals against ``exp(tL)`` with binomial bands.

    Escape past the cutoff is compared against the semigroup defect as one more
    outcome.
    """
    codes = final_states(gen, initial, t, runs, seed)
    if (codes == EXHAUSTED).any():
        raise RuntimeError("random-draw budget exhausted; increase jumps")
    q = semigroup(gen, t)
    i0 = gen.index(initial)
    probs = list(q.matrix[i0]) + [max(q.defect[i0], 0.0)]
    counts = np.bincount(np.where(codes == ESCAPED, len(gen.states), codes), minlength=len(probs))
    labels = list(gen.states) + ["ESCAPED"]
    failures, rows = [], []
    max_z = 0.0
    for lab, p, k in zip(labels, probs, counts):
        p = min(max(float(p), 0.0), 1.0)
        phat = k / runs
        sd = math.sqrt(p * (1 - p) / runs)
        diff = abs(phat - p)
        ok = diff <= sigmas * sd
        z = diff / sd if sd > 0 else (0.0 if diff == 0 else math.inf)
        max_z = max(max_z, z)
        rows.append({"state": lab, "p": p, "phat": phat, "z": z})
        if not ok:
            failures.append(lab)
    return MonteCarloReport(runs, t, max_z, failures, rows)


def write_trajectories(path, trajectories: list[Trajectory], meta: dict) -> None:
    """CSV with columns ``run,time,lambda`` plus a ``<path>.meta.json`` sidecar."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "time", "lambda"])
        for tr in trajectories:
            for t, s in tr.records:
                w.writerow([tr.run, repr(t), s if isinstance(s, str) else format_signature(s)])
    sidecar = dict(meta, rng=RNG_NAME, backend=BACKEND)
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
