"""Self-verification suites behind ``qchar verify``.

Each suite runs a desk-scale grid of identities and invariants and returns
named checks with a metric and the bound it was held to.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from . import branching, characters
from .branching import classical_multiplicities, link_row, pushforward
from .characters import (
    basis_poly,
    character,
    invariance_check,
    signatures_upto,
    type_d_remark_check,
    weyl_denominator,
    weyl_denominator_det_forms,
    weyl_dimension,
)
from .coherent import (
    OmegaParams,
    coherent_measure,
    fourier_coefficients,
    toeplitz_minor,
)
from .laurent import BaseParam, LaurentPoly
from .markov import (
    bessel_i,
    final_states,
    generator,
    intertwining_check,
    semigroup,
)

SUITES = ("characters", "links", "coherent", "markov")


@dataclass
class Check:
    name: str
    passed: bool
    metric: float | str | None = None
    bound: float | str | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "metric": self.metric, "bound": self.bound, "detail": self.detail}


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, metric=None, bound=None, detail=""):
        self.checks.append(Check(name, bool(passed), metric, bound, detail))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


@dataclass
class VerifyConfig:
    r: str = "1/2"
    coherent_r: str = "4/5"
    tol: float = 1e-10
    cutoff: int = 12
    seed: int = 0
    char_rank: int = 3
    char_size: int = 4
    link_rank: int = 4
    link_size: int = 6
    mc_runs: int = 20000


# --- fault injection ------------------------------------------------------------

def _reset_caches():
    characters.CACHE.clear()
    characters._ENTRY_CACHE.clear()
    branching._branching_cached.cache_clear()
    branching._classical_multiplicities.cache_clear()


@contextlib.contextmanager
def injected_fault(kind: str | None):
    """Temporarily corrupt cached data so the suites can be seen to fail.

    ``"coefficient"`` adds one to the top coefficient of the type C character
    ``(1, 0)``.
    """
    if not kind:
        yield
        return
    if kind != "coefficient":
        raise ValueError(f"unknown fault {kind!r}")
    _reset_caches()
    good = characters.CACHE.get("C", (1, 0))
    bad = good + LaurentPoly.monomial((1, 0))
    characters.CACHE._mem[("C", (1, 0))] = bad
    try:
        yield
    finally:
        _reset_caches()


# --- suites ----------------------------------------------------------------------

def check_characters(report: VerifyReport, cfg: VerifyConfig):
    for n in range(1, 5):
        prod = {t: weyl_denominator(t, n) for t in "BCD"}
        forms = weyl_denominator_det_forms(n)
        for t in "BCD":
            report.add(f"weyl_denominator[{t},N={n}]", forms[t] == prod[t])
    for n in range(1, cfg.char_rank + 1):
        for lam in signatures_upto(n, cfg.char_size):
            report.add(f"type_d_symmetrization[{lam}]", type_d_remark_check(lam))
            for t in "BCD":
                f = character(t, lam).poly
                coeffs = [c for _, c in f.terms()]
                ok_coef = all(isinstance(c, int) and c > 0 for c in coeffs) and f.coefficient(lam) == 1
                report.add(f"character_coefficients[{t},{lam}]", ok_coef)
                dim = f.evaluate([1] * n)
                report.add(f"weyl_dimension[{t},{lam}]", dim == weyl_dimension(t, lam),
                           metric=str(dim), bound=str(weyl_dimension(t, lam)))
                report.add(f"weyl_invariance[{t},{lam}]", invariance_check(t, lam))


def check_links(report: VerifyReport, cfg: VerifyConfig):
    params = sorted({cfg.r, "1/2", "4/5"})
    for r in params:
        param = BaseParam.parse(r)
        worst = None
        for t in "BCD":
            for n in range(1, cfg.link_rank + 1):
                for lam in signatures_upto(n, cfg.link_size):
                    try:
                        row = link_row(t, lam, param)
                    except branching.LinkInvariantError as exc:
                        worst = f"{t} {lam}: {exc}"
                        break
                    if min(row.weights.values()) < 0 or row.total() != 1:
                        worst = f"{t} {lam}"
        report.add(f"link_stochasticity[r={r}]", worst is None, detail=worst or "")
    one = BaseParam.parse("1")
    for t in "BCD":
        bad = []
        for n in range(2, 4):
            for lam in signatures_upto(n, 4):
                row = link_row(t, lam, one).weights
                mult = classical_multiplicities(t, lam, seed=cfg.seed)
                dl = basis_poly(t, lam).evaluate([1] * n)
                expect = {mu: Fraction(k * basis_poly(t, mu).evaluate([1] * (n - 1)), dl)
                          for mu, k in mult.items()}
                if expect != row:
                    bad.append(lam)
        report.add(f"classical_branching[{t}]", not bad, detail=str(bad[:3]) if bad else "")


def check_coherent(report: VerifyReport, cfg: VerifyConfig):
    param = BaseParam.parse(cfg.coherent_r)
    for t in "BC":
        for gamma in (0.25, 0.5, 1.0):
            om = OmegaParams(gamma=gamma)
            for n in (2, 3):
                hi = coherent_measure(om, t, n, param, tol=cfg.tol, max_size=cfg.cutoff)
                lo = coherent_measure(om, t, n - 1, param, tol=cfg.tol, max_size=cfg.cutoff)
                push = pushforward(hi, lambda lam: link_row(t, lam, param))
                excess = max(abs(push.get(mu) - lo.get(mu)) - hi.tail for mu in lo.weights)
                report.add(f"coherence[{t},N={n},gamma={gamma}]", excess < 1e-8,
                           metric=excess, bound=1e-8, detail=f"tail={hi.tail:.3e}")
    rng = np.random.default_rng(cfg.seed)
    worst = math.inf
    for _ in range(50):
        om = _random_omega(rng)
        n = int(rng.integers(1, 5))
        size = int(rng.integers(0, 9))
        choices = characters.signatures_of_size(n, size)
        lam = choices[int(rng.integers(len(choices)))]
        worst = min(worst, toeplitz_minor(om, lam))
    report.add("toeplitz_nonnegativity", worst >= -1e-12, metric=worst, bound=-1e-12)


def _random_omega(rng) -> OmegaParams:
    alpha = np.sort(rng.uniform(0, 2, size=int(rng.integers(0, 3))))[::-1]
    beta = np.sort(rng.uniform(0, 1, size=int(rng.integers(0, 3))))[::-1]
    return OmegaParams(tuple(alpha), tuple(beta), float(rng.uniform(0, 2)))


def check_markov(report: VerifyReport, cfg: VerifyConfig):
    param = BaseParam.parse(cfg.coherent_r)
    for gamma in (0.5, 1.0, 2.0):
        psi = fourier_coefficients(OmegaParams(gamma=gamma), 40)
        err = max(abs(psi[m] - math.exp(-gamma) * bessel_i(m, gamma)) for m in range(-40, 41))
        report.add(f"bessel_consistency[gamma={gamma}]", err < 1e-12, metric=err, bound=1e-12)
    for t in "BC":
        for n in (2, 3):
            for gamma in (0.25, 0.5, 1.0):
                gen = generator(t, n, OmegaParams(gamma=gamma), param, cfg.cutoff)
                v = gen.validity()
                report.add(f"generator_validity[{t},N={n},gamma={gamma}]", v["passed"],
                           metric=min(v["min_offdiag"], -v["max_row_excess"]), bound=-1e-12)
    zero = generator("C", 2, OmegaParams(), param, cfg.cutoff)
    report.add("zero_generator", bool((zero.matrix == 0).all()))
    om = OmegaParams(gamma=0.5)
    for tt in (0.1, 0.5, 1.0):
        rep = intertwining_check("C", 2, om, param, tt, cfg.cutoff)
        report.add(f"intertwining[t={tt}]", rep.passed(1e-6), metric=rep.max_excess, bound=1e-6)
    gen = generator("C", 2, om, param, cfg.cutoff)
    q = semigroup(gen, 1.0)
    probs = np.append(q.matrix[0], max(q.defect[0], 0.0))
    codes = final_states(gen, (0, 0), 1.0, cfg.mc_runs, cfg.seed)
    counts = np.bincount(np.where(codes < 0, len(gen.states), codes), minlength=len(probs))
    expected = probs * cfg.mc_runs
    keep = expected >= 5
    pooled_obs, pooled_exp = counts[keep], expected[keep]
    if expected[~keep].sum() > 0:
        pooled_obs = np.append(pooled_obs, counts[~keep].sum())
        pooled_exp = np.append(pooled_exp, expected[~keep].sum())
    chi2 = float(((pooled_obs - pooled_exp) ** 2 / pooled_exp).sum())
    pval = float(stats.chi2.sf(chi2, len(pooled_obs) - 1))
    report.add("monte_carlo_goodness_of_fit", pval > 0.0027, metric=pval, bound=0.0027,
               detail=f"chi2={chi2:.2f} runs={cfg.mc_runs}")


RUNNERS = {
    "characters": check_characters,
    "links": check_links,
    "coherent": check_coherent,
    "markov": check_markov,
}


def run(suite: str = "all", cfg: VerifyConfig | None = None, fault: str | None = None) -> VerifyReport:
    cfg = cfg or VerifyConfig()
    names = SUITES if suite == "all" else (suite,)
    for s in names:
        if s not in RUNNERS:
            raise ValueError(f"unknown suite {s!r}")
    report = VerifyReport()
    with injected_fault(fault):
        for s in names:
            RUNNERS[s](report, cfg)
    return report
