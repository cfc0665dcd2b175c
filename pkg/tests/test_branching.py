from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qchar.branching import (
    LinkInvariantError,
    MissingRow,
    NotInSpan,
    SignatureMeasure,
    branching_coefficients,
    classical_branching_oracle,
    classical_multiplicities,
    expand_in_characters,
    float_link_row,
    link_row,
    pushforward,
    restrict,
)
from qchar.characters import basis_poly, character, signatures_upto, weyl_dimension
from qchar.laurent import BaseParam, LaurentPoly

P = LaurentPoly
HALF = BaseParam.parse("1/2")
FOUR_FIFTHS = BaseParam.parse("4/5")
ONE = BaseParam.parse("1")


def t(n, i, k=1):
    return P.variable(n, i, k)


def sample_grid(max_rank, max_size):
    return [lam for n in range(2, max_rank + 1) for lam in signatures_upto(n, max_size)]


# --- restriction and expansion ----------------------------------------------------

def test_restrict_examples():
    q = HALF.q
    x = t(1, 0)
    assert restrict("C", (1, 0), HALF) == x + x**-1 + q**2 + q**-2
    for ty in "BCD":
        assert restrict(ty, (0, 0, 0), HALF) == P.constant(2, 1)
    # rank one: a scalar equal to the q-dimension
    r = restrict("C", (3,), HALF)
    assert r.nvars == 0
    assert r == P.constant(0, character("C", (3,)).qdim(HALF))


def test_restrict_matches_evaluation():
    rng = np.random.default_rng(0)
    for ty in "BCD":
        lam = (2, 1, 1)
        r = restrict(ty, lam, FOUR_FIFTHS)
        last = {"B": Fraction(5, 2), "C": 3, "D": 2}[ty]
        s = FOUR_FIFTHS.q_power(last)
        for _ in range(5):
            x = [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for _ in range(2)]
            assert r.evaluate(x) == basis_poly(ty, lam).evaluate(x + [s])


def test_expand_examples():
    x = t(1, 0)
    assert expand_in_characters(x + x**-1 + 3, "C") == {(1,): 1, (0,): 3}
    assert expand_in_characters(P.zero(2), "B") == {}
    q = HALF.q
    assert expand_in_characters(restrict("C", (1, 0), HALF), "C") == {(1,): 1, (0,): q**2 + q**-2}


def test_expand_not_in_span():
    with pytest.raises(NotInSpan):
        expand_in_characters(t(1, 0, -1), "C")
    with pytest.raises(NotInSpan):
        # not invariant under t -> 1/t
        expand_in_characters(t(1, 0, 2) + 1, "C")


def test_expand_cross_checked_by_random_point_solve():
    q = HALF.q
    p = restrict("C", (1, 0), HALF)
    rng = np.random.default_rng(4)
    xs = [Fraction(int(rng.integers(1, 20)), int(rng.integers(1, 20))) for _ in range(2)]
    # p = a * (x + 1/x) + b  solved from two rational points
    m = [[x + 1 / x, 1] for x in xs]
    rhs = [p.evaluate([x]) for x in xs]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    a = (rhs[0] * m[1][1] - rhs[1] * m[0][1]) / det
    b = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det
    assert (a, b) == (1, q**2 + q**-2)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from("BCD"), st.sampled_from(sample_grid(3, 5)), st.sampled_from([HALF, FOUR_FIFTHS]))
def test_reconstruction(ty, lam, param):
    r = restrict(ty, lam, param)
    coeffs = expand_in_characters(r, ty)
    rebuilt = P.zero(len(lam) - 1)
    for mu, a in coeffs.items():
        rebuilt = rebuilt + a * basis_poly(ty, mu)
    assert rebuilt == r


def test_branching_coefficients_are_parameter_free():
    # keys are powers of the spectator t_N, which the link later sets to q^{c_N}
    a = branching_coefficients("C", (1, 0))
    assert a == {(1,): {0: 1}, (0,): {1: 1, -1: 1}}


# --- link rows -------------------------------------------------------------------

def test_link_row_examples():
    q = HALF.q
    row = link_row("C", (1, 0), HALF).weights
    den = q + 1 / q + q**2 + q**-2
    assert row == {(1,): (q + 1 / q) / den, (0,): (q**2 + q**-2) / den}
    assert sum(row.values()) == 1
    for ty in "BCD":
        assert link_row(ty, (0, 0), HALF).weights == {(0,): 1}
        assert link_row(ty, (4,), HALF).weights == {(): 1}


def test_link_row_stochastic_and_support():
    for param in (HALF, FOUR_FIFTHS):
        for ty in "BCD":
            for lam in sample_grid(3, 5):
                row = link_row(ty, lam, param)
                assert all(w > 0 for w in row.weights.values())
                assert row.total() == 1
                assert all(mu[0] <= lam[0] for mu in row.weights if mu)


def test_link_row_json_and_floats():
    row = link_row("C", (1, 0), HALF)
    data = row.to_json()
    assert data["lambda"] == [1, 0]
    assert data["row"][0] == {"mu": [0], "weight": "65537/69649", "float": 65537 / 69649}
    assert row.as_float()[(1,)] == pytest.approx(4112 / 69649, rel=1e-15)


def test_link_invariant_error_is_raised_on_bad_rows(monkeypatch):
    import qchar.branching as br

    monkeypatch.setattr(br, "basis_qdim", lambda t, lam, p: Fraction(2) if len(lam) == 2 else Fraction(1))
    with pytest.raises(LinkInvariantError):
        br.link_row("C", (1, 0), HALF)


# --- classical degeneration ------------------------------------------------------

def test_classical_oracle_examples():
    for ty in "BCD":
        assert classical_multiplicities(ty, (0, 0)) == {(0,): 1}
    assert classical_multiplicities("C", (1, 0)) == {(1,): 1, (0,): 2}
    assert classical_branching_oracle("C", (1, 0), (0,)) == 2
    assert classical_branching_oracle("C", (1, 0), (2,)) == 0
    # B_2 vector (dim 5) restricted at t_2 = 1: B_1 vector (dim 3) plus two trivials
    assert classical_multiplicities("B", (1, 0)) == {(1,): 1, (0,): 2}


@pytest.mark.parametrize("ty", ["B", "C", "D"])
def test_classical_degeneration(ty):
    for lam in sample_grid(3, 4):
        mult = classical_multiplicities(ty, lam)
        n = len(lam)
        dim = basis_poly(ty, lam).evaluate([1] * n)
        expected = {mu: Fraction(k * basis_poly(ty, mu).evaluate([1] * (n - 1)), dim) for mu, k in mult.items()}
        assert link_row(ty, lam, ONE).weights == expected, lam
        if ty != "D":
            assert dim == weyl_dimension(ty, lam)


def test_classical_dimension_count():
    # dimensions add up under restriction (sum of m_mu dim(mu) = dim(lam))
    for ty in "BC":
        for lam in sample_grid(3, 4):
            mult = classical_multiplicities(ty, lam)
            assert sum(k * weyl_dimension(ty, mu) for mu, k in mult.items()) == weyl_dimension(ty, lam)


# --- float route -----------------------------------------------------------------

@pytest.mark.parametrize("ty", ["B", "C", "D"])
def test_float_link_rows_agree(ty):
    for lam in [(1, 0), (2, 1), (2, 2, 1), (3, 1, 0), (1, 1, 1, 1)]:
        exact = link_row(ty, lam, FOUR_FIFTHS).as_float()
        approx = float_link_row(ty, lam, FOUR_FIFTHS)
        for mu in set(exact) | set(approx):
            assert abs(exact.get(mu, 0.0) - approx.get(mu, 0.0)) < 1e-10, (lam, mu)


# --- pushforward -----------------------------------------------------------------

def test_pushforward_examples():
    row = link_row("C", (2, 1), HALF)
    point = SignatureMeasure(2, {(2, 1): Fraction(1)})
    assert pushforward(point, {(2, 1): row}).weights == row.weights

    rows = {lam: link_row("B", lam, HALF) for lam in [(1, 0), (2, 2)]}
    mix = SignatureMeasure(2, {(1, 0): Fraction(1, 2), (2, 2): Fraction(1, 2)})
    out = pushforward(mix, rows)
    assert sum(out.weights.values()) == 1
    for mu in out.weights:
        avg = (rows[(1, 0)].weights.get(mu, 0) + rows[(2, 2)].weights.get(mu, 0)) / 2
        assert out.weights[mu] == avg

    with pytest.raises(MissingRow):
        pushforward(mix, {(1, 0): rows[(1, 0)]})


def test_pushforward_keeps_tail_and_floats():
    m = SignatureMeasure(2, {(1, 0): 0.25, (0, 0): 0.75}, tail=1e-9)
    out = pushforward(m, lambda lam: link_row("C", lam, HALF))
    assert out.rank == 1 and out.tail == 1e-9
    assert sum(out.weights.values()) == pytest.approx(1.0, abs=1e-15)
