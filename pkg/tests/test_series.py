import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forcedosc import SmoothnessPolicyError, build_gentrig, profile
from forcedosc.normalform import CoeffExpr, KappaProfile, NFTerm, poisson_bracket, symbol
from forcedosc.normalform.coeffs import mono_dt
from forcedosc.normalform.engine import h00

from conftest import full_forcing


# -- CoeffExpr ------------------------------------------------------------------


def test_leibniz_rule():
    p1 = CoeffExpr.sym(1)
    p2 = CoeffExpr.sym(2)
    e = p1 * p1 * p2
    d = e.dt()
    assert d == CoeffExpr({((1, 0), (1, 0), (2, 1)): 1.0, ((1, 0), (1, 1), (2, 0)): 2.0})


def test_derivative_cap():
    with pytest.raises(SmoothnessPolicyError):
        CoeffExpr.sym(2, 2).dt()
    with pytest.raises(SmoothnessPolicyError):
        CoeffExpr.sym(0, 3)
    assert mono_dt(()) == {}


def test_pruning_and_arithmetic():
    a = CoeffExpr.sym(0, 0, 1.0) + 1e-16
    assert a == CoeffExpr.sym(0)
    assert (a - a).is_zero()
    assert (2 * a).terms == {((0, 0),): 2.0}


def test_numeric_evaluation():
    f = full_forcing(2)
    e = CoeffExpr.sym(1) * CoeffExpr.sym(2, 1) + 0.5
    t = 0.3
    assert e.evaluate(f, t) == pytest.approx(f(1, t) * f(2, t, 1) + 0.5)
    assert e.ledger() == {1: 0, 2: 1}


# -- KappaProfile ---------------------------------------------------------------


def test_product_matches_pointwise(g2):
    a = profile(g2, 1, 0)
    b = profile(g2, 2, 1)
    A = KappaProfile.from_series(a.coeffs, g2.omega, symbol(0))
    B = KappaProfile.from_series(b.coeffs, g2.omega, symbol(1))
    P = A * B
    k = np.linspace(0, g2.period, 101)
    f = full_forcing(2)
    got = P.evaluate(f, k, 0.2)
    want = g2.sn(k) ** 3 * g2.cn(k) * f(0, 0.2) * f(1, 0.2)
    assert np.max(np.abs(got - want)) < 1e-9


def test_derivative_and_antiderivative_are_inverse(g2):
    p = KappaProfile.from_series(profile(g2, 3, 0).coeffs, g2.omega)
    back = p.antiderivative().dkappa()
    # antiderivative coefficients below the 1e-14 prune level are dropped
    tol = 1e-14 * np.maximum(1.0, g2.omega * np.arange(p.M + 1)) + 1e-16
    for m in p.data:
        assert np.all(np.abs(back.data[m] - p.oscillating().data[m]) <= tol)
    assert p.antiderivative().mean().is_zero()


def test_mean_is_harmonic_zero(g2):
    p = KappaProfile.from_series(profile(g2, 2, 0).coeffs, g2.omega, symbol(1), scale=-0.75)
    assert p.mean_expr() == CoeffExpr.sym(1, 0, -0.75 * 0.4569465810444635)
    assert p.mean().is_kappa_free()
    assert not p.is_kappa_free()


# -- brackets -------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_bracket_with_H00(n):
    g = build_gentrig(n)
    gp = KappaProfile.from_series(profile(g, 1, 1).coeffs, g.omega)
    H = h00(n, 64, g.omega)
    out = poisson_bracket(H, NFTerm(1, gp), n)
    assert len(out) == 1 and out[0].q == n
    want = gp.dkappa()
    assert np.max(np.abs(out[0].profile.data[()] - want.data[()])) < 1e-14


def test_bracket_of_constants_is_empty(g2):
    a = NFTerm(0, KappaProfile.constant(1.0, 64, g2.omega))
    b = NFTerm(0, KappaProfile.constant(CoeffExpr.sym(0), 64, g2.omega))
    assert poisson_bracket(a, b, 2) == []


def test_bracket_antisymmetry(g2):
    a = NFTerm(3, KappaProfile.from_series(profile(g2, 3, 0).coeffs, g2.omega, symbol(2)))
    b = NFTerm(1, KappaProfile.from_series(profile(g2, 1, 1).coeffs, g2.omega, symbol(0)))
    ab = poisson_bracket(a, b, 2)[0]
    ba = poisson_bracket(b, a, 2)[0]
    s = ab.profile + ba.profile
    assert all(np.max(np.abs(c)) < 1e-13 for c in s.data.values())


def test_grading_closure_500_pairs():
    # a P_r term (exponent 2n - r) bracketed with an R_s term (exponent n - s + 1) lands in row r + s
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(2, 5))
        g = build_gentrig(n)
        r, s = int(rng.integers(0, 11)), int(rng.integers(1, 11))
        a, b = int(rng.integers(1, 2 * n)), int(rng.integers(0, 2 * n - 1))
        A = NFTerm(2 * n - r, KappaProfile.from_series(profile(g, a, 0).coeffs, g.omega, symbol(0)))
        B = NFTerm(n - s + 1, KappaProfile.from_series(profile(g, b, 1).coeffs, g.omega, symbol(1)))
        for t in poisson_bracket(A, B, n):
            assert t.row(n) == r + s


@given(st.integers(2, 4), st.integers(-8, 8), st.integers(-8, 8))
def test_bracket_exponent_arithmetic(n, qa, qb):
    g = build_gentrig(n)
    A = NFTerm(qa, KappaProfile.from_series(profile(g, 1, 0).coeffs, g.omega))
    B = NFTerm(qb, KappaProfile.from_series(profile(g, 0, 1).coeffs, g.omega))
    for t in poisson_bracket(A, B, n):
        assert t.q == qa + qb - (n + 1)
