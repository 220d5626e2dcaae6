import numpy as np
import pytest

from forcedosc import Forcing, aa_hamiltonian, build_gentrig, morris_forcing, zero_forcing
from forcedosc.errors import ShapeError, SmoothnessPolicyError
from forcedosc.forcing import minimum_smoothness
from forcedosc.normalform import (
    KappaProfile,
    NFSeries,
    NFTerm,
    convergence_threshold,
    evaluate_series,
    lie_residual,
    normalize,
    poisson_bracket,
    remainder_diagonal,
    required_smoothness,
    solve_homological,
    symbol,
)
from forcedosc.normalform.engine import h00, hamiltonian_series
from forcedosc.reference import profile

from conftest import full_forcing

ONLY_P2 = Forcing.from_terms(2, 1.0, {2: {"cos": [0.0, 0.2]}})


@pytest.fixture(scope="module")
def full2():
    f = full_forcing(2)
    return f, normalize(build_gentrig(2), f)


@pytest.fixture(scope="module")
def full3():
    f = full_forcing(3)
    return f, normalize(build_gentrig(3), f)


@pytest.fixture(scope="module")
def only_p2():
    return normalize(build_gentrig(2), ONLY_P2)


def _w1_hand(g, f, K, kap, t):
    # W_1 = -(1/4) K^(2/3) cn(kappa) p_2(t)
    return -0.25 * K ** (2 / 3) * g.cn(kap) * f(2, t)


# -- homological equation -------------------------------------------------------


def test_homological_hand_example(g2):
    # row 1 of the n=2 Hamiltonian: K * (-1/2 sn^3 p_2)
    D = NFTerm(1, KappaProfile.from_series(profile(g2, 3, 0).coeffs, g2.omega, symbol(2), -0.5))
    B, C = solve_homological(D, 2)
    assert B.profile.is_zero()
    assert C.q == 0
    kap = np.linspace(0, g2.period, 50)
    expected = -0.25 * g2.cn(kap) * ONLY_P2(2, 0.1)
    assert np.max(np.abs(C.profile.evaluate(ONLY_P2, kap, 0.1) - expected)) < 1e-12
    assert lie_residual(D, B, C, 2) == []


def test_homological_kappa_free_input(g2):
    D = NFTerm(3, KappaProfile.constant(0.7, 64, g2.omega))
    B, C = solve_homological(D, 2)
    assert C.profile.is_zero()
    assert np.allclose(B.profile.numeric({}), D.profile.numeric({}))


def test_bracket_with_unperturbed_term(g2):
    # {H_0^0, K^(1/3) g(kappa)} = K^(2/3) g'(kappa) for n = 2
    g = KappaProfile.from_series(profile(g2, 1, 0).coeffs, g2.omega)
    out = poisson_bracket(h00(2, 64, g2.omega), NFTerm(1, g), 2)
    assert len(out) == 1 and out[0].q == 2
    kap = np.linspace(0, 5, 40)
    assert np.max(np.abs(out[0].profile.evaluate(None, kap, 0.0) - g2.cn(kap))) < 1e-10


def test_bracket_of_constants_is_empty(g2):
    a = NFTerm(0, KappaProfile.constant(1.0, 64, g2.omega))
    assert poisson_bracket(a, a, 2) == []


# -- spec examples --------------------------------------------------------------


def test_morris_is_already_normal(g2, morris):
    r = normalize(g2, morris)
    assert r.W_stage1.is_zero() and r.W_stage2.is_zero()
    assert r.ledger == {0: 0}
    assert r.threshold == 1.0
    K, kap = 3.0, np.linspace(0, g2.period, 9)
    for t in (0.0, 0.37):
        ref = aa_hamiltonian(g2, morris, K, kap, t)
        assert np.max(np.abs(evaluate_series(r.H_intermediate, morris, K, kap, t) - ref)) < 1e-12
        assert np.max(np.abs(evaluate_series(r.H_special, morris, K, kap, t) - ref)) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_zero_forcing_leaves_h00(n):
    g = build_gentrig(n)
    r = normalize(g, zero_forcing(n))
    for S in (r.H_intermediate, r.H_special):
        assert list(S.rows) == [0]
    assert r.ledger == {}
    if n == 2:
        assert evaluate_series(r.H_special, zero_forcing(2), 1.0, 0.3, 0.0) == pytest.approx(0.75, abs=1e-15)


def test_only_p2_generator_and_remainder(g2, only_p2):
    r = only_p2
    assert list(r.W_stage1.rows) == [1]
    kap = np.linspace(0, g2.period, 21)
    for t in (0.0, 0.13):
        got = evaluate_series(r.W_stage1, ONLY_P2, 2.0, kap, t)
        assert np.max(np.abs(got - _w1_hand(g2, ONLY_P2, 2.0, kap, t))) < 1e-12
    # H_0^1 is the kappa-mean of sn^3, zero
    assert r.solved[0][1].row == 1 and all(b.profile.is_zero() for b in r.solved[0][1].B)
    # R_0^0 = (1/4) K^(2/3) cn p_2'
    R00 = r.R_stage1[0]
    assert len(R00) == 1 and R00[0].q == 2
    want = 0.25 * g2.cn(kap) * ONLY_P2(2, 0.13, 1)
    assert np.max(np.abs(R00[0].profile.evaluate(ONLY_P2, kap, 0.13) - want)) < 1e-12


def test_remainders_vanish_for_zero_generator_and_constant_forcing(g2):
    assert all(not r for r in remainder_diagonal(NFSeries(2, offset=1), 6, -4))
    f = Forcing.from_terms(2, 1.0, {j: {"const": 0.3} for j in range(3)})
    r = normalize(g2, f)
    assert not r.W_stage1.is_zero()
    # remainders are symbolic in p_j'; they vanish once the constants are substituted
    kap = np.linspace(0, g2.period, 11)
    for rows in r.R_stage1 + r.R_stage2:
        for t in rows:
            assert np.max(np.abs(t.profile.evaluate(f, kap, 0.3))) == 0.0


@pytest.mark.parametrize("fixture,n", [("full2", 2), ("full3", 3)])
def test_remainder_grading(request, fixture, n):
    _, r = request.getfixturevalue(fixture)
    for R in (r.R_stage1, r.R_stage2):
        for j, terms in enumerate(R):
            assert all(t.q == n - j for t in terms)


# -- shapes and Lie residuals ---------------------------------------------------


@pytest.mark.parametrize("fixture,n", [("full2", 2), ("full3", 3)])
def test_shapes_and_lie_residuals(request, fixture, n):
    _, r = request.getfixturevalue(fixture)
    for q, prof in r.H_intermediate.terms_by_exponent().items():
        if q >= n + 1:
            assert prof.is_kappa_free(), q
    for q, prof in r.H_special.terms_by_exponent().items():
        if q >= 2:
            assert prof.is_kappa_free(), q
    # below the kappa-free band something still depends on kappa
    low = r.H_special.terms_by_exponent()
    assert any(not low[q].is_kappa_free() for q in low if q <= 1)
    for _, s in r.solved:
        for d in s.D:
            assert lie_residual(d, *solve_homological(d, n), n) == []
    assert {s.row for st, s in r.solved if st == 1} == set(range(1, n))
    assert {s.row for st, s in r.solved if st == 2} == set(range(n, 2 * n - 1))


def test_stage1_keeps_row_n_kappa_dependent(full2):
    _, r = full2
    by_q = r.H_intermediate.terms_by_exponent()
    assert not by_q[2].is_kappa_free()


def test_include_row_n_flag(g2):
    f = full_forcing(2)
    r = normalize(g2, f, include_row_n=True)
    assert 2 in r.W_stage1.rows
    assert {s.row for st, s in r.solved if st == 1} == {1, 2}
    # the triangle diagonal at row n is kappa-free, but -dW_1/dt lands at exponent n too,
    # so the assembled exponent stays kappa-dependent until stage 2
    assert not r.H_intermediate.terms_by_exponent()[2].is_kappa_free()
    assert all(t.q == 2 for t in r.R_stage1[0]) and r.R_stage1[0]
    assert r.H_special.terms_by_exponent()[2].is_kappa_free()
    assert r.ledger == {0: 0, 1: 1, 2: 2}


def test_shape_check_raises_when_stage_is_skipped(g2, monkeypatch):
    import forcedosc.normalform.engine as eng

    monkeypatch.setattr(eng, "stage2", lambda H1, i_max, q_min: (NFSeries(2, offset=1), H1, [], _FakeTri(), NFSeries(2)))
    with pytest.raises(ShapeError):
        eng.normalize(g2, full_forcing(2))


class _FakeTri:
    dropped = {}


def test_degree_mismatch_and_n1(g2, g1):
    with pytest.raises(ShapeError):
        normalize(g2, full_forcing(3))
    with pytest.raises(ShapeError):
        normalize(g1, Forcing.from_terms(1, 1.0, {0: {"cos": [1.0]}}))


# -- smoothness ledger ----------------------------------------------------------

LEDGERS = {
    2: {0: 0, 1: 1, 2: 2},
    3: {0: 0, 1: 1, 2: 1, 3: 2, 4: 2},
    4: {0: 0, 1: 1, 2: 1, 3: 1, 4: 2, 5: 2, 6: 2},
}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_smoothness_ledger_matches_table(n, request):
    if n == 2:
        r = request.getfixturevalue("full2")[1]
    elif n == 3:
        r = request.getfixturevalue("full3")[1]
    else:
        r = normalize(build_gentrig(4), full_forcing(4))
    led = required_smoothness(r)
    assert led == LEDGERS[n]
    assert all(d <= minimum_smoothness(n, j) for j, d in led.items())


def test_only_p2_ledger(only_p2):
    assert required_smoothness(only_p2) == {2: 2}


def test_ledger_exceedance_is_fatal(only_p2):
    import copy

    bad = copy.copy(only_p2)
    bad.ledger = {0: 1}
    with pytest.raises(SmoothnessPolicyError):
        required_smoothness(bad)


# -- threshold and truncation ---------------------------------------------------


def test_threshold_unit_for_zero_generator(g2, morris):
    assert convergence_threshold(NFSeries(2, offset=1), 2, morris, g2) == (1.0, 0.0)


def test_threshold_grid_oracle(g2, only_p2):
    # A = max |dW_1-profile/dkappa| / 3 = max|sn^3| * 0.2 / 2 / 3, B = 1
    A = 0.5 * 0.2 / 3
    thr, disp = convergence_threshold(only_p2.W_stage1, 2, ONLY_P2, g2)
    assert thr == pytest.approx((1 + 2 * A) ** 1.5, rel=1e-3)
    # C = max|cn| * 0.2 / 4, B' = 2/3
    assert disp == pytest.approx(2 / 3 * 0.05, rel=1e-3)


def test_threshold_grows_with_forcing(g2):
    t1 = normalize(g2, Forcing.from_terms(2, 1.0, {2: {"cos": [0.3]}})).threshold
    t2 = normalize(g2, Forcing.from_terms(2, 1.0, {2: {"cos": [0.6]}})).threshold
    assert 1.0 < t1 < t2


def test_truncation_report(full2):
    f, r = full2
    tr = r.truncation
    assert tr.i_max == 6 and tr.q_min == -4
    assert set(tr.tail.rows) <= {7, 8}
    assert tr.fourier_residual < 1e-9
    b10, b100 = tr.bound(10.0), tr.bound(100.0)
    assert 0 < b100 < b10 < 1
    dk, dK = tr.orbit_bound(10.0, f.T)
    assert dk > 0 and dK > 0
    with pytest.raises(ValueError):
        tr.bound(10.0, "nope")


def test_factorial_convention_matches_hamiltonian(g2):
    # assembled original rows reproduce the action-angle Hamiltonian
    f = full_forcing(2)
    H = hamiltonian_series(g2, f.present)
    kap = np.linspace(0, g2.period, 13)
    for t in (0.0, 0.4):
        got = evaluate_series(H, f, 5.0, kap, t)
        assert np.max(np.abs(got - aa_hamiltonian(g2, f, 5.0, kap, t))) < 1e-10
