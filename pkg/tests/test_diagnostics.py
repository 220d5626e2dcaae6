import json
import os
import warnings

import numpy as np
import pytest

from forcedosc import Forcing, IntegratorConfig, build_gentrig, zero_forcing
from forcedosc.diagnostics import (
    TwistData,
    boundedness_scan,
    decay_fit,
    default_seeds,
    loglog_slope,
    noise_floor,
    twist_coefficients,
    twist_measure,
)
from forcedosc.errors import DomainError, ShapeError
from forcedosc.normalform import normalize
from forcedosc.reference import sn_power_mean

from conftest import ACCEPTANCE_TERMS, DATA

P1_ONE = Forcing.from_terms(2, 1.0, {1: {"const": 1.0}})


@pytest.fixture(scope="module")
def acc():
    return Forcing.from_terms(2, 1.0, ACCEPTANCE_TERMS)


# -- twist coefficients ---------------------------------------------------------


def test_sigma_for_constant_p1(g2):
    tw = twist_coefficients(normalize(g2, P1_ONE), P1_ONE)
    # fbar_2 = -(3/4) mean(sn^2); sigma_2 = (2/3) * (-1) * fbar_2 over a unit period
    fbar = -0.75 * sn_power_mean(g2, 2, 0)
    assert fbar == pytest.approx(-0.34271, abs=1e-5)
    assert tw.sigma[2] == pytest.approx(0.2284732905222318, rel=1e-10)
    assert tw.sigma[3] == 0.0


def test_sigma_zero_and_morris(g2, morris):
    for f in (zero_forcing(2), morris):
        tw = twist_coefficients(normalize(g2, f), f)
        assert all(s == 0.0 for s in tw.sigma.values())
        assert tw.alpha(7.0) == pytest.approx(7.0)
        assert tw.dalpha(7.0) == pytest.approx(1.0)


def test_alpha_derivative_consistent():
    tw = TwistData(3, 2.0, {2: 0.3, 3: -0.1, 4: 0.05, 5: 0.2})
    lam = np.linspace(2.0, 30.0, 9)
    h = 1e-6
    fd = (tw.alpha(lam + h) - tw.alpha(lam - h)) / (2 * h)
    assert np.max(np.abs(fd - tw.dalpha(lam))) < 1e-7


def test_twist_coefficients_reject_kappa_dependent_rows(g2, acc):
    r = normalize(g2, acc)
    with pytest.raises(ShapeError):
        twist_coefficients(r.H_intermediate, acc)


# -- measured twist -------------------------------------------------------------


def test_unforced_twist_is_T(g2, tight):
    z = zero_forcing(2, T=1.5)
    assert twist_measure(g2, z, tight, 20.0) == pytest.approx(1.5, rel=1e-8)
    fwd = IntegratorConfig(rtol=1e-12, atol=1e-13, direction="forward")
    assert twist_measure(g2, z, fwd, 20.0) == pytest.approx(1.5, rel=1e-8)


def test_twist_matches_prediction_for_constant_p1(g2, tight):
    tw = twist_coefficients(normalize(g2, P1_ONE), P1_ONE)
    m = twist_measure(g2, P1_ONE, tight, 20.0)
    # the "+" sign would predict 1 - 0.0023
    assert m == pytest.approx(float(tw.dalpha(20.0)), abs=2e-5)
    assert m > 1.0


def test_twist_morris_and_acceptance(g2, morris, acc, tight):
    assert twist_measure(g2, morris, tight, 50.0) == pytest.approx(1.0, rel=1e-2)
    assert twist_measure(g2, acc, tight, 100.0) == pytest.approx(1.0, rel=2e-2)


def test_twist_rejects_bad_lambda(g2, morris, tight):
    with pytest.raises(DomainError):
        twist_measure(g2, morris, tight, 0.0)


# -- decay ----------------------------------------------------------------------


def test_loglog_slope_exact():
    x = np.geomspace(1, 100, 7)
    assert loglog_slope(x, 3 * x**-1.7) == pytest.approx(-1.7, abs=1e-12)


def test_decay_degenerate_for_zero_forcing(g2, tight):
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        fit = decay_fit(g2, zero_forcing(2), tight, np.geomspace(10, 100, 6), np.linspace(0, 5, 4))
    assert fit.degenerate
    assert np.all(fit.F_max < noise_floor(fit.lams, tight.rtol))
    assert fit.dropped
    assert any(issubclass(w.category, RuntimeWarning) for w in rec)


def test_decay_rejects_short_ranges(g2, morris, tight):
    with pytest.raises(DomainError):
        decay_fit(g2, morris, tight, np.geomspace(10, 100, 5))
    with pytest.raises(DomainError):
        decay_fit(g2, morris, tight, np.geomspace(2, 100, 8))


def test_morris_G_decay_order(g2, morris):
    fit = decay_fit(g2, morris, IntegratorConfig(), np.geomspace(10, 100, 8))
    assert -2.2 <= fit.slope_G <= -1.8
    assert not fit.degenerate


def test_special_coordinates_decay_for_full_forcing(g2, acc):
    fit = decay_fit(g2, acc, IntegratorConfig(), np.geomspace(10, 100, 6), np.linspace(0, 5, 6), coordinates="special")
    assert fit.slope_F < -1.5 and fit.slope_G < -1.5


# -- boundedness ----------------------------------------------------------------


def test_default_seeds_deterministic(g2):
    a = default_seeds(g2, 10)
    assert a == default_seeds(g2, 10)
    assert a[0][0] == 5.0 and a[-1][0] == 50.0
    assert all(0 <= k < g2.period for _, k in a)


def test_zero_forcing_envelopes_have_zero_width(g2):
    rep = boundedness_scan(g2, zero_forcing(2), IntegratorConfig(), default_seeds(g2, 4), iters=50)
    for s in rep.seeds:
        assert s.envelope_ratio == pytest.approx(1.0, abs=1e-8)
    assert rep.escapes == 0


def test_scan_reproducible_and_parallel_matches_serial(g2, acc):
    seeds = default_seeds(g2, 6)
    a = boundedness_scan(g2, acc, IntegratorConfig(), seeds, iters=100)
    b = boundedness_scan(g2, acc, IntegratorConfig(), seeds, iters=100)
    c = boundedness_scan(g2, acc, IntegratorConfig(), seeds, iters=100, jobs=3)
    assert a.seeds == b.seeds == c.seeds


def test_escape_is_recorded_not_raised(g2, acc):
    rep = boundedness_scan(g2, acc, IntegratorConfig(), [(20.0, 0.1)], iters=5, K_ceiling=10.0)
    assert rep.escapes == 1
    assert rep.seeds[0].iterations < 5


def test_scan_input_validation(g2, acc):
    with pytest.raises(DomainError):
        boundedness_scan(g2, acc, IntegratorConfig(), [(0.0, 1.0)], iters=5)
    with pytest.raises(DomainError):
        boundedness_scan(g2, acc, IntegratorConfig(), [(1.0, 1.0)], iters=0)


def test_envelopes_pinned_subset(g2, acc):
    # five of the fifty pinned seeds at full length; the acceptance suite runs all
    with open(os.path.join(DATA, "scan_envelopes.json")) as fh:
        pin = json.load(fh)
    picks = [0, 12, 25, 37, 49]
    seeds = [(pin["seeds"][i]["K0"], pin["seeds"][i]["kappa0"]) for i in picks]
    assert seeds == [default_seeds(g2, 50)[i] for i in picks]
    rep = boundedness_scan(g2, acc, IntegratorConfig(), seeds, iters=pin["iters"], K_ceiling=pin["K_ceiling"])
    for i, s in zip(picks, rep.seeds):
        ref = pin["seeds"][i]
        assert not s.escaped
        assert s.envelope_ratio <= pin["pin_factor"] * ref["ratio"]
        assert s.K_max <= pin["pin_factor"] * ref["K_max"]
