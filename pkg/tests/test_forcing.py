import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forcedosc import Forcing, SmoothnessPolicyError, ValidationError, minimum_smoothness, morris_forcing, zero_forcing
from forcedosc.forcing import validate


def test_minimum_smoothness_table():
    assert [minimum_smoothness(3, j) for j in range(5)] == [0, 1, 1, 2, 2]
    assert [minimum_smoothness(2, j) for j in range(3)] == [0, 1, 2]


def test_eval_and_exact_derivatives():
    f = Forcing.from_terms(2, 2.0, {1: {"const": 0.5, "cos": [1.0, 0.0, 0.25], "sin": [0.0, -0.3]}})
    t = np.linspace(0, 2, 17)
    w = np.pi
    p = 0.5 + np.cos(w * t) + 0.25 * np.cos(3 * w * t) - 0.3 * np.sin(2 * w * t)
    dp = -w * np.sin(w * t) - 0.75 * w * np.sin(3 * w * t) - 0.6 * w * np.cos(2 * w * t)
    assert np.allclose(f(1, t), p, atol=1e-14)
    assert np.allclose(f(1, t, 1), dp, atol=1e-12)
    # p_1 is C1 for n = 2
    with pytest.raises(SmoothnessPolicyError):
        f(1, t, 2)


def test_declared_smoothness_allows_more():
    f = Forcing.from_terms(2, 1.0, {0: {"cos": [1.0]}}, smoothness={0: "C2"})
    assert f(0, 0.0, 2) == pytest.approx(-(2 * np.pi) ** 2)


def test_validation_failures():
    assert not validate(Forcing.from_terms(2, 1.0, {3: {"const": 1.0}})).ok
    assert not validate(Forcing.from_terms(2, -1.0, {0: {"const": 1.0}})).ok
    assert not validate(Forcing.from_terms(2, 1.0, {1: {"const": 1.0}}, smoothness={1: 0})).ok
    assert not validate(Forcing.from_terms(2, 1.0, {0: {"const": np.nan}})).ok
    assert validate(morris_forcing()).ok


def test_config_roundtrip_and_unknown_keys():
    f = Forcing.from_terms(3, 0.5, {0: {"cos": [1.0]}, 4: {"const": 0.2, "sin": [0, 0.1]}})
    g = Forcing.from_config(json.loads(f.to_json()))
    assert np.array_equal(g.arrays()[0], f.arrays()[0])
    assert np.array_equal(g.arrays()[2], f.arrays()[2])
    assert g.present == f.present
    with pytest.raises(ValidationError):
        Forcing.from_config({"n": 2, "T": 1.0, "p": [], "extra": 1})
    with pytest.raises(ValidationError):
        Forcing.from_config({"n": 2, "T": 1.0, "p": [{"j": 0, "amp": 1}]})
    with pytest.raises(ValidationError):
        Forcing.from_config({"n": 2, "T": 1.0, "p": [{"j": 0}, {"j": 0}]})
    with pytest.raises(ValidationError):
        Forcing.from_config({"n": 2, "T": 1.0, "p": [{"j": 0, "cos": [0.1] * 33}]})


def test_present_and_degree():
    assert zero_forcing(3).degree == -1
    f = Forcing.from_terms(2, 1.0, {0: {"const": 0.0}, 2: {"cos": [0.1]}})
    assert f.present == (2,)
    assert f.degree == 2
    assert f.scaled(0.0)(2, 0.3) == 0.0


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4), st.floats(0.1, 10), st.floats(-5, 5))
def test_periodicity(amps, T, t):
    f = Forcing.from_terms(2, T, {0: {"cos": amps, "sin": amps[::-1]}})
    assert f(0, t) == pytest.approx(f(0, t + T), abs=1e-9)
