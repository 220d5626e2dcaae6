import numpy as np
import pytest
from scipy.integrate import solve_ivp

from forcedosc import (
    ActionAngleState,
    CartesianState,
    ChartSingularityError,
    DomainError,
    Forcing,
    IntegratorConfig,
    build_gentrig,
    integrate,
    period_map,
    period_map_arrays,
    period_map_jacobian,
    period_map_lk,
    unforced_return_time,
)
from forcedosc.action_angle import _kk, _xy
from forcedosc.flow import K_from_lam, lam_from_K

from conftest import full_forcing


def dop853(f, x, y, t0, t1):
    n = f.n

    def rhs(t, z):
        poly = sum(f(j, t) * z[0] ** j for j in range(2 * n - 1))
        return [z[1], -n * z[0] ** (2 * n - 1) + poly]

    sol = solve_ivp(rhs, (t0, t1), [x, y], method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1]


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("K", [0.5, 1.0, 8.0, 100.0])
def test_unforced_return_time_against_event_oracle(n, K):
    g = build_gentrig(n)
    x0, y0 = _xy(g, K, 0.0)  # x = 0, y < 0
    # first return to x = 0 with y < 0, found by an event on the oracle ODE
    ev = lambda t, z: z[0]
    ev.direction = -1.0
    sol = solve_ivp(
        lambda t, z: [z[1], -n * z[0] ** (2 * n - 1)], (0, 10 * unforced_return_time(g, K)), [x0, y0],
        method="DOP853", rtol=1e-13, atol=1e-14, events=ev,
    )
    returns = [t for t in sol.t_events[0] if t > 1e-9]
    oracle = returns[0]  # downward crossings only, so the half turn is skipped
    assert unforced_return_time(g, K) == pytest.approx(oracle, rel=1e-9)


def test_lambda_conversions():
    assert lam_from_K(2, 8.0) == pytest.approx(2.0)
    assert K_from_lam(3, 2.0) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        lam_from_K(1, 2.0)


@pytest.mark.parametrize("forcing", ["morris", "full"])
def test_endpoint_matches_dop853(forcing, morris, tight):
    f = morris if forcing == "morris" else full_forcing(2)
    g = build_gentrig(2)
    for K, k in [(3.0, 0.2), (40.0, 2.5), (400.0, 4.0)]:
        x, y = _xy(g, K, k)
        end = integrate(g, f, tight, CartesianState(float(x), float(y)), 0.0, -1.0)
        ox, oy = dop853(f, float(x), float(y), 0.0, -1.0)
        assert end.x == pytest.approx(ox, rel=1e-8, abs=1e-9)
        assert end.y == pytest.approx(oy, rel=1e-8, abs=1e-9)


def test_action_angle_chart_agrees(morris, tight):
    g = build_gentrig(2)
    s = ActionAngleState(20.0, 1.0)
    a = integrate(g, morris, tight, s, 0.0, -1.0)
    b = integrate(g, morris, tight, s, 0.0, -1.0, chart="action_angle")
    assert a.K == pytest.approx(b.K, rel=1e-8)
    assert a.kappa == pytest.approx(b.kappa, abs=1e-7)


def test_continuous_angle_counts_windings(g2, tight):
    z = Forcing.from_terms(2, 1.0, {})
    K = K_from_lam(2, 37.0)
    K1, k1, w = period_map_arrays(g2, z, tight, K, 0.4)
    # unforced: kappa advances exactly T * Lambda backwards in time
    assert k1[0] - 0.4 == pytest.approx(37.0, rel=1e-10)
    assert w[0] == int((0.4 + 37.0) // g2.period)
    assert K1[0] == pytest.approx(K, rel=1e-11)


def test_forward_direction_reverses_twist(g2, morris):
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-13, direction="forward")
    s = period_map_lk(g2, morris, cfg, 10.0, 0.0)
    assert s.kappa_star - s.kappa == pytest.approx(-10.0, abs=0.05)
    assert abs(s.G) < 0.05


def test_morris_period_map_frozen(g2, morris, tight):
    # frozen first-run values (tight tolerances), confirmed against dop853 above
    s = period_map_lk(g2, morris, tight, 10.0, 0.0)
    assert s.F == pytest.approx(-0.003421352326158811, rel=1e-6)
    assert s.G == pytest.approx(6.87306774498353e-05, rel=1e-4)
    assert s.winding == 1
    s = period_map_lk(g2, morris, tight, 50.0, 2.0)
    assert s.F == pytest.approx(-0.00021298771805078331, rel=1e-5)
    assert s.winding == 9


def test_period_map_against_oracle(g2, tight):
    f = full_forcing(2)
    K, k = 25.0, 1.7
    s = period_map(g2, f, tight, ActionAngleState(K, k))
    x, y = _xy(g2, K, k)
    ox, oy = dop853(f, float(x), float(y), 0.0, -1.0)
    Ko, ko = _kk(g2, ox, oy)
    assert s.K_star == pytest.approx(Ko, rel=1e-8)
    d = (s.kappa_star - ko) % g2.period
    assert min(d, g2.period - d) < 1e-7


@pytest.mark.parametrize("forcing", ["morris", "full"])
def test_area_preservation(forcing, morris, rng):
    g = build_gentrig(2)
    f = morris if forcing == "morris" else full_forcing(2)
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-14)
    for _ in range(5):
        st = ActionAngleState(float(rng.uniform(5, 60)), float(rng.uniform(0, g.period)))
        J = period_map_jacobian(g, f, cfg, st, h=1e-5)
        assert abs(np.linalg.det(J) - 1) < 1e-5


def test_jacobian_step_validation(g2, morris, tight):
    with pytest.raises(DomainError):
        period_map_jacobian(g2, morris, tight, ActionAngleState(10.0, 0.0), h=0.1)


def test_chart_floor(g2):
    f = Forcing.from_terms(2, 1.0, {})
    cfg = IntegratorConfig(k_floor=1e-3)
    with pytest.raises(ChartSingularityError):
        period_map_arrays(g2, f, cfg, 1e-4, 0.0)


def test_config_validation():
    with pytest.raises(DomainError):
        IntegratorConfig(rtol=1e-3)
    with pytest.raises(DomainError):
        IntegratorConfig(direction="sideways")
    assert IntegratorConfig().tightened(10).rtol == pytest.approx(1e-11)
