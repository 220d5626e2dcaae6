"""Integration of the forced oscillator and its period map.

Trajectories are integrated in Cartesian coordinates with an adaptive
Dormand-Prince 5(4) pair; conversion to ``(K, kappa)`` or ``(Lambda, kappa)``
happens only at the endpoints.  The period map integrates one forcing period,
by default backwards from ``t = 0`` to ``t = -T`` so that the unforced twist
``kappa* - kappa = T Lambda`` is positive.

``Lambda`` denotes ``K^((n-1)/(n+1))`` throughout, which is the rate at which
``kappa`` decreases on the unforced flow.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate as _sp_integrate

from . import _kernels
from .action_angle import ActionAngleState, CartesianState, _kk, _xy, aa_gradient
from .errors import ChartSingularityError, DomainError, IntegrationError
from .forcing import Forcing
from .reference import GenTrig

__all__ = [
    "IntegratorConfig",
    "PeriodMapSample",
    "vf_xy",
    "vf_aa",
    "integrate",
    "integrate_tracked",
    "period_map",
    "period_map_lk",
    "period_map_arrays",
    "period_map_jacobian",
    "unforced_return_time",
    "lam_from_K",
    "K_from_lam",
]

K_FLOOR = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and direction for trajectory integration."""

    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf
    direction: str = "backward"
    max_steps: int = 50_000_000
    k_floor: float = K_FLOOR

    def __post_init__(self):
        if not (0 < self.rtol <= 1e-6 and 0 < self.atol <= 1e-6):
            raise DomainError("rtol and atol must lie in (0, 1e-6]")
        if self.direction not in ("forward", "backward"):
            raise DomainError(f"direction must be 'forward' or 'backward', got {self.direction!r}")
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")

    @property
    def sign(self) -> float:
        return -1.0 if self.direction == "backward" else 1.0

    def tightened(self, factor: float = 100.0) -> "IntegratorConfig":
        return replace(self, rtol=self.rtol / factor, atol=self.atol / factor)


@dataclass(frozen=True)
class PeriodMapSample:
    """One application of the period map in ``(Lambda, kappa)``.

    ``kappa_star`` is continuous (not reduced), so ``kappa_star - kappa`` is
    the full angle advance.  ``G`` is measured against the unforced twist
    ``+/- T Lambda``; diagnostics subtract richer twist predictions themselves.
    """

    lam: float
    kappa: float
    lam_star: float
    kappa_star: float
    winding: int
    K: float
    K_star: float
    F: float
    G: float


def lam_from_K(n: int, K):
    if n < 2:
        raise DomainError("Lambda = K^((n-1)/(n+1)) needs n >= 2")
    return np.asarray(K, dtype=float) ** ((n - 1) / (n + 1))


def K_from_lam(n: int, lam):
    if n < 2:
        raise DomainError("Lambda = K^((n-1)/(n+1)) needs n >= 2")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise DomainError("Lambda must be positive")
    return lam ** ((n + 1) / (n - 1))


def _forcing_args(f: Forcing):
    const, ca, sa = f.arrays()
    return f.n, const, ca, sa, f.omega


def _level_floor(n: int, cfg: IntegratorConfig) -> float:
    return cfg.k_floor ** (2 * n / (n + 1))


def vf_xy(g: GenTrig, f: Forcing, t, x, y):
    """Cartesian vector field ``(y, -n x^(2n-1) + sum_j p_j(t) x^j)``."""
    n = g.degree
    rhs = -n * np.asarray(x, dtype=float) ** (2 * n - 1)
    for j in f.present:
        rhs = rhs + f(j, t) * np.asarray(x, dtype=float) ** j
    return y, rhs


def vf_aa(g: GenTrig, f: Forcing, t, lam, kappa):
    """``(Lambda', kappa')`` from ``K' = dH/dkappa``, ``kappa' = -dH/dK``."""
    n = g.degree
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise DomainError("Lambda must be positive")
    K = K_from_lam(n, lam)
    dHdK, dHdk = aa_gradient(g, f, K, kappa, t)
    Kdot = dHdk
    kdot = -dHdK
    lamdot = (n - 1) / (n + 1) * K ** (-2.0 / (n + 1)) * Kdot
    return lamdot, kdot


def _check_status(status: int, t: float) -> None:
    if status == _kernels.OK:
        return
    if status == _kernels.CHART_FLOOR:
        raise ChartSingularityError(f"trajectory passed below K_floor near t={t:.6g}")
    reason = {
        _kernels.STEP_UNDERFLOW: "step size underflow",
        _kernels.MAX_STEPS: "maximum number of steps exceeded",
    }.get(status, f"status {status}")
    raise IntegrationError(f"integration failed near t={t:.6g}: {reason}")


def integrate_tracked(g: GenTrig, f: Forcing, cfg: IntegratorConfig, x: float, y: float, t0: float, t1: float):
    """Cartesian integration returning ``(x, y, quarters)``.

    ``quarters`` counts net quadrant transitions in the direction of increasing
    ``kappa``; it is what makes the continuous angle recoverable.
    """
    n, const, ca, sa, om = _forcing_args(f)
    xo, yo, t, status, _, quarters = _kernels.integrate_xy(
        n, const, ca, sa, om, float(x), float(y), float(t0), float(t1),
        cfg.rtol, cfg.atol, float(cfg.max_step), _level_floor(n, cfg), cfg.max_steps,
    )
    _check_status(status, t)
    return xo, yo, quarters


def _aa_rhs(g: GenTrig, f: Forcing):
    def rhs(t, z):
        K, kappa = z
        if K <= 0:
            raise ChartSingularityError("K reached zero in the action-angle chart")
        dHdK, dHdk = aa_gradient(g, f, K, kappa, t)
        return [dHdk, -dHdK]

    return rhs


def integrate(g: GenTrig, f: Forcing, cfg: IntegratorConfig, state, t0: float, t1: float, chart: str = "cartesian"):
    """Advance ``state`` from ``t0`` to ``t1``.

    ``state`` may be a :class:`CartesianState` or an :class:`ActionAngleState`;
    the result has the same type.  With ``chart="cartesian"`` (default) the
    integration itself always runs in ``(x, y)``.  For action-angle output the
    returned ``kappa`` is reduced to ``[0, 4 tau)``.
    """
    if t1 == t0:
        raise DomainError("t1 must differ from t0")
    if chart not in ("cartesian", "action_angle"):
        raise DomainError(f"unknown chart {chart!r}")
    if isinstance(state, CartesianState):
        x, y = state.x, state.y
    elif isinstance(state, ActionAngleState):
        x, y = _xy(g, state.K, state.kappa)
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if not np.all(np.isfinite([x, y])):
        raise DomainError("state must be finite")

    if chart == "cartesian":
        xo, yo, _ = integrate_tracked(g, f, cfg, x, y, t0, t1)
        if isinstance(state, CartesianState):
            return CartesianState(float(xo), float(yo), t1)
        K, kappa = _kk(g, xo, yo)
        return ActionAngleState(float(K), float(kappa), t1)

    K0, k0 = _kk(g, x, y)
    sol = _sp_integrate.solve_ivp(
        _aa_rhs(g, f), (t0, t1), [K0, k0], method="RK45", rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step
    )
    if not sol.success:
        raise IntegrationError(sol.message)
    K, kappa = sol.y[:, -1]
    if isinstance(state, ActionAngleState):
        return ActionAngleState(float(K), float(np.mod(kappa, g.period)), t1)
    xo, yo = _xy(g, K, kappa)
    return CartesianState(float(xo), float(yo), t1)


def period_map_arrays(g: GenTrig, f: Forcing, cfg: IntegratorConfig, K, kappa):
    """Vectorized period map on arrays of ``(K, kappa)``.

    Returns ``(K_star, kappa_star, winding)`` with continuous ``kappa_star``.
    Raises on the first trajectory that fails.
    """
    n = g.degree
    K = np.atleast_1d(np.asarray(K, dtype=float))
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    K, kappa = np.broadcast_arrays(K, kappa)
    if np.any(K <= cfg.k_floor):
        raise ChartSingularityError("initial action below K_floor")
    x, y = _xy(g, K, kappa)
    n_, const, ca, sa, om = _forcing_args(f)
    t1 = cfg.sign * f.T
    xo, yo, status, quarters = _kernels.period_map_batch(
        n_, const, ca, sa, om, np.ascontiguousarray(x, dtype=float), np.ascontiguousarray(y, dtype=float),
        0.0, t1, cfg.rtol, cfg.atol, float(cfg.max_step), _level_floor(n, cfg), cfg.max_steps,
    )
    for st in status:
        _check_status(int(st), t1)
    K_star, k_red = _kk(g, xo, yo)
    _, k0_red = _kk(g, x, y)
    # quadrants from coordinate signs, matching both the kernel and the inverse
    q0 = _quadrants(x, y)
    q1 = _quadrants(xo, yo)
    m = q0 + quarters - q1
    if np.any(m % 4):
        raise IntegrationError("inconsistent quadrant bookkeeping")
    winding = m // 4
    kappa_star = kappa + (k_red - k0_red) + g.period * winding
    return np.asarray(K_star), kappa_star, winding


def _quadrants(x, y) -> np.ndarray:
    s, c = np.asarray(x), -np.asarray(y)
    return np.where(
        (s >= 0) & (c > 0), 0, np.where((s > 0) & (c <= 0), 1, np.where((s <= 0) & (c < 0), 2, 3))
    ).astype(np.int64)


def period_map(g: GenTrig, f: Forcing, cfg: IntegratorConfig, state: ActionAngleState) -> PeriodMapSample:
    """Period map of one action-angle state, see :class:`PeriodMapSample`."""
    n = g.degree
    if state.K <= 0:
        raise DomainError("action K must be positive")
    K_star, kappa_star, winding = period_map_arrays(g, f, cfg, state.K, state.kappa)
    lam = float(lam_from_K(n, state.K))
    lam_star = float(lam_from_K(n, K_star[0]))
    twist = -cfg.sign * f.T * lam
    return PeriodMapSample(
        lam=lam,
        kappa=state.kappa,
        lam_star=lam_star,
        kappa_star=float(kappa_star[0]),
        winding=int(winding[0]),
        K=state.K,
        K_star=float(K_star[0]),
        F=lam_star - lam,
        G=float(kappa_star[0] - state.kappa - twist),
    )


def period_map_lk(g: GenTrig, f: Forcing, cfg: IntegratorConfig, lam: float, kappa: float) -> PeriodMapSample:
    return period_map(g, f, cfg, ActionAngleState(float(K_from_lam(g.degree, lam)), kappa))


def period_map_jacobian(
    g: GenTrig, f: Forcing, cfg: IntegratorConfig, state: ActionAngleState, h: float = 1e-4
) -> np.ndarray:
    """Central-difference Jacobian of ``(K, kappa) -> (K*, kappa*)``.

    The ``K`` step is relative (``h K``), the ``kappa`` step is ``h`` times
    the angle period.
    """
    if not 1e-7 <= h <= 1e-3:
        raise DomainError("finite-difference step must lie in [1e-7, 1e-3]")
    K, kappa = state.K, state.kappa
    dK = h * K
    dk = h * g.period
    Ks = np.array([K + dK, K - dK, K, K])
    ks = np.array([kappa, kappa, kappa + dk, kappa - dk])
    K_star, k_star, _ = period_map_arrays(g, f, cfg, Ks, ks)
    J = np.empty((2, 2))
    J[0, 0] = (K_star[0] - K_star[1]) / (2 * dK)
    J[1, 0] = (k_star[0] - k_star[1]) / (2 * dK)
    J[0, 1] = (K_star[2] - K_star[3]) / (2 * dk)
    J[1, 1] = (k_star[2] - k_star[3]) / (2 * dk)
    return J


def unforced_return_time(g: GenTrig, K: float) -> float:
    """Period ``4 tau K^(-(n-1)/(n+1))`` of the unforced oscillation at action ``K``."""
    if K <= 0:
        raise DomainError("action K must be positive")
    n = g.degree
    return g.period * K ** (-(n - 1) / (n + 1))
