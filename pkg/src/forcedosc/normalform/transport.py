"""Numeric Lie transforms and the orbit-shadowing check.

A generator ``W(eps) = sum_k eps^k/k! W_{k+1}`` moves points by the flow
``dK/deps = dW/dkappa``, ``dkappa/deps = -dW/dK`` from ``eps = 0`` to ``1``;
this maps new (normalized) coordinates to old ones.  Running the same
``eps``-dependent flow backwards gives the inverse.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import DomainError, IntegrationError
from ..flow import IntegratorConfig, period_map_arrays
from ..forcing import Forcing
from ..reference import GenTrig
from .engine import NormalFormResult
from .series import NFSeries

__all__ = ["LieTransform", "ConjugacyReport", "conjugacy_check", "integrate_series_flow"]

EPS_RTOL = 1e-12
EPS_ATOL = 1e-13


class LieTransform:
    """The ``eps = 1`` flow of a generator series for a concrete forcing."""

    def __init__(self, W: NFSeries, f: Forcing):
        self.n = W.n
        # compiling a single row at eps = 1 yields W_{k+1}/k!; the flow at eps
        # then weights it by eps^k
        self.rows = [
            (i - W.offset, NFSeries(W.n, {i: W.rows[i]}, offset=W.offset).compile(f, eps=1.0))
            for i in sorted(W.rows)
        ]

    def velocity(self, eps: float, K: float, kappa: float, t: float):
        if K <= 0:
            raise DomainError("eps-flow left the K > 0 chart")
        dK = dk = 0.0
        for k, comp in self.rows:
            w = eps**k
            dK += w * float(comp(K, kappa, t, dkappa=1))
            dk -= w * float(comp(K, kappa, t, dK=1))
        return dK, dk

    def _run(self, K, kappa, t, e0, e1):
        if not self.rows:
            return float(K), float(kappa)
        sol = solve_ivp(
            lambda e, z: self.velocity(e, z[0], z[1], t),
            (e0, e1), [float(K), float(kappa)], method="DOP853", rtol=EPS_RTOL, atol=EPS_ATOL,
        )
        if not sol.success:
            raise IntegrationError(f"eps-flow failed: {sol.message}")
        return float(sol.y[0, -1]), float(sol.y[1, -1])

    def forward(self, K, kappa, t):
        """New coordinates to old."""
        return self._run(K, kappa, t, 0.0, 1.0)

    def inverse(self, K, kappa, t):
        """Old coordinates to new."""
        return self._run(K, kappa, t, 1.0, 0.0)


def to_original(result: NormalFormResult, f: Forcing, K, kappa, t):
    """Special-form coordinates to the original action-angle chart."""
    K1, k1 = LieTransform(result.W_stage2, f).forward(K, kappa, t)
    return LieTransform(result.W_stage1, f).forward(K1, k1, t)


def to_special(result: NormalFormResult, f: Forcing, K, kappa, t):
    K1, k1 = LieTransform(result.W_stage1, f).inverse(K, kappa, t)
    return LieTransform(result.W_stage2, f).inverse(K1, k1, t)


def integrate_series_flow(S: NFSeries, f: Forcing, K0, kappa0, t0, t1, rtol=1e-11, atol=1e-12):
    """Flow of an assembled Hamiltonian: ``K' = dS/dkappa``, ``kappa' = -dS/dK``."""
    comp = S.compile(f)

    def rhs(t, z):
        K, kap = z
        if K <= 0:
            raise DomainError("series flow left the K > 0 chart")
        return [float(comp(K, kap, t, dkappa=1)), -float(comp(K, kap, t, dK=1))]

    sol = solve_ivp(rhs, (t0, t1), [float(K0), float(kappa0)], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"series flow failed: {sol.message}")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


@dataclass
class ConjugacyReport:
    K0: float
    kappa0: float
    dK: float
    dkappa: float
    bound_K: float
    bound_kappa: float
    factor: float
    floor: float = 0.0

    @property
    def ok(self) -> bool:
        return (
            self.dK <= self.factor * self.bound_K + self.floor * self.K0
            and self.dkappa <= self.factor * self.bound_kappa + self.floor
        )


def conjugacy_check(
    g: GenTrig,
    f: Forcing,
    result: NormalFormResult,
    K0: Optional[float] = None,
    kappa0: float = 0.3,
    cfg: Optional[IntegratorConfig] = None,
    factor: float = 10.0,
    floor: float = 1e-8,
) -> ConjugacyReport:
    """Shadow one period of the original flow with the transported special flow.

    A point at ``K0`` (default ``4 * threshold``) in special coordinates is
    mapped to the original chart, and both flows are run over one period in
    the period-map direction.  The special endpoint is mapped back and compared
    with the original one; the tolerance is ``factor`` times the truncation
    drift bound over one period, plus ``floor`` (relative in ``K``) to absorb
    integration error when the normal form is exact.
    """
    cfg = cfg or IntegratorConfig(rtol=1e-12, atol=1e-13)
    K0 = 4.0 * result.threshold if K0 is None else K0
    t1 = cfg.sign * f.T
    Ko, ko = to_original(result, f, K0, kappa0, 0.0)
    K_true, k_true, _ = period_map_arrays(g, f, cfg, np.array([Ko]), np.array([ko]))
    K_true, k_true = float(K_true[0]), float(k_true[0])
    Ks, ks = integrate_series_flow(result.H_special, f, K0, kappa0, 0.0, t1)
    K_pred, k_pred = to_original(result, f, Ks, ks, t1)
    bK, bk = result.truncation.orbit_bound(min(K0, Ko, K_true), f.T)
    return ConjugacyReport(
        K0=float(K0),
        kappa0=float(kappa0),
        dK=abs(K_true - K_pred),
        dkappa=abs(k_true - k_pred),
        bound_K=bK,
        bound_kappa=bk,
        factor=factor,
        floor=floor,
    )
