"""Quick invariant suite behind ``forcedosc verify``.

Each check returns a :class:`Check`; the suite is a smaller-sample version of
the acceptance tests, runnable on any configured forcing.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .action_angle import ActionAngleState, _xy
from .diagnostics import boundedness_scan, decay_fit, default_seeds, twist_coefficients, twist_measure
from .flow import IntegratorConfig, period_map_arrays, period_map_jacobian, unforced_return_time
from .forcing import Forcing, minimum_smoothness
from .normalform.engine import lie_residual, normalize, solve_homological
from .normalform.transport import conjugacy_check
from .reference import _quarter_period_quadrature, build_gentrig

__all__ = ["Check", "run_suite", "symplectic_multiplier"]


@dataclass
class Check:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def symplectic_multiplier(g, K, kappa, h: float = 1e-6):
    """Central-difference determinant of ``(K, kappa) -> (x, y)``."""
    dK = h * K
    xKp, yKp = _xy(g, K + dK, kappa)
    xKm, yKm = _xy(g, K - dK, kappa)
    xkp, ykp = _xy(g, K, kappa + h)
    xkm, ykm = _xy(g, K, kappa - h)
    xK, yK = (xKp - xKm) / (2 * dK), (yKp - yKm) / (2 * dK)
    xk, yk = (xkp - xkm) / (2 * h), (ykp - ykm) / (2 * h)
    return xK * yk - xk * yK


def _timed(name: str, fn: Callable[[], tuple]) -> Check:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(name, bool(ok), detail, time.perf_counter() - t0)


def run_suite(f: Forcing, cfg: IntegratorConfig, i_max=None, q_min=None, M: int = 64, quick: bool = True) -> List[Check]:
    n = f.n
    g = build_gentrig(n, M)
    rng = np.random.default_rng(1234)
    checks = []

    def reference():
        k = rng.uniform(-3 * g.period, 3 * g.period, 100_000)
        sn, cn = g.sncn(k)
        res = float(np.max(np.abs(cn**2 + sn ** (2 * n) - 1)))
        dtau = abs(g.tau - _quarter_period_quadrature(n))
        return res < 1e-10 and dtau < 1e-10, f"identity residual {res:.2e}, tau error {dtau:.2e}"

    def multiplier():
        K = rng.uniform(0.5, 50, 20)
        kap = rng.uniform(0, g.period, 20)
        err = float(np.max(np.abs(symplectic_multiplier(g, K, kap) - n / (n + 1))))
        return err < 1e-6, f"max |det - n/(n+1)| = {err:.2e}"

    def return_time():
        worst = 0.0
        tcfg = cfg.tightened(100.0)
        for K in (0.5, 1.0, 8.0, 100.0):
            Tp = unforced_return_time(g, K)
            z = Forcing.from_terms(n, Tp, {})  # one forcing period = one unforced return
            K1, k1, _ = period_map_arrays(g, z, tcfg, K, 0.3)
            worst = max(worst, abs(k1[0] - 0.3 - g.period) / g.period, abs(K1[0] - K) / K)
        return worst < 1e-7, f"relative return error {worst:.2e}"

    def area():
        worst = 0.0
        tcfg = cfg.tightened(100.0)
        for K in rng.uniform(5, 50, 4 if quick else 50):
            J = period_map_jacobian(g, f, tcfg, ActionAngleState(float(K), float(rng.uniform(0, g.period))), h=1e-5)
            worst = max(worst, abs(np.linalg.det(J) - 1))
        return worst < 1e-5, f"max |det J - 1| = {worst:.2e}"

    checks += [
        _timed("reference functions", reference),
        _timed("symplectic multiplier", multiplier),
        _timed("unforced return time", return_time),
        _timed("area preservation", area),
    ]
    if n < 2:
        return checks

    state = {}

    def normal_form():
        r = normalize(g, f, i_max=i_max, q_min=q_min, M=M)
        state["nf"] = r
        bad = sum(len(lie_residual(d, *solve_homological(d, n), n)) for _, s in r.solved for d in s.D)
        over = {j: d for j, d in r.ledger.items() if d > minimum_smoothness(n, j)}
        ok = bad == 0 and not over
        return ok, f"ledger {r.ledger}, nonzero Lie residuals {bad}, threshold {r.threshold:.4g}"

    def twist():
        tw = twist_coefficients(state["nf"], f)
        lam = 100.0
        m = twist_measure(g, f, cfg.tightened(100.0), lam)
        err = abs(m - float(tw.dalpha(lam))) / f.T
        return err < 0.02, f"d kappa*/d Lambda = {m:.8f} at Lambda=100, predicted {float(tw.dalpha(lam)):.8f}"

    def conjugacy():
        rep = conjugacy_check(g, f, state["nf"])
        return rep.ok, (
            f"K0={rep.K0:.4g}: dK={rep.dK:.2e} (bound {rep.bound_K:.2e}), "
            f"dkappa={rep.dkappa:.2e} (bound {rep.bound_kappa:.2e})"
        )

    def decay():
        only_p0 = set(f.present) <= {0}
        lams = np.geomspace(10, 100, 8)
        fit = decay_fit(g, f, cfg, lams, coordinates="original" if only_p0 else "special")
        if fit.degenerate:
            return only_p0 and not f.present, "degenerate fit (no forcing)"
        # asserted as upper bounds on the decay exponents
        eF, eG = -1.0 / (n - 1), -n / (n - 1.0)
        ok = fit.slope_F <= eF + 0.15 and fit.slope_G <= eG + 0.2
        return ok, f"slope_F {fit.slope_F:.3f} (<= {eF + 0.15:.2f}), slope_G {fit.slope_G:.3f} (<= {eG + 0.2:.2f})"

    def scan():
        seeds = default_seeds(g, 5, (5.0, 50.0))
        rep = boundedness_scan(g, f, cfg, seeds, iters=200 if quick else 10_000)
        return rep.escapes == 0, f"{rep.escapes} escapes, K in [{rep.K_min:.4g}, {rep.K_max:.4g}]"

    checks.append(_timed("normal form", normal_form))
    if "nf" in state:
        checks += [_timed("twist", twist), _timed("conjugacy", conjugacy)]
    checks += [_timed("decay orders", decay), _timed("boundedness", scan)]
    return checks
