"""Checks tying the normal form to the numerically integrated period map.

* twist coefficients ``sigma_j`` and the predicted angle advance ``alpha``;
* the numeric twist ``d kappa*/d Lambda``;
* decay orders of the period-map corrections ``F`` and ``G``;
* long-time boundedness scans.

``Lambda`` is ``K^((n-1)/(n+1))`` throughout.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .action_angle import _xy
from .errors import DomainError, ShapeError
from .flow import IntegratorConfig, K_from_lam, _forcing_args, _level_floor, lam_from_K, period_map_arrays
from .forcing import Forcing
from .normalform.engine import NormalFormResult, normalize
from .normalform.transport import to_original, to_special
from .reference import GenTrig

__all__ = [
    "TwistData",
    "twist_coefficients",
    "twist_measure",
    "DecayFit",
    "decay_fit",
    "SeedResult",
    "ScanReport",
    "default_seeds",
    "boundedness_scan",
    "loglog_slope",
]

F_FLOOR = 1e-13
# integration noise in F, G grows like rtol * Lambda^2 (steps ~ Lambda, angle ~ Lambda)
NOISE_FACTOR = 5.0


# -- twist ---------------------------------------------------------------------


@dataclass(frozen=True)
class TwistData:
    """Twist coefficients of the special Hamiltonian.

    ``sigma[j] = (j/(n+1)) * integral_0^{-T} fbar_j dt`` for ``j = 2..2n-1``.
    Integrating ``kappa' = -dH/dK`` from ``0`` to ``-T`` gives the angle
    advance ``alpha(Lambda) = T Lambda - sum_j sigma_j Lambda^((j-n-1)/(n-1))``.
    """

    n: int
    T: float
    sigma: Dict[int, float]

    def _exp(self, j: int) -> float:
        return (j - self.n - 1) / (self.n - 1)

    def alpha(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = self.T * lam
        for j, s in self.sigma.items():
            out = out - s * lam ** self._exp(j)
        return out

    def dalpha(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = self.T + 0.0 * lam
        for j, s in self.sigma.items():
            e = self._exp(j)
            if e != 0:
                out = out - s * e * lam ** (e - 1)
        return out


def _period_integral(values_fn, T: float, samples: int = 512) -> float:
    # trapezoid on a periodic grid is exact for trigonometric polynomials
    ts = np.linspace(0.0, T, samples, endpoint=False)
    return float(T * np.mean([values_fn(t) for t in ts]))


def twist_coefficients(H_special, f: Forcing, samples: int = 512) -> TwistData:
    """``sigma_j`` from the ``kappa``-free rows of a special Hamiltonian.

    ``H_special`` may be a :class:`NormalFormResult` or its ``H_special``
    series.
    """
    series = H_special.H_special if isinstance(H_special, NormalFormResult) else H_special
    n = series.n
    if n < 2:
        raise ShapeError("twist coefficients need n >= 2")
    by_q = series.terms_by_exponent()
    sigma = {}
    for j in range(2, 2 * n):
        prof = by_q.get(j)
        if prof is None or prof.is_zero():
            sigma[j] = 0.0
            continue
        if not prof.is_kappa_free():
            raise ShapeError(f"exponent {j} of the special Hamiltonian still depends on kappa")
        expr = prof.mean_expr()
        # integral over [0, -T] of a T-periodic function is minus the period integral
        integral = -_period_integral(lambda t: expr.evaluate(f, t), f.T, samples)
        sigma[j] = j / (n + 1) * integral
    return TwistData(n, f.T, sigma)


def twist_measure(
    g: GenTrig,
    f: Forcing,
    cfg: IntegratorConfig,
    lam: float,
    kappas: Optional[Sequence[float]] = None,
    h: float = 1e-4,
) -> float:
    """Finite-difference ``d kappa*/d Lambda`` averaged over a ``kappa`` grid.

    The sign is normalized so that the unforced value is ``+T`` in either
    integration direction.
    """
    n = g.degree
    if lam <= 0:
        raise DomainError("Lambda must be positive")
    if kappas is None:
        kappas = np.linspace(0.0, g.period, 16, endpoint=False)
    kappas = np.asarray(kappas, dtype=float)
    lp, lm = lam * (1 + h), lam * (1 - h)
    K = np.concatenate([np.full(kappas.size, K_from_lam(n, lp)), np.full(kappas.size, K_from_lam(n, lm))])
    _, ks, _ = period_map_arrays(g, f, cfg, K, np.concatenate([kappas, kappas]))
    d = (ks[: kappas.size] - ks[kappas.size:]) / (lp - lm)
    return float(-cfg.sign * np.mean(d))


# -- decay ---------------------------------------------------------------------


def loglog_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class DecayFit:
    """Least-squares decay orders of ``max_kappa |F|`` and ``max_kappa |G - G_pred|``."""

    lams: np.ndarray
    F_max: np.ndarray
    G_max: np.ndarray
    slope_F: float
    slope_G: float
    dropped: List[Tuple[str, float]] = field(default_factory=list)
    degenerate: bool = False


def noise_floor(lams, rtol: float):
    """Level below which ``max |F|`` or ``max |G|`` is integration noise."""
    return np.maximum(F_FLOOR, NOISE_FACTOR * rtol * np.asarray(lams, dtype=float) ** 2)


def _fit(lams, vals, floor, label, dropped):
    keep = vals >= floor
    for lam in lams[~keep]:
        dropped.append((label, float(lam)))
    if keep.sum() < 2:
        return float("nan")
    return loglog_slope(lams[keep], vals[keep])


def decay_fit(
    g: GenTrig,
    f: Forcing,
    cfg: IntegratorConfig,
    lams: Sequence[float],
    kappas: Optional[Sequence[float]] = None,
    twist: Optional[TwistData] = None,
    coordinates: str = "original",
) -> DecayFit:
    """Decay orders of the period-map corrections over a ``Lambda`` range.

    ``G`` is compared with the normal-form twist prediction ``alpha - T Lambda``
    when the forcing has coefficients beyond ``p_0`` (computed here unless
    ``twist`` is supplied), and with the bare ``T Lambda`` otherwise.  Points
    whose maximum falls below :func:`noise_floor` are dropped and listed; with
    fewer than two left the fit is degenerate.

    With ``coordinates="special"`` the map is measured in normal-form
    coordinates: start points are transported to the original chart, mapped,
    and the images transported back.  The near-identity change itself moves
    ``Lambda`` by ``O(1)`` when ``p_{2n-2}`` is present, so only there do the
    normal-form decay orders apply to non-Morris forcing.
    """
    n = g.degree
    lams = np.asarray(lams, dtype=float)
    if lams.size < 6 or lams.min() < 5:
        raise DomainError("decay fits need at least 6 values of Lambda, all >= 5")
    if kappas is None:
        kappas = np.linspace(0.0, g.period, 16, endpoint=False)
    kappas = np.asarray(kappas, dtype=float)
    if coordinates not in ("original", "special"):
        raise DomainError(f"unknown coordinates {coordinates!r}")
    nf = None
    if coordinates == "special" or (twist is None and any(j > 0 for j in f.present)):
        nf = normalize(g, f)
    if twist is None:
        twist = twist_coefficients(nf, f) if nf is not None else TwistData(n, f.T, {})
    t1 = cfg.sign * f.T
    F_max = np.empty(lams.size)
    G_max = np.empty(lams.size)
    for i, lam in enumerate(lams):
        K = np.full(kappas.size, float(K_from_lam(n, lam)))
        if coordinates == "special":
            start = np.array([to_original(nf, f, Ki, ki, 0.0) for Ki, ki in zip(K, kappas)])
            K_star, k_star, _ = period_map_arrays(g, f, cfg, start[:, 0], start[:, 1])
            back = np.array([to_special(nf, f, Ki, ki, t1) for Ki, ki in zip(K_star, k_star)])
            K_star, k_star = back[:, 0], back[:, 1]
        else:
            K_star, k_star, _ = period_map_arrays(g, f, cfg, K, kappas)
        F = lam_from_K(n, K_star) - lam
        G = k_star - kappas + cfg.sign * f.T * lam
        G_pred = -cfg.sign * (twist.alpha(lam) - f.T * lam)
        F_max[i] = np.max(np.abs(F))
        G_max[i] = np.max(np.abs(G - G_pred))
    dropped: List[Tuple[str, float]] = []
    floor = noise_floor(lams, cfg.rtol)
    sF = _fit(lams, F_max, floor, "F", dropped)
    sG = _fit(lams, G_max, floor, "G", dropped)
    degenerate = not (np.isfinite(sF) and np.isfinite(sG))
    if dropped:
        warnings.warn(f"{len(dropped)} decay points at the noise floor dropped", RuntimeWarning, stacklevel=2)
    return DecayFit(lams, F_max, G_max, sF, sG, dropped, degenerate)


# -- boundedness ---------------------------------------------------------------


@dataclass(frozen=True)
class SeedResult:
    K0: float
    kappa0: float
    K_min: float
    K_max: float
    iterations: int
    escaped: bool
    status: int
    mean_log_K: float

    @property
    def envelope_ratio(self) -> float:
        return self.K_max / self.K_min


@dataclass
class ScanReport:
    seeds: List[SeedResult]
    iters: int
    K_ceiling: float

    @property
    def escapes(self) -> int:
        return sum(s.escaped for s in self.seeds)

    @property
    def K_min(self) -> float:
        return min(s.K_min for s in self.seeds)

    @property
    def K_max(self) -> float:
        return max(s.K_max for s in self.seeds)

    def annulus(self) -> Dict[str, float]:
        r = np.array([s.envelope_ratio for s in self.seeds])
        return {
            "seeds": len(self.seeds),
            "escapes": self.escapes,
            "K_min": self.K_min,
            "K_max": self.K_max,
            "ratio_max": float(r.max()),
            "ratio_mean": float(r.mean()),
        }


def default_seeds(g: GenTrig, count: int = 50, K_range: Tuple[float, float] = (5.0, 50.0), seed: int = 0):
    """Deterministic ``(K, kappa)`` seeds: ``K`` evenly spaced, ``kappa`` uniform on the circle."""
    rng = np.random.default_rng(seed)
    Ks = np.linspace(K_range[0], K_range[1], count)
    kappas = rng.uniform(0.0, g.period, count)
    return [(float(K), float(k)) for K, k in zip(Ks, kappas)]


def _scan_chunk(args):
    n, const, ca, sa, om, t1, seeds, iters, rtol, atol, max_step, floor, max_steps, ceiling = args
    out = []
    from .reference import build_gentrig

    g = build_gentrig(n)
    for K0, kappa0 in seeds:
        x, y = _xy(g, K0, kappa0)
        k_min, k_max, slog, done, status, _ = _kernels.iterate_map(
            n, const, ca, sa, om, float(x), float(y), 0.0, t1, iters, rtol, atol, max_step, floor, max_steps,
            ceiling, False,
        )
        out.append(
            SeedResult(
                K0=float(K0),
                kappa0=float(kappa0),
                K_min=float(k_min),
                K_max=float(k_max),
                iterations=int(done),
                escaped=bool(status != _kernels.OK),
                status=int(status),
                mean_log_K=float(slog / done) if done else math.log(K0),
            )
        )
    return out


def boundedness_scan(
    g: GenTrig,
    f: Forcing,
    cfg: IntegratorConfig,
    seeds: Optional[Sequence[Tuple[float, float]]] = None,
    iters: int = 10_000,
    K_ceiling: float = 1e4,
    jobs: int = 1,
) -> ScanReport:
    """Iterate the period map from each seed and record the action envelope.

    ``seeds`` are ``(K, kappa)`` pairs (default: :func:`default_seeds`).  Escape means ``K`` above ``K_ceiling`` or any integration
    failure; failures are recorded per seed, never raised.  Serial runs are
    bit-reproducible and the seed order is preserved with ``jobs > 1``.
    """
    if not 1 <= iters <= 1_000_000:
        raise DomainError("iters must lie in [1, 1e6]")
    seeds = list(default_seeds(g) if seeds is None else seeds)
    if not all(np.isfinite(K) and K > 0 and np.isfinite(k) for K, k in seeds):
        raise DomainError("seeds must be finite with K > 0")
    n, const, ca, sa, om = _forcing_args(f)
    common = (float(cfg.sign * f.T),)
    tail = (iters, cfg.rtol, cfg.atol, float(cfg.max_step), _level_floor(n, cfg), cfg.max_steps, float(K_ceiling))
    if jobs <= 1 or len(seeds) < 2:
        results = _scan_chunk((n, const, ca, sa, om) + common + (seeds,) + tail)
    else:
        chunks = [seeds[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_scan_chunk, [(n, const, ca, sa, om) + common + (c,) + tail for c in chunks]))
        results = [None] * len(seeds)
        for i, part in enumerate(parts):
            for k, r in enumerate(part):
                results[i + k * jobs] = r
    return ScanReport(results, iters, K_ceiling)
