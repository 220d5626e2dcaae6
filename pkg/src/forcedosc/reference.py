"""Generalized sine/cosine pair solving ``xi'' + n xi^(2n-1) = 0``.

``sn`` is the solution with ``sn(0) = 0, sn'(0) = 1`` and ``cn = sn'``.  For
``n = 1`` these are the ordinary sine and cosine; for ``n = 2`` they are
lemniscate-type functions.  Both are ``4 tau``-periodic and satisfy
``cn^2 + sn^(2n) = 1``.

Only the first quarter period ``[0, tau]`` is integrated.  Every other argument
is folded back onto it with the symmetry relations, and values between table
knots come from quintic Hermite interpolation using the exact derivative
relations ``sn' = cn`` and ``cn' = -n sn^(2n-1)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import beta

from .errors import ConstructionError, DomainError, TruncationWarning

__all__ = [
    "GenTrig",
    "KSeries",
    "build_gentrig",
    "quarter_period",
    "sn_eval",
    "cn_eval",
    "sn_power_mean",
    "profile",
    "kappa_from_sncn",
]

DEFAULT_HARMONICS = 64
DEFAULT_TOL = 1e-10
_TABLE_INTERVALS = 1024
_ODE_RTOL = 1e-13
_ODE_ATOL = 1e-15


def quarter_period(n: int) -> float:
    """Closed form ``tau = B(1/(2n), 1/2) / (2n)``."""
    if n < 1:
        raise DomainError(f"degree must be >= 1, got {n}")
    return float(beta(1.0 / (2 * n), 0.5) / (2 * n))


def _quarter_period_quadrature(n: int) -> float:
    # (1 - xi)^(-1/2) is handled by the algebraic weight, the rest is smooth
    val, _ = integrate.quad(
        lambda xi: 1.0 / np.sqrt(_one_minus_pow(xi, 2 * n) / (1.0 - xi)) if xi < 1 else 1.0 / np.sqrt(2 * n),
        0.0,
        1.0,
        weight="alg",
        wvar=(0.0, -0.5),
        epsabs=1e-15,
        epsrel=1e-14,
        limit=200,
    )
    return float(val)


def _one_minus_pow(xi: float, m: int) -> float:
    # 1 - xi^m without cancellation near xi = 1
    return float(-np.expm1(m * np.log(xi))) if xi > 0 else 1.0


@dataclass(frozen=True)
class KSeries:
    """Truncated real Fourier series in ``kappa`` with base frequency ``omega``.

    ``coeffs[k]`` is the complex amplitude of ``exp(i k omega kappa)``; the
    series value is ``Re(c_0) + 2 Re(sum_{k>=1} c_k exp(i k omega kappa))``.
    """

    coeffs: np.ndarray
    omega: float
    residual: float = 0.0

    @property
    def cos(self) -> np.ndarray:
        out = 2.0 * self.coeffs.real
        out[0] = self.coeffs[0].real
        return out

    @property
    def sin(self) -> np.ndarray:
        out = -2.0 * self.coeffs.imag
        out[0] = 0.0
        return out

    @property
    def mean(self) -> float:
        return float(self.coeffs[0].real)

    def __call__(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        k = np.arange(len(self.coeffs))
        phase = np.exp(1j * self.omega * np.multiply.outer(kappa, k))
        val = phase @ self.coeffs
        return 2.0 * val.real - self.coeffs[0].real


@dataclass(frozen=True, eq=False)
class GenTrig:
    """Precomputed model of ``sn``/``cn`` for a fixed degree ``n``.

    Build with :func:`build_gentrig`; instances are immutable and cached.
    """

    degree: int
    tau: float
    knots: np.ndarray
    sn_table: np.ndarray
    cn_table: np.ndarray
    sn_harmonics: KSeries
    cn_harmonics: KSeries
    build_tolerance: float
    identity_residual: float

    @property
    def period(self) -> float:
        return 4.0 * self.tau

    @property
    def omega(self) -> float:
        """Base angular frequency ``pi / (2 tau)`` of the ``kappa`` Fourier basis."""
        return np.pi / (2.0 * self.tau)

    @property
    def inverse_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Monotone samples ``(s, kappa)`` with ``sn(kappa) = s`` on ``[0, tau]``."""
        return self.sn_table, self.knots

    # -- evaluation ---------------------------------------------------------

    def _hermite(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = self.degree
        h = self.knots[1] - self.knots[0]
        idx = np.clip((u / h).astype(np.int64), 0, len(self.knots) - 2)
        t = u / h - idx
        s0, s1 = self.sn_table[idx], self.sn_table[idx + 1]
        c0, c1 = self.cn_table[idx], self.cn_table[idx + 1]

        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        b0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
        b1 = t - 6 * t3 + 8 * t4 - 3 * t5
        b2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
        b3 = 0.5 * (t3 - 2 * t4 + t5)
        b4 = -4 * t3 + 7 * t4 - 3 * t5
        b5 = 10 * t3 - 15 * t4 + 6 * t5

        # exact derivative relations from the reference equation
        ds0, ds1 = c0, c1
        dds0, dds1 = -n * s0 ** (2 * n - 1), -n * s1 ** (2 * n - 1)
        dc0, dc1 = dds0, dds1
        if n == 1:
            ddc0, ddc1 = -c0, -c1
        else:
            ddc0 = -n * (2 * n - 1) * s0 ** (2 * n - 2) * c0
            ddc1 = -n * (2 * n - 1) * s1 ** (2 * n - 2) * c1

        sn = s0 * b0 + h * ds0 * b1 + h * h * dds0 * b2 + h * h * dds1 * b3 + h * ds1 * b4 + s1 * b5
        cn = c0 * b0 + h * dc0 * b1 + h * h * ddc0 * b2 + h * h * ddc1 * b3 + h * dc1 * b4 + c1 * b5
        return sn, cn

    def sncn(self, kappa):
        """Return ``(sn(kappa), cn(kappa))`` for scalar or array ``kappa``."""
        kappa = np.asarray(kappa, dtype=float)
        tau = self.tau
        r = np.mod(kappa, 4.0 * tau)
        q = np.minimum((r / tau).astype(np.int64), 3)
        u = r - q * tau
        # quadrants 1 and 3 are read backwards from tau
        odd = (q % 2) == 1
        base = np.where(odd, tau - u, u)
        base = np.clip(base, 0.0, tau)
        s, c = self._hermite(base)
        sign_s = np.where(q >= 2, -1.0, 1.0)
        sign_c = np.where((q == 1) | (q == 2), -1.0, 1.0)
        sn = sign_s * s
        cn = sign_c * c
        if sn.ndim == 0:
            return float(sn), float(cn)
        return sn, cn

    def sn(self, kappa):
        return self.sncn(kappa)[0]

    def cn(self, kappa):
        return self.sncn(kappa)[1]

    def kappa(self, s, c, tol: float = 1e-6):
        """Inverse map, see :func:`kappa_from_sncn`."""
        return kappa_from_sncn(self, s, c, tol=tol)


def _fourier_half_spectrum(values: np.ndarray, M: int) -> tuple[np.ndarray, float]:
    N = len(values)
    spec = np.fft.rfft(values) / N
    kept = spec[: M + 1].copy()
    tail = spec[M + 1 :]
    residual = float(np.sqrt(2.0 * np.sum(np.abs(tail) ** 2)))
    return kept, residual


def _samples_per_period(M: int) -> int:
    return int(2 ** np.ceil(np.log2(max(16 * (M + 1), 1024))))


@lru_cache(maxsize=None)
def build_gentrig(n: int, M: int = DEFAULT_HARMONICS, tol: float = DEFAULT_TOL) -> GenTrig:
    """Construct the ``sn``/``cn`` model for degree ``n``.

    Parameters
    ----------
    n : int
        Degree of the reference equation, ``n >= 1``.
    M : int
        Number of harmonics kept in the Fourier profiles of ``sn`` and ``cn``.
    tol : float
        Build tolerance; the Pythagorean identity and the endpoint values are
        checked against it.

    Raises
    ------
    DomainError
        For ``n < 1``, ``M < 8`` or ``tol`` outside ``(0, 1e-8]``.
    ConstructionError
        When the closed-form quarter period and its quadrature disagree, or the
        integrated table misses the tolerance.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"degree must be an integer >= 1, got {n!r}")
    if M < 8:
        raise DomainError(f"need at least 8 harmonics, got {M}")
    if not (0.0 < tol <= 1e-8):
        raise DomainError(f"tol must lie in (0, 1e-8], got {tol}")
    n = int(n)

    tau = quarter_period(n)
    tau_quad = _quarter_period_quadrature(n)
    if abs(tau - tau_quad) > 10 * tol:
        raise ConstructionError(
            f"quarter period mismatch: beta form {tau!r} vs quadrature {tau_quad!r}"
        )

    knots = np.linspace(0.0, tau, _TABLE_INTERVALS + 1)
    sol = integrate.solve_ivp(
        lambda _, z: (z[1], -n * z[0] ** (2 * n - 1)),
        (0.0, tau),
        (0.0, 1.0),
        method="RK45",
        t_eval=knots,
        rtol=_ODE_RTOL,
        atol=_ODE_ATOL,
    )
    if not sol.success:
        raise ConstructionError(f"reference equation integration failed: {sol.message}")
    sn_tab, cn_tab = sol.y
    # endpoints are known exactly
    sn_tab[0], cn_tab[0] = 0.0, 1.0
    resid = np.abs(cn_tab**2 + sn_tab ** (2 * n) - 1.0)
    if abs(sn_tab[-1] - 1.0) > tol or abs(cn_tab[-1]) > tol or resid.max() > tol:
        raise ConstructionError(
            f"table misses tolerance {tol}: sn(tau)-1={sn_tab[-1] - 1:.2e}, "
            f"cn(tau)={cn_tab[-1]:.2e}, identity residual={resid.max():.2e}"
        )
    sn_tab[-1], cn_tab[-1] = 1.0, 0.0
    if np.any(np.diff(sn_tab) <= 0):
        raise ConstructionError("sn table is not strictly increasing on [0, tau]")
    sn_tab.setflags(write=False)
    cn_tab.setflags(write=False)
    knots.setflags(write=False)

    proto = GenTrig(
        degree=n,
        tau=tau,
        knots=knots,
        sn_table=sn_tab,
        cn_table=cn_tab,
        sn_harmonics=KSeries(np.zeros(1, complex), 1.0),
        cn_harmonics=KSeries(np.zeros(1, complex), 1.0),
        build_tolerance=tol,
        identity_residual=float(resid.max()),
    )
    N = _samples_per_period(M)
    grid = np.arange(N) * (4.0 * tau / N)
    s, c = proto.sncn(grid)
    omega = np.pi / (2.0 * tau)
    sc, sres = _fourier_half_spectrum(s, M)
    cc, cres = _fourier_half_spectrum(c, M)
    for coeffs in (sc, cc):
        coeffs.setflags(write=False)
    return GenTrig(
        degree=n,
        tau=tau,
        knots=knots,
        sn_table=sn_tab,
        cn_table=cn_tab,
        sn_harmonics=KSeries(sc, omega, sres),
        cn_harmonics=KSeries(cc, omega, cres),
        build_tolerance=tol,
        identity_residual=float(resid.max()),
    )


def sn_eval(g: GenTrig, kappa):
    return g.sn(kappa)


def cn_eval(g: GenTrig, kappa):
    return g.cn(kappa)


def sn_power_mean(g: GenTrig, a: int, b: int) -> float:
    """Mean of ``sn^a cn^b`` over one period ``[0, 4 tau]``.

    Odd powers of either factor average to zero; for even ``a`` and ``b = 0``
    the mean is ``B((a+1)/(2n), 1/2) / B(1/(2n), 1/2)``.
    """
    if b not in (0, 1):
        raise DomainError(f"cn exponent must be 0 or 1 (reduce cn^2 first), got {b}")
    if a < 0:
        raise DomainError(f"sn exponent must be >= 0, got {a}")
    if a % 2 == 1 or b == 1:
        return 0.0
    n = g.degree
    return float(beta((a + 1) / (2 * n), 0.5) / beta(1.0 / (2 * n), 0.5))


def profile(g: GenTrig, a: int, b: int, M: int = DEFAULT_HARMONICS) -> KSeries:
    """Truncated Fourier series of ``sn^a cn^b`` with ``M`` harmonics.

    The constant term is pinned to the closed-form mean.  A
    :class:`TruncationWarning` is issued when the discarded tail exceeds the
    build tolerance.
    """
    mean = sn_power_mean(g, a, b)
    N = _samples_per_period(M)
    grid = np.arange(N) * (g.period / N)
    s, c = g.sncn(grid)
    coeffs, residual = _fourier_half_spectrum(s**a * c**b, M)
    coeffs[0] = mean
    if residual > g.build_tolerance:
        warnings.warn(
            f"sn^{a} cn^{b} with {M} harmonics leaves residual {residual:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return KSeries(coeffs, g.omega, residual)


def kappa_from_sncn(g: GenTrig, s, c, tol: float = 1e-6):
    """Angle ``kappa`` in ``[0, 4 tau)`` with ``sn(kappa) = s``, ``cn(kappa) = c``.

    Inputs are first rescaled onto the oval ``c^2 + s^(2n) = 1`` along the
    action-angle scaling ``(s, c) -> (lam s, lam^n c)``.  The quadrant is read
    off the signs of ``s`` and ``c``.
    """
    n = g.degree
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    level = c * c + s ** (2 * n)
    if np.any(np.abs(level - 1.0) > tol) or np.any(~np.isfinite(level)):
        raise DomainError("point is too far from the unit oval c^2 + s^(2n) = 1")
    lam = level ** (-1.0 / (2 * n))
    s = lam * s
    c = lam**n * c

    sa = np.minimum(np.abs(s), 1.0)
    ca = np.minimum(np.abs(c), 1.0)
    u = _invert_quarter(g, sa, ca)

    tau = g.tau
    kappa = np.where(
        (s >= 0) & (c > 0),
        u,
        np.where((s > 0) & (c <= 0), 2 * tau - u, np.where((s <= 0) & (c < 0), 2 * tau + u, 4 * tau - u)),
    )
    kappa = np.where(kappa >= 4 * tau, kappa - 4 * tau, kappa)
    if kappa.ndim == 0:
        return float(kappa)
    return kappa


def _invert_quarter(g: GenTrig, sa: np.ndarray, ca: np.ndarray) -> np.ndarray:
    """Solve ``sn(u) = sa`` (or ``cn(u) = ca`` near ``tau``) for ``u`` in ``[0, tau]``."""
    n = g.degree
    s_tab, k_tab = g.inverse_table
    use_s = sa ** (2 * n) <= 0.5
    # initial guesses from the monotone tables
    u_s = np.interp(sa, s_tab, k_tab)
    u_c = np.interp(-ca, -g.cn_table, k_tab)
    u = np.where(use_s, u_s, u_c)
    for _ in range(6):
        sn, cn = g._hermite(np.clip(u, 0.0, g.tau))
        with np.errstate(divide="ignore", invalid="ignore"):
            step_s = (sn - sa) / cn
            step_c = (cn - ca) / (-n * sn ** (2 * n - 1))
        step = np.where(use_s, step_s, step_c)
        step = np.where(np.isfinite(step), step, 0.0)
        u = np.clip(u - step, 0.0, g.tau)
    return u
