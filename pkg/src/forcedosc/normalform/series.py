"""Graded series in ``K`` with Fourier profiles in ``kappa``.

A term is ``K^(q/(n+1)) * F(kappa, t)`` where ``F`` is a truncated Fourier
series in ``kappa`` whose coefficients are polynomials in the forcing symbols.
Storage is monomial-major: each monomial owns a complex half-spectrum
``c_0..c_M``, the series value being ``Re c_0 + 2 Re sum_k c_k e^{i k w kappa}``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List

import numpy as np

from ..errors import DomainError
from .coeffs import ONE, PRUNE, CoeffExpr, Monomial, mono_dt, mono_ledger, mono_mul, mono_value, symbol_values

__all__ = [
    "KappaProfile",
    "NFTerm",
    "NFSeries",
    "poisson_bracket",
    "merge_terms",
    "bracket_lists",
]


def _prune(c: np.ndarray) -> np.ndarray:
    re = np.where(np.abs(c.real) < PRUNE, 0.0, c.real)
    im = np.where(np.abs(c.imag) < PRUNE, 0.0, c.imag)
    return re + 1j * im


class KappaProfile:
    """Truncated Fourier series in ``kappa`` with :class:`CoeffExpr` coefficients."""

    __slots__ = ("data", "M", "omega", "residual")

    def __init__(self, data: Dict[Monomial, np.ndarray], M: int, omega: float, residual: float = 0.0):
        self.M = M
        self.omega = omega
        self.residual = float(residual)
        self.data: Dict[Monomial, np.ndarray] = {}
        for m, c in data.items():
            c = _prune(np.asarray(c, dtype=complex))
            c[0] = c[0].real
            if np.any(c != 0):
                self.data[m] = c

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, M: int, omega: float) -> "KappaProfile":
        return cls({}, M, omega)

    @classmethod
    def constant(cls, value, M: int, omega: float) -> "KappaProfile":
        expr = value if isinstance(value, CoeffExpr) else CoeffExpr.const(float(value))
        data = {}
        for m, c in expr.terms.items():
            arr = np.zeros(M + 1, complex)
            arr[0] = c
            data[m] = arr
        return cls(data, M, omega)

    @classmethod
    def from_series(
        cls, coeffs: np.ndarray, omega: float, monomial: Monomial = ONE, scale: float = 1.0, residual: float = 0.0
    ) -> "KappaProfile":
        """Numeric half-spectrum (e.g. an ``sn^a`` profile) times ``scale * monomial``."""
        coeffs = np.asarray(coeffs, complex)
        return cls({monomial: scale * coeffs}, len(coeffs) - 1, omega, abs(scale) * residual)

    def _like(self, data, residual=None) -> "KappaProfile":
        return KappaProfile(data, self.M, self.omega, self.residual if residual is None else residual)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "KappaProfile") -> "KappaProfile":
        out = dict(self.data)
        for m, c in other.data.items():
            out[m] = out[m] + c if m in out else c
        return self._like(out, self.residual + other.residual)

    def __neg__(self) -> "KappaProfile":
        return self._like({m: -c for m, c in self.data.items()})

    def __sub__(self, other: "KappaProfile") -> "KappaProfile":
        return self + (-other)

    def scale(self, s: float) -> "KappaProfile":
        if s == 0:
            return KappaProfile.zero(self.M, self.omega)
        return self._like({m: s * c for m, c in self.data.items()}, abs(s) * self.residual)

    def sup_bound(self) -> float:
        """``sum |coefficients|`` bound on the sup norm per unit monomial value."""
        if not self.data:
            return 0.0
        return float(sum(abs(c[0]) + 2 * np.abs(c[1:]).sum() for c in self.data.values()))

    def __mul__(self, other: "KappaProfile") -> "KappaProfile":
        if not self.data or not other.data:
            return KappaProfile.zero(self.M, self.omega)
        if self.is_kappa_free():
            return other._scaled_by_constant(self)
        if other.is_kappa_free():
            return self._scaled_by_constant(other)
        M = self.M
        N = 4 * (M + 1)
        ma, ca = zip(*self.data.items())
        mb, cb = zip(*other.data.items())
        va = np.fft.irfft(np.asarray(ca) * N, n=N)
        vb = np.fft.irfft(np.asarray(cb) * N, n=N)
        prod = np.fft.rfft(va[:, None, :] * vb[None, :, :], axis=-1) / N
        kept = prod[..., : M + 1]
        dropped = 2.0 * np.abs(prod[..., M + 1 :]).sum(axis=-1)
        out: Dict[Monomial, np.ndarray] = {}
        for i, a in enumerate(ma):
            for k, b in enumerate(mb):
                key = mono_mul(a, b)
                out[key] = out[key] + kept[i, k] if key in out else kept[i, k].copy()
        residual = float(dropped.sum()) + self.residual * other.sup_bound() + other.residual * self.sup_bound()
        return self._like(out, residual)

    def _scaled_by_constant(self, const: "KappaProfile") -> "KappaProfile":
        out: Dict[Monomial, np.ndarray] = {}
        for mc, cc in const.data.items():
            s = cc[0].real
            for m, c in self.data.items():
                key = mono_mul(m, mc)
                out[key] = out[key] + s * c if key in out else s * c
        residual = self.residual * const.sup_bound() + const.residual * self.sup_bound()
        return self._like(out, residual)

    def dkappa(self) -> "KappaProfile":
        k = 1j * self.omega * np.arange(self.M + 1)
        return self._like({m: c * k for m, c in self.data.items()})

    def antiderivative(self) -> "KappaProfile":
        """Zero-mean antiderivative in ``kappa`` (the constant term is discarded)."""
        k = 1j * self.omega * np.arange(self.M + 1)
        k[0] = 1.0
        out = {}
        for m, c in self.data.items():
            a = c / k
            a[0] = 0.0
            out[m] = a
        return self._like(out)

    def mean(self) -> "KappaProfile":
        out = {}
        for m, c in self.data.items():
            a = np.zeros_like(c)
            a[0] = c[0]
            out[m] = a
        return self._like(out, 0.0)

    def oscillating(self) -> "KappaProfile":
        out = {}
        for m, c in self.data.items():
            a = c.copy()
            a[0] = 0.0
            out[m] = a
        return self._like(out)

    def dt(self) -> "KappaProfile":
        out: Dict[Monomial, np.ndarray] = {}
        for m, c in self.data.items():
            for md, k in mono_dt(m).items():
                out[md] = out[md] + k * c if md in out else k * c
        return self._like(out)

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.data

    def is_kappa_free(self) -> bool:
        return all(not np.any(c[1:]) for c in self.data.values())

    def mean_expr(self) -> CoeffExpr:
        return CoeffExpr({m: c[0].real for m, c in self.data.items()})

    def cos_coeff(self, k: int) -> CoeffExpr:
        s = 1.0 if k == 0 else 2.0
        return CoeffExpr({m: s * c[k].real for m, c in self.data.items()})

    def sin_coeff(self, k: int) -> CoeffExpr:
        if k == 0:
            return CoeffExpr()
        return CoeffExpr({m: -2.0 * c[k].imag for m, c in self.data.items()})

    def ledger(self, out: Dict[int, int] | None = None) -> Dict[int, int]:
        out = {} if out is None else out
        for m in self.data:
            mono_ledger(m, out)
        return out

    def symbols(self) -> set:
        return {s for m in self.data for s in m}

    # -- numerics -----------------------------------------------------------

    def numeric(self, values) -> np.ndarray:
        """Collapse to a numeric half-spectrum given symbol values at one time."""
        out = np.zeros(self.M + 1, complex)
        for m, c in self.data.items():
            out += mono_value(m, values) * c
        return out

    def evaluate(self, forcing, kappa, t, dkappa: int = 0):
        """Numeric value of the profile (or its ``kappa``-derivative) at scalar ``t``."""
        values = symbol_values(forcing, self.symbols(), t)
        spec = self.numeric(values)
        return eval_half_spectrum(spec, self.omega, kappa, dkappa)

    def __repr__(self):
        return f"KappaProfile({len(self.data)} monomials, M={self.M})"


def eval_half_spectrum(spec: np.ndarray, omega: float, kappa, dkappa: int = 0):
    kappa = np.asarray(kappa, dtype=float)
    k = np.arange(len(spec))
    factor = (1j * omega * k) ** dkappa
    phase = np.exp(1j * omega * np.multiply.outer(kappa, k))
    val = phase @ (spec * factor)
    out = 2.0 * val.real - (spec[0].real if dkappa == 0 else 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass
class NFTerm:
    """``K^(q/(n+1)) * profile(kappa, t)``."""

    q: int
    profile: KappaProfile

    def is_zero(self) -> bool:
        return self.profile.is_zero()

    def scale(self, s: float) -> "NFTerm":
        return NFTerm(self.q, self.profile.scale(s))

    def __neg__(self) -> "NFTerm":
        return NFTerm(self.q, -self.profile)

    def dt(self) -> "NFTerm":
        return NFTerm(self.q, self.profile.dt())

    def row(self, n: int) -> int:
        return 2 * n - self.q


def merge_terms(*lists: Iterable[NFTerm]) -> List[NFTerm]:
    """Concatenate term lists, combining equal exponents and dropping zeros."""
    by_q: Dict[int, KappaProfile] = {}
    for terms in lists:
        for t in terms:
            if t.is_zero():
                continue
            by_q[t.q] = by_q[t.q] + t.profile if t.q in by_q else t.profile
    return [NFTerm(q, p) for q, p in sorted(by_q.items(), reverse=True) if not p.is_zero()]


def scale_terms(terms: Iterable[NFTerm], s: float) -> List[NFTerm]:
    return [t.scale(s) for t in terms if s != 0]


def poisson_bracket(A: NFTerm, B: NFTerm, n: int) -> List[NFTerm]:
    """``{A, B} = dA/dK dB/dkappa - dA/dkappa dB/dK`` for graded terms.

    The result has exponent numerator ``q_A + q_B - (n+1)``.
    """
    fa, fb = A.profile, B.profile
    if fa.is_zero() or fb.is_zero():
        return []
    wa = float(Fraction(A.q, n + 1))
    wb = float(Fraction(B.q, n + 1))
    prof = KappaProfile.zero(fa.M, fa.omega)
    if wa != 0 and not fb.is_kappa_free():
        prof = prof + (fa * fb.dkappa()).scale(wa)
    if wb != 0 and not fa.is_kappa_free():
        prof = prof - (fa.dkappa() * fb).scale(wb)
    if prof.is_zero():
        return []
    return [NFTerm(A.q + B.q - (n + 1), prof)]


def bracket_lists(As: Iterable[NFTerm], Bs: Iterable[NFTerm], n: int) -> List[NFTerm]:
    Bs = list(Bs)
    out: List[NFTerm] = []
    for a in As:
        for b in Bs:
            out.extend(poisson_bracket(a, b, n))
    return merge_terms(out)


@dataclass
class NFSeries:
    """Row-indexed collection of graded terms.

    With ``offset = 0`` the series is a Hamiltonian ``sum_i eps^i/i! rows[i]``;
    with ``offset = 1`` it is a generator ``sum_k eps^k/k! rows[k+1]``.
    Assembled objects are evaluated at ``eps = 1``.
    """

    n: int
    rows: Dict[int, List[NFTerm]] = field(default_factory=dict)
    offset: int = 0

    def set_row(self, i: int, terms: Iterable[NFTerm]) -> None:
        terms = merge_terms(terms)
        if terms:
            self.rows[i] = terms
        else:
            self.rows.pop(i, None)

    def row(self, i: int) -> List[NFTerm]:
        return self.rows.get(i, [])

    def weight(self, i: int, eps: float = 1.0) -> float:
        k = i - self.offset
        return eps**k / math.factorial(k)

    def terms_by_exponent(self, eps: float = 1.0) -> Dict[int, KappaProfile]:
        """Terms at ``eps`` grouped by exponent numerator ``q``."""
        out: Dict[int, KappaProfile] = {}
        for i, terms in self.rows.items():
            w = self.weight(i, eps)
            for t in terms:
                p = t.profile.scale(w)
                out[t.q] = out[t.q] + p if t.q in out else p
        return out

    def exponents(self) -> List[int]:
        return sorted({t.q for ts in self.rows.values() for t in ts}, reverse=True)

    def ledger(self, out: Dict[int, int] | None = None) -> Dict[int, int]:
        out = {} if out is None else out
        for ts in self.rows.values():
            for t in ts:
                t.profile.ledger(out)
        return out

    def is_zero(self) -> bool:
        return not any(ts for ts in self.rows.values())

    def max_residual(self) -> float:
        return max((t.profile.residual for ts in self.rows.values() for t in ts), default=0.0)

    def compile(self, forcing, eps: float = 1.0) -> "CompiledSeries":
        return CompiledSeries(self, forcing, eps)

    def evaluate(self, forcing, K, kappa, t, eps: float = 1.0, dK: int = 0, dkappa: int = 0):
        return self.compile(forcing, eps)(K, kappa, t, dK=dK, dkappa=dkappa)


class CompiledSeries:
    """Fast numeric evaluator of an :class:`NFSeries` for a concrete forcing."""

    def __init__(self, series: NFSeries, forcing, eps: float = 1.0):
        self.n = series.n
        self.forcing = forcing
        by_q = series.terms_by_exponent(eps)
        self.qs = np.array(sorted(by_q), dtype=float)
        self.omega = None
        mats, monos = [], []
        symbols = set()
        for q in sorted(by_q):
            prof = by_q[q]
            self.omega = prof.omega
            ms = list(prof.data)
            monos.append(ms)
            mats.append(np.array([prof.data[m] for m in ms]) if ms else np.zeros((0, prof.M + 1), complex))
            symbols |= prof.symbols()
        self.monos = monos
        self.mats = mats
        self.symbols = symbols
        self._t = None
        self._spec = None

    def spectra(self, t: float) -> np.ndarray:
        if self._t != t:
            values = symbol_values(self.forcing, self.symbols, t)
            specs = []
            for ms, mat in zip(self.monos, self.mats):
                w = np.array([mono_value(m, values) for m in ms], dtype=float)
                specs.append(w @ mat if len(ms) else np.zeros(mat.shape[1], complex))
            self._spec = np.array(specs) if specs else np.zeros((0, 1), complex)
            self._t = t
        return self._spec

    def __call__(self, K, kappa, t: float, dK: int = 0, dkappa: int = 0):
        """Value of ``d^dK/dK^dK d^dkappa/dkappa^dkappa`` of the series."""
        K, kappa = np.broadcast_arrays(np.asarray(K, dtype=float), np.asarray(kappa, dtype=float))
        if np.any(K <= 0):
            raise DomainError("action K must be positive")
        if len(self.qs) == 0:
            out = np.zeros(K.shape)
            return float(out) if out.ndim == 0 else out
        spec = self.spectra(float(t))
        expo = self.qs / (self.n + 1)
        factor = np.ones_like(expo)
        for k in range(dK):
            factor = factor * (expo - k)
        total = np.zeros(K.shape)
        for s, e, c in zip(spec, expo, factor):
            if c == 0:
                continue
            total = total + c * K ** (e - dK) * eval_half_spectrum(s, self.omega, kappa, dkappa)
        return float(total) if total.ndim == 0 else total
