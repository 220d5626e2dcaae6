"""Deprit Lie-triangle normalization of the forced-oscillator Hamiltonian.

The Hamiltonian in ``(K, kappa)`` is graded by rows: row ``i`` holds the
term ``K^((2n-i)/(n+1))``.  Generators live one grading lower, ``W_r`` having
exponent numerator ``n - r + 1``, so that ``{row r, W_s}`` lands in row
``r + s``.  Two passes are made:

* stage 1 solves rows ``1 .. n-1`` and leaves ``kappa``-dependence only at
  exponents ``<= n``;
* stage 2 solves rows ``n .. 2n-2`` of the result and leaves it only at
  exponents ``<= 1``.

Because the generators depend on ``t``, each pass also transforms ``-dW/dt``
through a second triangle (the remainder) and adds it to the new Hamiltonian.
Everything is assembled at ``eps = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..errors import ShapeError, SmoothnessPolicyError
from ..forcing import Forcing, minimum_smoothness
from ..reference import DEFAULT_HARMONICS, GenTrig, profile
from .coeffs import PRUNE, symbol
from .series import KappaProfile, NFSeries, NFTerm, bracket_lists, merge_terms, poisson_bracket

__all__ = [
    "SolvedRow",
    "TriangleResult",
    "TruncationReport",
    "NormalFormResult",
    "hamiltonian_series",
    "solve_homological",
    "lie_residual",
    "deprit_diagonal",
    "remainder_diagonal",
    "assemble",
    "stage1",
    "stage2",
    "normalize",
    "required_smoothness",
    "convergence_threshold",
    "evaluate_series",
]

PROBE_ROWS = 2


def default_i_max(n: int) -> int:
    return 3 * n


def default_q_min(n: int) -> int:
    return -2 * n


def h00(n: int, M: int, omega: float) -> NFTerm:
    return NFTerm(2 * n, KappaProfile.constant((n + 1) / (2 * n), M, omega))


def hamiltonian_series(g: GenTrig, present: Iterable[int], M: int = DEFAULT_HARMONICS) -> NFSeries:
    """Rows ``H_i^0 = i! K^((2n-i)/(n+1)) f_{2n-i}`` of the original Hamiltonian.

    ``f_j = -(n+1)/(j n) sn^j(kappa) p_{j-1}(t)``; only coefficients listed in
    ``present`` contribute.
    """
    n = g.degree
    omega = g.omega
    S = NFSeries(n)
    S.set_row(0, [h00(n, M, omega)])
    for i in range(1, 2 * n):
        j = 2 * n - i
        if j - 1 not in present:
            continue
        prof = profile(g, j, 0, M)
        scale = math.factorial(i) * (-(n + 1) / (j * n))
        S.set_row(i, [NFTerm(j, KappaProfile.from_series(prof.coeffs, omega, symbol(j - 1), scale, prof.residual))])
    return S


def solve_homological(D: NFTerm, n: int) -> Tuple[NFTerm, NFTerm]:
    """Solve ``B = D + {H_0^0, C}`` with ``B`` the ``kappa``-mean of ``D``.

    ``C`` has exponent numerator ``q_D - n + 1`` and the zero-mean profile
    ``-integral(D - B) dkappa``.
    """
    B = NFTerm(D.q, D.profile.mean())
    C = NFTerm(D.q - n + 1, -(D.profile.oscillating().antiderivative()))
    return B, C


def lie_residual(D: NFTerm, B: NFTerm, C: NFTerm, n: int) -> List[NFTerm]:
    """``B - D - {H_0^0, C}``; empty when the Lie equation holds.

    Generator coefficients below the prune level are dropped, and the
    bracket multiplies harmonic ``k`` by ``k omega``, so residual entries
    under ``PRUNE * max(1, k omega)`` are treated as zero.
    """
    H0 = h00(n, D.profile.M, D.profile.omega)
    raw = merge_terms([B], [-D], [-t for t in poisson_bracket(H0, C, n)])
    out = []
    for t in raw:
        prof = t.profile
        tol = PRUNE * np.maximum(1.0, prof.omega * np.arange(prof.M + 1))
        data = {m: np.where(np.abs(c) <= tol, 0.0, c) for m, c in prof.data.items()}
        kept = KappaProfile(data, prof.M, prof.omega, prof.residual)
        if not kept.is_zero():
            out.append(NFTerm(t.q, kept))
    return out


@dataclass
class SolvedRow:
    row: int
    D: List[NFTerm]
    B: List[NFTerm]
    C: List[NFTerm]


@dataclass
class TriangleResult:
    W: NFSeries
    diagonal: NFSeries
    probe: NFSeries
    solved: List[SolvedRow]
    dropped: Dict[int, int]


def _truncate(terms: List[NFTerm], q_min: int, dropped: Dict[int, int]) -> List[NFTerm]:
    kept = []
    for t in terms:
        if t.q < q_min:
            dropped[t.q] = dropped.get(t.q, 0) + 1
        else:
            kept.append(t)
    return kept


def deprit_diagonal(
    rows: NFSeries,
    active_rows: Iterable[int],
    i_max: int,
    q_min: int,
    probe_rows: int = PROBE_ROWS,
) -> TriangleResult:
    """Run the Lie triangle ``H_j^i = H_{j+1}^{i-1} + sum_k C(j,k) {H_{j-k}^{i-1}, W_{k+1}}``.

    Generators are chosen only in ``active_rows``.  Rows beyond ``i_max`` (up
    to ``probe_rows`` more) are computed for the tail estimate and returned
    separately; terms with exponent below ``q_min`` are dropped and counted.
    """
    n = rows.n
    active = set(active_rows)
    H0 = rows.row(0)
    table: Dict[Tuple[int, int], List[NFTerm]] = {(0, 0): H0}
    W = NFSeries(n, offset=1)
    diag = NFSeries(n)
    diag.set_row(0, H0)
    probe = NFSeries(n)
    solved: List[SolvedRow] = []
    dropped: Dict[int, int] = {}
    for r in range(1, i_max + probe_rows + 1):
        table[(r, 0)] = _truncate(rows.row(r), q_min, dropped)
        for i in range(1, r + 1):
            j = r - i
            parts = [table[(j + 1, i - 1)]]
            for k in range(j + 1):
                Wk = W.row(k + 1)
                if not Wk:
                    continue
                br = bracket_lists(table[(j - k, i - 1)], Wk, n)
                c = math.comb(j, k)
                parts.append([t.scale(c) for t in br] if c != 1 else br)
            table[(j, i)] = _truncate(merge_terms(*parts), q_min, dropped)
        if r in active and r <= i_max:
            D = table[(0, r)]
            Bs, Cs = [], []
            for d in D:
                b, c = solve_homological(d, n)
                Bs.append(b)
                Cs.append(c)
            Cs = merge_terms(Cs)
            W.set_row(r, Cs)
            corr = bracket_lists(H0, Cs, n)
            for i in range(1, r):
                table[(r - i, i)] = merge_terms(table[(r - i, i)], corr)
            # the diagonal is the mean exactly, not D + {H00, C} up to rounding
            table[(0, r)] = merge_terms(Bs)
            solved.append(SolvedRow(r, D, merge_terms(Bs), Cs))
        target = diag if r <= i_max else probe
        target.set_row(r, table[(0, r)])
    return TriangleResult(W, diag, probe, solved, dropped)


def remainder_diagonal(W: NFSeries, i_max: int, q_min: int, probe_rows: int = PROBE_ROWS) -> List[List[NFTerm]]:
    """Diagonal ``R_0^i`` of the triangle started from ``R_j^0 = -dW_{j+1}/dt``."""
    n = W.n
    table: Dict[Tuple[int, int], List[NFTerm]] = {}
    dropped: Dict[int, int] = {}
    out = []
    for s in range(i_max + probe_rows):
        table[(s, 0)] = _truncate([-t.dt() for t in W.row(s + 1)], q_min, dropped)
        for i in range(1, s + 1):
            j = s - i
            parts = [table[(j + 1, i - 1)]]
            for k in range(j + 1):
                Wk = W.row(k + 1)
                if not Wk:
                    continue
                br = bracket_lists(table[(j - k, i - 1)], Wk, n)
                c = math.comb(j, k)
                parts.append([t.scale(c) for t in br] if c != 1 else br)
            table[(j, i)] = _truncate(merge_terms(*parts), q_min, dropped)
        out.append(table[(0, s)])
    return out


def assemble(diag: NFSeries, probe: NFSeries, remainders: List[List[NFTerm]], i_max: int) -> Tuple[NFSeries, NFSeries]:
    """``H0^0 + sum_i (H_0^i + R_0^{i-1}) / i!`` regrouped by exponent.

    Returns ``(series, tail)``: rows up to ``i_max`` are complete; contributions
    at higher rows go to ``tail`` (stored with the same factorial convention).
    """
    n = diag.n
    by_q: Dict[int, List[NFTerm]] = {}

    def add(terms, w):
        for t in terms:
            by_q.setdefault(t.q, []).append(t.scale(w) if w != 1 else t)

    for i, terms in list(diag.rows.items()) + list(probe.rows.items()):
        add(terms, 1.0 / math.factorial(i))
    for i in range(1, len(remainders) + 1):
        add(remainders[i - 1], 1.0 / math.factorial(i))
    series, tail = NFSeries(n), NFSeries(n)
    for q, terms in by_q.items():
        row = 2 * n - q
        merged = merge_terms(terms)
        if not merged:
            continue
        target = series if row <= i_max else tail
        target.set_row(row, [t.scale(math.factorial(row)) for t in merged])
    return series, tail


@dataclass
class TruncationReport:
    """What was cut off and how large it is estimated to be.

    ``tail`` holds the first rows beyond ``i_max`` of the final Hamiltonian;
    bounds beyond those rows are extrapolated geometrically.
    """

    i_max: int
    q_min: int
    tail: NFSeries
    dropped_exponents: Dict[int, int]
    fourier_residual: float
    sup_norms: Dict[int, Tuple[float, float]] = field(default_factory=dict)

    def bound(self, K: float, which: str = "value") -> float:
        """Estimated size of the omitted terms at action ``K``.

        ``which`` selects the value, the ``K``-derivative or the
        ``kappa``-derivative of the omitted part.
        """
        n = self.tail.n
        contrib = []
        for q in sorted(self.sup_norms, reverse=True):
            val, dk = self.sup_norms[q]
            e = q / (n + 1)
            if which == "value":
                contrib.append(val * K**e)
            elif which == "dK":
                contrib.append(val * abs(e) * K ** (e - 1))
            elif which == "dkappa":
                contrib.append(dk * K**e)
            else:
                raise ValueError(f"unknown bound kind {which!r}")
        if not contrib:
            return 0.0
        if len(contrib) == 1:
            return 2.0 * contrib[0]
        a1, a2 = contrib[0], contrib[-1]
        rho = (a2 / a1) ** (1.0 / (len(contrib) - 1)) if a1 > 0 else 0.0
        if rho >= 1:
            return float("inf")
        return float(sum(contrib[:-1]) + a2 / (1.0 - rho))

    def orbit_bound(self, K: float, T: float) -> Tuple[float, float]:
        """Drift of ``(K, kappa)`` over one period caused by the omitted terms."""
        return T * self.bound(K, "dkappa"), T * self.bound(K, "dK")


@dataclass
class NormalFormResult:
    n: int
    M: int
    i_max: int
    q_min: int
    H_original: NFSeries
    W_stage1: NFSeries
    W_stage2: NFSeries
    H_intermediate: NFSeries
    H_special: NFSeries
    R_stage1: List[List[NFTerm]]
    R_stage2: List[List[NFTerm]]
    solved: List[Tuple[int, SolvedRow]]
    ledger: Dict[int, int]
    threshold: float
    threshold_stages: Tuple[float, float]
    displacement_bound: float
    truncation: TruncationReport

    def twist_rows(self) -> Dict[int, KappaProfile]:
        """``kappa``-free coefficient ``fbar_j`` of ``K^(j/(n+1))`` for ``j = 2..2n-1``."""
        by_q = self.H_special.terms_by_exponent()
        return {q: by_q[q] for q in range(2, 2 * self.n) if q in by_q}


def _stage(H: NFSeries, active: Iterable[int], i_max: int, q_min: int):
    tri = deprit_diagonal(H, active, i_max, q_min)
    rem = remainder_diagonal(tri.W, i_max, q_min)
    series, tail = assemble(tri.diagonal, tri.probe, rem, i_max)
    return tri, rem, series, tail


def stage1(H: NFSeries, i_max: int, q_min: int, include_row_n: bool = False):
    """First transformation: rows ``1..n-1`` made ``kappa``-free.

    Returns ``(W_stage1, H_intermediate, remainders, triangle, tail)``.
    """
    n = H.n
    active = range(1, n + 1 if include_row_n else n)
    tri, rem, series, tail = _stage(H, active, i_max, q_min)
    return tri.W, series, rem, tri, tail


def stage2(H1: NFSeries, i_max: int, q_min: int):
    """Second transformation: rows ``n..2n-2`` made ``kappa``-free.

    Returns ``(W_stage2, H_special, remainders, triangle, tail)``.
    """
    n = H1.n
    tri, rem, series, tail = _stage(H1, range(n, 2 * n - 1), i_max, q_min)
    return tri.W, series, rem, tri, tail


def _check_shape(S: NFSeries, q_free: int, label: str) -> None:
    for q, prof in S.terms_by_exponent().items():
        if q >= q_free and not prof.is_kappa_free():
            raise ShapeError(f"{label}: exponent {q} still depends on kappa")


def _grid_sup(prof: KappaProfile, f: Forcing, dkappa: int, kap: np.ndarray, ts: np.ndarray) -> float:
    if prof.is_zero():
        return 0.0
    return float(max(np.max(np.abs(prof.evaluate(f, kap, t, dkappa))) for t in ts))


def _grids(g: GenTrig, f: Forcing, nk: int = 128, nt: int = 48):
    return np.linspace(0.0, g.period, nk, endpoint=False), np.linspace(0.0, f.T, nt, endpoint=False)


def convergence_threshold(W: NFSeries, n: int, f: Forcing, g: GenTrig) -> Tuple[float, float]:
    """Action above which the generator's eps-flow is defined up to ``eps = 1``.

    With ``W_{k+1} = K^((n-k)/(n+1)) Ft_k``, ``(n+1) A = max |dFt_k/dkappa|``
    and ``B = sum_k 1/k!`` over the nonzero generator rows, the threshold is
    ``(1 + n A B)^((n+1)/n)``.  Also returns the bound ``B' C`` on the angle
    displacement, ``C = max |Ft_k|`` and ``B' = sum_k |n-k|/((n+1) k!)``.
    """
    kap, ts = _grids(g, f)
    A = 0.0
    C = 0.0
    B = 0.0
    Bp = 0.0
    for r, terms in W.rows.items():
        k = r - 1
        for t in terms:
            A = max(A, _grid_sup(t.profile, f, 1, kap, ts) / (n + 1))
            C = max(C, _grid_sup(t.profile, f, 0, kap, ts))
        B += 1.0 / math.factorial(k)
        Bp += abs(n - k) / ((n + 1) * math.factorial(k))
    return float((1.0 + n * A * B) ** ((n + 1) / n)), float(Bp * C)


def required_smoothness(result: NormalFormResult) -> Dict[int, int]:
    """Highest t-derivative of each ``p_j`` used anywhere in the normal form.

    Raises :class:`SmoothnessPolicyError` if it exceeds the minimum classes
    ``p_0: 0``, ``p_1..p_{n-1}: 1``, ``p_n..p_{2n-2}: 2``.
    """
    ledger = dict(result.ledger)
    for j, d in ledger.items():
        if d > minimum_smoothness(result.n, j):
            raise SmoothnessPolicyError(
                f"normal form consumed derivative {d} of p_{j}, more than C{minimum_smoothness(result.n, j)}"
            )
    return ledger


def _ledger(*objs) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for obj in objs:
        if isinstance(obj, NFSeries):
            obj.ledger(out)
        else:
            for terms in obj:
                for t in terms:
                    t.profile.ledger(out)
    return dict(sorted(out.items()))


def normalize(
    g: GenTrig,
    f: Forcing,
    i_max: Optional[int] = None,
    q_min: Optional[int] = None,
    M: int = DEFAULT_HARMONICS,
    include_row_n: bool = False,
    check: bool = True,
) -> NormalFormResult:
    """Both transformations for forcing ``f``, with ledger, threshold and tail report."""
    n = g.degree
    if n < 2:
        raise ShapeError("normalization needs n >= 2")
    if f.n != n:
        raise ShapeError(f"forcing degree {f.n} does not match reference degree {n}")
    f.check()
    i_max = default_i_max(n) if i_max is None else i_max
    q_min = default_q_min(n) if q_min is None else q_min

    H = hamiltonian_series(g, f.present, M)
    W1, H1, R1, tri1, tail1 = stage1(H, i_max, q_min, include_row_n)
    W2, H2, R2, tri2, tail2 = stage2(H1, i_max, q_min)
    if check:
        _check_shape(H1, n + 1, "intermediate Hamiltonian")
        _check_shape(H2, 2, "special Hamiltonian")

    tail = NFSeries(n)
    for i in sorted(set(tail1.rows) | set(tail2.rows)):
        tail.set_row(i, merge_terms(tail1.row(i), tail2.row(i)))
    kap, ts = _grids(g, f)
    sup = {}
    for q, prof in tail.terms_by_exponent().items():
        sup[q] = (_grid_sup(prof, f, 0, kap, ts), _grid_sup(prof, f, 1, kap, ts))
    dropped = dict(tri1.dropped)
    for q, c in tri2.dropped.items():
        dropped[q] = dropped.get(q, 0) + c
    fourier = max(H1.max_residual(), H2.max_residual(), W1.max_residual(), W2.max_residual())
    report = TruncationReport(i_max, q_min, tail, dropped, fourier, sup)

    k1, d1 = convergence_threshold(W1, n, f, g)
    k2, d2 = convergence_threshold(W2, n, f, g)
    result = NormalFormResult(
        n=n,
        M=M,
        i_max=i_max,
        q_min=q_min,
        H_original=H,
        W_stage1=W1,
        W_stage2=W2,
        H_intermediate=H1,
        H_special=H2,
        R_stage1=R1,
        R_stage2=R2,
        solved=[(1, s) for s in tri1.solved] + [(2, s) for s in tri2.solved],
        ledger=_ledger(W1, W2, H1, H2, R1, R2),
        threshold=max(k1, k2),
        threshold_stages=(k1, k2),
        displacement_bound=d1 + d2,
        truncation=report,
    )
    return result


def evaluate_series(S: NFSeries, f: Forcing, K, kappa, t: float, eps: float = 1.0):
    """Numeric value of an assembled series (or generator at ``eps``)."""
    return S.evaluate(f, K, kappa, t, eps=eps)
