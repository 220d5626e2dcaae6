"""Polynomials in the forcing symbols ``s_{j,d}`` (``d``-th t-derivative of ``p_j``).

A monomial is a sorted tuple of ``(j, d)`` pairs, with repetition for powers;
the empty tuple is the constant monomial.  Differentiation in ``t`` follows
the Leibniz rule and never produces ``d > 2``.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, Tuple

import numpy as np

from ..errors import SmoothnessPolicyError

Monomial = Tuple[Tuple[int, int], ...]

ONE: Monomial = ()
MAX_DERIVATIVE = 2
PRUNE = 1e-14


def symbol(j: int, d: int = 0) -> Monomial:
    return ((j, d),)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


def mono_dt(m: Monomial) -> Dict[Monomial, int]:
    """t-derivative of a monomial as ``{monomial: multiplicity}``."""
    out: Dict[Monomial, int] = defaultdict(int)
    for i, (j, d) in enumerate(m):
        if i > 0 and m[i - 1] == (j, d):
            continue  # equal factors handled together through the count
        count = m.count((j, d))
        if d + 1 > MAX_DERIVATIVE:
            raise SmoothnessPolicyError(f"p_{j} would need derivative {d + 1} > {MAX_DERIVATIVE}")
        rest = list(m)
        rest.remove((j, d))
        out[tuple(sorted(rest + [(j, d + 1)]))] += count
    return dict(out)


def mono_ledger(m: Monomial, ledger: Dict[int, int]) -> None:
    for j, d in m:
        ledger[j] = max(ledger.get(j, 0), d)


def mono_value(m: Monomial, values: Dict[Tuple[int, int], np.ndarray]):
    out = 1.0
    for sym in m:
        out = out * values[sym]
    return out


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    for j, d in sorted(set(m)):
        name = f"p{j}" + "'" * d
        k = m.count((j, d))
        parts.append(name if k == 1 else f"{name}^{k}")
    return "*".join(parts)


class CoeffExpr:
    """Real polynomial in the symbols ``s_{j,d}``.

    Supports ``+``, ``-``, ``*``, scalar scaling, :meth:`dt` and numeric
    evaluation against a :class:`~forcedosc.forcing.Forcing`.  Coefficients
    with magnitude below ``1e-14`` are pruned.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Monomial, float] | None = None):
        self.terms: Dict[Monomial, float] = {}
        for m, c in (terms or {}).items():
            if abs(c) >= PRUNE:
                self.terms[tuple(sorted(m))] = float(c)

    @classmethod
    def const(cls, c: float) -> "CoeffExpr":
        return cls({ONE: c})

    @classmethod
    def sym(cls, j: int, d: int = 0, c: float = 1.0) -> "CoeffExpr":
        if d > MAX_DERIVATIVE:
            raise SmoothnessPolicyError(f"p_{j} derivative {d} exceeds {MAX_DERIVATIVE}")
        return cls({symbol(j, d): c})

    def __add__(self, other):
        if not isinstance(other, CoeffExpr):
            other = CoeffExpr.const(float(other))
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return CoeffExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return CoeffExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, CoeffExpr):
            return CoeffExpr({m: c * float(other) for m, c in self.terms.items()})
        out: Dict[Monomial, float] = defaultdict(float)
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                out[mono_mul(ma, mb)] += ca * cb
        return CoeffExpr(out)

    __rmul__ = __mul__

    def dt(self) -> "CoeffExpr":
        out: Dict[Monomial, float] = defaultdict(float)
        for m, c in self.terms.items():
            for md, k in mono_dt(m).items():
                out[md] += k * c
        return CoeffExpr(out)

    def is_zero(self) -> bool:
        return not self.terms

    def ledger(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for m in self.terms:
            mono_ledger(m, out)
        return out

    def evaluate(self, forcing, t):
        values = symbol_values(forcing, {s for m in self.terms for s in m}, t)
        total = 0.0
        for m, c in self.terms.items():
            total = total + c * mono_value(m, values)
        return total

    def __eq__(self, other):
        if not isinstance(other, CoeffExpr):
            other = CoeffExpr.const(float(other))
        return self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "CoeffExpr(0)"
        body = " + ".join(f"{c:.6g}*{mono_str(m)}" for m, c in sorted(self.terms.items()))
        return f"CoeffExpr({body})"


def symbol_values(forcing, symbols, t) -> Dict[Tuple[int, int], np.ndarray]:
    """Evaluate ``p_j^(d)(t)`` for every requested symbol (policy-checked)."""
    return {(j, d): forcing(j, t, d) for j, d in symbols}
