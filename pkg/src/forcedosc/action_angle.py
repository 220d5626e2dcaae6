"""Action-angle chart ``(K, kappa)`` for the forced oscillator.

The chart is

    x = K^(1/(n+1)) sn(kappa),    y = -K^(n/(n+1)) cn(kappa),

with ``dx ^ dy = n/(n+1) dK ^ dkappa``.  Hamiltonians in ``(K, kappa)`` are the
Cartesian ones multiplied by ``(n+1)/n`` so that ``K' = dH/dkappa`` and
``kappa' = -dH/dK``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .forcing import Forcing
from .reference import GenTrig

__all__ = [
    "CartesianState",
    "ActionAngleState",
    "from_action_angle",
    "to_action_angle",
    "action",
    "cartesian_hamiltonian",
    "aa_hamiltonian",
    "aa_gradient",
]


@dataclass(frozen=True)
class CartesianState:
    x: float
    y: float
    t: float = 0.0


@dataclass(frozen=True)
class ActionAngleState:
    K: float
    kappa: float
    t: float = 0.0


def action(n: int, x, y):
    """``K = (y^2 + x^(2n))^((n+1)/(2n))``."""
    return (np.asarray(y) ** 2 + np.asarray(x) ** (2 * n)) ** ((n + 1) / (2 * n))


def _xy(g: GenTrig, K, kappa):
    n = g.degree
    K = np.asarray(K, dtype=float)
    if np.any(K <= 0):
        raise DomainError("action K must be positive")
    sn, cn = g.sncn(kappa)
    return K ** (1.0 / (n + 1)) * sn, -(K ** (n / (n + 1))) * cn


def from_action_angle(g: GenTrig, s: ActionAngleState) -> CartesianState:
    x, y = _xy(g, s.K, s.kappa)
    return CartesianState(float(x), float(y), s.t)


def _kk(g: GenTrig, x, y):
    n = g.degree
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x == 0) & (y == 0)):
        raise DomainError("the origin has no action-angle coordinates")
    K = action(n, x, y)
    s = x * K ** (-1.0 / (n + 1))
    c = -y * K ** (-n / (n + 1))
    return K, g.kappa(s, c)


def to_action_angle(g: GenTrig, s: CartesianState) -> ActionAngleState:
    K, kappa = _kk(g, s.x, s.y)
    return ActionAngleState(float(K), float(kappa), s.t)


def cartesian_hamiltonian(f: Forcing, x, y, t):
    """``H = (y^2 + x^(2n))/2 - sum_j p_j(t) x^(j+1)/(j+1)``."""
    n = f.n
    H = 0.5 * (np.asarray(y) ** 2 + np.asarray(x) ** (2 * n))
    for j in f.present:
        H = H - f(j, t) * np.asarray(x) ** (j + 1) / (j + 1)
    return H


def aa_hamiltonian(g: GenTrig, f: Forcing, K, kappa, t):
    """Hamiltonian in the ``(K, kappa)`` chart.

    ``(n+1)/(2n) K^(2n/(n+1)) + sum_{j=1}^{2n-1} K^(j/(n+1)) f_j(kappa, t)`` with
    ``f_j = -(n+1)/(j n) sn^j(kappa) p_{j-1}(t)``.
    """
    n = g.degree
    K = np.asarray(K, dtype=float)
    if np.any(K <= 0):
        raise DomainError("action K must be positive")
    sn = g.sn(kappa)
    H = (n + 1) / (2 * n) * K ** (2 * n / (n + 1))
    for j in range(1, 2 * n):
        if j - 1 not in f.present:
            continue
        fj = -(n + 1) / (j * n) * sn**j * f(j - 1, t)
        H = H + K ** (j / (n + 1)) * fj
    return H


def aa_gradient(g: GenTrig, f: Forcing, K, kappa, t):
    """``(dH/dK, dH/dkappa)`` of :func:`aa_hamiltonian`."""
    n = g.degree
    K = np.asarray(K, dtype=float)
    sn, cn = g.sncn(kappa)
    dK = K ** ((n - 1) / (n + 1))
    dk = np.zeros_like(dK * sn)
    for j in range(1, 2 * n):
        if j - 1 not in f.present:
            continue
        p = f(j - 1, t)
        dK = dK - (1.0 / n) * K ** ((j - n - 1) / (n + 1)) * sn**j * p
        dk = dk - (n + 1) / n * K ** (j / (n + 1)) * sn ** (j - 1) * cn * p
    return dK, dk
