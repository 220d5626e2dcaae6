"""Compiled Dormand-Prince 5(4) integrator for the Cartesian forced oscillator.

The right-hand side is ``x' = y``, ``y' = -n x^(2n-1) + sum_j p_j(t) x^j`` with
the ``p_j`` given as trigonometric coefficient arrays.  Besides the state, the
integrator tracks how many quarter-turns the angle makes, which lets callers
recover the continuous action-angle ``kappa`` without mod ``4 tau`` ambiguity.
"""
import math

import numpy as np
from numba import njit

OK = 0
STEP_UNDERFLOW = 1
CHART_FLOOR = 2
MAX_STEPS = 3
NONFINITE = 4
ESCAPED = 5

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


@njit(cache=True)
def forcing_poly(n, const, ca, sa, omega, t, x):
    """``sum_j p_j(t) x^j``."""
    J, H = ca.shape
    total = 0.0
    xp = 1.0
    for j in range(J):
        pj = const[j]
        for h in range(H):
            a = ca[j, h]
            b = sa[j, h]
            if a != 0.0 or b != 0.0:
                arg = (h + 1) * omega * t
                pj += a * math.cos(arg) + b * math.sin(arg)
        total += pj * xp
        xp *= x
    return total


@njit(cache=True)
def rhs(n, const, ca, sa, omega, t, x, y):
    return y, -n * x ** (2 * n - 1) + forcing_poly(n, const, ca, sa, omega, t, x)


@njit(cache=True)
def quadrant(x, y):
    """Quarter of the ``kappa`` circle containing the point, with ``s ~ x``, ``c ~ -y``."""
    s = x
    c = -y
    if s >= 0.0 and c > 0.0:
        return 0
    if s > 0.0 and c <= 0.0:
        return 1
    if s <= 0.0 and c < 0.0:
        return 2
    return 3


@njit(cache=True)
def integrate_xy(n, const, ca, sa, omega, x, y, t0, t1, rtol, atol, max_step, level_floor, max_steps):
    """Integrate from ``t0`` to ``t1`` (either direction).

    Returns ``(x, y, t, status, nsteps, quarters)`` where ``quarters`` is the net
    number of quadrant transitions in the direction of increasing ``kappa``.
    """
    span = t1 - t0
    if span == 0.0:
        return x, y, t0, OK, 0, 0
    direction = 1.0 if span > 0 else -1.0
    t = t0
    fx, fy = rhs(n, const, ca, sa, omega, t, x, y)
    # initial step from the state/derivative scale
    d0 = math.sqrt(0.5 * ((x / (atol + rtol * abs(x))) ** 2 + (y / (atol + rtol * abs(y))) ** 2))
    d1 = math.sqrt(0.5 * ((fx / (atol + rtol * abs(x))) ** 2 + (fy / (atol + rtol * abs(y))) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    h = min(h, abs(span), max_step)
    q = quadrant(x, y)
    quarters = 0
    nsteps = 0
    two_n = 2 * n
    while True:
        remaining = (t1 - t) * direction
        if remaining <= 0.0:
            break
        if nsteps >= max_steps:
            return x, y, t, MAX_STEPS, nsteps, quarters
        if h >= remaining:
            h = remaining
        if h < 1e-14 * max(1.0, abs(t)):
            return x, y, t, STEP_UNDERFLOW, nsteps, quarters
        hs = h * direction

        k1x, k1y = fx, fy
        k2x, k2y = rhs(n, const, ca, sa, omega, t + C2 * hs, x + hs * A21 * k1x, y + hs * A21 * k1y)
        k3x, k3y = rhs(
            n, const, ca, sa, omega, t + C3 * hs,
            x + hs * (A31 * k1x + A32 * k2x), y + hs * (A31 * k1y + A32 * k2y),
        )
        k4x, k4y = rhs(
            n, const, ca, sa, omega, t + C4 * hs,
            x + hs * (A41 * k1x + A42 * k2x + A43 * k3x),
            y + hs * (A41 * k1y + A42 * k2y + A43 * k3y),
        )
        k5x, k5y = rhs(
            n, const, ca, sa, omega, t + C5 * hs,
            x + hs * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
            y + hs * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
        )
        k6x, k6y = rhs(
            n, const, ca, sa, omega, t + hs,
            x + hs * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
            y + hs * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
        )
        xn = x + hs * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
        yn = y + hs * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
        k7x, k7y = rhs(n, const, ca, sa, omega, t + hs, xn, yn)
        ex = hs * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ey = hs * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))

        if not (math.isfinite(xn) and math.isfinite(yn) and math.isfinite(err)):
            h *= 0.2
            nsteps += 1
            continue

        qn = quadrant(xn, yn)
        dq = (qn - q) % 4
        if err <= 1.0 and dq != 2:
            t = t + hs
            x, y = xn, yn
            fx, fy = k7x, k7y
            nsteps += 1
            if dq == 1:
                quarters += 1
            elif dq == 3:
                quarters -= 1
            q = qn
            if y * y + x ** two_n < level_floor:
                return x, y, t, CHART_FLOOR, nsteps, quarters
            if err == 0.0:
                factor = 5.0
            else:
                factor = min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = min(h * factor, max_step)
        else:
            nsteps += 1
            if dq == 2 and err <= 1.0:
                h *= 0.5
            else:
                h *= max(0.2, 0.9 * err ** -0.2)
    return x, y, t, OK, nsteps, quarters


@njit(cache=True)
def period_map_batch(n, const, ca, sa, omega, xs, ys, t0, t1, rtol, atol, max_step, level_floor, max_steps):
    m = xs.shape[0]
    xo = np.empty(m)
    yo = np.empty(m)
    status = np.empty(m, np.int64)
    quarters = np.empty(m, np.int64)
    for i in range(m):
        x, y, _, st, _, qq = integrate_xy(
            n, const, ca, sa, omega, xs[i], ys[i], t0, t1, rtol, atol, max_step, level_floor, max_steps
        )
        xo[i] = x
        yo[i] = y
        status[i] = st
        quarters[i] = qq
    return xo, yo, status, quarters


@njit(cache=True)
def iterate_map(n, const, ca, sa, omega, x, y, t0, t1, iters, rtol, atol, max_step, level_floor, max_steps,
                k_ceiling, record):
    """Iterate the period map, tracking the action envelope.

    Returns ``(k_min, k_max, sum_log_k, done, status, history)``; ``done`` is
    the number of completed iterations and ``history`` holds ``K`` after each
    iteration when ``record`` is true.
    """
    expo = (n + 1) / (2.0 * n)
    k = (y * y + x ** (2 * n)) ** expo
    k_min = k
    k_max = k
    sum_log = 0.0
    hist = np.empty(iters if record else 0)
    for i in range(iters):
        x, y, _, st, _, _ = integrate_xy(
            n, const, ca, sa, omega, x, y, t0, t1, rtol, atol, max_step, level_floor, max_steps
        )
        if st != OK:
            return k_min, k_max, sum_log, i, st, hist
        k = (y * y + x ** (2 * n)) ** expo
        if record:
            hist[i] = k
        sum_log += math.log(k)
        if k < k_min:
            k_min = k
        if k > k_max:
            k_max = k
        if k > k_ceiling:
            return k_min, k_max, sum_log, i + 1, ESCAPED, hist
    return k_min, k_max, sum_log, iters, OK, hist
