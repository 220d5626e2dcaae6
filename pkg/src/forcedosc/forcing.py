"""T-periodic coefficients ``p_0(t), ..., p_{2n-2}(t)`` of the forcing polynomial.

Each coefficient is a finite trigonometric series

    p_j(t) = const_j + sum_h a_jh cos(h w t) + b_jh sin(h w t),   w = 2 pi / T,

so t-derivatives are exact in coefficient space.  Every coefficient also
carries a declared smoothness class (0, 1 or 2 continuous derivatives), and
:func:`eval_p` refuses to differentiate beyond it.  The minimum classes are

    p_0: C0,   p_1 .. p_{n-1}: C1,   p_n .. p_{2n-2}: C2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SmoothnessPolicyError, ValidationError

__all__ = [
    "Forcing",
    "ValidationReport",
    "minimum_smoothness",
    "eval_p",
    "validate",
    "morris_forcing",
    "zero_forcing",
]

MAX_HARMONICS = 32
_SMOOTHNESS_LABELS = {"C0": 0, "C1": 1, "C2": 2}


def minimum_smoothness(n: int, j: int) -> int:
    """Smallest number of continuous derivatives required of ``p_j``."""
    if j == 0:
        return 0
    return 1 if j <= n - 1 else 2


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failures: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class Forcing:
    """Periodic forcing coefficients for ``x'' + n x^(2n-1) = sum_j p_j(t) x^j``.

    ``const``, ``cos`` and ``sin`` are indexed by ``j``; ``cos[j, h-1]`` is the
    amplitude of ``cos(h w t)``.  Rows beyond those supplied are zero.
    """

    n: int
    T: float
    const: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    smoothness: tuple[int, ...]
    present: tuple[int, ...] = field(default=())

    @classmethod
    def from_terms(cls, n: int, T: float, terms: dict | None = None, smoothness: dict | None = None) -> "Forcing":
        """Build from ``{j: {"const": c, "cos": [...], "sin": [...]}}``.

        ``smoothness`` maps ``j`` to 0, 1, 2 or a label ``"C0"``..``"C2"``;
        unlisted coefficients get the minimum class.
        """
        terms = dict(terms or {})
        smoothness = dict(smoothness or {})
        top = max([2 * n - 2, *terms.keys()]) if terms else 2 * n - 2
        J = max(top + 1, 1)
        H = 1
        for spec in terms.values():
            H = max(H, len(spec.get("cos", ())), len(spec.get("sin", ())))
        const = np.zeros(J)
        cos = np.zeros((J, H))
        sin = np.zeros((J, H))
        for j, spec in terms.items():
            const[j] = float(spec.get("const", 0.0))
            a = np.asarray(spec.get("cos", ()), dtype=float)
            b = np.asarray(spec.get("sin", ()), dtype=float)
            cos[j, : len(a)] = a
            sin[j, : len(b)] = b
        smooth = []
        for j in range(J):
            label = smoothness.get(j, minimum_smoothness(n, j))
            smooth.append(_SMOOTHNESS_LABELS[label] if isinstance(label, str) else int(label))
        present = tuple(sorted(j for j in terms if np.any(const[j] != 0) or np.any(cos[j]) or np.any(sin[j])))
        for arr in (const, cos, sin):
            arr.setflags(write=False)
        return cls(int(n), float(T), const, cos, sin, tuple(smooth), present)

    @classmethod
    def from_config(cls, cfg: dict) -> "Forcing":
        """Parse the JSON forcing schema; unknown keys raise :class:`ValidationError`."""
        allowed = {"n", "T", "p"}
        extra = set(cfg) - allowed
        if extra:
            raise ValidationError(f"unknown forcing keys: {sorted(extra)}")
        try:
            n = int(cfg["n"])
            T = float(cfg["T"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"forcing needs numeric 'n' and 'T': {exc}") from None
        terms, smooth = {}, {}
        for entry in cfg.get("p", []):
            extra = set(entry) - {"j", "const", "cos", "sin", "smoothness"}
            if extra:
                raise ValidationError(f"unknown keys in forcing term: {sorted(extra)}")
            if "j" not in entry:
                raise ValidationError("forcing term missing 'j'")
            j = int(entry["j"])
            if j < 0:
                raise ValidationError(f"negative coefficient index {j}")
            if j in terms:
                raise ValidationError(f"duplicate coefficient index {j}")
            terms[j] = {k: entry[k] for k in ("const", "cos", "sin") if k in entry}
            if "smoothness" in entry:
                label = entry["smoothness"]
                if label not in _SMOOTHNESS_LABELS:
                    raise ValidationError(f"smoothness label must be one of C0, C1, C2, got {label!r}")
                smooth[j] = label
        for spec in terms.values():
            if len(spec.get("cos", ())) > MAX_HARMONICS or len(spec.get("sin", ())) > MAX_HARMONICS:
                raise ValidationError(f"at most {MAX_HARMONICS} harmonics per coefficient")
        return cls.from_terms(n, T, terms, smooth)

    def to_config(self) -> dict:
        p = []
        for j in range(self.const.shape[0]):
            if j not in self.present:
                continue
            entry = {
                "j": j,
                "const": float(self.const[j]),
                "cos": _trim(self.cos[j]),
                "sin": _trim(self.sin[j]),
            }
            if self.smoothness[j] != minimum_smoothness(self.n, j):
                entry["smoothness"] = f"C{self.smoothness[j]}"
            p.append(entry)
        return {"n": self.n, "T": self.T, "p": p}

    def to_json(self) -> str:
        return json.dumps(self.to_config())

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.T

    @property
    def degree(self) -> int:
        """Highest ``j`` with a nonzero coefficient, ``-1`` when identically zero."""
        return max(self.present) if self.present else -1

    @property
    def harmonics(self) -> int:
        return self.cos.shape[1]

    def scaled(self, factor: float) -> "Forcing":
        """Same forcing with every amplitude multiplied by ``factor``."""
        return Forcing(
            self.n, self.T, self.const * factor, self.cos * factor, self.sin * factor, self.smoothness, self.present
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coefficient arrays padded/trimmed to exactly ``2n - 1`` rows."""
        J = 2 * self.n - 1
        const = np.zeros(J)
        cos = np.zeros((J, self.harmonics))
        sin = np.zeros((J, self.harmonics))
        m = min(J, self.const.shape[0])
        const[:m] = self.const[:m]
        cos[:m] = self.cos[:m]
        sin[:m] = self.sin[:m]
        return const, cos, sin

    def check(self) -> None:
        report = validate(self)
        if not report.ok:
            raise ValidationError("; ".join(report.failures))

    def __call__(self, j: int, t, d: int = 0):
        return eval_p(self, j, t, d)


def _trim(a: np.ndarray) -> list[float]:
    nz = np.flatnonzero(a)
    return [float(v) for v in a[: nz[-1] + 1]] if nz.size else []


def eval_p(f: Forcing, j: int, t, d: int = 0):
    """``d``-th t-derivative of ``p_j`` at ``t`` (exact, in coefficient space).

    Raises
    ------
    SmoothnessPolicyError
        If ``d`` exceeds the declared smoothness of ``p_j``.
    """
    if not 0 <= j <= 2 * f.n - 2:
        raise DomainError(f"coefficient index {j} outside 0..{2 * f.n - 2}")
    if not 0 <= d <= 2:
        raise DomainError(f"derivative order {d} outside 0..2")
    if j < len(f.smoothness) and d > f.smoothness[j]:
        raise SmoothnessPolicyError(f"p_{j} is declared C{f.smoothness[j]} but derivative {d} was requested")
    t = np.asarray(t, dtype=float)
    if j >= f.const.shape[0]:
        return np.zeros_like(t) if t.ndim else 0.0
    h = np.arange(1, f.harmonics + 1)
    wt = f.omega * np.multiply.outer(t, h)
    c, s = np.cos(wt), np.sin(wt)
    a, b = f.cos[j], f.sin[j]
    scale = (f.omega * h) ** d
    # d/dt cycles (cos, sin) -> (-sin, cos)
    if d == 0:
        val = c @ a + s @ b + f.const[j]
    elif d == 1:
        val = (-s) @ (a * scale) + c @ (b * scale)
    else:
        val = (-c) @ (a * scale) + (-s) @ (b * scale)
    return float(val) if np.ndim(val) == 0 else val


def validate(f: Forcing) -> ValidationReport:
    """Check degree bound, period and the smoothness table."""
    failures = []
    if f.n < 1:
        failures.append(f"degree n must be >= 1, got {f.n}")
    if not (np.isfinite(f.T) and f.T > 0):
        failures.append(f"period must be positive, got {f.T}")
    if f.degree > 2 * f.n - 2:
        failures.append(f"forcing degree {f.degree} exceeds 2n-2 = {2 * f.n - 2}")
    if f.harmonics > MAX_HARMONICS:
        failures.append(f"{f.harmonics} harmonics exceed the limit {MAX_HARMONICS}")
    for arr in (f.const, f.cos, f.sin):
        if not np.all(np.isfinite(arr)):
            failures.append("non-finite forcing coefficient")
            break
    for j in range(min(len(f.smoothness), 2 * f.n - 1)):
        need = minimum_smoothness(f.n, j)
        if f.smoothness[j] < need:
            failures.append(f"p_{j} declared C{f.smoothness[j]} but needs C{need}")
    return ValidationReport(not failures, tuple(failures))


def morris_forcing(p0_cos: float = 1.0, T: float = 1.0) -> Forcing:
    """``x'' + 2 x^3 = p0_cos * cos(2 pi t / T)``."""
    return Forcing.from_terms(2, T, {0: {"cos": [p0_cos]}})


def zero_forcing(n: int, T: float = 1.0) -> Forcing:
    return Forcing.from_terms(n, T, {})
