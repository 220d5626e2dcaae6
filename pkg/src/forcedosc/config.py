"""Run configuration shared by all CLI subcommands.

One JSON document holds the forcing (``n``, ``T``, ``p``) and one section per
concern.  Every key has an explicit default, unknown keys are rejected, and
``to_dict`` output parses back to an identical config.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

from .errors import DomainError, ValidationError
from .flow import IntegratorConfig
from .forcing import Forcing

__all__ = ["RunConfig", "apply_override", "config_hash", "DEFAULT_FORCING"]

DEFAULT_FORCING = {"n": 2, "T": 1.0, "p": [{"j": 0, "const": 0.0, "cos": [1.0], "sin": []}]}


@dataclass
class IntegratorSection:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: Optional[float] = None
    direction: str = "backward"
    max_steps: int = 50_000_000
    k_floor: float = 1e-6

    def build(self) -> IntegratorConfig:
        return IntegratorConfig(
            rtol=self.rtol,
            atol=self.atol,
            max_step=float("inf") if self.max_step is None else self.max_step,
            direction=self.direction,
            max_steps=self.max_steps,
            k_floor=self.k_floor,
        )


@dataclass
class NormalFormSection:
    i_max: Optional[int] = None  # resolved to 3n
    q_min: Optional[int] = None  # resolved to -2n
    M: int = 64
    include_row_n: bool = False


@dataclass
class ScanSection:
    seeds: int = 50
    K_min: float = 5.0
    K_max: float = 50.0
    seed: int = 0
    iters: int = 10_000
    ceiling: float = 1e4


@dataclass
class GenTrigSection:
    points: int = 1001
    M: int = 64


@dataclass
class OrbitSection:
    K0: float = 10.0
    kappa0: float = 0.0
    t_end: float = 10.0
    samples: int = 201
    iterations: int = 1000


@dataclass
class DiagnosticsSection:
    lam_min: float = 10.0
    lam_max: float = 100.0
    points: int = 8
    kappas: int = 16
    twist_lams: List[float] = field(default_factory=lambda: [10.0, 20.0, 50.0, 100.0, 200.0])
    coordinates: str = "original"


@dataclass
class OutputsSection:
    dir: str = "."


_SECTIONS = {
    "integrator": IntegratorSection,
    "normalform": NormalFormSection,
    "scan": ScanSection,
    "gentrig": GenTrigSection,
    "orbit": OrbitSection,
    "diagnostics": DiagnosticsSection,
    "outputs": OutputsSection,
}

_TYPES = {"float": (int, float), "int": (int,), "str": (str,), "bool": (bool,)}


def _check_type(section: str, f, value):
    if value is None:
        if "Optional" in str(f.type):
            return value
        raise ValidationError(f"{section}.{f.name} may not be null")
    t = str(f.type).replace("Optional[", "").rstrip("]")
    if t.startswith("List"):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ValidationError(f"{section}.{f.name} must be a list of numbers")
        return [float(v) for v in value]
    ok = _TYPES.get(t)
    if ok is None:
        return value
    if isinstance(value, bool) and t != "bool":
        raise ValidationError(f"{section}.{f.name} must be {t}, got bool")
    if not isinstance(value, ok):
        raise ValidationError(f"{section}.{f.name} must be {t}, got {type(value).__name__}")
    return float(value) if t == "float" else value


def _parse_section(name: str, raw) -> Any:
    cls = _SECTIONS[name]
    if not isinstance(raw, dict):
        raise ValidationError(f"section {name!r} must be an object")
    known = {f.name: f for f in fields(cls)}
    extra = set(raw) - set(known)
    if extra:
        raise ValidationError(f"unknown keys in {name}: {sorted(extra)}")
    kwargs = {k: _check_type(name, known[k], v) for k, v in raw.items()}
    return cls(**kwargs)


@dataclass
class RunConfig:
    forcing: Forcing
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    normalform: NormalFormSection = field(default_factory=NormalFormSection)
    scan: ScanSection = field(default_factory=ScanSection)
    gentrig: GenTrigSection = field(default_factory=GenTrigSection)
    orbit: OrbitSection = field(default_factory=OrbitSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)

    @property
    def n(self) -> int:
        return self.forcing.n

    @classmethod
    def default(cls) -> "RunConfig":
        return cls.from_dict({})

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
        extra = set(raw) - {"n", "T", "p"} - set(_SECTIONS)
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)}")
        forcing_raw = {k: raw.get(k, DEFAULT_FORCING[k]) for k in ("n", "T", "p")}
        forcing = Forcing.from_config(forcing_raw)
        forcing.check()  # degree bound, period, smoothness table
        sections = {name: _parse_section(name, raw.get(name, {})) for name in _SECTIONS}
        cfg = cls(forcing, **sections)
        cfg._resolve()
        try:
            cfg.integrator.build()  # validates tolerances and direction
        except DomainError as exc:
            raise ValidationError(f"integrator: {exc}") from None
        return cfg

    def _resolve(self) -> None:
        n = self.n
        nf = self.normalform
        if nf.i_max is None:
            nf.i_max = 3 * n
        if nf.q_min is None:
            nf.q_min = -2 * n
        if nf.i_max < 1 or nf.M < 4:
            raise ValidationError("normalform.i_max must be >= 1 and normalform.M >= 4")
        if self.diagnostics.coordinates not in ("original", "special"):
            raise ValidationError("diagnostics.coordinates must be 'original' or 'special'")
        sc = self.scan
        if sc.seeds < 1 or not 0 < sc.K_min <= sc.K_max or not 1 <= sc.iters <= 1_000_000:
            raise ValidationError("scan needs seeds >= 1, 0 < K_min <= K_max and 1 <= iters <= 1e6")

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> Dict[str, Any]:
        out = dict(self.forcing.to_config())
        for name in _SECTIONS:
            out[name] = asdict(getattr(self, name))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def sha256(self) -> str:
        return config_hash(self.to_dict())


def config_hash(d: Dict[str, Any]) -> str:
    canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def apply_override(raw: Dict[str, Any], dotted: str, value: Any) -> Dict[str, Any]:
    """Set one leaf ``a.b`` of a raw config dict, leaving siblings untouched."""
    out = copy.deepcopy(raw)
    parts = dotted.split(".")
    node = out
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ValidationError(f"cannot override inside non-object {p!r}")
        node = nxt
    node[parts[-1]] = value
    return out
