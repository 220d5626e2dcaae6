"""``forcedosc`` command line.

Every subcommand reads one JSON config (``--config``), applies flag overrides
leaf by leaf, and writes CSV or JSON into ``outputs.dir``.  Each artifact
carries the sha256 of the resolved config.  Exit codes: 0 success, 1 failed
verification, 2 config errors, 3 numeric failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .config import RunConfig, apply_override
from .errors import (
    ChartSingularityError,
    ConstructionError,
    DomainError,
    IntegrationError,
    ShapeError,
    SmoothnessPolicyError,
    ValidationError,
)

log = logging.getLogger("forcedosc")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SUBCOMMANDS = ("gentrig", "orbit", "poincare", "normalform", "twist", "decay", "scan", "verify")

# flag name -> dotted config key
_FLAG_KEYS = {
    "n": "n",
    "T": "T",
    "rtol": "integrator.rtol",
    "atol": "integrator.atol",
    "direction": "integrator.direction",
    "i_max": "normalform.i_max",
    "q_min": "normalform.q_min",
    "M": "normalform.M",
    "seeds": "scan.seeds",
    "iters": "scan.iters",
    "ceiling": "scan.ceiling",
    "K0": "orbit.K0",
    "kappa0": "orbit.kappa0",
    "out_dir": "outputs.dir",
}


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str, digest: str, header: Sequence[str], rows, comments: Sequence[str] = ()) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_sha256={digest}\n")
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (int, float, np.floating, np.integer)) else v for v in r])


def write_json(path: str, digest: str, payload: Dict[str, Any]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    body = {"config_sha256": digest}
    body.update(payload)
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(args) -> RunConfig:
    raw: Dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            raw = apply_override(raw, key, v)
    for item in args.set or ():
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        raw = apply_override(raw, key.strip(), _parse_value(val))
    return RunConfig.from_dict(raw)


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.outputs.dir, name)


# -- subcommands ---------------------------------------------------------------


def cmd_gentrig(cfg: RunConfig, args) -> int:
    from .reference import build_gentrig

    g = build_gentrig(cfg.n, cfg.gentrig.M)
    k = np.linspace(0.0, g.period, cfg.gentrig.points)
    sn, cn = g.sncn(k)
    path = _out(cfg, "gentrig.csv")
    write_csv(
        path, cfg.sha256(), ["kappa", "sn", "cn"], zip(k, sn, cn),
        comments=[f"n={cfg.n}", f"tau={_fmt(g.tau)}", f"identity_residual={_fmt(g.identity_residual)}"],
    )
    print(path)
    return EXIT_OK


def cmd_orbit(cfg: RunConfig, args) -> int:
    from .action_angle import _kk, _xy
    from .flow import integrate_tracked
    from .reference import build_gentrig

    g = build_gentrig(cfg.n)
    icfg = cfg.integrator.build()
    o = cfg.orbit
    x, y = (float(v) for v in _xy(g, o.K0, o.kappa0))
    ts = np.linspace(0.0, o.t_end, o.samples)
    rows = []
    K, kap = _kk(g, x, y)
    rows.append((ts[0], x, y, float(K), float(kap)))
    for t0, t1 in zip(ts[:-1], ts[1:]):
        x, y, _ = integrate_tracked(g, cfg.forcing, icfg, x, y, t0, t1)
        K, kap = _kk(g, x, y)
        rows.append((t1, x, y, float(K), float(kap)))
    path = _out(cfg, "orbit.csv")
    write_csv(path, cfg.sha256(), ["t", "x", "y", "K", "kappa"], rows)
    print(path)
    return EXIT_OK


def cmd_poincare(cfg: RunConfig, args) -> int:
    from .flow import lam_from_K, period_map_arrays
    from .reference import build_gentrig

    g = build_gentrig(cfg.n)
    icfg = cfg.integrator.build()
    K, kap = cfg.orbit.K0, cfg.orbit.kappa0
    rows = []
    for i in range(cfg.orbit.iterations + 1):
        lam = float(lam_from_K(cfg.n, K)) if cfg.n >= 2 else float("nan")
        rows.append((i, K, lam, float(np.mod(kap, g.period)), kap))
        if i == cfg.orbit.iterations:
            break
        Ks, ks, _ = period_map_arrays(g, cfg.forcing, icfg, K, kap)
        K, kap = float(Ks[0]), float(ks[0])
    path = _out(cfg, "poincare.csv")
    write_csv(path, cfg.sha256(), ["iterate", "K", "Lambda", "kappa", "kappa_continuous"], rows)
    print(path)
    return EXIT_OK


def _series_json(S) -> List[Dict[str, Any]]:
    from .normalform.coeffs import mono_str

    out = []
    for i in sorted(S.rows):
        for t in S.rows[i]:
            terms = []
            for m, c in sorted(t.profile.data.items()):
                nz = np.nonzero(c)[0]
                terms.append(
                    {
                        "monomial": mono_str(m),
                        "harmonics": [[int(k), float(c[k].real), float(c[k].imag)] for k in nz],
                    }
                )
            out.append({"row": i, "exponent": f"{t.q}/{S.n + 1}", "q": t.q, "profile": terms})
    return out


def cmd_normalform(cfg: RunConfig, args) -> int:
    from .normalform.engine import normalize, required_smoothness
    from .reference import build_gentrig

    nf = cfg.normalform
    g = build_gentrig(cfg.n, nf.M)
    r = normalize(g, cfg.forcing, i_max=nf.i_max, q_min=nf.q_min, M=nf.M, include_row_n=nf.include_row_n)
    ledger = required_smoothness(r)
    tr = r.truncation
    K_ref = max(r.threshold, 1.0)
    payload = {
        "n": r.n,
        "i_max": r.i_max,
        "q_min": r.q_min,
        "M": r.M,
        "smoothness_ledger": {f"p_{j}": d for j, d in ledger.items()},
        "threshold": r.threshold,
        "threshold_stages": list(r.threshold_stages),
        "displacement_bound": r.displacement_bound,
        "truncation": {
            "dropped_exponents": {str(q): c for q, c in sorted(tr.dropped_exponents.items())},
            "fourier_residual": tr.fourier_residual,
            "tail_sup_norms": {str(q): list(v) for q, v in sorted(tr.sup_norms.items())},
            "reference_K": K_ref,
            "residual_bound": tr.bound(K_ref),
        },
        "W_stage1": _series_json(r.W_stage1),
        "W_stage2": _series_json(r.W_stage2),
        "H_intermediate": _series_json(r.H_intermediate),
        "H_special": _series_json(r.H_special),
    }
    path = _out(cfg, "normalform.json")
    write_json(path, cfg.sha256(), payload)
    print(path)
    return EXIT_OK


def cmd_twist(cfg: RunConfig, args) -> int:
    from .diagnostics import twist_coefficients, twist_measure
    from .normalform.engine import normalize
    from .reference import build_gentrig

    g = build_gentrig(cfg.n)
    tw = twist_coefficients(normalize(g, cfg.forcing, cfg.normalform.i_max, cfg.normalform.q_min, cfg.normalform.M), cfg.forcing)
    icfg = cfg.integrator.build()
    kappas = np.linspace(0.0, g.period, cfg.diagnostics.kappas, endpoint=False)
    rows = []
    for lam in cfg.diagnostics.twist_lams:
        m = twist_measure(g, cfg.forcing, icfg, lam, kappas)
        pred = float(tw.dalpha(lam))
        rows.append((lam, m, pred, m - pred, float(tw.alpha(lam))))
    path = _out(cfg, "twist.csv")
    write_csv(
        path, cfg.sha256(), ["Lambda", "measured", "dalpha", "difference", "alpha"], rows,
        comments=[f"sigma_{j}={_fmt(s)}" for j, s in sorted(tw.sigma.items())],
    )
    print(path)
    return EXIT_OK


def cmd_decay(cfg: RunConfig, args) -> int:
    from .diagnostics import decay_fit
    from .reference import build_gentrig

    g = build_gentrig(cfg.n)
    d = cfg.diagnostics
    lams = np.geomspace(d.lam_min, d.lam_max, d.points)
    kappas = np.linspace(0.0, g.period, d.kappas, endpoint=False)
    fit = decay_fit(g, cfg.forcing, cfg.integrator.build(), lams, kappas, coordinates=d.coordinates)
    path = _out(cfg, "decay.csv")
    write_csv(
        path, cfg.sha256(), ["Lambda", "F_max", "G_max"], zip(fit.lams, fit.F_max, fit.G_max),
        comments=[
            f"slope_F={_fmt(fit.slope_F)}",
            f"slope_G={_fmt(fit.slope_G)}",
            f"degenerate={str(fit.degenerate).lower()}",
            f"dropped={json.dumps(fit.dropped)}",
        ],
    )
    print(path)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, args) -> int:
    from .diagnostics import boundedness_scan, default_seeds
    from .reference import build_gentrig

    g = build_gentrig(cfg.n)
    s = cfg.scan
    seeds = default_seeds(g, s.seeds, (s.K_min, s.K_max), s.seed)
    rep = boundedness_scan(g, cfg.forcing, cfg.integrator.build(), seeds, s.iters, s.ceiling, jobs=args.jobs)
    path = _out(cfg, "scan.csv")
    rows = [
        (i, r.K0, r.kappa0, r.K_min, r.K_max, r.envelope_ratio, r.iterations, int(r.escaped), r.status, r.mean_log_K)
        for i, r in enumerate(rep.seeds)
    ]
    write_csv(
        path, cfg.sha256(),
        ["seed", "K0", "kappa0", "K_min", "K_max", "ratio", "iterations", "escaped", "status", "mean_log_K"], rows,
    )
    summary = _out(cfg, "scan.json")
    write_json(summary, cfg.sha256(), {"iters": rep.iters, "K_ceiling": rep.K_ceiling, **rep.annulus()})
    print(path)
    print(summary)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    from .verify import run_suite

    checks = run_suite(
        cfg.forcing, cfg.integrator.build(), cfg.normalform.i_max, cfg.normalform.q_min, cfg.normalform.M,
        quick=not args.full,
    )
    for c in checks:
        print(c.line())
    path = _out(cfg, "verify.json")
    write_json(
        path, cfg.sha256(),
        {"passed": all(c.ok for c in checks), "checks": [c.__dict__ for c in checks]},
    )
    return EXIT_OK if all(c.ok for c in checks) else EXIT_VERIFY


_COMMANDS = {
    "gentrig": cmd_gentrig,
    "orbit": cmd_orbit,
    "poincare": cmd_poincare,
    "normalform": cmd_normalform,
    "twist": cmd_twist,
    "decay": cmd_decay,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config leaf, e.g. scan.iters=100")
    common.add_argument("--n", type=int)
    common.add_argument("--T", type=float)
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--direction", choices=("forward", "backward"))
    common.add_argument("--i-max", dest="i_max", type=int)
    common.add_argument("--q-min", dest="q_min", type=int)
    common.add_argument("--M", type=int)
    common.add_argument("--seeds", type=int)
    common.add_argument("--iters", type=int)
    common.add_argument("--ceiling", type=float)
    common.add_argument("--K0", type=float)
    common.add_argument("--kappa0", type=float)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for scans (serial is the reference)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="forcedosc", description="Forced polynomial oscillator toolbox")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "gentrig": "tabulate sn and cn over one period",
        "orbit": "integrate one trajectory",
        "poincare": "iterate the period map from one point",
        "normalform": "two-stage normal form with smoothness ledger and threshold",
        "twist": "numeric vs predicted twist",
        "decay": "decay orders of the period-map corrections",
        "scan": "boundedness scan over many seeds",
        "verify": "run the invariant suite",
    }
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "verify":
            sp.add_argument("--full", action="store_true", help="use full sample sizes")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
    except (ValidationError, DomainError, SmoothnessPolicyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        print(cfg.to_json())
        return EXIT_OK
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg, args)
    except (ValidationError, ShapeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, ChartSingularityError, ConstructionError, DomainError, SmoothnessPolicyError,
            FloatingPointError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
