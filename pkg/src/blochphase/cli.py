"""``bloch`` command-line interface.

Usage::

    bloch sim        --gamma 0.1 --t-end 6.283 --out traj.csv
    bloch gp closed  --gamma 0.1 --theta0 0 --cross-check
    bloch gp quad    --gamma 0.1 --theta0 pi/4
    bloch gp series  --gamma 0.01 --theta0 pi/3
    bloch gp-thermal --start 1e-2 --stop 1e3 --points 50 --fit --out f.csv
    bloch gp-mc      --beta 100 --n 100000 --seed 7
    bloch interf     --gamma 0.05 --t-end 20 --out J.csv
    bloch sweep      --param gamma --target gp-closed --start 0 --stop 0.6 --points 7

Every command also takes ``--config file.json`` (flat keys named like the
long options, with dashes replaced by underscores); flags override the file.
Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 physical
validity violation.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import ActionAngleState, SystemParams
from .dynamics import IntegratorConfig, NoiseSpec, integrate
from .errors import BlochError, DomainError, NumericalError, ValidityError
from .numerics import QuadratureOptions, loglog_slope_fit, plateau_crossover
from .phase import (CycleConvention, dissipative_gp_closed_form, dissipative_gp_quadrature,
                    interference_intensity, monte_carlo_thermal_gp, renormalized_frequency,
                    thermal_factor, weak_coupling_gp)

log = logging.getLogger("blochphase")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_VALIDITY = 4

_PI_EXPR = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_number(text) -> float:
    """Float parser that also understands ``pi``, ``2pi``, ``3*pi/4``."""
    if isinstance(text, bool):
        raise DomainError("expected a number, got a boolean")
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(str(text))
    if not m:
        raise DomainError(f"cannot parse number {text!r}")
    sign, coef, div = m.groups()
    value = (float(coef) if coef else 1.0) * math.pi / (float(div) if div else 1.0)
    return -value if sign == "-" else value


def _int(text) -> int:
    if isinstance(text, bool):
        raise DomainError("expected an integer, got a boolean")
    if isinstance(text, int):
        return text
    if isinstance(text, float) and text.is_integer():
        return int(text)
    try:
        return int(str(text))
    except ValueError:
        raise DomainError(f"cannot parse integer {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    if str(text).lower() in ("1", "true", "yes", "on"):
        return True
    if str(text).lower() in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"cannot parse boolean {text!r}")


def _choice(*options):
    def conv(text):
        if text not in options:
            raise DomainError(f"{text!r} is not one of {', '.join(options)}")
        return text
    conv.choices = options
    return conv


def _str(text):
    return str(text)


# -- per-command parameter schemas: name -> (converter, default) -------------

_COMMON = {
    "seed": (_int, 0),
    "out": (_str, None),
    "format": (_choice("csv", "json"), None),
    "threads": (_int, 1),
}

SCHEMAS = {
    "sim": {
        "gamma": (parse_number, 0.0),
        "eps": (parse_number, 1.0),
        "I0": (parse_number, 0.0),
        "phi0": (parse_number, 0.0),
        "t_end": (parse_number, 2 * math.pi),
        "dt": (parse_number, 1e-3),
        "stride": (_int, 1),
        "noise": (_choice("none", "quenched", "stepwise"), "none"),
        "beta": (parse_number, 1.0),
        "mean_mode": (_choice("zero", "inverse_beta"), "zero"),
        "tau": (parse_number, None),
        "system": (_choice("reduced", "qubit"), "reduced"),
        "eom_form": (_choice("printed", "canonical"), "printed"),
        "method": (_choice("rk4", "heun_stochastic"), None),
        "pole_guard": (parse_number, 1e-9),
    },
    "gp": {
        "gamma": (parse_number, 0.0),
        "eps": (parse_number, 1.0),
        "theta0": (parse_number, math.pi / 2),
        "cross_check": (_bool, False),
        "phi_start": (parse_number, 0.0),
        "phi_end": (parse_number, math.pi),
        "action_mode": (_choice("frozen_at_T", "time_dependent"), "frozen_at_T"),
        "period": (parse_number, 2 * math.pi),
        "abs_tol": (parse_number, 1e-13),
        "rel_tol": (parse_number, 1e-12),
    },
    "gp-thermal": {
        "theta0": (parse_number, 0.0),
        "axis": (_choice("T", "beta"), "T"),
        "grid": (_choice("log", "linear"), "log"),
        "start": (parse_number, 1e-2),
        "stop": (parse_number, 1e3),
        "points": (_int, 50),
        "fit": (_bool, False),
        "fit_t_min": (parse_number, 10.0),
        "fit_t_max": (parse_number, 1e3),
        "fit_out": (_str, None),
        "renormalize": (_bool, True),
        "abs_tol": (parse_number, 1e-13),
        "rel_tol": (parse_number, 1e-12),
    },
    "gp-mc": {
        "beta": (parse_number, 1.0),
        "theta0": (parse_number, 0.0),
        "n": (_int, 100000),
    },
    "interf": {
        "I0": (parse_number, 0.0),
        "phi0": (parse_number, 0.0),
        "gamma": (parse_number, 0.0),
        "eps": (parse_number, 1.0),
        "t_start": (parse_number, 0.0),
        "t_end": (parse_number, 4 * math.pi),
        "points": (_int, 1001),
    },
    "sweep": {
        "param": (_choice("gamma", "theta0", "eps"), "gamma"),
        "target": (_choice("gp-closed", "gp-quad", "gp-series", "omega-bar"), "gp-closed"),
        "grid": (_choice("log", "linear"), "linear"),
        "start": (parse_number, 0.0),
        "stop": (parse_number, 0.5),
        "points": (_int, 11),
        "gamma": (parse_number, 0.0),
        "eps": (parse_number, 1.0),
        "theta0": (parse_number, math.pi / 2),
    },
}
for _schema in SCHEMAS.values():
    _schema.update(_COMMON)

DEFAULT_FORMAT = {"sim": "csv", "gp": "json", "gp-thermal": "csv", "gp-mc": "json",
                  "interf": "csv", "sweep": "csv"}


@dataclass
class RunConfig:
    """Validated parameters of one command run."""

    command: str
    values: dict

    @classmethod
    def from_mapping(cls, command: str, mapping: dict) -> "RunConfig":
        schema = SCHEMAS[command]
        unknown = sorted(set(mapping) - set(schema))
        if unknown:
            raise DomainError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
        values = {}
        for key, (conv, default) in schema.items():
            raw = mapping.get(key, default)
            values[key] = None if raw is None else conv(raw)
        if values["format"] is None:
            values["format"] = DEFAULT_FORMAT[command]
        if values["threads"] < 1:
            raise DomainError("threads must be >= 1")
        if not 0 <= values["seed"] < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        return cls(command, values)

    @classmethod
    def from_file(cls, command: str, path: str) -> "RunConfig":
        return cls.from_mapping(command, load_config_file(path))

    def canonical(self) -> str:
        """Sorted-key JSON with every non-null parameter spelled out."""
        return dumps_json({k: v for k, v in self.values.items() if v is not None})

    def __getitem__(self, key):
        return self.values[key]


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DomainError("config file must hold a flat JSON object")
    nested = [k for k, v in data.items() if isinstance(v, (dict, list))]
    if nested:
        raise DomainError(f"config keys must be scalars: {', '.join(sorted(nested))}")
    return data


@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise DomainError("a sweep needs at least 2 points")
        if self.grid not in ("linear", "log"):
            raise DomainError(f"unknown grid {self.grid!r}")
        if self.grid == "log" and not (self.start > 0 and self.stop > 0):
            raise DomainError("log grid needs positive endpoints")

    def values(self) -> np.ndarray:
        if self.grid == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


# -- formatting ---------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip decimal for floats; ``repr`` is exactly that."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_table(header, rows, form: str) -> str:
    if form == "json":
        return dumps_json({"columns": list(header),
                           "rows": [[_jsonable(v) for v in row] for row in rows]})
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _flatten(d, prefix=""):
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict):
            yield from _flatten(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}", v


def render_report(report: dict, form: str) -> str:
    if form == "json":
        return dumps_json(report)
    return render_table(["key", "value"], [(k, "" if v is None else v) for k, v in _flatten(report)],
                        "csv")


def emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# -- commands -----------------------------------------------------------------

def cmd_sim(cfg: RunConfig) -> int:
    v = cfg.values
    params = SystemParams(eps=v["eps"], gamma=v["gamma"])
    tau = v["tau"]
    if v["noise"] == "stepwise" and tau is None:
        tau = v["dt"]
    noise = NoiseSpec(model=v["noise"], beta=v["beta"], mean_mode=v["mean_mode"],
                      seed=v["seed"], step_correlation_time=tau)
    icfg = IntegratorConfig(method=v["method"], dt=v["dt"], pole_guard_delta=v["pole_guard"],
                            stride=v["stride"], eom_form=v["eom_form"])
    traj = integrate(ActionAngleState(v["I0"], v["phi0"]), params, noise, icfg, v["t_end"],
                     system=v["system"])
    x, y, z = traj.bloch()
    header = ["t", "I", "phi", "r_squared", "H", "x", "y", "z"]
    cols = [traj.t, traj.I, traj.phi, traj.r_squared, traj.H, x, y, z]
    rows = zip(*(c.tolist() for c in cols))
    emit(render_table(header, rows, v["format"]), v["out"])
    nflag = int(traj.flagged.sum())
    if nflag:
        log.warning("%d samples with negative squared radius (kept in output)", nflag)
    if not traj.complete:
        log.error("integration failed: %s", traj.diagnostic)
        return EXIT_NUMERICAL
    return EXIT_OK


def _gp_inputs(v):
    return {"gamma": v["gamma"], "eps": v["eps"], "theta0": v["theta0"]}


def _gp_convention(v):
    return CycleConvention((v["phi_start"], v["phi_end"]), v["action_mode"], v["period"])


def cmd_gp(cfg: RunConfig, mode: str) -> int:
    v = cfg.values
    gamma, eps, theta0 = v["gamma"], v["eps"], v["theta0"]
    opts = QuadratureOptions(abs_tol=v["abs_tol"], rel_tol=v["rel_tol"])
    inputs = _gp_inputs(v)
    if mode == "closed":
        res = dissipative_gp_closed_form(gamma, eps, theta0)
    elif mode == "quad":
        conv = _gp_convention(v)
        res = dissipative_gp_quadrature(gamma, eps, theta0, conv, opts)
        inputs.update(phi_range=list(conv.phi_range), action_mode=conv.action_mode,
                      period_T=conv.period_T)
    else:
        res = weak_coupling_gp(gamma, eps, theta0)
    report = res.to_dict()
    report["inputs"] = inputs
    if v["cross_check"]:
        closed = dissipative_gp_closed_form(gamma, eps, theta0)
        quad = dissipative_gp_quadrature(gamma, eps, theta0, _gp_convention(v), opts)
        report["cross_check"] = {
            "closed_form": closed.value,
            "quadrature": quad.value,
            "quadrature_error_estimate": quad.error_estimate,
            "abs_difference": abs(closed.value - quad.value),
        }
    emit(render_report(report, v["format"]), v["out"])
    return EXIT_OK


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_gp_thermal(cfg: RunConfig) -> int:
    v = cfg.values
    sweep = SweepSpec(v["axis"], v["grid"], v["start"], v["stop"], v["points"])
    if not (v["start"] > 0 and v["stop"] > 0):
        raise DomainError("temperature / beta grid must be positive")
    if v["fit"] and v["out"] in (None, "-") and v["fit_out"] is None:
        raise DomainError("--fit needs --out or --fit-out to place the footer file")
    grid = sweep.values()
    betas = 1.0 / grid if v["axis"] == "T" else grid
    opts = QuadratureOptions(abs_tol=v["abs_tol"], rel_tol=v["rel_tol"])
    theta0 = v["theta0"]

    def row(beta):
        f = thermal_factor(float(beta), opts, renormalize=v["renormalize"])
        return (1.0 / beta, float(beta), f.value, math.cos(theta0) * f.value - math.pi,
                f.error_estimate, f.truncated_mass)

    rows = []
    failures = 0
    for beta, r in zip(betas, _pmap(_safe(row), list(betas), v["threads"])):
        if r is None:
            failures += 1
            log.error("quadrature failed at beta=%r", float(beta))
            continue
        if r[5] > 1e-3:
            log.warning("beta=%s: truncated Gaussian mass %.3g > 1e-3", fmt(r[1]), r[5])
        rows.append(r)
    if not rows:
        raise NumericalError("thermal quadrature failed on every grid point")
    header = ["T", "beta", "f", "phi_g", "err", "truncated_mass"]
    emit(render_table(header, rows, v["format"]), v["out"])

    if v["fit"]:
        lo, hi = v["fit_t_min"], v["fit_t_max"]
        pts = [(r[0], r[2]) for r in rows if lo <= r[0] <= hi]
        fit = loglog_slope_fit(pts)
        footer = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "crossover_T": plateau_crossover(fit, math.pi),
            "fit_T_min": lo,
            "fit_T_max": hi,
            "points": len(pts),
        }
        path = v["fit_out"] or f"{v['out']}.fit.json"
        emit(dumps_json(footer), path)
    return EXIT_NUMERICAL if failures == len(betas) else EXIT_OK


def _safe(fn):
    def wrapped(x):
        try:
            return fn(x)
        except NumericalError:
            return None
    return wrapped


def cmd_gp_mc(cfg: RunConfig) -> int:
    v = cfg.values
    res = monte_carlo_thermal_gp(v["beta"], v["theta0"], v["n"], v["seed"], workers=v["threads"])
    report = {
        "estimate": res.value,
        "stderr": res.error_estimate,
        "n": v["n"],
        "accepted": res.extra["accepted"],
        "rejected_fraction": res.extra["rejected_fraction"],
        "seed": v["seed"],
        "warning": res.extra["warning"],
        "inputs": {"beta": v["beta"], "theta0": v["theta0"]},
    }
    if res.extra["warning"]:
        log.warning("rejected fraction %.3g exceeds 1e-3", res.extra["rejected_fraction"])
    emit(render_report(report, v["format"]), v["out"])
    return EXIT_OK


def cmd_interf(cfg: RunConfig) -> int:
    v = cfg.values
    if v["points"] < 2:
        raise DomainError("points must be >= 2")
    if not v["t_end"] > v["t_start"]:
        raise DomainError("t_end must exceed t_start")
    if not v["eps"] > 0:
        raise DomainError("eps must be positive")
    t = np.linspace(v["t_start"], v["t_end"], v["points"])
    I = v["I0"] - v["gamma"] / (2 * v["eps"]) * t
    inside = np.abs(I) <= 1.0
    if not inside.all():
        cut = int(np.argmin(inside))
        if cut == 0:
            raise DomainError("|I(t)| > 1 already at the first sample")
        log.warning("|I(t)| exceeds 1 at t=%s; output truncated", fmt(t[cut]))
        t = t[:cut]
    J = interference_intensity(v["I0"], v["phi0"], v["gamma"], v["eps"], t)
    emit(render_table(["t", "J"], zip(t.tolist(), np.atleast_1d(J).tolist()), v["format"]),
         v["out"])
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    v = cfg.values
    spec = SweepSpec(v["param"], v["grid"], v["start"], v["stop"], v["points"])
    target = v["target"]
    base = {"gamma": v["gamma"], "eps": v["eps"], "theta0": v["theta0"]}

    def point(x):
        p = dict(base)
        p[spec.param] = float(x)
        try:
            if target == "gp-closed":
                r = dissipative_gp_closed_form(p["gamma"], p["eps"], p["theta0"])
            elif target == "gp-quad":
                r = dissipative_gp_quadrature(p["gamma"], p["eps"], p["theta0"])
            elif target == "gp-series":
                r = weak_coupling_gp(p["gamma"], p["eps"], p["theta0"])
            else:
                return (float(x), renormalized_frequency(p["gamma"], p["eps"]), 0.0, True)
        except ValidityError:
            return (float(x), float("nan"), 0.0, False)
        return (float(x), r.value, r.error_estimate, r.validity.renormalization_bound_ok)

    rows = _pmap(point, spec.values().tolist(), v["threads"])
    for r in rows:
        if not r[3]:
            log.warning("%s=%s violates gamma*pi/(2 eps) <= 1", spec.param, fmt(r[0]))
    emit(render_table([spec.param, "value", "error_estimate", "valid"], rows, v["format"]),
         v["out"])
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="flat JSON file of parameters")
    p.add_argument("--seed", help="unsigned 64-bit seed")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", help="csv or json")
    p.add_argument("--threads", help="worker threads; output does not depend on it")
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved configuration as canonical JSON and exit")


def _add_params(p, command, skip=()):
    for key, (conv, default) in SCHEMAS[command].items():
        if key in _COMMON or key in skip:
            continue
        flag = "--" + key.replace("_", "-")
        if conv is _bool:
            p.add_argument(flag, dest=key, action="store_const", const=True)
            p.add_argument("--no-" + key.replace("_", "-"), dest=key, action="store_const",
                           const=False)
        else:
            choices = getattr(conv, "choices", None)
            hint = f"one of {', '.join(choices)}" if choices else None
            p.add_argument(flag, dest=key, help=f"{hint or ''} (default {default})".strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bloch", description="Geometric phase of a dissipative / stochastic qubit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="integrate the Langevin equations, write a trajectory")
    _add_common(p)
    _add_params(p, "sim")

    p = sub.add_parser("gp", help="dissipative geometric phase")
    gsub = p.add_subparsers(dest="mode", required=True)
    for mode, text in (("closed", "closed form"), ("quad", "quadrature"),
                       ("series", "weak-coupling series")):
        q = gsub.add_parser(mode, help=text)
        _add_common(q)
        _add_params(q, "gp")

    for name, text in (("gp-thermal", "thermal factor f(beta) over a temperature grid"),
                       ("gp-mc", "Monte Carlo thermal geometric phase"),
                       ("interf", "interference intensity J(t)"),
                       ("sweep", "parameter sweep of a phase quantity")):
        q = sub.add_parser(name, help=text)
        _add_common(q)
        _add_params(q, name)
    return parser


def resolve_config(args) -> RunConfig:
    command = args.command
    mapping = load_config_file(args.config) if args.config else {}
    for key in SCHEMAS[command]:
        val = getattr(args, key, None)
        if val is not None:
            mapping[key] = val
    return RunConfig.from_mapping(command, mapping)


def _setup_logging():
    level = os.environ.get("BLOCH_LOG", "WARNING").upper()
    if level.isdigit():
        lvl = int(level)
    else:
        lvl = getattr(logging, level, logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("bloch: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(lvl)
    log.propagate = False


def run(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(cfg.canonical())
            return EXIT_OK
        if args.command == "sim":
            return cmd_sim(cfg)
        if args.command == "gp":
            return cmd_gp(cfg, args.mode)
        if args.command == "gp-thermal":
            return cmd_gp_thermal(cfg)
        if args.command == "gp-mc":
            return cmd_gp_mc(cfg)
        if args.command == "interf":
            return cmd_interf(cfg)
        return cmd_sweep(cfg)
    except ValidityError as exc:
        log.error("physical validity: %s", exc)
        return EXIT_VALIDITY
    except DomainError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except BlochError as exc:  # pragma: no cover - every subclass is handled above
        log.error("%s", exc)
        return EXIT_NUMERICAL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
