"""Command-line interface.

Every command validates its inputs before computing anything, writes one or
more CSV tables atomically, and drops a JSON manifest next to the main table.

Exit status: 0 on success, 2 on invalid input, 3 when a numerical accuracy
target (quadrature tolerance or mode-sum truncation) could not be met.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .detector_response import (
    METHODS,
    NORMALIZATION,
    CavitySpec,
    DetectorSpec,
    transition_probability,
)
from .errors import AccuracyError, DomainError
from .experiments import (
    DEFAULT_FRACTIONS,
    DEFAULT_L_SET,
    DEFAULT_R_GRID,
    DEFAULT_SURFACE_L,
    ESTIMATOR_COLUMNS,
    SCENARIOS,
    SWEEP_COLUMNS,
    SweepSpec,
    run_estimator_surface,
    run_radius_sweep,
    run_ratio_curves,
    run_transit_profile,
)
from .kinematics import (
    ANCHORS,
    FreeFallWorldline,
    RindlerWorldline,
    SchwarzschildBackground,
    matched_acceleration,
)
from .numerics import QuadratureConfig
from .validity import DEFAULT_THRESHOLD, ESTIMATOR_SIGN, estimator

OUTPUT_DIR_ENV = "CAVITY_DETECTOR_OUTPUT_DIR"
COMMANDS = ("trajectory", "estimator", "transition", "profile", "sweep", "figure")
FIGURES = ("fig2", "fig3", "fig4", "fig5a", "fig5b")
EXIT_OK, EXIT_INVALID, EXIT_ACCURACY = 0, 2, 3


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# name -> (kind, choices).  kind: float, int, str, floats (list of floats), strs
_PARAMS = {
    "m": ("float", None),
    "R": ("floats", None),
    "L": ("floats", None),
    "a": ("float", None),
    "lam": ("float", None),
    "omega": ("float", None),
    "omega_mode": ("int", None),
    "anchor": ("strs", ANCHORS),
    "scenario": ("str", SCENARIOS),
    "tau_end": ("float", None),
    "fractions": ("floats", None),
    "points": ("int", None),
    "kind": ("str", ("radius", "ratio")),
    "threshold": ("float", None),
    "inset_L": ("float", None),
    "inset_R": ("float", None),
    "verify_modes": ("int", None),
    # numerical controls
    "abs_tol": ("float", None),
    "rel_tol": ("float", None),
    "max_subdivisions": ("int", None),
    "max_phase_per_panel": ("float", None),
    "n_max": ("int", None),
    "tail_rel_tol": ("float", None),
    "n_max_limit": ("int", None),
    "method": ("str", METHODS),
    "workers": ("int", None),
}
_KIND_NAMES = {
    "float": "a number",
    "int": "an integer",
    "str": "a string",
    "floats": "a number or a list of numbers",
    "strs": "a string or a list of strings",
}
_NUMERICS = {
    "abs_tol": 1e-12,
    "rel_tol": 1e-10,
    "max_subdivisions": 1_000_000,
    "max_phase_per_panel": math.pi / 2,
    "n_max": 64,
    "tail_rel_tol": 1e-6,
    "n_max_limit": 4096,
    "method": "levin",
    "workers": 1,
}
_PHYSICS = {"m": 1.0, "lam": 0.01, "omega": None, "omega_mode": 6, "threshold": DEFAULT_THRESHOLD}

_DEFAULTS = {
    "trajectory": {"scenario": "schwarzschild", "m": 1.0, "R": [10.0], "L": [5.0], "a": None,
                   "anchor": ["entrance"], "points": 101},
    "estimator": {"m": 1.0, "R": None, "L": None, "threshold": DEFAULT_THRESHOLD},
    "transition": {"scenario": "schwarzschild", "R": None, "L": None, "a": None,
                   "anchor": ["entrance"], "tau_end": None, "verify_modes": 12,
                   **_PHYSICS, **_NUMERICS},
    "profile": {"scenario": "both", "R": [10.0], "L": [5.0], "anchor": ["entrance"],
                "fractions": list(DEFAULT_FRACTIONS), **_PHYSICS, **_NUMERICS},
    "sweep": {"kind": "ratio", "scenario": "both", "R": list(DEFAULT_R_GRID), "L": [4.0],
              "anchor": ["entrance"], "verify_modes": 2, **_PHYSICS, **_NUMERICS},
}
_FIGURE_DEFAULTS = {
    "fig2": {"m": 1.0, "R": list(DEFAULT_R_GRID), "L": list(DEFAULT_SURFACE_L), "inset_L": 2.0,
             "inset_R": 10.0, "threshold": DEFAULT_THRESHOLD},
    "fig3": {**_DEFAULTS["profile"], "R": [10.0], "L": [5.0], "lam": 0.01, "omega_mode": 6},
    "fig4": {**_DEFAULTS["sweep"], "kind": "radius", "L": [4.0], "anchor": ["entrance"]},
    "fig5a": {**_DEFAULTS["sweep"], "L": list(DEFAULT_L_SET), "anchor": ["middle"]},
    "fig5b": {**_DEFAULTS["sweep"], "L": list(DEFAULT_L_SET), "anchor": ["entrance"]},
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    figure_id: Optional[str]
    params: dict
    output_path: Path
    progress: bool = False
    overrides: dict = field(default_factory=dict)

    @property
    def quad(self) -> QuadratureConfig:
        p = self.params
        return QuadratureConfig(p["abs_tol"], p["rel_tol"], p["max_subdivisions"], p["max_phase_per_panel"])


# ---------------------------------------------------------------- parsing


def _key_line(text: str, key: str) -> Optional[int]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(key, line):
    return f"key '{key}'" + (f" (line {line})" if line else "")


def _coerce(key, value, line=None):
    """Check ``value`` against the declared kind of ``key`` and normalise it."""
    kind, choices = _PARAMS[key]
    bad = ConfigError(f"invalid value for {_where(key, line)}: expected {_KIND_NAMES[kind]}, got {value!r}")
    if value is None:
        return None
    if kind in ("float", "int"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad
        if kind == "int":
            if float(value) != int(value):
                raise bad
            return int(value)
        if not math.isfinite(value):
            raise bad
        return float(value)
    if kind == "str":
        if not isinstance(value, str) or (choices and value not in choices):
            raise ConfigError(f"invalid value for {_where(key, line)}: {value!r} (choose from {choices})")
        return value
    items = value if isinstance(value, list) else [value]
    if kind == "floats":
        if not items or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in items):
            raise bad
        if not all(math.isfinite(v) for v in items):
            raise bad
        return [float(v) for v in items]
    if not items or any(not isinstance(v, str) or (choices and v not in choices) for v in items):
        raise ConfigError(f"invalid value for {_where(key, line)}: {value!r} (choose from {choices})")
    return list(items)


def load_config_file(path) -> dict:
    """Read a JSON object of run parameters; values are type-checked, keys are not yet."""
    text = Path(path).read_text()
    try:
        data = json.loads(text, object_pairs_hook=_no_duplicates(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    out = {}
    for key, value in data.items():
        line = _key_line(text, key)
        if key in ("command", "figure"):
            if not isinstance(value, str):
                raise ConfigError(f"invalid value for {_where(key, line)}: expected a string")
            out[key] = value
        elif key in _PARAMS:
            out[key] = (_coerce(key, value, line), line)
        else:
            raise ConfigError(f"unknown {_where(key, line)}")
    return out


def _no_duplicates(text):
    def hook(pairs):
        seen = set()
        for key, _ in pairs:
            if key in seen:
                raise ConfigError(f"duplicate {_where(key, _key_line(text, key))}")
            seen.add(key)
        return dict(pairs)

    return hook


def _parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if key not in _PARAMS:
        raise ConfigError(f"unknown override key '{key}'")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, _coerce(key, value)


def build_parser() -> argparse.ArgumentParser:
    # run options are accepted before or after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON file of parameters (flags take precedence)")
    common.add_argument("--output", "-o", default=argparse.SUPPRESS,
                        help="CSV path (default: <command>.csv in $%s or cwd)" % OUTPUT_DIR_ENV)
    common.add_argument("--progress", action="store_true", default=argparse.SUPPRESS,
                        help="print a progress line to stderr")
    parser = argparse.ArgumentParser(
        prog="cavity-detector",
        description="Detector excitation in a cavity: free fall near a black hole vs uniform acceleration.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command")

    def physics(p, multi=False):
        nargs = "+" if multi else None
        p.add_argument("--m", type=float, help="black hole mass")
        p.add_argument("--R", type=float, nargs=nargs, help="radius of the cavity entrance")
        p.add_argument("--L", type=float, nargs=nargs, help="proper cavity length")

    def detector(p):
        p.add_argument("--lambda", dest="lam", type=float, help="coupling strength")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--omega", type=float, help="detector gap")
        g.add_argument("--omega-mode", dest="omega_mode", type=int, help="tune the gap to this cavity mode")
        p.add_argument("--threshold", type=float, help="estimator value above which rows are flagged")

    def numerics(p):
        p.add_argument("--abs-tol", dest="abs_tol", type=float)
        p.add_argument("--rel-tol", dest="rel_tol", type=float)
        p.add_argument("--max-subdivisions", dest="max_subdivisions", type=int)
        p.add_argument("--max-phase-per-panel", dest="max_phase_per_panel", type=float)
        p.add_argument("--n-max", dest="n_max", type=int, help="initial number of modes")
        p.add_argument("--tail-rel-tol", dest="tail_rel_tol", type=float)
        p.add_argument("--n-max-limit", dest="n_max_limit", type=int)
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--workers", type=int)

    p = sub.add_parser("trajectory", parents=[common], help="sample a worldline across the cavity")
    physics(p)
    p.add_argument("--scenario", choices=("schwarzschild", "rindler"))
    p.add_argument("--a", type=float, help="Rindler acceleration (default: matched at --anchor)")
    p.add_argument("--anchor", choices=ANCHORS, nargs=1)
    p.add_argument("--points", type=int)

    p = sub.add_parser("estimator", parents=[common], help="validity estimator L*/L on an R x L grid")
    physics(p, multi=True)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("transition", parents=[common], help="excitation probability for one transit")
    physics(p)
    detector(p)
    numerics(p)
    p.add_argument("--scenario", choices=("schwarzschild", "rindler"))
    p.add_argument("--a", type=float, help="Rindler acceleration (default: matched at --anchor)")
    p.add_argument("--anchor", choices=ANCHORS, nargs=1)
    p.add_argument("--tau-end", dest="tau_end", type=float, help="stop after this proper time")
    p.add_argument("--verify-modes", dest="verify_modes", type=int)

    p = sub.add_parser("profile", parents=[common], help="excitation probability along the transit")
    physics(p)
    detector(p)
    numerics(p)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--anchor", choices=ANCHORS, nargs="+")
    p.add_argument("--fractions", type=float, nargs="+", help="fractions of the transit time")

    p = sub.add_parser("sweep", parents=[common], help="full-transit probabilities over a grid")
    physics(p, multi=True)
    detector(p)
    numerics(p)
    p.add_argument("--kind", choices=("radius", "ratio"))
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--anchor", choices=ANCHORS, nargs="+")
    p.add_argument("--verify-modes", dest="verify_modes", type=int)

    p = sub.add_parser("figure", parents=[common], help="regenerate the data behind a figure")
    p.add_argument("figure_id", choices=FIGURES)
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="deviate from the figure's pinned parameters")
    p.add_argument("--workers", type=int)
    return parser


def parse_config(argv=None, environ=None) -> RunConfig:
    """Parse flags (and an optional JSON config file) into a validated RunConfig."""
    environ = os.environ if environ is None else environ
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise ConfigError("invalid command line") from exc

    file_values = load_config_file(ns.config) if getattr(ns, "config", None) else {}
    command = ns.command or file_values.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    if file_values.get("command", command) != command:
        raise ConfigError(f"config file is for command {file_values['command']!r}, not {command!r}")
    figure_id = getattr(ns, "figure_id", None) or file_values.get("figure")
    if command == "figure":
        if figure_id not in FIGURES:
            raise ConfigError(f"figure must be one of {FIGURES}, got {figure_id!r}")
        if getattr(ns, "figure_id", None) and file_values.get("figure", figure_id) != figure_id:
            raise ConfigError("figure on the command line and in the config file differ")
    elif "figure" in file_values:
        raise ConfigError("key 'figure' is only allowed with the figure command")

    base = _FIGURE_DEFAULTS[figure_id] if command == "figure" else _DEFAULTS[command]
    params = dict(base)
    overrides = {}
    for key, item in file_values.items():
        if key in ("command", "figure"):
            continue
        value, line = item
        if key not in base and not (command == "figure" and key == "workers"):
            raise ConfigError(f"unknown {_where(key, line)} for command {command}")
        if command == "figure" and key != "workers":
            overrides[key] = value
        params[key] = value
    for key, value in vars(ns).items():
        if key in ("config", "output", "progress", "command", "figure_id", "overrides") or value is None:
            continue
        params[key] = _coerce(key, value)
    for item in getattr(ns, "overrides", []) or []:
        key, value = _parse_override(item)
        if key not in base:
            raise ConfigError(f"figure {figure_id} has no parameter '{key}'")
        params[key] = value
        overrides[key] = value
    if "workers" not in params:
        params["workers"] = 1
    if params.get("omega") is not None and ("omega_mode" in base):
        params["omega_mode"] = None

    name = (figure_id or command) + ".csv"
    if getattr(ns, "output", None):
        output = Path(ns.output)
    else:
        output = Path(environ.get(OUTPUT_DIR_ENV) or ".") / name
    cfg = RunConfig(command, figure_id, params, output, bool(getattr(ns, "progress", False)), overrides)
    validate(cfg)
    return cfg


# ------------------------------------------------------------- validation


def _single(params, key):
    value = params.get(key)
    if value is None:
        raise ConfigError(f"--{key} is required")
    if len(value) != 1:
        raise ConfigError(f"--{key} takes a single value here")
    return value[0]


def _background(params):
    m = params["m"]
    R = _single(params, "R")
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    if not R > 2 * m:
        raise DomainError(f"R must exceed 2m (R={R}, m={m})")
    return SchwarzschildBackground(m, R)


def _sweep_spec(params, tau_grid=None) -> SweepSpec:
    return SweepSpec(
        scenario=params["scenario"],
        m=params["m"],
        L=tuple(params["L"]),
        R=tuple(params["R"]),
        lam=params["lam"],
        resonant_mode=params["omega_mode"] if params.get("omega") is None else None,
        omega=params.get("omega"),
        anchors=tuple(params["anchor"]),
        tau_grid=tau_grid,
        threshold=params["threshold"],
        n_max=params["n_max"],
        tail_rel_tol=params["tail_rel_tol"],
        n_max_limit=params["n_max_limit"],
        quad=QuadratureConfig(
            params["abs_tol"], params["rel_tol"], params["max_subdivisions"], params["max_phase_per_panel"]
        ),
        method=params["method"],
        verify_modes=params.get("verify_modes", 0),
        workers=params["workers"],
    )


def validate(cfg: RunConfig) -> None:
    """Raise ConfigError/DomainError for anything that would fail before computing."""
    p = cfg.params
    if p.get("workers", 1) < 1:
        raise ConfigError("workers must be >= 1")
    kind = cfg.figure_id or cfg.command
    if "abs_tol" in p:
        _ = cfg.quad
    if kind in ("trajectory", "transition"):
        L = _single(p, "L")
        if p["scenario"] == "schwarzschild" or p.get("a") is None:
            bg = _background(p)
            bg.check_cavity(L)
            if p["scenario"] == "rindler":
                matched_acceleration(bg, L, p["anchor"][0])
        elif not p["a"] > 0:
            raise DomainError(f"acceleration must be positive, got {p['a']}")
        if kind == "trajectory" and p["points"] < 2:
            raise ConfigError("points must be >= 2")
        if kind == "transition":
            CavitySpec(L, p["n_max"], p["tail_rel_tol"], p["n_max_limit"])
            _detector(p, L)
            if p.get("tau_end") is not None and p["tau_end"] < 0:
                raise DomainError("tau_end must be non-negative")
            if p["verify_modes"] < 0:
                raise ConfigError("verify_modes must be >= 0")
    elif kind == "estimator":
        for key in ("R", "L"):
            if not p.get(key):
                raise ConfigError(f"--{key} is required")
        for R in p["R"]:
            for L in p["L"]:
                estimator(R, L, p["m"])
    elif kind in ("profile", "fig3"):
        bg = _background(p)
        bg.check_cavity(_single(p, "L"))
        _sweep_spec(p, tuple(p["fractions"]))
    elif kind in ("sweep", "fig4", "fig5a", "fig5b"):
        if any(R <= 2 * p["m"] for R in p["R"]):
            bad = [R for R in p["R"] if R <= 2 * p["m"]]
            raise DomainError(f"R must exceed 2m (R={bad[0]}, m={p['m']})")
        spec = _sweep_spec(p)
        if p["kind"] == "radius" and len(spec.L) != 1:
            raise ConfigError("a radius sweep takes a single L")
    elif kind == "fig2":
        if not p["m"] > 0:
            raise DomainError("m must be positive")
        if any(R <= 2 * p["m"] for R in p["R"]):
            raise DomainError(f"R must exceed 2m (m={p['m']})")
        if any(not L > 0 for L in p["L"]):
            raise DomainError("L values must be positive")
    out_dir = cfg.output_path.parent
    if not out_dir.is_dir():
        raise ConfigError(f"output directory {out_dir} does not exist")
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f"output directory {out_dir} is not writable")


def _detector(p, L):
    if p.get("omega") is not None:
        return DetectorSpec(p["lam"], p["omega"])
    return DetectorSpec.resonant(p["lam"], L, p["omega_mode"])


# ---------------------------------------------------------------- output


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _render_csv(columns, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(prefix="." + path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the file the mode open() would have
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".manifest.json")


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix + path.suffix)


# ------------------------------------------------------------- execution


def _progress_printer(enabled):
    if not enabled:
        return None

    def show(done, total):
        print(f"{done}/{total} transits", file=sys.stderr, flush=True)

    return show


def _run_trajectory(cfg):
    p = cfg.params
    L = _single(p, "L")
    if p["scenario"] == "schwarzschild":
        bg = _background(p)
        wl = FreeFallWorldline(bg)
        a = math.nan
    else:
        a = p["a"] if p.get("a") is not None else matched_acceleration(_background(p), L, p["anchor"][0])
        wl = RindlerWorldline(a)
    T = wl.transit_time(L)
    rows = []
    for tau in np.linspace(0.0, T, p["points"]):
        pt = wl.position(min(float(tau), T))
        rows.append({"tau": pt.tau, "space": pt.space, "time": pt.time})
    return [("tau", "space", "time")], [rows], {"transit_time": T, "a": a}


def _run_estimator(cfg):
    p = cfg.params
    m, rows = p["m"], []
    for L in p["L"]:
        for R in p["R"]:
            value = estimator(R, L, m).ratio
            flags = "estimator_above_threshold" if value > p["threshold"] else ""
            rows.append({"R": R, "L": L, "m": m, "estimator": value, "flags": flags})
    return [ESTIMATOR_COLUMNS], [rows], {}


TRANSITION_COLUMNS = (
    "scenario", "R", "L", "m", "a", "anchor", "lambda", "omega", "tau_end", "transit_time",
    "P1", "P2", "truncation_tail", "remainder_estimate", "n_max", "verified_modes", "unitarity_residual",
)


def _run_transition(cfg):
    p = cfg.params
    L = _single(p, "L")
    R = m = math.nan
    anchor = ""
    if p["scenario"] == "schwarzschild":
        bg = _background(p)
        R, m = bg.R, bg.m
        wl = FreeFallWorldline(bg)
        a = math.nan
    elif p.get("a") is not None:
        a = p["a"]
        wl = RindlerWorldline(a)
    else:
        bg = _background(p)
        R, m, anchor = bg.R, bg.m, p["anchor"][0]
        a = matched_acceleration(bg, L, anchor)
        wl = RindlerWorldline(a)
    cav = CavitySpec(L, p["n_max"], p["tail_rel_tol"], p["n_max_limit"])
    det = _detector(p, L)
    res = transition_probability(
        wl, cav, det, cfg.quad, tau_end=p.get("tau_end"), verify_modes=p["verify_modes"],
        method=p["method"], workers=p["workers"],
    )
    row = {
        "scenario": p["scenario"], "R": R, "L": L, "m": m, "a": a, "anchor": anchor,
        "lambda": det.lam, "omega": det.omega, "tau_end": res.T, "transit_time": wl.transit_time(L),
        "P1": res.P1, "P2": res.P2, "truncation_tail": res.truncation_tail,
        "remainder_estimate": res.remainder_estimate, "n_max": res.n_max,
        "verified_modes": min(p["verify_modes"], res.n_max),
        "unitarity_residual": math.nan if res.unitarity_residual is None else res.unitarity_residual,
    }
    return [TRANSITION_COLUMNS], [[row]], {"max_unitarity_residual": res.unitarity_residual}


def _sweep_rows(cfg, rows):
    dicts = [r.as_dict() for r in rows]
    residuals = [r.unitarity_residual for r in rows if not math.isnan(r.unitarity_residual)]
    return [SWEEP_COLUMNS], [dicts], {"max_unitarity_residual": max(residuals) if residuals else None}


def _run_profile(cfg):
    spec = _sweep_spec(cfg.params, tuple(cfg.params["fractions"]))
    return _sweep_rows(cfg, run_transit_profile(spec, _progress_printer(cfg.progress)))


def _run_sweep(cfg):
    spec = _sweep_spec(cfg.params)
    runner = run_radius_sweep if cfg.params["kind"] == "radius" else run_ratio_curves
    return _sweep_rows(cfg, runner(spec, _progress_printer(cfg.progress)))


def _run_fig2(cfg):
    p = cfg.params
    surf = run_estimator_surface(p["R"], p["L"], p["m"], p["threshold"], p["inset_L"], p["inset_R"])
    tables = [[r.as_dict() for r in t] for t in (surf.surface, surf.inset_fixed_L, surf.inset_fixed_R)]
    return [ESTIMATOR_COLUMNS] * 3, tables, {}


def _dispatch(cfg):
    kind = cfg.figure_id or cfg.command
    if kind == "trajectory":
        return _run_trajectory(cfg)
    if kind == "estimator":
        return _run_estimator(cfg)
    if kind == "transition":
        return _run_transition(cfg)
    if kind in ("profile", "fig3"):
        return _run_profile(cfg)
    if kind in ("sweep", "fig4", "fig5a", "fig5b"):
        return _run_sweep(cfg)
    if kind == "fig2":
        return _run_fig2(cfg)
    raise ConfigError(f"unknown command {kind!r}")


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, Path):
        return str(v)
    return v


def execute(cfg: RunConfig) -> int:
    """Run a validated configuration; returns the process exit status."""
    start = time.perf_counter()
    written: list[Path] = []
    try:
        columns, tables, extra = _dispatch(cfg)
        paths = [cfg.output_path]
        if len(tables) == 3:
            paths += [_sibling(cfg.output_path, "_inset_fixed_L"), _sibling(cfg.output_path, "_inset_fixed_R")]
        for path, cols, rows in zip(paths, columns, tables):
            _atomic_write(path, _render_csv(cols, rows))
            written.append(path)
        manifest = {
            "command": cfg.command,
            "figure": cfg.figure_id,
            "version": __version__,
            "inputs": {k: _jsonable(v) for k, v in sorted(cfg.params.items())},
            "overrides": cfg.overrides,
            "tolerances": {k: cfg.params[k] for k in _NUMERICS if k in cfg.params},
            "max_unitarity_residual": _jsonable(extra.pop("max_unitarity_residual", None)),
            "normalization": NORMALIZATION,
            "estimator_sign": ESTIMATOR_SIGN,
            "outputs": [str(p) for p in written],
            "rows": [len(t) for t in tables],
            "extra": {k: _jsonable(v) for k, v in extra.items()},
            "wall_time_s": time.perf_counter() - start,
        }
        mpath = manifest_path(cfg.output_path)
        _atomic_write(mpath, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        written.append(mpath)
    except BaseException as exc:
        for path in written:
            if path.exists():
                path.unlink()
        if isinstance(exc, AccuracyError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ACCURACY
        if isinstance(exc, (DomainError, ConfigError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        raise
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
