"""Parameter sweeps comparing free fall with uniform acceleration.

Every sweep returns a list of rows in the order of its input grid.  Rows are
computed as independent work items (optionally on a thread pool); the order
of completion never affects the output.  Grid points where the cavity would
reach the horizon are kept as rows with NaN values and an ``invalid`` flag.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .detector_response import (
    CavitySpec,
    DetectorSpec,
    METHODS,
    transit_profile,
    transition_probability,
)
from .errors import DomainError
from .kinematics import (
    ANCHORS,
    FreeFallWorldline,
    RindlerWorldline,
    SchwarzschildBackground,
    matched_acceleration,
)
from .numerics import DEFAULT_QUADRATURE, QuadratureConfig
from .validity import DEFAULT_THRESHOLD, estimator

SCENARIOS = ("schwarzschild", "rindler", "both")
DEFAULT_R_GRID = tuple(float(r) for r in np.geomspace(5.0, 100.0, 32))
DEFAULT_L_SET = (1e-3, 0.3, 2.0, 4.0, 6.0)
DEFAULT_FRACTIONS = tuple(i / 10 for i in range(11))
DEFAULT_SURFACE_L = tuple(float(x) for x in np.linspace(0.25, 6.0, 24))

FLAG_INVALID = "invalid"
FLAG_ESTIMATOR = "estimator_above_threshold"

NAN = float("nan")


def _floats(values, name):
    if np.ndim(values) == 0:
        values = [values]
    out = tuple(float(v) for v in values)
    if not out:
        raise DomainError(f"{name} grid is empty")
    if not all(math.isfinite(v) and v > 0 for v in out):
        raise DomainError(f"{name} values must be positive and finite, got {out}")
    return out


@dataclass(frozen=True)
class SweepSpec:
    """Inputs of a sweep.

    ``omega`` fixes the detector gap directly; otherwise it is tuned to cavity
    mode ``resonant_mode`` of each cavity length.  ``tau_grid`` holds
    fractions of each scenario's own transit time (profiles only).
    """

    scenario: str = "both"
    m: float = 1.0
    L: tuple = (4.0,)
    R: tuple = DEFAULT_R_GRID
    lam: float = 0.01
    resonant_mode: Optional[int] = 6
    omega: Optional[float] = None
    anchors: tuple = ("entrance",)
    tau_grid: Optional[tuple] = None
    threshold: float = DEFAULT_THRESHOLD
    n_max: int = 64
    tail_rel_tol: float = 1e-6
    n_max_limit: int = 4096
    quad: QuadratureConfig = DEFAULT_QUADRATURE
    method: str = "levin"
    verify_modes: int = 0
    workers: int = 1

    def __post_init__(self):
        set_ = object.__setattr__
        if self.scenario not in SCENARIOS:
            raise DomainError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not self.m > 0:
            raise DomainError(f"m must be positive, got {self.m}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        set_(self, "L", _floats(self.L, "L"))
        set_(self, "R", _floats(self.R, "R"))
        anchors = (self.anchors,) if isinstance(self.anchors, str) else tuple(self.anchors)
        if not anchors or any(a not in ANCHORS for a in anchors):
            raise DomainError(f"anchors must be drawn from {ANCHORS}, got {anchors}")
        set_(self, "anchors", anchors)
        if (self.omega is None) == (self.resonant_mode is None):
            raise DomainError("give exactly one of omega and resonant_mode")
        if self.omega is not None and not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.resonant_mode is not None and self.resonant_mode < 1:
            raise DomainError(f"resonant_mode must be >= 1, got {self.resonant_mode}")
        if self.tau_grid is not None:
            grid = tuple(float(f) for f in np.atleast_1d(self.tau_grid))
            if not grid or any(not 0.0 <= f <= 1.0 for f in grid):
                raise DomainError("tau_grid fractions must lie in [0, 1]")
            if any(b < a for a, b in zip(grid, grid[1:])):
                raise DomainError("tau_grid fractions must be ascending")
            set_(self, "tau_grid", grid)
        if not self.threshold > 0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.verify_modes < 0:
            raise DomainError("verify_modes must be >= 0")
        CavitySpec(self.L[0], self.n_max, self.tail_rel_tol, self.n_max_limit)

    def detector(self, L: float) -> DetectorSpec:
        if self.omega is not None:
            return DetectorSpec(self.lam, self.omega)
        return DetectorSpec.resonant(self.lam, L, self.resonant_mode)

    def cavity(self, L: float) -> CavitySpec:
        return CavitySpec(L, self.n_max, self.tail_rel_tol, self.n_max_limit)


@dataclass(frozen=True)
class SweepRow:
    R: float
    L: float
    m: float
    anchor: str
    a: float
    fraction: float
    omega: float
    tau_schwarzschild: float
    tau_rindler: float
    P1_schwarzschild: float
    P1_rindler: float
    ratio: float
    estimator: float
    n_max_schwarzschild: int
    n_max_rindler: int
    unitarity_residual: float
    flags: tuple = field(default=())

    def as_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = ";".join(self.flags)
        return d


SWEEP_COLUMNS = tuple(SweepRow.__dataclass_fields__)


@dataclass(frozen=True)
class EstimatorRow:
    R: float
    L: float
    m: float
    estimator: float
    flags: tuple = field(default=())

    def as_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = ";".join(self.flags)
        return d


ESTIMATOR_COLUMNS = tuple(EstimatorRow.__dataclass_fields__)


@dataclass(frozen=True)
class EstimatorSurface:
    surface: list
    inset_fixed_L: list
    inset_fixed_R: list


def _map(fn, items, workers, progress=None):
    """Ordered map; results are placed by input index."""
    done = [0]

    def wrapped(item):
        out = fn(item)
        if progress is not None:
            done[0] += 1
            progress(done[0], len(items))
        return out

    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(wrapped, items))
    return [wrapped(item) for item in items]


def _estimate(R, L, m, threshold):
    """(estimator, flags); an invalid geometry gives NaN and the invalid flag."""
    try:
        SchwarzschildBackground(m, R).check_cavity(L)
        value = estimator(R, L, m).ratio
    except DomainError:
        return NAN, (FLAG_INVALID,)
    return value, ((FLAG_ESTIMATOR,) if value > threshold else ())


class _Runner:
    """Evaluates the distinct (scenario, R, L, anchor) transits of a sweep once each."""

    def __init__(self, spec: SweepSpec):
        self.spec = spec

    def worldline(self, key):
        kind, R, L, anchor = key
        bg = SchwarzschildBackground(self.spec.m, R)
        if kind == "schwarzschild":
            return FreeFallWorldline(bg)
        return RindlerWorldline(matched_acceleration(bg, L, anchor))

    def transit(self, key):
        spec = self.spec
        L = key[2]
        wl = self.worldline(key)
        cav, det = spec.cavity(L), spec.detector(L)
        if spec.tau_grid is None:
            return [
                transition_probability(
                    wl, cav, det, spec.quad, verify_modes=spec.verify_modes, method=spec.method
                )
            ]
        T = wl.transit_time(L)
        return transit_profile(wl, cav, det, [f * T for f in spec.tau_grid], spec.quad, spec.method)

    def run(self, cells, progress=None):
        """cells: list of (R, L, anchor).  Returns {key: [TransitionResult, ...]}."""
        spec = self.spec
        keys = []
        for R, L, anchor in cells:
            if math.isnan(_estimate(R, L, spec.m, spec.threshold)[0]):
                continue
            if spec.scenario in ("schwarzschild", "both"):
                keys.append(("schwarzschild", R, L, None))
            if spec.scenario in ("rindler", "both"):
                keys.append(("rindler", R, L, anchor))
        keys = list(dict.fromkeys(keys))
        return dict(zip(keys, _map(self.transit, keys, spec.workers, progress)))


def _rows(spec: SweepSpec, cells, results) -> list:
    fractions = spec.tau_grid if spec.tau_grid is not None else (1.0,)
    rows = []
    for R, L, anchor in cells:
        est, flags = _estimate(R, L, spec.m, spec.threshold)
        valid = FLAG_INVALID not in flags
        a = NAN
        if valid:
            a = matched_acceleration(SchwarzschildBackground(spec.m, R), L, anchor)
        omega = spec.detector(L).omega
        sch = results.get(("schwarzschild", R, L, None))
        rin = results.get(("rindler", R, L, anchor))
        for j, f in enumerate(fractions):
            s = sch[j] if sch else None
            r = rin[j] if rin else None
            p_s = s.P1 if s else NAN
            p_r = r.P1 if r else NAN
            ratio = p_s / p_r if (s and r and p_r > 0) else NAN
            residuals = [x.unitarity_residual for x in (s, r) if x and x.unitarity_residual is not None]
            rows.append(
                SweepRow(
                    R=R, L=L, m=spec.m, anchor=anchor, a=a, fraction=f, omega=omega,
                    tau_schwarzschild=s.T if s else NAN,
                    tau_rindler=r.T if r else NAN,
                    P1_schwarzschild=p_s,
                    P1_rindler=p_r,
                    ratio=ratio,
                    estimator=est,
                    n_max_schwarzschild=s.n_max if s else 0,
                    n_max_rindler=r.n_max if r else 0,
                    unitarity_residual=max(residuals) if residuals else NAN,
                    flags=flags,
                )
            )
    return rows


def run_transit_profile(spec: SweepSpec, progress: Optional[Callable[[int, int], None]] = None) -> list:
    """Excitation probability along the transit, one row per (anchor, fraction).

    End times are fractions of each scenario's own transit time, so the two
    curves share the axis f in [0, 1].
    """
    if len(spec.R) != 1 or len(spec.L) != 1:
        raise DomainError("a transit profile needs a single R and a single L")
    if spec.tau_grid is None:
        raise DomainError("a transit profile needs tau_grid")
    R, L = spec.R[0], spec.L[0]
    SchwarzschildBackground(spec.m, R).check_cavity(L)
    cells = [(R, L, anchor) for anchor in spec.anchors]
    return _rows(spec, cells, _Runner(spec).run(cells, progress))


def run_ratio_curves(spec: SweepSpec, progress: Optional[Callable[[int, int], None]] = None) -> list:
    """Full-transit probabilities and their ratio for every (anchor, L, R)."""
    if spec.tau_grid is not None:
        raise DomainError("tau_grid is only used by transit profiles")
    cells = [(R, L, anchor) for anchor in spec.anchors for L in spec.L for R in spec.R]
    return _rows(spec, cells, _Runner(spec).run(cells, progress))


def run_radius_sweep(spec: SweepSpec, progress: Optional[Callable[[int, int], None]] = None) -> list:
    """Full-transit probabilities of one cavity length placed at each R of the grid."""
    if len(spec.L) != 1:
        raise DomainError("a radius sweep needs a single L")
    return run_ratio_curves(spec, progress)


def run_estimator_surface(
    R_grid: Sequence[float] = DEFAULT_R_GRID,
    L_grid: Sequence[float] = DEFAULT_SURFACE_L,
    m: float = 1.0,
    threshold: float = DEFAULT_THRESHOLD,
    inset_L: float = 2.0,
    inset_R: float = 10.0,
) -> EstimatorSurface:
    """Estimator on the R x L grid (R varying fastest within each L) plus two slices."""
    R_grid = _floats(R_grid, "R")
    L_grid = _floats(L_grid, "L")
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")

    def row(R, L):
        return EstimatorRow(R, L, m, *_estimate(R, L, m, threshold))

    return EstimatorSurface(
        [row(R, L) for L in L_grid for R in R_grid],
        [row(R, inset_L) for R in R_grid],
        [row(inset_R, L) for L in L_grid],
    )
