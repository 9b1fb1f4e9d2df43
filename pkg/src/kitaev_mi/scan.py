"""Sweeps along Jx = Jy = (1 - Jz)/2, differentiation, peak finding,
finite-size scaling fits and the phase-diagram raster."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .correlators import CorrelatorConfig, displacement_phases, longest_displacement, ratios_from
from .information import mutual_info_two_bond_connected, mutual_info_two_site
from .reduction import pairwise_sum
from .spectrum import Couplings, Phase, check_size, classify_phase, energy_gap, eps_delta, grid_tables

WORKERS_ENV = "KITAEV_MI_WORKERS"

QUANTITIES = ("mi2", "dmi2", "mi4")

# cap on the elements of one vectorized (jz chunk x grid) block
_BLOCK_ELEMENTS = 2 ** 21


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    return max(1, workers)


@dataclass(frozen=True)
class ScanConfig:
    jz_min: float = 0.0
    jz_max: float = 1.0
    num_points: int = 1001
    L: int = 100
    e_floor: float = 1e-12
    workers: int = 1

    def __post_init__(self):
        check_size(self.L)
        if not 0.0 <= self.jz_min < self.jz_max <= 1.0:
            raise ValueError(f"need 0 <= jz_min < jz_max <= 1, got [{self.jz_min}, {self.jz_max}]")
        if int(self.num_points) != self.num_points or self.num_points < 3:
            raise ValueError(f"num_points must be an integer >= 3, got {self.num_points}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        CorrelatorConfig(self.e_floor)

    @property
    def derivative_step(self) -> float:
        return (self.jz_max - self.jz_min) / (self.num_points - 1)

    def jz_values(self) -> np.ndarray:
        return np.linspace(self.jz_min, self.jz_max, self.num_points)

    def echo(self) -> dict:
        """Config fields that determine the output (worker count excluded)."""
        return {"jz_min": self.jz_min, "jz_max": self.jz_max, "num_points": self.num_points,
                "L": self.L, "e_floor": self.e_floor}


@dataclass
class ScanSeries:
    jz: np.ndarray
    values: np.ndarray
    floored: np.ndarray
    quantity: str
    L: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.jz = np.asarray(self.jz, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.floored = np.asarray(self.floored, dtype=np.int64)
        if not (self.jz.shape == self.values.shape == self.floored.shape):
            raise ValueError("jz, values and floored must have the same length")
        if np.any(np.diff(self.jz) <= 0):
            raise ValueError("jz must be strictly increasing")

    def __len__(self):
        return len(self.jz)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.jz.tolist(), self.values.tolist()))


class Peak(NamedTuple):
    jz: float
    value: float


@dataclass
class ScalingFit:
    """log2|peak - asymptote| = slope * L + intercept."""

    asymptote: float
    slope: float
    intercept: float
    residual: float
    r_squared: float
    mode: str
    sizes: list
    peaks: list
    warnings: list = field(default_factory=list)


# -- per-point kernels --------------------------------------------------------

def _line_couplings(jz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    jx = (1.0 - jz) / 2.0
    return jx, jx


def _correlator_chunk(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """c2, connected c4 (or zeros) and floored counts for a chunk of jz values."""
    jz, L, e_floor, want_bond = args
    tables = grid_tables(L)
    jz = np.asarray(jz, dtype=float)[:, None]
    jx, jy = _line_couplings(jz)
    eps, delta = eps_delta(jx, jy, jz, tables)
    r = ratios_from(eps, delta, e_floor)
    n = L * L
    c2 = pairwise_sum(r.b, axis=-1) / n
    if want_bond:
        cos_ph, sin_ph = displacement_phases(tables, longest_displacement(L))
        s_a = pairwise_sum(r.a * sin_ph, axis=-1) / n
        s_b = pairwise_sum(r.b * cos_ph, axis=-1) / n
        c4c = s_a * s_a - s_b * s_b
    else:
        c4c = np.zeros_like(c2)
    return c2, c4c, np.asarray(r.floored)


def _chunks(values: np.ndarray, L: int, workers: int) -> list[np.ndarray]:
    per_block = max(1, _BLOCK_ELEMENTS // (L * L))
    n_chunks = max(workers, -(-len(values) // per_block))
    return [c for c in np.array_split(values, n_chunks) if len(c)]


def line_correlators(cfg: ScanConfig, want_bond: bool = False):
    """c2, c4c and floored counts for every jz of the scan grid.

    Each jz row is reduced by the same fixed tree whatever chunk it lands in,
    so the result is bit-identical for any worker count.
    """
    jz = cfg.jz_values()
    chunks = _chunks(jz, cfg.L, cfg.workers)
    jobs = [(c, cfg.L, cfg.e_floor, want_bond) for c in chunks]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_correlator_chunk, jobs))
    else:
        parts = [_correlator_chunk(job) for job in jobs]
    c2 = np.concatenate([p[0] for p in parts])
    c4c = np.concatenate([p[1] for p in parts])
    floored = np.concatenate([p[2] for p in parts])
    return jz, c2, c4c, floored


# -- scans --------------------------------------------------------------------

def scan_two_site_mi(cfg: ScanConfig) -> ScanSeries:
    jz, c2, _, floored = line_correlators(cfg)
    values = np.array([mutual_info_two_site(c) for c in c2])
    return ScanSeries(jz, values, floored, "mi2", cfg.L, {"config": cfg.echo(), "c2": c2})


def scan_two_bond_mi(cfg: ScanConfig) -> ScanSeries:
    """Two-bond MI between z-links at the longest torus separation, built
    from the connected four-point function."""
    jz, c2, c4c, floored = line_correlators(cfg, want_bond=True)
    values = np.array([mutual_info_two_bond_connected(a, b) for a, b in zip(c2, c4c)])
    return ScanSeries(jz, values, floored, "mi4", cfg.L,
                      {"config": cfg.echo(), "c2": c2, "c4c": c4c,
                       "displacement": tuple(longest_displacement(cfg.L))})


def derivative(series: ScanSeries) -> ScanSeries:
    """Central differences inside, second-order one-sided at the ends.

    Floored counts of the result are the maxima over each stencil.
    """
    if len(series) < 3:
        raise ValueError("derivative needs at least 3 points")
    steps = np.diff(series.jz)
    step = (series.jz[-1] - series.jz[0]) / (len(series) - 1)
    if not np.allclose(steps, step, rtol=1e-9, atol=0.0):
        raise ValueError("derivative expects a uniform jz grid")
    values = np.gradient(series.values, step, edge_order=2)
    f = series.floored
    floored = f.copy()
    floored[1:-1] = np.maximum(np.maximum(f[:-2], f[1:-1]), f[2:])
    floored[0] = f[:3].max()
    floored[-1] = f[-3:].max()
    meta = {k: v for k, v in series.meta.items() if k == "config"}
    return ScanSeries(series.jz, values, floored, "d" + series.quantity, series.L, meta)


def find_peak(series: ScanSeries, window: tuple[float, float] | None = None,
              exclude_floored: bool = False) -> Peak:
    """Largest value and its jz; ties go to the smaller jz.

    ``window`` restricts the search to lo <= jz <= hi; ``exclude_floored``
    skips samples whose value involved a floored (E ~ 0) momentum.
    """
    if len(series) == 0:
        raise ValueError("empty series")
    mask = np.isfinite(series.values)
    if window is not None:
        lo, hi = window
        mask &= (series.jz >= lo) & (series.jz <= hi)
    if exclude_floored:
        mask &= series.floored == 0
    if not mask.any():
        raise ValueError("no admissible samples for the peak search")
    candidates = np.where(mask, series.values, -np.inf)
    k = int(np.argmax(candidates))
    return Peak(float(series.jz[k]), float(series.values[k]))


def scan(quantity: str, cfg: ScanConfig) -> ScanSeries:
    if quantity == "mi2":
        return scan_two_site_mi(cfg)
    if quantity == "dmi2":
        return derivative(scan_two_site_mi(cfg))
    if quantity == "mi4":
        return scan_two_bond_mi(cfg)
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


# -- finite-size scaling -------------------------------------------------------

def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), rms, r2


def scaling_fit(sizes, peaks, asymptote: float | None = None,
                bracket_factor: float = 10.0) -> ScalingFit:
    """Fit log2|peak(L) - A| = a L + b.

    With ``asymptote=None`` A is chosen to minimize the RMS residual of the
    linear fit. The search runs over the side of the data the monotone
    sequence approaches, out to ``bracket_factor`` times the data range.
    """
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(peaks, dtype=float)
    if x.shape != y.shape or len(x) < 3:
        raise ValueError("need at least 3 (L, peak) pairs")
    order = np.argsort(x)
    x, y = x[order], y[order]
    if np.any(np.diff(x) <= 0):
        raise ValueError("sizes must be distinct")
    d = np.diff(y)
    increasing = bool(np.all(d > 0))
    if not (increasing or np.all(d < 0)):
        raise ValueError(f"peaks are not strictly monotone in L: {y.tolist()}")

    notes = []
    if asymptote is not None:
        a_value = float(asymptote)
        beyond = a_value > y.max() if increasing else a_value < y.min()
        if not beyond:
            notes.append(f"asymptote {a_value} lies inside the data range "
                         f"[{y.min()}, {y.max()}]")
        if np.any(y == a_value):
            raise ValueError("a peak equals the fixed asymptote; log2 of zero")
        mode = "fixed-asymptote"
    else:
        span = float(y.max() - y.min())
        edge = y[-1]
        sign = 1.0 if increasing else -1.0
        # search over log(distance beyond the last point): the residual is
        # multimodal in A itself, so scan coarsely first, then refine
        lo = math.log(max(abs(edge), span) * 1e-12)
        hi = math.log(bracket_factor * span)

        def cost(t):
            a = edge + sign * math.exp(t)
            return _linear_fit(x, np.log2(np.abs(y - a)))[2]

        grid = np.linspace(lo, hi, 401)
        costs = [cost(t) for t in grid]
        k = int(np.argmin(costs))
        bounds = (grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)])
        res = minimize_scalar(cost, bounds=bounds, method="bounded",
                              options={"xatol": 1e-12, "maxiter": 2000})
        t_best = float(res.x) if res.fun <= costs[k] else float(grid[k])
        a_value = float(edge + sign * math.exp(t_best))
        if k in (0, len(grid) - 1):
            notes.append("asymptote sits on the edge of the search bracket")
        mode = "fit-asymptote"

    slope, intercept, rms, r2 = _linear_fit(x, np.log2(np.abs(y - a_value)))
    return ScalingFit(a_value, slope, intercept, rms, r2, mode, x.astype(int).tolist(),
                      y.tolist(), notes)


def peak_heights(quantity: str, sizes, base: ScanConfig | None = None,
                 window: tuple[float, float] | None = None) -> list[Peak]:
    base = base or ScanConfig()
    out = []
    for L in sizes:
        cfg = ScanConfig(base.jz_min, base.jz_max, base.num_points, int(L), base.e_floor, base.workers)
        out.append(find_peak(scan(quantity, cfg), window=window))
    return out


# -- phase diagram ---------------------------------------------------------------

class RasterCell(NamedTuple):
    couplings: Couplings
    gap: float
    phase: Phase


def phase_diagram_raster(resolution: int, L) -> list[RasterCell]:
    """Barycentric grid (i, j, k)/resolution on jx + jy + jz = 1, jx descending
    then jy descending."""
    if int(resolution) != resolution or resolution < 2:
        raise ValueError(f"resolution must be an integer >= 2, got {resolution}")
    r = int(resolution)
    L = check_size(L)
    cells = []
    for i in range(r, -1, -1):
        for k in range(r - i, -1, -1):
            j = Couplings(i / r, k / r, (r - i - k) / r)
            cells.append(RasterCell(j, energy_gap(j, L), classify_phase(j)))
    return cells


def monotone_nondecreasing(values, tol: float = 0.0) -> bool:
    values = np.asarray(values)
    return bool(np.all(np.diff(values) >= -tol))

