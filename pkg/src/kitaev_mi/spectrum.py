"""Momentum grid, single-particle spectrum and phase classification of the
vortex-free sector.

With all link variables fixed to +1 the model reduces to free Majorana
fermions with

    f(q)   = Jx exp(i qx) + Jy exp(i qy) + Jz = eps(q) + i delta(q)
    eps(q) = Jx cos qx + Jy cos qy + Jz
    delta(q) = Jx sin qx + Jy sin qy
    E(q)   = |f(q)|

on the L x L torus grid q = 2 pi n / L with n = -(L-1)/2, ..., (L-1)/2
(half-integers for even L).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .reduction import pairwise_sum


@dataclass(frozen=True)
class Couplings:
    """Bond strengths (Jx, Jy, Jz)."""

    jx: float
    jy: float
    jz: float

    def __post_init__(self):
        for name in ("jx", "jy", "jz"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"coupling {name}={value} is not finite")
            object.__setattr__(self, name, value)
        if self.jx == 0.0 and self.jy == 0.0 and self.jz == 0.0:
            raise ValueError("at least one coupling must be nonzero")

    def normalized(self) -> "Couplings":
        """Rescale onto the plane jx + jy + jz = 1."""
        total = self.jx + self.jy + self.jz
        if total == 0.0:
            raise ValueError("couplings sum to zero; cannot normalize")
        return Couplings(self.jx / total, self.jy / total, self.jz / total)

    def scaled(self, factor: float) -> "Couplings":
        return Couplings(factor * self.jx, factor * self.jy, factor * self.jz)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.jx, self.jy, self.jz)


class Momentum(NamedTuple):
    qx: float
    qy: float


class SpectralPoint(NamedTuple):
    eps: float
    delta: float
    e: float


class Phase(str, enum.Enum):
    GAPLESS_B = "GaplessB"
    GAPPED_AX = "GappedAx"
    GAPPED_AY = "GappedAy"
    GAPPED_AZ = "GappedAz"


def check_size(L) -> int:
    if isinstance(L, bool) or int(L) != L:
        raise ValueError(f"lattice size must be an integer, got {L!r}")
    L = int(L)
    if L < 2:
        raise ValueError(f"lattice size must be >= 2, got {L}")
    return L


def unit_circle(m, L: int) -> tuple[np.ndarray, np.ndarray]:
    """cos and sin of pi*m/L for integer ``m``.

    Built from first-quadrant values by reflection so that parity relations
    (sin(-x) = -sin(x), cos(pi - x) = -cos(x), ...) hold bit-for-bit and the
    quarter turns are exact zeros and ones.
    """
    period = 2 * L
    base = np.arange(period)
    c = np.empty(period)
    s = np.empty(period)
    half = L // 2
    first = np.arange(half + 1)
    c[: half + 1] = np.cos(np.pi * first / L)
    s[: half + 1] = np.sin(np.pi * first / L)
    c[0], s[0] = 1.0, 0.0
    if L % 2 == 0:
        c[half], s[half] = 0.0, 1.0
    # (L/2, L]: angle pi - theta
    upper = base[half + 1 : L + 1]
    c[upper] = -c[L - upper]
    s[upper] = s[L - upper]
    # (L, 2L): angle 2 pi - theta
    lower = base[L + 1 :]
    c[lower] = c[period - lower]
    s[lower] = -s[period - lower]
    idx = np.mod(np.asarray(m, dtype=np.int64), period)
    return c[idx], s[idx]


class GridTables(NamedTuple):
    """Flattened row-major (nx, ny) tables for one lattice size."""

    L: int
    two_nx: np.ndarray  # 2*n, integer valued
    two_ny: np.ndarray
    cos_x: np.ndarray
    sin_x: np.ndarray
    cos_y: np.ndarray
    sin_y: np.ndarray


@lru_cache(maxsize=64)
def grid_tables(L: int) -> GridTables:
    L = check_size(L)
    two_n = 2 * np.arange(L, dtype=np.int64) - (L - 1)
    tnx, tny = np.meshgrid(two_n, two_n, indexing="ij")
    tnx = tnx.ravel()
    tny = tny.ravel()
    cx, sx = unit_circle(tnx, L)
    cy, sy = unit_circle(tny, L)
    tables = GridTables(L, tnx, tny, cx, sx, cy, sy)
    for arr in tables[1:]:
        arr.setflags(write=False)
    return tables


def momentum_grid(L) -> list[Momentum]:
    """The L^2 torus momenta, row-major in (nx, ny), ascending."""
    t = grid_tables(check_size(L))
    qx = np.pi * t.two_nx / t.L
    qy = np.pi * t.two_ny / t.L
    return [Momentum(float(a), float(b)) for a, b in zip(qx, qy)]


def eps_delta(jx, jy, jz, tables: GridTables):
    """eps and delta over the whole grid; broadcasts over leading axes of the couplings."""
    eps = jx * tables.cos_x + jy * tables.cos_y + jz
    delta = jx * tables.sin_x + jy * tables.sin_y
    return eps, delta


def quasiparticle_energies(j: Couplings, L) -> np.ndarray:
    eps, delta = eps_delta(j.jx, j.jy, j.jz, grid_tables(check_size(L)))
    return np.sqrt(eps * eps + delta * delta)


def spectral_point(q: Momentum, j: Couplings) -> SpectralPoint:
    qx, qy = q
    eps = j.jx * math.cos(qx) + j.jy * math.cos(qy) + j.jz
    delta = j.jx * math.sin(qx) + j.jy * math.sin(qy)
    return SpectralPoint(eps, delta, math.hypot(eps, delta))


def energy_gap(j: Couplings, L) -> float:
    """2 min_q E(q) over the finite grid."""
    return 2.0 * float(np.min(quasiparticle_energies(j, L)))


def ground_energy(j: Couplings, L) -> float:
    """-sum_q E(q): every quasiparticle mode of negative energy is filled."""
    return -pairwise_sum(quasiparticle_energies(j, L))


def classify_phase(j: Couplings) -> Phase:
    """Gapless B iff |Ja| <= |Jb| + |Jc| for all three orderings.

    Points on the boundary (equality) count as gapless.
    """
    ax, ay, az = abs(j.jx), abs(j.jy), abs(j.jz)
    if ax == 0.0 and ay == 0.0 and az == 0.0:
        raise ValueError("all couplings are zero")
    if ax > ay + az:
        return Phase.GAPPED_AX
    if ay > ax + az:
        return Phase.GAPPED_AY
    if az > ax + ay:
        return Phase.GAPPED_AZ
    return Phase.GAPLESS_B


def line_point(jz: float) -> Couplings:
    """Point on the symmetric line Jx = Jy = (1 - Jz)/2."""
    jz = float(jz)
    if not 0.0 <= jz <= 1.0:
        raise ValueError(f"jz must lie in [0, 1], got {jz}")
    jx = (1.0 - jz) / 2.0
    return Couplings(jx, jx, jz)
