"""Ground-state sigma^z correlators of z-links as momentum sums.

Two-site (one z-link):

    <zz> = 1/L^2 sum_q eps(q)/E(q)

Two z-links separated by dr:

    <zzzz> = 1/L^4 sum_{q1,q3} (A1 A3 - B1 B3) (cos[(q1 - q3).dr] - 1)

with A = delta/E and B = eps/E. The double sum factorizes. Expanding the
cosine, the cross terms sum A*cos and sum B*sin vanish because A is odd and B
is even under q -> -q, and sum A vanishes for the same reason, leaving

    <zzzz> = S_A^2 - S_B^2 + <zz>^2,
    S_A = 1/L^2 sum_q A sin(q.dr),  S_B = 1/L^2 sum_q B cos(q.dr).

The connected part S_A^2 - S_B^2 is returned directly by
:func:`two_bond_connected`; forming it as <zzzz> - <zz>^2 loses every
significant digit once it drops below ~1e-16.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .reduction import pairwise_sum
from .spectrum import Couplings, GridTables, check_size, eps_delta, grid_tables, unit_circle

NAIVE_MAX_L = 64


class Displacement(NamedTuple):
    d1: int
    d2: int


@dataclass(frozen=True)
class CorrelatorConfig:
    """``e_floor``: momenta with E(q) below it contribute zero (the 0/0 points)."""

    e_floor: float = 1e-12

    def __post_init__(self):
        if not self.e_floor >= 0.0:
            raise ValueError(f"e_floor must be >= 0, got {self.e_floor}")


DEFAULT_CONFIG = CorrelatorConfig()


class Ratios(NamedTuple):
    a: np.ndarray  # delta / E
    b: np.ndarray  # eps / E
    floored: np.ndarray | int  # number of momenta dropped by the floor


def ratios_from(eps: np.ndarray, delta: np.ndarray, e_floor: float) -> Ratios:
    energy = np.sqrt(eps * eps + delta * delta)
    dropped = energy < e_floor
    safe = np.where(dropped, 1.0, energy)
    a = np.where(dropped, 0.0, delta / safe)
    b = np.where(dropped, 0.0, eps / safe)
    floored = np.count_nonzero(dropped, axis=-1)
    return Ratios(a, b, floored)


def ratios(j: Couplings, L, cfg: CorrelatorConfig | None = None) -> Ratios:
    cfg = cfg or DEFAULT_CONFIG
    eps, delta = eps_delta(j.jx, j.jy, j.jz, grid_tables(check_size(L)))
    return ratios_from(eps, delta, cfg.e_floor)


def displacement_phases(tables: GridTables, dr) -> tuple[np.ndarray, np.ndarray]:
    """cos and sin of q.dr on the grid, from the exact integer phase index."""
    d1, d2 = (int(v) for v in dr)
    m = tables.two_nx * d1 + tables.two_ny * d2
    return unit_circle(m, tables.L)


def two_site_zz(j: Couplings, L, cfg: CorrelatorConfig | None = None) -> float:
    """<sigma^z sigma^z> across one z-link."""
    L = check_size(L)
    r = ratios(j, L, cfg)
    return pairwise_sum(r.b) / (L * L)


def two_site_zz_floored(j: Couplings, L, cfg: CorrelatorConfig | None = None) -> tuple[float, int]:
    """Same as :func:`two_site_zz`, plus the number of floored momenta."""
    L = check_size(L)
    r = ratios(j, L, cfg)
    return pairwise_sum(r.b) / (L * L), int(r.floored)


def two_bond_zzzz_naive(j: Couplings, L, dr, cfg: CorrelatorConfig | None = None,
                        allow_large: bool = False) -> float:
    """Direct O(L^4) double sum; kept as the reference for the fast path."""
    L = check_size(L)
    if L > NAIVE_MAX_L and not allow_large:
        raise ValueError(
            f"naive double sum at L={L} needs {L ** 4:.2e} terms; use two_bond_zzzz_fast "
            f"or pass allow_large=True (limit L <= {NAIVE_MAX_L})"
        )
    t = grid_tables(L)
    r = ratios(j, L, cfg)
    d1, d2 = (int(v) for v in dr)
    m = t.two_nx * d1 + t.two_ny * d2
    # row blocks keep memory at O(block * L^2)
    block = max(1, min(L * L, 2 ** 22 // (L * L)))
    partials = []
    for start in range(0, L * L, block):
        stop = min(start + block, L * L)
        cos_diff, _ = unit_circle(m[start:stop, None] - m[None, :], L)
        weight = (r.a[start:stop, None] * r.a[None, :] - r.b[start:stop, None] * r.b[None, :])
        partials.append(pairwise_sum((weight * (cos_diff - 1.0)).ravel()))
    total = pairwise_sum(np.array(partials))
    return total / float(L) ** 4


def _fast_parts(j: Couplings, L: int, dr, cfg) -> tuple[float, float, float]:
    t = grid_tables(L)
    r = ratios(j, L, cfg)
    cos_ph, sin_ph = displacement_phases(t, dr)
    n = L * L
    s_a = pairwise_sum(r.a * sin_ph) / n
    s_b = pairwise_sum(r.b * cos_ph) / n
    c2 = pairwise_sum(r.b) / n
    return s_a, s_b, c2


def two_bond_zzzz_fast(j: Couplings, L, dr, cfg: CorrelatorConfig | None = None) -> float:
    """O(L^2) factorized form of :func:`two_bond_zzzz_naive`."""
    s_a, s_b, c2 = _fast_parts(j, check_size(L), dr, cfg)
    return s_a * s_a - s_b * s_b + c2 * c2


def two_bond_connected(j: Couplings, L, dr, cfg: CorrelatorConfig | None = None) -> float:
    """<zzzz> - <zz>^2 without the subtraction."""
    s_a, s_b, _ = _fast_parts(j, check_size(L), dr, cfg)
    return s_a * s_a - s_b * s_b


def longest_displacement(L) -> Displacement:
    """(L/2, L/2) on the torus; floor(L/2) per axis for odd L."""
    L = check_size(L)
    return Displacement(L // 2, L // 2)
