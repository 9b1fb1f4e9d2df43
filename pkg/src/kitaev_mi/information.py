"""Reduced density matrices, entropies and mutual information (in bits).

Only sigma^z correlations survive on a z-link, so every reduced density matrix
used here is diagonal in the computational basis:

* one z-link, correlator c2:      eigenvalues (1 +- c2)/4, each twice;
* two z-links, four-point c4:     (1 - c4)/16 eight times,
                                  (1 - 2 c2 + c4)/16 four times,
                                  (1 + 2 c2 + c4)/16 four times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

TOL = 1e-12


_LN2 = math.log(2.0)
_Z = np.diag([1.0, -1.0])
_I = np.eye(2)


@dataclass(frozen=True)
class DiagonalRdm:
    dim: int
    diagonal: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diagonal, dtype=float)
        if d.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} diagonal entries, got shape {d.shape}")
        if abs(d.sum() - 1.0) > TOL:
            raise ValueError(f"trace {d.sum()!r} differs from 1")
        if np.any(d < -TOL):
            raise ValueError(f"negative diagonal entry {d.min()!r}")
        object.__setattr__(self, "diagonal", np.clip(d, 0.0, None))

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)

    def entropy(self) -> float:
        return sum(entropy_term(x) for x in self.diagonal)


@dataclass(frozen=True)
class RdmSpectrum:
    """Eigenvalues with multiplicities."""

    entries: tuple[tuple[float, int], ...]

    def __post_init__(self):
        cleaned = []
        for value, mult in self.entries:
            if mult < 1:
                raise ValueError(f"multiplicity must be positive, got {mult}")
            if value < -TOL:
                raise ValueError(f"eigenvalue {value!r} is negative")
            cleaned.append((max(float(value), 0.0), int(mult)))
        object.__setattr__(self, "entries", tuple(cleaned))
        if abs(self.trace() - 1.0) > TOL:
            raise ValueError(f"trace {self.trace()!r} differs from 1")

    def trace(self) -> float:
        return math.fsum(v * m for v, m in self.entries)

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.entries)

    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.repeat([v for v, _ in self.entries], [m for _, m in self.entries]))

    def entropy(self) -> float:
        return math.fsum(m * entropy_term(v) for v, m in self.entries)


def entropy_term(x: float) -> float:
    """-x log2 x, with the 0 log 0 = 0 convention."""
    x = float(x)
    if x < -TOL or x > 1.0 + TOL:
        raise ValueError(f"entropy_term needs 0 <= x <= 1, got {x!r}")
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x)


def _check_c2(c2: float) -> float:
    c2 = float(c2)
    if not abs(c2) <= 1.0 + TOL:
        raise ValueError(f"two-site correlator must satisfy |c2| <= 1, got {c2!r}")
    return min(1.0, max(-1.0, c2))


def two_site_rdm(c2: float) -> DiagonalRdm:
    """diag(1+c2, 1-c2, 1-c2, 1+c2)/4 in the |00>,|01>,|10>,|11> basis."""
    c2 = _check_c2(c2)
    return DiagonalRdm(4, np.array([1 + c2, 1 - c2, 1 - c2, 1 + c2]) / 4.0)


def _psi(y: float) -> float:
    """(1 + y) log(1 + y) - y >= 0, accurate for small |y|; psi(-1) = 1."""
    if y <= -1.0:
        return 1.0
    if abs(y) < 0.1:
        # sum_{k>=2} (-1)^k y^k / (k (k-1))
        total = 0.0
        power = -y
        for k in range(2, 40):
            power *= -y
            term = power / (k * (k - 1))
            total += term
            if abs(term) <= 1e-18 * total:
                break
        return total
    return (1.0 + y) * math.log1p(y) - y


def relative_entropy_to_product(shifts) -> float:
    """S(product) - S(product + shift) in bits for a diagonal state.

    ``shifts`` holds (x, d, m): product eigenvalue x, shift d, multiplicity m,
    with sum m d = 0 and sum m d log x = 0. Writing x + d = x (1 + y) the
    linear terms drop out exactly and the difference becomes
    sum m x psi(y) / ln 2, a sum of nonnegative terms.
    """
    total = math.fsum(m * x * _psi(d / x) for x, d, m in shifts if x > 0.0)
    return total / _LN2


def mutual_info_two_site(c2: float) -> float:
    """S(i) + S(j) - S(ij) with single-site states I/2.

    Equal to 2 - 2 H((1-c)/4) - 2 H((1+c)/4); evaluated as a sum of
    nonnegative terms around the product state I/4 so that it keeps full
    relative accuracy near c = 0.
    """
    c = _check_c2(c2)
    return relative_entropy_to_product(((0.25, c / 4.0, 2), (0.25, -c / 4.0, 2)))


def _bond_eigenvalues(c2: float, c4: float) -> tuple[float, float, float]:
    c2 = _check_c2(c2)
    lam8 = (1.0 - c4) / 16.0
    lam_minus = (1.0 - 2.0 * c2 + c4) / 16.0
    lam_plus = (1.0 + 2.0 * c2 + c4) / 16.0
    if min(lam8, lam_minus, lam_plus) < -TOL:
        raise ValueError(
            f"unphysical correlator pair c2={c2!r}, c4={c4!r}: "
            f"eigenvalues {lam8!r}, {lam_minus!r}, {lam_plus!r}"
        )
    return lam8, lam_minus, lam_plus


def two_bond_rdm_spectrum(c2: float, c4: float) -> RdmSpectrum:
    lam8, lam_minus, lam_plus = _bond_eigenvalues(c2, c4)
    return RdmSpectrum(((lam8, 8), (lam_minus, 4), (lam_plus, 4)))


def two_bond_rdm(c2: float, c4: float) -> DiagonalRdm:
    """Assemble (1/16) sum_{a,b in {0,z}} <..> s^a s^a s^b s^b explicitly.

    Site order: bond 1 (two sites), then bond 2.
    """
    _bond_eigenvalues(c2, c4)
    zz = np.kron(_Z, _Z)
    one = np.eye(4)
    rho = (np.kron(one, one) + c2 * np.kron(zz, one) + c2 * np.kron(one, zz)
           + c4 * np.kron(zz, zz)) / 16.0
    return DiagonalRdm(16, np.diag(rho).copy())


def mutual_info_two_bond(c2: float, c4: float) -> float:
    """Direct evaluation from the eigenvalue list.

    Loses relative accuracy once c4 - c2^2 is small; see
    :func:`mutual_info_two_bond_connected`.
    """
    c2 = _check_c2(c2)
    lam8, lam_minus, lam_plus = (max(v, 0.0) for v in _bond_eigenvalues(c2, c4))
    return (4.0 * entropy_term((1.0 + c2) / 4.0) + 4.0 * entropy_term((1.0 - c2) / 4.0)
            - 8.0 * entropy_term(lam8) - 4.0 * entropy_term(lam_minus)
            - 4.0 * entropy_term(lam_plus))


def _product_state(c2: float) -> tuple[float, float]:
    return (1.0 + c2) / 4.0, (1.0 - c2) / 4.0


def mutual_info_two_bond_connected(c2: float, c4c: float) -> float:
    """Two-bond mutual information parametrized by c4c = c4 - c2^2.

    With u = (1+c2)/4, v = (1-c2)/4 and s = c4c/16 the joint eigenvalues are
    u^2 + s, v^2 + s (four each) and uv - s (eight); the product of the two
    bond states has s = 0. Keeps full relative accuracy as c4c -> 0, where
    the direct formula is a difference of O(1) entropies.
    """
    c2 = _check_c2(c2)
    c4c = float(c4c)
    _bond_eigenvalues(c2, c2 * c2 + c4c)
    u, v = _product_state(c2)
    s = c4c / 16.0
    if s == 0.0:
        return 0.0
    return relative_entropy_to_product(((u * u, s, 4), (v * v, s, 4), (u * v, -s, 8)))


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("two-qubit density matrix must be 4x4")
    sy = np.array([[0, -1j], [1j, 0]])
    flip = np.kron(sy, sy)
    rho_tilde = flip @ rho.conj() @ flip
    lam = np.sqrt(np.clip(np.linalg.eigvals(rho @ rho_tilde).real, 0.0, None))
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_two_site(c2: float = 0.0) -> float:
    """Concurrence between the two sites of a z-link (zero: the state is diagonal)."""
    return wootters_concurrence(two_site_rdm(c2).matrix())


def site_vs_rest_concurrence(rho_site: np.ndarray) -> float:
    """sqrt(d/(d-1) (1 - Tr rho^2)) for a pure global state."""
    rho_site = np.asarray(rho_site)
    d = rho_site.shape[0]
    purity = float(np.real(np.trace(rho_site @ rho_site)))
    return math.sqrt(max(0.0, d / (d - 1) * (1.0 - purity)))


def pauli_z_string(n: int, sites) -> np.ndarray:
    """Tensor product with sigma^z on ``sites`` (0-based) and identity elsewhere."""
    return reduce(np.kron, [_Z if k in sites else _I for k in range(n)])
