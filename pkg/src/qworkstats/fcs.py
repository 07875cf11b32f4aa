"""Closed-system work statistics from the detector-phase counting field.

The central object is the characteristic function

    ``G(lam) = Tr[ K(lam) rho0 K(-lam)^dag ]``,

where ``K(lam) = exp(+i lam/2 H(T)) U(T) exp(-i lam/2 H(0))`` is the two-kick
propagator: the drive propagator sandwiched between detector kicks on the
boundary Hamiltonians. The API takes the physical counting field ``lam`` and
applies the halving internally.

``G`` is a moment generating function: the n-th moment of the internal-energy
change is ``(-i)^n d^n G / d lam^n`` at ``lam = 0``. Expanding ``G`` in the
initial and final eigenbases gives an exact finite sum of phases,

    ``G(lam) = sum_{ijk} w_ijk exp(i lam u_ijk)``,
    ``u_ijk = eps_k(T) - (eps_i(0) + eps_j(0)) / 2``,
    ``w_ijk = rho_ij <k|U|i> <k|U|j>*``,

from which moments are computed exactly and the quasi-probability
distribution of the energy change is obtained by merging equal support
values. The weights are real after merging but may be negative when the
initial state carries coherences between energy eigenstates; a dephased
(diagonal) initial state reproduces the nonnegative two-measurement result.

A windowed Fourier inversion of ``G`` sampled on a wide counting-field grid
is provided as an independent validation path for the binned distribution;
it carries the usual windowing artifacts and is not used in production.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .drive import DiscretizedDrive, evolution_operator
from .linalg import (
    DensityOperator,
    NumericalError,
    UnitaryOperator,
    eig_hermitian,
)

__all__ = [
    "CountingGrid",
    "CharacteristicSamples",
    "SpectralWorkTerm",
    "QuasiDistribution",
    "symmetric_grid",
    "fd_stencil_grid",
    "two_kick_propagator",
    "characteristic_function",
    "spectral_decomposition",
    "moment",
    "moment_fd",
    "default_fd_step",
    "quasi_distribution",
    "coherent_classical_split",
    "fourier_quasi_weights",
    "fourier_grid_for_supports",
    "merge_support_points",
]


@dataclass(frozen=True)
class CountingGrid:
    """Symmetric grid of counting-field values containing ``lam = 0``."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.sort(np.asarray(self.lambdas, dtype=float).ravel())
        if lam.size == 0:
            raise ValueError("counting grid is empty")
        if np.min(np.abs(lam)) > 1e-15:
            raise ValueError("counting grid must contain lam = 0")
        rev = -lam[::-1]
        if np.max(np.abs(lam - rev)) > 1e-12 * max(1.0, float(np.max(np.abs(lam)))):
            raise ValueError("counting grid must be symmetric about 0")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def size(self) -> int:
        return self.lambdas.size

    @property
    def spacing(self) -> float:
        """Grid spacing; raises for non-uniform grids."""
        diffs = np.diff(self.lambdas)
        if diffs.size == 0:
            raise ValueError("single-point grid has no spacing")
        if np.max(diffs) - np.min(diffs) > 1e-9 * np.max(diffs):
            raise ValueError("grid is not uniform")
        return float(diffs[0])

    def index_of(self, lam: float) -> int:
        """Index of the grid point equal to ``lam`` within rounding."""
        i = int(np.argmin(np.abs(self.lambdas - lam)))
        if abs(self.lambdas[i] - lam) > 1e-9 * max(1.0, abs(lam)):
            raise KeyError(f"counting grid has no point at lam = {lam}")
        return i


def symmetric_grid(lambda_max: float, points: int) -> CountingGrid:
    """Uniform symmetric grid; ``points`` must be odd so 0 is included."""
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    if points < 1 or points % 2 == 0:
        raise ValueError("points must be a positive odd number")
    return CountingGrid(np.linspace(-lambda_max, lambda_max, points))


def fd_stencil_grid(h: float, order: int = 2, richardson: bool = True) -> CountingGrid:
    """Grid holding every point the order-``order`` central stencil needs.

    With ``richardson`` the doubled-step stencil points are included as well.
    """
    if h <= 0:
        raise ValueError("stencil step must be positive")
    m = (order + 1) // 2
    offsets = {0}
    for j in range(1, m + 1):
        offsets.update({j, -j})
        if richardson:
            offsets.update({2 * j, -2 * j})
    return CountingGrid(np.array(sorted(offsets), dtype=float) * h)


class CharacteristicSamples:
    """``G`` sampled on a counting grid.

    Construction enforces normalization ``G(0) = 1`` (to ``norm_tol``) and the
    symmetry ``G(-lam) = conj(G(lam))`` (to ``sym_tol``) that guarantees a
    real quasi-distribution.
    """

    def __init__(
        self,
        grid: CountingGrid,
        values,
        *,
        norm_tol: float = 1e-12,
        sym_tol: float = 1e-10,
    ):
        v = np.asarray(values, dtype=complex).ravel()
        if v.size != grid.size:
            raise ValueError("sample count does not match grid size")
        g0 = v[grid.index_of(0.0)]
        if abs(g0 - 1.0) > norm_tol:
            raise NumericalError(f"G(0) = {g0} deviates from 1 by {abs(g0 - 1.0):.3e}")
        dev = float(np.max(np.abs(v[::-1] - np.conj(v))))
        if dev > sym_tol:
            raise NumericalError(f"G(-lam) != conj(G(lam)): deviation {dev:.3e}")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    def value_at(self, lam: float) -> complex:
        return complex(self.values[self.grid.index_of(lam)])

    def __len__(self) -> int:
        return self.grid.size


class SpectralWorkTerm(NamedTuple):
    """One exact phase term of ``G``: ``weight * exp(i lam support)``.

    ``i, j`` index the initial eigenbasis, ``k`` the final one. Terms with
    ``i == j`` carry the coherence-free (two-measurement) part and have real
    nonnegative weight; ``i != j`` terms encode initial coherences.
    """

    i: int
    j: int
    k: int
    support: float
    weight: complex


@dataclass(frozen=True)
class QuasiDistribution:
    """Support points and real weights of the energy-change quasi-probability.

    Weights sum to one but individual weights may be negative; negativity is
    the signature of initial-state coherence surviving the counting protocol.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.support, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if u.size != w.size:
            raise ValueError("support and weights differ in length")
        if u.size == 0:
            raise ValueError("empty distribution")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-10:
            raise NumericalError(f"quasi-distribution weights sum to {total}, not 1")
        u.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", u)
        object.__setattr__(self, "weights", w)

    @property
    def min_weight(self) -> float:
        return float(self.weights.min())

    def moment(self, n: int) -> float:
        return float(np.sum(self.weights * self.support**n))


def two_kick_propagator(drive: DiscretizedDrive, lam: float) -> UnitaryOperator:
    """``exp(+i lam/2 H(T)) U(T) exp(-i lam/2 H(0))`` as three unitary factors."""
    u = evolution_operator(drive)
    kick_end = _boundary_kick(drive.h_end, +0.5 * lam)
    kick_start = _boundary_kick(drive.h_start, -0.5 * lam)
    return UnitaryOperator(kick_end @ u.matrix @ kick_start)


def _boundary_kick(h, angle: float) -> np.ndarray:
    """``exp(+i angle H)`` from the cached eigensystem of ``h``."""
    values, vectors = eig_hermitian(h)
    v = vectors.matrix
    return (v * np.exp(1j * angle * values)) @ v.conj().T


class _KickCache:
    """Eigen-systems of the boundary Hamiltonians plus the drive propagator."""

    def __init__(self, drive: DiscretizedDrive):
        self.u = evolution_operator(drive).matrix
        self.w0, v0 = eig_hermitian(drive.h_start)
        self.v0 = v0.matrix
        self.wt, vt = eig_hermitian(drive.h_end)
        self.vt = vt.matrix

    def propagator(self, lam: float) -> np.ndarray:
        end = (self.vt * np.exp(0.5j * lam * self.wt)) @ self.vt.conj().T
        start = (self.v0 * np.exp(-0.5j * lam * self.w0)) @ self.v0.conj().T
        return end @ self.u @ start


def characteristic_function(
    rho0: DensityOperator, drive: DiscretizedDrive, grid: CountingGrid
) -> CharacteristicSamples:
    """Evaluate ``G(lam) = Tr[K(lam) rho0 K(-lam)^dag]`` on the grid."""
    if rho0.dim != drive.dim:
        raise ValueError(f"state dim {rho0.dim} != drive dim {drive.dim}")
    cache = _KickCache(drive)
    rho = rho0.matrix
    values = np.empty(grid.size, dtype=complex)
    for n, lam in enumerate(grid.lambdas):
        k_plus = cache.propagator(float(lam))
        k_minus = cache.propagator(-float(lam))
        values[n] = np.trace(k_plus @ rho @ k_minus.conj().T)
    return CharacteristicSamples(grid, values)


def spectral_decomposition(
    rho0: DensityOperator, drive: DiscretizedDrive, prune: float = 1e-14
) -> list[SpectralWorkTerm]:
    """Exact expansion of ``G`` in the initial and final eigenbases.

    Terms with ``|weight| < prune`` are dropped. Eigenvectors inside
    degenerate subspaces are taken as returned by the eigensolver; only
    binned support/weight pairs are basis-independent, which is what
    :func:`quasi_distribution` exposes.
    """
    if rho0.dim != drive.dim:
        raise ValueError(f"state dim {rho0.dim} != drive dim {drive.dim}")
    eps0, v0 = eig_hermitian(drive.h_start)
    epst, vt = eig_hermitian(drive.h_end)
    u = evolution_operator(drive).matrix
    m = vt.matrix.conj().T @ u @ v0.matrix  # m[k, i] = <eps_k(T)|U|eps_i(0)>
    rho = v0.matrix.conj().T @ rho0.matrix @ v0.matrix
    d = rho0.dim
    terms: list[SpectralWorkTerm] = []
    for k in range(d):
        for i in range(d):
            for j in range(d):
                w = rho[i, j] * m[k, i] * np.conj(m[k, j])
                if abs(w) < prune:
                    continue
                u_val = epst[k] - 0.5 * (eps0[i] + eps0[j])
                terms.append(SpectralWorkTerm(i, j, k, float(u_val), complex(w)))
    total = sum(t.weight for t in terms)
    if abs(total - 1.0) > 1e-10:
        raise NumericalError(f"spectral weights sum to {total}, not 1")
    return terms


def moment(terms: Sequence[SpectralWorkTerm], n: int) -> float:
    """n-th moment ``Re sum_t w_t u_t^n`` from the exact spectral terms.

    The imaginary residue of the sum cancels pairwise between ``(i, j)`` and
    ``(j, i)`` terms; a residue above 1e-10 signals a broken decomposition.
    """
    if n < 1:
        raise ValueError("moment order must be >= 1")
    total = sum(t.weight * t.support**n for t in terms)
    if abs(total.imag) > 1e-10:
        raise NumericalError(f"moment has imaginary residue {total.imag:.3e}")
    return float(total.real)


def _central_weights(n: int, m: int) -> np.ndarray:
    """Stencil weights on offsets ``-m..m`` for the n-th derivative.

    Solves the Vandermonde moment conditions; the symmetric stencil is
    accurate to ``O(h^2)`` at minimal ``m = ceil(n/2)``.
    """
    offsets = np.arange(-m, m + 1, dtype=float)
    a = np.vander(offsets, 2 * m + 1, increasing=True).T
    b = np.zeros(2 * m + 1)
    b[n] = float(math.factorial(n))
    return np.linalg.solve(a, b)


def moment_fd(
    samples: CharacteristicSamples,
    n: int,
    h: float | None = None,
    richardson: bool = True,
) -> float:
    """Finite-difference estimate of the n-th moment at ``lam = 0``.

    Central differences of minimal symmetric width on step ``h`` (default:
    the smallest positive grid value), optionally Richardson-extrapolated
    once against the doubled step. Raises ``KeyError`` if the sample grid is
    missing a stencil point.
    """
    if n < 1:
        raise ValueError("moment order must be >= 1")
    if h is None:
        positive = samples.grid.lambdas[samples.grid.lambdas > 0]
        if positive.size == 0:
            raise ValueError("grid has no positive points to infer the step from")
        h = float(positive.min())
    m = (n + 1) // 2
    weights = _central_weights(n, m)

    def estimate(step: float) -> complex:
        acc = 0.0 + 0.0j
        for j, w in zip(range(-m, m + 1), weights):
            if w == 0.0:
                continue
            acc += w * samples.value_at(j * step)
        return acc / step**n

    d = estimate(h)
    if richardson:
        d = (4.0 * d - estimate(2.0 * h)) / 3.0
    out = (-1j) ** n * d
    return float(out.real)


def default_fd_step(terms: Sequence[SpectralWorkTerm]) -> float:
    """Default stencil step ``1e-3 / max|support|`` for the spectral scale."""
    radius = max((abs(t.support) for t in terms), default=0.0)
    return 1e-3 / max(radius, 1e-12)


def merge_support_points(
    supports: np.ndarray, weights: np.ndarray, bin_tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Merge support points closer than ``bin_tol``; weights add.

    Merged positions are magnitude-weighted means, so dominant contributions
    anchor the bin.
    """
    order = np.argsort(supports)
    u = supports[order]
    w = weights[order]
    out_u: list[float] = []
    out_w: list[complex] = []
    start = 0
    for stop in range(1, u.size + 1):
        if stop < u.size and u[stop] - u[stop - 1] <= bin_tol:
            continue
        chunk_w = w[start:stop]
        chunk_u = u[start:stop]
        mass = np.abs(chunk_w)
        center = float(np.average(chunk_u, weights=mass)) if mass.sum() > 0 else float(chunk_u.mean())
        out_u.append(center)
        out_w.append(complex(chunk_w.sum()))
        start = stop
    return np.array(out_u), np.array(out_w)


def quasi_distribution(
    terms: Sequence[SpectralWorkTerm], bin_tol: float | None = None
) -> QuasiDistribution:
    """Bin the spectral terms into the energy-change quasi-probability.

    ``bin_tol`` defaults to ``1e-9`` times the support scale. Imaginary parts
    of the merged weights must cancel pairwise; a residue above 1e-10 raises.
    """
    if not terms:
        raise ValueError("no spectral terms to bin")
    supports = np.array([t.support for t in terms])
    weights = np.array([t.weight for t in terms])
    if bin_tol is None:
        bin_tol = 1e-9 * max(1.0, float(np.max(np.abs(supports))))
    if bin_tol <= 0:
        raise ValueError("bin_tol must be positive")
    u, w = merge_support_points(supports, weights, bin_tol)
    residue = float(np.max(np.abs(w.imag)))
    if residue > 1e-10:
        raise NumericalError(f"imaginary weight residue {residue:.3e} after binning")
    return QuasiDistribution(u, w.real)


def coherent_classical_split(terms: Sequence[SpectralWorkTerm]) -> tuple[float, float]:
    """Split the first moment into its two-measurement and coherence parts.

    The classical part sums the diagonal (``i == j``) terms and equals the
    two-measurement average; the coherent part is the remainder, carried by
    the initial coherences and destroyed by a projective first measurement.
    """
    classical = sum(t.weight.real * t.support for t in terms if t.i == t.j)
    return float(classical), moment(terms, 1) - float(classical)


# ---------------------------------------------------------------------------
# grid Fourier inversion (validation path only)


def fourier_grid_for_supports(
    supports: np.ndarray, resolution_fraction: float = 0.125
) -> tuple[float, int, float]:
    """Counting-grid parameters for :func:`fourier_quasi_weights`.

    Returns ``(lambda_max, points, sigma_u)`` where ``sigma_u`` is the energy
    resolution of the Gaussian window (a fraction of the smallest support
    gap). The grid is wide enough for the window to decay and dense enough
    that aliasing images stay clear of the support range.
    """
    u = np.sort(np.asarray(supports, dtype=float))
    if u.size < 2:
        gap = 1.0
    else:
        gap = float(np.min(np.diff(u)))
        if gap <= 0:
            raise ValueError("supports must be distinct")
    sigma_u = gap * resolution_fraction
    sigma_l = 1.0 / sigma_u
    lambda_max = 8.0 * sigma_l
    u_extent = float(np.max(np.abs(u))) if u.size else 1.0
    spacing = 2.0 * np.pi / (2.0 * u_extent + 16.0 * sigma_u + 4.0)
    half = int(np.ceil(lambda_max / spacing))
    return lambda_max, 2 * half + 1, sigma_u


def fourier_quasi_weights(
    samples: CharacteristicSamples, supports: np.ndarray, sigma_u: float
) -> np.ndarray:
    """Recover quasi-weights by Gaussian-windowed Fourier inversion of ``G``.

    The window turns each support point into a Gaussian of width ``sigma_u``
    in energy; evaluating the smeared density at the support points and
    undoing the peak normalization returns the weights up to window leakage.
    Validation-only: accuracy depends on the support gaps and the grid
    extent, and the spectral binning path is exact.
    """
    lam = samples.grid.lambdas
    spacing = samples.grid.spacing
    window = np.exp(-0.5 * (lam * sigma_u) ** 2)
    weighted = samples.values * window
    out = np.empty(len(supports))
    for n, u in enumerate(supports):
        f = np.sum(weighted * np.exp(-1j * lam * u)) * spacing / (2.0 * np.pi)
        out[n] = f.real * np.sqrt(2.0 * np.pi) * sigma_u
    return out
