"""Two-measurement protocol: projective energy measurements at t = 0 and t = T.

The first measurement projects onto the eigenspaces of the initial
Hamiltonian, destroying coherences; the system then evolves under the drive
and a second projective measurement of the final Hamiltonian is made. The
outcome statistics are classical conditional probabilities

    ``p(i, k) = rho_ii * |<eps_k(T)|U|eps_i(0)>|^2``

(with spectral projectors replacing rank-one projectors on degenerate
eigenvalues, since a projective energy measurement cannot resolve a
degenerate subspace), and the work of outcome ``(i, k)`` is the eigenvalue
difference. This is the classical baseline the counting-field statistics are
contrasted with: the two agree exactly whenever the initial state is diagonal
in the initial eigenbasis, and generally disagree from the first moment
onward when it is not.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .drive import DiscretizedDrive, evolution_operator
from .fcs import CharacteristicSamples, CountingGrid
from .linalg import DensityOperator, HermitianOperator, eig_hermitian

__all__ = [
    "TmpOutcome",
    "tmp_distribution",
    "tmp_average",
    "tmp_moment",
    "tmp_characteristic",
    "dephase",
]


class TmpOutcome(NamedTuple):
    """One joint outcome: initial level group ``i``, final level group ``k``."""

    i: int
    k: int
    probability: float
    work: float


def _eigenvalue_groups(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Indices of eigenvalues grouped within ``tol`` (degenerate subspaces)."""
    groups: list[list[int]] = [[0]]
    for idx in range(1, values.size):
        if values[idx] - values[groups[-1][-1]] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return [np.array(g) for g in groups]


def _spectral_projectors(
    h: HermitianOperator, tol: float
) -> tuple[list[np.ndarray], np.ndarray]:
    values, vectors = eig_hermitian(h)
    scale = max(1.0, float(np.max(np.abs(values))))
    groups = _eigenvalue_groups(values, tol * scale)
    v = vectors.matrix
    projectors = [v[:, g] @ v[:, g].conj().T for g in groups]
    energies = np.array([values[g].mean() for g in groups])
    return projectors, energies


def tmp_distribution(
    rho0: DensityOperator,
    drive: DiscretizedDrive,
    *,
    degeneracy_tol: float = 1e-9,
    prune: float = 1e-14,
) -> list[TmpOutcome]:
    """Joint outcome distribution of the two projective energy measurements.

    Outcomes are labeled by distinct eigenvalues of the boundary
    Hamiltonians; joint probabilities below ``prune`` are dropped. The
    remaining probabilities are nonnegative and sum to one.
    """
    if rho0.dim != drive.dim:
        raise ValueError(f"state dim {rho0.dim} != drive dim {drive.dim}")
    proj0, eps0 = _spectral_projectors(drive.h_start, degeneracy_tol)
    projt, epst = _spectral_projectors(drive.h_end, degeneracy_tol)
    u = evolution_operator(drive).matrix
    rho = rho0.matrix
    outcomes = []
    for i, p_i in enumerate(proj0):
        collapsed = u @ (p_i @ rho @ p_i) @ u.conj().T
        for k, p_k in enumerate(projt):
            prob = float(np.trace(p_k @ collapsed).real)
            if prob < prune:
                continue
            outcomes.append(TmpOutcome(i, k, prob, float(epst[k] - eps0[i])))
    total = sum(o.probability for o in outcomes)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"outcome probabilities sum to {total}, not 1")
    return outcomes


def tmp_average(outcomes: Sequence[TmpOutcome]) -> float:
    """Average work ``sum_o p_o w_o``."""
    return float(sum(o.probability * o.work for o in outcomes))


def tmp_moment(outcomes: Sequence[TmpOutcome], n: int) -> float:
    return float(sum(o.probability * o.work**n for o in outcomes))


def tmp_characteristic(
    outcomes: Sequence[TmpOutcome], grid: CountingGrid
) -> CharacteristicSamples:
    """Characteristic function ``sum_o p_o exp(i lam w_o)`` on the grid."""
    lam = grid.lambdas
    values = np.zeros(lam.size, dtype=complex)
    for o in outcomes:
        values += o.probability * np.exp(1j * lam * o.work)
    return CharacteristicSamples(grid, values)


def dephase(rho0: DensityOperator, h: HermitianOperator, degeneracy_tol: float = 1e-9) -> DensityOperator:
    """Erase coherences of ``rho0`` between eigenspaces of ``h``.

    Returns ``sum_g P_g rho P_g``: what the first projective measurement
    leaves behind on average.
    """
    projectors, _ = _spectral_projectors(h, degeneracy_tol)
    out = np.zeros_like(rho0.matrix)
    for p in projectors:
        out = out + p @ rho0.matrix @ p
    return DensityOperator(out)
