"""Brute-force path enumeration on small instances.

The drive propagator matrix element between two states can be expanded by
inserting, at every time gridpoint ``t_k = k dt`` (``k = 0..N``), the
eigenbasis of a chosen observable ``A(t_k)``. Each index tuple is a path; its
amplitude is the product of step matrix elements and the sum over all
``d^(N+1)`` paths reproduces the matrix element exactly, at any ``N``.

Weighting each path by ``exp(i lam F)`` with the path functional
``F = dt * sum_k beta_k a_k`` turns the sum into the matrix element of a
counting-field evolution. With the boundary weight profile (``beta`` a
discretized delta of strength ``-1/dt`` at the first gridpoint and ``+1/dt``
on the last step's left endpoint) the functional is the difference of the
observable's eigenvalues at the ends, and the weighted sum converges at first
order in ``dt`` to the two-kick form ``exp(i lam A(T)) U exp(-i lam A(0))``.
The same weighted sum is compared against the product of combined
exponentials ``exp(-i dt (H^k - lam beta_k A_k))``, which differs by the
usual O(dt) splitting error unless ``[H, A] = 0``.

This module is a test oracle, not a production path: enumeration is capped
at 10^6 paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _iter_product
from typing import NamedTuple, Sequence

import numpy as np

from .drive import DiscretizedDrive
from .linalg import (
    HermitianOperator,
    NumericalError,
    eig_hermitian,
    expm_unitary,
    mat,
)

__all__ = [
    "PathBasisSequence",
    "PathRecord",
    "PATH_ENUMERATION_LIMIT",
    "default_observable_sequence",
    "boundary_beta",
    "enumerate_paths",
    "path_sum",
    "counting_weighted_sum",
    "kicked_product",
]

PATH_ENUMERATION_LIMIT = 10**6


@dataclass(frozen=True)
class PathBasisSequence:
    """Per-gridpoint eigenbases and eigenvalues of the observable sequence."""

    bases: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]

    @classmethod
    def from_observables(cls, observables: Sequence[HermitianOperator]) -> "PathBasisSequence":
        bases = []
        values = []
        for a in observables:
            w, v = eig_hermitian(a)
            bases.append(v.matrix)
            values.append(w)
        return cls(tuple(bases), tuple(values))

    @property
    def n_gridpoints(self) -> int:
        return len(self.bases)


class PathRecord(NamedTuple):
    """One path: basis indices per gridpoint, amplitude, functional value."""

    indices: tuple[int, ...]
    amplitude: complex
    functional: float


def default_observable_sequence(drive: DiscretizedDrive) -> list[HermitianOperator]:
    """The drive Hamiltonian sampled at all ``N + 1`` gridpoints.

    Gridpoints ``0..N-1`` take the step samples; gridpoint ``N`` takes the
    boundary value at ``t = T``.
    """
    return [h for _, h in drive.steps] + [drive.h_end]


def boundary_beta(n_steps: int, dt: float) -> np.ndarray:
    """Discretized ``delta(T - t) - delta(t)`` weight profile.

    Each delta carries ``1/dt`` on one gridpoint: the initial one, and the
    left endpoint of the last step (the final gridpoint carries no evolution
    interval). Needs at least two steps so the two deltas do not collide.
    """
    if n_steps < 2:
        raise ValueError("boundary profile needs at least two steps")
    beta = np.zeros(n_steps + 1)
    beta[0] = -1.0 / dt
    beta[n_steps - 1] = +1.0 / dt
    return beta


def enumerate_paths(
    drive: DiscretizedDrive,
    psi_initial,
    psi_final,
    observables: Sequence[HermitianOperator] | None = None,
    beta: np.ndarray | None = None,
) -> list[PathRecord]:
    """All basis paths contributing to ``<psi_final|U|psi_initial>``.

    One record per index tuple ``(i_0, ..., i_N)``; amplitudes sum to the
    exact matrix element. Raises :class:`NumericalError` when the path count
    would exceed ``PATH_ENUMERATION_LIMIT``.
    """
    n = drive.n_steps
    if observables is None:
        observables = default_observable_sequence(drive)
    if len(observables) != n + 1:
        raise ValueError(f"need {n + 1} observables (one per gridpoint), got {len(observables)}")
    if beta is None:
        beta = boundary_beta(n, drive.dt)
    beta = np.asarray(beta, dtype=float)
    if beta.size != n + 1:
        raise ValueError(f"beta must have {n + 1} entries, got {beta.size}")
    d = drive.dim
    count = d ** (n + 1)
    if count > PATH_ENUMERATION_LIMIT:
        raise NumericalError(
            f"path enumeration would need {count} paths, above the limit {PATH_ENUMERATION_LIMIT}"
        )
    basis = PathBasisSequence.from_observables(observables)
    # Transfer matrices between consecutive eigenbases; boundary overlaps.
    transfer = []
    for k in range(n):
        step = expm_unitary(drive.steps[k][1], drive.dt).matrix
        transfer.append(basis.bases[k + 1].conj().T @ step @ basis.bases[k])
    start = basis.bases[0].conj().T @ np.asarray(psi_initial, dtype=complex).ravel()
    end = basis.bases[n].conj().T @ np.asarray(psi_final, dtype=complex).ravel()
    scaled_values = [drive.dt * beta[k] * basis.values[k] for k in range(n + 1)]
    records = []
    for indices in _iter_product(range(d), repeat=n + 1):
        amp = start[indices[0]]
        for k in range(n):
            amp *= transfer[k][indices[k + 1], indices[k]]
        amp *= np.conj(end[indices[n]])
        f = sum(scaled_values[k][indices[k]] for k in range(n + 1))
        records.append(PathRecord(indices, complex(amp), float(f)))
    return records


def path_sum(paths: Sequence[PathRecord]) -> complex:
    """Plain sum of path amplitudes (the unconstrained matrix element)."""
    return complex(sum(p.amplitude for p in paths))


def counting_weighted_sum(paths: Sequence[PathRecord], lam: float) -> complex:
    """``sum_P exp(i lam F[P]) * amplitude(P)``."""
    return complex(sum(np.exp(1j * lam * p.functional) * p.amplitude for p in paths))


def kicked_product(
    drive: DiscretizedDrive,
    lam: float,
    observables: Sequence[HermitianOperator] | None = None,
    beta: np.ndarray | None = None,
) -> np.ndarray:
    """Product of combined exponentials ``exp(-i dt (H^k - lam beta_k A_k))``.

    The final gridpoint has no evolution interval, so its weight enters as a
    pure kick ``exp(+i lam dt beta_N A_N)`` on the left. Agrees with the
    counting-weighted path sum up to O(dt) splitting error, exactly when all
    ``[H^k, A_k] = 0``.
    """
    n = drive.n_steps
    if observables is None:
        observables = default_observable_sequence(drive)
    if beta is None:
        beta = boundary_beta(n, drive.dt)
    beta = np.asarray(beta, dtype=float)
    u = np.eye(drive.dim, dtype=complex)
    for k in range(n):
        generator = HermitianOperator(
            mat(drive.steps[k][1]) - lam * beta[k] * mat(observables[k])
        )
        u = expm_unitary(generator, drive.dt).matrix @ u
    if beta[n] != 0.0:
        u = expm_unitary(observables[n], -lam * drive.dt * beta[n]).matrix @ u
    return u
