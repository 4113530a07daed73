"""Partition functions, Gibbs states, and fitting a Hamiltonian to a full-rank state."""
from __future__ import annotations

import math

import numpy as np

from .operators import DensityOperator, HermitianOperator, is_unitary

INFINITE = math.inf
GROUND_ATOL = 1e-12


class HamiltonianSpec:
    """Eigen-decomposed Hamiltonian: ``energies[i]`` belongs to column ``basis[:, i]``."""

    def __init__(self, energies, basis=None):
        e = np.array(energies, dtype=float).ravel()
        if e.size < 1 or not np.all(np.isfinite(e)):
            raise ValueError("energies must be a non-empty list of finite reals")
        u = np.eye(e.size, dtype=complex) if basis is None else np.array(basis, dtype=complex)
        if u.shape != (e.size, e.size):
            raise ValueError(f"basis shape {u.shape} does not match {e.size} energies")
        if not is_unitary(u):
            raise ValueError("basis is not unitary within 1e-10")
        e.flags.writeable = False
        u.flags.writeable = False
        self.energies = e
        self.basis = u

    @property
    def dim(self) -> int:
        return self.energies.size

    @classmethod
    def from_operator(cls, h) -> "HamiltonianSpec":
        if not isinstance(h, HermitianOperator):
            h = HermitianOperator(h)
        vals, vecs = h.eigh()
        return cls(vals, vecs)

    def operator(self) -> HermitianOperator:
        u = self.basis
        return HermitianOperator((u * self.energies) @ u.conj().T)

    def shifted(self, c: float) -> "HamiltonianSpec":
        return HamiltonianSpec(self.energies + c, self.basis)

    def __repr__(self) -> str:
        return f"HamiltonianSpec(energies={self.energies.tolist()})"


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta >= 0:
        raise ValueError(f"inverse temperature must be >= 0, got {beta}")
    return beta


def boltzmann_weights(energies, beta: float) -> np.ndarray:
    """Normalised Gibbs populations e^{-beta E_i}/Z, stable for any beta >= 0.

    ``beta = INFINITE`` spreads the weight uniformly over the ground level(s).
    """
    e = np.asarray(energies, dtype=float).ravel()
    beta = _check_beta(beta)
    gap = e - e.min()
    if math.isinf(beta):
        w = (gap <= GROUND_ATOL).astype(float)
    else:
        w = np.exp(-beta * gap)
    return w / w.sum()


def partition_function(h: HamiltonianSpec, beta: float) -> float:
    beta = _check_beta(beta)
    if math.isinf(beta):
        raise ValueError("partition function diverges/vanishes at infinite beta; use gibbs_state")
    return float(np.exp(-beta * h.energies).sum())


def gibbs_state(h, beta: float) -> DensityOperator:
    """e^{-beta H}/Z; ``h`` may be a HamiltonianSpec or a Hermitian matrix."""
    if not isinstance(h, HamiltonianSpec):
        h = HamiltonianSpec.from_operator(h)
    w = boltzmann_weights(h.energies, beta)
    u = h.basis
    return DensityOperator((u * w) @ u.conj().T)


def fit_thermal(rho: DensityOperator, min_eigenvalue: float = 1e-10) -> tuple[HamiltonianSpec, float]:
    """Hamiltonian and beta with gibbs_state(H, beta) == rho.

    The inverse problem has a one-parameter scaling freedom; this returns
    beta = 1 and energies shifted so the smallest is 0.
    """
    vals, vecs = np.linalg.eigh(rho.matrix)
    if vals[0] <= min_eigenvalue:
        raise ValueError(f"not full rank: smallest eigenvalue {vals[0]:.3e}")
    energies = -np.log(vals)
    energies = energies - energies.min()
    return HamiltonianSpec(energies, vecs), 1.0


def gibbs_state_on_subspace(h, projector, beta: float) -> DensityOperator:
    """Gibbs state of ``h`` confined to the range of ``projector``.

    ``h`` must commute with the projector.  Equivalent to assigning infinite
    energy to the orthogonal complement.
    """
    if isinstance(h, HamiltonianSpec):
        h = h.operator()
    hm = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
    p = np.asarray(projector, dtype=complex)
    if not np.allclose(hm @ p, p @ hm, atol=1e-10):
        raise ValueError("Hamiltonian does not commute with the projector")
    vals, vecs = np.linalg.eigh((p + p.conj().T) / 2)
    q = vecs[:, vals > 0.5]
    if q.shape[1] == 0:
        raise ValueError("empty subspace")
    inner = gibbs_state(HermitianOperator(q.conj().T @ hm @ q), beta)
    return DensityOperator(q @ inner.matrix @ q.conj().T)
