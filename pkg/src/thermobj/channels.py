"""Thermalising and broadcasting channels, with qubit Bloch-sphere (affine) forms.

Generalised amplitude damping (GAD) uses the Kraus operators

    E1 = sqrt(p)   [[1, 0], [0, sqrt(eta)]]      E2 = sqrt(p)   [[0, sqrt(1-eta)], [0, 0]]
    E3 = sqrt(1-p) [[sqrt(eta), 0], [0, 1]]      E4 = sqrt(1-p) [[0, 0], [sqrt(1-eta), 0]]

whose fixed point is diag(p, 1-p).  The Bloch form is always derived from
the Kraus action.  It scales x and y by sqrt(eta) and acts on z as
z -> eta*z + (2p-1)(1-eta).  A z-scaling of sqrt(eta) would not match these
Kraus operators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .operators import (
    PAULIS,
    BlochVector,
    DensityOperator,
    bloch_matrix,
    to_bloch,
)

KRAUS_ATOL = 1e-10


class PointChannel:
    """Replaces every input with a fixed target state."""

    def __init__(self, target: DensityOperator):
        self.target = target

    @property
    def dim(self) -> int:
        return self.target.dim

    def __call__(self, rho) -> DensityOperator:
        if rho.dim != self.target.dim:
            raise ValueError(f"input dim {rho.dim} != channel dim {self.target.dim}")
        return self.target

    def __repr__(self) -> str:
        return f"PointChannel(dim={self.dim})"


def point_channel(target: DensityOperator) -> PointChannel:
    return PointChannel(target)


def cnot_unitary(dim: int = 2) -> np.ndarray:
    """Controlled shift |i, j> -> |i, j + i mod d>, system first; the CNOT for d = 2."""
    u = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            u[i * dim + (j + i) % dim, i * dim + j] = 1.0
    return u


def cnot_broadcast(rho_SE, sys_dim: int = 2, env_dim: int = 2) -> DensityOperator:
    """Conjugate a system-environment state by the CNOT (system controls).

    Only a dephased system produces an objective output; a coherent
    superposition gives an entangled state instead.
    """
    if sys_dim != env_dim:
        raise ValueError("controlled-shift broadcast needs equal system and environment dims")
    if rho_SE.dim != sys_dim * env_dim:
        raise ValueError(f"expected a {sys_dim * env_dim}-dimensional input, got {rho_SE.dim}")
    u = cnot_unitary(sys_dim)
    return DensityOperator.from_numerical(u @ rho_SE.matrix @ u.T)


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        d_in = ops[0].shape[1]
        if any(k.ndim != 2 or k.shape[1] != d_in for k in ops):
            raise ValueError("Kraus operators must share an input dimension")
        for k in ops:
            k.flags.writeable = False
        object.__setattr__(self, "kraus_ops", ops)
        err = self.completeness_error()
        if err > KRAUS_ATOL:
            raise ValueError(f"Kraus operators not trace preserving (error {err:.3e})")

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.linalg.norm(s - np.eye(s.shape[0]), ord=2))

    def __call__(self, rho) -> DensityOperator:
        if rho.dim != self.dim_in:
            raise ValueError(f"input dim {rho.dim} != channel input dim {self.dim_in}")
        m = rho.matrix
        return DensityOperator.from_numerical(sum(k @ m @ k.conj().T for k in self.kraus_ops))


@dataclass(frozen=True)
class GADParams:
    """Generalised amplitude damping parameters.

    ``p`` is the ground-state population of the fixed point.  When ``t`` and
    ``nbar`` are given, ``eta`` must equal 1 - exp(-(1 + 2 nbar) t).
    """

    p: float
    eta: float
    t: float | None = None
    nbar: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta={self.eta} outside [0, 1]")
        if (self.t is None) != (self.nbar is None):
            raise ValueError("give both t and nbar or neither")
        if self.t is not None:
            expected = 1.0 - math.exp(-(1.0 + 2.0 * self.nbar) * self.t)
            if abs(expected - self.eta) > 1e-12:
                raise ValueError(f"eta={self.eta} does not match 1-exp(-(1+2 nbar)t)={expected}")

    @staticmethod
    def occupation(temperature: float) -> float:
        """Boson occupation 1/(e^{1/T} - 1), energy units with the mode frequency set to 1."""
        if temperature <= 0:
            return 0.0
        return 1.0 / math.expm1(1.0 / temperature)

    @classmethod
    def from_bath(cls, p: float, temperature: float, t: float) -> "GADParams":
        nbar = cls.occupation(temperature)
        return cls(p, 1.0 - math.exp(-(1.0 + 2.0 * nbar) * t), t=t, nbar=nbar)


def gad_channel(params: GADParams) -> KrausChannel:
    p, eta = params.p, params.eta
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    se, sd = math.sqrt(eta), math.sqrt(1.0 - eta)
    return KrausChannel((
        sp * np.array([[1, 0], [0, se]]),
        sp * np.array([[0, sd], [0, 0]]),
        sq * np.array([[se, 0], [0, 1]]),
        sq * np.array([[0, 0], [sd, 0]]),
    ))


@dataclass(frozen=True)
class AffineBlochChannel:
    """Qubit channel r -> A r + t acting on Bloch vectors.

    A partial thermalisation toward t_S has t = (I - A) t_S.  Construction
    checks that the spectral norm of A is at most 1 and that sampled points
    of the unit sphere stay inside the ball.
    """

    A: np.ndarray
    t: np.ndarray
    check_samples: int = field(default=1000, compare=False, repr=False)

    def __post_init__(self):
        a = np.array(self.A, dtype=float).reshape(3, 3)
        t = np.array(self.t, dtype=float).reshape(3)
        a.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "t", t)
        if self.norm() > 1 + 1e-9:
            raise ValueError(f"spectral norm of A is {self.norm():.6g} > 1")
        rng = np.random.default_rng(0)
        dirs = rng.standard_normal((self.check_samples, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        _, _, vt = np.linalg.svd(a)
        dirs = np.vstack([dirs, vt, -vt])
        worst = np.linalg.norm(dirs @ a.T + t, axis=1).max()
        if worst > 1 + 1e-9:
            raise ValueError(f"map sends the unit sphere outside the Bloch ball (radius {worst:.6g})")

    @classmethod
    def partial_thermalization(cls, A, t_S) -> "AffineBlochChannel":
        a = np.asarray(A, dtype=float).reshape(3, 3)
        ts = np.asarray(t_S.as_array() if isinstance(t_S, BlochVector) else t_S, dtype=float)
        return cls(a, (np.eye(3) - a) @ ts)

    def norm(self) -> float:
        return float(np.linalg.norm(self.A, ord=2))

    def map_vector(self, r) -> np.ndarray:
        r = r.as_array() if isinstance(r, BlochVector) else np.asarray(r, dtype=float)
        return self.A @ r + self.t

    def __call__(self, rho) -> DensityOperator:
        if rho.dim != 2:
            raise ValueError("affine Bloch channels act on qubits")
        return DensityOperator(bloch_matrix(self.map_vector(to_bloch(rho))))

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(3) - self.A, self.t)


def bloch_of_channel(channel: Callable) -> AffineBlochChannel:
    """Affine Bloch form of any qubit channel, read off from its action on (I +- sigma_k)/2."""
    dim = getattr(channel, "dim", 2)
    if dim != 2 or getattr(channel, "dim_in", 2) != 2:
        raise ValueError("Bloch representation needs a qubit channel")
    t = to_bloch(channel(DensityOperator(np.eye(2) / 2))).as_array()
    cols = []
    for pauli in PAULIS:
        plus = to_bloch(channel(DensityOperator((np.eye(2) + pauli) / 2))).as_array()
        minus = to_bloch(channel(DensityOperator((np.eye(2) - pauli) / 2))).as_array()
        cols.append((plus - minus) / 2)
    return AffineBlochChannel(np.column_stack(cols), t)


class ConvergenceError(RuntimeError):
    pass


def iterate_to_fixpoint(channel: AffineBlochChannel, r0, tol: float = 1e-10,
                        max_iters: int = 100_000) -> tuple[BlochVector, int]:
    """Apply a strict partial thermalisation until one more step moves r by at most ``tol``."""
    if channel.norm() >= 1:
        raise ValueError(f"not a strict partial thermalization: ||A|| = {channel.norm():.6g}")
    r = r0.as_array() if isinstance(r0, BlochVector) else np.asarray(r0, dtype=float)
    for n in range(1, max_iters + 1):
        r = channel.map_vector(r)
        if np.linalg.norm(channel.map_vector(r) - r) <= tol:
            return BlochVector.from_array(r), n
    raise ConvergenceError(f"no convergence within {max_iters} iterations")


def stationary_state(params: GADParams) -> DensityOperator:
    return DensityOperator(np.diag([params.p, 1.0 - params.p]))
