"""Dense Hermitian/density operators, tensor products, partial traces and Bloch vectors.

All operator values are immutable: the wrapped arrays are flagged read-only
after construction.  Subsystem indices are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 4096
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-9
PSD_FLOOR = -1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


class HermitianOperator:
    """Square complex matrix made exactly Hermitian by (M + M^dagger)/2."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
        self._matrix = _frozen((m + m.conj().T) / 2)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and the matching eigenvector columns."""
        return np.linalg.eigh(self._matrix)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._matrix)

    def trace(self) -> float:
        return float(np.trace(self._matrix).real)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self._matrix - _as_matrix(other))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self._matrix + _as_matrix(other))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class DensityOperator(HermitianOperator):
    """Unit-trace positive-semidefinite operator.

    Raises ``ValueError`` when the trace is off by more than 1e-9 or an
    eigenvalue falls below -1e-10.  Use :meth:`from_numerical` for matrices
    coming out of eigen-solvers, which clamps tiny negative eigenvalues.
    """

    def __init__(self, matrix):
        super().__init__(matrix)
        tr = np.trace(self._matrix).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr!r} is not 1")
        lo = self.eigvalsh()[0]
        if lo < PSD_FLOOR:
            raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")

    @classmethod
    def from_numerical(cls, matrix) -> "DensityOperator":
        h = HermitianOperator(matrix)
        vals, vecs = h.eigh()
        if vals[0] < -1e-6 * max(1.0, abs(vals).max()):
            raise ValueError(f"matrix is far from positive: min eigenvalue {vals[0]:.3e}")
        vals = np.clip(vals, 0.0, None)
        total = vals.sum()
        if total <= 0:
            raise ValueError("matrix has no positive weight")
        return cls((vecs * (vals / total)) @ vecs.conj().T)

    @classmethod
    def pure(cls, vector) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "DensityOperator":
        m = np.zeros((dim, dim), dtype=complex)
        m[index, index] = 1.0
        return cls(m)


@dataclass(frozen=True)
class BlochVector:
    """Pauli expectations (x, y, z) of a qubit state; |0><0| sits at z = +1."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-9:
            raise ValueError(f"Bloch vector norm {self.norm():.12g} exceeds 1")

    def norm(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, r) -> "BlochVector":
        x, y, z = (float(c) for c in np.asarray(r, dtype=float).ravel())
        return cls(x, y, z)


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, HermitianOperator):
        return op.matrix
    return np.asarray(op, dtype=complex)


def tensor(*ops: DensityOperator) -> DensityOperator:
    """Kronecker product of states, left factor first."""
    if not ops:
        raise ValueError("tensor needs at least one operand")
    return DensityOperator(reduce(np.kron, (_as_matrix(o) for o in ops)))


def tensor_hermitian(*ops) -> HermitianOperator:
    return HermitianOperator(reduce(np.kron, (_as_matrix(o) for o in ops)))


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> DensityOperator:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the factor dimensions in tensor order; kept factors are
    returned in ascending index order.
    """
    return DensityOperator.from_numerical(partial_trace_matrix(_as_matrix(rho), dims, keep))


def partial_trace_matrix(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    dims = [int(d) for d in dims]
    n = len(dims)
    if int(np.prod(dims)) != m.shape[0]:
        raise ValueError(f"subsystem dims {dims} do not multiply to {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    # trace highest axes first so the remaining axis numbers stay valid
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=ax, axis2=ax + cur)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    m = _as_matrix(a)
    m = (m + m.conj().T) / 2
    return float(np.abs(np.linalg.eigvalsh(m)).sum())


def trace_distance(a, b) -> float:
    """Trace norm of a - b (no factor 1/2)."""
    return trace_norm(_as_matrix(a) - _as_matrix(b))


def to_bloch(rho) -> BlochVector:
    m = _as_matrix(rho)
    if m.shape != (2, 2):
        raise ValueError(f"Bloch vectors need a qubit state, got dim {m.shape[0]}")
    x, y, z = (float(np.trace(p @ m).real) for p in PAULIS)
    return BlochVector(x, y, z)


def bloch_matrix(r) -> np.ndarray:
    x, y, z = np.asarray(r, dtype=float).ravel()
    return (np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z) / 2


def from_bloch(v) -> DensityOperator:
    if not isinstance(v, BlochVector):
        v = BlochVector.from_array(v)
    return DensityOperator(bloch_matrix(v.as_array()))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Random mixed state from a Ginibre matrix; full rank unless ``rank`` is given."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ g.conj().T
    return DensityOperator.from_numerical(m / np.trace(m).real)


def is_unitary(u, atol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0
    )
