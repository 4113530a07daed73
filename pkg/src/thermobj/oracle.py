"""Brute-force cross-checks.

Nothing here imports the bounds module; agreement between the two is evidence
rather than a tautology.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .operators import HermitianOperator

PARTITION_CAP = 12
INFT_CAP = 8


@dataclass(frozen=True)
class OracleReport:
    instance: str
    oracle: float
    tested: float
    gap: float = field(default=float("nan"))

    def __post_init__(self):
        gap = abs(self.oracle - self.tested)
        if np.isnan(self.gap):
            object.__setattr__(self, "gap", gap)
        elif abs(self.gap - gap) > 1e-12:
            raise ValueError("gap inconsistent with oracle and tested values")

    def __str__(self) -> str:
        return (
            f"instance: {self.instance}\n"
            f"oracle:   {self.oracle!r}\n"
            f"tested:   {self.tested!r}\n"
            f"gap:      {self.gap!r}"
        )


def brute_force_partition(probs, weights) -> tuple[tuple[tuple[int, ...], ...], float]:
    """Exhaustive minimum of sum_k |p_k - W_k| over all assignments with nonempty bins."""
    p = np.asarray(probs, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    d_S, d_E = p.size, w.size
    if d_E > PARTITION_CAP:
        raise ValueError(f"oracle scale exceeded: d_E={d_E} > {PARTITION_CAP}")
    if d_E < d_S:
        raise ValueError("fewer environment indices than bins")
    labels = np.indices((d_S,) * d_E, dtype=np.int8).reshape(d_E, -1).T
    onehot = labels[:, :, None] == np.arange(d_S)[None, None, :]
    sums = np.einsum("ajk,j->ak", onehot, w)
    nonempty = onehot.any(axis=1).all(axis=1)
    totals = np.where(nonempty, np.abs(sums - p).sum(axis=1), np.inf)
    best = int(np.argmin(totals))
    lab = labels[best]
    groups = tuple(tuple(int(j) for j in np.flatnonzero(lab == k)) for k in range(d_S))
    return groups, float(totals[best])


def direct_trace_distance(a, b) -> float:
    """||a - b||_1 from a full eigendecomposition."""
    ma = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a, dtype=complex)
    mb = b.matrix if isinstance(b, HermitianOperator) else np.asarray(b, dtype=complex)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch {ma.shape} vs {mb.shape}")
    d = ma - mb
    vals = np.linalg.eigvals((d + d.conj().T) / 2)
    return float(np.abs(vals.real).sum())


def thermal_diagonal(energies, beta: float) -> np.ndarray:
    """diag(e^{-beta E})/Z as a dense matrix."""
    x = np.exp(-beta * np.asarray(energies, dtype=float))
    return np.diag(x / x.sum())


def deviation_distance(base_energies, env_energies, beta: float) -> float:
    return direct_trace_distance(thermal_diagonal(env_energies, beta),
                                 thermal_diagonal(base_energies, beta))


def product_distance(base_energies, env_energy_lists, beta: float) -> float:
    """Trace distance between (x)_k gamma_{E_k} and gamma_S^{(x) N} built as dense operators."""
    env = reduce(np.kron, (thermal_diagonal(h, beta) for h in env_energy_lists))
    sys = reduce(np.kron, [thermal_diagonal(base_energies, beta)] * len(env_energy_lists))
    return direct_trace_distance(env, sys)


def enumerate_infT(d_S: int, d_E: int) -> int:
    """Count assignments of uniform environment weights into d_S groups of weight 1/d_S each."""
    if d_E > INFT_CAP:
        raise ValueError(f"oracle scale exceeded: d_E={d_E} > {INFT_CAP}")
    count = 0
    for labels in itertools.product(range(d_S), repeat=d_E):
        sizes = np.bincount(labels, minlength=d_S)
        # group weight sizes[k]/d_E equals 1/d_S exactly
        if np.all(sizes * d_S == d_E):
            count += 1
    return count
