"""Upper bounds on the distance between objective and locally thermal states."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gibbs import HamiltonianSpec, boltzmann_weights, gibbs_state
from .operators import DensityOperator, trace_norm
from .sbs import PartitionAssignment, SBSState

VARIANTS = ("as_printed", "product_form", "grouped_greedy")
MAX_GRID_ENTRIES = 1 << 22


@dataclass(frozen=True)
class DeviationModel:
    """Environment spectrum E_i + shift + deviations[i] against system spectrum E_i."""

    base_energies: tuple[float, ...]
    shift: float
    deviations: tuple[float, ...]
    beta: float

    def __post_init__(self):
        e = tuple(float(x) for x in np.ravel(self.base_energies))
        d = tuple(float(x) for x in np.ravel(self.deviations))
        if len(e) != len(d):
            raise ValueError(f"{len(d)} deviations for {len(e)} base energies")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        object.__setattr__(self, "base_energies", e)
        object.__setattr__(self, "deviations", d)
        object.__setattr__(self, "shift", float(self.shift))

    @property
    def env_energies(self) -> np.ndarray:
        return np.array(self.base_energies) + self.shift + np.array(self.deviations)

    def system_weights(self) -> np.ndarray:
        return boltzmann_weights(self.base_energies, self.beta)

    def env_weights(self) -> np.ndarray:
        return boltzmann_weights(self.env_energies, self.beta)


def deviation_bound(model: DeviationModel) -> float:
    """sum_i |e^{-beta(E_i+c+delta_i)}/Z_E - e^{-beta E_i}/Z_S|; the shift c cancels."""
    return float(np.abs(model.env_weights() - model.system_weights()).sum())


def _check_shared(models: Sequence[DeviationModel]) -> None:
    if not models:
        raise ValueError("need at least one subenvironment model")
    first = models[0]
    for m in models[1:]:
        if m.base_energies != first.base_energies or m.beta != first.beta:
            raise ValueError("macrofraction models must share base energies and beta")


def _outer_grid(vectors: Sequence[np.ndarray], op) -> np.ndarray:
    size = math.prod(len(v) for v in vectors)
    if size > MAX_GRID_ENTRIES:
        raise ValueError(f"{size} index tuples exceed the evaluation cap")
    out = np.asarray(vectors[0], dtype=float)
    for v in vectors[1:]:
        out = op.outer(out, v).ravel()
    return out


def group_energies(models: Sequence[DeviationModel]) -> np.ndarray:
    """Energies of the macrofraction as one environment: sums over all index tuples."""
    return _outer_grid([m.env_energies for m in models], np.add)


def grouped_greedy_prefix_totals(models: Sequence[DeviationModel]) -> np.ndarray:
    """Greedy totals for the macrofractions made of the first 1, 2, ..., N models."""
    _check_shared(models)
    p = models[0].system_weights()
    beta = models[0].beta
    totals = []
    h = np.zeros(1)
    for m in models:
        h = np.add.outer(h, m.env_energies).ravel()
        totals.append(greedy_partition(p, h, beta).total)
    return np.array(totals)


def macrofraction_bound(models: Sequence[DeviationModel], variant: str = "product_form") -> float:
    """Distance bound for a macrofraction of N subenvironments.

    ``as_printed`` adds the per-subenvironment weights and subtracts the
    product of system weights, term by term over index tuples.
    ``product_form`` is the trace distance between the two diagonal product
    states.  ``grouped_greedy`` treats the macrofraction as one environment
    and runs the greedy index assignment; a partition of a sub-macrofraction
    lifts to the whole one with identical group weights, so the smallest
    greedy total over the prefixes 1..N is returned (nonincreasing in N).
    """
    _check_shared(models)
    if variant == "grouped_greedy":
        return float(grouped_greedy_prefix_totals(models).min())
    w_sys = models[0].system_weights()
    sys_grid = _outer_grid([w_sys] * len(models), np.multiply)
    env_vectors = [m.env_weights() for m in models]
    if variant == "as_printed":
        env_grid = _outer_grid(env_vectors, np.add)
    elif variant == "product_form":
        env_grid = _outer_grid(env_vectors, np.multiply)
    else:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    return float(np.abs(env_grid - sys_grid).sum())


@dataclass(frozen=True)
class GreedyResult:
    assignment: PartitionAssignment
    per_bin_error: tuple[float, ...]
    total: float
    unassigned_weight: float
    probs: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if abs(self.total - sum(self.per_bin_error)) > 1e-12:
            raise ValueError("total does not match per-bin errors")

    @property
    def bin_weights(self) -> np.ndarray:
        w = np.array(self.weights)
        return np.array([w[list(s)].sum() for s in self.assignment.sets])


def _validate_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float).ravel()
    if p.size < 1 or p.min() < 0 or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probs {p.tolist()} are not a distribution")
    return p


def greedy_weights(probs, weights) -> tuple[list[list[int]], np.ndarray]:
    """Greedy index assignment on explicit weights.

    Bins are filled in order of decreasing target, candidates are taken in
    order of decreasing weight.  A bin accepts indices until its running sum
    would first exceed the target; the overshooting index is kept only if
    that lands closer to the target (or the bin would otherwise be empty).
    Enough indices are always held back to give later bins one each.
    Leftover indices go one at a time to the bin with the largest deficit.
    """
    p = np.asarray(probs, dtype=float)
    w = np.asarray(weights, dtype=float)
    d_S = p.size
    remaining = [int(j) for j in np.argsort(-w, kind="stable")]
    bins: list[list[int]] = [[] for _ in range(d_S)]
    filled = np.zeros(d_S)
    for n, k in enumerate(np.argsort(-p, kind="stable")):
        reserve = d_S - n - 1
        while len(remaining) > reserve:
            j = remaining[0]
            nxt = filled[k] + w[j]
            if nxt <= p[k] or not bins[k] or abs(p[k] - nxt) < abs(p[k] - filled[k]):
                bins[k].append(remaining.pop(0))
                filled[k] = nxt
                if nxt > p[k]:
                    break
            else:
                break
    for j in remaining:
        k = int(np.argmax(p - filled))
        bins[k].append(j)
        filled[k] += w[j]
    return bins, filled


def greedy_partition(probs, env_energies, beta: float) -> GreedyResult:
    """Assign environment eigenvector indices to pointer groups.

    Energies are gauged so the smallest is 0 before forming the weights.
    The total sum_k |p_k - W_k| never exceeds d_S / Z_E.
    """
    p = _validate_probs(probs)
    h = np.asarray(env_energies, dtype=float).ravel()
    if h.size < p.size:
        raise ValueError(f"d_E={h.size} < d_S={p.size}: cannot form {p.size} nonempty groups")
    w = boltzmann_weights(h - h.min(), beta)
    bins, filled = greedy_weights(p, w)
    errors = tuple(float(x) for x in np.abs(p - filled))
    assigned = sum(len(b) for b in bins)
    unassigned = float(w.sum() - w[[j for b in bins for j in b]].sum()) if assigned < w.size else 0.0
    return GreedyResult(
        assignment=PartitionAssignment(tuple(tuple(b) for b in bins)),
        per_bin_error=errors,
        total=float(sum(errors)),
        unassigned_weight=unassigned,
        probs=tuple(p.tolist()),
        weights=tuple(w.tolist()),
    )


def theorem1_bound(d_S: int, env_energies, beta: float) -> float:
    """d_S / Z_E with the environment energies gauged to a zero minimum."""
    h = np.asarray(env_energies, dtype=float).ravel()
    h = h - h.min()
    if math.isinf(beta):
        z = float(np.sum(h <= 1e-12))
    else:
        z = float(np.exp(-beta * h).sum())
    return d_S / z


def assemble_greedy_state(result: GreedyResult, sys: HamiltonianSpec, env: HamiltonianSpec,
                          beta: float) -> tuple[SBSState, float]:
    """Objective candidate from a greedy assignment and its exact environment-marginal error.

    Conditional state i is sum_{j in C_i} c_j |psi_j><psi_j| with
    c_j = e^{-beta h_j} / sum_{k in C_i} e^{-beta h_k}.  The returned distance
    is ||sum_i p_i rho_{E|i} - gamma_E||_1 computed on the operators.
    """
    p = np.array(result.probs)
    if sys.dim != p.size or env.dim != len(result.weights):
        raise ValueError("greedy result does not match the given spectra")
    if not np.allclose(boltzmann_weights(sys.energies, beta), p, atol=1e-10):
        raise ValueError("greedy probs are not the system Gibbs weights at this beta")
    if not np.allclose(boltzmann_weights(env.energies, beta), result.weights, atol=1e-10):
        raise ValueError("greedy weights are not the environment Gibbs weights at this beta")
    w = np.array(result.weights)
    conds = []
    for i, group in enumerate(result.assignment.sets):
        if not group:
            raise ValueError(f"empty group for pointer index {i}")
        cols = env.basis[:, list(group)]
        c = w[list(group)] / w[list(group)].sum()
        conds.append(DensityOperator.from_numerical((cols * c) @ cols.conj().T))
    state = SBSState(tuple(p), sys.basis, (tuple(conds),))
    mixed = sum(pi * ci.matrix for pi, ci in zip(p, conds))
    return state, trace_norm(mixed - gibbs_state(env, beta).matrix)
