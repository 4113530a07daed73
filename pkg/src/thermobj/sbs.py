"""Objective (spectrum-broadcast-structure) states.

An SBS state has the form ``sum_i p_i |i><i| (x) rho_{E_1|i} (x) ... (x) rho_{E_N|i}``
where, for every subenvironment k, the conditional states for different i
have disjoint supports.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .gibbs import HamiltonianSpec, boltzmann_weights
from .operators import (
    DensityOperator,
    HermitianOperator,
    partial_trace_matrix,
    random_unitary,
    trace_norm,
)

DEFAULT_TOL = 1e-8
ENUMERATION_CAP = 12


class NotObjectiveError(ValueError):
    """Conditional environment states overlap, so the state is not objective."""


def support_overlap(a, b) -> float:
    """tr(a b) for PSD a, b; equals ||sqrt(a) b sqrt(a)||_1 and vanishes iff supports are disjoint."""
    ma = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a)
    mb = b.matrix if isinstance(b, HermitianOperator) else np.asarray(b)
    return max(0.0, float(np.einsum("ij,ji->", ma, mb).real))


@dataclass(frozen=True)
class SBSState:
    """Objective state data.

    ``sys_basis`` holds the pointer vectors as columns (d_S x n);
    ``cond_states[k][i]`` is the state of subenvironment k given pointer i.
    """

    probs: tuple[float, ...]
    sys_basis: np.ndarray
    cond_states: tuple[tuple[DensityOperator, ...], ...]
    atol: float = 1e-9

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        basis = np.array(self.sys_basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis[:, None]
        conds = tuple(tuple(row) for row in self.cond_states)
        object.__setattr__(self, "probs", probs)
        basis.flags.writeable = False
        object.__setattr__(self, "sys_basis", basis)
        object.__setattr__(self, "cond_states", conds)

        n = len(probs)
        if n < 1:
            raise ValueError("need at least one pointer index")
        if min(probs) < -self.atol or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"probs {probs} are not a distribution")
        if basis.shape[1] != n or basis.shape[0] < n:
            raise ValueError(f"sys_basis shape {basis.shape} incompatible with {n} probabilities")
        if not np.allclose(basis.conj().T @ basis, np.eye(n), atol=1e-10, rtol=0):
            raise ValueError("sys_basis columns are not orthonormal")
        if not conds:
            raise ValueError("need at least one subenvironment")
        for k, row in enumerate(conds):
            if len(row) != n:
                raise ValueError(f"subenvironment {k} has {len(row)} conditionals, expected {n}")
            if len({s.dim for s in row}) != 1:
                raise ValueError(f"subenvironment {k} conditionals differ in dimension")
            for i, j in itertools.combinations(range(n), 2):
                ov = support_overlap(row[i], row[j])
                if ov > self.atol:
                    raise NotObjectiveError(
                        f"not objective: subenvironment {k}, indices {i},{j} overlap {ov:.3e}"
                    )

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def num_envs(self) -> int:
        return len(self.cond_states)

    @property
    def dims(self) -> list[int]:
        return [self.sys_basis.shape[0]] + [row[0].dim for row in self.cond_states]


@dataclass(frozen=True)
class PartitionAssignment:
    """Disjoint groups of environment eigenvector indices, one per pointer index."""

    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sets = tuple(tuple(sorted(int(j) for j in s)) for s in self.sets)
        object.__setattr__(self, "sets", sets)
        flat = [j for s in sets for j in s]
        if len(flat) != len(set(flat)):
            raise ValueError("partition sets overlap")
        if flat and min(flat) < 0:
            raise ValueError("negative environment index")

    def labels(self, d_E: int) -> np.ndarray:
        """Bin label per environment index, -1 for unassigned."""
        out = np.full(d_E, -1, dtype=int)
        for k, s in enumerate(self.sets):
            out[list(s)] = k
        return out


def assemble(s: SBSState) -> DensityOperator:
    total = 0
    for i, p in enumerate(s.probs):
        v = s.sys_basis[:, i]
        env = reduce(np.kron, (row[i].matrix for row in s.cond_states))
        total = total + p * np.kron(np.outer(v, v.conj()), env)
    return DensityOperator.from_numerical(total)


@dataclass(frozen=True)
class Witness:
    condition: str
    magnitude: float
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.condition} (magnitude {self.magnitude:.3e}) {self.detail}".rstrip()


@dataclass(frozen=True)
class Certificate:
    is_sbs: bool
    state: SBSState | None = None
    witness: Witness | None = None

    def __bool__(self) -> bool:
        return self.is_sbs


def _random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def _clusters(vals: np.ndarray, gap: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for idx, v in enumerate(vals):
        if groups and abs(vals[groups[-1][-1]] - v) <= gap:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def certify_sbs(rho, dims: Sequence[int], tol: float = DEFAULT_TOL, seed: int = 7) -> Certificate:
    """Decide whether ``rho`` on S (x) E_1 (x) ... has spectrum broadcast structure.

    The pointer basis is the eigenbasis of the system marginal.  Inside
    (near-)degenerate eigenspaces the basis is fixed by diagonalising
    tr_E[(1 (x) X) rho] for a seeded random Hermitian X, which is diagonal
    in any valid pointer basis.  The candidate basis is then checked
    directly: vanishing off-diagonal system blocks, product conditionals,
    and disjoint conditional supports, each within ``tol``.
    """
    m = rho.matrix if isinstance(rho, HermitianOperator) else np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    if len(dims) < 2 or int(np.prod(dims)) != m.shape[0]:
        raise ValueError(f"dims {dims} inconsistent with operator dimension {m.shape[0]}")
    d_S, env_dims = dims[0], dims[1:]
    d_env = int(np.prod(env_dims))
    m4 = m.reshape(d_S, d_env, d_S, d_env)

    rho_S = np.einsum("axbx->ab", m4)
    vals, vecs = np.linalg.eigh((rho_S + rho_S.conj().T) / 2)
    order = np.argsort(-vals)
    vals, vecs = vals[order], vecs[:, order]
    kept = int(np.sum(vals > tol))
    vals, vecs = vals[:kept], vecs[:, :kept]

    rng = np.random.default_rng(seed)
    x_probe = _random_hermitian(d_env, rng)
    for group in _clusters(vals, max(tol, 1e-6)):
        if len(group) < 2:
            continue
        v = vecs[:, group]
        mx = np.einsum("ai,axby,yx,bj->ij", v.conj(), m4, x_probe, v)
        _, rot = np.linalg.eigh((mx + mx.conj().T) / 2)
        vecs[:, group] = v @ rot

    blocks = np.einsum("ai,axby,bj->ixjy", vecs.conj(), m4, vecs)

    worst_off, where = 0.0, None
    for i, j in itertools.combinations(range(kept), 2):
        off = float(np.linalg.svd(blocks[i, :, j, :], compute_uv=False).sum())
        if off > worst_off:
            worst_off, where = off, (i, j)
    if worst_off > tol:
        return Certificate(False, witness=Witness(
            "system block not diagonal", worst_off, f"pointer indices {where}"))

    probs = np.array([np.trace(blocks[i, :, i, :]).real for i in range(kept)])
    marginals: list[list[np.ndarray]] = [[] for _ in env_dims]
    for i in range(kept):
        b = blocks[i, :, i, :]
        margs = [partial_trace_matrix(b, env_dims, [k]) / probs[i] for k in range(len(env_dims))]
        if len(env_dims) > 1:
            resid = trace_norm(b - probs[i] * reduce(np.kron, margs))
            if resid > tol:
                return Certificate(False, witness=Witness(
                    "conditional state not a product", resid, f"pointer index {i}"))
        for k, mk in enumerate(margs):
            marginals[k].append(mk)

    for k, row in enumerate(marginals):
        for i, j in itertools.combinations(range(kept), 2):
            ov = support_overlap(row[i], row[j])
            if ov > tol:
                return Certificate(False, witness=Witness(
                    "overlapping supports", ov, f"subenvironment {k}, pointer indices {i},{j}"))

    state = SBSState(
        probs=tuple(probs / probs.sum()),
        sys_basis=vecs,
        cond_states=tuple(tuple(DensityOperator.from_numerical(mk) for mk in row) for row in marginals),
        atol=max(tol, 1e-9),
    )
    return Certificate(True, state=state)


def _normalise_conditionals(cond_states) -> tuple[tuple[DensityOperator, ...], ...]:
    if isinstance(cond_states[0], HermitianOperator):
        return (tuple(cond_states),)
    return tuple(tuple(row) for row in cond_states)


def thermal_system_objective(hs: HamiltonianSpec, beta: float, cond_states) -> DensityOperator:
    """Objective state whose system marginal is the Gibbs state of ``hs``.

    ``cond_states`` is either one list of d_S conditionals (single
    environment) or a list over subenvironments of such lists.
    """
    conds = _normalise_conditionals(cond_states)
    p = boltzmann_weights(hs.energies, beta)
    return assemble(SBSState(tuple(p), hs.basis, conds))


def _system_frame_blocks(rho, hs: HamiltonianSpec) -> tuple[np.ndarray, int]:
    m = rho.matrix if isinstance(rho, HermitianOperator) else np.asarray(rho, dtype=complex)
    d_S = hs.dim
    if m.shape[0] % d_S:
        raise ValueError(f"state dimension {m.shape[0]} is not a multiple of d_S={d_S}")
    d_E = m.shape[0] // d_S
    u = np.kron(hs.basis, np.eye(d_E))
    return u.conj().T @ m @ u, d_E


def _assignments(d_S: int, d_E: int, required: np.ndarray, cap: int) -> list[np.ndarray] | None:
    if d_S ** d_E > cap:
        return None
    out = []
    for labels in itertools.product(range(d_S), repeat=d_E):
        lab = np.array(labels)
        if all(np.any(lab == i) for i in np.flatnonzero(required)):
            out.append(lab)
    return out


def distance_to_TsO(rho, hs: HamiltonianSpec, beta: float, search_budget: int = 32,
                    seed: int = 0, exhaustive_cap: int = 4096) -> float:
    """Upper bound on the trace distance from ``rho`` to the thermal-system objective set.

    Candidates keep the system populations at the Gibbs weights of ``hs``
    and use conditional environment states that are diagonal in one
    orthonormal environment basis, each supported on its own group of basis
    vectors.  Bases tried: the computational basis, a joint eigenbasis of
    the conditional blocks of ``rho``, and ``search_budget`` seeded Haar
    unitaries.  Group assignments are enumerated exhaustively when
    d_S**d_E <= ``exhaustive_cap``, otherwise the best-overlap assignment is
    used.  Diagonal weights come from pinching the conditional block of
    ``rho``.  Returns ``inf`` when no candidate exists (d_E smaller than the
    number of populated system levels).
    """
    p = boltzmann_weights(hs.energies, beta)
    m, d_E = _system_frame_blocks(rho, hs)
    d_S = hs.dim
    required = p > 0
    if d_E < int(required.sum()):
        return math.inf
    m4 = m.reshape(d_S, d_E, d_S, d_E)
    cond_blocks = [m4[i, :, i, :] for i in range(d_S)]

    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(0.5, 1.5, d_S)
    mix = sum(c * b for c, b in zip(coeffs, cond_blocks))
    bases = [np.eye(d_E, dtype=complex), np.linalg.eigh((mix + mix.conj().T) / 2)[1]]
    bases += [random_unitary(d_E, rng) for _ in range(int(search_budget))]

    fixed = _assignments(d_S, d_E, required, exhaustive_cap)
    best = math.inf
    for w in bases:
        diag = np.array([np.einsum("xj,xy,yj->j", w.conj(), b, w).real for b in cond_blocks])
        diag = np.clip(diag, 0.0, None)
        labellings = fixed if fixed is not None else [np.argmax(diag, axis=0)]
        for lab in labellings:
            if not all(np.any(lab == i) for i in np.flatnonzero(required)):
                continue
            cand = np.zeros_like(m)
            for i in range(d_S):
                mask = lab == i
                if not mask.any():
                    continue
                c = np.where(mask, diag[i], 0.0)
                c = c / c.sum() if c.sum() > 1e-300 else mask / mask.sum()
                cand[i * d_E:(i + 1) * d_E, i * d_E:(i + 1) * d_E] = p[i] * (w * c) @ w.conj().T
            best = min(best, trace_norm(m - cand))
    return best


@dataclass(frozen=True)
class ShiftMatch:
    exists: bool
    shift: float | None = None

    def __bool__(self) -> bool:
        return self.exists


def check_equal_dim_coexistence(hs: HamiltonianSpec, he: HamiltonianSpec, beta: float,
                                tol: float = 1e-9) -> ShiftMatch:
    """Can equal-dimension system and environment be jointly thermal and objective?

    For 0 < beta < inf this holds iff the sorted environment energies are the
    system energies plus one constant; ``shift`` is that constant.  At beta = 0
    every Gibbs state is maximally mixed so any pair matches; at infinite beta
    only the ground-level degeneracies have to agree.
    """
    if hs.dim != he.dim:
        raise ValueError(f"dimension mismatch: {hs.dim} vs {he.dim}")
    e = np.sort(hs.energies)
    h = np.sort(he.energies)
    diff = h - e
    c = float(diff.mean())
    if beta == 0:
        return ShiftMatch(True, c)
    if math.isinf(beta):
        same = np.sum(e - e[0] <= tol) == np.sum(h - h[0] <= tol)
        return ShiftMatch(bool(same), float(h[0] - e[0]) if same else None)
    if np.max(np.abs(diff - c)) <= tol:
        return ShiftMatch(True, c)
    return ShiftMatch(False)


def environment_hamiltonian(hs: HamiltonianSpec, shift: float, unitary) -> HamiltonianSpec:
    """H_E = sum_i (E_i + shift) U|i><i|U^dagger."""
    return HamiltonianSpec(hs.energies + shift, unitary)


def exact_thermal_objective_state(hs: HamiltonianSpec, subenv_specs, beta: float) -> DensityOperator:
    """Locally thermal objective state for subenvironments with shifted copies of the system spectrum.

    ``subenv_specs`` is a list of ``(shift, unitary)`` pairs; subenvironment k
    records pointer i in the pure state ``U_k|i>``.
    """
    conds = []
    for _, u in subenv_specs:
        u = np.asarray(u, dtype=complex)
        if u.shape != (hs.dim, hs.dim):
            raise ValueError(f"subenvironment unitary shape {u.shape} != system dim {hs.dim}")
        conds.append(tuple(DensityOperator.pure(u[:, i]) for i in range(hs.dim)))
    if not conds:
        raise ValueError("need at least one subenvironment")
    return thermal_system_objective(hs, beta, conds)


@dataclass(frozen=True)
class InfiniteTemperatureStates:
    """Exact infinite-temperature objective-thermal states for (d_S, d_E).

    ``count`` is (M d_S)!/(M!)^d_S when d_E = M d_S and 0 otherwise; in the
    latter case ``bound`` is the d_S/d_E distance guarantee.
    """

    d_S: int
    d_E: int
    count: int
    bound: float = 0.0

    def assignments(self) -> Iterator[PartitionAssignment]:
        if self.d_E > ENUMERATION_CAP:
            raise ValueError(f"enumeration limited to d_E <= {ENUMERATION_CAP}")
        if self.count == 0:
            return
        size = self.d_E // self.d_S

        def fill(remaining: tuple[int, ...], done: list[tuple[int, ...]]):
            if len(done) == self.d_S:
                yield PartitionAssignment(tuple(done))
                return
            for group in itertools.combinations(remaining, size):
                rest = tuple(j for j in remaining if j not in group)
                yield from fill(rest, done + [group])

        yield from fill(tuple(range(self.d_E)), [])

    def states(self) -> Iterator[DensityOperator]:
        """rho_SE = sum_i (1/d_S)|i><i| (x) rho_{E|i}, rho_{E|i} uniform on group i."""
        for a in self.assignments():
            m = np.zeros((self.d_S * self.d_E,) * 2)
            for i, group in enumerate(a.sets):
                for j in group:
                    idx = i * self.d_E + j
                    m[idx, idx] = 1.0 / self.d_E
            yield DensityOperator(m)


def infinite_T_exact_states(d_S: int, d_E: int) -> InfiniteTemperatureStates:
    if d_S < 1 or d_E < 1:
        raise ValueError("dimensions must be positive")
    if d_E % d_S:
        return InfiniteTemperatureStates(d_S, d_E, 0, d_S / d_E)
    size = d_E // d_S
    count = math.factorial(d_E) // math.factorial(size) ** d_S
    return InfiniteTemperatureStates(d_S, d_E, count, 0.0)


def _example_params(energies, sys_basis, env_basis, d_E):
    e = np.asarray(energies, dtype=float).ravel()
    d_S = e.size
    us = np.eye(d_S, dtype=complex) if sys_basis is None else np.asarray(sys_basis, dtype=complex)
    ue = np.eye(d_E, dtype=complex) if env_basis is None else np.asarray(env_basis, dtype=complex)
    for name, u, d in (("sys_basis", us, d_S), ("env_basis", ue, d_E)):
        if u.shape != (d, d) or not np.allclose(u.conj().T @ u, np.eye(d), atol=1e-10):
            raise ValueError(f"{name} must be a {d}x{d} unitary")
    return e, us, ue


def example_occupations(kind: str, energies, q=None, d_E: int | None = None) -> np.ndarray:
    """Matrix q[i, a] of environment occupations attached to pointer i.

    The example1 kind is the special case q[i, a] = delta_{ia}.
    """
    e = np.asarray(energies, dtype=float).ravel()
    if kind == "example1":
        d_E = e.size if d_E is None else d_E
        if d_E < e.size:
            raise ValueError("example1 needs d_E >= d_S")
        out = np.zeros((e.size, d_E))
        out[np.arange(e.size), np.arange(e.size)] = 1.0
        return out
    if kind == "example2":
        qq = np.asarray(q, dtype=float)
        if qq.ndim != 2 or qq.shape[0] != e.size:
            raise ValueError("q must have one row per system energy")
        prod = (qq[:, None, :] != 0) & (qq[None, :, :] != 0)
        prod[np.arange(e.size), np.arange(e.size)] = False
        if prod.any():
            raise ValueError("q supports overlap: q_{a|i} q_{a|j} != 0 for some i != j")
        return qq
    raise ValueError(f"unknown example kind {kind!r}")


def build_global_objective_hamiltonian(kind: str, energies, q=None, sys_basis=None,
                                       env_basis=None, d_E: int | None = None) -> HermitianOperator:
    """H_total = sum_i E_i |i><i| (x) sum_a q_{a|i} |phi_a><phi_a|.

    ``kind='example1'`` uses q_{a|i} = delta_{ia}; ``env_basis`` columns are
    the |phi_a>.  States |i>|phi_a> outside every support get energy 0.
    """
    occ = example_occupations(kind, energies, q, d_E)
    e, us, ue = _example_params(energies, sys_basis, env_basis, occ.shape[1])
    total = 0
    for i in range(e.size):
        env_op = (ue * occ[i]) @ ue.conj().T
        total = total + e[i] * np.kron(np.outer(us[:, i], us[:, i].conj()), env_op)
    return HermitianOperator(total)


def correlated_subspace_projector(kind: str, energies, q=None, sys_basis=None,
                                  env_basis=None, d_E: int | None = None) -> np.ndarray:
    """Projector onto span{|i>|phi_a> : q_{a|i} != 0}, the correlated eigenvectors of H_total."""
    occ = example_occupations(kind, energies, q, d_E)
    e, us, ue = _example_params(energies, sys_basis, env_basis, occ.shape[1])
    proj = 0
    for i, a in zip(*np.nonzero(occ)):
        v = np.kron(us[:, i], ue[:, a])
        proj = proj + np.outer(v, v.conj())
    return np.asarray(proj)


def example_closed_form(energies, occ: np.ndarray, beta: float,
                        support_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form pointer probabilities p_i and conditionals c[i, a] for the example Hamiltonians.

    With ``support_only=False`` the sums over a run over every environment
    level (the Gibbs state of H_total on the full space); with ``True`` they
    run over the support of q_{.|i} only (the Gibbs state confined to the
    correlated subspace).
    """
    e = np.asarray(energies, dtype=float).ravel()
    mask = (occ != 0) if support_only else np.ones_like(occ, dtype=bool)
    x = np.where(mask, np.exp(-beta * e[:, None] * occ), 0.0)
    rows = x.sum(axis=1)
    return rows / rows.sum(), x / rows[:, None]


def random_sbs_state(dims: Sequence[int], n: int, rng: np.random.Generator) -> SBSState:
    """Random objective state: Dirichlet pointer weights, Haar pointer basis and
    mixed conditionals on random disjoint subspaces of each subenvironment."""
    d_S, env_dims = dims[0], list(dims[1:])
    if n > d_S or any(n > d for d in env_dims):
        raise ValueError("n pointer indices must fit in every factor")
    probs = rng.dirichlet(np.ones(n))
    sys_basis = random_unitary(d_S, rng)[:, :n]
    conds = []
    for d in env_dims:
        u = random_unitary(d, rng)
        labels = np.concatenate([np.arange(n), rng.integers(0, n, d - n)])
        rng.shuffle(labels)
        row = []
        for i in range(n):
            cols = u[:, labels == i]
            w = rng.dirichlet(np.ones(cols.shape[1]))
            row.append(DensityOperator.from_numerical((cols * w) @ cols.conj().T))
        conds.append(tuple(row))
    return SBSState(tuple(probs), sys_basis, tuple(conds))
