"""Plain-text file formats.

Matrix interchange::

    dim 2
    0.5+0i 0+0i
    0+0i 0.5+0i

Hamiltonian: ``dim d``, a line of d energies, then the eigenvector matrix
(columns) in the interchange format.

SBS state::

    sbs n <n> N <N> dims <d_S> <d_E1> ... <d_EN>
    probs <p_1> ... <p_n>
    <d_S x d_S basis matrix, first n columns are the pointer states>
    <conditional states, subenvironment-major: k = 1..N, i = 1..n>

Instances and experiment configs are flat ``key = value`` lines; ``#``
starts a comment.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterator

import numpy as np

from .gibbs import HamiltonianSpec
from .operators import DensityOperator
from .sbs import SBSState


def format_complex(z: complex) -> str:
    re, im = repr(float(z.real)), repr(float(z.imag))
    if not im.startswith("-"):
        im = "+" + im
    return f"{re}{im}i"


def parse_complex(token: str) -> complex:
    t = token.strip()
    if t.endswith("i") and not t.endswith("inf"):
        t = t[:-1] + "j"
    return complex(t)


def format_matrix(m) -> str:
    m = np.asarray(m.matrix if hasattr(m, "matrix") else m, dtype=complex)
    lines = [f"dim {m.shape[0]}"]
    lines += [" ".join(format_complex(z) for z in row) for row in m]
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> Iterator[str]:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _read_matrix_lines(lines: Iterator[str]) -> np.ndarray:
    head = next(lines).split()
    if len(head) != 2 or head[0] != "dim":
        raise ValueError(f"expected 'dim d', got {' '.join(head)!r}")
    d = int(head[1])
    rows = []
    for _ in range(d):
        row = [parse_complex(t) for t in next(lines).split()]
        if len(row) != d:
            raise ValueError(f"row has {len(row)} entries, expected {d}")
        rows.append(row)
    return np.array(rows, dtype=complex)


def parse_matrix(text: str) -> np.ndarray:
    return _read_matrix_lines(_content_lines(text))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def read_state(path) -> DensityOperator:
    return DensityOperator(read_matrix(path))


def write_matrix(m, path) -> None:
    Path(path).write_text(format_matrix(m))


def format_hamiltonian(h: HamiltonianSpec) -> str:
    return (f"dim {h.dim}\n" + " ".join(repr(float(e)) for e in h.energies) + "\n"
            + format_matrix(h.basis))


def parse_hamiltonian(text: str) -> HamiltonianSpec:
    lines = _content_lines(text)
    head = next(lines).split()
    if head[0] != "dim":
        raise ValueError("Hamiltonian file must start with 'dim d'")
    d = int(head[1])
    energies = [float(x) for x in next(lines).split()]
    if len(energies) != d:
        raise ValueError(f"{len(energies)} energies for dim {d}")
    return HamiltonianSpec(energies, _read_matrix_lines(lines))


def format_sbs(s: SBSState) -> str:
    dims = s.dims
    out = [f"sbs n {s.n} N {s.num_envs} dims " + " ".join(str(d) for d in dims),
           "probs " + " ".join(repr(p) for p in s.probs)]
    basis = s.sys_basis
    if basis.shape[1] < basis.shape[0]:
        # complete the pointer columns to a unitary
        q, _ = np.linalg.qr(np.hstack([basis, np.eye(basis.shape[0])]))
        extra = q[:, basis.shape[1]:basis.shape[0]]
        basis = np.hstack([basis, extra])
    text = "\n".join(out) + "\n" + format_matrix(basis)
    for row in s.cond_states:
        for st in row:
            text += format_matrix(st)
    return text


def parse_sbs(text: str) -> SBSState:
    lines = _content_lines(text)
    head = next(lines).split()
    if head[:1] != ["sbs"] or head[1] != "n" or head[3] != "N" or head[5] != "dims":
        raise ValueError("SBS file must start with 'sbs n <n> N <N> dims ...'")
    n, num_envs = int(head[2]), int(head[4])
    dims = [int(x) for x in head[6:]]
    if len(dims) != num_envs + 1:
        raise ValueError(f"header lists {len(dims)} dims for {num_envs} subenvironments")
    probs_line = next(lines).split()
    if probs_line[0] != "probs" or len(probs_line) != n + 1:
        raise ValueError("expected 'probs' followed by n values")
    probs = tuple(float(x) for x in probs_line[1:])
    basis = _read_matrix_lines(lines)
    if basis.shape[0] != dims[0]:
        raise ValueError("basis dimension does not match d_S")
    conds = []
    for k in range(num_envs):
        row = []
        for _ in range(n):
            m = _read_matrix_lines(lines)
            if m.shape[0] != dims[k + 1]:
                raise ValueError(f"conditional state dimension mismatch in subenvironment {k}")
            row.append(DensityOperator(m))
        conds.append(tuple(row))
    return SBSState(probs, basis[:, :n], tuple(conds))


def parse_key_values(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in _content_lines(text):
        if "=" not in line:
            raise ValueError(f"expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ValueError(f"duplicate key {key!r}")
        out[key] = value
    return out


def floats(value: str) -> list[float]:
    return [float(x) for x in value.replace(",", " ").split()]


def float_rows(value: str) -> list[list[float]]:
    """Rows separated by ';', entries by whitespace or commas."""
    return [floats(part) for part in value.split(";") if part.strip()]


