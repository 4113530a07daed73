"""Acceptance checks, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the output)
or ``python tests/test_acceptance.py``.
"""
import itertools
import math
import time
from functools import reduce

import numpy as np
import pytest

from thermobj.bounds import (
    DeviationModel,
    assemble_greedy_state,
    deviation_bound,
    greedy_partition,
    macrofraction_bound,
    theorem1_bound,
)
from thermobj.channels import (
    GADParams,
    bloch_of_channel,
    gad_channel,
    iterate_to_fixpoint,
)
from thermobj.experiments import (
    ExperimentConfig,
    linear_fit_r2,
    run_macrofraction_sweep,
    run_sigma_sweep,
)
from thermobj.gibbs import HamiltonianSpec, boltzmann_weights, gibbs_state
from thermobj.operators import (
    DensityOperator,
    from_bloch,
    partial_trace,
    random_density,
    random_unitary,
    trace_norm,
)
from thermobj.oracle import brute_force_partition, direct_trace_distance, enumerate_infT
from thermobj.sbs import (
    build_global_objective_hamiltonian,
    certify_sbs,
    check_equal_dim_coexistence,
    environment_hamiltonian,
    example_closed_form,
    example_occupations,
    exact_thermal_objective_state,
    infinite_T_exact_states,
    random_sbs_state,
    thermal_system_objective,
)

SIGMAS = tuple(round(0.025 * i, 3) for i in range(11))
_sigma_cache = {}


def _sigma_table():
    if "table" not in _sigma_cache:
        start = time.perf_counter()
        cfg = ExperimentConfig("sigma_sweep", SIGMAS, beta=1.0, trials=1000, energies=(0.0, 1.0))
        _sigma_cache["table"] = run_sigma_sweep(cfg)
        _sigma_cache["seconds"] = time.perf_counter() - start
    return _sigma_cache["table"], _sigma_cache["seconds"]


def criterion_1():
    table, seconds = _sigma_table()
    means = table.means()
    r2 = linear_fit_r2(SIGMAS, means)
    ok = (abs(means[0]) <= 1e-12 and bool(np.all(np.diff(means) > 0))
          and r2 >= 0.95 and seconds < 10)
    return ok, f"mean(0)={means[0]:.1e} strictly increasing={bool(np.all(np.diff(means) > 0))} R2={r2:.4f} time={seconds:.2f}s"


def criterion_2():
    start = time.perf_counter()
    cfg = ExperimentConfig("macrofraction_sweep", tuple(range(1, 9)), beta=1.0, sigma=0.05,
                           trials=500, variants=("grouped_greedy",))
    table = run_macrofraction_sweep(cfg)
    seconds = time.perf_counter() - start
    means, se = table.means("grouped_greedy"), table.stderrs("grouped_greedy")
    sigma_table, _ = _sigma_table()
    i = SIGMAS.index(0.05)
    combined = math.hypot(se[0], sigma_table.stderrs()[i])
    gap = abs(means[0] - sigma_table.means()[i])
    decreasing = bool(np.all(np.diff(means) < 0))
    ok = decreasing and gap <= 3 * combined and seconds < 30
    return ok, (f"strictly decreasing={decreasing} N=1 gap={gap:.2e} (3 SE={3 * combined:.2e}) "
                f"time={seconds:.2f}s")


def criterion_3():
    rng = np.random.default_rng(3)
    violations = 0
    worst = 0.0
    for _ in range(1000):
        d_S, d_E = int(rng.choice([2, 3])), int(rng.integers(4, 65))
        p = boltzmann_weights(rng.uniform(0, 3, d_S), 1.0)
        h = rng.uniform(0, 3, d_E)
        h -= h.min()
        res = greedy_partition(p, h, 1.0)
        bound = theorem1_bound(d_S, h, 1.0)
        violations += res.total > bound
        worst = max(worst, res.total / bound)
    return violations == 0, f"violations={violations}/1000 worst total/bound={worst:.3f}"


def criterion_4():
    rng = np.random.default_rng(4)
    oracle_checked = oracle_bad = dist_bad = 0
    worst_gap = 0.0
    for _ in range(200):
        d_S = int(rng.choice([2, 3]))
        d_E = int(rng.integers(d_S, 17))
        sys = HamiltonianSpec(rng.uniform(0, 2, d_S), random_unitary(d_S, rng))
        env = HamiltonianSpec(rng.uniform(0, 3, d_E), random_unitary(d_E, rng))
        p = boltzmann_weights(sys.energies, 1.0)
        res = greedy_partition(p, env.energies, 1.0)
        if d_E <= 10:
            oracle_checked += 1
            _, best = brute_force_partition(p, res.weights)
            oracle_bad += best > res.total + 1e-12
        _, achieved = assemble_greedy_state(res, sys, env, 1.0)
        worst_gap = max(worst_gap, abs(achieved - res.total))
        dist_bad += abs(achieved - res.total) > 1e-10
    ok = oracle_bad == 0 and dist_bad == 0
    return ok, (f"oracle<=greedy failures={oracle_bad}/{oracle_checked} "
                f"distance mismatches={dist_bad}/200 max gap={worst_gap:.1e}")


def criterion_5():
    c22 = infinite_T_exact_states(2, 2).count
    c24 = infinite_T_exact_states(2, 4).count
    mismatches = []
    for d_S, m in itertools.product((1, 2, 3), (1, 2)):
        closed = math.factorial(d_S * m) // math.factorial(m) ** d_S
        states = infinite_T_exact_states(d_S, d_S * m)
        listed = sum(1 for _ in states.assignments())
        if not (states.count == listed == enumerate_infT(d_S, d_S * m) == closed):
            mismatches.append((d_S, m))
    ok = c22 == 2 and c24 == 6 and not mismatches
    return ok, f"(2,2)->{c22} (2,4)->{c24} enumeration mismatches={mismatches}"


def criterion_6():
    rng = np.random.default_rng(6)
    grid = (0.0, 0.25, 0.5, 0.75, 1.0)
    completeness = fixed = 0.0
    for p, eta in itertools.product(grid, grid):
        ch = gad_channel(GADParams(p, eta))
        completeness = max(completeness, ch.completeness_error())
        fixed = max(fixed, np.abs(ch(DensityOperator(np.diag([p, 1 - p]))).matrix
                                  - np.diag([p, 1 - p])).max())
    converge = 0.0
    for p, eta in itertools.product(grid, (0.25, 0.5, 0.75)):
        aff = bloch_of_channel(gad_channel(GADParams(p, eta)))
        for _ in range(20):
            v = rng.standard_normal(3)
            v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
            r, _ = iterate_to_fixpoint(aff, v)
            converge = max(converge, np.abs(from_bloch(r).matrix - np.diag([p, 1 - p])).max())
    action = 0.0
    for _ in range(100):
        ch = gad_channel(GADParams(*rng.uniform(size=2)))
        aff = bloch_of_channel(ch)
        rho = random_density(2, rng)
        action = max(action, np.abs(aff(rho).matrix - ch(rho).matrix).max())
    ok = completeness <= 1e-12 and fixed <= 1e-12 and converge <= 1e-8 and action <= 1e-12
    return ok, (f"completeness={completeness:.1e} fixed point={fixed:.1e} "
                f"iteration={converge:.1e} Bloch action={action:.1e}")


def _example_parts(rng):
    """Literal Gibbs states of the example global Hamiltonians on the full space."""
    results = []
    e = [0.0, 1.0]
    q2 = np.array([[1.0, 2.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.5]])
    for kind, q, d_E in (("example1", None, 2), ("example2", q2, 4)):
        occ = example_occupations(kind, e, q, d_E)
        for beta in (0.5, 1.0, 2.0):
            us, ue = random_unitary(2, rng), random_unitary(d_E, rng)
            h = build_global_objective_hamiltonian(kind, e, q=q, sys_basis=us, env_basis=ue, d_E=d_E)
            rho = gibbs_state(h, beta)
            cert = certify_sbs(rho, [2, d_E])
            p, _ = example_closed_form(e, occ, beta)
            sys = partial_trace(rho, [2, d_E], keep=[0])
            target = (us * p) @ us.conj().T
            results.append((kind, beta, bool(cert), trace_norm(sys.matrix - target), cert.witness))
    return results


def criterion_7():
    rng = np.random.default_rng(7)
    tso_ok = exact_ok = True
    worst = 0.0
    for _ in range(30):
        d = int(rng.integers(2, 4))
        hs = HamiltonianSpec(rng.uniform(0, 2, d), random_unitary(d, rng))
        beta = float(rng.uniform(0, 3))
        s = random_sbs_state([d, d + 1, d], d, rng)
        rho = thermal_system_objective(hs, beta, s.cond_states)
        dims = [d, d + 1, d]
        err = trace_norm(partial_trace(rho, dims, keep=[0]).matrix - gibbs_state(hs, beta).matrix)
        worst = max(worst, err)
        tso_ok &= bool(certify_sbs(rho, dims)) and err <= 1e-10

        specs = [(float(rng.normal()), random_unitary(d, rng)) for _ in range(2)]
        rho = exact_thermal_objective_state(hs, specs, beta)
        dims = [d, d, d]
        ok = bool(certify_sbs(rho, dims))
        for k, (c, u) in enumerate(specs):
            err = trace_norm(partial_trace(rho, dims, keep=[k + 1]).matrix
                             - gibbs_state(environment_hamiltonian(hs, c, u), beta).matrix)
            worst = max(worst, err)
            ok &= err <= 1e-10
        err = trace_norm(partial_trace(rho, dims, keep=[0]).matrix - gibbs_state(hs, beta).matrix)
        worst = max(worst, err)
        exact_ok &= ok and err <= 1e-10

    examples = _example_parts(rng)
    certified = sum(r[2] for r in examples)
    marginal_err = max(r[3] for r in examples)
    examples_ok = certified == len(examples) and marginal_err <= 1e-10
    witness = next((r[4] for r in examples if not r[2]), None)
    ok = tso_ok and exact_ok and examples_ok
    detail = (f"thermal-system objective={'ok' if tso_ok else 'bad'} exact locally thermal={'ok' if exact_ok else 'bad'} "
              f"(max marginal error {worst:.1e}); example Gibbs states certified {certified}/{len(examples)}, "
              f"system marginal error {marginal_err:.1e}")
    if witness is not None:
        detail += f"; first witness: {witness.condition} {witness.magnitude:.3f}"
    return ok, detail


def criterion_8():
    rng = np.random.default_rng(8)
    shifts_found = 0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        hs = HamiltonianSpec.from_operator(random_density(d, rng).matrix * 5)
        he = HamiltonianSpec.from_operator(random_density(d, rng).matrix * 5)
        shifts_found += bool(check_equal_dim_coexistence(hs, he, 1.0))
    certified = 0
    for _ in range(100):
        d_S, d_E = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        g = rng.standard_normal((d_S * d_E,) * 2) + 1j * rng.standard_normal((d_S * d_E,) * 2)
        certified += bool(certify_sbs(gibbs_state((g + g.conj().T) / 2, 1.0), [d_S, d_E]))
    ok = shifts_found == 0 and certified == 0
    return ok, f"coexistence accepted={shifts_found}/100 generic Gibbs certified={certified}/100"


def criterion_9():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        d, n = int(rng.integers(2, 4)), int(rng.integers(1, 4))
        beta = float(rng.uniform(0.2, 3))
        e = rng.uniform(0, 2, d)
        models = [DeviationModel(e, float(rng.normal()), rng.normal(0, 0.3, d), beta) for _ in range(n)]
        sys = np.diag(models[0].system_weights())
        single = direct_trace_distance(np.diag(models[0].env_weights()), sys)
        env = reduce(np.kron, [np.diag(m.env_weights()) for m in models])
        prod = direct_trace_distance(env, reduce(np.kron, [sys] * n))
        worst = max(worst, abs(single - deviation_bound(models[0])),
                    abs(prod - macrofraction_bound(models, "product_form")))
    return worst <= 1e-10, f"max formula/operator gap={worst:.1e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def report(n: int) -> tuple[bool, str]:
    ok, detail = CRITERIA[n - 1]()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, line = report(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    for n in range(1, len(CRITERIA) + 1):
        print(report(n)[1])
