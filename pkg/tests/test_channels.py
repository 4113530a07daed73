import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermobj.channels import (
    AffineBlochChannel,
    ConvergenceError,
    GADParams,
    KrausChannel,
    bloch_of_channel,
    cnot_broadcast,
    gad_channel,
    iterate_to_fixpoint,
    point_channel,
    stationary_state,
)
from thermobj.gibbs import HamiltonianSpec, gibbs_state
from thermobj.operators import (
    BlochVector,
    DensityOperator,
    from_bloch,
    partial_trace,
    random_density,
    tensor,
    to_bloch,
)
from thermobj.sbs import certify_sbs, thermal_system_objective

GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
ket0, ket1 = DensityOperator.basis_state(2, 0), DensityOperator.basis_state(2, 1)
plus = DensityOperator.pure(np.array([1, 1]) / np.sqrt(2))


def gad_bloch_by_hand(p, eta):
    return np.diag([math.sqrt(eta), math.sqrt(eta), eta]), np.array([0, 0, (2 * p - 1) * (1 - eta)])


def test_point_channel_is_constant_and_idempotent(rng):
    target = gibbs_state(HamiltonianSpec([0, 1]), 1.0)
    ch = point_channel(target)
    rho = random_density(2, rng)
    assert ch(rho) is target and ch(ch(rho)) is target
    bell = DensityOperator.pure(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(ch(partial_trace(bell, [2, 2], keep=[0])).matrix, target.matrix)
    with pytest.raises(ValueError):
        ch(DensityOperator.maximally_mixed(3))


def test_cnot_broadcast_examples():
    out = cnot_broadcast(tensor(DensityOperator(np.eye(2) / 2), ket0))
    assert np.allclose(out.matrix, np.diag([0.5, 0, 0, 0.5]))
    bell = cnot_broadcast(tensor(plus, ket0))
    assert np.allclose(bell.matrix, np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2)
    assert not certify_sbs(bell, [2, 2])


def test_cnot_broadcast_of_thermal_state_is_thermal_objective():
    hs = HamiltonianSpec([0, math.log(2)])
    out = cnot_broadcast(tensor(gibbs_state(hs, 1.0), ket0))
    assert np.allclose(out.matrix, thermal_system_objective(hs, 1.0, [ket0, ket1]).matrix)
    assert certify_sbs(out, [2, 2])
    assert np.allclose(partial_trace(out, [2, 2], keep=[0]).matrix, gibbs_state(hs, 1.0).matrix)


def test_cnot_broadcast_dimension_errors():
    with pytest.raises(ValueError):
        cnot_broadcast(DensityOperator.maximally_mixed(3))


def test_kraus_channel_requires_completeness():
    with pytest.raises(ValueError):
        KrausChannel((np.eye(2) * 0.9,))


@pytest.mark.parametrize("p,eta", list(itertools.product(GRID, GRID)))
def test_gad_completeness_and_fixed_point(p, eta):
    ch = gad_channel(GADParams(p, eta))
    assert ch.completeness_error() <= 1e-12
    fixed = stationary_state(GADParams(p, eta))
    assert np.abs(ch(fixed).matrix - np.diag([p, 1 - p])).max() <= 1e-12


def test_gad_identity_at_eta_one(rng):
    ch = gad_channel(GADParams(0.3, 1.0))
    rho = random_density(2, rng)
    assert np.allclose(ch(rho).matrix, rho.matrix, atol=1e-14)


def test_gad_iteration_from_plus_state():
    ch = gad_channel(GADParams(0.7, 0.5))
    rho = plus
    for _ in range(50):
        rho = ch(rho)
    assert np.abs(rho.matrix - np.diag([0.7, 0.3])).max() <= 1e-7


def test_gad_params_time_parametrisation():
    params = GADParams.from_bath(0.6, temperature=2.0, t=0.3)
    nbar = 1 / (math.exp(0.5) - 1)
    assert params.eta == pytest.approx(1 - math.exp(-(1 + 2 * nbar) * 0.3))
    with pytest.raises(ValueError):
        GADParams(0.6, 0.5, t=0.3, nbar=nbar)
    with pytest.raises(ValueError):
        GADParams(1.2, 0.5)


def test_bloch_of_identity_and_point_channels():
    ident = bloch_of_channel(KrausChannel((np.eye(2),)))
    assert np.allclose(ident.A, np.eye(3)) and np.allclose(ident.t, 0)
    target = gibbs_state(HamiltonianSpec([0, 1]), 1.0)
    const = bloch_of_channel(point_channel(target))
    assert np.allclose(const.A, 0) and np.allclose(const.t, to_bloch(target).as_array())


@pytest.mark.parametrize("p,eta", [(0.7, 0.5), (0.2, 0.9), (1.0, 0.3)])
def test_bloch_of_gad_matches_kraus_derivation(p, eta):
    aff = bloch_of_channel(gad_channel(GADParams(p, eta)))
    a, t = gad_bloch_by_hand(p, eta)
    assert np.allclose(aff.A, a, atol=1e-14) and np.allclose(aff.t, t, atol=1e-14)


def test_bloch_form_reproduces_channel_action(rng):
    ch = gad_channel(GADParams(0.65, 0.4))
    aff = bloch_of_channel(ch)
    for _ in range(100):
        rho = random_density(2, rng)
        assert np.abs(aff(rho).matrix - ch(rho).matrix).max() <= 1e-12


def test_bloch_of_channel_rejects_non_qubit():
    with pytest.raises(ValueError):
        bloch_of_channel(KrausChannel((np.eye(3),)))


def test_affine_channel_rejects_maps_leaving_the_ball():
    with pytest.raises(ValueError):
        AffineBlochChannel(np.eye(3) * 1.1, np.zeros(3))
    with pytest.raises(ValueError):
        AffineBlochChannel(np.eye(3) * 0.9, np.array([0, 0, 0.5]))


def test_iterate_zero_matrix_converges_in_one_step():
    ch = AffineBlochChannel(np.zeros((3, 3)), [0.1, 0.2, 0.3])
    r, n = iterate_to_fixpoint(ch, BlochVector(0.5, 0, 0))
    assert n == 1 and r.as_array() == pytest.approx([0.1, 0.2, 0.3])


def test_iterate_partial_thermalisation_reaches_target():
    ch = AffineBlochChannel.partial_thermalization(0.5 * np.eye(3), BlochVector(0, 0, 0.5))
    r, _ = iterate_to_fixpoint(ch, BlochVector(0.6, -0.3, 0.1))
    assert np.allclose(r.as_array(), [0, 0, 0.5], atol=1e-9)
    assert np.allclose(ch.fixed_point(), [0, 0, 0.5])


def test_iterate_errors():
    with pytest.raises(ValueError, match="not a strict partial thermalization"):
        iterate_to_fixpoint(AffineBlochChannel(np.eye(3), np.zeros(3)), BlochVector(0, 0, 0))
    slow = AffineBlochChannel(0.999 * np.eye(3), np.zeros(3))
    with pytest.raises(ConvergenceError):
        iterate_to_fixpoint(slow, BlochVector(0.9, 0, 0), max_iters=10)


def test_gad_bloch_iteration_reaches_stationary_state(rng):
    p = 0.8
    aff = bloch_of_channel(gad_channel(GADParams(p, 0.35)))
    target = to_bloch(DensityOperator(np.diag([p, 1 - p]))).as_array()
    for _ in range(20):
        v = rng.standard_normal(3)
        v *= rng.uniform() / np.linalg.norm(v)
        r, _ = iterate_to_fixpoint(aff, v)
        assert np.linalg.norm(r.as_array() - target) <= 1e-8


def test_contraction_bound_per_iteration(rng):
    a = rng.standard_normal((3, 3))
    a *= 0.6 / np.linalg.norm(a, 2)
    ch = AffineBlochChannel.partial_thermalization(a, [0.05, -0.1, 0.1])
    r_star = ch.fixed_point()
    r = np.array([0.2, 0.3, -0.1])
    err0 = np.linalg.norm(r - r_star)
    for n in range(1, 40):
        r = ch.map_vector(r)
        assert np.linalg.norm(r - r_star) <= ch.norm() ** n * err0 + 1e-15


@given(st.integers(0, 2**32 - 1))
def test_channels_preserve_states(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(2, rng)
    for ch in (gad_channel(GADParams(*rng.uniform(size=2))),
               point_channel(random_density(2, rng)),
               bloch_of_channel(gad_channel(GADParams(0.4, 0.2)))):
        out = ch(rho)
        assert abs(out.trace() - 1) <= 1e-12 and out.eigvalsh().min() >= -1e-10
    joint = cnot_broadcast(random_density(4, rng))
    assert abs(joint.trace() - 1) <= 1e-12 and joint.eigvalsh().min() >= -1e-10


def test_point_after_anything_is_point(rng):
    target = random_density(2, rng)
    rho = gad_channel(GADParams(0.3, 0.6))(random_density(2, rng))
    assert point_channel(target)(rho) is target


def test_from_bloch_of_affine_image(rng):
    aff = bloch_of_channel(gad_channel(GADParams(0.1, 0.7)))
    rho = random_density(2, rng)
    direct = from_bloch(aff.map_vector(to_bloch(rho)))
    assert np.allclose(direct.matrix, aff(rho).matrix)
