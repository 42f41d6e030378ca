import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonkit.algebra import (
    Algebra,
    DimensionError,
    FaithfulnessError,
    RelativeModularData,
    Weight,
    connes_cocycle,
    diagonal_weight,
    expi,
    modular_flow,
    modular_flow_complex,
    triple_norm,
    triple_norm_weighted,
    weight_eval,
    weight_from_density,
)
from conftest import block_dims, draw_instance, seeds


def test_block_algebra_shapes():
    alg = Algebra((2, 1))
    assert alg.dim == 5
    assert alg.size == 3
    assert len(alg.basis()) == 5
    x = alg.from_vector(np.arange(5.0))
    np.testing.assert_array_equal(x.to_vector(), np.arange(5.0))
    assert alg.from_full(x.to_full()).allclose(x)


def test_mismatched_algebras_raise():
    x = Algebra((2,)).identity()
    y = Algebra((1, 1)).identity()
    with pytest.raises(DimensionError):
        x + y
    with pytest.raises(DimensionError):
        weight_eval(diagonal_weight([1, 1]), y)


def test_nonfaithful_density_raises():
    with pytest.raises(FaithfulnessError):
        diagonal_weight([1.0, 0.0])
    with pytest.raises(FaithfulnessError):
        weight_from_density([np.array([[1.0, 2.0], [0.0, 1.0]])])


def test_triple_norm_diag_example():
    # max{1, sqrt2, sqrt2, 2}
    w = diagonal_weight([2.0, 1.0])
    x = Algebra((2,)).element([np.diag([1.0, 0.0])])
    assert triple_norm(w, x) == pytest.approx(2.0, abs=1e-14)


@given(seeds, block_dims)
def test_triple_norm_dominates_components(seed, dims):
    _, w, (x, _) = draw_instance(seed, dims)
    t = triple_norm(w, x)
    assert t >= x.norm() - 1e-12
    assert t >= abs(weight_eval(w, x)) - 1e-12
    assert triple_norm_weighted(w, x) >= abs(weight_eval(w, x)) - 1e-12


def test_modular_flow_matrix_unit():
    a, b, t = 0.7, 0.2, 0.9
    w = diagonal_weight([a, b])
    e12 = Algebra((2,)).element([np.array([[0.0, 1.0], [0.0, 0.0]])])
    expected = e12 * (a / b) ** (1j * t)
    assert modular_flow(w, e12, t).allclose(expected, atol=1e-14)


@given(seeds, block_dims, st.floats(-3, 3), st.floats(-3, 3))
def test_modular_flow_group_law_and_weight_invariance(seed, dims, s, t):
    _, w, (x, y) = draw_instance(seed, dims)
    lhs = modular_flow(w, modular_flow(w, x, s), t)
    assert lhs.allclose(modular_flow(w, x, s + t), atol=1e-12)
    assert abs(weight_eval(w, modular_flow(w, x, t)) - weight_eval(w, x)) < 1e-12
    # automorphism
    assert modular_flow(w, x @ y, t).allclose(modular_flow(w, x, t) @ modular_flow(w, y, t), atol=1e-12)


@given(seeds, block_dims, st.floats(-2, 2))
def test_kms_condition_at_base_level(seed, dims, t):
    _, w, (x, y) = draw_instance(seed, dims)
    lhs = weight_eval(w, modular_flow_complex(w, x, complex(t, 1.0)) @ y)
    rhs = weight_eval(w, y @ modular_flow(w, x, t))
    assert abs(lhs - rhs) < 1e-10


def test_cocycle_commuting_diagonals():
    a = np.array([0.3, 0.5])
    b = np.array([0.6, 0.4])
    t = 1.3
    u = connes_cocycle(diagonal_weight(a), diagonal_weight(b), t)
    np.testing.assert_allclose(u.blocks[0], np.diag((a / b) ** (1j * t)), atol=1e-14)


@given(seeds, st.floats(-2, 2), st.floats(-2, 2))
def test_cocycle_identity_and_unitarity(seed, t, s):
    rng, psi, _ = draw_instance(seed, (2,))
    _, rho, _ = draw_instance(seed + 1, (2,))
    rel = RelativeModularData(rho, psi)
    u = rel.cocycle(t)
    assert (u @ u.H).allclose(psi.algebra.identity(), atol=1e-12)
    assert rel.cocycle_defect(t, s) < 1e-11
    assert connes_cocycle(psi, psi, t).allclose(psi.algebra.identity(), atol=1e-12)


def test_expi_is_unitary(rng):
    from poissonkit.experiments import random_hermitian

    h = random_hermitian(rng, Algebra((3,)))
    u = expi(h)
    assert (u @ u.H).allclose(Algebra((3,)).identity(), atol=1e-13)


def test_modular_spectrum_diag_three():
    w = diagonal_weight([1.0, 2.0, 5.0])
    spec = w.modular.spectrum
    # six off-diagonal ratios plus 1
    assert len(spec) == 7
    assert 1.0 in spec
    np.testing.assert_allclose(sorted(spec), sorted({1.0, 2, 0.5, 5, 0.2, 2.5, 0.4}), rtol=1e-12)
