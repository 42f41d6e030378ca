import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonkit.algebra import DimensionError, FaithfulnessError, diagonal_weight, weight_from_density
from poissonkit.entropy import (
    DominationError,
    check_domination,
    cocycle_lift_check,
    entropy_report,
    lindblad_entropy,
    poisson_kl,
    poisson_relative_entropy,
    poisson_relative_entropy_explicit,
    umegaki,
)
from poissonkit.experiments import dominated_pair, random_element, random_weight
from conftest import seeds

dims_st = st.sampled_from([(1,), (2,), (3,), (2, 1)])


def test_lindblad_equal_weights_is_zero(m2_weight):
    assert lindblad_entropy(m2_weight, m2_weight) == pytest.approx(0.0, abs=1e-14)


def test_lindblad_commuting_diagonals():
    a, b = np.array([0.2, 0.5]), np.array([0.4, 0.9])
    expected = float(np.sum(a * (np.log(a) - np.log(b))) + b.sum() - a.sum())
    assert lindblad_entropy(diagonal_weight(a), diagonal_weight(b)) == pytest.approx(expected, abs=1e-15)


@given(seeds, dims_st, st.floats(0.1, 5.0))
def test_lindblad_scales_linearly(seed, dims, c):
    rho, psi = dominated_pair(np.random.default_rng(seed), dims, 0.8)
    lhs = lindblad_entropy(rho.scaled(c), psi.scaled(c))
    assert lhs == pytest.approx(c * lindblad_entropy(rho, psi), rel=1e-10, abs=1e-14)


@given(seeds, st.sampled_from([(2,), (3,), (2, 1)]))
def test_klein_inequality_for_states(seed, dims):
    rng = np.random.default_rng(seed)
    rho, psi = random_weight(rng, dims, 1.0), random_weight(rng, dims, 1.0)
    assert lindblad_entropy(rho, psi) >= -1e-12


def test_domination_examples(m2_weight):
    psi = m2_weight
    assert check_domination(psi, psi)
    assert not check_domination(psi.scaled(2.0), psi)
    psi2 = weight_from_density([np.diag([0.3, 0.25]).astype(complex) + 0.0])
    v = np.array([1.0, 1.0j]) / math.sqrt(2)
    rho = weight_from_density([psi2.density.blocks[0] - 0.1 * np.outer(v, v.conj())])
    assert check_domination(rho, psi2)
    with pytest.raises(DimensionError):
        check_domination(psi, diagonal_weight([1.0]))


def test_nonfaithful_rejected():
    with pytest.raises(FaithfulnessError):
        diagonal_weight([0.5, 0.0])


@given(seeds, st.sampled_from([(2,), (3,)]), st.floats(0.2, 1.5))
def test_truncated_entropy_converges_to_lindblad(seed, dims, mass):
    rho, psi = dominated_pair(np.random.default_rng(seed), dims, mass)
    assert abs(poisson_relative_entropy(rho, psi, 30) - lindblad_entropy(rho, psi)) <= 1e-6


@given(seeds)
def test_closed_form_truncation_matches_kronecker_powers(seed):
    rho, psi = dominated_pair(np.random.default_rng(seed), (2,), 0.7)
    for M in range(4):
        assert abs(poisson_relative_entropy(rho, psi, M) - poisson_relative_entropy_explicit(rho, psi, M)) < 1e-12


def test_equal_weights_zero_at_every_level(m2_weight):
    for M in (0, 3, 10):
        assert poisson_relative_entropy(m2_weight, m2_weight, M) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("a,b", [(0.3, 0.9), (0.7, 1.3), (1.5, 1.5)])
def test_scalar_case_is_poisson_kl(a, b):
    value = poisson_relative_entropy(diagonal_weight([a]), diagonal_weight([b]), 80)
    assert value == pytest.approx(poisson_kl(a, b), abs=1e-12)


def test_non_dominated_pair_rejected(m2_weight):
    with pytest.raises(DominationError):
        poisson_relative_entropy(m2_weight.scaled(2.0), m2_weight, 10)


def test_report_gap_decays():
    rho, psi = dominated_pair(np.random.default_rng(3), (2,), 1.2)
    rep = entropy_report(rho, psi, range(2, 31, 2))
    assert rep.monotone_after(math.ceil(5 * 1.2))
    assert rep.gaps[-1] <= 1e-6
    table = rep.to_json()["table"]
    assert table[-1]["psi_trace"] == pytest.approx(1.0, abs=1e-12)


def test_report_flags_normalized_case():
    # equal masses plus domination force rho = psi
    psi = random_weight(np.random.default_rng(0), (2,), 1.0)
    rep = entropy_report(psi, psi, [5])
    assert rep.normalized_nonnegative is True
    assert rep.lindblad == pytest.approx(0.0, abs=1e-14)


def test_umegaki_matches_definition():
    p = np.diag([0.7, 0.3]).astype(complex)
    q = np.diag([0.5, 0.5]).astype(complex)
    assert umegaki(p, q) == pytest.approx(0.7 * math.log(1.4) + 0.3 * math.log(0.6))


@given(seeds)
def test_cocycle_lift(seed):
    rng = np.random.default_rng(seed)
    rho, psi = dominated_pair(rng, (2,), 0.8)
    letters = [random_element(rng, psi.algebra, 0.5) for _ in range(2)]
    assert cocycle_lift_check(rho, psi, 0.5, letters) < 1e-8
    assert cocycle_lift_check(psi, psi, 0.7, letters) < 1e-8
    assert cocycle_lift_check(rho, psi, 0.0, letters) < 1e-8
