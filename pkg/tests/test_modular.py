import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from poissonkit.algebra import Algebra, diagonal_weight, tracial_weight
from poissonkit.fock import PoissonWord, WordKind, gram_matrix
from poissonkit.modular import (
    TypeTag,
    arveson_spectrum,
    classify_spectrum,
    classify_type,
    kms_residual,
    lift_modular_flow,
    principal_series_lambda,
    principal_series_weight,
)
from conftest import block_dims, draw_instance, seeds


def test_reference_types():
    assert classify_type(tracial_weight(Algebra((3,)))).tag is TypeTag.II1
    c = classify_type(diagonal_weight([1.0, 0.5]))
    assert c.tag is TypeTag.III_LAMBDA and c.lam == pytest.approx(0.5, abs=1e-12)
    assert classify_type(diagonal_weight([1.0, math.e, math.exp(math.sqrt(2))])).tag is TypeTag.III1


def test_commensurate_logs_give_lattice_generator():
    # ratios 4 and 8 generate 2^Z
    c = classify_type(diagonal_weight([1.0, 4.0, 8.0]))
    assert c.tag is TypeTag.III_LAMBDA
    assert c.lam == pytest.approx(0.5, abs=1e-12)


def test_principal_series_half():
    t = math.log(2) / (2 * math.pi)
    c = classify_type(principal_series_weight([0.0, t]))
    assert c.tag is TypeTag.III_LAMBDA
    assert c.lam == pytest.approx(0.5, abs=1e-12)


def test_principal_series_incommensurate_triple():
    ts = [0.0, 0.1, 0.1 * math.sqrt(2)]
    assert classify_type(principal_series_weight(ts)).tag is TypeTag.III1


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_principal_series_pair_formula(a, b):
    # ratios closer to 1 than the eigenvalue merge tolerance are treated as degenerate
    assume(abs(abs(a) - abs(b)) > 1e-8)
    lam = principal_series_lambda(a, b)
    assert lam == pytest.approx(min(math.exp(2 * math.pi * (abs(a) - abs(b))), math.exp(2 * math.pi * (abs(b) - abs(a)))))
    spec = arveson_spectrum(principal_series_weight([a, b]))
    assert spec.min() == pytest.approx(lam, rel=1e-12)


def test_principal_series_normalized_and_validated():
    w = principal_series_weight([0.2, -0.3, 0.5], dims=[1, 2, 1])
    assert w.mass == pytest.approx(1.0)
    assert w.algebra.blocks == (4,)
    with pytest.raises(ValueError):
        principal_series_weight([])
    with pytest.raises(ValueError):
        principal_series_weight([0.1, 0.2], dims=[1])


def test_spectrum_is_inversion_closed():
    spec = arveson_spectrum(diagonal_weight([1.0, 3.0, 7.0]))
    np.testing.assert_allclose(sorted(spec), sorted(1 / spec), rtol=1e-12)


def test_stable_large_denominator_is_indeterminate():
    # log ratio 1013/1009: rational, denominator above the cutoff, no nearby simpler fraction
    c = classify_spectrum([1.0, math.e, math.e ** (1013 / 1009)])
    assert c.tag is TypeTag.INDETERMINATE


@given(seeds, block_dims, st.floats(-3, 3))
def test_kms_residual_small(seed, dims, t):
    _, w, (x, y) = draw_instance(seed, dims, norm=1.0)
    assert kms_residual(w, x, y, t) < 1e-10


def test_kms_rejects_large_arguments():
    _, w, (x, y) = draw_instance(0, (2,), norm=2.0)
    with pytest.raises(ValueError):
        kms_residual(w, x, y, 0.0)


@given(seeds, st.floats(-3, 3))
def test_lifted_flow_preserves_grams(seed, t):
    _, w, letters = draw_instance(seed, (2,), n_letters=6)
    words = [PoissonWord(WordKind.EMPTY, tuple(letters[2 * i:2 * i + 2])) for i in range(3)]
    G = gram_matrix(words, w)
    Gt = gram_matrix([lift_modular_flow(wd, w, t) for wd in words], w)
    assert np.abs(G - Gt).max() < 1e-9


def test_type_json():
    data = classify_type(diagonal_weight([1.0, 0.5])).to_json()
    assert data["type"] == "III_lambda"
    assert data["lambda"] == pytest.approx(0.5)
