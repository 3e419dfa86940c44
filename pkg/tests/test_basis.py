import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdcroots.basis import (
    basis_from_elements,
    gellmann_basis,
    matrix_unit_basis,
    named_basis,
    product_basis,
)
from cdcroots.errors import BasisError, InvalidDimensionError

PAULI = np.array([np.eye(2), [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


def test_qubit_gellmann_is_pauli():
    b = gellmann_basis(2)
    assert np.allclose(b.elements, PAULI)
    assert np.allclose(b.duals, PAULI / 2)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gellmann_invariants(d):
    b = gellmann_basis(d)
    assert b.elements.shape == (d * d, d, d)
    assert np.allclose(b.pairing(), np.eye(d * d), atol=1e-12)
    assert b.identity_first and b.hermitian and b.traceless_tail
    assert np.allclose(b.duals[0], np.eye(d) / d)
    b.check()


def test_d3_has_eight_traceless_generators():
    b = gellmann_basis(3)
    tails = b.elements[1:]
    assert len(tails) == 8
    assert np.allclose(np.trace(tails, axis1=1, axis2=2), 0)
    gram = np.einsum("iab,jba->ij", tails, tails)
    assert np.allclose(gram, 2 * np.eye(8))


def test_rejects_small_dimension():
    with pytest.raises(InvalidDimensionError):
        gellmann_basis(1)


def test_dependent_elements_rejected():
    els = np.repeat(np.eye(2)[None], 4, axis=0)
    with pytest.raises(BasisError):
        basis_from_elements(els)


def test_unknown_name():
    with pytest.raises(BasisError):
        named_basis("fourier", 2)


def test_basis_is_immutable():
    b = gellmann_basis(2)
    with pytest.raises(ValueError):
        b.elements[0, 0, 0] = 5


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_coefficients_round_trip(d, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    for b in (gellmann_basis(d), matrix_unit_basis(d)):
        assert np.allclose(b.compose(b.coefficients(x)), x)


@given(st.integers(0, 2**32 - 1))
def test_custom_basis_duals(seed):
    rng = np.random.default_rng(seed)
    els = rng.normal(size=(9, 3, 3)) + 1j * rng.normal(size=(9, 3, 3))
    b = basis_from_elements(els)
    assert np.allclose(b.pairing(), np.eye(9), atol=1e-8)


def test_product_basis_indexing():
    a, c = gellmann_basis(2), gellmann_basis(3)
    p = product_basis(a, c)
    assert np.allclose(p.elements[2 * 9 + 5], np.kron(a.elements[2], c.elements[5]))
    assert np.allclose(p.pairing(), np.eye(36), atol=1e-10)
