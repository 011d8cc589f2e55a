import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qhistories.errors import DimensionError
from qhistories.linalg import adjoint, frobenius_close, mat_apply, tensor_product, trace
from qhistories.quantum import CNOT, I2, X

from corpus import random_unitary

A, B = 3 / 5, 4 / 5

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)


def cmat(shape):
    return arrays(np.complex128, shape, elements=complexes)


def test_tensor_basis_vectors():
    out = tensor_product([1, 0], [1, 0])
    assert out.shape == (4,)
    np.testing.assert_array_equal(out, [1, 0, 0, 0])


def test_tensor_superposition_by_hand():
    # (a, b) (x) (1, 0) = (a*1, a*0, b*1, b*0)
    np.testing.assert_array_equal(tensor_product([A, B], [1, 0]), [A, 0, B, 0])


def test_tensor_identities():
    np.testing.assert_array_equal(tensor_product(I2, I2), np.eye(4))


def test_mat_apply_examples():
    np.testing.assert_array_equal(mat_apply(I2, [A, B]), [A, B])
    np.testing.assert_array_equal(mat_apply(X, [1, 0]), [0, 1])
    np.testing.assert_array_equal(mat_apply(CNOT, [A, 0, B, 0]), [A, 0, 0, B])


def test_mat_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        mat_apply(CNOT, [1, 0])


def test_adjoint_examples():
    np.testing.assert_array_equal(adjoint(I2), I2)
    np.testing.assert_array_equal(adjoint([[0, 1j], [0, 0]]), [[0, 0], [-1j, 0]])
    np.testing.assert_array_equal(adjoint(CNOT), CNOT.T)
    np.testing.assert_array_equal(adjoint(CNOT), CNOT)


def test_trace_examples():
    assert trace(np.eye(4)) == 4
    assert trace([[0, 0], [0, 1]]) == 1


def test_trace_of_rank_one_chain_by_brute_force():
    psi0 = np.array([A, 0, B, 0])
    ket11 = np.array([0, 0, 0, 1])
    c = B * np.outer(ket11, psi0.conj())
    cct = adjoint(c)
    total = 0j
    for i in range(4):
        for k in range(4):
            total += c[i, k] * cct[k, i]
    assert abs(total - 0.64) < 1e-15
    assert abs(trace(c @ cct) - 0.64) < 1e-15


def test_trace_non_square():
    with pytest.raises(DimensionError):
        trace(np.zeros((2, 3)))


def test_frobenius_close_examples(rng):
    assert frobenius_close(I2, I2, 1e-12)
    assert not frobenius_close(I2, 2 * I2, 1e-12)
    u = random_unitary(8, rng)
    assert frobenius_close(u @ adjoint(u), np.eye(8), 1e-12)
    with pytest.raises(DimensionError):
        frobenius_close(I2, np.eye(4), 1e-12)


small_ints = st.integers(-8, 8)
gaussian_ints = st.builds(complex, small_ints, small_ints)


@given(*[arrays(np.complex128, (2, 2), elements=gaussian_ints)] * 3)
def test_tensor_associative_exact(a, b, c):
    # Gaussian-integer entries keep every product exact in double precision.
    np.testing.assert_array_equal(tensor_product(tensor_product(a, b), c), tensor_product(a, tensor_product(b, c)))


@given(cmat((2, 2)), cmat((2, 2)), cmat((2, 2)))
def test_tensor_associative_floats(a, b, c):
    lhs = tensor_product(tensor_product(a, b), c)
    rhs = tensor_product(a, tensor_product(b, c))
    assert frobenius_close(lhs, rhs, 1e-12 * max(1.0, np.abs(rhs).max()))


@given(cmat((2, 2)), cmat((2, 2)), cmat((2, 2)), cmat((2, 2)))
def test_mixed_product(a, b, c, d):
    lhs = tensor_product(a, b) @ tensor_product(c, d)
    rhs = tensor_product(a @ c, b @ d)
    # entries reach ~1e4 here; scale the absolute bound accordingly
    assert frobenius_close(lhs, rhs, 1e-12 * max(1.0, np.abs(rhs).max()))


@settings(max_examples=50)
@given(st.integers(1, 16).flatmap(lambda n: st.tuples(cmat((n, n)), cmat((n, n)))))
def test_trace_cyclic(ab):
    a, b = ab
    scale = max(1.0, np.abs(a).max() * np.abs(b).max() * a.shape[0] ** 2)
    assert abs(trace(a @ b) - trace(b @ a)) <= 1e-12 * scale


@given(cmat((3, 2)), cmat((2, 4)))
def test_adjoint_involution_and_product(a, b):
    np.testing.assert_array_equal(adjoint(adjoint(a)), a)
    assert frobenius_close(adjoint(a @ b), adjoint(b) @ adjoint(a), 1e-12 * max(1.0, np.abs(a @ b).max()))
