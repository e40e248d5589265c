import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracforms import matrix_order as M
from fracforms.differint import DifferintSpec, differint
from fracforms.errors import NonDiagonalizableOrder, NotNormal, UndefinedAtEigenvalue, ZeroMatrix
from fracforms.special import digamma


def test_classification():
    assert M.as_matrix_order(np.diag([0.5, 1.5])).classification == "normal"
    assert M.as_matrix_order([[1.0, 2.0], [0.0, 3.0]]).classification == "diagonalizable"
    J = M.as_matrix_order([[1.0, 1.0], [0.0, 1.0]])
    assert J.classification == "jordan_only"
    assert J.jordan_blocks == ((1 + 0j, 2),)
    np.testing.assert_allclose(J.P @ J.J @ J.P_inv, J.entries, atol=1e-12)


def test_zero_matrix():
    with pytest.raises(ZeroMatrix):
        M.classify_and_decompose(np.zeros((2, 2)))
    assert M.as_matrix_order(np.zeros((2, 2))).classification == "normal"


def test_defective_three_by_three_recovered_from_split_eigenvalues():
    T = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]])
    Jm = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
    A = M.as_matrix_order(T @ Jm @ np.linalg.inv(T))
    assert A.jordan_blocks[0][1] == 3
    assert abs(A.jordan_blocks[0][0] - 2) < 1e-9


def test_read_and_write_matrix():
    data = [[[1, 0], [0, 2]], [[3, -1], 4]]
    A = M.read_matrix(data)
    assert A[0, 1] == 2j and A[1, 0] == 3 - 1j and A[1, 1] == 4
    assert M.write_matrix(A)[1][0] == [3.0, -1.0]
    with pytest.raises(ValueError):
        M.read_matrix([[1, 2]])
    with pytest.raises(ValueError):
        M.read_matrix([[[1, 2, 3]]])


def test_diagonal_order_is_entrywise():
    D = M.matrix_differint(np.diag([0.5, -0.5]), "x1", 0.0, 1.0).value
    assert D[0, 0] == pytest.approx(2 / math.sqrt(math.pi))
    assert D[1, 1] == pytest.approx(2 / math.sqrt(math.pi) * 2 / 3 * 1.0)
    assert D[0, 1] == 0


def test_jordan_block_frozen():
    # off-diagonal entries are lambda-derivatives: psi(3)/2 and 2 psi(2)
    D = M.matrix_differint([[-1.0, 1.0], [0.0, -1.0]], "x1", 0.0, 1.0).value
    assert D[0, 0].real == pytest.approx(0.5)
    assert D[0, 1].real == pytest.approx(0.46139216754923357, abs=1e-8)
    D2 = M.matrix_differint([[1.0, 1.0], [0.0, 1.0]], "x1^2", 0.0, 1.0).value
    assert D2[0, 1].real == pytest.approx(0.84556867019693428, abs=1e-8)
    assert D2[0, 1].real == pytest.approx(2 * digamma(2.0), abs=1e-8)


def test_matrix_function_errors():
    with pytest.raises(UndefinedAtEigenvalue):
        M.matrix_function(np.diag([0.0, 1.0]), lambda z: 1 / z if z != 0 else math.inf)
    with pytest.raises(NonDiagonalizableOrder):
        M.spectral_function([[1.0, 1.0], [0.0, 1.0]], np.exp)
    with pytest.raises(NotNormal):
        M.transpose_identity_check([[0.5, 0.2], [0.0, 0.3]], np.eye(2), "x1", 0.0, 1.0)


def test_trace_and_sequential_determinant():
    A = np.diag([0.3, 0.4])
    seq = M.sequential_determinant(A, "exp(x1)", 0.0, 1.2)
    tr = M.trace_differint(A, "exp(x1)", 0.0, 1.2)
    assert seq == pytest.approx(tr, abs=1e-4)
    assert tr == pytest.approx(differint("exp(x1)", DifferintSpec(0.7), 1.2).value)


def test_integer_shift():
    A = [[0.5, 0.2], [0.2, -0.3]]
    lhs, rhs = M.integer_shift_check(A, 1, "exp(x1)", 0.0, 1.0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-3)


# ---------------------------------------------------------------------------
# properties

entries = st.floats(min_value=-1, max_value=1, allow_nan=False)


@st.composite
def diagonalizable(draw, m=3):
    ev = draw(st.lists(st.floats(min_value=-1.2, max_value=1.2), min_size=m, max_size=m,
                       unique_by=lambda v: round(v, 2)))
    S = np.array(draw(st.lists(entries, min_size=m * m, max_size=m * m))).reshape(m, m) + 2.5 * np.eye(m)
    return S @ np.diag(ev) @ np.linalg.inv(S)


@given(diagonalizable())
def test_reconstruction(A):
    O = M.as_matrix_order(A)
    assert O.diagonalizable
    np.testing.assert_allclose(O.P @ np.diag(O.eigenvalues) @ O.P_inv, A, atol=1e-9)


@given(diagonalizable())
def test_projector_algebra(A):
    O = M.as_matrix_order(A)
    Gs = [G for _, G in O.projectors]
    np.testing.assert_allclose(sum(Gs), np.eye(3), atol=1e-8)
    for i, Gi in enumerate(Gs):
        for j, Gj in enumerate(Gs):
            np.testing.assert_allclose(Gi @ Gj, Gi if i == j else 0 * Gi, atol=1e-8)
    np.testing.assert_allclose(sum(l * G for l, G in O.projectors), A, atol=1e-8)


@given(diagonalizable())
def test_similarity_and_spectral_sums_agree(A):
    g = lambda z: np.exp(0.3 * z)  # noqa: E731
    np.testing.assert_allclose(M.matrix_function(A, g), M.spectral_function(A, g), atol=1e-9)


@given(st.lists(st.floats(min_value=-1.4, max_value=1.4).filter(lambda v: abs(v) > 0.05),
                min_size=2, max_size=2, unique_by=lambda v: round(v, 2)))
def test_commuting_orders_compose(ev):
    # A and B share eigenvectors, so D^A D^B = D^(A + B)
    S = np.array([[1.0, 0.4], [0.3, 1.0]])
    A = S @ np.diag(ev) @ np.linalg.inv(S)
    B = S @ np.diag([0.25, -0.35]) @ np.linalg.inv(S)
    comp = M.compose_matrix_differint(A, B, "x1^3", 0.0, 1.3).value
    direct = M.matrix_differint(A + B, "x1^3", 0.0, 1.3).value
    np.testing.assert_allclose(comp, direct, atol=1e-6)
