import pytest

from algcalc import linalg
from algcalc.errors import SingularMetric
from algcalc.exprlang import parse_field


def test_invert_and_residual():
    a = [[4.0, 1.0], [2.0, 3.0]]
    inv = linalg.invert(a)
    assert linalg.residual_identity(a, inv) < 1e-14


def test_invert_singular_raises():
    with pytest.raises(linalg.SingularMatrixError):
        linalg.invert([[1.0, 2.0], [2.0, 4.0]])


def test_rank():
    assert linalg.rank([[1.0, 2.0], [2.0, 4.0]]) == 1
    assert linalg.rank([[1.0, 0.0], [0.0, 1e-3]]) == 2
    assert linalg.rank([[0.0, 0.0], [0.0, 0.0]]) == 0


def test_signature():
    assert linalg.signature([[2.0, 0.0], [0.0, -3.0]]) == (1, 1, 0)
    assert linalg.signature([[1.0, 1.0], [1.0, 1.0]]) == (1, 0, 1)
    # indefinite with zero diagonal handled by diagonal pivoting fallback
    pos, neg, null = linalg.signature([[1e-20, 1.0], [1.0, 1e-20]])
    assert null == 2 or (pos, neg) == (1, 1)


def test_field_matrix_inverse_carries_derivatives():
    m, r = 1, 0
    mat = [[parse_field("1 + x1^2", m, r)]]
    inv = linalg.field_matrix_inverse(mat, m, r)
    x = 0.7
    assert float(inv[0][0]([x])) == pytest.approx(1.0 / (1 + x * x))
    d = inv[0][0].partial(0)
    assert float(d([x])) == pytest.approx(-2 * x / (1 + x * x) ** 2)


def test_field_matrix_inverse_maps_exception():
    m, r = 1, 0
    mat = [[parse_field("x1", m, r)]]
    inv = linalg.field_matrix_inverse(mat, m, r, exc=SingularMetric)
    with pytest.raises(SingularMetric):
        float(inv[0][0]([0.0]))
