import numpy as np
import pytest

from entcut.errors import NumericError, ShapeError
from entcut.tensor import contract, truncated_svd

from oracles import contract_loops


def test_identity_contraction():
    vec = np.array([3.0, 4.0])
    out = contract(np.eye(2), vec, [(1, 0)])
    assert np.allclose(out, vec)


def test_dot_product():
    out = contract(np.array([1.0, 2.0]), np.array([3.0, 4.0]), [(0, 0)])
    assert out == pytest.approx(11.0)


def test_against_loop_oracle():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 4, 5))
    b = rng.normal(size=(5, 4))
    got = contract(a, b, [(1, 1), (2, 0)])
    want = contract_loops(a, b, [(1, 1), (2, 0)])
    assert got.shape == want.shape
    assert np.abs(got - want).max() < 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_bilinearity(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 4))
    alpha = rng.normal()
    lhs = contract(alpha * a, b, [(1, 0)])
    rhs = alpha * contract(a, b, [(1, 0)])
    assert np.abs(lhs - rhs).max() < 1e-12


def test_axis_order_of_result():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 5, 3))
    b = rng.normal(size=(5, 7))
    out = contract(a, b, [(1, 0)])
    assert out.shape == (2, 3, 7)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        contract(np.eye(2), np.zeros(3), [(1, 0)])
    with pytest.raises(ShapeError):
        contract(np.eye(2), np.zeros(2), [(5, 0)])


def test_svd_keeps_exact_zeros_without_budget():
    res = truncated_svd(np.diag([1.0, 0.0]), max_keep=2, weight_cutoff=0.0)
    assert np.allclose(res.s, [1.0, 0.0])
    assert res.discarded_weight == 0.0


def test_svd_rank_cap():
    res = truncated_svd(np.diag([0.8, 0.6]), max_keep=1)
    assert np.allclose(res.s, [0.8])
    assert res.discarded_weight == pytest.approx(0.36)


def test_svd_reconstruction_error_equals_discarded_weight():
    rng = np.random.default_rng(11)
    m = rng.normal(size=(20, 30))
    res = truncated_svd(m, max_keep=7)
    approx = res.u @ np.diag(res.s) @ res.vt
    err = np.linalg.norm(m - approx)
    assert abs(err - np.sqrt(res.discarded_weight)) < 1e-10


def test_svd_lossless_roundtrip():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(12, 9))
    res = truncated_svd(m, max_keep=12)
    rel = np.linalg.norm(m - res.u @ np.diag(res.s) @ res.vt) / np.linalg.norm(m)
    assert rel < 1e-8


def test_svd_isometries_and_order():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(10, 6))
    res = truncated_svd(m, max_keep=6)
    assert np.all(np.diff(res.s) <= 1e-15)
    assert np.all(res.s >= 0)
    assert np.abs(res.u.T @ res.u - np.eye(res.rank)).max() < 1e-10
    assert np.abs(res.vt @ res.vt.T - np.eye(res.rank)).max() < 1e-10


def test_svd_weight_budget():
    m = np.diag([1.0, 1e-4, 1e-5])
    res = truncated_svd(m, max_keep=3, weight_cutoff=1e-7)
    # dropping both small values would discard ~1e-8 < budget
    assert res.rank == 1
    assert res.discarded_weight == pytest.approx(1e-8 + 1e-10, rel=1e-6)


def test_svd_rejects_nonfinite():
    m = np.array([[1.0, np.nan], [0.0, 1.0]])
    with pytest.raises(NumericError):
        truncated_svd(m, max_keep=2)
