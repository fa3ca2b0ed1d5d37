import numpy as np
import pytest

from gnodelab.errors import DimensionError, InsufficientDataError
from gnodelab.pca import pca


def test_matches_covariance_eigendecomposition():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((200, 6)) @ np.diag([5.0, 3.0, 2.0, 1.0, 0.5, 0.1])
    res = pca(x)
    cov = np.cov(x, rowvar=False, bias=True)
    evals = np.sort(np.linalg.eigvalsh(cov))[::-1]
    assert np.allclose(res.variance_ratios, evals / evals.sum(), atol=1e-12)


def test_ratios_sum_to_one_and_descend():
    rng = np.random.default_rng(1)
    res = pca(rng.standard_normal((50, 8)), k=2)
    assert res.variance_ratios.sum() == pytest.approx(1.0)
    assert np.all(np.diff(res.variance_ratios) <= 1e-15)
    assert res.variance_ratios.size == 8  # full spectrum even with k=2
    assert res.components.shape == (2, 8)


def test_components_orthonormal():
    rng = np.random.default_rng(2)
    res = pca(rng.standard_normal((40, 5)), k=5)
    assert np.allclose(res.components @ res.components.T, np.eye(5), atol=1e-10)


def test_rank_one_data():
    t = np.linspace(-1, 1, 30)[:, None]
    direction = np.array([[3.0, 4.0, 0.0]]) / 5.0
    res = pca(t @ direction)
    assert res.variance_ratios[0] == pytest.approx(1.0)
    assert abs(res.components[0] @ direction[0]) == pytest.approx(1.0)


def test_first_component_maximizes_variance():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((300, 4)) * np.array([1.0, 10.0, 2.0, 0.5])
    res = pca(x, k=1)
    proj_var = np.var((x - res.mean) @ res.components[0])
    # No random direction can beat it.
    for _ in range(20):
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        assert np.var((x - res.mean) @ v) <= proj_var + 1e-9


def test_constant_data_flat_spectrum():
    res = pca(np.ones((10, 3)))
    assert np.allclose(res.variance_ratios, 1.0 / 3.0)


def test_validation():
    with pytest.raises(InsufficientDataError):
        pca(np.ones((1, 3)))
    with pytest.raises(DimensionError):
        pca(np.ones((5, 3)), k=4)
    with pytest.raises(DimensionError):
        pca(np.ones(5))
