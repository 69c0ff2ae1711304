import numpy as np
import pytest

from miptlab.linalg import (
    as_square_complex,
    hermitian_eigensystem,
    hermitian_eigenvalues,
    unitarity_defect,
)


def random_hermitian(dim, rng, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (a + a.conj().T) / 2.0


def cubic_roots_hermitian_3x3(h):
    """Independent oracle: eigenvalues of a 3x3 Hermitian via Cardano.

    Characteristic polynomial x^3 - c2 x^2 + c1 x - c0 built from trace
    invariants, solved by the trigonometric method (all roots real).
    """
    c2 = np.trace(h).real
    c1 = 0.5 * (np.trace(h).real ** 2 - np.trace(h @ h).real)
    c0 = np.linalg.det(h).real
    # depressed cubic t^3 + p t + q with x = t + c2/3
    p = c1 - c2**2 / 3.0
    q = -2.0 * c2**3 / 27.0 + c2 * c1 / 3.0 - c0
    m = 2.0 * np.sqrt(-p / 3.0)
    theta = np.arccos(np.clip(3.0 * q / (p * m), -1.0, 1.0)) / 3.0
    roots = [m * np.cos(theta - 2.0 * np.pi * k / 3.0) + c2 / 3.0 for k in range(3)]
    return np.sort(roots)


def test_identity_spectrum():
    assert np.array_equal(hermitian_eigenvalues(np.eye(4)), np.ones(4))


def test_pauli_x_spectrum():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(hermitian_eigenvalues(x), [-1.0, 1.0], atol=1e-15)


def test_random_3x3_matches_cubic_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        h = random_hermitian(3, rng)
        w = hermitian_eigenvalues(h)
        assert np.allclose(w, cubic_roots_hermitian_3x3(h), atol=1e-12)


def test_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_nonfinite_and_nonsquare():
    with pytest.raises(ValueError, match="square"):
        as_square_complex(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="finite"):
        as_square_complex(np.array([[np.nan, 0], [0, 0]]))


def test_eigenvalue_sum_equals_trace():
    rng = np.random.default_rng(3)
    for dim in (5, 32, 100):
        h = random_hermitian(dim, rng)
        w = hermitian_eigenvalues(h)
        bound = 1e-9 * dim * np.max(np.abs(h))
        assert abs(w.sum() - np.trace(h).real) < bound


def test_shift_property():
    rng = np.random.default_rng(11)
    h = random_hermitian(20, rng)
    c = rng.standard_normal()
    w = hermitian_eigenvalues(h)
    w_shifted = hermitian_eigenvalues(h + c * np.eye(20))
    assert np.allclose(w_shifted, w + c, atol=1e-12)


def test_bitwise_determinism():
    rng = np.random.default_rng(5)
    h = random_hermitian(64, rng)
    assert np.array_equal(hermitian_eigenvalues(h), hermitian_eigenvalues(h.copy()))


def test_eigensystem_reconstruction():
    rng = np.random.default_rng(13)
    h = random_hermitian(48, rng, scale=3.0)
    w, v = hermitian_eigensystem(h)
    resid = np.max(np.abs(h @ v - v * w))
    assert resid < 1e-9 * np.max(np.abs(h))


def test_unitarity_defect_trivials():
    assert unitarity_defect(np.eye(3)) == 0.0
    assert unitarity_defect(np.diag([1.0, 2.0])) == pytest.approx(3.0)
