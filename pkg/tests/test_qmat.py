import numpy as np
import pytest

from harvest_lab import qmat
from harvest_lab.qmat import DensityMatrix, HermitianOp


def bell():
    return (qmat.ket(qmat.KET0, qmat.KET0) + qmat.ket(qmat.KET1, qmat.KET1)) / np.sqrt(2)


def test_kron_examples():
    assert np.abs(qmat.kron(qmat.I2, qmat.I2) - np.eye(4)).max() < 1e-15
    assert np.abs(qmat.kron(np.diag([1, 2]), np.diag([3, 4])) - np.diag([3, 4, 6, 8])).max() < 1e-15
    out = qmat.kron(qmat.SX, qmat.SX) @ qmat.ket(qmat.KET0, qmat.KET0)
    assert np.abs(out - qmat.ket(qmat.KET1, qmat.KET1)).max() < 1e-15


def test_kron_cap():
    with pytest.raises(qmat.DimensionError):
        qmat.kron(np.eye(64), np.eye(128))
    assert qmat.kron(np.eye(2), np.eye(2), cap=4).shape == (4, 4)
    with pytest.raises(qmat.DimensionError):
        qmat.kron(np.eye(2), np.eye(4), cap=4)


def test_hermitian_validation():
    with pytest.raises(ValueError):
        HermitianOp(np.array([[0, 1], [0, 0]]))
    with pytest.raises(qmat.NumericalError):
        HermitianOp(np.array([[np.nan, 0], [0, 1]]))
    h = HermitianOp(qmat.SX)
    assert h.dim == 2
    with pytest.raises(ValueError):
        h.matrix[0, 0] = 1


def test_density_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.1, -0.1]))
    with pytest.raises(qmat.DimensionError):
        DensityMatrix(np.eye(4) / 4, (2, 3))
    # rounding-level negativity is tolerated
    DensityMatrix(np.diag([1 + 1e-13, -1e-13]))


def test_herm_eig_examples():
    w, _ = qmat.herm_eig(qmat.SZ)
    assert np.abs(w - [-1, 1]).max() < 1e-15
    w, v = qmat.herm_eig(qmat.SX)
    assert np.abs(w - [-1, 1]).max() < 1e-15
    assert qmat.equal_up_to_phase(v[:, 0], qmat.KETM)
    assert qmat.equal_up_to_phase(v[:, 1], qmat.KETP)


def test_herm_eig_reconstruction():
    rng = np.random.default_rng(3)
    h = qmat.random_hermitian(8, rng)
    w, v = qmat.herm_eig(h)
    assert np.abs(h @ v - v * w).max() < 1e-10 * np.abs(h).max()
    assert np.abs(v.conj().T @ v - np.eye(8)).max() < 1e-10


def test_herm_eig_matches_characteristic_polynomial():
    a, b, c = 0.3, 1.7, 0.4 - 0.9j
    h = np.array([[a, c], [np.conj(c), b]])
    disc = np.sqrt((a - b) ** 2 + 4 * abs(c) ** 2)
    assert np.abs(qmat.herm_eig(h)[0] - [(a + b - disc) / 2, (a + b + disc) / 2]).max() < 1e-12
    h3 = np.array([[2, 1, 0], [1, 2, 1], [0, 1, 2]], dtype=complex)
    roots = np.sort([2 - np.sqrt(2), 2, 2 + np.sqrt(2)])
    assert np.abs(qmat.herm_eig(h3)[0] - roots).max() < 1e-12


def test_unitary_from_generator():
    assert np.abs(qmat.unitary_from_generator(np.zeros((3, 3))) - np.eye(3)).max() < 1e-15
    u = qmat.unitary_from_generator(np.pi / 2 * qmat.SX)
    assert np.abs(u - (-1j) * qmat.SX).max() < 1e-12
    rng = np.random.default_rng(0)
    u = qmat.unitary_from_generator(qmat.random_hermitian(6, rng, scale=3.0))
    assert np.abs(u @ u.conj().T - np.eye(6)).max() < 1e-10


def test_partial_trace_examples():
    rng = np.random.default_rng(1)
    ra, rs = qmat.random_density(2, rng), qmat.random_density(3, rng)
    joint = DensityMatrix(np.kron(ra, rs), (2, 3))
    assert np.abs(qmat.partial_trace(joint, [0]).matrix - ra).max() < 1e-14
    assert np.abs(qmat.partial_trace(joint, 1).matrix - rs).max() < 1e-14
    b = DensityMatrix.from_ket(bell(), (2, 2))
    assert np.abs(qmat.partial_trace(b, [0]).matrix - np.eye(2) / 2).max() < 1e-15
    with pytest.raises(IndexError):
        qmat.partial_trace(b, [2])
    with pytest.raises(IndexError):
        qmat.partial_trace(b, [])


def test_partial_trace_keeps_trace():
    rng = np.random.default_rng(2)
    rho = DensityMatrix(qmat.random_density(12, rng), (2, 3, 2))
    for keep in ([0], [1], [2], [0, 2], [1, 2]):
        assert abs(np.trace(qmat.partial_trace(rho, keep).matrix) - 1) < 1e-12


def test_partial_transpose():
    b = DensityMatrix.from_ket(bell(), (2, 2))
    pt = qmat.partial_transpose(b, 1)
    assert abs(np.linalg.eigvalsh(pt)[0] + 0.5) < 1e-14
    assert np.abs(qmat.partial_transpose(DensityMatrix(np.eye(4) / 4, (2, 2)), 0) - np.eye(4) / 4).max() == 0
    rng = np.random.default_rng(5)
    rho = DensityMatrix(qmat.random_density(6, rng), (2, 3))
    pt = qmat.partial_transpose(rho, 0)
    assert np.abs(pt - pt.conj().T).max() < 1e-14
    # involution: transposing the same factor again restores the state
    t = pt.reshape(2, 3, 2, 3).transpose(2, 1, 0, 3).reshape(6, 6)
    assert np.abs(t - rho.matrix).max() < 1e-15
    with pytest.raises(IndexError):
        qmat.partial_transpose(rho, 2)


def test_product_state_transpose_keeps_spectrum():
    rng = np.random.default_rng(9)
    ra, rb = qmat.random_density(2, rng), qmat.random_density(2, rng)
    rho = DensityMatrix(np.kron(ra, rb), (2, 2))
    assert np.abs(qmat.partial_transpose(rho, 1) - np.kron(ra, rb.T)).max() < 1e-15
    assert np.abs(np.linalg.eigvalsh(rho.matrix) - np.linalg.eigvalsh(qmat.partial_transpose(rho, 1))).max() < 1e-14


def test_negativity_examples():
    assert abs(qmat.negativity(DensityMatrix.from_ket(bell(), (2, 2))) - 0.5) < 1e-14
    assert qmat.negativity(DensityMatrix(np.eye(4) / 4, (2, 2))) == 0
    psi = np.kron(bell(), qmat.KET0).reshape(2, 2, 2).transpose(0, 2, 1).ravel()  # A S B ordering
    rho = DensityMatrix.from_ket(psi, (2, 2, 2))
    assert abs(qmat.negativity(qmat.partial_trace(rho, [0, 2])) - 0.5) < 1e-14


def test_separable_mixtures_have_zero_negativity():
    rng = np.random.default_rng(11)
    for trial in range(200):
        d_b = 2 if trial % 2 else 3
        weights = rng.dirichlet(np.ones(4))
        rho = sum(w * np.kron(qmat.random_density(2, rng), qmat.random_density(d_b, rng)) for w in weights)
        assert qmat.negativity(DensityMatrix(rho, (2, d_b))) <= 1e-10


def test_equal_up_to_phase():
    a = qmat.random_unitary(3, np.random.default_rng(0))
    assert qmat.equal_up_to_phase(np.exp(0.7j) * a, a)
    assert not qmat.equal_up_to_phase(a, a.T)
    assert not qmat.equal_up_to_phase(np.eye(2), np.eye(3))
