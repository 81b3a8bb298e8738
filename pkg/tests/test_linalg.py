import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from discord_witness import linalg
from discord_witness.errors import DimensionMismatch, NotHermitian
from discord_witness.states import PAULI_X, PAULI_Z, SINGLET


def cofactor_det(m):
    m = [list(r) for r in m]
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor_det(minor)
    return total


def loop_partial_trace_a(rho, d_a, d_b):
    out = np.zeros((d_a, d_a), dtype=complex)
    for i in range(d_a):
        for k in range(d_a):
            for j in range(d_b):
                out[i, k] += rho[i * d_b + j, k * d_b + j]
    return out


def random_hermitian(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


# -- kron ---------------------------------------------------------------------

def test_kron_identity():
    assert np.array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_zz_diagonal():
    assert np.array_equal(linalg.kron(PAULI_Z, PAULI_Z), np.diag([1, -1, -1, 1]))


def test_kron_xx_flips_singlet_sign():
    # explicit 4x4 sigma_x (x) sigma_x: |ij> -> |1-i, 1-j>
    xx = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            xx[(1 - i) * 2 + (1 - j), i * 2 + j] = 1
    assert np.array_equal(linalg.kron(PAULI_X, PAULI_X), xx)
    assert np.allclose(xx @ SINGLET, -SINGLET, atol=1e-15)


def test_kron_blocks(rng):
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((3, 2)) + 1j
    k = linalg.kron(a, b)
    assert k.shape == (6, 6)
    for i in range(2):
        for j in range(3):
            assert np.allclose(k[3 * i:3 * i + 3, 2 * j:2 * j + 2], a[i, j] * b)


def test_kron_rejects_nonfinite():
    with pytest.raises(ValueError):
        linalg.kron(np.array([[np.nan]]), np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kron_associative_bilinear(seed):
    rng = np.random.default_rng(seed)
    a, b, c, b2 = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
    s = complex(*rng.standard_normal(2))
    assert np.allclose(linalg.kron(linalg.kron(a, b), c), linalg.kron(a, linalg.kron(b, c)), atol=1e-12)
    assert np.allclose(linalg.kron(a, s * b + b2), s * linalg.kron(a, b) + linalg.kron(a, b2), atol=1e-12)


# -- hermitian_eigen ------------------------------------------------------------

def test_eigen_pauli_z():
    vals, _ = linalg.hermitian_eigen(PAULI_Z)
    assert np.allclose(vals, [1, -1])


def test_eigen_pauli_x():
    vals, vecs = linalg.hermitian_eigen(PAULI_X)
    assert np.allclose(vals, [1, -1])
    for v, ref in zip(vecs.T, [np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)]):
        assert abs(abs(np.vdot(ref, v)) - 1) < 1e-12


def test_eigen_round_trip(rng):
    h = random_hermitian(6, rng)
    vals, v = linalg.hermitian_eigen(h)
    assert np.all(np.diff(vals) <= 0)
    assert np.max(np.abs(v @ np.diag(vals) @ v.conj().T - h)) < 1e-10
    assert np.max(np.abs(v.conj().T @ v - np.eye(6))) < 1e-10
    assert abs(vals.sum() - np.trace(h).real) < 1e-10


def test_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        linalg.hermitian_eigen(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitian):
        linalg.hermitian_eigen(np.ones((2, 3)))


def test_eigen_degenerate_basis_is_canonical(rng):
    # the same degenerate operator assembled from two different bases of its
    # eigenspaces must yield the same eigenvectors
    w, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    r1, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    r2, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    mix = np.zeros((4, 4), dtype=complex)
    mix[:2, :2], mix[2:, 2:] = r1, r2
    w2 = w @ mix
    d = np.diag([2.0, 2.0, 1.0, 1.0])
    v1 = linalg.hermitian_eigen(w @ d @ w.conj().T)[1]
    v2 = linalg.hermitian_eigen(w2 @ d @ w2.conj().T)[1]
    assert np.max(np.abs(v1 - v2)) < 1e-10


# -- svd -------------------------------------------------------------------------

def test_svd_werner_like():
    u, s, v = linalg.svd(np.diag([-0.3, -0.3, -0.3]))
    assert np.allclose(s, [0.3, 0.3, 0.3])
    assert np.allclose(u @ np.diag(s) @ v.T, np.diag([-0.3] * 3), atol=1e-15)
    # canonical: right vectors are the standard basis
    assert np.allclose(v, np.eye(3))


def test_svd_rank_one(rng):
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    s = linalg.svd(np.outer(a, b))[1]
    assert abs(s[0] - np.linalg.norm(a) * np.linalg.norm(b)) < 1e-12
    assert np.all(s[1:] < 1e-12)


@pytest.mark.parametrize("shape", [(3, 3), (8, 3), (3, 8), (8, 8)])
def test_svd_round_trip(rng, shape):
    m = rng.standard_normal(shape)
    u, s, v = linalg.svd(m)
    k = min(shape)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    assert np.max(np.abs(u[:, :k] @ np.diag(s) @ v[:, :k].T - m)) < 1e-10
    assert np.max(np.abs(u.T @ u - np.eye(shape[0]))) < 1e-10
    assert np.max(np.abs(v.T @ v - np.eye(shape[1]))) < 1e-10


def test_svd_degenerate_invariant_to_input_rotation():
    # s_hat of a Werner state conjugated by rotations that fix it: results identical
    m = np.diag([-0.5, -0.5, -0.5])
    r = ortho_group.rvs(3, random_state=3)
    u1, s1, v1 = linalg.svd(m)
    u2, s2, v2 = linalg.svd(r @ m @ r.T)
    assert np.allclose(s1, s2)
    assert np.allclose(v1, v2, atol=1e-12)
    assert np.allclose(u1, u2, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_svd_orthogonal_invariance_and_det(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, 3))
    o1 = ortho_group.rvs(3, random_state=rng)
    o2 = ortho_group.rvs(3, random_state=rng)
    u, s, v = linalg.svd(m)
    assert np.allclose(linalg.svd(o1 @ m @ o2)[1], s, atol=1e-9)
    det = linalg.determinant(m)
    via_svd = np.prod(s) * np.sign(np.linalg.det(u)) * np.sign(np.linalg.det(v))
    assert abs(det - via_svd) <= 1e-9 * max(1.0, abs(det))


# -- partial trace --------------------------------------------------------------

def test_partial_trace_product(rng):
    ra = np.diag([0.7, 0.3]).astype(complex)
    rb = np.array([[0.5, 0.2j], [-0.2j, 0.5]])
    rho = np.kron(ra, rb)
    assert np.allclose(linalg.partial_trace(rho, 2, 2, "A"), ra)
    assert np.allclose(linalg.partial_trace(rho, 2, 2, "B"), rb)


def test_partial_trace_singlet():
    rho = np.outer(SINGLET, SINGLET.conj())
    assert np.allclose(linalg.partial_trace(rho, 2, 2, "A"), np.eye(2) / 2, atol=1e-15)
    assert np.allclose(loop_partial_trace_a(rho, 2, 2), np.eye(2) / 2, atol=1e-15)


@pytest.mark.parametrize("d_a,d_b", [(2, 3), (3, 2), (4, 3)])
def test_partial_trace_matches_loop_and_preserves_trace(rng, d_a, d_b):
    n = d_a * d_b
    rho = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    pa = linalg.partial_trace(rho, d_a, d_b, "A")
    assert np.allclose(pa, loop_partial_trace_a(rho, d_a, d_b), atol=1e-12)
    assert abs(np.trace(pa) - np.trace(rho)) < 1e-12
    assert abs(np.trace(linalg.partial_trace(rho, d_a, d_b, "B")) - np.trace(rho)) < 1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.partial_trace(np.eye(4), 2, 3)


# -- determinant -----------------------------------------------------------------

def test_det_small_diagonal():
    assert linalg.determinant([[-1, 0], [0, -1]]) == 1.0


def test_det_repeated_row_is_exact_zero(rng):
    m = rng.standard_normal((4, 4))
    m[2] = m[0]
    assert linalg.determinant(m) == 0.0


def test_det_zero_matrix():
    assert linalg.determinant(np.zeros((3, 3))) == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_det_vs_cofactor(seed):
    m = np.random.default_rng(seed).standard_normal((4, 4))
    ref = cofactor_det(m.tolist())
    assert abs(linalg.determinant(m) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_det_requires_square():
    with pytest.raises(DimensionMismatch):
        linalg.determinant(np.ones((2, 3)))
