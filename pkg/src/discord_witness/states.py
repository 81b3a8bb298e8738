"""Bipartite density matrices and their Bloch / Gell-Mann coordinates.

Coordinates follow the orthonormal-basis expansion

    rho = (tau_1 (x) ups_1 + sqrt(d_a-1) s_a.tau (x) ups_1
           + sqrt(d_b-1) tau_1 (x) s_b.ups
           + sqrt((d_a-1)(d_b-1)) tau^T T ups) / sqrt(d_a d_b)

with ``tau_1 = I/sqrt(d)``. For two qubits (``tau_i = sigma_i/sqrt(2)``) the
prefactors cancel and ``s_a``, ``s_b``, ``T`` are exactly the usual Pauli
coordinates ``Tr[rho_A sigma_i]`` and ``Tr[rho sigma_i (x) sigma_j]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    InvalidDimension,
    InvalidProbabilities,
    InvalidRank,
    InvalidState,
    OutOfRange,
)
from .linalg import HERM_TOL, PSD_TOL

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """A validated ``d_a x d_b`` bipartite density matrix.

    Construction checks shape, Hermiticity, positivity and unit trace and
    raises :class:`InvalidState` naming every invariant that failed.
    """

    d_a: int
    d_b: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.d_a < 1 or self.d_b < 1:
            raise InvalidDimension("subsystem dimensions must be positive")
        m = np.asarray(self.matrix, dtype=complex)
        n = self.d_a * self.d_b
        if m.shape != (n, n):
            raise InvalidState(["shape"], f"expected {n}x{n}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidState(["finite"])
        failed = []
        if not linalg.is_hermitian(m, HERM_TOL):
            failed.append("hermitian")
        else:
            evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            if evals.min() < -PSD_TOL:
                failed.append("positive_semidefinite")
        if abs(np.trace(m) - 1.0) > HERM_TOL:
            failed.append("unit_trace")
        if failed:
            raise InvalidState(failed)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.d_a * self.d_b

    def reduced(self, keep: str) -> np.ndarray:
        return linalg.partial_trace(self.matrix, self.d_a, self.d_b, keep)

    def eigenvalues(self) -> np.ndarray:
        return linalg.hermitian_eigen(self.matrix)[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def transform(self, u) -> "DensityMatrix":
        """Return ``u rho u^dagger`` (``u`` acting on the joint space)."""
        u = np.asarray(u, dtype=complex)
        return DensityMatrix(self.d_a, self.d_b, u @ self.matrix @ u.conj().T)


@dataclass(frozen=True)
class HermitianBasis:
    """Hilbert-Schmidt orthonormal Hermitian basis with ``operators[0] = I/sqrt(d)``."""

    d: int
    operators: tuple = field(repr=False)

    def stacked(self) -> np.ndarray:
        """All operators as one ``(d*d, d, d)`` array."""
        return np.stack(self.operators)

    def traceless(self) -> np.ndarray:
        """The ``d*d - 1`` traceless generators as a ``(d*d-1, d, d)`` array."""
        return np.stack(self.operators[1:])


@dataclass(frozen=True)
class BlochData:
    """Local Bloch vectors, correlation tensor and ``s_hat = t - s_a s_b^T``."""

    s_a: np.ndarray
    s_b: np.ndarray
    t: np.ndarray
    s_hat: np.ndarray
    d_a: int
    d_b: int


_BASIS_CACHE: dict[int, HermitianBasis] = {}


def gell_mann_basis(d: int) -> HermitianBasis:
    """Normalized generalized Gell-Mann basis of dimension ``d``.

    Order: ``I/sqrt(d)``, then symmetric ``(j, k)`` with ``j < k``
    (lexicographic), then antisymmetric in the same order, then the
    diagonal ones by increasing size. Every element satisfies
    ``Tr[tau_i tau_j] = delta_ij``.
    """
    if int(d) != d or d < 2:
        raise InvalidDimension(f"basis dimension must be an integer >= 2, got {d}")
    d = int(d)
    if d in _BASIS_CACHE:
        return _BASIS_CACHE[d]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    ops = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        ops.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        ops.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        ops.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    basis = HermitianBasis(d, tuple(_frozen(o) for o in ops))
    _BASIS_CACHE[d] = basis
    return basis


def pure_state(psi, d_a: int, d_b: int) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(d_a, d_b, np.outer(psi, psi.conj()))


def product_state(rho_a, rho_b) -> DensityMatrix:
    rho_a = np.asarray(rho_a, dtype=complex)
    rho_b = np.asarray(rho_b, dtype=complex)
    return DensityMatrix(rho_a.shape[0], rho_b.shape[0], linalg.kron(rho_a, rho_b))


def werner(p: float) -> DensityMatrix:
    """Two-qubit Werner state ``p |psi-><psi-| + (1-p) I/4``."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"Werner weight must lie in [0, 1], got {p}")
    singlet = np.outer(SINGLET, SINGLET.conj())
    return DensityMatrix(2, 2, p * singlet + (1 - p) * np.eye(4) / 4)


def classical_quantum(probs: Sequence[float], local_states, alice_basis=None) -> DensityMatrix:
    """Zero-discord state ``sum_i p_i |i><i| (x) rho_i``.

    Parameters
    ----------
    probs : sequence of float
        Mixture weights, one per Alice basis vector.
    local_states : sequence
        Bob's conditional states, as :class:`DensityMatrix` (with ``d_a = 1``)
        or plain square arrays.
    alice_basis : array_like, optional
        Unitary whose columns are ``|i>``. Defaults to the computational basis.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise InvalidProbabilities("probabilities must be non-negative and sum to 1")
    d_a = probs.size
    mats = [np.asarray(s.matrix if isinstance(s, DensityMatrix) else s, dtype=complex)
            for s in local_states]
    if len(mats) != d_a:
        raise DimensionMismatch(f"{d_a} probabilities but {len(mats)} local states")
    d_b = mats[0].shape[0]
    if any(m.shape != (d_b, d_b) for m in mats):
        raise DimensionMismatch("local states must share one dimension")
    u = np.eye(d_a, dtype=complex) if alice_basis is None else np.asarray(alice_basis, dtype=complex)
    if u.shape != (d_a, d_a):
        raise DimensionMismatch(f"alice_basis must be {d_a}x{d_a}")
    if not np.allclose(u.conj().T @ u, np.eye(d_a), atol=1e-10):
        raise DimensionMismatch("alice_basis is not unitary")
    rho = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for i in range(d_a):
        ket = u[:, i]
        rho += probs[i] * linalg.kron(np.outer(ket, ket.conj()), mats[i])
    return DensityMatrix(d_a, d_b, rho)


def _coefficients(rho: DensityMatrix, basis_a: HermitianBasis, basis_b: HermitianBasis) -> np.ndarray:
    """``c[i, j] = Tr[rho (tau_i (x) ups_j)]`` for every basis pair."""
    r = rho.matrix.reshape(rho.d_a, rho.d_b, rho.d_a, rho.d_b)
    c = np.einsum("abcd,ica,jdb->ij", r, basis_a.stacked(), basis_b.stacked())
    return np.real(c)


def bloch_decompose(rho: DensityMatrix, basis_a: HermitianBasis | None = None,
                    basis_b: HermitianBasis | None = None) -> BlochData:
    """Read ``s_a``, ``s_b`` and ``T`` off a state by Hilbert-Schmidt projection."""
    if rho.d_a < 2 or rho.d_b < 2:
        raise DimensionMismatch("both subsystems need dimension >= 2")
    basis_a = basis_a or gell_mann_basis(rho.d_a)
    basis_b = basis_b or gell_mann_basis(rho.d_b)
    if basis_a.d != rho.d_a or basis_b.d != rho.d_b:
        raise DimensionMismatch("basis dimensions do not match the state")
    d_a, d_b = rho.d_a, rho.d_b
    c = _coefficients(rho, basis_a, basis_b)
    root = np.sqrt(d_a * d_b)
    s_a = root * c[1:, 0] / np.sqrt(d_a - 1)
    s_b = root * c[0, 1:] / np.sqrt(d_b - 1)
    t = root * c[1:, 1:] / np.sqrt((d_a - 1) * (d_b - 1))
    return BlochData(_frozen(s_a), _frozen(s_b), _frozen(t),
                     _frozen(t - np.outer(s_a, s_b)), d_a, d_b)


def reconstruct(b: BlochData, basis_a: HermitianBasis | None = None,
                basis_b: HermitianBasis | None = None) -> np.ndarray:
    """Inverse of :func:`bloch_decompose`; returns the raw matrix."""
    basis_a = basis_a or gell_mann_basis(b.d_a)
    basis_b = basis_b or gell_mann_basis(b.d_b)
    d_a, d_b = b.d_a, b.d_b
    coef = np.zeros((d_a * d_a, d_b * d_b))
    coef[0, 0] = 1.0
    coef[1:, 0] = np.sqrt(d_a - 1) * b.s_a
    coef[0, 1:] = np.sqrt(d_b - 1) * b.s_b
    coef[1:, 1:] = np.sqrt((d_a - 1) * (d_b - 1)) * b.t
    ta = basis_a.stacked()
    ub = basis_b.stacked()
    rho = np.einsum("ij,iac,jbd->abcd", coef, ta, ub).reshape(d_a * d_b, d_a * d_b)
    return rho / np.sqrt(d_a * d_b)


def s_matrix(b: BlochData) -> np.ndarray:
    return np.asarray(b.t) - np.outer(b.s_a, b.s_b)


def bloch_norm(rho_local) -> float:
    """Bloch-vector length of a single-system state from its purity alone."""
    rho_local = np.asarray(rho_local, dtype=complex)
    d = rho_local.shape[0]
    purity = float(np.real(np.trace(rho_local @ rho_local)))
    return float(np.sqrt(max(d * purity - 1.0, 0.0) / (d - 1)))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d_a: int, d_b: int, rank: int | None = None, seed: int = 0) -> DensityMatrix:
    """Ginibre-induced random state ``G G^dagger / Tr[G G^dagger]``.

    ``G`` is a seeded complex Gaussian ``(d_a d_b) x rank`` matrix; the same
    seed always gives the same matrix.
    """
    n = d_a * d_b
    rank = n if rank is None else rank
    if int(rank) != rank or not 1 <= rank <= n:
        raise InvalidRank(f"rank must lie in [1, {n}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, int(rank))) + 1j * rng.standard_normal((n, int(rank)))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(d_a, d_b, m / np.real(np.trace(m)))


def random_local_state(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))


def random_classical_quantum(d_a: int, d_b: int, rng: np.random.Generator,
                             random_basis: bool = True) -> DensityMatrix:
    """Random zero-discord state with Dirichlet weights and Ginibre local states."""
    probs = rng.dirichlet(np.ones(d_a))
    probs = probs / probs.sum()
    locals_ = [random_local_state(d_b, rng) for _ in range(d_a)]
    basis = random_unitary(d_a, rng) if random_basis else None
    return classical_quantum(probs, locals_, basis)


# -- state file format -------------------------------------------------------

def state_to_dict(rho: DensityMatrix) -> dict:
    return {
        "d_a": rho.d_a,
        "d_b": rho.d_b,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho.matrix],
    }


def state_from_dict(data: dict) -> DensityMatrix:
    try:
        d_a = int(data["d_a"])
        d_b = int(data["d_b"])
        m = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidState(["format"], str(exc)) from exc
    return DensityMatrix(d_a, d_b, m)


def write_state(rho: DensityMatrix, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho)) + "\n", encoding="utf-8")


def read_state(path) -> DensityMatrix:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidState(["format"], str(exc)) from exc
    return state_from_dict(data)
