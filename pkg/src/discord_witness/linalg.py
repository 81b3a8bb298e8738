"""Dense linear-algebra kernel.

Thin wrappers over numpy/LAPACK with the input validation, ordering and
degeneracy handling the rest of the package relies on. Eigen- and singular
vectors inside a degenerate cluster are replaced by a canonical basis of the
cluster's subspace so that downstream measurement synthesis is reproducible
regardless of what LAPACK happens to return.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

from .errors import DimensionMismatch, NotHermitian

HERM_TOL = 1e-10
PSD_TOL = 1e-10
EQ_TOL = 1e-9

# relative gap below which neighbouring eigen/singular values are one cluster
DEGEN_TOL = 1e-10
# pivots below this fraction of the largest entry count as exact zeros
PIVOT_TOL = 1e-14


def _as_finite(m, dtype=complex) -> np.ndarray:
    arr = np.asarray(m, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; block ``(i, j)`` equals ``a[i, j] * b``."""
    a = _as_finite(a)
    b = _as_finite(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatch("kron expects two 2-d matrices")
    return np.kron(a, b)


def is_hermitian(h, tol: float = HERM_TOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol)


def _clusters(values: np.ndarray, scale: float) -> list[list[int]]:
    """Group indices of a descending sequence into near-equal runs."""
    tol = DEGEN_TOL * max(1.0, scale)
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and values[groups[-1][-1]] - v <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible component is real positive."""
    mags = np.abs(v)
    idx = int(np.argmax(mags > 1e-8 * max(mags.max(), 1e-300)))
    c = v[idx]
    if np.iscomplexobj(v):
        return v * (np.conj(c) / abs(c))
    return v if c > 0 else -v


def _lex_key(v: np.ndarray) -> tuple:
    r = np.round(np.real(v), 9)
    i = np.round(np.imag(v), 9) if np.iscomplexobj(v) else np.zeros_like(r)
    return tuple(x for pair in zip(r, i) for x in pair)


def canonical_basis(block: np.ndarray) -> np.ndarray:
    """Canonical orthonormal basis of the column span of ``block``.

    The result depends only on the subspace, not on the basis it was handed
    in: columns of the orthogonal projector are Gram-Schmidt'ed in index
    order, phase-fixed, then sorted lexicographically (descending).
    """
    n, k = block.shape
    if k == 0:
        return block.copy()
    proj = block @ block.conj().T
    chosen: list[np.ndarray] = []
    for j in range(n):
        if len(chosen) == k:
            break
        v = proj[:, j].copy()
        for _ in range(2):
            for c in chosen:
                v = v - c * np.vdot(c, v)
        nv = np.linalg.norm(v)
        if nv > 1e-3:
            chosen.append(v / nv)
    if len(chosen) < k:  # pragma: no cover - impossible for orthonormal input
        raise ValueError("block columns are not orthonormal")
    chosen = [_canonical_phase(v) for v in chosen]
    chosen.sort(key=_lex_key, reverse=True)
    return np.column_stack(chosen)


def _align(block: np.ndarray) -> np.ndarray:
    """Unitary ``R`` with ``block @ R`` equal to the canonical basis."""
    target = canonical_basis(block)
    r = block.conj().T @ target
    # polar factor removes round-off so R stays exactly unitary
    w, _, zh = np.linalg.svd(r)
    return w @ zh


def hermitian_eigen(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real, sorted descending.
    eigenvectors : ndarray
        Columns are the matching orthonormal eigenvectors.

    Raises
    ------
    NotHermitian
        If ``h`` is not square or deviates from its adjoint by more than
        ``HERM_TOL`` in any entry.
    """
    h = _as_finite(h)
    if not is_hermitian(h):
        raise NotHermitian("matrix is not Hermitian within %g" % HERM_TOL)
    vals, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    scale = float(np.max(np.abs(vals), initial=0.0))
    for group in _clusters(vals, scale):
        vecs[:, group] = vecs[:, group] @ _align(vecs[:, group])
    return vals, vecs


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition of a real matrix, ``m = U diag(s) V^T``.

    ``U`` (rows x rows) and ``V`` (cols x cols) are full orthogonal matrices;
    ``s`` holds the ``min(rows, cols)`` singular values in descending order.
    Within a cluster of equal singular values the right vectors are the
    canonical basis of their span and the left vectors are rotated along so
    that ``m v_i = s_i u_i`` still holds.
    """
    m = _as_finite(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch("svd expects a 2-d matrix")
    rows, cols = m.shape
    u, s, vt = np.linalg.svd(m, full_matrices=True)
    v = vt.T.copy()
    k = min(rows, cols)
    scale = float(s[0]) if k else 0.0
    zero_tol = DEGEN_TOL * max(1.0, scale)
    groups = _clusters(s, scale)
    for group in groups:
        if s[group[0]] <= zero_tol:
            continue
        r = _align(v[:, group])
        v[:, group] = v[:, group] @ r
        u[:, group] = u[:, group] @ r
    # null spaces, including the extra columns of a rectangular matrix
    null = [i for i in range(k) if s[i] <= zero_tol]
    u_null = null + list(range(k, rows))
    v_null = null + list(range(k, cols))
    if u_null:
        u[:, u_null] = canonical_basis(u[:, u_null])
    if v_null:
        v[:, v_null] = canonical_basis(v[:, v_null])
    return u, s, v


def partial_trace(rho, d_a: int, d_b: int, keep: Literal["A", "B"] = "A") -> np.ndarray:
    """Reduced state of one subsystem of a ``d_a * d_b`` bipartite operator."""
    rho = _as_finite(rho)
    n = d_a * d_b
    if rho.shape != (n, n):
        raise DimensionMismatch(f"expected {n}x{n} matrix, got {rho.shape}")
    r = rho.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def determinant(m) -> float:
    """Determinant of a square real matrix by partial-pivot elimination.

    Returns exactly ``0.0`` once a pivot drops below ``PIVOT_TOL`` times the
    largest entry, so rank-deficient inputs give a clean zero instead of
    round-off of either sign.
    """
    a = _as_finite(m, dtype=float).copy()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("determinant needs a square matrix")
    n = a.shape[0]
    scale = float(np.max(np.abs(a), initial=0.0))
    if n == 0:
        return 1.0
    if scale == 0.0:
        return 0.0
    det = 1.0
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) < PIVOT_TOL * scale:
            return 0.0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det *= a[col, col]
        if col + 1 < n:
            factors = a[col + 1:, col] / a[col, col]
            a[col + 1:, col:] -= np.outer(factors, a[col, col:])
    return float(det)
