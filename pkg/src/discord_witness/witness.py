"""Covariance matrix ``Q`` and the determinant witness.

``Q[x, y] = <A_x (x) B_y> - <A_x><B_y>`` and ``W = det Q``. Any zero-discord
(classical-quantum) state gives ``W = 0`` for every choice of measurements,
so a non-zero value certifies discord without trusting the devices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, SettingCountMismatch, UnsupportedDimension
from .measurements import DichotomicObservable, MeasurementSet, observable_matrix
from .states import DensityMatrix, bloch_decompose, s_matrix

# analytic round-off floor; a witness counts as non-zero above 10x this
NOISE_FLOOR = 1e-9
DETECTION_FACTOR = 10.0


@dataclass(frozen=True)
class WitnessReport:
    q: np.ndarray
    w: float
    d_a: int
    d_b: int
    path: Literal["analytic", "estimated"] = "analytic"
    alice: MeasurementSet | None = field(default=None, repr=False, compare=False)
    bob: MeasurementSet | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "q": [[float(v) for v in row] for row in np.asarray(self.q)],
            "w": float(self.w),
            "d_a": int(self.d_a),
            "d_b": int(self.d_b),
            "path": self.path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "WitnessReport":
        return cls(np.array(data["q"], dtype=float), float(data["w"]),
                   int(data["d_a"]), int(data["d_b"]), data["path"])


def _check_dims(rho: DensityMatrix, a: DichotomicObservable, b: DichotomicObservable) -> None:
    if a.d != rho.d_a or b.d != rho.d_b:
        raise DimensionMismatch(
            f"observables act on ({a.d}, {b.d}) but the state is {rho.d_a}x{rho.d_b}")


def expectations(rho: DensityMatrix, a: DichotomicObservable,
                 b: DichotomicObservable) -> tuple[float, float, float]:
    """Return ``(<A (x) B>, <A>, <B>)`` on ``rho``."""
    _check_dims(rho, a, b)
    am = observable_matrix(a)
    bm = observable_matrix(b)
    joint = np.trace(rho.matrix @ linalg.kron(am, bm))
    ma = np.trace(rho.reduced("A") @ am)
    mb = np.trace(rho.reduced("B") @ bm)
    return float(joint.real), float(ma.real), float(mb.real)


def q_value(rho: DensityMatrix, a: DichotomicObservable, b: DichotomicObservable) -> float:
    joint, ma, mb = expectations(rho, a, b)
    return joint - ma * mb


def q_matrix(rho: DensityMatrix, alice: MeasurementSet, bob: MeasurementSet) -> np.ndarray:
    if len(alice) != len(bob):
        raise SettingCountMismatch(f"Alice has {len(alice)} settings, Bob has {len(bob)}")
    return np.array([[q_value(rho, ax, by) for by in bob] for ax in alice])


def witness_value(rho: DensityMatrix, alice: MeasurementSet, bob: MeasurementSet) -> WitnessReport:
    """Evaluate ``Q`` and ``W = det Q`` exactly from the state."""
    q = q_matrix(rho, alice, bob)
    return WitnessReport(q, linalg.determinant(q), rho.d_a, rho.d_b, "analytic", alice, bob)


def bloch_scale(d_a: int, d_b: int) -> float:
    """Prefactor turning ``A^T s_hat B`` into ``Q`` (equal to 1 for qubits)."""
    return float((d_a - 1) * (d_b - 1))


def q_from_bloch(s_hat, alice_blochs: Sequence, bob_blochs: Sequence, d_a: int, d_b: int) -> np.ndarray:
    s_hat = np.asarray(s_hat, dtype=float)
    a = np.column_stack([np.asarray(v, dtype=float) for v in alice_blochs])
    b = np.column_stack([np.asarray(v, dtype=float) for v in bob_blochs])
    if a.shape[0] != s_hat.shape[0] or b.shape[0] != s_hat.shape[1]:
        raise DimensionMismatch(
            f"bloch lengths ({a.shape[0]}, {b.shape[0]}) do not fit s_hat {s_hat.shape}")
    if a.shape[1] != b.shape[1]:
        raise SettingCountMismatch("Alice and Bob need the same number of settings")
    return bloch_scale(d_a, d_b) * (a.T @ s_hat @ b)


def witness_from_bloch(s_hat, alice_blochs: Sequence, bob_blochs: Sequence,
                       d_a: int = 2, d_b: int = 2) -> float:
    """Witness computed from ``s_hat`` and Bloch vectors alone."""
    return linalg.determinant(q_from_bloch(s_hat, alice_blochs, bob_blochs, d_a, d_b))


def cross_product_witness(s_hat, a0, a1, b0, b1) -> float:
    """Two-qubit triple-product form ``(A0 x A1) . (S B0 x S B1)``."""
    s_hat = np.asarray(s_hat, dtype=float)
    return float(np.dot(np.cross(a0, a1), np.cross(s_hat @ b0, s_hat @ b1)))


def _require_two_qubits(rho: DensityMatrix) -> None:
    if (rho.d_a, rho.d_b) != (2, 2):
        raise UnsupportedDimension(f"two-qubit state required, got {rho.d_a}x{rho.d_b}")


def max_witness_bound(rho: DensityMatrix) -> float:
    """Product of the two largest singular values of ``s_hat``."""
    _require_two_qubits(rho)
    k = linalg.svd(s_matrix(bloch_decompose(rho)))[1]
    return float(k[0] * k[1])


def geometric_discord_2q(rho: DensityMatrix) -> float:
    """Closed-form two-qubit geometric discord (measurement on Alice).

    Used only as an independent zero / non-zero oracle. Its normalization is
    ``(|s_a|^2 + ||T||_F^2 - lambda_max(s_a s_a^T + T T^T)) / 4``, which
    gives ``p^2 / 2`` for a Werner state.
    """
    _require_two_qubits(rho)
    b = bloch_decompose(rho)
    s_a = np.asarray(b.s_a)
    t = np.asarray(b.t)
    k = np.outer(s_a, s_a) + t @ t.T
    lam = linalg.hermitian_eigen(k)[0][0]
    return max(0.0, float(s_a @ s_a + np.sum(t * t) - lam) / 4.0)


def detects_discord(report: WitnessReport, sigma: float | None = None) -> bool:
    """Non-zero verdict: ``|w|`` above ten times the noise floor.

    The analytic floor is ``NOISE_FLOOR``; for estimated reports pass the
    bootstrap standard deviation as ``sigma``.
    """
    floor = NOISE_FLOOR if report.path == "analytic" or sigma is None else max(sigma, NOISE_FLOOR)
    return abs(report.w) > DETECTION_FACTOR * floor
