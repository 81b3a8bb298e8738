"""Uncharacterized two-outcome measurements.

A dichotomic observable on a ``d``-level system is

    A = a I + sqrt(d (d-1)) (bloch . tau)

over the normalized Gell-Mann generators ``tau``. For a qubit this is the
familiar ``a I + bloch . sigma``. Outcome ``0`` (``+1``) has POVM element
``(I + A)/2``; outcome ``1`` has ``(I - A)/2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidObservable, NotUnit, OutOfRange, UnsupportedDimension
from .linalg import EQ_TOL, PSD_TOL
from .states import HermitianBasis, gell_mann_basis

Side = Literal["A", "B"]


@dataclass(frozen=True)
class DichotomicObservable:
    """Identity coefficient ``a`` plus Bloch vector ``bloch`` of length ``d*d - 1``.

    Construction only checks shapes; physical admissibility is reported by
    :func:`validate` and enforced where observables enter a
    :class:`MeasurementSet`.
    """

    d: int
    a: float
    bloch: tuple = field()

    def __post_init__(self):
        vec = tuple(float(x) for x in np.ravel(self.bloch))
        if len(vec) != self.d * self.d - 1:
            raise DimensionMismatch(
                f"bloch vector for d={self.d} needs {self.d * self.d - 1} entries, got {len(vec)}")
        if not np.all(np.isfinite(vec)) or not np.isfinite(self.a):
            raise InvalidObservable("observable parameters must be finite")
        object.__setattr__(self, "bloch", vec)
        object.__setattr__(self, "a", float(self.a))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.bloch)

    def matrix(self, basis: HermitianBasis | None = None) -> np.ndarray:
        return observable_matrix(self, basis)

    def with_offset(self, a: float) -> "DichotomicObservable":
        return replace(self, a=a)


@dataclass(frozen=True)
class ValidationReport:
    norm_constraint: bool
    spectral: bool
    eigenvalues: tuple
    bloch_norm: float

    @property
    def accepted(self) -> bool:
        return self.spectral

    @property
    def flagged(self) -> bool:
        """Spectrally fine but outside the sufficient norm constraint."""
        return self.spectral and not self.norm_constraint


@dataclass(frozen=True)
class MeasurementSet:
    """The observables one party may choose between, indexed by setting."""

    side: Side
    observables: tuple

    def __post_init__(self):
        obs = tuple(self.observables)
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', not {self.side!r}")
        if not obs:
            raise DimensionMismatch("a measurement set needs at least one setting")
        if len({o.d for o in obs}) != 1:
            raise DimensionMismatch("all observables in a set must share d")
        for i, o in enumerate(obs):
            rep = validate(o)
            if not rep.accepted:
                raise InvalidObservable(
                    f"setting {i} on side {self.side} is not a valid POVM "
                    f"(eigenvalues {np.round(rep.eigenvalues, 6).tolist()})")
        object.__setattr__(self, "observables", obs)

    @property
    def d(self) -> int:
        return self.observables[0].d

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, i) -> DichotomicObservable:
        return self.observables[i]

    def blochs(self) -> np.ndarray:
        """Bloch vectors as columns, shape ``(d*d - 1, settings)``."""
        return np.column_stack([o.vector for o in self.observables])


def observable_matrix(o: DichotomicObservable, basis: HermitianBasis | None = None) -> np.ndarray:
    basis = basis or gell_mann_basis(o.d)
    if basis.d != o.d:
        raise DimensionMismatch(f"basis has d={basis.d}, observable has d={o.d}")
    gen = np.tensordot(o.vector, basis.traceless(), axes=1)
    return o.a * np.eye(o.d) + np.sqrt(o.d * (o.d - 1)) * gen


def observable_from_matrix(m, basis: HermitianBasis | None = None) -> DichotomicObservable:
    """Coordinates of a Hermitian operator in the observable parametrization."""
    m = np.asarray(m, dtype=complex)
    d = m.shape[0]
    if not linalg.is_hermitian(m):
        raise InvalidObservable("observable matrix must be Hermitian")
    basis = basis or gell_mann_basis(d)
    a = float(np.real(np.trace(m))) / d
    coords = np.real(np.einsum("ij,kji->k", m, basis.traceless()))
    return DichotomicObservable(d, a, coords / np.sqrt(d * (d - 1)))


def validate(o: DichotomicObservable) -> ValidationReport:
    """Check an observable against the norm bound and the spectral condition.

    The norm bound ``|a| + (d-1)|bloch| <= 1`` is sufficient for the POVM
    elements ``(I +- A)/2`` to be positive but not necessary when ``d > 2``,
    so only the spectral test decides acceptance.
    """
    norm = float(np.linalg.norm(o.vector))
    norm_ok = abs(o.a) + (o.d - 1) * norm <= 1.0 + EQ_TOL
    evals = linalg.hermitian_eigen(observable_matrix(o))[0]
    spectral = bool(evals[0] <= 1.0 + PSD_TOL and evals[-1] >= -1.0 - PSD_TOL)
    return ValidationReport(norm_ok, spectral, tuple(float(e) for e in evals), norm)


def apply_efficiency(o: DichotomicObservable, alpha: float) -> DichotomicObservable:
    """Fold a detection efficiency into the observable: bloch scales, ``a`` stays."""
    if not 0.0 <= alpha <= 1.0:
        raise OutOfRange(f"efficiency must lie in [0, 1], got {alpha}")
    return DichotomicObservable(o.d, o.a, tuple(alpha * x for x in o.bloch))


def projective_from_direction(direction: Sequence[float], d: int | None = None) -> DichotomicObservable:
    """Observable with ``a = 0`` and unit Bloch vector along ``direction``."""
    v = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise NotUnit(f"direction has norm {np.linalg.norm(v):.12g}, expected 1")
    if d is None:
        d = int(round(np.sqrt(v.size + 1)))
    return DichotomicObservable(d, 0.0, tuple(v))


def rotate_observable(o: DichotomicObservable, u) -> DichotomicObservable:
    """The observable ``u A u^dagger`` for a local unitary ``u``."""
    u = np.asarray(u, dtype=complex)
    m = u @ observable_matrix(o) @ u.conj().T
    return observable_from_matrix(0.5 * (m + m.conj().T))


def random_observable(d: int, rng: np.random.Generator) -> DichotomicObservable:
    """A random spectrally valid observable.

    Direction is uniform on the sphere, the length is drawn uniformly up to
    the largest value keeping the spectrum width within 2 (and the norm
    within 1), and ``a`` is uniform over its admissible interval.
    """
    direction = rng.standard_normal(d * d - 1)
    direction /= np.linalg.norm(direction)
    unit = observable_matrix(DichotomicObservable(d, 0.0, tuple(direction)))
    ev = np.linalg.eigvalsh(unit)
    length = rng.uniform(0.0, min(1.0, 2.0 / (ev[-1] - ev[0])))
    lo, hi = -1.0 - length * ev[0], 1.0 - length * ev[-1]
    a = rng.uniform(lo, hi) if hi > lo else 0.5 * (lo + hi)
    # stay a hair inside the boundary so validation never trips on round-off
    return DichotomicObservable(d, a * (1 - 1e-12), tuple(length * (1 - 1e-12) * direction))


def random_measurement_set(d: int, settings: int, rng: np.random.Generator,
                           side: Side = "A") -> MeasurementSet:
    return MeasurementSet(side, tuple(random_observable(d, rng) for _ in range(settings)))


def pauli_set(side: Side, *axes: str) -> MeasurementSet:
    """Sharp qubit measurements along named axes, e.g. ``pauli_set("A", "x", "z")``."""
    unit = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
    return MeasurementSet(side, tuple(projective_from_direction(unit[ax], 2) for ax in axes))


def optimal_pair(s_hat) -> tuple[MeasurementSet, MeasurementSet, float]:
    """Witness-maximizing qubit measurements for a given ``s_hat``.

    Alice measures along the two leading left singular vectors of ``s_hat``
    and Bob along the two leading right singular vectors, which makes the
    covariance matrix ``diag(k1, k2)`` and the witness ``k1 * k2``.
    """
    s_hat = np.asarray(s_hat, dtype=float)
    if s_hat.shape != (3, 3):
        raise UnsupportedDimension("optimal measurements are only available for two qubits")
    u, k, v = linalg.svd(s_hat)
    alice = [u[:, 0], u[:, 1]]
    bob = [v[:, 0], v[:, 1]]
    q = np.array([[alice[x] @ s_hat @ bob[y] for y in range(2)] for x in range(2)])
    if linalg.determinant(q) < 0:
        bob[1] = -bob[1]
    a_set = MeasurementSet("A", tuple(projective_from_direction(x / np.linalg.norm(x), 2) for x in alice))
    b_set = MeasurementSet("B", tuple(projective_from_direction(y / np.linalg.norm(y), 2) for y in bob))
    return a_set, b_set, float(k[0] * k[1])


# -- measurement file format -------------------------------------------------

def measurements_to_dict(m: MeasurementSet) -> dict:
    return {"d": m.d, "settings": [{"a": o.a, "bloch": list(o.bloch)} for o in m]}


def measurements_from_dict(data: dict, side: Side = "A") -> MeasurementSet:
    try:
        d = int(data["d"])
        obs = tuple(DichotomicObservable(d, float(s["a"]), tuple(s["bloch"])) for s in data["settings"])
    except (KeyError, TypeError) as exc:
        raise InvalidObservable(f"malformed measurement file: {exc}") from exc
    return MeasurementSet(side, obs)


def write_measurements(m: MeasurementSet, path) -> None:
    Path(path).write_text(json.dumps(measurements_to_dict(m)) + "\n", encoding="utf-8")


def read_measurements(path, side: Side = "A") -> MeasurementSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidObservable(f"malformed measurement file: {exc}") from exc
    return measurements_from_dict(data, side)
