"""Round-by-round simulation of the witness experiment and finite-data estimation.

Each round the source emits the same state, Alice and Bob pick settings
uniformly at random, and outcomes follow the Born rule. A party whose
detector fails in a round (probability ``1 - efficiency`` for the chosen
setting) records a fair coin instead.

Randomness is counter based: round ``r`` reads the eight uniforms produced by
a Philox generator keyed on the seed at counter ``2 r``. Any block of rounds
can therefore be generated independently, and the tallies are bit-identical
for every chunking or degree of parallelism.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .errors import EmptySetting, InvalidConfig, InvalidParams, SettingCountMismatch
from .measurements import DichotomicObservable, MeasurementSet, observable_matrix
from .states import DensityMatrix
from .witness import WitnessReport

CHUNK_ROUNDS = 1 << 16
_UNIFORMS_PER_ROUND = 8  # two Philox4x64 counter steps
_COUNTER_STEPS_PER_ROUND = 2


@dataclass(frozen=True)
class ExperimentConfig:
    state: DensityMatrix
    alice: MeasurementSet
    bob: MeasurementSet
    alpha: tuple = None
    beta: tuple = None
    rounds: int = 10_000
    seed: int = 0

    def __post_init__(self):
        alpha = (1.0,) * len(self.alice) if self.alpha is None else tuple(float(x) for x in self.alpha)
        beta = (1.0,) * len(self.bob) if self.beta is None else tuple(float(x) for x in self.beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if len(alpha) != len(self.alice) or len(beta) != len(self.bob):
            raise InvalidConfig("one efficiency per setting is required on each side")
        if any(not 0.0 <= e <= 1.0 for e in alpha + beta):
            raise InvalidConfig("efficiencies must lie in [0, 1]")
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise InvalidConfig(f"rounds must be a positive integer, got {self.rounds}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidConfig(f"seed must be a non-negative integer, got {self.seed}")
        if self.alice.d != self.state.d_a or self.bob.d != self.state.d_b:
            raise InvalidConfig("measurement dimensions do not match the state")

    @property
    def settings(self) -> tuple[int, int]:
        return len(self.alice), len(self.bob)


@dataclass(frozen=True)
class TallyTable:
    """Outcome counts ``counts[x, y, a, b]``."""

    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 4 or c.shape[2:] != (2, 2):
            raise InvalidParams(f"tally counts need shape (n_a, n_b, 2, 2), got {c.shape}")
        if np.any(c < 0):
            raise InvalidParams("tally counts must be non-negative")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def settings(self) -> tuple[int, int]:
        return self.counts.shape[0], self.counts.shape[1]

    @property
    def rounds_per_setting(self) -> np.ndarray:
        return self.counts.sum(axis=(2, 3))

    @property
    def total_rounds(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        """Empirical ``p(a, b | x, y)``; settings without rounds give NaN."""
        n = self.rounds_per_setting[..., None, None].astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.counts / n

    def to_dict(self) -> dict:
        n_a, n_b = self.settings
        return {
            "settings": [n_a, n_b],
            "counts": {f"{x},{y}": self.counts[x, y].tolist()
                       for x in range(n_a) for y in range(n_b)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TallyTable":
        try:
            n_a, n_b = (int(v) for v in data["settings"])
            counts = np.zeros((n_a, n_b, 2, 2), dtype=np.int64)
            for key, table in data["counts"].items():
                x, y = (int(v) for v in key.split(","))
                counts[x, y] = np.asarray(table, dtype=np.int64).reshape(2, 2)
        except (KeyError, ValueError, TypeError, IndexError) as exc:
            raise InvalidParams(f"malformed tally file: {exc}") from exc
        return cls(counts)


def write_tally(t: TallyTable, path) -> None:
    Path(path).write_text(json.dumps(t.to_dict()) + "\n", encoding="utf-8")


def read_tally(path) -> TallyTable:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidParams(f"malformed tally file: {exc}") from exc
    return TallyTable.from_dict(data)


def _philox_key(seed: int) -> int:
    words = np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)
    return int(words[0]) | (int(words[1]) << 64)


def round_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniforms for rounds ``start .. stop-1``, shape ``(stop - start, 8)``."""
    bitgen = np.random.Philox(key=_philox_key(seed), counter=_COUNTER_STEPS_PER_ROUND * start)
    return np.random.Generator(bitgen).random((stop - start, _UNIFORMS_PER_ROUND))


def born_tables(state: DensityMatrix, alice: MeasurementSet, bob: MeasurementSet):
    """Ideal-detector outcome probabilities.

    Returns ``joint[x, y, a, b]``, ``marg_a[x, a]`` and ``marg_b[y, b]``.
    """
    def effects(obs: DichotomicObservable):
        m = observable_matrix(obs)
        eye = np.eye(obs.d)
        return (eye + m) / 2, (eye - m) / 2

    ea = [effects(o) for o in alice]
    eb = [effects(o) for o in bob]
    rho = state.matrix
    rho_a, rho_b = state.reduced("A"), state.reduced("B")
    joint = np.empty((len(alice), len(bob), 2, 2))
    for x, ex in enumerate(ea):
        for y, fy in enumerate(eb):
            for a in range(2):
                for b in range(2):
                    joint[x, y, a, b] = np.real(np.trace(rho @ linalg.kron(ex[a], fy[b])))
    marg_a = np.array([[np.real(np.trace(rho_a @ e)) for e in ex] for ex in ea])
    marg_b = np.array([[np.real(np.trace(rho_b @ f)) for f in fy] for fy in eb])

    def clean(p):
        p = np.clip(p, 0.0, None)
        return p / p.sum(axis=-1, keepdims=True) if p.ndim == 2 else p / p.sum(axis=(-2, -1), keepdims=True)

    return clean(joint), clean(marg_a), clean(marg_b)


def outcome_distribution(config: ExperimentConfig) -> np.ndarray:
    """Exact ``p(a, b | x, y)`` including detector loss, shape ``(n_a, n_b, 2, 2)``."""
    joint, marg_a, marg_b = born_tables(config.state, config.alice, config.bob)
    coin = np.full(2, 0.5)
    out = np.empty_like(joint)
    for x, al in enumerate(config.alpha):
        for y, be in enumerate(config.beta):
            out[x, y] = (al * be * joint[x, y]
                         + al * (1 - be) * np.outer(marg_a[x], coin)
                         + (1 - al) * be * np.outer(coin, marg_b[y])
                         + (1 - al) * (1 - be) * np.outer(coin, coin))
    return out


def _simulate_block(u: np.ndarray, n_a: int, n_b: int, alpha: np.ndarray, beta: np.ndarray,
                    joint_cdf: np.ndarray, p0_a: np.ndarray, p0_b: np.ndarray) -> np.ndarray:
    pair = np.minimum((u[:, 0] * (n_a * n_b)).astype(np.int64), n_a * n_b - 1)
    x, y = pair // n_b, pair % n_b
    det_a = u[:, 1] < alpha[x]
    det_b = u[:, 2] < beta[y]

    # joint Born sample (used when both detect), inverse CDF over (00, 01, 10, 11)
    cdf = joint_cdf[x, y]
    k = (u[:, 3, None] >= cdf[:, :3]).sum(axis=1)
    a_joint, b_joint = k // 2, k % 2
    # single-sided Born samples, or fair coins when the detector failed
    a_solo = np.where(det_a, (u[:, 3] >= p0_a[x]).astype(np.int64), (u[:, 3] >= 0.5).astype(np.int64))
    b_solo = np.where(det_b, (u[:, 4] >= p0_b[y]).astype(np.int64), (u[:, 4] >= 0.5).astype(np.int64))

    both = det_a & det_b
    a = np.where(both, a_joint, a_solo)
    b = np.where(both, b_joint, b_solo)
    flat = ((x * n_b + y) * 2 + a) * 2 + b
    return np.bincount(flat, minlength=n_a * n_b * 4)


def run(config: ExperimentConfig, workers: int = 1, chunk_rounds: int = CHUNK_ROUNDS) -> TallyTable:
    """Simulate ``config.rounds`` i.i.d. rounds and tally the outcomes."""
    if not isinstance(config, ExperimentConfig):
        raise InvalidConfig("run() expects an ExperimentConfig")
    if chunk_rounds < 1:
        raise InvalidConfig("chunk_rounds must be positive")
    n_a, n_b = config.settings
    joint, marg_a, marg_b = born_tables(config.state, config.alice, config.bob)
    joint_cdf = np.cumsum(joint.reshape(n_a, n_b, 4), axis=-1)
    p0_a, p0_b = marg_a[:, 0], marg_b[:, 0]
    alpha = np.asarray(config.alpha)
    beta = np.asarray(config.beta)

    bounds = [(s, min(s + chunk_rounds, config.rounds)) for s in range(0, config.rounds, chunk_rounds)]

    def block(b):
        u = round_uniforms(config.seed, *b)
        return _simulate_block(u, n_a, n_b, alpha, beta, joint_cdf, p0_a, p0_b)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, bounds))
    else:
        parts = [block(b) for b in bounds]
    total = np.sum(parts, axis=0, dtype=np.int64)
    return TallyTable(total.reshape(n_a, n_b, 2, 2))


def _q_from_counts(counts: np.ndarray) -> np.ndarray:
    """Plug-in ``Q`` from counts of shape ``(..., n_a, n_b, 2, 2)``.

    Marginals pool each party's rounds over the partner's settings.
    """
    counts = counts.astype(float)
    n_xy = counts.sum(axis=(-2, -1))
    corr = counts[..., 0, 0] + counts[..., 1, 1] - counts[..., 0, 1] - counts[..., 1, 0]
    joint = corr / n_xy
    a_sign = counts[..., 0, :].sum(-1) - counts[..., 1, :].sum(-1)
    b_sign = counts[..., :, 0].sum(-1) - counts[..., :, 1].sum(-1)
    m_a = a_sign.sum(-1) / n_xy.sum(-1)
    m_b = b_sign.sum(-2) / n_xy.sum(-2)
    return joint - m_a[..., :, None] * m_b[..., None, :]


def estimate(t: TallyTable) -> WitnessReport:
    """Plug-in estimate of ``Q`` and ``W`` from tallies."""
    n_a, n_b = t.settings
    if n_a != n_b:
        raise SettingCountMismatch(f"need square settings, got {n_a}x{n_b}")
    if np.any(t.rounds_per_setting == 0):
        empty = [f"{x},{y}" for x, y in zip(*np.nonzero(t.rounds_per_setting == 0))]
        raise EmptySetting("no rounds for setting pair(s) " + ", ".join(empty))
    q = _q_from_counts(t.counts)
    # tallies carry no subsystem dimensions; 2x2 is recorded for the report
    return WitnessReport(q, linalg.determinant(q), 2, 2, "estimated")


def bootstrap_ci(t: TallyTable, resamples: int = 1000, level: float = 0.95,
                 seed: int = 0) -> tuple[float, float, float]:
    """Percentile interval and standard deviation of the witness estimate.

    Each setting pair's tallies are resampled from a multinomial with the
    observed frequencies and the same number of rounds.
    """
    if int(resamples) != resamples or resamples < 100:
        raise InvalidParams("resamples must be an integer >= 100")
    if not 0.0 < level < 1.0:
        raise InvalidParams("level must lie strictly between 0 and 1")
    n_a, n_b = t.settings
    if n_a != n_b:
        raise SettingCountMismatch(f"need square settings, got {n_a}x{n_b}")
    if np.any(t.rounds_per_setting == 0):
        raise EmptySetting("every setting pair needs at least one round")
    rng = np.random.default_rng(seed)
    boot = np.empty((int(resamples), n_a, n_b, 4), dtype=np.int64)
    for x in range(n_a):
        for y in range(n_b):
            n = int(t.rounds_per_setting[x, y])
            p = t.counts[x, y].reshape(4) / n
            boot[:, x, y] = rng.multinomial(n, p, size=int(resamples))
    qs = _q_from_counts(boot.reshape(int(resamples), n_a, n_b, 2, 2))
    ws = np.array([linalg.determinant(q) for q in qs])
    low, high = np.quantile(ws, [(1 - level) / 2, (1 + level) / 2])
    return float(low), float(high), float(np.std(ws, ddof=1))


def effective_measurements(m: MeasurementSet, efficiencies: Sequence[float]) -> MeasurementSet:
    """Observables actually realized when failed detections become fair coins.

    A lost round contributes ``0`` to the expectation, so the realized
    observable is ``eta * A``; its Bloch part matches
    :func:`~discord_witness.measurements.apply_efficiency`.
    """
    return MeasurementSet(m.side, tuple(
        DichotomicObservable(o.d, eta * o.a, tuple(eta * v for v in o.bloch))
        for o, eta in zip(m, efficiencies)))
