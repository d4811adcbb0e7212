"""Seeded Monte Carlo estimation of the recovery error probability.

Every trial owns a generator seeded from ``(master_seed, difficulty index,
n, trial index)`` through :class:`numpy.random.SeedSequence`, so results do
not depend on thread count or scheduling, and adding grid points never
changes the trials already run.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .codec import MeasurementBatch, generate_batch, random_input
from .degree import DegreeDistribution, ideal_soliton, soliton_for_difficulty
from .errors import ParameterError, TransitionOutOfRange
from .gf2 import DECODERS, DecodeKind

CSV_COLUMNS = (
    "k", "D", "dbar", "n", "normalized_n", "trials", "failures",
    "p_hat", "ci_low", "ci_high", "decoder", "seed", "elapsed_seconds",
)
Z95 = NormalDist().inv_cdf(0.975)
_ERASURE_STREAM = 0x45524153  # domain tag separating erasure draws from query draws


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for one trial, mixed from the master seed and grid indices."""
    seq = np.random.SeedSequence([int(master_seed) & (2**64 - 1), *map(int, indices)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def wilson_interval(failures: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ParameterError("trials must be positive")
    p = failures / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # keep the point estimate inside the interval despite rounding at p in {0, 1}
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


def two_proportion_z(x1: int, n1: int, x2: int, n2: int) -> tuple[float, float]:
    """Pooled two-proportion z statistic and its two-sided p-value."""
    pooled = (x1 + x2) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    if se == 0:
        return 0.0, 1.0
    z = (x1 / n1 - x2 / n2) / se
    return z, 2 * (1 - NormalDist().cdf(abs(z)))


def _erasure_batch(
    x: np.ndarray,
    dist: DegreeDistribution,
    p: float,
    stop_n: int,
    query_rng: np.random.Generator,
    erase_rng: np.random.Generator,
) -> MeasurementBatch:
    # each issued query is answered with probability 1 - p; stop at the stop_n-th answer
    answered: list[np.ndarray] = []
    got = 0
    issued = 0
    chunk = max(16, math.ceil(stop_n / (1.0 - p) * 1.1))
    while got < stop_n:
        hits = np.flatnonzero(erase_rng.random(chunk) >= p) + issued
        need = stop_n - got
        answered.append(hits[:need])
        got += min(need, hits.size)
        issued += chunk
    positions = np.concatenate(answered)
    stream = generate_batch(x, dist, int(positions[-1]) + 1, query_rng)
    received = stream.select(positions)
    return MeasurementBatch(received.matrix, received.answers, positions)


def simulate_erasure_channel(
    k: int,
    dist: DegreeDistribution,
    p: float,
    stop_n: int,
    seed: int,
    x: np.ndarray | None = None,
) -> MeasurementBatch:
    """First ``stop_n`` answered measurements of an endless query stream.

    Queries are issued by the Fountain rule; each is skipped independently
    with probability ``p``.  ``positions`` on the result gives the stream
    index of every received answer.  With ``p == 0`` the result equals
    ``generate_batch`` on a generator seeded with ``seed`` after drawing
    ``x`` from it.
    """
    if not 0 <= p < 1:
        raise ParameterError(f"erasure probability must lie in [0, 1), got {p}")
    if stop_n < 1:
        raise ParameterError(f"stop_n must be >= 1, got {stop_n}")
    rng = make_rng(seed)
    if x is None:
        x = random_input(k, rng)
    if p == 0:
        batch = generate_batch(x, dist, stop_n, rng)
        return MeasurementBatch(batch.matrix, batch.answers, np.arange(stop_n))
    erase_rng = make_rng(derive_seed(seed, _ERASURE_STREAM))
    return _erasure_batch(x, dist, p, stop_n, rng, erase_rng)


class TrialOutcome(NamedTuple):
    success: bool
    kind: DecodeKind
    isolated: bool


def trial_outcome(
    k: int,
    dist: DegreeDistribution,
    n: int,
    seed: int,
    decoder: str = "ml",
    erasure_prob: float | None = None,
) -> TrialOutcome:
    if n <= 0:
        return TrialOutcome(False, DecodeKind.AMBIGUOUS, True)
    rng = make_rng(seed)
    x = random_input(k, rng)
    if erasure_prob:
        erase_rng = make_rng(derive_seed(seed, _ERASURE_STREAM))
        batch = _erasure_batch(x, dist, erasure_prob, n, rng, erase_rng)
    else:
        batch = generate_batch(x, dist, n, rng)
    result = DECODERS[decoder](batch)
    success = result.unique and bool(np.array_equal(result.solution, x))
    isolated = not bool(batch.matrix.column_coverage().all())
    return TrialOutcome(success, result.kind, isolated)


def run_trial(k: int, dist: DegreeDistribution, n: int, seed: int, decoder: str = "ml") -> bool:
    """Draw x, measure it n times, decode; True iff x is recovered exactly."""
    return trial_outcome(k, dist, n, seed, decoder).success


@dataclass
class PointStats:
    trials: int = 0
    failures: int = 0
    isolated: int = 0
    isolated_ambiguous: int = 0
    kinds: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def add(self, other: PointStats) -> None:
        self.trials += other.trials
        self.failures += other.failures
        self.isolated += other.isolated
        self.isolated_ambiguous += other.isolated_ambiguous
        for key, value in other.kinds.items():
            self.kinds[key] = self.kinds.get(key, 0) + value
        self.elapsed += other.elapsed


def _run_chunk(
    k: int,
    dist: DegreeDistribution,
    n: int,
    master_seed: int,
    diff_index: int,
    trial_range: range,
    decoder: str,
    erasure_prob: float | None,
) -> PointStats:
    stats = PointStats()
    start = time.perf_counter()
    for t in trial_range:
        out = trial_outcome(k, dist, n, derive_seed(master_seed, diff_index, n, t), decoder, erasure_prob)
        stats.trials += 1
        stats.failures += not out.success
        stats.kinds[out.kind.value] = stats.kinds.get(out.kind.value, 0) + 1
        if out.isolated:
            stats.isolated += 1
            stats.isolated_ambiguous += out.kind is DecodeKind.AMBIGUOUS
    stats.elapsed = time.perf_counter() - start
    return stats


@dataclass(frozen=True)
class ExperimentRecord:
    k: int
    D: int
    dbar: float
    n: int
    normalized_n: float
    trials: int
    failures: int
    p_hat: float
    ci_low: float
    ci_high: float
    decoder: str
    seed: int
    elapsed_seconds: float = 0.0

    def row(self, timing: bool = True) -> list[str]:
        values = [
            str(self.k), str(self.D), f"{self.dbar:.12g}", str(self.n),
            f"{self.normalized_n:.12g}", str(self.trials), str(self.failures),
            f"{self.p_hat:.12g}", f"{self.ci_low:.12g}", f"{self.ci_high:.12g}",
            self.decoder, str(self.seed),
        ]
        if timing:
            values.append(f"{self.elapsed_seconds:.3f}")
        return values


def normalized_to_n(value: float, k: int, dbar: float) -> int:
    return max(1, math.floor(value * k * math.log(k) / dbar + 0.5))


@dataclass
class ExperimentConfig:
    k: int
    difficulties: list[float] = field(default_factory=list)
    d_values: list[int] = field(default_factory=list)
    n_grid: list[float] = field(default_factory=list)
    normalized: bool = False
    trials: int = 1000
    master_seed: int = 0
    erasure_prob: float | None = None
    decoder: str = "ml"

    def validate(self) -> None:
        if self.k < 3:
            raise ParameterError(f"k must be >= 3, got {self.k}")
        if not self.difficulties and not self.d_values:
            raise ParameterError("give at least one difficulty or D value")
        if not self.n_grid:
            raise ParameterError("n_grid must not be empty")
        if any(v <= 0 for v in self.n_grid):
            raise ParameterError("n_grid values must be positive")
        if not self.normalized and any(float(v) != int(v) for v in self.n_grid):
            raise ParameterError("un-normalized n_grid values must be integers")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.erasure_prob is not None and not 0 <= self.erasure_prob < 1:
            raise ParameterError(f"erasure_prob must lie in [0, 1), got {self.erasure_prob}")
        if self.decoder not in DECODERS:
            raise ParameterError(f"decoder must be one of {sorted(DECODERS)}, got {self.decoder!r}")
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError("master_seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    def distributions(self) -> list[DegreeDistribution]:
        """Soliton laws in difficulty-index order: targets first, then explicit D values."""
        Ds = [soliton_for_difficulty(self.k, t).D for t in self.difficulties]
        Ds += list(self.d_values)
        return [ideal_soliton(self.k, D) for D in Ds]

    def n_values(self, dist: DegreeDistribution) -> list[int]:
        if self.normalized:
            return [normalized_to_n(v, self.k, dist.dbar) for v in self.n_grid]
        return [int(v) for v in self.n_grid]


def _chunks(trials: int, parts: int) -> list[range]:
    size = max(1, math.ceil(trials / parts))
    return [range(i, min(i + size, trials)) for i in range(0, trials, size)]


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def run_point(
    k: int,
    dist: DegreeDistribution,
    n: int,
    trials: int,
    master_seed: int,
    diff_index: int = 0,
    decoder: str = "ml",
    erasure_prob: float | None = None,
    threads: int | None = None,
) -> PointStats:
    """Run ``trials`` seeded trials at one (distribution, n) point."""
    threads = threads or default_threads()
    parts = _chunks(trials, threads * 4 if threads > 1 else 1)
    args = (k, dist, n, master_seed, diff_index)
    total = PointStats()
    if threads == 1:
        for part in parts:
            total.add(_run_chunk(*args, part, decoder, erasure_prob))
        return total
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for stats in pool.map(lambda r: _run_chunk(*args, r, decoder, erasure_prob), parts):
            total.add(stats)
    return total


def make_record(
    k: int, dist: DegreeDistribution, n: int, stats: PointStats, decoder: str, seed: int
) -> ExperimentRecord:
    lo, hi = wilson_interval(stats.failures, stats.trials)
    return ExperimentRecord(
        k=k,
        D=dist.D if dist.D is not None else -1,
        dbar=dist.dbar,
        n=n,
        normalized_n=n * dist.dbar / (k * math.log(k)),
        trials=stats.trials,
        failures=stats.failures,
        p_hat=stats.failures / stats.trials,
        ci_low=lo,
        ci_high=hi,
        decoder=decoder,
        seed=seed,
        elapsed_seconds=stats.elapsed,
    )


def run_sweep(config: ExperimentConfig, threads: int | None = None) -> list[ExperimentRecord]:
    """One record per (difficulty, n) pair, in config order."""
    config.validate()
    threads = threads or default_threads()
    tasks = []
    for di, dist in enumerate(config.distributions()):
        for gi, n in enumerate(config.n_values(dist)):
            for part in _chunks(config.trials, threads * 4 if threads > 1 else 1):
                tasks.append((di, gi, dist, n, part))

    def work(task):
        di, _, dist, n, part = task
        return _run_chunk(config.k, dist, n, config.master_seed, di, part,
                          config.decoder, config.erasure_prob)

    if threads == 1:
        results = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, tasks))

    merged: dict[tuple[int, int], tuple[DegreeDistribution, int, PointStats]] = {}
    for (di, gi, dist, n, _), stats in zip(tasks, results):
        if (di, gi) not in merged:
            merged[di, gi] = (dist, n, PointStats())
        merged[di, gi][2].add(stats)
    return [
        make_record(config.k, dist, n, stats, config.decoder, config.master_seed)
        for dist, n, stats in merged.values()
    ]


def records_to_csv(records: Iterable[ExperimentRecord], timing: bool = True) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS if timing else CSV_COLUMNS[:-1])
    for rec in records:
        writer.writerow(rec.row(timing))
    return out.getvalue()


def records_from_csv(text: str) -> list[ExperimentRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_COLUMNS[:-1]) - set(reader.fieldnames or ())
    if missing:
        raise ParameterError(f"CSV lacks columns {sorted(missing)}")
    ints = {"k", "D", "n", "trials", "failures", "seed"}
    out = []
    for row in reader:
        kwargs = {}
        for name in CSV_COLUMNS:
            if name not in row:
                continue
            value = row[name]
            if name == "decoder":
                kwargs[name] = value
            elif name in ints:
                kwargs[name] = int(value)
            else:
                kwargs[name] = float(value)
        out.append(ExperimentRecord(**kwargs))
    return out


def estimate_transition(records: Sequence[ExperimentRecord], level: float = 0.5) -> float:
    """Normalized n where p_hat first falls through ``level``, by linear interpolation."""
    pts = [(r.normalized_n, r.p_hat) for r in records]
    if any(b[0] < a[0] for a, b in zip(pts, pts[1:])):
        raise ParameterError("records must be sorted by n")
    for (x0, p0), (x1, p1) in zip(pts, pts[1:]):
        if p0 == level:
            return x0
        if p0 > level > p1 or (p0 > level and p1 == level):
            return x0 + (p0 - level) / (p0 - p1) * (x1 - x0)
    raise TransitionOutOfRange(f"p_hat never falls through {level} on this grid")
