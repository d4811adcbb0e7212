"""Fountain-rule query generation and parity measurements."""
from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .degree import DegreeDistribution, sample_degree, sample_degrees
from .errors import ContractError, ParameterError
from .gf2 import BitMatrix, words_per_row

MAGIC = b"FQB1"
_HEADER = struct.Struct("<4sQQ")


def input_vector(bits: Iterable[int] | str) -> np.ndarray:
    """Validate and return a 0/1 uint8 vector; accepts a string like ``"0110"``."""
    if isinstance(bits, str):
        bits = [int(ch) for ch in bits.strip()]
    x = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
    if x.ndim != 1 or x.size == 0 or np.any((x != 0) & (x != 1)):
        raise ContractError("input vector must be a nonempty sequence of 0/1 values")
    return x.astype(np.uint8)


def random_input(k: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=k, dtype=np.uint8)


@dataclass(frozen=True)
class Query:
    """One measurement design: 1-based positions, strictly increasing."""

    k: int
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = self.indices
        if not 1 <= len(idx) <= self.k:
            raise ContractError(f"query weight {len(idx)} outside 1..{self.k}")
        if any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 1 or idx[-1] > self.k:
            raise ContractError("indices must be strictly increasing within 1..k")

    @property
    def degree(self) -> int:
        return len(self.indices)

    def to_vector(self) -> np.ndarray:
        v = np.zeros(self.k, dtype=np.uint8)
        v[np.asarray(self.indices) - 1] = 1
        return v


@dataclass(frozen=True, eq=False)
class MeasurementBatch:
    """Sampling matrix paired with its parity answers.

    ``positions`` is set by the erasure channel: the 0-based stream index at
    which each received measurement was issued.
    """

    matrix: BitMatrix
    answers: np.ndarray
    positions: np.ndarray | None = None

    def __post_init__(self) -> None:
        answers = np.asarray(self.answers, dtype=np.uint8)
        if answers.shape != (self.matrix.nrows,):
            raise ContractError(
                f"{self.matrix.nrows} rows but {answers.shape[0]} answers"
            )
        if np.any(answers > 1):
            raise ContractError("answers must be 0/1")
        object.__setattr__(self, "answers", answers)

    @property
    def k(self) -> int:
        return self.matrix.ncols

    @property
    def n(self) -> int:
        return self.matrix.nrows

    def queries(self) -> list[Query]:
        dense = self.matrix.to_dense()
        return [Query(self.k, tuple(int(j) + 1 for j in np.flatnonzero(row))) for row in dense]

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, self.k, self.n)
        rows = self.matrix.words.astype("<u8").tobytes()
        answers = np.packbits(self.answers, bitorder="little").tobytes()
        return head + rows + answers

    @classmethod
    def from_bytes(cls, blob: bytes) -> MeasurementBatch:
        if len(blob) < _HEADER.size:
            raise ContractError("truncated batch header")
        magic, k, n = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise ContractError(f"bad magic {magic!r}")
        nwords = words_per_row(k)
        row_bytes = n * nwords * 8
        ans_bytes = (n + 7) // 8
        if len(blob) != _HEADER.size + row_bytes + ans_bytes:
            raise ContractError("batch length does not match header")
        words = np.frombuffer(blob, dtype="<u8", count=n * nwords, offset=_HEADER.size)
        words = words.astype(np.uint64).reshape(n, nwords)
        packed = np.frombuffer(blob, dtype=np.uint8, offset=_HEADER.size + row_bytes)
        answers = np.unpackbits(packed, bitorder="little")[:n]
        return cls(BitMatrix(words, k), answers)

    def to_csv(self) -> str:
        """One line per measurement: row number, space-separated 1-based indices, answer."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["row", "indices", "answer"])
        for i, q in enumerate(self.queries()):
            writer.writerow([i, " ".join(map(str, q.indices)), int(self.answers[i])])
        return out.getvalue()

    def select(self, rows: np.ndarray) -> MeasurementBatch:
        return MeasurementBatch(BitMatrix(self.matrix.words[rows], self.k), self.answers[rows])


def _subset_draws(degrees: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # t-th swap of a query picks uniformly from the k - t remaining slots
    total = int(degrees.sum())
    starts = np.repeat(np.cumsum(degrees) - degrees, degrees)
    step = np.arange(total, dtype=np.int64) - starts
    return rng.integers(0, k - step)


def sample_query(dist: DegreeDistribution, k: int, rng: np.random.Generator) -> Query:
    """Degree from ``dist``, then a uniform subset of that size (partial Fisher-Yates)."""
    if dist.k != k:
        raise ContractError(f"distribution is over k={dist.k}, asked for k={k}")
    d = sample_degree(dist, rng)
    pool = np.arange(k)
    for t in range(d):
        j = t + int(rng.integers(0, k - t))
        pool[t], pool[j] = pool[j], pool[t]
    return Query(k, tuple(sorted(int(c) + 1 for c in pool[:d])))


def encode(x: np.ndarray, q: Query) -> int:
    """Parity of ``x`` over the positions of ``q``."""
    x = np.asarray(x)
    if x.shape != (q.k,):
        raise ContractError(f"query over k={q.k} applied to vector of length {x.shape}")
    return int(np.bitwise_xor.reduce(x[np.asarray(q.indices) - 1].astype(np.uint8)))


def generate_batch(
    x: np.ndarray, dist: DegreeDistribution, n: int, rng: np.random.Generator
) -> MeasurementBatch:
    """``n`` i.i.d. queries and their answers; deterministic in the generator state."""
    if n < 1:
        raise ParameterError(f"need at least one measurement, got n={n}")
    x = np.asarray(x, dtype=np.uint8)
    k = x.shape[0]
    if dist.k != k:
        raise ContractError(f"distribution is over k={dist.k}, input has length {k}")
    degrees = sample_degrees(dist, n, rng).astype(np.int64)
    draws = _subset_draws(degrees, k, rng)
    pool = np.arange(k, dtype=np.int64)
    words, answers = _kernels.active.build_rows(k, degrees, draws, pool, x)
    return MeasurementBatch(BitMatrix(words, k), answers)
