"""GF(2) linear algebra on bit-packed matrices: rank, ML and peeling decoders."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels
from .errors import ContractError

if TYPE_CHECKING:
    from .codec import MeasurementBatch

WORD_BITS = 64


def words_per_row(ncols: int) -> int:
    return (ncols + WORD_BITS - 1) // WORD_BITS


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Row-major packed GF(2) matrix.

    Column ``j`` (0-based) of a row sits in word ``j // 64`` at bit ``j % 64``,
    least significant bit first.  Bits past ``ncols`` are always zero.
    """

    words: np.ndarray
    ncols: int

    def __post_init__(self) -> None:
        words = np.ascontiguousarray(self.words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != words_per_row(self.ncols):
            raise ContractError(
                f"storage shape {words.shape} does not fit {self.ncols} columns"
            )
        tail = self.ncols % WORD_BITS
        if tail and words.shape[0] and np.any(words[:, -1] >> np.uint64(tail)):
            raise ContractError("bits set beyond the last column")
        object.__setattr__(self, "words", words)

    @property
    def nrows(self) -> int:
        return self.words.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        dense = np.asarray(dense, dtype=np.uint8) & 1
        if dense.ndim != 2:
            raise ContractError("expected a 2-D 0/1 array")
        n, k = dense.shape
        nwords = words_per_row(k)
        padded = np.zeros((n, nwords * WORD_BITS), dtype=np.uint8)
        padded[:, :k] = dense
        packed = np.packbits(padded, axis=1, bitorder="little")
        words = packed.view("<u8").astype(np.uint64).reshape(n, nwords)
        return cls(words, k)

    @classmethod
    def identity(cls, k: int) -> BitMatrix:
        return cls.from_dense(np.eye(k, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        as_bytes = self.words.astype("<u8").view(np.uint8).reshape(self.nrows, -1)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.ncols].copy()

    def row_indices(self, i: int) -> np.ndarray:
        """0-based column positions set in row ``i``."""
        return np.flatnonzero(self.to_dense_row(i))

    def to_dense_row(self, i: int) -> np.ndarray:
        row = self.words[i].astype("<u8").view(np.uint8)
        return np.unpackbits(row, bitorder="little")[: self.ncols]

    def row_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=1)

    def column_coverage(self) -> np.ndarray:
        """Boolean mask of columns touched by at least one row."""
        if self.nrows == 0:
            return np.zeros(self.ncols, dtype=bool)
        union = np.bitwise_or.reduce(self.words, axis=0)
        bits = np.unpackbits(union.astype("<u8").view(np.uint8), bitorder="little")
        return bits[: self.ncols].astype(bool)

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other.ncols != self.ncols:
            raise ContractError("column counts differ")
        return BitMatrix(np.vstack([self.words, other.words]), self.ncols)


class DecodeKind(enum.Enum):
    UNIQUE = "unique"
    AMBIGUOUS = "ambiguous"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True, eq=False)
class DecodeResult:
    kind: DecodeKind
    rank: int
    ncols: int
    solution: np.ndarray | None = None

    @property
    def free_vars(self) -> int | None:
        """Dimension of the solution set; None when there is no solution."""
        if self.kind is DecodeKind.INCONSISTENT:
            return None
        return self.ncols - self.rank

    @property
    def unique(self) -> bool:
        return self.kind is DecodeKind.UNIQUE


def rank(A: BitMatrix) -> int:
    """Rank over GF(2) by word-parallel row reduction on a private copy."""
    if A.nrows == 0:
        return 0
    r, _, _ = _kernels.active.eliminate(
        A.words.copy(), np.zeros(A.nrows, dtype=np.uint8), A.ncols
    )
    return int(r)


def solve(A: BitMatrix, y: np.ndarray) -> DecodeResult:
    """Classify and, when unique, solve ``A x = y`` over GF(2)."""
    y = np.asarray(y, dtype=np.uint8)
    if y.shape != (A.nrows,):
        raise ContractError(f"{A.nrows} rows but {y.shape} right-hand side")
    k = A.ncols
    if A.nrows == 0:
        kind = DecodeKind.UNIQUE if k == 0 else DecodeKind.AMBIGUOUS
        return DecodeResult(kind, 0, k, np.zeros(0, np.uint8) if k == 0 else None)
    rhs = (y & 1).copy()
    r, pivots, consistent = _kernels.active.eliminate(A.words.copy(), rhs, k)
    r = int(r)
    if not consistent:
        return DecodeResult(DecodeKind.INCONSISTENT, r, k)
    if r < k:
        return DecodeResult(DecodeKind.AMBIGUOUS, r, k)
    x = np.zeros(k, dtype=np.uint8)
    x[pivots] = rhs[:r]
    return DecodeResult(DecodeKind.UNIQUE, r, k, x)


def ml_decode(batch: MeasurementBatch) -> DecodeResult:
    """Maximum-likelihood decoding: the unique solution or a declared error."""
    return solve(batch.matrix, batch.answers)


def peel_decode(batch: MeasurementBatch) -> DecodeResult:
    """Iterative degree-one decoder.

    Reports ``rank`` as the number of resolved symbols, which is a lower
    bound on the true rank when peeling stalls.
    """
    A = batch.matrix
    k = A.ncols
    if A.nrows == 0:
        return DecodeResult(DecodeKind.AMBIGUOUS, 0, k)
    x, known, consistent = _kernels.active.peel(
        A.words.copy(), batch.answers.astype(np.uint8).copy(), k
    )
    resolved = int(known.sum())
    if not consistent:
        return DecodeResult(DecodeKind.INCONSISTENT, resolved, k)
    if resolved < k:
        return DecodeResult(DecodeKind.AMBIGUOUS, resolved, k)
    return DecodeResult(DecodeKind.UNIQUE, k, k, x)


DECODERS = {"ml": ml_decode, "peel": peel_decode}
