import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fountainq import codec, degree, gf2
from fountainq.codec import MeasurementBatch
from fountainq.errors import ContractError
from fountainq.gf2 import BitMatrix, DecodeKind

from oracles import exhaustive_verdict, span_rank


def bits(n, k):
    return arrays(np.uint8, (n, k), elements=st.integers(0, 1))


def test_words_per_row():
    assert [gf2.words_per_row(c) for c in (1, 64, 65, 128, 300)] == [1, 1, 2, 2, 5]


def test_bitmatrix_rejects_stray_bits():
    with pytest.raises(ContractError):
        BitMatrix(np.array([[1 << 5]], dtype=np.uint64), 5)
    with pytest.raises(ContractError):
        BitMatrix(np.zeros((2, 2), dtype=np.uint64), 64)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.integers(1, 150).flatmap(lambda k: bits(n, k))))
def test_dense_round_trip(dense):
    A = BitMatrix.from_dense(dense)
    assert np.array_equal(A.to_dense(), dense)
    assert np.array_equal(A.row_weights(), dense.sum(axis=1))
    assert np.array_equal(A.column_coverage(), dense.any(axis=0))
    assert np.array_equal(A.row_indices(0), np.flatnonzero(dense[0]))


def test_rank_identity_and_duplicates():
    assert gf2.rank(BitMatrix.identity(70)) == 70
    dense = np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    assert gf2.rank(BitMatrix.from_dense(dense)) == 2
    assert gf2.rank(BitMatrix.from_dense(np.zeros((0, 4), dtype=np.uint8))) == 0


@settings(max_examples=80, deadline=None)
@given(bits(5, 5))
def test_rank_matches_span_enumeration(dense):
    assert gf2.rank(BitMatrix.from_dense(dense)) == span_rank(dense)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: bits(n, 9)), bits(3, 9))
def test_rank_monotone_under_row_append(top, extra):
    A = BitMatrix.from_dense(top)
    B = A.vstack(BitMatrix.from_dense(extra))
    assert gf2.rank(A) <= gf2.rank(B) <= min(gf2.rank(A) + 3, 9)


def test_rank_does_not_mutate():
    A = BitMatrix.from_dense(np.array([[1, 1], [1, 0]], dtype=np.uint8))
    before = A.words.copy()
    gf2.rank(A)
    assert np.array_equal(A.words, before)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 14).flatmap(lambda n: st.tuples(bits(n, 8), arrays(np.uint8, n, elements=st.integers(0, 1)))))
def test_solve_matches_exhaustive(case):
    dense, y = case
    result = gf2.solve(BitMatrix.from_dense(dense), y)
    verdict, x = exhaustive_verdict(dense, y)
    assert result.kind.value == verdict
    if verdict == "unique":
        assert np.array_equal(result.solution, x)
        assert result.rank == 8 and result.free_vars == 0


@pytest.mark.parametrize("k", [4, 10])
def test_ml_decode_against_exhaustive(k):
    rng = np.random.default_rng(k)
    dist = degree.ideal_soliton(k, min(k, 4))
    for _ in range(300):
        x = codec.random_input(k, rng)
        batch = codec.generate_batch(x, dist, int(rng.integers(1, 3 * k)), rng)
        result = gf2.ml_decode(batch)
        verdict, sol = exhaustive_verdict(batch.matrix.to_dense(), batch.answers)
        assert result.kind.value == verdict
        assert verdict != "inconsistent"
        if verdict == "unique":
            assert np.array_equal(result.solution, x)


def test_zero_column_is_ambiguous(rng):
    k = 20
    dense = rng.integers(0, 2, size=(60, k), dtype=np.uint8)
    dense[:, 7] = 0
    x = rng.integers(0, 2, size=k, dtype=np.uint8)
    y = (dense.astype(int) @ x % 2).astype(np.uint8)
    assert gf2.solve(BitMatrix.from_dense(dense), y).kind is DecodeKind.AMBIGUOUS


def test_inconsistent_system():
    dense = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=np.uint8)
    result = gf2.solve(BitMatrix.from_dense(dense), np.array([1, 0, 0, 0]))
    assert result.kind is DecodeKind.INCONSISTENT
    assert result.rank == 3 and result.free_vars is None
    result = gf2.solve(BitMatrix.from_dense(dense[:3]), np.array([1, 0, 0]))
    assert result.unique and result.free_vars == 0
    result = gf2.solve(BitMatrix.from_dense(dense[:2]), np.array([1, 0]))
    assert result.kind is DecodeKind.AMBIGUOUS and result.free_vars == 1


def test_full_rank_but_inconsistent_is_not_unique():
    # rank = k alone does not imply a unique solution
    dense = np.array([[1, 0], [0, 1], [1, 0]], dtype=np.uint8)
    result = gf2.solve(BitMatrix.from_dense(dense), np.array([1, 1, 0]))
    assert result.rank == 2
    assert result.kind is DecodeKind.INCONSISTENT


def test_empty_batch_ambiguous():
    empty = BitMatrix(np.zeros((0, 1), dtype=np.uint64), 5)
    assert gf2.solve(empty, np.zeros(0)).kind is DecodeKind.AMBIGUOUS


def test_solve_self_consistent(rng):
    k = 200
    x = codec.random_input(k, rng)
    batch = codec.generate_batch(x, degree.ideal_soliton(k, 20), 700, rng)
    result = gf2.ml_decode(batch)
    assert result.unique
    dense = batch.matrix.to_dense().astype(np.int64)
    assert np.array_equal(dense @ result.solution % 2, batch.answers)


def test_peel_examples():
    dense = np.array([[1, 0, 0], [1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    batch = MeasurementBatch(BitMatrix.from_dense(dense), np.array([1, 0, 1]))
    result = gf2.peel_decode(batch)
    assert result.unique
    assert result.solution.tolist() == [1, 1, 0]
    # full rank, but no degree-one row to start from
    dense = np.array([[1, 1, 0], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)
    batch = MeasurementBatch(BitMatrix.from_dense(dense), np.array([0, 0, 1]))
    assert gf2.peel_decode(batch).kind is DecodeKind.AMBIGUOUS
    assert gf2.ml_decode(batch).unique


def test_peel_detects_inconsistency():
    dense = np.array([[1, 0], [1, 0], [0, 1]], dtype=np.uint8)
    batch = MeasurementBatch(BitMatrix.from_dense(dense), np.array([1, 0, 1]))
    assert gf2.peel_decode(batch).kind is DecodeKind.INCONSISTENT


def test_peel_success_implies_ml_success():
    k, D = 100, 31
    dist = degree.ideal_soliton(k, D)
    rng = np.random.default_rng(77)
    peeled = 0
    for _ in range(1000):
        x = codec.random_input(k, rng)
        batch = codec.generate_batch(x, dist, 2 * k, rng)
        p = gf2.peel_decode(batch)
        m = gf2.ml_decode(batch)
        assert p.rank <= m.rank
        if p.unique:
            peeled += 1
            assert m.unique
            assert np.array_equal(p.solution, x) and np.array_equal(m.solution, x)
    assert peeled > 0
