"""Hot loops: query construction, GF(2) elimination and peeling.

Rows are bit-packed into uint64 words; column ``c`` (0-based) lives in word
``c >> 6`` at bit ``c & 63``.

The loop kernels below are written in the numba-compatible subset of Python.
``FOUNTAINQ_BACKEND`` picks how they run:

* ``numba`` (default when numba imports): loops compiled with ``njit``.
* ``numpy``: loops run as plain Python, except elimination, which switches to
  a vectorised numpy implementation.

Both backends produce bit-identical results; the benchmark in
``benchmarks/bench_kernels.py`` compares their speed.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

    def register_jitable(fn):
        return fn


@register_jitable
def _lowest_set(v):
    """Index of the lowest set bit of a nonzero uint64."""
    pos = 0
    while not ((v >> np.uint64(pos)) & np.uint64(1)):
        pos += 1
    return pos


def build_rows(ncols, degrees, draws, pool, x):
    """Pack one query per entry of ``degrees`` by partial Fisher-Yates.

    ``draws`` holds, for every query in turn, ``degrees[i]`` offsets where the
    t-th offset is uniform on ``[0, ncols - t)``.  ``pool`` is a permutation of
    ``0..ncols-1`` that is mutated in place and carried across queries.
    Returns the packed rows and the parity of ``x`` over each row.
    """
    n = degrees.shape[0]
    nwords = (ncols + 63) >> 6
    words = np.zeros((n, nwords), dtype=np.uint64)
    answers = np.zeros(n, dtype=np.uint8)
    pos = 0
    for i in range(n):
        parity = 0
        for t in range(degrees[i]):
            j = t + draws[pos]
            pos += 1
            tmp = pool[t]
            pool[t] = pool[j]
            pool[j] = tmp
            c = pool[t]
            words[i, c >> 6] |= np.uint64(1) << np.uint64(c & 63)
            parity ^= x[c]
        answers[i] = parity
    return words, answers


def eliminate_loop(words, rhs, ncols):
    """Gauss-Jordan elimination over GF(2), in place.

    Returns ``(rank, pivot_columns, consistent)``.  After the call the first
    ``rank`` rows are in reduced echelon form and the remaining rows are zero.
    """
    n, nwords = words.shape
    pivots = np.full(min(n, ncols), -1, dtype=np.int64)
    rank = 0
    for c in range(ncols):
        if rank == n:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for r in range(rank, n):
            if words[r, w] & bit:
                p = r
                break
        if p < 0:
            continue
        if p != rank:
            for j in range(w, nwords):
                tmp = words[p, j]
                words[p, j] = words[rank, j]
                words[rank, j] = tmp
            tb = rhs[p]
            rhs[p] = rhs[rank]
            rhs[rank] = tb
        # columns left of c are zero in the pivot row, so XOR starts at word w
        for r in range(n):
            if r != rank and (words[r, w] & bit):
                for j in range(w, nwords):
                    words[r, j] ^= words[rank, j]
                rhs[r] ^= rhs[rank]
        pivots[rank] = c
        rank += 1
    consistent = True
    for r in range(rank, n):
        if rhs[r]:
            consistent = False
            break
    return rank, pivots[:rank].copy(), consistent


def eliminate_vectorized(words, rhs, ncols):
    """Numpy counterpart of :func:`eliminate_loop` with the same contract."""
    n = words.shape[0]
    pivots = []
    rank = 0
    for c in range(ncols):
        if rank == n:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        hits = np.flatnonzero(words[rank:, w] & bit)
        if hits.size == 0:
            continue
        p = rank + int(hits[0])
        if p != rank:
            words[[rank, p], w:] = words[[p, rank], w:]
            rhs[[rank, p]] = rhs[[p, rank]]
        rows = np.flatnonzero(words[:, w] & bit)
        rows = rows[rows != rank]
        if rows.size:
            words[rows, w:] ^= words[rank, w:]
            rhs[rows] ^= rhs[rank]
        pivots.append(c)
        rank += 1
    consistent = not bool(np.any(rhs[rank:]))
    return rank, np.asarray(pivots, dtype=np.int64), consistent


def peel(words, rhs, ncols):
    """Iterative degree-one peeling, in place.

    Returns ``(solution, known, consistent)`` where ``known`` flags the
    symbols that peeling resolved.
    """
    n, nwords = words.shape
    weight = np.zeros(n, dtype=np.int64)
    col_count = np.zeros(ncols + 1, dtype=np.int64)
    for r in range(n):
        wsum = 0
        for j in range(nwords):
            v = words[r, j]
            while v:
                c = (j << 6) + _lowest_set(v)
                col_count[c + 1] += 1
                v &= v - np.uint64(1)
                wsum += 1
        weight[r] = wsum
    for c in range(ncols):
        col_count[c + 1] += col_count[c]
    col_rows = np.empty(col_count[ncols], dtype=np.int64)
    fill = col_count[:ncols].copy()
    for r in range(n):
        for j in range(nwords):
            v = words[r, j]
            while v:
                c = (j << 6) + _lowest_set(v)
                col_rows[fill[c]] = r
                fill[c] += 1
                v &= v - np.uint64(1)

    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for r in range(n):
        if weight[r] == 1:
            queue[tail] = r
            tail += 1
    solution = np.zeros(ncols, dtype=np.uint8)
    known = np.zeros(ncols, dtype=np.bool_)
    consistent = True
    for r in range(n):
        if weight[r] == 0 and rhs[r]:
            consistent = False

    while head < tail:
        r = queue[head]
        head += 1
        if weight[r] != 1:
            continue
        c = -1
        for j in range(nwords):
            if words[r, j]:
                c = (j << 6) + _lowest_set(words[r, j])
                break
        value = rhs[r]
        solution[c] = value
        known[c] = True
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        for idx in range(col_count[c], col_count[c + 1]):
            r2 = col_rows[idx]
            if words[r2, w] & bit:
                words[r2, w] ^= bit
                rhs[r2] ^= value
                weight[r2] -= 1
                if weight[r2] == 1:
                    queue[tail] = r2
                    tail += 1
                elif weight[r2] == 0 and rhs[r2]:
                    consistent = False
    return solution, known, consistent


NUMPY_KERNELS = SimpleNamespace(
    name="numpy",
    build_rows=build_rows,
    eliminate=eliminate_vectorized,
    peel=peel,
)

_numba_kernels: SimpleNamespace | None = None


def numba_kernels() -> SimpleNamespace:
    """Compile (once) and return the numba-backed kernel set."""
    global _numba_kernels
    if numba is None:
        raise RuntimeError("numba is not installed")
    if _numba_kernels is None:
        jit = numba.njit(cache=True, nogil=True)
        _numba_kernels = SimpleNamespace(
            name="numba",
            build_rows=jit(build_rows),
            eliminate=jit(eliminate_loop),
            peel=jit(peel),
        )
    return _numba_kernels


def _select() -> SimpleNamespace:
    requested = os.environ.get("FOUNTAINQ_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise RuntimeError(f"FOUNTAINQ_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and numba is not None:
        return numba_kernels()
    return NUMPY_KERNELS


active = _select()
