"""Slow, obviously-correct reference implementations used only by tests."""
import itertools

import numpy as np


def all_vectors(k):
    """Every x in {0,1}^k as rows of a (2^k, k) uint8 array."""
    codes = np.arange(2**k, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(np.uint8)


def exhaustive_solutions(dense, y):
    """All x with dense @ x = y over GF(2)."""
    X = all_vectors(dense.shape[1])
    ok = np.all((X.astype(np.int64) @ dense.T.astype(np.int64)) % 2 == y[None, :], axis=1)
    return X[ok]


def exhaustive_verdict(dense, y):
    sols = exhaustive_solutions(dense, y)
    if len(sols) == 0:
        return "inconsistent", None
    if len(sols) == 1:
        return "unique", sols[0]
    return "ambiguous", None


def span_rank(dense):
    """log2 of the number of distinct vectors in the row span."""
    n = dense.shape[0]
    span = set()
    for coeffs in itertools.product((0, 1), repeat=n):
        v = np.zeros(dense.shape[1], dtype=np.uint8)
        for c, row in zip(coeffs, dense):
            if c:
                v ^= row
        span.add(v.tobytes())
    return len(span).bit_length() - 1
