"""Analytic error-probability bounds for Soliton-designed parity queries.

Combinatorial quantities are exact (``int``/``Fraction``); probability bounds
for realistic ``k`` are evaluated in floating point in the log domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .degree import DegreeDistribution
from .errors import ParameterError

# Lemma-2 hypothesis constants; fixed, never tuned.
ISOLATION_EXPONENT = 5
LINEAR_CASE2 = 68
LINEAR_CASE3 = 35
LINEAR_CASE4 = 10
ODD_SUM_MIDDLE = Fraction(1, 5)
ODD_SUM_SCALE = Fraction(2, 5)
EVEN_SUM_MIDDLE = Fraction(4, 5)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def kappa(k: int, s: int) -> Fraction:
    """(k - s + 1) / (2s + 1)."""
    if not 1 <= s <= k:
        raise ParameterError(f"s must lie in 1..{k}, got {s}")
    return Fraction(k - s + 1, 2 * s + 1)


def ceil_kappa(k: int, s: int) -> int:
    if not 1 <= s <= k:
        raise ParameterError(f"s must lie in 1..{k}, got {s}")
    return _ceil_div(k - s + 1, 2 * s + 1)


def _check_ksd(k: int, s: int, d: int) -> None:
    if not 0 <= s <= k:
        raise ParameterError(f"s must lie in 0..{k}, got {s}")
    if not 1 <= d <= k:
        raise ParameterError(f"d must lie in 1..{k}, got {d}")


def i_d_exact(k: int, s: int, d: int) -> int:
    """Number of weight-d vectors with an even number of ones among the first s."""
    _check_ksd(k, s, d)
    return sum(math.comb(s, i) * math.comb(k - s, d - i) for i in range(0, d + 1, 2))


def odd_sum_exact(k: int, s: int, d: int) -> int:
    _check_ksd(k, s, d)
    return sum(math.comb(s, i) * math.comb(k - s, d - i) for i in range(1, d + 1, 2))


def even_parity_fraction(k: int, s: int, d: int) -> Fraction:
    return Fraction(i_d_exact(k, s, d), math.comb(k, d))


def even_parity_prob(k: int, s: int, d: int) -> float:
    """P(a uniform weight-d query hits the first s positions an even number of times)."""
    return float(even_parity_fraction(k, s, d))


def _check_interior(k: int, s: int, d: int) -> None:
    if not 1 <= s <= k - 1 or not 1 <= d <= k - 1:
        raise ParameterError(f"need 1 <= s, d <= k-1 (k={k}, s={s}, d={d})")


def lemma3_constants(k: int, d: int) -> tuple[Fraction, int]:
    """(alpha, beta) of the odd-sum lower bound for a given query weight."""
    if not 1 <= d <= k - 1:
        raise ParameterError(f"d must lie in 1..{k - 1}, got {d}")
    alpha = max(Fraction(k - d + 1, d), Fraction(d + 1, k - d))
    beta = math.ceil(max(Fraction(k - d + 1, 2 * d + 1), Fraction(d + 1, 2 * (k - d) + 1)))
    return alpha, beta


def lemma3_lower(k: int, s: int, d: int) -> Fraction:
    """Lower bound on (odd-overlap count) / C(k, d)."""
    _check_interior(k, s, d)
    alpha, beta = lemma3_constants(k, d)
    if s < beta:
        return ODD_SUM_SCALE * s / alpha
    if s <= k - beta:
        return ODD_SUM_MIDDLE
    return ODD_SUM_SCALE * (k - s) / alpha


def lemma1_upper(k: int, s: int, d: int) -> Fraction:
    """Upper bound on I_d / C(k, d), piecewise in d for fixed s."""
    _check_interior(k, s, d)
    if 2 * s > k:
        s = k - s
    kap = kappa(k, s)
    if 2 * d <= k:
        if d < kap:
            return 1 - ODD_SUM_SCALE * s / Fraction(k - d + 1, d)
        return EVEN_SUM_MIDDLE
    if d > k - kap:
        return 1 - ODD_SUM_SCALE * s / Fraction(d + 1, k - d)
    return EVEN_SUM_MIDDLE


def sigma_s(k: int, s: int, dist: DegreeDistribution, *, exact: bool = False) -> float | Fraction:
    """Per-measurement exponent Sigma_s of the union bound.

    With ``exact=True`` the distribution's rational form is used and a
    ``Fraction`` is returned.
    """
    if dist.k != k:
        raise ParameterError(f"distribution is over k={dist.k}, not {k}")
    if not 1 <= s <= k // 2:
        raise ParameterError(f"s must lie in 1..{k // 2}, got {s}")
    kc = ceil_kappa(k, s)
    if exact:
        if dist.exact is None:
            raise ParameterError("distribution has no exact representation")
        om = dist.exact
        middle = sum((om[d] for d in range(kc, k - kc + 1)), Fraction(0))
        low = sum((Fraction(d, k - d + 1) * om[d] for d in range(1, kc)), Fraction(0))
        high = sum((Fraction(k - d, d + 1) * om[d] for d in range(k - kc + 1, k + 1)), Fraction(0))
        return ODD_SUM_MIDDLE * middle + ODD_SUM_SCALE * s * (low + high)
    om = dist.probs
    middle = math.fsum(om[kc : k - kc + 1])
    low = math.fsum(d * om[d] / (k - d + 1) for d in range(1, kc))
    high = math.fsum((k - d) * om[d] / (d + 1) for d in range(k - kc + 1, k + 1))
    return 0.2 * middle + 0.4 * s * (low + high)


def sigma_table(dist: DegreeDistribution) -> np.ndarray:
    """Sigma_s for s = 1..floor(k/2), via prefix sums; entry ``s - 1``."""
    k = dist.k
    om = dist.probs
    d = np.arange(k + 1, dtype=np.float64)
    prefix = lambda v: np.concatenate([[0.0], np.cumsum(v)])  # noqa: E731
    p_mass = prefix(om)
    p_low = prefix(d * om / (k - d + 1))
    p_high = prefix((k - d) * om / (d + 1))
    s = np.arange(1, k // 2 + 1)
    kc = -(-(k - s + 1) // (2 * s + 1))
    # prefix[i] sums entries 0..i-1
    mid_hi = np.maximum(k - kc + 1, kc)
    middle = p_mass[mid_hi] - p_mass[kc]
    low = p_low[kc] - p_low[1]
    high = p_high[k + 1] - p_high[k - kc + 1]
    return 0.2 * middle + 0.4 * s * (low + high)


def log_binom(k: int, s: int) -> float:
    """log C(k, s) via log-gamma."""
    return math.lgamma(k + 1) - math.lgamma(s + 1) - math.lgamma(k - s + 1)


@dataclass(frozen=True, eq=False)
class BoundParams:
    k: int
    n: int
    dist: DegreeDistribution

    def __post_init__(self) -> None:
        if self.k < 3:
            raise ParameterError(f"k must be >= 3, got {self.k}")
        if self.n < 0:
            raise ParameterError(f"n must be >= 0, got {self.n}")
        if self.dist.k != self.k:
            raise ParameterError(f"distribution is over k={self.dist.k}, not {self.k}")

    @property
    def dbar(self) -> float:
        return self.dist.dbar

    @property
    def D(self) -> int | None:
        return self.dist.D


@dataclass(frozen=True)
class UnionBound:
    value: float
    log_value: float

    @property
    def vacuous(self) -> bool:
        """True when the bound exceeds 1 and says nothing."""
        return self.value > 1.0


def union_bound_pe(params: BoundParams, sigmas: np.ndarray | None = None) -> UnionBound:
    """2 * sum_{s <= k/2} C(k, s) exp(-n Sigma_s), reported unclamped.

    ``sigmas`` may be a precomputed :func:`sigma_table` for the same
    distribution, which makes n-sweeps cheap.
    """
    k, n = params.k, params.n
    if sigmas is None:
        sigmas = sigma_table(params.dist)
    s = np.arange(1, k // 2 + 1)
    logs = np.array([log_binom(k, int(j)) for j in s]) - n * sigmas
    top = float(np.max(logs))
    log_total = math.log(2.0) + top + math.log(math.fsum(np.exp(logs - top)))
    value = math.exp(log_total) if log_total < 709.0 else math.inf
    return UnionBound(value, log_total)


def isolation_lower_bound(params: BoundParams) -> float:
    """(1 - dbar/k)^n: probability that one given input touches no measurement."""
    dbar = params.dbar
    if dbar > params.k:
        raise ParameterError("query difficulty cannot exceed k")
    return (1.0 - dbar / params.k) ** params.n


def isolation_mvt_lower(k: int, n: int, dbar: float) -> float:
    """exp(-a / (1 - a/n)) with a = n*dbar/k; never exceeds the isolation probability."""
    if n == 0:
        return 1.0
    a = n * dbar / k
    return math.exp(-a / (1.0 - a / n))


def isolation_necessary_n(k: int, dbar: float, u: float) -> int:
    """Smallest n for which the single-node isolation probability is at most k**-u."""
    if u <= 0:
        raise ParameterError(f"u must be positive, got {u}")
    if not 0 < dbar < k:
        raise ParameterError(f"need 0 < dbar < k, got {dbar}")
    return math.ceil(u * math.log(k) / -math.log1p(-dbar / k))


def sample_complexity_threshold(k: int, dbar: float, c: float) -> int:
    """ceil(c * max(k, k log k / dbar)), natural log."""
    if k < 3:
        raise ParameterError(f"k must be >= 3, got {k}")
    if dbar < 1:
        raise ParameterError(f"dbar must be >= 1, got {dbar}")
    if c <= 0:
        raise ParameterError(f"c must be positive, got {c}")
    return math.ceil(c * max(k, k * math.log(k) / dbar))


def normalized_n(n: int, k: int, dbar: float) -> float:
    """n measured in units of k log k / dbar."""
    return n * dbar / (k * math.log(k))
