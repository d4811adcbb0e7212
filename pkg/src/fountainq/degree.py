"""Output-degree distributions and query difficulty."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ParameterError


def harmonic(D: int) -> float:
    """H_D = 1 + 1/2 + ... + 1/D."""
    return math.fsum(1.0 / d for d in range(1, D + 1))


@dataclass(frozen=True)
class SolitonParams:
    k: int
    D: int

    def __post_init__(self) -> None:
        if self.k < 3:
            raise ParameterError(f"k must be >= 3, got {self.k}")
        if not 2 <= self.D <= self.k:
            raise ParameterError(f"D must lie in 2..k={self.k}, got {self.D}")

    @property
    def dbar(self) -> float:
        return harmonic(self.D)


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """Probability vector over degrees ``0..k``.

    ``probs`` is float64; ``exact`` carries the same law as Fractions when the
    distribution was built with the rational backend.
    """

    k: int
    probs: np.ndarray
    exact: tuple[Fraction, ...] | None = None
    D: int | None = None
    dbar: float = field(init=False)
    _support: np.ndarray = field(init=False, repr=False)
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (self.k + 1,):
            raise ParameterError(f"need {self.k + 1} probabilities, got shape {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ParameterError("probabilities must be finite and nonnegative")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ParameterError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if probs[0] != 0:
            raise ParameterError("degree 0 must have zero probability")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        degrees = np.arange(self.k + 1)
        object.__setattr__(self, "dbar", math.fsum(degrees * probs))
        support = np.flatnonzero(probs > 0)
        cdf = np.cumsum(probs[support])
        # pin the top so a uniform in [0, 1) never falls off the end
        cdf[-1] = np.inf
        object.__setattr__(self, "_support", support)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def support(self) -> np.ndarray:
        return self._support

    @property
    def exact_dbar(self) -> Fraction:
        if self.exact is None:
            raise ValueError("distribution has no exact representation")
        return sum((d * p for d, p in enumerate(self.exact)), Fraction(0))

    def second_moment(self) -> float:
        degrees = np.arange(self.k + 1, dtype=np.float64)
        return math.fsum(degrees**2 * self.probs)

    def describe(self) -> str:
        if self.D is not None:
            return f"soliton(k={self.k}, D={self.D})"
        return f"custom(k={self.k})"


def ideal_soliton(k: int, D: int, *, exact: bool = False) -> DegreeDistribution:
    """Truncated ideal Soliton law: 1/D at d=1, 1/(d(d-1)) for 2 <= d <= D."""
    SolitonParams(k, D)
    fracs = [Fraction(0)] * (k + 1)
    fracs[1] = Fraction(1, D)
    for d in range(2, D + 1):
        fracs[d] = Fraction(1, d * (d - 1))
    probs = np.zeros(k + 1)
    probs[1] = 1.0 / D
    d = np.arange(2, D + 1, dtype=np.float64)
    probs[2 : D + 1] = 1.0 / (d * (d - 1.0))
    return DegreeDistribution(k, probs, tuple(fracs) if exact else None, D)


def point_mass(k: int, d: int) -> DegreeDistribution:
    if not 1 <= d <= k:
        raise ParameterError(f"degree must lie in 1..{k}, got {d}")
    probs = np.zeros(k + 1)
    probs[d] = 1.0
    fracs = [Fraction(0)] * (k + 1)
    fracs[d] = Fraction(1)
    return DegreeDistribution(k, probs, tuple(fracs))


def from_probs(probs: Sequence[float]) -> DegreeDistribution:
    """Wrap a user-supplied law over degrees ``0..len(probs)-1``."""
    probs = np.asarray(probs, dtype=np.float64)
    return DegreeDistribution(len(probs) - 1, probs)


def query_difficulty(dist: DegreeDistribution) -> float:
    """Expected query degree, sum of d * Omega_d."""
    return dist.dbar


def soliton_for_difficulty(k: int, target_dbar: float) -> SolitonParams:
    """Truncation degree D whose harmonic number is closest to ``target_dbar``.

    Ties go to the smaller D.  The achieved difficulty is ``result.dbar``.
    """
    if k < 3:
        raise ParameterError(f"k must be >= 3, got {k}")
    lo, hi = harmonic(2), harmonic(k)
    if not lo <= target_dbar <= hi:
        raise ParameterError(
            f"target difficulty {target_dbar} outside [H_2, H_k] = [{lo:.6g}, {hi:.6g}]"
        )
    best_D, best_gap = 2, math.inf
    for D in range(2, k + 1):
        h = harmonic(D)
        gap = abs(h - target_dbar)
        if gap < best_gap:
            best_D, best_gap = D, gap
        elif h > target_dbar:
            break
    return SolitonParams(k, best_D)


def sample_degrees(dist: DegreeDistribution, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` i.i.d. degrees by binary search in the cumulative table."""
    u = rng.random(size)
    return dist._support[np.searchsorted(dist._cdf, u, side="right")]


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    return int(sample_degrees(dist, 1, rng)[0])
