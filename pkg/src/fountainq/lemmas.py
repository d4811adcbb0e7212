"""Exhaustive exact-arithmetic checks of the combinatorial bounds.

Every check returns a report instead of raising, so callers can print a
summary and decide what a counterexample means.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import bounds
from .degree import harmonic, ideal_soliton


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    skipped: int = 0
    counterexamples: list[tuple] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def line(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({len(self.counterexamples)} counterexamples)"
        extra = f", {self.skipped} not applicable" if self.skipped else ""
        return f"{self.name}: {status} [{self.checked} checked{extra}]"


def i_d_bruteforce(k: int, s: int, d: int) -> int:
    """Count weight-d subsets of {0..k-1} meeting {0..s-1} in an even number of points."""
    return sum(
        1 for subset in itertools.combinations(range(k), d) if sum(1 for j in subset if j < s) % 2 == 0
    )


def verify_partition(max_k: int) -> CheckReport:
    """odd + even overlap counts add up to C(k, d)."""
    rep = CheckReport("odd/even partition of C(k,d)")
    for k in range(3, max_k + 1):
        for s in range(0, k + 1):
            for d in range(1, k + 1):
                rep.checked += 1
                if bounds.odd_sum_exact(k, s, d) + bounds.i_d_exact(k, s, d) != math.comb(k, d):
                    rep.counterexamples.append((k, s, d))
    return rep


def verify_lemma3(max_k: int) -> CheckReport:
    rep = CheckReport("odd-overlap lower bound")
    for k, s, d in _interior_triples(max_k):
        rep.checked += 1
        if bounds.odd_sum_exact(k, s, d) < bounds.lemma3_lower(k, s, d) * math.comb(k, d):
            rep.counterexamples.append((k, s, d))
    return rep


def verify_lemma1(max_k: int) -> CheckReport:
    rep = CheckReport("even-overlap (I_d) upper bound")
    for k, s, d in _interior_triples(max_k):
        rep.checked += 1
        if bounds.i_d_exact(k, s, d) > bounds.lemma1_upper(k, s, d) * math.comb(k, d):
            rep.counterexamples.append((k, s, d))
    return rep


def _interior_triples(max_k: int):
    for k in range(2, max_k + 1):
        for s in range(1, k):
            for d in range(1, k):
                yield k, s, d


def verify_sigma_chain(max_k: int) -> CheckReport:
    """sum_d Omega_d P(even | d) <= 1 - Sigma_s for every Soliton law with k <= max_k."""
    rep = CheckReport("per-row even-parity probability <= 1 - Sigma_s")
    for k in range(3, max_k + 1):
        for D in range(2, k + 1):
            dist = ideal_soliton(k, D, exact=True)
            om = dist.exact
            for s in range(1, k // 2 + 1):
                rep.checked += 1
                p_even = sum(
                    (om[d] * bounds.even_parity_fraction(k, s, d) for d in range(1, D + 1)),
                    Fraction(0),
                )
                if p_even > 1 - bounds.sigma_s(k, s, dist, exact=True):
                    rep.counterexamples.append((k, D, s))
    return rep


def verify_kappa_threshold(max_k: int) -> CheckReport:
    """ceil(kappa(s)) >= 4 exactly when s < (k-2)/7."""
    rep = CheckReport("ceil(kappa) >= 4 iff s < (k-2)/7")
    for k in range(3, max_k + 1):
        for s in range(1, k // 2 + 1):
            rep.checked += 1
            if (bounds.ceil_kappa(k, s) >= 4) != (7 * s < k - 2):
                rep.counterexamples.append((k, s))
    return rep


@dataclass(frozen=True)
class Lemma2Row:
    s: int
    ceil_kappa: int
    case: int
    applicable: bool
    log_lhs: float
    log_rhs: float
    passed: bool | None
    stirling_ok: bool | None


@dataclass
class Lemma2Report:
    k: int
    D: int
    n: int
    rows: list[Lemma2Row]

    @property
    def cases_seen(self) -> set[int]:
        return {r.case for r in self.rows}

    @property
    def failures(self) -> list[Lemma2Row]:
        return [r for r in self.rows if r.passed is False or r.stirling_ok is False]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def skipped(self) -> int:
        return sum(1 for r in self.rows if not r.applicable)

    def line(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({len(self.failures)} values of s)"
        cases = ",".join(str(c) for c in sorted(self.cases_seen))
        return (
            f"case bounds k={self.k} D={self.D} n={self.n}: {status} "
            f"[cases {cases}; {len(self.rows) - self.skipped} checked, {self.skipped} not applicable]"
        )


def lemma2_case(k: int, D: int, s: int) -> int:
    kc = bounds.ceil_kappa(k, s)
    if kc > D:
        return 1
    if kc >= 4:
        return 2
    if kc == 3:
        return 3
    return 4


def lemma2_min_n(k: int, D: int) -> int:
    """Smallest n meeting every case hypothesis at once."""
    need_iso = math.ceil(bounds.ISOLATION_EXPONENT * k * math.log(k) / harmonic(D))
    return max(bounds.LINEAR_CASE2 * k, need_iso)


def verify_lemma2_cases(k: int, D: int, n: int) -> Lemma2Report:
    """Check the per-s case bound on C(k,s) exp(-n Sigma_s) for every s <= k/2.

    Sigma_s is evaluated exactly; the comparison is made in the log domain.
    Values of s whose case hypothesis on n is unmet are marked not applicable.
    """
    dist = ideal_soliton(k, D, exact=True)
    dbar = dist.exact_dbar
    logk = math.log(k)
    rows = []
    for s in range(1, k // 2 + 1):
        kc = bounds.ceil_kappa(k, s)
        case = lemma2_case(k, D, s)
        sig = bounds.sigma_s(k, s, dist, exact=True)
        log_lhs = math.log(math.comb(k, s)) - float(n * sig)
        strict = False
        if case == 1:
            applicable = n * float(dbar) >= bounds.ISOLATION_EXPONENT * k * logk
            log_rhs = -s * logk
            strict = True
        elif case == 2:
            applicable = n >= bounds.LINEAR_CASE2 * k
            log_rhs = -s * logk if s * s <= k else -2.0 * math.sqrt(k) * math.log(2.0)
        else:
            applicable = n >= (bounds.LINEAR_CASE3 if case == 3 else bounds.LINEAR_CASE4) * k
            log_rhs = k * math.log(2.0) - k
        passed = None
        if applicable:
            passed = log_lhs < log_rhs if strict else log_lhs <= log_rhs
        stirling = None
        if 7 * s < k - 2:
            stirling = math.log(math.comb(k, s)) <= 2 * s * math.log(k / s)
        rows.append(Lemma2Row(s, kc, case, applicable, log_lhs, log_rhs, passed, stirling))
    return Lemma2Report(k, D, n, rows)


def verify_all(max_k: int, lemma2_pairs=((50, 10), (100, 20), (200, 31))) -> list:
    reports: list = [
        verify_partition(max_k),
        verify_lemma3(max_k),
        verify_lemma1(max_k),
        verify_sigma_chain(max_k),
        verify_kappa_threshold(max(max_k, 200)),
    ]
    for k, D in lemma2_pairs:
        reports.append(verify_lemma2_cases(k, D, lemma2_min_n(k, D)))
    return reports
