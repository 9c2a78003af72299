"""Paired nonparametric statistics for severity ratings.

The signed-rank test drops zero differences, assigns average ranks to
tied absolute differences, and takes W as the sum of ranks of positive
differences. For n <= 20 non-zero pairs the p-value is exact over all
2^n sign assignments (computed by convolution over the doubled integer
ranks, which counts exactly what enumeration counts); larger samples
use the normal approximation with tie and continuity corrections.

The dominance test is an exact one-sided binomial tail computed with
integer binomial coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from agenticsum.errors import UndefinedTestError

EXACT_LIMIT = 20

_ALTERNATIVES = ("greater", "two_sided")

Pair = tuple[float, float]


@dataclass(frozen=True)
class PairedRatings:
    """Paired severity ratings (baseline, treatment) on the 1-5 scale."""

    pairs: tuple[Pair, ...]
    domain: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "pairs", tuple((float(a), float(b)) for a, b in self.pairs)
        )
        for a, b in self.pairs:
            if not (1.0 <= a <= 5.0 and 1.0 <= b <= 5.0):
                raise ValueError(f"ratings must lie in [1, 5], got ({a}, {b})")

    def differences(self) -> list[float]:
        return [a - b for a, b in self.pairs]


@dataclass(frozen=True)
class WilcoxonResult:
    w: float
    p: float
    n_nonzero: int
    method: str


def _doubled_ranks(abs_diffs: Sequence[float]) -> list[int]:
    """Average ranks of |differences|, doubled so ties stay integral.

    A tie group occupying 1-based positions lo..hi gets average rank
    (lo + hi) / 2, i.e. a doubled rank of lo + hi.
    """
    order = sorted(range(len(abs_diffs)), key=lambda i: abs_diffs[i])
    doubled = [0] * len(abs_diffs)
    pos = 0
    while pos < len(order):
        end = pos
        while (
            end + 1 < len(order)
            and abs_diffs[order[end + 1]] == abs_diffs[order[pos]]
        ):
            end += 1
        lo, hi = pos + 1, end + 1
        for j in range(pos, end + 1):
            doubled[order[j]] = lo + hi
        pos = end + 1
    return doubled


def _exact_tail_counts(doubled_ranks: Sequence[int]) -> list[int]:
    """counts[s] = number of sign assignments whose positive doubled-rank
    sum equals s. Convolution over (1 + x^rank) factors; the result is
    identical to enumerating all 2^n assignments."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for rank in doubled_ranks:
        for s in range(total, rank - 1, -1):
            counts[s] += counts[s - rank]
    return counts


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_from_differences(
    diffs: Sequence[float], alternative: str = "greater"
) -> WilcoxonResult:
    """Signed-rank test over raw paired differences."""
    if alternative not in _ALTERNATIVES:
        raise ValueError(
            f"alternative must be one of {_ALTERNATIVES}, got {alternative!r}"
        )
    nonzero = [d for d in diffs if d != 0.0]
    n = len(nonzero)
    if n == 0:
        raise UndefinedTestError("all paired differences are zero")
    doubled = _doubled_ranks([abs(d) for d in nonzero])
    w2 = sum(r for d, r in zip(nonzero, doubled) if d > 0)
    w = w2 / 2.0

    if n <= EXACT_LIMIT:
        counts = _exact_tail_counts(doubled)
        denom = 1 << n
        ge = sum(counts[w2:])
        le = sum(counts[: w2 + 1])
        if alternative == "greater":
            p = Fraction(ge, denom)
        else:
            p = min(Fraction(1), 2 * min(Fraction(ge, denom), Fraction(le, denom)))
        return WilcoxonResult(w=w, p=float(p), n_nonzero=n, method="exact")

    mean = n * (n + 1) / 4.0
    tie_term = 0.0
    seen: dict[int, int] = {}
    for r in doubled:
        seen[r] = seen.get(r, 0) + 1
    for count in seen.values():
        tie_term += count**3 - count
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    sd = math.sqrt(variance)
    if alternative == "greater":
        z = (w - mean - 0.5) / sd
        p_val = _normal_sf(z)
    else:
        z = max(abs(w - mean) - 0.5, 0.0) / sd
        p_val = min(1.0, 2.0 * _normal_sf(z))
    return WilcoxonResult(w=w, p=p_val, n_nonzero=n, method="normal")


def wilcoxon_signed_rank(
    pairs: PairedRatings | Sequence[Pair], alternative: str = "greater"
) -> WilcoxonResult:
    """Signed-rank test over (baseline, treatment) pairs; differences are
    baseline minus treatment."""
    if isinstance(pairs, PairedRatings):
        diffs = pairs.differences()
    else:
        diffs = [float(a) - float(b) for a, b in pairs]
    return wilcoxon_from_differences(diffs, alternative)


def rank_biserial(pairs: PairedRatings | Sequence[Pair]) -> float:
    """Rank-biserial effect size: (n_pos - n_neg) / (n_pos + n_neg),
    zero differences excluded."""
    if isinstance(pairs, PairedRatings):
        diffs = pairs.differences()
    else:
        diffs = [float(a) - float(b) for a, b in pairs]
    n_pos = sum(1 for d in diffs if d > 0)
    n_neg = sum(1 for d in diffs if d < 0)
    if n_pos + n_neg == 0:
        raise UndefinedTestError("all paired differences are zero")
    return (n_pos - n_neg) / (n_pos + n_neg)


def binomial_dominance(successes: int, n: int) -> float:
    """Exact one-sided sign-test tail P(X >= successes) with X ~ Bin(n, 1/2)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}], got {successes}")
    tail = sum(math.comb(n, k) for k in range(successes, n + 1))
    return float(Fraction(tail, 1 << n))


def correct_guess_accuracy(successes: int, n: int) -> float:
    """Percentage of correct guesses, rounded to one decimal."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}], got {successes}")
    return round(100.0 * successes / n, 1)
