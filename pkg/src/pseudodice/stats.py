"""Null-hypothesis machinery for guess rates and census-based normality.

A blind guesser over an alphabet of size b has mean rate 1/b with
standard deviation sqrt(b-1)/(b*sqrt(n)) over n trials; the k-sigma
exceedance test, the one-sided subgroup lower confidence limit, the
per-prefix majority (ideal) predictor and the census normality test all
build on that null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bitseq import PatternCensus
from .errors import DomainError, ValidationError

# One-sided Student-t quantiles, df 1..30.  Only small degrees of
# freedom are ever needed, so an embedded table is exact and testable.
_T_ONE_SIDED = {
    0.99: (
        31.821, 6.965, 4.541, 3.747, 3.365, 3.143, 2.998, 2.896, 2.821, 2.764,
        2.718, 2.681, 2.650, 2.624, 2.602, 2.583, 2.567, 2.552, 2.539, 2.528,
        2.518, 2.508, 2.500, 2.492, 2.485, 2.479, 2.473, 2.467, 2.462, 2.457,
    ),
    0.95: (
        6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812,
        1.796, 1.782, 1.771, 1.761, 1.753, 1.746, 1.740, 1.734, 1.729, 1.725,
        1.721, 1.717, 1.714, 1.711, 1.708, 1.706, 1.703, 1.701, 1.699, 1.697,
    ),
}


def null_sigma(b: int, n: int) -> float:
    """Standard deviation of a blind guesser's rate: sqrt(b-1)/(b*sqrt(n))."""
    if b < 2:
        raise DomainError("alphabet size must be at least 2")
    if n < 1:
        raise DomainError("trial count must be at least 1")
    return math.sqrt(b - 1) / (b * math.sqrt(n))


def sigma_exceeds(rate: float, n: int, b: int = 2, k: float = 5.0) -> bool:
    """Whether rate strictly exceeds 1/b + k sigma of the guessing null."""
    if not 0.0 <= rate <= 1.0:
        raise DomainError(f"rate {rate} outside [0, 1]")
    return rate > 1.0 / b + k * null_sigma(b, n)


def t_quantile(confidence: float, df: int) -> float:
    """One-sided Student-t quantile from the embedded table (df 1..30)."""
    if confidence not in _T_ONE_SIDED:
        raise DomainError(
            f"confidence {confidence} not tabulated; available: "
            f"{sorted(_T_ONE_SIDED)}"
        )
    if not 1 <= df <= 30:
        raise DomainError(f"degrees of freedom {df} outside the table range 1..30")
    return _T_ONE_SIDED[confidence][df - 1]


def subgroup_lcl(rates, confidence: float = 0.99) -> float:
    """One-sided lower confidence limit on the mean of subgroup rates.

    mean - t_(confidence, k-1) * s / sqrt(k) with s the sample standard
    deviation over the k rates.
    """
    arr = np.asarray(rates, dtype=np.float64)
    k = arr.size
    if k < 2:
        raise DomainError("at least 2 subgroup rates are required")
    t = t_quantile(confidence, k - 1)
    mean = float(arr.mean())
    s = float(arr.std(ddof=1))
    return mean - t * s / math.sqrt(k)


def ideal_predictor_rate(census: PatternCensus) -> float:
    """In-sample rate of the per-prefix majority predictor.

    Sums, over every (L-1)-bit prefix, the larger of the two label
    counts, divided by the window count; upper-bounds the in-sample
    accuracy of every deterministic predictor.
    """
    if census.L < 2:
        raise DomainError("ideal predictor needs patterns of length >= 2")
    pairs = census.counts.reshape(-1, 2)
    return int(pairs.max(axis=1).sum()) / census.window_count


def majority_label(census: PatternCensus, prefix) -> tuple[int, int, int]:
    """(majority bit, count0, count1) for one (L-1)-bit prefix; tie -> 1."""
    bits = np.asarray(prefix, dtype=np.int64)
    if bits.size != census.L - 1 or bits.size and int(bits.max(initial=0)) > 1:
        raise DomainError(f"prefix must be {census.L - 1} bits")
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    c0 = int(census.counts[value << 1])
    c1 = int(census.counts[(value << 1) | 1])
    return (1 if c1 >= c0 else 0), c0, c1


@dataclass(frozen=True)
class NormalityReport:
    """Outcome of the census normality test at k sigma."""

    n: int
    L: int
    b: int
    window_count: int
    k: float
    statistic: float
    bound: float
    violated: bool
    frequencies: np.ndarray  # counts / window_count, length 2^L

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "W": self.window_count,
            "statistic": self.statistic,
            "bound": self.bound,
            "k": self.k,
            "violated": self.violated,
        }


def normality_test(census: PatternCensus, k: float = 5.0) -> NormalityReport:
    """Compare the majority-predictor statistic against 1/b + k sigma.

    The statistic is the summed per-prefix majority count over the
    window count W = n - L + 1; the bound uses the same W inside the
    null deviation.  A violation says the sequence's length-L windows
    are more predictable than a k-sigma fluctuation of a fair source.
    """
    b = 2
    w = census.window_count
    statistic = ideal_predictor_rate(census)
    bound = 1.0 / b + k * null_sigma(b, w)
    return NormalityReport(
        n=census.n,
        L=census.L,
        b=b,
        window_count=w,
        k=k,
        statistic=statistic,
        bound=bound,
        violated=statistic > bound,
        frequencies=census.counts / w,
    )


def save_normality_csv(report: NormalityReport, census: PatternCensus, path) -> None:
    """Per-pattern frequency table plus a trailing summary row."""
    if census.L != report.L or census.n != report.n:
        raise ValidationError("census does not match the normality report")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("pattern,count,frequency\n")
        for value in range(1 << census.L):
            c = int(census.counts[value])
            fh.write(f"{census.pattern_string(value)},{c},{c / report.window_count!r}\n")
        fh.write(f"_statistic,{report.window_count},{report.statistic!r}\n")
