"""
Closed-form security and robustness quantities.

Two models of Bob's pass probability are exposed side by side:

* the composition-weighted sum, whose closed form is (5/8)^(N-1);
* the uniform-permutation cycle model that the simulator actually realizes,
  (N+1)(N+2)(N+3) / (6 * 4^N).

They agree for N <= 2 and diverge from N = 3 on.
"""

import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import binomtest

logger = logging.getLogger(__name__)

FIVE_EIGHTHS = Fraction(5, 8)
BOUNDARY_TOL = 1e-12
_LOG_SPACE_MIN_EXPONENT = 64


class BiasTarget(BaseModel):
    """Cheat success must stay below 1/2 + xi."""

    model_config = ConfigDict(frozen=True)

    xi: float = Field(..., gt=0.0, lt=0.5)

    @property
    def pass_bound(self) -> float:
        return 2 * self.xi


class RobustnessQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma: float = Field(..., gt=0.0, le=1.0)
    n_pairs: int = Field(..., ge=1)


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")


def pass_prob_paper(n: int) -> float:
    """(5/8)^(N-1)."""
    _check_n(n)
    if n - 1 < _LOG_SPACE_MIN_EXPONENT:
        return 0.625 ** (n - 1)
    return math.exp((n - 1) * math.log(0.625))


def pass_prob_appendix_exact(n: int) -> Fraction:
    """Sum over m of C(N-1, m-1) / 4^(N-m), normalized by the number of compositions."""
    _check_n(n)
    weighted = sum(
        math.comb(n - 1, m - 1) * Fraction(1, 4 ** (n - m)) for m in range(1, n + 1)
    )
    return weighted / 2 ** (n - 1)


def pass_prob_appendix_sum(n: int) -> float:
    return float(pass_prob_appendix_exact(n))


@lru_cache(maxsize=None)
def stirling_first_kind_row(n: int) -> Tuple[int, ...]:
    """Unsigned c(n, m) for m = 0..n, from x(x+1)...(x+n-1)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    row = [1]
    for k in range(n):
        shifted = [0] + row
        row = [shifted[m] + k * (row[m] if m < len(row) else 0) for m in range(len(shifted))]
    return tuple(row)


def pass_prob_permutation_exact(n: int) -> Fraction:
    """Average of 4^(m-N) over uniform permutations of N pairs with m cycles."""
    _check_n(n)
    row = stirling_first_kind_row(n)
    total = sum(c * Fraction(4**m, 4**n) for m, c in enumerate(row))
    return total / math.factorial(n)


def pass_prob_permutation_model(n: int) -> float:
    return float(pass_prob_permutation_exact(n))


def pass_prob_permutation_closed_form(n: int) -> Fraction:
    _check_n(n)
    return Fraction((n + 1) * (n + 2) * (n + 3), 6 * 4**n)


def count_cycles(permutation: Tuple[int, ...]) -> int:
    """Cycles of a permutation of range(len(permutation))."""
    seen = [False] * len(permutation)
    cycles = 0
    for start in range(len(permutation)):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = permutation[j]
    return cycles


def exhaustive_permutation_average(n: int) -> Fraction:
    """Brute force over all N! permutations; only sensible for small N."""
    _check_n(n)
    total = sum(
        Fraction(1, 4 ** (n - count_cycles(perm))) for perm in itertools.permutations(range(n))
    )
    return total / math.factorial(n)


def models_disagree(n: int) -> bool:
    return pass_prob_permutation_exact(n) != FIVE_EIGHTHS ** (n - 1)


def robustness_ok(q: RobustnessQuery) -> bool:
    """1 - gamma^N <= (5/8)^(N-1)."""
    return 1.0 - q.gamma**q.n_pairs <= pass_prob_paper(q.n_pairs) + BOUNDARY_TOL


def min_gamma(n: int, p_threshold: float) -> float:
    """Smallest gamma with 1 - gamma^N <= p_threshold."""
    _check_n(n)
    if not 0.0 < p_threshold < 1.0:
        raise ValueError(f"p_threshold must lie in (0, 1), got {p_threshold}")
    return (1.0 - p_threshold) ** (1.0 / n)


def min_n_for_pass_bound(p_bound: float) -> int:
    """Smallest N with (5/8)^(N-1) <= p_bound, compared exactly."""
    if not 0.0 < p_bound <= 1.0:
        raise ValueError(f"Pass-probability bound must lie in (0, 1], got {p_bound}")
    bound = Fraction(p_bound)
    n, value = 1, Fraction(1)
    while value > bound:
        value *= FIVE_EIGHTHS
        n += 1
    return n


def min_n_for_bias(target: BiasTarget) -> int:
    return min_n_for_pass_bound(target.pass_bound)


def honest_accept_probability(gamma: float, n: int) -> float:
    """Exact accept rate of an honest run when both parties' outcomes are noisy.

    A slot matches when both reports are right, or both are wrong and land on
    the same one of the three wrong labels.
    """
    _check_n(n)
    per_slot = gamma**2 + (1.0 - gamma) ** 2 / 3.0
    return per_slot**n


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Binomial score interval, clamped so it always contains the point estimate."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    estimate = successes / trials
    low = max(0.0, min(float(ci.low), estimate))
    high = min(1.0, max(float(ci.high), estimate))
    return low, high


def pass_probability_table(max_n: int) -> List[Tuple[int, float, float, float]]:
    """(N, (5/8)^(N-1), appendix sum, permutation model) for N = 1..max_n."""
    return [
        (n, pass_prob_paper(n), pass_prob_appendix_sum(n), pass_prob_permutation_model(n))
        for n in range(1, max_n + 1)
    ]
