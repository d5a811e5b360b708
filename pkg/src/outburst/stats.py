"""Statistical helpers used by the experiment layer and the test gates.

Everything here is deterministic closed-form arithmetic: Wilson score
intervals, one- and two-sample Kolmogorov-Smirnov tests with p-values from
the asymptotic Kolmogorov distribution, a rational-approximation normal
quantile, a pooled two-proportion z-test, and batch means for correlated
series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ParameterError


def normal_sf(x: float) -> float:
    """Standard normal survival function."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# Rational approximation coefficients (Acklam); relative error < 1.2e-9.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile probability must lie in (0, 1), got {p}")
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def quantile(values: Sequence[float], q: float) -> float:
    """Empirical quantile with linear interpolation between order statistics."""
    if not values:
        raise ParameterError("quantile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"quantile level must lie in [0, 1], got {q}")
    xs = sorted(values)
    h = (len(xs) - 1) * q
    i = int(math.floor(h))
    if i + 1 >= len(xs):
        return xs[-1]
    frac = h - i
    return xs[i] + frac * (xs[i + 1] - xs[i])


@dataclass(frozen=True)
class ProportionInterval:
    successes: int
    trials: int
    confidence: float
    point: float
    low: float
    high: float


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> ProportionInterval:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ParameterError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise ParameterError("confidence must lie in (0, 1)")
    z = normal_quantile(0.5 + confidence / 2.0)
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    return ProportionInterval(successes, trials, confidence, p, low, high)


def kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov distribution.

    Alternating series for moderate arguments; for small arguments the
    complementary theta-series form of the CDF is used for accuracy.
    """
    if x <= 0.0:
        return 1.0
    if x < 1.0:
        v = math.pi * math.pi / (8.0 * x * x)
        s = 0.0
        for k in (1, 3, 5, 7, 9, 11):
            s += math.exp(-v * k * k)
        cdf = math.sqrt(2.0 * math.pi) / x * s
        return min(1.0, max(0.0, 1.0 - cdf))
    s = 0.0
    sign = 1.0
    for k in range(1, 64):
        term = math.exp(-2.0 * k * k * x * x)
        s += sign * term
        sign = -sign
        if term < 1e-18:
            break
    return min(1.0, max(0.0, 2.0 * s))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int | None


def _ks_one_sample(sample: Sequence[float], cdf: Callable[[float], float]) -> KsResult:
    xs = sorted(sample)
    n = len(xs)
    d = 0.0
    for i, x in enumerate(xs):
        f = cdf(x)
        hi = (i + 1) / n - f
        lo = f - i / n
        if hi > d:
            d = hi
        if lo > d:
            d = lo
    return KsResult(d, kolmogorov_sf(math.sqrt(n) * d), n, None)


def _ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KsResult:
    xa = sorted(a)
    xb = sorted(b)
    na, nb = len(xa), len(xb)
    i = j = 0
    d = 0.0
    while i < na and j < nb:
        v = xa[i] if xa[i] <= xb[j] else xb[j]
        while i < na and xa[i] == v:
            i += 1
        while j < nb and xb[j] == v:
            j += 1
        gap = abs(i / na - j / nb)
        if gap > d:
            d = gap
    n_eff = math.sqrt(na * nb / (na + nb))
    return KsResult(d, kolmogorov_sf(n_eff * d), na, nb)


def ks_test(sample: Sequence[float], reference) -> KsResult:
    """Kolmogorov-Smirnov test of ``sample`` against a reference CDF
    (callable) or a second sample (sequence)."""
    if len(sample) < 10:
        raise ParameterError("KS test needs at least 10 observations")
    if callable(reference):
        return _ks_one_sample(sample, reference)
    if len(reference) < 10:
        raise ParameterError("KS test needs at least 10 observations per side")
    return _ks_two_sample(sample, reference)


def two_proportion_test(
    s1: int, n1: int, s2: int, n2: int, alternative: str = "two-sided"
) -> tuple[float, float]:
    """Pooled z-test comparing two binomial proportions.

    Returns (z, p_value); ``alternative`` is the hypothesis on p1 - p2:
    "less", "greater", or "two-sided".
    """
    if min(n1, n2) < 1:
        raise ParameterError("both sample sizes must be positive")
    p1 = s1 / n1
    p2 = s2 / n2
    pool = (s1 + s2) / (n1 + n2)
    se = math.sqrt(pool * (1.0 - pool) * (1.0 / n1 + 1.0 / n2))
    if se == 0.0:
        return 0.0, 1.0
    z = (p1 - p2) / se
    if alternative == "less":
        return z, 1.0 - normal_sf(z)
    if alternative == "greater":
        return z, normal_sf(z)
    if alternative == "two-sided":
        return z, 2.0 * normal_sf(abs(z))
    raise ParameterError(f"unknown alternative {alternative!r}")


@dataclass(frozen=True)
class BatchMeans:
    mean: float
    standard_error: float
    batches: int


def batch_means(values: Sequence[float], batches: int = 20) -> BatchMeans:
    """Mean and batch-means standard error for a possibly correlated series."""
    n = len(values)
    if batches < 2 or n < 2 * batches:
        raise ParameterError("need at least two values per batch and two batches")
    size = n // batches
    used = size * batches
    ms = []
    for b in range(batches):
        chunk = values[b * size : (b + 1) * size]
        ms.append(sum(chunk) / size)
    mean = sum(values[:used]) / used
    var = sum((m - mean) ** 2 for m in ms) / (batches - 1)
    return BatchMeans(mean, math.sqrt(var / batches), batches)
