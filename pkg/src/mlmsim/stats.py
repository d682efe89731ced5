"""Small statistics helpers used by the estimators."""

from __future__ import annotations

import math


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Preferred over the normal approximation because the proportions we
    estimate (decoding-failure rates) are often tiny, where the Wald
    interval degenerates.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    p_hat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def wilson_halfwidth(successes: int, trials: int, z: float = 1.96) -> float:
    lo, hi = wilson_interval(successes, trials, z)
    return 0.5 * (hi - lo)
