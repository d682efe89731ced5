"""Closed-form robustness and two-receiver broadcast trade-offs.

Everything here is pure arithmetic on SNR/SDR quantities: the SDR
guarantee of a fixed mismatched decoder, the high-SNR robust encoder,
the two-receiver broadcast SDR region with its time-sharing hull, a
textbook separation baseline for comparison, and the unequal-variance
matching condition.  SDRs are linear (not dB) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class MismatchInputs:
    """Gains and channel state for the mismatched-decoder SDR bound."""

    alpha_c: float
    alpha_s: float
    beta: float
    snr: float
    beta_0_sq: float

    @property
    def condition_holds(self) -> bool:
        """Correct-decoding condition: the folded signal fits the cell."""
        return (self.beta**2 / self.beta_0_sq
                + self.alpha_c**2 / self.snr
                + (1.0 - self.alpha_c) ** 2) < 1.0


def mismatch_sdr(inputs: MismatchInputs) -> tuple[float, bool]:
    """SDR approached by the scheme under arbitrary (possibly suboptimal) gains.

    Returns ``(bound, condition_holds)``.  The bound is meaningful only
    while the condition flag is true; callers must treat it as invalid
    otherwise.
    """
    b2 = inputs.beta**2
    noise_term = inputs.alpha_c**2 / inputs.snr + (1.0 - inputs.alpha_c) ** 2
    denom = (1.0 - inputs.alpha_s) ** 2 * b2 + inputs.alpha_s**2 * noise_term * inputs.beta_0_sq
    return b2 / denom, inputs.condition_holds


@dataclass(frozen=True)
class RobustEncoder:
    """A fixed high-SNR encoder valid for every SNR above ``snr0``."""

    beta_sq: float
    beta_0_sq: float
    snr0: float
    margin: float

    def predicted_sdr(self, snr: float) -> float:
        return self.beta_sq / self.beta_0_sq * snr

    @property
    def guarantee_ratio(self) -> float:
        """Worst-case fraction of the optimal SDR over all SNR >= snr0."""
        return self.margin * (self.snr0 - 1.0) / (self.snr0 + 1.0)


def robust_encoder_params(snr0: float, beta_0_sq: float, margin: float = 1.0) -> RobustEncoder:
    """Fixed encoder for unknown SNR >= ``snr0`` with unit decoder gains.

    ``beta^2 = margin * (snr0 - 1)/snr0 * beta_0^2``; margin = 1 sits on
    the correct-decoding boundary at ``snr0`` and is the limit quoted in
    the guarantee, margins below 1 back off from it.
    """
    if snr0 <= 1.0:
        raise InvalidInputError(f"robust encoder needs snr0 > 1, got {snr0}")
    if not 0.0 < margin <= 1.0:
        raise InvalidInputError(f"margin must be in (0, 1], got {margin}")
    beta_sq = margin * (snr0 - 1.0) / snr0 * beta_0_sq
    return RobustEncoder(beta_sq=beta_sq, beta_0_sq=beta_0_sq, snr0=snr0, margin=margin)


# ---------------------------------------------------------------------------
# Two-receiver broadcast region


@dataclass(frozen=True)
class BroadcastPoint:
    alpha_c: float
    sdr1: float
    sdr2: float
    alpha_bar: float


@dataclass(frozen=True)
class BroadcastRegion:
    points: tuple[BroadcastPoint, ...]
    corners: tuple[tuple[float, float], ...]
    hull: tuple[tuple[float, float], ...]


def alpha_bar(alpha_c: float, snr1: float) -> float:
    return alpha_c * (2.0 - alpha_c * (snr1 + 1.0) / snr1)


def admissible_alpha_c_max(snr1: float) -> float:
    return min(1.0, 2.0 * snr1 / (1.0 + snr1))


def broadcast_point(alpha_c: float, snr1: float, snr2: float) -> BroadcastPoint:
    """SDR pair reached by one choice of the shared channel gain."""
    bar = alpha_bar(alpha_c, snr1)

    def sdr(snr: float) -> float:
        return 1.0 + bar * snr / (alpha_c**2 + (1.0 - alpha_c) ** 2 * snr)

    return BroadcastPoint(alpha_c=alpha_c, sdr1=sdr(snr1), sdr2=sdr(snr2), alpha_bar=bar)


def no_interference_point(snr1: float, snr2: float) -> tuple[float, float]:
    """Extra pair available when there is no channel interference.

    Each receiver can then pick its own channel gain, so the first is
    served optimally and the second pays only for the shared ``beta``.
    """
    if snr1 <= 0.0 or snr2 <= 0.0:
        raise InvalidInputError("SNRs must be positive")
    return 1.0 + snr1, 1.0 + snr1 * (1.0 + snr2) / (1.0 + snr1)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _lower_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Pareto frontier of the lower convex envelope, left to right.

    The monotone chain ends at the lexicographically largest point, which
    may sit above the frontier; the trailing ascent is trimmed so the
    chain stops at the lowest-second-coordinate vertex.
    """
    pts = sorted(set(points))
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0.0:
            hull.pop()
        hull.append(p)
    while len(hull) >= 2 and hull[-1][1] >= hull[-2][1]:
        hull.pop()
    return hull


def broadcast_curve(snr1: float, snr2: float, grid_size: int) -> BroadcastRegion:
    """Trade-off curve over the admissible gain range, plus its hull.

    The hull is taken in the distortion plane (1/SDR per axis, with unit
    source variance) because time-sharing mixes distortions linearly,
    then mapped back to SDR pairs.  The trivial single-receiver corners
    are included.
    """
    if snr1 <= 0.0 or snr2 <= 0.0:
        raise InvalidInputError("SNRs must be positive")
    if snr1 > snr2:
        raise InvalidInputError(f"snr1 must not exceed snr2, got {snr1} > {snr2}")
    if grid_size < 2:
        raise InvalidInputError("grid_size must be at least 2")
    grid = np.linspace(0.0, admissible_alpha_c_max(snr1), int(grid_size))
    points = tuple(broadcast_point(float(a), snr1, snr2) for a in grid)
    corners = ((1.0 + snr1, 1.0), (1.0, 1.0 + snr2))
    dist_pairs = [(1.0 / p.sdr1, 1.0 / p.sdr2) for p in points]
    dist_pairs += [(1.0 / s1, 1.0 / s2) for s1, s2 in corners]
    hull = tuple((1.0 / d1, 1.0 / d2) for d1, d2 in _lower_hull(dist_pairs))
    return BroadcastRegion(points=points, corners=corners, hull=hull)


def separation_curve(snr1: float, snr2: float, grid_size: int) -> list[tuple[float, float]]:
    """Baseline region: superposition coding plus successive refinement.

    Non-normative comparison curve.  With power fraction ``lam`` on the
    coarse layer, receiver 1 decodes it against the fine layer as noise,
    receiver 2 adds the refinement rate.
    """
    if grid_size < 2:
        raise InvalidInputError("grid_size must be at least 2")
    out = []
    for lam in np.linspace(0.0, 1.0, int(grid_size)):
        sdr1 = 1.0 + lam * snr1 / (1.0 + (1.0 - lam) * snr1)
        sdr2 = sdr1 * (1.0 + (1.0 - lam) * snr2)
        out.append((float(sdr1), float(sdr2)))
    return out


# ---------------------------------------------------------------------------
# Unequal source variances


def beta_opt_sq(snr_n: float, sigma_n2: float, power: float = 1.0) -> float:
    """Optimal squared source gain for one receiver's variance and SNR."""
    return snr_n / (1.0 + snr_n) * power / sigma_n2


def unequal_variance_sdr(beta_sq: float, sigma_n2: float, snr_n: float,
                         power: float = 1.0) -> float:
    """SDR at one receiver when the shared gain is not its optimum.

    ``power`` is the channel power constraint the gains are expressed
    against (unit by default).
    """
    if beta_sq <= 0.0 or sigma_n2 <= 0.0 or snr_n <= 0.0:
        raise InvalidInputError("arguments must be positive")
    return 1.0 + beta_sq / beta_opt_sq(snr_n, sigma_n2, power) * snr_n


def optimality_condition(sigma1_2: float, snr1: float, sigma2_2: float, snr2: float,
                         rel_tol: float = 1e-12) -> bool:
    """True when one shared gain is simultaneously optimal for both receivers."""
    lhs = sigma1_2 * (1.0 + snr1) / snr1
    rhs = sigma2_2 * (1.0 + snr2) / snr2
    return math.isclose(lhs, rhs, rel_tol=rel_tol)
