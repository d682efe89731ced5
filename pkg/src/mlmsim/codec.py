"""Dithered modulo-lattice encoder/decoder and its analytic operating points.

The encoder folds the scaled source, dither and interference into the
lattice cell; the decoder re-centers the channel output, folds, and
applies a Wiener-style gain.  Parameter selection supports three modes:

* ``finite_k``: gains derived from a measured lattice loss factor,
* ``asymptotic``: the large-dimension limit of the same choice,
* ``manual``: caller-supplied gains.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .lattices import Lattice, mod_lattice

MODE_FINITE_K = "finite_k"
MODE_ASYMPTOTIC = "asymptotic"
MODE_MANUAL = "manual"

_MODES = (MODE_FINITE_K, MODE_ASYMPTOTIC, MODE_MANUAL)


@dataclass(frozen=True)
class MlmParams:
    """Operating point of the codec.

    ``p`` is the channel power constraint (the lattice second moment),
    ``n`` the channel noise variance, ``sigma_q2`` the variance of the
    source part unknown to the decoder.  ``alpha_c`` scales the channel
    output, ``alpha_s`` the source estimate, ``beta`` the source itself.
    """

    p: float
    n: float
    sigma_q2: float
    alpha_c: float
    alpha_s: float
    beta: float
    mode: str
    l_est: float | None = None

    @property
    def snr(self) -> float:
        return self.p / self.n

    @property
    def alpha_0(self) -> float:
        """Wiener coefficient for estimating the input from input plus noise."""
        return self.p / (self.p + self.n)

    @property
    def beta_0_sq(self) -> float:
        return self.p / self.sigma_q2

    @property
    def alpha_tilde(self) -> float:
        """Fraction of channel power allocated to the scaled source.

        Equals ``beta^2 sigma_q2 / p``; in ``finite_k`` mode this is the
        loss-adjusted ``max(alpha_0 - (L-1)/L, 0)`` that defined beta.
        """
        return self.beta**2 * self.sigma_q2 / self.p

    @property
    def sigma_eq2(self) -> float:
        """Variance of the equivalent additive noise alpha_c*Z - (1-alpha_c)*X."""
        return self.alpha_c**2 * self.n + (1.0 - self.alpha_c) ** 2 * self.p


class DecodeResult(NamedTuple):
    s_hat: np.ndarray
    m: np.ndarray
    t: np.ndarray


def _loss_adjusted_alpha(alpha_0: float, l_est: float) -> float:
    return max(alpha_0 - (l_est - 1.0) / l_est, 0.0)


def make_params(p: float, n: float, sigma_q2: float, mode: str, *,
                l_est: float | None = None, alpha_c: float | None = None,
                alpha_s: float | None = None, beta: float | None = None) -> MlmParams:
    """Build a validated parameter set for the requested mode.

    ``finite_k`` requires ``l_est`` (a measured loss factor >= 1) and
    rejects operating points whose loss-adjusted power share is zero,
    since those would zero the transmit signal.  ``manual`` requires all
    three gains and only range-checks them.
    """
    if p <= 0.0 or n <= 0.0 or sigma_q2 <= 0.0:
        raise InvalidInputError(
            f"p, n and sigma_q2 must be positive, got {p}, {n}, {sigma_q2}"
        )
    if mode not in _MODES:
        raise InvalidInputError(f"mode must be one of {_MODES}, got {mode!r}")
    alpha_0 = p / (p + n)

    if mode == MODE_ASYMPTOTIC:
        alpha_c = alpha_s = alpha_0
        beta = math.sqrt(alpha_0 * p / sigma_q2)
        l_est = None
    elif mode == MODE_FINITE_K:
        if l_est is None or l_est < 1.0:
            raise InvalidInputError(f"finite_k mode needs a loss estimate >= 1, got {l_est}")
        tilde = _loss_adjusted_alpha(alpha_0, l_est)
        if tilde == 0.0:
            raise InvalidInputError(
                f"lattice loss {l_est} leaves no transmit power at alpha_0={alpha_0:.6g}; "
                "the scaled source would vanish"
            )
        alpha_c = alpha_0
        beta = math.sqrt(tilde * p / sigma_q2)
        alpha_s = tilde * p / (tilde * p + alpha_0 * n)
    else:
        if alpha_c is None or alpha_s is None or beta is None:
            raise InvalidInputError("manual mode needs alpha_c, alpha_s and beta")
        l_est = None
    if not 0.0 < alpha_c <= 1.0:
        raise InvalidInputError(f"alpha_c must be in (0, 1], got {alpha_c}")
    if not 0.0 < alpha_s <= 1.0:
        raise InvalidInputError(f"alpha_s must be in (0, 1], got {alpha_s}")
    if beta <= 0.0:
        raise InvalidInputError(f"beta must be positive, got {beta}")
    return MlmParams(
        p=float(p), n=float(n), sigma_q2=float(sigma_q2),
        alpha_c=float(alpha_c), alpha_s=float(alpha_s), beta=float(beta),
        mode=mode, l_est=None if l_est is None else float(l_est),
    )


def _check_lattice(params: MlmParams, lattice: Lattice) -> None:
    if not math.isclose(lattice.second_moment, params.p, rel_tol=1e-9):
        raise InvalidInputError(
            f"lattice second moment {lattice.second_moment:.6g} does not match "
            f"the power constraint {params.p:.6g}; rescale the lattice first"
        )


def encode(params: MlmParams, lattice: Lattice, s, i, d) -> np.ndarray:
    """Channel input: ``[beta*S + D - alpha_c*I] mod Lambda``.

    The output lies in the basic Voronoi cell, and because the dither is
    uniform over the cell and independent of everything else, its average
    power per element is exactly the power constraint.
    """
    _check_lattice(params, lattice)
    s, i, d = (np.asarray(v, dtype=float) for v in (s, i, d))
    return mod_lattice(lattice, params.beta * s + d - params.alpha_c * i)


def decode(params: MlmParams, lattice: Lattice, y, j, d) -> DecodeResult:
    """Reconstruction from the channel output and the known source part.

    ``t = alpha_c*Y - D - beta*J`` is folded to ``m``, and
    ``s_hat = (alpha_s/beta) * m + J``.  Whether lattice decoding was
    correct is not observable here; the simulation harness, which knows
    the hidden source and noise, performs that check.
    """
    _check_lattice(params, lattice)
    y, j, d = (np.asarray(v, dtype=float) for v in (y, j, d))
    t = params.alpha_c * y - d - params.beta * j
    m = mod_lattice(lattice, t)
    s_hat = (params.alpha_s / params.beta) * m + j
    return DecodeResult(s_hat=s_hat, m=m, t=t)


# ---------------------------------------------------------------------------
# Analytic performance quantities


def d_opt(p: float, n: float, sigma_q2: float) -> float:
    """Least distortion achievable over this source/channel pair."""
    if p <= 0.0 or n <= 0.0 or sigma_q2 <= 0.0:
        raise InvalidInputError("d_opt needs positive arguments")
    return n / (p + n) * sigma_q2


def sdr_opt(snr: float) -> float:
    """Best signal-to-distortion ratio: ``1 + SNR``."""
    if snr <= 0.0:
        raise InvalidInputError("sdr_opt needs a positive SNR")
    return 1.0 + snr


def d_max(sigma_q2: float, l_tilde: float, alpha_tilde: float) -> float:
    """Upper bound on the conditional distortion under decoding failure.

    ``4 * sigma_q2 * (1 + l_tilde / alpha_tilde)``.  Undefined when no
    power is allocated to the source (``alpha_tilde == 0``), where the
    bound diverges.
    """
    if alpha_tilde <= 0.0:
        raise InvalidInputError(
            f"failure-distortion bound undefined for alpha_tilde={alpha_tilde}"
        )
    return 4.0 * sigma_q2 * (1.0 + l_tilde / alpha_tilde)


# ---------------------------------------------------------------------------
# Serialization


def params_to_json(params: MlmParams) -> str:
    doc = {
        "P": params.p,
        "N": params.n,
        "sigma_q2": params.sigma_q2,
        "alpha_c": params.alpha_c,
        "alpha_s": params.alpha_s,
        "beta": params.beta,
        "mode": params.mode,
        "l_est": params.l_est,
    }
    return json.dumps(doc, sort_keys=True)


def params_from_json(text: str) -> MlmParams:
    doc = json.loads(text)
    try:
        mode = doc["mode"]
        p, n, sigma_q2 = doc["P"], doc["N"], doc["sigma_q2"]
    except KeyError as missing:
        raise InvalidInputError(f"parameter document is missing {missing}") from None
    if mode == MODE_FINITE_K:
        return make_params(p, n, sigma_q2, mode, l_est=doc.get("l_est"))
    if mode == MODE_ASYMPTOTIC:
        return make_params(p, n, sigma_q2, mode)
    return make_params(
        p, n, sigma_q2, MODE_MANUAL,
        alpha_c=doc.get("alpha_c"), alpha_s=doc.get("alpha_s"), beta=doc.get("beta"),
    )
