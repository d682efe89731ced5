"""Lattice primitives: exact decoders, dithered modulo arithmetic, goodness measures.

Built-in lattices are the scaled integer grid Z^K, the hexagonal lattice
A2, the checkerboard lattice D4 and the Gosset lattice E8, all with exact
O(K) nearest-neighbor decoders.  Arbitrary full-rank generator matrices
are supported through a bounded exhaustive search that trades speed for
correctness at small K.

Conventions: vectors are rows, the generator matrix holds basis vectors
as rows, and a point of the lattice is ``n @ G`` for integer ``n``.
All shapes broadcast over a leading batch axis.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, InvalidInputError
from .rng import EXPERIMENT_COVERING
from .stats import wilson_interval

_SQRT3 = math.sqrt(3.0)

_GEN_A2 = np.array([[1.0, 0.0], [0.5, _SQRT3 / 2.0]])
_GEN_D4 = np.array(
    [[1.0, -1.0, 0.0, 0.0], [0.0, 1.0, -1.0, 0.0], [0.0, 0.0, 1.0, -1.0], [0.0, 0.0, 1.0, 1.0]]
)
_GEN_E8 = np.array(
    [
        [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0],
        [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
    ]
)

# Per-element variance of a uniform distribution over the canonical Voronoi
# cell, and the canonical deep-hole distance (covering radius).  Published
# closed forms; the Monte Carlo estimators in this module reproduce them and
# the test suite checks that they do.
_CANONICAL_SECOND_MOMENT = {"a2": 5.0 / 72.0, "d4": 13.0 / 120.0, "e8": 929.0 / 12960.0}
_CANONICAL_COVERING_RADIUS = {"a2": 1.0 / _SQRT3, "d4": 1.0, "e8": 1.0}

_BUILTIN_KINDS = ("cubic", "a2", "d4", "e8")

# Candidate-set cap for custom decoders; beyond this the generator is too
# skewed for exhaustive search to be practical.
_MAX_CANDIDATES = 200_000


@dataclass(frozen=True, eq=False)
class Lattice:
    """An immutable K-dimensional lattice with cached geometry.

    ``second_moment`` is the per-element variance of a uniform draw over
    the basic Voronoi cell; for built-in kinds it is exact, for custom
    generators it is a Monte Carlo estimate (``moments_exact`` is False).
    ``covering_radius`` is None for custom lattices until estimated by
    :func:`covering_radius`.
    """

    kind: str
    dimension: int
    generator: np.ndarray
    scale: float
    volume: float
    second_moment: float
    covering_radius: float | None
    moments_exact: bool = True

    def __post_init__(self):
        gen = np.asarray(self.generator, dtype=float)
        if gen.ndim != 2 or gen.shape[0] != gen.shape[1]:
            raise InvalidInputError(f"generator must be square, got shape {gen.shape}")
        if gen.shape[0] != self.dimension:
            raise InvalidInputError("generator shape does not match dimension")
        if abs(np.linalg.det(gen)) <= 0.0:
            raise InvalidInputError("generator must have full rank")
        gen.setflags(write=False)
        object.__setattr__(self, "generator", gen)

    @property
    def name(self) -> str:
        if self.kind == "cubic":
            return f"cubic{self.dimension}"
        return self.kind


@dataclass(frozen=True)
class GoodnessReport:
    """Dimensionless goodness figures of one lattice at one operating point.

    ``nsm`` is the normalized second moment G, ``vnr`` the volume-to-noise
    ratio mu at escape probability ``p_e``, ``loss`` the loss factor L for
    the Gaussian/self-noise mixture at weight ``alpha``, and
    ``covering_loss`` the covering efficiency r^2 / (K sigma^2) >= 1.
    ``confidence_halfwidth`` is a 95% halfwidth on ``loss``.
    """

    nsm: float
    vnr: float
    loss: float
    covering_loss: float
    p_e: float
    alpha: float
    sample_count: int
    confidence_halfwidth: float


# ---------------------------------------------------------------------------
# Construction


def make_lattice(kind: str, dimension: int | None = None, scale: float = 1.0) -> Lattice:
    """Create a built-in lattice, optionally scaled.

    ``kind`` is one of ``cubic`` (requires ``dimension``), ``a2``, ``d4``,
    ``e8``.  ``scale`` multiplies the canonical generator.
    """
    kind = kind.lower()
    if scale <= 0.0:
        raise InvalidInputError(f"scale must be positive, got {scale}")
    if kind == "cubic":
        if dimension is None or dimension < 1:
            raise InvalidInputError("cubic lattices need a positive dimension")
        k = int(dimension)
        return Lattice(
            kind="cubic",
            dimension=k,
            generator=np.eye(k) * scale,
            scale=scale,
            volume=scale**k,
            second_moment=scale**2 / 12.0,
            covering_radius=0.5 * scale * math.sqrt(k),
        )
    if kind not in _CANONICAL_SECOND_MOMENT:
        raise InvalidInputError(f"unknown lattice kind {kind!r}")
    gen = {"a2": _GEN_A2, "d4": _GEN_D4, "e8": _GEN_E8}[kind]
    k = gen.shape[0]
    if dimension is not None and dimension != k:
        raise InvalidInputError(f"{kind} is {k}-dimensional")
    return Lattice(
        kind=kind,
        dimension=k,
        generator=gen * scale,
        scale=scale,
        volume=abs(np.linalg.det(gen)) * scale**k,
        second_moment=_CANONICAL_SECOND_MOMENT[kind] * scale**2,
        covering_radius=_CANONICAL_COVERING_RADIUS[kind] * scale,
    )


def from_name(name: str, scale: float = 1.0) -> Lattice:
    """Resolve CLI-style names: ``cubic1``, ``cubic2``, ..., ``a2``, ``d4``, ``e8``."""
    name = name.lower()
    if name.startswith("cubic"):
        try:
            k = int(name[len("cubic"):])
        except ValueError:
            raise InvalidInputError(f"bad cubic lattice name {name!r}") from None
        return make_lattice("cubic", k, scale)
    return make_lattice(name, scale=scale)


def custom_lattice(generator, *, estimate_samples: int = 200_000, seed: int = 0) -> Lattice:
    """Wrap an arbitrary full-rank generator matrix.

    The second moment is estimated from ``estimate_samples`` dither draws
    at construction; decoding uses bounded exhaustive search.
    """
    gen = np.array(generator, dtype=float)
    k = gen.shape[0]
    lat = Lattice(
        kind="custom",
        dimension=k,
        generator=gen,
        scale=1.0,
        volume=abs(np.linalg.det(gen)),
        second_moment=float("nan"),
        covering_radius=None,
        moments_exact=False,
    )
    _custom_offsets(lat)  # fail fast on absurdly skewed generators
    rng = np.random.default_rng((int(seed), EXPERIMENT_COVERING, 0))
    d = sample_dither(lat, rng, n=int(estimate_samples))
    object.__setattr__(lat, "second_moment", float(np.mean(d * d)))
    return lat


def builtin_names() -> tuple[str, ...]:
    return ("cubic1", "cubic2", "a2", "d4", "e8")


# ---------------------------------------------------------------------------
# Nearest-neighbor decoders


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # Exact halves round up, which picks the lexicographically larger
    # candidate coordinate-wise on the integer grid.
    return np.floor(x + 0.5)


def _lex_ge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise lexicographic a >= b for (n, K) arrays."""
    result = np.zeros(a.shape[0], dtype=bool)
    decided = np.zeros(a.shape[0], dtype=bool)
    for j in range(a.shape[1]):
        gt = ~decided & (a[:, j] > b[:, j])
        lt = ~decided & (a[:, j] < b[:, j])
        result |= gt
        decided |= gt | lt
    return result | ~decided


def _nearest_dk(x: np.ndarray) -> np.ndarray:
    """Nearest point of D_K (integer vectors with even coordinate sum).

    Round per coordinate, then fix an odd parity by re-rounding the worst
    coordinate the other way.  When several coordinates are equally worst
    the minimizers differ by which one flips; the lexicographically
    largest is an upward flip at the smallest tied index if the flip
    direction allows it, else a downward flip at the largest tied index.
    """
    f = _round_half_up(x)
    delta = x - f
    k = x.shape[-1]
    absd = np.abs(delta)
    tied = absd == np.max(absd, axis=-1, keepdims=True)
    up = tied & (delta >= 0.0)
    any_up = np.any(up, axis=-1)
    idx = np.arange(k)
    first_up = np.min(np.where(up, idx, k), axis=-1)
    last_tied = np.max(np.where(tied, idx, -1), axis=-1)
    rows = np.arange(x.shape[0])
    flip = np.where(any_up, first_up, last_tied)
    g = f.copy()
    g[rows, flip] += np.where(any_up, 1.0, -1.0)
    odd = np.mod(np.sum(f, axis=-1), 2.0) != 0.0
    return np.where(odd[:, None], g, f)


def _nearest_e8(x: np.ndarray) -> np.ndarray:
    """Nearest point of E8 = D8 united with D8 + (1/2, ..., 1/2)."""
    y0 = _nearest_dk(x)
    y1 = _nearest_dk(x - 0.5) + 0.5
    d0 = np.sum((x - y0) ** 2, axis=-1)
    d1 = np.sum((x - y1) ** 2, axis=-1)
    pick0 = (d0 < d1) | ((d0 == d1) & _lex_ge(y0, y1))
    return np.where(pick0[:, None], y0, y1)


def _lex_descending(points: np.ndarray) -> np.ndarray:
    order = np.lexsort(points.T[::-1])[::-1]
    return points[order]


def _enumerated_nearest(x: np.ndarray, gen: np.ndarray, ginv: np.ndarray,
                        candidates: np.ndarray) -> np.ndarray:
    """Fold into the fundamental parallelepiped, then search local candidates.

    ``candidates`` must cover every lattice point whose Voronoi cell can
    intersect the parallelepiped, sorted lexicographically descending so
    argmin tie-breaking picks the lexicographically largest point.
    """
    u = x @ ginv
    base = np.floor(u) @ gen
    p = x - base
    out = np.empty_like(x)
    # Chunk to bound the (batch, candidates, K) distance tensor.
    step = max(1, int(5e7) // (candidates.shape[0] * x.shape[1]))
    for lo in range(0, x.shape[0], step):
        sl = slice(lo, lo + step)
        diff = p[sl, None, :] - candidates[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        out[sl] = base[sl] + candidates[np.argmin(dist, axis=1)]
    return out


_A2_INV = np.linalg.inv(_GEN_A2)
_A2_CANDIDATES = _lex_descending(
    np.array([(i, j) for i in (-1, 0, 1, 2) for j in (-1, 0, 1, 2)], float) @ _GEN_A2
)


def _custom_offsets(lattice: Lattice) -> tuple[np.ndarray, np.ndarray]:
    hit = getattr(lattice, "_decode_cache", None)
    if hit is not None:
        return hit
    gen = lattice.generator
    ginv = np.linalg.inv(gen)
    # Any point of the parallelepiped is within r0 of a corner, so the
    # nearest lattice point has coefficients within r0 * ||col_j(G^-1)||
    # of the folded coefficients in [0, 1)^K.
    r0 = 0.5 * np.sum(np.linalg.norm(gen, axis=1))
    span = r0 * np.linalg.norm(ginv, axis=0)
    axes = [np.arange(math.floor(-s), math.ceil(1.0 + s) + 1) for s in span]
    count = math.prod(len(a) for a in axes)
    if count > _MAX_CANDIDATES:
        raise InvalidInputError(
            f"generator too skewed for exhaustive decoding ({count} candidates)"
        )
    mesh = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1).astype(float)
    candidates = _lex_descending(offsets @ gen)
    result = (ginv, candidates)
    object.__setattr__(lattice, "_decode_cache", result)
    return result


def _as_batch(lattice: Lattice, x) -> tuple[tuple[int, ...], np.ndarray]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != lattice.dimension:
        raise InvalidInputError(
            f"expected vectors of length {lattice.dimension}, got shape {arr.shape}"
        )
    return arr.shape, arr.reshape(-1, lattice.dimension)


def nearest_point(lattice: Lattice, x) -> np.ndarray:
    """Nearest lattice point in Euclidean distance.

    Ties are broken toward the lexicographically largest coordinate
    vector among the minimizers.
    """
    shape, flat = _as_batch(lattice, x)
    s = lattice.scale
    if lattice.kind == "cubic":
        out = _round_half_up(flat / s) * s
    elif lattice.kind == "d4":
        out = _nearest_dk(flat / s) * s
    elif lattice.kind == "e8":
        out = _nearest_e8(flat / s) * s
    elif lattice.kind == "a2":
        out = _enumerated_nearest(flat / s, _GEN_A2, _A2_INV, _A2_CANDIDATES) * s
    else:
        ginv, candidates = _custom_offsets(lattice)
        out = _enumerated_nearest(flat, lattice.generator, ginv, candidates)
    return out.reshape(shape)


def mod_lattice(lattice: Lattice, x) -> np.ndarray:
    """Fold ``x`` into the basic Voronoi cell: ``x - nearest_point(x)``."""
    return np.asarray(x, dtype=float) - nearest_point(lattice, x)


# Root lattice membership: the Voronoi cell is cut out by the minimal
# vectors alone, so x is in the cell iff <x, v> <= |v|^2 / 2 for every
# root v.  The maxima over the root families have O(K) closed forms.

_A2_ROOTS = np.array([[1.0, 0.0], [0.5, _SQRT3 / 2.0], [-0.5, _SQRT3 / 2.0]])


def _in_cell_dk(flat: np.ndarray) -> np.ndarray:
    # Roots (+-1, +-1, 0, ...): the largest |<x, v>| is the sum of the
    # two largest coordinate magnitudes.
    a = np.abs(flat)
    k = a.shape[-1]
    top2 = np.partition(a, k - 2, axis=-1)[..., k - 2:]
    return top2[..., 0] + top2[..., 1] <= 1.0


def _in_cell_e8(flat: np.ndarray) -> np.ndarray:
    # Half-integer roots (+-1/2)^8 with an even number of minus signs:
    # the best sign pattern matches sign(x), flipping the smallest |x_i|
    # when the matching pattern has odd parity.
    a = np.abs(flat)
    total = np.sum(a, axis=-1)
    odd = np.count_nonzero(flat < 0.0, axis=-1) % 2 == 1
    best_half = 0.5 * (total - 2.0 * np.min(a, axis=-1) * odd)
    return _in_cell_dk(flat) & (best_half <= 1.0)


def in_cell(lattice: Lattice, x) -> np.ndarray:
    """True where ``x`` lies in the basic Voronoi cell of the origin.

    Points exactly on the cell boundary may be classified either way;
    the decoders resolve such ties deterministically instead.
    """
    shape, flat = _as_batch(lattice, x)
    flat = flat / lattice.scale
    if lattice.kind == "cubic":
        hit = np.max(np.abs(flat), axis=-1) <= 0.5
    elif lattice.kind == "a2":
        hit = np.max(np.abs(flat @ _A2_ROOTS.T), axis=-1) <= 0.5
    elif lattice.kind == "d4":
        hit = _in_cell_dk(flat)
    elif lattice.kind == "e8":
        hit = _in_cell_e8(flat)
    else:
        hit = np.all(nearest_point(lattice, flat * lattice.scale) == 0.0, axis=-1)
    return hit.reshape(shape[:-1])


# ---------------------------------------------------------------------------
# Dither and measured geometry


def dither_from_uniform(lattice: Lattice, u) -> np.ndarray:
    """Map uniform [0,1)^K coefficients to a dither uniform over the cell."""
    shape, flat = _as_batch(lattice, u)
    return mod_lattice(lattice, flat @ lattice.generator).reshape(shape)


def sample_dither(lattice: Lattice, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Draw one (or ``n``) vectors uniform over the basic Voronoi cell."""
    if n is None:
        return dither_from_uniform(lattice, rng.random(lattice.dimension))
    return dither_from_uniform(lattice, rng.random((int(n), lattice.dimension)))


def second_moment(lattice: Lattice, n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Per-element second moment of the cell, with a 95% halfwidth.

    Cubic lattices have the closed form ``spacing^2 / 12`` (halfwidth 0);
    other kinds are estimated from ``n_samples`` dither draws.
    """
    if n_samples < 1000:
        raise InvalidInputError(f"need at least 1000 samples, got {n_samples}")
    if lattice.kind == "cubic":
        return lattice.scale**2 / 12.0, 0.0
    d = sample_dither(lattice, rng, n=int(n_samples))
    per_sample = np.sum(d * d, axis=-1) / lattice.dimension
    est = float(np.mean(per_sample))
    half = 1.96 * float(np.std(per_sample, ddof=1)) / math.sqrt(n_samples)
    return est, half


def scale_to_second_moment(lattice: Lattice, target_power: float) -> Lattice:
    """Rescale so the cell's per-element second moment equals ``target_power``."""
    if target_power <= 0.0:
        raise InvalidInputError(f"target power must be positive, got {target_power}")
    factor = math.sqrt(target_power / lattice.second_moment)
    rescaled = dataclasses.replace(
        lattice,
        generator=lattice.generator * factor,
        scale=lattice.scale * factor,
        volume=lattice.volume * factor**lattice.dimension,
        second_moment=target_power,
        covering_radius=None if lattice.covering_radius is None
        else lattice.covering_radius * factor,
    )
    return rescaled


def covering_radius(lattice: Lattice, *, n_samples: int = 10_000_000,
                    rng: np.random.Generator | None = None) -> float:
    """Covering radius (largest distance from the cell to the origin).

    Exact closed forms for built-in kinds.  Custom lattices get a lower
    bound from the maximum norm of folded samples; the estimate is cached
    on the lattice and exposed through ``covering_radius`` staying None
    until this is first called (``moments_exact`` is False for them).
    """
    if lattice.covering_radius is not None:
        return lattice.covering_radius
    if rng is None:
        rng = np.random.default_rng((0, EXPERIMENT_COVERING, 1))
    worst = 0.0
    remaining = int(n_samples)
    while remaining > 0:
        batch = min(remaining, 1_000_000)
        d = sample_dither(lattice, rng, n=batch)
        worst = max(worst, float(np.max(np.sum(d * d, axis=-1))))
        remaining -= batch
    estimate = math.sqrt(worst)
    object.__setattr__(lattice, "covering_radius", estimate)
    return estimate


# ---------------------------------------------------------------------------
# Goodness measures


def _escape_count(lattice: Lattice, noise: np.ndarray, scale_sq: float) -> int:
    return int(noise.shape[0] - np.count_nonzero(in_cell(lattice, noise / math.sqrt(scale_sq))))


def _critical_scale(lattice: Lattice, noise: np.ndarray, p_e: float,
                    rel_width: float = 0.005, hint: float | None = None
                    ) -> tuple[float, float, int]:
    """Smallest variance scale ``l`` with escape fraction <= ``p_e``.

    The noise samples are fixed, so the escape fraction of ``noise/sqrt(l)``
    is non-increasing in ``l`` (Voronoi cells are convex and contain the
    origin) and bisection is exact up to the bracket width.  ``hint``
    seeds the bracket near an expected solution.  Returns
    ``(l, bracket_halfwidth, escapes_at_l)``.
    """
    n = noise.shape[0]
    target = int(math.floor(p_e * n))
    lo = 0.5 * hint if hint else 0.5
    hi = 2.0 * lo
    expansions = 0
    while _escape_count(lattice, noise, hi) > target:
        lo = hi
        hi *= 2.0
        expansions += 1
        if expansions > 120:
            raise EstimationError(
                "escape probability target is unreachable",
                p_e=p_e, n_samples=n, bracket_hi=hi,
            )
    while _escape_count(lattice, noise, lo) <= target:
        hi = lo
        lo /= 2.0
        if lo < 1e-30:
            raise EstimationError(
                "escape probability stays below the target at all scales",
                p_e=p_e, n_samples=n, bracket_lo=lo,
            )
    while (hi - lo) / lo > rel_width:
        mid = 0.5 * (lo + hi)
        if _escape_count(lattice, noise, mid) > target:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return mid, 0.5 * (hi - lo), _escape_count(lattice, noise, mid)


def goodness_report(lattice: Lattice, p_e: float, alpha: float, n_samples: int,
                    rng: np.random.Generator) -> GoodnessReport:
    """Estimate the goodness figures of ``lattice`` at one operating point.

    The loss factor is the smallest variance scale at which the
    alpha-mixture of white Gaussian noise and negated dither escapes the
    cell with probability at most ``p_e``; the volume-to-noise ratio uses
    pure Gaussian noise.  Both come from bisection over a fixed sample
    set, stopping at 0.5% relative bracket width.
    """
    if not 0.0 < p_e < 1.0:
        raise InvalidInputError(f"p_e must be in (0, 1), got {p_e}")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must be in [0, 1], got {alpha}")
    n = int(n_samples)
    if p_e * n < 10.0:
        raise EstimationError(
            "too few samples to resolve the target escape probability",
            p_e=p_e, n_samples=n, expected_escapes=p_e * n,
        )
    k = lattice.dimension
    sigma = math.sqrt(lattice.second_moment)
    vol_term = lattice.volume ** (2.0 / k)
    nsm = lattice.second_moment / vol_term

    w = rng.standard_normal((n, k)) * sigma
    d = sample_dither(lattice, rng, n=n)
    mixture = math.sqrt(1.0 - (1.0 - alpha) ** 2) * w - (1.0 - alpha) * d
    loss, bracket_half, escapes = _critical_scale(lattice, mixture, p_e)

    # Halfwidth: push the target through the Wilson interval of the
    # escape fraction observed at the solution.
    p_lo, p_hi = wilson_interval(escapes, n)
    l_for_plo = _critical_scale(lattice, mixture, max(p_lo, 1.0 / n), hint=loss)[0]
    l_for_phi = _critical_scale(lattice, mixture, min(p_hi, 1.0 - 1.0 / n), hint=loss)[0]
    halfwidth = 0.5 * abs(l_for_plo - l_for_phi) + bracket_half

    unit = rng.standard_normal((n, k))
    t_star = _critical_scale(lattice, unit, p_e)[0]
    # unit/sqrt(t) in-cell with prob 1-p_e, so the critical noise
    # variance is 1/t and vnr = V^{2/K} * t.
    vnr = vol_term * t_star

    r = covering_radius(lattice)
    covering_loss = r * r / (k * lattice.second_moment)
    return GoodnessReport(
        nsm=nsm,
        vnr=vnr,
        loss=loss,
        covering_loss=covering_loss,
        p_e=p_e,
        alpha=alpha,
        sample_count=n,
        confidence_halfwidth=halfwidth,
    )
