"""Walk-on-spheres estimation of the Brownian escape probability.

A walk starts inside the unit disc and repeatedly jumps to a uniform point
on the largest circle around its position that avoids both the unit circle
and the obstacle union.  It is absorbed once it comes within ``eps_shell``
of either: reaching the unit circle counts as an escape, reaching an
obstacle disc as a hit.  The escape frequency estimates the harmonic
measure of the unit circle seen from the start point, the quantity whose
vanishing defines an unavoidable obstacle union.

Randomness is counter-based: the uniform used by walk w at step t is a
pure function of (seed, w, t) through a splitmix-style mixer, so serial,
chunked, and threaded executions produce bit-identical trajectories and
the aggregate is independent of scheduling.

Truncation bias is inherent and intentional: only materialized discs repel
the walk, so a walk below the deepest stored generation sees no obstacles;
escape probabilities are therefore reported per truncation depth and never
extrapolated to the infinite configuration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import Configuration, Point, SpatialIndex, TWO_PI
from .generators import truncate


class WalkerError(ValueError):
    """Invalid walk parameters or a contract violation."""


# ---------------------------------------------------------------------------
# counter-based randomness

_GAMMA_WALK = np.uint64(0x9E3779B97F4A7C15)
_SHIFT30 = np.uint64(30)
_SHIFT27 = np.uint64(27)
_SHIFT31 = np.uint64(31)
_SHIFT11 = np.uint64(11)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _SHIFT30)) * _MUL1
    z = (z ^ (z >> _SHIFT27)) * _MUL2
    return z ^ (z >> _SHIFT31)


def walk_uniforms(seed: int, walk_ids: np.ndarray, step: int) -> np.ndarray:
    """Uniforms in [0, 1) for the given walks at one step index.

    A pure function of (seed, walk id, step): execution order, chunking,
    and thread count cannot change any draw.
    """
    base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    key = _mix64(base + (walk_ids.astype(np.uint64) + np.uint64(1)) * _GAMMA_WALK)
    step_term = np.uint64(((step + 1) * 0xD1B54A32D192ED03) & 0xFFFFFFFFFFFFFFFF)
    val = _mix64(key + step_term)
    return (val >> _SHIFT11).astype(np.float64) * _INV53


class WalkStream:
    """Per-walk substream view for the single-walk API."""

    def __init__(self, seed: int, walk_id: int):
        self.seed = seed
        self.walk_id = walk_id
        self.step = 0

    def uniform(self) -> float:
        u = walk_uniforms(self.seed, np.array([self.walk_id], dtype=np.uint64), self.step)
        self.step += 1
        return float(u[0])


# ---------------------------------------------------------------------------
# parameters and outcomes

ESCAPED = "escaped"
HIT = "hit"
CENSORED = "censored"


@dataclass(frozen=True)
class WalkParams:
    eps_shell: float = 1e-4
    max_steps: int = 1_000_000
    start: Point = field(default_factory=lambda: Point(0.0, 0.0))
    seed: int = 0
    n_walks: int = 100_000
    chunk_size: int = 32_768
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if not (self.eps_shell > 0.0):
            raise WalkerError("eps_shell must be positive")
        if self.max_steps < 1:
            raise WalkerError("max_steps must be >= 1")
        if self.n_walks < 1:
            raise WalkerError("n_walks must be >= 1")
        if self.start.norm() >= 1.0:
            raise WalkerError("start point must lie inside the unit disc")
        if self.chunk_size < 1 or self.n_jobs < 1:
            raise WalkerError("chunk_size and n_jobs must be >= 1")


@dataclass(frozen=True)
class WalkOutcome:
    tag: str
    steps: int
    hit_disc: int | None = None


@dataclass(frozen=True)
class EscapeEstimate:
    p_escape: float
    ci95_halfwidth: float
    n_walks: int
    n_escaped: int
    n_hit: int
    n_censored: int
    mean_steps: float
    unreliable: bool

    @classmethod
    def from_counts(
        cls, n_escaped: int, n_hit: int, n_censored: int, total_steps: int
    ) -> "EscapeEstimate":
        n = n_escaped + n_hit + n_censored
        p = n_escaped / n
        return cls(
            p_escape=p,
            ci95_halfwidth=1.96 * math.sqrt(p * (1.0 - p) / n),
            n_walks=n,
            n_escaped=n_escaped,
            n_hit=n_hit,
            n_censored=n_censored,
            mean_steps=total_steps / n,
            unreliable=n_censored / n > 0.01,
        )


# ---------------------------------------------------------------------------
# stepping


def wos_step(p: Point, idx: SpatialIndex, stream: WalkStream) -> Point:
    """One jump: uniform point on the largest circle around p that stays
    inside the domain.  Must not be called inside an absorption shell."""
    s = 1.0 - p.norm()
    d_obs, _ = idx.distance(p)
    radius = min(s, d_obs)
    eps = 0.0
    if radius <= eps:
        raise WalkerError("wos_step called at a point touching the boundary")
    theta = TWO_PI * stream.uniform()
    return Point(p.x + radius * math.cos(theta), p.y + radius * math.sin(theta))


def run_walk(params: WalkParams, idx: SpatialIndex, walk_id: int = 0) -> WalkOutcome:
    """Single trajectory with classification checked before each step."""
    stream = WalkStream(params.seed, walk_id)
    p = params.start
    eps = params.eps_shell
    for t in range(params.max_steps + 1):
        s = 1.0 - p.norm()
        if s < eps:
            return WalkOutcome(tag=ESCAPED, steps=t)
        d_obs, nearest = idx.distance(p)
        if d_obs < eps:
            return WalkOutcome(tag=HIT, steps=t, hit_disc=nearest)
        if t == params.max_steps:
            break
        radius = min(s, d_obs)
        theta = TWO_PI * stream.uniform()
        p = Point(p.x + radius * math.cos(theta), p.y + radius * math.sin(theta))
    return WalkOutcome(tag=CENSORED, steps=params.max_steps)


def _run_chunk(
    params: WalkParams, idx: SpatialIndex, walk_lo: int, walk_hi: int
) -> tuple[int, int, int, int]:
    """(escaped, hit, censored, total steps) over walks [walk_lo, walk_hi)."""
    m = walk_hi - walk_lo
    ids = np.arange(walk_lo, walk_hi, dtype=np.uint64)
    px = np.full(m, params.start.x)
    py = np.full(m, params.start.y)
    eps = params.eps_shell
    n_escaped = n_hit = n_censored = 0
    total_steps = 0
    step = 0
    while len(ids):
        s = 1.0 - np.hypot(px, py)
        escaped = s < eps
        d_obs = idx.distance_many(px, py)
        hit = ~escaped & (d_obs < eps)
        done = escaped | hit
        if step == params.max_steps:
            n_escaped += int(np.count_nonzero(escaped))
            n_hit += int(np.count_nonzero(hit))
            n_censored += int(np.count_nonzero(~done))
            total_steps += step * len(ids)
            break
        if done.any():
            n_escaped += int(np.count_nonzero(escaped))
            n_hit += int(np.count_nonzero(hit))
            total_steps += step * int(np.count_nonzero(done))
            keep = ~done
            ids, px, py, s, d_obs = ids[keep], px[keep], py[keep], s[keep], d_obs[keep]
            if not len(ids):
                break
        radius = np.minimum(s, d_obs)
        theta = TWO_PI * walk_uniforms(params.seed, ids, step)
        px = px + radius * np.cos(theta)
        py = py + radius * np.sin(theta)
        step += 1
    return n_escaped, n_hit, n_censored, total_steps


def estimate_escape(
    params: WalkParams, config: Configuration, idx: SpatialIndex | None = None
) -> EscapeEstimate:
    """Escape-probability estimate over independent per-walk substreams.

    Aggregation is a sum of per-chunk counts, so the result is identical
    for any chunk size, execution order, or thread count.
    """
    idx = idx or SpatialIndex(config)
    d_start, _ = idx.distance(params.start)
    if d_start <= 0.0:
        raise WalkerError("start point lies inside a closed obstacle disc")
    bounds = list(range(0, params.n_walks, params.chunk_size)) + [params.n_walks]
    chunks = list(zip(bounds, bounds[1:]))
    if params.n_jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            results = list(
                pool.map(lambda c: _run_chunk(params, idx, c[0], c[1]), chunks)
            )
    else:
        results = [_run_chunk(params, idx, lo, hi) for lo, hi in chunks]
    n_escaped = sum(r[0] for r in results)
    n_hit = sum(r[1] for r in results)
    n_censored = sum(r[2] for r in results)
    total_steps = sum(r[3] for r in results)
    return EscapeEstimate.from_counts(n_escaped, n_hit, n_censored, total_steps)


# ---------------------------------------------------------------------------
# depth sweeps and the annulus oracle


@dataclass(frozen=True)
class DepthRow:
    n_max: int
    estimate: EscapeEstimate


def escape_vs_depth(
    config: Configuration, depths: Sequence[int], params: WalkParams
) -> list[DepthRow]:
    """One estimate per truncation depth, sharing the seed policy so that
    deeper rows see identical trajectories until the added discs act."""
    rows = []
    for n_max in depths:
        cut = truncate(config, n_max=n_max)
        rows.append(DepthRow(n_max=n_max, estimate=estimate_escape(params, cut)))
    return rows


def concentric_obstacle_config(r0: float) -> Configuration:
    """Single obstacle disc centered at the origin (the annulus oracle).

    The exact escape probability from |x| = s is 1 - log(1/s)/log(1/r0).
    This configuration intentionally covers the origin, so walks must start
    elsewhere.
    """
    if not (0.0 < r0 < 1.0):
        raise WalkerError("annulus obstacle radius must lie in (0, 1)")
    from .geometry import DiscBlock

    block = DiscBlock(np.array([0.0]), np.array([0.0]), np.array([math.log(r0)]))
    return Configuration(
        blocks=(block,),
        n_max=0,
        provenance={"generator": "annulus", "r0": r0},
    )


def annulus_escape_probability(r0: float, s: float) -> float:
    """Closed-form escape probability for the concentric obstacle."""
    if not (0.0 < r0 < s < 1.0):
        raise WalkerError("need 0 < r0 < s < 1")
    return 1.0 - math.log(1.0 / s) / math.log(1.0 / r0)
