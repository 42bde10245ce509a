"""Planar primitives, the dyadic polar grid on the unit disc, obstacle
configurations, and exact distance queries against the obstacle union.

Everything in this package lives inside the open unit disc B.  The region
outside |x| < 1/2 is covered by dyadic polar cells: generation n >= 1
occupies the annulus 2^{-n-1} <= 1 - r <= 2^{-n} and is split into 2^{n+4}
equal angular sectors.  Cells are closed sets, so boundary contact counts
as intersection.

Obstacle radii are carried in log space.  The configurations this package
studies routinely have radii far below the smallest positive double (for
instance exp(-1/(c0 * (1-t)^beta)) at t close to 1), so ``exp(log_radius)``
may round to 0.0 while ``log_radius`` itself stays exact and is what every
criterion actually consumes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

SCHEMA_VERSION = 1

# exp(x) underflows to 0.0 below roughly -745; radii smaller than that are
# exactly zero in distance arithmetic but keep their exact log value.
LOG_UNDERFLOW = -745.0


class GeometryError(ValueError):
    """Invalid geometric object or query."""


class ConfigurationTooLarge(RuntimeError):
    """Materializing this configuration would exceed the requested limit."""


def wrap_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    return t + TWO_PI if t < 0.0 else t


def radius_from_log(log_r: float) -> float:
    """exp(log_r), flushing to 0.0 instead of raising on deep underflow."""
    if log_r < LOG_UNDERFLOW:
        return 0.0
    return math.exp(log_r)


# ---------------------------------------------------------------------------
# points and discs


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        return wrap_angle(math.atan2(self.y, self.x))

    def rotated(self, angle: float) -> "Point":
        c, s = math.cos(angle), math.sin(angle)
        return Point(c * self.x - s * self.y, s * self.x + c * self.y)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class Disc:
    """A closed obstacle disc strictly inside the unit disc.

    ``log_radius`` is the primary field; ``radius`` is its (possibly
    underflowed) exponential.
    """

    center: Point
    log_radius: float

    @classmethod
    def from_radius(cls, center: Point, radius: float) -> "Disc":
        if not (radius > 0.0) or not math.isfinite(radius):
            raise GeometryError(f"disc radius must be positive, got {radius}")
        return cls(center, math.log(radius))

    @property
    def radius(self) -> float:
        return radius_from_log(self.log_radius)

    @property
    def boundary_gap(self) -> float:
        """1 - |center|, the distance scale to the unit circle."""
        return 1.0 - self.center.norm()

    def __post_init__(self) -> None:
        if not math.isfinite(self.log_radius):
            raise GeometryError("disc log_radius must be finite")
        s = self.boundary_gap
        if s <= 0.0:
            raise GeometryError("disc center must lie inside the unit disc")
        if self.center.norm() + self.radius >= 1.0:
            raise GeometryError("closed disc must lie inside the unit disc")
        if self.log_radius >= math.log(s):
            raise GeometryError(
                "disc radius must be smaller than its distance to the unit circle"
            )


def generation_of(s: float) -> int:
    """Dyadic generation of a boundary gap s = 1 - |x|.

    Returns the n >= 1 with 2^{-n-1} < s <= 2^{-n}; the boundary value
    s = 2^{-n} belongs to generation n.  Returns 0 for s > 1/2 (the central
    region carries no grid cells).
    """
    if not (0.0 < s <= 1.0):
        raise GeometryError(f"boundary gap must be in (0, 1], got {s}")
    if s > 0.5:
        return 0
    n = int(math.floor(-math.log2(s)))
    while 2.0 ** (-n) < s:
        n -= 1
    while s <= 2.0 ** (-n - 1):
        n += 1
    return n


def generations_of(s: np.ndarray) -> np.ndarray:
    """Vectorized :func:`generation_of`."""
    s = np.asarray(s, dtype=np.float64)
    if np.any(s <= 0.0) or np.any(s > 1.0):
        raise GeometryError("boundary gaps must be in (0, 1]")
    with np.errstate(divide="ignore"):
        n = np.floor(-np.log2(s)).astype(np.int64)
    n = np.where(2.0 ** (-n.astype(np.float64)) < s, n - 1, n)
    n = np.where(s <= 2.0 ** (-(n + 1).astype(np.float64)), n + 1, n)
    return np.where(s > 0.5, 0, n)


# ---------------------------------------------------------------------------
# dyadic polar cells


def sector_count(n: int) -> int:
    """Number of angular sectors in generation n."""
    return 1 << (n + 4)


@dataclass(frozen=True)
class WhitneyIndex:
    """Index (n, m) of a dyadic polar cell; m is reduced mod 2^{n+4}."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or not isinstance(self.m, int):
            raise GeometryError("cell index must be a pair of integers")
        if self.n < 1:
            raise GeometryError(f"cell generation must be >= 1, got {self.n}")
        object.__setattr__(self, "m", self.m % sector_count(self.n))


@dataclass(frozen=True)
class WhitneyCell:
    """Closed polar rectangle: r in [r_inner, r_outer], theta in [lo, hi]."""

    index: WhitneyIndex
    r_inner: float
    r_outer: float
    theta_lo: float
    theta_hi: float

    @property
    def angular_width(self) -> float:
        return self.theta_hi - self.theta_lo

    def diameter(self) -> float:
        """Exact diameter of the closed cell."""
        dth = self.angular_width
        outer_chord = 2.0 * self.r_outer * math.sin(dth / 2.0)
        diagonal = math.sqrt(
            self.r_inner**2
            + self.r_outer**2
            - 2.0 * self.r_inner * self.r_outer * math.cos(dth)
        )
        return max(outer_chord, diagonal, self.r_outer - self.r_inner)

    def area(self) -> float:
        return 0.5 * self.angular_width * (self.r_outer**2 - self.r_inner**2)

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        r = p.norm()
        if r < self.r_inner - tol or r > self.r_outer + tol:
            return False
        # circular containment of the angle
        width = self.angular_width
        rel = wrap_angle(p.angle() - self.theta_lo)
        return rel <= width + tol or rel >= TWO_PI - tol

    def distance_to(self, p: Point) -> float:
        """Euclidean distance from p to the closed cell (0 if inside)."""
        rel = wrap_angle(p.angle() - self.theta_lo)
        r = p.norm()
        if rel <= self.angular_width:
            if r < self.r_inner:
                return self.r_inner - r
            if r > self.r_outer:
                return r - self.r_outer
            return 0.0
        # nearest point lies on one of the two radial edge segments
        best = math.inf
        for theta in (self.theta_lo, self.theta_hi):
            ex, ey = math.cos(theta), math.sin(theta)
            t = min(max(p.x * ex + p.y * ey, self.r_inner), self.r_outer)
            best = min(best, math.hypot(p.x - t * ex, p.y - t * ey))
        return best


def whitney_cell(idx: WhitneyIndex) -> WhitneyCell:
    """The closed cell with 2^{-n-1} <= 1-r <= 2^{-n} and its angular slot."""
    n, m = idx.n, idx.m
    step = TWO_PI / sector_count(n)
    return WhitneyCell(
        index=idx,
        r_inner=1.0 - 2.0 ** (-n),
        r_outer=1.0 - 2.0 ** (-n - 1),
        theta_lo=m * step,
        theta_hi=(m + 1) * step,
    )


def cell_center(idx: WhitneyIndex) -> Point:
    """Reference point (1 - 2^{-n}) * exp(2*pi*i*m / 2^{n+4}) of the cell."""
    rho = 1.0 - 2.0 ** (-idx.n)
    theta = TWO_PI * idx.m / sector_count(idx.n)
    return Point(rho * math.cos(theta), rho * math.sin(theta))


def cells_intersecting_disc(d: Disc) -> list[WhitneyIndex]:
    """All cells whose closed cell meets the closed disc, in (n, m) order.

    Discs wholly inside |x| < 1/2 meet no cells and yield an empty list.
    """
    r = d.radius
    s_center = d.boundary_gap
    s_lo = max(s_center - r, 1e-300)
    s_hi = s_center + r
    if s_lo > 0.5:
        return []
    s_hi = min(s_hi, 0.5)
    n_lo = generation_of(s_hi)
    n_hi = generation_of(s_lo)
    if n_lo < 1:
        n_lo = 1
    out: list[WhitneyIndex] = []
    theta_c = d.center.angle()
    rho_c = d.center.norm()
    for n in range(n_lo, n_hi + 1):
        count = sector_count(n)
        step = TWO_PI / count
        # angular half-width subtended by the disc, padded one sector
        if rho_c > r:
            half = math.asin(min(1.0, r / rho_c))
            base = int(math.floor(theta_c / step))
            reach = int(math.ceil(half / step)) + 1
            m_candidates = range(base - reach, base + reach + 2)
        else:
            m_candidates = range(count)
        if len(m_candidates) >= count:
            m_candidates = range(count)
        seen: set[int] = set()
        for m_raw in m_candidates:
            m = m_raw % count
            if m in seen:
                continue
            seen.add(m)
            cell = whitney_cell(WhitneyIndex(n, m))
            if cell.distance_to(d.center) <= r:
                out.append(WhitneyIndex(n, m))
    out.sort(key=lambda i: (i.n, i.m))
    return out


# ---------------------------------------------------------------------------
# disc storage blocks


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscBlock:
    """Explicitly stored discs (coordinates plus log radii)."""

    x: np.ndarray
    y: np.ndarray
    log_r: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _as_readonly(self.x))
        object.__setattr__(self, "y", _as_readonly(self.y))
        object.__setattr__(self, "log_r", _as_readonly(self.log_r))
        if not (len(self.x) == len(self.y) == len(self.log_r)):
            raise GeometryError("disc block arrays must have equal length")

    def __len__(self) -> int:
        return len(self.x)

    @property
    def boundary_gap(self) -> np.ndarray:
        return 1.0 - np.hypot(self.x, self.y)

    @property
    def generations(self) -> np.ndarray:
        return generations_of(self.boundary_gap)

    @property
    def radius(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_r)

    def disc(self, i: int) -> Disc:
        return Disc(Point(float(self.x[i]), float(self.y[i])), float(self.log_r[i]))


@dataclass(frozen=True)
class RingBlock:
    """``count - a_start`` discs of one log-radius, equally spaced on a circle.

    Slot a (a_start <= a < count) sits at angle (a + 1/2) * 2*pi / count.
    The half-step phase keeps every disc strictly inside its angular sector.
    """

    n: int
    rho: float
    log_r: float
    count: int
    a_start: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GeometryError("ring generation must be >= 1")
        if not (0.0 < self.rho < 1.0):
            raise GeometryError("ring radius must lie in (0, 1)")
        if self.count < 1 or not (0 <= self.a_start < self.count):
            raise GeometryError("ring slot range is empty or invalid")
        if not math.isfinite(self.log_r) or self.log_r >= math.log(1.0 - self.rho):
            raise GeometryError("ring disc radius invalid for its circle radius")

    def __len__(self) -> int:
        return self.count - self.a_start

    @property
    def step(self) -> float:
        return TWO_PI / self.count

    @property
    def boundary_gap(self) -> float:
        return 1.0 - self.rho

    @property
    def radius(self) -> float:
        return radius_from_log(self.log_r)

    def angle_of(self, a: int) -> float:
        return (a + 0.5) * self.step

    def angles(self) -> np.ndarray:
        return (np.arange(self.a_start, self.count, dtype=np.float64) + 0.5) * self.step

    def positions(self) -> tuple[np.ndarray, np.ndarray]:
        th = self.angles()
        return self.rho * np.cos(th), self.rho * np.sin(th)

    def nearest_slots(self, theta: float, width: int = 2) -> np.ndarray:
        """Active slot indices nearest in angle to theta (small exact set)."""
        u = theta / self.step - 0.5
        base = int(math.floor(u))
        cands = set()
        for k in range(-width, width + 1):
            a = (base + k) % self.count
            if a >= self.a_start:
                cands.add(a)
        # with an excluded prefix the arc endpoints are extra candidates
        if self.a_start > 0:
            cands.add(self.a_start)
            cands.add(self.count - 1)
        return np.fromiter(cands, dtype=np.int64)

    def disc(self, a: int) -> Disc:
        th = self.angle_of(a)
        return Disc(Point(self.rho * math.cos(th), self.rho * math.sin(th)), self.log_r)


Block = DiscBlock | RingBlock


def chord(rho1: float, rho2: float, dtheta: float) -> float:
    """Distance between points at polar (rho1, 0) and (rho2, dtheta)."""
    return math.sqrt(
        (rho1 - rho2) ** 2 + 4.0 * rho1 * rho2 * math.sin(dtheta / 2.0) ** 2
    )


def ring_min_center_distance(r1: RingBlock, r2: RingBlock) -> float:
    """Exact minimal center distance between two distinct rings."""
    dth = _ring_min_angle_offset(r1, r2)
    return chord(r1.rho, r2.rho, dth)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return a, 1, 0
    g, p, q = _egcd(b, a % b)
    return g, q, p - (a // b) * q


def _ring_min_angle_offset(r1: RingBlock, r2: RingBlock) -> float:
    """Minimal |angle difference| over active slot pairs of two rings."""
    j1, j2 = r1.count, r2.count
    if j1 == j2:
        # same phase grid: offset 0 at any common active slot
        if max(r1.a_start, r2.a_start) < j1:
            return 0.0
    g = math.gcd(j1, j2)
    d = (j2 - j1) // g
    # angle difference = pi * ((2a+1) j2 - (2b+1) j1) / (j1 j2); the integer
    # numerator ranges over g * (2k + d) as (a, b) range over full rings.
    if r1.a_start == 0 and r2.a_start == 0:
        best = 0 if d % 2 == 0 else 1
        return math.pi * g * best / (j1 * j2)
    # excluded prefixes: scan feasible pairs near the optimal residue class
    best = math.inf
    span1 = max(1, j1 // g)
    limit = min(j1, r1.a_start + 4 * span1 + 4)
    for a in range(r1.a_start, limit):
        target = (r1.angle_of(a) / r2.step) - 0.5
        for bb in (math.floor(target), math.ceil(target)):
            b = int(bb) % j2
            if b < r2.a_start:
                b = r2.a_start
            off = abs(
                math.remainder(r1.angle_of(a) - r2.angle_of(b), TWO_PI)
            )
            best = min(best, off)
        for b in (r2.a_start, j2 - 1):
            off = abs(math.remainder(r1.angle_of(a) - r2.angle_of(b), TWO_PI))
            best = min(best, off)
    return best


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class Configuration:
    """A finite truncation of an obstacle configuration inside the unit disc.

    ``blocks`` are kept in canonical order: ascending generation, explicit
    blocks before ring blocks of the same generation, rings by radial row.
    """

    blocks: tuple[Block, ...]
    n_max: int
    provenance: Mapping[str, object] = field(default_factory=dict)

    @classmethod
    def from_discs(
        cls,
        discs: Sequence[Disc],
        n_max: int | None = None,
        provenance: Mapping[str, object] | None = None,
    ) -> "Configuration":
        if not discs:
            return cls(blocks=(), n_max=int(n_max or 0), provenance=dict(provenance or {}))
        order = sorted(
            range(len(discs)),
            key=lambda i: (
                generation_of(discs[i].boundary_gap),
                discs[i].center.angle(),
                discs[i].boundary_gap,
                discs[i].center.x,
                discs[i].center.y,
            ),
        )
        x = np.array([discs[i].center.x for i in order])
        y = np.array([discs[i].center.y for i in order])
        lr = np.array([discs[i].log_radius for i in order])
        gens = generations_of(1.0 - np.hypot(x, y))
        inferred = int(gens.max()) if len(gens) else 0
        return cls(
            blocks=(DiscBlock(x, y, lr),),
            n_max=int(n_max if n_max is not None else inferred),
            provenance=dict(provenance or {}),
        )

    @property
    def disc_count(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def log_ratio_sup(self) -> float:
        """log of sup r_k / (1 - |x_k|); -inf for an empty configuration."""
        best = -math.inf
        for b in self.blocks:
            if isinstance(b, RingBlock):
                if len(b):
                    best = max(best, b.log_r - math.log(b.boundary_gap))
            elif len(b):
                s = b.boundary_gap
                best = max(best, float(np.max(b.log_r - np.log(s))))
        return best

    @property
    def ratio_sup(self) -> float:
        lr = self.log_ratio_sup
        return 0.0 if lr == -math.inf else radius_from_log(lr)

    def iter_discs(self) -> Iterator[Disc]:
        for b in self.blocks:
            if isinstance(b, RingBlock):
                for a in range(b.a_start, b.count):
                    yield b.disc(a)
            else:
                for i in range(len(b)):
                    yield b.disc(i)

    def disc_arrays(self, limit: int = 2_000_000) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Materialize (x, y, log_r) arrays; refuses above ``limit`` discs."""
        if self.disc_count > limit:
            raise ConfigurationTooLarge(
                f"{self.disc_count} discs exceed materialization limit {limit}"
            )
        xs, ys, lrs = [], [], []
        for b in self.blocks:
            if isinstance(b, RingBlock):
                bx, by = b.positions()
                xs.append(bx)
                ys.append(by)
                lrs.append(np.full(len(b), b.log_r))
            else:
                xs.append(b.x)
                ys.append(b.y)
                lrs.append(b.log_r)
        if not xs:
            return (np.empty(0), np.empty(0), np.empty(0))
        return np.concatenate(xs), np.concatenate(ys), np.concatenate(lrs)

    def materialized(self, limit: int = 2_000_000) -> "Configuration":
        """Equivalent configuration with a single explicit block."""
        x, y, lr = self.disc_arrays(limit)
        return Configuration(
            blocks=(DiscBlock(x, y, lr),) if len(x) else (),
            n_max=self.n_max,
            provenance=dict(self.provenance),
        )

    def generations_present(self) -> list[int]:
        gens: set[int] = set()
        for b in self.blocks:
            if isinstance(b, RingBlock):
                gens.add(b.n)
            elif len(b):
                gens.update(int(g) for g in np.unique(b.generations))
        return sorted(gens)

    def rotated(self, angle: float) -> "Configuration":
        """Rigid rotation; ring blocks fall back to explicit storage."""
        x, y, lr = self.disc_arrays()
        c, s = math.cos(angle), math.sin(angle)
        return Configuration(
            blocks=(DiscBlock(c * x - s * y, s * x + c * y, lr),) if len(x) else (),
            n_max=self.n_max,
            provenance=dict(self.provenance),
        )


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    ratio_sup: float

    def __bool__(self) -> bool:
        return self.ok


def _block_offsets(config: Configuration) -> list[int]:
    offsets, total = [], 0
    for b in config.blocks:
        offsets.append(total)
        total += len(b)
    return offsets


def validate_configuration(c: Configuration) -> ValidationReport:
    """Report-style check of every configuration invariant."""
    violations: list[Violation] = []
    offsets = _block_offsets(c)

    for bi, b in enumerate(c.blocks):
        if isinstance(b, RingBlock):
            if b.log_r >= math.log(b.boundary_gap):
                violations.append(
                    Violation("ratio", f"ring block {bi} has r >= 1-|x|", (offsets[bi],))
                )
        elif len(b):
            s = b.boundary_gap
            bad = np.nonzero(b.log_r >= np.log(np.maximum(s, 1e-300)))[0]
            for i in bad:
                violations.append(
                    Violation("ratio", "disc radius >= 1-|center|", (offsets[bi] + int(i),))
                )

    overlap = _find_overlap(c, offsets)
    if overlap is not None:
        violations.append(
            Violation("overlap", "closed discs intersect", overlap)
        )

    lr_sup = c.log_ratio_sup
    if lr_sup >= 0.0:
        violations.append(Violation("ratio_sup", f"sup r/(1-|x|) >= 1 (log={lr_sup})"))

    if c.disc_count:
        index = SpatialIndex(c)
        d0, covering = index.distance(Point(0.0, 0.0))
        if d0 <= 0.0:
            violations.append(
                Violation("origin", "origin lies in a closed disc", (covering,))
            )

    return ValidationReport(
        ok=not violations,
        violations=tuple(violations),
        ratio_sup=c.ratio_sup,
    )


def _find_overlap(c: Configuration, offsets: list[int]) -> tuple[int, int] | None:
    """First pair of canonical indices whose closed discs intersect, if any."""
    # explicit blocks against each other (single KD-tree over all of them)
    exp = [(bi, b) for bi, b in enumerate(c.blocks) if isinstance(b, DiscBlock)]
    rings = [(bi, b) for bi, b in enumerate(c.blocks) if isinstance(b, RingBlock)]

    if exp:
        xs = np.concatenate([b.x for _, b in exp])
        ys = np.concatenate([b.y for _, b in exp])
        lrs = np.concatenate([b.log_r for _, b in exp])
        ids = np.concatenate(
            [offsets[bi] + np.arange(len(b)) for bi, b in exp]
        ).astype(np.int64)
        with np.errstate(under="ignore"):
            radii = np.exp(lrs)
        rmax = float(radii.max()) if len(radii) else 0.0
        from scipy.spatial import cKDTree

        tree = cKDTree(np.column_stack([xs, ys]))
        pairs = tree.query_pairs(max(2.0 * rmax, 1e-15), output_type="ndarray")
        for i, j in pairs:
            d = math.hypot(xs[i] - xs[j], ys[i] - ys[j])
            if d <= radii[i] + radii[j]:
                a, bb = int(ids[i]), int(ids[j])
                return (min(a, bb), max(a, bb))

        # explicit against rings: distance to the nearest ring slot, batched
        theta_pts = np.arctan2(ys, xs)
        theta_pts = np.where(theta_pts < 0.0, theta_pts + TWO_PI, theta_pts)
        rho_pts = np.hypot(xs, ys)
        for bi, rb in rings:
            rr = rb.radius
            hit = np.abs(rho_pts - rb.rho) <= radii + rr
            if not hit.any():
                continue
            for k in np.nonzero(hit)[0]:
                p = Point(float(xs[k]), float(ys[k]))
                d, a = _ring_point_distance(rb, p)
                if d <= radii[k] + rr:
                    return (
                        min(int(ids[k]), offsets[bi] + a - rb.a_start),
                        max(int(ids[k]), offsets[bi] + a - rb.a_start),
                    )

    # rings: adjacent slots within one ring, then cross pairs (numpy prefilter
    # on radial gaps; with the tiny radii this package generates, almost no
    # pair survives the prefilter)
    for bi, rb in rings:
        if len(rb) >= 2:
            gap = chord(rb.rho, rb.rho, rb.step)
            if gap <= 2.0 * rb.radius:
                return (offsets[bi], offsets[bi] + 1)
    if len(rings) >= 2:
        rho = np.array([rb.rho for _, rb in rings])
        rad = np.array([rb.radius for _, rb in rings])
        gaps = np.abs(rho[:, None] - rho[None, :])
        cand = np.argwhere(gaps <= rad[:, None] + rad[None, :])
        for i, j in cand:
            if i >= j:
                continue
            bi, rb = rings[i]
            bj, rb2 = rings[j]
            if ring_min_center_distance(rb, rb2) <= rb.radius + rb2.radius:
                return (offsets[bi], offsets[bj])
    return None


# ---------------------------------------------------------------------------
# distance queries


def _ring_point_distance(rb: RingBlock, p: Point) -> tuple[float, int]:
    """(center distance to nearest active ring disc, slot index)."""
    theta = p.angle()
    rho_p = p.norm()
    best, best_a = math.inf, rb.a_start
    for a in rb.nearest_slots(theta):
        d = chord(rho_p, rb.rho, theta - rb.angle_of(a))
        if d < best:
            best, best_a = d, int(a)
    return best, best_a


class SpatialIndex:
    """Immutable distance-query accelerator over a configuration.

    Explicit discs are bucketed by dyadic generation of their centers (with
    a coarse bucket for the central region); ring blocks answer queries in
    O(1) per ring via angular rounding.  Results agree exactly with a brute
    force scan; bucketing only prunes whole generations whose radial band is
    provably farther than the best candidate.
    """

    def __init__(self, config: Configuration):
        self.config = config
        self._offsets = _block_offsets(config)
        # explicit discs, globally indexed, grouped by generation band
        xs, ys, lrs, ids = [], [], [], []
        self._rings: list[tuple[int, RingBlock]] = []
        for bi, b in enumerate(config.blocks):
            if isinstance(b, RingBlock):
                self._rings.append((self._offsets[bi], b))
            elif len(b):
                xs.append(b.x)
                ys.append(b.y)
                lrs.append(b.log_r)
                ids.append(self._offsets[bi] + np.arange(len(b), dtype=np.int64))
        if xs:
            x = np.concatenate(xs)
            y = np.concatenate(ys)
            lr = np.concatenate(lrs)
            gid = np.concatenate(ids)
            gen = generations_of(1.0 - np.hypot(x, y))
            self._explicit: dict[int, tuple[np.ndarray, ...]] = {}
            for g in np.unique(gen):
                sel = gen == g
                with np.errstate(under="ignore"):
                    rad = np.exp(lr[sel])
                self._explicit[int(g)] = (x[sel], y[sel], rad, gid[sel])
        else:
            self._explicit = {}
        # ring tables grouped by generation: rows share count and phase
        self._ring_gens: dict[int, list[tuple[int, RingBlock]]] = {}
        for off, rb in self._rings:
            self._ring_gens.setdefault(rb.n, []).append((off, rb))
        self._gen_bands = sorted(set(self._explicit) | set(self._ring_gens))
        # largest obstacle radius per generation: discs can reach this far
        # outside the radial band their centers live in, so every band-gap
        # prune must subtract it
        self._gen_max_radius: dict[int, float] = {}
        for n in self._gen_bands:
            rmax = 0.0
            if n in self._explicit:
                rmax = float(self._explicit[n][2].max())
            for _, rb in self._ring_gens.get(n, ()):
                rmax = max(rmax, rb.radius)
            self._gen_max_radius[n] = rmax

    @staticmethod
    def _band_gap(n: int, s: float) -> float:
        """Lower bound on distance from gap s to any center in band n."""
        if n == 0:
            return max(0.0, 0.5 - s)  # central discs all have s > 1/2
        lo, hi = 2.0 ** (-n - 1), 2.0 ** (-n)
        if s < lo:
            return lo - s
        if s > hi:
            return s - hi
        return 0.0

    def _disc_gap(self, n: int, s: float) -> float:
        """Lower bound on the signed distance to any disc of band n."""
        return self._band_gap(n, s) - self._gen_max_radius[n]

    # -- single-point query ------------------------------------------------

    def distance(self, p: Point) -> tuple[float, int | None]:
        """(min over discs of |p - x_k| - r_k clamped at 0, nearest id)."""
        best, best_id = math.inf, None
        s = 1.0 - p.norm()
        bands = sorted(self._gen_bands, key=lambda n: self._disc_gap(n, s))
        for n in bands:
            if self._disc_gap(n, s) >= best:
                break
            if n in self._explicit:
                x, y, rad, gid = self._explicit[n]
                d = np.hypot(x - p.x, y - p.y) - rad
                i = int(np.argmin(d))
                if d[i] < best:
                    best, best_id = float(d[i]), int(gid[i])
            for off, rb in self._ring_gens.get(n, ()):  # noqa: B905
                if abs(p.norm() - rb.rho) - rb.radius >= best:
                    continue
                dc, a = _ring_point_distance(rb, p)
                d = dc - rb.radius
                if d < best:
                    best, best_id = d, off + (a - rb.a_start)
        if best_id is None:
            return math.inf, None
        return max(best, 0.0), best_id

    # -- batched query (hot path for the walker) ----------------------------

    def distance_many(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Unclamped signed distances (negative inside a disc) for a batch."""
        m = len(px)
        best = np.full(m, np.inf)
        rho_p = np.hypot(px, py)
        s = 1.0 - rho_p
        theta_p = np.arctan2(py, px)
        theta_p = np.where(theta_p < 0.0, theta_p + TWO_PI, theta_p)
        for n in self._gen_bands:
            gaps = self._band_gap_vec(n, s) - self._gen_max_radius[n]
            live = gaps < best
            if not live.any():
                continue
            if n in self._explicit:
                x, y, rad, _ = self._explicit[n]
                idx = np.nonzero(live)[0]
                # chunk the disc axis so memory stays bounded
                sub_best = best[idx]
                for lo in range(0, len(x), 8192):
                    hi = lo + 8192
                    d = np.hypot(
                        x[None, lo:hi] - px[idx, None], y[None, lo:hi] - py[idx, None]
                    ) - rad[None, lo:hi]
                    sub_best = np.minimum(sub_best, d.min(axis=1))
                best[idx] = sub_best
            rows = self._ring_gens.get(n)
            if rows:
                idx = np.nonzero(live)[0]
                best[idx] = np.minimum(
                    best[idx],
                    self._ring_rows_distance(rows, rho_p[idx], theta_p[idx]),
                )
        return best

    @staticmethod
    def _band_gap_vec(n: int, s: np.ndarray) -> np.ndarray:
        if n == 0:
            return np.maximum(0.0, 0.5 - s)
        lo, hi = 2.0 ** (-n - 1), 2.0 ** (-n)
        return np.where(s < lo, lo - s, np.where(s > hi, s - hi, 0.0))

    @staticmethod
    def _ring_rows_distance(
        rows: list[tuple[int, RingBlock]], rho_p: np.ndarray, theta_p: np.ndarray
    ) -> np.ndarray:
        """Min distance to the rings of one generation, vectorized in points."""
        out = np.full(len(rho_p), np.inf)
        first = rows[0][1]
        step = first.step
        plain = all(rb.a_start == 0 and rb.count == first.count for _, rb in rows)
        if plain:
            # shared angular grid: three candidate offsets serve every row
            u = theta_p / step - 0.5
            base = np.floor(u)
            for k in (-1.0, 0.0, 1.0):
                dth = theta_p - ((base + k) + 0.5) * step
                sin2 = np.sin(dth / 2.0) ** 2
                for _, rb in rows:
                    d = np.sqrt(
                        (rho_p - rb.rho) ** 2 + 4.0 * rho_p * rb.rho * sin2
                    ) - rb.radius
                    np.minimum(out, d, out=out)
            return out
        for i in range(len(rho_p)):
            p = Point(float(rho_p[i] * math.cos(theta_p[i])), float(rho_p[i] * math.sin(theta_p[i])))
            for _, rb in rows:
                dc, _ = _ring_point_distance(rb, p)
                out[i] = min(out[i], dc - rb.radius)
        return out


def distance_to_obstacles(p: Point, idx: SpatialIndex) -> tuple[float, int | None]:
    """Distance from p to the obstacle union E, clamped at zero.

    Returns (distance, nearest disc id) with the id in canonical order, or
    (inf, None) for an empty configuration.
    """
    if p.norm() >= 1.0:
        raise GeometryError("query point must lie inside the unit disc")
    return idx.distance(p)


# ---------------------------------------------------------------------------
# serialization


def _float_repr(v: float) -> float:
    return float(v)


def config_to_document(c: Configuration) -> dict:
    """JSON-style document; explicit discs in canonical order, rings as rows.

    Every disc record carries both ``r`` (possibly underflowed to 0) and the
    exact ``log_r``.
    """
    discs = []
    rings = []
    for b in c.blocks:
        if isinstance(b, RingBlock):
            rings.append(
                {
                    "n": b.n,
                    "rho": _float_repr(b.rho),
                    "log_r": _float_repr(b.log_r),
                    "count": b.count,
                    "a_start": b.a_start,
                }
            )
        else:
            with np.errstate(under="ignore"):
                rad = np.exp(b.log_r)
            for i in range(len(b)):
                discs.append(
                    {
                        "x": _float_repr(b.x[i]),
                        "y": _float_repr(b.y[i]),
                        "r": _float_repr(rad[i]),
                        "log_r": _float_repr(b.log_r[i]),
                    }
                )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "discs": discs,
        "rings": rings,
        "n_max": c.n_max,
        "provenance": dict(c.provenance),
    }
    return doc


def document_to_config(doc: Mapping) -> Configuration:
    blocks: list[Block] = []
    discs = doc.get("discs", [])
    if discs:
        x = np.array([d["x"] for d in discs], dtype=np.float64)
        y = np.array([d["y"] for d in discs], dtype=np.float64)
        lr = np.array(
            [
                d["log_r"] if "log_r" in d else math.log(d["r"])
                for d in discs
            ],
            dtype=np.float64,
        )
        blocks.append(DiscBlock(x, y, lr))
    for r in doc.get("rings", []):
        blocks.append(
            RingBlock(
                n=int(r["n"]),
                rho=float(r["rho"]),
                log_r=float(r["log_r"]),
                count=int(r["count"]),
                a_start=int(r.get("a_start", 0)),
            )
        )
    return Configuration(
        blocks=tuple(blocks),
        n_max=int(doc.get("n_max", 0)),
        provenance=dict(doc.get("provenance", {})),
    )


def dumps_config(c: Configuration) -> str:
    """Canonical (byte-stable) JSON text for a configuration."""
    return json.dumps(config_to_document(c), sort_keys=True, separators=(",", ":"))


def loads_config(text: str) -> Configuration:
    return document_to_config(json.loads(text))
