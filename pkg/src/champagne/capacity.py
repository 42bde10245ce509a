"""Logarithmic capacity, the truncated-kernel capacity C2, and the
cell-by-cell capacity series with its quasiadditivity diagnostics.

Logarithmic capacity of a compact set is exp(-V) where V is the minimal
logarithmic energy of a probability measure on the set (the Robin
constant).  Three evaluation paths share that definition:

* ``exact_disc``: a closed disc of radius r has capacity exactly r.
* ``energy_minimization``: discretize the boundary into weighted arc
  nodes and minimize the quadratic energy over the probability simplex by
  projected gradient.  The node self-energy is that of a uniform measure
  on its arc, log(1/len) + 3/2.
* ``disc_system``: for unions of disjoint discs, a measure that is uniform
  on each circle has exactly the energy of point charges at the centers
  with self-energies log(1/r_k); minimizing over the charge weights is the
  same simplex program with an analytic kernel.  When the self-energies
  dominate the couplings (the radii here are routinely exp(-10^6) or
  smaller) the minimizer is the first-order closed form, accurate to
  O((coupling/self)^2), and no iteration is needed.

The C2 capacity uses the truncated kernel log+(2/|x-y|) and is normalized
by the sampled minimum of the equilibrium potential, so that the reported
value is the mass required to push the potential to 1 on the set.

Grid configurations built from ring blocks are handled per generation:
all cells of one generation hold congruent disc clusters, so one cluster
solve per generation covers the whole cell series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .criteria import (
    BoundaryPoint,
    SeriesReport,
    budget_sums,
    equally_spaced_inverse_square_sum,
    separation,
)
from .generators import AVOIDABLE_BUDGET
from .geometry import (
    Configuration,
    DiscBlock,
    Point,
    RingBlock,
    TWO_PI,
    WhitneyCell,
    WhitneyIndex,
    cells_intersecting_disc,
    chord,
    radius_from_log,
    sector_count,
    whitney_cell,
)

LOG2 = math.log(2.0)


class CapacityError(ValueError):
    """Invalid capacity query or estimator precondition failure."""


# ---------------------------------------------------------------------------
# constants shared by the capacity estimates


@dataclass(frozen=True)
class CapacityConstants:
    """Comparability constants used by thresholds and scalings.

    ``cell_comparability`` bounds both (1-|x_k|)/2^{-n} and the ratio of
    boundary distances taken from a cell reference point versus a disc
    center in that cell; the conservative default is 4/(1 - ratio_sup).
    ``c2_bracket`` is the two-sided constant in the small-disc C2 estimate
    c2_bracket^{-1}/log(1/r) <= C2(B(x,r)) <= c2_bracket/log(1/r).
    """

    cell_comparability: float = 4.0
    c2_bracket: float = 4.0

    def __post_init__(self) -> None:
        if self.cell_comparability < 1.0 or self.c2_bracket < 1.0:
            raise CapacityError("comparability constants must be >= 1")

    @classmethod
    def for_configuration(cls, c: Configuration, c2_bracket: float = 4.0) -> "CapacityConstants":
        ratio = min(c.ratio_sup, 1.0 - 1e-12)
        return cls(cell_comparability=4.0 / (1.0 - ratio), c2_bracket=c2_bracket)

    @property
    def separation_floor(self) -> float:
        """Pair threshold 8*sqrt(pi)*c2_bracket*cell_comparability^2 above
        which the scaled per-cell clusters satisfy the quasiadditivity
        hypothesis."""
        return 8.0 * math.sqrt(math.pi) * self.c2_bracket * self.cell_comparability**2

    def cell_scale(self, n: int) -> float:
        """Scale factor 2^n / (4*pi*cell_comparability*c2_bracket) that maps
        a generation-n cell to diameter strictly below 1."""
        return 2.0**n / (4.0 * math.pi * self.cell_comparability * self.c2_bracket)


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class DiscShape:
    center: Point
    log_r: float


@dataclass(frozen=True)
class SegmentShape:
    a: Point
    b: Point

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)


@dataclass(frozen=True)
class ClippedDiscShape:
    disc: DiscShape
    cell: WhitneyCell


@dataclass(frozen=True)
class UnionShape:
    parts: tuple


Shape = DiscShape | SegmentShape | ClippedDiscShape | UnionShape


@dataclass(frozen=True)
class CapacityEstimate:
    """log_value is log of the capacity (always finite for nonpolar sets);
    value is its exponential and may underflow to 0.0."""

    log_value: float | None
    method: str
    boundary_points: int = 0
    error_hint: float = 0.0
    polar: bool = False

    @property
    def value(self) -> float:
        if self.polar or self.log_value is None:
            raise CapacityError("polar set has no numeric capacity")
        return radius_from_log(self.log_value)


POLAR = CapacityEstimate(log_value=None, method="polar", polar=True)

# descriptors degenerate below this diameter count as polar (single points);
# discs with an analytic log-radius are never polar however small
POLAR_DIAMETER = 1e-30


@dataclass(frozen=True)
class C2Estimate:
    value: float
    lower: float
    upper: float


# ---------------------------------------------------------------------------
# simplex energy minimization


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, len(v) + 1)
    cond = u - css / ks > 0
    k = int(np.max(np.nonzero(cond)[0])) + 1
    tau = css[k - 1] / k
    return np.maximum(v - tau, 0.0)


@dataclass(frozen=True)
class EnergySolution:
    weights: np.ndarray
    energy: float
    gap: float
    iterations: int
    method: str


def minimize_simplex_energy(
    kernel: np.ndarray, max_iter: int = 800, tol: float = 1e-12
) -> EnergySolution:
    """Minimize mu^T K mu over the probability simplex.

    Plain projected gradient with a Lipschitz step from a power-iteration
    eigenvalue estimate; the Frank-Wolfe gap mu^T g - min_i g_i upper
    bounds the suboptimality and is recorded.  The kernel need only be
    positive definite on zero-sum directions, which the log kernel is.
    """
    n = len(kernel)
    if n == 0:
        raise CapacityError("empty kernel")
    diag = np.diag(kernel)
    if n >= 2:
        off = kernel - np.diag(diag)
        dominance = float(diag.min()) / max(float(np.abs(off).max()), 1e-300)
    else:
        dominance = math.inf
    if dominance >= 1e4:
        # first-order closed form: mu_i proportional to 1/K_ii; the
        # relative error is below (coupling/self)^2 ~ 1e-8
        inv = 1.0 / diag
        mu = inv / inv.sum()
        energy = float(mu @ kernel @ mu)
        grad = 2.0 * (kernel @ mu)
        gap = float(mu @ grad - grad.min())
        return EnergySolution(mu, energy, gap, 0, "dominant_diagonal")

    # power iteration for the step size
    v = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(25):
        w = kernel @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        v = w / norm
    lam = float(abs(v @ (kernel @ v))) + 1e-12
    step = 0.45 / lam

    mu = np.full(n, 1.0 / n)
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (kernel @ mu)
        gap = float(mu @ grad - grad.min())
        energy = float(mu @ (kernel @ mu))
        if gap <= tol * max(abs(energy), 1.0):
            break
        mu = project_to_simplex(mu - step * grad)
    energy = float(mu @ (kernel @ mu))
    return EnergySolution(mu, energy, gap, it, "projected_gradient")


# ---------------------------------------------------------------------------
# boundary discretization


def _segment_nodes(a: Point, b: Point, n: int) -> tuple[np.ndarray, np.ndarray]:
    t = (np.arange(n) + 0.5) / n
    pts = np.column_stack([a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t])
    ell = np.full(n, math.hypot(b.x - a.x, b.y - a.y) / n)
    return pts, ell


def _circle_nodes(center: Point, r: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    th = (np.arange(n) + 0.5) * TWO_PI / n
    pts = np.column_stack([center.x + r * np.cos(th), center.y + r * np.sin(th)])
    ell = np.full(n, TWO_PI * r / n)
    return pts, ell


def _clipped_disc_nodes(
    shape: ClippedDiscShape, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Boundary nodes of disc-intersect-cell: circle samples inside the cell
    plus cell-edge samples inside the disc, with arc-length weights."""
    d, cell = shape.disc, shape.cell
    r = radius_from_log(d.log_r)
    pts_list, ell_list = [], []
    cpts, cell_ = _circle_nodes(d.center, r, n)
    keep = np.array([cell.contains(Point(*p), tol=0.0) for p in cpts])
    if keep.any():
        pts_list.append(cpts[keep])
        ell_list.append(cell_[keep])
    per_edge = max(8, n // 4)
    for pts, ell in _cell_edge_nodes(cell, per_edge):
        inside = np.hypot(pts[:, 0] - d.center.x, pts[:, 1] - d.center.y) <= r
        if inside.any():
            pts_list.append(pts[inside])
            ell_list.append(ell[inside])
    if not pts_list:
        return np.empty((0, 2)), np.empty(0)
    return np.vstack(pts_list), np.concatenate(ell_list)


def _cell_edge_nodes(cell: WhitneyCell, n: int):
    lo, hi = cell.theta_lo, cell.theta_hi
    for radius in (cell.r_inner, cell.r_outer):
        th = lo + (hi - lo) * (np.arange(n) + 0.5) / n
        pts = radius * np.column_stack([np.cos(th), np.sin(th)])
        yield pts, np.full(n, radius * (hi - lo) / n)
    for theta in (lo, hi):
        t = cell.r_inner + (cell.r_outer - cell.r_inner) * (np.arange(n) + 0.5) / n
        pts = np.column_stack([t * math.cos(theta), t * math.sin(theta)])
        yield pts, np.full(n, (cell.r_outer - cell.r_inner) / n)


def _disc_inside_cell(d: DiscShape, cell: WhitneyCell) -> bool:
    r = radius_from_log(d.log_r)
    if not cell.contains(d.center):
        return False
    return _cell_boundary_distance(cell, d.center) >= r


def _cell_boundary_distance(cell: WhitneyCell, p: Point) -> float:
    rho = p.norm()
    radial = min(rho - cell.r_inner, cell.r_outer - rho)
    best = radial
    for theta in (cell.theta_lo, cell.theta_hi):
        ex, ey = math.cos(theta), math.sin(theta)
        t = min(max(p.x * ex + p.y * ey, cell.r_inner), cell.r_outer)
        best = min(best, math.hypot(p.x - t * ex, p.y - t * ey))
    return best


# ---------------------------------------------------------------------------
# log capacity


def _flatten_parts(shape: Shape) -> list[Shape]:
    if isinstance(shape, UnionShape):
        out: list[Shape] = []
        for p in shape.parts:
            out.extend(_flatten_parts(p))
        return out
    return [shape]


def log_capacity(shape: Shape, n_boundary: int = 512) -> CapacityEstimate:
    """Logarithmic capacity estimate of a compact shape.

    Discs are exact; disjoint unions of small discs use the analytic
    disc-system kernel; everything else is discretized and minimized.
    """
    parts = _flatten_parts(shape)
    parts = [p for p in parts if not _is_empty(p)]
    if not parts:
        return POLAR
    # clipped discs that do not actually straddle their cell are plain discs
    parts = [
        p.disc
        if isinstance(p, ClippedDiscShape) and _disc_inside_cell(p.disc, p.cell)
        else p
        for p in parts
    ]
    if len(parts) == 1 and isinstance(parts[0], DiscShape):
        return CapacityEstimate(
            log_value=parts[0].log_r, method="exact_disc", error_hint=0.0
        )
    if len(parts) == 1 and isinstance(parts[0], SegmentShape):
        if parts[0].length < POLAR_DIAMETER:
            return POLAR
    if all(isinstance(p, DiscShape) for p in parts):
        return _disc_system_capacity(parts)

    pts, ell = _boundary_nodes(parts, n_boundary)
    if len(pts) == 0:
        return POLAR
    if len(pts) == 1:
        return POLAR if ell[0] < POLAR_DIAMETER else CapacityEstimate(
            log_value=math.log(ell[0] / 4.0), method="energy_minimization",
            boundary_points=1,
        )
    kernel = _log_kernel(pts, ell)
    sol = minimize_simplex_energy(kernel)
    return CapacityEstimate(
        log_value=-sol.energy,
        method="energy_minimization",
        boundary_points=len(pts),
        error_hint=sol.gap + 1.0 / len(pts),
    )


def _is_empty(p: Shape) -> bool:
    if isinstance(p, ClippedDiscShape):
        r = radius_from_log(p.disc.log_r)
        return p.cell.distance_to(p.disc.center) > r
    return False


def _boundary_nodes(parts: Sequence[Shape], n_boundary: int):
    """Weighted boundary nodes of a union: points interior to another part
    are dropped (they cannot carry equilibrium mass) and exact duplicates
    from shared edges collapse to one node."""
    per = max(24, n_boundary // max(len(parts), 1))
    pts_list, ell_list, owner_list = [], [], []
    disc_info: list[tuple[int, float, float, float]] = []
    for pi, p in enumerate(parts):
        if isinstance(p, DiscShape):
            r = radius_from_log(p.log_r)
            if r <= 0.0:
                raise CapacityError(
                    "disc too small to discretize; use a pure disc union"
                )
            pts, ell = _circle_nodes(p.center, r, per)
            disc_info.append((pi, p.center.x, p.center.y, r))
        elif isinstance(p, SegmentShape):
            pts, ell = _segment_nodes(p.a, p.b, per)
        elif isinstance(p, ClippedDiscShape):
            pts, ell = _clipped_disc_nodes(p, per)
            disc_info.append(
                (pi, p.disc.center.x, p.disc.center.y, radius_from_log(p.disc.log_r))
            )
        else:
            raise CapacityError(f"unsupported shape {type(p).__name__}")
        if len(pts):
            pts_list.append(pts)
            ell_list.append(ell)
            owner_list.append(np.full(len(pts), pi))
    if not pts_list:
        return np.empty((0, 2)), np.empty(0)
    pts = np.vstack(pts_list)
    ell = np.concatenate(ell_list)
    owner = np.concatenate(owner_list)
    keep = np.ones(len(pts), dtype=bool)
    for pi, cx, cy, r in disc_info:
        inside = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) < r * (1.0 - 1e-12)
        keep &= ~(inside & (owner != pi))
    pts, ell = pts[keep], ell[keep]
    _, first = np.unique(pts, axis=0, return_index=True)
    first.sort()
    return pts[first], ell[first]


def _log_kernel(pts: np.ndarray, ell: np.ndarray) -> np.ndarray:
    d = np.hypot(pts[:, 0:1] - pts[None, :, 0], pts[:, 1:2] - pts[None, :, 1])
    np.fill_diagonal(d, 1.0)
    kernel = -np.log(d)
    np.fill_diagonal(kernel, -np.log(ell) + 1.5)
    return kernel


def _disc_system_capacity(parts: Sequence[DiscShape]) -> CapacityEstimate:
    """Union of disjoint discs via center charges with exact self-energies."""
    n = len(parts)
    x = np.array([p.center.x for p in parts])
    y = np.array([p.center.y for p in parts])
    log_r = np.array([p.log_r for p in parts])
    d = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    np.fill_diagonal(d, 1.0)
    if np.any(d <= 0.0):
        raise CapacityError("coincident disc centers in a disc system")
    kernel = -np.log(d)
    np.fill_diagonal(kernel, -log_r)
    sol = minimize_simplex_energy(kernel)
    off = kernel - np.diag(np.diag(kernel))
    rel = float(np.abs(off).max()) / float(np.diag(kernel).min())
    return CapacityEstimate(
        log_value=-sol.energy,
        method="disc_system",
        boundary_points=n,
        error_hint=max(sol.gap, rel * rel),
    )


# ---------------------------------------------------------------------------
# truncated-kernel capacity C2


def c2_disc(r: float, constants: CapacityConstants = CapacityConstants()) -> C2Estimate:
    """Closed-form small-disc C2 value with its two-sided log bracket.

    value = {(1/r^2) * int_0^r t log(2/t) dt}^{-1} = 1/(log(2/r)/2 + 1/4).
    """
    if not (0.0 < r <= 0.5):
        raise CapacityError("c2_disc needs r in (0, 1/2]")
    value = 1.0 / (0.5 * math.log(2.0 / r) + 0.25)
    log_inv = math.log(1.0 / r)
    return C2Estimate(
        value=value,
        lower=1.0 / (constants.c2_bracket * log_inv),
        upper=constants.c2_bracket / log_inv,
    )


def _truncated_kernel(d: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(LOG2 - np.log(d), 0.0)


def c2_disc_system(
    x: np.ndarray, y: np.ndarray, log_r: np.ndarray
) -> tuple[float, float]:
    """(C2 estimate, potential minimum) for a union of disjoint small discs.

    Minimizes the truncated-kernel energy over per-disc charges and
    normalizes by the sampled minimum potential, so the returned mass
    pushes the potential to 1 everywhere on the union.
    """
    n = len(x)
    if n == 0:
        raise CapacityError("empty disc system")
    diag = LOG2 - log_r
    if n == 1:
        return 1.0 / float(diag[0]), float(diag[0])
    d = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    np.fill_diagonal(d, 1.0)
    kernel = _truncated_kernel(d)
    np.fill_diagonal(kernel, diag)
    sol = minimize_simplex_energy(kernel)
    potential = kernel @ sol.weights
    u_min = float(potential.min())
    if u_min <= 0.0:
        raise CapacityError("degenerate truncated-kernel potential")
    return 1.0 / u_min, u_min


# ---------------------------------------------------------------------------
# per-generation clusters of grid configurations


@dataclass(frozen=True)
class GenerationCluster:
    """The congruent disc cluster that one generation places in each cell."""

    n: int
    rhos: np.ndarray        # radial row positions, one per row
    log_rs: np.ndarray      # per-row log radii
    columns: int            # columns per cell (= rows for square grids)
    delta_theta: float      # angular spacing between columns


def generation_clusters(c: Configuration) -> dict[int, GenerationCluster]:
    """Extract per-generation clusters from a ring-structured configuration.

    Requires full rings (no dropped prefix) whose slot count is the sector
    count times the row count, i.e. the output of the grid generators.
    """
    by_gen: dict[int, list[RingBlock]] = {}
    for b in c.blocks:
        if isinstance(b, RingBlock):
            by_gen.setdefault(b.n, []).append(b)
        elif len(b):
            raise CapacityError(
                "generation clusters need a ring-structured configuration"
            )
    out: dict[int, GenerationCluster] = {}
    for n, rows in by_gen.items():
        p = len(rows)
        expected = sector_count(n) * p
        for r in rows:
            if r.a_start != 0 or r.count != expected:
                raise CapacityError(
                    "generation clusters need full rings with p rows of"
                    f" {expected} slots at generation {n}"
                )
        rows = sorted(rows, key=lambda r: r.rho)
        out[n] = GenerationCluster(
            n=n,
            rhos=np.array([r.rho for r in rows]),
            log_rs=np.array([r.log_r for r in rows]),
            columns=p,
            delta_theta=TWO_PI / expected,
        )
    return out


def _cluster_mutual(
    cluster: GenerationCluster,
    weights_row: np.ndarray,
    kernel_of_distance: Callable[[np.ndarray], np.ndarray],
    scale: float = 1.0,
) -> np.ndarray:
    """Per-node mutual potential mut[i, j0] = sum over other nodes (i', j')
    of w_row[i'] * kernel(scale * distance).

    The kernel between rows i and i' depends on the column offset only, so
    the column sum for every base column j0 comes from one cumulative sum
    per row pair: the offsets delta = j' - j0 sweep [-j0, p-1-j0] and the
    window total is csum[j0] + csum[p-1-j0] - g[0].
    """
    p = cluster.columns
    rows = len(cluster.rhos)
    dth = cluster.delta_theta
    sin2 = np.sin(np.arange(p, dtype=np.float64) * dth / 2.0) ** 2
    j0 = np.arange(p)
    mut = np.empty((rows, p))
    for i in range(rows):
        # (rows, p) distances from row i nodes to all rows at each offset
        dist = np.sqrt(
            (cluster.rhos[i] - cluster.rhos[:, None]) ** 2
            + 4.0 * cluster.rhos[i] * cluster.rhos[:, None] * sin2[None, :]
        )
        dist[i, 0] = 1.0  # the node itself; its term is zeroed below
        g = kernel_of_distance(scale * dist)
        g[i, 0] = 0.0
        csum = np.cumsum(g, axis=1)
        window = csum[:, j0] + csum[:, p - 1 - j0] - g[:, 0][:, None]
        mut[i] = weights_row @ window
    return mut


@dataclass(frozen=True)
class ClusterSolve:
    log_capacity: float
    energy: float
    self_energy_part: float
    mutual_part: float
    error_hint: float


def cluster_log_capacity(cluster: GenerationCluster) -> ClusterSolve:
    """Log capacity of the per-cell cluster by the dominant-self-energy
    closed form: weights 1/L_i normalized, energy E0 + mutual correction."""
    p = cluster.columns
    self_energy = -cluster.log_rs
    if np.any(self_energy <= 0.0):
        raise CapacityError("cluster discs must have r < 1")
    inv = 1.0 / self_energy
    denom = p * inv.sum()
    w_row = inv / denom
    e0 = 1.0 / denom
    mut = _cluster_mutual(cluster, w_row, lambda d: -np.log(d))
    mutual = float(np.sum(w_row[:, None] * mut))
    energy = e0 + mutual
    hint = (abs(mutual) / float(self_energy.min())) ** 2 + abs(mutual) / float(
        self_energy.min()
    ) * abs(mutual)
    return ClusterSolve(
        log_capacity=-energy,
        energy=energy,
        self_energy_part=e0,
        mutual_part=mutual,
        error_hint=hint,
    )


def cluster_c2(
    cluster: GenerationCluster, scale: float, extra_log_shrink: float = 0.0
) -> tuple[float, float]:
    """(C2 of the scaled cluster, potential minimum).

    The cluster is scaled by ``scale`` (so distances multiply) and radii may
    carry an extra log shrink; self-energies become log(2/(scale*r)).
    """
    p = cluster.columns
    log_r_scaled = cluster.log_rs + extra_log_shrink + math.log(scale)
    diag = LOG2 - log_r_scaled
    if np.any(diag <= 0.0):
        raise CapacityError("scaled cluster discs must have radius < 2")
    inv = 1.0 / diag
    denom = p * inv.sum()
    w_row = inv / denom
    mut = _cluster_mutual(
        cluster, w_row, lambda d: np.maximum(LOG2 - np.log(d), 0.0), scale=scale
    )
    potential = w_row[:, None] * diag[:, None] + mut
    u_min = float(potential.min())
    if u_min <= 0.0:
        raise CapacityError("degenerate scaled-cluster potential")
    return 1.0 / u_min, u_min


# ---------------------------------------------------------------------------
# the cell capacity series


def _explicit_cell_shapes(c: Configuration) -> dict[tuple[int, int], UnionShape]:
    """Map (n, m) -> union of disc-in-cell pieces, for explicit configs."""
    shapes: dict[tuple[int, int], list[Shape]] = {}
    for b in c.blocks:
        if isinstance(b, RingBlock):
            raise CapacityError("explicit cell mapping got a ring block")
        for i in range(len(b)):
            d = b.disc(i)
            for idx in cells_intersecting_disc(d):
                cell = whitney_cell(idx)
                ds = DiscShape(d.center, d.log_radius)
                piece: Shape
                if _disc_inside_cell(ds, cell):
                    piece = ds
                else:
                    piece = ClippedDiscShape(ds, cell)
                shapes.setdefault((idx.n, idx.m), []).append(piece)
    return {k: UnionShape(tuple(v)) for k, v in shapes.items()}


def cell_capacity_weights(
    c: Configuration,
    n_max: int | None = None,
    cap: Callable[[Shape], CapacityEstimate] | None = None,
) -> dict:
    """Per-cell weights {log(2^{-n}/c(E of the cell))}^{-1}.

    For ring-structured grids, one cluster solve per generation gives the
    shared weight of all its cells; the result maps n -> weight.  For
    explicit configurations the map key is (n, m).
    """
    keep_n = c.n_max if n_max is None else n_max
    if any(isinstance(b, RingBlock) for b in c.blocks):
        clusters = generation_clusters(c)
        weights: dict = {}
        for n, cluster in clusters.items():
            if n > keep_n:
                continue
            solve = cluster_log_capacity(cluster)
            denom = -n * LOG2 - solve.log_capacity
            if denom <= 0.0:
                raise CapacityError(
                    f"cell capacity exceeds the cell scale at generation {n}"
                )
            weights[n] = 1.0 / denom
        return weights
    cap = cap or log_capacity
    weights = {}
    for (n, m), shape in _explicit_cell_shapes(c).items():
        if n > keep_n:
            continue
        try:
            est = cap(shape)
        except CapacityError as exc:
            raise CapacityError(f"capacity failed at cell (n={n}, m={m}): {exc}")
        if est.polar:
            continue
        denom = -n * LOG2 - est.log_value
        if denom <= 0.0:
            raise CapacityError(f"cell capacity exceeds cell scale at (n={n}, m={m})")
        weights[(n, m)] = 1.0 / denom
    return weights


def cell_capacity_series(
    c: Configuration,
    y: BoundaryPoint,
    n_max: int | None = None,
    cap: Callable[[Shape], CapacityEstimate] | None = None,
    weights: dict | None = None,
) -> SeriesReport:
    """Sum over cells of (2^{-n}/|z_{m,n}-y|)^2 {log(2^{-n}/c(E cap cell))}^{-1}.

    Polar cells contribute zero.  Pass precomputed ``weights`` (from
    :func:`cell_capacity_weights`) when evaluating many boundary points.
    """
    if weights is None:
        weights = cell_capacity_weights(c, n_max=n_max, cap=cap)
    psi = y.theta
    per_gen: dict[int, list[float]] = {}
    for key, w in weights.items():
        if isinstance(key, tuple):
            n, m = key
            z = 1.0 - 2.0 ** (-n)
            theta = TWO_PI * m / sector_count(n)
            dist2 = chord(1.0, z, psi - theta) ** 2
            per_gen.setdefault(n, []).append(2.0 ** (-2 * n) * w / dist2)
        else:
            n = key
            z = 1.0 - 2.0 ** (-n)
            total = equally_spaced_inverse_square_sum(z, sector_count(n), 0.0, psi)
            per_gen.setdefault(n, []).append(2.0 ** (-2 * n) * w * total)
    gens = sorted(per_gen)
    per = tuple((n, math.fsum(per_gen[n])) for n in gens)
    cum, running = [], 0.0
    for n, v in per:
        running += v
        cum.append((n, running))
    return SeriesReport(y=y, kind="cell_capacity", per_generation=per, cumulative=tuple(cum))


# ---------------------------------------------------------------------------
# quasiadditivity and the log bound


@dataclass(frozen=True)
class QuasiadditivityReport:
    cell: WhitneyIndex
    ratio: float
    union_c2: float
    parts_c2_sum: float
    disc_count: int
    separation_value: float
    separation_floor: float


def quasiadditivity_ratio(
    c: Configuration,
    idx: WhitneyIndex,
    constants: CapacityConstants | None = None,
    sep=None,
) -> QuasiadditivityReport:
    """C2(scaled union of the cell's discs) / sum of per-disc C2 values.

    Requires the configuration to satisfy the pair separation floor
    8*sqrt(pi)*c2_bracket*cell_comparability^2 for the radius-log
    separation statistic; the offending pair is reported otherwise.  Pass a
    precomputed ``sep`` report when evaluating many cells of one
    configuration.
    """
    constants = constants or CapacityConstants.for_configuration(c)
    if sep is None:
        sep = separation(c, kind="radius_log")
    if sep.value < constants.separation_floor:
        raise CapacityError(
            f"separation {sep.value:.4g} below the quasiadditivity floor "
            f"{constants.separation_floor:.4g}; offending pair {sep.argmin_pair}"
        )
    scale = constants.cell_scale(idx.n)
    if any(isinstance(b, RingBlock) for b in c.blocks):
        clusters = generation_clusters(c)
        if idx.n not in clusters:
            raise CapacityError(f"no discs in generation {idx.n}")
        cluster = clusters[idx.n]
        union_c2, _ = cluster_c2(cluster, scale)
        diag = LOG2 - (cluster.log_rs + math.log(scale))
        parts_sum = float(cluster.columns * np.sum(1.0 / diag))
        count = cluster.columns * len(cluster.rhos)
    else:
        cell = whitney_cell(idx)
        xs, ys, lrs = [], [], []
        for b in c.blocks:
            for i in range(len(b)):
                d = b.disc(i)
                if cell.distance_to(d.center) <= d.radius:
                    xs.append(d.center.x)
                    ys.append(d.center.y)
                    lrs.append(d.log_radius)
        if not xs:
            raise CapacityError(f"no discs meet cell {idx}")
        x = np.array(xs) * scale
        y_ = np.array(ys) * scale
        lr = np.array(lrs) + math.log(scale)
        union_c2, _ = c2_disc_system(x, y_, lr)
        parts_sum = float(np.sum(1.0 / (LOG2 - lr)))
        count = len(xs)
    return QuasiadditivityReport(
        cell=idx,
        ratio=union_c2 / parts_sum,
        union_c2=union_c2,
        parts_c2_sum=parts_sum,
        disc_count=count,
        separation_value=sep.value,
        separation_floor=constants.separation_floor,
    )


def c2_log_bound(
    c: Configuration,
    idx: WhitneyIndex,
    constants: CapacityConstants | None = None,
) -> tuple[float, float]:
    """(lhs, rhs) of the scaled-cell bound
    C2(scaled open cell set) <= {log(2^{-n}/c(cell set))}^{-1}."""
    constants = constants or CapacityConstants.for_configuration(c)
    scale = constants.cell_scale(idx.n)
    if any(isinstance(b, RingBlock) for b in c.blocks):
        clusters = generation_clusters(c)
        if idx.n not in clusters:
            raise CapacityError("polar cell")
        cluster = clusters[idx.n]
        lhs, _ = cluster_c2(cluster, scale)
        solve = cluster_log_capacity(cluster)
        denom = -idx.n * LOG2 - solve.log_capacity
    else:
        cell = whitney_cell(idx)
        xs, ys, lrs = [], [], []
        for b in c.blocks:
            for i in range(len(b)):
                d = b.disc(i)
                if cell.distance_to(d.center) <= d.radius:
                    xs.append(d.center.x)
                    ys.append(d.center.y)
                    lrs.append(d.log_radius)
        if not xs:
            raise CapacityError("polar cell")
        lhs, _ = c2_disc_system(
            np.array(xs) * scale, np.array(ys) * scale, np.array(lrs) + math.log(scale)
        )
        est = log_capacity(
            UnionShape(tuple(DiscShape(Point(x, y), lr) for x, y, lr in zip(xs, ys, lrs)))
        )
        denom = -idx.n * LOG2 - est.log_value
    if denom <= 0.0:
        raise CapacityError("cell capacity exceeds cell scale")
    return lhs, 1.0 / denom


# ---------------------------------------------------------------------------
# the avoidability certificate


def green_capacity_disc_bound(
    r: float | None = None, log_r: float | None = None
) -> float:
    """Dominating bound 1/log(1/r) for the Green capacity of a small disc
    relative to the doubled disc."""
    if (r is None) == (log_r is None):
        raise CapacityError("pass exactly one of r, log_r")
    if log_r is None:
        if not (0.0 < r < 1.0):
            raise CapacityError("bound needs r in (0, 1)")
        log_r = math.log(r)
    if log_r >= 0.0:
        raise CapacityError("bound needs r < 1")
    return 1.0 / (-log_r)


@dataclass(frozen=True)
class AvoidabilityCertificate:
    issued: bool
    budget: float
    threshold: float
    outside_half_disc: bool
    reason: str


def avoidability_certificate(c: Configuration) -> AvoidabilityCertificate:
    """Certify avoidability from the reciprocal-log capacity budget.

    Issued when sum_k 1/log(1/r_k) <= 1/(2 log 4) and every closed disc
    avoids the closed central disc of radius 1/2; the capacitary potential
    of the union is then at most 1/2 at the origin, so Brownian motion
    escapes with probability at least 1/2.
    """
    if c.disc_count == 0:
        return AvoidabilityCertificate(
            issued=True,
            budget=0.0,
            threshold=AVOIDABLE_BUDGET,
            outside_half_disc=True,
            reason="empty configuration",
        )
    sums = budget_sums(c, alpha=1.0)
    outside = True
    for b in c.blocks:
        if isinstance(b, RingBlock):
            if b.rho - b.radius <= 0.5:
                outside = False
        else:
            rho = np.hypot(b.x, b.y)
            with np.errstate(under="ignore"):
                if np.any(rho - np.exp(b.log_r) <= 0.5):
                    outside = False
    issued = outside and sums.sum_log_inv_1 <= AVOIDABLE_BUDGET + 1e-15
    if issued:
        reason = "reciprocal-log budget within threshold and discs outside |x|<=1/2"
    elif not outside:
        reason = "a disc reaches into the central disc |x| <= 1/2"
    else:
        reason = "reciprocal-log budget exceeds the threshold"
    return AvoidabilityCertificate(
        issued=issued,
        budget=sums.sum_log_inv_1,
        threshold=AVOIDABLE_BUDGET,
        outside_half_disc=outside,
        reason=reason,
    )
