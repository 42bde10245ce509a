"""Numerical unavoidability diagnostics on finite obstacle configurations.

The diagnostics evaluated here:

* Poisson-weighted series over obstacle centers, with and without the
  reciprocal-log radius weight {log((1-|x_k|)/r_k)}^{-1}, grouped by dyadic
  generation.  Divergence of the weighted series (for almost every boundary
  point) is the necessary condition for the obstacle union to be
  unavoidable, and together with a separation condition it is sufficient.
* Separation statistics: the infimum over pairs of scaled center distances,
  optionally carrying a square-root log weight.
* The integral test int_0^T M(t) / ((1-t) * log(1/phi(t))) dt for grid
  configurations with radius profile phi and center density M.
* Budget sums: sum r_k^alpha, sum {log(1/r_k)}^{-alpha}, and the
  reciprocal-log budget sum {log(1/r_k)}^{-1} used by the avoidability
  certificate.

Ring blocks are summed in closed form: for J equally spaced points at
radius rho, sum_a 1/|y - rho*e^{i theta_a}|^2 collapses through the Poisson
kernel identity sum_a K_rho(psi - theta_a) = J * K_{rho^J}(J(psi - theta_0)),
so a generation with 10^10 discs costs O(rows), not O(discs).  Every closed
form is cross-checked against brute-force summation in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .geometry import (
    Configuration,
    DiscBlock,
    Point,
    RingBlock,
    TWO_PI,
    chord,
    ring_min_center_distance,
)
from .generators import MSpec, PhiSpec


class CriteriaError(ValueError):
    """Invalid input to a criterion evaluation."""


class SingularIntegrandError(CriteriaError):
    """The integral test hit a non-integrable singularity inside [0, T]."""


@dataclass(frozen=True)
class BoundaryPoint:
    """A point on the unit circle, stored by its angle."""

    theta: float

    @property
    def point(self) -> Point:
        return Point(math.cos(self.theta), math.sin(self.theta))

    @classmethod
    def grid(cls, count: int) -> list["BoundaryPoint"]:
        return [cls(TWO_PI * i / count) for i in range(count)]


@dataclass(frozen=True)
class SeriesReport:
    y: BoundaryPoint
    kind: str
    per_generation: tuple[tuple[int, float], ...]
    cumulative: tuple[tuple[int, float], ...]

    @property
    def total(self) -> float:
        return self.cumulative[-1][1] if self.cumulative else 0.0

    def cumulative_at(self, n: int) -> float:
        total = 0.0
        for gen, value in self.per_generation:
            if gen <= n:
                total += value
        return total


@dataclass(frozen=True)
class SeparationReport:
    kind: str
    value: float
    argmin_pair: tuple[int, int] | None


@dataclass(frozen=True)
class BudgetSums:
    sum_r_alpha: float
    sum_log_inv_alpha: float
    sum_log_inv_1: float
    alpha: float


# ---------------------------------------------------------------------------
# ring closed forms


def equally_spaced_inverse_square_sum(
    rho: float, count: int, phase: float, psi: float, a_start: int = 0
) -> float:
    """sum over a in [a_start, count) of |y - rho*e^{i(phase + a*step)}|^{-2}
    for y = e^{i psi}, via the Poisson kernel aggregation identity.
    """
    step = TWO_PI / count
    with np.errstate(under="ignore"):
        q = math.exp(count * math.log(rho)) if count * math.log(rho) > -745.0 else 0.0
    t = count * (psi - phase)
    denom = 1.0 - 2.0 * q * math.cos(t) + q * q
    full = count * (1.0 - q * q) / ((1.0 - rho * rho) * denom)
    if a_start == 0:
        return full
    # remove the excluded prefix explicitly (prefixes are short)
    removed = 0.0
    for a in range(a_start):
        theta = phase + a * step
        removed += 1.0 / chord(1.0, rho, psi - theta) ** 2
    return full - removed


def _ring_poisson_mass(rb: RingBlock, psi: float) -> float:
    """(1 - rho)^2 * sum_a |y - x_a|^{-2} over the active slots of a ring."""
    s = rb.boundary_gap
    total = equally_spaced_inverse_square_sum(
        rb.rho, rb.count, rb.step / 2.0, psi, rb.a_start
    )
    return s * s * total


# ---------------------------------------------------------------------------
# series criteria


def _series(
    c: Configuration,
    y: BoundaryPoint,
    kind: str,
    weight_explicit: Callable[[DiscBlock], np.ndarray] | None,
    weight_ring: Callable[[RingBlock], float] | None,
) -> SeriesReport:
    psi = y.theta
    yx, yy = y.point.x, y.point.y
    per_gen: dict[int, list[float]] = {}
    for b in c.blocks:
        if isinstance(b, RingBlock):
            if not len(b):
                continue
            w = 1.0 if weight_ring is None else weight_ring(b)
            per_gen.setdefault(b.n, []).append(w * _ring_poisson_mass(b, psi))
        elif len(b):
            s = b.boundary_gap
            dist2 = (b.x - yx) ** 2 + (b.y - yy) ** 2
            terms = s * s / dist2
            if weight_explicit is not None:
                terms = terms * weight_explicit(b)
            gens = b.generations
            for n in np.unique(gens):
                sel = gens == n
                per_gen.setdefault(int(n), []).append(
                    math.fsum(terms[sel].tolist())
                )
    gens_sorted = sorted(per_gen)
    per = tuple((n, math.fsum(per_gen[n])) for n in gens_sorted)
    cum = []
    running = 0.0
    for n, v in per:
        running += v
        cum.append((n, running))
    return SeriesReport(y=y, kind=kind, per_generation=per, cumulative=tuple(cum))


def log_weighted_series(c: Configuration, y: BoundaryPoint) -> SeriesReport:
    """Terms (1-|x_k|)^2 / |y-x_k|^2 * {log((1-|x_k|)/r_k)}^{-1} by generation.

    Rejects any disc with r_k >= 1-|x_k| (the log weight must be positive).
    """
    _check_positive_log(c)
    return _series(
        c,
        y,
        "log_weighted",
        weight_explicit=lambda b: 1.0 / (np.log(b.boundary_gap) - b.log_r),
        weight_ring=lambda b: 1.0 / (math.log(b.boundary_gap) - b.log_r),
    )


def poisson_series(c: Configuration, y: BoundaryPoint) -> SeriesReport:
    """Plain Poisson-weighted terms (1-|x_k|)^2 / |y-x_k|^2 by generation."""
    return _series(c, y, "poisson", weight_explicit=None, weight_ring=None)


def _check_positive_log(c: Configuration) -> None:
    offset = 0
    for b in c.blocks:
        if isinstance(b, RingBlock):
            if b.log_r >= math.log(b.boundary_gap):
                raise CriteriaError(f"nonpositive log weight at disc {offset}")
        elif len(b):
            bad = np.nonzero(b.log_r >= np.log(b.boundary_gap))[0]
            if len(bad):
                raise CriteriaError(f"nonpositive log weight at disc {offset + int(bad[0])}")
        offset += len(b)


def series_over_grid(
    c: Configuration, kind: str = "log_weighted", y_count: int = 64
) -> list[SeriesReport]:
    """One report per boundary grid point."""
    fn = log_weighted_series if kind == "log_weighted" else poisson_series
    return [fn(c, y) for y in BoundaryPoint.grid(y_count)]


def affine_growth(
    report: SeriesReport, n_lo: int, n_hi: int
) -> tuple[float, float]:
    """(slope, residual fraction) of a least-squares line through the
    cumulative sums over generations [n_lo, n_hi].

    The residual fraction is max |residual| over the fitted value range; a
    clearly positive slope with small residuals is the finite-depth
    signature of a divergent series (which no finite computation can
    certify outright).
    """
    pts = [(n, v) for n, v in report.cumulative if n_lo <= n <= n_hi]
    if len(pts) < 3:
        raise CriteriaError("growth fit needs at least three generations")
    ns = np.array([p[0] for p in pts], dtype=np.float64)
    vs = np.array([p[1] for p in pts], dtype=np.float64)
    slope, intercept = np.polyfit(ns, vs, 1)
    fitted = slope * ns + intercept
    spread = float(fitted.max() - fitted.min())
    if spread <= 0.0:
        return float(slope), math.inf
    resid = float(np.max(np.abs(vs - fitted)))
    return float(slope), resid / spread


# ---------------------------------------------------------------------------
# separation statistics


def _ring_weight(b: RingBlock, kind: str, phi: PhiSpec | None) -> float:
    s = b.boundary_gap
    if kind == "plain":
        return 1.0 / s
    if kind == "phi_log" and phi is not None:
        return math.sqrt(-float(phi.log_phi(b.rho))) / s
    log_term = math.log(s) - b.log_r
    if log_term <= 0.0:
        raise CriteriaError("separation log weight requires r < 1-|x|")
    return math.sqrt(log_term) / s


def _explicit_weights(b: DiscBlock, kind: str, phi: PhiSpec | None) -> np.ndarray:
    s = b.boundary_gap
    if kind == "plain":
        return 1.0 / s
    if kind == "phi_log" and phi is not None:
        rho = np.hypot(b.x, b.y)
        return np.sqrt(-np.asarray(phi.log_phi(rho))) / s
    log_term = np.log(s) - b.log_r
    if np.any(log_term <= 0.0):
        raise CriteriaError("separation log weight requires r < 1-|x|")
    return np.sqrt(log_term) / s


@dataclass(frozen=True)
class _NeighborStructure:
    """Nearest-neighbor center distances, one entry per explicit disc and
    one shared entry per ring (all slots of a ring have the same nearest
    neighbor distance up to the excluded-prefix edge cases handled in the
    candidate sets)."""

    exp_ids: np.ndarray
    exp_s: np.ndarray
    exp_log_r: np.ndarray
    exp_rho: np.ndarray
    exp_nn: np.ndarray
    exp_nn_id: np.ndarray
    rings: tuple  # (offset, RingBlock, d_nn, pair)


def _neighbor_structure(c: Configuration) -> _NeighborStructure:
    offsets = []
    total = 0
    for b in c.blocks:
        offsets.append(total)
        total += len(b)

    explicit = [
        (off, b) for off, b in zip(offsets, c.blocks) if isinstance(b, DiscBlock) and len(b)
    ]
    rings = [(off, b) for off, b in zip(offsets, c.blocks) if isinstance(b, RingBlock)]

    if explicit:
        xs = np.concatenate([b.x for _, b in explicit])
        ys = np.concatenate([b.y for _, b in explicit])
        lrs = np.concatenate([b.log_r for _, b in explicit])
        ids = np.concatenate([off + np.arange(len(b)) for off, b in explicit]).astype(int)
        nn = np.full(len(xs), np.inf)
        nn_j = np.full(len(xs), -1, dtype=int)
        if len(xs) >= 2:
            from scipy.spatial import cKDTree

            tree = cKDTree(np.column_stack([xs, ys]))
            dist, j = tree.query(np.column_stack([xs, ys]), k=2)
            nn = dist[:, 1]
            nn_j = ids[j[:, 1]]
        for roff, rb in rings:
            for i in range(len(xs)):
                p = Point(float(xs[i]), float(ys[i]))
                d, a = _ring_nearest(rb, p)
                if d < nn[i]:
                    nn[i] = d
                    nn_j[i] = roff + (a - rb.a_start)
        rho = np.hypot(xs, ys)
        exp_part = (ids, 1.0 - rho, lrs, rho, nn, nn_j)
    else:
        z = np.empty(0)
        exp_part = (z.astype(int), z, z, z, z, z.astype(int))

    # rings scanned in radial order, pruned by |rho - rho'| which lower
    # bounds every cross-ring distance
    ring_entries = []
    order = sorted(range(len(rings)), key=lambda t: rings[t][1].rho)
    for pos, t in enumerate(order):
        roff, rb = rings[t]
        d_nn = math.inf
        pair: tuple[int, int] | None = None
        if len(rb) >= 2:
            d_nn = chord(rb.rho, rb.rho, rb.step)
            pair = (roff + 1, roff)
        for direction in (-1, 1):
            q = pos + direction
            while 0 <= q < len(order):
                roff2, rb2 = rings[order[q]]
                if abs(rb2.rho - rb.rho) >= d_nn:
                    break
                d = ring_min_center_distance(rb, rb2)
                if d < d_nn:
                    d_nn = d
                    pair = (roff2, roff)
                q += direction
        for eoff, eb in explicit:
            for i in range(len(eb)):
                p = Point(float(eb.x[i]), float(eb.y[i]))
                d, a = _ring_nearest(rb, p)
                if d < d_nn:
                    d_nn = d
                    pair = (eoff + i, roff + (a - rb.a_start))
        ring_entries.append((roff, rb, d_nn, pair))

    return _NeighborStructure(*exp_part, rings=tuple(ring_entries))


def separation(
    c: Configuration, kind: str = "radius_log", phi: PhiSpec | None = None
) -> SeparationReport:
    """Minimum over ordered pairs (j, k) of |x_j - x_k| * W_k.

    W_k is 1/(1-|x_k|) for ``plain``, sqrt(log((1-|x_k|)/r_k))/(1-|x_k|)
    for ``radius_log``, and sqrt(log(1/phi(|x_k|)))/(1-|x_k|) for
    ``phi_log`` (which falls back to ``radius_log`` when no profile is
    supplied, the two being identical under r = (1-|x|)*phi(|x|)).

    The minimum for fixed k is W_k times the nearest-neighbor distance of
    x_k, so the search runs over nearest neighbors only; the result equals
    the quadratic scan, which the test suite verifies.
    """
    if kind not in ("plain", "radius_log", "phi_log"):
        raise CriteriaError(f"unknown separation kind {kind!r}")
    if c.disc_count < 2:
        return SeparationReport(kind=kind, value=math.inf, argmin_pair=None)

    ns = _neighbor_structure(c)
    best = math.inf
    best_pair: tuple[int, int] | None = None

    if len(ns.exp_ids):
        if kind == "plain":
            ws = 1.0 / ns.exp_s
        elif kind == "phi_log" and phi is not None:
            ws = np.sqrt(-np.asarray(phi.log_phi(ns.exp_rho))) / ns.exp_s
        else:
            log_term = np.log(ns.exp_s) - ns.exp_log_r
            if np.any(log_term <= 0.0):
                raise CriteriaError("separation log weight requires r < 1-|x|")
            ws = np.sqrt(log_term) / ns.exp_s
        vals = ws * ns.exp_nn
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_pair = (int(ns.exp_nn_id[i]), int(ns.exp_ids[i]))

    for roff, rb, d_nn, pair in ns.rings:
        w = _ring_weight(rb, kind, phi)
        if w * d_nn < best:
            best = w * d_nn
            best_pair = pair
    return SeparationReport(kind=kind, value=best, argmin_pair=best_pair)


def shrink_for_separation(
    c: Configuration, threshold: float, margin: float = 1.0 + 1e-9
) -> tuple[Configuration, float]:
    """Shrink radii just enough that the radius-log separation statistic
    reaches ``threshold``; returns (shrunk configuration, log_delta).

    Shrinking multiplies radii by delta <= 1, which raises every factor
    log((1-|x_k|)/(delta*r_k)) without moving any center, so a sufficiently
    negative log_delta always clears the threshold.  The required amount is
    max over discs of (threshold*(1-|x_k|)/d_nn)^2 - log((1-|x_k|)/r_k).
    """
    from .generators import shrink as _shrink

    if threshold <= 0.0:
        return c, 0.0
    ns = _neighbor_structure(c)
    need = 0.0
    if len(ns.exp_ids):
        target = (threshold * margin * ns.exp_s / ns.exp_nn) ** 2
        have = np.log(ns.exp_s) - ns.exp_log_r
        need = max(need, float(np.max(target - have)))
    for _, rb, d_nn, _ in ns.rings:
        s = rb.boundary_gap
        target = (threshold * margin * s / d_nn) ** 2
        have = math.log(s) - rb.log_r
        need = max(need, target - have)
    if need <= 0.0:
        return c, 0.0
    return _shrink(c, log_delta=-need), -need


def _ring_nearest(rb: RingBlock, p: Point) -> tuple[float, int]:
    theta = p.angle()
    rho_p = p.norm()
    best, best_a = math.inf, rb.a_start
    for a in rb.nearest_slots(theta):
        d = chord(rho_p, rb.rho, theta - rb.angle_of(a))
        if d < best:
            best, best_a = d, int(a)
    return best, best_a


# ---------------------------------------------------------------------------
# integral test


def integral_test(m: MSpec, phi: PhiSpec, upper: float) -> float:
    """int_0^upper M(t) / ((1-t) * log(1/phi(t))) dt by adaptive quadrature.

    Relative error <= 1e-6; raises SingularIntegrandError when the integrand
    is not integrable on [0, upper].
    """
    if not (0.0 < upper < 1.0):
        raise CriteriaError("integration endpoint must lie in (0, 1)")

    def integrand(t: float) -> float:
        denom = (1.0 - t) * (-float(phi.log_phi(t)))
        if denom <= 0.0 or not math.isfinite(denom):
            raise SingularIntegrandError(f"integrand singular at t={t}")
        return float(m.value(t)) / denom

    value, abserr = quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-9, limit=400)
    if not math.isfinite(value) or (value != 0.0 and abserr / abs(value) > 1e-6):
        raise SingularIntegrandError(
            f"quadrature did not converge: value={value}, abserr={abserr}"
        )
    return value


# ---------------------------------------------------------------------------
# budget sums


def budget_sums(c: Configuration, alpha: float) -> BudgetSums:
    """(sum r^alpha, sum {log 1/r}^{-alpha}, sum {log 1/r}^{-1}),
    compensated-summed in canonical order.
    """
    if not (alpha > 0.0):
        raise CriteriaError("alpha must be positive")
    t_r, t_la, t_l1 = [], [], []
    for b in c.blocks:
        if isinstance(b, RingBlock):
            if b.log_r >= 0.0:
                raise CriteriaError("budget sums need r in (0, 1)")
            k = float(len(b))
            with np.errstate(under="ignore"):
                t_r.append(k * math.exp(alpha * b.log_r) if alpha * b.log_r > -745 else 0.0)
            t_la.append(k * (-b.log_r) ** (-alpha))
            t_l1.append(k / (-b.log_r))
        elif len(b):
            if np.any(b.log_r >= 0.0):
                raise CriteriaError("budget sums need r in (0, 1)")
            with np.errstate(under="ignore"):
                t_r.extend(np.exp(alpha * b.log_r).tolist())
            t_la.extend(((-b.log_r) ** (-alpha)).tolist())
            t_l1.extend((1.0 / (-b.log_r)).tolist())
    return BudgetSums(
        sum_r_alpha=math.fsum(t_r),
        sum_log_inv_alpha=math.fsum(t_la),
        sum_log_inv_1=math.fsum(t_l1),
        alpha=alpha,
    )


def power_log_bound_constant(alpha: float) -> float:
    """c(alpha) = (2/(e*alpha))^2, the sharp constant with
    r^alpha <= c(alpha) * {log(1/r)}^{-2} on (0, 1).

    Maximizing r^alpha * log^2(1/r) over r: with L = log(1/r) the objective
    e^{-alpha L} L^2 peaks at L = 2/alpha with value (2/(e*alpha))^2.
    """
    return (2.0 / (math.e * alpha)) ** 2


# ---------------------------------------------------------------------------
# center density


def count_centers_within(c: Configuration, center: Point, radius: float) -> int:
    """Number of obstacle centers in the open disc B(center, radius)."""
    if radius <= 0.0:
        return 0
    total = 0
    rho_p = center.norm()
    theta_p = center.angle()
    for b in c.blocks:
        if isinstance(b, RingBlock):
            total += _ring_count_within(b, rho_p, theta_p, radius)
        elif len(b):
            d2 = (b.x - center.x) ** 2 + (b.y - center.y) ** 2
            total += int(np.count_nonzero(d2 < radius * radius))
    return total


def _ring_count_within(rb: RingBlock, rho_p: float, theta_p: float, radius: float) -> int:
    dr2 = (rho_p - rb.rho) ** 2
    if dr2 >= radius * radius:
        return 0
    q = (radius * radius - dr2) / (4.0 * rho_p * rb.rho) if rho_p > 0 else 2.0
    if q >= 1.0:
        lo, hi = theta_p - math.pi, theta_p + math.pi
        full_circle = True
    else:
        w = 2.0 * math.asin(math.sqrt(q))
        lo, hi = theta_p - w, theta_p + w
        full_circle = False
    step = rb.step
    if full_circle:
        return len(rb)
    # integer slots a with angle (a + 1/2) * step strictly inside (lo, hi)
    u_lo = lo / step - 0.5
    u_hi = hi / step - 0.5
    a_lo = math.floor(u_lo) + 1
    a_hi = math.ceil(u_hi) - 1
    if a_hi < a_lo:
        return 0
    count = a_hi - a_lo + 1
    if count >= rb.count:
        return len(rb)
    if rb.a_start == 0:
        return count
    # subtract slots whose wrapped index falls in the excluded prefix
    excluded = _count_mod_in_prefix(a_lo, a_hi, rb.count, rb.a_start)
    return count - excluded


def _count_mod_in_prefix(a_lo: int, a_hi: int, modulus: int, prefix: int) -> int:
    """#{a in [a_lo, a_hi] : a mod modulus < prefix}."""

    def count_below(n: int) -> int:
        # over [0, n)
        if n <= 0:
            return 0
        full, rem = divmod(n, modulus)
        return full * prefix + min(rem, prefix)

    base = (a_lo // modulus) * modulus
    return count_below(a_hi + 1 - base) - count_below(a_lo - base)


def density_profile(
    c: Configuration,
    a: float,
    t_samples: Sequence[float],
) -> np.ndarray:
    """N_a(x) = #centers in B(x, a(1-|x|)) sampled along the positive axis."""
    if not (0.0 < a < 1.0):
        raise CriteriaError("density parameter a must lie in (0, 1)")
    out = np.empty(len(t_samples))
    for i, t in enumerate(t_samples):
        if not (0.0 <= t < 1.0):
            raise CriteriaError("density samples must lie in [0, 1)")
        out[i] = count_centers_within(c, Point(t, 0.0), a * (1.0 - t))
    return out


def density_bounds(
    c: Configuration, m: MSpec, a: float, t_samples: Sequence[float]
) -> tuple[float, float]:
    """Empirical (min, max) of N_a(x)/M(|x|) over the sample grid."""
    n_vals = density_profile(c, a, t_samples)
    m_vals = np.array([float(m.value(t)) for t in t_samples])
    ratios = n_vals / m_vals
    return float(ratios.min()), float(ratios.max())
