import math

import numpy as np
import pytest

from champagne.criteria import (
    BoundaryPoint,
    CriteriaError,
    SingularIntegrandError,
    budget_sums,
    count_centers_within,
    density_bounds,
    density_profile,
    equally_spaced_inverse_square_sum,
    integral_test,
    log_weighted_series,
    poisson_series,
    power_log_bound_constant,
    separation,
    series_over_grid,
)
from champagne.generators import (
    GeneratorParams,
    MSpec,
    PhiSpec,
    generate_avoidable_ring,
    generate_phi_grid,
    generate_subsquares,
    shrink,
    truncate,
)
from champagne.geometry import Configuration, Disc, Point, RingBlock, TWO_PI


def disc(x, y, r):
    return Disc.from_radius(Point(x, y), r)


SINGLE = Configuration.from_discs([disc(0.5, 0.0, 0.05)])
Y0 = BoundaryPoint(0.0)


class TestRingClosedForm:
    @pytest.mark.parametrize("rho,count,a_start", [(0.6, 17, 0), (0.9, 64, 0), (0.8, 40, 7)])
    def test_matches_bruteforce(self, rho, count, a_start):
        for psi in (0.0, 0.3, 2.0, 4.9):
            got = equally_spaced_inverse_square_sum(
                rho, count, math.pi / count, psi, a_start
            )
            th = (np.arange(a_start, count) + 0.5) * TWO_PI / count
            y = np.array([math.cos(psi), math.sin(psi)])
            pts = rho * np.column_stack([np.cos(th), np.sin(th)])
            brute = float(np.sum(1.0 / np.sum((pts - y) ** 2, axis=1)))
            assert got == pytest.approx(brute, rel=1e-11)

    def test_deep_generation_underflow_safe(self):
        # rho^J underflows; the identity degenerates to J / (1 - rho^2)
        rho = 1.0 - 2.0**-13
        count = 2**16 * 512
        got = equally_spaced_inverse_square_sum(rho, count, 0.0, 0.3)
        assert got == pytest.approx(count / (1.0 - rho * rho), rel=1e-12)


class TestSeriesExamples:
    def test_empty_configuration(self):
        rep = log_weighted_series(Configuration(blocks=(), n_max=0), Y0)
        assert rep.total == 0.0
        assert rep.per_generation == ()

    def test_single_disc_log_weighted(self):
        # (0.5^2/0.5^2) / log(0.5/0.05) = 1/log(10)
        rep = log_weighted_series(SINGLE, Y0)
        assert rep.total == pytest.approx(1.0 / math.log(10.0), rel=1e-12)

    def test_single_disc_poisson(self):
        rep = poisson_series(SINGLE, Y0)
        assert rep.total == pytest.approx(1.0)

    def test_poisson_dominates_log_weighted_when_log_large(self):
        cfg = generate_phi_grid(PhiSpec(c0=0.3, beta=0.5), per_cell=1, n_min=1, n_max=4)
        for y in BoundaryPoint.grid(8):
            assert poisson_series(cfg, y).total >= log_weighted_series(cfg, y).total

    def test_rotation_invariance(self):
        rng = np.random.default_rng(3)
        discs = [
            disc(*(0.7 * np.array([math.cos(a), math.sin(a)])), 1e-4)
            for a in rng.uniform(0, TWO_PI, 40)
        ]
        cfg = Configuration.from_discs(discs)
        angle = 1.234
        rep0 = log_weighted_series(cfg, BoundaryPoint(0.2))
        rep1 = log_weighted_series(cfg.rotated(angle), BoundaryPoint(0.2 + angle))
        assert rep1.total == pytest.approx(rep0.total, rel=1e-12)

    def test_nonpositive_log_rejected(self):
        # raw block arrays bypass the Disc invariant, so the series op must
        # reject r >= 1-|x| itself
        from champagne.geometry import DiscBlock

        bad = Configuration(
            blocks=(DiscBlock(np.array([0.6]), np.array([0.0]), np.array([math.log(0.5)])),),
            n_max=1,
        )
        with pytest.raises(CriteriaError):
            log_weighted_series(bad, Y0)

    def test_ring_blocks_match_materialized(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(beta=1.0, c0=0.2, n_min=1, n_max=4))
        flat = cfg.materialized()
        for y in (Y0, BoundaryPoint(1.1)):
            r_ring = log_weighted_series(cfg, y)
            r_flat = log_weighted_series(flat, y)
            assert dict(r_ring.per_generation) == pytest.approx(
                dict(r_flat.per_generation), rel=1e-10
            )
            p_ring = poisson_series(cfg, y)
            p_flat = poisson_series(flat, y)
            assert p_ring.total == pytest.approx(p_flat.total, rel=1e-10)

    def test_cumulative_monotone(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(n_min=1, n_max=6))
        rep = log_weighted_series(cfg, BoundaryPoint(0.7))
        values = [v for _, v in rep.cumulative]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert all(v >= 0 for _, v in rep.per_generation)

    def test_superset_dominates_subset(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(n_min=1, n_max=5))
        cut = truncate(cfg, n_max=3)
        assert log_weighted_series(cut, Y0).total <= log_weighted_series(cfg, Y0).total

    def test_per_generation_contributions_stable_deep(self):
        # the flagship configuration: contributions per generation stay
        # within a factor 4 of one another for n = 6..12
        cfg = generate_subsquares(
            GeneratorParams.exp_power(beta=1.5, c0=0.05, n_min=1, n_max=12)
        )
        rep = log_weighted_series(cfg, Y0)
        per = dict(rep.per_generation)
        vals = [per[n] for n in range(6, 13)]
        assert min(vals) > 0
        assert max(vals) / min(vals) < 4.0

    def test_series_over_grid_counts(self):
        cfg = generate_phi_grid(PhiSpec(c0=0.3, beta=0.5), per_cell=1, n_min=1, n_max=3)
        reports = series_over_grid(cfg, "log_weighted", y_count=16)
        assert len(reports) == 16

    def test_cell_and_disc_boundary_distances_comparable(self):
        # for a disc meeting a cell, the reference point z of the cell and
        # the disc center see every boundary point at comparable distances,
        # and 1-|x_k| is comparable with 2^{-n}, both within the
        # conservative constant 4/(1 - ratio_sup)
        from champagne.geometry import cell_center, cells_intersecting_disc

        rng = np.random.default_rng(21)
        ratio_sup = 0.2
        comparability = 4.0 / (1.0 - ratio_sup)
        for _ in range(80):
            rho = rng.uniform(0.5, 0.995)
            th = rng.uniform(0, TWO_PI)
            s = 1.0 - rho
            r = ratio_sup * s * rng.uniform(0.1, 1.0)
            d = disc(rho * math.cos(th), rho * math.sin(th), r)
            for idx in cells_intersecting_disc(d):
                assert 2.0 ** (-idx.n) / comparability <= s <= comparability * 2.0 ** (-idx.n)
                z = cell_center(idx)
                for psi in rng.uniform(0, TWO_PI, 4):
                    y = Point(math.cos(psi), math.sin(psi))
                    dz = math.hypot(z.x - y.x, z.y - y.y)
                    dx = math.hypot(d.center.x - y.x, d.center.y - y.y)
                    assert 1.0 / comparability <= dz / dx <= comparability


class TestSeparation:
    def test_two_discs_exact(self):
        c = Configuration.from_discs([disc(0.5, 0.0, 0.01), disc(0.7, 0.0, 0.001)])
        rep = separation(c, kind="plain")
        # both orderings of the single pair are taken, minimum kept
        w_a = 1.0 / 0.5
        w_b = 1.0 / 0.3
        assert rep.value == pytest.approx(0.2 * min(w_a, w_b))
        assert rep.argmin_pair is not None

    def test_matches_quadratic_scan_random(self):
        rng = np.random.default_rng(9)
        discs = []
        while len(discs) < 120:
            rho = rng.uniform(0.3, 0.99)
            th = rng.uniform(0, TWO_PI)
            r = 1e-6
            d = disc(rho * math.cos(th), rho * math.sin(th), r)
            if all(
                math.hypot(d.center.x - o.center.x, d.center.y - o.center.y) > 1e-4
                for o in discs
            ):
                discs.append(d)
        c = Configuration.from_discs(discs)
        for kind in ("plain", "radius_log"):
            rep = separation(c, kind=kind)
            x, y, lr = c.disc_arrays()
            s = 1.0 - np.hypot(x, y)
            if kind == "plain":
                w = 1.0 / s
            else:
                w = np.sqrt(np.log(s) - lr) / s
            dist = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
            np.fill_diagonal(dist, np.inf)
            brute = float(np.min(dist * w[None, :]))
            assert rep.value == pytest.approx(brute, rel=1e-12)

    def test_ring_config_matches_materialized(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(beta=1.2, c0=0.1, n_min=1, n_max=4))
        flat = cfg.materialized()
        for kind in ("plain", "radius_log"):
            v_ring = separation(cfg, kind=kind).value
            x, y, lr = flat.disc_arrays()
            s = 1.0 - np.hypot(x, y)
            w = (1.0 / s) if kind == "plain" else np.sqrt(np.log(s) - lr) / s
            dist = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
            np.fill_diagonal(dist, np.inf)
            brute = float(np.min(dist * w[None, :]))
            assert v_ring == pytest.approx(brute, rel=1e-11)

    def test_shrink_increases_radius_log_value(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(beta=1.0, c0=0.2, n_min=1, n_max=4))
        v0 = separation(cfg, kind="radius_log").value
        v1 = separation(shrink(cfg, delta=0.5), kind="radius_log").value
        assert v1 >= v0

    def test_phi_log_equals_radius_log_for_profile_radii(self):
        phi = PhiSpec(c0=0.2, beta=1.0)
        cfg = generate_phi_grid(phi, per_cell=2, n_min=1, n_max=4)
        v_phi = separation(cfg, kind="phi_log", phi=phi).value
        v_rad = separation(cfg, kind="radius_log").value
        assert v_phi == pytest.approx(v_rad, rel=1e-9)

    def test_plain_positive_when_radius_log_positive(self):
        # term-by-term implication when every log factor is >= 1
        cfg = generate_subsquares(GeneratorParams.exp_power(n_min=1, n_max=4))
        v_log = separation(cfg, kind="radius_log").value
        v_plain = separation(cfg, kind="plain").value
        assert v_log > 0
        assert v_plain > 0

    def test_subsquare_separation_stable_across_depth(self):
        vals = []
        for n_max in range(6, 10):
            cfg = generate_subsquares(
                GeneratorParams.exp_power(beta=1.5, c0=0.05, n_min=1, n_max=n_max)
            )
            vals.append(separation(cfg, kind="radius_log").value)
        assert all(v > 0 for v in vals)
        assert (max(vals) - min(vals)) / max(vals) < 0.05
        # the infimum never increases as depth grows
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


class TestIntegralTest:
    def test_power_pair_closed_form(self):
        # M = (1-t)^{-beta}, log(1/phi) = 1/(c0 (1-t)^beta) gives c0/(1-t)
        m = MSpec(beta=1.5)
        phi = PhiSpec(c0=0.05, beta=1.5)
        for upper in (0.9, 0.99, 0.999):
            got = integral_test(m, phi, upper)
            want = 0.05 * math.log(1.0 / (1.0 - upper))
            assert got == pytest.approx(want, rel=1e-6)

    def test_constant_profile(self):
        # M == 1, phi == e^{-1}: the antiderivative is log(1/(1-T))
        m = MSpec(beta=1e-12)
        phi = PhiSpec(form="table", knots_t=(0.0, 0.9999), knots_log_phi=(-1.0, -1.0))
        got = integral_test(m, phi, 0.99)
        assert got == pytest.approx(math.log(100.0), rel=1e-5)

    def test_dyadic_growth_increment(self):
        m = MSpec(beta=1.5)
        phi = PhiSpec(c0=0.05, beta=1.5)
        for j in (4, 7):
            t_lo = 1.0 - 2.0**-j
            t_hi = 1.0 - 2.0 ** -(j + 1)
            inc = integral_test(m, phi, t_hi) - integral_test(m, phi, t_lo)
            assert inc == pytest.approx(0.05 * math.log(2.0), rel=1e-6)

    def test_invalid_endpoint(self):
        with pytest.raises(CriteriaError):
            integral_test(MSpec(beta=1.0), PhiSpec(), 1.0)


class TestBudgets:
    def test_empty(self):
        b = budget_sums(Configuration(blocks=(), n_max=0), alpha=2.0)
        assert (b.sum_r_alpha, b.sum_log_inv_alpha, b.sum_log_inv_1) == (0.0, 0.0, 0.0)

    def test_single_disc_substitution(self):
        c = Configuration.from_discs([Disc(Point(0.5, 0.0), -10.0)])
        b = budget_sums(c, alpha=2.0)
        assert b.sum_r_alpha == pytest.approx(math.exp(-20.0))
        assert b.sum_log_inv_alpha == pytest.approx(1e-2)
        assert b.sum_log_inv_1 == pytest.approx(1e-1)

    def test_ring_blocks_match_materialized(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(beta=1.0, c0=0.2, n_min=1, n_max=4))
        flat = cfg.materialized()
        b0, b1 = budget_sums(cfg, 2.0), budget_sums(flat, 2.0)
        assert b0.sum_log_inv_alpha == pytest.approx(b1.sum_log_inv_alpha, rel=1e-12)
        assert b0.sum_log_inv_1 == pytest.approx(b1.sum_log_inv_1, rel=1e-12)

    def test_power_log_bound_on_grid(self):
        # r^alpha <= c(alpha) {log(1/r)}^{-2} for all r in (0,1)
        for alpha in (0.5, 1.0, 2.0, 4.0):
            c = power_log_bound_constant(alpha)
            r = np.logspace(-12, -1e-8, 200)
            lhs = r**alpha
            rhs = c / np.log(1.0 / r) ** 2
            assert np.all(lhs <= rhs * (1 + 1e-12))

    def test_avoidable_budget_holds(self):
        cfg = generate_avoidable_ring()
        b = budget_sums(cfg, alpha=1.0)
        assert b.sum_log_inv_1 <= 1.0 / (2.0 * math.log(4.0))


class TestDensity:
    def test_count_matches_bruteforce_on_rings(self):
        cfg = generate_subsquares(GeneratorParams.exp_power(beta=1.2, c0=0.1, n_min=1, n_max=4))
        flat = cfg.materialized()
        x, y, _ = flat.disc_arrays()
        rng = np.random.default_rng(12)
        for _ in range(50):
            t = rng.uniform(0.0, 0.95)
            radius = rng.uniform(0.001, 0.3)
            got = count_centers_within(cfg, Point(t, 0.0), radius)
            brute = int(np.count_nonzero((x - t) ** 2 + y**2 < radius * radius))
            assert got == brute

    def test_single_center_per_cell_density(self):
        cfg = generate_phi_grid(PhiSpec(c0=0.3, beta=0.5), per_cell=1, n_min=1, n_max=6)
        profile = density_profile(cfg, 0.95, np.linspace(0.55, 0.97, 20))
        assert np.all(profile >= 1)

    @pytest.mark.parametrize("beta,c0", [(1.0, 0.1), (1.5, 0.05)])
    def test_subsquare_density_meets_growth(self, beta, c0):
        # with subdivision floor(2^{n*beta/2}) and a close to 1 the center
        # count dominates (1-t)^{-beta} on a radial grid
        cfg = generate_subsquares(
            GeneratorParams.exp_power(beta=beta, c0=c0, n_min=1, n_max=8)
        )
        m = MSpec(beta=beta)
        lo, hi = density_bounds(cfg, m, a=0.95, t_samples=np.linspace(0.55, 0.99, 25))
        assert lo >= 1.0
