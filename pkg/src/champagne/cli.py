"""Command-line entry point.

Subcommands wire the generators to the diagnostics:

* ``generate``: build a configuration file (subsquares, phi-grid, or the
  avoidable ring).
* ``check``: series criteria over a boundary grid, separation statistics,
  budget sums, the integral test, and the avoidability certificate.
* ``capacity``: per-cell capacity table, the cell capacity series, and
  quasiadditivity ratios.
* ``simulate`` / ``sweep``: walk-on-spheres escape estimates, single depth
  or per truncation depth.
* ``report``: join the artifacts into one verdict per configuration.

Every output embeds the tool version, the full parameter set, the seed,
and the SHA-256 of the input configuration; reruns with identical inputs
are byte-identical (no timestamps, sorted keys, shortest-round-trip float
formatting).  Exit codes: 0 success (including inconclusive diagnostics),
1 configuration validation failure, 2 usage or I/O failure.

Environment overrides: ``CHAMPAGNE_OUT`` for the output directory,
``CHAMPAGNE_THREADS`` for the walker thread count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import (
    CapacityConstants,
    CapacityError,
    avoidability_certificate,
    cell_capacity_series,
    cell_capacity_weights,
    quasiadditivity_ratio,
)
from .criteria import (
    BoundaryPoint,
    CriteriaError,
    affine_growth,
    budget_sums,
    integral_test,
    log_weighted_series,
    poisson_series,
    separation,
    shrink_for_separation,
)
from .generators import (
    GeneratorError,
    GeneratorParams,
    MSpec,
    PhiSpec,
    generate_avoidable_ring,
    generate_phi_grid,
    generate_subsquares,
)
from .geometry import (
    TWO_PI,
    Configuration,
    WhitneyIndex,
    chord,
    dumps_config,
    loads_config,
    sector_count,
    validate_configuration,
)
from .geometry import Point, SpatialIndex
from .walker import (
    WalkParams,
    concentric_obstacle_config,
    escape_vs_depth,
    estimate_escape,
    run_walk,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


# ---------------------------------------------------------------------------
# deterministic output helpers


def _canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _meta(command: str, params: dict, input_hash: str | None = None, seed=None) -> dict:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "params": params,
    }
    if input_hash is not None:
        meta["input_sha256"] = input_hash
    if seed is not None:
        meta["seed"] = seed
    return meta


def _out_dir(args) -> Path:
    if args.out_dir is not None:
        return Path(args.out_dir)
    return Path(os.environ.get("CHAMPAGNE_OUT", "."))


def _default_jobs() -> int:
    return max(1, int(os.environ.get("CHAMPAGNE_THREADS", "1")))


def _load_config(path: str) -> Configuration:
    return loads_config(Path(path).read_text())


def _csv(rows: list[list], header: list[str]) -> str:
    def fmt(v) -> str:
        if isinstance(v, float):
            return repr(float(v))
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    if args.family == "subsquares":
        params = GeneratorParams.exp_power(
            beta=args.beta,
            c0=args.c0,
            alpha=args.alpha,
            n_min=args.n_min,
            n_max=args.n_max,
            drop_first=args.drop_first,
            certify_budget=args.certify_budget,
        )
        config = generate_subsquares(params)
    elif args.family == "phi-grid":
        config = generate_phi_grid(
            PhiSpec(form="exp_power", c0=args.c0, beta=args.beta),
            per_cell=args.per_cell,
            n_min=args.n_min,
            n_max=args.n_max,
        )
    elif args.family == "avoidable-ring":
        config = generate_avoidable_ring(
            target=args.target, ring_radius=args.ring_radius, k_discs=args.k_discs
        )
    else:
        raise GeneratorError(f"unknown family {args.family}")
    out = Path(args.output)
    _write(out, dumps_config(config) + "\n")
    counts: dict[int, int] = {}
    for b in config.blocks:
        if hasattr(b, "n"):
            counts[b.n] = counts.get(b.n, 0) + len(b)
        else:
            for g in b.generations:
                counts[int(g)] = counts.get(int(g), 0) + 1
    for n in sorted(counts):
        print(f"generation {n}: {counts[n]} discs")
    print(f"total {config.disc_count} discs -> {out}")
    if args.family == "avoidable-ring":
        cert = avoidability_certificate(config)
        if cert.issued:
            print(
                f"avoidable budget satisfied: {cert.budget!r} <= {cert.threshold!r}"
            )
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    path = Path(args.config)
    config = _load_config(str(path))
    report = validate_configuration(config)
    if not report.ok:
        for v in report.violations:
            print(f"invalid: {v.kind} {v.detail} indices={v.indices}", file=sys.stderr)
        return EXIT_INVALID

    ys = BoundaryPoint.grid(args.y_grid)
    selected = set(args.criteria.split(","))
    rows: list[list] = []
    summary: dict = {}

    if "log_weighted" in selected or "poisson" in selected:
        growth = []
        totals_log, totals_poisson = [], []
        for yi, y in enumerate(ys):
            if "log_weighted" in selected:
                rep = log_weighted_series(config, y)
                totals_log.append(rep.total)
                for (n, v), (_, cum) in zip(rep.per_generation, rep.cumulative):
                    rows.append(["log_weighted", yi, y.theta, n, v, cum])
                gens = [n for n, _ in rep.per_generation]
                if gens and max(gens) - max(min(gens), args.growth_n_lo) >= 2:
                    slope, resid = affine_growth(
                        rep, args.growth_n_lo, max(gens)
                    )
                    growth.append({"y_index": yi, "slope": slope, "residual_fraction": resid})
            if "poisson" in selected:
                rep = poisson_series(config, y)
                totals_poisson.append(rep.total)
                for (n, v), (_, cum) in zip(rep.per_generation, rep.cumulative):
                    rows.append(["poisson", yi, y.theta, n, v, cum])
        if totals_log:
            summary["log_weighted_totals"] = {
                "min": min(totals_log),
                "median": float(np.median(totals_log)),
                "max": max(totals_log),
            }
        if totals_poisson:
            summary["poisson_totals"] = {
                "min": min(totals_poisson),
                "median": float(np.median(totals_poisson)),
                "max": max(totals_poisson),
            }
        if growth:
            summary["growth"] = growth
            summary["growth_all_positive"] = all(g["slope"] > 0 for g in growth)
            summary["growth_max_residual_fraction"] = max(
                g["residual_fraction"] for g in growth
            )

    if "separation" in selected and config.disc_count >= 2:
        sep_summary = {}
        for kind in ("plain", "radius_log"):
            rep = separation(config, kind=kind)
            sep_summary[kind] = {
                "value": rep.value,
                "argmin_pair": list(rep.argmin_pair) if rep.argmin_pair else None,
            }
        summary["separation"] = sep_summary

    if "budgets" in selected:
        sums = budget_sums(config, alpha=args.alpha) if config.disc_count else None
        if sums is not None:
            summary["budgets"] = {
                "alpha": sums.alpha,
                "sum_r_alpha": sums.sum_r_alpha,
                "sum_log_inv_alpha": sums.sum_log_inv_alpha,
                "sum_log_inv_1": sums.sum_log_inv_1,
            }

    if "integral" in selected:
        prov_phi = dict(config.provenance).get("phi")
        if isinstance(prov_phi, dict) and prov_phi.get("form") == "exp_power":
            phi = PhiSpec(form="exp_power", c0=prov_phi["c0"], beta=prov_phi["beta"])
            m = MSpec(beta=prov_phi["beta"])
            summary["integral_test"] = {
                "upper": args.integral_upper,
                "value": integral_test(m, phi, args.integral_upper),
                "closed_form": prov_phi["c0"] * math.log(1.0 / (1.0 - args.integral_upper)),
            }

    cert = avoidability_certificate(config)
    summary["avoidable_certificate"] = {
        "issued": cert.issued,
        "budget": cert.budget,
        "threshold": cert.threshold,
        "outside_half_disc": cert.outside_half_disc,
        "reason": cert.reason,
    }

    out = _out_dir(args)
    doc = _meta(
        "check",
        {
            "config": str(path),
            "y_grid": args.y_grid,
            "criteria": sorted(selected),
            "alpha": args.alpha,
            "integral_upper": args.integral_upper,
            "growth_n_lo": args.growth_n_lo,
        },
        input_hash=_sha256_file(path),
    )
    doc["summary"] = summary
    _write(out / "check.json", _canonical_json(doc))
    _write(
        out / "series.csv",
        _csv(rows, ["kind", "y_index", "theta", "n", "per_generation", "cumulative"]),
    )
    if cert.issued:
        print("certified avoidable (capacity budget)")
    else:
        print("diagnostics written; see check.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# capacity


def cmd_capacity(args) -> int:
    path = Path(args.config)
    config = _load_config(str(path))
    report = validate_configuration(config)
    if not report.ok:
        print("configuration invalid; run check for details", file=sys.stderr)
        return EXIT_INVALID
    constants = CapacityConstants.for_configuration(config)
    weights = cell_capacity_weights(config, n_max=args.n_max)
    y0 = BoundaryPoint(0.0)

    quasi_cfg = config
    shrink_log_delta = 0.0
    if args.shrink_to_floor:
        quasi_cfg, shrink_log_delta = shrink_for_separation(
            config, constants.separation_floor
        )

    log_caps = _cell_log_capacities(config, weights)
    c2_values = _cell_c2_values(config, weights, constants)
    rows: list[list] = []
    emitted = 0
    for key in sorted(weights, key=lambda k: k if isinstance(k, tuple) else (k, -1)):
        if isinstance(key, tuple):
            n, ms = key[0], [key[1]]
        else:
            n, ms = key, range(min(sector_count(key), args.max_cells_per_generation))
        for m in ms:
            if emitted >= args.max_cells:
                break
            quasi = ""
            if args.quasiadditivity:
                try:
                    quasi = quasiadditivity_ratio(
                        quasi_cfg, WhitneyIndex(n, m), constants
                    ).ratio
                except CapacityError:
                    quasi = ""
            log_cap = float(log_caps[key])
            z_rho = 1.0 - 2.0 ** (-n)
            z_theta = TWO_PI * m / sector_count(n)
            dist2 = chord(1.0, z_rho, y0.theta - z_theta) ** 2
            essen_term = float(2.0 ** (-2 * n) * weights[key] / dist2)
            with np.errstate(under="ignore"):
                cap_value = math.exp(log_cap) if log_cap > -745.0 else 0.0
            rows.append(
                [n, m, log_cap, cap_value, float(c2_values[key]), essen_term, quasi]
            )
            emitted += 1

    series = cell_capacity_series(config, y0, weights=weights)
    cert = avoidability_certificate(config)
    out = _out_dir(args)
    doc = _meta(
        "capacity",
        {
            "config": str(path),
            "n_max": args.n_max,
            "max_cells": args.max_cells,
            "quasiadditivity": args.quasiadditivity,
            "shrink_to_floor": args.shrink_to_floor,
        },
        input_hash=_sha256_file(path),
    )
    doc["summary"] = {
        "constants": {
            "cell_comparability": constants.cell_comparability,
            "c2_bracket": constants.c2_bracket,
            "separation_floor": constants.separation_floor,
        },
        "shrink_log_delta": shrink_log_delta,
        "cell_capacity_series_total_at_theta0": series.total,
        "certificate": {
            "issued": cert.issued,
            "budget": cert.budget,
            "threshold": cert.threshold,
            "reason": cert.reason,
        },
    }
    _write(out / "capacity.json", _canonical_json(doc))
    _write(
        out / "capacity.csv",
        _csv(
            rows,
            [
                "n",
                "m",
                "log_capacity",
                "capacity",
                "c2_scaled",
                "cell_series_term",
                "quasiadditivity_ratio",
            ],
        ),
    )
    print(f"capacity table for {emitted} cells -> capacity.csv")
    return EXIT_OK


def _cell_log_capacities(config: Configuration, weights: dict) -> dict:
    """log capacity of each cell's obstacle set, keyed like the weights."""
    out: dict = {}
    for key, w in weights.items():
        n = key[0] if isinstance(key, tuple) else key
        # the weight is 1/(-n log 2 - log c), so invert it exactly
        out[key] = -n * math.log(2.0) - 1.0 / w
    return out


def _cell_c2_values(
    config: Configuration, weights: dict, constants: CapacityConstants
) -> dict:
    """Truncated-kernel capacity of each scaled cell set."""
    from .capacity import c2_disc_system, cluster_c2, generation_clusters
    from .geometry import RingBlock, whitney_cell

    out: dict = {}
    if any(isinstance(b, RingBlock) for b in config.blocks):
        clusters = generation_clusters(config)
        for key in weights:
            n = key[0] if isinstance(key, tuple) else key
            value, _ = cluster_c2(clusters[n], constants.cell_scale(n))
            out[key] = value
        return out
    for key in weights:
        n, m = key
        cell = whitney_cell(WhitneyIndex(n, m))
        xs, ys, lrs = [], [], []
        for b in config.blocks:
            for i in range(len(b)):
                d = b.disc(i)
                if cell.distance_to(d.center) <= d.radius:
                    xs.append(d.center.x)
                    ys.append(d.center.y)
                    lrs.append(d.log_radius)
        scale = constants.cell_scale(n)
        value, _ = c2_disc_system(
            np.array(xs) * scale, np.array(ys) * scale, np.array(lrs) + math.log(scale)
        )
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# simulate and sweep


def _walk_params(args, n_walks: int) -> WalkParams:
    return WalkParams(
        eps_shell=args.eps,
        max_steps=args.max_steps,
        start=Point(args.start_x, args.start_y),
        seed=args.seed,
        n_walks=n_walks,
        n_jobs=_default_jobs(),
    )


def _estimate_doc(est) -> dict:
    return {
        "p_escape": est.p_escape,
        "ci95_halfwidth": est.ci95_halfwidth,
        "n_walks": est.n_walks,
        "n_escaped": est.n_escaped,
        "n_hit": est.n_hit,
        "n_censored": est.n_censored,
        "mean_steps": est.mean_steps,
        "unreliable": est.unreliable,
    }


def cmd_simulate(args) -> int:
    if args.n_walks < 1:
        print("n_walks must be >= 1", file=sys.stderr)
        return EXIT_IO
    if args.annulus is not None:
        config = concentric_obstacle_config(args.annulus)
        input_hash = None
        config_name = f"annulus(r0={args.annulus!r})"
    elif args.config is None:
        print("pass a configuration file or --annulus R0", file=sys.stderr)
        return EXIT_IO
    else:
        path = Path(args.config)
        config = _load_config(str(path))
        input_hash = _sha256_file(path)
        config_name = str(path)
    params = _walk_params(args, args.n_walks)
    est = estimate_escape(params, config)
    out = _out_dir(args)
    doc = _meta(
        "simulate",
        {
            "config": config_name,
            "eps": args.eps,
            "n_walks": args.n_walks,
            "max_steps": args.max_steps,
            "start": [args.start_x, args.start_y],
        },
        input_hash=input_hash,
        seed=args.seed,
    )
    doc["estimate"] = _estimate_doc(est)
    _write(out / "simulate.json", _canonical_json(doc))
    rows = [[config.n_max, est.n_walks, est.p_escape, est.ci95_halfwidth, est.n_censored, est.mean_steps]]
    _write(
        out / "simulate.csv",
        _csv(rows, ["n_max", "n_walks", "p_escape", "ci95", "n_censored", "mean_steps"]),
    )
    if args.trace:
        idx = SpatialIndex(config)
        trace_rows = [
            [w, (o := run_walk(params, idx, walk_id=w)).tag, o.steps]
            for w in range(min(args.n_walks, args.trace))
        ]
        _write(out / "trace.csv", _csv(trace_rows, ["walk", "outcome", "steps"]))
    print(f"seed {args.seed}: p_escape = {est.p_escape!r} +- {est.ci95_halfwidth!r}")
    if est.unreliable:
        print(
            f"warning: {est.n_censored} of {est.n_walks} walks censored (> 1%)",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_sweep(args) -> int:
    path = Path(args.config)
    config = _load_config(str(path))
    depths = [int(d) for d in args.depths.split(",")]
    params = _walk_params(args, args.n_walks)
    table = escape_vs_depth(config, depths, params)
    rows = [
        [
            row.n_max,
            row.estimate.n_walks,
            row.estimate.p_escape,
            row.estimate.ci95_halfwidth,
            row.estimate.n_censored,
            row.estimate.mean_steps,
        ]
        for row in table
    ]
    out = _out_dir(args)
    doc = _meta(
        "sweep",
        {
            "config": str(path),
            "depths": depths,
            "eps": args.eps,
            "n_walks": args.n_walks,
            "max_steps": args.max_steps,
            "start": [args.start_x, args.start_y],
        },
        input_hash=_sha256_file(path),
        seed=args.seed,
    )
    doc["rows"] = [
        {"n_max": row.n_max, "estimate": _estimate_doc(row.estimate)} for row in table
    ]
    _write(out / "sweep.json", _canonical_json(doc))
    _write(
        out / "sweep.csv",
        _csv(rows, ["n_max", "n_walks", "p_escape", "ci95", "n_censored", "mean_steps"]),
    )
    for row in table:
        print(
            f"n_max={row.n_max}: p_escape={row.estimate.p_escape!r} "
            f"+- {row.estimate.ci95_halfwidth!r}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _escape_trend(rows: list[dict]) -> dict:
    ps = [r["estimate"]["p_escape"] for r in rows]
    cis = [r["estimate"]["ci95_halfwidth"] for r in rows]
    decreasing = all(
        ps[i] - ps[i + 1] > 2.0 * max(cis[i], cis[i + 1]) for i in range(len(ps) - 1)
    )
    return {"p_escape": ps, "strictly_decreasing_beyond_2ci": decreasing}


def cmd_report(args) -> int:
    missing = [p for p in (args.check, args.sweep) if p and not Path(p).exists()]
    if missing:
        for p in missing:
            print(f"missing input: {p}", file=sys.stderr)
        return EXIT_IO
    check_doc = json.loads(Path(args.check).read_text()) if args.check else None
    sweep_doc = json.loads(Path(args.sweep).read_text()) if args.sweep else None

    verdicts: list[dict] = []
    summary: dict = {}

    cert = (check_doc or {}).get("summary", {}).get("avoidable_certificate")
    if cert is not None:
        summary["avoidable_certificate"] = cert

    empty = (
        check_doc is not None
        and check_doc.get("summary", {}).get("budgets") is None
        and cert is not None
        and cert["budget"] == 0.0
    )
    if empty:
        verdicts.append(
            {
                "verdict": "certified avoidable (trivial)",
                "test": "empty configuration",
                "threshold": None,
            }
        )
    elif cert is not None and cert["issued"]:
        verdicts.append(
            {
                "verdict": "certified avoidable (capacity budget)",
                "test": "reciprocal-log budget vs 1/(2 log 4)",
                "threshold": cert["threshold"],
            }
        )
    else:
        growth_ok = bool((check_doc or {}).get("summary", {}).get("growth_all_positive"))
        sep = (check_doc or {}).get("summary", {}).get("separation", {})
        sep_value = sep.get("radius_log", {}).get("value")
        sep_ok = sep_value is not None and sep_value > args.separation_threshold
        trend = None
        if sweep_doc is not None:
            trend = _escape_trend(sweep_doc["rows"])
            summary["escape_trend"] = trend
        if growth_ok and sep_ok and trend is not None and trend["strictly_decreasing_beyond_2ci"]:
            verdicts.append(
                {
                    "verdict": "consistent with unavoidable",
                    "test": "series growth + separation + escape trend",
                    "threshold": args.separation_threshold,
                }
            )
        else:
            verdicts.append(
                {
                    "verdict": "inconclusive",
                    "test": "series growth + separation + escape trend",
                    "threshold": args.separation_threshold,
                }
            )

    out = _out_dir(args)
    doc = _meta(
        "report",
        {
            "check": args.check,
            "sweep": args.sweep,
            "separation_threshold": args.separation_threshold,
        },
    )
    doc["summary"] = summary
    doc["verdicts"] = verdicts
    _write(out / "report.json", _canonical_json(doc))
    lines = ["cross-check report", "=================="]
    for v in verdicts:
        lines.append(f"{v['verdict']}  [{v['test']}; threshold={v['threshold']!r}]")
    if "escape_trend" in summary:
        lines.append(f"escape trend: {summary['escape_trend']['p_escape']!r}")
    text = "\n".join(lines) + "\n"
    _write(out / "report.txt", text)
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="champagne",
        description="Champagne subregion toolkit: generators, criteria, capacity, walks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a configuration file")
    g.add_argument("family", choices=["subsquares", "phi-grid", "avoidable-ring"])
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--beta", type=float, default=1.5)
    g.add_argument("--c0", type=float, default=0.05)
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--n-min", type=int, default=1)
    g.add_argument("--n-max", type=int, default=8)
    g.add_argument("--drop-first", type=int, default=0)
    g.add_argument("--per-cell", type=int, default=1)
    g.add_argument("--certify-budget", action="store_true")
    g.add_argument("--target", type=float, default=1.0 / (2.0 * math.log(4.0)))
    g.add_argument("--ring-radius", type=float, default=0.75)
    g.add_argument("--k-discs", type=int, default=6)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="evaluate analytic criteria")
    c.add_argument("config")
    c.add_argument("--y-grid", type=int, default=64)
    c.add_argument(
        "--criteria",
        default="log_weighted,poisson,separation,budgets,integral",
    )
    c.add_argument("--alpha", type=float, default=2.0)
    c.add_argument("--integral-upper", type=float, default=0.999)
    c.add_argument("--growth-n-lo", type=int, default=6)
    c.add_argument("--out-dir", default=None)
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("capacity", help="per-cell capacity diagnostics")
    k.add_argument("config")
    k.add_argument("--n-max", type=int, default=None)
    k.add_argument("--max-cells", type=int, default=4096)
    k.add_argument("--max-cells-per-generation", type=int, default=64)
    k.add_argument("--quasiadditivity", action="store_true")
    k.add_argument("--shrink-to-floor", action="store_true")
    k.add_argument("--out-dir", default=None)
    k.set_defaults(func=cmd_capacity)

    s = sub.add_parser("simulate", help="walk-on-spheres escape estimate")
    s.add_argument("config", nargs="?", default=None)
    s.add_argument("--annulus", type=float, default=None, metavar="R0")
    s.add_argument("--eps", type=float, default=1e-4)
    s.add_argument("--n-walks", type=int, default=100_000)
    s.add_argument("--max-steps", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start-x", type=float, default=0.0)
    s.add_argument("--start-y", type=float, default=0.0)
    s.add_argument("--trace", type=int, default=0)
    s.add_argument("--out-dir", default=None)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="escape estimates per truncation depth")
    w.add_argument("config")
    w.add_argument("--depths", default="6,8,10,12")
    w.add_argument("--eps", type=float, default=1e-4)
    w.add_argument("--n-walks", type=int, default=100_000)
    w.add_argument("--max-steps", type=int, default=1_000_000)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--start-x", type=float, default=0.0)
    w.add_argument("--start-y", type=float, default=0.0)
    w.add_argument("--out-dir", default=None)
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="join artifacts into verdicts")
    r.add_argument("--check", default=None)
    r.add_argument("--sweep", default=None)
    r.add_argument("--separation-threshold", type=float, default=0.0)
    r.add_argument("--out-dir", default=None)
    r.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GeneratorError, CriteriaError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
