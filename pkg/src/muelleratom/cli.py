"""Command-line front end.

Subcommands: ``tf``, ``mueller``, ``scan``, ``screened``, ``radius``,
``verify``, ``audit``.  A JSON config file supplies defaults; explicit flags
win.  Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
4 inequality-suite violation.  All artifacts land in the output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as io_mod
from . import tf as tf_mod
from .coulomb import coulomb_estimate_ratio, screened_profile
from .dmatrix import build_exchange_table, density_of, exchange_energy
from .errors import NoConvergenceError
from .experiments import (
    apriori_audit,
    ionization_experiment,
    radius_experiment,
    screened_comparison,
)
from .grid import build_log_grid, default_grid
from .localize import (
    build_cutoffs,
    coulomb_like_weight,
    exchange_localization_check,
    exterior_l1_check,
    hardy_schwarz_check,
    ims_defect_dense,
    localize_dm,
    outside_kinetic_check,
    random_partition,
    random_psd_contraction,
    random_radial_ensemble,
    split_check,
)
from .solver import SolverConfig, ionization_scan, minimize_mueller

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "string"},
        "model": {"enum": ["tf", "mueller", "rhf"]},
        "Z": {"type": "number", "exclusiveMinimum": 0},
        "N": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r_min": {"type": ["number", "null"]},
                "r_max": {"type": ["number", "null"]},
                "n_points": {"type": ["integer", "null"]},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ell_max": {"type": ["integer", "null"], "minimum": 0},
                "k_max": {"type": ["integer", "null"], "minimum": 0},
                "orbitals_per_channel": {"type": "integer", "minimum": 1},
                "max_outer_iter": {"type": "integer", "minimum": 1},
                "energy_tol": {"type": "number", "exclusiveMinimum": 0},
                "occ_max_iter": {"type": "integer", "minimum": 1},
                "occ_tol": {"type": "number", "exclusiveMinimum": 0},
                "damping": {"type": "number", "exclusiveMinimum": 0},
                "box_leak_threshold": {"type": "number", "exclusiveMinimum": 0},
                "mu_tol": {"type": "number", "exclusiveMinimum": 0},
                "grow_subspace": {"type": "boolean"},
                "max_orbitals_per_channel": {"type": "integer", "minimum": 1},
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kappa": {"type": "array", "items": {"type": "number"}},
                "eps_report": {"type": "array", "items": {"type": "number"}},
                "suite": {"enum": ["identities", "lemmas", "all"]},
                "Z_values": {"type": "array", "items": {"type": "number"}},
                "instances": {"type": "integer", "minimum": 1},
            },
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1},
    },
}


def _load_config(path):
    if path is None:
        return {}
    payload = json.loads(Path(path).read_text())
    import jsonschema

    jsonschema.validate(payload, CONFIG_SCHEMA)
    return payload


def _solver_config(cfg: dict) -> SolverConfig:
    return SolverConfig(**cfg.get("solver", {}))


def _grid_for(cfg: dict, Z: float, default_builder=default_grid):
    g = cfg.get("grid", {})
    r_min = g.get("r_min")
    r_max = g.get("r_max")
    n = g.get("n_points")
    if r_min is None and r_max is None and n is None:
        return default_builder(Z)
    base = default_builder(Z)
    return build_log_grid(
        r_min if r_min is not None else base.r_min,
        r_max if r_max is not None else base.r_max,
        n if n is not None else base.n_points,
    )


def _outdir(cfg) -> Path:
    out = Path(cfg.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x):
    return io_mod.format_float(float(x))


def _cmd_tf(args, cfg):
    Z = args.Z
    grid = _grid_for(cfg, Z, tf_mod.default_tf_grid)
    sol = tf_mod.tf_solve_atomic(Z, grid)
    out = _outdir(cfg)
    stem = f"tf_Z{Z:g}"
    io_mod.write_tf_csv(out / f"{stem}.csv", sol)
    io_mod.write_json(
        out / f"{stem}.json",
        {
            "Z": Z,
            "mu": sol.mu,
            "energy": sol.energy,
            "iterations": sol.iterations,
            "total_charge": sol.rho.total_charge,
            "equation_residual": sol.equation_residual(),
            "grid": io_mod.grid_to_json(grid),
        },
    )
    print(
        f"tf Z={Z:g}: energy={_fmt(sol.energy)} charge={_fmt(sol.rho.total_charge)} "
        f"iterations={sol.iterations} -> {out / (stem + '.csv')}"
    )
    return 0


def _cmd_mueller(args, cfg):
    Z, N = args.Z, args.N if args.N is not None else args.Z
    grid = _grid_for(cfg, Z)
    config = _solver_config(cfg)
    res = minimize_mueller(Z, N, config, grid)
    out = _outdir(cfg)
    stem = f"mueller_Z{Z:g}_N{N:g}"
    io_mod.write_json(
        out / f"{stem}.json",
        {
            "Z": Z,
            "N": N,
            "energy": {
                "kinetic": res.energy.kinetic,
                "external": res.energy.external,
                "direct": res.energy.direct,
                "exchange": res.energy.exchange,
                "total": res.energy.total,
            },
            "mu": res.mu,
            "converged": res.converged,
            "bound": res.bound,
            "leak": res.leak,
            "outer_iterations": res.outer_iterations,
            "history": res.history,
            "occupations": [
                {"ell": ch.ell, "n": list(map(float, ch.occupations))}
                for ch in res.ensemble.channels
            ],
        },
    )
    rho = density_of(res.ensemble)
    io_mod.write_density_csv(out / f"{stem}.density.csv", grid, rho.values)
    io_mod.write_json(out / f"{stem}.ensemble.json", io_mod.ensemble_to_json(res.ensemble))
    print(
        f"mueller Z={Z:g} N={N:g}: energy={_fmt(res.energy.total)} mu={_fmt(res.mu)} "
        f"converged={res.converged} bound={res.bound}"
    )
    return 0 if res.converged else 3


def _cmd_scan(args, cfg):
    Z = args.Z
    grid = _grid_for(cfg, Z)
    config = _solver_config(cfg)
    scan = ionization_scan(Z, config, grid)
    out = _outdir(cfg)
    stem = f"scan_Z{Z:g}"
    io_mod.write_csv(
        out / f"{stem}.csv",
        ["N", "energy", "mu", "bound"],
        [(n, e, m, str(b).lower()) for n, e, m, b, _ in scan.sweep],
    )
    io_mod.write_json(
        out / f"{stem}.json",
        {
            "Z": Z,
            "N_c": scan.N_c,
            "Q": scan.Q,
            "N_c_mu": scan.N_c_mu,
            "N_c_leak": scan.N_c_leak,
            "conclusive": scan.conclusive,
        },
    )
    print(
        f"scan Z={Z:g}: N_c={_fmt(scan.N_c)} Q={_fmt(scan.Q)} "
        f"(mu-based {_fmt(scan.N_c_mu)}, leak-based {_fmt(scan.N_c_leak)}, "
        f"conclusive={scan.conclusive})"
    )
    return 0


def _cmd_screened(args, cfg):
    Z = args.Z
    N = args.N if args.N is not None else Z
    grid = _grid_for(cfg, Z)
    config = _solver_config(cfg)
    eps = cfg.get("experiment", {}).get("eps_report", (0.1, 0.3, 0.5))
    rep = screened_comparison(Z, N, config, grid, eps_report=tuple(eps))
    out = _outdir(cfg)
    stem = f"screened_Z{Z:g}_N{N:g}"
    io_mod.write_csv(
        out / f"{stem}.csv",
        ["r", "Zr", "phi_onshell", "phi_tf_onshell", "delta"],
        zip(
            rep.radii.tolist(),
            (rep.mueller_on_shell * rep.radii).tolist(),
            rep.mueller_on_shell.tolist(),
            rep.tf_on_shell.tolist(),
            rep.delta_phi.tolist(),
        ),
    )
    io_mod.write_json(
        out / f"{stem}.json",
        {
            "Z": Z,
            "N": N,
            "sup_delta_r4": rep.sup_r4,
            "weighted_sup": {str(k): v for k, v in rep.weighted_sup.items()},
            "mid_window_rel": rep.mid_window_rel,
        },
    )
    print(
        f"screened Z={Z:g} N={N:g}: sup|dPhi| r^4 = {_fmt(rep.sup_r4)} "
        f"mid-window rel = {_fmt(rep.mid_window_rel)}"
    )
    return 0


def _cmd_radius(args, cfg):
    Z = args.Z
    kappas = args.kappa or cfg.get("experiment", {}).get("kappa") or [4.0, 6.0, 10.0]
    grid = _grid_for(cfg, Z)
    config = _solver_config(cfg)
    results = radius_experiment(Z, kappas, config, grid)
    out = _outdir(cfg)
    stem = f"radius_Z{Z:g}"
    io_mod.write_csv(
        out / f"{stem}.csv",
        ["kappa", "R", "b_tf_ratio", "boundary_case"],
        [(r.kappa, r.R, r.b_tf_ratio, str(r.boundary_case).lower()) for r in results],
    )
    io_mod.write_json(
        out / f"{stem}.json",
        {
            "Z": Z,
            "results": [
                {"kappa": r.kappa, "R": r.R, "b_tf_ratio": r.b_tf_ratio}
                for r in results
            ],
        },
    )
    for r in results:
        print(f"radius Z={Z:g} kappa={r.kappa:g}: R={_fmt(r.R)} ratio={_fmt(r.b_tf_ratio)}")
    return 0


def _identity_rows(seed: int, instances: int):
    """IMS + direct-partition identities, exchange localization, Hardy-Schwarz
    and the constant-weight sum rule, as (lemma, instance, lhs, rhs, margin)."""
    from .coulomb import coulomb_bilinear

    rng = np.random.default_rng(seed)
    rows = []
    for t in range(instances):
        dim = int(rng.integers(8, 41))
        T = np.diag(rng.uniform(1.0, 3.0, dim))
        off = -rng.uniform(0.1, 1.0, dim - 1)
        T[np.arange(dim - 1), np.arange(1, dim)] = off
        T[np.arange(1, dim), np.arange(dim - 1)] = off
        gamma = random_psd_contraction(rng, dim)
        fs = random_partition(rng, dim, int(rng.integers(2, 5)))
        lhs, rhs = ims_defect_dense(T, gamma, fs)
        scale = max(1.0, abs(lhs))
        rows.append(("ims-identity", t, lhs, rhs, 1e-12 * scale - abs(lhs - rhs)))
    grid = build_log_grid(1e-4, 60.0, 300)
    for t in range(instances):
        q = np.abs(rng.normal(size=grid.n_points)) * np.exp(
            -0.5 * (np.log(grid.nodes) - rng.uniform(-2, 2)) ** 2
        )
        fs = random_partition(rng, grid.n_points, 3)
        pieces = [f * f * q for f in fs]
        full = 0.5 * coulomb_bilinear(grid, q)
        total = sum(0.5 * coulomb_bilinear(grid, p) for p in pieces)
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                total += coulomb_bilinear(grid, pieces[i], pieces[j])
        scale = max(1.0, abs(full))
        rows.append(
            ("direct-partition-identity", t, total, full, 1e-12 * scale - abs(total - full))
        )
    for t in range(instances):
        dim = int(rng.integers(8, 41))
        pts = np.sort(rng.uniform(0.1, 10.0, dim))
        weight = coulomb_like_weight(pts, 0.2)
        gamma = random_psd_contraction(rng, dim)
        chi = rng.uniform(-1.0, 1.0, dim)
        lhs, rhs = exchange_localization_check(gamma, chi, weight)
        rows.append(("exchange-localization", t, lhs, rhs, rhs - lhs))
    for t in range(max(instances // 2, 1)):
        ens = random_radial_ensemble(grid, rng, ells=(0, 1), per_channel=2)
        r_cut = float(rng.uniform(0.5, 5.0))
        chi = np.clip((grid.nodes - r_cut) / (0.5 * r_cut), 0.0, 1.0)
        lhs, rhs = hardy_schwarz_check(ens, chi)
        rows.append(("hardy-schwarz", t, lhs, rhs, rhs * (1 + 1e-6) - lhs))
    for t in range(3):
        ens = random_radial_ensemble(grid, rng, ells=(0, 1, 2, 3), per_channel=2)
        table = build_exchange_table(ens, weight="constant")
        x_const = exchange_energy(ens, table)
        half_trace = 0.5 * ens.trace
        rows.append(
            (
                "exchange-sum-rule",
                t,
                x_const,
                half_trace,
                1e-8 * max(1.0, half_trace) - abs(x_const - half_trace),
            )
        )
    return rows


def _lemma_rows(seed: int, config: SolverConfig):
    rng = np.random.default_rng(seed)
    rows = []
    Z = 6.0
    grid = default_grid(Z)
    res = minimize_mueller(Z, Z, config, grid)
    ens = res.ensemble
    for i, r in enumerate(np.geomspace(1.0, 8.0, 5)):
        rep = exterior_l1_check(ens, Z, float(r), s=float(r), lam=0.5)
        rows.append(("exterior-l1", i, rep["lhs"], sum(rep["rhs_terms"].values()), rep["best_constant"]))
    for i, r in enumerate(np.geomspace(1.0, 8.0, 5)):
        rep = outside_kinetic_check(ens, Z, float(r), lam=0.5)
        rows.append(("outside-kinetic", i, rep["lhs"], sum(rep["rhs_terms"].values()), rep["best_constant"]))
    for i, r in enumerate([1.5, 3.0]):
        cuts = build_cutoffs(grid, r, 0.5)
        trial = localize_dm(ens, cuts.eta_r)
        rep = split_check(ens, trial, Z, r, 0.5)
        rows.append(
            ("exterior-split", i, rep["lhs"], rep["lhs"] + rep["margin"], rep["margin"])
        )
    for i in range(20):
        f = np.zeros(grid.n_points)
        for _ in range(3):
            c0 = rng.uniform(np.log(grid.r_min * 50), np.log(grid.r_max / 10))
            f += rng.normal() * np.exp(
                -0.5 * ((np.log(grid.nodes) - c0) / rng.uniform(0.3, 1.0)) ** 2
            )
        x = float(rng.uniform(0.05, 5.0))
        try:
            ratio = coulomb_estimate_ratio(grid, f, x)
        except Exception:
            continue
        rows.append(("coulomb-estimate", i, ratio, np.nan, ratio))
    return rows


def _cmd_verify(args, cfg):
    suite = args.suite or cfg.get("experiment", {}).get("suite", "identities")
    seed = cfg.get("seed", 0)
    instances = cfg.get("experiment", {}).get("instances", 200)
    out = _outdir(cfg)
    exit_code = 0
    all_rows = []
    if suite in ("identities", "all"):
        rows = _identity_rows(seed, instances)
        all_rows.extend(rows)
        worst = min(row[4] for row in rows)
        if worst < -1e-10:
            exit_code = 4
        print(f"verify identities: {len(rows)} rows, worst margin {_fmt(worst)}")
    if suite in ("lemmas", "all"):
        rows = _lemma_rows(seed, _solver_config(cfg))
        all_rows.extend(rows)
        consts = [row[4] for row in rows]
        finite = all(np.isfinite(c) for c in consts)
        if not finite:
            exit_code = exit_code or 4
        print(
            f"verify lemmas: {len(rows)} rows, constants in "
            f"[{_fmt(min(consts))}, {_fmt(max(consts))}]"
        )
    io_mod.write_csv(
        out / f"verify_{suite}.csv",
        ["lemma", "instance_id", "lhs", "rhs", "margin"],
        all_rows,
    )
    io_mod.write_json(
        out / f"verify_{suite}.json",
        {
            "suite": suite,
            "rows": len(all_rows),
            "worst_margin": min(row[4] for row in all_rows),
            "violation": exit_code == 4,
        },
    )
    return exit_code


def _cmd_audit(args, cfg):
    Z = args.Z
    N = args.N if args.N is not None else Z
    grid = _grid_for(cfg, Z)
    config = _solver_config(cfg)
    res = minimize_mueller(Z, N, config, grid)
    report = apriori_audit(res, Z, N)
    out = _outdir(cfg)
    io_mod.write_json(out / f"audit_Z{Z:g}.json", report)
    print(
        f"audit Z={Z:g}: kinetic/Z^(7/3)+N={_fmt(report['kinetic_ratio'])} "
        f"X/(Z^(5/3)+1)={_fmt(report['exchange_ratio'])}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muelleratom",
        description="Radial density-matrix and Thomas-Fermi atomic solvers",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="master seed for random suites")
    parser.add_argument("--threads", type=int, help="worker cap for parallel parts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tf = sub.add_parser("tf", help="atomic Thomas-Fermi solve")
    p_tf.add_argument("--Z", type=float, required=True)

    p_m = sub.add_parser("mueller", help="density-matrix minimization")
    p_m.add_argument("--Z", type=float, required=True)
    p_m.add_argument("--N", type=float)

    p_s = sub.add_parser("scan", help="ionization scan over N")
    p_s.add_argument("--Z", type=float, required=True)

    p_sc = sub.add_parser("screened", help="screened-potential comparison")
    p_sc.add_argument("--Z", type=float, required=True)
    p_sc.add_argument("--N", type=float)

    p_r = sub.add_parser("radius", help="outer-radius law")
    p_r.add_argument("--Z", type=float, required=True)
    p_r.add_argument("--kappa", type=float, nargs="+")

    p_v = sub.add_parser("verify", help="identity and inequality suites")
    p_v.add_argument("--suite", choices=["identities", "lemmas", "all"])

    p_a = sub.add_parser("audit", help="a-priori bound ratios")
    p_a.add_argument("--Z", type=float, required=True)
    p_a.add_argument("--N", type=float)
    return parser


_COMMANDS = {
    "tf": _cmd_tf,
    "mueller": _cmd_mueller,
    "scan": _cmd_scan,
    "screened": _cmd_screened,
    "radius": _cmd_radius,
    "verify": _cmd_verify,
    "audit": _cmd_audit,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = _load_config(args.config)
    except Exception as exc:
        print(json.dumps({"error": "config-validation", "detail": str(exc)[:500]}))
        return 2
    if args.out:
        cfg["output_dir"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    try:
        return _COMMANDS[args.command](args, cfg)
    except NoConvergenceError as exc:
        print(json.dumps({"error": "no-convergence", "detail": str(exc)}))
        return 3
    except Exception as exc:
        print(json.dumps({"error": "invalid-input", "detail": str(exc)[:500]}))
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
