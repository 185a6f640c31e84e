"""Command-line interface: every sweep and scan as a subcommand.

Each run writes one CSV (or JSON) file whose leading ``#`` lines record
the tool version, preset and full parameter set, so downstream plot
scripts are self-describing. Exit codes: 0 success, 2 configuration
error, 3 numerical failure (error class name on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .core import BrillouinPath, ComplexQuasimomentum
from .chain1d import ChainGeometry1D, band_sweep_1d, beta_admissible_interval, dimer_gap_branches
from .errors import NumericsError
from .lattice2d import DualTruncation, Lattice2D, truncation_convergence
from .multipole2d import CircularResonator
from .bands2d import SweepConfig, gap_sweep_2d, singularity_scan
from .ssh1d import DefectedChain, decay_envelope_check, interface_eigenpair, interface_frequency_limit
from .transfer1d import general_band_sweep

#: kind codes used in band2d tables (CSV stays numeric).
KIND_CODES = {"bulk": 0, "gap": 1, "zero": 2}

PRESETS = {
    "fig2a": {
        "command": "band1d",
        "params": {
            "lengths": [1.0], "spacings": [0.6], "delta": 0.1,
            "alpha_samples": 201, "gap_pin": "edge", "gap_beta_span": 2.0,
            "gap_samples": 201, "extra_center_segment": False,
        },
    },
    "fig2b": {
        "command": "band1d",
        "params": {
            "lengths": [1.0, 1.0], "spacings": [0.8, 2.0], "delta": 0.1,
            "alpha_samples": 201, "gap_pin": "edge", "gap_beta_span": None,
            "gap_samples": 161, "extra_center_segment": True,
            "center_beta_span": 2.0, "center_samples": 161,
        },
    },
    "fig5bands": {
        "command": "band1d",
        "params": {
            "lengths": [1.0, 1.0], "spacings": [1.0, 2.0], "delta": 0.001,
            "alpha_samples": 201, "gap_pin": "edge", "gap_beta_span": None,
            "gap_samples": 161, "extra_center_segment": True,
            "center_beta_span": 2.0, "center_samples": 161,
        },
    },
    "fig3a": {
        "command": "transfer",
        "params": {"a": 0.2, "n": 1.8, "b": 0.5, "delta": 1.0, "k_max": 9.0, "k_samples": 1500},
    },
    "fig3b": {
        "command": "transfer",
        "params": {"a": 0.2, "n": 1.8, "b": 0.5, "delta": 0.05, "k_max": 9.0, "k_samples": 1500},
    },
    "fig5": {
        "command": "ssh",
        "params": {"resonators": 41, "s1": 1.0, "s2": 2.0, "delta": 0.001, "margin": 3},
    },
    "fig6": {
        "command": "band2d",
        "params": {
            "radius": 0.05, "centers": [[0.5, 0.5]], "cell": 1.0,
            "delta": 1e-3, "delta_assumed": True, "beta_dir": [1.0, 1.0],
            "samples_per_segment": 16, "K": 5, "trunc": 10,
            "t_max": 13.5, "omega_cap": 1.2, "scan_points": 160,
            "omega_resolution": 0.012, "max_refinements": 120,
        },
    },
    "fig7": {
        "command": "band2d",
        "params": {
            "radius": 0.05, "centers": [[0.5, 0.5]], "cell": 1.0,
            "delta": 1e-3, "delta_assumed": True, "beta_dir": [1.0, 0.0],
            "samples_per_segment": 16, "K": 5, "trunc": 10,
            "t_max": 13.5, "omega_cap": 1.2, "scan_points": 160,
            "omega_resolution": 0.012, "max_refinements": 120,
        },
    },
    "fig8": {
        "command": "band2d",
        "params": {
            "radius": 0.05, "centers": [[0.25, 0.5], [0.6, 0.5]], "cell": 1.0,
            "delta": 1e-3, "delta_assumed": True, "beta_dir": [1.0, 1.0],
            "samples_per_segment": 12, "K": 5, "trunc": 10,
            "t_max": 13.5, "omega_cap": 1.0, "scan_points": 120,
            "omega_resolution": 0.01, "max_refinements": 80,
        },
    },
    "fig7dilute": {
        "command": "scan2d",
        "params": {
            "radius": 0.005, "center": [0.5, 0.5], "cell": 1.0,
            "alpha": "M", "beta_dir": [1.0, 1.0],
            "t_min": 0.05, "t_max": 15.0, "t_samples": 300, "K": 5, "trunc": 10,
        },
    },
}


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return json.dumps(np.asarray(value).tolist())
    return str(value)


def write_csv(path: str, metadata: dict, header, rows) -> None:
    lines = [f"# {key}={_format_value(value)}" for key, value in metadata.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format_value(x) for x in row))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _metadata(args, params: dict) -> dict:
    meta = {"tool": "subwavebands", "version": __version__, "command": args.command}
    meta["preset"] = args.preset or ""
    for key, value in params.items():
        meta[key] = value
    return meta


def _positive(parser, name: str, value: float) -> float:
    if value is None or value <= 0:
        parser.error(f"--{name} must be positive")
    return value


# ---------------------------------------------------------------- band1d


def _run_band1d(args, parser) -> int:
    params = dict(PRESETS[args.preset]["params"]) if args.preset else {}
    if not params:
        if args.s1 is None:
            parser.error("--s1 is required without a preset")
        _positive(parser, "s1", args.s1)
        spacings = [args.s1]
        if args.s2 is not None:
            _positive(parser, "s2", args.s2)
            spacings.append(args.s2)
        params = {
            "lengths": [args.length] * len(spacings), "spacings": spacings,
            "delta": args.delta, "alpha_samples": args.alpha_samples,
            "gap_pin": "edge", "gap_beta_span": None, "gap_samples": args.gap_samples,
            "extra_center_segment": len(spacings) == 2,
            "center_beta_span": 2.0, "center_samples": args.gap_samples,
        }
    _positive(parser, "delta", params["delta"])
    geom = ChainGeometry1D(tuple(params["lengths"]), tuple(params["spacings"]))
    L = geom.cell_length
    alpha_grid = np.linspace(-math.pi / L, math.pi / L, params["alpha_samples"])
    segments = []
    span = params.get("gap_beta_span")
    if span is None:
        if geom.n_resonators == 2:
            s1, s2 = geom.spacings
            span = beta_admissible_interval(s1, s2, L)[1] * L
        else:
            span = 2.0
    segments.append((math.pi / L, np.linspace(-span / L, span / L, params["gap_samples"])))
    if params.get("extra_center_segment"):
        c_span = params.get("center_beta_span", 2.0)
        segments.append((0.0, np.linspace(-c_span / L, c_span / L, params.get("center_samples", 161))))
    result = band_sweep_1d(geom, params["delta"], alpha_grid=alpha_grid, gap_segments=segments)
    meta = _metadata(args, {
        "lengths": params["lengths"], "spacings": params["spacings"],
        "delta": params["delta"], "cell_length": L, "omitted_rows": result.omitted,
    })
    rows = [(r.alpha, r.beta, r.branch, r.omega) for r in result.rows]
    if args.format == "json":
        write_json(args.out, {"config": meta, "results": [r._asdict() if hasattr(r, "_asdict") else
                                                          {"alpha": r[0], "beta": r[1], "branch": r[2], "omega": r[3]}
                                                          for r in rows], "diagnostics": {"omitted": result.omitted}})
    else:
        write_csv(args.out, meta, ["alpha", "beta", "branch", "omega"], rows)
    return 0


# ---------------------------------------------------------------- gap1d


def _run_gap1d(args, parser) -> int:
    for name in ("s1", "s2", "delta"):
        _positive(parser, name, getattr(args, name))
    L = 2.0 * args.length + args.s1 + args.s2
    beta_max = beta_admissible_interval(args.s1, args.s2, L)[1]
    rows = []
    omitted = 0
    for branch in (1, 2):
        for beta in np.linspace(-beta_max, beta_max, args.gap_samples):
            rows.append((math.pi / L, beta, branch,
                         dimer_gap_branches(args.s1, args.s2, L, args.delta, branch, beta)))
    for beta in np.linspace(-args.beta_span / L, args.beta_span / L, args.gap_samples):
        rows.append((0.0, beta, 3, dimer_gap_branches(args.s1, args.s2, L, args.delta, 3, beta)))
    rows.append((0.0, 0.0, 4, dimer_gap_branches(args.s1, args.s2, L, args.delta, 4, 0.0)))
    meta = _metadata(args, {
        "s1": args.s1, "s2": args.s2, "delta": args.delta, "cell_length": L,
        "beta_max": beta_max, "omitted_rows": omitted,
    })
    write_csv(args.out, meta, ["alpha", "beta", "branch", "omega"], rows)
    return 0


# ---------------------------------------------------------------- transfer


def _run_transfer(args, parser) -> int:
    params = dict(PRESETS[args.preset]["params"]) if args.preset else {
        "a": args.a, "n": args.n, "b": args.b, "delta": args.delta,
        "k_max": args.k_max, "k_samples": args.k_samples,
    }
    for name in ("a", "n", "b", "delta", "k_max"):
        _positive(parser, name, params[name])
    L = 2.0 * params["a"] + 2.0 * params["b"]
    k_grid = np.linspace(params["k_max"] / params["k_samples"], params["k_max"], params["k_samples"])
    rows = general_band_sweep(k_grid, params["a"], params["n"], params["delta"], L)
    meta = _metadata(args, {**params, "cell_length": L})
    write_csv(
        args.out, meta, ["k", "branch", "alpha", "beta", "in_gap"],
        [(r.k, r.branch, r.alpha, r.beta, int(r.in_gap)) for r in rows],
    )
    return 0


# ---------------------------------------------------------------- ssh


def _run_ssh(args, parser) -> int:
    params = dict(PRESETS[args.preset]["params"]) if args.preset else {
        "resonators": args.resonators, "s1": args.s1, "s2": args.s2,
        "delta": args.delta, "margin": args.margin,
    }
    for name in ("s1", "s2", "delta"):
        _positive(parser, name, params[name])
    chain = DefectedChain.from_resonator_count(
        params["resonators"], params["s1"], params["s2"], delta=params["delta"]
    )
    mode = interface_eigenpair(chain, fit_margin=params["margin"])
    report = decay_envelope_check(chain, mode.mode, mode.predicted_beta,
                                  margin=min(params["margin"], (chain.m - 2) // 2))
    limit = interface_frequency_limit(params["s1"], params["s2"], params["delta"])
    results = {
        "omega": mode.omega,
        "eigenvalue": mode.eigenvalue,
        "omega_limit": limit,
        "gap_interval": list(mode.gap_interval),
        "predicted_beta": mode.predicted_beta,
        "beta_L": mode.predicted_beta * chain.cell_length,
        "fitted_beta": mode.fitted_beta,
        "left_slope": report.left_slope,
        "right_slope": report.right_slope,
        "envelope_scale": report.envelope_scale,
        "max_violation": report.max_violation,
    }
    meta = _metadata(args, {**params, "cell_length": chain.cell_length, **results})
    if args.format == "json":
        payload = {
            "config": _metadata(args, params),
            "results": {**results, "mode": mode.mode.tolist()},
            "diagnostics": {"n_resonators": chain.n_resonators, "interface_index": chain.interface_index},
        }
        write_json(args.out, payload)
        return 0
    center = abs(mode.mode[chain.interface_index])
    rows = []
    for i, amplitude in enumerate(mode.mode):
        cell = chain.cell_of_resonator(i)
        envelope = center * math.exp(-results["beta_L"] * abs(cell))
        rows.append((i, cell, amplitude, envelope))
    write_csv(args.out, meta, ["resonator", "cell", "amplitude", "envelope"], rows)
    return 0


# ---------------------------------------------------------------- greens-convergence


def _run_greens(args, parser) -> int:
    if args.k < 0:
        parser.error("--k must be nonnegative")
    if args.n_ref <= max(args.n_list):
        parser.error("--n-ref must exceed every --n-list entry")
    lat = Lattice2D.square(args.cell)
    q = ComplexQuasimomentum(np.array(args.alpha), np.array(args.beta))
    table, order = truncation_convergence(np.array(args.x), q, args.k, lat, args.n_list, args.n_ref)
    meta = _metadata(args, {
        "alpha": args.alpha, "beta": args.beta, "k": args.k, "x": args.x,
        "cell": args.cell, "n_ref": args.n_ref, "fitted_order": order,
    })
    write_csv(args.out, meta, ["n", "error"], table)
    return 0


# ---------------------------------------------------------------- band2d


def _run_band2d(args, parser) -> int:
    if not args.preset:
        parser.error("band2d requires --preset (fig6, fig7 or fig8)")
    params = dict(PRESETS[args.preset]["params"])
    lat = Lattice2D.square(params["cell"])
    resonators = [CircularResonator(np.array(c), params["radius"]) for c in params["centers"]]
    pi = math.pi / params["cell"]
    path = BrillouinPath(
        (("G", [0.0, 0.0]), ("M", [pi, pi]), ("X", [pi, 0.0]), ("G", [0.0, 0.0])),
        samples_per_segment=params["samples_per_segment"],
    )
    beta_dir = np.array(params["beta_dir"], dtype=float)
    beta_dir = beta_dir / np.linalg.norm(beta_dir)
    sweep_cfg = SweepConfig(
        scan_points=params["scan_points"], t_max=params["t_max"],
        omega_cap=params["omega_cap"], omega_resolution=params["omega_resolution"],
        max_refinements=params["max_refinements"],
    )
    result = gap_sweep_2d(
        resonators, lat, path, beta_dir, params["delta"],
        K=params["K"], trunc=DualTruncation(params["trunc"]), sweep_cfg=sweep_cfg,
        threads=args.threads,
    )
    branch_of = {}
    for branch in result.branches:
        for s in branch.samples:
            branch_of[id(s)] = branch.branch_id
    rows = [
        (KIND_CODES[s.kind], s.band, branch_of.get(id(s), -1), s.alpha[0], s.alpha[1],
         s.path_pos, s.t, s.omega)
        for s in result.samples
    ]
    _, coords, ticks = path.sample()
    meta = _metadata(args, {
        **{k: v for k, v in params.items() if k != "centers"},
        "centers": params["centers"],
        "assumed": "delta" if params.get("delta_assumed") else "",
        "n_failures": len(result.failures),
        "ticks": json.dumps([[float(coords[i]), label] for i, label in ticks]),
    })
    write_csv(
        args.out, meta,
        ["kind", "band", "branch", "alpha_x", "alpha_y", "path_pos", "beta", "omega"],
        rows,
    )
    return 0


# ---------------------------------------------------------------- scan2d


def _run_scan2d(args, parser) -> int:
    params = dict(PRESETS[args.preset]["params"]) if args.preset else {
        "radius": args.radius, "center": [0.5, 0.5], "cell": args.cell,
        "alpha": "M", "beta_dir": list(args.beta_dir),
        "t_min": args.t_min, "t_max": args.t_max, "t_samples": args.t_samples,
        "K": args.K, "trunc": args.trunc,
    }
    _positive(parser, "radius", params["radius"])
    lat = Lattice2D.square(params["cell"])
    resonators = [CircularResonator(np.array(params["center"]), params["radius"])]
    pi = math.pi / params["cell"]
    alpha = np.array([pi, pi]) if params["alpha"] == "M" else np.array(params["alpha"], dtype=float)
    beta_dir = np.array(params["beta_dir"], dtype=float)
    beta_dir = beta_dir / np.linalg.norm(beta_dir)
    t_grid = np.linspace(params["t_min"], params["t_max"], params["t_samples"])
    result = singularity_scan(
        resonators, lat, alpha, beta_dir, t_grid,
        K=params["K"], trunc=DualTruncation(params["trunc"]),
    )
    meta = _metadata(args, {
        **params,
        "predictions": result.predictions,
        "flagged": json.dumps([
            {"t": h.t, "kind": h.kind, "signal": h.signal,
             "nearest_prediction": h.nearest_prediction, "distance": h.distance}
            for h in result.flagged
        ]),
    })
    rows = list(zip(result.ts, result.condition_raw, result.condition_equilibrated,
                    result.lambda_max_abs))
    write_csv(args.out, meta, ["t", "cond_raw", "cond_equilibrated", "lambda_max_abs"], rows)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subwavebands",
        description="Band structures of subwavelength resonator crystals",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--preset", choices=sorted(PRESETS), default=None)
        p.add_argument("--out", default=default_out)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("band1d", help="1D bulk bands and gap branches (capacitance route)")
    common(p, "band1d.csv")
    p.add_argument("--s1", type=float)
    p.add_argument("--s2", type=float)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--alpha-samples", type=int, default=201)
    p.add_argument("--gap-samples", type=int, default=161)

    p = sub.add_parser("gap1d", help="closed-form dimer gap branches")
    common(p, "gap1d.csv")
    p.add_argument("--s1", type=float, required=False, default=0.8)
    p.add_argument("--s2", type=float, default=2.0)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--beta-span", type=float, default=2.0, help="beta*L half-range for the center pin")
    p.add_argument("--gap-samples", type=int, default=161)

    p = sub.add_parser("transfer", help="general-frequency transfer-matrix sweep")
    common(p, "transfer.csv")
    p.add_argument("--a", type=float, default=0.2, help="resonator half-length")
    p.add_argument("--n", type=float, default=1.8, help="index ratio (interior wavenumber n*k)")
    p.add_argument("--b", type=float, default=0.5, help="half-spacing; cell length L = 2a + 2b")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--k-max", type=float, default=9.0)
    p.add_argument("--k-samples", type=int, default=1500)

    p = sub.add_parser("ssh", help="defected-chain interface mode and decay report")
    common(p, "ssh.json")
    p.set_defaults(format="json")
    p.add_argument("--resonators", type=int, default=41)
    p.add_argument("--s1", type=float, default=1.0)
    p.add_argument("--s2", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=0.001)
    p.add_argument("--margin", type=int, default=3)

    p = sub.add_parser("greens-convergence", help="lattice-sum truncation error fit")
    common(p, "greens-convergence.csv")
    p.add_argument("--alpha", type=float, nargs=2, default=[1.0, 0.5])
    p.add_argument("--beta", type=float, nargs=2, default=[0.4, 0.3])
    p.add_argument("--k", type=float, default=0.7)
    p.add_argument("--x", type=float, nargs=2, default=[0.123, 0.456])
    p.add_argument("--cell", type=float, default=1.0)
    p.add_argument("--n-list", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64])
    p.add_argument("--n-ref", type=int, default=512)

    p = sub.add_parser("band2d", help="2D complex band sweep along GMXG")
    common(p, "band2d.csv")

    p = sub.add_parser("scan2d", help="capacitance singularity scan along a decay axis")
    common(p, "scan2d.csv")
    p.add_argument("--radius", type=float, default=0.005)
    p.add_argument("--cell", type=float, default=1.0)
    p.add_argument("--beta-dir", type=float, nargs=2, default=[1.0, 1.0])
    p.add_argument("--t-min", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=15.0)
    p.add_argument("--t-samples", type=int, default=300)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--trunc", type=int, default=10)

    return parser


RUNNERS = {
    "band1d": _run_band1d,
    "gap1d": _run_gap1d,
    "transfer": _run_transfer,
    "ssh": _run_ssh,
    "greens-convergence": _run_greens,
    "band2d": _run_band2d,
    "scan2d": _run_scan2d,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.preset and PRESETS[args.preset]["command"] != args.command:
        parser.error(f"preset {args.preset} belongs to subcommand {PRESETS[args.preset]['command']}")
    try:
        return RUNNERS[args.command](args, parser)
    except NumericsError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
