"""Command-line front end: one subcommand per workflow, deterministic run
manifests, CSV/JSON emission for external plotting.

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 resource cap.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .basis import build_sector, enumerate_basis, neel_state, sector_table
from .operators import (CouplingSet, ansatz_couplings, build_hamiltonian,
                        solve_constraint, split_pm)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4


def _outdir(args) -> Path:
    d = Path(args.outdir or os.environ.get("PXPSCARS_OUTDIR", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(args, subcommand: str, params: dict, outputs: list[str],
                    t0: float, seed=None) -> Path:
    path = _outdir(args) / f"{args.tag or subcommand}.manifest.json"
    manifest = {
        "subcommand": subcommand,
        "parameters": params,
        "library_version": __version__,
        "seed": seed,
        "wall_time": time.perf_counter() - t0,
        "outputs": outputs,
        "tolerances": {"krylov": getattr(args, "krylov_tol", None),
                       "peak_xtol": getattr(args, "peak_xtol", None)},
    }
    path.write_text(json.dumps(manifest, indent=2))
    return path


def _emit(args, payload: dict):
    if getattr(args, "json", False):
        print(json.dumps(payload))
    else:
        for k, v in payload.items():
            print(f"{k}: {v}")


def _resolve_couplings(source: str, n_sites: int) -> CouplingSet | None:
    """'none' | 'ansatz' | 'h2' (analytic range-4) | path to a JSON file."""
    if source == "none":
        return None
    if source == "ansatz":
        return ansatz_couplings(solve_constraint().h0, n_sites // 2)
    if source == "h2":
        from .operators import optimal_h2_analytic
        return CouplingSet(values=(optimal_h2_analytic(),), provenance="manual")
    return CouplingSet.from_json(Path(source).read_text())


# ---------------------------------------------------------------------------
# subcommands


def cmd_basis(args) -> int:
    t0 = time.perf_counter()
    basis = enumerate_basis(args.n, args.bc)
    payload = basis.summary()
    if args.sectors:
        if args.bc != "periodic":
            raise ValueError("sector table requires a periodic basis")
        payload["translation_step"] = args.step
        payload["sectors"] = sector_table(basis, step=args.step)
    out = _outdir(args) / f"{args.tag or 'basis'}.json"
    out.write_text(json.dumps(payload, indent=2))
    _write_manifest(args, "basis", {"n": args.n, "bc": args.bc}, [str(out)], t0)
    _emit(args, payload)
    return EXIT_OK


def cmd_quench(args) -> int:
    from .dynamics import fidelity_series, revival_scan

    t0 = time.perf_counter()
    if args.dt <= 0:
        raise ValueError("dt must be positive")
    basis = enumerate_basis(args.n, "periodic")
    couplings = _resolve_couplings(args.couplings, args.n)
    h = build_hamiltonian(basis, couplings)
    psi0 = np.zeros(basis.dim, dtype=complex)
    psi0[neel_state(basis)[0]] = 1.0
    record = fidelity_series(h, psi0, args.tmax, args.dt,
                             basis=basis if args.entropy else None,
                             tol=args.krylov_tol)
    tau = solve_constraint().tau
    n_peaks = max(int(args.tmax / tau), 0)
    if n_peaks:
        record.peaks = revival_scan(h, psi0, tau, n_peaks,
                                    xtol=args.peak_xtol, tol=args.krylov_tol)
    outdir = _outdir(args)
    tag = args.tag or f"quench_n{args.n}"
    csv = outdir / f"{tag}.csv"
    record.to_csv(str(csv))
    peaks = outdir / f"{tag}.peaks.json"
    peaks.write_text(record.peaks_json())
    _write_manifest(args, "quench",
                    {"n": args.n, "couplings": args.couplings,
                     "tmax": args.tmax, "dt": args.dt}, [str(csv), str(peaks)], t0)
    first = record.peaks[0] if record.peaks else None
    _emit(args, {"outputs": f"{csv}", "first_peak": first})
    return EXIT_OK


def cmd_fsa(args) -> int:
    from .fsa import (fsa_basis, fsa_error3, project_tridiagonal,
                      ritz_anharmonicity, su2_report, subspace_variance)

    t0 = time.perf_counter()
    basis = enumerate_basis(args.n, "periodic")
    couplings = _resolve_couplings(args.couplings, args.n)
    h = build_hamiltonian(basis, couplings)
    hp, hm = split_pm(basis, couplings)
    sub = fsa_basis(hp, hm, basis)
    _, ritz, _ = project_tridiagonal(sub, h)
    report = su2_report(sub)
    payload = {
        "su2": json.loads(report.to_json()),
        "costs": {
            "fsa": fsa_error3(sub),
            "trvar": subspace_variance(sub, h),
            "rvals": ritz_anharmonicity(ritz),
        },
        "ritz_values": ritz.tolist(),
    }
    out = _outdir(args) / f"{args.tag or f'fsa_n{args.n}'}.json"
    out.write_text(json.dumps(payload, indent=2))
    if args.dump_vectors:
        vec_path = out.with_suffix(".vectors.npy")
        np.save(vec_path, sub.vectors)
        header = out.with_suffix(".vectors.json")
        header.write_text(json.dumps({"n_sites": args.n, "dim": basis.dim,
                                      "layout": "row k = FSA vector k",
                                      "file": vec_path.name}))
    _write_manifest(args, "fsa", {"n": args.n, "couplings": args.couplings},
                    [str(out)], t0)
    _emit(args, {"out": str(out), **payload["costs"]})
    return EXIT_OK


def _parse_sector(label: str):
    """'k0' / 'k0,I+' / 'k3,I-' -> (momentum, inversion)."""
    parts = label.split(",")
    k = int(parts[0].lstrip("k"))
    inv = None
    if len(parts) > 1:
        inv = {"I+": 1, "I-": -1}[parts[1]]
    return k, inv


def cmd_spectrum(args) -> int:
    from .spectral import diagonalize_sector, eigenstate_entropies, r_statistic

    t0 = time.perf_counter()
    basis = enumerate_basis(args.n, "periodic")
    couplings = _resolve_couplings(args.couplings, args.n)
    h = build_hamiltonian(basis, couplings)
    k, inv = _parse_sector(args.sector)
    sector = build_sector(basis, k, inversion=inv, step=args.step)
    record = diagonalize_sector(h, sector, dense_cap=args.dense_cap)
    if args.entropies:
        eigenstate_entropies(record, basis)
    outdir = _outdir(args)
    tag = args.tag or f"spectrum_n{args.n}_{sector.label()}"
    csv = outdir / f"{tag}.csv"
    record.to_csv(str(csv))
    outputs = [str(csv)]
    payload = {"sector": sector.summary(), "csv": str(csv)}
    try:
        stats = r_statistic(record.energies, discard_fraction=args.discard,
                            unfold_degree=args.unfold_degree)
        stats_path = outdir / f"{tag}.levelstats.json"
        stats_path.write_text(stats.to_json())
        hist_path = outdir / f"{tag}.pshist.csv"
        stats.histogram_csv(str(hist_path))
        outputs += [str(stats_path), str(hist_path)]
        payload["r_mean"] = stats.r_mean
    except Exception as exc:
        payload["level_stats"] = f"skipped: {exc}"
    _write_manifest(args, "spectrum",
                    {"n": args.n, "sector": args.sector, "step": args.step,
                     "couplings": args.couplings}, outputs, t0)
    _emit(args, payload)
    return EXIT_OK


def cmd_optimize(args) -> int:
    from .optimize import CostSpec, make_cost, nelder_mead

    t0 = time.perf_counter()
    spec = CostSpec(kind=args.cost, n_sites=args.n, range_=args.range,
                    krylov_tol=args.krylov_tol, peak_xtol=args.peak_xtol)
    init = ansatz_couplings(solve_constraint().h0, args.range).as_array()
    trace = nelder_mead(make_cost(spec), init, max_iterations=args.maxiter,
                        seed=args.seed)
    best = CouplingSet(values=tuple(trace.best_x), provenance="optimized")
    outdir = _outdir(args)
    tag = args.tag or f"optimize_{args.cost}_n{args.n}_r{args.range}"
    trace_path = outdir / f"{tag}.trace.json"
    trace_path.write_text(trace.to_json())
    coup_path = outdir / f"{tag}.couplings.json"
    coup_path.write_text(best.to_json())
    if np.any(trace.best_x < 0):
        bound_path = outdir / f"{tag}.bound_violation.json"
        bound_path.write_text(json.dumps(
            {"negative_indices": np.nonzero(trace.best_x < 0)[0].tolist()}))
    _write_manifest(args, "optimize",
                    {"cost": args.cost, "n": args.n, "range": args.range,
                     "maxiter": args.maxiter},
                    [str(trace_path), str(coup_path)], t0, seed=args.seed)
    _emit(args, {"best_cost": trace.best_cost, "converged": trace.converged,
                 "couplings": trace.best_x.tolist()})
    return EXIT_OK


def cmd_toy(args) -> int:
    from .toymodel import ToySpec, toy_diagnostics

    t0 = time.perf_counter()
    spec = ToySpec(n_sites=args.n, omega=args.omega, seed=args.seed)
    diag = toy_diagnostics(spec, t_max=args.tmax)
    outdir = _outdir(args)
    tag = args.tag or f"toy_n{args.n}_s{args.seed}"
    csv = outdir / f"{tag}.csv"
    diag.to_csv(str(csv))
    summary = {
        "spec": json.loads(spec.to_json()),
        "tower_residual_max": float(diag.tower_residuals.max()),
        "bulk_r_mean": diag.bulk_stats.r_mean if diag.bulk_stats else None,
    }
    js = outdir / f"{tag}.json"
    js.write_text(json.dumps(summary, indent=2))
    _write_manifest(args, "toy", {"n": args.n, "omega": args.omega},
                    [str(csv), str(js)], t0, seed=args.seed)
    _emit(args, {"tower_residual_max": summary["tower_residual_max"],
                 "out": str(csv)})
    return EXIT_OK


def cmd_scaling(args) -> int:
    from .dynamics import revival_scan, scaling_analysis

    t0 = time.perf_counter()
    consts = solve_constraint()
    peaks = {}
    for n in args.sizes:
        basis = enumerate_basis(n, "periodic")
        couplings = _resolve_couplings(args.couplings, n)
        h = build_hamiltonian(basis, couplings)
        psi0 = np.zeros(basis.dim, dtype=complex)
        psi0[neel_state(basis)[0]] = 1.0
        peaks[n] = revival_scan(h, psi0, consts.tau, args.mmax,
                                xtol=args.peak_xtol, tol=args.krylov_tol)
    report = scaling_analysis(
        peaks, short_window=tuple(args.short_window),
        long_window=tuple(args.long_window))
    out = _outdir(args) / f"{args.tag or 'scaling'}.json"
    out.write_text(report.to_json())
    _write_manifest(args, "scaling",
                    {"sizes": args.sizes, "mmax": args.mmax,
                     "couplings": args.couplings}, [str(out)], t0)
    _emit(args, {"m_c": report.m_c, "out": str(out)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p):
    p.add_argument("--outdir", default=None, help="output directory "
                   "(default: $PXPSCARS_OUTDIR or cwd)")
    p.add_argument("--tag", default=None, help="output file name stem")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.add_argument("--config", default=None, help="key=value config file with "
                   "one section per subcommand; flags override it")
    p.add_argument("--threads", type=int, default=None,
                   help="BLAS thread-pool size (default: all cores)")
    p.add_argument("--krylov-tol", type=float, default=1e-10)
    p.add_argument("--peak-xtol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pxpscars",
        description="Exact numerics for deformed constrained chains with "
                    "quantum many-body scars.")
    ap.add_argument("--version", action="version", version=__version__)
    subs = ap.add_subparsers(dest="command", required=True)

    p = subs.add_parser("basis", help="enumerate the constrained basis")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bc", choices=["periodic", "open"], default="periodic")
    p.add_argument("--sectors", action="store_true")
    p.add_argument("--step", type=int, choices=[1, 2], default=2)
    _add_common(p)
    p.set_defaults(func=cmd_basis)

    p = subs.add_parser("quench", help="Neel-state quench: fidelity/entropy series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--couplings", default="ansatz",
                   help="none | ansatz | h2 | JSON file")
    p.add_argument("--tmax", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--entropy", action=argparse.BooleanOptionalAction, default=True)
    _add_common(p)
    p.set_defaults(func=cmd_quench)

    p = subs.add_parser("fsa", help="forward-scattering subspace diagnostics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--couplings", default="ansatz")
    p.add_argument("--dump-vectors", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_fsa)

    p = subs.add_parser("spectrum", help="dense sector diagonalization")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sector", default="k0,I+", help="e.g. k0 | k0,I+ | k3")
    p.add_argument("--step", type=int, choices=[1, 2], default=1)
    p.add_argument("--couplings", default="ansatz")
    p.add_argument("--entropies", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--dense-cap", type=int, default=20000)
    p.add_argument("--discard", type=float, default=0.1)
    p.add_argument("--unfold-degree", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("optimize", help="derivative-free coupling optimization")
    p.add_argument("--cost", choices=["fid", "fsa", "trvar", "rvals"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--range", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--maxiter", type=int, default=2000)
    _add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = subs.add_parser("toy", help="embedded-tower toy model diagnostics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=10.0)
    _add_common(p)
    p.set_defaults(func=cmd_toy)

    p = subs.add_parser("scaling", help="late-time infidelity scaling study")
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")],
                   default=[16, 20, 24])
    p.add_argument("--mmax", type=int, default=200)
    p.add_argument("--couplings", default="ansatz")
    p.add_argument("--short-window", type=lambda s: [int(x) for x in s.split(",")],
                   default=[5, 60])
    p.add_argument("--long-window", type=lambda s: [int(x) for x in s.split(",")],
                   default=[200, 1000])
    _add_common(p)
    p.set_defaults(func=cmd_scaling)
    return ap


def _apply_config(args):
    """Config file sections named after subcommands; values become defaults
    for flags the user did not set on the command line (simple key=value)."""
    if not args.config:
        return
    cp = configparser.ConfigParser()
    cp.read(args.config)
    if not cp.has_section(args.command):
        return
    for key, value in cp.items(args.command):
        attr = key.replace("-", "_")
        if hasattr(args, attr) and f"--{key}" not in sys.argv:
            current = getattr(args, attr)
            cast = type(current) if current is not None else str
            if cast is bool:
                value = value.lower() in ("1", "true", "yes")
            elif cast is list:
                value = [int(x) for x in value.split(",")]
            else:
                value = cast(value)
            setattr(args, attr, value)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _apply_config(args)
        if args.threads:
            try:
                import threadpoolctl
                threadpoolctl.threadpool_limits(args.threads)
            except ImportError:
                pass
        return args.func(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except Exception as exc:
        from .spectral import SectorTooLargeError
        if isinstance(exc, SectorTooLargeError):
            print(f"resource cap: {exc}", file=sys.stderr)
            return EXIT_RESOURCE
        if isinstance(exc, (ArithmeticError, RuntimeError)):
            # includes window/coverage and chain-degeneracy failures
            print(f"numeric failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        raise


if __name__ == "__main__":
    sys.exit(main())
