"""Command-line interface: ``multipath <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 model or validation error,
3 numerical-regime error (CFL breach, region boundary, no steady state).
Errors are reported on stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .flux import FluxModel
from .junction import (
    MergeBoundary,
    RegionBoundaryError,
    classify_region,
    stability_eigenvalues,
    stationary_merge,
)
from .fileio import load_network, snapshot_records, write_snapshots_csv
from .riemann import ConstructionError, UnsupportedWaveError, solve_modified_merge
from .scheme import (
    AdmissibilityError,
    CFLError,
    SchemeConfig,
    Snapshot,
    initial_state,
    max_stable_dt,
    run,
    run_to_steady,
)

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalRegimeError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flux_opts(p):
    p.add_argument("--rho-max", type=float, default=1.0, help="maximal density (default 1)")
    p.add_argument("--scale", type=float, default=1.0, help="quadratic flux scale (default 1)")


def _model(args) -> FluxModel:
    return FluxModel.quadratic(args.rho_max, args.scale)


def _merge_boundary(args) -> MergeBoundary:
    if args.beta is None:
        if args.beta1 is None or args.beta2 is None:
            raise UsageError("give --beta or both --beta1 and --beta2")
        return MergeBoundary.from_components(args.ul, args.vl, args.beta1, args.beta2)
    return MergeBoundary(args.ul, args.vl, args.beta)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="multipath", description="Multi-path traffic flow on road networks.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run the scheme to a final time and write snapshots")
    p.add_argument("file")
    p.add_argument("--t-final", type=float, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--dt", type=float)
    g.add_argument("--cfl-safety", type=float, default=0.9)
    p.add_argument("--snapshots", type=int, default=1,
                   help="number of equally spaced snapshots after t=0 (the initial state is always written)")
    p.add_argument("--out", default="-", help="CSV destination (default stdout)")

    p = sub.add_parser("steady", help="iterate to a steady state and write the final profile")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-steps", type=int, default=1_000_000)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--dt", type=float)
    g.add_argument("--cfl-safety", type=float, default=1.0)
    p.add_argument("--out", default="-")

    for name, helptext in (("stationary", "stationary merge state"), ("classify", "merge region label")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--ul", type=float, required=True)
        p.add_argument("--vl", type=float, required=True)
        p.add_argument("--beta", type=float)
        p.add_argument("--beta1", type=float)
        p.add_argument("--beta2", type=float)
        _flux_opts(p)
        if name == "stationary":
            p.add_argument("--lam", type=float, default=0.5, help="dt/dx for the eigenvalues")

    p = sub.add_parser("riemann", help="wave log of the modified merge problem")
    p.add_argument("--ul", type=float, required=True)
    p.add_argument("--vl", type=float, required=True)
    p.add_argument("--wr", type=float, required=True)
    p.add_argument("--dx", type=float, default=1.0, help="junction cell width")
    _flux_opts(p)
    p.add_argument("--out", default="-")

    p = sub.add_parser("check-cfl", help="report junction CFL limits for a network file")
    p.add_argument("file")
    p.add_argument("--dt", type=float)
    return ap


# -- subcommands ---------------------------------------------------------------


def _snapshot_csv(grid, snapshots, out):
    write_snapshots_csv(snapshot_records(grid, snapshots), sys.stdout if out == "-" else out)


def cmd_simulate(args) -> int:
    if args.snapshots < 1:
        raise UsageError("--snapshots must be at least 1")
    doc = load_network(args.file)
    grid = doc.grid()
    cfg = SchemeConfig(t_final=args.t_final, dt=args.dt, cfl_safety=args.cfl_safety)
    times = [args.t_final * k / args.snapshots for k in range(1, args.snapshots + 1)]
    traj = run(initial_state(grid, doc.field(grid)), grid, doc.flux, cfg, times)
    _snapshot_csv(grid, traj.snapshots, args.out)
    return EXIT_OK


def cmd_steady(args) -> int:
    doc = load_network(args.file)
    grid = doc.grid()
    cfg = SchemeConfig(dt=args.dt, cfl_safety=args.cfl_safety,
                       steady_tolerance=args.tol, max_steps=args.max_steps)
    res = run_to_steady(initial_state(grid, doc.field(grid)), grid, doc.flux, cfg)
    snap = Snapshot(res.state.t, res.state.n, res.state.field)
    _snapshot_csv(grid, [snap], args.out)
    if not res.converged:
        raise NumericalRegimeError(
            f"no steady state after {res.steps} steps (last change {res.last_change:.3g})"
        )
    return EXIT_OK


def cmd_stationary(args) -> int:
    model = _model(args)
    sol = stationary_merge(model, _merge_boundary(args))
    eig = stability_eigenvalues(model, sol, args.lam)
    print(f"region: {sol.region.value}")
    print("triplet: " + " ".join(f"{v:.12g}" for v in sol.triplet))
    print(f"split: {sol.mu1_J:.12g} {sol.mu2_J:.12g}")
    print(f"eigenvalues(lam={args.lam:g}): " + " ".join(f"{v:.12g}" for v in eig))
    return EXIT_OK


def cmd_classify(args) -> int:
    print(classify_region(_model(args), _merge_boundary(args)).value)
    return EXIT_OK


def cmd_riemann(args) -> int:
    sol = solve_modified_merge(_model(args), args.ul, args.vl, args.wr, args.dx)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stage", "label", "event", "x0", "t0", "kind", "sign", "speed_left", "speed_right",
                    "left_shift", "left", "right_shift", "right"])
        for lw in sol.waves:
            wv = lw.wave
            lo, hi = wv.speeds if wv.speeds else (wv.speed, wv.speed)
            w.writerow([lw.stage, lw.label, lw.event] + [f"{v:.12g}" for v in (lw.x0, lw.t0)]
                       + [wv.kind.value, wv.sign.value]
                       + [f"{v:.12g}" for v in (lo, hi, wv.left_flux.shift, wv.left, wv.right_flux.shift, wv.right)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    out = sys.stderr if args.out == "-" else sys.stdout
    print(f"region: {sol.region.value}", file=out)
    print("quadruplet: " + " ".join(f"{v:.12g}" for v in sol.quadruplet), file=out)
    return EXIT_OK


def cmd_check_cfl(args) -> int:
    doc = load_network(args.file)
    grid = doc.grid()
    for node in sorted(grid.r_inc):
        print(f"r_inc[{node}]: {grid.r_inc[node]}")
    limit = max_stable_dt(grid, doc.flux)
    print(f"max_stable_dt: {limit:.12g}")
    if args.dt is None:
        return EXIT_OK
    ok = args.dt <= limit * (1 + 1e-12)
    print(f"dt {args.dt:.12g}: {'PASS' if ok else 'FAIL'}")
    if not ok:
        raise NumericalRegimeError(f"dt={args.dt:g} exceeds the junction CFL limit {limit:.6g}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "stationary": cmd_stationary,
    "classify": cmd_classify,
    "riemann": cmd_riemann,
    "check-cfl": cmd_check_cfl,
}

_NUMERIC = (RegionBoundaryError, AdmissibilityError, CFLError, NumericalRegimeError,
            UnsupportedWaveError, ConstructionError)


def _report(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "exit": code, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return _report(EXIT_USAGE, e)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        return _report(EXIT_USAGE, e)
    except _NUMERIC as e:
        return _report(EXIT_NUMERIC, e)
    except (ValueError, OSError, KeyError) as e:
        return _report(EXIT_MODEL, e)


if __name__ == "__main__":
    sys.exit(main())
