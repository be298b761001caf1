"""Command-line interface: ``fjsignal {solve,eval,oracle,report,gen-hardness}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from . import hardness, optimizer, oracle, serialization
from .errors import FJError, InputError, PreconditionError, ValidationError, WrongStateCount
from .model import FJInstance, fdg_instance, is_fdg, validate
from .objectives import expected_value

log = logging.getLogger("fjsignal")

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_PRECONDITION = 0, 1, 2, 3


def _say(args, *parts, file=None) -> None:
    if not args.quiet:
        print(*parts, file=file)


def _load(path) -> FJInstance:
    """Load and validate; consensus (all-susceptible) instances are replaced by their rank-one form."""
    inst = serialization.load_instance(path)
    violations = validate(inst)
    if is_fdg(inst):
        violations = [v for v in violations if v.invariant != "convergence.spectral_radius"]
    if violations:
        raise ValidationError(f"{path}: invalid instance", violations)
    return fdg_instance(inst) if is_fdg(inst) else inst


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    rep = optimizer.METHODS[args.method](inst)
    no_sig, full = rep.baselines
    print(f"method: {rep.method}")
    print(f"value: {rep.value:.12g}")
    _say(args, f"baselines: no-signal={no_sig:.12g} full-revelation={full:.12g}")
    _say(args, f"signals: {len(rep.scheme.signals)}  cells/combinations: {rep.cells_or_combos}")
    if rep.flags.get("approximation"):
        factor = rep.flags.get("guarantee_factor")
        _say(args, f"approximation: guarantee 1/{factor}" if factor else "approximation: no guarantee")
    if args.out:
        serialization.save_scheme(inst, rep.scheme, args.out, method=rep.method)
        _say(args, f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _load(args.instance)
    scheme, doc = serialization.load_scheme(args.scheme, inst.prior)
    value = expected_value(inst, scheme)
    print(f"value: {value:.12g}")
    recorded = doc.get("expected_value")
    if recorded is not None and abs(recorded - value) > args.tol:
        log.warning("recorded expected_value %.12g differs from recomputed %.12g", recorded, value)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    grid = oracle.default_grid(inst)
    if args.resolution is not None:
        grid.resolution = args.resolution
    value, _ = oracle.grid_oracle(inst, grid)
    auto = optimizer.solve_auto(inst)
    print(f"oracle: {value:.12g}")
    _say(args, f"resolution: {grid.resolution}")
    _say(args, f"auto ({auto.method}): {auto.value:.12g}")
    _say(args, f"gap: {auto.value - value:.3g}")
    return EXIT_OK


def report_rows(inst: FJInstance) -> list[tuple[float, float]]:
    """``(x, F(x))`` at breakpoints, midpoints, the prior and the optimal posteriors."""
    if inst.m != 2:
        raise WrongStateCount(f"report needs a two-state instance, got {inst.m} states")
    pts = optimizer.two_state_breakpoints(inst)
    mids = (pts[:-1] + pts[1:]) / 2
    rep = optimizer.optimize_two_state(inst)
    chosen = rep.scheme.posteriors[:, 1]
    xs = np.unique(np.concatenate([pts, mids, chosen, [inst.prior[1]]]))
    xs = xs[np.r_[True, np.diff(xs) > 1e-12]]
    return [(float(x), optimizer.two_state_value(inst, x)) for x in xs]


def cmd_report(args) -> int:
    inst = _load(args.instance)
    if not inst.objective.is_range_based:
        raise PreconditionError("report needs a range-based objective")
    rows = report_rows(inst)
    rep = optimizer.optimize_two_state(inst)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "F"])
        for x, f in rows:
            w.writerow([repr(x), repr(f)])
    finally:
        if args.out:
            out.close()
    if args.out:
        _say(args, f"wrote {len(rows)} rows to {args.out}")
    # keep stdout pure CSV when the table goes there
    side = None if args.out else sys.stderr
    _say(args, f"prior: {float(inst.prior[1])!r}", file=side)
    chosen = " ".join(f"{float(x)!r}@{w:.6g}" for x, w in zip(rep.scheme.posteriors[:, 1], rep.scheme.masses))
    _say(args, f"chosen: {chosen}", file=side)
    return EXIT_OK


def cmd_gen_hardness(args) -> int:
    if args.graph:
        graph = hardness.read_graph(args.graph)
    elif args.random_vertices:
        graph = hardness.Graph.random(args.random_vertices, args.edge_prob, np.random.default_rng(args.seed))
    else:
        raise InputError("give a graph file or --random-vertices")
    try:
        hi = hardness.generate(graph)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    serialization.save_instance(hi.instance, args.out)
    _say(args, f"wrote {args.out}: {graph.n} agents, {len(graph.edges)} edges")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fjsignal", description="Optimal public signaling in FJ opinion dynamics.")
    p.add_argument("--tol", type=float, default=1e-6, help="tolerance for consistency checks (default 1e-6)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized generators")
    p.add_argument("--quiet", action="store_true", help="print only the main result")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("solve", help="compute a signaling scheme")
    s.add_argument("instance")
    s.add_argument("--method", choices=sorted(optimizer.METHODS), default="auto")
    s.add_argument("-o", "--out", help="write the scheme as JSON")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="recompute the expected value of a scheme file")
    e.add_argument("instance")
    e.add_argument("scheme")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("oracle", help="grid-oracle value and gap to the automatic solver")
    o.add_argument("instance")
    o.add_argument("-R", "--resolution", type=int)
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("report", help="CSV of the two-state value profile")
    r.add_argument("instance")
    r.add_argument("-o", "--out", help="CSV path (default stdout)")
    r.set_defaults(func=cmd_report)

    g = sub.add_parser("gen-hardness", help="build the independent-set instance of a graph")
    g.add_argument("graph", nargs="?", help="edge-list file with header 'n <count>'")
    g.add_argument("-o", "--out", required=True)
    g.add_argument("--random-vertices", type=int, help="generate a random graph instead")
    g.add_argument("--edge-prob", type=float, default=0.3)
    g.set_defaults(func=cmd_gen_hardness)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_INVALID
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FJError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
