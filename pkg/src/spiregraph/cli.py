"""Command-line front end: ``spiregraph <command> [options]``.

Exit codes: 0 success, 2 usage or input error, 3 numerical-contract violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import graphs
from .errors import NumericalContractError
from .peaks import (DELTA, DT_COARSE, DT_FINE, R_CANDIDATES, _sig9, distinguishability,
                    spectrum_for)
from .qsim import run_trials
from .spire import build_spired, obfuscate, spire_return_amplitude
from .signal import return_amplitude
from .tower import DIRECT, SERF, TowerParams, direct_spectrum

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
THREADS_ENV = "SPIRE_THREADS"


class UsageError(ValueError):
    pass


def worker_count() -> int:
    """Parallelism from SPIRE_THREADS: unset means 1, 0 means all cores."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError(f"{THREADS_ENV} must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def fmt(x: float) -> str:
    return f"{x:.9g}"


def parse_m_list(text: str) -> list[int]:
    try:
        ms = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad m-list {text!r}") from None
    if not ms:
        raise UsageError("m-list is empty")
    return ms


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _graph(args, family: str | None = None, path: str | None = None) -> graphs.BaseGraph:
    family = family or args.family
    if family in graphs.FAMILIES and args.m is None:
        raise UsageError(f"family {family!r} needs -m")
    return graphs.build(family, args.m, path or getattr(args, "path", None))


def _params(args, g: graphs.BaseGraph) -> TowerParams:
    return TowerParams.for_graph(g, L=args.L, c=args.c, gamma=args.gamma)


def _peak_kwargs(args) -> dict:
    return dict(method=args.method, include_out_of_band=args.include_out_of_band,
                horizon_mult=args.horizon_mult, dt_coarse=args.dt_coarse,
                dt_fine=args.dt_fine, delta=args.delta, r=args.r)


def cmd_spectrum(args) -> int:
    g = _graph(args)
    p = _params(args, g)
    spec = spectrum_for(g, p, args.method, args.include_out_of_band)
    with _output(args.out) as out:
        if args.format == "csv":
            spec.write_csv(out)
        else:
            rows = [{"lambda": lam, "weight": w, "channel_mu": None if np.isnan(mu) else mu}
                    for lam, w, mu in zip(spec.lambdas, spec.weights, spec.channel_mu())]
            out.write(json.dumps(_sig9({
                "family": g.family, "n": g.n, "m": g.m, "L": p.L, "c": p.c, "gamma": p.gamma,
                "method": args.method, "total_weight": spec.total_weight, "spectrum": rows,
            })) + "\n")
    return 0


def _pair(args) -> tuple[graphs.BaseGraph, graphs.BaseGraph]:
    ga = _graph(args, args.family_a, args.path_a)
    gb = _graph(args, args.family_b, args.path_b)
    return ga, gb


def cmd_distinguish(args) -> int:
    ga, gb = _pair(args)
    res = distinguishability(ga, gb, _params(args, ga), workers=worker_count(), **_peak_kwargs(args))
    with _output(args.out) as out:
        if args.format == "json":
            out.write(res.to_json() + "\n")
        else:
            d = _sig9(res.to_dict())
            w = csv.writer(out, lineterminator="\n")
            w.writerow(list(d))
            w.writerow(["" if v is None else v for v in d.values()])
    return 0


def cmd_crossval(args) -> int:
    workers = worker_count()
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["m", "dis_direct", "dis_serf", "abs_diff", "t_star_direct", "t_star_serf"])
        for m in parse_m_list(args.m_list):
            ga, gb = graphs.prism(m), graphs.moebius(m)
            p = _params(args, ga)
            kw = _peak_kwargs(args)
            kw.pop("method")
            rd = distinguishability(ga, gb, p, method=DIRECT, workers=workers, **kw)
            rs = distinguishability(ga, gb, p, method=SERF, workers=workers, **kw)
            w.writerow([m, fmt(rd.dis), fmt(rs.dis), fmt(abs(rd.dis - rs.dis)),
                        fmt(rd.t_star), fmt(rs.t_star)])
            out.flush()
    return 0


def cmd_scale(args) -> int:
    ms = parse_m_list(args.m_list)
    workers = worker_count()
    cols = ["m", "n", "L", "t_star", "dis", "parseval", "n2_parseval", "dis2_over_parseval", "n_rep"]
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for m in ms:
            ga, gb = graphs.prism(m), graphs.moebius(m)
            d = _sig9(distinguishability(ga, gb, _params(args, ga), workers=workers,
                                         **_peak_kwargs(args)).to_dict())
            w.writerow(["" if d[c] is None else d[c] for c in cols])
            out.flush()
    return 0


def cmd_oracle(args) -> int:
    g = _graph(args)
    if args.L is None:
        raise UsageError("oracle needs -L")
    sg = build_spired(g, args.L, args.c, args.seed)
    inst = obfuscate(sg, args.seed)
    times = np.linspace(0.0, args.t_max, args.points)
    spired = spire_return_amplitude(sg, times)
    p = TowerParams.for_graph(g, L=args.L, c=args.c)
    towered = return_amplitude(direct_spectrum(g, p), times)
    err = float(np.max(np.abs(spired.values - towered.values)))
    if args.out:
        inst.write_dump(args.out)
    report = {
        "family": g.family, "n": g.n, "d": g.d, "m": g.m, "L": args.L, "c": args.c,
        "D": sg.D, "seed": args.seed, "vertices": sg.num_vertices,
        "label_bits": inst.label_bits, "seed_label": inst.format_label(inst.seed_label),
        "degree_census": {str(k): v for k, v in sg.degree_census().items()},
        "krylov_max_err": err, "grid_points": args.points, "t_max": args.t_max,
        "dump": args.out,
    }
    print(json.dumps(_sig9(report)))
    return 0


def cmd_hadamard(args) -> int:
    ga = _graph(args, args.family_a, args.path_a)
    gb = ga if args.same_graph else _graph(args, args.family_b, args.path_b)
    kw = _peak_kwargs(args)
    delta = kw.pop("delta")
    summary = run_trials(ga, gb, _params(args, ga), delta=delta, trials=args.trials,
                         seed=args.seed, nrep_mult=args.nrep_mult, workers=worker_count(), **kw)
    with _output(args.out) as out:
        if not args.summary_only:
            for rec in summary.records:
                out.write(rec.to_json() + "\n")
        out.write(json.dumps({"summary": _sig9(summary.to_dict())}) + "\n")
    return 0


def _add_graph_args(sp, pair: bool = False) -> None:
    if pair:
        sp.add_argument("--family-a", default=graphs.PRISM)
        sp.add_argument("--family-b", default=graphs.MOEBIUS)
        sp.add_argument("--path-a", help="edge list when --family-a file")
        sp.add_argument("--path-b", help="edge list when --family-b file")
    else:
        sp.add_argument("--family", default=graphs.PRISM,
                        choices=[graphs.PRISM, graphs.MOEBIUS, "k2", "file"])
        sp.add_argument("--path", help="edge list when --family file")
    sp.add_argument("-m", type=int, help="rail length of the prism / Moebius ladder")


def _add_tower_args(sp) -> None:
    sp.add_argument("-L", type=int, default=None, help="tower length (default n-1)")
    sp.add_argument("-c", type=int, default=2, help="thickening")
    sp.add_argument("--gamma", type=float, default=None, help="override sqrt(d/c)")


def _add_peak_args(sp) -> None:
    sp.add_argument("--method", choices=[SERF, DIRECT], default=SERF)
    sp.add_argument("--include-out-of-band", action="store_true")
    sp.add_argument("--horizon-mult", type=float, default=1.0)
    sp.add_argument("--dt-coarse", type=float, default=DT_COARSE)
    sp.add_argument("--dt-fine", type=float, default=DT_FINE)
    sp.add_argument("--delta", type=float, default=DELTA)
    sp.add_argument("-r", type=int, default=R_CANDIDATES)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spiregraph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="towered spectrum CSV for one graph")
    _add_graph_args(sp)
    _add_tower_args(sp)
    sp.add_argument("--method", choices=[SERF, DIRECT], default=SERF)
    sp.add_argument("--include-out-of-band", action="store_true")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("distinguish", help="peak distinguishability of two graphs")
    _add_graph_args(sp, pair=True)
    _add_tower_args(sp)
    _add_peak_args(sp)
    sp.add_argument("--format", choices=["csv", "json"], default="json")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_distinguish)

    sp = sub.add_parser("crossval", help="direct vs secular-root Dis for prism / Moebius pairs")
    sp.add_argument("--m-list", default="4,8,16,32")
    _add_tower_args(sp)
    _add_peak_args(sp)
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_crossval)

    sp = sub.add_parser("scale", help="scaling table for prism / Moebius pairs")
    sp.add_argument("--m-list", default="4,5,8,9,16,17,32,33")
    _add_tower_args(sp)
    _add_peak_args(sp)
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_scale)

    sp = sub.add_parser("oracle", help="build a spired graph, dump its oracle, check amplitudes")
    _add_graph_args(sp)
    sp.add_argument("-L", type=int, default=None)
    sp.add_argument("-c", type=int, default=2, choices=[1, 2])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--t-max", type=float, default=30.0)
    sp.add_argument("-o", "--out", help="oracle dump path")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("hadamard", help="Monte Carlo of the shot-based decision rule")
    _add_graph_args(sp, pair=True)
    _add_tower_args(sp)
    _add_peak_args(sp)
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nrep-mult", type=float, default=1.0)
    sp.add_argument("--same-graph", action="store_true")
    sp.add_argument("--summary-only", action="store_true")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_hadamard)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalContractError as exc:
        print(f"spiregraph: numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"spiregraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
