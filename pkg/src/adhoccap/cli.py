"""Batch command-line front end.

Every command writes one CSV (to ``--out`` or stdout) and exactly one JSON
manifest describing the run: next to the CSV as ``<out>.manifest.json``, or
on stderr when the CSV goes to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from . import __version__, geometry, reports
from .asymptotic import (InfeasibleError, PowerBudget, ReceiverKind, SystemConfig, TimingMode,
                         achievable_diameter, achievable_prob, capacity_for_diameter, diameter_map,
                         load_limit, max_load, solve_threshold)
from .geometry import Arena, DistanceModel
from .numerics import DomainError
from .simulator import InterfererPolicy, SimConfig, run_monte_carlo

GK_NOTE = ("note: Gupta-Kumar column uses R/sqrt(N ln N) with unit constant; "
           "only its order of growth is comparable")


@dataclass
class RunManifest:
    command: str
    parameters: dict
    master_seed: Optional[int]
    version: str = __version__
    outputs: list = field(default_factory=list)
    argv: list = field(default_factory=list)


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.10g}"
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    for line in comments:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def parse_power(text: str) -> PowerBudget:
    if text.strip().lower() in ("inf", "infinity", "unlimited"):
        return PowerBudget.unlimited()
    try:
        value = float(text)
    except ValueError:
        value = math.nan
    if math.isinf(value) and value > 0:
        return PowerBudget.unlimited()
    if not value > 0:
        raise argparse.ArgumentTypeError(f"power must be 'inf' or a positive number, got {text!r}")
    return PowerBudget.max_snr(value)


def _arena_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("arena")
    g.add_argument("--b", type=float, default=6.0, help="arena side [m] (default 6)")
    g.add_argument("--lambda", dest="lam", type=float, default=0.1, help="wavelength [m] (default 0.1)")
    g.add_argument("--k", type=float, default=3.5, help="Gaussian distance shape constant (default 3.5)")


def _system_args(p: argparse.ArgumentParser, timing=True):
    p.add_argument("--receiver", choices=[r.value for r in ReceiverKind], default="mmse")
    if timing:
        p.add_argument("--timing", choices=[t.value for t in TimingMode], default="sync")
    p.add_argument("--gamma", type=float, default=5.0, help="target SIR (default 5)")
    p.add_argument("--power", type=parse_power, default=PowerBudget.unlimited(),
                   help="'inf' for unlimited, else SNR_c = P_max/sigma^2 (e.g. 1e4)")


def _out_args(p: argparse.ArgumentParser):
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adhoccap", description="Capacity analysis for delay-constrained CDMA ad hoc networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="maximum load for a link probability or diameter")
    _arena_args(p)
    _system_args(p)
    _out_args(p)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--p", type=float, nargs="+", help="link probability constraint(s)")
    target.add_argument("--D", type=int, nargs="+", help="network diameter constraint(s)")

    p = sub.add_parser("link-prob", help="achievable link probability at a load, or range CDF")
    _arena_args(p)
    _system_args(p)
    _out_args(p)
    p.add_argument("--alpha", type=float, nargs="+", help="load(s) N/L")
    p.add_argument("--L", type=int, help="spreading gain (with --N)")
    p.add_argument("--N", type=int, nargs="+", help="node count(s) (with --L)")
    p.add_argument("--range", dest="d_r", type=float, nargs="+",
                   help="reliable range(s) [m]: report the distance CDF instead")
    p.add_argument("--model", choices=[m.value for m in DistanceModel], default="gaussian",
                   help="distance law for --range queries")

    p = sub.add_parser("diameter-map", help="range, link probability and threshold for a diameter")
    _arena_args(p)
    _out_args(p)
    p.add_argument("--D", type=int, nargs="+", required=True)

    p = sub.add_parser("simulate", help="finite-network Monte Carlo")
    _arena_args(p)
    _system_args(p, timing=False)
    _out_args(p)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--policy", choices=[q.value for q in InterfererPolicy], default="exclude",
                   help="whether the receiver counts as an interferer")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("throughput", help="normalised throughput against N")
    _arena_args(p)
    _system_args(p, timing=False)
    _out_args(p)
    p.add_argument("--L", type=int, default=32)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=100)

    p = sub.add_parser("reproduce", help="regenerate a table or figure data set")
    p.add_argument("target", choices=reports.TARGETS)
    _arena_args(p)
    p.add_argument("--gamma", type=float, default=5.0)
    _out_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--skip-sim", action="store_true", help="tables: analysis columns only")
    return parser


def _arena(ns) -> Arena:
    return Arena(ns.b, ns.lam, ns.k)


def _system(ns) -> SystemConfig:
    timing = TimingMode(getattr(ns, "timing", "sync"))
    return SystemConfig(_arena(ns), ReceiverKind(ns.receiver), timing, ns.power, ns.gamma)


class Infeasible(Exception):
    pass


def _cmd_capacity(ns):
    cfg = _system(ns)
    rows, problems = [], []
    if ns.p is not None:
        for p in ns.p:
            r = max_load(cfg, p)
            rows.append([p, r.alpha_max, r.link_prob, r.threshold_T,
                         r.required_snr if r.required_snr else math.inf])
            if not r.feasible:
                problems.append(f"p={p:g}: {cfg.receiver.value} capacity bound is nonpositive")
    else:
        for D in ns.D:
            r = capacity_for_diameter(cfg, D)
            rows.append([D, r.alpha_max, r.link_prob, r.threshold_T,
                         r.required_snr if r.required_snr else math.inf])
            if not r.feasible:
                problems.append(f"D={D}: {cfg.receiver.value} capacity bound is nonpositive")
    sweep = "sweep_p [-]" if ns.p is not None else "sweep_D [hops]"
    header = [sweep, "alpha_max [users/dim]", "p [-]", "T [gain]", "required_snr [ratio]"]
    return header, rows, [], problems if len(problems) == len(rows) else None


def _cmd_link_prob(ns):
    a = _arena(ns)
    if ns.d_r:
        model = DistanceModel(ns.model)
        rows = [[d, geometry.distance_cdf(a, model, d)] for d in ns.d_r]
        return ["d_r [m]", f"p_{model.value} [-]"], rows, [], None
    cfg = _system(ns)
    if ns.alpha:
        alphas = list(ns.alpha)
    elif ns.L and ns.N:
        alphas = [n / ns.L for n in ns.N]
    else:
        raise DomainError("link-prob needs --alpha, --L with --N, or --range")
    rows = []
    for alpha in alphas:
        if alpha >= load_limit(cfg):
            raise Infeasible(f"alpha exceeds decorrelator {cfg.timing.value} limit {load_limit(cfg):g}")
        try:
            T = solve_threshold(cfg, alpha)
        except InfeasibleError as exc:
            raise Infeasible(str(exc))
        p = achievable_prob(cfg, alpha)
        d_cont, d_ceil = achievable_diameter(cfg, alpha)
        rows.append([alpha, p, T, d_cont, d_ceil])
    return ["alpha [users/dim]", "p [-]", "T [gain]", "D_cont [hops]", "D_ceil [hops]"], rows, [], None


def _cmd_diameter_map(ns):
    a = _arena(ns)
    rows = []
    for D in ns.D:
        d_r, p, T = diameter_map(a, D)
        rows.append([D, d_r, p, T])
    return ["D [hops]", "d_r [m]", "p [-]", "T [gain]"], rows, [], None


def _cmd_simulate(ns):
    cfg = SimConfig(_arena(ns), ReceiverKind(ns.receiver), ns.gamma, ns.power, ns.L, ns.N,
                    ns.trials, ns.seed, InterfererPolicy(ns.policy))
    summary = run_monte_carlo(cfg, workers=ns.workers)
    rows = [[t, o.link_prob_hat, o.diameter, o.undirected_diameter]
            for t, o in enumerate(summary.outcomes)]
    comments = [f"summary,mean_link_prob,{fmt(summary.mean_link_prob)}",
                f"summary,trials_run,{summary.trials_run}",
                f"summary,modal_diameter,{fmt(summary.modal_diameter)}"]
    comments += [f"histogram,{fmt(k)},{fmt(v)}" for k, v in summary.diameter_histogram.items()]
    comments += [f"histogram_undirected,{fmt(k)},{fmt(v)}"
                 for k, v in summary.undirected_histogram.items()]
    header = ["trial", "link_prob_hat [-]", "diameter [hops]", "diameter_undirected [hops]"]
    return header, rows, comments, None


def _cmd_throughput(ns):
    cfg = SystemConfig(_arena(ns), ReceiverKind(ns.receiver), TimingMode.SYNCHRONOUS, ns.power, ns.gamma)
    rows = reports.throughput_rows(cfg, range(ns.n_min, ns.n_max + 1), ns.L)
    return reports.THROUGHPUT_HEADER, rows, [GK_NOTE], None


def _cmd_reproduce(ns):
    a = _arena(ns)
    t = ns.target
    comments = []
    if t.startswith("table"):
        header, rows = reports.table(t, a, ns.gamma, ns.trials, ns.seed, not ns.skip_sim, ns.workers)
    elif t == "fig6":
        header, rows = reports.fig6(a, ns.gamma)
    elif t == "fig8":
        header, rows = reports.fig8(a)
    elif t in ("fig9a", "fig9b"):
        header, rows = reports.fig9(a, 2 if t == "fig9a" else 3, ns.gamma)
    else:
        header, rows = reports.fig10(a, ns.gamma)
        comments.append(GK_NOTE)
    return header, rows, comments, None


COMMANDS = {
    "capacity": _cmd_capacity,
    "link-prob": _cmd_link_prob,
    "diameter-map": _cmd_diameter_map,
    "simulate": _cmd_simulate,
    "throughput": _cmd_throughput,
    "reproduce": _cmd_reproduce,
}


def _parameters(ns) -> dict:
    out = {}
    for key, value in vars(ns).items():
        if isinstance(value, PowerBudget):
            value = str(value)
        out[key] = value
    return out


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        header, rows, comments, problems = COMMANDS[ns.command](ns)
    except Infeasible as exc:
        print(f"adhoccap: infeasible: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ValueError) as exc:
        print(f"adhoccap: error: {exc}", file=sys.stderr)
        return 1

    text = render_csv(header, rows, comments)
    manifest = RunManifest(ns.command, _parameters(ns), ns.seed, argv=argv)
    if ns.out:
        with open(ns.out, "w", newline="") as fh:
            fh.write(text)
        manifest.outputs = [ns.out]
        with open(ns.out + ".manifest.json", "w") as fh:
            json.dump(asdict(manifest), fh, indent=2, default=str)
    else:
        sys.stdout.write(text)
        manifest.outputs = ["<stdout>"]
        print(json.dumps(asdict(manifest), default=str), file=sys.stderr)

    if problems:
        for msg in problems:
            print(f"adhoccap: infeasible: {msg}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
