"""Command-line entry point: ``sinrsched <gen|bounds|schedule|run|sweep|check>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from sinrsched import formats
from sinrsched.bridging import omega_bound
from sinrsched.model import ModelError, PhysicalParams, check_feasible
from sinrsched.power import FIXED_KINDS, fixed_power, m_window, power_ceiling
from sinrsched.schedulers import ADJUSTABLE, POLICIES, SchedulerOptions, algorithm2, fixed_policy
from sinrsched.separation import lemma1_bound, phi_star
from sinrsched.simulator import (
    SimConfig,
    default_fixed_scale,
    gen_random_topology,
    knee_sweep,
    run,
    sweep,
)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _add_physics(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("physical model")
    g.add_argument("--eta", type=float, default=1.0, help="reference loss factor")
    g.add_argument("--kappa", type=float, default=3.0, help="path-loss exponent")
    g.add_argument("--xi", type=float, default=0.01, help="ambient noise power")
    g.add_argument("--sigma", type=float, default=10.0, help="SINR threshold")
    g.add_argument("--alpha", type=float, default=2.0, help="disk scaling factor")


def _params(args) -> PhysicalParams:
    return PhysicalParams(args.eta, args.kappa, args.xi, args.sigma, args.alpha)


def _add_policy(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=sorted(POLICIES), default="alg2")
    p.add_argument("--power", choices=("adjustable",) + FIXED_KINDS, default=None,
                   help="power mode; defaults to adjustable for alg2 and uniform otherwise")
    p.add_argument("--scale", type=float, default=None, help="fixed power scale (default: c_up = 2 sigma)")
    p.add_argument("--group-base", type=float, default=None, help="enable length grouping with this base")
    p.add_argument("--rho-threshold", type=float, default=2.0)


def _power_mode(args) -> str:
    if args.power is not None:
        return args.power
    return "adjustable" if args.policy in ADJUSTABLE else "uniform"


def _options(args, topology=None) -> SchedulerOptions:
    r_min = topology.r_min if topology is not None else None
    r_max = topology.r_max if topology is not None else None
    return SchedulerOptions(group_base=args.group_base, r_min=r_min, r_max=r_max, rho_threshold=args.rho_threshold)


def _add_sim(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", help="topology file; omitted means the random preset generated from --topo-seed")
    p.add_argument("--topo-seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--y-max", type=int, default=50)
    p.add_argument("--window-frac", type=float, default=0.5)
    p.add_argument("--slope-tol", type=float, default=0.01)


def _topology(args):
    if args.topology:
        return formats.parse_topology(_read(args.topology))
    return gen_random_topology(seed=args.topo_seed)


def _sim_config(args, topology, lam: float = 0.0) -> SimConfig:
    return SimConfig(
        horizon=args.horizon,
        lam=lam,
        seed=args.seed,
        policy=args.policy,
        power_mode=_power_mode(args),
        power_scale=args.scale,
        y_max=args.y_max,
        window_frac=args.window_frac,
        slope_tol=args.slope_tol,
        options=_options(args, topology),
    )


# ------------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    topo = gen_random_topology(args.nodes, args.links, args.area, args.rmin, args.rmax, args.seed)
    _write(args.output, formats.serialize_topology(topo))
    return 0


def cmd_bounds(args) -> int:
    prm = _params(args)
    delta = args.rmin / args.rmax
    target = phi_star(prm.sigma, prm.alpha, prm.kappa)
    window = m_window(target, prm.sigma, prm.alpha, prm.kappa)
    theta = args.theta if args.theta is not None else delta
    lines = [
        f"delta {delta!r}",
        f"omega {omega_bound(prm.sigma, prm.kappa, prm.alpha, delta)}",
        f"phi_star {target!r}",
        f"m_window {window.lo!r} {window.hi!r}" if window else "m_window empty",
        f"power_ceiling {power_ceiling(args.m, prm.sigma, prm.xi, prm.eta, args.rmax, target, prm.kappa)!r}",
        f"packing_phi {lemma1_bound(theta, prm.kappa)!r}",
    ]
    print("\n".join(lines))
    return 0


def cmd_schedule(args) -> int:
    prm = _params(args)
    topo = formats.parse_topology(_read(args.topology))
    weights = formats.parse_weights(_read(args.weights))
    opts = _options(args, topo)
    mode = _power_mode(args)
    if args.policy in ADJUSTABLE:
        sched = algorithm2(topo.links, weights, prm, opts)
    else:
        lengths = [l.length for l in topo.links]
        scale = args.scale if args.scale is not None else default_fixed_scale(mode, prm, lengths)
        powers = {l.id: fixed_power(l.length, mode, scale, prm.kappa) for l in topo.links}
        sched = fixed_policy(args.policy, topo.links, weights, powers, prm, opts)
    _write(args.output, formats.serialize_schedule(sched.active, sched.powers.powers))
    print(f"# policy={args.policy} links={len(sched.active)} weight={sched.total_weight!r}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    prm = _params(args)
    topo = _topology(args)
    trace = run(_sim_config(args, topo, args.lam), topo, prm)
    if args.output:
        _write(args.output, formats.serialize_trace(trace))
    print(f"verdict {trace.verdict} slope {trace.slope!r} final_backlog {int(trace.per_slot_total[-1])}")
    return 0


def _grid(spec: str) -> list[float]:
    if ":" in spec:
        lo, hi, stepv = (float(x) for x in spec.split(":"))
        n = int(round((hi - lo) / stepv))
        return [round(lo + i * stepv, 10) for i in range(n + 1)]
    return [float(x) for x in spec.split(",")]


def cmd_sweep(args) -> int:
    prm = _params(args)
    topo = _topology(args)
    cfg = _sim_config(args, topo)
    if args.grid:
        result = sweep(cfg, topo, prm, _grid(args.grid), workers=args.workers)
    else:
        result = knee_sweep(cfg, topo, prm, args.coarse, args.fine, workers=args.workers)
    print("lambda,verdict,slope,mean_backlog,final_backlog")
    for p in result.points:
        print(f"{p.lam!r},{p.verdict},{p.slope!r},{p.mean_backlog!r},{p.final_backlog}")
    print(f"capacity {result.capacity!r}")
    for hi, lo in result.inversions:
        print(f"inversion stable={hi!r} above unstable={lo!r}")
    return 0


def cmd_check(args) -> int:
    prm = _params(args)
    topo = formats.parse_topology(_read(args.topology))
    sched = formats.parse_schedule(_read(args.schedule))
    by_id = {l.id: l for l in topo.links}
    missing = [i for i in sched.link_ids if i not in by_id]
    if missing:
        print(f"error: schedule references unknown links {missing}", file=sys.stderr)
        return 2
    links = [by_id[i] for i in sched.link_ids]
    powers = dict(sched.powers)
    if args.power is not None:
        lengths = [l.length for l in topo.links]
        scale = args.scale if args.scale is not None else default_fixed_scale(args.power, prm, lengths)
        for l in links:
            powers.setdefault(l.id, fixed_power(l.length, args.power, scale, prm.kappa))
    unpowered = [l.id for l in links if l.id not in powers]
    if unpowered:
        print(f"error: no power for links {unpowered}; add P lines or --power", file=sys.stderr)
        return 2
    ok = check_feasible(links, powers, prm)
    print("feasible" if ok else "infeasible")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sinrsched", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random topology")
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--links", type=int, default=20)
    p.add_argument("--area", type=float, default=100.0)
    p.add_argument("--rmin", type=float, default=1.0)
    p.add_argument("--rmax", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bounds", help="print omega, phi*, m-window, power ceiling and the packing bound")
    _add_physics(p)
    p.add_argument("--rmin", type=float, default=1.0)
    p.add_argument("--rmax", type=float, default=5.0)
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--theta", type=float, default=None, help="node spacing over R for the packing bound (default r/R)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("schedule", help="one-shot schedule for a weights file")
    _add_physics(p)
    _add_policy(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("run", help="simulate one arrival rate and write the trace CSV")
    _add_physics(p)
    _add_policy(p)
    _add_sim(p)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="estimate the largest stable arrival rate")
    _add_physics(p)
    _add_policy(p)
    _add_sim(p)
    p.add_argument("--grid", help="'lo:hi:step' or comma list; default is a coarse-then-fine knee search")
    p.add_argument("--coarse", type=float, default=0.1)
    p.add_argument("--fine", type=float, default=0.005)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="verify a schedule file against a topology")
    _add_physics(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--power", choices=FIXED_KINDS, default=None, help="fill missing powers from a fixed assignment")
    p.add_argument("--scale", type=float, default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
