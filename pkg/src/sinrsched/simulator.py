"""Time-slotted queue simulation and capacity sweeps."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from sinrsched.model import LinkGeometry, ModelError, Node, PhysicalParams, Topology
from sinrsched.power import FIXED_KINDS, fixed_power, power_ceiling
from sinrsched.schedulers import ADJUSTABLE, POLICIES, SchedulerOptions

log = logging.getLogger(__name__)

VERDICTS = ("stable", "unstable", "inconclusive")
MIN_WINDOW = 1000


class SimulationError(RuntimeError):
    def __init__(self, slot: int, message: str):
        super().__init__(f"slot {slot}: {message}")
        self.slot = slot


@dataclass
class SimConfig:
    horizon: int = 100_000
    lam: float = 0.0
    seed: int = 0
    policy: str = "alg2"
    power_mode: str = "adjustable"  # or one of FIXED_KINDS
    power_scale: float | None = None  # fixed modes; default gives c^up = 2 sigma
    init_queue_range: tuple[int, int] = (100, 300)
    y_max: int = 50
    window_frac: float = 0.5
    slope_tol: float = 0.01
    verify: bool = True
    options: SchedulerOptions = field(default_factory=SchedulerOptions)

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1 slot")
        if self.lam < 0:
            raise ValueError("arrival rate must be non-negative")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; choose from {sorted(POLICIES)}")
        if self.power_mode != "adjustable" and self.power_mode not in FIXED_KINDS:
            raise ValueError(f"unknown power mode {self.power_mode!r}")
        if self.policy in ADJUSTABLE and self.power_mode != "adjustable":
            raise ValueError(f"policy {self.policy} assigns its own powers; use power_mode='adjustable'")
        if self.policy not in ADJUSTABLE and self.power_mode == "adjustable":
            raise ValueError(f"policy {self.policy} needs a fixed power mode")
        lo, hi = self.init_queue_range
        if not 0 <= lo <= hi:
            raise ValueError("init_queue_range must satisfy 0 <= lo <= hi")


@dataclass
class BacklogTrace:
    per_slot_total: np.ndarray
    scheduled_count: np.ndarray
    max_power: np.ndarray
    verdict: str = "inconclusive"
    slope: float = float("nan")

    def __len__(self) -> int:
        return len(self.per_slot_total)


# ------------------------------------------------------------------ topology


def gen_random_topology(
    n_nodes: int = 100,
    n_links: int = 20,
    area_side: float = 100.0,
    r_min: float = 1.0,
    r_max: float = 5.0,
    seed: int = 0,
) -> Topology:
    """Half the nodes are senders uniform in the square, each with a receiver in its radius-``r_max`` disk.

    ``n_links`` sender/receiver pairs are then drawn without replacement.
    Node ``2k`` is the sender of pair ``k`` and ``2k+1`` its receiver.
    """
    if r_min <= 0 or r_min > r_max:
        raise ModelError(f"impossible length bounds [{r_min}, {r_max}]")
    pairs = n_nodes // 2
    if n_links > pairs:
        raise ModelError(f"{n_links} links need at least {2 * n_links} nodes")
    rng = np.random.default_rng(seed)
    senders = rng.uniform(0.0, area_side, size=(pairs, 2))
    nodes = []
    for k in range(pairs):
        while True:
            # uniform point in the disk, rejected until long enough
            rad = r_max * math.sqrt(rng.uniform())
            if rad >= r_min:
                break
        ang = rng.uniform(0.0, 2 * math.pi)
        sx, sy = senders[k]
        nodes.append(Node(2 * k, (float(sx), float(sy))))
        nodes.append(Node(2 * k + 1, (float(sx + rad * math.cos(ang)), float(sy + rad * math.sin(ang)))))
    if n_nodes % 2:
        extra = rng.uniform(0.0, area_side, size=2)
        nodes.append(Node(2 * pairs, (float(extra[0]), float(extra[1]))))
    picked = np.sort(rng.choice(pairs, size=n_links, replace=False))
    specs = [(i, 2 * int(k), 2 * int(k) + 1) for i, k in enumerate(picked)]
    return Topology.build(nodes, specs, r_min, r_max, area_side)


# -------------------------------------------------------------------- queues


def poisson_arrivals(lam: float, n_links: int, y_max: int, rng: np.random.Generator) -> np.ndarray:
    if lam < 0:
        raise ValueError("arrival rate must be non-negative")
    return np.minimum(rng.poisson(lam, n_links), y_max)


def step(q: np.ndarray, served: np.ndarray, arrivals: np.ndarray) -> np.ndarray:
    """One slot of ``Q(T+1) = max(0, Q(T) - S(T)) + Y(T)``."""
    return np.maximum(q - served, 0) + arrivals


def default_fixed_scale(kind: str, params: PhysicalParams, lengths: Sequence[float], h: float = 2.0) -> float:
    """Scale at which the weakest link receives ``h * sigma * xi`` alone, i.e. ``c^up = h/(h-1) * sigma``."""
    worst = min(fixed_power(d, kind, 1.0, params.kappa) * min(params.eta * d ** (-params.kappa), 1.0) for d in lengths)
    return h * params.sigma * params.xi / worst


def fixed_powers(topology: Topology, config: SimConfig, params: PhysicalParams) -> np.ndarray:
    lengths = [l.length for l in topology.links]
    scale = config.power_scale
    if scale is None:
        scale = default_fixed_scale(config.power_mode, params, lengths)
    return np.array([fixed_power(d, config.power_mode, scale, params.kappa) for d in lengths])


# ----------------------------------------------------------------------- run


def run(config: SimConfig, topology: Topology, params: PhysicalParams) -> BacklogTrace:
    geo = LinkGeometry(topology.links, params)
    n = len(geo)
    rng = np.random.default_rng(config.seed)
    lo, hi = config.init_queue_range
    q = rng.integers(lo, hi + 1, size=n).astype(np.int64)
    adjustable = config.power_mode == "adjustable"
    power = np.zeros(n) if adjustable else fixed_powers(topology, config, params)
    policy = POLICIES[config.policy]
    opts = config.options

    totals = np.empty(config.horizon, dtype=np.int64)
    counts = np.empty(config.horizon, dtype=np.int64)
    max_power = np.zeros(config.horizon)
    served = np.zeros(n, dtype=np.int64)
    for t in range(config.horizon):
        try:
            res = policy(geo, q.astype(float), power, opts)
        except Exception as exc:  # abort with the slot index attached
            raise SimulationError(t, f"policy {config.policy} failed: {exc}") from exc
        rows = np.asarray(res.rows, dtype=np.int64)
        if len(rows):
            if config.verify and not geo.feasible_rows(rows, res.power):
                raise SimulationError(t, f"infeasible schedule {geo.ids[rows].tolist()}")
            peak = float(res.power.max())
            if adjustable and config.verify:
                ceiling = power_ceiling(
                    opts.m, params.sigma, params.xi, params.eta, res.reference_r, res.phi, params.kappa
                )
                if peak > ceiling * (1 + 1e-9):
                    raise SimulationError(t, f"power {peak:.6g} above ceiling {ceiling:.6g}")
            max_power[t] = peak
        served[:] = 0
        served[rows] = 1
        q = step(q, served, poisson_arrivals(config.lam, n, config.y_max, rng))
        totals[t] = q.sum()
        counts[t] = len(rows)

    trace = BacklogTrace(totals, counts, max_power)
    if int(config.horizon * config.window_frac) >= MIN_WINDOW:
        trace.slope = window_slope(totals, config.window_frac)
        trace.verdict = stability_verdict(totals, config.window_frac, config.slope_tol)
    return trace


def _window(series, window_frac: float) -> np.ndarray:
    series = np.asarray(series.per_slot_total if isinstance(series, BacklogTrace) else series, dtype=float)
    size = int(len(series) * window_frac)
    if size < MIN_WINDOW:
        raise ValueError(f"evaluation window of {size} slots is shorter than {MIN_WINDOW}")
    return series[-size:]


def window_slope(trace, window_frac: float = 0.5) -> float:
    """Least-squares backlog slope (packets/slot) over the final ``window_frac`` of the trace."""
    tail = _window(trace, window_frac)
    x = np.arange(len(tail), dtype=float)
    return float(np.polyfit(x, tail, 1)[0])


def stability_verdict(trace, window_frac: float = 0.5, slope_tol: float = 0.01) -> str:
    """Slope test over the final window plus a bound on the last value.

    The last value must stay within 10x the window minimum; a window that
    drains to zero is measured against its mean instead (at least 1 packet).
    """
    tail = _window(trace, window_frac)
    slope = window_slope(tail, 1.0)
    low = tail.min()
    level = max(low if low > 0 else tail.mean(), 1.0)
    if slope <= slope_tol and tail[-1] <= 10 * level:
        return "stable"
    if slope >= 10 * slope_tol:
        return "unstable"
    return "inconclusive"


# --------------------------------------------------------------------- sweep


@dataclass
class SweepPoint:
    lam: float
    verdict: str
    slope: float
    mean_backlog: float
    final_backlog: int


@dataclass
class SweepResult:
    capacity: float | None
    points: list[SweepPoint]
    inversions: list[tuple[float, float]]  # (stable lam, lower unstable lam)


def _sweep_point(args) -> SweepPoint:
    config, topology, params = args
    trace = run(config, topology, params)
    tail = trace.per_slot_total[-max(1, int(len(trace) * config.window_frac)) :]
    return SweepPoint(config.lam, trace.verdict, trace.slope, float(tail.mean()), int(trace.per_slot_total[-1]))


def sweep(
    config: SimConfig,
    topology: Topology,
    params: PhysicalParams,
    lambdas: Sequence[float],
    workers: int = 1,
    seed_offset: int = 0,
) -> SweepResult:
    """Run every arrival rate with seed ``config.seed + index`` and report the largest stable one."""
    lambdas = list(lambdas)
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambda grid must be sorted ascending")
    jobs = [
        (replace(config, lam=float(lam), seed=config.seed + seed_offset + i), topology, params)
        for i, lam in enumerate(lambdas)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point, jobs))
    else:
        points = [_sweep_point(j) for j in jobs]
    for p in points:
        log.info("lambda=%.4f verdict=%s slope=%.4g mean=%.1f", p.lam, p.verdict, p.slope, p.mean_backlog)
    return _summarise(points)


def _summarise(points: list[SweepPoint]) -> SweepResult:
    points = sorted(points, key=lambda p: p.lam)
    stable = [p.lam for p in points if p.verdict == "stable"]
    inversions = []
    for p in points:
        if p.verdict != "stable":
            continue
        lower_unstable = [o.lam for o in points if o.verdict == "unstable" and o.lam < p.lam]
        if lower_unstable:
            inversions.append((p.lam, max(lower_unstable)))
    if inversions:
        log.warning("stable-above-unstable inversions: %s", inversions)
    return SweepResult(max(stable) if stable else None, points, inversions)


def knee_sweep(
    config: SimConfig,
    topology: Topology,
    params: PhysicalParams,
    coarse: float = 0.1,
    fine: float = 0.005,
    upper: float = 1.0,
    workers: int = 1,
) -> SweepResult:
    """Coarse grid from 0 to ``upper``, then a fine grid between the last stable and first unstable rate."""
    n_coarse = int(round(upper / coarse))
    grid = [round(i * coarse, 10) for i in range(n_coarse + 1)]
    first = sweep(config, topology, params, grid, workers)
    lo = first.capacity if first.capacity is not None else 0.0
    above = [p.lam for p in first.points if p.lam > lo and p.verdict != "stable"]
    hi = min(above) if above else upper
    n_fine = int(round((hi - lo) / fine))
    fine_grid = [round(lo + i * fine, 10) for i in range(1, n_fine)]
    if not fine_grid:
        return first
    second = sweep(config, topology, params, fine_grid, workers, seed_offset=len(grid))
    return _summarise(first.points + second.points)
