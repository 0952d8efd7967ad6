"""Per-slot link scheduling policies.

Every policy works on rows of a :class:`~sinrsched.model.LinkGeometry` and
a weight vector aligned with those rows.  The link-level wrappers at the
bottom build the geometry and return :class:`Schedule` objects.  Links with
zero weight are never scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from sinrsched.bridging import bridge_rows
from sinrsched.model import Link, LinkGeometry, ModelError, PhysicalParams, PowerAssignment
from sinrsched.power import iterative_power_rows
from sinrsched.separation import first_fit_rows, phi_star

EXACT_MWISL_CAP = 15
# sums that differ only by float rounding count as ties
_TIE_REL = 1e-9


@dataclass
class SchedulerOptions:
    m: float = 2.0
    group_base: float | None = None  # length grouping off unless set
    r_min: float | None = None
    r_max: float | None = None
    rho_threshold: float = 2.0
    include_own_partner: bool = False
    exact_cap: int = EXACT_MWISL_CAP


@dataclass
class Schedule:
    active: tuple[int, ...]
    powers: PowerAssignment
    total_weight: float
    reference_r: float | None = None  # R used for the separation target (adjustable power)
    phi: float | None = None
    rejected: tuple[int, ...] = field(default=())


@dataclass
class RowResult:
    rows: list[int]
    power: np.ndarray
    reference_r: float | None = None
    phi: float | None = None
    rejected: list[int] = field(default_factory=list)


def _positive(w: np.ndarray, rows: Sequence[int] | None = None) -> list[int]:
    rows = range(len(w)) if rows is None else rows
    return [k for k in rows if w[k] > 0]


def _by_weight(rows: Sequence[int], w: np.ndarray, ids: np.ndarray) -> list[int]:
    return sorted(rows, key=lambda k: (-w[k], ids[k]))


def _heaviest(groups: Sequence[Sequence[int]], w: np.ndarray) -> int:
    """Index of the heaviest group; earliest wins ties (up to float rounding)."""
    best, best_w = 0, float(sum(w[k] for k in groups[0])) if groups else 0.0
    for i, g in enumerate(groups[1:], start=1):
        total = float(sum(w[k] for k in g))
        if total > best_w + _TIE_REL * abs(best_w):
            best, best_w = i, total
    return best


def length_group_rows(
    length: np.ndarray, w: np.ndarray, rows: Sequence[int], g: float, r_min: float, r_max: float | None = None
) -> list[int]:
    """Rows of the heaviest group ``[g^j r, g^(j+1) r)``; the top group is closed above."""
    if g <= 1:
        raise ModelError("group base must exceed 1")
    rows = list(rows)
    if not rows:
        return []
    if r_max is None:
        r_max = float(max(length[k] for k in rows))
    top = max(0, math.ceil(math.log(r_max / r_min, g) - 1e-12) - 1)
    groups: dict[int, list[int]] = {}
    for k in rows:
        j = math.floor(math.log(length[k] / r_min, g) + 1e-12)
        groups.setdefault(min(max(j, 0), top), []).append(k)
    keys = sorted(groups)
    return groups[keys[_heaviest([groups[j] for j in keys], w)]]


def _candidates(geo: LinkGeometry, w: np.ndarray, opts: SchedulerOptions) -> list[int]:
    rows = _positive(w)
    if opts.group_base is not None and rows:
        r_min = opts.r_min if opts.r_min is not None else float(geo.length.min())
        rows = length_group_rows(geo.length, w, rows, opts.group_base, r_min, opts.r_max)
    return rows


def algorithm2_rows(geo: LinkGeometry, w: np.ndarray, opts: SchedulerOptions) -> RowResult:
    """Bridge, split into phi*-separation sets, keep the heaviest, assign powers."""
    prm = geo.params
    rows = _candidates(geo, w, opts)
    if not rows:
        return RowResult([], np.empty(0))
    bridged = bridge_rows(geo, rows, w, prm.alpha)
    ref_r = float(geo.length[bridged].max())
    target = phi_star(prm.sigma, prm.alpha, prm.kappa)
    ipd = geo.inverse_power_distance(prm.kappa, opts.include_own_partner)
    bins = first_fit_rows(ipd, bridged, target / ref_r**prm.kappa)
    chosen = bins[_heaviest(bins, w)]
    return RowResult(chosen, iterative_power_rows(geo, chosen, opts.m), ref_r, target)


def first_fit_isl_rows(
    geo: LinkGeometry, rows: Sequence[int], power: np.ndarray
) -> tuple[list[list[int]], list[int]]:
    """First-fit into SINR-feasible bins under the fixed per-row ``power``.

    Rows that cannot decode even alone go to the reject list.
    """
    bins: list[list[int]] = []
    rejected: list[int] = []
    sigma_xi = geo.params.sigma * geo.params.xi
    for k in rows:
        if power[k] * geo.own_gain[k] < sigma_xi:
            rejected.append(k)
            continue
        for b in bins:
            trial = np.array(b + [k])
            if geo.feasible_rows(trial, power[trial]):
                b.append(k)
                break
        else:
            bins.append([k])
    return bins, rejected


def power_band_rows(rows: Sequence[int], power: np.ndarray, pmin: float, rho: float, w: np.ndarray) -> list[int]:
    """Heaviest dyadic power band ``[pmin 2^j, pmin 2^(j+1))`` among ``rows``."""
    n_bands = max(1, math.ceil(math.log2(rho) - 1e-12))
    bands: dict[int, list[int]] = {}
    for k in rows:
        j = math.floor(math.log2(power[k] / pmin) + 1e-12)
        bands.setdefault(min(max(j, 0), n_bands - 1), []).append(k)
    keys = sorted(bands)
    return bands[keys[_heaviest([bands[j] for j in keys], w)]]


def algorithm3_rows(
    geo: LinkGeometry, w: np.ndarray, power: np.ndarray, opts: SchedulerOptions, pmin: float | None = None,
    pmax: float | None = None,
) -> RowResult:
    rows = _candidates(geo, w, opts)
    if not rows:
        return RowResult([], np.empty(0))
    bridged = bridge_rows(geo, rows, w, geo.params.alpha)
    pmin = float(power.min()) if pmin is None else pmin
    pmax = float(power.max()) if pmax is None else pmax
    rho = pmax / pmin
    if rho > opts.rho_threshold:
        bridged = power_band_rows(bridged, power, pmin, rho, w)
    bins, rejected = first_fit_isl_rows(geo, _by_weight(bridged, w, geo.ids), power)
    if not bins:
        return RowResult([], np.empty(0), rejected=rejected)
    chosen = bins[_heaviest(bins, w)]
    return RowResult(chosen, power[chosen], rejected=rejected)


def greedy_rows(geo: LinkGeometry, w: np.ndarray, power: np.ndarray, opts: SchedulerOptions) -> RowResult:
    """Heaviest first; drop any link whose addition breaks feasibility."""
    chosen: list[int] = []
    for k in _by_weight(_candidates(geo, w, opts), w, geo.ids):
        trial = np.array(chosen + [k])
        if geo.feasible_rows(trial, power[trial]):
            chosen.append(k)
    return RowResult(chosen, power[chosen])


def _cardinality_greedy(geo: LinkGeometry, rows: Sequence[int], power: np.ndarray) -> list[int]:
    chosen: list[int] = []
    for k in sorted(rows, key=lambda k: (geo.length[k], geo.ids[k])):
        trial = np.array(chosen + [k])
        if geo.feasible_rows(trial, power[trial]):
            chosen.append(k)
    return chosen


def weight_rows(geo: LinkGeometry, w: np.ndarray, power: np.ndarray, opts: SchedulerOptions) -> RowResult:
    """Prune light links, band the rest by weight, best band's independent set."""
    rows = _candidates(geo, w, opts)
    if not rows:
        return RowResult([], np.empty(0))
    w_max = max(w[k] for k in rows)
    survivors = [k for k in rows if w[k] >= w_max / (2 * len(rows)) * (1 - _TIE_REL)]
    w_min = min(w[k] for k in survivors)
    n_bands = max(1, math.ceil(math.log2(w_max / w_min) - 1e-12))
    bands: dict[int, list[int]] = {}
    for k in survivors:
        j = math.floor(math.log2(w[k] / w_min) + 1e-12)
        bands.setdefault(min(j, n_bands - 1), []).append(k)
    sets = [_cardinality_greedy(geo, bands[j], power) for j in sorted(bands)]
    chosen = sets[_heaviest(sets, w)]
    return RowResult(chosen, power[chosen])


def exact_rows(geo: LinkGeometry, w: np.ndarray, power: np.ndarray, opts: SchedulerOptions) -> RowResult:
    """Maximum-weight feasible subset by branch and bound.

    Feasibility is monotone under removal, so an infeasible partial set
    prunes its whole subtree.  Ties go to the lexicographically smallest id
    tuple.
    """
    rows = sorted(_candidates(geo, w, opts), key=lambda k: geo.ids[k])
    n = len(rows)
    if n > opts.exact_cap:
        raise ModelError(f"exact_mwisl is capped at {opts.exact_cap} links, got {n}")
    wr = [float(w[k]) for k in rows]
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + wr[i]
    best_w = -math.inf
    best: tuple[int, ...] = ()
    chosen: list[int] = []

    def visit(i: int, total: float) -> None:
        nonlocal best_w, best
        tol = _TIE_REL * max(1.0, abs(best_w)) if best_w > -math.inf else 0.0
        if total + suffix[i] < best_w - tol:
            return
        if i == n:
            cand = tuple(chosen)
            if total > best_w + tol or (total >= best_w - tol and cand < best):
                best_w, best = total, cand
            return
        trial = np.array([rows[j] for j in chosen] + [rows[i]])
        if geo.feasible_rows(trial, power[trial]):
            chosen.append(i)
            visit(i + 1, total + wr[i])
            chosen.pop()
        visit(i + 1, total)

    visit(0, 0.0)
    picked = [rows[j] for j in best]
    return RowResult(picked, power[picked])


# fixed-power policies share one signature; algorithm2 ignores the powers
RowPolicy = Callable[[LinkGeometry, np.ndarray, np.ndarray, SchedulerOptions], RowResult]

POLICIES: dict[str, RowPolicy] = {
    "alg2": lambda geo, w, power, opts: algorithm2_rows(geo, w, opts),
    "alg3": algorithm3_rows,
    "greedy": greedy_rows,
    "weight": weight_rows,
    "exact": exact_rows,
}

ADJUSTABLE = {"alg2"}


# ---------------------------------------------------------------- link level


def _weights_vector(geo: LinkGeometry, weights: Mapping[int, float]) -> np.ndarray:
    return np.array([float(weights.get(l.id, 0.0)) for l in geo.links])


def _power_vector(geo: LinkGeometry, powers: PowerAssignment | Mapping[int, float]) -> np.ndarray:
    p = powers.powers if isinstance(powers, PowerAssignment) else powers
    return np.array([float(p[l.id]) for l in geo.links])


def to_schedule(geo: LinkGeometry, res: RowResult, w: np.ndarray, pmin=None, pmax=None) -> Schedule:
    ids = tuple(int(geo.ids[k]) for k in res.rows)
    powers = {i: float(p) for i, p in zip(ids, res.power)}
    pa = PowerAssignment(powers, pmin, pmax) if (powers and pmin is not None) else PowerAssignment(powers)
    return Schedule(
        active=ids,
        powers=pa,
        total_weight=float(sum(w[k] for k in res.rows)),
        reference_r=res.reference_r,
        phi=res.phi,
        rejected=tuple(int(geo.ids[k]) for k in res.rejected),
    )


def length_group_preprocess(
    links: Sequence[Link], weights: Mapping[int, float], g: float, r_min: float, r_max: float | None = None
) -> list[Link]:
    length = np.array([l.length for l in links])
    w = np.array([float(weights[l.id]) for l in links])
    return [links[k] for k in length_group_rows(length, w, range(len(links)), g, r_min, r_max)]


def algorithm2(
    links: Sequence[Link],
    weights: Mapping[int, float],
    params: PhysicalParams,
    options: SchedulerOptions | None = None,
) -> Schedule:
    """Adjustable-power schedule; powers come from the iterative assignment."""
    geo = LinkGeometry(links, params)
    w = _weights_vector(geo, weights)
    return to_schedule(geo, algorithm2_rows(geo, w, options or SchedulerOptions()), w)


def first_fit_isl_refine(
    links: Sequence[Link],
    powers: PowerAssignment | Mapping[int, float],
    params: PhysicalParams,
    weights: Mapping[int, float] | None = None,
) -> tuple[list[list[Link]], list[Link]]:
    """Feasible bins in first-fit order (heaviest first when ``weights`` is given), plus rejects."""
    geo = LinkGeometry(links, params)
    p = _power_vector(geo, powers)
    if weights is None:
        order = list(range(len(links)))
    else:
        order = _by_weight(range(len(links)), _weights_vector(geo, weights), geo.ids)
    bins, rejected = first_fit_isl_rows(geo, order, p)
    return [[geo.links[k] for k in b] for b in bins], [geo.links[k] for k in rejected]


def fixed_policy(name: str, links, weights, powers, params, options) -> Schedule:
    geo = LinkGeometry(links, params)
    w = _weights_vector(geo, weights)
    p = _power_vector(geo, powers)
    opts = options or SchedulerOptions()
    if name == "alg3" and isinstance(powers, PowerAssignment):
        res = algorithm3_rows(geo, w, p, opts, powers.pmin, powers.pmax)
    else:
        res = POLICIES[name](geo, w, p, opts)
    return to_schedule(geo, res, w)


def algorithm3(links, weights, powers, params, options: SchedulerOptions | None = None) -> Schedule:
    """Fixed-power schedule: bridge, optional power banding, first-fit ISL refinement."""
    return fixed_policy("alg3", links, weights, powers, params, options)


def baseline_greedy(links, weights, powers, params, options: SchedulerOptions | None = None) -> Schedule:
    return fixed_policy("greedy", links, weights, powers, params, options)


def baseline_weight(links, weights, powers, params, options: SchedulerOptions | None = None) -> Schedule:
    return fixed_policy("weight", links, weights, powers, params, options)


def exact_mwisl(links, weights, powers, params, options: SchedulerOptions | None = None) -> Schedule:
    if powers is None:
        raise ModelError("exact_mwisl needs fixed powers; joint power search is unsupported")
    return fixed_policy("exact", links, weights, powers, params, options)
