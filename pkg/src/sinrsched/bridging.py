"""Links to sender-centred disks and back, via a weighted independent set of disks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from sinrsched.model import Link, LinkGeometry, ModelError, Point, distance
from sinrsched.separation import PLANE_PACKING_C

EXACT_MWISD_CAP = 20
# sums that differ only by float rounding count as ties
_TIE_REL = 1e-9


@dataclass(frozen=True)
class WeightedDisk:
    center: Point
    radius: float
    weight: float
    link_ref: int
    reverse: bool = False  # second disk of a bidirectional link, centred at the receiver


def disks_intersect(a: WeightedDisk, b: WeightedDisk) -> bool:
    return distance(a.center, b.center) < a.radius + b.radius


def links_to_disks(
    links: Sequence[Link],
    weights: Mapping[int, float] | Mapping[int, tuple[float, float]],
    alpha: float = 2.0,
    bidirectional: bool = False,
) -> list[WeightedDisk]:
    """One disk of radius ``alpha * length`` per link, centred at the sender.

    With ``bidirectional`` each link stands for both directions and
    ``weights[id]`` is a pair ``(w_sender, w_receiver)``; a second disk of the
    same radius is centred at the receiver.
    """
    if alpha <= 1:
        raise ModelError("alpha must exceed 1")
    disks = []
    for link in links:
        radius = alpha * link.length
        if bidirectional:
            w_u, w_v = weights[link.id]
            disks.append(WeightedDisk(link.src, radius, float(w_u), link.id))
            disks.append(WeightedDisk(link.dst, radius, float(w_v), link.id, reverse=True))
        else:
            disks.append(WeightedDisk(link.src, radius, float(weights[link.id]), link.id))
    return disks


def _disk_key(disk: WeightedDisk) -> tuple:
    return (-disk.weight, disk.link_ref, disk.reverse)


def greedy_mwisd(disks: Sequence[WeightedDisk]) -> list[WeightedDisk]:
    """Heaviest-first maximal independent set of disks."""
    chosen: list[WeightedDisk] = []
    for disk in sorted(disks, key=_disk_key):
        if all(not disks_intersect(disk, other) for other in chosen):
            chosen.append(disk)
    return chosen


def exact_mwisd(disks: Sequence[WeightedDisk], cap: int = EXACT_MWISD_CAP) -> list[WeightedDisk]:
    """Maximum-weight independent set of disks by branch and bound.

    Among optimal sets the one with the lexicographically smallest sorted
    ``(link_ref, reverse)`` tuple wins.
    """
    n = len(disks)
    if n > cap:
        raise ModelError(f"exact_mwisd is capped at {cap} disks, got {n}")
    if n == 0:
        return []
    order = sorted(range(n), key=lambda k: (disks[k].link_ref, disks[k].reverse))
    ds = [disks[k] for k in order]
    conflict = [[disks_intersect(ds[i], ds[j]) and i != j for j in range(n)] for i in range(n)]
    w = [d.weight for d in ds]
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + max(w[i], 0.0)

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
            # indices are in key order, so tuple order is the lexicographic id order
            if total > best_w + tol or (total >= best_w - tol and cand < best):
                best_w, best = total, cand
            return
        if all(not conflict[i][j] for j in chosen):
            chosen.append(i)
            visit(i + 1, total + w[i])
            chosen.pop()
        visit(i + 1, total)

    visit(0, 0.0)
    return [ds[k] for k in best]


def greedy_mwisd_rows(conflict: np.ndarray, rows: Sequence[int], weight: np.ndarray, ids: np.ndarray) -> list[int]:
    """Index-level greedy on a precomputed conflict matrix (used by the schedulers)."""
    order = sorted(rows, key=lambda k: (-weight[k], ids[k]))
    chosen: list[int] = []
    blocked = np.zeros(len(conflict), dtype=bool)
    for k in order:
        if not blocked[k]:
            chosen.append(k)
            blocked |= conflict[k]
    return chosen


def bridge(
    links: Sequence[Link],
    weights: Mapping[int, float],
    alpha: float = 2.0,
    solver: str = "greedy",
) -> list[Link]:
    """Links whose disks the chosen solver keeps, heaviest first.

    Any two returned links satisfy ``d(s_i, s_j) >= alpha * (len_i + len_j)``.
    """
    disks = links_to_disks(links, weights, alpha)
    if solver == "greedy":
        picked = greedy_mwisd(disks)
    elif solver == "exact":
        picked = exact_mwisd(disks)
    else:
        raise ValueError(f"unknown MWISD solver {solver!r}")
    by_id = {l.id: l for l in links}
    out = [by_id[d.link_ref] for d in picked]
    out.sort(key=lambda l: (-weights[l.id], l.id))
    return out


def bridge_rows(geo: LinkGeometry, rows: Sequence[int], weight: np.ndarray, alpha: float) -> list[int]:
    return greedy_mwisd_rows(geo.disk_conflicts(alpha), rows, weight, geo.ids)


def omega_bound(sigma: float, kappa: float, alpha: float, delta: float) -> int:
    """Upper bound on how many independent disk sets a feasible link set splits into."""
    if not 0 < delta <= 1:
        raise ModelError("delta must lie in (0, 1]")
    if alpha <= 1:
        raise ModelError("alpha must exceed 1")
    lead = math.ceil(2 * 3**kappa / sigma) ** 2
    neighbours = math.ceil(PLANE_PACKING_C * (4 * alpha / delta + 1) ** 2)
    return lead * neighbours


def sender_separated(links: Sequence[Link], alpha: float) -> bool:
    for i, a in enumerate(links):
        for b in links[i + 1 :]:
            if distance(a.src, b.src) < alpha * (a.length + b.length):
                return False
    return True

