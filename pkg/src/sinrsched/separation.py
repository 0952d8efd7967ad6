"""Distance-separation calculus over the node set of a link set.

The separation value of a link set is the largest, over its nodes ``v``,
of ``sum_w (R / d(w, v))**kappa``.  A node never counts itself, and by
default the other endpoint of its own link is ignored too
(``include_own_partner=False``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sinrsched.model import Link, LinkGeometry, ModelError, PhysicalParams, shares_node

# packing constant of the Euclidean plane (doubling dimension 2)
PLANE_PACKING_C = math.sqrt(3.0) * math.pi / 6.0


@dataclass(frozen=True)
class SeparationReport:
    phi: float
    worst_node: int | None
    reference_r: float


def _geometry(links: Sequence[Link], kappa: float) -> LinkGeometry:
    # only distances are used here; eta/xi/sigma are irrelevant
    return LinkGeometry(links, PhysicalParams(kappa=kappa))


def separation_value(
    links: Sequence[Link],
    reference_r: float | None = None,
    kappa: float = 3.0,
    include_own_partner: bool = False,
) -> SeparationReport:
    links = list(links)
    if reference_r is None:
        reference_r = max((l.length for l in links), default=0.0)
    if links and reference_r <= 0:
        raise ModelError("reference_r must be positive")
    if not links:
        return SeparationReport(0.0, None, reference_r)
    if shares_node(links):
        raise ModelError("separation requires node-disjoint links")
    geo = _geometry(links, kappa)
    ipd = geo.inverse_power_distance(kappa, include_own_partner)
    if np.isinf(ipd).any():
        raise ModelError("two distinct nodes share a position; separation sum is infinite")
    sums = reference_r**kappa * ipd.sum(axis=1)
    worst = int(np.argmax(sums))
    return SeparationReport(float(sums[worst]), int(geo.node_ids[worst]), reference_r)


def lemma1_bound(theta: float, kappa: float) -> float:
    """Separation bound for node sets whose pairwise distances are at least ``theta * R``."""
    if kappa <= 2:
        raise ModelError("kappa must exceed the doubling dimension 2")
    if theta <= 0:
        raise ModelError("theta must be positive")
    return 2 ** (2 * kappa + 1) * math.sqrt(3) * math.pi * kappa / (6 * (kappa - 2) * theta**kappa)


def phi_star(sigma: float, alpha: float, kappa: float) -> float:
    """Separation target under which power scaling ``m = 2`` is feasible."""
    if alpha <= 1:
        raise ModelError("alpha must exceed 1")
    beta = (2 * alpha - 1) / (alpha - 1)
    return 1.0 / (4 * beta**kappa * sigma * (sigma + 1))


def _first_fit_pass(ipd: np.ndarray, rows: Sequence[int], budget: float) -> list[list[int]]:
    """Put each row in the first bin where both its endpoints see at most ``budget``."""
    bins: list[list[int]] = []
    incoming: list[np.ndarray] = []  # per bin: summed effect on every node slot
    for k in rows:
        a, b = 2 * k, 2 * k + 1
        for members, acc in zip(bins, incoming):
            if acc[a] <= budget and acc[b] <= budget:
                members.append(k)
                acc += ipd[a] + ipd[b]
                break
        else:
            bins.append([k])
            incoming.append(ipd[a] + ipd[b])
    return bins


def first_fit_rows(ipd: np.ndarray, rows: Sequence[int], phi2: float) -> list[list[int]]:
    """Two-pass first fit on geometry rows.

    ``phi2`` is in the units of ``ipd``: pass ``phi2 / R**kappa`` with a raw
    inverse-distance matrix, or ``phi2`` with one already scaled by ``R**kappa``.
    """
    half = phi2 / 2.0
    out: list[list[int]] = []
    for coarse in _first_fit_pass(ipd, list(rows), half):
        # members of the reverse pass come back reversed; restore the input order
        for fine in _first_fit_pass(ipd, coarse[::-1], half):
            out.append(fine[::-1])
    return out


def first_fit_partition(
    links: Sequence[Link],
    phi2: float,
    reference_r: float | None = None,
    kappa: float = 3.0,
    include_own_partner: bool = False,
) -> list[list[Link]]:
    """Split ``links`` into sets whose separation value is at most ``phi2``.

    A forward pass bounds, at each node, the contribution of links placed
    before it; a reverse pass inside every bin bounds the contribution of
    links placed after it.  Each pass uses half of ``phi2``.
    """
    if phi2 <= 0:
        raise ModelError("phi2 must be positive")
    links = list(links)
    if not links:
        return []
    if shares_node(links):
        raise ModelError("first-fit partition requires node-disjoint links")
    if reference_r is None:
        reference_r = max(l.length for l in links)
    geo = _geometry(links, kappa)
    ipd = reference_r**kappa * geo.inverse_power_distance(kappa, include_own_partner)
    bins = first_fit_rows(ipd, range(len(links)), phi2)
    return [[links[k] for k in b] for b in bins]


def partition_count_bound(phi1: float, phi2: float) -> int:
    return math.ceil(2 * phi1 / phi2) ** 2 if phi1 > 0 else 1
