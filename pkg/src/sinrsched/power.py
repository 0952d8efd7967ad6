"""Fixed and adjustable power assignments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from sinrsched.model import Link, LinkGeometry, ModelError, PhysicalParams, PowerAssignment, distance

FIXED_KINDS = ("uniform", "linear", "mean")

# relative slack for float ties in the monotone/sub-linear comparisons
_REL = 1e-12


@dataclass(frozen=True)
class MWindow:
    lo: float
    hi: float

    def __contains__(self, m: float) -> bool:
        return self.lo <= m <= self.hi


def fixed_power(length: float, kind: str, scale: float, kappa: float) -> float:
    if kind == "uniform":
        return scale
    if kind == "linear":
        return scale * length**kappa
    if kind == "mean":
        return scale * length ** (kappa / 2)
    raise ValueError(f"unknown fixed power kind {kind!r}; expected one of {FIXED_KINDS}")


def assign_fixed(
    links: Sequence[Link],
    kind: str,
    scale: float,
    params: PhysicalParams,
    r_min: float | None = None,
) -> PowerAssignment:
    """Uniform (``scale``), linear (``scale*d^k``) or mean (``scale*d^(k/2)``) powers.

    ``r_min`` defaults to the shortest link; the smallest assigned power must
    reach the decodability floor for a link of that length.
    """
    powers = {l.id: fixed_power(l.length, kind, scale, params.kappa) for l in links}
    if not powers:
        return PowerAssignment({})
    if r_min is None:
        r_min = min(l.length for l in links)
    floor = params.power_floor(r_min)
    pmin = min(powers.values())
    if pmin < floor * (1 - _REL):
        raise ModelError(f"P_min below decodability floor ({pmin:.6g} < {floor:.6g})")
    return PowerAssignment(powers)


def check_monotone_sublinear(links: Sequence[Link], powers: Mapping[int, float] | PowerAssignment, kappa: float) -> bool:
    p = powers.powers if isinstance(powers, PowerAssignment) else powers
    for a in links:
        for b in links:
            if a.id == b.id or a.length < b.length:
                continue
            pa, pb = p[a.id], p[b.id]
            if pa < pb * (1 - _REL):
                return False
            if pa / a.length**kappa > pb / b.length**kappa * (1 + _REL):
                return False
    return True


def m_window(phi: float, sigma: float, alpha: float, kappa: float) -> MWindow | None:
    """Closed interval of power scalings ``m`` that keep a separated set feasible.

    Returns ``None`` when the separation is too weak for any ``m``.
    """
    if phi <= 0:
        raise ModelError("phi must be positive")
    beta = (2 * alpha - 1) / (alpha - 1)
    k = beta**kappa * phi * sigma * (sigma + 1)
    disc = 1 - 4 * k
    if disc < -1e-12:
        return None
    # a discriminant within rounding of zero is a double root; sqrt would amplify the noise
    root = math.sqrt(disc) if disc > 1e-12 else 0.0
    return MWindow((1 - root) / (2 * k), (1 + root) / (2 * k))


def iterative_power_assign(ordered_links: Sequence[Link], m: float, params: PhysicalParams) -> PowerAssignment:
    """Each link pays ``m`` times the noise plus interference of the links before it."""
    kappa, sigma = params.kappa, params.sigma
    noise = params.xi / params.eta
    powers: dict[int, float] = {}
    done: list[Link] = []
    for link in ordered_links:
        seen = sum(powers[o.id] / distance(o.src, link.dst) ** kappa for o in done)
        powers[link.id] = m * sigma * link.length**kappa * (seen + noise)
        done.append(link)
    return PowerAssignment(powers)


def iterative_power_rows(geo: LinkGeometry, rows: Sequence[int], m: float) -> np.ndarray:
    """Row-level version of :func:`iterative_power_assign`; powers follow ``rows``."""
    prm = geo.params
    noise = prm.xi / prm.eta
    rows = np.asarray(rows, dtype=np.int64)
    inv = geo.sd[np.ix_(rows, rows)] ** (-prm.kappa)
    own = geo.length[rows] ** prm.kappa
    out = np.empty(len(rows))
    for i in range(len(rows)):
        out[i] = m * prm.sigma * own[i] * (out[:i] @ inv[:i, i] + noise)
    return out


def power_ceiling(
    m: float, sigma: float, xi: float, eta: float, r_max: float, phi: float, kappa: float = 3.0
) -> float:
    """Largest power the iterative assignment can emit on a compliant set."""
    damp = 1 - m * sigma * phi
    if damp <= 0:
        raise ModelError("power ceiling undefined: m * sigma * phi >= 1")
    return m * sigma * xi * r_max**kappa / (damp * eta)
