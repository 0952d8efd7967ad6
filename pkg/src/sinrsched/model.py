"""Geometric and physical primitives of the SINR interference model.

Everything in here is a pure function of its arguments.  ``LinkGeometry``
caches the pairwise matrices for a fixed link population so the per-slot
schedulers never recompute distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

Point = tuple[float, float]


class ModelError(ValueError):
    """Raised for degenerate geometry or physically meaningless input."""


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Node:
    id: int
    position: Point


@dataclass(frozen=True)
class Link:
    """Directed link from ``sender`` to ``receiver``.

    Endpoint coordinates travel with the link so the SINR helpers do not
    need a topology lookup.
    """

    id: int
    sender: int
    receiver: int
    src: Point
    dst: Point
    length: float = field(init=False)

    def __post_init__(self) -> None:
        if self.sender == self.receiver:
            raise ModelError(f"link {self.id}: sender and receiver are the same node")
        object.__setattr__(self, "src", (float(self.src[0]), float(self.src[1])))
        object.__setattr__(self, "dst", (float(self.dst[0]), float(self.dst[1])))
        object.__setattr__(self, "length", distance(self.src, self.dst))

    def nodes(self) -> tuple[int, int]:
        return (self.sender, self.receiver)


@dataclass(frozen=True)
class PhysicalParams:
    eta: float = 1.0
    kappa: float = 3.0
    xi: float = 0.01
    sigma: float = 10.0
    alpha: float = 2.0

    def __post_init__(self) -> None:
        if not 2.0 < self.kappa < 5.0:
            raise ModelError(f"path-loss exponent must lie in (2, 5), got {self.kappa}")
        for name in ("eta", "xi", "sigma"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be positive")
        if self.alpha <= 1.0:
            raise ModelError(f"alpha must exceed 1, got {self.alpha}")

    @property
    def beta(self) -> float:
        return (2.0 * self.alpha - 1.0) / (self.alpha - 1.0)

    def power_floor(self, r_min: float) -> float:
        """Smallest power that lets a link of length ``r_min`` decode in silence."""
        return self.sigma * self.xi * r_min**self.kappa / self.eta


@dataclass
class Topology:
    nodes: list[Node]
    links: list[Link]
    r_min: float
    r_max: float
    area: float | None = None

    def __post_init__(self) -> None:
        if self.r_min <= 0:
            raise ModelError("r_min must be positive")
        if self.r_min > self.r_max:
            raise ModelError(f"r_min={self.r_min} exceeds r_max={self.r_max}")
        seen: set[int] = set()
        for node in self.nodes:
            if node.id in seen:
                raise ModelError(f"duplicate node id {node.id}")
            seen.add(node.id)
        link_ids: set[int] = set()
        for link in self.links:
            if link.id in link_ids:
                raise ModelError(f"duplicate link id {link.id}")
            link_ids.add(link.id)
            for nid in link.nodes():
                if nid not in seen:
                    raise ModelError(f"link {link.id} references unknown node {nid}")
            # relative slack absorbs the round trip through text formats
            if not (self.r_min * (1 - 1e-12) <= link.length <= self.r_max * (1 + 1e-12)):
                raise ModelError(
                    f"link {link.id} has length {link.length:.6g} outside "
                    f"[{self.r_min}, {self.r_max}]"
                )

    @classmethod
    def build(
        cls,
        nodes: Iterable[Node],
        link_specs: Iterable[tuple[int, int, int]],
        r_min: float,
        r_max: float,
        area: float | None = None,
    ) -> "Topology":
        """Create a topology from nodes and ``(link_id, sender_id, receiver_id)`` triples."""
        nodes = list(nodes)
        pos = {n.id: n.position for n in nodes}
        links = []
        for lid, sid, tid in link_specs:
            for nid in (sid, tid):
                if nid not in pos:
                    raise ModelError(f"link {lid} references unknown node {nid}")
            links.append(Link(lid, sid, tid, pos[sid], pos[tid]))
        return cls(nodes, links, r_min, r_max, area)

    @property
    def delta(self) -> float:
        return self.r_min / self.r_max

    @property
    def length_diversity(self) -> float:
        return math.log2(self.r_max / self.r_min)

    def link(self, link_id: int) -> Link:
        for link in self.links:
            if link.id == link_id:
                return link
        raise KeyError(link_id)


@dataclass
class PowerAssignment:
    """Per-link transmit powers.

    ``pmin``/``pmax`` default to the extreme assigned values; fixed
    assignments record the bounds of the whole population instead.
    """

    powers: dict[int, float]
    pmin: float | None = None
    pmax: float | None = None

    def __post_init__(self) -> None:
        values = list(self.powers.values())
        if self.pmin is None:
            self.pmin = min(values) if values else 0.0
        if self.pmax is None:
            self.pmax = max(values) if values else 0.0
        for lid, p in self.powers.items():
            if not (self.pmin <= p <= self.pmax):
                raise ModelError(f"power of link {lid} outside [{self.pmin}, {self.pmax}]")

    @property
    def rho(self) -> float:
        if not self.pmin:
            return 1.0
        return self.pmax / self.pmin

    def __getitem__(self, link_id: int) -> float:
        return self.powers[link_id]

    def restrict(self, link_ids: Iterable[int]) -> "PowerAssignment":
        sub = {i: self.powers[i] for i in link_ids}
        return PowerAssignment(sub, self.pmin, self.pmax) if sub else PowerAssignment({})


def path_gain(sender: Point, receiver: Point, params: PhysicalParams) -> float:
    d = distance(sender, receiver)
    if d == 0.0:
        raise ModelError("degenerate link: zero distance between sender and receiver")
    return min(params.eta * d ** (-params.kappa), 1.0)


def _cross_gain(sender: Point, receiver: Point, params: PhysicalParams) -> float:
    # co-located interferer: gain saturates at 1
    d = distance(sender, receiver)
    if d == 0.0:
        return 1.0
    return min(params.eta * d ** (-params.kappa), 1.0)


def _powers_of(powers: PowerAssignment | Mapping[int, float]) -> Mapping[int, float]:
    return powers.powers if isinstance(powers, PowerAssignment) else powers


def sinr(
    link: Link,
    active: Iterable[Link],
    powers: PowerAssignment | Mapping[int, float],
    params: PhysicalParams,
) -> float:
    """SINR at ``link``'s receiver while every link in ``active`` transmits.

    ``link`` itself is skipped if it appears in ``active``.
    """
    p = _powers_of(powers)
    signal = p[link.id] * path_gain(link.src, link.dst, params)
    interference = 0.0
    for other in active:
        if other.id == link.id:
            continue
        interference += p[other.id] * _cross_gain(other.src, link.dst, params)
    return signal / (interference + params.xi)


def shares_node(links: Sequence[Link]) -> bool:
    seen: set[int] = set()
    for link in links:
        for nid in link.nodes():
            if nid in seen:
                return True
            seen.add(nid)
    return False


def check_feasible(
    links: Iterable[Link],
    powers: PowerAssignment | Mapping[int, float],
    params: PhysicalParams,
    node_disjoint: bool = True,
) -> bool:
    """True iff every link meets the SINR threshold with all of ``links`` active.

    With ``node_disjoint`` (the default) a set whose links share a node is
    rejected outright, since a single radio cannot serve two links at once.
    """
    links = list(links)
    if node_disjoint and shares_node(links):
        return False
    return all(sinr(link, links, powers, params) >= params.sigma for link in links)


def noise_margin(link: Link, powers: PowerAssignment | Mapping[int, float], params: PhysicalParams) -> float:
    """The factor c_i = sigma / (1 - sigma*xi / received_signal)."""
    received = _powers_of(powers)[link.id] * path_gain(link.src, link.dst, params)
    if received <= params.sigma * params.xi:
        raise ModelError(f"link {link.id} cannot decode even in isolation")
    return params.sigma / (1.0 - params.sigma * params.xi / received)


def max_noise_margin(links: Iterable[Link], powers, params: PhysicalParams) -> float:
    """c^up over ``links``; callers compare it against their ``h * sigma`` budget."""
    return max((noise_margin(link, powers, params) for link in links), default=0.0)


def affectance(
    link: Link,
    others: Iterable[Link],
    powers: PowerAssignment | Mapping[int, float],
    params: PhysicalParams,
) -> float:
    p = _powers_of(powers)
    c = noise_margin(link, p, params)
    own = p[link.id] * path_gain(link.src, link.dst, params)
    total = 0.0
    for other in others:
        if other.id == link.id:
            continue
        total += p[other.id] * _cross_gain(other.src, link.dst, params) / own
    return c * total


class LinkGeometry:
    """Cached pairwise quantities for a fixed, ordered link population.

    Row ``k`` everywhere refers to ``links[k]``.  ``gain[j, i]`` is the path
    gain from sender ``j`` to receiver ``i``.
    """

    def __init__(self, links: Sequence[Link], params: PhysicalParams):
        self.links = list(links)
        self.params = params
        self.index = {link.id: k for k, link in enumerate(self.links)}
        n = len(self.links)
        self.ids = np.array([l.id for l in self.links], dtype=np.int64)
        self.src = np.array([l.src for l in self.links], dtype=float).reshape(n, 2)
        self.dst = np.array([l.dst for l in self.links], dtype=float).reshape(n, 2)
        self.length = np.array([l.length for l in self.links], dtype=float)
        if n and np.any(self.length == 0):
            raise ModelError("degenerate link: zero length")
        # sender j -> receiver i distance
        self.sd = np.linalg.norm(self.src[:, None, :] - self.dst[None, :, :], axis=2)
        self.ss = np.linalg.norm(self.src[:, None, :] - self.src[None, :, :], axis=2)
        with np.errstate(divide="ignore"):
            self.gain = np.minimum(params.eta * self.sd ** (-params.kappa), 1.0)
        self.own_gain = np.diag(self.gain).copy()
        node_ids = [nid for l in self.links for nid in l.nodes()]
        self.node_ids = np.array(node_ids, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.links)

    def rows(self, link_ids: Iterable[int]) -> np.ndarray:
        return np.array([self.index[i] for i in link_ids], dtype=np.int64)

    @cached_property
    def slot_pos(self) -> np.ndarray:
        """Node positions in slot order: sender of row k at 2k, receiver at 2k+1."""
        n = len(self.links)
        pos = np.empty((2 * n, 2))
        pos[0::2] = self.src
        pos[1::2] = self.dst
        return pos

    @cached_property
    def slot_dist(self) -> np.ndarray:
        pos = self.slot_pos
        return np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)

    def inverse_power_distance(self, kappa: float, include_own_partner: bool = False) -> np.ndarray:
        """Matrix of 1/d^kappa between node slots, self terms zeroed.

        Distinct slots at the same position get ``inf``.
        """
        key = (kappa, include_own_partner)
        cache = self.__dict__.setdefault("_ipd_cache", {})
        if key not in cache:
            d = self.slot_dist
            with np.errstate(divide="ignore"):
                m = d ** (-kappa)
            np.fill_diagonal(m, 0.0)
            if not include_own_partner:
                k = np.arange(len(self.links))
                m[2 * k, 2 * k + 1] = 0.0
                m[2 * k + 1, 2 * k] = 0.0
            cache[key] = m
        return cache[key]

    def disk_conflicts(self, alpha: float) -> np.ndarray:
        """Boolean matrix: sender disks of radius alpha*length overlap (tangency excluded)."""
        cache = self.__dict__.setdefault("_conflict_cache", {})
        if alpha not in cache:
            reach = alpha * (self.length[:, None] + self.length[None, :])
            c = self.ss < reach
            np.fill_diagonal(c, False)
            cache[alpha] = c
        return cache[alpha]

    def sinr_rows(self, rows: np.ndarray, power: np.ndarray) -> np.ndarray:
        """SINR of each row in ``rows`` when exactly those rows transmit at ``power``."""
        g = self.gain[np.ix_(rows, rows)]
        signal = power * np.diag(g)
        interference = power @ g - signal
        return signal / (interference + self.params.xi)

    def feasible_rows(self, rows: np.ndarray, power: np.ndarray, node_disjoint: bool = True) -> bool:
        if len(rows) == 0:
            return True
        if node_disjoint:
            nodes = np.concatenate([self.node_ids[2 * rows], self.node_ids[2 * rows + 1]])
            if len(np.unique(nodes)) != len(nodes):
                return False
        return bool(np.all(self.sinr_rows(rows, power) >= self.params.sigma))
