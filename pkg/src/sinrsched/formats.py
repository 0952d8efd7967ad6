"""Plain-text file formats.

Topology::

    # comment
    nodes 4
    links 2
    r 1.0 5.0
    area 100.0          (optional)
    N <id> <x> <y>
    L <id> <sender_id> <receiver_id>

Trace CSV columns: ``slot,total_backlog,scheduled_count,max_power``.

Weights: ``<link_id> <weight>`` per line.  Schedules: one link id per line,
optionally ``P <link_id> <watts>`` lines carrying the powers.

Floats are written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from sinrsched.model import ModelError, Node, Topology
from sinrsched.simulator import BacklogTrace

TRACE_HEADER = "slot,total_backlog,scheduled_count,max_power"


class FormatError(ValueError):
    def __init__(self, lineno: int | None, message: str):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)
        self.lineno = lineno


def _records(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _num(tok: str, lineno: int, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise FormatError(lineno, f"expected a number, got {tok!r}") from None


def parse_topology(text: str) -> Topology:
    header: dict[str, tuple] = {}
    nodes: dict[int, Node] = {}
    links: list[tuple[int, int, int, int]] = []  # id, sender, receiver, lineno
    link_ids: set[int] = set()
    for lineno, tok in _records(text):
        key = tok[0]
        if key in ("nodes", "links", "area") and len(tok) == 2:
            header[key] = (_num(tok[1], lineno, int if key != "area" else float), lineno)
        elif key == "r" and len(tok) == 3:
            header["r"] = ((_num(tok[1], lineno), _num(tok[2], lineno)), lineno)
        elif key == "N" and len(tok) == 4:
            nid = _num(tok[1], lineno, int)
            if nid in nodes:
                raise FormatError(lineno, f"duplicate node id {nid}")
            nodes[nid] = Node(nid, (_num(tok[2], lineno), _num(tok[3], lineno)))
        elif key == "L" and len(tok) == 4:
            lid, sid, tid = (_num(t, lineno, int) for t in tok[1:])
            if lid in link_ids:
                raise FormatError(lineno, f"duplicate link id {lid}")
            link_ids.add(lid)
            links.append((lid, sid, tid, lineno))
        else:
            raise FormatError(lineno, f"unrecognised record {' '.join(tok)!r}")
    if "r" not in header:
        raise FormatError(None, "missing 'r <rMin> <rMax>' header")
    (r_min, r_max), r_line = header["r"]
    for key, count in (("nodes", len(nodes)), ("links", len(links))):
        if key in header and header[key][0] != count:
            raise FormatError(header[key][1], f"header declares {header[key][0]} {key}, file has {count}")
    for lid, sid, tid, lineno in links:
        for nid in (sid, tid):
            if nid not in nodes:
                raise FormatError(lineno, f"link {lid} references missing node {nid}")
    specs = [(lid, sid, tid) for lid, sid, tid, _ in links]
    area = header["area"][0] if "area" in header else None
    try:
        Topology.build(nodes.values(), [], r_min, r_max, area)
    except ModelError as exc:
        raise FormatError(r_line, str(exc)) from None
    for spec, (*_, lineno) in zip(specs, links):
        try:
            Topology.build(nodes.values(), [spec], r_min, r_max, area)
        except ModelError as exc:
            raise FormatError(lineno, str(exc)) from None
    return Topology.build(nodes.values(), specs, r_min, r_max, area)


def serialize_topology(topology: Topology) -> str:
    out = io.StringIO()
    out.write(f"nodes {len(topology.nodes)}\nlinks {len(topology.links)}\n")
    out.write(f"r {topology.r_min!r} {topology.r_max!r}\n")
    if topology.area is not None:
        out.write(f"area {float(topology.area)!r}\n")
    for n in topology.nodes:
        out.write(f"N {n.id} {float(n.position[0])!r} {float(n.position[1])!r}\n")
    for l in topology.links:
        out.write(f"L {l.id} {l.sender} {l.receiver}\n")
    return out.getvalue()


def serialize_trace(trace: BacklogTrace) -> str:
    out = io.StringIO()
    out.write(TRACE_HEADER + "\n")
    for t, (tot, cnt, p) in enumerate(zip(trace.per_slot_total, trace.scheduled_count, trace.max_power)):
        out.write(f"{t},{int(tot)},{int(cnt)},{float(p)!r}\n")
    return out.getvalue()


def parse_trace(text: str) -> BacklogTrace:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TRACE_HEADER:
        raise FormatError(1, f"expected header {TRACE_HEADER!r}")
    totals, counts, power = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(lineno, "expected 4 comma-separated fields")
        if _num(parts[0], lineno, int) != len(totals):
            raise FormatError(lineno, "slots must be consecutive from 0")
        totals.append(_num(parts[1], lineno, int))
        counts.append(_num(parts[2], lineno, int))
        power.append(_num(parts[3], lineno))
    return BacklogTrace(
        np.array(totals, dtype=np.int64), np.array(counts, dtype=np.int64), np.array(power, dtype=float)
    )


def parse_weights(text: str) -> dict[int, float]:
    weights: dict[int, float] = {}
    for lineno, tok in _records(text):
        if len(tok) != 2:
            raise FormatError(lineno, "expected '<link_id> <weight>'")
        weights[_num(tok[0], lineno, int)] = _num(tok[1], lineno)
    return weights


@dataclass
class ScheduleFile:
    link_ids: list[int]
    powers: dict[int, float]


def parse_schedule(text: str) -> ScheduleFile:
    ids: list[int] = []
    powers: dict[int, float] = {}
    for lineno, tok in _records(text):
        if tok[0] == "P" and len(tok) == 3:
            powers[_num(tok[1], lineno, int)] = _num(tok[2], lineno)
        elif len(tok) == 1:
            ids.append(_num(tok[0], lineno, int))
        else:
            raise FormatError(lineno, "expected '<link_id>' or 'P <link_id> <watts>'")
    return ScheduleFile(ids, powers)


def serialize_schedule(link_ids, powers: dict[int, float]) -> str:
    out = io.StringIO()
    for lid in link_ids:
        out.write(f"{lid}\n")
    for lid in link_ids:
        if lid in powers:
            out.write(f"P {lid} {float(powers[lid])!r}\n")
    return out.getvalue()
