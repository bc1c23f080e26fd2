"""4D delay lookahead table built by shortest-path search over the fabric.

For each source layer a Dijkstra search starts at the OPIN of an anchor
tile near the bottom-left corner; the minimum delay to every IPIN is
bucketed by (destination layer, |dx|, |dy|).  EXACT mode uses true
per-edge delays.  AVERAGE mode models the segment-average flaw: every
channel hop and vertical edge is first replaced by the single arithmetic
mean over all such edges, so intra-layer and inter-layer transitions are
treated uniformly.

Entries at (same layer, zero offset) are pinned to 0: a same-tile
connection needs no routing.  Offsets a style/v_period combination cannot
reach hold the UNREACHABLE sentinel, a large finite delay that keeps the
annealing cost ordered.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .arch import (IPIN, OPIN, ArchSpec, Fabric, base_edges, node_id,
                   num_nodes, vertical_edges)
from .placement import Loc

UNREACHABLE = 1e9

_MAGIC = b"P3DT"
_VERSION = 1


class TableMode(enum.Enum):
    AVERAGE = "average"
    EXACT = "exact"


@dataclass
class DelayTable:
    entries: np.ndarray          # [l_src][l_dst][dx][dy]
    mode: TableMode
    anchor: tuple[int, int]

    def as_lists(self) -> list[list[list[list[float]]]]:
        """Nested-list view for fast scalar lookups in hot loops."""
        return self.entries.tolist()


def anchor_tile(fabric: Fabric) -> tuple[int, int]:
    """Nearest interior tile to the bottom-left corner."""
    if fabric.width >= 3 and fabric.height >= 3:
        return (1, 1)
    return (0, 0)


def _adjacency(edges: list[tuple[int, int, float]], n: int) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, d in edges:
        adj[u].append((v, d))
    return adj


def _dijkstra(adj: list[list[tuple[int, float]]], src: int) -> list[float]:
    dist = [float("inf")] * len(adj)
    dist[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heappush(heap, (nd, v))
    return dist


def build_table(fabric: Fabric, spec: ArchSpec, mode: TableMode = TableMode.EXACT) -> DelayTable:
    W, H, k = fabric.width, fabric.height, fabric.k
    edges = base_edges(spec, fabric) + sorted(vertical_edges(spec, fabric))
    if mode is TableMode.AVERAGE:
        edges = _averaged_edges(spec, fabric, edges)
    adj = _adjacency(edges, num_nodes(fabric))
    ax, ay = anchor_tile(fabric)
    entries = np.full((k, k, W, H), UNREACHABLE, dtype=float)
    for l_src in range(k):
        dist = _dijkstra(adj, node_id(fabric, OPIN, l_src, ax, ay))
        for l_dst in range(k):
            for x in range(W):
                for y in range(H):
                    d = dist[node_id(fabric, IPIN, l_dst, x, y)]
                    if d == float("inf"):
                        continue
                    dx, dy = abs(x - ax), abs(y - ay)
                    if d < entries[l_src, l_dst, dx, dy]:
                        entries[l_src, l_dst, dx, dy] = d
        entries[l_src, l_src, 0, 0] = 0.0
    return DelayTable(entries=entries, mode=mode, anchor=(ax, ay))


def _averaged_edges(spec: ArchSpec, fabric: Fabric,
                    edges: list[tuple[int, int, float]]) -> list[tuple[int, int, float]]:
    # Routing edges = channel hops plus all vertical edges; pin hookup edges
    # (d_co / d_ci, same tile same layer) keep their delays.  Classified
    # structurally, not by delay value, so d_co == d_h stays correct.
    verts = vertical_edges(spec, fabric)
    is_routing = [_is_chan_hop(fabric, u, v) or (u, v, d) in verts
                  for (u, v, d) in edges]
    total, count = 0.0, 0
    for flag, (u, v, d) in zip(is_routing, edges):
        if flag:
            total += d
            count += 1
    mean = total / count if count else 0.0
    return [(u, v, mean if flag else d)
            for flag, (u, v, d) in zip(is_routing, edges)]


def _is_chan_hop(fabric: Fabric, u: int, v: int) -> bool:
    W, H, k = fabric.width, fabric.height, fabric.k
    per_cls = k * W * H
    return u // per_cls == 1 and v // per_cls == 1


def lookup(table: DelayTable, src: Loc, dst: Loc) -> float:
    return float(table.entries[src.layer, dst.layer, abs(dst.x - src.x), abs(dst.y - src.y)])


def dump_table(table: DelayTable, path: str) -> None:
    k, _, W, H = table.entries.shape
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IIIIIBB", _VERSION, k, W, H,
                            table.anchor[0] * 65536 + table.anchor[1],
                            1 if table.mode is TableMode.EXACT else 0, 0))
        f.write(np.ascontiguousarray(table.entries, dtype="<f8").tobytes())


def load_table(path: str) -> DelayTable:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _MAGIC:
            raise ValueError("not a delay-table file")
        version, k, W, H, anchor_packed, exact, _ = struct.unpack("<IIIIIBB", f.read(22))
        if version != _VERSION:
            raise ValueError(f"unsupported delay-table version {version}")
        data = np.frombuffer(f.read(), dtype="<f8").reshape(k, k, W, H).copy()
    return DelayTable(entries=data,
                      mode=TableMode.EXACT if exact else TableMode.AVERAGE,
                      anchor=(anchor_packed // 65536, anchor_packed % 65536))
