"""Timing-weighted hypergraph bipartitioning for initial layer assignment.

Single-level Fiduccia-Mattheyses with gain buckets and an independent
balance constraint per block kind (each kind's counts must stay within the
imbalance factor of an even split).  The partitioner is deterministic for
a fixed seed and anytime-monotone: the reported cut never increases across
passes.  The resulting layer assignment seeds the initial placement, which
fills sites in decreasing-criticality order and relaxes a block to the
alternate layer only when its assigned layer runs out of compatible sites.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field

from .arch import Fabric
from .netlist import BlockKind, Netlist
from .placement import Placement

log = logging.getLogger(__name__)


@dataclass
class Hypergraph:
    n: int
    kind: list[BlockKind]                 # per vertex
    edges: list[list[int]]                # pin lists (deduplicated)
    weights: list[float]                  # per hyperedge

    @classmethod
    def from_netlist(cls, netlist: Netlist, edge_weights: list[float] | None = None
                     ) -> "Hypergraph":
        edges = []
        for net in netlist.nets:
            pins = {net.driver[0]}
            pins.update(b for b, _ in net.sinks)
            edges.append(sorted(pins))
        weights = edge_weights if edge_weights is not None else [n.weight for n in netlist.nets]
        return cls(n=netlist.n_blocks, kind=[b.kind for b in netlist.blocks],
                   edges=edges, weights=list(weights))


@dataclass
class LayerAssignment:
    layer: list[int]
    cut: float
    imbalance: float                      # worst realized fraction over kinds
    cut_history: list[float] = field(default_factory=list)


def _balance_bounds(total: int, eps: float) -> tuple[int, int]:
    lo = math.ceil(total / 2 - eps * total - 1e-9)
    hi = math.floor(total / 2 + eps * total + 1e-9)
    if lo > hi:
        lo, hi = total // 2, (total + 1) // 2
        log.warning("imbalance %.3f infeasible for %d vertices of a kind; "
                    "relaxed to floor/ceil split", eps, total)
    return max(0, lo), min(total, hi)


def cut_value(h: Hypergraph, side: list[int]) -> float:
    cut = 0.0
    for pins, w in zip(h.edges, h.weights):
        s0 = side[pins[0]]
        for p in pins[1:]:
            if side[p] != s0:
                cut += w
                break
    return cut


def partition(h: Hypergraph, eps: float = 0.05, seed: int = 0,
              max_passes: int = 20, starts: int = 4) -> LayerAssignment:
    """Best of several seeded multi-pass FM runs.

    A single FM run can stall in a pass-level local optimum that depends on
    the random start, so a handful of independent starts buys a much better
    worst case for little extra time.
    """
    if h.n < 2:
        raise ValueError("need at least 2 vertices to partition")
    if not (0.0 < eps < 0.5):
        raise ValueError("imbalance must be in (0, 0.5)")
    rng = random.Random(seed)
    kinds = sorted({k for k in h.kind}, key=lambda k: k.value)
    totals = {k: sum(1 for kk in h.kind if kk is k) for k in kinds}
    bounds = {k: _balance_bounds(totals[k], eps) for k in kinds}

    vert_edges = [[] for _ in range(h.n)]
    for e, pins in enumerate(h.edges):
        for v in pins:
            vert_edges[v].append(e)

    best: LayerAssignment | None = None
    for _ in range(max(1, starts)):
        # Seeded balanced start, independently per kind.
        side = [0] * h.n
        count0 = {}
        for k in kinds:
            vids = [v for v in range(h.n) if h.kind[v] is k]
            rng.shuffle(vids)
            n0 = min(max(totals[k] // 2, bounds[k][0]), bounds[k][1])
            for v in vids[n0:]:
                side[v] = 1
            count0[k] = n0

        cut = cut_value(h, side)
        history = [cut]
        for _ in range(max_passes):
            new_cut = _fm_pass(h, side, count0, bounds, vert_edges, cut)
            if new_cut >= cut - 1e-12:
                break
            cut = new_cut
            history.append(cut)
        worst = 0.0
        for k in kinds:
            if totals[k]:
                worst = max(worst, abs(count0[k] - totals[k] / 2) / totals[k])
        if best is None or cut < best.cut - 1e-12:
            best = LayerAssignment(layer=side, cut=cut, imbalance=worst,
                                   cut_history=history)
    return best


def _fm_pass(h: Hypergraph, side: list[int], count0: dict, bounds: dict,
             vert_edges: list[list[int]], start_cut: float) -> float:
    import heapq

    n = h.n
    pins_on = [[0, 0] for _ in h.edges]
    for e, pins in enumerate(h.edges):
        for v in pins:
            pins_on[e][side[v]] += 1

    def gain_of(v: int) -> float:
        s = side[v]
        g = 0.0
        for e in vert_edges[v]:
            po = pins_on[e]
            if po[s] == 1:
                g += h.weights[e]
            if po[1 - s] == 0:
                g -= h.weights[e]
        return g

    # One lazy max-heap per (kind, source side) so the selection step only
    # ever looks at structurally feasible moves; stale entries are flagged
    # and recomputed when popped.
    locked = [False] * n
    stale = [False] * n
    heaps: dict[tuple, list] = {(k, s): [] for k in bounds for s in (0, 1)}
    for v in range(n):
        heaps[(h.kind[v], side[v])].append((-gain_of(v), v))
    for hp in heaps.values():
        heapq.heapify(hp)

    def pop_best(keys):
        """Best unlocked, fresh head across the given heaps, or None."""
        while True:
            best_key = None
            best = None
            for key in keys:
                hp = heaps[key]
                while hp and locked[hp[0][1]]:
                    heapq.heappop(hp)
                if hp and (best is None or hp[0] < best):
                    best = hp[0]
                    best_key = key
            if best is None:
                return None
            neg_g, v = heapq.heappop(heaps[best_key])
            if stale[v]:
                stale[v] = False
                heapq.heappush(heaps[best_key], (-gain_of(v), v))
                continue
            return neg_g, v

    cur = start_cut
    best_cut = start_cut
    moves: list[int] = []
    best_prefix = 0
    cnt = dict(count0)
    # Kinds currently outside their strict balance window.  Moves may pass
    # through states one step beyond the window (otherwise a tight window,
    # e.g. an exact even split, would forbid every single move), but only
    # strictly balanced prefixes are eligible as the pass result.
    unbalanced = 0

    while True:
        feasible = []
        for k, (lo, hi) in bounds.items():
            if cnt[k] - 1 >= lo - 1:
                feasible.append((k, 0))      # a 0 -> 1 move stays in window
            if cnt[k] + 1 <= hi + 1:
                feasible.append((k, 1))
        got = pop_best(feasible)
        if got is None:
            break
        _, v = got
        k = h.kind[v]
        lo, hi = bounds[k]
        g = gain_of(v)
        s = side[v]
        n0 = cnt[k] + (-1 if s == 0 else 1)
        # Apply the tentative move.
        for e in vert_edges[v]:
            pins_on[e][s] -= 1
            pins_on[e][1 - s] += 1
        side[v] = 1 - s
        was_ok = lo <= cnt[k] <= hi
        cnt[k] = n0
        unbalanced += (not (lo <= n0 <= hi)) - (not was_ok)
        locked[v] = True
        cur -= g
        moves.append(v)
        if unbalanced == 0 and cur < best_cut - 1e-12:
            best_cut = cur
            best_prefix = len(moves)
        for e in vert_edges[v]:
            for u in h.edges[e]:
                if not locked[u]:
                    stale[u] = True

    # Roll back past the best prefix.
    for v in reversed(moves[best_prefix:]):
        s = side[v]
        side[v] = 1 - s
        cnt[h.kind[v]] += 1 if side[v] == 0 else -1
    count0.update(cnt)
    return best_cut


def hyperedge_weights(netlist: Netlist, net_crit: list[float]) -> list[float]:
    """1 + max pre-placement connection criticality on the net."""
    return [1.0 + c for c in net_crit]


class CapacityError(Exception):
    pass


def initial_placement(netlist: Netlist, fabric: Fabric, assignment: LayerAssignment,
                      block_crit: list[float] | None = None) -> Placement:
    """Legal placement honoring the layer assignment where capacity allows."""
    if block_crit is None:
        block_crit = [0.0] * netlist.n_blocks
    kinds = (BlockKind.IO, BlockKind.CLB, BlockKind.DSP, BlockKind.BRAM)
    counts = {k: sum(1 for b in netlist.blocks if b.kind is k) for k in kinds}
    deficits = {k.value: counts[k] - fabric.capacity(k)
                for k in kinds if counts[k] > fabric.capacity(k)}
    if deficits:
        raise CapacityError(f"insufficient sites per kind: {deficits}")

    cx, cy = (fabric.width - 1) / 2.0, (fabric.height - 1) / 2.0
    free: dict[tuple[int, BlockKind], list[tuple[int, int]]] = {}
    for k in kinds:
        sites = sorted(fabric.sites_of_kind(k),
                       key=lambda s: (abs(s[0] - cx) + abs(s[1] - cy), s[0], s[1]))
        sites.reverse()  # pop() yields nearest-to-center first
        for layer in range(fabric.k):
            free[(layer, k)] = list(sites)

    p = Placement(fabric, netlist.n_blocks)
    order = sorted(range(netlist.n_blocks), key=lambda b: (-block_crit[b], b))
    for b in order:
        kind = netlist.blocks[b].kind
        layer = assignment.layer[b]
        if not free[(layer, kind)]:
            layer = 1 - layer
        x, y = free[(layer, kind)].pop()
        p.set_loc(b, layer, x, y)
    return p


def random_placement(netlist: Netlist, fabric: Fabric, seed: int = 0) -> Placement:
    """Seeded random legal placement (the no-partition-init baseline)."""
    rng = random.Random(seed)
    kinds = (BlockKind.IO, BlockKind.CLB, BlockKind.DSP, BlockKind.BRAM)
    counts = {k: sum(1 for b in netlist.blocks if b.kind is k) for k in kinds}
    deficits = {k.value: counts[k] - fabric.capacity(k)
                for k in kinds if counts[k] > fabric.capacity(k)}
    if deficits:
        raise CapacityError(f"insufficient sites per kind: {deficits}")
    p = Placement(fabric, netlist.n_blocks)
    pool: dict[BlockKind, list[tuple[int, int, int]]] = {}
    for k in kinds:
        sites = [(l, x, y) for l in range(fabric.k) for x, y in fabric.sites_of_kind(k)]
        rng.shuffle(sites)
        pool[k] = sites
    for b in netlist.blocks:
        l, x, y = pool[b.kind].pop()
        p.set_loc(b.id, l, x, y)
    return p
