"""Placement state, legality checking and bounding-box wirelength.

A placement maps every block to a (layer, x, y) site and keeps the inverse
occupancy map in sync.  Wirelength uses the classic crossing-count
corrected half-perimeter model: per net, q(#pins) * (bb_x + bb_y), with an
optional layer-span term weighted by w_z (0 by default, so vertical cost
is carried entirely by the timing term).
"""

from __future__ import annotations

from dataclasses import dataclass

from .arch import Fabric
from .netlist import BlockKind, Netlist


@dataclass(frozen=True)
class Loc:
    layer: int
    x: int
    y: int


# Crossing-count correction q(#pins) breakpoints (RISA-style table used by
# VPR); linear interpolation between breakpoints, constant 2.7933 above 50.
_Q_BREAKPOINTS = [
    (1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0828), (5, 1.1536), (6, 1.2206),
    (7, 1.2823), (8, 1.3385), (9, 1.3991), (10, 1.4493), (15, 1.6899),
    (20, 1.8924), (25, 2.0743), (30, 2.2334), (35, 2.3895), (40, 2.5356),
    (45, 2.6625), (50, 2.7933),
]


def crossing_factor(n_pins: int) -> float:
    if n_pins <= 3:
        return 1.0
    if n_pins >= 50:
        return 2.7933
    for (n0, q0), (n1, q1) in zip(_Q_BREAKPOINTS, _Q_BREAKPOINTS[1:]):
        if n0 <= n_pins <= n1:
            return q0 + (q1 - q0) * (n_pins - n0) / (n1 - n0)
    raise AssertionError(n_pins)


class Placement:
    """Block -> Loc mapping with an exact inverse occupancy map."""

    def __init__(self, fabric: Fabric, n_blocks: int):
        self.fabric = fabric
        self.n_blocks = n_blocks
        self.layer = [-1] * n_blocks
        self.x = [-1] * n_blocks
        self.y = [-1] * n_blocks
        W, H = fabric.width, fabric.height
        self._wh = W * H
        self.occ = [-1] * (fabric.k * W * H)

    def site_index(self, layer: int, x: int, y: int) -> int:
        return layer * self._wh + x * self.fabric.height + y

    def loc_of(self, block: int) -> Loc:
        return Loc(self.layer[block], self.x[block], self.y[block])

    def block_at(self, layer: int, x: int, y: int) -> int:
        """Block id at a site, or -1."""
        return self.occ[self.site_index(layer, x, y)]

    def set_loc(self, block: int, layer: int, x: int, y: int) -> None:
        if self.layer[block] >= 0:
            self.occ[self.site_index(self.layer[block], self.x[block], self.y[block])] = -1
        idx = self.site_index(layer, x, y)
        if self.occ[idx] != -1:
            raise ValueError(f"site ({layer},{x},{y}) already occupied by block {self.occ[idx]}")
        self.occ[idx] = block
        self.layer[block] = layer
        self.x[block] = x
        self.y[block] = y

    def swap(self, a: int, b: int) -> None:
        la, xa, ya = self.layer[a], self.x[a], self.y[a]
        lb, xb, yb = self.layer[b], self.x[b], self.y[b]
        self.occ[self.site_index(la, xa, ya)] = b
        self.occ[self.site_index(lb, xb, yb)] = a
        self.layer[a], self.x[a], self.y[a] = lb, xb, yb
        self.layer[b], self.x[b], self.y[b] = la, xa, ya

    def copy_locs(self) -> tuple[list[int], list[int], list[int]]:
        return list(self.layer), list(self.x), list(self.y)

    def restore_locs(self, locs: tuple[list[int], list[int], list[int]]) -> None:
        self.layer, self.x, self.y = list(locs[0]), list(locs[1]), list(locs[2])
        self.occ = [-1] * len(self.occ)
        for b in range(self.n_blocks):
            self.occ[self.site_index(self.layer[b], self.x[b], self.y[b])] = b


def check_legality(p: Placement, netlist: Netlist, fabric: Fabric) -> list[str]:
    """Violations as human-readable strings; empty list means legal."""
    violations = []
    W, H = fabric.width, fabric.height
    seen: dict[tuple[int, int, int], int] = {}
    for b in netlist.blocks:
        l, x, y = p.layer[b.id], p.x[b.id], p.y[b.id]
        if l < 0:
            violations.append(f"unplaced: block {b.name}")
            continue
        if not (0 <= l < fabric.k and 0 <= x < W and 0 <= y < H):
            violations.append(f"out-of-bounds: block {b.name} at ({l},{x},{y})")
            continue
        key = (l, x, y)
        if key in seen:
            other = netlist.blocks[seen[key]].name
            violations.append(f"overlap: blocks {other} and {b.name} at ({l},{x},{y})")
        else:
            seen[key] = b.id
        tk = fabric.tile_kind[x][y]
        if tk is not b.kind:
            violations.append(
                f"kind mismatch: {b.kind.value} block {b.name} on {tk.value} tile ({l},{x},{y})")
        if b.kind is BlockKind.IO and not (x in (0, W - 1) or y in (0, H - 1)):
            violations.append(f"IO off periphery: block {b.name} at ({l},{x},{y})")
    # Inverse-map consistency.
    for b in netlist.blocks:
        if 0 <= p.layer[b.id]:
            if p.block_at(p.layer[b.id], p.x[b.id], p.y[b.id]) != b.id:
                violations.append(f"occupancy map inconsistent for block {b.name}")
    return violations


def net_bb_cost(p: Placement, pins: list[int], q: float, w_z: float = 0.0) -> float:
    """Bounding-box cost of one net given its (deduplicated) pin blocks."""
    xs = p.x
    ys = p.y
    b0 = pins[0]
    xmin = xmax = xs[b0]
    ymin = ymax = ys[b0]
    for b in pins[1:]:
        v = xs[b]
        if v < xmin:
            xmin = v
        elif v > xmax:
            xmax = v
        v = ys[b]
        if v < ymin:
            ymin = v
        elif v > ymax:
            ymax = v
    cost = q * ((xmax - xmin) + (ymax - ymin))
    if w_z:
        layers = {p.layer[b] for b in pins}
        cost += w_z * (len(layers) - 1)
    return cost


def net_pin_blocks(netlist: Netlist) -> list[list[int]]:
    """Per net: deduplicated block ids (driver first)."""
    out = []
    for net in netlist.nets:
        pins = [net.driver[0]]
        seen = {net.driver[0]}
        for b, _ in net.sinks:
            if b not in seen:
                seen.add(b)
                pins.append(b)
        out.append(pins)
    return out


def hpwl(p: Placement, netlist: Netlist, w_z: float = 0.0) -> tuple[float, list[float]]:
    """Total crossing-corrected HPWL and the per-net breakdown."""
    per_net = []
    total = 0.0
    for net, pins in zip(netlist.nets, net_pin_blocks(netlist)):
        q = crossing_factor(1 + len(net.sinks))
        c = net_bb_cost(p, pins, q, w_z)
        per_net.append(c)
        total += c
    return total, per_net


def save_placement(p: Placement, netlist: Netlist, path: str, seed: int = 0) -> None:
    f = p.fabric
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"layers={f.k} width={f.width} height={f.height} seed={seed}\n")
        for b in netlist.blocks:
            fh.write(f"block {b.name} {p.layer[b.id]} {p.x[b.id]} {p.y[b.id]}\n")


def load_placement(path: str, netlist: Netlist, fabric: Fabric) -> tuple[Placement, int]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    if int(header["layers"]) != fabric.k or int(header["width"]) != fabric.width \
            or int(header["height"]) != fabric.height:
        raise ValueError("placement header does not match fabric geometry")
    p = Placement(fabric, netlist.n_blocks)
    for ln in lines[1:]:
        toks = ln.split()
        if toks[0] != "block" or len(toks) != 5:
            raise ValueError(f"malformed placement line: {ln!r}")
        b = netlist.block_by_name(toks[1])
        p.set_loc(b.id, int(toks[2]), int(toks[3]), int(toks[4]))
    return p, int(header["seed"])
