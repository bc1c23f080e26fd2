"""Two-layer 3D FPGA fabric generation and its routing-graph abstraction.

The fabric is a W x H grid of tiles replicated on k=2 layers: an IO ring on
the periphery and interior columns following a repeating CLB/DSP/BRAM
pattern (default 75% / 12.5% / 12.5%).  The routing graph keeps three node
classes per tile per layer -- OPIN, CHAN, IPIN -- which is the minimal
abstraction under which the vertical-connectivity styles produce genuinely
different delay tables:

    OPIN -> CHAN        d_co   (output pin to channel, same tile)
    CHAN -> IPIN        d_ci   (channel to input pin, same tile)
    CHAN -> CHAN        d_h    (4-neighbor tiles, same layer)

Vertical edges (delay d_v) exist only at vertical-capable tiles and depend
on the style: CB-O connects output pins to the other layer's channel, CB-I
connects channels to the other layer's input pins, CB does both, SB
connects channel to channel, and the HYBRID styles union SB with the
corresponding CB variant.
"""

from __future__ import annotations

import configparser
import enum
from dataclasses import dataclass, field

from .netlist import BlockKind


class Style(enum.Enum):
    CB = "CB"
    CB_O = "CB_O"
    CB_I = "CB_I"
    SB = "SB"
    HYBRID = "HYBRID"
    HYBRID_O = "HYBRID_O"
    HYBRID_I = "HYBRID_I"


# Node classes of the routing graph.
OPIN, CHAN, IPIN = 0, 1, 2

# 6/8 CLB, 1/8 DSP, 1/8 BRAM; hard columns first so even a 3-column
# interior carries every kind.
DEFAULT_COLUMN_PATTERN = (
    BlockKind.CLB, BlockKind.DSP, BlockKind.BRAM, BlockKind.CLB,
    BlockKind.CLB, BlockKind.CLB, BlockKind.CLB, BlockKind.CLB,
)


class ArchError(Exception):
    pass


@dataclass
class ArchSpec:
    width: int = 8
    height: int = 8
    k: int = 2
    style: Style = Style.SB
    d_h: float = 1.0
    d_v: float = 3.0          # preset 3*d_h is TSV-like; 0.3*d_h via-like
    d_co: float = 0.5
    d_ci: float = 0.5
    v_period: int = 1
    column_pattern: tuple[BlockKind, ...] = DEFAULT_COLUMN_PATTERN

    def __post_init__(self):
        if self.k != 2:
            raise ArchError("only two-layer fabrics are supported")
        if min(self.d_h, self.d_v, self.d_co, self.d_ci) < 0:
            raise ArchError("delays must be nonnegative")
        if self.v_period < 1:
            raise ArchError("v_period must be >= 1")
        if self.width < 3 or self.height < 3:
            raise ArchError("grid too small for an IO ring with an interior")


@dataclass
class Fabric:
    spec: ArchSpec
    tile_kind: list[list[BlockKind]]   # [x][y], identical on both layers
    vert_cap: list[list[bool]]         # [x][y]

    @property
    def width(self) -> int:
        return self.spec.width

    @property
    def height(self) -> int:
        return self.spec.height

    @property
    def k(self) -> int:
        return self.spec.k

    def sites_of_kind(self, kind: BlockKind) -> list[tuple[int, int]]:
        """(x, y) tiles of a kind, shared by both layers."""
        return [(x, y) for x in range(self.width) for y in range(self.height)
                if self.tile_kind[x][y] is kind]

    def capacity(self, kind: BlockKind) -> int:
        """Total sites of a kind across both layers."""
        return self.k * len(self.sites_of_kind(kind))


def build_fabric(spec: ArchSpec) -> Fabric:
    W, H = spec.width, spec.height
    tile_kind = [[BlockKind.IO] * H for _ in range(W)]
    pattern = spec.column_pattern
    present = set()
    for x in range(1, W - 1):
        kind = pattern[(x - 1) % len(pattern)]
        present.add(kind)
        for y in range(1, H - 1):
            tile_kind[x][y] = kind
    for kind in (BlockKind.CLB, BlockKind.DSP, BlockKind.BRAM):
        if kind in set(pattern) and kind not in present:
            raise ArchError(f"grid too small for the column pattern: no {kind.value} column")
    vert_cap = [[(x + y * W) % spec.v_period == 0 for y in range(H)] for x in range(W)]
    return Fabric(spec=spec, tile_kind=tile_kind, vert_cap=vert_cap)


def node_id(fabric: Fabric, cls: int, layer: int, x: int, y: int) -> int:
    W, H = fabric.width, fabric.height
    return ((cls * fabric.k + layer) * W + x) * H + y


def num_nodes(fabric: Fabric) -> int:
    return 3 * fabric.k * fabric.width * fabric.height


def base_edges(spec: ArchSpec, fabric: Fabric) -> list[tuple[int, int, float]]:
    """Intra-layer edges: pin hookups plus 4-neighbor channel hops."""
    W, H = fabric.width, fabric.height
    edges = []
    for l in range(fabric.k):
        for x in range(W):
            for y in range(H):
                o = node_id(fabric, OPIN, l, x, y)
                c = node_id(fabric, CHAN, l, x, y)
                i = node_id(fabric, IPIN, l, x, y)
                edges.append((o, c, spec.d_co))
                edges.append((c, i, spec.d_ci))
                if x + 1 < W:
                    c2 = node_id(fabric, CHAN, l, x + 1, y)
                    edges.append((c, c2, spec.d_h))
                    edges.append((c2, c, spec.d_h))
                if y + 1 < H:
                    c2 = node_id(fabric, CHAN, l, x, y + 1)
                    edges.append((c, c2, spec.d_h))
                    edges.append((c2, c, spec.d_h))
    return edges


def vertical_edges(spec: ArchSpec, fabric: Fabric) -> set[tuple[int, int, float]]:
    """Style-dependent inter-layer edges at vertical-capable tiles."""
    style = spec.style
    want_sb = style in (Style.SB, Style.HYBRID, Style.HYBRID_O, Style.HYBRID_I)
    want_o = style in (Style.CB, Style.CB_O, Style.HYBRID, Style.HYBRID_O)
    want_i = style in (Style.CB, Style.CB_I, Style.HYBRID, Style.HYBRID_I)
    edges: set[tuple[int, int, float]] = set()
    for x in range(fabric.width):
        for y in range(fabric.height):
            if not fabric.vert_cap[x][y]:
                continue
            for l in range(fabric.k):
                for l2 in range(fabric.k):
                    if l == l2:
                        continue
                    if want_sb:
                        edges.add((node_id(fabric, CHAN, l, x, y),
                                   node_id(fabric, CHAN, l2, x, y), spec.d_v))
                    if want_o:
                        edges.add((node_id(fabric, OPIN, l, x, y),
                                   node_id(fabric, CHAN, l2, x, y), spec.d_v))
                    if want_i:
                        edges.add((node_id(fabric, CHAN, l, x, y),
                                   node_id(fabric, IPIN, l2, x, y), spec.d_v))
    return edges


def all_edges(spec: ArchSpec, fabric: Fabric) -> list[tuple[int, int, float]]:
    return base_edges(spec, fabric) + sorted(vertical_edges(spec, fabric))


def load_archspec(path: str) -> ArchSpec:
    """Read a flat INI file with [grid], [delays] and [style] sections."""
    cp = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as f:
        cp.read_file(f)
    kw = {}
    if cp.has_section("grid"):
        g = cp["grid"]
        for key, cast in (("width", int), ("height", int), ("k", int), ("v_period", int)):
            if key in g:
                kw[key] = cast(g[key])
        if "column_pattern" in g:
            kw["column_pattern"] = tuple(BlockKind[t] for t in g["column_pattern"].split())
    if cp.has_section("delays"):
        d = cp["delays"]
        for key in ("d_h", "d_v", "d_co", "d_ci"):
            if key in d:
                kw[key] = float(d[key])
    if cp.has_section("style"):
        s = cp["style"]
        if "style" in s:
            kw["style"] = Style[s["style"].upper().replace("-", "_")]
    return ArchSpec(**kw)


def save_archspec(spec: ArchSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("[grid]\n")
        f.write(f"width = {spec.width}\nheight = {spec.height}\nk = {spec.k}\n")
        f.write(f"v_period = {spec.v_period}\n")
        f.write("column_pattern = " + " ".join(k.name for k in spec.column_pattern) + "\n")
        f.write("\n[delays]\n")
        f.write(f"d_h = {spec.d_h:g}\nd_v = {spec.d_v:g}\n")
        f.write(f"d_co = {spec.d_co:g}\nd_ci = {spec.d_ci:g}\n")
        f.write("\n[style]\n")
        f.write(f"style = {spec.style.value}\n")
