"""Packed netlist model and its line-oriented file format.

A netlist is a hypergraph of placeable blocks (IO / CLB / DSP / BRAM) and
multi-pin nets.  Each net has exactly one driver pin and one or more sink
pins.  Sequential blocks and IOs form the clock boundary for timing
analysis; the combinational part of the netlist must be acyclic, which is
checked at load time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class BlockKind(enum.Enum):
    IO = "IO"
    CLB = "CLB"
    DSP = "DSP"
    BRAM = "BRAM"


class NetlistError(Exception):
    """Raised for malformed or inconsistent netlist files."""


@dataclass
class Block:
    id: int
    name: str
    kind: BlockKind
    fixed: bool = False
    seq: bool = False  # sequential element: clock boundary for STA


@dataclass
class Net:
    id: int
    name: str
    driver: tuple[int, int]            # (block id, output pin index)
    sinks: list[tuple[int, int]]       # (block id, input pin index)
    weight: float = 1.0


@dataclass
class Netlist:
    blocks: list[Block] = field(default_factory=list)
    nets: list[Net] = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_movable(self) -> int:
        return sum(1 for b in self.blocks if not b.fixed)

    def block_by_name(self, name: str) -> Block:
        if not hasattr(self, "_by_name") or len(self._by_name) != len(self.blocks):
            self._by_name = {b.name: b for b in self.blocks}
        return self._by_name[name]

    def validate(self) -> None:
        names = set()
        for i, b in enumerate(self.blocks):
            if b.id != i:
                raise NetlistError(f"block ids not dense: {b.name} has id {b.id} at index {i}")
            if b.name in names:
                raise NetlistError(f"duplicate block name {b.name!r}")
            names.add(b.name)
        n = len(self.blocks)
        for net in self.nets:
            if not net.sinks:
                raise NetlistError(f"net {net.name!r} has no sinks")
            if net.weight < 0:
                raise NetlistError(f"net {net.name!r} has negative weight")
            if not (0 <= net.driver[0] < n):
                raise NetlistError(f"net {net.name!r}: dangling reference (driver)")
            seen = set()
            for blk, pin in net.sinks:
                if not (0 <= blk < n):
                    raise NetlistError(f"net {net.name!r}: dangling reference (sink)")
                if (blk, pin) in seen:
                    raise NetlistError(f"net {net.name!r}: duplicate sink pin ({blk},{pin})")
                seen.add((blk, pin))
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        # Timing arcs pass through a block only when it is combinational
        # (non-sequential, non-IO); sequential elements cut the cycle.
        n = len(self.blocks)
        passthrough = [not (b.seq or b.kind is BlockKind.IO) for b in self.blocks]
        succ: list[list[int]] = [[] for _ in range(n)]
        indeg = [0] * n
        for net in self.nets:
            d = net.driver[0]
            for s, _ in net.sinks:
                if passthrough[s]:
                    succ[d].append(s)
                    indeg[s] += 1
        stack = [i for i in range(n) if indeg[i] == 0]
        seen = 0
        while stack:
            v = stack.pop()
            seen += 1
            for w in succ[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack.append(w)
        if seen != n:
            raise NetlistError("combinational cycle detected")

    def connections(self) -> list[tuple[int, int, int]]:
        """Flatten nets into (driver block, sink block, net id) triples."""
        out = []
        for net in self.nets:
            d = net.driver[0]
            for s, _ in net.sinks:
                out.append((d, s, net.id))
        return out


def load_netlist(path: str) -> Netlist:
    nl = Netlist()
    by_name: dict[str, Block] = {}
    pending_nets: list[tuple[int, str, list[str]]] = []
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "block":
            if len(toks) < 3:
                raise NetlistError(f"line {lineno}: malformed block line")
            name = toks[1]
            try:
                kind = BlockKind[toks[2]]
            except KeyError:
                raise NetlistError(f"line {lineno}: unknown block kind {toks[2]!r}") from None
            flags = toks[3:]
            for fl in flags:
                if fl not in ("fixed", "seq"):
                    raise NetlistError(f"line {lineno}: unknown flag {fl!r}")
            if name in by_name:
                raise NetlistError(f"line {lineno}: duplicate block name {name!r}")
            blk = Block(id=len(nl.blocks), name=name, kind=kind,
                        fixed="fixed" in flags, seq="seq" in flags)
            nl.blocks.append(blk)
            by_name[name] = blk
        elif toks[0] == "net":
            pending_nets.append((lineno, line, toks))
        else:
            raise NetlistError(f"line {lineno}: unknown directive {toks[0]!r}")
    for lineno, line, toks in pending_nets:
        nl.nets.append(_parse_net(lineno, line, by_name, len(nl.nets)))
    nl.validate()
    return nl


def _parse_pin(ref: str, by_name: dict[str, Block], lineno: int) -> tuple[int, int]:
    if "." not in ref:
        raise NetlistError(f"line {lineno}: pin reference {ref!r} missing '.'")
    bname, pin = ref.rsplit(".", 1)
    if bname not in by_name:
        raise NetlistError(f"line {lineno}: dangling reference {bname!r}")
    try:
        return by_name[bname].id, int(pin)
    except ValueError:
        raise NetlistError(f"line {lineno}: bad pin index in {ref!r}") from None


def _parse_net(lineno: int, line: str, by_name: dict[str, Block], net_id: int) -> Net:
    # net <name> <driver>.<pin> -> <sink>.<pin> [, <sink>.<pin> ...] [weight=<w>]
    body = line[len("net"):].strip()
    parts = body.split(None, 1)
    if len(parts) != 2:
        raise NetlistError(f"line {lineno}: malformed net line")
    name, rest = parts
    weight = 1.0
    toks = rest.split()
    if toks and toks[-1].startswith("weight="):
        weight = float(toks[-1][len("weight="):])
        rest = rest[: rest.rfind(toks[-1])].strip()
    if "->" not in rest:
        raise NetlistError(f"line {lineno}: net {name!r} missing '->'")
    drv_s, sinks_s = rest.split("->", 1)
    driver = _parse_pin(drv_s.strip(), by_name, lineno)
    sinks = []
    for chunk in sinks_s.split(","):
        chunk = chunk.strip()
        if not chunk:
            raise NetlistError(f"line {lineno}: empty sink in net {name!r}")
        sinks.append(_parse_pin(chunk, by_name, lineno))
    return Net(id=net_id, name=name, driver=driver, sinks=sinks, weight=weight)


def save_netlist(nl: Netlist, path: str) -> None:
    """Canonical writer: save -> load -> save is byte-identical."""
    with open(path, "w", encoding="utf-8") as f:
        for b in nl.blocks:
            flags = ""
            if b.fixed:
                flags += " fixed"
            if b.seq:
                flags += " seq"
            f.write(f"block {b.name} {b.kind.value}{flags}\n")
        for net in nl.nets:
            drv = f"{nl.blocks[net.driver[0]].name}.{net.driver[1]}"
            sinks = ", ".join(f"{nl.blocks[s].name}.{p}" for s, p in net.sinks)
            w = "" if net.weight == 1.0 else f" weight={net.weight:g}"
            f.write(f"net {net.name} {drv} -> {sinks}{w}\n")
