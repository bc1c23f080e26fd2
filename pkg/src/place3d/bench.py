"""Synthetic benchmark generation and fabric auto-sizing.

Netlists are layered DAGs: blocks are laid out in a random topological
order (input IOs first, output IOs last) and every driver's net fans out
to blocks later in the order with a locality-biased offset, so the result
is acyclic by construction and deterministic for a fixed seed.  Kind
counts follow the default fabric ratio (75% CLB, 12.5% DSP, 12.5% BRAM of
the interior blocks).
"""

from __future__ import annotations

import random
from dataclasses import replace

from .arch import ArchSpec, ArchError, Fabric, build_fabric
from .netlist import Block, BlockKind, Net, Netlist


def gen_netlist(n_blocks: int, seed: int = 0, seq_fraction: float = 0.3,
                io_fraction: float = 0.08, avg_fanout: float = 3.0,
                locality: float = 0.1) -> Netlist:
    if n_blocks < 6:
        raise ValueError("need at least 6 blocks")
    rng = random.Random(seed)
    n_io = max(4, round(io_fraction * n_blocks))
    n_io += n_io % 2
    interior = n_blocks - n_io
    n_dsp = max(1, round(0.125 * interior))
    n_bram = max(1, round(0.125 * interior))
    n_clb = interior - n_dsp - n_bram
    if n_clb < 1:
        raise ValueError("block budget leaves no CLBs")

    kinds = ([BlockKind.CLB] * n_clb + [BlockKind.DSP] * n_dsp
             + [BlockKind.BRAM] * n_bram)
    rng.shuffle(kinds)
    n_in = n_io // 2

    nl = Netlist()
    for i in range(n_in):
        nl.blocks.append(Block(id=i, name=f"iin{i}", kind=BlockKind.IO))
    for j, kind in enumerate(kinds):
        bid = n_in + j
        seq = kind is BlockKind.CLB and rng.random() < seq_fraction
        nl.blocks.append(Block(id=bid, name=f"{kind.value.lower()}{j}", kind=kind, seq=seq))
    for i in range(n_io - n_in):
        bid = n_in + interior + i
        nl.blocks.append(Block(id=bid, name=f"iout{i}", kind=BlockKind.IO))

    n = n_blocks
    span = max(4, int(locality * n))
    in_pins = [0] * n
    has_fanin = [False] * n
    for i in range(n_in + interior):
        fanout = 1 + min(int(rng.expovariate(1.0 / max(avg_fanout - 1.0, 0.25))), 7)
        sinks = []
        seen = {i}
        lo = max(i + 1, n_in)
        for _ in range(fanout):
            j = lo + int(rng.expovariate(1.0 / span))
            if j >= n:
                j = rng.randrange(lo, n)
            if j in seen:
                continue
            seen.add(j)
            sinks.append(j)
        if not sinks:
            sinks.append(rng.randrange(lo, n))
        net = Net(id=len(nl.nets), name=f"n{i}", driver=(i, 0), sinks=[])
        for j in sorted(sinks):
            net.sinks.append((j, in_pins[j]))
            in_pins[j] += 1
            has_fanin[j] = True
        nl.nets.append(net)

    # Every non-source block gets at least one fanin.
    for j in range(n_in, n):
        if not has_fanin[j]:
            # Nets are ordered by driver id, so this keeps the DAG property.
            net = nl.nets[rng.randrange(min(j, len(nl.nets)))]
            net.sinks.append((j, in_pins[j]))
            in_pins[j] += 1
            has_fanin[j] = True

    nl.validate()
    return nl


def auto_fabric(netlist: Netlist, spec_template: ArchSpec,
                max_util: float = 0.9) -> Fabric:
    """Smallest square fabric fitting every kind at or under max_util."""
    counts = {k: 0 for k in BlockKind}
    for b in netlist.blocks:
        counts[b.kind] += 1
    for W in range(8, 256):
        try:
            fabric = build_fabric(replace(spec_template, width=W, height=W))
        except ArchError:
            continue
        if all(counts[k] <= max_util * fabric.capacity(k)
               for k in BlockKind if counts[k]):
            return fabric
    raise ArchError("no square fabric up to 255x255 fits the netlist")


def utilization(netlist: Netlist, fabric: Fabric) -> float:
    """Worst per-kind site utilization."""
    counts = {k: 0 for k in BlockKind}
    for b in netlist.blocks:
        counts[b.kind] += 1
    return max(counts[k] / fabric.capacity(k) for k in BlockKind if counts[k])
