"""Static timing analysis over a placed netlist.

The timing graph has one launch node and one capture node per block
(output and input side); sequential blocks and IOs are clock boundaries.
Connection arcs take their delay straight from the lookahead table (the
table already includes the pin hookup edges).  The per-connection timing
cost separates the intra-layer baseline from the vertical increment:

    eff_delay = d2d + zeta * (d3d - d2d)
    cost      = criticality^CE * eff_delay

where d2d is the same-layer table entry at the connection's offset and
d3d the actual (layer pair) entry.  zeta therefore scales only the cost
of crossing layers; with zeta = 1 the cost collapses to the raw table
delay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lookahead import DelayTable
from .netlist import BlockKind, Netlist
from .placement import Placement

# Intra-block combinational delays used by the synthetic benchmarks.
BLOCK_DELAY = {
    BlockKind.IO: 0.0,
    BlockKind.CLB: 0.2,
    BlockKind.DSP: 0.8,
    BlockKind.BRAM: 0.6,
}


class TimingError(Exception):
    pass


@dataclass
class TimingGraph:
    """Static structure shared by every STA run on one netlist."""
    netlist: Netlist
    conn_src: list[int]            # driver block per connection
    conn_snk: list[int]            # sink block per connection
    conn_net: list[int]
    block_delay: list[float]       # internal in->out delay (0 at boundaries)
    is_launch: list[bool]          # arrival starts at 0 on the output side
    is_capture: list[bool]         # path endpoint on the input side
    topo: list[int]                # blocks in combinational topological order
    in_conns: list[list[int]]
    out_conns: list[list[int]]


@dataclass
class TimingReport:
    d_max: float
    slack: list[float]             # per connection
    criticality: list[float]       # per connection, in [0, 1]
    critical_path: list[str]       # block names, launch to capture


def build_timing_graph(netlist: Netlist) -> TimingGraph:
    n = netlist.n_blocks
    conn_src, conn_snk, conn_net = [], [], []
    in_conns: list[list[int]] = [[] for _ in range(n)]
    out_conns: list[list[int]] = [[] for _ in range(n)]
    for d, s, net_id in netlist.connections():
        cid = len(conn_src)
        conn_src.append(d)
        conn_snk.append(s)
        conn_net.append(net_id)
        out_conns[d].append(cid)
        in_conns[s].append(cid)
    boundary = [b.seq or b.kind is BlockKind.IO for b in netlist.blocks]
    block_delay = [0.0 if boundary[b.id] else BLOCK_DELAY[b.kind] for b in netlist.blocks]
    is_launch = list(boundary)
    # Blocks with no fanout are also endpoints so no path is unconstrained.
    is_capture = [boundary[i] or not out_conns[i] for i in range(n)]
    # Kahn ordering for arrival propagation.  A launch block's output time
    # is fixed at zero, so arcs leaving launch blocks impose no ordering;
    # every other in-arc must be resolved first (including arcs into
    # boundary blocks, whose arrival time is still a path endpoint).
    indeg = [sum(1 for cid in in_conns[i] if not is_launch[conn_src[cid]])
             for i in range(n)]
    stack = [i for i in range(n) if indeg[i] == 0]
    topo = []
    while stack:
        v = stack.pop()
        topo.append(v)
        if is_launch[v]:
            continue
        for cid in out_conns[v]:
            s = conn_snk[cid]
            indeg[s] -= 1
            if indeg[s] == 0:
                stack.append(s)
    if len(topo) != n:
        raise TimingError("combinational cycle in timing graph")
    return TimingGraph(netlist=netlist, conn_src=conn_src, conn_snk=conn_snk,
                       conn_net=conn_net, block_delay=block_delay,
                       is_launch=is_launch, is_capture=is_capture, topo=topo,
                       in_conns=in_conns, out_conns=out_conns)


def connection_delays(tg: TimingGraph, p: Placement, table: DelayTable) -> list[float]:
    tbl = table.as_lists()
    layer, xs, ys = p.layer, p.x, p.y
    out = []
    for d, s in zip(tg.conn_src, tg.conn_snk):
        row = tbl[layer[d]][layer[s]]
        out.append(row[abs(xs[d] - xs[s])][abs(ys[d] - ys[s])])
    return out


def run_sta(tg: TimingGraph, conn_delay: list[float]) -> TimingReport:
    """Longest-path arrival/required sweep with unit-interval criticalities."""
    n = tg.netlist.n_blocks
    arr_in = [0.0] * n
    arr_out = [0.0] * n
    for b in tg.topo:
        a = 0.0
        for cid in tg.in_conns[b]:
            v = arr_out[tg.conn_src[cid]] + conn_delay[cid]
            if v > a:
                a = v
        arr_in[b] = a
        arr_out[b] = 0.0 if tg.is_launch[b] else a + tg.block_delay[b]
    d_max = 0.0
    worst = -1
    for b in range(n):
        if tg.is_capture[b] and arr_in[b] > d_max:
            d_max = arr_in[b]
            worst = b
    req_out = [float("inf")] * n
    req_in = [float("inf")] * n
    for b in reversed(tg.topo):
        r = float("inf")
        for cid in tg.out_conns[b]:
            s = tg.conn_snk[cid]
            v = req_in[s] - conn_delay[cid]
            if v < r:
                r = v
        req_out[b] = r
        req_in[b] = d_max if tg.is_capture[b] else r - tg.block_delay[b]
    slack = []
    crit = []
    for cid in range(len(tg.conn_src)):
        s = req_in[tg.conn_snk[cid]] - arr_out[tg.conn_src[cid]] - conn_delay[cid]
        slack.append(s)
        if d_max <= 0.0:
            crit.append(0.0)
        else:
            crit.append(min(1.0, max(0.0, 1.0 - s / d_max)))
    path = _trace_path(tg, conn_delay, arr_in, arr_out, worst) if worst >= 0 else []
    return TimingReport(d_max=d_max, slack=slack, criticality=crit, critical_path=path)


def _trace_path(tg, conn_delay, arr_in, arr_out, endpoint) -> list[str]:
    names = [b.name for b in tg.netlist.blocks]
    path = [names[endpoint]]
    b = endpoint
    while True:
        best = -1
        for cid in tg.in_conns[b]:
            d = tg.conn_src[cid]
            if abs(arr_out[d] + conn_delay[cid] - arr_in[b]) < 1e-12:
                best = d
                break
        if best < 0:
            break
        path.append(names[best])
        if tg.is_launch[best]:
            break
        b = best
    return list(reversed(path))


def sta_on_placement(tg: TimingGraph, p: Placement, table: DelayTable) -> TimingReport:
    return run_sta(tg, connection_delays(tg, p, table))


def timing_cost(tg: TimingGraph, report: TimingReport, p: Placement,
                table: DelayTable, zeta: float,
                crit_exponent: int = 1) -> tuple[float, list[float], list[float]]:
    """Total timing cost, per-connection costs and per-block attribution."""
    tbl = table.as_lists()
    layer, xs, ys = p.layer, p.x, p.y
    ce = crit_exponent
    per_conn = []
    per_block = [0.0] * tg.netlist.n_blocks
    total = 0.0
    for cid, (d, s) in enumerate(zip(tg.conn_src, tg.conn_snk)):
        dx, dy = abs(xs[d] - xs[s]), abs(ys[d] - ys[s])
        d2d = tbl[layer[d]][layer[d]][dx][dy]
        d3d = tbl[layer[d]][layer[s]][dx][dy]
        eff = d2d + zeta * (d3d - d2d)
        c = report.criticality[cid] ** ce * eff
        per_conn.append(c)
        per_block[d] += c
        per_block[s] += c
        total += c
    return total, per_conn, per_block


def unit_delay_criticalities(tg: TimingGraph) -> tuple[list[float], list[float]]:
    """Pre-placement criticalities: STA with unit wire delay per connection.

    Returns (per-connection criticality, per-block criticality), the block
    value being the max over its incident connections.
    """
    report = run_sta(tg, [1.0] * len(tg.conn_src))
    per_block = [0.0] * tg.netlist.n_blocks
    for cid, c in enumerate(report.criticality):
        d, s = tg.conn_src[cid], tg.conn_snk[cid]
        if c > per_block[d]:
            per_block[d] = c
        if c > per_block[s]:
            per_block[s] = c
    return report.criticality, per_block
