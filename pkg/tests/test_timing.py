import numpy as np
import pytest

from place3d.arch import ArchSpec, build_fabric
from place3d.lookahead import DelayTable, TableMode
from place3d.netlist import Block, BlockKind, Net, Netlist
from place3d.placement import Placement
from place3d.timing import (build_timing_graph, run_sta, timing_cost,
                            unit_delay_criticalities)


def make_netlist(blocks, nets):
    nl = Netlist()
    nl.blocks = blocks
    nl.nets = nets
    nl.validate()
    return nl


def chain_netlist():
    """IO -> combinational CLB -> sequential CLB."""
    return make_netlist(
        [Block(0, "pin", BlockKind.IO),
         Block(1, "comb", BlockKind.CLB),
         Block(2, "ff", BlockKind.CLB, seq=True)],
        [Net(0, "n0", driver=(0, 0), sinks=[(1, 0)]),
         Net(1, "n1", driver=(1, 0), sinks=[(2, 0)])])


def test_chain_arrival_and_dmax():
    tg = build_timing_graph(chain_netlist())
    rpt = run_sta(tg, [1.0, 0.8])
    # 1.0 wire + 0.2 CLB internal + 0.8 wire.
    assert rpt.d_max == pytest.approx(2.0)
    assert rpt.slack == pytest.approx([0.0, 0.0])
    assert rpt.criticality == pytest.approx([1.0, 1.0])
    assert rpt.critical_path == ["pin", "comb", "ff"]


def test_parallel_paths_slack_and_criticality():
    nl = make_netlist(
        [Block(0, "a", BlockKind.CLB, seq=True),
         Block(1, "b", BlockKind.CLB, seq=True)],
        [Net(0, "slow", driver=(0, 0), sinks=[(1, 0)]),
         Net(1, "fast", driver=(0, 1), sinks=[(1, 1)])])
    tg = build_timing_graph(nl)
    rpt = run_sta(tg, [5.0, 3.0])
    assert rpt.d_max == pytest.approx(5.0)
    assert rpt.slack == pytest.approx([0.0, 2.0])
    assert rpt.criticality == pytest.approx([1.0, 0.6])


def test_criticality_clamped_to_unit_interval():
    nl = make_netlist(
        [Block(0, "a", BlockKind.CLB, seq=True),
         Block(1, "b", BlockKind.CLB, seq=True)],
        [Net(0, "n0", driver=(0, 0), sinks=[(1, 0)]),
         Net(1, "n1", driver=(0, 1), sinks=[(1, 1)])])
    tg = build_timing_graph(nl)
    rpt = run_sta(tg, [100.0, 0.0])
    assert rpt.criticality == pytest.approx([1.0, 0.0])


def test_zero_dmax_gives_zero_criticality():
    nl = make_netlist(
        [Block(0, "a", BlockKind.IO),
         Block(1, "b", BlockKind.IO)],
        [Net(0, "n0", driver=(0, 0), sinks=[(1, 0)])])
    tg = build_timing_graph(nl)
    rpt = run_sta(tg, [0.0])
    assert rpt.d_max == 0.0
    assert rpt.criticality == [0.0]


def test_no_fanout_block_is_endpoint():
    nl = make_netlist(
        [Block(0, "a", BlockKind.CLB, seq=True),
         Block(1, "sink", BlockKind.CLB)],
        [Net(0, "n0", driver=(0, 0), sinks=[(1, 0)])])
    tg = build_timing_graph(nl)
    assert tg.is_capture[1]
    rpt = run_sta(tg, [4.0])
    assert rpt.d_max == pytest.approx(4.0)


def test_effective_delay_scales_only_layer_increment():
    spec = ArchSpec(width=8, height=8)
    fabric = build_fabric(spec)
    entries = np.zeros((2, 2, 8, 8))
    entries[0, 0, 1, 2] = 3.0
    entries[0, 1, 1, 2] = 7.0
    table = DelayTable(entries=entries, mode=TableMode.EXACT, anchor=(1, 1))
    nl = make_netlist(
        [Block(0, "a", BlockKind.CLB, seq=True),
         Block(1, "b", BlockKind.CLB, seq=True)],
        [Net(0, "n0", driver=(0, 0), sinks=[(1, 0)])])
    tg = build_timing_graph(nl)
    p = Placement(fabric, 2)
    p.set_loc(0, 0, 1, 1)
    p.set_loc(1, 1, 2, 3)
    crit_one = run_sta(tg, [7.0])          # single arc, criticality 1
    total, per_conn, per_block = timing_cost(tg, crit_one, p, table, zeta=2.0)
    assert total == pytest.approx(3.0 + 2.0 * (7.0 - 3.0))
    assert per_conn == pytest.approx([11.0])
    assert per_block == pytest.approx([11.0, 11.0])
    # zeta = 1 collapses to the raw table delay.
    total1, _, _ = timing_cost(tg, crit_one, p, table, zeta=1.0)
    assert total1 == pytest.approx(7.0)


def test_criticality_exponent_sharpens_cost():
    spec = ArchSpec(width=8, height=8)
    fabric = build_fabric(spec)
    entries = np.full((2, 2, 8, 8), 2.0)
    table = DelayTable(entries=entries, mode=TableMode.EXACT, anchor=(1, 1))
    nl = make_netlist(
        [Block(0, "a", BlockKind.CLB, seq=True),
         Block(1, "b", BlockKind.CLB, seq=True)],
        [Net(0, "slow", driver=(0, 0), sinks=[(1, 0)]),
         Net(1, "fast", driver=(0, 1), sinks=[(1, 1)])])
    tg = build_timing_graph(nl)
    p = Placement(fabric, 2)
    p.set_loc(0, 0, 1, 1)
    p.set_loc(1, 0, 2, 3)
    rpt = run_sta(tg, [5.0, 3.0])          # criticalities 1.0 and 0.6
    t1, _, _ = timing_cost(tg, rpt, p, table, zeta=1.0, crit_exponent=1)
    t8, _, _ = timing_cost(tg, rpt, p, table, zeta=1.0, crit_exponent=8)
    assert t1 == pytest.approx(2.0 * (1.0 + 0.6))
    assert t8 == pytest.approx(2.0 * (1.0 + 0.6 ** 8))


def test_unit_delay_criticalities():
    tg = build_timing_graph(chain_netlist())
    per_conn, per_block = unit_delay_criticalities(tg)
    assert per_conn == pytest.approx([1.0, 1.0])
    assert per_block == pytest.approx([1.0, 1.0, 1.0])
