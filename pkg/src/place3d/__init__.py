"""Timing-driven simulated-annealing placement for two-layer 3D FPGAs."""

from .annealer import AnnealFlags, Hyperparams, PRESETS, place, theta, zeta
from .arch import ArchSpec, Fabric, Style, build_fabric
from .bench import auto_fabric, gen_netlist
from .lookahead import DelayTable, TableMode, build_table, lookup
from .netlist import Block, BlockKind, Net, Netlist, load_netlist, save_netlist
from .placement import Loc, Placement, check_legality, hpwl
from .timing import TimingReport, build_timing_graph, sta_on_placement

__all__ = [
    "AnnealFlags", "ArchSpec", "Block", "BlockKind", "DelayTable", "Fabric",
    "Hyperparams", "Loc", "Net", "Netlist", "PRESETS", "Placement", "Style",
    "TableMode", "TimingReport", "auto_fabric", "build_fabric",
    "build_table", "build_timing_graph", "check_legality", "gen_netlist",
    "hpwl", "load_netlist", "lookup", "place", "save_netlist",
    "sta_on_placement", "theta", "zeta",
]
