"""Command-line front end.

Subcommands: gen, partition, delay-table, place, report, sweep.
Exit codes: 0 success, 2 usage error, 3 bad input, 4 infeasible placement.
"""

from __future__ import annotations

import argparse
import os
import sys

from .annealer import AnnealFlags, PRESETS, place
from .arch import ArchError, ArchSpec, build_fabric, load_archspec
from .bench import auto_fabric, gen_netlist
from .harness import (RunConfig, TableCache, baseline_config, ours_config,
                      run_once, summarize_run, sweep)
from .lookahead import TableMode, build_table, dump_table
from .netlist import NetlistError, load_netlist, save_netlist
from .partition import (CapacityError, Hypergraph, hyperedge_weights, partition)
from .timing import build_timing_graph, unit_delay_criticalities

EXIT_INPUT = 3
EXIT_INFEASIBLE = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", help="architecture spec file (INI); default arch if omitted")
    p.add_argument("--netlist", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(PRESETS), default="sb")
    p.add_argument("--out", default="run_out")


def _add_ablation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["baseline", "ours"], default="ours")
    p.add_argument("--no-partition-init", action="store_true")
    p.add_argument("--no-adaptive-zeta", action="store_true")
    p.add_argument("--no-adaptive-theta", action="store_true")
    p.add_argument("--no-move-ext", action="store_true")
    p.add_argument("--delay-model", choices=["average", "exact"])


def _config_from_args(args) -> RunConfig:
    cfg = baseline_config() if args.mode == "baseline" else ours_config()
    fl = cfg.flags
    if args.no_partition_init:
        fl.partition_init = False
    if args.no_adaptive_zeta:
        fl.adaptive_zeta = False
    if args.no_adaptive_theta:
        fl.adaptive_theta = False
    if args.no_move_ext:
        fl.move_ext = False
    if args.delay_model:
        cfg.table_mode = TableMode[args.delay_model.upper()]
    cfg.name = args.mode
    return cfg


def _load_arch(args) -> ArchSpec:
    return load_archspec(args.arch) if args.arch else ArchSpec()


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="place3d",
                                 description="Two-layer 3D FPGA placement engine")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a synthetic netlist")
    g.add_argument("--blocks", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--seq-fraction", type=float, default=0.3)
    g.add_argument("--io-fraction", type=float, default=0.08)
    g.add_argument("--avg-fanout", type=float, default=3.0)
    g.add_argument("--out", required=True)

    pt = sub.add_parser("partition", help="layer assignment for a netlist")
    pt.add_argument("--netlist", required=True)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--eps", type=float, default=0.05)
    pt.add_argument("--out", help="output file (stdout if omitted)")

    dt = sub.add_parser("delay-table", help="build and dump a delay table")
    dt.add_argument("--arch", required=True)
    dt.add_argument("--mode", choices=["average", "exact"], default="exact")
    dt.add_argument("--out", required=True)

    pl = sub.add_parser("place", help="run the annealing placer")
    _add_common(pl)
    _add_ablation(pl)
    pl.add_argument("--init-from", help="layer assignment file from `partition`")

    rp = sub.add_parser("report", help="summarize a run directory")
    rp.add_argument("--run", required=True)
    rp.add_argument("--netlist", required=True)
    rp.add_argument("--arch")
    rp.add_argument("--preset", choices=sorted(PRESETS), default="sb")

    sw = sub.add_parser("sweep", help="run a config x seed matrix")
    sw.add_argument("--arch")
    sw.add_argument("--netlists", required=True, help="comma-separated netlist files")
    sw.add_argument("--seeds", default="0", help="comma-separated seeds")
    sw.add_argument("--preset", choices=sorted(PRESETS), default="sb")
    sw.add_argument("--out", default="sweep_out")

    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except (NetlistError, ArchError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def _dispatch(args) -> int:
    if args.cmd == "gen":
        nl = gen_netlist(args.blocks, seed=args.seed, seq_fraction=args.seq_fraction,
                         io_fraction=args.io_fraction, avg_fanout=args.avg_fanout)
        save_netlist(nl, args.out)
        print(f"wrote {args.out}: {nl.n_blocks} blocks, {len(nl.nets)} nets")
        return 0

    if args.cmd == "partition":
        nl = load_netlist(args.netlist)
        tg = build_timing_graph(nl)
        crit_conn, _ = unit_delay_criticalities(tg)
        net_crit = [0.0] * len(nl.nets)
        for cid, c in enumerate(crit_conn):
            net_crit[tg.conn_net[cid]] = max(net_crit[tg.conn_net[cid]], c)
        hg = Hypergraph.from_netlist(nl, hyperedge_weights(nl, net_crit))
        assign = partition(hg, eps=args.eps, seed=args.seed)
        lines = [f"block {b.name} {assign.layer[b.id]}" for b in nl.blocks]
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
        print(f"# cut={assign.cut:g} imbalance={assign.imbalance:.4f}", file=sys.stderr)
        return 0

    if args.cmd == "delay-table":
        spec = load_archspec(args.arch)
        fabric = build_fabric(spec)
        table = build_table(fabric, spec, TableMode[args.mode.upper()])
        dump_table(table, args.out)
        print(f"wrote {args.out}")
        return 0

    if args.cmd == "place":
        spec = _load_arch(args)
        nl = load_netlist(args.netlist)
        if args.arch:
            fabric = build_fabric(spec)
        else:
            fabric = auto_fabric(nl, spec)
            spec = fabric.spec
        cfg = _config_from_args(args)
        init = None
        if args.init_from:
            init = _placement_from_assignment(args.init_from, nl, fabric)
        hp = PRESETS[args.preset]
        tables = TableCache(fabric, spec)
        if init is not None:
            table = tables.get(cfg.table_mode)
            placement, trace = place(nl, fabric, table, hp, seed=args.seed,
                                     flags=cfg.flags, init=init)
            os.makedirs(args.out, exist_ok=True)
            from .placement import save_placement
            save_placement(placement, nl, os.path.join(args.out, "placement.place"),
                           seed=args.seed)
            trace.save(os.path.join(args.out, "trace.tsv"))
            print(f"placed {nl.n_blocks} blocks; trace in {args.out}")
            return 0
        result = run_once(nl, fabric, tables, hp, cfg, args.seed,
                          label=os.path.basename(args.netlist), out_dir=args.out)
        if not result.ok:
            print(f"error: {result.error}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"d_max={result.d_max:.6g} hpwl={result.hpwl:.6g} "
              f"runtime={result.runtime:.2f}s out={args.out}")
        return 0

    if args.cmd == "report":
        nl = load_netlist(args.netlist)
        spec = load_archspec(args.arch) if args.arch else None
        if spec is None:
            fabric = auto_fabric(nl, ArchSpec())
            spec = fabric.spec
        else:
            fabric = build_fabric(spec)
        sys.stdout.write(summarize_run(args.run, nl, fabric, spec))
        return 0

    if args.cmd == "sweep":
        paths = [p for p in args.netlists.split(",") if p]
        netlists = [(os.path.basename(p), load_netlist(p)) for p in paths]
        spec = load_archspec(args.arch) if args.arch else None
        if spec is None:
            fabric = auto_fabric(max((nl for _, nl in netlists),
                                     key=lambda n: n.n_blocks), ArchSpec())
            spec = fabric.spec
        else:
            fabric = build_fabric(spec)
        seeds = [int(s) for s in args.seeds.split(",") if s]
        hp = PRESETS[args.preset]
        report = sweep(netlists, fabric, spec, hp,
                       [baseline_config(), ours_config()], seeds, out_dir=args.out)
        sys.stdout.write(report.format())
        return 0

    raise AssertionError(args.cmd)


def _placement_from_assignment(path: str, nl, fabric):
    from .partition import LayerAssignment, initial_placement
    layer = [0] * nl.n_blocks
    with open(path, "r", encoding="utf-8") as f:
        for ln in f:
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            toks = ln.split()
            if toks[0] != "block" or len(toks) != 3:
                raise ValueError(f"malformed assignment line: {ln!r}")
            layer[nl.block_by_name(toks[1]).id] = int(toks[2])
    assign = LayerAssignment(layer=layer, cut=0.0, imbalance=0.0)
    return initial_placement(nl, fabric, assign)


if __name__ == "__main__":
    sys.exit(main())
