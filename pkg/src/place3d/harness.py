"""End-to-end runs, sweeps and reporting.

A run places one netlist with one configuration and seed.  Regardless of
the delay model the placer optimized against, the reported critical-path
delay is always measured with an EXACT-mode table, so baseline and
enhanced configurations are compared on the same yardstick.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace

from .annealer import AnnealFlags, Hyperparams, PRESETS, place
from .arch import ArchSpec, Fabric, build_fabric
from .bench import auto_fabric
from .lookahead import DelayTable, TableMode, build_table
from .netlist import Netlist, load_netlist
from .placement import Placement, check_legality, hpwl, load_placement, save_placement
from .timing import build_timing_graph, sta_on_placement


@dataclass
class RunConfig:
    name: str
    table_mode: TableMode = TableMode.EXACT
    flags: AnnealFlags = field(default_factory=AnnealFlags)


def baseline_config() -> RunConfig:
    return RunConfig(name="baseline", table_mode=TableMode.AVERAGE,
                     flags=AnnealFlags(partition_init=False, adaptive_zeta=False,
                                       adaptive_theta=False, move_ext=False))


def ours_config() -> RunConfig:
    return RunConfig(name="ours", table_mode=TableMode.EXACT, flags=AnnealFlags())


@dataclass
class RunResult:
    config: str
    netlist: str
    seed: int
    d_max: float
    hpwl: float
    runtime: float
    ok: bool = True
    error: str = ""


class TableCache:
    """Delay tables keyed by mode; fabrics are fixed per harness instance."""

    def __init__(self, fabric: Fabric, spec: ArchSpec):
        self.fabric = fabric
        self.spec = spec
        self._tables: dict[TableMode, DelayTable] = {}

    def get(self, mode: TableMode) -> DelayTable:
        if mode not in self._tables:
            self._tables[mode] = build_table(self.fabric, self.spec, mode)
        return self._tables[mode]


def run_once(netlist: Netlist, fabric: Fabric, tables: TableCache,
             hp: Hyperparams, config: RunConfig, seed: int,
             label: str = "", out_dir: str | None = None) -> RunResult:
    start = time.perf_counter()
    try:
        table = tables.get(config.table_mode)
        placement, trace = place(netlist, fabric, table, hp, seed=seed,
                                 flags=replace(config.flags))
        errs = check_legality(placement, netlist, fabric)
        if errs:
            raise AssertionError(f"illegal placement: {errs[:3]}")
        tg = build_timing_graph(netlist)
        report = sta_on_placement(tg, placement, tables.get(TableMode.EXACT))
        wl, _ = hpwl(placement, netlist)
        elapsed = time.perf_counter() - start
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
            save_placement(placement, netlist, os.path.join(out_dir, "placement.place"),
                           seed=seed)
            trace.save(os.path.join(out_dir, "trace.tsv"))
        return RunResult(config=config.name, netlist=label, seed=seed,
                         d_max=report.d_max, hpwl=wl, runtime=elapsed)
    except Exception as exc:  # noqa: BLE001 - failed runs are reported, not fatal
        return RunResult(config=config.name, netlist=label, seed=seed,
                         d_max=float("nan"), hpwl=float("nan"),
                         runtime=time.perf_counter() - start, ok=False,
                         error=f"{type(exc).__name__}: {exc}")


def geomean(values: list[float]) -> float:
    vals = [v for v in values if v > 0 and math.isfinite(v)]
    if not vals:
        return float("nan")
    return math.exp(sum(math.log(v) for v in vals) / len(vals))


@dataclass
class SweepReport:
    results: list[RunResult]
    geomeans: dict[str, tuple[float, float]]          # config -> (d_max, hpwl)
    delta_pct: dict[str, tuple[float, float]] | None  # vs the first config
    failed: list[RunResult]

    def format(self) -> str:
        lines = ["config\tnetlist\tseed\td_max\thpwl\truntime_s\tstatus"]
        for r in self.results:
            status = "ok" if r.ok else f"FAILED: {r.error}"
            lines.append(f"{r.config}\t{r.netlist}\t{r.seed}\t{r.d_max:.6g}\t"
                         f"{r.hpwl:.6g}\t{r.runtime:.2f}\t{status}")
        lines.append("")
        lines.append("config\tgeomean_d_max\tgeomean_hpwl")
        for cfg, (d, w) in self.geomeans.items():
            lines.append(f"{cfg}\t{d:.6g}\t{w:.6g}")
        if self.delta_pct is None:
            lines.append("delta: undefined (need at least two configs)")
        else:
            for cfg, (dd, dw) in self.delta_pct.items():
                lines.append(f"delta {cfg} vs reference: d_max {dd:+.2f}%  hpwl {dw:+.2f}%")
        if self.failed:
            lines.append(f"WARNING: {len(self.failed)} run(s) failed and were "
                         "excluded from geomeans")
        return "\n".join(lines) + "\n"


def sweep(netlists: list[tuple[str, Netlist]], fabric: Fabric, spec: ArchSpec,
          hp: Hyperparams, configs: list[RunConfig], seeds: list[int],
          out_dir: str | None = None) -> SweepReport:
    tables = TableCache(fabric, spec)
    results = []
    for label, nl in netlists:
        for cfg in configs:
            for seed in seeds:
                results.append(run_once(nl, fabric, tables, hp, cfg, seed, label=label))
    geomeans = {}
    for cfg in configs:
        rs = [r for r in results if r.config == cfg.name and r.ok]
        geomeans[cfg.name] = (geomean([r.d_max for r in rs]),
                              geomean([r.hpwl for r in rs]))
    delta = None
    if len(configs) >= 2:
        ref = geomeans[configs[0].name]
        delta = {}
        for cfg in configs[1:]:
            g = geomeans[cfg.name]
            delta[cfg.name] = ((g[0] / ref[0] - 1.0) * 100.0,
                               (g[1] / ref[1] - 1.0) * 100.0)
    report = SweepReport(results=results, geomeans=geomeans, delta_pct=delta,
                         failed=[r for r in results if not r.ok])
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep.tsv"), "w", encoding="utf-8") as f:
            f.write(report.format())
    return report


def summarize_run(run_dir: str, netlist: Netlist, fabric: Fabric,
                  spec: ArchSpec) -> str:
    """Cross-checked summary of a completed run directory."""
    place_path = os.path.join(run_dir, "placement.place")
    trace_path = os.path.join(run_dir, "trace.tsv")
    if not (os.path.exists(place_path) and os.path.exists(trace_path)):
        raise FileNotFoundError(f"no runs found in {run_dir}")
    placement, seed = load_placement(place_path, netlist, fabric)
    table = build_table(fabric, spec, TableMode.EXACT)
    tg = build_timing_graph(netlist)
    report = sta_on_placement(tg, placement, table)
    wl, _ = hpwl(placement, netlist)
    from .annealer import RunTrace
    rows = RunTrace.load_rows(trace_path)
    lines = [
        f"run dir: {run_dir}",
        f"seed: {seed}",
        f"d_max: {report.d_max:.6g}",
        f"hpwl: {wl:.6g}",
        f"critical path: {' -> '.join(report.critical_path)}",
        f"temperature steps: {len(rows)}",
    ]
    if rows:
        alphas = [r["alpha"] for r in rows]
        lines.append(f"acceptance: start {alphas[0]:.3f} end {alphas[-1]:.3f} "
                     f"min {min(alphas):.3f}")
    # Plot-ready criticality histogram (tab-separated bins).
    bins = [0] * 10
    for c in report.criticality:
        bins[min(9, int(c * 10))] += 1
    lines.append("criticality_bin\tcount")
    for i, cnt in enumerate(bins):
        lines.append(f"{i / 10:.1f}-{(i + 1) / 10:.1f}\t{cnt}")
    return "\n".join(lines) + "\n"
