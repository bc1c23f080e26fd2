"""End-to-end acceptance suite.

Each test covers one acceptance criterion, checks it against an
independent oracle or a stated tolerance, and prints a PASS/FAIL line
(visible with `pytest -s` or in the failure output).  The directional
experiments (criteria 6 and 7) run full annealing sweeps and dominate the
suite's runtime.
"""

import math
import random
import time

import numpy as np
import pytest
import scipy.sparse
import scipy.sparse.csgraph

from place3d.annealer import (AnnealFlags, Annealer, Hyperparams, PRESETS,
                              moves_per_step, place, theta, zeta)
from place3d.arch import ArchSpec, Style, build_fabric
from place3d.bench import auto_fabric, gen_netlist
from place3d.harness import (RunConfig, TableCache, baseline_config, geomean,
                             ours_config, run_once)
from place3d.lookahead import TableMode, build_table
from place3d.netlist import Block, BlockKind, Net, Netlist
from place3d.partition import (Hypergraph, _balance_bounds, cut_value,
                               partition)
from place3d.placement import Placement, check_legality
from place3d.timing import (build_timing_graph, connection_delays, run_sta,
                            timing_cost)


def report(num: int, desc: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {desc}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


# -- shared fixtures ------------------------------------------------------

REGRESSION_SIZES = [80, 100, 120, 140, 160, 180, 200, 220, 240, 260]


@pytest.fixture(scope="module")
def regression_suite():
    suite = []
    for i, n in enumerate(REGRESSION_SIZES):
        nl = gen_netlist(n, seed=100 + i)
        fabric = auto_fabric(nl, ArchSpec(style=Style.SB))
        suite.append((f"r{n}", nl, fabric))
    return suite


# -- criterion 1: schedule closed forms -----------------------------------

def test_schedule_closed_forms():
    start = time.perf_counter()

    def zeta_ref(w, hp):
        wc = min(max(w, hp.w_min), hp.w_max)
        frac = (hp.w_max - wc) / (hp.w_max - hp.w_min)
        return hp.zeta_max + (hp.zeta_min - hp.zeta_max) * frac ** hp.p_zeta

    def theta_ref(w, hp):
        if w <= 0.15:
            return hp.theta_max
        return hp.theta_max - w ** hp.p_theta * (hp.theta_max - hp.theta_min)

    rng = random.Random(2024)
    presets = list(PRESETS.values())
    worst = 0.0
    for _ in range(10_000):
        if rng.random() < 0.3:
            hp = presets[rng.randrange(len(presets))]
        else:
            zmin = rng.uniform(0.5, 2.0)
            tmin = rng.uniform(0.0, 0.5)
            wmin = rng.uniform(0.05, 0.5)
            hp = Hyperparams(zeta_min=zmin, zeta_max=zmin + rng.uniform(0.0, 2.0),
                             theta_min=tmin, theta_max=tmin + rng.uniform(0.0, 0.5),
                             w_min=wmin, w_max=wmin + rng.uniform(0.05, 0.5),
                             p_zeta=rng.choice([1, 2]),
                             p_theta=rng.choice([1, 2, 3]))
        # w is a rolling mean of acceptance rates, so its domain is [0, 1].
        w = rng.choice([0.0, 1.0, hp.w_min, hp.w_max, 0.15, rng.random(),
                        rng.random(), rng.random()])
        worst = max(worst, abs(zeta(w, hp) - zeta_ref(w, hp)),
                    abs(theta(w, hp) - theta_ref(w, hp)))
    boundary_ok = True
    for hp in presets:
        boundary_ok &= zeta(hp.w_max, hp) == hp.zeta_max
        boundary_ok &= zeta(hp.w_min, hp) == hp.zeta_min
        boundary_ok &= theta(0.15, hp) == hp.theta_max
        boundary_ok &= theta(0.10, hp) == hp.theta_max
    elapsed = time.perf_counter() - start
    report(1, "schedule closed forms",
           worst <= 1e-12 and boundary_ok and elapsed < 1.0,
           f"max |diff| {worst:.2e}, {elapsed:.2f}s")


# -- criterion 2: delay-table exactness -----------------------------------

def _oracle_table(spec: ArchSpec) -> np.ndarray:
    """Test-local full-graph Dijkstra oracle (scipy, independent indexing)."""
    W, H, k = spec.width, spec.height, spec.k
    OP, CH, IP = 0, 1, 2

    def nid(cls, l, x, y):
        return ((cls * k + l) * W + x) * H + y

    n = 3 * k * W * H
    rows, cols, data = [], [], []

    def add(u, v, d):
        rows.append(u)
        cols.append(v)
        data.append(d)

    for l in range(k):
        for x in range(W):
            for y in range(H):
                add(nid(OP, l, x, y), nid(CH, l, x, y), spec.d_co)
                add(nid(CH, l, x, y), nid(IP, l, x, y), spec.d_ci)
                for ddx, ddy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    nx, ny = x + ddx, y + ddy
                    if 0 <= nx < W and 0 <= ny < H:
                        add(nid(CH, l, x, y), nid(CH, l, nx, ny), spec.d_h)
    name = spec.style.name
    sb = name in ("SB", "HYBRID", "HYBRID_O", "HYBRID_I")
    co = name in ("CB", "CB_O", "HYBRID", "HYBRID_O")
    ci = name in ("CB", "CB_I", "HYBRID", "HYBRID_I")
    for x in range(W):
        for y in range(H):
            if (x + y * W) % spec.v_period != 0:
                continue
            for l in range(k):
                o = 1 - l
                if sb:
                    add(nid(CH, l, x, y), nid(CH, o, x, y), spec.d_v)
                if co:
                    add(nid(OP, l, x, y), nid(CH, o, x, y), spec.d_v)
                if ci:
                    add(nid(CH, l, x, y), nid(IP, o, x, y), spec.d_v)

    g = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    ax, ay = 1, 1
    out = np.full((k, k, W, H), 1e9)
    for ls in range(k):
        dist = scipy.sparse.csgraph.dijkstra(g, indices=nid(OP, ls, ax, ay))
        for ld in range(k):
            for x in range(W):
                for y in range(H):
                    d = dist[nid(IP, ld, x, y)]
                    if np.isinf(d):
                        continue
                    dx, dy = abs(x - ax), abs(y - ay)
                    if d < out[ls, ld, dx, dy]:
                        out[ls, ld, dx, dy] = d
        out[ls, ls, 0, 0] = 0.0
    return out


def test_delay_table_exactness():
    start = time.perf_counter()
    mismatches = []
    for style in Style:
        for (W, H) in ((6, 6), (8, 8)):
            for d_v in (0.3, 1.0, 3.0, 5.0):
                spec = ArchSpec(width=W, height=H, style=style, d_v=d_v)
                got = build_table(build_fabric(spec), spec, TableMode.EXACT).entries
                want = _oracle_table(spec)
                if not np.array_equal(got, want):
                    mismatches.append((style.name, W, H, d_v))
    # Homogeneity collapse: all routing edges equal -> AVERAGE == EXACT.
    spec = ArchSpec(width=8, height=8, style=Style.HYBRID, d_h=1.0, d_v=1.0)
    fabric = build_fabric(spec)
    homog = np.array_equal(build_table(fabric, spec, TableMode.AVERAGE).entries,
                           build_table(fabric, spec, TableMode.EXACT).entries)
    # Hybrid dominance.
    dominance = True
    for hybrid, part in ((Style.HYBRID, Style.SB), (Style.HYBRID, Style.CB),
                         (Style.HYBRID_O, Style.CB_O), (Style.HYBRID_I, Style.CB_I),
                         (Style.HYBRID_O, Style.SB), (Style.HYBRID_I, Style.SB)):
        sh = ArchSpec(width=8, height=8, style=hybrid)
        sp = ArchSpec(width=8, height=8, style=part)
        th = build_table(build_fabric(sh), sh).entries
        tp = build_table(build_fabric(sp), sp).entries
        dominance &= bool((th <= tp).all())
    elapsed = time.perf_counter() - start
    report(2, "delay-table exactness vs full-graph Dijkstra oracle",
           not mismatches and homog and dominance and elapsed < 30.0,
           f"{len(mismatches)} mismatching tables, homogeneity {homog}, "
           f"dominance {dominance}, {elapsed:.1f}s")


# -- criterion 3: partitioner quality -------------------------------------

def _random_hypergraph(rng, n):
    kind = [BlockKind.CLB] * n
    n_edges = rng.randrange(n, 3 * n)
    edges = []
    for _ in range(n_edges):
        size = min(n, 2 + int(rng.expovariate(0.7)))
        edges.append(sorted(rng.sample(range(n), size)))
    weights = [rng.choice([1.0, 1.0, 2.0, 5.0]) for _ in edges]
    return Hypergraph(n=n, kind=kind, edges=edges, weights=weights)


def _random_balanced_cut(h, rng, lo, hi):
    n0 = rng.randint(lo, hi)
    perm = list(range(h.n))
    rng.shuffle(perm)
    side = [0] * h.n
    for v in perm[n0:]:
        side[v] = 1
    return cut_value(h, side)


def test_partitioner_quality():
    start = time.perf_counter()
    rng = random.Random(7)
    beats_random = 0
    balanced = 0
    trials = 20
    for _ in range(trials):
        n = rng.randrange(40, 201)
        h = _random_hypergraph(rng, n)
        a = partition(h, eps=0.05, seed=rng.randrange(10 ** 6))
        lo, hi = _balance_bounds(n, 0.05)
        best_random = min(_random_balanced_cut(h, rng, lo, hi)
                          for _ in range(1000))
        if a.cut <= best_random + 1e-9:
            beats_random += 1
        if lo <= a.layer.count(0) <= hi:
            balanced += 1

    # Exhaustive local-optimality for small instances.
    local_opt = True
    for trial in range(10):
        n = rng.randrange(6, 13)
        h = _random_hypergraph(rng, n)
        eps = 0.3                      # wide enough that single moves exist
        a = partition(h, eps=eps, seed=trial)
        lo, hi = _balance_bounds(n, eps)
        base = a.cut
        for v in range(n):
            side = list(a.layer)
            n0 = side.count(0) + (-1 if side[v] == 0 else 1)
            if not (lo <= n0 <= hi):
                continue
            side[v] = 1 - side[v]
            if cut_value(h, side) < base - 1e-9:
                local_opt = False
    elapsed = time.perf_counter() - start
    report(3, "FM partitioner beats random sampling and is locally optimal",
           beats_random == trials and balanced == trials and local_opt
           and elapsed < 60.0,
           f"{beats_random}/{trials} vs random, {balanced}/{trials} balanced, "
           f"local-opt {local_opt}, {elapsed:.1f}s")


# -- criterion 4: timing-cost mechanics -----------------------------------

def test_timing_cost_mechanics():
    spec = ArchSpec(width=12, height=12, style=Style.SB)
    fabric = build_fabric(spec)
    table = build_table(fabric, spec)
    nl = Netlist()
    nl.blocks = [Block(0, "a", BlockKind.CLB, seq=True),
                 Block(1, "b", BlockKind.CLB, seq=True)]
    nl.nets = [Net(0, "n0", driver=(0, 0), sinks=[(1, 0)])]
    nl.validate()
    tg = build_timing_graph(nl)
    sites = fabric.sites_of_kind(BlockKind.CLB)
    rng = random.Random(11)
    tbl = table.entries
    ok_zeta_indep = ok_zeta_one = True
    for _ in range(1000):
        p = Placement(fabric, 2)
        same_layer = rng.random() < 0.5
        (x0, y0), (x1, y1) = rng.sample(sites, 2)
        l0 = rng.randrange(2)
        l1 = l0 if same_layer else rng.randrange(2)
        p.set_loc(0, l0, x0, y0)
        p.set_loc(1, l1, x1, y1)
        rpt = run_sta(tg, connection_delays(tg, p, table))
        if same_layer:
            vals = {timing_cost(tg, rpt, p, table, zeta=z)[0]
                    for z in (0.5, 1.0, 2.3)}
            ok_zeta_indep &= len(vals) == 1
        raw = tbl[l0, l1, abs(x0 - x1), abs(y0 - y1)]
        expect = rpt.criticality[0] * raw
        got = timing_cost(tg, rpt, p, table, zeta=1.0)[0]
        ok_zeta_one &= abs(got - expect) <= 1e-12 * max(1.0, abs(expect))

    # Incremental vs from-scratch timing cost on a 200-block annealing run.
    nl2 = gen_netlist(200, seed=6)
    fabric2 = auto_fabric(nl2, ArchSpec(style=Style.SB))
    table2 = build_table(fabric2, fabric2.spec)
    ann = Annealer(nl2, fabric2, table2, PRESETS["sb"], seed=1,
                   flags=AnnealFlags(check_interval=500))
    ann.run()
    drift = ann.trace.max_drift
    report(4, "timing-cost mechanics and incremental consistency",
           ok_zeta_indep and ok_zeta_one and drift <= 1e-9,
           f"zeta-independent {ok_zeta_indep}, zeta=1 exact {ok_zeta_one}, "
           f"max drift {drift:.2e}")


# -- criterion 5: annealing-loop contracts --------------------------------

def test_annealing_loop_contracts(regression_suite):
    failures = []
    for label, nl, fabric in regression_suite:
        table = build_table(fabric, fabric.spec)
        ann = Annealer(nl, fabric, table, PRESETS["sb"], seed=0)
        p, trace = ann.run()
        if check_legality(p, nl, fabric):
            failures.append(f"{label}: illegal placement")
        if trace.n_moves_per_step != moves_per_step(nl.n_blocks):
            failures.append(f"{label}: move budget mismatch")
        thetas = [r[5] for r in trace.rows]
        if any(b < a - 1e-12 for a, b in zip(thetas, thetas[1:])):
            failures.append(f"{label}: theta decreased")
        alphas = [r[2] for r in trace.rows]
        for i, r in enumerate(trace.rows):
            window = alphas[max(0, i - 4):i + 1]
            if abs(r[3] - sum(window) / len(window)) > 1e-12:
                failures.append(f"{label}: w is not the rolling mean at step {i}")
                break
        if trace.improving_accepted != trace.improving_proposed:
            failures.append(f"{label}: improving move rejected")
        for (bb0, t0), (bb1, t1) in zip(trace.best_tuples, trace.best_tuples[1:]):
            if not (bb1 < bb0 and t1 < t0):
                failures.append(f"{label}: best tuple not dual-improving")
                break
        if trace.quench_exit_cost > trace.quench_entry_cost + 1e-12:
            failures.append(f"{label}: quench increased cost")
    report(5, "annealing loop contracts on the regression suite",
           not failures, "; ".join(failures) or f"{len(regression_suite)} runs clean")


# -- criterion 6: directional comparison vs baseline ----------------------

DIRECTIONAL_SIZES = [300, 320, 350, 380, 420, 460, 500, 550, 600, 700]
DIRECTIONAL_SEEDS = list(range(10))


def _directional_ratio(style: Style, preset: str, seeds) -> tuple[float, float, int]:
    base_d, ours_d = [], []
    slow_runs = 0
    for i, n in enumerate(DIRECTIONAL_SIZES):
        nl = gen_netlist(n, seed=200 + i)
        fabric = auto_fabric(nl, ArchSpec(style=style))
        tables = TableCache(fabric, fabric.spec)
        for seed in seeds:
            for cfg, sink in ((baseline_config(), base_d), (ours_config(), ours_d)):
                res = run_once(nl, fabric, tables, PRESETS[preset], cfg, seed,
                               label=f"n{n}")
                assert res.ok, f"{style.name} n{n} seed{seed} {cfg.name}: {res.error}"
                if res.runtime >= 60.0:
                    slow_runs += 1
                sink.append(res.d_max)
    return geomean(ours_d), geomean(base_d), slow_runs


def test_directional_improvement_over_baseline():
    start = time.perf_counter()
    details = []
    ok = True
    slow = 0
    for style, preset in ((Style.SB, "sb"), (Style.CB, "cb")):
        g_ours, g_base, s = _directional_ratio(style, preset, DIRECTIONAL_SEEDS)
        slow += s
        ratio = g_ours / g_base
        details.append(f"{style.name}: geomean ratio {ratio:.4f} "
                       f"({(ratio - 1) * 100:+.2f}%)")
        ok &= ratio < 1.0
    elapsed = time.perf_counter() - start
    ok &= slow == 0 and elapsed < 90 * 60
    report(6, "geomean critical-path delay beats the baseline (SB and CB)",
           ok, "; ".join(details) + f"; {slow} runs over 60s; {elapsed / 60:.1f} min")


# -- criterion 7: ablation lattice ----------------------------------------

def _single_enhancement_configs() -> list[RunConfig]:
    out = []
    for name, mutate in (
        ("+partition", lambda c: setattr(c.flags, "partition_init", True)),
        ("+zeta", lambda c: setattr(c.flags, "adaptive_zeta", True)),
        ("+theta", lambda c: setattr(c.flags, "adaptive_theta", True)),
        ("+moves", lambda c: setattr(c.flags, "move_ext", True)),
        ("+exact", lambda c: setattr(c, "table_mode", TableMode.EXACT)),
    ):
        cfg = baseline_config()
        cfg.name = name
        mutate(cfg)
        out.append(cfg)
    return out


def test_ablation_lattice(regression_suite):
    seeds = list(range(5))
    configs = [baseline_config()] + _single_enhancement_configs() + [ours_config()]
    dmax: dict[str, list[float]] = {c.name: [] for c in configs}
    for label, nl, fabric in regression_suite:
        tables = TableCache(fabric, fabric.spec)
        for cfg in configs:
            for seed in seeds:
                res = run_once(nl, fabric, tables, PRESETS["sb"], cfg, seed,
                               label=label)
                assert res.ok, f"{label} seed{seed} {cfg.name}: {res.error}"
                dmax[cfg.name].append(res.d_max)
    base = geomean(dmax["baseline"])
    ratios = {name: geomean(vals) / base for name, vals in dmax.items()
              if name != "baseline"}
    singles = {k: v for k, v in ratios.items() if k != "ours"}
    no_degrade = all(v <= 1.02 for v in singles.values())
    full_best = ratios["ours"] <= min(singles.values()) + 1e-9
    detail = ", ".join(f"{k} {v:.4f}" for k, v in ratios.items())
    report(7, "single enhancements never hurt and the full flow wins",
           no_degrade and full_best, detail)


# -- criterion 8: probabilistic layer selection ---------------------------

def _layer_frequency(n_layer1: int, n_total: int, draws: int = 100_000) -> float:
    nl = Netlist()
    nl.blocks = [Block(0, "c", BlockKind.CLB, seq=True)]
    nl.blocks += [Block(i, f"n{i}", BlockKind.CLB, seq=True)
                  for i in range(1, n_total + 1)]
    nl.nets = [Net(i - 1, f"e{i}", driver=(0, i - 1), sinks=[(i, 0)])
               for i in range(1, n_total + 1)]
    nl.validate()
    side = max(8, int(math.ceil(math.sqrt(n_total * 2))) + 4)
    fabric = build_fabric(ArchSpec(width=side, height=side))
    table = build_table(fabric, fabric.spec)
    ann = Annealer(nl, fabric, table, PRESETS["sb"], seed=0)
    p = Placement(fabric, nl.n_blocks)
    sites = fabric.sites_of_kind(BlockKind.CLB)
    p.set_loc(0, 0, *sites[0])
    for i in range(1, n_total + 1):
        layer = 1 if i <= n_layer1 else 0
        p.set_loc(i, layer, *sites[i])
    hits = sum(ann._pick_layer(0, p) for _ in range(draws))
    return hits / draws


def test_probabilistic_layer_selection():
    cases = [(2, 5), (3, 5), (7, 10), (0, 4), (4, 4)]   # (on layer 1, total)
    worst = 0.0
    for n1, nt in cases:
        freq = _layer_frequency(n1, nt)
        worst = max(worst, abs(freq - n1 / nt))
    report(8, "layer choice matches the neighbor distribution",
           worst <= 0.02, f"max |freq - expected| {worst:.4f} over {cases}")
