"""3D-aware simulated-annealing placer.

The engine anneals a legal placement under the adaptive total cost

    dC_total = theta * dC_timing / base_timing
             + (1 - theta) * dC_bb / base_bb

where the baselines are the totals recorded at the previous temperature
step.  Two schedules react to w, the 5-step rolling mean of the move
acceptance rate: zeta(w) scales the vertical increment of the timing cost
(high early, relaxing as the run cools) and theta(w) shifts weight from
wirelength to timing (constrained to be nondecreasing).  Moves are chosen
by an epsilon-greedy bandit over five operators: uniform, centroid,
median, feasible-region and layer-swap; centroid and median pick their
destination layer probabilistically from the block's neighbor
distribution.  The best placement is tracked with a dual criterion: it is
replaced only by candidates that improve wirelength and timing cost
simultaneously, and a final zero-temperature quench polishes it.
"""

from __future__ import annotations

import bisect
import enum
import math
import random
from dataclasses import dataclass, field

from .arch import Fabric
from .lookahead import DelayTable
from .netlist import BlockKind, Netlist
from .partition import (CapacityError, Hypergraph, LayerAssignment,
                        hyperedge_weights, initial_placement, partition,
                        random_placement)
from .placement import (Placement, check_legality, crossing_factor,
                        net_bb_cost, net_pin_blocks)
from .timing import (TimingGraph, build_timing_graph, connection_delays,
                     run_sta, unit_delay_criticalities)


@dataclass(frozen=True)
class Hyperparams:
    zeta_min: float
    zeta_max: float
    theta_min: float
    theta_max: float
    w_min: float
    w_max: float
    p_zeta: int = 1
    p_theta: int = 1

    def __post_init__(self):
        if self.zeta_min > self.zeta_max or self.theta_min > self.theta_max:
            raise ValueError("schedule bounds out of order")
        if not self.w_min < self.w_max:
            raise ValueError("w_min must be < w_max")
        if self.p_zeta not in (1, 2):
            raise ValueError("p_zeta must be 1 or 2")
        if self.p_theta < 1:
            raise ValueError("p_theta must be a positive integer")


# Tuned presets per architecture style.
PRESETS = {
    "cb": Hyperparams(zeta_min=1.0, zeta_max=1.6, theta_min=0.03, theta_max=0.51,
                      w_min=0.32, w_max=0.41, p_zeta=1, p_theta=1),
    "cb-o": Hyperparams(zeta_min=1.0, zeta_max=1.4, theta_min=0.09, theta_max=0.80,
                        w_min=0.16, w_max=0.31, p_zeta=1, p_theta=1),
    "cb-i": Hyperparams(zeta_min=1.0, zeta_max=2.8, theta_min=0.03, theta_max=0.51,
                        w_min=0.61, w_max=0.79, p_zeta=1, p_theta=1),
    "sb": Hyperparams(zeta_min=1.0, zeta_max=2.0, theta_min=0.35, theta_max=0.79,
                      w_min=0.15, w_max=0.26, p_zeta=2, p_theta=1),
}


def zeta(w: float, hp: Hyperparams) -> float:
    """Vertical timing scale: nonincreasing in w, clamped to the w window."""
    wc = min(max(w, hp.w_min), hp.w_max)
    frac = (hp.w_max - wc) / (hp.w_max - hp.w_min)
    return hp.zeta_max + (hp.zeta_min - hp.zeta_max) * frac ** hp.p_zeta


def theta(w: float, hp: Hyperparams, floor: float = 0.0) -> float:
    """Timing weight; saturates at theta_max once w drops to 15%."""
    if w > 0.15:
        raw = hp.theta_max - w ** hp.p_theta * (hp.theta_max - hp.theta_min)
    else:
        raw = hp.theta_max
    return max(raw, floor)


def moves_per_step(n_movable: int) -> int:
    return max(1, round(0.5 * n_movable ** (4 / 3)))


class MoveKind(enum.IntEnum):
    UNIFORM = 0
    CENTROID = 1
    MEDIAN = 2
    FEASIBLE_REGION = 3
    LAYER_SWAP = 4


@dataclass
class MoveProposal:
    kind: MoveKind
    block: int
    layer: int
    x: int
    y: int
    partner: int = -1   # displaced block for swaps, -1 for moves to free sites


@dataclass
class AnnealFlags:
    partition_init: bool = True
    adaptive_zeta: bool = True
    adaptive_theta: bool = True
    move_ext: bool = True
    static_theta: float = 0.5
    weighted_centroid: bool = False
    crit_exponent: int = 1
    w_z: float = 0.0
    eps: float = 0.05           # partitioner imbalance
    check_interval: int = 0     # moves between incremental-vs-scratch audits
    debug_legal: bool = False
    max_steps: int = 1000
    quench_min_attempts: int = 200


@dataclass
class RunTrace:
    """One row per temperature step plus run-level counters."""
    columns = ("step", "T", "alpha", "w", "zeta", "theta", "c_bb", "c_timing", "d_max")
    rows: list[tuple] = field(default_factory=list)
    best_tuples: list[tuple[float, float]] = field(default_factory=list)
    improving_proposed: int = 0
    improving_accepted: int = 0
    attempts: int = 0
    accepted: int = 0
    abandoned: int = 0
    max_drift: float = 0.0
    quench_entry_cost: float = 0.0
    quench_exit_cost: float = 0.0
    n_moves_per_step: int = 0

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("# place3d run trace v1\n")
            f.write("\t".join(self.columns) + "\n")
            for row in self.rows:
                f.write("\t".join(f"{v:.10g}" if isinstance(v, float) else str(v)
                                  for v in row) + "\n")

    @classmethod
    def load_rows(cls, path: str) -> list[dict]:
        with open(path, "r", encoding="utf-8") as f:
            lines = [ln.rstrip("\n") for ln in f if not ln.startswith("#")]
        header = lines[0].split("\t")
        out = []
        for ln in lines[1:]:
            vals = ln.split("\t")
            row = {}
            for k, v in zip(header, vals):
                row[k] = int(v) if k == "step" else float(v)
            out.append(row)
        return out


class EpsilonGreedyBandit:
    """Operator selector: EMA value per arm, epsilon-greedy choice."""

    def __init__(self, n_arms: int, rng: random.Random,
                 epsilon: float = 0.1, decay: float = 0.99):
        self.values = [0.0] * n_arms
        self.rng = rng
        self.epsilon = epsilon
        self.decay = decay

    def select(self) -> int:
        if self.rng.random() < self.epsilon:
            return self.rng.randrange(len(self.values))
        best, arg = self.values[0], 0
        for i, v in enumerate(self.values):
            if v > best:
                best, arg = v, i
        return arg

    def update(self, arm: int, reward: float) -> None:
        self.values[arm] = self.decay * self.values[arm] + (1 - self.decay) * reward


class SiteIndex:
    """Per-kind column index for O(log) compatible-site sampling."""

    def __init__(self, fabric: Fabric):
        self.cols: dict[BlockKind, list[int]] = {}
        self.col_ys: dict[BlockKind, dict[int, list[int]]] = {}
        for kind in BlockKind:
            ys_by_x: dict[int, list[int]] = {}
            for x, y in fabric.sites_of_kind(kind):
                ys_by_x.setdefault(x, []).append(y)
            for ys in ys_by_x.values():
                ys.sort()
            self.cols[kind] = sorted(ys_by_x)
            self.col_ys[kind] = ys_by_x

    def sample(self, kind: BlockKind, x0: int, x1: int, y0: int, y1: int,
               rng: random.Random) -> tuple[int, int] | None:
        cols = self.cols[kind]
        lo = bisect.bisect_left(cols, x0)
        hi = bisect.bisect_right(cols, x1)
        if lo >= hi:
            return None
        ys_by_x = self.col_ys[kind]
        # A couple of random column probes, then a deterministic scan.
        for _ in range(3):
            x = cols[rng.randrange(lo, hi)]
            ys = ys_by_x[x]
            a = bisect.bisect_left(ys, y0)
            b = bisect.bisect_right(ys, y1)
            if a < b:
                return x, ys[rng.randrange(a, b)]
        for ci in range(lo, hi):
            x = cols[ci]
            ys = ys_by_x[x]
            a = bisect.bisect_left(ys, y0)
            b = bisect.bisect_right(ys, y1)
            if a < b:
                return x, ys[rng.randrange(a, b)]
        return None


class Annealer:
    def __init__(self, netlist: Netlist, fabric: Fabric, table: DelayTable,
                 hp: Hyperparams, seed: int = 0, flags: AnnealFlags | None = None,
                 init: Placement | None = None):
        self.netlist = netlist
        self.fabric = fabric
        self.table = table
        self.hp = hp
        self.flags = flags or AnnealFlags()
        self.rng = random.Random(seed)
        self.seed = seed
        self.tg: TimingGraph = build_timing_graph(netlist)
        self.tbl = table.as_lists()
        self.site_index = SiteIndex(fabric)

        self.kindof = [b.kind for b in netlist.blocks]
        self.movable = [b.id for b in netlist.blocks if not b.fixed]
        if not self.movable:
            raise ValueError("no movable blocks")
        self.fixed = [b.fixed for b in netlist.blocks]
        self.n_moves = moves_per_step(len(self.movable))

        self.net_pins = net_pin_blocks(netlist)
        self.net_q = [crossing_factor(1 + len(n.sinks)) for n in netlist.nets]
        n = netlist.n_blocks
        self.block_nets: list[list[int]] = [[] for _ in range(n)]
        for e, pins in enumerate(self.net_pins):
            for b in pins:
                self.block_nets[b].append(e)
        self.block_conns: list[list[int]] = [[] for _ in range(n)]
        for cid, (d, s) in enumerate(zip(self.tg.conn_src, self.tg.conn_snk)):
            self.block_conns[d].append(cid)
            if s != d:
                self.block_conns[s].append(cid)
        self.neighbors: list[list[int]] = [[] for _ in range(n)]
        self.nbr_conns: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        seen = [set() for _ in range(n)]
        for cid, (d, s) in enumerate(zip(self.tg.conn_src, self.tg.conn_snk)):
            if d != s:
                self.nbr_conns[d].append((s, cid))
                self.nbr_conns[s].append((d, cid))
                if s not in seen[d]:
                    seen[d].add(s)
                    self.neighbors[d].append(s)
                if d not in seen[s]:
                    seen[s].add(d)
                    self.neighbors[s].append(d)

        self.init_placement = init
        self.trace = RunTrace()
        self.trace.n_moves_per_step = self.n_moves

    # -- initial placement ------------------------------------------------

    def build_initial(self) -> Placement:
        if self.init_placement is not None:
            return self.init_placement
        if self.flags.partition_init:
            crit_conn, block_crit = unit_delay_criticalities(self.tg)
            net_crit = [0.0] * len(self.netlist.nets)
            for cid, c in enumerate(crit_conn):
                e = self.tg.conn_net[cid]
                if c > net_crit[e]:
                    net_crit[e] = c
            hg = Hypergraph.from_netlist(self.netlist,
                                         hyperedge_weights(self.netlist, net_crit))
            assign = partition(hg, eps=self.flags.eps, seed=self.seed)
            return initial_placement(self.netlist, self.fabric, assign, block_crit)
        return random_placement(self.netlist, self.fabric, seed=self.seed)

    # -- cost state -------------------------------------------------------

    def _refresh(self, p: Placement) -> None:
        """Per-temperature-step refresh: STA, criticalities, cost baselines."""
        delays = connection_delays(self.tg, p, self.table)
        report = run_sta(self.tg, delays)
        self.crit = report.criticality
        ce = self.flags.crit_exponent
        self.crit_pow = [c ** ce for c in self.crit] if ce != 1 else list(self.crit)
        self.d_max = report.d_max
        tbl = self.tbl
        layer, xs, ys = p.layer, p.x, p.y
        z = self.zeta_cur
        conn_cost = []
        for cid, (d, s) in enumerate(zip(self.tg.conn_src, self.tg.conn_snk)):
            dx, dy = abs(xs[d] - xs[s]), abs(ys[d] - ys[s])
            row = tbl[layer[d]]
            d2d = row[layer[d]][dx][dy]
            eff = d2d + z * (row[layer[s]][dx][dy] - d2d)
            conn_cost.append(self.crit_pow[cid] * eff)
        self.conn_cost = conn_cost
        self.c_timing = math.fsum(conn_cost)
        wz = self.flags.w_z
        self.net_cost = [net_bb_cost(p, pins, q, wz)
                         for pins, q in zip(self.net_pins, self.net_q)]
        self.c_bb = math.fsum(self.net_cost)
        self.base_t = max(self.c_timing, 1e-12)
        self.base_bb = max(self.c_bb, 1e-12)

    def _eval_move(self, p: Placement, prop: MoveProposal):
        """Incremental dC_total for a proposal; returns deltas and undo info."""
        b = prop.block
        o = prop.partner
        layer, xs, ys = p.layer, p.x, p.y
        old_b = (layer[b], xs[b], ys[b])
        if o >= 0:
            old_o = (layer[o], xs[o], ys[o])
            nets = list(self.block_nets[b])
            mark = set(nets)
            for e in self.block_nets[o]:
                if e not in mark:
                    nets.append(e)
            conns = list(self.block_conns[b])
            cmark = set(conns)
            for c in self.block_conns[o]:
                if c not in cmark:
                    conns.append(c)
        else:
            old_o = None
            nets = self.block_nets[b]
            conns = self.block_conns[b]

        layer[b], xs[b], ys[b] = prop.layer, prop.x, prop.y
        if o >= 0:
            layer[o], xs[o], ys[o] = old_b

        wz = self.flags.w_z
        d_bb = 0.0
        new_net = []
        for e in nets:
            c = net_bb_cost(p, self.net_pins[e], self.net_q[e], wz)
            new_net.append(c)
            d_bb += c - self.net_cost[e]
        tbl = self.tbl
        cp = self.crit_pow
        src, snk = self.tg.conn_src, self.tg.conn_snk
        d_t = 0.0
        new_conn = []
        z = self.zeta_cur
        for cid in conns:
            d, s = src[cid], snk[cid]
            dx = xs[d] - xs[s]
            if dx < 0:
                dx = -dx
            dy = ys[d] - ys[s]
            if dy < 0:
                dy = -dy
            row = tbl[layer[d]]
            d2d = row[layer[d]][dx][dy]
            eff = d2d + z * (row[layer[s]][dx][dy] - d2d)
            c = cp[cid] * eff
            new_conn.append(c)
            d_t += c - self.conn_cost[cid]
        d_total = (self.theta_cur * d_t / self.base_t
                   + (1.0 - self.theta_cur) * d_bb / self.base_bb)
        return d_total, d_bb, d_t, nets, new_net, conns, new_conn, old_b, old_o

    def _revert(self, p: Placement, prop: MoveProposal, old_b, old_o) -> None:
        b = prop.block
        p.layer[b], p.x[b], p.y[b] = old_b
        if prop.partner >= 0:
            o = prop.partner
            p.layer[o], p.x[o], p.y[o] = old_o

    def _commit(self, p: Placement, prop: MoveProposal, old_b, old_o,
                nets, new_net, conns, new_conn, d_bb, d_t) -> None:
        b = prop.block
        si = p.site_index
        p.occ[si(*old_b)] = -1
        if prop.partner >= 0:
            p.occ[si(*old_b)] = prop.partner
        p.occ[si(prop.layer, prop.x, prop.y)] = b
        for e, c in zip(nets, new_net):
            self.net_cost[e] = c
        for cid, c in zip(conns, new_conn):
            self.conn_cost[cid] = c
        self.c_bb += d_bb
        self.c_timing += d_t

    # -- move proposals ---------------------------------------------------

    def _occupant_ok(self, p: Placement, b: int, l: int, x: int, y: int) -> int | None:
        """Occupant at target, -1 if free, None if the move is illegal."""
        occ = p.block_at(l, x, y)
        if occ == -1 or occ == b:
            return -1 if occ == -1 else None
        if self.fixed[occ] or self.kindof[occ] is not self.kindof[b]:
            return None
        return occ

    def _pick_layer(self, b: int, p: Placement) -> int:
        """Probabilistic layer choice from the neighbor distribution."""
        nbrs = self.neighbors[b]
        if not nbrs:
            return self.rng.randrange(self.fabric.k)
        n1 = 0
        for u in nbrs:
            n1 += p.layer[u]
        if self.flags.move_ext:
            return 1 if self.rng.random() * len(nbrs) < n1 else 0
        # VTR-style: round the mean neighbor layer.
        return round(n1 / len(nbrs))

    def propose(self, kind: MoveKind, p: Placement, rlim: int) -> MoveProposal | None:
        rng = self.rng
        b = self.movable[rng.randrange(len(self.movable))]
        bk = self.kindof[b]
        W, H = self.fabric.width, self.fabric.height
        if kind is MoveKind.LAYER_SWAP:
            tl = 1 - p.layer[b]
            occ = self._occupant_ok(p, b, tl, p.x[b], p.y[b])
            if occ is None:
                return None
            return MoveProposal(kind, b, tl, p.x[b], p.y[b], occ)
        if kind is MoveKind.UNIFORM:
            tl = rng.randrange(self.fabric.k)
            bx, by = p.x[b], p.y[b]
            site = self.site_index.sample(bk, max(0, bx - rlim), min(W - 1, bx + rlim),
                                          max(0, by - rlim), min(H - 1, by + rlim), rng)
        elif kind is MoveKind.FEASIBLE_REGION:
            tl = p.layer[b]
            xsmin = ysmin = 10 ** 9
            xsmax = ysmax = -1
            for cid in self.tg.in_conns[b]:
                if self.crit[cid] > 0.8:
                    d = self.tg.conn_src[cid]
                    xsmin = min(xsmin, p.x[d]); xsmax = max(xsmax, p.x[d])
                    ysmin = min(ysmin, p.y[d]); ysmax = max(ysmax, p.y[d])
            if xsmax < 0:
                bx, by = p.x[b], p.y[b]
                xsmin, xsmax = max(0, bx - rlim), min(W - 1, bx + rlim)
                ysmin, ysmax = max(0, by - rlim), min(H - 1, by + rlim)
            site = self.site_index.sample(bk, xsmin, xsmax, ysmin, ysmax, rng)
            if site is None:
                bx, by = p.x[b], p.y[b]
                site = self.site_index.sample(bk, max(0, bx - rlim), min(W - 1, bx + rlim),
                                              max(0, by - rlim), min(H - 1, by + rlim), rng)
        else:  # CENTROID or MEDIAN
            nbrs = self.neighbors[b]
            if not nbrs:
                return None
            if kind is MoveKind.CENTROID:
                if self.flags.weighted_centroid:
                    sw = sx = sy = 0.0
                    for u, cid in self.nbr_conns[b]:
                        wgt = self.crit[cid] + 1e-6
                        sw += wgt
                        sx += wgt * p.x[u]
                        sy += wgt * p.y[u]
                    tx, ty = round(sx / sw), round(sy / sw)
                else:
                    sx = sy = 0
                    for u in nbrs:
                        sx += p.x[u]
                        sy += p.y[u]
                    tx, ty = round(sx / len(nbrs)), round(sy / len(nbrs))
            else:
                xs = sorted(p.x[u] for u in nbrs)
                ys = sorted(p.y[u] for u in nbrs)
                tx, ty = xs[len(xs) // 2], ys[len(ys) // 2]
            tl = self._pick_layer(b, p)
            site = None
            for r in (1, 2, 4, max(8, rlim)):
                site = self.site_index.sample(bk, max(0, tx - r), min(W - 1, tx + r),
                                              max(0, ty - r), min(H - 1, ty + r), rng)
                if site is not None:
                    break
        if site is None:
            return None
        occ = self._occupant_ok(p, b, tl, site[0], site[1])
        if occ is None:
            return None
        return MoveProposal(kind, b, tl, site[0], site[1], occ)

    def propose_with_retries(self, kind: MoveKind, p: Placement, rlim: int,
                             retries: int = 10) -> MoveProposal | None:
        for _ in range(retries):
            prop = self.propose(kind, p, rlim)
            if prop is not None:
                return prop
        return None

    # -- schedules --------------------------------------------------------

    def _estimate_t_init(self, p: Placement) -> float:
        """Non-destructive deviation estimate: 20 * std of sampled deltas."""
        samples = []
        rlim = max(self.fabric.width, self.fabric.height)
        for _ in range(max(20, min(len(self.movable), 200))):
            prop = self.propose_with_retries(MoveKind.UNIFORM, p, rlim)
            if prop is None:
                continue
            res = self._eval_move(p, prop)
            self._revert(p, prop, res[7], res[8])
            samples.append(res[0])
        if len(samples) < 2:
            return 1.0
        mean = sum(samples) / len(samples)
        var = sum((s - mean) ** 2 for s in samples) / len(samples)
        return max(20.0 * math.sqrt(var), 1e-6)

    @staticmethod
    def _cooling_factor(alpha: float) -> float:
        if alpha > 0.96:
            return 0.5
        if alpha > 0.8:
            return 0.9
        if alpha > 0.15:
            return 0.95
        return 0.8

    # -- main loop --------------------------------------------------------

    def run(self) -> tuple[Placement, RunTrace]:
        fl = self.flags
        p = self.build_initial()
        errs = check_legality(p, self.netlist, self.fabric)
        if errs:
            raise CapacityError(f"illegal initial placement: {errs[:3]}")

        self.zeta_cur = zeta(1.0, self.hp) if fl.adaptive_zeta else 1.0
        self.theta_cur = theta(1.0, self.hp) if fl.adaptive_theta else fl.static_theta
        theta_floor = self.theta_cur
        self._refresh(p)

        best_locs = p.copy_locs()
        best_bb, best_t = self.c_bb, self.c_timing
        self.trace.best_tuples.append((best_bb, best_t))

        T = self._estimate_t_init(p)
        t_exit = 0.005 / max(1, len(self.netlist.nets))
        rlim_f = float(max(self.fabric.width, self.fabric.height))
        rlim_max = rlim_f
        history: list[float] = []
        w = 1.0
        arms = list(MoveKind) if fl.move_ext else [
            MoveKind.UNIFORM, MoveKind.CENTROID, MoveKind.MEDIAN, MoveKind.FEASIBLE_REGION]
        bandit = EpsilonGreedyBandit(len(arms), self.rng)

        step = 0
        while T > t_exit and step < fl.max_steps:
            self._refresh(p)
            accepted = self._do_moves(p, T, int(rlim_f), bandit, arms,
                                      greedy_only=False,
                                      best=(best_locs, [best_bb, best_t]))
            best_bb, best_t = self._best_bb, self._best_t
            best_locs = self._best_locs
            alpha = accepted / self.n_moves
            history.append(alpha)
            if len(history) > 5:
                history.pop(0)
            w = sum(history) / len(history)
            if fl.adaptive_zeta:
                self.zeta_cur = zeta(w, self.hp)
            if fl.adaptive_theta:
                self.theta_cur = theta(w, self.hp, theta_floor)
                theta_floor = self.theta_cur
            rlim_f = min(max(rlim_f * (1.0 - 0.44 + alpha), 1.0), rlim_max)
            T *= self._cooling_factor(alpha)
            step += 1
            self.trace.rows.append((step, T, alpha, w, self.zeta_cur, self.theta_cur,
                                    self.c_bb, self.c_timing, self.d_max))

        # Quench the best placement: zero temperature, improving moves only.
        p.restore_locs((best_locs[0], best_locs[1], best_locs[2]))
        self._refresh(p)
        self.trace.quench_entry_cost = self._norm_cost()
        self._do_moves(p, 0.0, int(rlim_max), bandit, arms, greedy_only=True,
                       best=None,
                       attempts=max(self.n_moves, fl.quench_min_attempts))
        self.trace.quench_exit_cost = self._norm_cost()

        errs = check_legality(p, self.netlist, self.fabric)
        if errs:
            raise AssertionError(f"illegal final placement: {errs[:3]}")
        if not (math.isfinite(self.c_bb) and math.isfinite(self.c_timing)):
            raise AssertionError("non-finite cost state")
        return p, self.trace

    def _norm_cost(self) -> float:
        return (self.theta_cur * self.c_timing / self.base_t
                + (1.0 - self.theta_cur) * self.c_bb / self.base_bb)

    def _do_moves(self, p: Placement, T: float, rlim: int, bandit, arms,
                  greedy_only: bool, best, attempts: int | None = None) -> int:
        fl = self.flags
        rng = self.rng
        trace = self.trace
        n_attempts = attempts if attempts is not None else self.n_moves
        accepted = 0
        if best is not None:
            self._best_locs, (self._best_bb, self._best_t) = best
        since_check = 0
        for _ in range(n_attempts):
            trace.attempts += 1
            arm = bandit.select()
            prop = self.propose_with_retries(arms[arm], p, rlim)
            if prop is None:
                trace.abandoned += 1
                bandit.update(arm, 0.0)
                continue
            (d_total, d_bb, d_t, nets, new_net, conns, new_conn,
             old_b, old_o) = self._eval_move(p, prop)
            if d_total < 0:
                trace.improving_proposed += 1
            if greedy_only:
                take = d_total < 0
            else:
                take = d_total < 0 or (T > 0 and math.exp(-d_total / T) > rng.random())
            if take:
                if d_total < 0:
                    trace.improving_accepted += 1
                accepted += 1
                self._commit(p, prop, old_b, old_o, nets, new_net,
                             conns, new_conn, d_bb, d_t)
                if best is not None and self.c_bb < self._best_bb \
                        and self.c_timing < self._best_t:
                    self._best_bb, self._best_t = self.c_bb, self.c_timing
                    self._best_locs = p.copy_locs()
                    trace.best_tuples.append((self.c_bb, self.c_timing))
            else:
                self._revert(p, prop, old_b, old_o)
            bandit.update(arm, max(0.0, -d_total))
            since_check += 1
            if fl.check_interval and since_check >= fl.check_interval:
                since_check = 0
                self._audit(p)
            if fl.debug_legal and trace.attempts % 1000 == 0:
                errs = check_legality(p, self.netlist, self.fabric)
                if errs:
                    raise AssertionError(f"illegal mid-run placement: {errs[:3]}")
        trace.accepted += accepted
        return accepted

    def _audit(self, p: Placement) -> None:
        """Compare incremental totals against a from-scratch recompute."""
        wz = self.flags.w_z
        bb = math.fsum(net_bb_cost(p, pins, q, wz)
                       for pins, q in zip(self.net_pins, self.net_q))
        tbl = self.tbl
        layer, xs, ys = p.layer, p.x, p.y
        z = self.zeta_cur
        tsum = []
        for cid, (d, s) in enumerate(zip(self.tg.conn_src, self.tg.conn_snk)):
            dx, dy = abs(xs[d] - xs[s]), abs(ys[d] - ys[s])
            row = tbl[layer[d]]
            d2d = row[layer[d]][dx][dy]
            tsum.append(self.crit_pow[cid] * (d2d + z * (row[layer[s]][dx][dy] - d2d)))
        ts = math.fsum(tsum)
        drift = max(abs(bb - self.c_bb) / max(abs(bb), 1e-12),
                    abs(ts - self.c_timing) / max(abs(ts), 1e-12))
        if drift > self.trace.max_drift:
            self.trace.max_drift = drift
        self.c_bb, self.c_timing = bb, ts


def place(netlist: Netlist, fabric: Fabric, table: DelayTable, hp: Hyperparams,
          seed: int = 0, flags: AnnealFlags | None = None,
          init: Placement | None = None) -> tuple[Placement, RunTrace]:
    return Annealer(netlist, fabric, table, hp, seed=seed, flags=flags,
                    init=init).run()
