"""Exact workload allocation for a fixed placement.

With the placement frozen, the remaining problem is a transportation
min-cost flow: each area's demand flows either to an open EN (unit cost
delay_penalty * delay) or to a drop sink (unit cost unmet_penalty), and
each open EN forwards at most its capacity to the sink. Solved by
successive shortest paths with node potentials, so the potentials double
as LP duals certifying optimality.

Node layout: 0 = source, 1..M = areas, M+1..M+N = ENs, M+N+1 = sink.
Only open ENs receive arcs. Ties between equal-cost augmenting paths are
broken toward lower node ids, hence lower EN indices.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .instance import ProblemInstance
from .model import _check_dims, check_feasibility, make_solution

_EPS = 1e-12


@dataclass(frozen=True)
class AllocationDuals:
    """Node potentials from the final shortest-path tree."""

    source: float
    area: np.ndarray  # (m,)
    en: np.ndarray    # (n,); 0.0 for closed ENs (no incident arcs)
    sink: float


@dataclass(frozen=True)
class AllocationResult:
    x: np.ndarray
    u: np.ndarray
    objective: float
    duals: AllocationDuals


class _Network:
    """Residual transportation network for one (instance, placement) pair."""

    def __init__(self, instance: ProblemInstance, z) -> None:
        m, n = instance.m, instance.n
        self.m, self.n = m, n
        self.size = m + n + 2
        self.source = 0
        self.sink = m + n + 1
        # arc arrays: head, tail, cost, capacity, flow; reverse via pairing i ^ 1
        self.tail: list = []
        self.head: list = []
        self.cost: list = []
        self.cap: list = []
        self.flow: list = []
        self.adj: list = [[] for _ in range(self.size)]
        beta = instance.delay_penalty
        for a in range(m):
            if instance.demand[a] > 0:
                self._add_arc(self.source, 1 + a, 0.0, float(instance.demand[a]))
        for a in range(m):
            if instance.demand[a] <= 0:
                continue
            for e in range(n):
                if z[e]:
                    self._add_arc(1 + a, 1 + m + e, beta * float(instance.delay[a, e]), math.inf)
            self._add_arc(1 + a, self.sink, float(instance.unmet_penalty[a]), math.inf)
        for e in range(n):
            if z[e]:
                self._add_arc(1 + m + e, self.sink, 0.0, float(instance.capacity[e]))

    def _add_arc(self, tail: int, head: int, cost: float, cap: float) -> None:
        for t, h, c, cp in ((tail, head, cost, cap), (head, tail, -cost, 0.0)):
            self.adj[t].append(len(self.tail))
            self.tail.append(t)
            self.head.append(h)
            self.cost.append(c)
            self.cap.append(cp)
            self.flow.append(0.0)

    def residual(self, arc: int) -> float:
        return self.cap[arc] - self.flow[arc]

    def push(self, arc: int, amount: float) -> None:
        self.flow[arc] += amount
        self.flow[arc ^ 1] -= amount


def solve_allocation(instance: ProblemInstance, placement) -> AllocationResult:
    """Minimize delay + unmet cost for the given open set; exact and certified.

    Always feasible: dropping everything is available. Returns real-valued
    flows, the allocation objective (placement cost excluded), and node
    potentials with no negative reduced-cost residual arc.
    """
    _check_dims(instance, z=placement)
    z = np.asarray(placement)
    if z.size and not np.all((z == 0) | (z == 1)):
        raise ParameterError("placement must be binary")
    z = z.astype(bool)

    net = _Network(instance, z)
    pot = [0.0] * net.size
    supply = float(np.sum(instance.demand[instance.demand > 0])) if instance.m else 0.0
    remaining = supply
    flow_tol = _EPS * max(1.0, supply)

    while remaining > flow_tol:
        dist = [math.inf] * net.size
        prev_arc = [-1] * net.size
        dist[net.source] = 0.0
        heap = [(0.0, net.source)]
        while heap:
            d_v, v = heapq.heappop(heap)
            if d_v > dist[v] + _EPS:
                continue
            for arc in net.adj[v]:
                if net.residual(arc) <= flow_tol:
                    continue
                w = net.head[arc]
                nd = d_v + net.cost[arc] + pot[v] - pot[w]
                if nd < dist[w] - _EPS:
                    dist[w] = nd
                    prev_arc[w] = arc
                    heapq.heappush(heap, (nd, w))
        if not math.isfinite(dist[net.sink]):
            raise RuntimeError("augmenting path search failed on a feasible network")
        # capping at the sink distance keeps reduced costs nonnegative even
        # for nodes unreachable in this round
        d_sink = dist[net.sink]
        for v in range(net.size):
            pot[v] += min(dist[v], d_sink)
        # bottleneck along source -> sink path
        bottleneck = remaining
        v = net.sink
        while v != net.source:
            arc = prev_arc[v]
            bottleneck = min(bottleneck, net.residual(arc))
            v = net.tail[arc]
        v = net.sink
        while v != net.source:
            arc = prev_arc[v]
            net.push(arc, bottleneck)
            v = net.tail[arc]
        remaining -= bottleneck

    x = np.zeros((instance.m, instance.n))
    for arc in range(0, len(net.tail), 2):
        t, h = net.tail[arc], net.head[arc]
        if 1 <= t <= instance.m and instance.m + 1 <= h <= instance.m + instance.n:
            x[t - 1, h - instance.m - 1] = net.flow[arc]
    u = instance.demand - x.sum(axis=1) if instance.n else instance.demand.copy()
    u = np.maximum(u, 0.0)

    objective = float(
        instance.delay_penalty * np.sum(instance.delay * x) + np.dot(instance.unmet_penalty, u)
    )
    en_pot = np.array(pot[1 + instance.m : 1 + instance.m + instance.n])
    en_pot[~z] = 0.0  # closed sites have no arcs; report a neutral potential
    duals = AllocationDuals(
        source=pot[0],
        area=np.array(pot[1 : 1 + instance.m]),
        en=en_pot,
        sink=pot[net.sink],
    )
    return AllocationResult(x=x, u=u, objective=objective, duals=duals)


def allocation_certificate_gap(
    instance: ProblemInstance, placement, x, u, duals: AllocationDuals
) -> float:
    """Largest reduced-cost violation of the flow (x, u) under the potentials.

    Zero (up to ~1e-9) exactly when the allocation is optimal for the
    placement and the potentials certify it: every residual arc must have
    nonnegative reduced cost, which subsumes complementary slackness on
    arcs carrying flow.
    """
    z = np.asarray(placement).astype(bool)
    sol = make_solution(instance, z.astype(np.int8), x, u)
    bad = [v for v in check_feasibility(instance, sol, tol=1e-7) if v.constraint != "C1"]
    if bad:
        raise ParameterError(f"allocation infeasible for this placement: {bad[0]}")

    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    pot = np.concatenate(([duals.source], duals.area, duals.en, [duals.sink]))
    m = instance.m
    scale = max(1.0, float(np.sum(instance.demand))) if m else 1.0
    gap = 0.0

    def rc(tail, head, cost):
        return cost + pot[tail] - pot[head]

    sink = m + instance.n + 1
    for a in range(m):
        lam = float(instance.demand[a])
        if lam <= 0:
            continue
        served = float(x[a].sum()) if instance.n else 0.0
        if lam - served > _EPS * scale:  # source arc has residual
            gap = max(gap, -rc(0, 1 + a, 0.0))
        if served > _EPS * scale:  # reverse of source arc
            gap = max(gap, rc(0, 1 + a, 0.0))
        beta = instance.delay_penalty
        for e in range(instance.n):
            if not z[e]:
                continue
            c = beta * float(instance.delay[a, e])
            gap = max(gap, -rc(1 + a, 1 + m + e, c))  # infinite capacity, always residual
            if x[a, e] > _EPS * scale:
                gap = max(gap, rc(1 + a, 1 + m + e, c))
        c_drop = float(instance.unmet_penalty[a])
        gap = max(gap, -rc(1 + a, sink, c_drop))
        if u[a] > _EPS * scale:
            gap = max(gap, rc(1 + a, sink, c_drop))
    for e in range(instance.n):
        if not z[e]:
            continue
        load = float(x[:, e].sum()) if m else 0.0
        if instance.capacity[e] - load > _EPS * scale:
            gap = max(gap, -rc(1 + m + e, sink, 0.0))
        if load > _EPS * scale:
            gap = max(gap, rc(1 + m + e, sink, 0.0))
    return float(max(0.0, gap))
