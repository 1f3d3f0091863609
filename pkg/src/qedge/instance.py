"""Problem instances: generation, validation, serialization, derivation.

Instances describe an edge platform with M demand areas and N candidate
edge-node (EN) sites: per-area demand, per-site capacity and placement
cost, a placement budget, an area-to-site delay matrix, and the two
penalty weights (delay, unmet demand).

Generation follows a fixed recipe: a scale-free topology (preferential
attachment over a complete seed graph) with uniform link delays in
[2, 5] ms, area/EN sites sampled from the nodes, shortest-path delays
between them, capacities from the EC2 M5 vCPU ladder, placement costs
uniform in [0.2, 0.25], budget 20, delay penalty 1e-4.

Randomness is split into one named substream per quantity (topology
wiring, link delays, site choice, capacities, costs, demands) so that
overriding one generation parameter never perturbs the other draws.

File format: a single JSON document, see INSTANCE_FIELDS and the README.
Floats are serialized with full round-trip precision.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import GenerationError, ParameterError, ParseError, ValidationError

GENERATOR_VERSION = "1"

# Substream ids for the per-quantity RNG split. Documented order is part
# of the determinism contract; do not renumber.
STREAM_TOPOLOGY = 0
STREAM_DELAYS = 1
STREAM_SITES = 2
STREAM_CAPACITY = 3
STREAM_COST = 4
STREAM_DEMAND = 5

M5_VCPU_LADDER = (2, 4, 8, 16, 32, 48, 64, 96)

INSTANCE_FIELDS = (
    "m", "n", "demand", "capacity", "placement_cost", "budget",
    "delay_penalty", "unmet_penalty", "delay", "seed", "generator_version",
)


def _substream(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


@dataclass(frozen=True)
class Topology:
    """Undirected delay graph with designated area and EN nodes."""

    node_count: int
    edges: tuple  # ((u, v, delay_ms), ...)
    area_nodes: tuple
    en_nodes: tuple

    def validate(self) -> None:
        n = self.node_count
        if n < 1:
            raise ValidationError("topology must have at least one node")
        seen = set()
        adj = [[] for _ in range(n)]
        for u, v, w in self.edges:
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u},{v}) references unknown node")
            if not (np.isfinite(w) and w > 0):
                raise ValidationError(f"edge ({u},{v}) has non-positive delay {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        areas, ens = set(self.area_nodes), set(self.en_nodes)
        if len(areas) != len(self.area_nodes) or len(ens) != len(self.en_nodes):
            raise ValidationError("area_nodes / en_nodes contain duplicates")
        if areas & ens:
            raise ValidationError("area_nodes and en_nodes must be disjoint")
        for node in areas | ens:
            if not 0 <= node < n:
                raise ValidationError(f"designated node {node} out of range")
        # connectivity
        if n > 1:
            stack, visited = [0], {0}
            while stack:
                for nb in adj[stack.pop()]:
                    if nb not in visited:
                        visited.add(nb)
                        stack.append(nb)
            if len(visited) != n:
                raise ValidationError("topology is not connected")


@dataclass(frozen=True)
class ProblemInstance:
    """All data of one placement-and-allocation problem."""

    m: int
    n: int
    demand: np.ndarray          # (m,) resource units
    capacity: np.ndarray        # (n,) resource units
    placement_cost: np.ndarray  # (n,) monetary
    budget: float
    delay_penalty: float
    unmet_penalty: np.ndarray   # (m,) cost per dropped unit
    delay: np.ndarray           # (m, n) milliseconds
    seed: Optional[int] = None
    generator_version: str = GENERATOR_VERSION
    topology: Optional[Topology] = None

    def validate(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValidationError("m and n must be nonnegative")
        checks = (
            ("demand", self.demand, (self.m,), 0.0),
            ("capacity", self.capacity, (self.n,), None),
            ("placement_cost", self.placement_cost, (self.n,), 0.0),
            ("unmet_penalty", self.unmet_penalty, (self.m,), 0.0),
            ("delay", self.delay, (self.m, self.n), 0.0),
        )
        for name, arr, shape, low in checks:
            if arr.shape != shape:
                raise ValidationError(f"{name} has shape {arr.shape}, expected {shape}")
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite entries")
            if low is not None and arr.size and arr.min() < low:
                raise ValidationError(f"{name} contains entries below {low}")
        if self.capacity.size and self.capacity.min() <= 0:
            raise ValidationError("capacity entries must be positive")
        for name, val in (("budget", self.budget), ("delay_penalty", self.delay_penalty)):
            if not (np.isfinite(val) and val >= 0):
                raise ValidationError(f"{name} must be finite and nonnegative")

    @property
    def placement_affordable(self) -> bool:
        """True if at least one EN fits the budget on its own."""
        return bool(self.n and np.any(self.placement_cost <= self.budget))

    def to_dict(self) -> dict:
        doc = {
            "m": self.m,
            "n": self.n,
            "demand": self.demand.tolist(),
            "capacity": self.capacity.tolist(),
            "placement_cost": self.placement_cost.tolist(),
            "budget": self.budget,
            "delay_penalty": self.delay_penalty,
            "unmet_penalty": self.unmet_penalty.tolist(),
            "delay": [row.tolist() for row in self.delay],
            "seed": self.seed,
            "generator_version": self.generator_version,
        }
        if self.topology is not None:
            doc["topology"] = {
                "node_count": self.topology.node_count,
                "edges": [[u, v, w] for u, v, w in self.topology.edges],
                "area_nodes": list(self.topology.area_nodes),
                "en_nodes": list(self.topology.en_nodes),
            }
        return doc


@dataclass(frozen=True)
class GenConfig:
    """Generation parameters; defaults reproduce the standard setup."""

    m: int
    n: int
    seed: int
    node_count: int = 50
    attach_degree: int = 2
    delay_range: tuple = (2.0, 5.0)
    capacity_ladder: Sequence[int] = M5_VCPU_LADDER
    cost_range: tuple = (0.2, 0.25)
    demand_range: tuple = (10.0, 50.0)
    budget: float = 20.0
    delay_penalty: float = 1e-4
    unmet_penalty: float = 0.1


def generate_topology(
    node_count: int, attach_degree: int, seed: int, delay_range: tuple = (2.0, 5.0)
) -> Topology:
    """Scale-free graph by preferential attachment, uniform delays in [2, 5] ms.

    Starts from a complete graph on attach_degree + 1 nodes; each further
    node attaches attach_degree distinct edges with probability
    proportional to current degree. Deterministic given the seed.
    """
    if attach_degree < 1 or node_count < attach_degree + 1:
        raise ParameterError(
            f"need node_count >= attach_degree + 1 >= 2, got ({node_count}, {attach_degree})"
        )
    lo, hi = delay_range
    if not (0 < lo <= hi):
        raise ParameterError(f"invalid delay_range {delay_range}")
    rng = _substream(seed, STREAM_TOPOLOGY)
    m0 = attach_degree + 1
    edges = [(i, j) for i in range(m0) for j in range(i + 1, m0)]
    # one entry per incident edge end; sampling from it is degree-weighted
    repeated = [v for e in edges for v in e]
    for new in range(m0, node_count):
        targets = set()
        while len(targets) < attach_degree:
            targets.add(repeated[rng.integers(len(repeated))])
        for t in sorted(targets):
            edges.append((t, new))
            repeated.extend((t, new))
    delay_rng = _substream(seed, STREAM_DELAYS)
    delays = delay_rng.uniform(lo, hi, size=len(edges))
    topo = Topology(
        node_count=node_count,
        edges=tuple((u, v, float(w)) for (u, v), w in zip(edges, delays)),
        area_nodes=(),
        en_nodes=(),
    )
    topo.validate()
    return topo


def shortest_path_delays(topology: Topology) -> np.ndarray:
    """M x N matrix of shortest-path delays between area and EN nodes."""
    topology.validate()
    if not topology.area_nodes or not topology.en_nodes:
        return np.zeros((len(topology.area_nodes), len(topology.en_nodes)))
    n = topology.node_count
    us = [e[0] for e in topology.edges]
    vs = [e[1] for e in topology.edges]
    ws = [e[2] for e in topology.edges]
    graph = csr_matrix((ws + ws, (us + vs, vs + us)), shape=(n, n))
    dist = dijkstra(graph, directed=False, indices=list(topology.area_nodes))
    d = dist[:, list(topology.en_nodes)]
    if np.any(np.isinf(d)):
        am, en = np.argwhere(np.isinf(d))[0]
        raise GenerationError(
            f"no path between area node {topology.area_nodes[am]} "
            f"and EN node {topology.en_nodes[en]}"
        )
    return d


def generate_instance(config: GenConfig) -> ProblemInstance:
    """Build a seeded instance on a fresh scale-free topology."""
    if config.m < 0 or config.n < 1:
        raise ParameterError("need m >= 0 and n >= 1")
    if config.m + config.n > config.node_count:
        raise ParameterError(
            f"m + n = {config.m + config.n} exceeds node_count = {config.node_count}"
        )
    topo = generate_topology(
        config.node_count, config.attach_degree, config.seed, config.delay_range
    )
    site_rng = _substream(config.seed, STREAM_SITES)
    picks = site_rng.choice(config.node_count, size=config.m + config.n, replace=False)
    topo = replace(
        topo,
        area_nodes=tuple(int(v) for v in picks[: config.m]),
        en_nodes=tuple(int(v) for v in picks[config.m:]),
    )

    cap_rng = _substream(config.seed, STREAM_CAPACITY)
    capacity = cap_rng.choice(np.asarray(config.capacity_ladder, dtype=float), size=config.n)
    cost_rng = _substream(config.seed, STREAM_COST)
    placement_cost = cost_rng.uniform(*config.cost_range, size=config.n)
    demand_rng = _substream(config.seed, STREAM_DEMAND)
    demand = demand_rng.uniform(*config.demand_range, size=config.m)

    inst = ProblemInstance(
        m=config.m,
        n=config.n,
        demand=demand,
        capacity=capacity,
        placement_cost=placement_cost,
        budget=float(config.budget),
        delay_penalty=float(config.delay_penalty),
        unmet_penalty=np.full(config.m, float(config.unmet_penalty)),
        delay=shortest_path_delays(topo),
        seed=config.seed,
        topology=topo,
    )
    inst.validate()
    return inst


def restrict_areas(instance: ProblemInstance, m_keep: int) -> ProblemInstance:
    """Sub-instance keeping the first m_keep areas; everything else unchanged."""
    if not 1 <= m_keep <= instance.m:
        raise ParameterError(f"m_keep must be in [1, {instance.m}], got {m_keep}")
    topo = instance.topology
    if topo is not None:
        topo = replace(topo, area_nodes=topo.area_nodes[:m_keep])
    return replace(
        instance,
        m=m_keep,
        demand=instance.demand[:m_keep].copy(),
        unmet_penalty=instance.unmet_penalty[:m_keep].copy(),
        delay=instance.delay[:m_keep].copy(),
        topology=topo,
    )


def save_instance(instance: ProblemInstance, sink) -> None:
    """Write the instance as JSON to a path or text file object."""
    text = json.dumps(instance.to_dict(), indent=2, sort_keys=True)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sink.write(text + "\n")


def load_instance(source) -> ProblemInstance:
    """Read an instance from a path, text file object, or JSON string.

    A string is treated as inline JSON when it starts with '{', as a
    path otherwise.
    """
    if isinstance(source, os.PathLike) or (
        isinstance(source, str) and not source.lstrip().startswith("{")
    ):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    for key in INSTANCE_FIELDS:
        if key not in doc:
            raise ParseError(f"missing required field {key!r}")
    topo = None
    if doc.get("topology") is not None:
        t = doc["topology"]
        for key in ("node_count", "edges", "area_nodes", "en_nodes"):
            if key not in t:
                raise ParseError(f"missing required field 'topology.{key}'")
        topo = Topology(
            node_count=int(t["node_count"]),
            edges=tuple((int(u), int(v), float(w)) for u, v, w in t["edges"]),
            area_nodes=tuple(int(v) for v in t["area_nodes"]),
            en_nodes=tuple(int(v) for v in t["en_nodes"]),
        )
    try:
        inst = ProblemInstance(
            m=int(doc["m"]),
            n=int(doc["n"]),
            demand=np.asarray(doc["demand"], dtype=float),
            capacity=np.asarray(doc["capacity"], dtype=float),
            placement_cost=np.asarray(doc["placement_cost"], dtype=float),
            budget=float(doc["budget"]),
            delay_penalty=float(doc["delay_penalty"]),
            unmet_penalty=np.asarray(doc["unmet_penalty"], dtype=float),
            delay=np.asarray(doc["delay"], dtype=float).reshape(int(doc["m"]), int(doc["n"])),
            seed=None if doc["seed"] is None else int(doc["seed"]),
            generator_version=str(doc["generator_version"]),
            topology=topo,
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed field content: {exc}") from exc
    inst.validate()
    return inst
