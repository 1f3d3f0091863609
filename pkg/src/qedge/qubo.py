"""QUBO construction for the placement block, plus the Ising view.

The ADMM placement subproblem is quadratic in the placement bits once the
capacity-coupling terms are expanded, and the budget inequality is folded
in as a squared penalty with binary-expansion slack bits. Variables are
ordered placement bits first (z0..z{N-1}), then slack bits (w0..w{K-1});
basis index j encodes bit i as (j >> i) & 1.

Since z_n^2 = z_n, the capacity-coupling terms land on the QUBO diagonal;
every off-diagonal coefficient comes from the budget penalty.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ParameterError
from .instance import ProblemInstance

COEFF_PRUNE_TOL = 1e-14


@dataclass
class Qubo:
    """Upper-triangular quadratic form over bits plus a constant offset."""

    num_vars: int
    coeffs: Dict[Tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0
    var_labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.var_labels:
            self.var_labels = tuple(f"b{i}" for i in range(self.num_vars))

    def add(self, i: int, j: int, value: float) -> None:
        if not (0 <= i < self.num_vars and 0 <= j < self.num_vars):
            raise ParameterError(f"coefficient index ({i},{j}) out of range")
        key = (i, j) if i <= j else (j, i)
        new = self.coeffs.get(key, 0.0) + value
        if abs(new) <= COEFF_PRUNE_TOL:
            self.coeffs.pop(key, None)
        else:
            self.coeffs[key] = new

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.num_vars)
        for (i, j), v in self.coeffs.items():
            if i == j:
                d[i] = v
        return d

    def off_diagonal(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Parallel (rows, cols, values) arrays for the i < j terms."""
        items = sorted((k, v) for k, v in self.coeffs.items() if k[0] != k[1])
        rows = np.array([k[0] for k, _ in items], dtype=np.int64)
        cols = np.array([k[1] for k, _ in items], dtype=np.int64)
        vals = np.array([v for _, v in items], dtype=np.float64)
        return rows, cols, vals


def qubo_eval(qubo: Qubo, bits) -> float:
    """Energy offset + sum_{i<=j} Q_ij b_i b_j of one bitstring."""
    b = np.asarray(bits)
    if b.shape != (qubo.num_vars,):
        raise ParameterError(f"bitstring length {b.shape} != num_vars {qubo.num_vars}")
    e = qubo.offset
    for (i, j), v in sorted(qubo.coeffs.items()):
        if b[i] and b[j]:
            e += v
    return float(e)


@dataclass(frozen=True)
class IsingModel:
    """Spin (+1/-1) form of a QUBO under b_i = (1 - s_i) / 2."""

    fields: np.ndarray                       # h_i per spin
    couplings: Dict[Tuple[int, int], float]  # J_ij for i < j
    constant: float

    def energy(self, spins) -> float:
        s = np.asarray(spins, dtype=float)
        e = self.constant + float(np.dot(self.fields, s))
        for (i, j), v in self.couplings.items():
            e += v * s[i] * s[j]
        return e


def qubo_to_ising(qubo: Qubo) -> IsingModel:
    """Equivalent Ising model: energies agree on every configuration."""
    n = qubo.num_vars
    h = np.zeros(n)
    j_terms: Dict[Tuple[int, int], float] = {}
    const = qubo.offset
    for (i, j), v in qubo.coeffs.items():
        if i == j:
            h[i] -= v / 2.0
            const += v / 2.0
        else:
            j_terms[(i, j)] = j_terms.get((i, j), 0.0) + v / 4.0
            h[i] -= v / 4.0
            h[j] -= v / 4.0
            const += v / 4.0
    return IsingModel(fields=h, couplings=j_terms, constant=const)


@dataclass(frozen=True)
class BudgetConfig:
    """Budget-penalty settings: slack bit count and optional fixed weight.

    weight=None selects a per-build default that scales with the minimal
    achievable budget violation, so infeasible placements are dominated
    while feasible ones see only negligible quantization bias. weight=0
    disables the penalty (the slack bits remain as inert variables).
    """

    slack_bits: int = 4
    weight: Optional[float] = None


def encode_budget_penalty(h, budget: float, weight: float, slack_bits: int) -> Qubo:
    """Penalty weight * (h . z + delta * sum_k 2^k w_k - budget)^2.

    delta = budget / (2^slack_bits - 1) so the slack sweeps [0, budget].
    slack_bits = 0 keeps the bare squared gap (h . z - budget)^2, which
    also punishes being under budget; retained for diagnostics only.
    """
    h = np.asarray(h, dtype=float)
    n = h.size
    if weight <= 0:
        raise ParameterError("penalty weight must be positive")
    if slack_bits < 0:
        raise ParameterError("slack_bits must be nonnegative")
    if slack_bits >= 1 and budget <= 0:
        raise ParameterError("slack encoding requires a positive budget")
    coeffs = np.concatenate(
        [h, (budget / (2**slack_bits - 1)) * (2.0 ** np.arange(slack_bits))]
        if slack_bits
        else [h]
    )
    labels = tuple(f"z{i}" for i in range(n)) + tuple(f"w{k}" for k in range(slack_bits))
    q = Qubo(num_vars=n + slack_bits, var_labels=labels)
    q.offset = weight * budget * budget
    for i, a in enumerate(coeffs):
        q.add(i, i, weight * (a * a - 2.0 * budget * a))
        for j in range(i + 1, coeffs.size):
            q.add(i, j, 2.0 * weight * a * coeffs[j])
    return q


def minimal_budget_violation(h, budget: float) -> Optional[float]:
    """Smallest positive overrun h . z - budget over all placements, or None.

    Exhaustive for N <= 24; beyond that falls back to the smallest single
    placement cost as a conservative scale.
    """
    h = np.asarray(h, dtype=float)
    n = h.size
    if n == 0:
        return None
    if n > 24:
        return float(h.min()) if h.sum() > budget else None
    best = None
    totals = np.zeros(1)
    for i in range(n):
        totals = np.concatenate([totals, totals + h[i]])
    over = totals[totals > budget]
    if over.size:
        best = float(over.min() - budget)
    return best


def default_budget_weight(h, budget: float, diag_scale: float) -> float:
    """Weight making the smallest possible budget overrun dominate the
    largest single-bit objective gain; near-zero when no overrun exists."""
    scale = max(abs(diag_scale), 1e-9)
    v_min = minimal_budget_violation(h, budget)
    if v_min is None or v_min <= 0:
        return scale / max(budget * budget, 1e-9)
    return 10.0 * scale / (v_min * v_min)


def build_z_subproblem_qubo(
    instance: ProblemInstance,
    x,
    s,
    y,
    rho_admm: float,
    budget_cfg: BudgetConfig = BudgetConfig(),
) -> Qubo:
    """QUBO for the ADMM placement block at the current continuous iterate.

    Encodes, over placement bits z and slack bits w,
        h . z + sum_n [ y_n (r_n - z_n) + (rho/2) (r_n - z_n)^2 ] + budget penalty
    where r_n = sum_m x[m, n] / capacity[n] + s_n is the capacity
    utilization carried over from the continuous block. The utilization
    couples to z through the bit itself, so these terms are diagonal.
    """
    if rho_admm <= 0:
        raise ParameterError("rho_admm must be positive")
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    n = instance.n
    if x.shape != (instance.m, n) or s.shape != (n,) or y.shape != (n,):
        raise ParameterError("x, s, y dimensions do not match the instance")
    if np.any(x < 0) or np.any(s < 0):
        raise ParameterError("x and s must be nonnegative")

    util = x.sum(axis=0) / instance.capacity + s
    h = instance.placement_cost

    diag = h - y - rho_admm * util + rho_admm / 2.0
    offset = float(np.dot(y, util) + 0.5 * rho_admm * np.dot(util, util))

    k = budget_cfg.slack_bits
    labels = tuple(f"z{i}" for i in range(n)) + tuple(f"w{j}" for j in range(k))
    q = Qubo(num_vars=n + k, var_labels=labels, offset=offset)
    for i, v in enumerate(diag):
        q.add(i, i, float(v))

    weight = budget_cfg.weight
    if weight is None:
        weight = default_budget_weight(h, instance.budget, float(np.abs(diag).max(initial=0.0)))
    if weight > 0.0:
        penalty = encode_budget_penalty(h, instance.budget, weight, k)
        q.offset += penalty.offset
        for (i, j), v in penalty.coeffs.items():
            q.add(i, j, v)
    return q


def save_qubo(qubo: Qubo, sink) -> None:
    """Plain coefficient-list export: '# offset <v>' header then 'i j value' lines."""
    lines = [
        f"# qedge qubo export: {qubo.num_vars} variables",
        f"# labels: {' '.join(qubo.var_labels)}",
        f"# offset {qubo.offset!r}",
    ]
    for (i, j), v in sorted(qubo.coeffs.items()):
        lines.append(f"{i} {j} {v!r}")
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)
