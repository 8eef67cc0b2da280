"""Valid reductions, normalization, strong normalization and lifting.

A trace records every transform applied to the input so that an allocation
of the final instance can be mapped back to the original one.

>>> from mmsalloc.core import Instance
>>> norm, trace = normalize(Instance.identical([5, 3, 2], 2))
>>> norm.n, trace.reduced_agents()
(1, (0,))
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from gmpy2 import mpq

from .core import Allocation, Instance, OrderMap, is_ordered, order_instance, unorder_allocation
from .oracle import mms


@dataclass(frozen=True)
class OrderStep:
    source: Instance
    order_map: OrderMap


@dataclass(frozen=True)
class ScaleStep:
    factors: tuple[mpq, ...]


@dataclass(frozen=True)
class ReduceStep:
    """Agent ``agent`` left with ``bundle``; survivors are relabelled.

    ``kept_agents[a]`` / ``kept_goods[g]`` give the pre-step index of residual
    agent a / good g.
    """

    agent: int
    bundle: tuple[int, ...]
    kept_agents: tuple[int, ...]
    kept_goods: tuple[int, ...]


@dataclass(frozen=True)
class TrimStep:
    """Valuations replaced by entrywise smaller ones (strong normalization)."""

    values: tuple[tuple[mpq, ...], ...]


Step = Union[OrderStep, ScaleStep, ReduceStep, TrimStep]


@dataclass(frozen=True)
class NormalizationTrace:
    n: int
    m: int
    steps: tuple[Step, ...] = ()
    # per agent of the final instance: MMS partition (strong normalization only)
    partitions: dict = field(default_factory=dict)

    def agent_map(self) -> tuple[int, ...]:
        """Original index of each agent of the final instance."""
        ids = list(range(self.n))
        for st in self.steps:
            if isinstance(st, ReduceStep):
                ids = [ids[a] for a in st.kept_agents]
        return tuple(ids)

    def reduced_agents(self) -> tuple[int, ...]:
        """Original indices of agents removed by reductions, in removal order."""
        ids = list(range(self.n))
        out = []
        for st in self.steps:
            if isinstance(st, ReduceStep):
                out.append(ids[st.agent])
                ids = [ids[a] for a in st.kept_agents]
        return tuple(out)

    def reduction_bundles(self) -> dict[int, frozenset]:
        """Reduced agent -> her bundle, in original good indices."""
        lifted = lift_allocation(self, Allocation.empty(*self._final_shape()))
        return {i: lifted.bundles[i] for i in self.reduced_agents()}

    def _final_shape(self) -> tuple[int, int]:
        n, m = self.n, self.m
        for st in self.steps:
            if isinstance(st, ReduceStep):
                n, m = len(st.kept_agents), len(st.kept_goods)
        return n, m


def _check_scaled(inst: Instance):
    if not is_ordered(inst):
        raise ValueError("instance is not ordered")


def remove(inst: Instance, agent: int, bundle: Iterable[int]) -> tuple[Instance, ReduceStep]:
    bundle = tuple(sorted(bundle))
    drop = set(bundle)
    kept_agents = tuple(a for a in range(inst.n) if a != agent)
    kept_goods = tuple(g for g in range(inst.m) if g not in drop)
    return inst.restrict(kept_agents, kept_goods), ReduceStep(agent, bundle, kept_agents, kept_goods)


def valid_reduction_step(inst: Instance, agents: Iterable[int] | None = None):
    """Find a reduction on an ordered instance scaled so v_i(M) = n.

    Returns ``(agent, goods, residual)`` or None.  The single top good is
    tried first, then the pair {g_n, g_{n+1}}; the lowest qualifying agent
    wins.  ``agents`` limits which agents may be removed.
    """
    _check_scaled(inst)
    n = inst.n
    cand = sorted(range(n) if agents is None else set(agents))
    if inst.m >= 1:
        for i in cand:
            if inst.values[i][0] >= 1:
                res, _ = remove(inst, i, (0,))
                return i, (0,), res
    if inst.m >= n + 1:
        for i in cand:
            if inst.values[i][n - 1] + inst.values[i][n] >= 1:
                res, _ = remove(inst, i, (n - 1, n))
                return i, (n - 1, n), res
    return None


def _scale_step(inst: Instance) -> tuple[Instance, ScaleStep]:
    n = inst.n
    factors = []
    rows = []
    for row in inst.values:
        tot = sum(row, mpq(0))
        c = mpq(n) / tot if tot > 0 else mpq(1)
        factors.append(c)
        rows.append(tuple(v * c for v in row) if c != 1 else row)
    return Instance(tuple(rows), inst.m), ScaleStep(tuple(factors))


def normalize(inst: Instance, agents: Iterable[int] | None = None) -> tuple[Instance, NormalizationTrace]:
    """Order, scale to v_i(M) = n and apply valid reductions until none applies.

    Only agents in ``agents`` (default: all) may be removed, and only they are
    guaranteed the normalized-instance inequalities.  Reductions stop once a
    single agent is left.  An eligible agent whose residual value is zero is
    removed with an empty bundle, since her MMS is zero.
    """
    for i in range(inst.n):
        if inst.total(i) == 0:
            raise ValueError(f"agent {i} values every good at zero")
    eligible = [True if agents is None else False] * inst.n
    if agents is not None:
        for a in agents:
            eligible[a] = True
    steps: list[Step] = []
    cur, omap = order_instance(inst)
    steps.append(OrderStep(inst, omap))
    cur, st = _scale_step(cur)
    steps.append(st)
    while cur.n > 1:
        elig = [a for a in range(cur.n) if eligible[a]]
        zero = [a for a in elig if cur.total(a) == 0]
        if zero:
            cur, rst = remove(cur, zero[0], ())
        else:
            found = valid_reduction_step(cur, elig)
            if found is None:
                break
            cur, rst = remove(cur, found[0], found[1])
        steps.append(rst)
        eligible = [eligible[a] for a in rst.kept_agents]
        cur, st = _scale_step(cur)
        steps.append(st)
    return cur, NormalizationTrace(inst.n, inst.m, tuple(steps))


def replay(trace: NormalizationTrace, inst: Instance) -> Instance:
    """Re-apply the recorded transforms to ``inst``."""
    cur = inst
    for st in trace.steps:
        if isinstance(st, OrderStep):
            cur = Instance(tuple(tuple(row[g] for g in perm) for row, perm in zip(cur.values, st.order_map)), cur.m)
        elif isinstance(st, ScaleStep):
            cur = Instance(tuple(tuple(v * c for v in row) for row, c in zip(cur.values, st.factors)), cur.m)
        elif isinstance(st, ReduceStep):
            cur = cur.restrict(st.kept_agents, st.kept_goods)
        elif isinstance(st, TrimStep):
            cur = Instance(st.values, cur.m)
    return cur


def lift_allocation(trace: NormalizationTrace, alloc: Allocation) -> Allocation:
    """Map an allocation of the normalized instance back to the original one.

    Reduced agents get their reduction bundles; ordering steps are undone by
    the picking procedure of :func:`mmsalloc.core.unorder_allocation`.
    """
    if (alloc.n, alloc.m) != trace._final_shape():
        raise ValueError("allocation does not match the trace's final instance")
    cur = alloc
    for st in reversed(trace.steps):
        if isinstance(st, ReduceStep):
            n0 = len(st.kept_agents) + 1
            m0 = len(st.kept_goods) + len(st.bundle)
            bundles: list[frozenset] = [frozenset()] * n0
            for a, b in enumerate(cur.bundles):
                bundles[st.kept_agents[a]] = frozenset(st.kept_goods[g] for g in b)
            bundles[st.agent] = frozenset(st.bundle)
            cur = Allocation(tuple(bundles), m0)
        elif isinstance(st, OrderStep):
            cur = unorder_allocation(st.source, st.order_map, cur)
    return cur


def strong_normalize(inst: Instance, agents: Iterable[int] | None = None,
                     budget: int | None = None) -> tuple[Instance, NormalizationTrace]:
    """Scale each listed agent to MMS 1 and trim her MMS bundles to exactly 1.

    Surplus is taken from the bundle's most valuable goods first.  The result
    is re-ordered; ``trace.partitions[i]`` holds agent i's MMS partition in the
    output's good indices (every bundle worth exactly 1).  Agents not listed,
    and agents with zero MMS, are only scaled to v_i(M) = n.
    """
    n = inst.n
    listed = set(range(n) if agents is None else agents)
    factors = []
    rows = []
    parts: dict[int, tuple[frozenset, ...]] = {}
    for i, row in enumerate(inst.values):
        tot = sum(row, mpq(0))
        if tot == 0:
            raise ValueError(f"agent {i} values every good at zero")
        res = mms(inst, i, n, budget=budget) if i in listed else None
        if res is None or res.value == 0:
            c = mpq(n) / tot
            factors.append(c)
            rows.append(tuple(v * c for v in row))
            continue
        c = 1 / res.value
        factors.append(c)
        new = [v * c for v in row]
        for bundle in res.partition:
            surplus = sum((new[g] for g in bundle), mpq(0)) - 1
            for g in sorted(bundle, key=lambda g: (-new[g], g)):
                if surplus <= 0:
                    break
                cut = min(surplus, new[g])
                new[g] -= cut
                surplus -= cut
        rows.append(tuple(new))
        parts[i] = res.partition
    trimmed = Instance(tuple(rows), inst.m)
    ordered, omap = order_instance(trimmed)
    out_parts = {}
    for i, part in parts.items():
        rank = {g: pos for pos, g in enumerate(omap[i])}
        out_parts[i] = tuple(frozenset(rank[g] for g in b) for b in part)
    steps = (ScaleStep(tuple(factors)), TrimStep(trimmed.values), OrderStep(trimmed, omap))
    return ordered, NormalizationTrace(n, inst.m, steps, out_parts)


def is_normalized(inst: Instance, agents: Sequence[int] | None = None) -> bool:
    """Ordered, v_i(M) = n, v_i(g_1) < 1 and v_i(g_n) + v_i(g_{n+1}) < 1."""
    if not is_ordered(inst):
        return False
    n = inst.n
    for i in (range(n) if agents is None else agents):
        row = inst.values[i]
        if sum(row, mpq(0)) != n:
            return False
        if inst.m >= 1 and row[0] >= 1:
            return False
        if inst.m >= n + 1 and row[n - 1] + row[n] >= 1:
            return False
    return True
