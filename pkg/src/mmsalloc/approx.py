"""Envy-graph and round-robin based pipelines.

>>> from mmsalloc.core import Instance
>>> round_robin(Instance.identical([3, 2, 1], 2), [0, 1]).as_lists()
[[0, 2], [1]]
>>> envy_graph_efx(Instance.identical([3, 2, 1], 2), [0, 1]).as_lists()
[[0], [1, 2]]
>>> general_n_beta(5)
mpq(7,8)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

from .core import Allocation, Instance, descending_order, is_ordered, scale, value
from .reduce import NormalizationTrace, lift_allocation, normalize


@dataclass(frozen=True)
class PipelineResult:
    """Output of an allocation pipeline.

    ``satisfied`` holds the agents the pipeline certifies at ``beta`` times
    their MMS; ``certificates`` says why (``"reduction"`` or ``"value"``).
    ``shortfall`` is set when a lone-divider round could not form enough
    bundles.
    """

    allocation: Allocation
    satisfied: frozenset
    beta: mpq
    certificates: dict = field(default_factory=dict)
    shortfall: bool = False
    rounds: tuple = ()
    trace: NormalizationTrace | None = None


def general_n_beta(n: int) -> mpq:
    """The (n+2) / (2(n-1)) value guarantee of the n-1 agent pipeline."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return mpq(n + 2, 2 * (n - 1))


def round_robin(inst: Instance, order: Sequence[int]) -> Allocation:
    """Agents in ``order`` take turns picking their favourite remaining good."""
    bundles: list[list[int]] = [[] for _ in range(inst.n)]
    order = list(order)
    if order:
        prefs = {i: descending_order(inst.values[i]) for i in order}
        taken = [False] * inst.m
        ptr = {i: 0 for i in order}
        for turn in range(inst.m):
            i = order[turn % len(order)]
            p = prefs[i]
            while taken[p[ptr[i]]]:
                ptr[i] += 1
            g = p[ptr[i]]
            taken[g] = True
            bundles[i].append(g)
    return Allocation.from_lists(bundles, inst.m)


def _find_envy_cycle(vals: list[list[mpq]], agents: list[int]) -> list[int]:
    """Walk envious predecessors from the lowest agent until a repeat.

    Returns the cycle as [c0, c1, ...] where c_{t+1} envies c_t.
    """
    def envier(j):
        for i in agents:
            if i != j and vals[i][i] < vals[i][j]:
                return i
        return None

    seen: dict[int, int] = {}
    path = []
    x = agents[0]
    while x not in seen:
        seen[x] = len(path)
        path.append(x)
        x = envier(x)
    return path[seen[x]:]


def envy_graph_efx(inst: Instance, agents: Iterable[int]) -> Allocation:
    """Give goods in descending order to unenvied agents, rotating envy cycles.

    Goods go to the lowest-index agent nobody envies; when every agent is
    envied, bundles are rotated along an envy cycle until one is free.  On an
    ordered instance the result is EFX among ``agents``.
    """
    if not is_ordered(inst):
        raise ValueError("envy_graph_efx needs an ordered instance")
    agents = sorted(set(agents))
    bundles: dict[int, list[int]] = {a: [] for a in agents}
    if not agents:
        return Allocation.empty(inst.n, inst.m)
    # vals[i][j]: agent i's value for the bundle currently held by j
    vals = [[mpq(0)] * inst.n for _ in range(inst.n)]
    V = inst.values
    for g in range(inst.m):
        while True:
            free = [j for j in agents if not any(i != j and vals[i][i] < vals[i][j] for i in agents)]
            if free:
                break
            cyc = _find_envy_cycle(vals, agents)
            old = {c: bundles[c] for c in cyc}
            oldv = {c: [vals[i][c] for i in range(inst.n)] for c in cyc}
            for t in range(len(cyc)):
                src, dst = cyc[t], cyc[(t + 1) % len(cyc)]
                bundles[dst] = old[src]
                for i in range(inst.n):
                    vals[i][dst] = oldv[src][i]
        j = free[0]
        bundles[j].append(g)
        for i in agents:
            vals[i][j] += V[i][g]
    out = [bundles.get(i, []) for i in range(inst.n)]
    return Allocation.from_lists(out, inst.m)


def two_agent_mms3(inst: Instance) -> Allocation:
    """Two agents, each getting at least her 3-bundle maximin share."""
    if inst.n != 2:
        raise ValueError("two_agent_mms3 needs exactly two agents")
    sc = scale(inst, 3)
    for i in range(2):
        for g in range(inst.m):
            if sc.values[i][g] >= 1:
                rest = [h for h in range(inst.m) if h != g]
                bundles = [[g], rest] if i == 0 else [rest, [g]]
                return Allocation.from_lists(bundles, inst.m)
    return round_robin(sc, [0, 1])


def _residual_result(trace, inner: Allocation, served: dict[int, str], beta) -> PipelineResult:
    """Lift ``inner`` and merge reduction certificates (served keys are residual ids)."""
    alloc = lift_allocation(trace, inner)
    amap = trace.agent_map()
    certs = {i: "reduction" for i in trace.reduced_agents()}
    for a, why in served.items():
        certs[amap[a]] = why
    return PipelineResult(alloc, frozenset(certs), mpq(beta), certs, False, (), trace)


def n_minus_one_pipeline(inst: Instance, keep: Iterable[int] | None = None) -> PipelineResult:
    """Normalize, drop one agent, run the EFX envy-graph on the rest.

    All agents but one get at least min(1, (n+2)/(2(n-1))) of their MMS.
    ``keep`` restricts reductions to the given agents and never drops them
    (needs |keep| <= n-1).
    """
    n = inst.n
    if n < 2:
        raise ValueError("n must be at least 2")
    beta = min(mpq(1), general_n_beta(n))
    keepset = None if keep is None else set(keep)
    if keepset is not None and len(keepset) > n - 1:
        raise ValueError("at most n-1 agents can be kept")
    norm, trace = normalize(inst, agents=keepset)
    amap = trace.agent_map()
    if norm.n == 1:
        inner = Allocation.from_lists([range(norm.m)], norm.m)
        served = {} if keepset is not None and amap[0] not in keepset else {0: "value"}
        return _residual_result(trace, inner, served, beta)
    cand = [a for a in range(norm.n) if keepset is None or amap[a] not in keepset]
    drop = max(cand)
    part = [a for a in range(norm.n) if a != drop]
    inner = envy_graph_efx(norm, part)
    served = {a: "value" for a in part if value(norm, a, inner.bundles[a]) >= beta}
    return _residual_result(trace, inner, served, beta)


def half_agents_pipeline(inst: Instance, variant: str = "ef1",
                         selected: Iterable[int] | None = None) -> PipelineResult:
    """Satisfy floor(n/2) agents fully via round robin or the EFX envy graph.

    After normalization every good is worth less than 1, so an EF1 split of
    all goods among at most half the residual agents gives each of them at
    least 1 >= MMS.
    """
    if variant not in ("ef1", "beta_half"):
        raise ValueError("variant must be 'ef1' or 'beta_half'")
    n = inst.n
    sel = list(range(n // 2)) if selected is None else sorted(set(selected))
    if len(sel) > n // 2:
        raise ValueError("at most floor(n/2) agents can be selected")
    norm, trace = normalize(inst, agents=sel)
    amap = trace.agent_map()
    part = [a for a in range(norm.n) if amap[a] in set(sel)]
    if variant == "ef1":
        inner = round_robin(norm, part)
    else:
        inner = envy_graph_efx(norm, part)
    served = {a: "value" for a in part if value(norm, a, inner.bundles[a]) >= 1}
    return _residual_result(trace, inner, served, 1)


def mms_k_via_dummies(inst: Instance, k: int, algo: str | None = None) -> PipelineResult:
    """Give every agent her k-bundle maximin share by padding with dummies.

    ``k - n`` copies of agent 0 are added and an alpha-pipeline is run on the
    k agents with the real agents selected.  ``algo`` is ``"n-minus-one"``
    (valid for k = n+1) or ``"two-thirds"`` (valid for k >= 3n/2 and k < 9);
    by default the former is used when k = n+1 and k <= 4.  Goods held by
    dummies are left unassigned.  With k = n the base pipeline runs as is.
    """
    from .lone_divider import two_thirds_poly

    n = inst.n
    if k < n:
        raise ValueError("k must be at least n")
    if algo is None:
        algo = "n-minus-one" if k == n + 1 and k <= 4 else "two-thirds"
    rows = list(inst.values) + [inst.values[0]] * (k - n)
    big = Instance(tuple(rows), inst.m)
    real = list(range(n))
    if k == n:
        # nothing to pad: the base pipeline with its own default selection
        return n_minus_one_pipeline(inst) if algo == "n-minus-one" else two_thirds_poly(inst)
    if algo == "n-minus-one":
        if k != n + 1 or k > 4:
            warnings.warn(f"n-minus-one pipeline certifies full MMS only for k = n+1 <= 4 (got k={k})")
        res = n_minus_one_pipeline(big, keep=real)
    elif algo == "two-thirds":
        if n > (2 * k) // 3:
            raise ValueError(f"two-thirds path selects at most floor(2k/3) = {(2 * k) // 3} agents")
        if k >= 9:
            warnings.warn(f"two-thirds pipeline is only proven for k < 9 (got k={k})")
        res = two_thirds_poly(big, real)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    alloc = Allocation(res.allocation.bundles[:n], inst.m)
    certs = {i: why for i, why in res.certificates.items() if i < n}
    return PipelineResult(alloc, frozenset(certs), res.beta, certs, res.shortfall, res.rounds)
