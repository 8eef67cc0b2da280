"""Lone-divider engines for satisfying two thirds of the agents.

Each round the lowest-index remaining selected agent (the divider) cuts the
remaining goods into bundles she values at least 1; an envy-free matching
then hands some of them out.  Every bundle contains exactly one of the top
floor(2n/3) "head" goods.

Two partition rules are provided: a polynomial bag-filling rule on normalized
instances, and an oracle-backed rule on strongly normalized instances that
uses the divider's MMS partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

from .approx import PipelineResult
from .core import Allocation, Instance, value
from .reduce import lift_allocation, normalize, strong_normalize

HALF = mpq(1, 2)
ONE = mpq(1)


def _max_matching(agents: Sequence[int], nbundles: int, accept: Callable[[int, int], bool]) -> dict[int, int]:
    """Maximum bipartite matching by augmenting paths (agent -> bundle)."""
    adj = {a: [k for k in range(nbundles) if accept(a, k)] for a in agents}
    owner: dict[int, int] = {}

    def augment(a, seen):
        for k in adj[a]:
            if k in seen:
                continue
            seen.add(k)
            if k not in owner or augment(owner[k], seen):
                owner[k] = a
                return True
        return False

    for a in agents:
        augment(a, set())
    return {a: k for k, a in owner.items()}


def envy_free_matching(agents: Sequence[int], nbundles: int, accept: Callable[[int, int], bool]) -> dict[int, int]:
    """Matching in which no unmatched agent accepts a matched bundle.

    Start from a maximum matching and release every pair reachable from an
    unmatched agent along an alternating path.

    >>> envy_free_matching([0], 3, lambda a, k: True)
    {0: 0}
    >>> envy_free_matching([0, 1], 2, lambda a, k: k == 0)
    {}
    """
    agents = list(agents)
    match = _max_matching(agents, nbundles, accept)
    owner = {k: a for a, k in match.items()}
    frontier = [a for a in agents if a not in match]
    reached = set(frontier)
    while frontier:
        a = frontier.pop()
        for k in range(nbundles):
            if accept(a, k) and k in owner and owner[k] not in reached:
                reached.add(owner[k])
                frontier.append(owner[k])
    return {a: k for a, k in match.items() if a not in reached}


@dataclass
class DividerState:
    """Mutable bookkeeping of a lone-divider run on one instance."""

    inst: Instance
    heads: int
    remaining: list[int]
    agents: list[int]
    allocated: dict[int, list[int]] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.allocated)

    def head_goods(self) -> list[int]:
        return [g for g in self.remaining if g < self.heads]

    def tail_goods(self) -> list[int]:
        return [g for g in self.remaining if g >= self.heads]


@dataclass(frozen=True)
class RoundInfo:
    """Per-round counters: divider, residual agents n', spare highs s, bags t."""

    divider: int
    n_prime: int
    s: int
    pairs: int
    restricted: int
    bags: int
    bundles: int
    matched: int


def bag_fill(heads: Sequence[int], fillers: Sequence[int], vals: Sequence[mpq],
             target: mpq = ONE) -> tuple[list[list[int]], int]:
    """Seed one bag per head good (in order), topping up from ``fillers`` in order.

    Fillers may be single goods or tuples of goods used as one unit.  Stops at
    the first bag that cannot reach ``target``.  Returns the full bags and the
    number of fillers consumed by them.
    """
    bags = []
    pos = 0
    for h in heads:
        bag = [h]
        total = vals[h]
        p = pos
        while total < target and p < len(fillers):
            unit = fillers[p]
            p += 1
            for g in (unit if isinstance(unit, tuple) else (unit,)):
                bag.append(g)
                total += vals[g]
        if total < target:
            break
        bags.append(bag)
        pos = p
    return bags, pos


def _pairs(heads: list[int], spare: list[int]) -> tuple[list[list[int]], list[int], list[int]]:
    """Pair the lowest heads with the highest spare high goods, outside in."""
    p = min(len(heads), len(spare))
    low = heads[len(heads) - p:]
    pairs = [[h, x] for h, x in zip(reversed(low), spare[:p])]
    return pairs, heads[:len(heads) - p], spare[p:]


def divider_partition_poly(state: DividerState, divider: int, pairing: bool = True,
                           info: dict | None = None) -> list[list[int]]:
    """Bundles worth at least 1 to ``divider``, one head good each.

    Non-head goods worth at least 1/2 are first paired with the lowest head
    goods; the remaining heads are bag-filled with the low goods in
    descending order.  With ``pairing=False`` the high non-head goods are
    ignored and only bag-filling runs.
    """
    vals = state.inst.values[divider]
    heads = state.head_goods()
    tail = state.tail_goods()
    spare = [g for g in tail if vals[g] >= HALF]
    low = [g for g in tail if vals[g] < HALF]
    bundles: list[list[int]] = []
    n_prime = len(heads)
    if pairing:
        bundles, heads, _ = _pairs(heads, spare)
    bags, _ = bag_fill(heads, low, vals)
    if info is not None:
        info.update(n_prime=n_prime, s=len(spare), pairs=len(bundles), restricted=0, bags=len(bags))
    return bundles + bags


def divider_partition_existence(state: DividerState, divider: int, mms_partition: Sequence[Iterable[int]],
                                info: dict | None = None) -> list[list[int]]:
    """Bundles for a strongly normalized divider, using her MMS partition.

    Step 1 pairs the lowest heads with non-head goods worth more than 1/2.
    Step 2 fills up to s further heads only with remainders of MMS bundles
    whose high good is already gone, each remainder used as one unit.
    Step 3 bag-fills the last heads with the leftover low goods.
    """
    vals = state.inst.values[divider]
    heads = state.head_goods()
    tail = state.tail_goods()
    n_prime = len(heads)
    spare = [g for g in tail if vals[g] > HALF]
    s = len(spare)
    bundles, heads, _ = _pairs(heads, spare)
    used = {g for b in bundles for g in b}
    free = set(state.remaining) - used
    restricted: list[list[int]] = []
    if heads and s:
        units = []
        for part in mms_partition:
            high = [g for g in part if vals[g] > HALF]
            if len(high) != 1 or high[0] in free:
                continue
            unit = tuple(sorted(g for g in part if g in free and g != high[0]))
            if unit:
                units.append(unit)
        units.sort(key=lambda u: (-sum((vals[g] for g in u), mpq(0)), u[0]))
        q = min(len(heads), s)
        restricted, _ = bag_fill(heads[:q], units, vals)
        heads = heads[len(restricted):]
        used |= {g for b in restricted for g in b}
        free -= used
    low = [g for g in tail if g in free and vals[g] <= HALF]
    bags, _ = bag_fill(heads, low, vals) if heads else ([], 0)
    if info is not None:
        info.update(n_prime=n_prime, s=s, pairs=len(bundles), restricted=len(restricted), bags=len(bags))
    return bundles + restricted + bags


def _lone_divider(state: DividerState, partition: Callable[[DividerState, int, dict], list[list[int]]]):
    """Run divider rounds until every selected agent is served or bundles run out.

    Returns (served agents -> bundle, shortfall flag, round log).
    """
    inst = state.inst
    rounds = []
    served: dict[int, list[int]] = {}
    shortfall = False
    while state.agents:
        divider = state.agents[0]
        info: dict = {}
        bundles = partition(state, divider, info)
        bvals = {}

        def accept(a, k):
            key = (a, k)
            if key not in bvals:
                bvals[key] = value(inst, a, bundles[k]) >= 1
            return bvals[key]

        if len(bundles) < len(state.agents):
            shortfall = True
            match = _max_matching(state.agents, len(bundles), accept)
        else:
            match = envy_free_matching(state.agents, len(bundles), accept)
        rounds.append(RoundInfo(divider, info.get("n_prime", 0), info.get("s", 0), info.get("pairs", 0),
                                info.get("restricted", 0), info.get("bags", 0), len(bundles), len(match)))
        if not match:
            shortfall = True
            break
        for a, k in sorted(match.items()):
            served[a] = bundles[k]
            state.allocated[a] = bundles[k]
        gone = {g for k in match.values() for g in bundles[k]}
        state.remaining = [g for g in state.remaining if g not in gone]
        state.agents = [a for a in state.agents if a not in match]
        if shortfall:
            break
    return served, shortfall, tuple(rounds)


def _default_selection(n: int, selected: Iterable[int] | None) -> list[int]:
    sel = list(range((2 * n) // 3)) if selected is None else sorted(set(selected))
    if len(sel) > (2 * n) // 3:
        raise ValueError(f"at most floor(2n/3) = {(2 * n) // 3} agents can be selected")
    if any(not 0 <= a < n for a in sel):
        raise IndexError("selected agent out of range")
    return sel


def two_thirds_poly(inst: Instance, selected: Iterable[int] | None = None, pairing: bool = True) -> PipelineResult:
    """Polynomial lone-divider algorithm; full MMS for floor(2n/3) agents when n < 9.

    Reductions are restricted to the selected agents.  If a round forms too
    few bundles the result is flagged ``shortfall``: a maximum matching of
    the bundles formed is allocated, unmatched selected agents get nothing and
    leftover goods stay unassigned.
    """
    sel = _default_selection(inst.n, selected)
    norm, trace = normalize(inst, agents=sel)
    amap = trace.agent_map()
    res_sel = [a for a in range(norm.n) if amap[a] in set(sel)]
    state = DividerState(norm, (2 * norm.n) // 3, list(range(norm.m)), res_sel)
    served, shortfall, rounds = _lone_divider(
        state, lambda st, d, info: divider_partition_poly(st, d, pairing=pairing, info=info))
    return _finish(norm, trace, served, shortfall, rounds)


def _finish(norm, trace, served, shortfall, rounds, extra_certs=None) -> PipelineResult:
    amap = trace.agent_map()
    bundles = [served.get(a, []) for a in range(norm.n)]
    alloc = lift_allocation(trace, Allocation.from_lists(bundles, norm.m))
    certs = {i: "reduction" for i in trace.reduced_agents()}
    for a in served:
        certs[amap[a]] = "value"
    for a, why in (extra_certs or {}).items():
        certs[amap[a]] = why
    return PipelineResult(alloc, frozenset(certs), ONE, certs, shortfall, rounds, trace)


def two_thirds_existence_engine(inst: Instance, selected: Iterable[int] | None = None,
                                budget: int | None = None) -> PipelineResult:
    """Oracle-backed lone divider; serves every selected agent for any n.

    Agents whose MMS is zero are certified outright.  The others are strongly
    normalized and divide using their exact MMS partitions.
    """
    from .oracle import mms

    n = inst.n
    sel = _default_selection(n, selected)
    zero = [a for a in sel if inst.total(a) == 0 or mms(inst, a, n, budget=budget).value == 0]
    active = [a for a in sel if a not in zero]
    if any(inst.total(i) == 0 for i in range(n)):
        # agents with nothing of value only get in the way of scaling
        rows = [row if inst.total(i) > 0 else tuple(mpq(1) for _ in row) for i, row in enumerate(inst.values)]
        work = Instance(tuple(rows), inst.m)
    else:
        work = inst
    norm, trace = strong_normalize(work, agents=active, budget=budget)
    parts = trace.partitions
    state = DividerState(norm, (2 * n) // 3, list(range(norm.m)), list(active))
    served, shortfall, rounds = _lone_divider(
        state, lambda st, d, info: divider_partition_existence(st, d, parts[d], info=info))
    extra = {a: "zero-mms" for a in zero}
    return _finish(norm, trace, served, shortfall, rounds, extra)


def extended_experiment_algorithm(inst: Instance) -> PipelineResult:
    """Two-thirds lone divider followed by bag-filling the leftovers to everyone else.

    All agents may be reduced.  On the residual instance the first
    floor(2n'/3) agents run the lone divider; afterwards the remaining goods
    are bag-filled for the unserved agents, largest good first, each bag going
    to the lowest-index agent who values it at least 1 as soon as one does.
    Whatever is left when no agent accepts goes to the lowest-index unserved
    agent.
    """
    norm, trace = normalize(inst)
    n = norm.n
    sel = list(range((2 * n) // 3))
    state = DividerState(norm, (2 * n) // 3, list(range(norm.m)), sel)
    served, shortfall, rounds = _lone_divider(state, lambda st, d, info: divider_partition_poly(st, d, info=info))
    bundles = {a: list(b) for a, b in served.items()}
    certified = set(served)
    waiting = [a for a in range(n) if a not in bundles]
    rest = list(state.remaining)
    V = norm.values
    while waiting and rest:
        bag: list[int] = []
        totals = {a: mpq(0) for a in waiting}
        taker = None
        for g in rest:
            bag.append(g)
            for a in waiting:
                totals[a] += V[a][g]
            ok = [a for a in waiting if totals[a] >= 1]
            if ok:
                taker = ok[0]
                break
        if taker is None:
            bundles[waiting[0]] = bag
            break
        bundles[taker] = bag
        certified.add(taker)
        waiting.remove(taker)
        taken = set(bag)
        rest = [g for g in rest if g not in taken]
    res = _finish(norm, trace, bundles, shortfall, rounds)
    # the agent handed the final scraps is not certified
    amap = trace.agent_map()
    certs = {i: why for i, why in res.certificates.items() if why == "reduction"}
    for a in certified:
        certs[amap[a]] = "value"
    return PipelineResult(res.allocation, frozenset(certs), ONE, certs, shortfall, rounds, trace)
