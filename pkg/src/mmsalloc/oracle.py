"""Exact maximin shares and optimal-MMS values by branch and bound.

Values are converted to integers over a common denominator so the search
runs on plain Python ints.  Every search takes a node budget; running out
raises :class:`BudgetExceeded` instead of returning a bound.

>>> from mmsalloc.core import Instance
>>> inst = Instance.identical(["0.99", "0.99", "0.4", "0.4", "0.2", "0.01", "0.01"], 3)
>>> mms(inst, 0, 3).value
mpq(1,1)
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from gmpy2 import mpq

from .core import Allocation, Instance, to_rational, value

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    """The search hit its node limit; the true answer is unknown."""


def default_budget() -> int:
    env = os.environ.get("MMS_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class MmsResult:
    value: mpq
    partition: tuple[frozenset, ...]
    k: int


@dataclass(frozen=True)
class OptimalMmsResult:
    lam: mpq
    allocation: Allocation
    mms_values: tuple[mpq, ...]
    witnesses: tuple[Allocation, ...] = ()


def _common_scale(vals: Iterable[mpq]) -> int:
    den = 1
    for v in vals:
        d = int(v.denominator)
        den = den * d // math.gcd(den, d)
    return den


def _as_ints(row: Sequence[mpq]) -> tuple[list[int], int]:
    den = _common_scale(row)
    return [int(v * den) for v in row], den


class _Counter:
    __slots__ = ("left",)

    def __init__(self, budget: int):
        self.left = budget

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded("oracle node budget exhausted")


def _greedy(w: list[int], order: list[int], k: int) -> list[int]:
    """Longest-processing-time start: each good to the lightest bundle."""
    loads = [0] * k
    where = [0] * len(w)
    for g in order:
        b = min(range(k), key=lambda j: (loads[j], j))
        loads[b] += w[g]
        where[g] = b
    return where


def _cover(ws: list[int], k: int, target: int, counter: _Counter) -> list[int] | None:
    """Assign goods (weights descending) to k bundles each reaching ``target``.

    Bundles that already reach the target are interchangeable sinks, so a good
    either tops up one open bundle (one try per distinct load) or is dropped
    into a full bundle.
    """
    m = len(ws)
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + ws[i]
    loads = [0] * k
    where = [0] * m

    def rec(i: int) -> bool:
        counter.tick()
        deficit = 0
        open_bins = 0
        full = -1
        for b in range(k):
            if loads[b] < target:
                deficit += target - loads[b]
                open_bins += 1
            elif full < 0:
                full = b
        if deficit == 0:
            for j in range(i, m):
                where[j] = 0
            return True
        if deficit > suffix[i] or open_bins > m - i:
            return False
        g = ws[i]
        tried = set()
        cand = sorted((b for b in range(k) if loads[b] < target), key=lambda b: -loads[b])
        for b in cand:
            if loads[b] in tried:
                continue
            tried.add(loads[b])
            loads[b] += g
            where[i] = b
            if rec(i + 1):
                return True
            loads[b] -= g
        if full >= 0 and deficit <= suffix[i + 1]:
            where[i] = full
            if rec(i + 1):
                return True
        return False

    return list(where) if rec(0) else None


def _mms_int(w: list[int], k: int, counter: _Counter, target: int | None = None):
    """Maximin over k bundles for integer weights.

    With ``target`` set, answers the decision question "is MMS >= target" and
    returns (reached, assignment); otherwise returns (value, assignment).
    """
    m = len(w)
    order = sorted(range(m), key=lambda g: (-w[g], g))
    if k == 1:
        best = sum(w)
        return (best >= target if target is not None else best), [0] * m
    where = _greedy(w, order, k)
    loads = [0] * k
    for g in range(m):
        loads[where[g]] += w[g]
    best = min(loads)
    ub = sum(w) // k
    ws = [w[g] for g in order]
    if target is not None:
        if best >= target:
            return True, where
        if target > ub:
            return False, where
        res = _cover(ws, k, target, counter)
        if res is None:
            return False, where
        out = [0] * m
        for pos, g in enumerate(order):
            out[g] = res[pos]
        return True, out
    while best < ub:
        res = _cover(ws, k, best + 1, counter)
        if res is None:
            break
        out = [0] * m
        for pos, g in enumerate(order):
            out[g] = res[pos]
        loads = [0] * k
        for g in range(m):
            loads[out[g]] += w[g]
        best = min(loads)
        where = out
    return best, where


def _partition(where: list[int], k: int) -> tuple[frozenset, ...]:
    parts: list[set] = [set() for _ in range(k)]
    for g, b in enumerate(where):
        parts[b].add(g)
    return tuple(frozenset(p) for p in parts)


def mms(inst: Instance, i: int, k: int, budget: int | None = None) -> MmsResult:
    """Maximin share of agent ``i`` over ``k`` bundles, with a witness partition."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0 <= i < inst.n:
        raise IndexError(f"agent {i} out of range")
    w, den = _as_ints(inst.values[i])
    counter = _Counter(default_budget() if budget is None else budget)
    best, where = _mms_int(w, k, counter)
    return MmsResult(mpq(best, den), _partition(where, k), k)


def mms_exceeds(inst: Instance, i: int, k: int, threshold, budget: int | None = None) -> bool:
    """True iff agent ``i``'s MMS over ``k`` bundles is strictly above ``threshold``."""
    threshold = to_rational(threshold)
    row = inst.values[i]
    w, den = _as_ints(list(row) + [threshold])
    t_int = w.pop()
    # t_int is exact because the threshold was included in the common scale
    counter = _Counter(default_budget() if budget is None else budget)
    reached, _ = _mms_int(w, k, counter, target=t_int + 1)
    return reached


def mms_at_most(inst: Instance, i: int, k: int, threshold, budget: int | None = None) -> bool:
    """True iff MMS_i^k <= threshold, trying the proportional bound first."""
    threshold = to_rational(threshold)
    if threshold * k >= inst.total(i):
        return True
    return not mms_exceeds(inst, i, k, threshold, budget)


def count_mms_satisfied(inst: Instance, alloc: Allocation, budget: int | None = None) -> int:
    """Number of agents whose bundle is worth at least their n-bundle MMS."""
    return len(mms_satisfied_agents(inst, alloc, budget=budget))


def mms_satisfied_agents(inst: Instance, alloc: Allocation, beta=1, k: int | None = None,
                         budget: int | None = None) -> list[int]:
    """Agents with v_i(A_i) >= beta * MMS_i^k (k defaults to n)."""
    beta = to_rational(beta)
    k = inst.n if k is None else k
    out = []
    for i in range(inst.n):
        got = value(inst, i, alloc.bundles[i])
        if beta == 0 or mms_at_most(inst, i, k, got / beta, budget):
            out.append(i)
    return out


def alpha_beta_check(inst: Instance, alloc: Allocation, alpha, beta, agents: Iterable[int],
                     budget: int | None = None) -> bool:
    """True iff every agent in ``agents`` gets at least beta times her MMS.

    ``agents`` must have exactly floor(alpha * n) members.
    """
    agents = sorted(set(agents))
    alpha, beta = to_rational(alpha), to_rational(beta)
    need = int(math.floor(alpha * inst.n))
    if len(agents) != need:
        raise ValueError(f"subset has {len(agents)} agents, expected {need}")
    for i in agents:
        got = value(inst, i, alloc.bundles[i])
        if beta != 0 and not mms_at_most(inst, i, inst.n, got / beta, budget):
            return False
    return True


def _deficit_bound(cur: list[int], targets: list[int], spare: int) -> mpq:
    """Largest lam with sum_i max(0, lam*targets[i] - cur[i]) <= spare."""
    pts = sorted((mpq(c, t), t) for c, t in zip(cur, targets))
    slope = 0
    used = mpq(0)  # sum over agents below lam of (lam*t - c), evaluated at previous point
    prev = pts[0][0]
    for idx, (x, t) in enumerate(pts):
        if idx:
            need = used + slope * (x - prev)
            if need > spare:
                return prev + (spare - used) / slope
            used = need
            prev = x
        slope += t
    return prev + (spare - used) / slope


def optimal_mms(inst: Instance, budget: int | None = None, all_witnesses: bool = False,
                max_witnesses: int = 100_000) -> OptimalMmsResult:
    """Largest lam such that some allocation gives every agent lam * MMS_i^n.

    Agents whose MMS is zero are ignored (their ratio is unbounded); if all are
    zero the result is 1.  With ``all_witnesses`` every allocation attaining
    the optimum is collected as well.
    """
    n, m = inst.n, inst.m
    counter = _Counter(default_budget() if budget is None else budget)
    mms_vals = tuple(mms(inst, i, n, budget=counter.left).value for i in range(n))
    active = [i for i in range(n) if mms_vals[i] > 0]
    if n == 1 or not active:
        alloc = Allocation.from_lists([list(range(m))] + [[] for _ in range(n - 1)], m)
        return OptimalMmsResult(mpq(1), alloc, mms_vals, (alloc,) if all_witnesses else ())
    den = _common_scale([v for row in inst.values for v in row] + list(mms_vals))
    W = [[int(v * den) for v in row] for row in inst.values]
    targets = [int(mms_vals[i] * den) for i in active]
    A = [W[i] for i in active]
    na = len(active)
    order = sorted(range(m), key=lambda g: (-max(W[i][g] for i in range(n)), g))
    gmax = [max(A[a][g] for a in range(na)) for g in order]
    spare_suffix = [0] * (m + 1)
    rem_suffix = [[0] * (m + 1) for _ in range(na)]
    for pos in range(m - 1, -1, -1):
        g = order[pos]
        spare_suffix[pos] = spare_suffix[pos + 1] + gmax[pos]
        for a in range(na):
            rem_suffix[a][pos] = rem_suffix[a][pos + 1] + A[a][g]
    twin = [tuple(b for b in range(a) if A[b] == A[a] and targets[b] == targets[a]) for a in range(na)]

    # incumbent: each good to the agent furthest behind who values it
    cur = [0] * na
    holder = [0] * m
    for pos, g in enumerate(order):
        pick = min((a for a in range(na) if A[a][g] > 0),
                   key=lambda a: (mpq(cur[a], targets[a]), a), default=0)
        cur[pick] += A[pick][g]
        holder[g] = pick
    best = min(mpq(cur[a], targets[a]) for a in range(na))
    best_holder = list(holder)
    witnesses: list[list[int]] = []

    cur = [0] * na

    def rec(pos: int, strict: bool):
        nonlocal best, best_holder
        counter.tick()
        if pos == m:
            lam = min(mpq(cur[a], targets[a]) for a in range(na))
            if strict and lam > best:
                best = lam
                best_holder = list(holder)
            elif not strict and lam >= best:
                if len(witnesses) >= max_witnesses:
                    raise BudgetExceeded("too many optimal witnesses")
                witnesses.append(list(holder))
            return
        ub = min(mpq(cur[a] + rem_suffix[a][pos], targets[a]) for a in range(na))
        ub = min(ub, _deficit_bound(cur, targets, spare_suffix[pos]))
        if ub < best or (strict and ub == best):
            return
        g = order[pos]
        seen_twins = set()
        for a in sorted(range(na), key=lambda a: (mpq(cur[a], targets[a]), a)):
            key = None
            for b in twin[a]:
                if cur[b] == cur[a]:
                    key = b
                    break
            if key is not None and key in seen_twins:
                continue
            seen_twins.add(a if key is None else key)
            cur[a] += A[a][g]
            holder[g] = a
            rec(pos + 1, strict)
            cur[a] -= A[a][g]

    rec(0, True)
    if all_witnesses:
        # twins are interchangeable, so enumerate without the twin pruning
        twin = [() for _ in range(na)]
        rec(0, False)

    def to_alloc(h: list[int]) -> Allocation:
        bundles: list[list[int]] = [[] for _ in range(n)]
        for g in range(m):
            bundles[active[h[g]]].append(g)
        return Allocation.from_lists(bundles, m)

    return OptimalMmsResult(best, to_alloc(best_holder), mms_vals,
                            tuple(to_alloc(h) for h in witnesses))
