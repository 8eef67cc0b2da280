"""Counterexample constructions.

The tensor family builds instances where every optimal-MMS allocation gives
full MMS to few agents: goods are the non-zero entries of an order-d tensor
S + T whose only equi-partitions are "aligned" slice families, and each
agent group sees a small perturbation P^j that singles out one family.
Indices into tensors are 1-based d-tuples.

>>> S = tensor_S(4, 2)
>>> S[(1, 1)], S[(1, 4)], S[(4, 4)]
(mpq(7,8), mpq(1,8), mpq(1,8))
>>> {S.slice_sum(1, i) for i in range(1, 5)}
{mpq(1,1)}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from gmpy2 import mpq

from .core import Instance, to_rational
from .oracle import BudgetExceeded, default_budget


@dataclass(frozen=True)
class SparseTensor:
    d: int
    n: int
    entries: dict

    def __getitem__(self, idx) -> mpq:
        return self.entries.get(tuple(idx), mpq(0))

    def __add__(self, other: "SparseTensor") -> "SparseTensor":
        if (self.d, self.n) != (other.d, other.n):
            raise ValueError("tensor shapes differ")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, mpq(0)) + v
        return SparseTensor(self.d, self.n, {k: v for k, v in out.items() if v != 0})

    def nonzero(self) -> list[tuple]:
        return sorted(k for k, v in self.entries.items() if v != 0)

    def slice(self, axis: int, index: int) -> dict:
        """Entries whose ``axis``-th coordinate (1-based) equals ``index``."""
        return {k: v for k, v in self.entries.items() if k[axis - 1] == index}

    def slice_sum(self, axis: int, index: int) -> mpq:
        return sum(self.slice(axis, index).values(), mpq(0))

    def total(self) -> mpq:
        return sum(self.entries.values(), mpq(0))


def _point(d: int, i: int, j: int | None = None, k: int | None = None) -> tuple:
    """All coordinates i, except coordinate j (1-based) set to k."""
    idx = [i] * d
    if j is not None:
        idx[j - 1] = k
    return tuple(idx)


def _check(n: int, d: int):
    if d < 2 or n < 3:
        raise ValueError("need d >= 2 and n >= 3")


def _put(entries: dict, key: tuple, v: mpq):
    entries[key] = entries.get(key, mpq(0)) + v


def tensor_S(n: int, d: int) -> SparseTensor:
    """Slice-sum-1 tensor whose equi-partitions are exactly the slice families."""
    _check(n, d)
    e: dict = {}
    for i in range(1, n):
        q = mpq(1, d ** (n - i))
        _put(e, _point(d, i), 1 - q)
        for j in range(1, d + 1):
            _put(e, _point(d, i, j, n), q / (d - 1))
    _put(e, _point(d, n), 1 - sum((mpq(1, (d - 1) * d ** (n - i)) for i in range(1, n)), mpq(0)))
    return SparseTensor(d, n, e)


def t_parameters(n: int, d: int, eps) -> tuple[dict, dict, dict, mpq]:
    """The r, u, x and z_1 values defining T (keys are (i, j), 1-based)."""
    eps = to_rational(eps)
    r = {(i, j): eps ** (d * (n - 1) - d * i - j + 1) for i in range(1, n) for j in range(1, d + 1)}
    u = {}
    for j in range(1, d + 1):
        u[(1, j)] = r[(1, j)]
    for i in range(2, n):
        for j in range(1, d + 1):
            others = sum((-u[(i - 1, k)] for k in range(1, d + 1) if k != j), mpq(0))
            u[(i, j)] = others / (d - 1) + mpq(d - 2, d - 1) * u[(i - 1, j)] + r[(i, j)]
    x = {j: u[(n - 1, j)] - r[(n - 1, j)] for j in range(1, d + 1)}
    z1 = sum((r[(i, 1)] for i in range(1, n - 1)), mpq(0)) - x[1]
    return r, u, x, z1


def tensor_T(n: int, d: int, eps) -> SparseTensor:
    """Zero-slice-sum perturbation that leaves only aligned slice families."""
    _check(n, d)
    r, u, x, z1 = t_parameters(n, d, eps)
    e: dict = {}
    for i in range(1, n - 1):
        for j in range(1, d + 1):
            _put(e, _point(d, i, j, n), -r[(i, j)])
            _put(e, _point(d, i, j, i + 1), u[(i, j)])
    for j in range(1, d + 1):
        _put(e, _point(d, n - 1, j, n), x[j])
    _put(e, _point(d, n), z1)
    return SparseTensor(d, n, e)


def perturbation_P(n: int, d: int, j: int, eps_tilde) -> SparseTensor:
    """-eps_tilde on the entries (i,..,i, x_j = n) for i < n; (n-1) eps_tilde at the corner."""
    _check(n, d)
    if not 1 <= j <= d:
        raise ValueError("group index must be in 1..d")
    et = to_rational(eps_tilde)
    e = {_point(d, i, j, n): -et for i in range(1, n)}
    e[_point(d, n)] = (n - 1) * et
    return SparseTensor(d, n, e)


def default_eps(n: int, d: int) -> tuple[mpq, mpq]:
    eps = mpq(1, 4 * d ** (d * (n - 1)))
    return eps, eps ** (d * (n - 1) + 1)


def group_sizes(n: int, d: int) -> list[int]:
    """Split n agents into d groups, the first n mod d of them one larger."""
    base, extra = divmod(n, d)
    return [base + 1 if g < extra else base for g in range(d)]


@dataclass(frozen=True)
class CounterexampleInstance:
    instance: Instance
    groups: tuple[int, ...]  # group id (1-based) of each agent
    goods: tuple[tuple, ...]  # tensor index of each good
    eps: mpq
    eps_tilde: mpq

    def aligned_allocation(self, axis: int) -> list[list[int]]:
        """Goods grouped by slice index along ``axis``; bundle i-1 holds slice i."""
        n = self.instance.n
        out: list[list[int]] = [[] for _ in range(n)]
        for g, idx in enumerate(self.goods):
            out[idx[axis - 1] - 1].append(g)
        return out


def optimal_mms_counterexample(n: int, d: int, eps=None, eps_tilde=None,
                               check_uniqueness: bool | None = None) -> CounterexampleInstance:
    """Instance with one good per non-zero entry of S + T and d agent groups.

    Group j values goods per S + T + P^j.  Rejects parameters that make an
    entry negative; when ``check_uniqueness`` is on (default: if there are at
    most 16 goods) also rejects parameters under which some group has more
    than one equi-partition.
    """
    _check(n, d)
    if d > n // 2:
        raise ValueError("groups need at least two agents: d <= n/2")
    de, dt = default_eps(n, d)
    eps = de if eps is None else to_rational(eps)
    eps_tilde = dt if eps_tilde is None else to_rational(eps_tilde)
    base = tensor_S(n, d) + tensor_T(n, d, eps)
    goods = tuple(base.nonzero())
    tensors = [base + perturbation_P(n, d, j, eps_tilde) for j in range(1, d + 1)]
    for j, t in enumerate(tensors, 1):
        if any(v < 0 for v in t.entries.values()) or any(k not in set(goods) for k in t.entries):
            raise ValueError(f"eps/eps_tilde too large: group {j} has a negative entry")
    if check_uniqueness is None:
        check_uniqueness = len(goods) <= 16
    if check_uniqueness:
        for j, t in enumerate(tensors, 1):
            if len(equi_partition_search(t, n, limit=2)) != 1:
                raise ValueError(f"eps/eps_tilde too large: group {j} has several equi-partitions")
    groups = []
    for j, size in enumerate(group_sizes(n, d), 1):
        groups += [j] * size
    rows = [tuple(tensors[j - 1][k] for k in goods) for j in groups]
    return CounterexampleInstance(Instance(tuple(rows), len(goods)), tuple(groups), goods, eps, eps_tilde)


def equi_partition_search(tensor: SparseTensor, parts: int, budget: int | None = None,
                          limit: int | None = None) -> list[tuple[frozenset, ...]]:
    """All partitions of the non-zero entries into ``parts`` sets of equal sum.

    Partitions are unordered: each is returned once, as a tuple of frozensets
    of tensor indices sorted by their smallest index.
    """
    keys = tensor.nonzero()
    vals = [tensor[k] for k in keys]
    total = sum(vals, mpq(0))
    den = 1
    for v in vals + [total / parts]:
        den = den * int(v.denominator) // math.gcd(den, int(v.denominator))
    w = [int(v * den) for v in vals]
    target = int(total / parts * den)
    if target * parts != sum(w):
        return []
    order = sorted(range(len(w)), key=lambda a: (-w[a], a))
    ws = [w[a] for a in order]
    loads = [0] * parts
    where = [0] * len(ws)
    found: list[tuple[frozenset, ...]] = []
    left = [default_budget() if budget is None else budget]

    def rec(p: int):
        left[0] -= 1
        if left[0] < 0:
            raise BudgetExceeded("equi-partition search budget exhausted")
        if p == len(ws):
            groups: list[set] = [set() for _ in range(parts)]
            for pos, b in enumerate(where):
                groups[b].add(keys[order[pos]])
            found.append(tuple(sorted((frozenset(g) for g in groups), key=min)))
            return limit is not None and len(found) >= limit
        g = ws[p]
        tried_empty = False
        for b in range(parts):
            if loads[b] + g > target:
                continue
            if loads[b] == 0:
                if tried_empty:
                    continue
                tried_empty = True
            loads[b] += g
            where[p] = b
            stop = rec(p + 1)
            loads[b] -= g
            if stop:
                return True
        return False

    rec(0)
    return found


def is_slice_family(tensor: SparseTensor, partition: Iterable[frozenset]) -> tuple[bool, bool]:
    """(every part is the support of some slice, all those slices share one axis)."""
    axes_used = []
    for part in partition:
        hit = None
        for axis in range(1, tensor.d + 1):
            for i in range(1, tensor.n + 1):
                support = frozenset(k for k, v in tensor.slice(axis, i).items() if v != 0)
                if support == part:
                    hit = axis
                    break
            if hit is not None:
                break
        if hit is None:
            return False, False
        axes_used.append(hit)
    return True, len(set(axes_used)) == 1


def _rational_list(vals) -> list[mpq]:
    return [to_rational(v) for v in vals]


def bag_filling_gap() -> Instance:
    """Nine identical agents on which plain bag-filling forms only five bags."""
    row = ["0.99"] * 5 + ["0.01"] * 5 + ["0.95", "0.05"] + ["0.55"] * 3 + ["0.45"] * 3
    return Instance.identical(_rational_list(row), 9)


def tightness(n: int = 9, eps="1/100", eps_tilde="1/1000000") -> Instance:
    """Identical agents where the polynomial lone divider serves floor(n/2)+1."""
    if n < 9:
        raise ValueError("the tightness family needs n >= 9")
    e, et = to_rational(eps), to_rational(eps_tilde)
    if not (0 < et < e) or (n + 1) * e >= mpq(1, 2) or e + et >= mpq(1, 2):
        raise ValueError("need 0 < eps_tilde < eps and eps small")
    row = [1 - e - et] * (n - 1) + [mpq(1, 2) - e] * 2 + [(n + 1) * e] + [et] * (n - 1)
    return Instance.identical(row, n)


def ef1_not_half_mms() -> Instance:
    """Three identical agents with an EF1 allocation below half the MMS."""
    return Instance.identical(_rational_list(["0.99", "0.99", "0.4", "0.4", "0.2", "0.01", "0.01"]), 3)


EF1_NOT_HALF_MMS_ALLOCATION = ((0, 3, 6), (1, 4), (2, 5))


def fixed_instance(name: str, **params) -> Instance:
    """Named instances: ``bag_filling_gap``, ``tightness`` and ``ef1_not_half_mms``."""
    table = {"bag_filling_gap": bag_filling_gap, "tightness": tightness, "ef1_not_half_mms": ef1_not_half_mms}
    key = name.replace("-", "_")
    aliases = {"bag_gap": "bag_filling_gap", "ef1_gap": "ef1_not_half_mms"}
    key = aliases.get(key, key)
    if key not in table:
        raise ValueError(f"unknown instance {name!r}")
    return table[key](**params)
