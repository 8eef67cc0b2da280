"""Instances, allocations, fairness predicates, ordering and scaling.

All valuations are exact rationals (``gmpy2.mpq``).  Goods and agents are
0-based indices.

>>> inst = Instance.from_rows([[2, 1], [1, 2]])
>>> is_ordered(inst)
False
>>> ordered, order_map = order_instance(inst)
>>> [[str(x) for x in row] for row in ordered.values]
[['2', '1'], ['2', '1']]
>>> alloc = unorder_allocation(inst, order_map, Allocation.from_lists([[0], [1]], m=2))
>>> [value(inst, i, alloc.bundles[i]) for i in range(2)]
[mpq(2,1), mpq(2,1)]
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

Rational = mpq


def to_rational(x) -> mpq:
    """Convert ints, Fractions, decimal strings or "p/q" strings to an exact mpq.

    Floats are converted through their shortest decimal repr, so ``0.99``
    becomes 99/100 rather than its binary expansion.
    """
    if isinstance(x, type(mpq())):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not valuations")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        x = repr(x)
    if isinstance(x, str):
        f = Fraction(x.strip())
        return mpq(int(f.numerator), int(f.denominator))
    # numpy integers, Decimal, ...
    f = Fraction(x)
    return mpq(int(f.numerator), int(f.denominator))


def format_rational(x, decimal: bool = False) -> str:
    """Render ``x`` as "p/q" (or "p" for integers), or with 6 decimals."""
    x = to_rational(x)
    if decimal:
        return f"{float(x):.6f}"
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Instance:
    """n agents, m goods and a non-negative rational valuation matrix."""

    values: tuple[tuple[mpq, ...], ...]
    m: int

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("an instance needs at least one agent")
        for row in self.values:
            if len(row) != self.m:
                raise ValueError("valuation rows must all have length m")
            for v in row:
                if v < 0:
                    raise ValueError("valuations must be non-negative")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], m: int | None = None) -> "Instance":
        vals = tuple(tuple(to_rational(v) for v in row) for row in rows)
        if m is None:
            m = len(vals[0]) if vals else 0
        return cls(vals, m)

    @classmethod
    def identical(cls, row: Iterable, n: int) -> "Instance":
        row = tuple(to_rational(v) for v in row)
        return cls(tuple(row for _ in range(n)), len(row))

    @property
    def n(self) -> int:
        return len(self.values)

    def total(self, i: int) -> mpq:
        return sum(self.values[i], mpq(0))

    def restrict(self, agents: Sequence[int], goods: Sequence[int]) -> "Instance":
        """Sub-instance on the given agents and goods, relabelled 0.."""
        vals = tuple(tuple(self.values[i][g] for g in goods) for i in agents)
        return Instance(vals, len(goods))

    def __repr__(self):
        rows = ", ".join("[" + ", ".join(format_rational(v) for v in r) + "]" for r in self.values)
        return f"Instance(n={self.n}, m={self.m}, values=[{rows}])"


@dataclass(frozen=True)
class Allocation:
    """Disjoint bundles of goods, one per agent; may leave goods unassigned."""

    bundles: tuple[frozenset, ...]
    m: int

    def __post_init__(self):
        seen: set[int] = set()
        for b in self.bundles:
            for g in b:
                if not 0 <= g < self.m:
                    raise ValueError(f"good {g} out of range for m={self.m}")
                if g in seen:
                    raise ValueError(f"good {g} assigned twice")
                seen.add(g)

    @classmethod
    def from_lists(cls, bundles: Iterable[Iterable[int]], m: int) -> "Allocation":
        return cls(tuple(frozenset(int(g) for g in b) for b in bundles), m)

    @classmethod
    def empty(cls, n: int, m: int) -> "Allocation":
        return cls(tuple(frozenset() for _ in range(n)), m)

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def assigned(self) -> frozenset:
        return frozenset().union(*self.bundles) if self.bundles else frozenset()

    @property
    def unassigned(self) -> frozenset:
        return frozenset(range(self.m)) - self.assigned

    def is_complete(self) -> bool:
        return len(self.assigned) == self.m

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]


def value(inst: Instance, i: int, goods: Iterable[int]) -> mpq:
    """Additive value of a bundle for agent ``i``."""
    if not 0 <= i < inst.n:
        raise IndexError(f"agent {i} out of range")
    row = inst.values[i]
    total = mpq(0)
    for g in goods:
        if not 0 <= g < inst.m:
            raise IndexError(f"good {g} out of range")
        total += row[g]
    return total


def is_ordered(inst: Instance) -> bool:
    return all(row[j] >= row[j + 1] for row in inst.values for j in range(inst.m - 1))


def descending_order(row: Sequence) -> list[int]:
    """Good indices sorted by value, highest first, ties by lowest index."""
    return sorted(range(len(row)), key=lambda g: (-row[g], g))


OrderMap = tuple[tuple[int, ...], ...]


def order_instance(inst: Instance) -> tuple[Instance, OrderMap]:
    """Return the ordered instance and, per agent, the original good at each rank."""
    perms = tuple(tuple(descending_order(row)) for row in inst.values)
    vals = tuple(tuple(row[g] for g in perm) for row, perm in zip(inst.values, perms))
    return Instance(vals, inst.m), perms


def unorder_allocation(inst: Instance, order_map: OrderMap, alloc: Allocation) -> Allocation:
    """Map an allocation of the ordered instance back to ``inst``.

    Ordered goods are visited in index order and the holder of each one picks
    her favourite original good still available.  Every agent ends up with at
    least her ordered-instance value.
    """
    if alloc.m != inst.m or alloc.n != inst.n:
        raise ValueError("allocation does not match the instance")
    owner = {}
    for i, b in enumerate(alloc.bundles):
        for g in b:
            owner[g] = i
    taken = [False] * inst.m
    out: list[list[int]] = [[] for _ in range(inst.n)]
    for j in range(inst.m):
        i = owner.get(j)
        if i is None:
            continue
        for g in order_map[i]:
            if not taken[g]:
                taken[g] = True
                out[i].append(g)
                break
    return Allocation.from_lists(out, inst.m)


def scale(inst: Instance, k) -> Instance:
    """Rescale every agent so her total value is exactly ``k``."""
    k = to_rational(k)
    if k <= 0:
        raise ValueError("scale target must be positive")
    rows = []
    for i, row in enumerate(inst.values):
        tot = sum(row, mpq(0))
        if tot == 0:
            raise ValueError(f"agent {i} values every good at zero")
        c = k / tot
        rows.append(tuple(v * c for v in row))
    return Instance(tuple(rows), inst.m)


def proportionality_bound(inst: Instance, i: int) -> mpq:
    return inst.total(i) / inst.n


@dataclass(frozen=True)
class FairnessReport:
    """Pairwise envy flags; ``envy[i][j]`` is True when i envies j's bundle.

    ``envy_ef1`` / ``envy_efx`` record envy that survives removing one good
    (some good for EF1, the least valued good for EFX).
    """

    values: tuple[mpq, ...]
    envy: tuple[tuple[bool, ...], ...]
    envy_ef1: tuple[tuple[bool, ...], ...]
    envy_efx: tuple[tuple[bool, ...], ...]

    @property
    def ef(self) -> bool:
        return not any(any(r) for r in self.envy)

    @property
    def ef1(self) -> bool:
        return not any(any(r) for r in self.envy_ef1)

    @property
    def efx(self) -> bool:
        return not any(any(r) for r in self.envy_efx)


def fairness_report(inst: Instance, alloc: Allocation, agents: Iterable[int] | None = None) -> FairnessReport:
    """Evaluate EF, EF1 and EFX among ``agents`` (default: everybody).

    The allocation must be complete unless a participant subset is given, in
    which case only envy between participants is examined.
    """
    if alloc.n != inst.n or alloc.m != inst.m:
        raise ValueError("allocation does not match the instance")
    if agents is None:
        if not alloc.is_complete():
            raise ValueError("fairness predicates need a complete allocation")
        agents = range(inst.n)
    part = set(agents)
    n = inst.n
    own = tuple(value(inst, i, alloc.bundles[i]) for i in range(n))
    ef, ef1, efx = ([[False] * n for _ in range(n)] for _ in range(3))
    for i in part:
        row = inst.values[i]
        for j in part:
            if i == j or not alloc.bundles[j]:
                continue
            other = [row[g] for g in alloc.bundles[j]]
            tot = sum(other, mpq(0))
            if tot <= own[i]:
                continue
            ef[i][j] = True
            ef1[i][j] = tot - max(other) > own[i]
            efx[i][j] = tot - min(other) > own[i]
    freeze = lambda mat: tuple(tuple(r) for r in mat)
    return FairnessReport(own, freeze(ef), freeze(ef1), freeze(efx))


def check_ef(inst: Instance, alloc: Allocation) -> bool:
    return fairness_report(inst, alloc).ef


def check_ef1(inst: Instance, alloc: Allocation) -> bool:
    return fairness_report(inst, alloc).ef1


def check_efx(inst: Instance, alloc: Allocation) -> bool:
    return fairness_report(inst, alloc).efx
