"""Exact maximin shares and the fairness checks on a small instance."""

from mmsalloc import (Allocation, Instance, check_ef1, check_efx, envy_graph_efx, mms, order_instance,
                      unorder_allocation, value)
from mmsalloc.core import format_rational

inst = Instance.from_rows([
    [8, 7, 5, 4, 3, 2, 1],
    [2, 9, 9, 3, 3, 1, 1],
    [5, 5, 5, 5, 1, 1, 1],
])

for i in range(inst.n):
    res = mms(inst, i, inst.n)
    parts = [sorted(p) for p in res.partition]
    print(f"agent {i}: MMS^3 = {format_rational(res.value)}  via {parts}")

# envy-graph EFX runs on the ordered version; map the answer back
ordered, perm = order_instance(inst)
alloc = unorder_allocation(inst, perm, envy_graph_efx(ordered, range(inst.n)))
print("EFX allocation:", alloc.as_lists())
print("EFX:", check_efx(inst, alloc), " EF1:", check_ef1(inst, alloc))
for i, b in enumerate(alloc.bundles):
    print(f"  agent {i} gets {format_rational(value(inst, i, b))}, MMS {format_rational(mms(inst, i, 3).value)}")

bad = Allocation.from_lists([[0, 1, 2, 3], [4, 5], [6]], inst.m)
print("lopsided allocation EF1:", check_ef1(inst, bad))
