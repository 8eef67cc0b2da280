"""Normalization with a replayable trace, then lifting an allocation back."""

from mmsalloc import Allocation, Instance, lift_allocation, mms, normalize, strong_normalize, value
from mmsalloc.core import format_rational

inst = Instance.from_rows([
    [10, 6, 5, 4, 3, 1, 1],
    [9, 8, 2, 2, 2, 2, 1],
    [4, 4, 4, 4, 4, 3, 3],
    [7, 7, 1, 1, 1, 1, 1],
])

norm, trace = normalize(inst)
print("steps:", [type(s).__name__ for s in trace.steps])
print("reduced agents:", trace.reduced_agents(), "-> residual agents", trace.agent_map())
for a in range(norm.n):
    print(f"  residual agent {a}: values {[format_rational(v) for v in norm.values[a]]}")

# give the residual goods out round-robin and map the result back
inner = Allocation.from_lists([[g for g in range(norm.m) if g % norm.n == a] for a in range(norm.n)], norm.m)
lifted = lift_allocation(trace, inner)
for i in range(inst.n):
    got, share = value(inst, i, lifted.bundles[i]), mms(inst, i, inst.n).value
    print(f"agent {i}: bundle {sorted(lifted.bundles[i])} worth {got}, MMS {share}")

strong, strace = strong_normalize(inst)
print("strongly normalized MMS values:",
      [format_rational(mms(strong, a, strong.n).value) for a in range(strong.n)])
