"""Two-thirds lone-divider algorithms and the instances where bag-filling falls short."""

from mmsalloc import extended_experiment_algorithm, order_instance, two_thirds_existence_engine, two_thirds_poly
from mmsalloc.adversarial import bag_filling_gap, tightness
from mmsalloc.lone_divider import DividerState, divider_partition_poly
from mmsalloc.oracle import mms_satisfied_agents

gap = bag_filling_gap()
ordered, _ = order_instance(gap)
state = DividerState(ordered, 6, list(range(ordered.m)), list(range(6)))
plain = divider_partition_poly(state, 0, pairing=False)
print(f"9 agents, plain bag-filling forms {len(plain)} bundles for 6 selected agents")
res = two_thirds_existence_engine(gap)
print("existence engine satisfies:", mms_satisfied_agents(gap, res.allocation))

tight = tightness(9)
res = two_thirds_poly(tight)
print(f"tightness instance: shortfall={res.shortfall}, satisfied {len(mms_satisfied_agents(tight, res.allocation))}/9")
for r in res.rounds:
    print(f"  divider {r.divider}: n'={r.n_prime} pairs={r.pairs} bags={r.bags} matched={r.matched}")

ext = extended_experiment_algorithm(tight)
print("extended algorithm certificates:", dict(sorted(ext.certificates.items())))
