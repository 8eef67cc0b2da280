"""Tensor construction where no allocation gives every agent her full MMS."""

from mmsalloc import equi_partition_search, optimal_mms, optimal_mms_counterexample, tensor_S, tensor_T, value
from mmsalloc.adversarial import default_eps, is_slice_family

n, d = 4, 2
eps, eps_t = default_eps(n, d)
S, T = tensor_S(n, d), tensor_T(n, d, eps)
print("S slice sums:", [str(S.slice_sum(1, i)) for i in range(1, n + 1)])
print("T slice sums:", [str(T.slice_sum(2, i)) for i in range(1, n + 1)])

parts = equi_partition_search(S + T, n)
print(f"S+T splits into {n} equal parts {len(parts)} ways:", [is_slice_family(S + T, p) for p in parts])

ce = optimal_mms_counterexample(n, d)
print("agent groups:", ce.groups)
res = optimal_mms(ce.instance, all_witnesses=True)
print(f"best uniform fraction = 1 - {1 - res.lam}, over {len(res.witnesses)} optimal allocations")
best = res.witnesses[0]
print("full-MMS agents in one optimum:",
      [i for i in range(n) if value(ce.instance, i, best.bundles[i]) >= 1])
