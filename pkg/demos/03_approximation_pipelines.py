"""The (n-1)-agent, half-agent and MMS^k pipelines, checked against the oracle."""

import numpy as np

from mmsalloc import (Instance, general_n_beta, half_agents_pipeline, mms_k_via_dummies, n_minus_one_pipeline,
                      two_agent_mms3)
from mmsalloc.oracle import mms_satisfied_agents

rng = np.random.default_rng(5)

for n in (4, 5, 6, 7):
    inst = Instance.from_rows(rng.integers(1, 50, size=(n, 10)).tolist())
    res = n_minus_one_pipeline(inst)
    ok = mms_satisfied_agents(inst, res.allocation, beta=res.beta)
    print(f"n={n}: beta={general_n_beta(n)}  agents at beta*MMS: {len(ok)}/{n}  certified {sorted(res.satisfied)}")

inst = Instance.from_rows([[6, 5, 4, 3, 2, 1], [1, 2, 3, 4, 5, 6]])
alloc = two_agent_mms3(inst)
print("two agents, MMS^3 each:", alloc.as_lists(), mms_satisfied_agents(inst, alloc, k=3))

inst = Instance.from_rows(rng.integers(1, 30, size=(6, 11)).tolist())
for variant in ("ef1", "beta_half"):
    res = half_agents_pipeline(inst, variant)
    print(f"half pipeline ({variant}): full MMS for {mms_satisfied_agents(inst, res.allocation)}")

inst = Instance.from_rows(rng.integers(1, 30, size=(3, 9)).tolist())
res = mms_k_via_dummies(inst, 4)
print("three agents with one dummy, MMS^4 met by:", mms_satisfied_agents(inst, res.allocation, k=4))
