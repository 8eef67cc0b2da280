"""JSON reading and writing for instances, allocations and traces.

Values are written as exact "p/q" strings.  On input, numbers and strings
may be integers, decimals (read exactly, so 0.99 is 99/100) or fractions.
"""

from __future__ import annotations

import json
from typing import Any

from gmpy2 import mpq

from .core import Allocation, Instance, format_rational, to_rational
from .reduce import NormalizationTrace, OrderStep, ReduceStep, ScaleStep, TrimStep

SCHEMA = 1


def loads(text: str) -> Any:
    # keep float literals as text so decimals convert exactly
    return json.loads(text, parse_float=str)


def load_file(path) -> Any:
    with open(path) as fh:
        return loads(fh.read())


def instance_to_json(inst: Instance, decimal: bool = False) -> dict:
    return {"n": inst.n, "m": inst.m,
            "valuations": [[format_rational(v, decimal) for v in row] for row in inst.values]}


def instance_from_json(obj: dict) -> Instance:
    rows = obj["valuations"]
    m = obj.get("m", len(rows[0]) if rows else 0)
    inst = Instance.from_rows(rows, m=m)
    if "n" in obj and obj["n"] != inst.n:
        raise ValueError(f"instance declares n={obj['n']} but has {inst.n} rows")
    return inst


def allocation_to_json(alloc: Allocation) -> dict:
    return {"m": alloc.m, "bundles": alloc.as_lists()}


def allocation_from_json(obj: dict, m: int | None = None) -> Allocation:
    bundles = obj["bundles"]
    if m is None:
        m = obj.get("m")
    if m is None:
        m = 1 + max((g for b in bundles for g in b), default=-1)
    return Allocation.from_lists(bundles, m)


def _rows(values) -> list[list[str]]:
    return [[format_rational(v) for v in row] for row in values]


def trace_to_json(trace: NormalizationTrace) -> dict:
    steps = []
    for st in trace.steps:
        if isinstance(st, OrderStep):
            steps.append({"op": "order", "source": _rows(st.source.values), "perm": [list(p) for p in st.order_map]})
        elif isinstance(st, ScaleStep):
            steps.append({"op": "scale", "factors": [format_rational(c) for c in st.factors]})
        elif isinstance(st, ReduceStep):
            steps.append({"op": "reduce", "agent": st.agent, "bundle": list(st.bundle),
                          "kept_agents": list(st.kept_agents), "kept_goods": list(st.kept_goods)})
        elif isinstance(st, TrimStep):
            steps.append({"op": "trim", "values": _rows(st.values)})
    out = {"schema": SCHEMA, "n": trace.n, "m": trace.m, "steps": steps}
    if trace.partitions:
        out["partitions"] = {str(i): [sorted(b) for b in part] for i, part in trace.partitions.items()}
    return out


def trace_from_json(obj: dict) -> NormalizationTrace:
    steps = []
    for st in obj["steps"]:
        op = st["op"]
        if op == "order":
            src = Instance.from_rows(st["source"], m=len(st["perm"][0]) if st["perm"] else 0)
            steps.append(OrderStep(src, tuple(tuple(p) for p in st["perm"])))
        elif op == "scale":
            steps.append(ScaleStep(tuple(to_rational(c) for c in st["factors"])))
        elif op == "reduce":
            steps.append(ReduceStep(st["agent"], tuple(st["bundle"]), tuple(st["kept_agents"]),
                                    tuple(st["kept_goods"])))
        elif op == "trim":
            steps.append(TrimStep(tuple(tuple(to_rational(v) for v in row) for row in st["values"])))
        else:
            raise ValueError(f"unknown trace step {op!r}")
    parts = {int(i): tuple(frozenset(b) for b in part) for i, part in obj.get("partitions", {}).items()}
    return NormalizationTrace(obj["n"], obj["m"], tuple(steps), parts)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, default=lambda x: format_rational(x) if isinstance(x, type(mpq())) else str(x))
