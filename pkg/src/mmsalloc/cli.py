"""Command line entry point ``mms``.

Exit status: 0 on success, 2 when an algorithm ran but its guarantee was not
met (or a checked allocation fails), 1 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

from gmpy2 import mpq

from . import io as mio
from .adversarial import EF1_NOT_HALF_MMS_ALLOCATION, fixed_instance, optimal_mms_counterexample
from .approx import (PipelineResult, half_agents_pipeline, mms_k_via_dummies, n_minus_one_pipeline,
                     two_agent_mms3)
from .bench import export_csv, records_to_csv, run_experiment, summarize
from .core import format_rational, to_rational, value
from .lone_divider import extended_experiment_algorithm, two_thirds_existence_engine, two_thirds_poly
from .oracle import BudgetExceeded, default_budget, mms, mms_at_most
from .reduce import lift_allocation, normalize, strong_normalize

ALGOS = ["two-agent-mms3", "n-minus-one", "half-ef1", "half-beta", "two-thirds", "extended", "mms-k"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def _select(text: str | None) -> list[int] | None:
    if text is None:
        return None
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mms", description="Maximin-share allocation toolkit")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--decimal", action="store_true", help="print values as 6-place decimals")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run an allocation algorithm")
    s.add_argument("--instance", required=True)
    s.add_argument("--algo", required=True, choices=ALGOS)
    s.add_argument("--k", type=int)
    s.add_argument("--existence", action="store_true", help="oracle-backed two-thirds engine")
    s.add_argument("--select", help="comma-separated agent indices")
    s.add_argument("--oracle", action="store_true", help="verify satisfaction with the exact oracle")
    s.add_argument("--out", help="write the allocation JSON here")

    o = sub.add_parser("oracle", help="exact maximin share of one agent")
    o.add_argument("--instance", required=True)
    o.add_argument("--agent", type=int, required=True)
    o.add_argument("--k", type=int)
    o.add_argument("--budget", type=int)

    nz = sub.add_parser("normalize", help="normalize an instance and save the trace")
    nz.add_argument("--instance", required=True)
    nz.add_argument("--strong", action="store_true")
    nz.add_argument("--out", help="normalized instance path")
    nz.add_argument("--trace-out", help="trace path")

    lf = sub.add_parser("lift", help="map an allocation back through a trace")
    lf.add_argument("--trace", required=True)
    lf.add_argument("--allocation", required=True)
    lf.add_argument("--out")

    c = sub.add_parser("check", help="check an (alpha, beta)-MMS guarantee")
    c.add_argument("--instance", required=True)
    c.add_argument("--allocation", required=True)
    c.add_argument("--alpha", default="1")
    c.add_argument("--beta", default="1")
    c.add_argument("--select")

    ce = sub.add_parser("counterexample", help="emit a counterexample instance")
    ce.add_argument("--family", required=True, choices=["tensor", "bag-gap", "tightness", "ef1-gap"])
    ce.add_argument("--n", type=int)
    ce.add_argument("--d", type=int)
    ce.add_argument("--eps")
    ce.add_argument("--eps-tilde")
    ce.add_argument("--out")

    ex = sub.add_parser("experiment", help="random-instance experiment grid")
    ex.add_argument("--n", required=True, help="range like 3..12")
    ex.add_argument("--m", required=True, help="range like 3..40")
    ex.add_argument("--trials", type=int, default=10)
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--certify", choices=["conservative", "oracle"], default="conservative")
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--no-timing", action="store_true", help="zero the runtime column")
    ex.add_argument("--out")
    return p


def _emit(args, payload: dict, text: str):
    if args.json:
        payload = {"schema": mio.SCHEMA, **payload}
        print(mio.dumps(payload))
    else:
        print(text)


def _write(path, obj):
    with open(path, "w") as fh:
        fh.write(mio.dumps(obj) + "\n")


def _fmt(args, x) -> str:
    return format_rational(x, args.decimal)


def _load_instance(path):
    return mio.instance_from_json(mio.load_file(path))


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    n = inst.n
    sel = _select(args.select)
    k = n
    if args.algo == "two-agent-mms3":
        alloc = two_agent_mms3(inst)
        k = 3
        certs = {i: "value" for i in range(2) if value(inst, i, alloc.bundles[i]) * 3 >= inst.total(i)}
        res = PipelineResult(alloc, frozenset(certs), mpq(1), certs)
        need = 2
    elif args.algo == "n-minus-one":
        res, need = n_minus_one_pipeline(inst), n - 1
    elif args.algo in ("half-ef1", "half-beta"):
        variant = "ef1" if args.algo == "half-ef1" else "beta_half"
        res = half_agents_pipeline(inst, variant, selected=sel)
        need = len(sel) if sel is not None else n // 2
    elif args.algo == "two-thirds":
        if args.existence:
            res = two_thirds_existence_engine(inst, sel)
        else:
            res = two_thirds_poly(inst, sel)
        need = len(sel) if sel is not None else (2 * n) // 3
    elif args.algo == "extended":
        res, need = extended_experiment_algorithm(inst), (2 * n) // 3
    else:
        if args.k is None:
            raise UsageError("--algo mms-k needs --k")
        k = args.k
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = mms_k_via_dummies(inst, k)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        # with k = n nothing is padded and the two-thirds contract applies
        need = n if k > n else (2 * n) // 3
    alloc = res.allocation
    agents = []
    oracle_ok = 0
    for i in range(n):
        got = value(inst, i, alloc.bundles[i])
        row = {"agent": i, "bundle": sorted(alloc.bundles[i]), "value": _fmt(args, got),
               "certificate": res.certificates.get(i, "none")}
        if args.oracle:
            target = got / res.beta if res.beta else None
            ok = target is None or mms_at_most(inst, i, k, target)
            row["mms"] = _fmt(args, mms(inst, i, k).value)
            row["oracle_satisfied"] = ok
            oracle_ok += ok
        agents.append(row)
    count = oracle_ok if args.oracle else len(res.satisfied)
    failed = res.shortfall or count < need
    if args.out:
        _write(args.out, mio.allocation_to_json(alloc))
    lines = [f"algorithm: {args.algo}   beta: {_fmt(args, res.beta)}   k: {k}"]
    for row in agents:
        extra = f"  mms={row['mms']}  ok={row['oracle_satisfied']}" if args.oracle else ""
        lines.append(f"agent {row['agent']}: value {row['value']}  [{row['certificate']}]  "
                     f"bundle {row['bundle']}{extra}")
    lines.append(f"satisfied: {count}/{n} (required {need})" + ("  SHORTFALL" if res.shortfall else ""))
    _emit(args, {"command": "solve", "algorithm": args.algo, "beta": format_rational(res.beta), "k": k,
                 "agents": agents, "satisfied": count, "required": need, "shortfall": res.shortfall,
                 "allocation": mio.allocation_to_json(alloc)}, "\n".join(lines))
    return 2 if failed else 0


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    k = args.k or inst.n
    res = mms(inst, args.agent, k, budget=args.budget or default_budget())
    parts = [sorted(b) for b in res.partition]
    text = f"MMS^{k} of agent {args.agent}: {_fmt(args, res.value)}\npartition: {parts}"
    _emit(args, {"command": "oracle", "agent": args.agent, "k": k, "value": format_rational(res.value),
                 "partition": parts}, text)
    return 0


def cmd_normalize(args) -> int:
    inst = _load_instance(args.instance)
    if args.strong:
        out, trace = strong_normalize(inst)
    else:
        out, trace = normalize(inst)
    inst_json, trace_json = mio.instance_to_json(out), mio.trace_to_json(trace)
    if args.out:
        _write(args.out, inst_json)
    if args.trace_out:
        _write(args.trace_out, trace_json)
    if args.json or not (args.out and args.trace_out):
        print(mio.dumps({"schema": mio.SCHEMA, "instance": inst_json, "trace": trace_json}))
    else:
        print(f"normalized: n={out.n}, m={out.m}, reduced agents {list(trace.reduced_agents())}")
    return 0


def cmd_lift(args) -> int:
    trace = mio.trace_from_json(mio.load_file(args.trace))
    n, m = trace._final_shape()
    alloc = mio.allocation_from_json(mio.load_file(args.allocation), m=m)
    lifted = lift_allocation(trace, alloc)
    obj = mio.allocation_to_json(lifted)
    if args.out:
        _write(args.out, obj)
    print(mio.dumps({"schema": mio.SCHEMA, **obj}) if args.json else mio.dumps(obj))
    return 0


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    alloc = mio.allocation_from_json(mio.load_file(args.allocation), m=inst.m)
    if alloc.n != inst.n:
        raise UsageError("allocation and instance disagree on the number of agents")
    alpha, beta = to_rational(args.alpha), to_rational(args.beta)
    need = int(math.floor(alpha * inst.n))
    verdicts = []
    for i in range(inst.n):
        got = value(inst, i, alloc.bundles[i])
        m_i = mms(inst, i, inst.n).value
        verdicts.append({"agent": i, "value": _fmt(args, got), "mms": _fmt(args, m_i), "ok": got >= beta * m_i})
    sel = _select(args.select)
    if sel is not None:
        if len(set(sel)) != need:
            raise UsageError(f"--select must name exactly {need} agents")
        passed = all(verdicts[i]["ok"] for i in sel)
    else:
        passed = sum(v["ok"] for v in verdicts) >= need
    lines = [f"agent {v['agent']}: value {v['value']}  mms {v['mms']}  {'ok' if v['ok'] else 'FAIL'}"
             for v in verdicts]
    lines.append(f"({_fmt(args, alpha)}, {_fmt(args, beta)})-MMS: {'holds' if passed else 'fails'} "
                 f"({sum(v['ok'] for v in verdicts)}/{inst.n} agents at beta*MMS, need {need})")
    _emit(args, {"command": "check", "agents": verdicts, "required": need, "passed": passed}, "\n".join(lines))
    return 0 if passed else 2


def cmd_counterexample(args) -> int:
    fam = args.family
    extra = {}
    if fam == "tensor":
        if args.n is None or args.d is None:
            raise UsageError("--family tensor needs --n and --d")
        ce = optimal_mms_counterexample(args.n, args.d, args.eps, args.eps_tilde)
        inst = ce.instance
        extra = {"groups": list(ce.groups), "goods": [list(k) for k in ce.goods]}
    elif fam == "tightness":
        kw = {}
        if args.n is not None:
            kw["n"] = args.n
        if args.eps is not None:
            kw["eps"] = args.eps
        if args.eps_tilde is not None:
            kw["eps_tilde"] = args.eps_tilde
        inst = fixed_instance("tightness", **kw)
    elif fam == "bag-gap":
        inst = fixed_instance("bag_filling_gap")
    else:
        inst = fixed_instance("ef1_not_half_mms")
        extra = {"allocation": [list(b) for b in EF1_NOT_HALF_MMS_ALLOCATION]}
    obj = {**mio.instance_to_json(inst, args.decimal), **extra}
    if args.out:
        _write(args.out, obj)
    else:
        print(mio.dumps(obj))
    return 0


def cmd_experiment(args) -> int:
    recs = run_experiment(_range(args.n), _range(args.m), args.trials, args.seed, args.certify,
                          workers=args.workers, timing=not args.no_timing)
    if args.out:
        export_csv(recs, args.out)
    summary = summarize(recs)
    if args.json:
        print(mio.dumps({"schema": mio.SCHEMA, "command": "experiment", "records": len(recs),
                         "mean_fraction": summary["mean_fraction"],
                         "per_n": {str(k): v for k, v in summary["per_n"].items()}}))
    elif args.out:
        print(f"{len(recs)} records, mean certified fraction {summary['mean_fraction']:.4f} -> {args.out}")
    else:
        sys.stdout.write(records_to_csv(recs))
    return 0


COMMANDS = {"solve": cmd_solve, "oracle": cmd_oracle, "normalize": cmd_normalize, "lift": cmd_lift,
            "check": cmd_check, "counterexample": cmd_counterexample, "experiment": cmd_experiment}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return COMMANDS[args.cmd](args)
    except (UsageError, ValueError, IndexError, KeyError, OSError) as e:
        print(f"mms: error: {e}", file=sys.stderr)
        return 1
    except BudgetExceeded as e:
        print(f"mms: {e} (raise MMS_BUDGET or --budget)", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
