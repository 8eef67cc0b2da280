"""Random-instance experiment harness.

Every trial draws its own seed from (master seed, n, m, trial), so records do
not depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np
from gmpy2 import mpq

from .core import Instance
from .lone_divider import extended_experiment_algorithm
from .oracle import BudgetExceeded, count_mms_satisfied

GRID = 10 ** 6
CSV_FIELDS = ["n", "m", "trial", "seed", "satisfied", "total", "cert_reduction", "cert_value",
              "cert_oracle", "runtime_ms"]


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    m: int
    trial: int
    seed: int
    satisfied: int
    total: int
    cert_reduction: int
    cert_value: int
    cert_oracle: int | None = None  # None: not computed, -1: oracle budget exceeded
    runtime_ms: float = 0.0

    @property
    def fraction(self) -> float:
        return self.satisfied / self.total


def trial_seed(master_seed: int, n: int, m: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, n, m, trial]).generate_state(1, np.uint64)[0])


def gen_uniform_instance(n: int, m: int, seed: int) -> Instance:
    """i.i.d. values on the grid {1..10^6}/10^6, ordered, scaled to v_i(M) = n."""
    rng = np.random.default_rng(seed)
    raw = rng.integers(1, GRID + 1, size=(n, m))
    rows = []
    for r in raw:
        ints = sorted((int(x) for x in r), reverse=True)
        tot = sum(ints)
        rows.append(tuple(mpq(n * x, tot) for x in ints))
    return Instance(tuple(rows), m)


def _run_one(args) -> ExperimentRecord:
    n, m, trial, master_seed, certify, timing, budget = args
    seed = trial_seed(master_seed, n, m, trial)
    inst = gen_uniform_instance(n, m, seed)
    t0 = time.perf_counter()
    res = extended_experiment_algorithm(inst)
    ms = (time.perf_counter() - t0) * 1000 if timing else 0.0
    red = sum(1 for why in res.certificates.values() if why == "reduction")
    val = sum(1 for why in res.certificates.values() if why == "value")
    oracle = None
    if certify == "oracle":
        try:
            oracle = count_mms_satisfied(inst, res.allocation, budget=budget)
        except BudgetExceeded:
            oracle = -1
    return ExperimentRecord(n, m, trial, seed, red + val, n, red, val, oracle, round(ms, 3))


def run_experiment(n_range: Iterable[int], m_range: Iterable[int], trials: int, master_seed: int,
                   certify: str = "conservative", workers: int | None = None, timing: bool = True,
                   budget: int | None = None) -> list[ExperimentRecord]:
    """Run the extended algorithm over every (n, m >= n) cell of the grid.

    Conservative certification counts agents served by a reduction or holding
    a normalized bundle worth at least 1.  ``certify="oracle"`` also records
    the exact count (only for n <= 6 and m <= 16).  With ``timing=False`` the
    runtime column is zero so output files are byte-reproducible.
    """
    if certify not in ("conservative", "oracle"):
        raise ValueError("certify must be 'conservative' or 'oracle'")
    n_range, m_range = list(n_range), list(m_range)
    jobs = [(n, m, t, master_seed, certify, timing, budget)
            for n in n_range for m in m_range if m >= n for t in range(trials)]
    if certify == "oracle" and any(n > 6 or m > 16 for n, m, *_ in jobs):
        raise ValueError("oracle certification is limited to n <= 6 and m <= 16")
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_run_one, jobs, chunksize=16))
    return [_run_one(j) for j in jobs]


def _fmt(rec: ExperimentRecord) -> list[str]:
    row = asdict(rec)
    row["cert_oracle"] = "" if rec.cert_oracle is None else str(rec.cert_oracle)
    row["runtime_ms"] = f"{rec.runtime_ms:.3f}"
    return [str(row[f]) for f in CSV_FIELDS]


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in sorted(records, key=lambda r: (r.n, r.m, r.trial)):
        w.writerow(_fmt(rec))
    return buf.getvalue()


def export_csv(records: Iterable[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def read_csv(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            out.append(ExperimentRecord(
                int(row["n"]), int(row["m"]), int(row["trial"]), int(row["seed"]), int(row["satisfied"]),
                int(row["total"]), int(row["cert_reduction"]), int(row["cert_value"]),
                None if row["cert_oracle"] == "" else int(row["cert_oracle"]), float(row["runtime_ms"])))
        return out


def summarize(records: Iterable[ExperimentRecord]) -> dict:
    """Mean certified fraction overall and per n."""
    records = list(records)
    per_n: dict[int, list[float]] = {}
    for r in records:
        per_n.setdefault(r.n, []).append(r.fraction)
    mean = sum(r.fraction for r in records) / len(records) if records else float("nan")
    return {"mean_fraction": mean, "per_n": {n: sum(v) / len(v) for n, v in sorted(per_n.items())}}
