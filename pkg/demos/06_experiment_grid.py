"""A small random-instance experiment with conservative certification."""

import sys

from mmsalloc import export_csv, run_experiment
from mmsalloc.bench import summarize

out = sys.argv[1] if len(sys.argv) > 1 else "experiment.csv"
recs = run_experiment(range(3, 9), range(3, 25, 3), 20, 2024, timing=False)
export_csv(recs, out)
s = summarize(recs)
print(f"{len(recs)} trials written to {out}")
print(f"mean certified fraction {s['mean_fraction']:.4f}")
for n, f in s["per_n"].items():
    print(f"  n={n}: {f:.4f}")

# exact counts on a corner of the grid
exact = run_experiment(range(3, 6), [6, 9, 12], 10, 7, certify="oracle", timing=False)
under = sum(r.cert_oracle - r.satisfied for r in exact)
print(f"oracle found {under} more satisfied agents than the certificates over {len(exact)} trials")
